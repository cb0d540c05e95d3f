"""Exception hierarchy for the engine.

Every user-facing failure derives from :class:`XctlabError` so callers (CLI,
service) can map domain errors to exit code 1 / HTTP 4xx while anything else
stays an internal error.
"""


class XctlabError(Exception):
    """Base class for all engine errors."""


class MetaError(XctlabError):
    """Sidecar metadata is missing, malformed or inconsistent."""


class MissingKeyError(MetaError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"required sidecar key missing: {key}")


class BadValueError(MetaError):
    def __init__(self, key: str, token: str, reason: str = ""):
        self.key = key
        self.token = token
        msg = f"bad value for {key}: {token!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class UnknownDtypeError(MetaError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"unknown element type: {token!r}")


class LengthMismatchError(XctlabError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"raw payload length mismatch: expected {expected} bytes, got {actual}")


class IndexOutOfRangeError(XctlabError):
    def __init__(self, axis: str, index: int, size: int):
        self.axis = axis
        self.index = index
        self.size = size
        super().__init__(f"slice index {index} out of range for axis {axis} (size {size})")


class BorderVoxelError(XctlabError):
    def __init__(self, point):
        self.point = tuple(point)
        super().__init__(f"voxel {self.point} is too close to the volume border for a Hessian")


class DegenerateTraceError(XctlabError):
    """Trace whose endpoints coincide; no straight length is defined."""


class TableError(XctlabError):
    """Fiber-table parsing or validation failure."""


class HeaderMismatchError(TableError):
    def __init__(self, missing, extra):
        self.missing = list(missing)
        self.extra = list(extra)
        super().__init__(f"CSV header mismatch: missing={self.missing} extra={self.extra}")


class RowArityError(TableError):
    def __init__(self, row: int, got: int, expected: int):
        self.row = row
        self.got = got
        self.expected = expected
        super().__init__(f"row {row}: expected {expected} fields, got {got}")


class NumericParseError(TableError):
    def __init__(self, row: int, column: str, token: str):
        self.row = row
        self.column = column
        self.token = token
        super().__init__(f"row {row}, column {column}: cannot parse {token!r} as a number")


class DuplicateIdError(TableError):
    def __init__(self, fiber_id: int):
        self.fiber_id = fiber_id
        super().__init__(f"duplicate fiber id {fiber_id}")


class UnknownColumnError(TableError):
    def __init__(self, name: str, valid):
        self.name = name
        self.valid = list(valid)
        super().__init__(f"unknown column {name!r}; valid columns: {', '.join(self.valid)}")


class RecordInvariantError(TableError):
    """A fiber record violates a schema invariant (e.g. curved < straight)."""


class DegenerateFiberError(XctlabError):
    """Fiber with zero straight length cannot be meshed."""


class ChartError(XctlabError):
    """Invalid chart parameters or input."""


class EmptyInputError(ChartError):
    pass


class BadRangeError(ChartError):
    pass


class TooFewValuesError(ChartError):
    pass


class NonNumericError(ChartError):
    pass


class TrackingError(XctlabError):
    pass


class DegenerateCornersError(TrackingError):
    """Marker corners are (near-)collinear; no pose can be recovered."""


class UnknownMarkerError(TrackingError):
    def __init__(self, marker_id: int):
        self.marker_id = marker_id
        super().__init__(f"marker id {marker_id} is not registered to any dataset")


class DictionaryError(TrackingError):
    """Marker dictionary construction or lookup failure."""


class ServiceError(XctlabError):
    pass


class NoActiveDatasetError(ServiceError):
    def __init__(self):
        super().__init__("session has no active dataset")


class BadParamsError(ServiceError):
    def __init__(self, reason: str):
        super().__init__(f"bad view parameters: {reason}")


class BadTFError(ServiceError):
    def __init__(self, reason: str):
        super().__init__(f"bad transfer function: {reason}")


class UnknownDatasetError(ServiceError):
    def __init__(self, dataset_id: str):
        self.dataset_id = dataset_id
        super().__init__(f"unknown dataset id {dataset_id!r}")
