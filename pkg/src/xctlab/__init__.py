"""xctlab: a desk-scale XCT material inspection engine.

Loads RAW X-ray CT volumes with a text sidecar, extracts per-fiber
characteristics from them, renders volumes (MIP / DVR) and cylinder-based
fiber models, tracks square fiducial markers to pose-sync virtual content
with a physical sample, computes chart data for abstract analysis, and
serves it all over an HTTP + server-sent-events API.
"""

__version__ = "0.1.0"

from .errors import XctlabError  # noqa: F401
