"""Fiber extraction: blur, Hessian eigenanalysis, ridge tracing,
characterization and phantom generation."""

from .blur import gaussian_blur, gaussian_kernel
from .characterize import characterize, extract_fibers
from .hessian import HessianEigen, eig3_sym, hessian_at
from .phantom import (
    CylinderSpec,
    ground_truth_table,
    random_phantom,
    rasterize_cylinders,
)
from .tracing import ExtractionConfig, FiberTrace, trace_fibers
from .tubularity import tubularity, tubularity_batch

__all__ = [
    "CylinderSpec",
    "ExtractionConfig",
    "FiberTrace",
    "HessianEigen",
    "characterize",
    "eig3_sym",
    "extract_fibers",
    "gaussian_blur",
    "gaussian_kernel",
    "ground_truth_table",
    "hessian_at",
    "random_phantom",
    "rasterize_cylinders",
    "trace_fibers",
    "tubularity",
    "tubularity_batch",
]
