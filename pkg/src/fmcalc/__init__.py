"""Exact cohomological Fourier-Mukai calculus on elliptic fibrations."""

from .ring import GradedClass, QQi, RingPresentation, as_fraction
from .geometry import (
    BaseCurve,
    BaseSurface,
    FibrationModel,
    build_base,
    build_fibration,
    catalog_names,
    effective_check,
    elliptic_surface,
    todd_relative,
    todd_total,
    c2_tangent,
)
from .fm import ChernData2, ChernData3, fm_cy3, fm_surface, grr_transform, factorization_check

__version__ = "0.1.0"

__all__ = [
    "GradedClass",
    "QQi",
    "RingPresentation",
    "as_fraction",
    "BaseCurve",
    "BaseSurface",
    "FibrationModel",
    "build_base",
    "build_fibration",
    "catalog_names",
    "effective_check",
    "elliptic_surface",
    "todd_relative",
    "todd_total",
    "c2_tangent",
    "ChernData2",
    "ChernData3",
    "fm_cy3",
    "fm_surface",
    "grr_transform",
    "factorization_check",
]
