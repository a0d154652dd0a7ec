"""Generalized simplex gradients with approximation and floating-point error bounds."""

from .bounds import BoundBreakdown, BoundInputs, breakdown, delta_min, rough_inputs, scheme_delta_min
from .errors import (
    DegenerateRotation,
    InvalidInput,
    MissingRegime,
    NotPoised,
    RankDeficient,
    SimplexGradError,
    StabilityViolation,
)
from .geometry import AdaptedPair, SampleSet, geometry, reflect
from .linalg import pinv
from .schemes import SchemeKind, build, evaluate, project

__version__ = "0.1.0"

__all__ = [
    "AdaptedPair",
    "BoundBreakdown",
    "BoundInputs",
    "DegenerateRotation",
    "InvalidInput",
    "MissingRegime",
    "NotPoised",
    "RankDeficient",
    "SampleSet",
    "SchemeKind",
    "SimplexGradError",
    "StabilityViolation",
    "breakdown",
    "build",
    "delta_min",
    "evaluate",
    "geometry",
    "pinv",
    "project",
    "reflect",
    "rough_inputs",
    "scheme_delta_min",
]
