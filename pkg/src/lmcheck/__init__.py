"""Exact rearrangement-based norms on step and grid functions, plus a harness
that checks interpolation, embedding and John-Nirenberg type inequalities."""

from .rearrangement import (
    INFINITY,
    InvalidIndices,
    LorentzIndices,
    Method,
    ProfileError,
    RearrangementProfile,
    StepProfile,
    distribution,
    evaluate_star,
    hardy_average,
    hardy_derivative,
    lorentz_norm,
    lp_norm,
    normalize,
    rearrange,
    star_lorentz_norm,
    w_functional,
    weak_lp_norm,
)
from .grid import (
    Completeness,
    Cube,
    CubeFamily,
    Flavor,
    GridError,
    GridFunction,
    MorreyIndices,
    all_cubes,
    ball_average,
    bmo_norm,
    family_norm,
    global_profile,
    ingest_grid,
    local_lorentz_norm,
    mean_oscillation,
    restrict_profile,
)
from .report import CheckReport

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "InvalidIndices",
    "LorentzIndices",
    "Method",
    "ProfileError",
    "RearrangementProfile",
    "StepProfile",
    "distribution",
    "evaluate_star",
    "hardy_average",
    "hardy_derivative",
    "lorentz_norm",
    "lp_norm",
    "normalize",
    "rearrange",
    "star_lorentz_norm",
    "w_functional",
    "weak_lp_norm",
    "Completeness",
    "Cube",
    "CubeFamily",
    "Flavor",
    "GridError",
    "GridFunction",
    "MorreyIndices",
    "all_cubes",
    "ball_average",
    "bmo_norm",
    "family_norm",
    "global_profile",
    "ingest_grid",
    "local_lorentz_norm",
    "mean_oscillation",
    "restrict_profile",
    "CheckReport",
]
