"""Periodic-grid fields, spectral calculus, eigenvalue kernels and generators."""
from .core import (
    SOBOLEV_CONSTANT,
    FieldError,
    IsometryResult,
    ScalarField,
    SobolevResult,
    SpectralVectorField,
    StrainField,
    UndefinedRatio,
    curl,
    divergence_residual,
    isometry_check,
    lq_norm_values,
    norm,
    project_div_free,
    sobolev_check,
    spectral_l2,
    strain,
    strain_eigenvalues,
)
from .eigen import symmetric_eigenvalues
from .generators import gaussian_bump, make_field, random_div_free, shell_spectrum, taylor_green
from .grid import Grid
from .snapshot import Snapshot, read_snapshot, write_snapshot

__all__ = [
    "SOBOLEV_CONSTANT",
    "FieldError",
    "Grid",
    "IsometryResult",
    "ScalarField",
    "Snapshot",
    "SobolevResult",
    "SpectralVectorField",
    "StrainField",
    "UndefinedRatio",
    "curl",
    "divergence_residual",
    "gaussian_bump",
    "isometry_check",
    "lq_norm_values",
    "make_field",
    "norm",
    "project_div_free",
    "random_div_free",
    "read_snapshot",
    "shell_spectrum",
    "sobolev_check",
    "spectral_l2",
    "strain",
    "strain_eigenvalues",
    "symmetric_eigenvalues",
    "taylor_green",
    "write_snapshot",
]
