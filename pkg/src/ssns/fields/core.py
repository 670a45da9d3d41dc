"""Field containers and spectral calculus on the periodic grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from .eigen import symmetric_eigenvalues
from .grid import Grid

#: Sharp Sobolev constant in ‖f‖_{L⁶} ≤ C ‖∇f‖_{L²} on ℝ³.
SOBOLEV_CONSTANT = float((1.0 / np.sqrt(3.0)) * (2.0 / np.pi) ** (2.0 / 3.0))

DIV_FREE_TOL = 1e-12
ISOMETRY_TOL = 1e-10


class FieldError(ValueError):
    """Invalid field data or a violated field precondition."""


class UndefinedRatio(ArithmeticError):
    """Raised when the Sobolev ratio has a vanishing denominator."""


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real scalar sampled on every grid point."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise FieldError(f"scalar field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise FieldError("scalar field contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def cell(self) -> float:
        return self.grid.cell_volume

    def spectral(self) -> np.ndarray:
        return self.grid.forward(self.values)

    def gradient(self) -> np.ndarray:
        """Spectral gradient, shape ``(3, n, n, n)``."""
        fh = self.spectral()
        return np.stack([self.grid.inverse(1j * k * fh) for k in self.grid.wavenumbers])


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Real vector field stored as half-spectrum Fourier coefficients ``(3, n, n, n//2+1)``.

    The mean mode is always zero.  If ``div_free`` is set the coefficients are
    checked against ``k·û = 0`` on construction.
    """

    grid: Grid
    coeffs: np.ndarray
    div_free: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.shape != (3,) + self.grid.spectral_shape:
            raise FieldError(f"coefficient shape {c.shape} does not match grid")
        if not np.all(np.isfinite(c)):
            raise FieldError("vector field contains non-finite coefficients")
        c[:, 0, 0, 0] = 0.0
        object.__setattr__(self, "coeffs", c)
        if self.div_free:
            res = divergence_residual(self)
            if res > DIV_FREE_TOL:
                raise FieldError(f"field flagged divergence-free has relative residual {res:.3e}")

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray, div_free: bool = False) -> "SpectralVectorField":
        values = np.asarray(values, dtype=float)
        if values.shape != (3,) + grid.shape:
            raise FieldError(f"vector field shape {values.shape} does not match grid")
        # round trip through the real transform guarantees conjugate symmetry
        return cls(grid, grid.forward(values), div_free=div_free)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVectorField":
        return cls(grid, np.zeros((3,) + grid.spectral_shape, dtype=complex), div_free=True)

    @cached_property
    def physical(self) -> np.ndarray:
        return self.grid.inverse(self.coeffs)

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt(np.sum(self.physical**2, axis=0)))

    def gradient_physical(self) -> np.ndarray:
        """Velocity gradient ``G[i, j] = ∂_i u_j`` in physical space."""
        g = self.grid
        return np.stack([np.stack([g.inverse(1j * k * self.coeffs[j]) for j in range(3)]) for k in g.wavenumbers])


FieldLike = Union[ScalarField, SpectralVectorField]


def divergence_residual(u: SpectralVectorField) -> float:
    """max_k |k·û| relative to max_k |k||û| (0 for the zero field)."""
    kx, ky, kz = u.grid.wavenumbers
    c = u.coeffs
    div = np.abs(kx * c[0] + ky * c[1] + kz * c[2])
    scale = np.sqrt(u.grid.k2) * np.sqrt(np.sum(np.abs(c) ** 2, axis=0))
    smax = float(np.max(scale))
    if smax == 0.0:
        return 0.0
    return float(np.max(div)) / smax


def _project_coeffs(grid: Grid, c: np.ndarray) -> np.ndarray:
    kx, ky, kz = grid.wavenumbers
    kdotu = (kx * c[0] + ky * c[1] + kz * c[2]) / grid.k2_safe
    out = np.stack([c[0] - kx * kdotu, c[1] - ky * kdotu, c[2] - kz * kdotu])
    out[:, 0, 0, 0] = 0.0
    return out


def project_div_free(v: SpectralVectorField) -> SpectralVectorField:
    """Leray projection û − k(k·û)/|k|² applied mode by mode.

    The result is solenoidal by construction, so it is flagged without the
    relative residual check (which would reject the rounding-level remainder
    left when ``v`` is itself a pure gradient).
    """
    out = SpectralVectorField(v.grid, _project_coeffs(v.grid, v.coeffs))
    object.__setattr__(out, "div_free", True)
    return out


def _require_div_free(u: SpectralVectorField, what: str) -> None:
    if not u.div_free:
        res = divergence_residual(u)
        if res > DIV_FREE_TOL:
            raise FieldError(f"{what} requires a divergence-free field (relative residual {res:.3e})")


def _curl_coeffs(grid: Grid, c: np.ndarray) -> np.ndarray:
    kx, ky, kz = grid.wavenumbers
    return 1j * np.stack([ky * c[2] - kz * c[1], kz * c[0] - kx * c[2], kx * c[1] - ky * c[0]])


def curl(u: SpectralVectorField) -> SpectralVectorField:
    """Vorticity ω̂ = i k × û."""
    _require_div_free(u, "curl")
    return SpectralVectorField(u.grid, _curl_coeffs(u.grid, u.coeffs), div_free=True)


#: Index pairs of the six stored strain components.
STRAIN_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


class StrainField:
    """Symmetric strain-rate tensor on the grid.

    ``components`` has shape ``(6, n, n, n)`` ordered as :data:`STRAIN_PAIRS`.
    The sorted eigenvalue fields are computed on first access.
    """

    def __init__(self, grid: Grid, components: np.ndarray, spectral: np.ndarray | None = None):
        components = np.asarray(components, dtype=float)
        if components.shape != (6,) + grid.shape:
            raise FieldError(f"strain components shape {components.shape} does not match grid")
        self.grid = grid
        self.components = components
        self._spectral = spectral

    def component(self, i: int, j: int) -> np.ndarray:
        a, b = min(i, j), max(i, j)
        return self.components[STRAIN_PAIRS.index((a, b))]

    def tensor(self) -> np.ndarray:
        """Full ``(3, 3, n, n, n)`` array (symmetric by construction)."""
        return np.stack([np.stack([self.component(i, j) for j in range(3)]) for i in range(3)])

    @property
    def trace(self) -> np.ndarray:
        return self.components[0] + self.components[1] + self.components[2]

    @property
    def frobenius_sq(self) -> np.ndarray:
        """Pointwise |S|² = Σ_ij S_ij²."""
        c = self.components
        return c[0] ** 2 + c[1] ** 2 + c[2] ** 2 + 2.0 * (c[3] ** 2 + c[4] ** 2 + c[5] ** 2)

    @cached_property
    def eigenvalues(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        lam = symmetric_eigenvalues(*self.components)
        return tuple(ScalarField(self.grid, x) for x in lam)

    @property
    def lambda2_plus(self) -> ScalarField:
        return ScalarField(self.grid, np.maximum(self.eigenvalues[1].values, 0.0))

    @property
    def determinant(self) -> np.ndarray:
        l1, l2, l3 = self.eigenvalues
        return l1.values * l2.values * l3.values

    def l2_sq(self) -> float:
        """‖S‖²_{L²} by grid quadrature."""
        return float(np.sum(self.frobenius_sq) * self.grid.cell_volume)

    def hdot1_sq(self) -> float:
        """‖S‖²_{Ḣ¹} = Σ_ij ‖∇S_ij‖² evaluated spectrally."""
        sh = self._spectral if self._spectral is not None else self.grid.forward(self.components)
        mult = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])[:, None, None, None]
        return self.grid.inner(np.sqrt(mult) * np.sqrt(self.grid.k2) * sh, np.sqrt(mult) * np.sqrt(self.grid.k2) * sh)


def _strain_coeffs(grid: Grid, c: np.ndarray) -> np.ndarray:
    k = grid.wavenumbers
    return np.stack([0.5j * (k[i] * c[j] + k[j] * c[i]) for i, j in STRAIN_PAIRS])


def strain(u: SpectralVectorField) -> StrainField:
    """S_ij = ½(∂_i u_j + ∂_j u_i)."""
    _require_div_free(u, "strain")
    sh = _strain_coeffs(u.grid, u.coeffs)
    return StrainField(u.grid, u.grid.inverse(sh), spectral=sh)


def strain_eigenvalues(s: StrainField):
    """Return ``(λ1, λ2, λ3, λ2⁺)`` as ScalarFields, sorted pointwise."""
    l1, l2, l3 = s.eigenvalues
    return l1, l2, l3, s.lambda2_plus


# -- norms -----------------------------------------------------------------------
def _pointwise_abs(f) -> tuple[np.ndarray, float]:
    if isinstance(f, ScalarField):
        return np.abs(f.values), f.grid.cell_volume
    if isinstance(f, SpectralVectorField):
        return f.magnitude().values, f.grid.cell_volume
    raise TypeError(f"unsupported field type {type(f).__name__}")


def _hdot1_sq(f) -> float:
    g = f.grid
    if isinstance(f, ScalarField):
        fh = f.spectral()
    else:
        fh = f.coeffs
    kf = np.sqrt(g.k2) * fh
    return g.inner(kf, kf)


def norm(f: FieldLike, kind: str, q: float | None = None) -> float:
    """Norm of a scalar field or of the Euclidean magnitude of a vector field.

    ``kind`` is one of ``"Lq"`` (with ``q``), ``"L2"``, ``"Linf"``, ``"Hdot1"``.
    """
    if kind == "Hdot1":
        return float(np.sqrt(_hdot1_sq(f)))
    vals, cell = _pointwise_abs(f)
    if kind == "Linf":
        return float(np.max(vals)) if vals.size else 0.0
    if kind == "L2":
        q = 2.0
    elif kind == "Lq":
        if q is None:
            raise ValueError("Lq norm needs an exponent q")
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    return lq_norm_values(vals, cell, q)


def lq_norm_values(vals: np.ndarray, cell: float, q: float) -> float:
    """(Σ|f_i|^q · cell)^{1/q} for a raw value array."""
    if not q >= 1:
        raise ValueError(f"Lq exponent must satisfy q >= 1, got {q!r}")
    vals = np.abs(np.asarray(vals, dtype=float))
    if q == np.inf:
        return float(np.max(vals)) if vals.size else 0.0
    vmax = float(np.max(vals)) if vals.size else 0.0
    if vmax == 0.0:
        return 0.0
    # scale out the maximum so large q cannot overflow
    return vmax * float(np.sum((vals / vmax) ** q) * cell) ** (1.0 / q)


def spectral_l2(f: FieldLike) -> float:
    """L² norm via the Parseval sum over Fourier coefficients."""
    fh = f.spectral() if isinstance(f, ScalarField) else f.coeffs
    return float(np.sqrt(f.grid.inner(fh, fh)))


@dataclass(frozen=True)
class SobolevResult:
    ratio: float
    constant: float
    exceeds: bool


def sobolev_check(f: ScalarField, constant: float = SOBOLEV_CONSTANT) -> SobolevResult:
    """Ratio ‖f‖_{L⁶}/‖∇f‖_{L²}, flagged when it exceeds the sharp constant."""
    grad = np.sqrt(_hdot1_sq(f))
    if grad == 0.0:
        raise UndefinedRatio("gradient vanishes identically; Sobolev ratio undefined")
    ratio = float(norm(f, "Lq", 6.0) / grad)
    return SobolevResult(ratio=ratio, constant=float(constant), exceeds=bool(ratio > constant))


@dataclass(frozen=True)
class IsometryResult:
    grad_sq: float
    vort_sq: float
    strain_sq: float
    deviation: float


def isometry_check(u: SpectralVectorField, tol: float = ISOMETRY_TOL) -> IsometryResult:
    """Compare ‖∇u‖², ‖ω‖² and 2‖S‖², each computed independently.

    ‖∇u‖² is a spectral sum, ‖ω‖² and ‖S‖² are grid quadratures of the
    physical curl and strain.
    """
    _require_div_free(u, "isometry_check")
    grad_sq = _hdot1_sq(u)
    w = curl(u).physical
    vort_sq = float(np.sum(w**2) * u.grid.cell_volume)
    strain_sq = strain(u).l2_sq()
    vals = np.array([grad_sq, vort_sq, 2.0 * strain_sq])
    ref = float(np.max(vals))
    dev = 0.0 if ref == 0.0 else float((np.max(vals) - np.min(vals)) / ref)
    if dev > tol:
        raise FieldError(f"isometry violated: relative deviation {dev:.3e}")
    return IsometryResult(grad_sq, vort_sq, strain_sq, dev)
