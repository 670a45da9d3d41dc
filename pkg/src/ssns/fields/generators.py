"""Initial-condition and test-field generators."""
from __future__ import annotations

import numpy as np

from .core import ScalarField, SpectralVectorField, _project_coeffs
from .grid import Grid

FIELD_KINDS = ("taylor_green", "random_div_free", "gaussian_bump", "zero")


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralVectorField:
    x, y, z = grid.coordinates()
    u = amplitude * np.stack(
        np.broadcast_arrays(
            np.sin(x) * np.cos(y) * np.cos(z),
            -np.cos(x) * np.sin(y) * np.cos(z),
            np.zeros_like(x) * y * z,
        )
    )
    return SpectralVectorField.from_physical(grid, u, div_free=True)


def shell_index(grid: Grid) -> np.ndarray:
    """Integer shell number round(|m|) per half-spectrum mode."""
    mx, my, mz = grid.mode_numbers
    return np.rint(np.sqrt(mx**2 + my**2 + mz**2)).astype(int)


def shell_spectrum(u: SpectralVectorField) -> np.ndarray:
    """Energy ½∫|u|² binned by integer shell; entry s is shell s."""
    g = u.grid
    dens = 0.5 * np.sum(np.abs(u.coeffs) ** 2, axis=0) * g.parseval_weights
    idx = shell_index(g)
    return np.bincount(idx.ravel(), weights=np.broadcast_to(dens, idx.shape).ravel())


def random_div_free(
    grid: Grid,
    seed: int = 0,
    spectral_slope: float = -5.0 / 3.0,
    cutoff_mode: int = 4,
    energy: float | None = None,
) -> SpectralVectorField:
    """Random solenoidal field with shell energy E(s) ∝ s**spectral_slope for 1 ≤ s ≤ cutoff_mode.

    Phases are drawn from ``numpy.random.default_rng(seed)``; each shell is then
    rescaled so the binned spectrum follows the power law exactly.  ``energy``
    sets ½∫|u|²; by default the field has unit mean-square speed component-wise
    average (``energy = 0.5 * volume``).
    """
    if cutoff_mode < 1 or cutoff_mode >= grid.n // 3:
        raise ValueError(f"cutoff_mode must lie in [1, n/3), got {cutoff_mode}")
    rng = np.random.default_rng(seed)
    shape = (3,) + grid.spectral_shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    # real transform round trip enforces conjugate symmetry of the kz=0 plane
    c = grid.forward(grid.inverse(c))
    idx = shell_index(grid)
    c = np.where((idx >= 1) & (idx <= cutoff_mode), c, 0.0)
    c = _project_coeffs(grid, c)
    u = SpectralVectorField(grid, c)
    spec = shell_spectrum(u)
    target = np.arange(len(spec), dtype=float)
    target[1:] = target[1:] ** spectral_slope
    target[0] = 0.0
    target[cutoff_mode + 1 :] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(spec > 0, np.sqrt(target / np.where(spec > 0, spec, 1.0)), 0.0)
    c = c * factor[idx]
    total = 0.5 * grid.volume if energy is None else float(energy)
    current = 0.5 * grid.inner(c, c)
    c = c * np.sqrt(total / current)
    return SpectralVectorField(grid, c, div_free=True)


def gaussian_bump(grid: Grid, center=None, width: float | None = None, amplitude: float = 1.0) -> ScalarField:
    """exp(−|x−c|²/(2w²)) using the nearest periodic image of the center."""
    if center is None:
        center = (grid.box_length / 2.0,) * 3
    if width is None:
        width = grid.box_length / 20.0
    if width <= 0:
        raise ValueError("width must be positive")
    L = grid.box_length
    r2 = 0.0
    for xi, ci in zip(grid.coordinates(), center):
        d = (xi - ci + L / 2.0) % L - L / 2.0
        r2 = r2 + d**2
    return ScalarField(grid, amplitude * np.exp(-r2 / (2.0 * width**2)))


def make_field(kind: str, grid: Grid, **params):
    """Dispatch on ``kind``: taylor_green, random_div_free, gaussian_bump, zero."""
    if kind == "taylor_green":
        return taylor_green(grid, **params)
    if kind == "random_div_free":
        return random_div_free(grid, **params)
    if kind == "gaussian_bump":
        return gaussian_bump(grid, **params)
    if kind == "zero":
        return SpectralVectorField.zeros(grid)
    raise ValueError(f"unknown field kind {kind!r}; expected one of {', '.join(FIELD_KINDS)}")
