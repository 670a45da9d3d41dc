"""Synthetic space-time functions for exercising the Lorentz-space machinery."""
from __future__ import annotations

import numpy as np

from .fields import Grid
from .lorentz import SampledFunction, ScalingExponents

#: (exponents, q′) cases: two (q, q′) pairs for each Navier–Stokes family
DECOMPOSITION_CASES = (
    (ScalingExponents(2.0, 3.0, 3.0, 9.0), 6.0),
    (ScalingExponents(2.0, 3.0, 4.0, 6.0), 4.0),
    (ScalingExponents(1.0, 1.5, 2.0, 3.0), 2.0),
    (ScalingExponents(1.0, 1.5, 4.0, 2.0), 1.8),
)


def two_level_profile(grid: Grid, high: float = 3.0, low: float = 1.0, frac_high: float = 0.05,
                      frac_low: float = 0.4, seed: int = 0) -> np.ndarray:
    """Random arrangement of two nonzero levels on the given fractions of cells."""
    rng = np.random.default_rng(seed)
    n = grid.n**3
    perm = rng.permutation(n)
    out = np.zeros(n)
    nh = int(round(frac_high * n))
    nl = int(round(frac_low * n))
    out[perm[:nh]] = high
    out[perm[nh : nh + nl]] = low
    return out.reshape(grid.shape)


def power_law_profile(grid: Grid, q: float, cap_radius: float = 1.0, center=None) -> np.ndarray:
    """min(|x − x0|^{−3/q}, cap) with the cap reached at ``cap_radius``."""
    L = grid.box_length
    if center is None:
        center = (L / 2.0 + 0.3 * grid.dx,) * 3
    r2 = 0.0
    for xi, ci in zip(grid.coordinates(), center):
        d = (xi - ci + L / 2.0) % L - L / 2.0
        r2 = r2 + d**2
    r = np.sqrt(r2)
    cap = cap_radius ** (-3.0 / q)
    with np.errstate(divide="ignore"):
        return np.minimum(np.where(r > 0, r ** (-3.0 / q), np.inf), cap)


def synthetic_battery(grid: Grid | None = None, seed: int = 0) -> list[tuple[str, SampledFunction]]:
    """Named space-time test functions: two-level, power-law and time-modulated families."""
    grid = grid or Grid(8)
    rng = np.random.default_rng(seed)
    cell = grid.cell_volume
    out = []
    two = two_level_profile(grid, seed=seed)
    out.append(("two_level_steps", SampledFunction(np.array([0.0, 1.0, 2.0]), [two, 2.0 * two, two], cell)))
    out.append(("two_level_constant", SampledFunction(np.array([0.0, 0.5]), [two, two], cell)))
    for q in (2.0, 3.0, 6.0):
        prof = power_law_profile(grid, q, cap_radius=0.5)
        times = np.linspace(0.0, 1.0, 6)
        out.append((f"power_law_q{q:g}", SampledFunction(times, [(1.0 + t) * prof for t in times], cell)))
    times = np.linspace(0.0, 2.0, 9)
    prof = power_law_profile(grid, 3.0, cap_radius=0.4)
    out.append(("power_law_oscillating", SampledFunction(times, [(1.5 + np.sin(3 * t)) * prof for t in times], cell)))
    signed = rng.standard_normal(grid.shape)
    out.append(("gaussian_noise_decay", SampledFunction(times, [np.exp(-t) * signed for t in times], cell)))
    heavy = rng.standard_cauchy(grid.shape)
    out.append(("cauchy_noise", SampledFunction(times[:5], [heavy * (1 + 0.1 * t) for t in times[:5]], cell)))
    sparse = np.where(rng.random(grid.shape) < 0.02, 10.0, 0.0)
    out.append(("sparse_spikes", SampledFunction(times[:4], [sparse * (1 + t) for t in times[:4]], cell)))
    out.append(("single_sample", SampledFunction(np.array([0.0]), [two], cell)))
    return out
