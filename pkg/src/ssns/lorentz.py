"""Distribution functions, weak-Lq norms and level-set (sum-space) splits.

Every routine works on a discrete measure: a multiset of values, each carrying
the same cell measure.  Fields are accepted directly (a vector field is measured
through its Euclidean magnitude); raw arrays need an explicit ``cell``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fields import ScalarField, SpectralVectorField
from .fields.core import lq_norm_values

REL_SLACK = 1e-12
INTEGRAL_SLACK = 1e-9
SCALING_TOL = 1e-12


class PreconditionError(ValueError):
    """Input violates an operation's precondition; ``index`` locates the first offending point."""

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class ExponentError(ValueError):
    """Exponents violate a scaling or ordering relation."""


def as_measure(f, cell: float | None = None) -> tuple[np.ndarray, float]:
    """Return ``(|values|, cell)`` for a field or a raw array."""
    if isinstance(f, ScalarField):
        return np.abs(f.values), f.grid.cell_volume
    if isinstance(f, SpectralVectorField):
        return f.magnitude().values, f.grid.cell_volume
    if cell is None:
        raise ValueError("raw arrays need an explicit cell measure")
    if not cell > 0:
        raise ValueError(f"cell measure must be positive, got {cell!r}")
    return np.abs(np.asarray(f, dtype=float)), float(cell)


# -- distribution function and norms ------------------------------------------------
def distribution(f, alpha: float, cell: float | None = None) -> float:
    """λ_f(α) = measure of {|f| > α}."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    vals, cell = as_measure(f, cell)
    return float(np.count_nonzero(vals > alpha)) * cell


def _levels(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct nonzero values (ascending) and the count of samples ≥ each."""
    v = np.sort(vals.ravel())
    v = v[v > 0]
    if v.size == 0:
        return v, np.zeros(0, dtype=np.int64)
    levels, first = np.unique(v, return_index=True)
    count_ge = v.size - first
    return levels, count_ge


def lp_norm_cavalieri(f, p: float, cell: float | None = None) -> float:
    """Lᵖ norm from the layer-cake formula p∫α^{p−1}λ_f(α)dα.

    λ_f is constant on each gap between consecutive distinct values, so the
    integral is a finite sum of exact pieces ``λ·(a_j^p − a_{j−1}^p)``.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    vals, cell = as_measure(f, cell)
    levels, count_ge = _levels(vals)
    if levels.size == 0:
        return 0.0
    top = levels[-1]
    scaled = levels / top
    lower = np.concatenate(([0.0], scaled[:-1]))
    # on (a_{j-1}, a_j) the set {|f| > α} is exactly the samples ≥ a_j
    pieces = count_ge * cell * (scaled**p - lower**p)
    return float(top * math.fsum(pieces) ** (1.0 / p))


def weak_lq_norm(f, q: float, cell: float | None = None) -> float:
    """‖f‖_{L^{q,∞}} = (max over distinct values a of a^q·|{|f| ≥ a}|)^{1/q}."""
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q!r}")
    vals, cell = as_measure(f, cell)
    levels, count_ge = _levels(vals)
    if levels.size == 0:
        return 0.0
    top = levels[-1]
    best = np.max((levels / top) ** q * count_ge * cell)
    return float(top * best ** (1.0 / q))


def lq_norm(f, q: float, cell: float | None = None) -> float:
    """Direct quadrature Lq norm (q may be ``inf``)."""
    vals, cell = as_measure(f, cell)
    return lq_norm_values(vals, cell, q)


# -- splits ------------------------------------------------------------------------
def split_mask(magnitude: np.ndarray, R: float) -> np.ndarray:
    """Boolean mask of the above-cutoff set {|f| > R}; ties stay below."""
    if not R >= 0:
        raise ValueError(f"cutoff must be nonnegative, got {R!r}")
    return np.abs(magnitude) > R


def threshold_split(f, R: float):
    """Split f = g + h with g = f·[|f| > R] and h = f·[|f| ≤ R].

    Accepts a ScalarField (returns two ScalarFields) or a raw array (returns
    two arrays).
    """
    if isinstance(f, ScalarField):
        mask = split_mask(f.values, R)
        g = np.where(mask, f.values, 0.0)
        h = np.where(mask, 0.0, f.values)
        return ScalarField(f.grid, g), ScalarField(f.grid, h)
    arr = np.asarray(f, dtype=float)
    mask = split_mask(arr, R)
    return np.where(mask, arr, 0.0), np.where(mask, 0.0, arr)


# -- single-time propositions --------------------------------------------------------
@dataclass(frozen=True)
class BoundReport:
    """Outcome of one inequality ``lhs ≤ rhs``."""

    name: str
    lhs: float
    rhs: float
    holds: bool
    factor: float = 1.0

    @property
    def margin(self) -> float:
        """(rhs − lhs)/rhs, or 0 when both sides vanish."""
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else -math.inf
        return (self.rhs - self.lhs) / self.rhs


def _holds(lhs: float, rhs: float, rel: float) -> bool:
    return lhs <= rhs * (1.0 + rel) + 1e-300


def _check_gap(vals: np.ndarray, R: float) -> None:
    bad = (vals != 0) & (vals <= R)
    if np.any(bad):
        idx = tuple(int(i) for i in np.unravel_index(int(np.argmax(bad)), vals.shape))
        raise PreconditionError(
            f"value {vals[idx]!r} at index {idx} is nonzero but not above R = {R!r}", index=idx
        )


def _check_pq(p: float, q: float) -> None:
    if not (1 <= p < q):
        raise ExponentError(f"need 1 <= p < q, got p={p!r}, q={q!r}")


def check_lq_prop(f, R: float, p: float, q: float, cell: float | None = None, factor_scale: float = 1.0) -> BoundReport:
    """‖f‖ₚᵖ ≤ R^{p−q}‖f‖_q^q for f vanishing or exceeding R everywhere."""
    _check_pq(p, q)
    if not R > 0:
        raise ValueError(f"R must be positive, got {R!r}")
    vals, cell = as_measure(f, cell)
    _check_gap(vals, R)
    lhs = lq_norm_values(vals, cell, p) ** p
    factor = R ** (p - q) * factor_scale
    rhs = factor * lq_norm_values(vals, cell, q) ** q
    return BoundReport("lq-above-cutoff", lhs, rhs, _holds(lhs, rhs, REL_SLACK), factor)


def check_weak_lq_prop(f, R: float, p: float, q: float, cell: float | None = None, factor_scale: float = 1.0) -> BoundReport:
    """‖f‖ₚᵖ ≤ q/(q−p)·R^{p−q}‖f‖_{q,∞}^q for f vanishing or exceeding R everywhere."""
    _check_pq(p, q)
    if not R > 0:
        raise ValueError(f"R must be positive, got {R!r}")
    vals, cell = as_measure(f, cell)
    _check_gap(vals, R)
    lhs = lq_norm_values(vals, cell, p) ** p
    factor = q / (q - p) * R ** (p - q) * factor_scale
    rhs = factor * weak_lq_norm(vals, q, cell) ** q
    return BoundReport("weak-lq-above-cutoff", lhs, rhs, _holds(lhs, rhs, REL_SLACK), factor)


# -- the Lᵖ + L^∞ embedding constant ---------------------------------------------------
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(fun, a: float, b: float, tol: float = 1e-10, max_iter: int = 500) -> float:
    """Minimiser of a unimodal function on [a, b] to absolute tolerance ``tol``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(c)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def embedding_objective(p: float, q: float):
    """k ↦ k + (q/(q−p))^{1/p} k^{1−q/p}."""
    c = (q / (q - p)) ** (1.0 / p)
    e = 1.0 - q / p
    return lambda k: k + c * k**e


def sum_embedding_constant(p: float, q: float) -> tuple[float, float]:
    """Return ``(k*, C_{p,q})`` with C_{p,q} = inf_k [k + (q/(q−p))^{1/p} k^{1−q/p}]."""
    if not (1 <= p < q < math.inf):
        raise ExponentError(f"need 1 <= p < q < inf, got p={p!r}, q={q!r}")
    fun = embedding_objective(p, q)
    # bracket: the objective tends to +inf at both ends, so expand until it rises
    lo, hi = 1e-6, 1.0
    while fun(hi * 2.0) < fun(hi):
        hi *= 2.0
    hi *= 2.0
    k = golden_section_min(fun, lo, hi, tol=1e-12)
    return k, float(fun(k))


@dataclass(frozen=True)
class EmbeddingSplit:
    """Explicit Lᵖ + L^∞ split at R = k*·‖f‖_{q,∞}."""

    cutoff: float
    g_lp: float
    h_linf: float
    weak_norm: float
    constant: float

    @property
    def sum_norm(self) -> float:
        return self.g_lp + self.h_linf

    @property
    def holds(self) -> bool:
        return _holds(self.sum_norm, self.constant * self.weak_norm, REL_SLACK)


def embedding_split(f, p: float, q: float, cell: float | None = None) -> EmbeddingSplit:
    """Realise ‖f‖_{Lᵖ+L^∞} ≤ C_{p,q}‖f‖_{L^{q,∞}} with the optimal threshold."""
    k, C = sum_embedding_constant(p, q)
    vals, cell = as_measure(f, cell)
    w = weak_lq_norm(vals, q, cell)
    R = k * w
    mask = split_mask(vals, R)
    g_lp = lq_norm_values(np.where(mask, vals, 0.0), cell, p)
    h_inf = float(np.max(np.where(mask, 0.0, vals))) if vals.size else 0.0
    return EmbeddingSplit(R, g_lp, h_inf, w, C)


# -- scale-invariant mixed split ---------------------------------------------------
@dataclass(frozen=True)
class ScalingExponents:
    """Exponents (k, m, p, q) of a mixed space-time norm with k/p + m/q = 1."""

    k: float
    m: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("k", "m", "p", "q"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v >= 1):
                raise ExponentError(f"exponent {name} must be a real >= 1, got {v!r}")

    @property
    def residual(self) -> float:
        return self.k / self.p + self.m / self.q - 1.0

    def validate(self) -> None:
        if abs(self.residual) > SCALING_TOL:
            raise ExponentError(f"k/p + m/q = {self.k / self.p + self.m / self.q!r} != 1")
        if not self.q > self.m:
            raise ExponentError(f"need q > m, got q={self.q!r}, m={self.m!r}")

    def p_prime(self, q_prime: float) -> float:
        """p′ from k/p′ + m/q′ = 1, for m < q′ < q."""
        if not (self.m < q_prime < self.q):
            raise ExponentError(f"need m < q' < q, got m={self.m!r}, q'={q_prime!r}, q={self.q!r}")
        return self.k / (1.0 - self.m / q_prime)


@dataclass(frozen=True)
class ScalingReport:
    valid: bool
    family: str
    residual: float
    reason: str = ""


def scaling_check(e: ScalingExponents) -> ScalingReport:
    """Validate k/p + m/q = 1 and classify the Navier–Stokes family.

    velocity: 2/p + 3/q = 1;  strain/vorticity: 2/p + 3/q = 2;  anything else: other.
    """
    res = e.residual
    if abs(res) > SCALING_TOL:
        return ScalingReport(False, "invalid", res, f"k/p + m/q - 1 = {res:.3e}")
    if not e.q > e.m:
        return ScalingReport(False, "invalid", res, "q must exceed m")
    crit = 2.0 / e.p + 3.0 / e.q
    if abs(crit - 1.0) <= SCALING_TOL:
        family = "velocity"
    elif abs(crit - 2.0) <= SCALING_TOL:
        family = "strain_vorticity"
    else:
        family = "other"
    return ScalingReport(True, family, res)


@dataclass
class SampledFunction:
    """Space-time samples f(·, t_i) on a common discrete measure."""

    times: np.ndarray
    values: list
    cell: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("SampledFunction needs a nonempty 1-D time array")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if len(self.values) != self.times.size:
            raise ValueError("one value array per sample time is required")
        self.values = [np.asarray(v, dtype=float) for v in self.values]
        shape = self.values[0].shape
        if any(v.shape != shape for v in self.values):
            raise ValueError("all samples must share one grid")
        if not self.cell > 0:
            raise ValueError("cell measure must be positive")

    @classmethod
    def from_fields(cls, times: Sequence[float], fields) -> "SampledFunction":
        fields = list(fields)
        if not fields:
            raise ValueError("no fields given")
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise ValueError("all fields must share one grid")
        vals = [f.values if isinstance(f, ScalarField) else f.magnitude().values for f in fields]
        return cls(np.asarray(times, dtype=float), vals, grid.cell_volume)

    def __len__(self) -> int:
        return self.times.size


@dataclass
class LevelSplit:
    """f = g + h with g above the per-time cutoff R(t) and h at or below it."""

    g: SampledFunction
    h: SampledFunction
    cutoff: np.ndarray
    exponents: ScalingExponents
    q_prime: float
    p_prime: float


@dataclass
class DecompositionReport:
    split: LevelSplit
    weak_norm: np.ndarray  # ‖f(·,t)‖_{q,∞}
    g_norm: np.ndarray  # ‖g(·,t)‖_{q′}
    h_norm: np.ndarray  # ‖h(·,t)‖_∞
    running_g: np.ndarray  # ∫₀ᵗ ‖g‖^{p′}_{q′}
    running_h: np.ndarray  # ∫₀ᵗ ‖h‖^k_∞
    running_f: np.ndarray  # ∫₀ᵗ ‖f‖^p_{q,∞}
    factor: float
    bound_g: BoundReport
    bound_h: BoundReport

    @property
    def holds(self) -> bool:
        return self.bound_g.holds and self.bound_h.holds

    def rows(self):
        """CSV rows (t, R, ‖g‖_{q′}, ‖h‖_∞, ∫g-term, ∫h-term, ∫f-term)."""
        s = self.split
        for i, t in enumerate(s.g.times):
            yield (
                float(t),
                float(s.cutoff[i]),
                float(self.g_norm[i]),
                float(self.h_norm[i]),
                float(self.running_g[i]),
                float(self.running_h[i]),
                float(self.running_f[i]),
            )


SPLIT_COLUMNS = ("t", "R", "g_norm_qprime", "h_norm_inf", "int_g", "int_h", "int_f")


def _running(times: np.ndarray, y: np.ndarray) -> np.ndarray:
    if times.size == 1:
        return np.zeros(1)
    return cumulative_trapezoid(y, times, initial=0.0)


def sum_decompose(f: SampledFunction, e: ScalingExponents, q_prime: float, factor_scale: float = 1.0) -> DecompositionReport:
    """Split f at R(t) = ‖f(·,t)‖_{q,∞}^{p/k} and check both integral bounds.

    ∫‖g‖^{p′}_{q′} ≤ (q/(q−q′))^{p′/q′}∫‖f‖^p_{q,∞} and ∫‖h‖^k_∞ ≤ ∫‖f‖^p_{q,∞},
    with trapezoid quadrature on the sample times.  ``factor_scale`` multiplies
    the first bound's factor (fault-injection hook).
    """
    e.validate()
    p_prime = e.p_prime(q_prime)
    weak = np.empty(len(f))
    cut = np.empty(len(f))
    gn = np.empty(len(f))
    hn = np.empty(len(f))
    gs, hs = [], []
    for i, v in enumerate(f.values):
        w = weak_lq_norm(v, e.q, f.cell)
        R = w ** (e.p / e.k)
        g, h = threshold_split(v, R)
        weak[i], cut[i] = w, R
        gn[i] = lq_norm_values(g, f.cell, q_prime)
        hn[i] = float(np.max(np.abs(h))) if h.size else 0.0
        gs.append(g)
        hs.append(h)
    t = f.times
    run_g = _running(t, gn**p_prime)
    run_h = _running(t, hn**e.k)
    run_f = _running(t, weak**e.p)
    factor = (e.q / (e.q - q_prime)) ** (p_prime / q_prime) * factor_scale
    bound_g = BoundReport(
        "mixed-split-above", float(run_g[-1]), float(factor * run_f[-1]),
        _holds(float(run_g[-1]), float(factor * run_f[-1]), INTEGRAL_SLACK), factor,
    )
    bound_h = BoundReport(
        "mixed-split-below", float(run_h[-1]), float(run_f[-1]),
        _holds(float(run_h[-1]), float(run_f[-1]), INTEGRAL_SLACK), 1.0,
    )
    split = LevelSplit(
        g=SampledFunction(t, gs, f.cell),
        h=SampledFunction(t, hs, f.cell),
        cutoff=cut,
        exponents=e,
        q_prime=q_prime,
        p_prime=p_prime,
    )
    return DecompositionReport(split, weak, gn, hn, run_g, run_h, run_f, factor, bound_g, bound_h)
