"""Regularity-criterion bounds evaluated along a trajectory.

Three fields are controlled: the velocity ``u`` (enstrophy ‖∇u‖²), the
positive middle strain eigenvalue λ₂⁺ (‖S‖²) and the vorticity ``ω`` (‖ω‖²).
Each is split at a cutoff h(t) into an above-cutoff part measured in Lq (or
weak Lq) and a below-cutoff part measured in L∞, and the Grönwall bound

    lhs(t) ≤ lhs(0) · exp(∫ rate)

is evaluated sample by sample.  All exponentials are handled in log space.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fields import SOBOLEV_CONSTANT, ScalarField, curl, strain
from .fields.core import lq_norm_values
from .lorentz import ExponentError, SampledFunction, split_mask, weak_lq_norm
from .solver import TrajectoryLog, format_float
from .timeseries import central_derivative, fd_budget

VARIANTS = ("velocity", "strain", "vorticity")
MARGIN_FLOOR = -1e-6
FAMILY_TOL = 1e-12

#: (k, m) scaling pair and the exclusive lower bound on q of each family
_FAMILY = {"velocity": ((2.0, 3.0), 3.0), "strain": ((1.0, 1.5), 1.5), "vorticity": ((1.0, 1.5), 1.5)}

#: Young-step inputs per variant: (prefactor multiplying C_sob^{3/q}, share D of
#: the dissipation ν‖·‖²_{Ḣ¹} absorbed by the Young split)
_YOUNG = {"velocity": (2.0, 1.0), "strain": (2.0, 2.0), "vorticity": (math.sqrt(2.0), 2.0)}

#: Coefficient of the L∞ term in the strong bounds: velocity (1/ν)‖σ‖²,
#: strain 2‖g‖, vorticity √2‖σ‖.
_SIGMA_POWER = {"velocity": 2.0, "strain": 1.0, "vorticity": 1.0}

_LHS_COLUMN = {"velocity": "grad_sq", "strain": "strain_sq", "vorticity": "vort_sq"}

ENDPOINT_NORM = {"velocity": 3.0, "strain": 1.5, "vorticity": 1.5}
_ENDPOINT_FORMULA = {
    "strain": "3 (pi/2)^(4/3) nu",
    "velocity": "sqrt(3) (pi/2)^(2/3) nu",
    "vorticity": "3 pi^(4/3) / 2^(5/6) nu",
}
#: threshold/ν of each endpoint criterion
_ENDPOINT_FACTOR = {
    "strain": 3.0 * (math.pi / 2.0) ** (4.0 / 3.0),
    "velocity": math.sqrt(3.0) * (math.pi / 2.0) ** (2.0 / 3.0),
    "vorticity": 3.0 * math.pi ** (4.0 / 3.0) / 2.0 ** (5.0 / 6.0),
}


def _check_variant(variant: str) -> str:
    base = variant[:-5] if variant.endswith("_weak") else variant
    if base not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    return base


def check_family(variant: str, p: float, q: float) -> None:
    """Reject (p, q) outside the variant's scale-invariant family."""
    base = _check_variant(variant)
    (k, m), floor = _FAMILY[base]
    target = 1.0 if base == "velocity" else 2.0
    crit = 2.0 / p + 3.0 / q
    if abs(crit - target) > FAMILY_TOL:
        raise ExponentError(f"{base}: need 2/p + 3/q = {target:g}, got {crit!r} for p={p!r}, q={q!r}")
    if not (floor < q < math.inf):
        raise ExponentError(f"{base}: need {floor:g} < q < inf, got q={q!r}")


def family_p(variant: str, q: float) -> float:
    """The time exponent p paired with q in the variant's family."""
    base = _check_variant(variant)
    target = 1.0 if base == "velocity" else 2.0
    return 2.0 / (target - 3.0 / q)


# -- the explicit Young constant ---------------------------------------------------------
@dataclass(frozen=True)
class CpDerivation:
    """Inputs and result of the interpolation + Sobolev + Young chain.

    The growth term is bounded by ``alpha·F·X^{2/p}·Y^{2/b}`` with
    ``alpha = prefactor·C_sob^{3/q}``; Young with exponents (p, b) absorbs
    ``D·ν·Y²`` and leaves ``value·F^p·X²/ν^{p−1}`` where
    ``value = alpha^p / (p·(D·b)^{p−1})``.
    """

    variant: str
    p: float
    q: float
    sobolev_constant: float
    interpolation_power: float
    prefactor: float
    alpha: float
    dissipation_share: float
    conjugate_exponent: float
    value: float

    def young_rhs(self, F, X, Y, nu):
        return self.value * F**self.p * X**2 / nu ** (self.p - 1.0) + self.dissipation_share * nu * Y**2

    def young_lhs(self, F, X, Y):
        return self.alpha * F * X ** (2.0 / self.p) * Y ** (2.0 / self.conjugate_exponent)


def cp_derivation(p: float, q: float, variant: str, sobolev_constant: float = SOBOLEV_CONSTANT) -> CpDerivation:
    base = _check_variant(variant)
    check_family(base, p, q)
    if not sobolev_constant > 0:
        raise ValueError("Sobolev constant must be positive")
    prefactor, D = _YOUNG[base]
    power = 3.0 / q
    alpha = prefactor * sobolev_constant**power
    b = p / (p - 1.0)
    value = alpha**p / (p * (D * b) ** (p - 1.0))
    d = CpDerivation(base, p, q, sobolev_constant, power, prefactor, alpha, D, b, value)
    _verify_young(d)
    return d


def _verify_young(d: CpDerivation) -> None:
    """Check the Young step is valid and tight at its maximiser (F = X = ν = 1).

    φ(Y) = αY^{2/b} − DY² is maximised where α(2/b)Y^{2/b−1} = 2DY.
    """
    s = 2.0 / d.conjugate_exponent
    y_star = (d.alpha * s / (2.0 * d.dissipation_share)) ** (1.0 / (2.0 - s))
    phi = lambda y: d.alpha * y**s - d.dissipation_share * y**2
    peak = phi(y_star)
    if not math.isclose(peak, d.value, rel_tol=1e-10):
        raise ArithmeticError(f"Young constant {d.value!r} is not tight (max {peak!r})")
    for y in (0.5 * y_star, 0.9 * y_star, 1.1 * y_star, 2.0 * y_star):
        if phi(y) > d.value * (1.0 + 1e-12):
            raise ArithmeticError("Young split violated away from the maximiser")


def derive_cp(p: float, q: float, variant: str, sobolev_constant: float = SOBOLEV_CONSTANT) -> float:
    """Explicit C_p making the proof's Young step valid; independent of ν."""
    return cp_derivation(p, q, variant, sobolev_constant).value


# -- cutoff rules ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CutoffRule:
    """Per-time cutoff h(t): constant, tabulated, 0 (all in Lq) or ∞ (all in L∞)."""

    kind: str
    value: float = 0.0
    times: tuple = ()
    values: tuple = ()
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("constant", "table", "all_in_Lq", "all_in_Linf"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")
        if self.kind == "constant" and not (self.value >= 0 and math.isfinite(self.value)):
            raise ValueError("constant cutoff must be finite and nonnegative")
        if self.kind == "table":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.size == 0 or t.shape != v.shape:
                raise ValueError("table cutoff needs matching nonempty times and values")
            if np.any(np.diff(t) <= 0):
                raise ValueError("table times must increase")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValueError("table cutoff values must be finite and nonnegative")

    @classmethod
    def constant(cls, c: float) -> "CutoffRule":
        return cls("constant", value=float(c), label=f"constant({c!r})")

    @classmethod
    def table(cls, times: Sequence[float], values: Sequence[float], label: str = "table") -> "CutoffRule":
        return cls("table", times=tuple(float(t) for t in times), values=tuple(float(v) for v in values), label=label)

    @classmethod
    def all_in_lq(cls) -> "CutoffRule":
        return cls("all_in_Lq", label="all_in_Lq")

    @classmethod
    def all_in_linf(cls) -> "CutoffRule":
        return cls("all_in_Linf", label="all_in_Linf")

    @classmethod
    def percentile(cls, log: TrajectoryLog, variant: str, pct: float) -> "CutoffRule":
        """Tabulate the spatial percentile of the variant's field at every sample."""
        fields = variant_fields(log, variant)
        vals = [float(np.percentile(f, pct)) for f in fields]
        label = "median" if pct == 50 else f"percentile({pct!r})"
        return cls.table(log.times, vals, label=label)

    @classmethod
    def median(cls, log: TrajectoryLog, variant: str) -> "CutoffRule":
        return cls.percentile(log, variant, 50.0)

    @property
    def name(self) -> str:
        return self.label or self.kind

    @property
    def finite(self) -> bool:
        return self.kind != "all_in_Linf"

    def at(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if self.kind == "constant":
            return np.full(times.shape, self.value)
        if self.kind == "all_in_Lq":
            return np.zeros(times.shape)
        if self.kind == "all_in_Linf":
            return np.full(times.shape, np.inf)
        t = np.asarray(self.times)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(t))))
        if times.size and (times.min() < t[0] - tol or times.max() > t[-1] + tol):
            raise ValueError(f"cutoff table [{t[0]}, {t[-1]}] does not cover the trajectory")
        return np.interp(times, t, np.asarray(self.values))


# -- per-sample fields -------------------------------------------------------------------------
def _sample_fields(u, variant: str) -> np.ndarray:
    if variant == "velocity":
        return u.magnitude().values
    if variant == "vorticity":
        return curl(u).magnitude().values
    return strain(u).lambda2_plus.values


def variant_fields(log: TrajectoryLog, variant: str) -> list:
    """|u|, λ₂⁺ or |ω| at every sample (cached on the log)."""
    base = _check_variant(variant)
    if len(log.snapshots) != len(log):
        raise ValueError("criteria need a velocity snapshot at every sample; simulate with keep_snapshots='all'")
    cache = log.__dict__.setdefault("_field_cache", {})
    if base not in cache:
        cache[base] = [_sample_fields(log.snapshots[i], base) for i in range(len(log))]
    return cache[base]


def _split_norms(mag: np.ndarray, h: float, cell: float, q: float, weak: bool) -> tuple[float, float]:
    mask = split_mask(mag, h) if math.isfinite(h) else np.zeros(mag.shape, dtype=bool)
    above = np.where(mask, mag, 0.0)
    below = np.where(mask, 0.0, mag)
    a = weak_lq_norm(above, q, cell) if weak else lq_norm_values(above, cell, q)
    return a, float(np.max(below)) if below.size else 0.0


# -- certificates ------------------------------------------------------------------------------
@dataclass
class Certificate:
    variant: str
    p: float
    q: float
    p_prime: float | None
    q_prime: float | None
    rule: str
    mode: str  # "strong" (σ-term from ‖σ‖∞) or "levelset" (σ-term from h)
    constants: dict
    times: np.ndarray
    lhs: np.ndarray
    log_rhs: np.ndarray
    margins: np.ndarray

    @property
    def rhs(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_rhs)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.margins >= MARGIN_FLOOR))

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margins)) if self.margins.size else 0.0

    @property
    def label(self) -> str:
        extra = f",q'={self.q_prime:g}" if self.q_prime is not None else ""
        return f"{self.variant}[{self.mode}](p={self.p:g},q={self.q:g}{extra};{self.rule})"

    def first_violation(self):
        bad = np.nonzero(self.margins < MARGIN_FLOOR)[0]
        if bad.size == 0:
            return None
        i = int(bad[0])
        return float(self.times[i]), float(self.margins[i])

    def to_csv(self) -> str:
        rows = ["t,lhs,rhs,margin"]
        for t, l, r, m in zip(self.times, self.lhs, self.rhs, self.margins):
            rows.append(",".join(format_float(x) for x in (t, l, r, m)))
        consts = ";".join(f"{k}={format_float(v)}" for k, v in sorted(self.constants.items()) if isinstance(v, float))
        rows.append(
            f"# variant={self.variant},mode={self.mode},rule={self.rule},p={format_float(self.p)},"
            f"q={format_float(self.q)},q_prime={'' if self.q_prime is None else format_float(self.q_prime)},"
            f"{consts},result={'pass' if self.passed else 'fail'}"
        )
        return "\n".join(rows) + "\n"


def _margins(lhs: np.ndarray, log_rhs: np.ndarray) -> np.ndarray:
    out = np.empty_like(lhs)
    for i, (l, lr) in enumerate(zip(lhs, log_rhs)):
        if l <= 0:
            out[i] = 0.0 if (l == 0 or lr > -math.inf) else -math.inf
        elif lr == -math.inf:
            out[i] = -math.inf
        else:
            out[i] = 0.0 - math.expm1(math.log(l) - lr)
    return out


def _cumulative(times: np.ndarray, y: np.ndarray) -> np.ndarray:
    if times.size < 2:
        return np.zeros(times.size)
    return cumulative_trapezoid(y, times, initial=0.0)


def _run_certificate(log, variant, p, q, rule, weak, q_prime, levelset, factor_scale):
    base = _check_variant(variant)
    check_family(base, p, q)
    nu = log.nu
    times = log.column("t")
    lhs = log.column(_LHS_COLUMN[base])
    hvals = rule.at(times)
    if levelset and not rule.finite:
        raise ValueError("level-set certificates need a finite cutoff h(t)")
    constants: dict = {"nu": float(nu)}
    sigma_coeff = {"velocity": 1.0 / nu, "strain": 2.0, "vorticity": math.sqrt(2.0)}[base]
    if weak:
        (k, m), floor = _FAMILY[base]
        if q_prime is None or not (floor < q_prime < q):
            raise ExponentError(f"{base}_weak: need {floor:g} < q' < q = {q:g}, got q'={q_prime!r}")
        p_prime = k / (1.0 - m / q_prime)
        d = cp_derivation(p_prime, q_prime, base)
        split_factor = (q / (q - q_prime)) ** (p_prime / q_prime)
        extra = {"velocity": 2.0 / nu, "strain": 2.0, "vorticity": math.sqrt(2.0)}[base]
        rate_coeff = d.value / nu ** (p_prime - 1.0) * split_factor + extra
        if base == "velocity":
            sigma_coeff = 2.0 / nu
        constants.update(C_p_prime=d.value, split_factor=split_factor, composite=rate_coeff)
    else:
        p_prime = None
        d = cp_derivation(p, q, base)
        rate_coeff = d.value / nu ** (p - 1.0)
        constants.update(C_p=d.value, rate_coefficient=rate_coeff)
    rate_coeff *= factor_scale
    constants.update(sigma_coefficient=sigma_coeff, sobolev_constant=d.sobolev_constant, alpha=d.alpha,
                     dissipation_share=d.dissipation_share)
    if len(log) == 0:
        empty = np.zeros(0)
        return Certificate(base, p, q, p_prime, q_prime, rule.name, "levelset" if levelset else "strong",
                           constants, empty, empty, empty, empty)
    fields = variant_fields(log, base)
    cell = log.grid.cell_volume
    a = np.empty(len(times))
    s = np.empty(len(times))
    for i, mag in enumerate(fields):
        a[i], s[i] = _split_norms(mag, hvals[i], cell, q, weak)
    if levelset:
        s = hvals
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(s))):
        raise ArithmeticError(f"non-finite split norms in {base} certificate")
    rate = rate_coeff * a**p + sigma_coeff * s ** _SIGMA_POWER[base]
    exponent = _cumulative(times, rate)
    with np.errstate(divide="ignore"):
        log_rhs = np.log(lhs[0]) + exponent if lhs[0] > 0 else np.full(len(times), -np.inf)
    margins = _margins(lhs, log_rhs)
    return Certificate(base + ("_weak" if weak else ""), p, q, p_prime, q_prime, rule.name,
                       "levelset" if levelset else "strong", constants, times, lhs, log_rhs, margins)


def certify(log: TrajectoryLog, variant: str, exponents, rule: CutoffRule, levelset: bool = False,
            factor_scale: float = 1.0) -> Certificate:
    """Strong sum-space enstrophy certificate for ``variant`` with (p, q) = ``exponents``.

    ``levelset=True`` uses h(t) in place of the measured L∞ norm of the
    below-cutoff part (the level-set corollaries).
    """
    p, q = exponents
    return _run_certificate(log, variant, p, q, rule, False, None, levelset, factor_scale)


def certify_weak(log: TrajectoryLog, variant: str, exponents, q_prime: float, rule: CutoffRule,
                 levelset: bool = False, factor_scale: float = 1.0) -> Certificate:
    """Weak-Lq sum-space certificate with the composite constant C_{p′}/ν^{p′−1}(q/(q−q′))^{p′/q′} + c."""
    p, q = exponents
    return _run_certificate(log, _check_variant(variant), p, q, rule, True, q_prime, levelset, factor_scale)


def composite_constant(variant: str, q: float, q_prime: float, nu: float) -> float:
    """The weak variants' rate constant, evaluated directly from its formula."""
    base = _check_variant(variant)
    (k, m), _ = _FAMILY[base]
    p_prime = k / (1.0 - m / q_prime)
    extra = {"velocity": 2.0 / nu, "strain": 2.0, "vorticity": math.sqrt(2.0)}[base]
    return derive_cp(p_prime, q_prime, base) / nu ** (p_prime - 1.0) * (q / (q - q_prime)) ** (p_prime / q_prime) + extra


# -- level-set series ---------------------------------------------------------------------------
@dataclass
class LevelsetSeries:
    times: np.ndarray
    cutoff: np.ndarray
    above_lq: np.ndarray
    below_linf: np.ndarray
    full_lq: np.ndarray
    q: float


def levelset_series(log: TrajectoryLog, variant: str, h: CutoffRule, q: float | None = None) -> LevelsetSeries:
    """Lq norm of the above-cutoff part and L∞ norm of the rest, per sample."""
    base = _check_variant(variant)
    if q is None:
        q = 6.0 if base == "velocity" else 3.0
    times = log.column("t")
    hv = h.at(times)
    if not np.all(np.isfinite(hv)):
        raise ValueError("level-set series need a finite cutoff")
    cell = log.grid.cell_volume
    above, below, full = [], [], []
    for mag, hh in zip(variant_fields(log, base), hv):
        a, b = _split_norms(mag, hh, cell, q, False)
        above.append(a)
        below.append(b)
        full.append(lq_norm_values(mag, cell, q))
    return LevelsetSeries(times, hv, np.array(above), np.array(below), np.array(full), q)


# -- endpoint monitors ---------------------------------------------------------------------------
def endpoint_threshold(variant: str, nu: float) -> float:
    return _ENDPOINT_FACTOR[_check_variant(variant)] * nu


@dataclass
class EndpointReport:
    variant: str
    threshold_formula: str
    threshold: float
    norm_exponent: float
    times: np.ndarray
    cutoff: np.ndarray
    restricted_norm: np.ndarray
    below: np.ndarray
    check_times: np.ndarray
    derivative: np.ndarray
    bound: np.ndarray
    residual: np.ndarray
    budget: np.ndarray
    epsilon: float | None = None

    @property
    def n_checked(self) -> int:
        return int(self.check_times.size)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.residual <= self.budget))

    @property
    def min_margin(self) -> float:
        if self.residual.size == 0:
            return 0.0
        return float(np.min(self.budget - self.residual))

    def first_violation(self):
        bad = np.nonzero(self.residual > self.budget)[0]
        if bad.size == 0:
            return None
        i = int(bad[0])
        return float(self.check_times[i]), float(self.residual[i])


def endpoint_monitor(log: TrajectoryLog, variant: str, h: CutoffRule) -> EndpointReport:
    """Restricted endpoint norms and the differential inequality wherever they sit below threshold."""
    base = _check_variant(variant)
    nu = log.nu
    times = log.column("t")
    hv = h.at(times)
    if not np.all(np.isfinite(hv)):
        raise ValueError("endpoint monitor needs a finite cutoff h(t)")
    integrand = hv**2 if base == "velocity" else hv
    total = float(_cumulative(times, integrand)[-1]) if times.size > 1 else 0.0
    if not math.isfinite(total):
        raise ValueError(f"cutoff is not integrable over the horizon (integral {total!r})")
    r = ENDPOINT_NORM[base]
    cell = log.grid.cell_volume
    norms = np.array([
        _split_norms(mag, hh, cell, r, False)[0] for mag, hh in zip(variant_fields(log, base), hv)
    ])
    threshold = endpoint_threshold(base, nu)
    below = norms < threshold
    y = log.column(_LHS_COLUMN[base])
    eps = None
    if base == "velocity":
        sup = float(np.max(norms[below])) if np.any(below) else threshold
        eps = max((threshold - sup) / _ENDPOINT_FACTOR["velocity"], 1e-6 * nu)
        bound_all = hv**2 * y / (2.0 * eps)
    elif base == "strain":
        bound_all = 2.0 * hv * y
    else:
        bound_all = math.sqrt(2.0) * hv * y
    empty = np.zeros(0)
    if times.size < 3:
        return EndpointReport(base, _ENDPOINT_FORMULA[base], threshold, r, times, hv, norms, below,
                              empty, empty, empty, empty, empty, eps)
    d = central_derivative(times, y)
    keep = below[d.index]
    idx = d.index[keep]
    deriv = d.value[keep]
    bound = bound_all[idx]
    residual = deriv - bound
    budget = fd_budget(np.maximum(np.abs(deriv), np.abs(bound)), d.error[keep])
    return EndpointReport(base, _ENDPOINT_FORMULA[base], threshold, r, times, hv, norms, below,
                          times[idx], deriv, bound, residual, budget, eps)


# -- weak convergence ----------------------------------------------------------------------------
@dataclass
class WeakConvergenceReport:
    times: np.ndarray
    cutoff: np.ndarray
    running_max: np.ndarray  # M(t) = max_{s≤t} ‖f(s)‖_{L^{3/2}}
    norms: dict  # q -> ‖f(t)‖_q
    bounds: dict  # q -> M^{3/(2q)} h^{1−3/(2q)}
    pairings: dict  # test-function name -> ⟨f(t), φ⟩

    @property
    def passed(self) -> bool:
        return all(np.all(self.norms[q] <= self.bounds[q] * (1.0 + 1e-9) + 1e-300) for q in self.norms)

    @property
    def min_margin(self) -> float:
        out = []
        for q in self.norms:
            b = self.bounds[q]
            with np.errstate(invalid="ignore", divide="ignore"):
                m = np.where(b > 0, (b - self.norms[q]) / b, 0.0)
            out.append(float(np.min(m)))
        return min(out) if out else 0.0


def weak_convergence_bound(f: SampledFunction, h: np.ndarray, exponents=(1.0, 4.0 / 3.0),
                           test_functions: dict | None = None) -> WeakConvergenceReport:
    """Check ‖f(t)‖_q ≤ M(t)^{3/(2q)} h(t)^{1−3/(2q)} for a restricted field f ≥ h wherever nonzero."""
    h = np.asarray(h, dtype=float)
    if h.shape != f.times.shape:
        raise ValueError("one cutoff value per sample is required")
    if np.any(h <= 0) or not np.all(np.isfinite(h)):
        raise ValueError("weak-convergence cutoff must be positive and finite")
    if np.any(np.diff(h) < 0):
        raise ValueError("weak-convergence cutoff must be nondecreasing")
    n32 = np.array([lq_norm_values(v, f.cell, 1.5) for v in f.values])
    M = np.maximum.accumulate(n32)
    norms, bounds = {}, {}
    for q in exponents:
        e = 3.0 / (2.0 * q)
        norms[q] = np.array([lq_norm_values(v, f.cell, q) for v in f.values])
        bounds[q] = M**e * h ** (1.0 - e)
    pairings = {}
    for name, phi in (test_functions or {}).items():
        pairings[name] = np.array([float(np.sum(v * phi) * f.cell) for v in f.values])
    return WeakConvergenceReport(f.times, h, M, norms, bounds, pairings)


def default_test_functions(grid) -> dict:
    """Small fixed dictionary of smooth test functions for pairing diagnostics."""
    x, y, z = grid.coordinates()
    ones = np.ones(grid.shape)
    return {
        "one": ones,
        "cos_x": np.cos(x) * ones,
        "cos_x_cos_y": np.cos(x) * np.cos(y) * ones,
        "sin_x_sin_y_sin_z": np.sin(x) * np.sin(y) * np.sin(z),
        "cos_2x_plus_2z": np.cos(2 * x + 2 * z) * ones,
    }


def weak_convergence_monitor(log: TrajectoryLog, h: CutoffRule, exponents=(1.0, 4.0 / 3.0)) -> WeakConvergenceReport:
    """Restrict λ₂⁺ to {λ₂⁺ > h(t)} and check the Lq decay bound at every sample."""
    times = log.column("t")
    hv = h.at(times)
    fields = variant_fields(log, "strain")
    restricted = [np.where(split_mask(lam, hh), lam, 0.0) for lam, hh in zip(fields, hv)]
    f = SampledFunction(times, restricted, log.grid.cell_volume)
    return weak_convergence_bound(f, hv, exponents, default_test_functions(log.grid))


# -- pointwise strain inequality ------------------------------------------------------------------
@dataclass(frozen=True)
class DeterminantCheck:
    max_excess: float  # max of (−4 det S − 2λ₂⁺|S|²) − slack; ≤ 0 means pass
    points: int

    @property
    def passed(self) -> bool:
        return self.max_excess <= 0.0


def determinant_bound_check(s) -> DeterminantCheck:
    """−4 det S ≤ 2λ₂⁺|S|² + 1e−12(1 + |S|³) at every grid point."""
    fro2 = s.frobenius_sq
    lam2p = s.lambda2_plus.values
    lhs = -4.0 * s.determinant
    rhs = 2.0 * lam2p * fro2
    slack = 1e-12 * (1.0 + fro2**1.5)
    excess = lhs - rhs - slack
    return DeterminantCheck(float(np.max(excess)), int(excess.size))
