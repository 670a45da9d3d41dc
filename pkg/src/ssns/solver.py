"""Integrating-factor RK4 pseudo-spectral Navier–Stokes solver on the torus."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .fields import Grid, ScalarField, SpectralVectorField, curl, strain
from .fields.core import _curl_coeffs, _project_coeffs
from .fields.generators import random_div_free, taylor_green
from .timeseries import central_derivative, fd_budget

BLOWUP_LIMIT = 1e6
CFL_NUMBER = 0.5
INIT_KINDS = ("taylor_green", "random", "zero")


class ConfigError(ValueError):
    """Malformed solver configuration."""


class NumericalError(RuntimeError):
    """Integration aborted (non-finite values, CFL violation or blow-up)."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message if time is None else f"{message} (t = {time!r})")
        self.time = time


class CFLViolation(NumericalError):
    pass


class NumericalBlowUp(NumericalError):
    pass


# -- configuration ----------------------------------------------------------------
@dataclass(frozen=True)
class SolverConfig:
    n: int = 32
    nu: float = 0.1
    dt: float = 1e-3
    t_end: float = 1.0
    sample_every: int = 10
    init: str = "taylor_green"
    seed: int = 0
    dealias: bool = True

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ConfigError(f"n must be an even integer >= 8, got {self.n}")
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.sample_every < 1:
            raise ConfigError(f"sample_every must be >= 1, got {self.sample_every}")
        if self.init not in INIT_KINDS:
            raise ConfigError(f"init must be one of {', '.join(INIT_KINDS)}, got {self.init!r}")
        self.n_steps  # validates t_end/dt commensurability

    @property
    def n_steps(self) -> int:
        steps = round(self.t_end / self.dt)
        if abs(steps * self.dt - self.t_end) > 1e-9 * max(self.t_end, self.dt):
            raise ConfigError(f"t_end = {self.t_end} is not a whole number of steps dt = {self.dt}")
        return int(steps)

    def as_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_CONFIG_TYPES = {f.name: f.type for f in fields(SolverConfig)}
_CONVERTERS = {"int": int, "float": float, "str": str, "bool": _parse_bool}


def parse_config(text: str, overrides: dict | None = None) -> SolverConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are errors."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        try:
            values[key] = _CONVERTERS[_CONFIG_TYPES[key]](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    values.update(overrides or {})
    return SolverConfig(**values)


def load_config(path, overrides: dict | None = None) -> SolverConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, overrides)


# -- kernel -------------------------------------------------------------------------
class SpectralKernel:
    """Pre-computed spectral operators for one grid/viscosity pair."""

    def __init__(self, grid: Grid, nu: float, dealias: bool = True):
        self.grid = grid
        self.nu = nu
        self.dealias = dealias
        self.mask = grid.dealias_mask if dealias else np.ones(grid.spectral_shape, dtype=bool)
        self._factor_cache: dict = {}

    def factors(self, dt: float):
        """Exact viscous propagators e^{−ν|k|²dt} and e^{−ν|k|²dt/2}."""
        if dt not in self._factor_cache:
            k2 = self.grid.k2
            self._factor_cache[dt] = (np.exp(-self.nu * k2 * dt), np.exp(-self.nu * k2 * dt / 2.0))
        return self._factor_cache[dt]

    def nonlinear(self, c: np.ndarray, t: float | None = None) -> tuple[np.ndarray, float]:
        """P(u × ω) (= P(−(u·∇)u)) and max|u| from half-spectrum velocity coefficients."""
        g = self.grid
        u = g.inverse(c)
        w = g.inverse(_curl_coeffs(g, c))
        prod = np.empty_like(u)
        prod[0] = u[1] * w[2] - u[2] * w[1]
        prod[1] = u[2] * w[0] - u[0] * w[2]
        prod[2] = u[0] * w[1] - u[1] * w[0]
        if not np.all(np.isfinite(prod)):
            raise NumericalError("non-finite values in the nonlinear product", t)
        umax = float(np.sqrt(np.max(np.sum(u * u, axis=0))))
        nh = g.forward(prod) * self.mask
        return _project_coeffs(g, nh), umax


def nonlinear_rhs(u: SpectralVectorField, dealias: bool = True) -> SpectralVectorField:
    """P_df(−(u·∇)u), evaluated in rotational form with 2/3-rule dealiasing."""
    kernel = SpectralKernel(u.grid, 1.0, dealias)
    out, _ = kernel.nonlinear(u.coeffs)
    return SpectralVectorField(u.grid, out, div_free=True)


@dataclass(frozen=True)
class SimState:
    t: float
    u: SpectralVectorField


def _check_cfl(umax: float, dt: float, grid: Grid, t: float) -> None:
    if umax > BLOWUP_LIMIT:
        raise NumericalBlowUp(f"numerical blow-up: max|u| = {umax:.3e} exceeds {BLOWUP_LIMIT:.0e}", t)
    if umax > 0 and dt > CFL_NUMBER * grid.dx / umax:
        raise CFLViolation(
            f"CFL violated: dt = {dt} > {CFL_NUMBER}*dx/max|u| = {CFL_NUMBER * grid.dx / umax:.4e}", t
        )


def _rk4(kernel: SpectralKernel, c: np.ndarray, dt: float, t: float, nonlinear: bool = True) -> np.ndarray:
    E, E2 = kernel.factors(dt)
    if not nonlinear:
        return E * c
    k1, umax = kernel.nonlinear(c, t)
    _check_cfl(umax, dt, kernel.grid, t)
    k2, _ = kernel.nonlinear(E2 * (c + 0.5 * dt * k1), t)
    k3, _ = kernel.nonlinear(E2 * c + 0.5 * dt * k2, t)
    k4, _ = kernel.nonlinear(E * c + dt * E2 * k3, t)
    return E * c + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


def step(s: SimState, dt: float, nu: float, dealias: bool = True, nonlinear: bool = True,
         kernel: SpectralKernel | None = None) -> SimState:
    """One integrating-factor RK4 step of size dt.

    ``nonlinear=False`` switches off advection (pure heat semigroup).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if kernel is None:
        kernel = SpectralKernel(s.u.grid, nu, dealias)
    c = _rk4(kernel, s.u.coeffs, dt, s.t, nonlinear)
    c = _project_coeffs(s.u.grid, c)
    if not np.all(np.isfinite(c)):
        raise NumericalError("non-finite coefficients after step", s.t + dt)
    return SimState(s.t + dt, SpectralVectorField(s.u.grid, c, div_free=True))


# -- diagnostics ----------------------------------------------------------------------
LOG_COLUMNS = (
    "t",
    "energy",
    "grad_sq",
    "vort_sq",
    "strain_sq",
    "strain_h1_sq",
    "int_det_s",
    "vort_h1_sq",
    "lap_sq",
    "stretching",
    "adv_lap",
    "max_u",
)


def diagnostics(u: SpectralVectorField) -> dict:
    """All per-sample scalars logged along a trajectory.

    Quadratic quantities are Parseval sums; cubic ones (∫det S, ⟨Sω,ω⟩,
    ⟨(u·∇)u, −Δu⟩) are grid quadratures, which are exact for 2/3-dealiased fields.
    """
    g = u.grid
    c = u.coeffs
    k2 = g.k2
    w = curl(u)
    s = strain(u)
    uphys = u.physical
    wphys = w.physical
    comps = s.components
    t = s.tensor()
    sw = np.einsum("ij...,j...->i...", t, wphys)
    grad = u.gradient_physical()  # grad[i, j] = ∂_i u_j
    adv = np.einsum("i...,ij...->j...", uphys, grad)  # (u·∇)u
    lap = g.inverse(-k2 * c)
    cell = g.cell_volume
    return {
        "energy": 0.5 * g.inner(c, c),
        "grad_sq": g.inner(np.sqrt(k2) * c, np.sqrt(k2) * c),
        "vort_sq": g.inner(w.coeffs, w.coeffs),
        "strain_sq": s.l2_sq(),
        "strain_h1_sq": s.hdot1_sq(),
        "int_det_s": float(np.sum(s.determinant) * cell),
        "vort_h1_sq": g.inner(np.sqrt(k2) * w.coeffs, np.sqrt(k2) * w.coeffs),
        "lap_sq": g.inner(k2 * c, k2 * c),
        "stretching": float(np.sum(sw * wphys) * cell),
        "adv_lap": float(-np.sum(adv * lap) * cell),
        "max_u": float(np.sqrt(np.max(np.sum(uphys**2, axis=0)))),
    }


def format_float(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


@dataclass
class TrajectoryLog:
    """Sampled scalar diagnostics plus (optionally decimated) velocity snapshots."""

    config: SolverConfig
    grid: Grid
    times: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)  # sample index -> SpectralVectorField

    def append(self, t: float, u: SpectralVectorField, keep: bool) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError("log times must be strictly increasing")
        d = diagnostics(u)
        if not all(np.isfinite(v) for v in d.values()):
            raise NumericalError("non-finite diagnostics", t)
        self.times.append(float(t))
        self.rows.append(d)
        if keep:
            self.snapshots[len(self.times) - 1] = u

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        if name == "t":
            return np.asarray(self.times, dtype=float)
        return np.asarray([r[name] for r in self.rows], dtype=float)

    @property
    def nu(self) -> float:
        return self.config.nu

    def snapshot_times(self) -> np.ndarray:
        return np.asarray([self.times[i] for i in sorted(self.snapshots)], dtype=float)

    def snapshot_fields(self) -> list:
        return [self.snapshots[i] for i in sorted(self.snapshots)]

    def to_csv(self) -> str:
        lines = [",".join(LOG_COLUMNS)]
        for t, r in zip(self.times, self.rows):
            lines.append(",".join([format_float(t)] + [format_float(r[c]) for c in LOG_COLUMNS[1:]]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path


def initial_field(config: SolverConfig) -> SpectralVectorField:
    grid = Grid(config.n)
    if config.init == "taylor_green":
        u = taylor_green(grid)
    elif config.init == "random":
        u = random_div_free(grid, seed=config.seed)
    else:
        u = SpectralVectorField.zeros(grid)
    if config.dealias:
        u = SpectralVectorField(grid, u.coeffs * grid.dealias_mask, div_free=True)
    return u


def simulate(config: SolverConfig, keep_snapshots: str | int = "all", nonlinear: bool = True,
             u0: SpectralVectorField | None = None) -> TrajectoryLog:
    """Integrate to ``t_end``, logging every ``sample_every`` steps.

    ``keep_snapshots``: "all", "none", "ends" or an integer stride over samples.
    """
    u = initial_field(config) if u0 is None else u0
    grid = u.grid
    kernel = SpectralKernel(grid, config.nu, config.dealias)
    log = TrajectoryLog(config, grid)
    n_steps = config.n_steps
    n_samples = n_steps // config.sample_every + 1

    def keep(idx: int) -> bool:
        if keep_snapshots == "all":
            return True
        if keep_snapshots == "none":
            return False
        if keep_snapshots == "ends":
            return idx == 0 or idx == n_samples - 1
        return idx % int(keep_snapshots) == 0 or idx == n_samples - 1

    log.append(0.0, u, keep(0))
    c = u.coeffs
    for i in range(1, n_steps + 1):
        t_prev = (i - 1) * config.dt
        c = _rk4(kernel, c, config.dt, t_prev, nonlinear)
        c = _project_coeffs(grid, c)
        if not np.all(np.isfinite(c)):
            raise NumericalError("non-finite coefficients after step", i * config.dt)
        if i % config.sample_every == 0:
            log.append(i * config.dt, SpectralVectorField(grid, c, div_free=True), keep(len(log)))
    return log


# -- pressure ---------------------------------------------------------------------------
def _pressure_source(u: SpectralVectorField) -> np.ndarray:
    grad = u.gradient_physical()
    return np.einsum("ij...,ji...->...", grad, grad)


def pressure(u: SpectralVectorField) -> ScalarField:
    """Zero-mean solution of −Δp = Σ_ij ∂_i u_j ∂_j u_i."""
    g = u.grid
    src = g.forward(_pressure_source(u))
    ph = np.where(g.k2 > 0, src / g.k2_safe, 0.0)
    return ScalarField(g, g.inverse(ph))


def pressure_residual(u: SpectralVectorField, p: ScalarField) -> float:
    """L² norm of −Δp − (source − mean source)."""
    g = u.grid
    src = _pressure_source(u)
    src = src - np.mean(src)
    lap = g.inverse(g.k2 * p.spectral())
    return float(np.sqrt(np.sum((lap - src) ** 2) * g.cell_volume))


# -- balance identities -------------------------------------------------------------------
@dataclass
class IdentityCheck:
    name: str
    times: np.ndarray
    derivative: np.ndarray
    prediction: np.ndarray
    residual: np.ndarray
    budget: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.residual) <= self.budget))

    def first_violation(self):
        bad = np.nonzero(np.abs(self.residual) > self.budget)[0]
        if bad.size == 0:
            return None
        i = int(bad[0])
        return float(self.times[i]), float(self.residual[i])


@dataclass
class BalanceReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        out = []
        for c in self.checks:
            v = c.first_violation()
            if v is not None:
                out.append(f"{c.name} violated at t = {v[0]!r} (residual {v[1]:.3e})")
        return out


BALANCE_IDENTITIES = ("energy", "strain", "vorticity", "velocity_gradient")


def balance_checks(log: TrajectoryLog, nu: float | None = None) -> BalanceReport:
    """Verify the four energy/enstrophy balance laws by centered differences."""
    if len(log) < 3:
        raise ValueError("balance checks need at least three samples")
    nu = log.nu if nu is None else nu
    t = log.column("t")
    col = log.column
    specs = {
        # name: (series differentiated, [terms of the predicted rate])
        "energy": (col("energy"), [-nu * col("grad_sq")]),
        "strain": (col("strain_sq"), [-2.0 * nu * col("strain_h1_sq"), -4.0 * col("int_det_s")]),
        "vorticity": (0.5 * col("vort_sq"), [-nu * col("vort_h1_sq"), col("stretching")]),
        "velocity_gradient": (0.5 * col("grad_sq"), [-nu * col("lap_sq"), -col("adv_lap")]),
    }
    checks = []
    for name, (series, terms) in specs.items():
        d = central_derivative(t, series)
        pred = np.sum(terms, axis=0)[d.index]
        scale = np.sum(np.abs(terms), axis=0)[d.index]
        budget = fd_budget(scale, d.error)
        checks.append(IdentityCheck(name, t[d.index], d.value, pred, d.value - pred, budget))
    return BalanceReport(checks)
