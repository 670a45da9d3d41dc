"""Configuration, time stepping, logging, pressure and balance identities."""
from __future__ import annotations

import math

import numpy as np
import pytest

from ssns.fields import (
    Grid,
    SpectralVectorField,
    curl,
    divergence_residual,
    project_div_free,
    random_div_free,
    taylor_green,
)
from ssns.solver import (
    BALANCE_IDENTITIES,
    LOG_COLUMNS,
    CFLViolation,
    ConfigError,
    NumericalBlowUp,
    NumericalError,
    SimState,
    SolverConfig,
    balance_checks,
    diagnostics,
    load_config,
    nonlinear_rhs,
    parse_config,
    pressure,
    pressure_residual,
    simulate,
    step,
)
from ssns.timeseries import central_derivative, fd_budget


def abc_flow(grid: Grid, a=1.0, b=0.7, c=0.4) -> SpectralVectorField:
    """Arnold–Beltrami–Childress field: ω = u, so u × ω = 0."""
    x, y, z = grid.coordinates()
    u = np.stack(np.broadcast_arrays(
        a * np.sin(z) + c * np.cos(y),
        b * np.sin(x) + a * np.cos(z),
        c * np.sin(y) + b * np.cos(x),
    ))
    return SpectralVectorField.from_physical(grid, u, div_free=True)


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg == SolverConfig()
        assert cfg.n_steps == 1000

    def test_parse_with_comments(self):
        cfg = parse_config("# run\nn = 16   # grid\nnu=0.05\ninit = random\ndealias = false\n")
        assert (cfg.n, cfg.nu, cfg.init, cfg.dealias) == (16, 0.05, "random", False)

    def test_round_trip(self):
        cfg = SolverConfig(n=24, nu=0.3, dt=0.01, t_end=0.5, sample_every=5, init="zero", seed=9)
        assert parse_config(cfg.as_text()) == cfg

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="'viscosity'"):
            parse_config("viscosity = 0.1\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("n = 16\nn = 32\n")

    @pytest.mark.parametrize("text", ["n = 15", "nu = -1", "dt = 0", "t_end = -1", "sample_every = 0",
                                      "init = vortex", "n = abc", "dealias = maybe", "just words",
                                      "dt = 0.003\nt_end = 0.01"])
    def test_bad_values(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_overrides_and_file(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("seed = 1\n")
        assert load_config(p, {"seed": 5}).seed == 5
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.cfg")


class TestStepping:
    def test_heat_semigroup_exact(self):
        g = Grid(16)
        u0 = random_div_free(g, seed=1)
        s = SimState(0.0, u0)
        for _ in range(10):
            s = step(s, 0.01, 0.3, nonlinear=False)
        expected = u0.coeffs * np.exp(-0.3 * g.k2 * 0.1)
        np.testing.assert_allclose(s.u.coeffs, expected, atol=1e-14)
        assert s.t == pytest.approx(0.1)

    def test_beltrami_flow_decays_exactly(self):
        g = Grid(16)
        u0 = abc_flow(g)
        assert np.max(np.abs(nonlinear_rhs(u0).coeffs)) < 1e-13
        cfg = SolverConfig(n=16, nu=0.2, dt=0.01, t_end=0.2, sample_every=20)
        log = simulate(cfg, u0=u0, keep_snapshots="ends")
        uT = log.snapshots[len(log) - 1]
        np.testing.assert_allclose(uT.coeffs, u0.coeffs * math.exp(-0.2 * 0.2), atol=1e-12)

    def test_nonlinear_term_is_advection(self):
        # P(u × ω) = P(−(u·∇)u): compare against the direct advective form
        g = Grid(16)
        u = random_div_free(g, seed=2, cutoff_mode=3)
        grad = u.gradient_physical()
        adv = np.einsum("i...,ij...->j...", u.physical, grad)
        direct = SpectralVectorField.from_physical(g, -adv)
        ref = project_div_free(direct).coeffs * g.dealias_mask
        np.testing.assert_allclose(nonlinear_rhs(u).coeffs, ref, atol=1e-12)

    def test_fourth_order_in_time(self):
        g = Grid(16)
        u0 = random_div_free(g, seed=3, cutoff_mode=4)

        def run(dt, n):
            s = SimState(0.0, u0)
            for _ in range(n):
                s = step(s, dt, 0.05)
            return s.u.coeffs

        ref = run(0.0025, 80)
        e1 = np.max(np.abs(run(0.02, 10) - ref))
        e2 = np.max(np.abs(run(0.01, 20) - ref))
        assert 10.0 < e1 / e2 < 22.0

    def test_cfl_violation(self):
        g = Grid(16)
        with pytest.raises(CFLViolation) as exc:
            step(SimState(0.5, random_div_free(g, seed=0)), 1.0, 0.1)
        assert exc.value.time == 0.5

    def test_blow_up_detected(self):
        g = Grid(16)
        u = SpectralVectorField(g, random_div_free(g, seed=0).coeffs * 1e7, div_free=True)
        with pytest.raises(NumericalBlowUp):
            step(SimState(0.0, u), 1e-12, 0.1)
        assert issubclass(NumericalBlowUp, NumericalError)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            step(SimState(0.0, taylor_green(Grid(8))), 0.0, 0.1)

    def test_incompressibility_preserved(self, small_log):
        for u in small_log.snapshot_fields():
            assert divergence_residual(u) < 1e-12


class TestLog:
    def test_zero_horizon_single_row(self):
        log = simulate(SolverConfig(n=8, t_end=0.0))
        csv = log.to_csv().splitlines()
        assert csv[0] == ",".join(LOG_COLUMNS) and len(csv) == 2

    def test_columns_and_times(self, small_log):
        assert len(small_log) == 21
        np.testing.assert_allclose(small_log.column("t"), np.arange(21) * 0.01)
        with pytest.raises(KeyError):
            small_log.column("nope")

    def test_csv_round_trip_exact(self, small_log, tmp_path):
        path = small_log.write_csv(tmp_path / "t.csv")
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_array_equal(data[:, 1], small_log.column("energy"))

    @pytest.mark.parametrize("mode,expected", [("none", []), ("ends", [0, 5]), (2, [0, 2, 4, 5]), ("all", list(range(6)))])
    def test_snapshot_decimation(self, mode, expected):
        cfg = SolverConfig(n=8, nu=0.5, dt=0.01, t_end=0.05, sample_every=1)
        assert sorted(simulate(cfg, keep_snapshots=mode).snapshots) == expected

    def test_energy_monotone(self, small_log):
        assert np.all(np.diff(small_log.column("energy")) < 0)

    def test_zero_initial_field_stays_zero(self):
        log = simulate(SolverConfig(n=8, dt=0.01, t_end=0.05, sample_every=1, init="zero"))
        assert np.all(log.column("energy") == 0)

    def test_diagnostics_taylor_green(self):
        g = Grid(16)
        d = diagnostics(taylor_green(g))
        vol = g.volume
        assert d["energy"] == pytest.approx(vol / 8)
        assert d["grad_sq"] == pytest.approx(3 * vol / 4)
        assert d["vort_sq"] == pytest.approx(d["grad_sq"])
        assert d["strain_sq"] == pytest.approx(d["grad_sq"] / 2)
        assert d["max_u"] == pytest.approx(1.0, rel=1e-2)
        assert d["stretching"] == pytest.approx(-4 * d["int_det_s"], abs=1e-10)


class TestPressure:
    def test_taylor_green_analytic(self):
        g = Grid(16)
        x, y, z = g.coordinates()
        p = pressure(taylor_green(g))
        exact = (np.cos(2 * x) + np.cos(2 * y)) * (np.cos(2 * z) + 2.0) / 16.0
        exact = exact - exact.mean()
        np.testing.assert_allclose(p.values, exact, atol=1e-12)
        assert abs(np.mean(p.values)) < 1e-14

    def test_residual_small(self):
        u = random_div_free(Grid(16), seed=5, cutoff_mode=3)
        assert pressure_residual(u, pressure(u)) < 1e-10


class TestBalance:
    def test_all_identities_hold(self, small_log):
        rep = balance_checks(small_log)
        assert rep.passed, rep.failures()
        assert tuple(c.name for c in rep.checks) == BALANCE_IDENTITIES

    def test_wrong_viscosity_detected(self, small_log):
        rep = balance_checks(small_log, nu=2.0 * small_log.nu)
        assert not rep.passed
        assert rep.failures()[0].startswith("energy violated at t = ")
        t, _ = next(c for c in rep.checks if c.name == "energy").first_violation()
        assert t in small_log.times

    def test_needs_three_samples(self):
        with pytest.raises(ValueError):
            balance_checks(simulate(SolverConfig(n=8, t_end=0.0)))

    def test_vorticity_is_curl(self, small_log):
        u = small_log.snapshots[3]
        row = small_log.rows[3]
        w = curl(u)
        assert row["vort_sq"] == pytest.approx(u.grid.inner(w.coeffs, w.coeffs))


class TestFiniteDifferences:
    def test_fourth_order_stencil_exact_on_quartic(self):
        t = np.linspace(0.0, 1.0, 11)
        d = central_derivative(t, t**4 - 2 * t**2)
        np.testing.assert_array_equal(d.index, np.arange(2, 9))
        np.testing.assert_allclose(d.value, 4 * t[2:9] ** 3 - 4 * t[2:9], atol=1e-12)
        assert np.all(d.error > 0)

    def test_three_point_fallback(self):
        t = np.array([0.0, 0.1, 0.2, 0.3])
        d = central_derivative(t, t**2)
        np.testing.assert_allclose(d.value, 2 * t[1:3])
        assert np.all(d.error == 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            central_derivative(np.array([0.0, 1.0]), np.zeros(2))
        with pytest.raises(ValueError):
            central_derivative(np.array([0.0, 0.1, 0.3]), np.zeros(3))

    def test_budget(self):
        np.testing.assert_allclose(fd_budget(np.array([100.0, 1.0]), np.array([0.001, 0.1])), [0.1, 1.0])
