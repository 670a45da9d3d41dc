"""Command-line front end: simulate, certify, verify-lorentz, selftest.

Exit status: 0 all checks pass, 1 usage or configuration error, 2 a
mathematical check was violated (or the integration aborted).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .criteria import (
    VARIANTS,
    CutoffRule,
    certify,
    certify_weak,
    determinant_bound_check,
    endpoint_monitor,
    weak_convergence_monitor,
)
from .fields import (
    Grid,
    isometry_check,
    project_div_free,
    random_div_free,
    strain,
    symmetric_eigenvalues,
    write_snapshot,
)
from .lorentz import (
    SPLIT_COLUMNS,
    check_lq_prop,
    check_weak_lq_prop,
    embedding_split,
    lp_norm_cavalieri,
    lq_norm,
    sum_decompose,
    sum_embedding_constant,
    weak_lq_norm,
)
from .report import CheckResult, RunManifest, emit_report
from .solver import LOG_COLUMNS, ConfigError, NumericalError, SolverConfig, load_config, simulate
from .synthetic import DECOMPOSITION_CASES, synthetic_battery

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2

CERTIFICATE_COLUMNS = ("t", "lhs", "rhs", "margin")

#: default (p, q) pairs and the q′ used for the weak variant of each
STRONG_PAIRS = {
    "velocity": ((4.0, 6.0), (8.0, 4.0)),
    "strain": ((2.0, 3.0), (4.0, 2.0)),
    "vorticity": ((2.0, 3.0), (4.0, 2.0)),
}
WEAK_Q_PRIME = {6.0: 4.0, 4.0: 3.5, 3.0: 2.0, 2.0: 1.8}

_CHECK_NAMES = {
    ("velocity", "strong"): "velocity sum-space enstrophy bound",
    ("velocity", "levelset"): "velocity level-set corollary",
    ("velocity_weak", "strong"): "velocity weak-Lq sum-space corollary",
    ("strain", "strong"): "strain-eigenvalue sum-space enstrophy bound",
    ("strain", "levelset"): "strain-eigenvalue level-set corollary",
    ("strain_weak", "strong"): "strain-eigenvalue weak-Lq sum-space corollary",
    ("vorticity", "strong"): "vorticity sum-space enstrophy bound",
    ("vorticity", "levelset"): "vorticity level-set corollary",
    ("vorticity_weak", "strong"): "vorticity weak-Lq sum-space corollary",
}


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def load_schema() -> dict:
    return json.loads(resources.files("ssns").joinpath("csv_schema.json").read_text())


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


# -- simulate ----------------------------------------------------------------------------------
def _config_from_args(args) -> SolverConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    overrides = {"seed": args.seed} if args.seed is not None else None
    return load_config(args.config, overrides)


def _write(out: Path, rel: str, text: str, manifest: RunManifest) -> Path:
    path = out / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    manifest.outputs.append(rel)
    return path


def cmd_simulate(args, manifest: RunManifest, out: Path):
    cfg = _config_from_args(args)
    manifest.config, manifest.seed = asdict(cfg), cfg.seed
    log = simulate(cfg, keep_snapshots=args.snapshots)
    _write(out, "trajectory.csv", log.to_csv(), manifest)
    snap_dir = out / "snapshots"
    for idx, u in sorted(log.snapshots.items()):
        snap_dir.mkdir(parents=True, exist_ok=True)
        rel = f"snapshots/velocity_{idx:05d}.ssns"
        write_snapshot(out / rel, u, "velocity", log.times[idx])
        manifest.outputs.append(rel)
    checks = [_energy_check(log)]
    return checks, len(log)


def _energy_check(log) -> CheckResult:
    e = log.column("energy")
    if e.size < 2:
        return CheckResult("energy nonincreasing", True, None, int(e.size))
    rel = np.diff(e) / np.maximum(e[:-1], 1e-300)
    worst = int(np.argmax(rel))
    ok = bool(np.all(rel <= 1e-10))
    res = CheckResult("energy nonincreasing", ok, float(-np.max(rel)), int(e.size))
    if not ok:
        res.violation_time, res.violation_margin = float(log.times[worst + 1]), float(-rel[worst])
    return res


# -- certify -------------------------------------------------------------------------------------
def _cert_result(cert) -> CheckResult:
    name = f"{_CHECK_NAMES[(cert.variant, cert.mode)]} {cert.label}"
    res = CheckResult(name, cert.passed, cert.min_margin, int(cert.times.size))
    v = cert.first_violation()
    if v is not None:
        res.violation_time, res.violation_margin = v
    return res


def certificate_battery(log, factor_scale: float = 1.0) -> list:
    """All certificates of the default battery: strong, level-set and weak variants."""
    certs = []
    for variant in VARIANTS:
        rules = [CutoffRule.all_in_lq(), CutoffRule.all_in_linf(), CutoffRule.median(log, variant)]
        for pq in STRONG_PAIRS[variant]:
            for rule in rules:
                certs.append(certify(log, variant, pq, rule, factor_scale=factor_scale))
                if rule.finite:
                    certs.append(certify(log, variant, pq, rule, levelset=True, factor_scale=factor_scale))
            qp = WEAK_Q_PRIME[pq[1]]
            for rule in (CutoffRule.all_in_lq(), CutoffRule.median(log, variant)):
                certs.append(certify_weak(log, variant, pq, qp, rule, factor_scale=factor_scale))
    return certs


def trajectory_checks(log) -> list:
    """Balance identities, pointwise strain inequality, endpoint monitors, weak convergence."""
    from .solver import balance_checks

    checks = []
    if len(log) >= 3:
        rep = balance_checks(log)
        for c in rep.checks:
            res = CheckResult(f"{c.name.replace('_', '-')} balance identity", c.passed,
                              float(np.min(c.budget - np.abs(c.residual))) if c.residual.size else None,
                              int(c.residual.size))
            v = c.first_violation()
            if v is not None:
                res.violation_time, res.violation_margin = v
            checks.append(res)
    worst, ok = -math.inf, True
    for i in sorted(log.snapshots):
        d = determinant_bound_check(strain(log.snapshots[i]))
        worst = max(worst, d.max_excess)
        ok = ok and d.passed
    checks.append(CheckResult("pointwise strain determinant inequality", ok,
                              None if worst == -math.inf else -worst, len(log.snapshots)))
    if len(log) >= 3:
        for variant in VARIANTS:
            rep = endpoint_monitor(log, variant, CutoffRule.percentile(log, variant, 95.0))
            res = CheckResult(f"{variant} endpoint differential inequality", rep.passed, rep.min_margin,
                              rep.n_checked, detail=f"threshold {rep.threshold:.6g}")
            v = rep.first_violation()
            if v is not None:
                res.violation_time, res.violation_margin = v
            checks.append(res)
    lam = [np.max(strain(log.snapshots[i]).lambda2_plus.values) for i in sorted(log.snapshots)]
    h0 = 0.5 * lam[0] if lam and lam[0] > 0 else 1.0
    times = np.asarray(log.times)
    wc = weak_convergence_monitor(log, CutoffRule.table(times, h0 * (1.0 + times), label="growing"))
    checks.append(CheckResult("weak-convergence decay bound", wc.passed, wc.min_margin, len(log)))
    return checks


def cmd_certify(args, manifest: RunManifest, out: Path):
    cfg = _config_from_args(args)
    manifest.config, manifest.seed = asdict(cfg), cfg.seed
    log = simulate(cfg, keep_snapshots="all")
    _write(out, "trajectory.csv", log.to_csv(), manifest)
    checks = []
    for k, cert in enumerate(certificate_battery(log, factor_scale=args.fault_factor)):
        rel = f"certificates/{k:02d}_{cert.variant}_{cert.mode}_p{cert.p:g}_q{cert.q:g}_{cert.rule}.csv"
        _write(out, rel, cert.to_csv(), manifest)
        checks.append(_cert_result(cert))
    checks.extend(trajectory_checks(log))
    return checks, len(log)


# -- verify-lorentz --------------------------------------------------------------------------------
def lorentz_checks(out: Path | None, manifest: RunManifest | None, seed: int = 0, fault_factor: float = 1.0) -> list:
    grid = Grid(8)
    battery = synthetic_battery(grid, seed=seed)
    cell = grid.cell_volume
    checks = []

    worst = 0.0
    n = 0
    for name, f in battery:
        for v in f.values:
            for p in (1.0, 1.5, 2.0, 3.0):
                a, b = lp_norm_cavalieri(v, p, cell), lq_norm(v, p, cell)
                worst = max(worst, abs(a - b) / b if b else abs(a))
                n += 1
    checks.append(CheckResult("Cavalieri layer-cake formula", worst <= 1e-8, -worst, n))

    ok, n, m = True, 0, math.inf
    for name, f in battery:
        for v in f.values:
            for q in (1.0, 2.0, 3.0):
                w, l = weak_lq_norm(v, q, cell), lq_norm(v, q, cell)
                ok &= w <= l * (1 + 1e-12)
                m = min(m, (l - w) / l if l else 0.0)
                n += 1
    checks.append(CheckResult("Chebyshev weak-Lq bound", bool(ok), m, n))

    for label, fn, pq in (
        ("Lq above-cutoff bound", check_lq_prop, (1.0, 1.5)),
        ("weak-Lq above-cutoff bound", check_weak_lq_prop, (1.0, 2.0)),
    ):
        ok, m, n, first = True, math.inf, 0, None
        for name, f in battery:
            for t, v in zip(f.times, f.values):
                mag = np.abs(v)
                if not np.any(mag > 0):
                    continue
                R = 0.5 * float(np.median(mag[mag > 0]))
                rep = fn(np.where(mag > R, mag, 0.0), R, *pq, cell=cell, factor_scale=fault_factor)
                n += 1
                m = min(m, rep.margin)
                if not rep.holds:
                    ok = False
                    if first is None:
                        first = (float(t), rep.margin, name)
        res = CheckResult(label, ok, m, n)
        if first is not None:
            res.violation_time, res.violation_margin = first[:2]
            res.detail = f"first failing function {first[2]}"
        checks.append(res)

    k, C = sum_embedding_constant(1.0, 2.0)
    err = abs(C - 2.0 * math.sqrt(2.0))
    checks.append(CheckResult("Lp+Linf embedding constant (p,q)=(1,2)", err <= 1e-8, -err, 1))
    ok, m, n = True, math.inf, 0
    for name, f in battery:
        for v in f.values:
            for p, q in ((1.0, 2.0), (2.0, 4.0)):
                s = embedding_split(v, p, q, cell)
                rhs = s.constant * s.weak_norm * fault_factor
                ok &= s.sum_norm <= rhs * (1 + 1e-12) + 1e-300
                m = min(m, (rhs - s.sum_norm) / rhs if rhs else 0.0)
                n += 1
    checks.append(CheckResult("Lp+Linf explicit split", bool(ok), m, n))

    for ci, (e, qp) in enumerate(DECOMPOSITION_CASES):
        ok, m, first = True, math.inf, None
        for name, f in battery:
            rep = sum_decompose(f, e, qp, factor_scale=fault_factor)
            for b in (rep.bound_g, rep.bound_h):
                ok &= b.holds
                m = min(m, b.margin)
                if not b.holds and first is None:
                    first = (float(f.times[-1]), b.margin, name)
            if out is not None and manifest is not None:
                rows = [",".join(SPLIT_COLUMNS)] + [",".join(repr(x) for x in r) for r in rep.rows()]
                _write(out, f"splits/case{ci}_{name}.csv", "\n".join(rows) + "\n", manifest)
        res = CheckResult(
            f"mixed sum-space decomposition (k,m,p,q)=({e.k:g},{e.m:g},{e.p:g},{e.q:g}) q'={qp:g}",
            bool(ok), m, len(battery),
        )
        if first is not None:
            res.violation_time, res.violation_margin = first[:2]
            res.detail = f"first failing function {first[2]}"
        checks.append(res)
    return checks


def cmd_verify_lorentz(args, manifest: RunManifest, out: Path):
    seed = args.seed if args.seed is not None else 0
    manifest.seed = seed
    return lorentz_checks(out, manifest, seed=seed, fault_factor=args.fault_factor), None


# -- selftest -----------------------------------------------------------------------------------
def schema_check() -> CheckResult:
    """Compare the columns the writers emit with the shipped schema file."""
    schema = load_schema()["files"]
    expected = {
        "trajectory.csv": tuple(LOG_COLUMNS),
        "certificate.csv": CERTIFICATE_COLUMNS,
        "split.csv": tuple(SPLIT_COLUMNS),
    }
    drift = []
    for name, cols in expected.items():
        documented = tuple(c["name"] for c in schema.get(name, {}).get("columns", []))
        if documented != cols:
            drift.append(name)
    return CheckResult("CSV schema matches writers", not drift, None, len(expected),
                       detail=f"drift in {', '.join(drift)}" if drift else "")


def selftest_checks(seed: int = 0) -> list:
    checks = [schema_check()]
    grid = Grid(16)
    worst = 0.0
    for s in range(5):
        u = random_div_free(grid, seed=seed + s, cutoff_mode=4)
        worst = max(worst, isometry_check(u, tol=math.inf).deviation)
    checks.append(CheckResult("spectral isometry", worst <= 1e-10, -worst, 5))
    u = random_div_free(grid, seed=seed)
    once = project_div_free(u)
    twice = project_div_free(once)
    diff = float(np.max(np.abs(twice.coeffs - once.coeffs)))
    checks.append(CheckResult("projection idempotence", diff <= 1e-14, -diff, 1))
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((6, 2000))
    lam = np.stack(symmetric_eigenvalues(*a), axis=-1)
    mats = np.empty((2000, 3, 3))
    for k, (i, j) in enumerate(((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))):
        mats[:, i, j] = mats[:, j, i] = a[k]
    ref = np.linalg.eigvalsh(mats)
    err = float(np.max(np.abs(lam - ref) / np.linalg.norm(mats, axis=(1, 2))[:, None]))
    checks.append(CheckResult("symmetric eigenvalue kernel", err <= 1e-9, -err, 2000))
    cfg = SolverConfig(n=16, nu=0.2, dt=5e-3, t_end=0.1, sample_every=2, init="random", seed=seed)
    log1 = simulate(cfg)
    log2 = simulate(cfg)
    checks.append(CheckResult("deterministic trajectory", log1.to_csv() == log2.to_csv(), None, len(log1)))
    checks.append(_energy_check(log1))
    checks.extend(c for c in trajectory_checks(log1) if "balance" in c.name or "determinant" in c.name)
    checks.extend(lorentz_checks(None, None, seed=seed))
    return checks


def cmd_selftest(args, manifest: RunManifest, out: Path):
    seed = args.seed if args.seed is not None else 0
    manifest.seed = seed
    return selftest_checks(seed), None


# -- driver ---------------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value solver configuration file")
    common.add_argument("--out", default="ssns-out", help="output directory (default: ssns-out)")
    common.add_argument("--seed", type=int, default=None, help="override the configured random seed")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    # test hook: scales the bound factors so that checks can be made to fail on purpose
    common.add_argument("--fault-factor", type=float, default=1.0, help=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="ssns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ssns {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="integrate and write trajectory CSV and snapshots")
    p.add_argument("--snapshots", default="ends", choices=("all", "ends", "none"),
                   help="which samples get a velocity snapshot file (default: ends)")
    sub.add_parser("certify", parents=[common], help="simulate, then evaluate every certificate and monitor")
    sub.add_parser("verify-lorentz", parents=[common], help="Lorentz-space battery on synthetic functions")
    sub.add_parser("selftest", parents=[common], help="invariant suite")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "verify-lorentz": cmd_verify_lorentz,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    out = Path(args.out)
    manifest = RunManifest(command=args.command, started=_now())
    checks, samples = [], None
    status = EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        checks, samples = _COMMANDS[args.command](args, manifest, out)
        if not all(c.passed for c in checks):
            status = EXIT_VIOLATION
    except (ConfigError, OSError) as exc:
        manifest.error = str(exc)
        print(f"ssns: error: {exc}", file=sys.stderr)
        status = EXIT_USAGE
    except NumericalError as exc:
        manifest.error = str(exc)
        print(f"ssns: integration aborted: {exc}", file=sys.stderr)
        status = EXIT_VIOLATION
    finally:
        manifest.finished = _now()
        manifest.passed = status == EXIT_OK
        text, doc = emit_report(manifest, checks, samples)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.txt").write_text(text)
            (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            manifest.outputs.extend(["report.txt", "report.json", "manifest.json"])
            (out / "manifest.json").write_text(manifest.to_json())
        except OSError as exc:
            print(f"ssns: cannot write report: {exc}", file=sys.stderr)
            status = EXIT_USAGE
    if status != EXIT_USAGE:
        _say(args, text.rstrip())
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
