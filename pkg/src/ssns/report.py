"""Run manifests and human/machine-readable check reports."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from . import __version__

REPORT_SCHEMA = "ssns-report/1"


@dataclass
class CheckResult:
    """Outcome of one named mathematical check."""

    name: str
    passed: bool
    min_margin: float | None = None
    samples: int = 0
    violation_time: float | None = None
    violation_margin: float | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("min_margin", "violation_time", "violation_margin"):
            v = d[k]
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = repr(v)
        return d


@dataclass
class RunManifest:
    command: str
    config: dict | None = None
    seed: int | None = None
    version: str = __version__
    started: str = ""
    finished: str = ""
    outputs: list = field(default_factory=list)
    passed: bool | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def _fmt(x) -> str:
    if x is None:
        return "-"
    return f"{x:.3e}"


def emit_report(manifest: RunManifest, checks: list, samples: int | None = None) -> tuple[str, dict]:
    """Summary text and versioned JSON document for a run.

    ``samples`` is the trajectory length when the run involved one; a value of
    zero is reported as "no samples".
    """
    lines = [f"ssns {manifest.version} — {manifest.command}"]
    if samples is not None:
        lines.append("trajectory: no samples" if samples == 0 else f"trajectory: {samples} samples")
    if manifest.error:
        lines.append(f"error: {manifest.error}")
    if not checks:
        lines.append("no checks evaluated")
    width = max((len(c.name) for c in checks), default=0)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"  [{status}] {c.name:<{width}}  min margin {_fmt(c.min_margin)}  ({c.samples} samples)"
        if c.detail:
            line += f"  {c.detail}"
        lines.append(line)
    failures = [c for c in checks if not c.passed]
    if failures:
        first = failures[0]
        where = "" if first.violation_time is None else f" at t = {first.violation_time!r}"
        margin = "" if first.violation_margin is None else f", margin {first.violation_margin!r}"
        lines.append(f"first violation: {first.name}{where}{margin}")
    passed = manifest.error is None and not failures
    lines.append(f"overall: {'PASS' if passed else 'FAIL'}")
    doc = {
        "schema": REPORT_SCHEMA,
        "command": manifest.command,
        "version": manifest.version,
        "samples": samples,
        "error": manifest.error,
        "passed": passed,
        "checks": [c.as_dict() for c in checks],
    }
    return "\n".join(lines) + "\n", doc
