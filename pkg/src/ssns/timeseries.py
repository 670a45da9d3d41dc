"""Finite-difference time derivatives of sampled series."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Derivative:
    """Centered derivative estimates at interior samples.

    ``error`` estimates the truncation error of ``value``; it is the gap between
    the second-order and fourth-order stencils (≈ Δt²|y'''|/6).
    """

    index: np.ndarray
    value: np.ndarray
    error: np.ndarray


def central_derivative(t: np.ndarray, y: np.ndarray) -> Derivative:
    """Centered differences on a uniform sample grid.

    Five or more samples: 4th-order five-point stencil at indices 2..n−3.
    Three or four samples: 2nd-order three-point stencil at 1..n−2 with no
    error estimate available.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = t.size
    if n < 3:
        raise ValueError("need at least three samples for a centered difference")
    dt = np.diff(t)
    h = float(np.mean(dt))
    if np.max(np.abs(dt - h)) > 1e-9 * h:
        raise ValueError("centered differences require uniformly spaced samples")
    if n >= 5:
        idx = np.arange(2, n - 2)
        d3 = (y[idx + 1] - y[idx - 1]) / (2.0 * h)
        d5 = (-y[idx + 2] + 8.0 * y[idx + 1] - 8.0 * y[idx - 1] + y[idx - 2]) / (12.0 * h)
        return Derivative(idx, d5, np.abs(d5 - d3))
    idx = np.arange(1, n - 1)
    d3 = (y[idx + 1] - y[idx - 1]) / (2.0 * h)
    return Derivative(idx, d3, np.zeros_like(d3))


def fd_budget(scale: np.ndarray, error: np.ndarray, rel: float = 1e-3) -> np.ndarray:
    """Tolerance max(rel·scale, 10·truncation estimate)."""
    return np.maximum(rel * np.abs(scale), 10.0 * np.abs(error))
