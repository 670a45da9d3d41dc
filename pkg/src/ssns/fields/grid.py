"""Periodic grid geometry and the real-to-complex FFT conventions.

Physical arrays are indexed ``[x, y, z]`` with shape ``(n, n, n)``.  Spectral
arrays use the ``rfftn`` half-spectrum layout ``(n, n, n//2 + 1)`` and hold
Fourier-series coefficients, i.e. ``f(x) = sum_k fhat_k exp(i k.x)``; the forward
transform is therefore ``rfftn(f) / n**3``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft


def fft_workers() -> int:
    """Thread count for the FFT kernels, capped by the SSNS_THREADS variable."""
    raw = os.environ.get("SSNS_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


@dataclass(frozen=True)
class Grid:
    """Uniform ``n**3`` grid on the torus ``[0, box_length)**3``."""

    n: int
    box_length: float = 2.0 * np.pi

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or self.n % 2:
            raise ValueError(f"grid size n must be an even integer >= 8, got {self.n!r}")
        if not np.isfinite(self.box_length) or self.box_length <= 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def dx(self) -> float:
        return self.box_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def scale(self) -> float:
        """Factor 2π/L turning integer mode numbers into wavenumbers."""
        return 2.0 * np.pi / self.box_length

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays x, y, z."""
        x = np.arange(self.n) * self.dx
        return x[:, None, None], x[None, :, None], x[None, None, :]

    @cached_property
    def mode_numbers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer mode numbers (un-scaled) in the half-spectrum layout."""
        m = np.fft.fftfreq(self.n, 1.0 / self.n)
        mz = np.arange(self.n // 2 + 1, dtype=float)
        return m[:, None, None], m[None, :, None], mz[None, None, :]

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wavevector components used for differentiation.

        The Nyquist entry of each axis is set to zero: it has no real-valued
        derivative, and using one convention everywhere keeps the spectral
        Ḣ¹ norm, curl, projection and strain mutually exact.
        """
        out = []
        for m in self.mode_numbers:
            k = m * self.scale
            k = np.where(np.abs(m) == self.n // 2, 0.0, k)
            out.append(k)
        return tuple(out)

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky, kz = self.wavenumbers
        return kx**2 + ky**2 + kz**2

    @cached_property
    def k2_safe(self) -> np.ndarray:
        """|k|² with the (all-zero) null modes replaced by 1 for safe division."""
        k2 = self.k2.copy()
        k2[k2 == 0] = 1.0
        return k2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule cube: keep modes with every |m_i| < n/3."""
        mx, my, mz = self.mode_numbers
        lim = self.n / 3.0
        return (np.abs(mx) < lim) & (np.abs(my) < lim) & (np.abs(mz) < lim)

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Weights w with ∫|f|² = Σ w |f̂|² over the half spectrum.

        Planes kz = 0 and kz = n/2 appear once in the full spectrum, every
        other plane twice (its conjugate mirror is not stored).
        """
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return (w * self.volume)[None, None, :]

    # -- transforms -----------------------------------------------------------
    def forward(self, values: np.ndarray) -> np.ndarray:
        """Physical -> Fourier-series coefficients over the last three axes."""
        axes = (-3, -2, -1)
        return scipy.fft.rfftn(values, axes=axes, workers=fft_workers()) / self.n**3

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        axes = (-3, -2, -1)
        return scipy.fft.irfftn(coeffs * self.n**3, s=self.shape, axes=axes, workers=fft_workers())

    def inner(self, a_hat: np.ndarray, b_hat: np.ndarray) -> float:
        """Real L² inner product ∫ a·b computed from half-spectrum coefficients.

        Leading axes (vector components) are summed.
        """
        prod = (a_hat * np.conj(b_hat)).real
        return float(np.sum(prod * self.parseval_weights))
