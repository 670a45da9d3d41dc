"""Closed-form symmetric 3×3 eigenvalue kernel and its Jacobi fallback."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ssns.fields.eigen import jacobi_eigenvalues, symmetric_eigenvalues


def _mats(a):
    m = np.empty(a.shape[1:] + (3, 3))
    for k, (i, j) in enumerate(((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))):
        m[..., i, j] = m[..., j, i] = a[k]
    return m


class TestClosedForm:
    def test_against_lapack(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((6, 5000))
        lam = np.stack(symmetric_eigenvalues(*a), axis=-1)
        ref = np.linalg.eigvalsh(_mats(a))
        np.testing.assert_allclose(lam, ref, atol=1e-12 * np.max(np.abs(ref)))

    def test_diagonal(self):
        l1, l2, l3 = symmetric_eigenvalues(3.0, -1.0, 2.0, 0.0, 0.0, 0.0)
        assert (float(l1), float(l2), float(l3)) == pytest.approx((-1.0, 2.0, 3.0))

    def test_shape_preserved(self):
        a = np.zeros((4, 5, 6))
        out = symmetric_eigenvalues(a, a, a, a, a, a)
        assert all(o.shape == (4, 5, 6) for o in out)

    @pytest.mark.parametrize("eps", [0.0, 1e-16, 1e-10, 1e-7])
    def test_near_degenerate_uses_fallback(self, eps):
        # eigenvalues (1, 1, 1 + eps) rotated
        rng = np.random.default_rng(1)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        m = q @ np.diag([1.0, 1.0, 1.0 + eps]) @ q.T
        comps = [m[0, 0], m[1, 1], m[2, 2], m[0, 1], m[0, 2], m[1, 2]]
        lam = np.array([float(x) for x in symmetric_eigenvalues(*comps)])
        np.testing.assert_allclose(lam, [1.0, 1.0, 1.0 + eps], atol=1e-14)

    def test_sorted_for_triple_root(self):
        lam = symmetric_eigenvalues(np.full(10, 2.0), np.full(10, 2.0), np.full(10, 2.0), 0, 0, 0)
        for x in lam:
            np.testing.assert_array_equal(x, 2.0)

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, (6,), elements=st.floats(-1e3, 1e3, allow_nan=False)))
    def test_property_matches_lapack(self, a):
        lam = np.array([float(x) for x in symmetric_eigenvalues(*a)])
        ref = np.linalg.eigvalsh(_mats(a[:, None])[0])
        scale = max(1.0, float(np.max(np.abs(ref))))
        assert np.all(np.diff(lam) >= 0)
        np.testing.assert_allclose(lam, ref, atol=1e-9 * scale)
        assert lam.sum() == pytest.approx(a[0] + a[1] + a[2], abs=1e-9 * scale)


class TestJacobi:
    def test_random(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((6, 300))
        m = _mats(a)
        np.testing.assert_allclose(np.sort(jacobi_eigenvalues(m), axis=-1), np.linalg.eigvalsh(m), atol=1e-12)

    def test_tiny_off_diagonal_no_warnings(self):
        m = np.diag([1.0, 2.0, 3.0])[None].copy()
        m[0, 0, 1] = m[0, 1, 0] = 1e-300
        with np.errstate(over="raise", divide="raise", invalid="raise"):
            lam = jacobi_eigenvalues(m)
        np.testing.assert_allclose(np.sort(lam[0]), [1.0, 2.0, 3.0])
