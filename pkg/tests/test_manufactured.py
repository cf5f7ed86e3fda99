"""Manufactured-solution oracles.

Loads in production come from Richardson-extrapolated finite differences; the
oracles here derive the same loads symbolically (sympy) and by hand, so the
two routes are independent.
"""

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from costafem import (CASES, AlphaSplit, default_alpha_split, derive_load,
                      eval_displacement, eval_strain, get_case,
                      restrict_to_plane, young_modulus)
from costafem.manufactured import (frobenius_norm, plane_displacement,
                                   plane_load)


def _sym_load_2d(u_of, nonlinear=False):
    """Symbolic body load f = u_tt - div(sigma) for a 2D displacement pair."""
    x, y, t, a = sp.symbols("x y t a", real=True)
    u = u_of(x, y, t, a)
    eps = sp.Matrix([sp.diff(u[0], x), sp.diff(u[1], y),
                     sp.diff(u[0], y) + sp.diff(u[1], x)])
    nu = sp.Rational(1, 4)
    c = 1 / (1 - nu**2) * sp.Matrix([[1, nu, 0], [nu, 1, 0],
                                     [0, 0, (1 - nu) / 2]])
    sig = c * eps
    if nonlinear:
        young = 5 / sp.sqrt(20 + sp.sqrt(eps[0]**2 + eps[1]**2
                                         + eps[2]**2 / 2))
        sig = young * sig
    f0 = sp.diff(u[0], t, 2) - (sp.diff(sig[0], x) + sp.diff(sig[2], y))
    f1 = sp.diff(u[1], t, 2) - (sp.diff(sig[2], x) + sp.diff(sig[1], y))
    return sp.lambdify((t, x, y, a), (f0, f1), "numpy")


def _sym_load_3d(u_of):
    """Symbolic body load for a 3D displacement triple (Voigt xx yy zz yz zx xy)."""
    x, y, z, t, a = sp.symbols("x y z t a", real=True)
    u = u_of(x, y, z, t, a)
    eps = sp.Matrix([
        sp.diff(u[0], x), sp.diff(u[1], y), sp.diff(u[2], z),
        sp.diff(u[1], z) + sp.diff(u[2], y),
        sp.diff(u[0], z) + sp.diff(u[2], x),
        sp.diff(u[0], y) + sp.diff(u[1], x),
    ])
    nu = sp.Rational(1, 4)
    lam = nu / ((1 + nu) * (1 - 2 * nu))
    mu = 1 / (2 * (1 + nu))
    c = sp.zeros(6, 6)
    for i in range(3):
        for j in range(3):
            c[i, j] = lam + (2 * mu if i == j else 0)
        c[3 + i, 3 + i] = mu
    sig = c * eps
    f0 = sp.diff(u[0], t, 2) - (sp.diff(sig[0], x) + sp.diff(sig[5], y)
                                + sp.diff(sig[4], z))
    f1 = sp.diff(u[1], t, 2) - (sp.diff(sig[5], x) + sp.diff(sig[1], y)
                                + sp.diff(sig[3], z))
    f2 = sp.diff(u[2], t, 2) - (sp.diff(sig[4], x) + sp.diff(sig[3], y)
                                + sp.diff(sig[2], z))
    return sp.lambdify((t, x, y, z, a), (f0, f1, f2), "numpy")


def _grid2d(n=5):
    s = np.linspace(0.12, 0.91, n)
    gx, gy = np.meshgrid(s, s)
    return np.column_stack([gx.ravel(), gy.ravel()])


class TestLoadAgainstSymbolicOracle:
    def test_wave_family_2d(self):
        fun = _sym_load_2d(lambda x, y, t, a: (
            sp.sin(sp.pi * (x + a * y)) * sp.cos(a * t),
            sp.cos(sp.pi * (x + a * y)) * sp.sin(a * t)))
        case = get_case("e1")
        pts = _grid2d()
        for alpha, t in [(-0.5, 0.33), (1.1, 0.8), (2.5, 0.05)]:
            got = derive_load(case, alpha, t, pts)
            want = np.column_stack(fun(t, pts[:, 0], pts[:, 1], alpha))
            np.testing.assert_allclose(got, want, atol=1e-6)

    def test_exponential_family_2d(self):
        fun = _sym_load_2d(lambda x, y, t, a: (
            sp.exp((-t * x**2 + y**2) / (1 + a + t**2)),
            sp.exp((t * x**2 - y**2) / (1 + a + t**2))))
        case = get_case("e2")
        pts = _grid2d()
        got = derive_load(case, 0.7, 0.4, pts)
        want = np.column_stack(fun(0.4, pts[:, 0], pts[:, 1], 0.7))
        np.testing.assert_allclose(got, want, atol=1e-6)

    def test_wave_family_3d(self):
        fun = _sym_load_3d(lambda x, y, z, t, a: (
            sp.sin(sp.pi * (x + a * y + (1 + a) / 2 * z)) * sp.cos(a * t),
            sp.cos(sp.pi * (x + a * y + (1 + a) / 2 * z)) * sp.sin(a * t),
            -sp.cos(sp.pi * (x + a * y + (1 + a) / 2 * z)) * sp.sin(a * t)))
        case = get_case("ed1")
        pts2 = _grid2d(3)
        pts = np.column_stack([pts2, np.linspace(0.1, 0.8, len(pts2))])
        got = derive_load(case, 1.5, 0.6, pts)
        want = np.column_stack(fun(0.6, pts[:, 0], pts[:, 1], pts[:, 2], 1.5))
        np.testing.assert_allclose(got, want, atol=1e-6)

    def test_nonlinear_wave_family(self):
        """Strain-dependent modulus, symbolically differentiated end to end."""
        fun = _sym_load_2d(lambda x, y, t, a: (
            sp.sin(sp.pi * (x + a * y)) * sp.cos(a * t),
            sp.cos(sp.pi * (x + a * y)) * sp.sin(a * t)), nonlinear=True)
        case = get_case("n1")
        pts = _grid2d(4)
        got = derive_load(case, 0.9, 0.35, pts)
        want = np.column_stack(fun(0.35, pts[:, 0], pts[:, 1], 0.9))
        np.testing.assert_allclose(got, want, atol=1e-6)


class TestFrozenValues:
    def test_polynomial_family_point(self):
        # t = 0.5 makes the time factors 1, alpha = 0 drops the cross term
        u = eval_displacement(get_case("e3"), 0.0, 0.5, [1.0, 1.0])
        np.testing.assert_allclose(u, [2.0, 2.0], atol=1e-14)

    def test_exponential_family_3d_origin(self):
        u = eval_displacement(get_case("ed2"), 0.3, 0.0, [0.0, 0.0, 0.0])
        np.testing.assert_allclose(u, [1.0, 1.0, 1.0], atol=1e-14)

    def test_wave_family_at_t0(self):
        pts = _grid2d(3)
        u = eval_displacement(get_case("e1"), 0.8, 0.0, pts)
        np.testing.assert_allclose(
            u[:, 0], np.sin(np.pi * (pts[:, 0] + 0.8 * pts[:, 1])), atol=1e-14)
        np.testing.assert_allclose(u[:, 1], 0.0, atol=1e-14)

    def test_modulus_at_zero_strain(self):
        assert young_modulus(np.zeros(3)) == pytest.approx(5.0 / np.sqrt(20))

    def test_hand_derived_strain(self):
        """Wave family: eps_xx = pi cos(ph) cos(at), etc., by hand."""
        alpha, t = 0.7, 0.25
        p = np.array([0.3, 0.4])
        ph = np.pi * (p[0] + alpha * p[1])
        c, s = np.cos(alpha * t), np.sin(alpha * t)
        want = np.array([np.pi * np.cos(ph) * c,
                         -np.pi * alpha * np.sin(ph) * s,
                         np.pi * alpha * np.cos(ph) * c
                         - np.pi * np.sin(ph) * s])
        got = eval_strain(get_case("e1"), alpha, t, p)
        np.testing.assert_allclose(got, want, atol=1e-9)


class TestFrobeniusNorm:
    def test_engineering_shear_convention(self):
        # gamma = 2 counts as two tensor entries of 1: norm sqrt(2)
        assert frobenius_norm([0.0, 0.0, 2.0])[0] == pytest.approx(np.sqrt(2))
        assert frobenius_norm([1.0, 1.0, 0.0])[0] == pytest.approx(np.sqrt(2))
        assert frobenius_norm([0, 0, 0, 2.0, 0, 0])[0] == pytest.approx(
            np.sqrt(2))

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            frobenius_norm(np.zeros((2, 4)))


class TestConstantModulusReduction:
    def test_nonlinear_path_with_frozen_modulus_matches_linear(self):
        from dataclasses import replace
        frozen = replace(get_case("n1"),
                         young=lambda eps: np.ones(len(np.atleast_2d(eps))))
        linear = get_case("e1")
        pts = _grid2d(4)
        got = derive_load(frozen, 1.3, 0.45, pts)
        want = derive_load(linear, 1.3, 0.45, pts)
        np.testing.assert_allclose(got, want, atol=1e-9)


class TestAlphaSplit:
    def test_default_split(self):
        split = default_alpha_split()
        assert split.test == (-0.5, 0.7, 1.5, 2.5)
        assert split.val == (0.8, 1.1)
        assert len(split.train) == 16
        grid = {i / 10 for i in range(1, 21)}
        assert set(split.train) == grid - {0.7, 0.8, 1.1, 1.5}

    def test_validation(self):
        with pytest.raises(ValueError):
            AlphaSplit(train=(0.1, 0.2), val=(0.2,), test=(0.3,))
        with pytest.raises(ValueError):
            AlphaSplit(train=(), val=(0.2,), test=(0.3,))


class TestCaseRegistry:
    def test_labels_and_dimensions(self):
        assert set(CASES) == {"e1", "e2", "e3", "ed1", "ed2", "ed3",
                              "n1", "n2", "n3"}
        for label in ("e1", "e2", "e3", "n1", "n2", "n3"):
            assert CASES[label].dimension == 2
        for label in ("ed1", "ed2", "ed3"):
            assert CASES[label].dimension == 3
        for label in ("n1", "n2", "n3"):
            assert CASES[label].is_nonlinear

    def test_get_case_unknown(self):
        with pytest.raises(ValueError, match="unknown"):
            get_case("e9")

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            eval_displacement(get_case("e1"), 0.5, 0.0, [0.1, 0.2, 0.3])


class TestPlaneRestriction:
    def test_restriction_drops_z_terms(self):
        case = get_case("ed1")
        xy = _grid2d(3)
        disp, load = restrict_to_plane(case, 1.5, 0.4, xy)
        emb = np.column_stack([xy, np.zeros(len(xy))])
        np.testing.assert_allclose(
            disp, eval_displacement(case, 1.5, 0.4, emb)[:, :2], atol=1e-14)
        np.testing.assert_allclose(
            load, derive_load(case, 1.5, 0.4, emb)[:, :2], atol=1e-12)

    def test_rejects_2d_case(self):
        with pytest.raises(ValueError):
            restrict_to_plane(get_case("e1"), 1.0, 0.0, [[0.5, 0.5]])

    def test_field_helpers_match_direct_evaluation(self):
        xy = _grid2d(3)
        e1 = get_case("e1")
        np.testing.assert_allclose(
            plane_displacement(e1)(0.3, xy, 0.9),
            eval_displacement(e1, 0.9, 0.3, xy), atol=1e-14)
        np.testing.assert_allclose(
            plane_load(e1)(0.3, xy, 0.9),
            derive_load(e1, 0.9, 0.3, xy), atol=1e-12)
        ed1 = get_case("ed1")
        disp, load = restrict_to_plane(ed1, 0.9, 0.3, xy)
        np.testing.assert_allclose(
            plane_displacement(ed1)(0.3, xy, 0.9), disp, atol=1e-14)
        np.testing.assert_allclose(
            plane_load(ed1)(0.3, xy, 0.9), load, atol=1e-12)


class TestPointHandling:
    @settings(deadline=None, max_examples=25)
    @given(alpha=st.floats(-1.0, 3.0), t=st.floats(0.0, 1.0),
           px=st.floats(0.0, 1.0), py=st.floats(0.0, 1.0))
    def test_single_point_equals_batch_row(self, alpha, t, px, py):
        case = get_case("e1")
        single = eval_displacement(case, alpha, t, [px, py])
        batch = eval_displacement(case, alpha, t, [[px, py], [0.5, 0.5]])
        assert single.shape == (2,)
        np.testing.assert_array_equal(single, batch[0])

    def test_single_point_load_shape(self):
        f = derive_load(get_case("e2"), 0.5, 0.2, [0.4, 0.6])
        assert f.shape == (2,)
