import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfpoincare.arithmetic import DirichletCharacter, gamma0_index
from halfpoincare.group_core import F_km_l2norm_sq
from halfpoincare.petersson import (
    FULL_PLANE,
    QuadratureMesh,
    cauchy_derivative,
    full_plane_mesh,
    fundamental_mesh,
    petersson_inner,
    verify_integral_formula,
    verify_norm_identity,
    verify_reproducing,
    verify_thm61,
)
from halfpoincare.series import TruncationBudget
from halfpoincare.spectral import QExpansion


def _qexp_derivative(coeffs, z, k):
    n = np.arange(1, coeffs.size + 1)
    return complex(np.sum(coeffs * (2j * math.pi * n) ** k * np.exp(2j * math.pi * n * z)))


@pytest.fixture(scope="module")
def f_q(f_exact):
    return QExpansion(f_exact[:60], N=4, two_m=9)


@pytest.fixture(scope="module")
def mesh24():
    return fundamental_mesh(4, ymax=6.0, res=24)


# mesh


@pytest.mark.parametrize("N", [1, 4, 8, 12])
def test_mesh_volume_matches_index(N):
    mesh = fundamental_mesh(N, ymax=5.0, res=16)
    expected = gamma0_index(N) * (math.pi / 3.0 - 1.0 / 5.0)
    assert mesh.expected_volume() == pytest.approx(expected, rel=1e-15)
    assert mesh.volume() == pytest.approx(expected, rel=1e-10)
    assert np.all(mesh.nodes.imag > 0)


def test_mesh_check_rule_same_volume():
    mesh = fundamental_mesh(4, ymax=6.0, res=20)
    assert mesh.weights_check.sum() == pytest.approx(mesh.volume(), rel=1e-10)


def test_full_plane_volume():
    mesh = full_plane_mesh(ymin=0.05, ymax=3.0, res=24)
    assert mesh.coverage == FULL_PLANE
    assert mesh.volume() == pytest.approx(1 / 0.05 - 1 / 3.0, rel=1e-10)


def test_mesh_json_round_trip(tmp_path):
    mesh = fundamental_mesh(4, ymax=4.0, res=6)
    path = tmp_path / "mesh.json"
    mesh.save(path)
    back = QuadratureMesh.load(path)
    assert np.array_equal(back.nodes, mesh.nodes)
    assert np.array_equal(back.weights, mesh.weights)
    assert back.params == mesh.params


def test_mesh_rejects_bad_input():
    with pytest.raises(ValueError):
        fundamental_mesh(4, ymax=0.9)
    with pytest.raises(ValueError):
        QuadratureMesh(np.array([0.1 - 1j]), np.ones(1), np.ones(1), "x")


def test_petersson_needs_fundamental_mesh():
    mesh = full_plane_mesh(res=6)
    with pytest.raises(ValueError):
        petersson_inner(lambda z: z, lambda z: z, 4.5, mesh)


def test_petersson_hermitian(mesh24, f_q):
    g = lambda z: np.exp(2j * math.pi * z) + 0.5 * np.exp(4j * math.pi * z)
    a = petersson_inner(f_q.evaluate, g, 4.5, mesh24).value
    b = petersson_inner(g, f_q.evaluate, 4.5, mesh24).value
    assert abs(a - np.conj(b)) < 1e-13 * abs(a)
    norm = petersson_inner(f_q.evaluate, f_q.evaluate, 4.5, mesh24)
    assert abs(norm.value.imag) < 1e-14 * norm.value.real
    assert norm.value.real > 0


def test_petersson_norm_invariant_under_mesh(f_q):
    # the integrand of a cusp form is Gamma_0(4)-invariant; two resolutions agree
    a = petersson_inner(f_q.evaluate, f_q.evaluate, 4.5, fundamental_mesh(4, 6.0, 24))
    b = petersson_inner(f_q.evaluate, f_q.evaluate, 4.5, fundamental_mesh(4, 6.0, 32))
    assert abs(a.value - b.value) < 1e-6 * abs(b.value)
    assert a.error_estimate < 1e-4 * abs(a.value)


# Cauchy derivatives


@given(st.integers(0, 4), st.floats(-0.5, 0.5), st.floats(0.5, 2.0))
def test_cauchy_derivative_exponential(k, x, y):
    xi = complex(x, y)
    f = lambda z: np.exp(2j * math.pi * z)
    exact = (2j * math.pi) ** k * np.exp(2j * math.pi * xi)
    assert abs(cauchy_derivative(f, xi, k) - exact) < 1e-10 * max(1.0, abs(exact))


def test_cauchy_derivative_polynomial():
    f = lambda z: z**5 - 3 * z**2
    xi = 0.2 + 1.0j
    got = [cauchy_derivative(f, xi, k) for k in range(6)]
    exact = [xi**5 - 3 * xi**2, 5 * xi**4 - 6 * xi, 20 * xi**3 - 6, 60 * xi**2, 120 * xi, 120]
    for g, e in zip(got, exact):
        assert abs(g - e) < 1e-11 * max(1.0, abs(e))


def test_cauchy_radius_check():
    with pytest.raises(ValueError):
        cauchy_derivative(np.exp, 1j, 0, radius=1.5)


# kernel identities against the exact cusp form


@pytest.mark.parametrize("k,xi", [(0, 1j), (0, 0.3 + 0.8j), (1, 1.5j), (2, 0.25 + 1.2j)])
def test_reproducing_exact_form(k, xi, f_q, mesh24, chi4):
    budget = TruncationBudget(cmax=60)
    rep = verify_reproducing(f_q.evaluate, k, xi, 4.5, chi4, 4, budget, mesh24)
    assert abs(rep.rhs - _qexp_derivative(f_q.coeffs, xi, k)) < 1e-10 * abs(rep.rhs)
    # floor of ~6e-6 comes from truncating Delta at radius 60 on the mesh
    assert rep.rel_err < 2e-5


@pytest.mark.parametrize("k", [0, 1, 2])
def test_thm61_exact_form(k, f_q, mesh24, chi4):
    rep = verify_thm61(f_q.evaluate, k, 4.5, chi4, 4, TruncationBudget(cmax=60), mesh24)
    assert rep.rel_err < 2e-5


def test_reproducing_improves_with_resolution(f_q, chi4):
    budget = TruncationBudget(cmax=60)
    errs = [verify_reproducing(f_q.evaluate, 0, 1j, 4.5, chi4, 4, budget, fundamental_mesh(4, 6.0, r)).abs_err for r in (4, 6, 24)]
    assert errs[0] > errs[1] > errs[2]


def test_integral_formula_exact_form(f_q):
    mesh = full_plane_mesh()
    for k, xi in [(0, 1j), (1, 0.2 + 1.1j)]:
        rep = verify_integral_formula(f_q.evaluate, k, xi, 4.5, mesh)
        assert rep.rel_err < 2e-3


def test_integral_formula_rejects_fundamental_mesh(f_q, mesh24):
    from halfpoincare.petersson import integral_formula_eval

    with pytest.raises(ValueError):
        integral_formula_eval(f_q.evaluate, 1j, 0, 4.5, mesh24)


@pytest.mark.parametrize("k,two_m", [(0, 5), (1, 7), (2, 9), (3, 11)])
def test_norm_identity(k, two_m):
    rep = verify_norm_identity(k, two_m / 2)
    assert rep.rhs.real == pytest.approx(F_km_l2norm_sq(k, two_m / 2))
    assert rep.rel_err < 1e-6
