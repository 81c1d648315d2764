import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfpoincare.arithmetic import DirichletCharacter
from halfpoincare.petersson import fundamental_mesh
from halfpoincare.series import SeriesSpec, TruncationBudget, series_function
from halfpoincare.spectral import (
    HeckeSpec,
    QExpansion,
    bound_scan,
    delta_coeffs_predicted,
    e_factor_rearrangement,
    fourier_coefficients,
    fourier_via_petersson,
    gauss_sum,
    hecke_adjointness,
    hecke_delta_check,
    hecke_function,
    hecke_tp2,
)

@pytest.fixture(scope="module")
def f_q(f_exact):
    return QExpansion(f_exact, N=4, two_m=9)


# DFT extraction


def test_dft_single_exponential():
    q = fourier_coefficients(lambda z: np.exp(2j * math.pi * z), y0=0.5, nmax=4)
    assert abs(q.a(1) - 1) < 1e-13
    assert np.all(np.abs(q.coeffs[1:]) < 1e-12)


def test_dft_second_coefficient():
    q = fourier_coefficients(lambda z: 3 * np.exp(4j * math.pi * z), y0=0.4, nmax=5)
    assert abs(q.a(2) - 3) < 1e-12
    assert abs(q.a(1)) < 1e-12


def test_dft_sample_count_guard():
    with pytest.raises(ValueError):
        fourier_coefficients(np.exp, y0=0.5, nmax=8, samples=31)
    with pytest.raises(ValueError):
        fourier_coefficients(np.exp, y0=0.0, nmax=2)


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), min_size=1, max_size=6), st.floats(0.2, 1.0))
def test_dft_recovers_random_polynomial(coeffs, y0):
    q = QExpansion(coeffs)
    got = fourier_coefficients(q.evaluate, y0=y0, nmax=len(coeffs), samples=64)
    scale = max(1.0, max(abs(c) for c in coeffs))
    assert np.max(np.abs(got.coeffs - q.coeffs)) < 1e-10 * scale * math.exp(2 * math.pi * len(coeffs) * y0)


def test_qexpansion_access_and_json(tmp_path, f_q):
    assert f_q.a(0) == 0 and f_q.a(-3) == 0 and f_q.a(2.5) == 0
    assert f_q.a(2) == -6
    with pytest.raises(IndexError):
        f_q.a(1000)
    path = tmp_path / "q.json"
    f_q.truncate(20).save(path)
    back = QExpansion.load(path)
    assert np.array_equal(back.coeffs, f_q.coeffs[:20])
    assert back.N == 4 and back.two_m == 9
    assert np.allclose((2 * f_q.truncate(5) + f_q.truncate(5)).coeffs, 3 * f_q.coeffs[:5])


def test_exact_form_known_coefficients(f_exact):
    assert list(f_exact[:6]) == [1, -6, 12, -8, 0, 12]


# psi_1 spans the cusp forms


@pytest.fixture(scope="module")
def psi1_dft(chi4):
    psi = series_function(SeriesSpec("psi", 4, 4.5, 1, None, chi4), TruncationBudget(cmax=60, point_cmax=640).for_points())
    return [fourier_coefficients(psi, y0=y0, nmax=6) for y0 in (0.3, 0.5)]


def test_psi1_proportional_to_exact_form(psi1_dft, f_exact):
    q = psi1_dft[0]
    ratio = q.coeffs[0]
    assert abs(ratio.imag) < 1e-6
    for n in (2, 3, 4, 6):
        assert abs(q.a(n) - ratio * f_exact[n - 1]) < 1e-3 * abs(ratio * f_exact[n - 1])
    assert abs(q.a(5)) < 1e-3


def test_psi1_coefficients_independent_of_height(psi1_dft):
    a, b = psi1_dft
    assert np.max(np.abs(a.coeffs[:4] - b.coeffs[:4]) / np.abs(b.coeffs[:4])) < 1e-3


def test_fourier_via_petersson_exact_form(f_q, chi4):
    mesh = fundamental_mesh(4, 6.0, 24)
    q = fourier_via_petersson(f_q.evaluate, 4.5, chi4, 4, mesh, TruncationBudget(cmax=60), nmax=3)
    assert np.max(np.abs(q.coeffs - np.array([1, -6, 12])) / np.array([1, 6, 12])) < 1e-4


def test_delta_coefficients_multiple_of_exact_form(f_exact, chi4):
    pred = delta_coeffs_predicted(6, 0, 4.5, 1j, chi4, 4, TruncationBudget(cmax=60, point_cmax=640))
    c = pred[0]
    for n in (2, 3, 4, 6):
        assert abs(pred[n - 1] - c * f_exact[n - 1]) < 2e-3 * abs(c * f_exact[n - 1])
    assert abs(pred[4]) < 1e-3 * abs(c)


# Hecke operators


@pytest.mark.parametrize("p,lam", [(3, 12), (5, -210), (7, 1016)])
def test_hecke_eigenvalues_exact_form(p, lam, f_q, chi4):
    spec = HeckeSpec(p, 4.5, chi4, 4)
    image = hecke_tp2(f_q, spec)
    n = len(image)
    assert n >= 4
    assert np.max(np.abs(image.coeffs - lam * f_q.coeffs[:n])) < 1e-6 * abs(lam) * np.max(np.abs(f_q.coeffs[:n]))


def test_hecke_tp2_length_guard(f_q, chi4):
    with pytest.raises(ValueError):
        hecke_tp2(f_q.truncate(20), HeckeSpec(3, 4.5, chi4, 4), length=10)


def test_hecke_spec_validation(chi4):
    with pytest.raises(ValueError):
        HeckeSpec(9, 4.5, chi4, 4)
    with pytest.raises(ValueError):
        HeckeSpec(3, 4.5, DirichletCharacter.trivial(3), 4)
    assert not HeckeSpec(2, 4.5, chi4, 4).coprime


@pytest.mark.parametrize("p", [3, 5])
def test_hecke_function_matches_coefficient_map(p, chi4):
    rng = np.random.default_rng(p)
    L0 = 4
    base = rng.normal(size=L0) + 1j * rng.normal(size=L0)
    spec = HeckeSpec(p, 4.5, chi4, 4)
    padded = QExpansion(np.concatenate([base, np.zeros(p**4 * L0 - L0)]))
    image = hecke_tp2(padded, spec)
    z = np.array([0.1 + 0.7j, -0.3 + 1.1j, 0.45 + 0.9j])
    got = hecke_function(QExpansion(base).evaluate, spec)(z)
    assert np.max(np.abs(got - image.evaluate(z))) < 1e-9 * np.max(np.abs(image.evaluate(z)))


def test_gauss_sum_value():
    for p in (3, 7, 11):
        assert abs(gauss_sum(p) - 1j * math.sqrt(p)) < 1e-12
    for p in (5, 13):
        assert abs(gauss_sum(p) - math.sqrt(p)) < 1e-12


@pytest.mark.parametrize("p,k,xi", [(3, 0, 1j), (5, 1, 0.2 + 0.8j), (7, 2, 1.5j)])
def test_e_factor_rearrangement(p, k, xi, chi4):
    assert e_factor_rearrangement(p, k, 4.5, chi4, xi, 12) < 1e-12


def test_e_factor_needs_coprime_level():
    with pytest.raises(ValueError):
        e_factor_rearrangement(2, 0, 4.5, DirichletCharacter.trivial(4), 1j, 5)


def test_hecke_delta_two_routes(chi4):
    rep = hecke_delta_check(0, 4.5, 1.5j, chi4, 4, 3, TruncationBudget(cmax=60, point_cmax=320), nmax=4)
    # n <= 4 avoids a_5 = 0, where a relative error is undefined
    assert rep.max_rel_err() < 1e-2
    with pytest.raises(ValueError):
        hecke_delta_check(0, 4.5, 1.5j, chi4, 4, 2, TruncationBudget(cmax=60))


def test_adjointness_small_budget(chi4):
    mesh = fundamental_mesh(4, 6.0, 20)
    budget = TruncationBudget(cmax=40)
    f = series_function(SeriesSpec("psi", 4, 4.5, 1, None, chi4), budget)
    g = series_function(SeriesSpec("psi", 4, 4.5, 2, None, chi4), budget)
    rep = hecke_adjointness(f, g, HeckeSpec(3, 4.5, chi4, 4), mesh)
    assert rep.rel_err < 1e-3
    with pytest.raises(ValueError):
        hecke_adjointness(f, g, HeckeSpec(2, 4.5, chi4, 4), mesh)


# sup-norm scans


def test_bound_scan_plateau_exact_form(f_q):
    scan = bound_scan(f_q.evaluate, 0, 4.5, y_lo=0.1, y_hi=1.5, nx=24, ny=12)
    assert scan.plateau_flag
    assert 0 < scan.sup_value < math.inf
    assert scan.sup_doubled <= scan.sup_value * 1.05


def test_bound_scan_detects_growth():
    # y^{-4} |f| y^{m/2} grows without bound as y -> 0
    scan = bound_scan(lambda z: np.asarray(z).imag ** -4.0 + 0j, 0, 4.5, y_lo=0.1, y_hi=1.0)
    assert not scan.plateau_flag
