"""Acceptance campaign at N = 4, 2m = 9.

Each test records its criterion number; the terminal summary prints one
PASS/FAIL line per criterion.  Budgets used throughout:
cmax = 60 on quadrature meshes (res 32 per axis per coset, ymax = 6),
point_cmax = 640 for isolated values (480 for the p = 5 Hecke pipeline).
"""

import math
import time

import numpy as np
import pytest

from conftest import eta2_12_over_theta3, random_cartan, random_met
from halfpoincare.arithmetic import DirichletCharacter, multiplier_checks
from halfpoincare.group_core import (
    IDENTITY,
    F_km_cartan,
    F_km_l2norm_sq,
    F_km_l2norm_sq_numeric,
    HalfWeight,
    f_km,
    kappa,
    lift_value,
    max_component_error,
    mp2_from_cartan,
    mp2_from_iwasawa,
    mp2_to_iwasawa,
)
from halfpoincare.nonvanishing import beta_median, corollary_cases, threshold, threshold_k0_closed
from halfpoincare.petersson import (
    full_plane_mesh,
    fundamental_mesh,
    verify_integral_formula,
    verify_reproducing,
    verify_thm61,
)
from halfpoincare.series import SeriesSpec, TruncationBudget, delta_eval, delta_via_psi, series_function
from halfpoincare.spectral import (
    HeckeSpec,
    QExpansion,
    bound_scan,
    delta_coeffs_predicted,
    e_factor,
    e_factor_rearrangement,
    fourier_coefficients,
    fourier_via_petersson,
    hecke_adjointness,
    hecke_delta_check,
    hecke_tp2,
    kernel_bound_scan,
)

N = 4
W = HalfWeight(9)
CHI = DirichletCharacter.trivial(4)
MESH_BUDGET = TruncationBudget(cmax=60, point_cmax=640)
RES = 32
YMAX = 6.0
XIS = (1.2j, 0.3 + 1.5j)
A5 = 5  # a_5 vanishes for every form of weight 9/2 on Gamma_0(4)


def line(n, ok, text):
    print(f"CRITERION {n} {'PASS' if ok else 'FAIL'} {text}")


@pytest.fixture(scope="module")
def mesh():
    return fundamental_mesh(N, YMAX, RES)


@pytest.fixture(scope="module")
def psi1():
    spec = SeriesSpec("psi", N, W, 1, None, CHI)
    return series_function(spec, MESH_BUDGET), series_function(spec, MESH_BUDGET.for_points())


@pytest.fixture(scope="module")
def psi1_on_mesh(psi1, mesh):
    return psi1[0](mesh.nodes)


# 1-4: group and multiplier


def test_c01_group_law(record_property):
    record_property("criterion", 1)
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    k2 = kappa(2 * math.pi)
    for _ in range(10_000):
        s1, s2, s3 = random_met(rng), random_met(rng), random_met(rng)
        p = s1 * s2
        worst = max(worst, max_component_error(p * s3, s1 * (s2 * s3)))
        worst = max(worst, abs(p.eta_i**2 - complex(p.d, p.c)) / max(1.0, abs(p.eta_i) ** 2))
        worst = max(worst, max_component_error(mp2_from_iwasawa(mp2_to_iwasawa(s1)), s1))
        worst = max(worst, max_component_error(k2 * s1, s1 * k2))
    worst = max(worst, max_component_error(k2 * k2, IDENTITY))
    assert not k2.close_to(IDENTITY)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 10.0
    line(1, ok, f"max_err={worst:.2e} runtime={elapsed:.1f}s")
    assert ok


def test_c02_multiplier(record_property):
    record_property("criterion", 2)
    t0 = time.perf_counter()
    worst = multiplier_checks(np.random.default_rng(202), cases=1000)
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-8 and elapsed < 30.0
    line(2, ok, " ".join(f"{k}={v:.2e}" for k, v in worst.items()) + f" runtime={elapsed:.1f}s")
    assert ok


def test_c03_norm_identity(record_property):
    record_property("criterion", 3)
    t0 = time.perf_counter()
    worst = 0.0
    for k in (0, 1, 2):
        for two_m in (5, 7, 9):
            num, _ = F_km_l2norm_sq_numeric(k, two_m / 2)
            exact = F_km_l2norm_sq(k, two_m / 2)
            worst = max(worst, abs(num - exact) / exact)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 60.0
    line(3, ok, f"max_rel_err={worst:.2e} runtime={elapsed:.1f}s")
    assert ok


def test_c04_cartan_formula(record_property):
    record_property("criterion", 4)
    rng = np.random.default_rng(404)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        c = random_cartan(rng)
        k = int(rng.integers(0, 4))
        mm = HalfWeight(int(rng.choice([5, 7, 9, 11])))
        a = F_km_cartan(c.theta1, c.t, c.theta2, k, mm)
        b = lift_value(lambda z: f_km(z, k, mm), mm, mp2_from_cartan(c))
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    line(4, ok, f"max_rel_err={worst:.2e} runtime={elapsed:.1f}s")
    assert ok


# 5-7: kernel identities with f = psi_1


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("xi", XIS)
def test_c05_reproducing(k, xi, mesh, psi1, psi1_on_mesh, record_property):
    record_property("criterion", 5)
    rep = verify_reproducing(psi1[0], k, xi, W, CHI, N, MESH_BUDGET, mesh, f_on_mesh=psi1_on_mesh, f_point_eval=psi1[1])
    tol = 1e-3 if k == 0 else 1e-2
    ok = rep.rel_err < tol
    line(5, ok, f"k={k} xi={xi} rel_err={rep.rel_err:.2e} tol={tol:g} quad_err={rep.quad_error:.1e} budget={rep.budget}")
    assert ok


@pytest.mark.parametrize("k", [0, 1, 2])
def test_c06_inner_product_formula(k, mesh, psi1, psi1_on_mesh, record_property):
    record_property("criterion", 6)
    rep = verify_thm61(psi1[0], k, W, CHI, N, MESH_BUDGET, mesh, f_on_mesh=psi1_on_mesh, f_point_eval=psi1[1])
    ok = rep.rel_err < 1e-2
    line(6, ok, f"k={k} rel_err={rep.rel_err:.2e} budget={rep.budget}")
    assert ok


@pytest.fixture(scope="module")
def strip():
    return full_plane_mesh()


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("xi", XIS)
def test_c07_integral_formula(k, xi, strip, psi1, record_property):
    record_property("criterion", 7)
    rep = verify_integral_formula(psi1[0], k, xi, W, strip, f_point_eval=psi1[1])
    ok = rep.rel_err < 1e-2
    line(7, ok, f"k={k} xi={xi} rel_err={rep.rel_err:.2e} quad_err={rep.quad_error:.1e} nodes={len(strip)}")
    assert ok


# 8: Fourier consistency

FOURIER_XI = 1.5j
FOURIER_NMAX = 5


@pytest.fixture(scope="module")
def delta_coeffs():
    pred = delta_coeffs_predicted(FOURIER_NMAX, 0, W, FOURIER_XI, CHI, N, MESH_BUDGET)
    delta = series_function(SeriesSpec("delta", N, W, 0, FOURIER_XI, CHI), MESH_BUDGET.for_points())
    ext = fourier_coefficients(delta, y0=1.5 / FOURIER_NMAX, nmax=FOURIER_NMAX)
    rel = np.abs(pred - ext.coeffs) / np.abs(pred)
    return pred, ext, rel


@pytest.mark.xfail(strict=True, reason="a_5 = 0 for weight 9/2 on Gamma_0(4): the relative error at n = 5 is 0/0")
def test_c08_fourier_all_n(delta_coeffs, record_property):
    record_property("criterion", 8)
    pred, ext, rel = delta_coeffs
    worst = float(np.max(rel))
    line(8, worst < 1e-2, "n<=5 rel_err=" + " ".join(f"{r:.1e}" for r in rel))
    assert worst < 1e-2


def test_c08_fourier_diagnostics(delta_coeffs, record_property):
    record_property("criterion", 8)
    pred, ext, rel = delta_coeffs
    keep = [n - 1 for n in range(1, FOURIER_NMAX + 1) if n != A5]
    scale = float(np.max(np.abs(pred)))
    a5 = max(abs(pred[A5 - 1]), abs(ext.coeffs[A5 - 1]))
    ok = float(np.max(rel[keep])) < 1e-2 and a5 < 1e-3 * scale
    print(
        f"  diagnostic: n != 5 max rel_err={np.max(rel[keep]):.2e}; "
        f"|a_5| predicted={abs(pred[A5 - 1]):.1e} extracted={abs(ext.coeffs[A5 - 1]):.1e} vs scale {scale:.1e}"
    )
    assert ok


def test_c08_psi_petersson_vs_dft(mesh, psi1, psi1_on_mesh, record_property):
    record_property("criterion", 8)
    pet = fourier_via_petersson(psi1_on_mesh, W, CHI, N, mesh, MESH_BUDGET, nmax=3)
    dft = fourier_coefficients(psi1[1], y0=0.5, nmax=3, samples=32)
    rel = np.abs(pet.coeffs - dft.coeffs) / np.abs(dft.coeffs)
    ok = float(np.max(rel)) < 5e-2
    line(8, ok, "psi_1 a_n Petersson vs DFT n<=3 rel_err=" + " ".join(f"{r:.1e}" for r in rel))
    assert ok


# 9: two evaluation paths for Delta


def test_c09_delta_two_paths(record_property):
    record_property("criterion", 9)
    t0 = time.perf_counter()
    b = TruncationBudget(cmax=120, nmax=12)
    worst = 0.0
    inside = True
    for z in (1j, 0.3 + 0.7j, -0.4 + 1.3j, 0.1 + 0.35j):
        d = delta_eval(SeriesSpec("delta", N, W, 0, 2j, CHI), z, b)
        v = delta_via_psi(SeriesSpec("delta-via-psi", N, W, 0, 2j, CHI), z, b)
        err = abs(d.value - v.value)
        worst = max(worst, err / abs(d.value))
        inside &= err <= d.tail_estimate + v.tail_estimate
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and inside and elapsed < 60.0
    line(9, ok, f"xi=2i max_rel_err={worst:.2e} within_tails={inside} runtime={elapsed:.1f}s")
    assert ok


# 10: Hecke suite

HECKE_XI = 1.5j
HECKE_POINT_CMAX = {3: 640.0, 5: 480.0}
_hecke_cache: dict = {}


def hecke_report(p):
    if p not in _hecke_cache:
        b = TruncationBudget(cmax=60, point_cmax=HECKE_POINT_CMAX[p])
        _hecke_cache[p] = hecke_delta_check(0, W, HECKE_XI, CHI, N, p, b, nmax=10)
    return _hecke_cache[p]


def test_c10_coefficient_map_hand_values(record_property):
    record_property("criterion", 10)
    spec3 = HeckeSpec(3, W, CHI, N)
    unit = QExpansion(np.eye(1, 81, 0)[0])
    b = hecke_tp2(unit, spec3)
    assert abs(b.a(1) - 27) < 1e-12 and abs(b.a(9) - 3**7) < 1e-9
    assert np.count_nonzero(np.abs(b.coeffs) > 0) == 2
    assert np.all(hecke_tp2(QExpansion(np.zeros(81)), spec3).coeffs == 0)
    rng = np.random.default_rng(10)
    q1 = QExpansion(rng.normal(size=81) + 1j * rng.normal(size=81))
    q2 = QExpansion(rng.normal(size=81))
    lin = hecke_tp2(2.5 * q1 + q2, spec3).coeffs - (2.5 * hecke_tp2(q1, spec3).coeffs + hecke_tp2(q2, spec3).coeffs)
    assert np.max(np.abs(lin)) < 1e-9
    spec2 = HeckeSpec(2, W, DirichletCharacter.trivial(8), 8)
    assert spec2.middle_constant() == 0
    f = QExpansion(eta2_12_over_theta3(200))
    for p, lam in ((3, 12), (5, -210), (7, 1016)):
        img = hecke_tp2(f, HeckeSpec(p, W, CHI, N))
        assert np.max(np.abs(img.coeffs - lam * f.coeffs[: len(img)])) < 1e-6 * abs(lam) * 64
    # e_factor at p = 3, n = 9, k = 0, xi = i: (9/3) = 0 removes the middle term
    hand = math.exp(-2 * math.pi) + 3**7 * math.exp(-2 * math.pi * 81)
    assert abs(e_factor(3, 0, 9, W, CHI, 1j) - hand) < 1e-15
    line(10, True, "coefficient map hand values, eigenvalues 12, -210, 1016 on the exact form")


@pytest.mark.xfail(strict=True, reason="a_5 = 0 for weight 9/2 on Gamma_0(4): the relative error at n = 5 is 0/0")
@pytest.mark.parametrize("p", [3, 5])
def test_c10_hecke_two_pipelines_all_n(p, record_property):
    record_property("criterion", 10)
    rep = hecke_report(p)
    worst = rep.max_rel_err()
    line(10, worst < 1e-2, f"p={p} n<=10 rel_err=" + " ".join(f"{r:.1e}" for r in rep.rel_err) + f" budget={rep.budget}")
    assert worst < 1e-2


@pytest.mark.parametrize("p", [3, 5])
def test_c10_hecke_two_pipelines_diagnostics(p, record_property):
    record_property("criterion", 10)
    rep = hecke_report(p)
    keep = [n - 1 for n in range(1, 11) if n != A5]
    scale = float(np.max(np.abs(rep.direct)))
    a5 = max(abs(rep.direct[A5 - 1]), abs(rep.via_psi[A5 - 1]))
    worst = float(np.max(rep.rel_err[keep]))
    print(f"  diagnostic: p={p} n != 5 max rel_err={worst:.2e}; |a_5| <= {a5:.1e} vs scale {scale:.1e}")
    assert worst < 1e-2 and a5 < 1e-3 * scale


def test_c10_rearrangement(record_property):
    record_property("criterion", 10)
    worst = max(
        e_factor_rearrangement(p, k, W, CHI, xi, 12) for p in (3, 5, 7) for k in (0, 1, 2) for xi in (1j, 0.3 + 1.5j, 0.5j)
    )
    ok = worst < 1e-12
    line(10, ok, f"e_factor rearrangement max_rel_err={worst:.1e}")
    assert ok


@pytest.mark.parametrize("p", [3, 5])
def test_c10_adjointness(p, mesh, record_property):
    record_property("criterion", 10)
    half = TruncationBudget(cmax=30)
    fs = [series_function(SeriesSpec("psi", N, W, n, None, CHI), b) for b in (MESH_BUDGET, half) for n in (1, 2)]
    amesh = fundamental_mesh(N, YMAX, 24)
    rep = hecke_adjointness(fs[0], fs[1], HeckeSpec(p, W, CHI, N), amesh, fs[2], fs[3])
    ok = rep.abs_err <= rep.quad_error + rep.trunc_error
    line(
        10,
        ok,
        f"adjointness p={p} rel_err={rep.rel_err:.1e} abs_err={rep.abs_err:.1e} "
        f"quad_err={rep.quad_error:.1e} trunc_err={rep.trunc_error:.1e} res=24",
    )
    assert ok


# 11: non-vanishing


def test_c11_nonvanishing(record_property):
    record_property("criterion", 11)
    t0 = time.perf_counter()
    assert beta_median(1.0, 1.0) == 0.5
    assert abs(beta_median(1.0, 0.25) - 0.9375) < 1e-12
    dual = max(abs(threshold(0, t / 2) - threshold_k0_closed(t / 2)) / threshold(0, t / 2) for t in range(5, 22, 2))
    assert dual < 1e-10
    fired = 0
    for t in range(5, 40, 2):
        for k in range(40):
            for n in range(1, 200):
                v = corollary_cases(k, t / 2, n)
                if v.applicable_case is not None:
                    fired += 1
                    assert n > threshold(k, t / 2)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 5.0 and fired > 0
    line(11, ok, f"dual_path_rel_err={dual:.1e} positive_verdicts={fired} runtime={elapsed:.1f}s")
    assert ok


# 12: bound plateaus (empirical evidence of finiteness, not proof)

KERNEL_BUDGET = TruncationBudget(cmax=160)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_c12_cusp_form_derivative_bound(k, psi1, record_property):
    record_property("criterion", 12)
    scan = bound_scan(psi1[0], k, W)
    line(12, scan.plateau_flag, f"sup |psi_1^({k})| y^(m/2+{k}): {scan.sup_base:.4e} -> {scan.sup_doubled:.4e} argmax={scan.argmax:.3f}")
    assert scan.plateau_flag


@pytest.fixture(scope="module")
def exact_form_sups():
    f = QExpansion(eta2_12_over_theta3(200))
    norm2 = None
    from halfpoincare.petersson import petersson_inner

    norm2 = petersson_inner(f.evaluate, f.evaluate, W, fundamental_mesh(N, YMAX, 24)).value.real
    sups = [bound_scan(f.evaluate, k, W, y_lo=0.1, y_hi=1.5).sup_value for k in (0, 1)]
    return norm2, sups


@pytest.mark.parametrize("k", [0, 1])
def test_c12_kernel_bound(k, exact_form_sups, record_property):
    record_property("criterion", 12)
    scan = kernel_bound_scan(k, W, CHI, N, KERNEL_BUDGET, y_lo=0.15, y_hi=2.0, nx=8, ny=8)
    # the cusp space is one-dimensional, so the sup factors through the exact form
    norm2, sups = exact_form_sups
    factored = sups[k] * sups[0] / norm2
    line(
        12,
        scan.plateau_flag,
        f"sup Im(xi)^(m/2+{k}) Im(z)^(m/2) |Delta|: {scan.sup_base:.4e} -> {scan.sup_doubled:.4e} "
        f"(factored through the exact form: {factored:.4e}) budget={KERNEL_BUDGET.describe()}",
    )
    assert scan.plateau_flag
    assert abs(scan.sup_value - factored) < 0.05 * factored


def test_c12_poincare_derivative_bound(psi1, record_property):
    record_property("criterion", 12)
    ex = 4.5 / 2 - 1
    base, doubled = 0.0, 0.0
    parts = []
    for n in range(1, 6):
        f = series_function(SeriesSpec("psi", N, W, n, None, CHI), MESH_BUDGET)
        scan = bound_scan(f, 0, W)
        base = max(base, n**ex * scan.sup_base)
        doubled = max(doubled, n**ex * scan.sup_doubled)
        parts.append(f"{n**ex * scan.sup_value:.2e}")
    ok = doubled <= 1.05 * base
    line(12, ok, f"sup_n n^(m/2-1) |psi_n| y^(m/2): {base:.4e} -> {doubled:.4e} per n: {' '.join(parts)}")
    assert ok
