"""Fourier coefficients, the two expansions of Delta, Hecke operators T_{p^2}
and empirical sup-norm scans."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import config
from .arithmetic import DirichletCharacter, factorize, legendre
from .group_core import FOUR_PI, as_weight, gamma_half
from .petersson import cauchy_derivative
from .series import SeriesSpec, TruncationBudget, psi_many, psi_series_prefactor, series_function


@dataclass
class QExpansion:
    """Coefficients a_1..a_L of sum_n a_n e^{2 pi i n z} (a_n = 0 for n <= 0)."""

    coeffs: np.ndarray
    errors: np.ndarray | None = None
    N: int | None = None
    two_m: int | None = None
    chi: str = ""
    provenance: str = ""

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if self.errors is None:
            self.errors = np.zeros(self.coeffs.size)
        self.errors = np.asarray(self.errors, dtype=float).reshape(-1)
        if self.errors.size != self.coeffs.size:
            raise ValueError("one error per coefficient")

    def __len__(self):
        return self.coeffs.size

    def a(self, n) -> complex:
        """a_n, zero for n <= 0 or non-integral n."""
        if isinstance(n, float) and not n.is_integer():
            return 0j
        n = int(n)
        if n <= 0:
            return 0j
        if n > self.coeffs.size:
            raise IndexError(f"coefficient a_{n} beyond expansion length {self.coeffs.size}")
        return complex(self.coeffs[n - 1])

    def _like(self, coeffs, errors, provenance) -> "QExpansion":
        return QExpansion(coeffs, errors, self.N, self.two_m, self.chi, provenance)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        L = min(len(self), len(other))
        return self._like(self.coeffs[:L] + other.coeffs[:L], self.errors[:L] + other.errors[:L], "sum")

    def scale(self, alpha: complex) -> "QExpansion":
        return self._like(alpha * self.coeffs, abs(alpha) * self.errors, self.provenance)

    def __rmul__(self, alpha):
        return self.scale(alpha)

    def truncate(self, L: int) -> "QExpansion":
        return self._like(self.coeffs[:L], self.errors[:L], self.provenance)

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        q = np.exp(2j * math.pi * z)
        out = np.zeros_like(z)
        for a in self.coeffs[::-1]:
            out = (out + a) * q
        return out

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "two_m": self.two_m,
            "chi": self.chi,
            "provenance": self.provenance,
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
            "errors": self.errors.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "QExpansion":
        coeffs = [complex(a, b) for a, b in data["coeffs"]]
        return cls(coeffs, data.get("errors"), data.get("N"), data.get("two_m"), data.get("chi", ""), data.get("provenance", ""))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "QExpansion":
        return cls.from_json(json.loads(Path(path).read_text()))


def fourier_coefficients(f_eval: Callable, y0: float = config.DEFAULT_Y0, nmax: int = config.DEFAULT_NMAX, samples: int | None = None) -> QExpansion:
    """a_n = e^{2 pi n y0} (1/S) sum_j f(x_j + i y0) e^{-2 pi i n x_j}, x_j = j/S.

    The error column is e^{2 pi n y0} times the largest raw discrete
    coefficient in the band S/4 <= |n'| <= S/2.  Aliased contributions and
    evaluation noise are no larger than what shows up there once the
    coefficients have decayed past S/4.
    """
    if y0 <= 0:
        raise ValueError("sampling height must be positive")
    S = config.SAMPLES_PER_COEFF * nmax if samples is None else int(samples)
    if S < 4 * nmax:
        raise ValueError(f"need at least {4 * nmax} samples for {nmax} coefficients, got {S}")
    xs = np.arange(S) / S
    vals = np.asarray(f_eval(xs + 1j * y0), dtype=np.complex128).reshape(-1)
    raw = np.fft.fft(vals) / S
    ns = np.arange(1, nmax + 1)
    growth = np.exp(2.0 * math.pi * ns * y0)
    coeffs = raw[1 : nmax + 1] * growth
    band = raw[max(nmax + 1, S // 4) : S - max(nmax, S // 4) + 1]
    floor = float(np.max(np.abs(band))) if band.size else 0.0
    floor = max(floor, np.finfo(float).eps * float(np.max(np.abs(vals))))
    return QExpansion(coeffs, floor * growth, provenance=f"dft(y0={y0:g},S={S})")


def delta_coeff_prefactor(m) -> float:
    """(4 pi)^{m-1} / Gamma(m-1)."""
    w = as_weight(m)
    return FOUR_PI ** (float(w) - 1.0) / gamma_half(w.two_m - 2)


def _psi_point_eval(ns, N, m, chi, budget):
    def f(z):
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        return psi_many(ns, N, m, chi, z, budget.for_points())[0]

    return f


def delta_coeffs_predicted(nmax: int, k: int, m, xi: complex, chi, N: int, budget: TruncationBudget, nodes: int = config.CAUCHY_NODES) -> np.ndarray:
    """(4 pi)^{m-1}/Gamma(m-1) n^{m-1} conj(psi_n^(k)(xi)) for n = 1..nmax."""
    w = as_weight(m)
    chi = chi if chi is not None else DirichletCharacter.trivial(N)
    ns = np.arange(1, nmax + 1)
    f = _psi_point_eval(ns, N, w, chi, budget)
    xi = complex(xi)
    r = 0.5 * xi.imag
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    vals = f(xi + r * np.exp(1j * theta))
    derivs = math.factorial(k) / r**k * np.mean(vals * np.exp(-1j * k * theta)[:, None], axis=0)
    return delta_coeff_prefactor(w) * ns ** (float(w) - 1.0) * np.conj(derivs)


def delta_coeff_predicted(n: int, k: int, m, xi: complex, chi, N: int, budget: TruncationBudget) -> complex:
    """Fourier coefficient a_n of Delta_{k,m,xi,chi} from the Cauchy derivative of psi_n at xi."""
    if n <= 0:
        return 0j
    w = as_weight(m)
    chi = chi if chi is not None else DirichletCharacter.trivial(N)
    psi = series_function(SeriesSpec("psi", N, w, n, None, chi), budget.for_points())
    return delta_coeff_prefactor(w) * n ** (float(w) - 1.0) * cauchy_derivative(psi, xi, k).conjugate()


# ---------------------------------------------------------------------------
# Hecke operators


def is_prime(p: int) -> bool:
    return p >= 2 and factorize(p) == {p: 1}


@dataclass(frozen=True)
class HeckeSpec:
    p: int
    m: object
    chi: DirichletCharacter
    N: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "m", as_weight(self.m))
        if self.N % self.chi.modulus:
            raise ValueError("character modulus must divide N")

    @property
    def coprime(self) -> bool:
        return self.N % self.p != 0

    def chi_p(self) -> complex:
        return self.chi(self.p) if math.gcd(self.p, self.N) == 1 else 0j

    def middle_constant(self) -> complex:
        """(-1/p)^{m-1/2} chi(p) p^{m-3/2}."""
        w = self.m
        sign = legendre(-1, self.p) ** ((w.two_m - 1) // 2) if self.p != 2 else 0
        return sign * self.chi_p() * float(self.p) ** ((w.two_m - 3) / 2)

    def last_constant(self) -> complex:
        """chi(p^2) p^{2m-2}."""
        return self.chi_p() ** 2 * float(self.p) ** (self.m.two_m - 2)


def hecke_tp2(q: QExpansion, spec: HeckeSpec, length: int | None = None) -> QExpansion:
    """b(n) = a(p^2 n) + (-1/p)^{m-1/2} chi(p) (n/p) p^{m-3/2} a(n) + chi(p^2) p^{2m-2} a(n/p^2).

    (n/p) is the Legendre symbol, taken to be 0 for p = 2.
    """
    p2 = spec.p**2
    L = len(q) // p2 if length is None else int(length)
    if p2 * L > len(q):
        raise ValueError(f"input expansion must have length >= {p2 * L} for {L} output coefficients")
    c1 = spec.middle_constant()
    c2 = spec.last_constant()
    b = np.zeros(L, dtype=np.complex128)
    e = np.zeros(L)
    for n in range(1, L + 1):
        leg = legendre(n, spec.p)
        b[n - 1] = q.a(p2 * n) + c1 * leg * q.a(n)
        e[n - 1] = q.errors[p2 * n - 1] + abs(c1 * leg) * q.errors[n - 1]
        if n % p2 == 0:
            b[n - 1] += c2 * q.a(n // p2)
            e[n - 1] += abs(c2) * q.errors[n // p2 - 1]
    return QExpansion(b, e, q.N, q.two_m, q.chi, f"T_{spec.p}^2({q.provenance})")


def gauss_sum(p: int) -> complex:
    """sum_{h mod p} (h/p) e^{2 pi i h/p} for odd p."""
    return sum(legendre(h, p) * cmath.exp(2j * math.pi * h / p) for h in range(1, p))


def hecke_function(f: Callable, spec: HeckeSpec) -> Callable:
    """T_{p^2} acting on a 1-periodic function through its three coefficient maps.

    (1/p^2) sum_{h mod p^2} f((z+h)/p^2) keeps a(p^2 n); the Legendre-twisted
    average (1/G_p) sum_h (h/p) f(z + h/p) multiplies a(n) by (n/p); f(p^2 z)
    moves a(n) to p^2 n.  The result has exactly the coefficients of
    :func:`hecke_tp2` without truncating any expansion.
    """
    p = spec.p
    p2 = p * p
    c1 = spec.middle_constant()
    c2 = spec.last_constant()
    G = gauss_sum(p) if p != 2 else 1.0

    def g(z):
        z = np.asarray(z, dtype=np.complex128)
        total = np.zeros_like(z)
        for h in range(p2):
            total += f((z + h) / p2)
        total /= p2
        if p != 2 and c1 != 0:
            twist = np.zeros_like(z)
            for h in range(1, p):
                twist += legendre(h, p) * f(z + h / p)
            total += c1 / G * twist
        if c2 != 0:
            total += c2 * f(p2 * z)
        return total

    return g


def e_factor(p: int, k: int, n: int, m, chi: DirichletCharacter, xi: complex) -> complex:
    """E_{p,k,n,m,chi}(xi): the Hecke image of Delta in the psi_n expansion, divided by n^{m+k-1}."""
    w = as_weight(m)
    xib = complex(xi).conjugate()
    spec = HeckeSpec(p, w, chi, chi.modulus)
    chi_p = spec.chi_p()
    total = 0j
    if n % (p * p) == 0:
        total += chi_p**2 / float(p) ** (2 * k) * cmath.exp(-2j * math.pi * (n // (p * p)) * xib)
    total += spec.middle_constant() * legendre(n, p) * cmath.exp(-2j * math.pi * n * xib)
    total += float(p) ** (w.two_m + 2 * k - 2) * cmath.exp(-2j * math.pi * p * p * n * xib)
    return total


def hecke_on_psi_basis(c: dict[int, complex], spec: HeckeSpec) -> dict[int, complex]:
    """Image of sum_n c_n psi_n under T_{p^2}, expressed again in the psi_n.

    Pairing with psi_n extracts a_n / n^{m-1} up to a constant, so the
    coefficient map for T_{p^2} and the adjointness
    <f|T, g> = chi(p^2) <f, g|T> give
    psi_n | T = chi(p^2) [p^{2m-2} psi_{p^2 n} + conj(c1) (n/p) psi_n + conj(c2) p^{2-2m} psi_{n/p^2}],
    with c1, c2 the middle and last constants of the coefficient map.
    """
    p, w = spec.p, spec.m
    p2 = p * p
    c1 = spec.middle_constant()
    c2 = spec.last_constant()
    chi_p2 = spec.chi_p() ** 2
    scale = float(p) ** (w.two_m - 2)
    out: dict[int, complex] = {}
    for n, cn in c.items():
        out[p2 * n] = out.get(p2 * n, 0j) + cn * chi_p2 * scale
        leg = legendre(n, p)
        if leg:
            out[n] = out.get(n, 0j) + cn * chi_p2 * np.conj(c1) * leg
        if n % p2 == 0:
            out[n // p2] = out.get(n // p2, 0j) + cn * chi_p2 * np.conj(c2) / scale
    return out


def psi_expansion_coeffs(k: int, m, xi: complex, nmax: int) -> dict[int, complex]:
    """c_n with Delta = sum_n c_n psi_n, c_n = (4 pi)^{m-1} (-2 pi i)^k / Gamma(m-1) n^{m+k-1} e^{-2 pi i n conj(xi)}."""
    w = as_weight(m)
    pre = psi_series_prefactor(k, w)
    xib = complex(xi).conjugate()
    return {n: pre * n ** (float(w) + k - 1.0) * cmath.exp(-2j * math.pi * n * xib) for n in range(1, nmax + 1)}


def e_factor_rearrangement(p: int, k: int, m, chi: DirichletCharacter, xi: complex, nmax: int) -> float:
    """Max relative deviation between T applied termwise to the psi expansion of Delta
    and sum_n c n^{m+k-1} E_n psi_n, over n <= nmax."""
    w = as_weight(m)
    spec = HeckeSpec(p, w, chi, chi.modulus)
    if not spec.coprime:
        raise ValueError("the psi-basis action needs p coprime to the level")
    c = psi_expansion_coeffs(k, w, xi, p * p * nmax)
    image = hecke_on_psi_basis(c, spec)
    pre = psi_series_prefactor(k, w)
    worst = 0.0
    for n in range(1, nmax + 1):
        target = pre * n ** (float(w) + k - 1.0) * e_factor(p, k, n, w, chi, xi)
        got = image.get(n, 0j)
        worst = max(worst, abs(got - target) / max(abs(target), 1e-300))
    return worst


@dataclass(frozen=True)
class HeckeDeltaReport:
    p: int
    direct: np.ndarray
    via_psi: np.ndarray
    rel_err: np.ndarray
    noise: np.ndarray
    budget: str

    def max_rel_err(self) -> float:
        return float(np.max(self.rel_err))


def hecke_delta_check(
    k: int,
    m,
    xi: complex,
    chi,
    N: int,
    p: int,
    budget: TruncationBudget,
    nmax: int = 10,
    y0: float | None = None,
    samples: int | None = None,
    psi_terms: int | None = None,
    y0_psi: float = config.HECKE_Y0_PSI,
) -> HeckeDeltaReport:
    """Two pipelines for the coefficients of Delta | T_{p^2}.

    A: Fourier coefficients of Delta up to p^2 nmax, then :func:`hecke_tp2`.
    B: Fourier coefficients of sum_{n <= psi_terms} c n^{m+k-1} E_n(xi) psi_n.

    Pipeline A has to resolve a(p^2 nmax), so its default sampling height is
    1.5 / (p^2 nmax): the factor e^{2 pi n y0} then stays below e^{3 pi}.
    Pipeline B samples at y0_psi, low enough that e^{2 pi nmax y0_psi}
    does not amplify the truncation noise of the psi_n.
    """
    w = as_weight(m)
    chi = chi if chi is not None else DirichletCharacter.trivial(N)
    spec = HeckeSpec(p, w, chi, N)
    if not spec.coprime:
        raise ValueError("p must not divide N")
    pb = budget.for_points()
    L = p * p * nmax
    if y0 is None:
        y0 = 1.5 / L
    S = samples or 4 * L
    delta = series_function(SeriesSpec("delta", N, w, k, xi, chi), pb)
    qa = fourier_coefficients(delta, y0, L, S)
    A = hecke_tp2(qa, spec, nmax)
    # psi-expansion of the Hecke image: keep terms until e^{-2 pi (n/p^2) Im xi} is negligible
    if psi_terms is None:
        psi_terms = int(math.ceil(p * p * 40.0 / (2.0 * math.pi * complex(xi).imag))) + nmax
    ns = np.arange(1, psi_terms + 1)
    pre = psi_series_prefactor(k, w)
    weights = np.array([pre * n ** (float(w) + k - 1.0) * e_factor(p, k, int(n), w, chi, xi) for n in ns])

    def image(z):
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        return psi_many(ns, N, w, chi, z, pb)[0] @ weights

    B = fourier_coefficients(image, y0_psi, nmax, config.SAMPLES_PER_COEFF * nmax)
    rel = np.abs(A.coeffs - B.coeffs) / np.maximum(np.abs(B.coeffs), 1e-300)
    return HeckeDeltaReport(
        p, A.coeffs, B.coeffs, rel, A.errors + B.errors, budget.describe() + f",y0={y0:g},S={S},psi_terms={psi_terms}"
    )


def fourier_via_petersson(f_on_mesh, m, chi, N: int, mesh, budget: TruncationBudget, nmax: int = 3) -> QExpansion:
    """a_n(f) = (4 pi)^{m-1}/Gamma(m-1) n^{m-1} <f, psi_n> for n = 1..nmax.

    ``f_on_mesh`` holds values of a cusp form on ``mesh.nodes`` (or is a
    callable); the error column is the embedded quadrature check.
    """
    from .petersson import petersson_inner

    w = as_weight(m)
    chi = chi if chi is not None else DirichletCharacter.trivial(N)
    ns = np.arange(1, nmax + 1)
    psis = psi_many(ns, N, w, chi, mesh.nodes, budget)[0]
    fv = f_on_mesh(mesh.nodes) if callable(f_on_mesh) else f_on_mesh
    pre = delta_coeff_prefactor(w)
    coeffs = np.zeros(nmax, dtype=np.complex128)
    errs = np.zeros(nmax)
    for j, n in enumerate(ns):
        r = petersson_inner(fv, psis[:, j], w, mesh)
        scale = pre * float(n) ** (float(w) - 1.0)
        coeffs[j] = scale * r.value
        errs[j] = scale * r.error_estimate
    return QExpansion(coeffs, errs, N, w.two_m, chi, f"petersson(nodes={len(mesh)})")


@dataclass(frozen=True)
class AdjointReport:
    p: int
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    quad_error: float
    trunc_error: float = float("nan")


def _adjoint_pair(f, g, spec, mesh):
    from .petersson import petersson_inner

    ft = hecke_function(f, spec)(mesh.nodes)
    gt = hecke_function(g, spec)(mesh.nodes)
    fv = f(mesh.nodes)
    gv = g(mesh.nodes)
    left = petersson_inner(ft, gv, spec.m, mesh)
    right = petersson_inner(fv, gt, spec.m, mesh)
    rhs = spec.chi_p() ** 2 * right.value
    return left.value, rhs, left.error_estimate + right.error_estimate


def hecke_adjointness(
    f: Callable, g: Callable, spec: HeckeSpec, mesh, f_coarse: Callable | None = None, g_coarse: Callable | None = None
) -> AdjointReport:
    """<f|T, g> against chi(p^2) <f, g|T> by quadrature over a fundamental mesh.

    With coarser evaluators of the same forms (for example at half the
    truncation radius), the change of both sides is reported as trunc_error.
    """
    if not spec.coprime:
        raise ValueError("adjointness needs p coprime to the level")
    lhs, rhs, quad = _adjoint_pair(f, g, spec, mesh)
    trunc = float("nan")
    if f_coarse is not None and g_coarse is not None:
        lhs2, rhs2, _ = _adjoint_pair(f_coarse, g_coarse, spec, mesh)
        trunc = abs(lhs - lhs2) + abs(rhs - rhs2)
    err = abs(lhs - rhs)
    return AdjointReport(spec.p, lhs, rhs, err, err / max(abs(rhs), 1e-300), quad, trunc)


# ---------------------------------------------------------------------------
# sup-norm scans


@dataclass(frozen=True)
class BoundScan:
    sup_value: float
    argmax: complex
    plateau_flag: bool
    sup_doubled: float
    sup_base: float


def _weighted_max(f_eval, k, weight_exp, xs, ys, nodes):
    X, Y = np.meshgrid(xs, ys)
    pts = (X + 1j * Y).reshape(-1)
    if k == 0:
        vals = np.asarray(f_eval(pts), dtype=np.complex128).reshape(-1)
    else:
        theta = 2.0 * math.pi * np.arange(nodes) / nodes
        r = 0.5 * pts.imag
        circ = pts[:, None] + r[:, None] * np.exp(1j * theta)[None, :]
        cv = np.asarray(f_eval(circ.reshape(-1)), dtype=np.complex128).reshape(circ.shape)
        vals = math.factorial(k) / r**k * np.mean(cv * np.exp(-1j * k * theta)[None, :], axis=1)
    weighted = np.abs(vals) * pts.imag**weight_exp
    i = int(np.argmax(weighted)) if weighted.size else 0
    return float(weighted[i]) if weighted.size else 0.0, complex(pts[i]) if weighted.size else 0j


def bound_scan(
    f_eval: Callable,
    k: int,
    m,
    y_lo: float = 0.05,
    y_hi: float = 2.0,
    nx: int = 24,
    ny: int = 16,
    plateau_tol: float = 0.05,
    nodes: int = 16,
) -> BoundScan:
    """sup of |f^(k)(xi)| Im(xi)^{m/2+k} over x in [0,1], y log-spaced in [y_lo, y_hi].

    The scan is repeated with the y-range doubled at both ends (y_lo/2, 2 y_hi)
    at the same density; plateau_flag reports whether the sup grew by less
    than plateau_tol.  This is evidence of finiteness, not a proof.
    """
    w = as_weight(m)
    e = float(w) / 2.0 + k
    xs = np.arange(nx) / nx
    ys = np.geomspace(y_lo, y_hi, ny)
    sup1, arg1 = _weighted_max(f_eval, k, e, xs, ys, nodes)
    per_decade = (ny - 1) / math.log(y_hi / y_lo)
    ny2 = int(round(per_decade * math.log(4.0 * y_hi / y_lo))) + 1
    ys2 = np.geomspace(y_lo / 2.0, 2.0 * y_hi, ny2)
    sup2, arg2 = _weighted_max(f_eval, k, e, xs, ys2, nodes)
    if sup2 > sup1:
        sup, arg = sup2, arg2
    else:
        sup, arg = sup1, arg1
    flag = sup2 <= sup1 * (1.0 + plateau_tol) if sup1 > 0 else sup2 == 0
    return BoundScan(sup, arg, bool(flag), sup2, sup1)


def kernel_bound_scan(
    k: int,
    m,
    chi,
    N: int,
    budget: TruncationBudget,
    y_lo: float = 0.05,
    y_hi: float = 2.0,
    nx: int = 24,
    ny: int = 16,
    z_nx: int = 12,
    z_ny: int = 8,
    plateau_tol: float = 0.05,
) -> BoundScan:
    """sup over (z, xi) of Im(xi)^{m/2+k} Im(z)^{m/2} |Delta_{k,m,xi,chi}(z)|.

    For each xi on the strip grid the z-sup comes from :func:`bound_scan`
    at k = 0; the xi-range is then doubled at both ends as in
    :func:`bound_scan`.  Empirical evidence of finiteness only.
    """
    w = as_weight(m)
    chi = chi if chi is not None else DirichletCharacter.trivial(N)
    e = float(w) / 2.0 + k

    def sup_over(ys):
        best, arg = 0.0, 0j
        for y in ys:
            for x in np.arange(nx) / nx:
                xi = complex(x, y)
                f = series_function(SeriesSpec("delta", N, w, k, xi, chi), budget)
                s = bound_scan(f, 0, w, nx=z_nx, ny=z_ny)
                val = float(s.sup_value * y**e)
                if val > best:
                    best, arg = val, xi
        return best, arg

    sup1, arg1 = sup_over(np.geomspace(y_lo, y_hi, ny))
    per = (ny - 1) / math.log(y_hi / y_lo)
    ny2 = int(round(per * math.log(4.0 * y_hi / y_lo))) + 1
    ys2 = np.geomspace(y_lo / 2.0, 2.0 * y_hi, ny2)
    # only the new rows need evaluating
    extra = ys2[(ys2 < y_lo * (1 - 1e-12)) | (ys2 > y_hi * (1 + 1e-12))]
    sup_new, arg_new = sup_over(extra)
    sup2 = max(sup1, sup_new)
    sup, arg = (sup_new, arg_new) if sup_new > sup1 else (sup1, arg1)
    flag = sup2 <= sup1 * (1.0 + plateau_tol) if sup1 > 0 else sup2 == 0
    return BoundScan(sup, arg, bool(flag), sup2, sup1)
