"""Truncated Poincare series on Gamma_0(N) cap Gamma_1(4) with the theta multiplier.

Three families are evaluated by one engine: the reproducing kernel
Delta_{k,m,xi,chi}, the classical series psi_{n,m,chi} and the lifted seed
P f_{k,m}.  The sum over the group is written as a sum over bottom rows
(c, d) with d = 1 mod 4 (one representative per +-pair), each row carrying
the full translation orbit; for power seeds that orbit is the lattice sum
sum_j (w + j + s)^{-p}, evaluated by :func:`_kernels.lattice_power`.

Rows are cut by |c' w0 + d'| <= cmax in reduced coordinates (see
:mod:`._kernels`).  Since |c z + d| = |c' w0 + d'| / |c_g w0 + d_g| this is a
cut in |c z + d| that adapts to the point, and the identity row is always kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels, config
from .arithmetic import DirichletCharacter, IntMatrix, coset_reps_infty, kronecker
from .group_core import (
    FOUR_PI,
    HalfWeight,
    as_weight,
    check_upper,
    falling_product,
    gamma_half,
    half_integer_power,
)

FAMILIES = ("delta", "psi", "pfkm", "delta-via-psi")

TAIL_LABEL = "implementer-derived majorant"


@dataclass(frozen=True)
class SeriesSpec:
    family: str
    N: int
    m: HalfWeight
    index: int = 0
    xi: complex | None = None
    chi: DirichletCharacter | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.N < 4 or self.N % 4:
            raise ValueError("level N must be a positive multiple of 4")
        object.__setattr__(self, "m", as_weight(self.m).require_series())
        if self.index < 0 or (self.family == "psi" and self.index < 1):
            raise ValueError("k must be >= 0 and n must be >= 1")
        if self.family in ("delta", "delta-via-psi"):
            if self.xi is None:
                raise ValueError("delta families need xi")
            object.__setattr__(self, "xi", check_upper(self.xi))
        chi = self.chi if self.chi is not None else DirichletCharacter.trivial(self.N)
        if chi.modulus != self.N:
            if self.N % chi.modulus:
                raise ValueError("character modulus must divide N")
            chi = _induce(chi, self.N)
        object.__setattr__(self, "chi", chi)

    @property
    def k(self) -> int:
        return self.index

    @property
    def n(self) -> int:
        return self.index

    def with_family(self, family: str, index: int | None = None) -> "SeriesSpec":
        return replace(self, family=family, index=self.index if index is None else index)


def _induce(chi: DirichletCharacter, N: int) -> DirichletCharacter:
    vals = tuple(chi(a) if math.gcd(a, N) == 1 else 0.0 for a in range(N))
    return DirichletCharacter(N, vals, f"{chi.label}@{N}")


@dataclass(frozen=True)
class TruncationBudget:
    """Truncation parameters.

    cmax is the coset height bound, a radius on |c' w0 + d'| (equivalently on
    |cz + d| scaled to the reduced point); cmax = 0 keeps only the identity row.
    lattice_terms is the number of direct translates on either side before the
    Euler-Maclaurin tail; tol is the accuracy below which a tail is acceptable.

    Isolated point values (Cauchy circles, Fourier samples) use point_cmax:
    there the truncation error is not averaged away as it is in quadrature,
    and the cost is per point rather than per mesh node.
    """

    cmax: float = config.DEFAULT_CMAX
    point_cmax: float = config.DEFAULT_POINT_CMAX
    theta_tol: float = config.THETA_TOL
    nmax: int = config.DEFAULT_NMAX
    quad_res: int = config.DEFAULT_QUAD_RES
    fourier_samples: int = 0
    lattice_terms: int = 8
    tol: float = 1e-6

    def __post_init__(self):
        if self.cmax < 0 or self.point_cmax < 0 or self.theta_tol <= 0 or self.nmax < 1 or self.quad_res < 1:
            raise ValueError("budget parameters must be positive")
        if self.fourier_samples < 0 or self.lattice_terms < 1 or self.tol <= 0:
            raise ValueError("budget parameters must be positive")

    def doubled(self) -> "TruncationBudget":
        return replace(self, cmax=2 * self.cmax, point_cmax=2 * self.point_cmax)

    def for_points(self) -> "TruncationBudget":
        return replace(self, cmax=self.point_cmax)

    def describe(self) -> str:
        return f"cmax={self.cmax:g},point_cmax={self.point_cmax:g},nmax={self.nmax},lattice={self.lattice_terms}"


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail_estimate: float
    terms_used: int
    warning: bool = False
    tail_kind: str = field(default=TAIL_LABEL)

    def __post_init__(self):
        if not self.tail_estimate >= 0:
            raise ValueError("tail estimate must be nonnegative")


def delta_prefactor(k: int, m) -> complex:
    """(2i)^m / (4 pi) prod_{r=0}^{k} (m-1+r): the 1/(8 pi) over Gamma_0(N) folded onto +-pairs."""
    w = as_weight(m)
    return half_integer_power(2j, w) / FOUR_PI * falling_product(w, 0, k)


def psi_series_prefactor(k: int, m) -> complex:
    """(4 pi)^{m-1} (-2 pi i)^k / Gamma(m-1)."""
    w = as_weight(m)
    return FOUR_PI ** (float(w) - 1.0) * (-2j * math.pi) ** k / gamma_half(w.two_m - 2)


def _seed_bound(eta: float, p: float) -> float:
    """sup over Im w >= 0 of sum_j |w + j + s|^{-p} when Im s = eta.

    The two nearest translates contribute at most 2 eta^{-p}; the rest is
    below the integral of (t^2 + eta^2)^{-p/2}, which is
    eta^{1-p} sqrt(pi) Gamma((p-1)/2) / Gamma(p/2).
    """
    return 2.0 * eta**-p + eta ** (1.0 - p) * math.sqrt(math.pi) * math.exp(
        math.lgamma((p - 1.0) / 2.0) - math.lgamma(p / 2.0)
    )


def _lattice_shell(radius: float, y0: np.ndarray, mf: float) -> np.ndarray:
    """Estimate of sum over lattice points v = c' w0 + d' with |v| > radius of |v|^{-m}.

    The lattice Z w0 + Z has covolume Im w0, so the count in an annulus of
    radius r and width dr is about 2 pi r dr / Im w0; integrating r^{-m}
    against it from radius on gives 2 pi radius^{2-m} / ((m-2) Im w0).
    A radius below 1 is not in the asymptotic regime and gets no estimate.
    """
    if radius < 1.0:
        return np.full_like(y0, np.inf)
    return 2.0 * math.pi * radius ** (2.0 - mf) / ((mf - 2.0) * y0)


def _reduced_imag(zs: np.ndarray) -> np.ndarray:
    out = np.empty(zs.shape[0])
    for i, z in enumerate(zs):
        out[i] = _kernels.reduce_point(z)[0].imag
    return out


def _as_points(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    flat = arr.reshape(-1)
    if flat.size and not np.all(flat.imag > config.MIN_IM):
        raise ValueError("all points must lie in the upper half-plane")
    return flat, scalar


def _chi_arrays(chi: DirichletCharacter):
    t = chi.table()
    return np.ascontiguousarray(t.real), np.ascontiguousarray(t.imag)


@dataclass(frozen=True)
class PowerSeed:
    """phi(w) = sum_j sum_l coef_l (w + j + shift_l)^{-p2_l/2}."""

    coefs: tuple[complex, ...]
    shifts: tuple[complex, ...]
    p2s: tuple[int, ...]

    def bound(self) -> float:
        return sum(abs(c) * _seed_bound(s.imag, p / 2.0) for c, s, p in zip(self.coefs, self.shifts, self.p2s))

    def value(self, w: complex, j0: int = 8) -> complex:
        return sum(c * _kernels.lattice_power(complex(w) + s, p, j0) for c, s, p in zip(self.coefs, self.shifts, self.p2s))


def delta_seed(k: int, m, xi: complex) -> PowerSeed:
    w = as_weight(m)
    return PowerSeed((delta_prefactor(k, w),), (-complex(xi).conjugate(),), (w.two_m + 2 * k,))


def pfkm_seed(k: int, m) -> PowerSeed:
    """(2i)^m (w - i)^k / (w + i)^{m+k} = (2i)^m sum_l C(k,l) (-2i)^l (w + i)^{-(m+l)}."""
    w = as_weight(m)
    pre = half_integer_power(2j, w)
    coefs = tuple(pre * math.comb(k, l) * (-2j) ** l for l in range(k + 1))
    return PowerSeed(coefs, (1j,) * (k + 1), tuple(w.two_m + 2 * l for l in range(k + 1)))


def power_series_eval(seeds: list[PowerSeed], N: int, m, chi: DirichletCharacter, z, budget: TruncationBudget):
    """Evaluate sum over the group of conj(chi(d)) J^{-2m} phi(gamma z) for several seeds.

    Returns (values[points, seeds], tails[points, seeds], counts[points]).
    """
    w = as_weight(m)
    zs, _ = _as_points(z)
    L = max(len(s.coefs) for s in seeds)
    F = len(seeds)
    coefs = np.zeros((F, L), dtype=np.complex128)
    shifts = np.full((F, L), 1j, dtype=np.complex128)
    p2s = np.full((F, L), w.two_m, dtype=np.int64)
    nterms = np.zeros(F, dtype=np.int64)
    for f, s in enumerate(seeds):
        nterms[f] = len(s.coefs)
        coefs[f, : len(s.coefs)] = s.coefs
        shifts[f, : len(s.coefs)] = s.shifts
        p2s[f, : len(s.coefs)] = s.p2s
    cr, ci = _chi_arrays(chi)
    vals, dens, counts = _kernels.power_series(
        zs, N, w.two_m, cr, ci, coefs, shifts, p2s, nterms, float(budget.cmax), budget.lattice_terms
    )
    shell = _lattice_shell(budget.cmax, _reduced_imag(zs), float(w)) * dens ** float(w)
    bounds = np.array([s.bound() for s in seeds])
    tails = shell[:, None] * bounds[None, :]
    return vals, tails, counts


def psi_many(ns, N: int, m, chi: DirichletCharacter, z, budget: TruncationBudget):
    """psi_n(z) for all n in ns at once: (values[points, n], tails[points, n], counts)."""
    w = as_weight(m)
    zs, _ = _as_points(z)
    ns = np.asarray(ns, dtype=np.int64)
    if np.any(ns < 1):
        raise ValueError("psi index n must be >= 1")
    cr, ci = _chi_arrays(chi)
    vals, dens, counts = _kernels.exp_series(zs, N, w.two_m, cr, ci, ns, float(budget.cmax))
    # |exp(2 pi i n gamma z)| <= 1
    shell = _lattice_shell(budget.cmax, _reduced_imag(zs), float(w)) * dens ** float(w)
    tails = np.repeat(shell[:, None], ns.size, axis=1)
    return vals, tails, counts


def _seed_for(spec: SeriesSpec) -> PowerSeed:
    if spec.family == "delta":
        return delta_seed(spec.k, spec.m, spec.xi)
    if spec.family == "pfkm":
        return pfkm_seed(spec.k, spec.m)
    raise ValueError(f"{spec.family} is not a power-seed family")


def _package(vals, tails, counts, budget, scalar):
    out = []
    for v, t, c in zip(vals, tails, counts):
        warn = not (t <= 10.0 * budget.tol * max(abs(v), 1e-300))
        out.append(SeriesValue(complex(v), float(t), int(c), bool(warn)))
    return out[0] if scalar else out


def series_values(spec: SeriesSpec, z, budget: TruncationBudget) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(values, tails, counts) of the family in ``spec`` at the points z (flattened)."""
    if spec.family in ("delta", "pfkm"):
        v, t, c = power_series_eval([_seed_for(spec)], spec.N, spec.m, spec.chi, z, budget)
        return v[:, 0], t[:, 0], c
    if spec.family == "psi":
        v, t, c = psi_many([spec.n], spec.N, spec.m, spec.chi, z, budget)
        return v[:, 0], t[:, 0], c
    return _delta_via_psi_values(spec, z, budget)


def delta_eval(spec: SeriesSpec, z, budget: TruncationBudget):
    """Delta_{k,m,xi,chi}(z); a SeriesValue for scalar z, a list otherwise."""
    if spec.family != "delta":
        raise ValueError("delta_eval needs family 'delta'")
    _, scalar = _as_points(z)
    return _package(*series_values(spec, z, budget), budget, scalar)


def psi_eval(spec: SeriesSpec, z, budget: TruncationBudget):
    """psi_{n,m,chi}(z) summed over Gamma_inf \\ Gamma."""
    if spec.family != "psi":
        raise ValueError("psi_eval needs family 'psi'")
    _, scalar = _as_points(z)
    return _package(*series_values(spec, z, budget), budget, scalar)


def pfkm_eval(k: int, m, chi: DirichletCharacter | None, N: int, z, budget: TruncationBudget):
    """(P f_{k,m})(z) = (2i)^m sum_gamma conj(chi(d)) (gamma z - i)^k (gamma z + i)^{-(m+k)} J^{-2m}."""
    spec = SeriesSpec("pfkm", N, m, k, None, chi)
    _, scalar = _as_points(z)
    return _package(*series_values(spec, z, budget), budget, scalar)


def _delta_via_psi_values(spec: SeriesSpec, z, budget: TruncationBudget):
    k, w, xi = spec.k, spec.m, spec.xi
    mf = float(w)
    ns = np.arange(1, budget.nmax + 1)
    vals, tails, counts = psi_many(ns, spec.N, w, spec.chi, z, budget)
    pref = psi_series_prefactor(k, w)
    weights = pref * ns ** (mf + k - 1.0) * np.exp(-2j * math.pi * ns * np.conj(xi))
    value = vals @ weights
    series_tail = tails @ np.abs(weights)
    # psi_n is bounded uniformly in n by its absolute series; bound it by the
    # largest |psi_n| seen plus its truncation tail, then add the remaining
    # terms of sum_{n > nmax} n^{m+k-1} e^{-2 pi n Im xi}
    sup_psi = np.max(np.abs(vals) + tails, axis=1)
    rest = _expansion_tail(budget.nmax, mf + k - 1.0, 2.0 * math.pi * xi.imag)
    return value, series_tail + abs(pref) * rest * sup_psi, counts * budget.nmax


def _expansion_tail(nmax: int, power: float, rate: float) -> float:
    """sum_{n > nmax} n^power e^{-rate n}, summed until the terms are negligible."""
    total = 0.0
    n = nmax + 1
    while True:
        term = n**power * math.exp(-rate * n)
        total += term
        if n > power / rate and term < 1e-18 * max(total, 1e-300):
            break
        n += 1
        if n > nmax + 100000:
            return math.inf
    return total


def delta_via_psi(spec: SeriesSpec, z, budget: TruncationBudget):
    """Delta evaluated through its expansion in psi_1, ..., psi_nmax."""
    if spec.family != "delta-via-psi":
        raise ValueError("delta_via_psi needs family 'delta-via-psi'")
    _, scalar = _as_points(z)
    return _package(*series_values(spec, z, budget), budget, scalar)


def series_function(spec: SeriesSpec, budget: TruncationBudget) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluator z -> values for the family in ``spec``."""

    def f(z):
        arr = np.asarray(z, dtype=np.complex128)
        vals = series_values(spec, arr, budget)[0]
        return vals.reshape(arr.shape)

    f.spec = spec
    f.budget = budget
    return f


# ---------------------------------------------------------------------------
# reference path: plain box enumeration with explicit multipliers


def reference_rows(N: int, cbound: int, dmax: int) -> list[tuple[int, int]]:
    """Bottom rows (c, d), N | c, |c| <= cbound, |d| <= dmax, coprime, d = 1 mod 4.

    Built from coset_reps_infty by the translations d -> d + j c.
    """
    rows = [(0, 1)]
    for g in coset_reps_infty(N, cbound // N).matrices()[1:]:
        c, d0 = g.c, g.d
        step = abs(c)
        j_lo = -((dmax + d0) // step)
        for j in range(j_lo, (dmax - d0) // step + 1):
            d = d0 + j * c
            if abs(d) <= dmax:
                rows.append((c, d))
    return rows


def reference_sum(spec: SeriesSpec, z: complex, cbound: int, dmax: int, j0: int = 8) -> complex:
    """Direct evaluation over :func:`reference_rows` with J from the explicit formula.

    Independent of the reduction used by the fast kernels: rows come from the
    double-coset representatives, multipliers from :func:`arithmetic.multiplier_J`.
    """
    from .arithmetic import multiplier_J

    z = check_upper(z)
    w = spec.m
    chi = spec.chi
    seed = None if spec.family == "psi" else _seed_for(spec)
    total = 0j
    for c, d in reference_rows(spec.N, cbound, dmax):
        g = IntMatrix.complete(c, d)
        gz = g.moebius(z)
        fac = chi(d).conjugate() * multiplier_J(g, z) ** (-w.two_m)
        if seed is None:
            total += fac * np.exp(2j * math.pi * spec.n * gz)
        else:
            total += fac * seed.value(gz, j0)
    return total


def slash_factor(g: IntMatrix, m, z: complex) -> complex:
    """J(g, z)^{-2m} for g in Gamma_0(4) cap Gamma_1(4)."""
    w = as_weight(m)
    if not g.in_gamma1_4():
        raise ValueError(f"{g} is not in Gamma_0(4) cap Gamma_1(4)")
    k = kronecker(g.c, g.d)
    return k * half_integer_power(g.c * z + g.d, -w.two_m / 2)


def automorphy_defect(f: Callable, g: IntMatrix, m, chi: DirichletCharacter, z: complex) -> tuple[complex, complex]:
    """((f|_m g)(z), chi(g) f(z)); equal for an automorphic f."""
    lhs = complex(f(np.array([g.moebius(z)]))[0]) * slash_factor(g, m, z)
    rhs = chi(g.d) * complex(f(np.array([z]))[0])
    return lhs, rhs


def generators(N: int) -> list[IntMatrix]:
    """A few elements of Gamma_0(N) cap Gamma_1(4) used for automorphy checks."""
    gens = [IntMatrix(1, 1, 0, 1), IntMatrix(1, 0, N, 1), IntMatrix(1, 0, -N, 1)]
    for d in (5, -3, 9, -7):
        if math.gcd(N, d) == 1:
            gens.append(IntMatrix.complete(N, d))
        if len(gens) >= 5:
            break
    return gens


__all__ = [
    "SeriesSpec",
    "TruncationBudget",
    "SeriesValue",
    "delta_eval",
    "psi_eval",
    "pfkm_eval",
    "delta_via_psi",
    "series_function",
    "reference_sum",
    "automorphy_defect",
]
