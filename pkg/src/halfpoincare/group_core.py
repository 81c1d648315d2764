"""Arithmetic of the metaplectic double cover Mp2(R).

An element is a unimodular real matrix together with the value at ``i`` of a
holomorphic square root of ``cz + d``.  Because ``cz + d`` never vanishes on
the upper half-plane, that single value fixes the square root everywhere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import config

FOUR_PI = 4.0 * math.pi
TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Raised when a point is not (safely) inside the upper half-plane."""


def check_upper(z: complex, min_im: float = config.MIN_IM) -> complex:
    z = complex(z)
    if not z.imag > min_im:
        raise DomainError(f"point {z!r} is not in the upper half-plane (Im <= {min_im})")
    return z


@dataclass(frozen=True)
class HalfWeight:
    """Half-integral weight stored exactly as the odd integer ``2m``."""

    two_m: int

    def __post_init__(self):
        if not isinstance(self.two_m, (int, np.integer)) or self.two_m % 2 != 1 or self.two_m < 1:
            raise ValueError(f"two_m must be an odd positive integer, got {self.two_m!r}")
        object.__setattr__(self, "two_m", int(self.two_m))

    @property
    def m(self) -> Fraction:
        return Fraction(self.two_m, 2)

    def __float__(self) -> float:
        return self.two_m / 2.0

    def require_series(self) -> "HalfWeight":
        """Series constructions need m >= 5/2."""
        if self.two_m < 5:
            raise ValueError(f"series need m >= 5/2, got m = {self.m}")
        return self

    def __str__(self):
        return f"{self.two_m}/2"


def as_weight(m) -> HalfWeight:
    if isinstance(m, HalfWeight):
        return m
    frac = Fraction(m).limit_denominator(2)
    if frac.denominator != 2:
        raise ValueError(f"weight {m!r} is not a half-odd-integer")
    return HalfWeight(int(2 * frac))


def sqrt_branch(z: complex) -> complex:
    """Square root with values in {Re > 0} union {Re = 0, Im >= 0}.

    ``z = 0`` returns 0.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real < 0.0:
        return complex(0.0, math.sqrt(-z.real))
    r = cmath.sqrt(z)
    if r.real == 0.0 and r.imag < 0.0:
        r = -r
    return r


def _twice(w) -> int:
    if isinstance(w, HalfWeight):
        return w.two_m
    frac = Fraction(w).limit_denominator(2)
    if frac.denominator not in (1, 2):
        raise ValueError(f"exponent {w!r} is not a half-integer")
    return int(2 * frac)


def half_integer_power(z: complex, w) -> complex:
    """``z**w := sqrt_branch(z)**(2w)`` for a (signed) half-integer ``w``."""
    z = complex(z)
    if z == 0:
        raise ValueError("nonzero base required")
    n = _twice(w)
    r = sqrt_branch(z)
    if n >= 0:
        return r**n
    return 1.0 / r ** (-n)


@dataclass(frozen=True)
class MetElement:
    """Element ``(g, eta(i))`` of Mp2(R)."""

    a: float
    b: float
    c: float
    d: float
    eta_i: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "eta_i", complex(self.eta_i))
        if abs(self.a * self.d - self.b * self.c - 1.0) > config.DET_TOL * max(
            1.0, abs(self.a * self.d), abs(self.b * self.c)
        ):
            raise ValueError("matrix part must have determinant 1")
        target = complex(self.d, self.c)
        if abs(self.eta_i**2 - target) > config.ETA_TOL * max(1.0, abs(target)):
            raise ValueError("eta_i**2 must equal c*i + d")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def eta(self, z: complex) -> complex:
        """Value of the stored square root of ``cz + d`` at ``z``."""
        if self.c == 0.0:
            return self.eta_i
        root = sqrt_branch(self.c * complex(z) + self.d)
        base = sqrt_branch(complex(self.d, self.c))
        # cz+d stays in one open half-plane, where sqrt_branch is continuous
        return root if abs(self.eta_i - base) <= abs(self.eta_i + base) else -root

    def moebius(self, z: complex) -> complex:
        return moebius(self, z)

    def inverse(self) -> "MetElement":
        # eta_{s^-1}(z) = 1/eta_s(s^-1 z)
        a, b, c, d = self.d, -self.b, -self.c, self.a
        w = (a * 1j + b) / (c * 1j + d)
        return MetElement(a, b, c, d, 1.0 / self.eta(w))

    def __mul__(self, other: "MetElement") -> "MetElement":
        return mp2_multiply(self, other)

    def close_to(self, other: "MetElement", tol: float = config.ROUNDTRIP_TOL) -> bool:
        return max_component_error(self, other) <= tol


def max_component_error(s1: MetElement, s2: MetElement) -> float:
    return max(
        abs(s1.a - s2.a),
        abs(s1.b - s2.b),
        abs(s1.c - s2.c),
        abs(s1.d - s2.d),
        abs(s1.eta_i - s2.eta_i),
    )


IDENTITY = MetElement(1.0, 0.0, 0.0, 1.0, 1.0)


def n_x(x: float) -> MetElement:
    return MetElement(1.0, x, 0.0, 1.0, 1.0)


def a_y(y: float) -> MetElement:
    if y <= 0:
        raise DomainError("a_y needs y > 0")
    s = math.sqrt(y)
    return MetElement(s, 0.0, 0.0, 1.0 / s, y**-0.25)


def kappa(t: float) -> MetElement:
    return MetElement(math.cos(t), -math.sin(t), math.sin(t), math.cos(t), cmath.exp(0.5j * t))


def h_t(t: float) -> MetElement:
    return MetElement(math.exp(t), 0.0, 0.0, math.exp(-t), math.exp(-0.5 * t))


def mp2_multiply(s1: MetElement, s2: MetElement) -> MetElement:
    """Group law ``(g1 g2, eta1(g2.z) eta2(z))``."""
    a = s1.a * s2.a + s1.b * s2.c
    b = s1.a * s2.b + s1.b * s2.d
    c = s1.c * s2.a + s1.d * s2.c
    d = s1.c * s2.b + s1.d * s2.d
    eta = s1.eta(moebius(s2, 1j)) * s2.eta_i
    return MetElement(a, b, c, d, eta)


def _wrap4pi(t: float) -> float:
    t = math.fmod(t, FOUR_PI)
    if t < 0:
        t += FOUR_PI
    return 0.0 if t >= FOUR_PI else t


@dataclass(frozen=True)
class IwasawaCoords:
    x: float
    y: float
    t: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError("Iwasawa y must be positive")
        object.__setattr__(self, "t", _wrap4pi(float(self.t)))


@dataclass(frozen=True)
class CartanCoords:
    theta1: float
    t: float
    theta2: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("Cartan t must be nonnegative")
        object.__setattr__(self, "theta1", _wrap4pi(float(self.theta1)))
        object.__setattr__(self, "theta2", _wrap4pi(float(self.theta2)))


def mp2_from_iwasawa(c: IwasawaCoords) -> MetElement:
    return n_x(c.x) * a_y(c.y) * kappa(c.t)


def mp2_to_iwasawa(s: MetElement) -> IwasawaCoords:
    w = moebius(s, 1j)
    # eta(i) = y^(-1/4) e^(it/2), so t is twice the argument of eta(i)
    t = 2.0 * cmath.phase(s.eta_i)
    return IwasawaCoords(w.real, w.imag, t)


def mp2_from_cartan(c: CartanCoords) -> MetElement:
    return kappa(c.theta1) * h_t(c.t) * kappa(c.theta2)


def moebius(s: MetElement, z: complex) -> complex:
    z = check_upper(z)
    return (s.a * z + s.b) / (s.c * z + s.d)


Evaluator = Callable[[complex], complex]


def slash_apply(f: Evaluator, m, s: MetElement, z: complex) -> complex:
    """``(f |_m s)(z) = f(s.z) * eta_s(z)**(-2m)``."""
    two_m = as_weight(m).two_m
    z = check_upper(z)
    return f(moebius(s, z)) * s.eta(z) ** (-two_m)


def lift_value(f: Evaluator, m, s: MetElement, check: bool = False, tol: float = config.LIFT_TOL) -> complex:
    """Classical lift ``F_f(s) = (f|_m s)(i)``.

    With ``check=True`` the value is recomputed from Iwasawa coordinates,
    ``f(x+iy) y^(m/2) e^(-imt)``, and a mismatch raises ``ArithmeticError``.
    """
    w = as_weight(m)
    value = slash_apply(f, w, s, 1j)
    if check:
        other = lift_value_iwasawa(f, w, mp2_to_iwasawa(s))
        if abs(value - other) > tol * max(1.0, abs(value)):
            raise ArithmeticError(f"lift self-check failed: {value} vs {other}")
    return value


def lift_value_iwasawa(f: Evaluator, m, c: IwasawaCoords) -> complex:
    mf = float(as_weight(m))
    return f(complex(c.x, c.y)) * c.y ** (mf / 2.0) * cmath.exp(-1j * mf * c.t)


def f_km(z: complex, k: int, m) -> complex:
    """Model function ``(2i)^m (z-i)^k / (z+i)^(m+k)``."""
    w = as_weight(m)
    z = check_upper(z)
    if k < 0:
        raise ValueError("k must be nonnegative")
    num = half_integer_power(2j, w) * (z - 1j) ** k
    return num / half_integer_power(z + 1j, Fraction(w.two_m + 2 * k, 2))


def chi_K(n2: int, t: float) -> complex:
    """Character ``chi_n(kappa_t) = e^(-int)`` of K, with ``n2 = 2n``."""
    return cmath.exp(-0.5j * n2 * t)


def F_km_cartan(theta1: float, t: float, theta2: float, k: int, m) -> complex:
    w = as_weight(m)
    if t < 0:
        raise ValueError("t must be nonnegative")
    mf = float(w)
    radial = math.tanh(t) ** k / math.cosh(t) ** mf
    return chi_K(w.two_m + 4 * k, theta1) * radial * chi_K(w.two_m, theta2)


def falling_product(m, lo: int, hi: int) -> float:
    """``prod_{r=lo}^{hi} (m - 1 + r)`` (empty product is 1)."""
    mf = float(as_weight(m))
    out = 1.0
    for r in range(lo, hi + 1):
        out *= mf - 1.0 + r
    return out


def F_km_l2norm_sq(k: int, m) -> float:
    """Exact ``||F_{k,m}||^2 = 4 pi k! / prod_{r=0}^{k} (m-1+r)``."""
    w = as_weight(m).require_series()
    return FOUR_PI * math.factorial(k) / falling_product(w, 0, k)


def F_km_l2norm_sq_numeric(k: int, m, n_theta: int = 8) -> tuple[float, float]:
    """Cartan-coordinate quadrature of ``|F_{k,m}|^2``; returns (value, error estimate).

    Haar measure is ``(1/4pi) dtheta1 sinh(2t) dt dtheta2`` with both angles
    over [0, 4pi).  The angular integrals use the periodic trapezoid rule.
    """
    w = as_weight(m).require_series()
    thetas = np.arange(n_theta) * (FOUR_PI / n_theta)
    dtheta = FOUR_PI / n_theta

    def radial(t):
        acc = 0.0
        for th1 in thetas:
            for th2 in thetas:
                acc += abs(F_km_cartan(th1, t, th2, k, w)) ** 2
        return acc * dtheta * dtheta * math.sinh(2.0 * t)

    # the radial density is below e^(-(2m-2)t); t = 40 truncates far below 1e-30
    value, err = integrate.quad(radial, 0.0, 40.0, epsabs=0.0, epsrel=1e-13, limit=400)
    return value / FOUR_PI, err / FOUR_PI


def theorem61_rhs(derivs: Sequence[complex], k: int, m) -> complex:
    """``sum_l C(k,l) (2i)^l 4 pi / prod_{r<=l}(m-1+r) f^(l)(i)`` from f^(l)(i), l = 0..k."""
    if len(derivs) != k + 1:
        raise ValueError(f"need {k + 1} derivative values, got {len(derivs)}")
    w = as_weight(m)
    total = 0j
    for l in range(k + 1):
        total += math.comb(k, l) * (2j) ** l * FOUR_PI / falling_product(w, 0, l) * derivs[l]
    return total


def raised_lift_at(derivs: Sequence[complex], k: int, m, y: float = 1.0, t: float = 0.0) -> complex:
    """Closed form of ``(n+)^k F_f (n_x a_y kappa_t)`` from derivatives f^(l)(x+iy).

    At x = t = 0, y = 1 and f = f_{k,m} the value is k!.
    """
    if len(derivs) != k + 1:
        raise ValueError(f"need {k + 1} derivative values, got {len(derivs)}")
    w = as_weight(m)
    mf = float(w)
    total = 0j
    for l in range(k + 1):
        total += math.comb(k, l) * (2j * y) ** l * falling_product(w, l + 1, k) * derivs[l]
    return chi_K(w.two_m + 4 * k, t) * y ** (mf / 2.0) * total


def gamma_half(two_s: int) -> float:
    """Gamma(s) for s = two_s/2 > 0, exact sqrt(pi)*rational at half-odd-integers."""
    two_s = int(two_s)
    if two_s <= 0:
        raise ValueError("Gamma argument must be positive")
    if two_s % 2 == 0:
        return float(math.factorial(two_s // 2 - 1))
    j = (two_s - 1) // 2
    # Gamma(j + 1/2) = (2j)! / (4^j j!) sqrt(pi)
    return float(Fraction(math.factorial(2 * j), 4**j * math.factorial(j))) * math.sqrt(math.pi)
