"""Integer and character arithmetic, the theta multiplier, and coset enumeration."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable

import numpy as np

from . import config
from .group_core import MetElement, check_upper, sqrt_branch

_TAB2 = (0, 1, 0, -1, 0, -1, 0, 1)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), defined for all integers a and n."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v % 2 == 1:
        sign *= _TAB2[a & 7]
    if n == 1:
        return sign
    return sign * jacobi(a, n)


def legendre(a: int, p: int) -> int:
    """Legendre symbol for odd p; identically 0 for p = 2 (Hecke convention)."""
    if p == 2:
        return 0
    return jacobi(a, p)


def epsilon_d(d: int) -> complex:
    """1 if d = 1 mod 4, i if d = 3 mod 4."""
    d = int(d)
    if d % 2 == 0:
        raise ValueError("epsilon_d needs odd d")
    return 1 + 0j if d % 4 == 1 else 1j


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True, order=True)
class IntMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "IntMatrix":
        return IntMatrix(self.d, -self.b, -self.c, self.a)

    def moebius(self, z: complex) -> complex:
        z = check_upper(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def in_gamma0(self, N: int) -> bool:
        return self.c % N == 0

    def in_gamma1_4(self) -> bool:
        return self.c % 4 == 0 and self.d % 4 == 1

    def key(self):
        return (abs(self.c), self.c, self.d, self.a, self.b)

    @classmethod
    def complete(cls, c: int, d: int) -> "IntMatrix":
        """A matrix with bottom row (c, d), top row reduced so that 0 <= b < |d| when d != 0."""
        g, x, y = egcd(c, d)
        if g != 1:
            raise ValueError(f"bottom row ({c}, {d}) is not coprime")
        # c*x + d*y = 1  ->  a = y, b = -x
        a, b = y, -x
        if d != 0:
            j = -(b // abs(d)) if d > 0 else b // abs(d)
            a, b = a + j * c, b + j * d
        return cls(a, b, c, d)


IDENTITY_INT = IntMatrix(1, 0, 0, 1)
T = IntMatrix(1, 1, 0, 1)
S = IntMatrix(0, -1, 1, 0)


def normalize_gamma1_4(g: IntMatrix) -> IntMatrix:
    """Representative of {g, -g} with d = 1 mod 4 (g must lie in Gamma_0(4))."""
    if g.c % 4:
        raise ValueError("matrix not in Gamma_0(4)")
    return g if g.d % 4 == 1 else -g


def theta_value(z: complex, tol: float = config.THETA_TOL) -> complex:
    """Theta(z) = sum_n exp(2 pi i n^2 z), truncated once exp(-2 pi n^2 Im z) < tol/4.

    The tail after that cutoff is dominated by a geometric series with ratio
    below 1/2, so its modulus stays under tol.
    """
    z = check_upper(z)
    x = z.real - math.floor(z.real)
    y = z.imag
    total = 1.0 + 0j
    n = 1
    while True:
        mag = math.exp(-2.0 * math.pi * n * n * y)
        if mag < tol / 4.0:
            break
        phase = (n * n * x) % 1.0
        total += 2.0 * mag * cmath.exp(2j * math.pi * phase)
        n += 1
    return total


def _require_gamma0_4(g: IntMatrix):
    if g.c % 4:
        raise ValueError(f"{g} is not in Gamma_0(4)")


def multiplier_J(g: IntMatrix, z: complex) -> complex:
    """Explicit theta multiplier ``(c/d) eps_d^{-1} sqrt(cz + d)``."""
    _require_gamma0_4(g)
    z = check_upper(z)
    return kronecker(g.c, g.d) / epsilon_d(g.d) * sqrt_branch(g.c * z + g.d)


def multiplier_J_ratio(g: IntMatrix, z: complex, tol: float = config.THETA_TOL) -> complex:
    """Theta multiplier as the quotient Theta(g.z) / Theta(z)."""
    _require_gamma0_4(g)
    return theta_value(g.moebius(z), tol) / theta_value(z, tol)


def as_met(g: IntMatrix) -> MetElement:
    """The element (g, J(g, .)) of Mp2(R), for g in Gamma_0(4) with d = 1 mod 4."""
    if not g.in_gamma1_4():
        raise ValueError(f"{g} is not in Gamma_0(4) cap Gamma_1(4)")
    return MetElement(g.a, g.b, g.c, g.d, multiplier_J(g, 1j))


# ---------------------------------------------------------------------------
# Dirichlet characters


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _primitive_root_prime_power(p: int, e: int) -> int:
    q = p**e
    phi = q - q // p
    factors = factorize(phi)
    for g in range(2, q):
        if math.gcd(g, p) != 1:
            continue
        if all(pow(g, phi // r, q) != 1 for r in factors):
            return g
    raise ArithmeticError(f"no primitive root mod {q}")


def unit_generators(N: int) -> list[tuple[int, int]]:
    """Generators of (Z/NZ)^x with their orders, one cyclic factor each.

    Odd prime powers contribute a primitive root; 4 contributes -1; 2^e with
    e >= 3 contributes -1 and 5.  Generators are lifted by CRT (= 1 modulo the
    other prime-power parts), primes in increasing order.
    """
    gens: list[tuple[int, int]] = []
    for p, e in sorted(factorize(N).items()):
        q = p**e
        rest = N // q
        local: list[tuple[int, int]] = []
        if p == 2:
            if e == 2:
                local = [(q - 1, 2)]
            elif e >= 3:
                local = [(q - 1, 2), (5, 2 ** (e - 2))]
        else:
            local = [(_primitive_root_prime_power(p, e), q - q // p)]
        for g, order in local:
            if rest == 1:
                lift = g % N
            else:
                # lift = g mod q, 1 mod rest
                _, u, v = egcd(q, rest)
                lift = (g * rest * v + q * u) % N
            gens.append((lift, order))
    return gens


def _root_of_unity(phase: float) -> complex:
    """exp(2 pi i phase), exact at multiples of 1/4."""
    frac = phase % 1.0
    for q, v in ((0.0, 1.0), (0.25, 1j), (0.5, -1.0), (0.75, -1j), (1.0, 1.0)):
        if abs(frac - q) < 1e-12:
            return complex(v)
    return cmath.exp(2j * math.pi * phase)


@dataclass(frozen=True)
class DirichletCharacter:
    """Even Dirichlet character mod N stored as a value table on Z/NZ."""

    modulus: int
    values: tuple[complex, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        N = self.modulus
        if N < 1 or len(self.values) != N:
            raise ValueError("value table must have one entry per residue")
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        units = [a for a in range(N) if math.gcd(a, N) == 1]
        for a in range(N):
            if a not in units and abs(vals[a]) > 1e-12:
                raise ValueError(f"character must vanish at non-unit {a}")
        order = 0
        for a in units:
            if abs(abs(vals[a]) - 1.0) > 1e-9:
                raise ValueError("character values must be roots of unity")
            # finite order: values must be roots of unity of order dividing phi(N)
            if abs(vals[a] ** len(units) - 1.0) > 1e-8:
                raise ValueError("character values must be roots of unity")
            order += 1
        for a in units:
            for b in units:
                if abs(vals[a * b % N] - vals[a] * vals[b]) > 1e-9:
                    raise ValueError("value table is not multiplicative")
        if abs(vals[(N - 1) % N] - 1.0) > 1e-9:
            raise ValueError("only even characters (chi(-1) = +1) are supported")

    @property
    def N(self) -> int:
        return self.modulus

    def __call__(self, n: int) -> complex:
        return self.values[int(n) % self.modulus]

    def is_trivial(self) -> bool:
        return all(abs(v - 1) < 1e-12 for a, v in enumerate(self.values) if math.gcd(a, self.modulus) == 1)

    def table(self) -> np.ndarray:
        return np.array(self.values, dtype=np.complex128)

    @classmethod
    def trivial(cls, N: int) -> "DirichletCharacter":
        return cls(N, tuple(1.0 if math.gcd(a, N) == 1 else 0.0 for a in range(N)), f"{N}:0")

    @classmethod
    def from_index(cls, N: int, index: int) -> "DirichletCharacter":
        """Character number ``index`` in mixed radix over :func:`unit_generators`.

        Digit j_i (least significant first) sends generator i to
        exp(2 pi i j_i / order_i).
        """
        gens = unit_generators(N)
        total = math.prod(o for _, o in gens)
        if not 0 <= index < total:
            raise ValueError(f"index must lie in [0, {total}) for modulus {N}")
        digits = []
        rest = index
        for _, order in gens:
            digits.append(rest % order)
            rest //= order
        values = [0j] * N
        if not gens:
            values[1 % N] = 1.0
            if N == 1:
                values[0] = 1.0
        for exps in product(*(range(o) for _, o in gens)):
            unit = 1
            phase = 0.0
            for (g, order), e, j in zip(gens, exps, digits):
                unit = unit * pow(g, e, N) % N
                phase += j * e / order
            values[unit] = _root_of_unity(phase)
        return cls(N, tuple(values), f"{N}:{index}")

    @classmethod
    def parse(cls, spec: str) -> "DirichletCharacter":
        """``"N:index"`` or the path of a JSON file ``{"modulus": N, "values": [[re, im], ...]}``."""
        if ":" in spec and not Path(spec).exists():
            n_str, idx_str = spec.split(":", 1)
            return cls.from_index(int(n_str), int(idx_str))
        data = json.loads(Path(spec).read_text())
        values = tuple(complex(re, im) for re, im in data["values"])
        return cls(int(data["modulus"]), values, str(spec))

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "values": [[v.real, v.imag] for v in self.values]}


def even_characters(N: int) -> list[DirichletCharacter]:
    total = math.prod(o for _, o in unit_generators(N))
    out = []
    for idx in range(total):
        try:
            out.append(DirichletCharacter.from_index(N, idx))
        except ValueError:
            continue
    return out


def char_eval(chi: DirichletCharacter, g) -> complex:
    """chi(d) for a matrix (a b; c d) in Gamma_0(N), or chi(n) for an integer."""
    if isinstance(g, IntMatrix):
        if g.c % chi.modulus:
            raise ValueError(f"{g} is not in Gamma_0({chi.modulus})")
        return chi(g.d)
    return chi(int(g))


# ---------------------------------------------------------------------------
# enumeration


@dataclass(frozen=True)
class CosetList:
    entries: tuple[tuple[IntMatrix, str], ...]
    N: int
    cmax: int
    dmax: int
    jmax: int

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def matrices(self) -> list[IntMatrix]:
        return [g for g, _ in self.entries]


def _check_level(N: int):
    if N < 4 or N % 4:
        raise ValueError(f"level N must be a positive multiple of 4, got {N}")


def enumerate_group(N: int, cmax: int, dmax: int | None = None, jmax: int | None = None) -> CosetList:
    """Elements of Gamma_0(N) cap Gamma_1(4) inside a height box.

    Bottom rows: N | c, |c| <= cmax*N, |d| <= dmax, gcd(c, d) = 1, one row per
    +-pair (the one with d = 1 mod 4).  Top rows: the completion of
    :meth:`IntMatrix.complete` shifted by T^j, |j| <= jmax.  Every element of
    the group with bottom row in the box and |j| <= jmax is listed once.
    Defaults: dmax = max(1, cmax*N), jmax = max(1, cmax*N).
    """
    _check_level(N)
    if cmax < 0:
        raise ValueError("cmax must be nonnegative")
    cbound = cmax * N
    dmax = max(1, cbound) if dmax is None else dmax
    jmax = max(1, cbound) if jmax is None else jmax
    entries = []
    for c in range(-cbound, cbound + 1, N):
        for d in range(-dmax, dmax + 1):
            if d % 4 != 1 or math.gcd(c, d) != 1:
                continue
            g0 = IntMatrix.complete(c, d)
            for j in range(-jmax, jmax + 1):
                entries.append(IntMatrix(g0.a + j * c, g0.b + j * d, c, d))
    entries.sort(key=IntMatrix.key)
    tag = "full-group"
    return CosetList(tuple((g, tag) for g in entries), N, cmax, dmax, jmax)


def coset_reps_infty(N: int, cmax: int) -> CosetList:
    """Representatives of Gamma_inf \\ Gamma_0(N) / Gamma_inf, normalized to Gamma_1(4).

    The identity, then for 0 < c <= cmax*N with N | c and each d mod c with
    gcd(c, d) = 1 the row (c, d) with 0 <= d < c, replaced by (-c, -d) when
    d = 3 mod 4.  Full Gamma_inf \\ Gamma_0(N) cosets are obtained from these
    by d -> d + j*c.
    """
    _check_level(N)
    entries = [(IDENTITY_INT, "infinity-coset")]
    for c in range(N, cmax * N + 1, N):
        for d in range(c):
            if math.gcd(c, d) != 1:
                continue
            cc, dd = (c, d) if d % 4 == 1 else (-c, -d)
            entries.append((IntMatrix.complete(cc, dd), "infinity-coset"))
    return CosetList(tuple(entries), N, cmax, cmax * N, 0)


def gamma0_index(N: int) -> int:
    """[SL2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)."""
    out = N
    for p in factorize(N):
        out = out // p * (p + 1)
    return out


def gamma0_right_cosets(N: int) -> list[IntMatrix]:
    """Right coset representatives alpha_j with SL2(Z) = disjoint union Gamma_0(N) alpha_j.

    The coset of alpha is determined by its bottom row in P^1(Z/NZ); each
    class is lifted to a matrix with small entries.
    """
    reps: list[IntMatrix] = []
    seen: set[tuple[int, int]] = set()

    def p1_key(c, d):
        # canonical representative of the class of (c : d) under units mod N
        best = None
        for u in range(1, N):
            if math.gcd(u, N) != 1:
                continue
            k = (u * c % N, u * d % N)
            if best is None or k < best:
                best = k
        return best

    bound = 0
    while len(reps) < gamma0_index(N):
        bound += 1
        for c in range(0, bound + 1):
            for d in range(-bound, bound + 1):
                if math.gcd(c, d) != 1 or (c == 0 and d != 1):
                    continue
                key = p1_key(c, d)
                if key in seen:
                    continue
                seen.add(key)
                reps.append(IntMatrix.complete(c, d) if c else IDENTITY_INT)
    return reps


def random_gamma1_4(N: int, rng: np.random.Generator, size: int = 20) -> IntMatrix:
    """Random element of Gamma_0(N) cap Gamma_1(4) with entries of moderate size."""
    _check_level(N)
    while True:
        c = N * int(rng.integers(-size, size + 1))
        d = int(rng.integers(-size * N, size * N + 1))
        if d % 4 != 1 or math.gcd(c, d) != 1:
            continue
        g = IntMatrix.complete(c, d)
        j = int(rng.integers(-size, size + 1))
        return IntMatrix(g.a + j * c, g.b + j * d, c, d)


def iter_units(N: int) -> Iterable[int]:
    return (a for a in range(N) if math.gcd(a, N) == 1)


def random_gamma0_4(rng: np.random.Generator, size: int = 20) -> IntMatrix:
    """Random element of Gamma_0(4), either sign of d."""
    while True:
        c = 4 * int(rng.integers(-size, size + 1))
        d = int(rng.integers(-4 * size, 4 * size + 1))
        if d % 2 == 0 or math.gcd(c, d) != 1:
            continue
        g = IntMatrix.complete(c, d)
        j = int(rng.integers(-size, size + 1))
        return IntMatrix(g.a + j * c, g.b + j * d, c, d)


def random_upper(rng: np.random.Generator, ylo: float = 0.3, yhi: float = 2.0) -> complex:
    return complex(rng.uniform(-0.5, 0.5), ylo * (yhi / ylo) ** rng.uniform())


def multiplier_checks(rng: np.random.Generator, cases: int = 1000, size: int = 6) -> dict:
    """Worst relative errors of the multiplier identities on random (gamma, z).

    cocycle: J(g1 g2, z) = J(g1, g2 z) J(g2, z);  ratio: explicit J against
    Theta(g z)/Theta(z);  square: J^2 = cz + d for g in Gamma_1(4).
    """
    worst = {"cocycle": 0.0, "ratio": 0.0, "square": 0.0}
    for _ in range(cases):
        g1 = random_gamma0_4(rng, size)
        g2 = random_gamma0_4(rng, size)
        z = random_upper(rng)
        lhs = multiplier_J(g1 @ g2, z)
        rhs = multiplier_J(g1, g2.moebius(z)) * multiplier_J(g2, z)
        worst["cocycle"] = max(worst["cocycle"], abs(lhs - rhs) / abs(rhs))
        # Theta(g z) loses accuracy when Im(g z) is tiny; use moderate points
        if (g2.moebius(z)).imag > 0.02:
            j = multiplier_J(g2, z)
            worst["ratio"] = max(worst["ratio"], abs(j - multiplier_J_ratio(g2, z)) / abs(j))
        g = random_gamma1_4(4, rng, size)
        cz = g.c * z + g.d
        worst["square"] = max(worst["square"], abs(multiplier_J(g, z) ** 2 - cz) / abs(cz))
    return worst
