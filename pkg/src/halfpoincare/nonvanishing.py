"""Beta-distribution medians and the non-vanishing thresholds.

The series P f_{k,m} is guaranteed to be nonzero on a group of level N once
N exceeds 4 sqrt(M) / (1 - M), with M the median of Beta(k/2 + 1, m/2 - 1).
A closed-form corollary lists four sufficient conditions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

from . import config
from .group_core import HalfWeight, as_weight

MEDIAN_MAXITER = config.MEDIAN_MAXITER
CF_MAXITER = 500
_FPMIN = 1e-300
_EPS = 3e-16


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a beta distribution."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0) or math.isinf(self.a) or math.isinf(self.b):
            raise ValueError(f"beta parameters must be finite and positive, got a={self.a!r}, b={self.b!r}")

    @classmethod
    def for_weight(cls, k: int, m) -> "BetaParams":
        """Parameters (k/2 + 1, m/2 - 1) entering the threshold."""
        w = as_weight(m).require_series()
        return cls(k / 2.0 + 1.0, w.two_m / 4.0 - 1.0)


def _betacf(x: float, a: float, b: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for it in range(1, CF_MAXITER + 1):
        m2 = 2 * it
        aa = it * (b - it) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + it) * (qab + it) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise RuntimeError(f"continued fraction did not converge for x={x}, a={a}, b={b}")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Uses the continued fraction on whichever side of the mean
    (a + 1)/(a + b + 2) converges fast, with I_x(a,b) = 1 - I_{1-x}(b,a).
    """
    BetaParams(a, b)
    x = float(x)
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    front = math.exp(lbeta + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        val = front * _betacf(x, a, b) / a
    else:
        val = 1.0 - front * _betacf(1.0 - x, b, a) / b
    return min(1.0, max(0.0, val))


@dataclass(frozen=True)
class MedianResult:
    """Median with its bisection bracket."""

    value: float
    lo: float
    hi: float
    residual: float
    iterations: int


def beta_median_bracket(a: float, b: float, tol: float = config.MEDIAN_TOL) -> MedianResult:
    """Bisection for I_x(a, b) = 1/2, keeping the sign-change bracket [lo, hi]."""
    BetaParams(a, b)
    lo, hi = 0.0, 1.0
    mid = 0.5
    it = 0
    for it in range(1, MEDIAN_MAXITER + 1):
        mid = 0.5 * (lo + hi)
        r = reg_inc_beta(mid, a, b) - 0.5
        if r == 0.0:
            lo = hi = mid
            break
        if r < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(mid, 1e-300) or hi - lo <= 4e-16 * mid + 1e-300:
            break
    mid = 0.5 * (lo + hi)
    return MedianResult(mid, lo, hi, reg_inc_beta(mid, a, b) - 0.5, it)


def beta_median(a: float, b: float, tol: float = config.MEDIAN_TOL) -> float:
    """Median M(a, b) of Beta(a, b), in ]0, 1[."""
    return beta_median_bracket(a, b, tol).value


def threshold(k: int, m) -> float:
    """Level bound 4 sqrt(M) / (1 - M) with M = M(k/2 + 1, m/2 - 1)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return _threshold(int(k), as_weight(m).two_m)


@lru_cache(maxsize=4096)
def _threshold(k: int, two_m: int) -> float:
    bp = BetaParams.for_weight(k, HalfWeight(two_m))
    med = beta_median(bp.a, bp.b)
    return 4.0 * math.sqrt(med) / (1.0 - med)


def threshold_k0_closed(m) -> float:
    """k = 0 threshold in closed form, 4 * 2^s * sqrt(4^s - 1) with s = 1/(m - 2)."""
    w = as_weight(m).require_series()
    s = 2.0 / (w.two_m - 4)
    return 4.0 * 2.0**s * math.sqrt(4.0**s - 1.0)


@dataclass(frozen=True)
class CorollaryVerdict:
    """Which sufficient conditions fire for (k, m, N)."""

    k: int
    two_m: int
    N: int
    cases: tuple
    applicable_case: int | None
    verdict: str
    theorem_holds: bool
    threshold: float
    notes: tuple

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "two_m": self.two_m,
            "N": self.N,
            "cases": list(self.cases),
            "applicable_case": self.applicable_case,
            "verdict": self.verdict,
            "theorem_holds": self.theorem_holds,
            "threshold": self.threshold,
            "notes": list(self.notes),
        }


CASE2_NOTE = "case 2 requires m = 4, unreachable for odd 2m"


def case_conditions(k: int, m, N: int) -> tuple:
    """The four printed conditions, with m the half-integral weight.

    Case 2 (m = 4) evaluates to False for every admissible weight and is
    reported as such rather than dropped.
    """
    w = as_weight(m)
    mf = w.two_m / 2.0
    c1 = k == 0 and N > threshold_k0_closed(w)
    c2 = False
    if w.two_m == 8:  # pragma: no cover - HalfWeight forbids even 2m
        c2 = N > 4.0 / (2.0 ** (1.0 / (k + 2)) - 2.0 ** (-1.0 / (k + 2)))
    c3 = False
    if 0 < k <= mf - 4:
        r = (k + 2) / (mf - 2)
        c3 = N >= 4.0 * math.sqrt(r * (1.0 + r))
    c4 = False
    if 0 < mf - 4 <= k:
        r = k / (mf - 4)
        c4 = N >= 4.0 * math.sqrt(r * (1.0 + r))
    return (c1, c2, c3, c4)


def corollary_cases(k: int, m, N: int, check: bool = True) -> CorollaryVerdict:
    """Evaluate the closed-form sufficient conditions for non-vanishing.

    With ``check`` set, a firing case without the threshold inequality
    raises, since the closed forms are consequences of that inequality.
    """
    if isinstance(m, (int, float)) and float(m) == 4.0:
        raise ValueError(CASE2_NOTE + "; weights here are half-odd-integers")
    w = as_weight(m).require_series()
    if N < 1:
        raise ValueError("N must be a positive integer")
    if k < 0:
        raise ValueError("k must be non-negative")
    cases = case_conditions(k, w, N)
    thr = threshold(k, w)
    holds = N > thr
    fired = [i + 1 for i, c in enumerate(cases) if c]
    applicable = fired[0] if fired else None
    verdict = "nonvanishing-guaranteed" if fired else "no-conclusion"
    if check and fired and not holds:
        raise AssertionError(f"case {applicable} fired for k={k}, m={w}, N={N} but N <= threshold {thr}")
    return CorollaryVerdict(k, w.two_m, N, cases, applicable, verdict, holds, thr, (CASE2_NOTE,))


def minimal_level(k: int, m) -> int:
    """Smallest N with N > threshold(k, m)."""
    return int(math.floor(threshold(k, m))) + 1


def threshold_table(ks, two_ms, N: int | None = None) -> list:
    """Rows (k, 2m, threshold, minimal level, case flags at N).

    Without ``N`` the case flags are evaluated at the minimal level.
    """
    rows = []
    for tm in two_ms:
        w = HalfWeight(int(tm))
        for k in ks:
            thr = threshold(k, w)
            n_eval = N if N is not None else minimal_level(k, w)
            cv = corollary_cases(k, w, n_eval)
            rows.append(
                {
                    "k": int(k),
                    "two_m": w.two_m,
                    "threshold": thr,
                    "threshold_err": 4.0 * abs(thr) * 1e-15,
                    "min_level": minimal_level(k, w),
                    "N": n_eval,
                    "case1": cv.cases[0],
                    "case2": cv.cases[1],
                    "case3": cv.cases[2],
                    "case4": cv.cases[3],
                    "verdict": cv.verdict,
                }
            )
    return rows


def table_csv(rows) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        out = dict(r)
        out["threshold"] = f"{r['threshold']:.15g}"
        out["threshold_err"] = f"{r['threshold_err']:.2e}"
        writer.writerow(out)
    return buf.getvalue()
