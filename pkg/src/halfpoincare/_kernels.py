"""Compiled inner loops of the series engine.

All kernels work in reduced coordinates.  A point z is written z = g.w0 with
g in SL2(Z) and w0 in the standard fundamental domain.  An element gamma of
the summation group then corresponds to the bottom row (c', d') of
gamma g, and |c z + d| = |c' w0 + d'| / |c_g w0 + d_g|.  Shells are cut by
the radius |c' w0 + d'| <= R.
"""

import math

import numpy as np
from numba import njit, prange

_I = 1j


@njit(cache=True)
def gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def egcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@njit(cache=True)
def jacobi(a, n):
    a = a % n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = n % 8
            if r == 3 or r == 5:
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a = a % n
    if n == 1:
        return result
    return 0


@njit(cache=True)
def kronecker_odd(c, d):
    """(c/d) for odd d of either sign."""
    sign = 1
    if d < 0:
        d = -d
        if c < 0:
            sign = -1
    if d == 1:
        return sign
    return sign * jacobi(c, d)


@njit(cache=True)
def reduce_point(z):
    """Return (w0, a, b, c, d) with z = (a w0 + b)/(c w0 + d) and w0 reduced."""
    # M maps z to w; accumulate M, invert at the end
    ma, mb, mc, md = 1, 0, 0, 1
    w = z
    for _ in range(10000):
        n = math.floor(w.real + 0.5)
        if n != 0:
            w = w - n
            ma, mb = ma - n * mc, mb - n * md
        if abs(w) < 1.0 - 1e-14:
            w = -1.0 / w
            ma, mb, mc, md = -mc, -md, ma, mb
        else:
            break
    # recompute w0 from the integer matrix for accuracy
    w = (ma * z + mb) / (mc * z + md)
    return w, md, -mb, -mc, ma


@njit(cache=True)
def csqrt_branch(z):
    """Square root with values in Re > 0 or (Re = 0, Im >= 0)."""
    r = np.sqrt(z)
    if r.real < 0.0 or (r.real == 0.0 and r.imag < 0.0):
        r = -r
    return r


@njit(cache=True)
def _ipow(z, n):
    """z**n for n >= 0 by repeated squaring."""
    out = 1.0 + 0j
    while n:
        if n & 1:
            out *= z
        z *= z
        n >>= 1
    return out


@njit(cache=True)
def cpow_half(z, p2):
    """z^(p2/2) as (sqrt_branch z)^p2."""
    n = abs(p2)
    if n % 2 == 0:
        r = _ipow(z, n // 2)
    else:
        r = _ipow(z, n // 2) * csqrt_branch(z)
    if p2 >= 0:
        return r
    return 1.0 / r


@njit(cache=True)
def lattice_power(tau, p2, j0):
    """sum_{j in Z} (tau + j)^(-p2/2) for Im tau > 0.

    Direct terms |j| <= j0 after centering Re tau, plus a midpoint
    Euler-Maclaurin tail on each side through the seventh derivative.
    """
    tau = tau - math.floor(tau.real + 0.5)
    p = 0.5 * p2
    total = 0j
    for j in range(-j0, j0 + 1):
        total += cpow_half(tau + j, -p2)
    a = j0 + 0.5
    # right tail, f(t) = (tau + t)^-p
    u = tau + a
    up = cpow_half(u, -p2)
    total += up * u / (p - 1.0)
    c1 = -p
    c3 = -p * (p + 1.0) * (p + 2.0)
    c5 = c3 * (p + 3.0) * (p + 4.0)
    c7 = c5 * (p + 5.0) * (p + 6.0)
    total += up * (
        c1 / u / 24.0 - 7.0 * c3 / u**3 / 5760.0 + 31.0 * c5 / u**5 / 967680.0 - 127.0 * c7 / u**7 / 154828800.0
    )
    # left tail, g(t) = (tau - t)^-p, derivatives change sign
    v = tau - a
    vp = cpow_half(v, -p2)
    total += -vp * v / (p - 1.0)
    total += vp * (
        -c1 / v / 24.0 + 7.0 * c3 / v**3 / 5760.0 - 31.0 * c5 / v**5 / 967680.0 + 127.0 * c7 / v**7 / 154828800.0
    )
    return total


@njit(cache=True)
def _neumaier(s, comp, x):
    t = s + x
    if abs(s.real) >= abs(x.real):
        cr = comp.real + ((s.real - t.real) + x.real)
    else:
        cr = comp.real + ((x.real - t.real) + s.real)
    if abs(s.imag) >= abs(x.imag):
        ci = comp.imag + ((s.imag - t.imag) + x.imag)
    else:
        ci = comp.imag + ((x.imag - t.imag) + s.imag)
    return t, complex(cr, ci)


@njit(cache=True)
def _row_factor(cp, dp, ga, gb, gc, gd, w0, den_g, N, two_m, chi_re, chi_im):
    """(valid, J^{-2m} conj(chi(d)), M0 w0) for the row (c', d'); valid=False if excluded."""
    c = cp * gd - dp * gc
    if c % N != 0:
        return False, 0j, 0j
    d = -cp * gb + dp * ga
    if d % 4 != 1:
        return False, 0j, 0j
    if gcd(cp, dp) != 1:
        return False, 0j, 0j
    _, x, y = egcd(cp, dp)
    # cp*x + dp*y = 1  ->  top row (y, -x)
    v = cp * w0 + dp
    mw = (y * w0 - x) / v
    czd = v / den_g
    k = kronecker_odd(c, d)
    r = d % N
    chibar = complex(chi_re[r], -chi_im[r])
    fac = k * chibar * cpow_half(czd, -two_m)
    return True, fac, mw


@njit(cache=True)
def _seed_values(mw, coefs, shifts, p2s, nterms, j0, out):
    nf = coefs.shape[0]
    for f in range(nf):
        acc = 0j
        for l in range(nterms[f]):
            acc += coefs[f, l] * lattice_power(mw + shifts[f, l], p2s[f, l], j0)
        out[f] = acc


@njit(cache=True)
def _for_rows(w0, radius):
    y0 = w0.imag
    cmax = int(math.floor(radius / y0))
    return cmax


@njit(parallel=True, cache=True)
def power_series(zs, N, two_m, chi_re, chi_im, coefs, shifts, p2s, nterms, radius, j0):
    """Poincare-type sums sum_gamma conj(chi(d)) J(gamma,z)^{-2m} phi(gamma z).

    The seed family f has phi_f(w) = sum_{j in Z} sum_l coefs[f,l] (w + j + shifts[f,l])^{-p2s[f,l]/2}.
    Returns (values[z, f], den[z], nrows[z]) where den = |c_g w0 + d_g|
    converts reduced radii back to |cz + d|.
    """
    npts = zs.shape[0]
    nf = coefs.shape[0]
    vals = np.zeros((npts, nf), dtype=np.complex128)
    dens = np.zeros(npts)
    counts = np.zeros(npts, dtype=np.int64)
    for i in prange(npts):
        w0, ga, gb, gc, gd = reduce_point(zs[i])
        den_g = gc * w0 + gd
        dens[i] = abs(den_g)
        s = np.zeros(nf, dtype=np.complex128)
        comp = np.zeros(nf, dtype=np.complex128)
        seed = np.zeros(nf, dtype=np.complex128)
        x0 = w0.real
        y0 = w0.imag
        cm = _for_rows(w0, radius)
        nrow = 0
        id_done = False
        for cp in range(-cm, cm + 1):
            rad2 = radius * radius - (cp * y0) ** 2
            if rad2 < 0.0:
                continue
            rad = math.sqrt(rad2)
            lo = int(math.ceil(-cp * x0 - rad))
            hi = int(math.floor(-cp * x0 + rad))
            for dp in range(lo, hi + 1):
                ok, fac, mw = _row_factor(cp, dp, ga, gb, gc, gd, w0, den_g, N, two_m, chi_re, chi_im)
                if not ok:
                    continue
                if cp == gc and dp == gd:
                    id_done = True
                nrow += 1
                _seed_values(mw, coefs, shifts, p2s, nterms, j0, seed)
                for f in range(nf):
                    s[f], comp[f] = _neumaier(s[f], comp[f], fac * seed[f])
        if not id_done:
            # the identity stratum is always included
            ok, fac, mw = _row_factor(gc, gd, ga, gb, gc, gd, w0, den_g, N, two_m, chi_re, chi_im)
            nrow += 1
            _seed_values(mw, coefs, shifts, p2s, nterms, j0, seed)
            for f in range(nf):
                s[f], comp[f] = _neumaier(s[f], comp[f], fac * seed[f])
        for f in range(nf):
            vals[i, f] = s[f] + comp[f]
        counts[i] = nrow
    return vals, dens, counts


@njit(parallel=True, cache=True)
def exp_series(zs, N, two_m, chi_re, chi_im, ns, radius):
    """sum over Gamma_inf \\ Gamma of conj(chi(d)) J(gamma,z)^{-2m} exp(2 pi i n gamma z) for each n."""
    npts = zs.shape[0]
    nn = ns.shape[0]
    vals = np.zeros((npts, nn), dtype=np.complex128)
    dens = np.zeros(npts)
    counts = np.zeros(npts, dtype=np.int64)
    for i in prange(npts):
        w0, ga, gb, gc, gd = reduce_point(zs[i])
        den_g = gc * w0 + gd
        dens[i] = abs(den_g)
        s = np.zeros(nn, dtype=np.complex128)
        comp = np.zeros(nn, dtype=np.complex128)
        x0 = w0.real
        y0 = w0.imag
        cm = _for_rows(w0, radius)
        nrow = 0
        id_done = False
        for cp in range(-cm, cm + 1):
            rad2 = radius * radius - (cp * y0) ** 2
            if rad2 < 0.0:
                continue
            rad = math.sqrt(rad2)
            lo = int(math.ceil(-cp * x0 - rad))
            hi = int(math.floor(-cp * x0 + rad))
            for dp in range(lo, hi + 1):
                ok, fac, mw = _row_factor(cp, dp, ga, gb, gc, gd, w0, den_g, N, two_m, chi_re, chi_im)
                if not ok:
                    continue
                if cp == gc and dp == gd:
                    id_done = True
                nrow += 1
                q = np.exp(2j * np.pi * mw)
                for t in range(nn):
                    s[t], comp[t] = _neumaier(s[t], comp[t], fac * q ** ns[t])
        if not id_done:
            ok, fac, mw = _row_factor(gc, gd, ga, gb, gc, gd, w0, den_g, N, two_m, chi_re, chi_im)
            nrow += 1
            q = np.exp(2j * np.pi * mw)
            for t in range(nn):
                s[t], comp[t] = _neumaier(s[t], comp[t], fac * q ** ns[t])
        for t in range(nn):
            vals[i, t] = s[t] + comp[t]
        counts[i] = nrow
    return vals, dens, counts
