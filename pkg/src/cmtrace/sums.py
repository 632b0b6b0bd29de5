"""Kloosterman sums, quadratic exponential sums, Bessel I, and the
Rademacher-type coefficient formula for weight-k Poincare series."""

from __future__ import annotations

import math
from math import cos, fsum, gcd, pi

import mpmath as mp

from .hp import RealHP, _ulp

# per-term evaluation noise for a cos(2*pi*rational) in float64
_COS_TERM_ERR = 5e-15


def kloosterman(m: int, n: int, c: int) -> RealHP:
    """K(m,n,c) = sum over primitive residues d (mod c) of
    e((m*dbar + n*d)/c).  Real by the d -> -d symmetry."""
    if c < 1:
        raise ValueError("c >= 1")
    if c == 1:
        return RealHP.exact(1, 53)
    terms = []
    count = 0
    for d in range(1, c):
        if gcd(d, c) != 1:
            continue
        dbar = pow(d, -1, c)
        r = (m * dbar + n * d) % c  # exact rational phase r/c in [0,1)
        terms.append(cos(2.0 * pi * r / c))
        count += 1
    val = fsum(terms)
    return RealHP(val, count * _COS_TERM_ERR + _ulp(abs(val) + 1.0, 53), 53)


def exp_sum_S(D: int, c: int) -> RealHP:
    """S(D,c) = sum over x (mod c) with x^2 = -D (mod c) of e(2x/c)."""
    if c < 1:
        raise ValueError("c >= 1")
    terms = []
    for x in range(c):
        if (x * x + D) % c == 0:
            r = (2 * x) % c
            terms.append(cos(2.0 * pi * r / c))
    val = fsum(terms)
    return RealHP(val, len(terms) * _COS_TERM_ERR + _ulp(abs(val) + 1.0, 53), 53)


def bessel_i(nu, x, precision: int = 53) -> RealHP:
    """Modified Bessel function of the first kind, certified.

    Power series for moderate arguments (all terms positive, so no
    cancellation at any size), asymptotic expansion with a first-omitted-
    term remainder for large ones; the half-integer closed form
    I_{1/2}(z) = sqrt(2/(pi z)) sinh(z) is used directly.
    """
    if x < 0:
        raise ValueError("x >= 0")
    if x == 0:
        return RealHP.exact(0 if nu > 0 else 1, precision)
    p = precision + 16
    if nu == 0.5:
        with mp.workprec(p):
            v = mp.sqrt(2 / (mp.pi * x)) * mp.sinh(x)
        return RealHP(v, 8 * _ulp(abs(float(v)), p), precision)
    if x > max(50.0, 4.0 * float(nu) * float(nu)):
        return _bessel_i_asymptotic(nu, x, precision)
    with mp.workprec(p):
        xm = mp.mpf(x)
        half = xm / 2
        term = half**nu / mp.gamma(nu + 1)
        total = term
        j = 0
        z = half * half
        while True:
            j += 1
            term = term * z / (j * (j + nu))
            total += term
            ratio = float(z / ((j + 1) * (j + 1 + nu)))
            if ratio < 1 and float(term) < 2.0 ** (-p) * float(total):
                break
        tail = float(term) * ratio / (1 - ratio)
        eb = tail + 4 * j * _ulp(float(total), p)
    return RealHP(total, eb, precision)


def _bessel_i_asymptotic(nu, x, precision: int) -> RealHP:
    # I_nu(x) ~ e^x/sqrt(2 pi x) * sum_k (-1)^k a_k(nu)/x^k,
    # a_k = prod_{i<k} (4nu^2-(2i+1)^2) / (k! 8^k); stop at the smallest
    # term, remainder bounded by it (terms alternate and decrease here)
    p = precision + 16
    with mp.workprec(p):
        xm = mp.mpf(x)
        mu = 4 * mp.mpf(nu) ** 2
        pref = mp.e**xm / mp.sqrt(2 * mp.pi * xm)
        term = mp.mpf(1)
        total = mp.mpf(0)
        k = 0
        while True:
            total += term
            nxt = term * -(mu - (2 * k + 1) ** 2) / ((k + 1) * 8 * xm)
            if abs(nxt) >= abs(term) or k > 40:
                break
            term = nxt
            k += 1
        val = pref * total
        eb = float(pref) * abs(float(term)) + 8 * _ulp(abs(float(val)), p)
    return RealHP(val, eb, precision)


def _poincare_tail_bound(k: int, m: int, n: int, C: int) -> float:
    # |K(m,n,c)| <= phi(c) < c and I_{k-1}(y) <= (y/2)^{k-1} e^{y^2/4}/(k-1)!
    # give  sum_{c>C} (1/c)|K| I_{k-1}(4 pi sqrt(mn)/c)
    #       <= (2 pi sqrt(mn))^{k-1}/(k-1)! * e^{4 pi^2 mn/C^2} / ((k-2) C^{k-2})
    y = 2.0 * pi * math.sqrt(m * n)
    return (
        y ** (k - 1)
        / math.factorial(k - 1)
        * math.exp(4.0 * pi * pi * m * n / (C * C))
        / ((k - 2) * C ** (k - 2))
    )


_POINCARE_C_CAP = 4000


def poincare_coeff(k: int, m: int, n: int, c_max: int, precision: int = 53) -> RealHP:
    """Coefficient a(n) of the weight-k Poincare series q^{-m} + O(q):

        a(n) = 2 pi (-1)^{k/2} (n/m)^{(k-1)/2}
               sum_{c>=1} (1/c) K(m,n,c) I_{k-1}(4 pi sqrt(mn)/c).

    The c-sum is evaluated exactly up to min(c_max, 4000); everything past
    that point (including the infinite tail beyond c_max) is absorbed into
    the certified error bound, which decays like C^{-(k-2)}.
    """
    if k % 2 or not (4 <= k <= 14):
        raise ValueError("k must be even, 4 <= k <= 14")
    if m < 1 or n < 1 or c_max < 1:
        raise ValueError("m, n, c_max >= 1")
    C = min(c_max, _POINCARE_C_CAP)
    xmn = 4.0 * pi * math.sqrt(m * n)
    vals = []
    errs = 0.0
    for c in range(1, C + 1):
        # unfolding q^{-m} against the weight-k slash action produces the
        # phase e((n d - m dbar)/c), i.e. the first Kloosterman index
        # enters with a minus sign
        kl = kloosterman(-m, n, c)
        bi = bessel_i(k - 1, xmn / c, 53)
        v = float(kl.value) / c * float(bi.value)
        vals.append(v)
        errs += (
            kl.error_bound / c * (float(bi.value) + bi.error_bound)
            + abs(float(kl.value)) / c * bi.error_bound
            + _ulp(abs(v), 53)
        )
    s = fsum(vals)
    tail = _poincare_tail_bound(k, m, n, C)
    pref = 2.0 * pi * (-1.0) ** (k // 2) * (n / m) ** ((k - 1) / 2.0)
    val = pref * s
    eb = abs(pref) * (errs + tail) + 4 * _ulp(abs(val), 53)
    return RealHP(val, eb, 53)
