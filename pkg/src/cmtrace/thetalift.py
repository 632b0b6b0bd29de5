"""Numerical theta lift against the Kudla-Millson kernel.

theta_kernel sums km_value over a dual coset of the lattice with a
certified Gaussian tail; theta_integral pairs the kernel with a weakly
holomorphic input over the modular curve; fourier_extract reads trace
coefficients off the lift; eisen_prediction gives the closed-form target
for the lift of the constant function.

All bulk numerics are float64/numpy in a fixed summation order (single
threaded, deterministic); the high-precision path (small tolerances, e.g.
vanishing certificates) runs the same enumeration under mpmath.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

import mpmath as mp
import numpy as np

from .analytic import _J_coeff_floats, _parse_fspec, beta_integral
from .hp import ComplexHP, RealHP
from .lattice import LatticeSpec, LatticeVector
from .qform import hurwitz
from .series import QSeries, j_series

_C = 1.0 / (2.0 * math.pi)


# ---------------------------------------------------------------------------
# majorant Gram data and the certified tail

def _majorant_gram(x: float, y: float, steps) -> np.ndarray:
    """Gram matrix of majorant(X, z) in the integer coordinates n with
    X = (s1 n1, s2 n2, s3 n3)."""
    zz = x * x + y * y
    A = np.array([
        [4 * x * x / (y * y) + 2.0, 2 * x / (y * y), -2 * x * zz / (y * y)],
        [2 * x / (y * y), 1.0 / (y * y), 1.0 - zz / (y * y)],
        [-2 * x * zz / (y * y), 1.0 - zz / (y * y), zz * zz / (y * y)],
    ])
    D = np.diag([float(s) for s in steps])
    return D @ A @ D


def _cholesky3(B):
    """B = L^T diag(q) L with unit upper-triangular L; returns
    (q1, q2, q3, a12, a13, a23)."""
    q1 = B[0][0]
    a12 = B[0][1] / q1
    a13 = B[0][2] / q1
    q2 = B[1][1] - q1 * a12 * a12
    a23 = (B[1][2] - q1 * a12 * a13) / q2
    q3 = B[2][2] - q1 * a13 * a13 - q2 * a23 * a23
    return q1, q2, q3, a12, a13, a23


def _tail_bound(T: float, v: float, qs) -> float:
    """sum over M(X) > T of (2vM + 1/2pi) e^{-pi v M}, via
    |km| <= (v s^2 + 1/2pi) e^{-pi v M} and s^2 <= 2M."""
    pref = 1.0
    for q in qs:
        pref *= 1.0 + math.sqrt(2.0 / (v * q))
    return (2 * v * T + _C) * math.exp(-math.pi * v * T / 2.0) * pref


def _pick_threshold(v: float, qs, tol: float) -> float:
    T = max(1.0, 2.0 / (math.pi * v) * math.log(1.0 / tol + 3.0))
    for _ in range(40):
        if _tail_bound(T, v, qs) <= tol:
            return T
        T += 1.0 + 1.0 / v
    raise RuntimeError("tail threshold search failed")


# permutation: enumerate x1 outer, x3 middle, x2 inner (x2 has the widest
# range in the fundamental domain, so it gets the vectorized axis)
_PERM = (1, 2, 0)  # local coords (m1, m2, m3) = (x2, x3, x1)


def _enumerate_qsums(spec: LatticeSpec, h: LatticeVector, v: float,
                     x: float, y: float, tol: float):
    """Coset sums of km over h + L at u = 0, grouped by q(X).

    Returns (qq0, sums, tail): sums[i] multiplies e(q u) with
    q = (qq0 + i)/4; tail is a certified bound on the dropped terms.
    """
    steps = [float(s) for s in spec.steps]
    B = _majorant_gram(x, y, spec.steps)
    Bp = B[np.ix_(_PERM, _PERM)]
    q1, q2, q3, a12, a13, a23 = _cholesky3(Bp.tolist())
    T = _pick_threshold(v, (q1, q2, q3), tol)
    tail = _tail_bound(T, v, (q1, q2, q3))

    # coset offset in local (integer-lattice) coordinates
    hh = (float(h.x1), float(h.x2), float(h.x3))
    c = [hh[_PERM[k]] / steps[_PERM[k]] for k in range(3)]
    s1, s2, s3 = steps
    zz = x * x + y * y

    qq_parts, t_parts = [], []
    r3 = math.sqrt(T / q3)
    for n3 in range(math.ceil(-c[2] - r3), math.floor(-c[2] + r3) + 1):
        m3 = n3 + c[2]
        rem2 = T - q3 * m3 * m3
        if rem2 < 0:
            continue
        r2 = math.sqrt(rem2 / q2)
        c2 = c[1] + a23 * m3
        for n2 in range(math.ceil(-c2 - r2), math.floor(-c2 + r2) + 1):
            m2 = n2 + c[1]
            rem1 = rem2 - q2 * (m2 + a23 * m3) ** 2
            if rem1 < 0:
                continue
            r1 = math.sqrt(rem1 / q1)
            # center of the m1-interval: m1 = -(a12 m2 + a13 m3)
            ctr = -(a12 * m2 + a13 * m3) - c[0]
            n1 = np.arange(math.ceil(ctr - r1), math.floor(ctr + r1) + 1.0)
            if n1.size == 0:
                continue
            # back to lattice coordinates
            x2v = (n1 + c[0]) * s2
            x3v = m2 * s3
            x1v = m3 * s1
            s_ = (2 * x * x1v + x2v - zz * x3v) / y
            qv = -x1v * x1v - x2v * x3v
            M = s_ * s_ + 2 * x1v * x1v + 2 * x2v * x3v
            keep = M <= T
            if not keep.all():
                s_, qv, M = s_[keep], qv[keep], M[keep]
            if s_.size == 0:
                continue
            t_parts.append((v * s_ * s_ - _C) * np.exp(-math.pi * v * M))
            qq_parts.append(np.rint(4.0 * qv).astype(np.int64))

    if not qq_parts:
        return 0, np.zeros(1), tail
    qq = np.concatenate(qq_parts)
    tv = np.concatenate(t_parts)
    qq0 = int(qq.min())
    sums = np.bincount(qq - qq0, weights=tv)
    return qq0, sums, tail


def _enumerate_sum_mp(spec: LatticeSpec, h: LatticeVector, tau, z, tol: float,
                      precision: int):
    """High-precision coset sum of km at tau, z (mp path).  Fixed order,
    returns (value mpc, certified error bound float)."""
    with mp.workprec(precision + 16):
        u, v = mp.mpf(tau.real), mp.mpf(tau.imag)
        xz = mp.mpc(z)
        x, y = xz.real, xz.imag
        B = _majorant_gram(float(x), float(y), spec.steps)
        Bp = B[np.ix_(_PERM, _PERM)]
        q1, q2, q3, a12, a13, a23 = _cholesky3(Bp.tolist())
        # threshold from float bound, with slack for the float Gram
        T = _pick_threshold(float(v), (q1 * 0.98, q2 * 0.98, q3 * 0.98), tol)
        tail = _tail_bound(T, float(v) * 0.99, (q1 * 0.98, q2 * 0.98, q3 * 0.98))

        steps = [mp.mpf(float(s)) for s in spec.steps]
        hh = (mp.mpf(float(h.x1)), mp.mpf(float(h.x2)), mp.mpf(float(h.x3)))
        zz = x * x + y * y
        two_pi_i = 2j * mp.pi
        c_ = 1 / (2 * mp.pi)

        total = mp.mpc(0)
        abssum = mp.mpf(0)
        count = 0
        c = [float(hh[_PERM[k]] / steps[_PERM[k]]) for k in range(3)]
        r3 = math.sqrt(T / q3)
        for n3 in range(math.ceil(-c[2] - r3), math.floor(-c[2] + r3) + 1):
            m3 = n3 + c[2]
            rem2 = T - q3 * m3 * m3
            if rem2 < 0:
                continue
            r2 = math.sqrt(rem2 / q2)
            c2 = c[1] + a23 * m3
            for n2 in range(math.ceil(-c2 - r2), math.floor(-c2 + r2) + 1):
                m2 = n2 + c[1]
                rem1 = rem2 - q2 * (m2 + a23 * m3) ** 2
                if rem1 < 0:
                    continue
                r1 = math.sqrt(rem1 / q1)
                ctr = -(a12 * m2 + a13 * m3) - c[0]
                for n1 in range(math.ceil(ctr - r1), math.floor(ctr + r1) + 1):
                    x2v = (n1 + hh[1] / steps[1]) * steps[1]
                    x3v = (n2 + hh[2] / steps[2]) * steps[2]
                    x1v = (n3 + hh[0] / steps[0]) * steps[0]
                    s_ = (2 * x * x1v + x2v - zz * x3v) / y
                    qx = -x1v * x1v - x2v * x3v
                    M = s_ * s_ + 2 * x1v * x1v + 2 * x2v * x3v
                    term = (v * s_ * s_ - c_) * mp.e ** (-mp.pi * v * M)
                    if u:
                        term = term * mp.e ** (two_pi_i * qx * u)
                    total += term
                    abssum += abs(mp.mpf(term.real)) + abs(mp.mpf(term.imag))
                    count += 1
        rnd = float(abssum) * (count + 8) * 2.0 ** (-(precision + 16) + 4)
    return total, tail + rnd


def _resolve_h(spec: LatticeSpec, h):
    if isinstance(h, LatticeVector):
        return h
    cs = spec.cosets()
    if not isinstance(h, int) or not 0 <= h < len(cs):
        raise ValueError(f"h must be a coset index in 0..{len(cs) - 1} or a LatticeVector")
    return cs[h]


def theta_kernel(h, tau, z, tol: float = 1e-10, spec: LatticeSpec = None,
                 precision: int = None) -> ComplexHP:
    """Sum of km_value over the dual coset h + L, with certified truncation
    error <= tol.  Float64 path for ordinary tolerances, mpmath otherwise."""
    if spec is None:
        spec = LatticeSpec.level4()
    hv = _resolve_h(spec, h)
    tt = complex(tau.value) if isinstance(tau, ComplexHP) else complex(tau)
    zz = complex(z.value) if isinstance(z, ComplexHP) else complex(z)
    if tt.imag <= 0 or zz.imag <= 0:
        raise ValueError("Im tau and Im z must be positive")
    if tol <= 0:
        raise ValueError("tol > 0 required")

    if tol >= 1e-12 and precision is None:
        qq0, sums, tail = _enumerate_qsums(spec, hv, tt.imag, zz.real, zz.imag, tol)
        qq = (qq0 + np.arange(sums.size)) / 4.0
        val = complex(np.sum(sums * np.exp(2j * math.pi * qq * tt.real)))
        err = tail + 1e-14 * (float(np.abs(sums).sum()) + 1.0)
        return ComplexHP(mp.mpc(val), err, 53)

    prec = precision or max(64, int(-math.log2(tol)) + 48)
    val, err = _enumerate_sum_mp(spec, hv, tt, zz, tol, prec)
    return ComplexHP(val, err, prec)


# ---------------------------------------------------------------------------
# the regularized pairing over the modular curve

def _f_grid_evaluator(f_spec):
    """(f_vals(x, y) -> complex ndarray, pole order n0, |leading|).

    Accepts the constant "1" or polynomials in j with vanishing constant
    term (checked exactly), as in the trace machinery.
    """
    label, coeffs, qexp, deg = _parse_fspec(f_spec)
    if qexp is not None:
        raise ValueError("theta integration wants '1' or a polynomial in j")
    if deg == 0:
        cst = float(coeffs[0])

        def f_const(x, y):
            return np.full_like(np.asarray(x, dtype=float), cst) + 0j

        return f_const, 0, abs(cst)

    js = j_series(deg + 2)
    fs = QSeries({0: coeffs[-1]}, deg + 2)
    for c in reversed(coeffs[:-1]):
        fs = fs * js + QSeries({0: c}, deg + 2)
    if fs.coeff(0) != 0:
        raise ValueError("input must have vanishing constant term (or be constant 1)")

    fc = [float(c) for c in coeffs]
    jc = [float(c) for c in _J_coeff_floats(28)]

    def f_vals(x, y):
        q = np.exp(2j * np.pi * (np.asarray(x) + 1j * np.asarray(y)))
        tail = np.zeros_like(q)
        for c in reversed(jc):
            tail = (tail + c) * q
        jv = 1.0 / q + 744.0 + tail
        out = np.zeros_like(q)
        for c in reversed(fc):
            out = out * jv + c
        return out

    return f_vals, deg, abs(fc[-1])


def _strip_bound(Y: float, v: float, n0: int, alead: float) -> float:
    # x-integrated kernel modes are O(y^3 e^{-pi y^2 / v}); they pair with
    # input modes growing like e^{2 pi n0 y}.  Constant 20 is a margin,
    # validated by the Y vs Y+1 comparison test.
    return 20.0 * (1 + 1 / v) ** 2 * max(alead, 1.0) * (1 + Y ** 3) * math.exp(
        2 * math.pi * n0 * Y - math.pi * Y * Y / v)


def _strip_cutoff(v: float, n0: int, alead: float, tol: float) -> float:
    Y = max(3.0, 2.0 * v * n0 + 2.0)
    while Y < 20.0 and _strip_bound(Y, v, n0, alead) >= tol / 4:
        Y += 0.5
    return Y


def _integral_profile(h, v: float, f_spec, tol: float, us, spec: LatticeSpec,
                      y_top: float = None):
    """I_h(u_j + i v) for every u_j in us, sharing one quadrature pass.

    Returns (values complex ndarray, certified-ish error bound float).
    The domain is folded onto x >= 0 (kernel is even in x together with
    X -> (x1, -x2, -x3) ... net: theta(tau, -zbar) = theta(tau, z)), so the
    input enters through 2 Re f.
    """
    hv = _resolve_h(spec, h)
    f_vals, n0, alead = _f_grid_evaluator(f_spec)
    Y = y_top if y_top is not None else _strip_cutoff(v, n0, alead, tol)
    us = np.asarray(us, dtype=float)

    panels = [("arc", 0.0, 1.0)]
    yk = 1.0
    while yk < Y:
        panels.append(("rect", yk, min(yk + 1.0, Y)))
        yk += 1.0

    vals = np.zeros(us.size, dtype=complex)
    err = _strip_bound(Y, v, n0, alead)

    for kind, ya, yb in panels:
        base = _panel_quad(kind, ya, yb, 12, hv, v, f_vals, tol, us, spec)
        fine = _panel_quad(kind, ya, yb, 18, hv, v, f_vals, tol, us, spec)
        change = float(np.abs(fine[0] - base[0]).max())
        if change > tol / 6:
            base = fine
            fine = _panel_quad(kind, ya, yb, 27, hv, v, f_vals, tol, us, spec)
            change = float(np.abs(fine[0] - base[0]).max())
        vals += fine[0]
        err += change + fine[1]
    return vals, err


def _panel_quad(kind, ya, yb, n, hv, v, f_vals, tol, us, spec):
    """Tensor Gauss-Legendre over one panel; returns (I_j contributions,
    kernel-truncation error pushed through the measure)."""
    gx, wx = np.polynomial.legendre.leggauss(n)
    gy, wy = np.polynomial.legendre.leggauss(n)
    xs = 0.25 * (gx + 1.0)
    wxs = 0.25 * wx
    out = np.zeros(us.size, dtype=complex)
    kerr = 0.0
    for xi, wxi in zip(xs, wxs):
        if kind == "arc":
            y0 = math.sqrt(1.0 - xi * xi)
            y1 = 1.0
        else:
            y0, y1 = ya, yb
        ys = 0.5 * (y1 - y0) * (gy + 1.0) + y0
        wys = 0.5 * (y1 - y0) * wy
        fv = f_vals(np.full_like(ys, xi), ys)
        for yj, wyj, fj in zip(ys, wys, fv):
            w = 2.0 * wxi * wyj / (yj * yj)  # fold + measure
            tol_node = tol * yj * yj / (40.0 * (1.0 + abs(fj.real)))
            qq0, sums, tail = _enumerate_qsums(spec, hv, v, xi, yj, tol_node)
            qq = (qq0 + np.arange(sums.size)) / 4.0
            theta_js = np.exp(2j * math.pi * np.outer(us, qq)) @ sums
            out += w * fj.real * theta_js
            kerr += abs(w * fj.real) * tail
    return out, kerr


def theta_integral(h, tau, f_spec, tol: float = 1e-4,
                   spec: LatticeSpec = None) -> ComplexHP:
    """Regularized integral of f(z) theta_h(tau, z) over the modular curve
    (raw normalization: Fourier coefficients are twice the CM traces,
    the +-X pairs of the kernel both contributing)."""
    if spec is not None and spec.name != "level4":
        raise NotImplementedError("integration is wired for the level-4 lattice")
    spec = LatticeSpec.level4()
    tt = complex(tau.value) if isinstance(tau, ComplexHP) else complex(tau)
    if tt.imag < 0.5:
        raise ValueError("Im tau >= 1/2 required by the truncation design")
    vals, err = _integral_profile(h, tt.imag, f_spec, tol, [tt.real], spec)
    return ComplexHP(mp.mpc(complex(vals[0])), err, 53)


def fourier_extract(h, m, v: float, f_spec, grid_size: int = 8,
                    tol: float = 1e-3, spec: LatticeSpec = None) -> RealHP:
    """Coefficient of e(m tau) in the trace-normalized lift component h,
    via a DFT over grid_size equispaced u values at height v.

    m must lie in q(h) + Z; the raw integral carries twice the trace, and
    the 1/2 is applied here.
    """
    if spec is not None and spec.name != "level4":
        raise NotImplementedError("integration is wired for the level-4 lattice")
    spec = LatticeSpec.level4()
    if grid_size < 8:
        raise ValueError("grid_size >= 8 required")
    if v < 0.5:
        raise ValueError("v >= 1/2 required")
    hv = _resolve_h(spec, h)
    mf = Fraction(m).limit_denominator(64) if not isinstance(m, Fraction) else Fraction(m)
    if (mf - Fraction(hv.q())) % 1 != 0:
        raise ValueError(f"m = {m} is not congruent to q(h) mod 1")

    _, n0, _ = _f_grid_evaluator(f_spec)
    # principal-part aliasing: poles of the lift sit at exponents >= -n0^2/4
    for k in range(1, 4):
        cand = mf - k * grid_size
        if -Fraction(n0 * n0, 4) <= cand < 0:
            warnings.warn("grid_size aliases a principal-part exponent; "
                          "increase grid_size", stacklevel=2)

    us = np.arange(grid_size) / grid_size
    vals, err = _integral_profile(h, v, f_spec, tol, us, spec)
    phases = np.exp(-2j * math.pi * float(mf) * us)
    raw = complex(np.sum(vals * phases)) / grid_size
    amp = math.exp(2 * math.pi * float(mf) * v)
    # alias of the next coefficient in the same coset class
    alias = math.exp(2 * math.pi * math.sqrt(4.0 * (float(mf) + grid_size))
                     - 2 * math.pi * grid_size * v)
    value = 0.5 * raw.real * amp
    bound = 0.5 * (err + abs(raw.imag)) * amp + alias
    return RealHP(mp.mpf(value), bound, 53)


# ---------------------------------------------------------------------------
# Eisenstein prediction for the lift of the constant

def eisen_prediction(tau, tol: float = 1e-10) -> ComplexHP:
    """Closed form the averaged lift of the constant must match:

        P(sigma) = sum_D H(D) e(D sigma / 4)
                 + (1 / (8 pi sqrt(v))) sum_{N in Z} beta(pi N^2 v) e(-N^2 sigma / 4)

    with H the Hurwitz class numbers (H(0) = -1/12) and
    beta(s) = integral_1^infty t^{-3/2} e^{-s t} dt."""
    tt = complex(tau.value) if isinstance(tau, ComplexHP) else complex(tau)
    v = tt.imag
    if v < 0.3:
        raise ValueError("Im tau >= 0.3 required")
    if tol <= 0:
        raise ValueError("tol > 0 required")

    err = 0.0
    with mp.workprec(80):
        sig = mp.mpc(tt)
        r = math.exp(-math.pi * v / 2.0)
        Dmax = 8
        while Dmax * r ** Dmax / (1 - r) ** 2 * 2 >= tol / 4:
            Dmax += 4
        total = mp.mpc(0)
        for D in range(0, Dmax + 1):
            if D % 4 in (1, 2):
                continue
            H = hurwitz(D)
            if D and not abs(H) <= D:  # tail bound uses H(D) <= D
                raise AssertionError("class number bound violated")
            total += mp.mpf(H.numerator) / H.denominator * mp.e ** (
                2j * mp.pi * D * sig / 4)
        err += 2 * Dmax * r ** Dmax / (1 - r) ** 2  # geometric tail, H(D) <= D

        Nmax = 1
        while 8 * math.exp(-math.pi * Nmax * Nmax * v / 2.0) >= tol / 4:
            Nmax += 1
        pref = 1 / (8 * mp.pi * mp.sqrt(mp.mpf(v)))
        for N in range(-Nmax, Nmax + 1):
            b = beta_integral(math.pi * N * N * v, precision=70)
            total += pref * mp.mpf(b.value) * mp.e ** (-2j * mp.pi * N * N * sig / 4)
            err += float(pref) * b.error_bound
        err += 8 * math.exp(-math.pi * Nmax * Nmax * v / 2.0) * float(pref)
        out = ComplexHP(total, err + 1e-16 * (1 + abs(complex(total))), 53)
    return out
