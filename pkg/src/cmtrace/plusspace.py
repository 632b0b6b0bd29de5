"""Weakly holomorphic weight-3/2 forms on Gamma_0(4) in the plus space.

Fourier support condition: coefficients vanish unless n = 0, 3 (mod 4).
Every weakly holomorphic weight-3/2 form on Gamma_0(4) is theta^3 times a
rational function of the hauptmodul t = eta(tau)^8/eta(4tau)^8 with poles
supported at the cusps (t = infinity, 0, -16), so the ansatz space is

    theta^3 * ( C[t]  +  span{t^-j}  +  span{(t+16)^-m} )

(partial fractions; the three families are linearly independent).  Within
that space, a prescribed principal part plus the support condition pins
down at most one form; we solve the resulting linear system exactly over Q
and then verify the support condition through the requested order.
"""

from __future__ import annotations

from fractions import Fraction

from .series import QSeries, t_series, theta_series


class PlusSpaceRankError(Exception):
    pass


def _solve_exact(rows, rhs, n_unknowns):
    """Gaussian elimination over Q.

    Returns (solution, None) when the system has a unique solution,
    (None, reason) otherwise.
    """
    aug = [list(r) + [v] for r, v in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n_unknowns):
        piv = None
        for i in range(r, len(aug)):
            if aug[i][c]:
                piv = i
                break
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][n_unknowns]:
            return None, "inconsistent"
    if len(pivots) < n_unknowns:
        return None, f"rank {len(pivots)} < {n_unknowns} unknowns"
    x = [Fraction(0)] * n_unknowns
    for i, c in enumerate(pivots):
        x[c] = aug[i][n_unknowns]
    return x, None


def _seed_family(pole_order: int, depth: int, T: int):
    """theta^3 * {t^a, t^-j, (t+16)^-m} as q-series through exponent T."""
    margin = T + pole_order + 2
    th3 = theta_series(margin) ** 3
    t = t_series(margin)
    seeds = []
    power = QSeries.one().with_trunc(margin)
    for a in range(0, pole_order + 1):
        seeds.append((th3 * power).with_trunc(T))
        if a < pole_order:
            power = power * t
    tinv = t.reciprocal()
    power = QSeries.one().with_trunc(margin)
    for _ in range(depth):
        power = power * tinv
        seeds.append((th3 * power).with_trunc(T))
    sinv = (t + 16).reciprocal()
    power = QSeries.one().with_trunc(margin)
    for _ in range(depth):
        power = power * sinv
        seeds.append((th3 * power).with_trunc(T))
    return seeds


def plus_form(principal_part: dict, trunc: int) -> QSeries:
    """The unique plus-space form q-expansion with the given principal part
    {-m: a(-m), ...} at infinity, known through exponent `trunc`.

    Raises PlusSpaceRankError when no such form exists (e.g. a prescribed
    pole at an exponent outside the support condition) or when the solver
    cannot certify uniqueness.
    """
    pp = {}
    for e, c in principal_part.items():
        e = int(e)
        c = Fraction(c)
        if e >= 0:
            raise ValueError("principal part must have negative exponents")
        if c:
            pp[e] = c
    if not pp:
        return QSeries.zero(trunc)
    P = -min(pp)

    depth = P + 4
    t_solve = 40
    last_reason = ""
    for _ in range(5):
        n_unknowns = (P + 1) + 2 * depth
        T = max(trunc, t_solve) + 1
        seeds = _seed_family(P, depth, T)
        assert len(seeds) == n_unknowns
        rows, rhs = [], []
        for e in range(-P, 0):
            rows.append([s.coeff(e) for s in seeds])
            rhs.append(pp.get(e, Fraction(0)))
        for n in range(1, t_solve + 1):
            if n % 4 in (1, 2):
                rows.append([s.coeff(n) for s in seeds])
                rhs.append(Fraction(0))
        x, reason = _solve_exact(rows, rhs, n_unknowns)
        if x is None:
            if reason == "inconsistent":
                raise PlusSpaceRankError(
                    f"principal part {principal_part} is not attainable in the plus space"
                )
            last_reason = reason
            t_solve *= 2
            continue
        out = QSeries.zero(T)
        for coef, s in zip(x, seeds):
            if coef:
                out = out + coef * s
        bad = [
            n
            for n in range(1, T)
            if n % 4 in (1, 2) and out.coeff(n)
        ]
        if bad:
            # truncated system admitted a spurious solution; enlarge it
            last_reason = f"support violated at q^{bad[0]}"
            depth += 2
            t_solve = max(2 * t_solve, bad[0] + 8)
            continue
        for e in range(-P, 0):
            assert out.coeff(e) == pp.get(e, Fraction(0))
        return out.with_trunc(trunc)
    raise PlusSpaceRankError(f"solver did not stabilize: {last_reason}")
