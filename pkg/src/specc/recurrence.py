"""Guess-and-verify discovery of P-recurrences for counting sequences.

A recurrence of order r and degree d is ``sum_i p_i(n) u(n - i) = 0`` with
integer polynomials ``p_0..p_r`` of degree <= d.  Candidates are tried by
increasing order, then degree; each is fitted by an exact rational null-space
computation on all but a holdout tail of the equations, then checked against
the holdout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InsufficientTermsError


@dataclass(frozen=True)
class Recurrence:
    """``coeffs[i][j]`` is the coefficient of ``n**j`` in ``p_i``.

    The relation holds for every ``n >= offset`` (indices of the original
    term list, leading zeros included).
    """

    coeffs: tuple
    offset: int = 0

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        return max((len(p) - 1 - _trailing_zeros(p) for p in self.coeffs), default=0)

    def poly(self, i: int, n: int) -> int:
        return sum(c * n**j for j, c in enumerate(self.coeffs[i]))

    def residual(self, terms: Sequence[int], n: int) -> int:
        return sum(self.poly(i, n) * terms[n - i] for i in range(self.order + 1))

    def render(self) -> str:
        return render_recurrence(self)

    def __str__(self):
        return self.render()


def _trailing_zeros(p) -> int:
    k = 0
    for c in reversed(p):
        if c:
            break
        k += 1
    return min(k, len(p) - 1)


def required_terms(max_order: int, max_degree: int) -> int:
    holdout = 2 * (max_order + max_degree)
    return (max_order + 1) * (max_degree + 1) + max_order + holdout


def nullspace(rows: list, ncols: int) -> list:
    """Basis of the right null space over Q, one vector per free column (RREF order)."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -m[row][fc]
        basis.append(v)
    return basis


def _normalize(vec: list, order: int, degree: int) -> Optional[tuple]:
    den = math.lcm(*(x.denominator for x in vec))
    ints = [int(x * den) for x in vec]
    g = math.gcd(*ints)
    if g == 0:
        return None
    ints = [x // g for x in ints]
    w = degree + 1
    polys = [ints[i * w:(i + 1) * w] for i in range(order + 1)]
    p0 = polys[0]
    lead = next((c for c in reversed(p0) if c), 0)
    if lead == 0:
        return None
    if lead < 0:
        polys = [[-c for c in p] for p in polys]
    return tuple(tuple(p) for p in polys)


def _equation(terms, n: int, order: int, degree: int) -> list:
    return [n**j * terms[n - i] for i in range(order + 1) for j in range(degree + 1)]


def guess_recurrence(terms: Sequence[int], max_order: int = 2,
                     max_degree: int = 2) -> Optional[Recurrence]:
    """Minimal (order, then degree) P-recurrence fitting ``terms`` exactly, or None."""
    terms = list(terms)
    z = next((i for i, t in enumerate(terms) if t != 0), len(terms))
    useful = len(terms) - z
    need = required_terms(max_order, max_degree)
    if useful < need:
        raise InsufficientTermsError(
            f"need at least {need} terms after {z} leading zeros for order<={max_order}, "
            f"degree<={max_degree}; got {useful}")
    holdout = 2 * (max_order + max_degree)
    for r in range(1, max_order + 1):
        ns = range(z + r, len(terms))
        fit_ns, check_ns = ns[:len(ns) - holdout], ns[len(ns) - holdout:]
        for d in range(max_degree + 1):
            rows = [_equation(terms, n, r, d) for n in fit_ns]
            found = []
            for vec in nullspace(rows, (r + 1) * (d + 1)):
                coeffs = _normalize(vec, r, d)
                if coeffs is None:
                    continue
                rec = Recurrence(coeffs, z + r)
                if all(rec.residual(terms, n) == 0 for n in check_ns):
                    found.append(rec)
            if found:
                return min(found, key=lambda rec: rec.coeffs)
    return None


def verify(rec: Recurrence, terms: Sequence[int]) -> bool:
    """True iff the relation holds at every index ``n >= max(offset, order)`` of ``terms``.

    Vacuously true when ``len(terms) <= order``.
    """
    start = max(rec.offset, rec.order)
    return all(rec.residual(terms, n) == 0 for n in range(start, len(terms)))


def recurrence_for(sys, cls, N: int, max_order: int = 2, max_degree: int = 2,
                   mode: Optional[str] = None) -> Optional[Recurrence]:
    """Guess a recurrence from ``series(sys, cls, N)`` and re-check it on all terms."""
    from .counter import series

    terms = series(sys, cls, N, mode)
    rec = guess_recurrence(terms, max_order, max_degree)
    if rec is not None and not verify(rec, terms):
        raise AssertionError("guessed recurrence failed verification on its own input")
    return rec


# -- rendering ----------------------------------------------------------------


def _render_poly(p) -> str:
    """Polynomial in n with positive leading coefficient and content 1."""
    parts = []
    for j in range(len(p) - 1, -1, -1):
        c = p[j]
        if c == 0:
            continue
        mono = "" if j == 0 else ("n" if j == 1 else f"n^{j}")
        mag = abs(c)
        if mono:
            body = mono if mag == 1 else f"{mag}*{mono}"
        else:
            body = str(mag)
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


def _render_term(p, i: int):
    """(sign, text) for ``p_i(n) * u(n - i)``; None when p_i is zero."""
    nz = [c for c in p if c]
    if not nz:
        return None
    g = math.gcd(*nz)
    lead = next(c for c in reversed(p) if c)
    sign = 1 if lead > 0 else -1
    q = [sign * c // g for c in p]
    u = "u(n)" if i == 0 else f"u(n - {i})"
    qs = _render_poly(q)
    if qs == "1":
        factor = ""
    elif sum(1 for c in q if c) == 1:
        factor = qs + "*"
    else:
        factor = f"({qs})*"
    text = f"{g}*{factor}{u}" if g != 1 else f"{factor}{u}"
    return sign, text


def render_recurrence(rec: Recurrence) -> str:
    """Canonical text such as ``(n + 1)*u(n) - 2*(2*n - 1)*u(n - 1) = 0``."""
    out = []
    for i, p in enumerate(rec.coeffs):
        t = _render_term(p, i)
        if t is None:
            continue
        sign, text = t
        if not out:
            out.append(text if sign > 0 else f"-{text}")
        else:
            out.append(("+ " if sign > 0 else "- ") + text)
    return " ".join(out) + " = 0"
