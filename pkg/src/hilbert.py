"""Hilbert function, series and polynomial read off an involutive basis.

Involutive cones of a Janet (or finite Pommaret) basis are disjoint and cover
the initial ideal, so each generator u with m multiplicative variables adds
C(d - deg u + m - 1, m - 1) monomials of degree d.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .divisions import get_division
from .errors import PreconditionError
from .involutive import leading_monomials


@dataclass(frozen=True)
class HilbertSeries:
    n: int
    # (generator degree, number of multiplicative variables), one per cone
    cones: tuple

    def hilbert_fn(self, d):
        """Number of degree-d monomials in the initial ideal."""
        if d < 0:
            return 0
        total = 0
        for k, m in self.cones:
            if d < k:
                continue
            if m == 0:
                total += 1 if d == k else 0
            else:
                total += comb(d - k + m - 1, m - 1)
        return total

    def quotient_hilbert_fn(self, d):
        if d < 0:
            return 0
        return comb(self.n - 1 + d, d) - self.hilbert_fn(d)

    def numerator(self):
        """Coefficients (constant term first) of N(t) with HS_{R/I}(t) = N(t) / (1 - t)^n."""
        top = max((k + self.n - m for k, m in self.cones), default=0)
        coeffs = [0] * (top + 1)
        coeffs[0] = 1
        for k, m in self.cones:
            # t^k * (1 - t)^(n - m)
            e = self.n - m
            for i in range(e + 1):
                coeffs[k + i] -= (-1) ** i * comb(e, i)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return coeffs

    @property
    def max_degree(self):
        return max((k for k, _ in self.cones), default=0)


def _check_basis(U, division):
    table = division.separation(U)
    for u, _, nm in table:
        for x in nm:
            if division.divisor(u.mul_var(x), table) is None:
                raise PreconditionError(
                    f"Not an involutive basis: prolongation of {u!r} by variable {x + 1} leaves the cone")
    return table


def hilbert_series(G, division='janet'):
    U = list(dict.fromkeys(leading_monomials(G)))
    if not U:
        raise PreconditionError("Hilbert series needs a nonempty basis")
    if any(u.position for u in U):
        raise PreconditionError("Hilbert series is defined for ideals, not module terms")
    table = _check_basis(U, get_division(division))
    cones = tuple(sorted((u.degree, len(mult)) for u, mult, _ in table))
    logging.debug(f"Hilbert series from {len(cones)} disjoint cones")
    return HilbertSeries(n=len(U[0].exponents), cones=cones)


def hilbert_fn(G, d, division='janet'):
    return hilbert_series(G, division).hilbert_fn(d)


def quotient_hilbert_fn(G, d, division='janet'):
    return hilbert_series(G, division).quotient_hilbert_fn(d)


def _binomial_poly(shift, k):
    """Coefficients of C(d + shift, k) as a polynomial in d."""
    coeffs = [Fraction(1)]
    for i in range(k):
        a = shift - i
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for j, c in enumerate(coeffs):
            nxt[j] += c * a
            nxt[j + 1] += c
        coeffs = nxt
    scale = factorial(k)
    return [c / scale for c in coeffs]


def hilbert_polynomial(series):
    """Polynomial in d (constant term first) equal to the quotient Hilbert function for d > max_degree."""
    if not isinstance(series, HilbertSeries):
        series = hilbert_series(series)
    n = series.n
    acc = [Fraction(0)] * (n + 1)
    for j, c in enumerate(_binomial_poly(n - 1, n - 1)):
        acc[j] += c
    for k, m in series.cones:
        if m == 0:
            continue
        for j, c in enumerate(_binomial_poly(m - 1 - k, m - 1)):
            acc[j] -= c
    while acc and acc[-1] == 0:
        acc.pop()
    return acc


def krull_dimension(series):
    """Dimension of R/I; -1 for the unit ideal."""
    if not isinstance(series, HilbertSeries):
        series = hilbert_series(series)
    if any(k == 0 for k, _ in series.cones):
        return -1
    return len(hilbert_polynomial(series))


def format_polynomial_in(coeffs, var='d'):
    if not coeffs:
        return '0'
    parts = []
    for j in range(len(coeffs) - 1, -1, -1):
        c = coeffs[j]
        if c == 0:
            continue
        mag = -c if c < 0 else c
        text = str(mag) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        if j:
            body = var if j == 1 else f"{var}^{j}"
            text = body if mag == 1 else f"{text}*{body}"
        if not parts:
            parts.append(f"-{text}" if c < 0 else text)
        else:
            parts.append(f"- {text}" if c < 0 else f"+ {text}")
    return ' '.join(parts)
