"""Constant-coefficient linear differential systems as free-module elements.

A derivative d^a y_j corresponds to the module term [x^a]_j and
differentiation by x_i to multiplication by x_i, so Janet bases of systems
are computed on the encoded module and decoded back.
"""
import logging
from dataclasses import dataclass

from .errors import ContextError, InputError
from .involutive import BasisReport, involutive_nf, is_janet_basis, janet_basis, minimal_janet_basis
from .monomials import Monomial, MonomialOrdering, VarContext
from .polynomials import PolynomialRing, buchberger, check_same_ring


@dataclass(frozen=True)
class Derivative:
    unknown_index: int
    multi_index: Monomial

    @property
    def order(self):
        return self.multi_index.degree

    def term(self):
        return Monomial(self.multi_index.exponents, self.unknown_index)

    @classmethod
    def from_term(cls, u):
        return cls(u.position, Monomial(u.exponents))

    def differentiate(self, i):
        return Derivative(self.unknown_index, self.multi_index.mul_var(i))

    def format(self, ranking):
        name = ranking.unknowns[self.unknown_index - 1]
        if not self.multi_index.degree:
            return name
        xs = []
        for i, e in enumerate(self.multi_index.exponents):
            xs.extend([ranking.context.names[i]] * e)
        return f"{name}[{','.join(xs)}]"


class Ranking:
    """Ranking on derivatives: a monomial ordering on multi-indices combined with a position rule.

    Term-over-position ('top') compares multi-indices first; 'pot' compares
    unknowns first. position_order lists unknown indices from highest down.
    """

    def __init__(self, context, unknowns, kind='degrevlex', position_rule='top', position_order=None, field=None):
        if isinstance(context, (list, tuple)):
            context = VarContext(context)
        unknowns = tuple(str(u).strip() for u in unknowns)
        if not unknowns or len(set(unknowns)) != len(unknowns):
            raise ContextError(f"Unknown names must be nonempty and distinct: {', '.join(unknowns)}")
        clash = set(unknowns) & set(context.names)
        if clash:
            raise ContextError(f"Names used both as unknowns and variables: {', '.join(sorted(clash))}")
        self.context = context
        self.unknowns = unknowns
        self.m = len(unknowns)
        order = position_order or tuple(range(1, self.m + 1))
        self.ordering = MonomialOrdering(kind, context, position_rule, order)
        self.ring = PolynomialRing(context, self.ordering, field)
        self.plain_ring = PolynomialRing(context, kind, self.ring.field)

    @property
    def position_rule(self):
        return self.ordering.position_rule

    def unknown_index(self, name):
        try:
            return self.unknowns.index(name) + 1
        except ValueError:
            raise ContextError(f"Unknown function: {name}") from None

    def key(self, derivative):
        return self.ordering.key(derivative.term())

    def compare(self, a, b):
        return self.ordering.compare(a.term(), b.term())

    def __eq__(self, other):
        return isinstance(other, Ranking) and self.ring == other.ring and self.unknowns == other.unknowns

    def __hash__(self):
        return hash((self.ring, self.unknowns))

    def __repr__(self):
        return f"Ranking({self.ordering.kind}, {self.position_rule}; {', '.join(self.unknowns)})"


class LinearDiffPoly:
    """Linear homogeneous differential polynomial with constant coefficients.

    Terms are (Derivative, coefficient) pairs, descending under the ranking;
    the leading derivative comes first.
    """

    __slots__ = ('ranking', 'terms')

    def __init__(self, ranking, terms):
        self.ranking = ranking
        self.terms = tuple(terms)

    @classmethod
    def from_terms(cls, ranking, terms):
        module = ranking.ring.from_terms((d.term(), c) for d, c in terms)
        return decode(module, ranking)

    @property
    def leading_derivative(self):
        return self.terms[0][0] if self.terms else None

    ld = leading_derivative

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return isinstance(other, LinearDiffPoly) and self.ranking == other.ranking and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def format(self):
        if not self.terms:
            return '0'
        field = self.ranking.ring.field
        parts = []
        for d, c in self.terms:
            negative = field.characteristic == 0 and c < 0
            mag = -c if negative else c
            body = d.format(self.ranking)
            text = body if mag == field.one() else f"{field.format(mag)}*{body}"
            if not parts:
                parts.append(f"-{text}" if negative else text)
            else:
                parts.append(f"- {text}" if negative else f"+ {text}")
        return ' '.join(parts)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"LinearDiffPoly({self.format()})"


def linear_combination(ranking, products):
    """Build a LinearDiffPoly from (coefficient, [Derivative, ...]) products.

    Each product must hold exactly one derivative; anything else is not a
    linear homogeneous equation.
    """
    terms = []
    for c, factors in products:
        if len(factors) != 1:
            what = "constant term" if not factors else "product of derivatives"
            raise InputError(f"Nonlinear or inhomogeneous input: {what}")
        terms.append((factors[0], c))
    return LinearDiffPoly.from_terms(ranking, terms)


def encode(f):
    """Module element of f: a polynomial over positioned monomials."""
    return f.ranking.ring._from_dict({d.term(): c for d, c in f.terms})


def decode(p, ranking):
    ranking.ring.check(p.ring)
    return LinearDiffPoly(ranking, ((Derivative.from_term(u), c) for u, c in p.terms))


def components(f):
    """Vector view of encode(f): one ordinary polynomial per unknown."""
    ring = f.ranking.plain_ring
    acc = [dict() for _ in range(f.ranking.m)]
    for d, c in f.terms:
        acc[d.unknown_index - 1][d.multi_index] = c
    return [ring._from_dict(a) for a in acc]


def from_components(vector, ranking):
    if len(vector) != ranking.m:
        raise InputError(f"Expected {ranking.m} components, got {len(vector)}")
    terms = []
    for j, p in enumerate(vector, start=1):
        terms.extend((Derivative(j, u), c) for u, c in p.terms)
    return LinearDiffPoly.from_terms(ranking, terms)


def differentiate(f, variable):
    ranking = f.ranking
    i = variable if isinstance(variable, int) else ranking.context.index(variable)
    return decode(encode(f).mul_var(i), ranking)


def _encode_system(S):
    S = [f for f in S if f]
    if not S:
        raise InputError("Cannot compute a basis of the zero system")
    ranking = S[0].ranking
    for f in S[1:]:
        if f.ranking != ranking:
            raise ContextError("Differential polynomials use different rankings")
    encoded = [encode(f) for f in S]
    check_same_ring(encoded)
    return ranking, encoded


def _decode_report(report, ranking):
    return BasisReport(
        basis=[decode(g, ranking) for g in report.basis],
        division=report.division,
        is_minimal=report.is_minimal,
        finite_pommaret=report.finite_pommaret,
        stats=report.stats,
    )


def janet_basis_diff(S, use_criterion=True, autoreduction='pj', verify=True):
    ranking, encoded = _encode_system(S)
    logging.debug(f"Differential Janet basis: {len(encoded)} equations in {ranking.m} unknowns")
    return _decode_report(janet_basis(encoded, use_criterion, autoreduction, verify), ranking)


def minimal_janet_basis_diff(S):
    ranking, encoded = _encode_system(S)
    return _decode_report(minimal_janet_basis(encoded), ranking)


def groebner_diff(S):
    ranking, encoded = _encode_system(S)
    return [decode(g, ranking) for g in buchberger(encoded)]


def involutive_nf_diff(f, basis, division='janet'):
    """Involutive normal form of f modulo a differential basis; zero certifies f is a consequence."""
    basis = [g for g in basis if g]
    if not basis:
        return f
    return decode(involutive_nf(encode(f), [encode(g) for g in basis], division), f.ranking)


def is_janet_basis_diff(basis):
    return is_janet_basis([encode(g) for g in basis if g])
