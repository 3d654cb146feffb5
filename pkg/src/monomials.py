from enum import Enum
from functools import lru_cache

from .errors import ContextError, DomainError

MAX_EXPONENT = 2 ** 31 - 1
KEY_CACHE_SIZE = 1 << 16

ORDERINGS = ('lex', 'deglex', 'degrevlex')
POSITION_RULES = ('top', 'pot')


class Relation(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class VarContext:
    """Ordered variable list; position 0 holds the highest variable x1."""

    __slots__ = ('names', 'n', '_index')

    def __init__(self, names):
        names = tuple(str(name).strip() for name in names)
        if not names:
            raise ContextError("Variable list must not be empty")
        if any(not name for name in names):
            raise ContextError("Variable names must be nonempty")
        if len(set(names)) != len(names):
            raise ContextError(f"Variable names must be distinct: {', '.join(names)}")
        self.names = names
        self.n = len(names)
        self._index = {name: i for i, name in enumerate(names)}

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise ContextError(f"Unknown variable: {name}") from None

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, VarContext) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarContext({', '.join(self.names)})"


class Monomial:
    """Exponent vector, optionally tagged with a free-module position (0 = none)."""

    __slots__ = ('exponents', 'position', 'degree', '_hash')

    def __init__(self, exponents, position=0):
        exponents = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exponents):
            raise DomainError(f"Negative exponent in {exponents}")
        degree = sum(exponents)
        if degree > MAX_EXPONENT:
            raise DomainError(f"Exponent overflow in {exponents}")
        self.exponents = exponents
        self.position = int(position)
        self.degree = degree
        self._hash = hash((exponents, self.position))

    @classmethod
    def _make(cls, exponents, position, degree):
        if degree > MAX_EXPONENT:
            raise DomainError("Exponent overflow")
        u = object.__new__(cls)
        u.exponents = exponents
        u.position = position
        u.degree = degree
        u._hash = hash((exponents, position))
        return u

    @classmethod
    def one(cls, n, position=0):
        return cls._make((0,) * n, position, 0)

    @classmethod
    def variable(cls, i, n):
        exps = [0] * n
        exps[i] = 1
        return cls._make(tuple(exps), 0, 1)

    @property
    def n(self):
        return len(self.exponents)

    def is_one(self):
        return self.degree == 0

    def deg_i(self, i):
        return self.exponents[i]

    def support(self):
        return frozenset(i for i, e in enumerate(self.exponents) if e)

    def cls(self):
        """Index of the lowest variable present (Pommaret class); n for the monomial 1."""
        for i in range(len(self.exponents) - 1, -1, -1):
            if self.exponents[i]:
                return i
        return len(self.exponents)

    def divides(self, other):
        if self.position != other.position:
            return False
        if self.degree > other.degree:
            return False
        for a, b in zip(self.exponents, other.exponents):
            if a > b:
                return False
        return True

    def quotient(self, divisor):
        if len(divisor.exponents) != len(self.exponents):
            raise ContextError("Monomials over different variable counts")
        if not divisor.divides(self):
            raise DomainError(f"{divisor!r} does not divide {self!r}")
        exps = tuple(a - b for a, b in zip(self.exponents, divisor.exponents))
        return Monomial._make(exps, 0, self.degree - divisor.degree)

    def mul(self, other):
        if len(other.exponents) != len(self.exponents):
            raise ContextError("Monomials over different variable counts")
        if self.position and other.position:
            raise ContextError("Cannot multiply two module terms")
        exps = tuple(a + b for a, b in zip(self.exponents, other.exponents))
        return Monomial._make(exps, self.position or other.position, self.degree + other.degree)

    def mul_var(self, i):
        exps = list(self.exponents)
        exps[i] += 1
        return Monomial._make(tuple(exps), self.position, self.degree + 1)

    def lcm(self, other):
        if len(other.exponents) != len(self.exponents):
            raise ContextError("Monomials over different variable counts")
        if self.position != other.position:
            raise ContextError("lcm of terms in different module positions")
        exps = tuple(a if a > b else b for a, b in zip(self.exponents, other.exponents))
        return Monomial._make(exps, self.position, sum(exps))

    def format(self, context, unknowns=None):
        if context.n != len(self.exponents):
            raise ContextError(f"Monomial has {len(self.exponents)} exponents, context has {context.n}")
        factors = []
        for name, e in zip(context.names, self.exponents):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        text = '*'.join(factors) if factors else '1'
        if self.position:
            label = unknowns[self.position - 1] if unknowns else f"e{self.position}"
            text = f"[{text}]_{label}"
        return text

    def __eq__(self, other):
        return (isinstance(other, Monomial) and self.exponents == other.exponents
                and self.position == other.position)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.position:
            return f"Monomial({self.exponents}, position={self.position})"
        return f"Monomial({self.exponents})"


def _lex_key(u):
    return u.exponents


def _deglex_key(u):
    return (u.degree,) + u.exponents


def _degrevlex_key(u):
    # On a degree tie the smaller exponent in the last differing variable wins.
    return (u.degree,) + tuple(-e for e in reversed(u.exponents))


_BASE_KEYS = {'lex': _lex_key, 'deglex': _deglex_key, 'degrevlex': _degrevlex_key}


class MonomialOrdering:
    """Admissible ordering compatible with x1 > x2 > ... > xn.

    Sort keys are tuples of integers, so a negated key orders a min-heap
    from the largest monomial down.
    """

    __slots__ = ('kind', 'context', 'position_rule', 'position_order', '_base', '_rank', '_cached_key', '_cached_neg_key')

    def __init__(self, kind, context, position_rule='top', position_order=None):
        if kind not in _BASE_KEYS:
            raise ContextError(f"Unknown ordering '{kind}', expected one of {', '.join(ORDERINGS)}")
        if position_rule not in POSITION_RULES:
            raise ContextError(f"Unknown position rule '{position_rule}'")
        self.kind = kind
        self.context = context
        self.position_rule = position_rule
        self.position_order = tuple(position_order) if position_order else ()
        if sorted(self.position_order) != list(range(1, len(self.position_order) + 1)):
            raise ContextError(f"Position order must be a permutation of 1..m: {self.position_order}")
        # Earlier in position_order means higher.
        m = len(self.position_order)
        self._rank = {p: m - i for i, p in enumerate(self.position_order)}
        self._rank[0] = 0
        self._base = _BASE_KEYS[kind]
        self._cached_key = lru_cache(maxsize=KEY_CACHE_SIZE)(self._compute_key)
        self._cached_neg_key = lru_cache(maxsize=KEY_CACHE_SIZE)(self._compute_neg_key)

    def _compute_key(self, u):
        if len(u.exponents) != self.context.n:
            raise ContextError(f"Monomial {u!r} does not belong to {self.context!r}")
        base = self._base(u)
        if not self.position_order:
            return base
        rank = self._rank.get(u.position)
        if rank is None:
            raise ContextError(f"Position {u.position} outside 1..{len(self.position_order)}")
        return base + (rank,) if self.position_rule == 'top' else (rank,) + base

    def _compute_neg_key(self, u):
        return tuple(-c for c in self._cached_key(u))

    def key(self, u):
        return self._cached_key(u)

    def neg_key(self, u):
        return self._cached_neg_key(u)

    def compare(self, u, v):
        ku, kv = self.key(u), self.key(v)
        if ku == kv:
            return Relation.EQUAL
        return Relation.GREATER if ku > kv else Relation.LESS

    def less(self, u, v):
        return self.key(u) < self.key(v)

    def sorted_desc(self, monomials):
        return sorted(monomials, key=self.key, reverse=True)

    def max(self, monomials):
        return max(monomials, key=self.key)

    def min(self, monomials):
        return min(monomials, key=self.key)

    @property
    def module_rank(self):
        return len(self.position_order)

    def __eq__(self, other):
        return (isinstance(other, MonomialOrdering) and self.kind == other.kind
                and self.context == other.context and self.position_rule == other.position_rule
                and self.position_order == other.position_order)

    def __hash__(self):
        return hash((self.kind, self.context, self.position_rule, self.position_order))

    def __repr__(self):
        return f"MonomialOrdering({self.kind}, {', '.join(self.context.names)})"


def compare(ordering, u, v):
    return ordering.compare(u, v)


def divides(u, v):
    return u.divides(v)


def quotient(v, u):
    return v.quotient(u)


def lcm(u, v):
    return u.lcm(v)


def mul(u, v):
    return u.mul(v)


def deg_i(u, i):
    return u.deg_i(i)


def monomials_of_degree(n, d, position=0):
    """All exponent vectors of total degree d in n variables."""
    if n == 0:
        if d == 0:
            yield Monomial._make((), position, 0)
        return

    def rec(i, remaining, prefix):
        if i == n - 1:
            yield prefix + (remaining,)
            return
        for e in range(remaining, -1, -1):
            yield from rec(i + 1, remaining - e, prefix + (e,))

    for exps in rec(0, d, ()):
        yield Monomial._make(exps, position, d)


def monomials_up_to(n, maxdeg, variables=None, position=0):
    """Monomials of degree <= maxdeg supported on the given variable indices."""
    variables = sorted(range(n) if variables is None else variables)
    k = len(variables)
    for d in range(maxdeg + 1):
        for sub in monomials_of_degree(k, d):
            exps = [0] * n
            for idx, e in zip(variables, sub.exponents):
                exps[idx] = e
            yield Monomial._make(tuple(exps), position, d)
