import heapq
import itertools
import logging

from .errors import ContextError, DomainError
from .fields import RationalField
from .monomials import MAX_EXPONENT, Monomial, MonomialOrdering


class PolynomialRing:
    """Variables, admissible ordering and coefficient field shared by a family of polynomials."""

    __slots__ = ('context', 'ordering', 'field')

    def __init__(self, context, ordering='degrevlex', field=None):
        if not isinstance(ordering, MonomialOrdering):
            ordering = MonomialOrdering(ordering, context)
        if ordering.context != context:
            raise ContextError("Ordering is defined over a different variable list")
        self.context = context
        self.ordering = ordering
        self.field = field if field is not None else RationalField()

    @property
    def n(self):
        return self.context.n

    def zero(self):
        return Polynomial(self, ())

    def one(self):
        return self.monomial(Monomial.one(self.n))

    def monomial(self, u, coefficient=1):
        c = self.field.convert(coefficient)
        if c == 0:
            return self.zero()
        return Polynomial(self, ((u, c),))

    def variable(self, i):
        return self.monomial(Monomial.variable(i, self.n))

    def constant(self, value):
        return self.monomial(Monomial.one(self.n), value)

    def from_terms(self, terms):
        """Build a canonical polynomial from (Monomial, coefficient) pairs in any order."""
        field = self.field
        acc = {}
        for u, c in terms:
            c = field.convert(c)
            if u in acc:
                acc[u] = field.add(acc[u], c)
            else:
                acc[u] = c
        return self._from_dict(acc)

    def _from_dict(self, acc):
        items = [(u, c) for u, c in acc.items() if c != 0]
        items.sort(key=lambda t: self.ordering.key(t[0]), reverse=True)
        return Polynomial(self, tuple(items))

    def check(self, other):
        if other is self:
            return
        if self.context != other.context or self.ordering != other.ordering:
            raise ContextError("Polynomials belong to different rings")
        self.field.check_same(other.field)

    def __eq__(self, other):
        return (isinstance(other, PolynomialRing) and self.context == other.context
                and self.ordering == other.ordering and self.field == other.field)

    def __hash__(self):
        return hash((self.context, self.ordering, self.field))

    def __repr__(self):
        return f"PolynomialRing({', '.join(self.context.names)}; {self.ordering.kind}; {self.field!r})"


class Polynomial:
    """Immutable term list, strictly descending under the ring ordering; () is zero."""

    __slots__ = ('ring', 'terms', '_hash')

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms
        self._hash = None

    @property
    def lm(self):
        return self.terms[0][0] if self.terms else None

    @property
    def lc(self):
        return self.terms[0][1] if self.terms else None

    def supp(self):
        return [u for u, _ in self.terms]

    def tail(self):
        return Polynomial(self.ring, self.terms[1:])

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degree(self):
        return max((u.degree for u, _ in self.terms), default=-1)

    def coefficient(self, u):
        for v, c in self.terms:
            if v == u:
                return c
        return self.ring.field.zero()

    def _combine(self, other, scale):
        self.ring.check(other.ring)
        field = self.ring.field
        acc = dict(self.terms)
        for u, c in other.terms:
            c = field.mul(scale, c)
            if u in acc:
                acc[u] = field.add(acc[u], c)
            else:
                acc[u] = c
        return self.ring._from_dict(acc)

    def __add__(self, other):
        return self._combine(other, self.ring.field.one())

    def __sub__(self, other):
        return self._combine(other, self.ring.field.neg(self.ring.field.one()))

    def __neg__(self):
        field = self.ring.field
        return Polynomial(self.ring, tuple((u, field.neg(c)) for u, c in self.terms))

    def scale(self, c):
        field = self.ring.field
        c = field.convert(c)
        if c == 0:
            return self.ring.zero()
        return Polynomial(self.ring, tuple((u, field.mul(c, a)) for u, a in self.terms))

    def mul_term(self, u, c=1):
        """Multiply by the term c*u; ordering is preserved, so no re-sort."""
        field = self.ring.field
        c = field.convert(c)
        if c == 0:
            return self.ring.zero()
        return Polynomial(self.ring, tuple((v.mul(u), field.mul(c, a)) for v, a in self.terms))

    def mul_var(self, i):
        return Polynomial(self.ring, tuple((v.mul_var(i), a) for v, a in self.terms))

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self.ring.check(other.ring)
        field = self.ring.field
        acc = {}
        for u, a in self.terms:
            for v, b in other.terms:
                w = u.mul(v)
                c = field.mul(a, b)
                acc[w] = field.add(acc[w], c) if w in acc else c
        return self.ring._from_dict(acc)

    def __pow__(self, e):
        e = int(e)
        if e < 0:
            raise DomainError(f"Negative power {e}")
        if self.terms and self.degree() * e > MAX_EXPONENT:
            raise DomainError(f"Power {e} overflows the exponent bound {MAX_EXPONENT}")
        if len(self.terms) == 1:
            u, a = self.terms[0]
            w = Monomial._make(tuple(x * e for x in u.exponents), u.position, u.degree * e)
            return Polynomial(self.ring, ((w, _field_power(self.ring.field, a, e)),))
        result, base = self.ring.one(), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def make_monic(self):
        if not self.terms:
            return self
        field = self.ring.field
        lc = self.terms[0][1]
        if lc == field.one():
            return self
        inv = field.inv(lc)
        return Polynomial(self.ring, tuple((u, field.mul(inv, c)) for u, c in self.terms))

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.terms == other.terms and self.ring == other.ring

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def format(self, unknowns=None):
        if not self.terms:
            return '0'
        field = self.ring.field
        context = self.ring.context
        one = field.one()
        parts = []
        for u, c in self.terms:
            negative = field.characteristic == 0 and c < 0
            magnitude = -c if negative else c
            body = u.format(context, unknowns) if not (u.is_one() and not u.position) else ''
            if not body:
                text = field.format(magnitude)
            elif magnitude == one:
                text = body
            else:
                text = f"{field.format(magnitude)}*{body}"
            if not parts:
                parts.append(f"-{text}" if negative else text)
            else:
                parts.append(f"- {text}" if negative else f"+ {text}")
        return ' '.join(parts)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"Polynomial({self.format()})"


def _field_power(field, a, e):
    result = field.one()
    while e:
        if e & 1:
            result = field.mul(result, a)
        e >>= 1
        if e:
            a = field.mul(a, a)
    return result


def check_same_ring(polys):
    polys = list(polys)
    for f in polys[1:]:
        polys[0].ring.check(f.ring)
    return polys


def make_monic(f):
    return f.make_monic()


def reduce_terms(f, find_reducer, stats=None):
    """Full reduction of f: every term is rewritten while find_reducer(term) offers a reducer.

    find_reducer returns a polynomial g with lm(g) dividing the term, or None.
    Terms are visited from the largest down, so each monomial is settled once.
    """
    if not f.terms:
        return f
    ring = f.ring
    field = ring.field
    heap_key = ring.ordering.neg_key
    acc = dict(f.terms)
    counter = itertools.count()
    heap = [(heap_key(u), next(counter), u) for u, _ in f.terms]
    heapq.heapify(heap)
    result = []
    steps = 0
    while heap:
        _, _, u = heapq.heappop(heap)
        c = acc.pop(u, None)
        if c is None:
            continue
        g = find_reducer(u)
        if g is None:
            result.append((u, c))
            continue
        steps += 1
        multiplier = u.quotient(g.terms[0][0])
        factor = field.div(c, g.terms[0][1])
        for v, b in g.terms[1:]:
            w = v.mul(multiplier)
            delta = field.mul(factor, b)
            if w in acc:
                nc = field.sub(acc[w], delta)
                if nc == 0:
                    del acc[w]
                else:
                    acc[w] = nc
            else:
                acc[w] = field.neg(delta)
                heapq.heappush(heap, (heap_key(w), next(counter), w))
    if stats is not None:
        stats['reductions'] = stats.get('reductions', 0) + steps
    return Polynomial(ring, tuple(result))


def ordinary_reducer(F):
    """Reducer lookup for ordinary division; the divisor with the largest lm wins."""
    ordering = F[0].ring.ordering if F else None
    candidates = sorted((g for g in F if g), key=lambda g: ordering.key(g.lm), reverse=True)

    def find(u):
        for g in candidates:
            if g.terms[0][0].divides(u):
                return g
        return None
    return find


def conventional_nf(f, F):
    F = [g for g in F if g]
    if not F:
        return f
    check_same_ring([f] + F)
    return reduce_terms(f, ordinary_reducer(F))


def sort_basis(F):
    """Deterministic presentation: descending by leading monomial."""
    F = [f for f in F if f]
    if not F:
        return []
    key = F[0].ring.ordering.key
    return sorted(F, key=lambda f: key(f.lm), reverse=True)


def _dedupe(F):
    seen = set()
    out = []
    for f in F:
        if f and f not in seen:
            seen.add(f)
            out.append(f)
    return out


def autoreduce(F):
    """Conventional autoreduction: pairwise fully reduced, monic, same ideal."""
    polys = _dedupe(f.make_monic() for f in F if f)
    if not polys:
        return []
    check_same_ring(polys)
    changed = True
    passes = 0
    while changed:
        changed = False
        passes += 1
        polys = sort_basis(polys)
        for idx, f in enumerate(polys):
            others = polys[:idx] + polys[idx + 1:]
            h = conventional_nf(f, others)
            if h != f:
                rest = others
                if h:
                    h = h.make_monic()
                    if h not in rest:
                        rest = rest + [h]
                polys = rest
                changed = True
                break
    logging.debug(f"Conventional autoreduction finished after {passes} passes with {len(polys)} polynomials")
    return sort_basis(polys)


def s_polynomial(f, g):
    w = f.lm.lcm(g.lm)
    field = f.ring.field
    a = f.mul_term(w.quotient(f.lm), field.inv(f.lc))
    b = g.mul_term(w.quotient(g.lm), field.inv(g.lc))
    return a - b


def _coprime(u, v):
    return all(a == 0 or b == 0 for a, b in zip(u.exponents, v.exponents))


def buchberger(F, ordering=None):
    """Reduced Groebner basis by Buchberger's algorithm with the product and chain criteria."""
    F = [f for f in F if f]
    if not F:
        return []
    if ordering is not None and ordering != F[0].ring.ordering:
        ring = PolynomialRing(F[0].ring.context, ordering, F[0].ring.field)
        F = [ring.from_terms(f.terms) for f in F]
    G = autoreduce(F)
    if not G:
        return []
    key = G[0].ring.ordering.key
    pending = set()
    heap = []

    def add_pairs(j):
        for i in range(j):
            if G[i] is None or G[i].lm.position != G[j].lm.position:
                continue
            pending.add((i, j))
            heapq.heappush(heap, (key(G[i].lm.lcm(G[j].lm)), i, j))

    for j in range(1, len(G)):
        add_pairs(j)
    skipped = 0
    while heap:
        _, i, j = heapq.heappop(heap)
        if (i, j) not in pending:
            continue
        pending.discard((i, j))
        f, g = G[i], G[j]
        if _coprime(f.lm, g.lm):
            skipped += 1
            continue
        w = f.lm.lcm(g.lm)
        chain = False
        for k, h in enumerate(G):
            if k in (i, j) or h is None:
                continue
            if h.lm.divides(w) and (min(i, k), max(i, k)) not in pending \
                    and (min(j, k), max(j, k)) not in pending:
                chain = True
                break
        if chain:
            skipped += 1
            continue
        h = conventional_nf(s_polynomial(f, g), [p for p in G if p is not None])
        if h:
            G.append(h.make_monic())
            add_pairs(len(G) - 1)
    basis = [g for g in G if g is not None]
    # Minimalize, then interreduce tails once: the lm set is fixed from here on.
    minimal = []
    for idx, g in enumerate(basis):
        redundant = False
        for jdx, h in enumerate(basis):
            if jdx == idx:
                continue
            if h.lm.divides(g.lm) and (h.lm != g.lm or jdx < idx):
                redundant = True
                break
        if not redundant:
            minimal.append(g)
    reduced = []
    for idx, g in enumerate(minimal):
        others = minimal[:idx] + minimal[idx + 1:]
        tail = conventional_nf(g.tail(), others)
        reduced.append(Polynomial(g.ring, g.terms[:1] + tail.terms).make_monic())
    logging.debug(f"Buchberger: {len(reduced)} polynomials, {skipped} pairs skipped by criteria")
    return sort_basis(reduced)


def ideal_equal(F, G, ordering=None):
    return buchberger(F, ordering) == buchberger(G, ordering)


def is_groebner_basis(F):
    """True iff every S-polynomial of F reduces to zero modulo F."""
    F = [f for f in F if f]
    for i, j in itertools.combinations(range(len(F)), 2):
        if F[i].lm.position != F[j].lm.position:
            continue
        if conventional_nf(s_polynomial(F[i], F[j]), F):
            return False
    return True
