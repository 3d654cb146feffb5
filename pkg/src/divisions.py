from abc import ABC, abstractmethod

from .errors import InputError


class SeparationTable:
    """Multiplicative/nonmultiplicative split for each monomial of a finite set.

    Variables are 0-based indices into the variable list.
    """

    def __init__(self, division, monomials, multiplicative):
        self.division = division
        self.monomials = tuple(monomials)
        self.multiplicative = tuple(frozenset(m) for m in multiplicative)
        self.n = len(self.monomials[0].exponents) if self.monomials else 0
        everything = frozenset(range(self.n))
        self.nonmultiplicative = tuple(everything - m for m in self.multiplicative)
        self._index = {}
        for i, u in enumerate(self.monomials):
            self._index.setdefault(u, i)

    @property
    def entries(self):
        return {i: (self.multiplicative[i], self.nonmultiplicative[i]) for i in range(len(self.monomials))}

    def index_of(self, u):
        return self._index[u]

    def mult(self, u):
        return self.multiplicative[self._index[u]]

    def nonmult(self, u):
        return self.nonmultiplicative[self._index[u]]

    def __contains__(self, u):
        return u in self._index

    def __len__(self):
        return len(self.monomials)

    def __iter__(self):
        for i, u in enumerate(self.monomials):
            yield u, self.multiplicative[i], self.nonmultiplicative[i]


def is_involutive_multiple(w, u, nonmult):
    """True iff u | w and w/u involves no variable in nonmult."""
    if not u.divides(w):
        return False
    we, ue = w.exponents, u.exponents
    for i in nonmult:
        if we[i] != ue[i]:
            return False
    return True


class InvolutiveDivision(ABC):
    """Assigns multiplicative variables to the members of a finite monomial set.

    Subclasses only decide the separation; divisor search, cones and
    reducer lookup are shared.
    """

    name = None

    @abstractmethod
    def _multiplicative_sets(self, monomials):
        """Return one set of multiplicative variable indices per monomial."""
        pass

    def _check_input(self, monomials):
        pass

    def separation(self, monomials):
        monomials = list(monomials)
        self._check_input(monomials)
        if not monomials:
            return SeparationTable(self.name, (), ())
        return SeparationTable(self.name, monomials, self._multiplicative_sets(monomials))

    def divisor(self, w, table, ordering=None):
        """Involutive divisor of w among table.monomials, or None.

        Ties (possible only for non-autoreduced sets) go to the largest monomial.
        """
        found = None
        for u, _, nm in table:
            if is_involutive_multiple(w, u, nm):
                if ordering is None:
                    return u
                if found is None or ordering.key(u) > ordering.key(found):
                    found = u
        return found

    def cone_member(self, w, monomials, table=None):
        table = table or self.separation(monomials)
        return self.divisor(w, table) is not None

    def reducer(self, F, table=None):
        """Lookup function for reduce_terms: term -> generator whose lm involutively divides it."""
        generators = [g for g in F if g]
        if not generators:
            return lambda u: None
        ordering = generators[0].ring.ordering
        generators.sort(key=lambda g: ordering.key(g.lm), reverse=True)
        table = table or self.separation([g.lm for g in generators])
        lookup = [(g, g.lm, table.nonmult(g.lm)) for g in generators]

        def find(w):
            for g, u, nm in lookup:
                if is_involutive_multiple(w, u, nm):
                    return g
            return None
        return find


class JanetDivision(InvolutiveDivision):
    name = 'janet'

    def _check_input(self, monomials):
        if len(set(monomials)) != len(monomials):
            raise InputError("Janet separation needs distinct monomials")

    def _multiplicative_sets(self, monomials):
        n = len(monomials[0].exponents)
        mult = [set() for _ in monomials]
        for i in range(n):
            # Group [d1, ..., d_{i-1}]; module terms never share a group across positions.
            group_max = {}
            for u in monomials:
                group = (u.position, u.exponents[:i])
                d = u.exponents[i]
                if d > group_max.get(group, -1):
                    group_max[group] = d
            for idx, u in enumerate(monomials):
                if u.exponents[i] == group_max[(u.position, u.exponents[:i])]:
                    mult[idx].add(i)
        return mult


class PommaretDivision(InvolutiveDivision):
    name = 'pommaret'

    @staticmethod
    def multiplicative_for(u):
        k = u.cls()
        n = len(u.exponents)
        if k == n:
            return frozenset(range(n))
        return frozenset(range(k, n))

    def _multiplicative_sets(self, monomials):
        return [self.multiplicative_for(u) for u in monomials]


JANET = JanetDivision()
POMMARET = PommaretDivision()
DIVISIONS = {'janet': JANET, 'pommaret': POMMARET}


def get_division(name):
    if isinstance(name, InvolutiveDivision):
        return name
    try:
        return DIVISIONS[name]
    except KeyError:
        raise InputError(f"Unknown division '{name}', expected one of {', '.join(DIVISIONS)}") from None
