"""Janet and Pommaret involutive bases.

Completion by nonmultiplicative prolongations with mixed Pommaret-Janet
autoreduction, the involutive chain criterion, minimal Janet bases and the
finite-Pommaret test on Janet bases.
"""
import itertools
import logging
from dataclasses import dataclass, field

from .divisions import JANET, POMMARET, get_division, is_involutive_multiple
from .errors import InputError, PreconditionError, VerificationError
from .monomials import Monomial, MonomialOrdering, VarContext, monomials_up_to
from .polynomials import Polynomial, autoreduce, buchberger, check_same_ring, reduce_terms, sort_basis


@dataclass
class ProlongationEntry:
    poly: Polynomial
    ancestor: Monomial
    processed: set = field(default_factory=set)


@dataclass
class BasisStats:
    prolongations: int = 0
    criterion_hits: int = 0
    normal_forms: int = 0
    autoreductions: int = 0

    def as_dict(self):
        return {
            'prolongations': self.prolongations,
            'criterion_hits': self.criterion_hits,
            'normal_forms': self.normal_forms,
            'autoreductions': self.autoreductions,
        }


@dataclass
class BasisReport:
    basis: list
    division: str = 'janet'
    is_minimal: bool = False
    finite_pommaret: bool = False
    stats: BasisStats = field(default_factory=BasisStats)

    def __len__(self):
        return len(self.basis)


def leading_monomials(G):
    out = []
    for g in G:
        if isinstance(g, Monomial):
            out.append(g)
        elif g:
            out.append(g.lm)
    return out


def _default_ordering(n):
    return MonomialOrdering('degrevlex', VarContext([f"x{i + 1}" for i in range(n)]))


def _ordering_of(G, ordering=None):
    if ordering is not None:
        return ordering
    for g in G:
        if isinstance(g, Polynomial) and g:
            return g.ring.ordering
    U = leading_monomials(G)
    return _default_ordering(len(U[0].exponents)) if U else None


def _monic_distinct(F):
    seen = set()
    out = []
    for f in F:
        if not f:
            continue
        f = f.make_monic()
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


# Separations, divisors and cones

def pommaret_mult(u):
    return POMMARET.multiplicative_for(u)


def janet_separation(U):
    return JANET.separation(U)


def pommaret_separation(U):
    return POMMARET.separation(U)


def involutive_divisor(w, U, division, table=None, ordering=None):
    division = get_division(division)
    if table is None:
        table = division.separation(U)
    if division is POMMARET and ordering is None:
        ordering = _ordering_of(list(U))
    return division.divisor(w, table, ordering)


def cone_member(w, U, kind):
    U = list(U)
    if kind == 'full':
        return any(u.divides(w) for u in U)
    return involutive_divisor(w, U, kind) is not None


# Involutive normal forms and autoreduction

def involutive_nf(h, F, division, table=None, stats=None):
    """Full involutive normal form: no term of the result has an involutive divisor in lm(F)."""
    F = [f for f in F if f]
    if not F or not h:
        return h
    check_same_ring([h] + F)
    division = get_division(division)
    return reduce_terms(h, division.reducer(F, table), stats)


def _distinct_leads(H):
    """Resolve equal leading monomials by subtraction until all leads differ."""
    H = _monic_distinct(H)
    while True:
        by_lm = {}
        clash = None
        for idx, f in enumerate(H):
            if f.lm in by_lm:
                clash = (by_lm[f.lm], idx)
                break
            by_lm[f.lm] = idx
        if clash is None:
            return H
        i, j = clash
        diff = H[j] - H[i]
        H = H[:j] + H[j + 1:]
        if diff:
            diff = diff.make_monic()
            if diff not in H:
                H.append(diff)


def autoreduce_j(F):
    """Janet autoreduction: tails J-reduced modulo the whole set; leading monomials untouched."""
    H = _distinct_leads(F)
    if not H:
        return []
    table = JANET.separation([h.lm for h in H])
    find = JANET.reducer(H, table)
    out = []
    for h in H:
        tail = reduce_terms(h.tail(), find)
        out.append(Polynomial(h.ring, h.terms[:1] + tail.terms).make_monic())
    return sort_basis(out)


def autoreduce_p(F):
    """Pommaret autoreduction: no term of any element is a P-multiple of another leading monomial."""
    H = _monic_distinct(F)
    changed = True
    while changed and H:
        changed = False
        H = sort_basis(H)
        for idx, h in enumerate(H):
            others = H[:idx] + H[idx + 1:]
            r = involutive_nf(h, others, POMMARET)
            if r != h:
                H = others
                if r:
                    r = r.make_monic()
                    if r not in H:
                        H.append(r)
                changed = True
                break
    return sort_basis(H)


def _pommaret_reducible_lead(H):
    """Element whose lm lies in the P-cone of the other leading monomials (largest lm first)."""
    ordering = H[0].ring.ordering
    for idx in sorted(range(len(H)), key=lambda i: (ordering.key(H[i].lm), i), reverse=True):
        u = H[idx].lm
        for jdx, g in enumerate(H):
            if jdx != idx and is_involutive_multiple(u, g.lm, _pommaret_nonmult(g.lm)):
                return idx
    return None


def _pommaret_nonmult(u):
    return frozenset(range(len(u.exponents))) - POMMARET.multiplicative_for(u)


def autoreduce_pj(F, normal_form='janet', stats=None):
    """Pommaret-Janet autoreduction.

    Moves every element whose lm is P-reducible by the others out of H, feeds
    the moved elements back as their normal forms modulo H, repeats until H is
    stable, and finishes with Janet tail reduction. normal_form='pommaret'
    swaps the feedback normal form for the Pommaret one.
    """
    division = get_division(normal_form)
    H = _monic_distinct(F)
    if not H:
        return []
    check_same_ring(H)
    passes = 0
    while True:
        passes += 1
        snapshot = set(H)
        moved = []
        while len(H) > 1:
            idx = _pommaret_reducible_lead(H)
            if idx is None:
                break
            moved.append(H.pop(idx))
        for g in moved:
            f = involutive_nf(g, H, division)
            if f:
                f = f.make_monic()
                logging.debug(f"PJ-autoreduction: normal form with lm {f.lm!r} re-enters the set")
                H.append(f)
        if set(H) == snapshot:
            break
    if stats is not None:
        stats.autoreductions += 1
    logging.debug(f"PJ-autoreduction finished after {passes} passes with {len(H)} polynomials")
    return autoreduce_j(H)


# Basis predicates

def _is_j_autoreduced(F):
    leads = [f.lm for f in F]
    if len(set(leads)) != len(leads):
        return False
    table = JANET.separation(leads)
    for f in F:
        for u, _ in f.terms[1:]:
            if JANET.divisor(u, table) is not None:
                return False
    return True


def _is_p_autoreduced(F):
    for idx, f in enumerate(F):
        for jdx, g in enumerate(F):
            if idx == jdx:
                continue
            nm = _pommaret_nonmult(g.lm)
            for u, _ in f.terms:
                if is_involutive_multiple(u, g.lm, nm):
                    return False
    return True


def is_janet_basis(F):
    F = [f for f in F if f]
    if not F:
        return True
    if not _is_j_autoreduced(F):
        raise PreconditionError("Janet basis test needs a J-autoreduced set")
    table = JANET.separation([f.lm for f in F])
    for f in F:
        for x in sorted(table.nonmult(f.lm)):
            if involutive_nf(f.mul_var(x), F, JANET, table):
                return False
    return True


def is_pommaret_basis(F):
    F = [f for f in F if f]
    if not F:
        return True
    if not _is_p_autoreduced(F):
        raise PreconditionError("Pommaret basis test needs a P-autoreduced set")
    table = POMMARET.separation([f.lm for f in F])
    for f in F:
        for x in sorted(_pommaret_nonmult(f.lm)):
            if involutive_nf(f.mul_var(x), F, POMMARET, table):
                return False
    return True


# Completion

def criterion(prolong_lm, ancestor, entries, table, ordering):
    """True when some entry (f, v, D) has lcm(ancestor, v) < prolong_lm and
    prolong_lm in the Janet cone of lm(f); the prolongation may then be skipped."""
    key = ordering.key
    bound = key(prolong_lm)
    for entry in entries:
        v = entry.ancestor
        if v.position != ancestor.position:
            continue
        if key(ancestor.lcm(v)) >= bound:
            continue
        f_lm = entry.poly.lm
        if f_lm in table and is_involutive_multiple(prolong_lm, f_lm, table.nonmult(f_lm)):
            return True
    return False


def _select_prolongation(entries, table, ordering):
    best = None
    for entry in entries:
        u = entry.poly.lm
        for x in table.nonmult(u):
            if x in entry.processed:
                continue
            # Least lm(g)*x first; among equal products the lowest variable (largest index).
            rank = (ordering.key(u.mul_var(x)), -x)
            if best is None or rank < best[0]:
                best = (rank, entry, x)
    return None if best is None else best[1:]


def _pommaret_related(u, leads):
    """True if u lies in the P-cone of a lead or a lead lies in the P-cone of u."""
    nm_u = _pommaret_nonmult(u)
    for w in leads:
        if w == u:
            continue
        if is_involutive_multiple(u, w, _pommaret_nonmult(w)) or is_involutive_multiple(w, u, nm_u):
            return True
    return False


def _rebuild_entries(G, old_entries, table):
    by_lm = {}
    for entry in old_entries:
        by_lm.setdefault(entry.poly.lm, entry)
    rebuilt = []
    for g in G:
        old = by_lm.get(g.lm)
        if old is None:
            rebuilt.append(ProlongationEntry(g, g.lm, set()))
            continue
        anchor = JANET.divisor(old.ancestor, table)
        if anchor is None:
            logging.debug(f"Ancestor {old.ancestor!r} outside the Janet cone, re-anchoring at {g.lm!r}")
            anchor = g.lm
        rebuilt.append(ProlongationEntry(g, anchor, old.processed & table.nonmult(g.lm)))
    return rebuilt


def janet_basis(F, use_criterion=True, autoreduction='pj', verify=True):
    """Janet basis by completion with PJ-autoreduction.

    Prolongations g*x (x Janet nonmultiplicative for g) are treated in
    increasing order of lm(g)*x. A normal form sharing the prolongation's lm
    joins the basis as is; any other non-zero normal form triggers
    autoreduction ('pj', or 'p' for pure Pommaret autoreduction).
    """
    F = [f for f in F if f]
    if not F:
        raise InputError("Cannot compute a basis of the zero ideal")
    check_same_ring(F)
    if autoreduction not in ('pj', 'p'):
        raise InputError(f"Unknown autoreduction '{autoreduction}', expected 'pj' or 'p'")
    ordering = F[0].ring.ordering
    stats = BasisStats()

    G = autoreduce(F)
    entries = [ProlongationEntry(g, g.lm, set()) for g in G]
    table = JANET.separation([g.lm for g in G])
    while True:
        picked = _select_prolongation(entries, table, ordering)
        if picked is None:
            break
        entry, x = picked
        entry.processed.add(x)
        stats.prolongations += 1
        prolong_lm = entry.poly.lm.mul_var(x)
        logging.debug(f"Prolongation {prolong_lm!r} (variable {x}), basis size {len(G)}")
        if use_criterion and criterion(prolong_lm, entry.ancestor, entries, table, ordering):
            stats.criterion_hits += 1
        else:
            h = involutive_nf(entry.poly.mul_var(x), G, JANET, table)
            stats.normal_forms += 1
            if h:
                h = h.make_monic()
                same_lead = h.lm == prolong_lm
                entries.append(ProlongationEntry(h, entry.ancestor if same_lead else h.lm, set()))
                if same_lead and not _pommaret_related(h.lm, [g.lm for g in G]):
                    G.append(h)
                elif autoreduction == 'pj':
                    G = autoreduce_pj(G + [h], stats=stats)
                else:
                    G = autoreduce_j(autoreduce_p(G + [h]))
                    stats.autoreductions += 1
        table = JANET.separation([g.lm for g in G])
        entries = _rebuild_entries(G, entries, table)

    basis = autoreduce_j(G)
    if verify and not is_janet_basis(basis):
        raise VerificationError("Completion finished but the result fails the Janet basis test")
    report = BasisReport(basis=basis, division='janet', stats=stats)
    leads = [g.lm for g in basis]
    report.is_minimal = set(leads) == set(janet_completion(minimal_generators(leads), ordering))
    try:
        report.finite_pommaret = has_finite_pommaret_basis(basis)
    except PreconditionError as e:
        logging.warning(f"Finite Pommaret test skipped: {e}")
    logging.info(f"Janet basis: {len(basis)} polynomials, {stats.prolongations} prolongations, "
                 f"{stats.criterion_hits} criterion hits, {stats.normal_forms} normal forms")
    return report


def minimal_generators(U):
    U = list(dict.fromkeys(U))
    return [u for u in U if not any(v != u and v.divides(u) for v in U)]


def janet_completion(U, ordering=None):
    """Janet completion of a monomial set: adjoin the least prolongation outside the Janet cone until none is left."""
    U = list(dict.fromkeys(U))
    if not U:
        return []
    ordering = _ordering_of(U, ordering)
    while True:
        table = JANET.separation(U)
        best = None
        for u, _, nm in table:
            for x in nm:
                w = u.mul_var(x)
                if JANET.divisor(w, table) is None:
                    if best is None or ordering.key(w) < ordering.key(best):
                        best = w
        if best is None:
            return ordering.sorted_desc(U)
        U.append(best)


def minimal_janet_basis(F, ordering=None):
    """The unique monic minimal Janet basis, built from the reduced Groebner basis."""
    F = [f for f in F if f]
    if not F:
        raise InputError("Cannot compute a basis of the zero ideal")
    gb = buchberger(F, ordering)
    ordering = gb[0].ring.ordering
    seeds = [g.lm for g in gb]
    leads = janet_completion(seeds, ordering)
    polys = list(gb)
    for w in leads:
        if w in seeds:
            continue
        g = max((g for g in gb if g.lm.divides(w)), key=lambda g: ordering.key(g.lm))
        polys.append(g.mul_term(w.quotient(g.lm)))
    basis = autoreduce_j(polys)
    report = BasisReport(basis=basis, division='janet', is_minimal=True)
    report.finite_pommaret = has_finite_pommaret_basis(basis)
    logging.info(f"Minimal Janet basis: {len(basis)} polynomials from a Groebner basis of {len(gb)}")
    return report


# Pommaret finiteness

def _is_janet_complete(U, table=None):
    table = table or JANET.separation(U)
    for u, _, nm in table:
        for x in nm:
            if JANET.divisor(u.mul_var(x), table) is None:
                return False
    return True


def _leads_p_autoreduced(U):
    for idx, u in enumerate(U):
        for jdx, v in enumerate(U):
            if idx != jdx and is_involutive_multiple(u, v, _pommaret_nonmult(v)):
                return False
    return True


def has_finite_pommaret_basis(G):
    """Check on a PJ-autoreduced Janet basis whether every P-nonmultiplicative
    prolongation of a leading monomial stays inside the P-cone of lm(G)."""
    U = list(dict.fromkeys(leading_monomials(G)))
    if not U:
        raise PreconditionError("Empty basis")
    if not _leads_p_autoreduced(U):
        raise PreconditionError("Leading monomials are not Pommaret autoreduced")
    if not _is_janet_complete(U):
        raise PreconditionError("Leading monomials do not form a Janet basis")
    table = POMMARET.separation(U)
    for u, _, nm in table:
        for x in sorted(nm):
            if POMMARET.divisor(u.mul_var(x), table) is None:
                logging.debug(f"Pommaret basis infinite: {u!r} * x{x + 1} leaves the P-cone")
                return False
    return True


def separations_coincide(G):
    U = list(dict.fromkeys(leading_monomials(G)))
    table = JANET.separation(U)
    return all(mult == POMMARET.multiplicative_for(u) for u, mult, _ in table)


def truncated_pommaret_basis(G, maxdeg, ordering=None):
    """Pommaret completion of lm(G) cut at total degree maxdeg."""
    U = list(dict.fromkeys(leading_monomials(G)))
    if not U:
        raise InputError("Empty basis")
    top = max(u.degree for u in U)
    if maxdeg < top:
        raise InputError(f"maxdeg {maxdeg} is below the largest leading degree {top}")
    ordering = _ordering_of(G, ordering)
    while True:
        table = POMMARET.separation(U)
        best = None
        for u, _, nm in table:
            if u.degree >= maxdeg:
                continue
            for x in nm:
                w = u.mul_var(x)
                if POMMARET.divisor(w, table) is None:
                    if best is None or ordering.key(w) < ordering.key(best):
                        best = w
        if best is None:
            return ordering.sorted_desc(U)
        U.append(best)


# Division axioms

def _subsets_containing(U, u, limit=10):
    others = [v for v in U if v != u]
    if len(U) <= limit:
        for r in range(len(others) + 1):
            for combo in itertools.combinations(others, r):
                yield [u, *combo]
    else:
        yield [u]
        for v in others:
            yield [w for w in U if w != v]


def check_division_axioms(U, division, degree_bound=None):
    """Verify the four involutive-division axioms for the separation of U.

    With multiplicative sets given by variables, divisor closure (a) comes
    down to the table splitting the variables into two disjoint parts and to
    the cone-membership test used by the reductions being closed under
    division; the latter is enumerated up to degree_bound (default twice the
    largest degree). (b), (c) and (d) are finite.
    """
    division = get_division(division)
    U = list(dict.fromkeys(U))
    if not U:
        return True
    n = len(U[0].exponents)
    bound = degree_bound if degree_bound is not None else 2 * max(u.degree for u in U)
    table = division.separation(U)
    everything = frozenset(range(n))

    for u, mult, nm in table:
        if mult & nm or mult | nm != everything:
            logging.debug(f"Axiom (a) fails for {u!r}: variables not split")
            return False
        for w in monomials_up_to(n, bound):
            if not is_involutive_multiple(u.mul(w), u, nm):
                continue
            for i in w.support():
                exps = list(w.exponents)
                exps[i] -= 1
                if not is_involutive_multiple(u.mul(Monomial(exps)), u, nm):
                    logging.debug(f"Axiom (a) fails for {u!r} at {w!r}")
                    return False

    for (u, _, nm_u), (v, _, nm_v) in itertools.combinations(table, 2):
        if u.position != v.position:
            continue
        w = u.lcm(v)
        if is_involutive_multiple(w, u, nm_u) and is_involutive_multiple(w, v, nm_v):
            if not (is_involutive_multiple(u, v, nm_v) or is_involutive_multiple(v, u, nm_u)):
                logging.debug(f"Axiom (b) fails for {u!r}, {v!r}")
                return False

    for u, mult_u, nm_u in table:
        for v, mult_v, _ in table:
            if u != v and is_involutive_multiple(v, u, nm_u) and not mult_v <= mult_u:
                logging.debug(f"Axiom (c) fails for {u!r}, {v!r}")
                return False

    for u, mult_u, _ in table:
        for V in _subsets_containing(U, u):
            sub = division.separation(V)
            if not mult_u <= sub.mult(u):
                logging.debug(f"Axiom (d) fails for {u!r}")
                return False
    return True


def cone_equality(U, division='janet', degree_bound=None):
    """C_L(U) = C(U) on every monomial up to degree_bound (default max degree + 2)."""
    division = get_division(division)
    U = list(dict.fromkeys(leading_monomials(U)))
    if not U:
        return True
    n = len(U[0].exponents)
    bound = degree_bound if degree_bound is not None else max(u.degree for u in U) + 2
    table = division.separation(U)
    for position in sorted({u.position for u in U}):
        for w in monomials_up_to(n, bound, position=position):
            full = any(u.divides(w) for u in U)
            if full != (division.divisor(w, table) is not None):
                logging.debug(f"Cones differ at {w!r}")
                return False
    return True
