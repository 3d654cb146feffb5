"""Problem files and the polynomial / derivative expression syntax.

A problem file is line oriented::

    # comment
    vars: x, y, z
    order: degrevlex
    char: 0
    polys:
    x^2*y - z
    x*y^2 - y

Diff-mode files add ``mode: diff``, ``unknowns: y1, y2`` and optionally
``ranking: top|pot``; their bodies use derivatives such as ``y1[x1,x1,x2]``.
"""
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .diffsys import Derivative, Ranking, linear_combination
from .errors import ContextError, DomainError, InputError, ParseError
from .fields import field_for
from .monomials import MAX_EXPONENT, ORDERINGS, POSITION_RULES, Monomial, VarContext
from .polynomials import PolynomialRing

_TOKEN = re.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S)")
_HEADERS = ('vars', 'order', 'char', 'mode', 'unknowns', 'ranking')


def _tokenize(text, line):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        number, ident, sym = m.groups()
        col = m.start(m.lastindex) + 1
        if number is not None:
            tokens.append(('num', int(number), col))
        elif ident is not None:
            tokens.append(('id', ident, col))
        elif sym in '+-*/^()[],':
            tokens.append((sym, sym, col))
        else:
            raise ParseError(f"Unexpected character '{sym}'", line, col)
        pos = m.end()
    tokens.append(('end', None, len(text) + 1))
    return tokens


class _Linear:
    """Affine value in diff mode: constant plus a derivative-to-coefficient map."""

    __slots__ = ('const', 'terms')

    def __init__(self, const=Fraction(0), terms=None):
        self.const = const
        self.terms = terms or {}

    def __add__(self, other):
        terms = dict(self.terms)
        for d, c in other.terms.items():
            terms[d] = terms.get(d, 0) + c
        return _Linear(self.const + other.const, terms)

    def __neg__(self):
        return _Linear(-self.const, {d: -c for d, c in self.terms.items()})

    def __mul__(self, other):
        if self.terms and other.terms:
            raise InputError("Nonlinear input: product of derivatives")
        if other.terms:
            self, other = other, self
        return _Linear(self.const * other.const, {d: c * other.const for d, c in self.terms.items()})

    def __truediv__(self, other):
        return self * _Linear(1 / other.const)

    def __pow__(self, e):
        if self.terms and e > 1:
            raise InputError("Nonlinear input: power of a derivative")
        if e == 0:
            return _Linear(Fraction(1))
        return _Linear(self.const ** e, dict(self.terms))

    def is_constant(self):
        return not any(self.terms.values())


class _ExpressionParser:
    """Recursive descent over expr := term (('+'|'-') term)*, with '*', '/' and '^'."""

    def __init__(self, text, line, atom):
        self.tokens = _tokenize(text, line)
        self.i = 0
        self.line = line
        self.atom = atom

    def error(self, message, token=None):
        token = token or self.tokens[self.i]
        return ParseError(message, self.line, token[2])

    def peek(self):
        return self.tokens[self.i][0]

    def take(self, kind=None):
        token = self.tokens[self.i]
        if kind is not None and token[0] != kind:
            expected = 'end of expression' if kind == 'end' else f"'{kind}'"
            found = 'end of expression' if token[0] == 'end' else f"'{token[1]}'"
            raise self.error(f"Expected {expected}, found {found}")
        self.i += 1
        return token

    def parse(self):
        if self.peek() == 'end':
            raise self.error("Empty expression")
        value = self.expr()
        self.take('end')
        return value

    def expr(self):
        value = self.term()
        while self.peek() in ('+', '-'):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == '+' else value + (-rhs)
        return value

    def term(self):
        value = self.unary()
        while self.peek() in ('*', '/'):
            op = self.take()
            rhs = self.unary()
            if op[0] == '*':
                value = value * rhs
            else:
                value = self.atom.divide(value, rhs, op, self)
        return value

    def unary(self):
        if self.peek() == '-':
            self.take()
            return -self.unary()
        if self.peek() == '+':
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek() == '^':
            self.take()
            token = self.take()
            if token[0] != 'num':
                raise self.error("Exponent must be a nonnegative integer", token)
            if token[1] > MAX_EXPONENT:
                raise DomainError(f"Exponent {token[1]} exceeds {MAX_EXPONENT} (line {self.line}, column {token[2]})")
            base = base ** token[1]
        return base

    def primary(self):
        token = self.tokens[self.i]
        if token[0] == 'num':
            self.take()
            return self.atom.number(token[1])
        if token[0] == '(':
            self.take()
            value = self.expr()
            self.take(')')
            return value
        if token[0] == 'id':
            self.take()
            indices = None
            if self.peek() == '[':
                self.take()
                indices = []
                if self.peek() != ']':
                    indices.append(self.take('id'))
                    while self.peek() == ',':
                        self.take()
                        indices.append(self.take('id'))
                self.take(']')
            return self.atom.name(token, indices, self)
        if token[0] == 'end':
            raise self.error("Unexpected end of expression")
        raise self.error(f"Unexpected '{token[1]}'")


class _PolynomialAtoms:
    def __init__(self, ring):
        self.ring = ring

    def number(self, value):
        return self.ring.constant(value)

    def name(self, token, indices, parser):
        if indices is not None:
            raise parser.error(f"Derivative syntax is only valid in diff mode: {token[1]}[...]", token)
        if token[1] not in self.ring.context:
            raise parser.error(f"Unknown variable '{token[1]}'", token)
        return self.ring.variable(self.ring.context.index(token[1]))

    def divide(self, value, rhs, token, parser):
        if len(rhs) != 1 or not rhs.lm.is_one():
            raise parser.error("Division is only allowed by a nonzero constant", token)
        return value.scale(self.ring.field.inv(rhs.lc))


class _DiffAtoms:
    def __init__(self, ranking):
        self.ranking = ranking

    def number(self, value):
        return _Linear(Fraction(value))

    def name(self, token, indices, parser):
        ranking = self.ranking
        name = token[1]
        if name in ranking.context:
            raise InputError(f"Independent variable '{name}' used as a coefficient; only constant coefficients are supported")
        if name not in ranking.unknowns:
            raise parser.error(f"Unknown function '{name}'", token)
        exps = [0] * ranking.context.n
        for idx in indices or ():
            if idx[1] not in ranking.context:
                raise parser.error(f"Unknown variable '{idx[1]}'", idx)
            exps[ranking.context.index(idx[1])] += 1
        return _Linear(Fraction(0), {Derivative(ranking.unknown_index(name), Monomial(exps)): Fraction(1)})

    def divide(self, value, rhs, token, parser):
        if not rhs.is_constant() or rhs.const == 0:
            raise parser.error("Division is only allowed by a nonzero constant", token)
        return value / rhs


def parse_polynomial(text, ring, line=0):
    return _ExpressionParser(text, line, _PolynomialAtoms(ring)).parse()


def parse_monomial(text, context, line=0):
    """Parse ``x^2*y*z^3`` (or ``1``) into a Monomial."""
    ring = PolynomialRing(context)
    p = parse_polynomial(text, ring, line)
    if len(p) != 1 or p.lc != 1:
        raise ParseError(f"Not a monomial: {text}", line, 1)
    return p.lm


def parse_diff_polynomial(text, ranking, line=0):
    value = _ExpressionParser(text, line, _DiffAtoms(ranking)).parse()
    if value.const != 0:
        raise InputError("Inhomogeneous input: constant term in a differential equation")
    products = [(c, [d]) for d, c in value.terms.items() if c != 0]
    return linear_combination(ranking, products)


@dataclass
class ProblemFile:
    vars: list
    order: str = 'degrevlex'
    char: int = 0
    mode: str = 'poly'
    unknowns: list = field(default_factory=list)
    ranking: str = 'top'
    body: list = field(default_factory=list)
    # (line number, text) for each body entry
    lines: list = field(default_factory=list)

    def context(self):
        return VarContext(self.vars)

    def ring(self):
        return PolynomialRing(self.context(), self.order, field_for(self.char))

    def diff_ranking(self):
        return Ranking(self.context(), self.unknowns, self.order, self.ranking, field=field_for(self.char))

    def polynomials(self, ring=None):
        ring = ring or self.ring()
        return [parse_polynomial(text, ring, line) for line, text in self.lines]

    def system(self, ranking=None):
        ranking = ranking or self.diff_ranking()
        return [parse_diff_polynomial(text, ranking, line) for line, text in self.lines]


def _split_names(value, line, key):
    names = [v.strip() for v in value.split(',') if v.strip()]
    if not names:
        raise ParseError(f"'{key}' needs at least one name", line, 1)
    return names


def parse_problem(text):
    headers = {}
    entries = []
    in_body = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0].rstrip()
        if not content.strip():
            continue
        if in_body:
            entries.append((lineno, content.strip()))
            continue
        if ':' not in content:
            raise ParseError(f"Expected 'key: value', found '{content.strip()}'", lineno, 1)
        key, value = content.split(':', 1)
        key = key.strip().lower()
        if key == 'polys':
            in_body = True
            if value.strip():
                entries.append((lineno, value.strip()))
            continue
        if key not in _HEADERS:
            raise ParseError(f"Unknown header '{key}'", lineno, 1)
        if key in headers:
            raise ParseError(f"Duplicate header '{key}'", lineno, 1)
        headers[key] = (lineno, value.strip())

    if 'vars' not in headers:
        raise ParseError("Missing 'vars:' header", 1, 1)
    problem = ProblemFile(vars=_split_names(headers['vars'][1], headers['vars'][0], 'vars'))
    if 'order' in headers:
        lineno, value = headers['order']
        if value not in ORDERINGS:
            raise ParseError(f"Unknown ordering '{value}', expected one of {', '.join(ORDERINGS)}", lineno, 1)
        problem.order = value
    if 'char' in headers:
        lineno, value = headers['char']
        try:
            problem.char = int(value)
        except ValueError:
            raise ParseError(f"Characteristic must be an integer, got '{value}'", lineno, 1) from None
        try:
            field_for(problem.char)
        except InputError as e:
            raise ParseError(str(e), lineno, 1) from None
    if 'mode' in headers:
        lineno, value = headers['mode']
        if value not in ('poly', 'diff'):
            raise ParseError(f"Unknown mode '{value}', expected poly or diff", lineno, 1)
        problem.mode = value
    if problem.mode == 'diff':
        if 'unknowns' not in headers:
            raise ParseError("Diff mode needs an 'unknowns:' header", 1, 1)
        problem.unknowns = _split_names(headers['unknowns'][1], headers['unknowns'][0], 'unknowns')
        if 'ranking' in headers:
            lineno, value = headers['ranking']
            if value not in POSITION_RULES:
                raise ParseError(f"Unknown ranking '{value}', expected top or pot", lineno, 1)
            problem.ranking = value
    elif 'unknowns' in headers or 'ranking' in headers:
        lineno = (headers.get('unknowns') or headers['ranking'])[0]
        raise ParseError("'unknowns'/'ranking' are only valid with 'mode: diff'", lineno, 1)

    if not in_body:
        raise ParseError("Missing 'polys:' section", len(text.splitlines()) or 1, 1)
    if not entries:
        raise ParseError("Empty 'polys:' section", len(text.splitlines()), 1)
    try:
        problem.context()
    except ContextError as e:
        raise ParseError(str(e), headers['vars'][0], 1) from None
    problem.lines = entries
    problem.body = [text for _, text in entries]
    return problem


def load_problem(path):
    return parse_problem(Path(path).read_text())
