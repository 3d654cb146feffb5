from abc import ABC, abstractmethod
from fractions import Fraction

from .errors import ContextError, DomainError, InputError


def is_prime(p):
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


class CoefficientField(ABC):
    """Exact coefficient arithmetic. Subclasses fix the element representation."""

    characteristic = 0

    @abstractmethod
    def convert(self, value):
        """Map an int or Fraction to a canonical field element."""
        pass

    @abstractmethod
    def inv(self, a):
        pass

    @abstractmethod
    def format(self, a):
        pass

    def zero(self):
        return self.convert(0)

    def one(self):
        return self.convert(1)

    def add(self, a, b):
        return self.convert(a + b)

    def sub(self, a, b):
        return self.convert(a - b)

    def neg(self, a):
        return self.convert(-a)

    def mul(self, a, b):
        return self.convert(a * b)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a):
        return a == 0

    def check_same(self, other):
        if self != other:
            raise ContextError(f"Coefficient fields differ: {self} vs {other}")


class RationalField(CoefficientField):
    characteristic = 0

    def convert(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        raise DomainError(f"Not an exact rational: {value!r}")

    # Fraction arithmetic already stays canonical; skip convert().
    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise DomainError("Division by zero")
        return 1 / a

    def div(self, a, b):
        if b == 0:
            raise DomainError("Division by zero")
        return a / b

    def format(self, a):
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash('QQ')

    def __repr__(self):
        return 'QQ'


class PrimeField(CoefficientField):
    """Integers modulo a prime p, represented in [0, p)."""

    def __init__(self, p):
        p = int(p)
        if not is_prime(p):
            raise InputError(f"Characteristic must be 0 or a prime, got {p}")
        self.p = p
        self.characteristic = p

    def convert(self, value):
        if isinstance(value, int):
            return value % self.p
        if isinstance(value, Fraction):
            den = value.denominator % self.p
            if den == 0:
                raise DomainError(f"Denominator {value.denominator} vanishes modulo {self.p}")
            return value.numerator * pow(den, -1, self.p) % self.p
        raise DomainError(f"Not an exact coefficient: {value!r}")

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return -a % self.p

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise DomainError("Division by zero")
        return pow(a, -1, self.p)

    def format(self, a):
        return str(a)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(('GF', self.p))

    def __repr__(self):
        return f"GF({self.p})"


def field_for(characteristic):
    characteristic = int(characteristic)
    if characteristic == 0:
        return RationalField()
    return PrimeField(characteristic)
