"""Arithmetic in binary extension fields GF(2^m), 1 <= m <= 16.

Elements are represented by integers in polynomial basis: bit i is the
coefficient of x^i.  A :class:`Field` carries log/antilog tables built
from a generator of the multiplicative group, which works for any
irreducible reduction polynomial (primitive or not).

Besides scalar operations the field offers vectorised helpers over numpy
arrays; the code layer uses those to process many stripes at once.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

MAX_DEGREE = 16

# Standard primitive polynomials; 0x11D is the usual Reed-Solomon choice for m = 8.
DEFAULT_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def poly_degree(p: int) -> int:
    return p.bit_length() - 1


def poly_mod(a: int, p: int) -> int:
    """Remainder of a divided by p, both as GF(2)[x] bitmasks."""
    dp = poly_degree(p)
    while a and poly_degree(a) >= dp:
        a ^= p << (poly_degree(a) - dp)
    return a


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def mul_reduce(a: int, b: int, p: int) -> int:
    """Shift-and-reduce multiplication modulo p (no tables)."""
    m = poly_degree(p)
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m & 1:
            a ^= p
    return out


def is_irreducible(p: int) -> bool:
    """Trial division by every polynomial of degree 1..deg(p)//2."""
    m = poly_degree(p)
    if m < 1:
        return False
    for divisor in range(2, 1 << (m // 2 + 1)):
        if poly_mod(p, divisor) == 0:
            return False
    return True


class Field:
    """The finite field GF(2^m) defined by an irreducible polynomial.

    Use :func:`get_field` to obtain cached instances; tables are built
    once and never mutated.
    """

    def __init__(self, degree: int = 8, poly: int | None = None):
        if not 1 <= degree <= MAX_DEGREE:
            raise ParameterError(f"field degree must be in [1, {MAX_DEGREE}], got {degree}")
        if poly is None:
            poly = DEFAULT_POLYS[degree]
        if poly_degree(poly) != degree:
            raise ParameterError(f"reduction polynomial {poly:#x} does not have degree {degree}")
        if not is_irreducible(poly):
            raise ParameterError(f"reduction polynomial {poly:#x} is reducible over GF(2)")
        self.degree = degree
        self.poly = poly
        self.order = 1 << degree
        self.generator = self._find_generator()
        self._build_tables()

    def _find_generator(self) -> int:
        n = self.order - 1
        if n == 1:
            return 1
        prime_factors = [f for f in range(2, n + 1) if n % f == 0 and all(f % g for g in range(2, int(f**0.5) + 1))]
        for g in range(2, self.order):
            if all(self._pow_slow(g, n // f) != 1 for f in prime_factors):
                return g
        raise AssertionError("multiplicative group of a field is cyclic")

    def _pow_slow(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = mul_reduce(out, a, self.poly)
            a = mul_reduce(a, a, self.poly)
            e >>= 1
        return out

    def _build_tables(self) -> None:
        n = self.order - 1
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = mul_reduce(x, self.generator, self.poly)
        exp[n:] = exp[:n]
        self.exp = exp
        self.log = log
        self._exp = exp.tolist()
        self._log = log.tolist()

    def __repr__(self) -> str:
        return f"Field(degree={self.degree}, poly={self.poly:#x})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and (self.degree, self.poly) == (other.degree, other.poly)

    def __hash__(self) -> int:
        return hash((self.degree, self.poly))

    @property
    def dtype(self):
        return np.uint8 if self.degree <= 8 else np.uint16

    def check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise ParameterError(f"{a} is not an element of GF(2^{self.degree})")
        return a

    # scalar arithmetic on raw integer values

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return self._exp[(self._log[a] * e) % (self.order - 1)]

    # vectorised arithmetic; arrays hold element values

    def scale(self, c: int, arr: np.ndarray) -> np.ndarray:
        """Multiply every entry of ``arr`` by the scalar ``c``."""
        arr = np.asarray(arr)
        if c == 0:
            return np.zeros_like(arr)
        if c == 1:
            return arr.copy()
        out = self.exp[self.log[arr] + self._log[c]].astype(arr.dtype)
        out[arr == 0] = 0
        return out

    def combine(self, coeffs, arrays) -> np.ndarray:
        """Linear combination sum_i coeffs[i] * arrays[i] (entrywise)."""
        arrays = [np.asarray(a) for a in arrays]
        if len(coeffs) != len(arrays):
            raise ParameterError("coefficient and array counts differ")
        if not arrays:
            raise ParameterError("empty linear combination")
        out = np.zeros_like(arrays[0])
        for c, a in zip(coeffs, arrays):
            if c:
                out ^= self.scale(c, a)
        return out

    def element(self, value: int) -> FieldElement:
        return FieldElement(self, self.check(value))


@functools.lru_cache(maxsize=None)
def get_field(degree: int = 8, poly: int | None = None) -> Field:
    """Cached field constructor."""
    return Field(degree, poly)


GF2 = get_field(1)
GF256 = get_field(8)


@dataclass(frozen=True)
class FieldElement:
    """A value tagged with its field, supporting the usual operators."""

    field: Field
    value: int

    def __post_init__(self):
        self.field.check(self.value)

    def _peer(self, other: FieldElement) -> int:
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.field != self.field:
            raise ParameterError(f"mismatched fields: {self.field} vs {other.field}")
        return other.value

    def __add__(self, other):
        return gf_add(self, other)

    __sub__ = __add__

    def __mul__(self, other):
        return gf_mul(self, other)

    def __truediv__(self, other):
        return gf_mul(self, gf_inv(other))

    def __neg__(self):
        return self

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"GF(2^{self.field.degree})({self.value:#x})"


def gf_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.value ^ a._peer(b))


def gf_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.mul(a.value, a._peer(b)))


def gf_inv(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.inv(a.value))
