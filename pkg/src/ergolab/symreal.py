"""Exact arithmetic in multiquadratic fields Q(sqrt(m1), ..., sqrt(mk)).

A :class:`SymbolicReal` is a sparse rational combination of square roots of
squarefree integers drawn from a :class:`RadicalBasis`.  Values carry
certified rational enclosures, so the integer part of any element can be
computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Union

import numpy as np

Rational = Union[int, Fraction]

FLOOR_START_BITS = 64
FLOOR_MAX_BITS = 16384


class BasisError(ValueError):
    """Raised for basis mismatches, bad radicands or non-closed products."""


def squarefree_part(n: int) -> tuple[int, int]:
    """Return ``(s, c)`` with ``n = s*s*c`` and ``c`` squarefree."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    s, c = 1, 1
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        s *= d ** (e // 2)
        if e % 2:
            c *= d
        d += 1 if d == 2 else 2
    return s, c * n


def is_squarefree(n: int) -> bool:
    return n >= 1 and squarefree_part(n)[0] == 1


def _reduced_product(a: int, b: int) -> tuple[int, int]:
    # sqrt(a)*sqrt(b) = g*sqrt((a/g)*(b/g)) for squarefree a, b
    g = math.gcd(a, b)
    return g, (a // g) * (b // g)


@dataclass(frozen=True)
class RadicalBasis:
    """Rational basis {sqrt(c)} of the field generated by ``radicands``.

    Elements are the distinct squarefree parts of products of radicands,
    sorted ascending, so index 0 is always the unit.
    """

    radicands: tuple[int, ...] = ()

    def __post_init__(self):
        rads = tuple(int(r) for r in self.radicands)
        if len(set(rads)) != len(rads):
            raise BasisError(f"radicands must be distinct: {rads}")
        for r in rads:
            if r <= 1 or not is_squarefree(r):
                raise BasisError(f"radicand {r} is not a squarefree integer > 1")
        object.__setattr__(self, "radicands", tuple(sorted(rads)))

    @cached_property
    def elements(self) -> tuple[int, ...]:
        found = {1}
        frontier = [1]
        while frontier:
            nxt = []
            for a in frontier:
                for r in self.radicands:
                    c = _reduced_product(a, r)[1]
                    if c not in found:
                        found.add(c)
                        nxt.append(c)
            frontier = nxt
        return tuple(sorted(found))

    @cached_property
    def index(self) -> dict[int, int]:
        return {c: i for i, c in enumerate(self.elements)}

    @property
    def dimension(self) -> int:
        return len(self.elements)

    @cached_property
    def table(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """``table[i][j] == (scale, k)`` with ``e_i * e_j == scale * e_k``."""
        rows = []
        for a in self.elements:
            row = []
            for b in self.elements:
                s, c = _reduced_product(a, b)
                if c not in self.index:
                    raise BasisError(f"sqrt({a})*sqrt({b}) leaves the basis")
                row.append((s, self.index[c]))
            rows.append(tuple(row))
        return tuple(rows)

    def contains(self, radicand: int) -> bool:
        return radicand in self.index

    # constructors
    def rational(self, q: Rational) -> "SymbolicReal":
        return SymbolicReal(self, {0: Fraction(q)})

    def zero(self) -> "SymbolicReal":
        return SymbolicReal(self, {})

    def one(self) -> "SymbolicReal":
        return self.rational(1)

    def sqrt(self, m: int, coef: Rational = 1) -> "SymbolicReal":
        s, c = squarefree_part(m)
        if s != 1:
            raise BasisError(f"radicand {m} is not squarefree")
        if c not in self.index:
            raise BasisError(f"sqrt({m}) is not in the basis {self.radicands}")
        return SymbolicReal(self, {self.index[c]: Fraction(coef)})

    def merged(self, other: "RadicalBasis") -> "RadicalBasis":
        return RadicalBasis(tuple(sorted(set(self.radicands) | set(other.radicands))))


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction
    requested_precision: int

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


class SymbolicReal:
    """Immutable element of a multiquadratic field in canonical sparse form."""

    __slots__ = ("basis", "coords", "_hash")

    def __init__(self, basis: RadicalBasis, coords: dict[int, Fraction] | None = None):
        self.basis = basis
        self.coords = {i: Fraction(q) for i, q in (coords or {}).items() if q != 0}
        self._hash = None

    # construction helpers
    def _coerce(self, other) -> "SymbolicReal":
        if isinstance(other, SymbolicReal):
            if other.basis != self.basis:
                raise BasisError(
                    f"basis mismatch: {self.basis.radicands} vs {other.basis.radicands}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.basis.rational(other)
        return NotImplemented

    # ring operations
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coords)
        for i, q in other.coords.items():
            out[i] = out.get(i, 0) + q
        return SymbolicReal(self.basis, out)

    __radd__ = __add__

    def __neg__(self):
        return SymbolicReal(self.basis, {i: -q for i, q in self.coords.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return SymbolicReal(self.basis, {i: q * other for i, q in self.coords.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        table = self.basis.table
        out: dict[int, Fraction] = {}
        for i, a in self.coords.items():
            row = table[i]
            for j, b in other.coords.items():
                s, k = row[j]
                out[k] = out.get(k, 0) + s * a * b
        return SymbolicReal(self.basis, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result, base = self.basis.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "SymbolicReal":
        """Multiplicative inverse, found by solving ``self * x == 1`` over Q."""
        from ergolab._linalg import solve

        if not self.coords:
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return self.basis.rational(1 / self.coords[0])
        dim = self.basis.dimension
        table = self.basis.table
        # column j of the matrix is self * e_j
        mat = [[Fraction(0)] * dim for _ in range(dim)]
        for i, a in self.coords.items():
            for j in range(dim):
                s, k = table[i][j]
                mat[k][j] += s * a
        rhs = [Fraction(0)] * dim
        rhs[0] = Fraction(1)
        return SymbolicReal(self.basis, dict(enumerate(solve(mat, rhs))))

    # predicates and comparisons
    def is_rational(self) -> bool:
        return all(i == 0 for i in self.coords)

    def is_zero(self) -> bool:
        return not self.coords

    def rational_part(self) -> Fraction:
        return self.coords.get(0, Fraction(0))

    def irrational_part(self) -> "SymbolicReal":
        return SymbolicReal(self.basis, {i: q for i, q in self.coords.items() if i != 0})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.rational_part() == other
        if not isinstance(other, SymbolicReal):
            return NotImplemented
        return self.basis == other.basis and self.coords == other.coords

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.rational_part())
            else:
                self._hash = hash((self.basis, tuple(sorted(self.coords.items()))))
        return self._hash

    def sign(self) -> int:
        if not self.coords:
            return 0
        if self.is_rational():
            q = self.coords[0]
            return (q > 0) - (q < 0)
        p = FLOOR_START_BITS
        while True:
            enc = self.enclose(p)
            if enc.lo > 0:
                return 1
            if enc.hi < 0:
                return -1
            p *= 2

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        enc = self.enclose(64)
        return float((enc.lo + enc.hi) / 2)

    def __repr__(self):
        return f"SymbolicReal({format_symreal(self)!r})"

    def __str__(self):
        return format_symreal(self)

    def terms(self) -> list[tuple[int, Fraction]]:
        """``(radicand, coefficient)`` pairs in basis order."""
        elems = self.basis.elements
        return [(elems[i], q) for i, q in sorted(self.coords.items())]

    # certified numerics
    def enclose(self, p: int) -> Enclosure:
        return enclose(self, p)

    def floor(self) -> int:
        return floor_exact(self)

    def __floor__(self):
        return floor_exact(self)


def enclose(a: SymbolicReal, p: int) -> Enclosure:
    """Rational interval of width at most ``2**-p`` containing ``a``."""
    if p < 1:
        raise ValueError("precision must be at least 1 bit")
    if a.is_rational():
        q = a.rational_part()
        return Enclosure(q, q, p)
    total = sum(abs(q) for q in a.coords.values())
    guard = max(1, math.ceil(math.log2(total)) + 1) if total > 1 else 1
    bits = p + guard
    scale = 1 << bits
    lo = hi = Fraction(0)
    elems = a.basis.elements
    for i, q in a.coords.items():
        if i == 0:
            lo += q
            hi += q
            continue
        r = math.isqrt(elems[i] << (2 * bits))
        # r/scale <= sqrt(m) < (r+1)/scale, and the left end is strict for squarefree m > 1
        t_lo, t_hi = q * Fraction(r, scale), q * Fraction(r + 1, scale)
        if q < 0:
            t_lo, t_hi = t_hi, t_lo
        lo += t_lo
        hi += t_hi
    return Enclosure(lo, hi, p)


def floor_exact(a: SymbolicReal | Rational) -> int:
    """The integer part of ``a`` (rounding toward minus infinity)."""
    if isinstance(a, (int, Fraction)):
        return math.floor(a)
    if a.is_rational():
        q = a.rational_part()
        return q.numerator // q.denominator
    p = FLOOR_START_BITS
    while p <= FLOOR_MAX_BITS:
        enc = enclose(a, p)
        lo = math.floor(enc.lo)
        if lo == math.floor(enc.hi):
            return lo
        p *= 2
    raise ArithmeticError(f"floor of {a} not resolved within {FLOOR_MAX_BITS} bits")


def scaled_floor(a: SymbolicReal | Rational, bits: int) -> int:
    """``floor(a * 2**bits)``, certified."""
    if isinstance(a, (int, Fraction)):
        return math.floor(Fraction(a) * (1 << bits))
    return floor_exact(a * (1 << bits))


# bulk helpers -------------------------------------------------------------

def _as_object_ints(ks) -> np.ndarray:
    arr = np.asarray(ks)
    if arr.dtype != object:
        arr = arr.astype(object)
    return arr


def frac_of_multiples(alpha: SymbolicReal | Rational, ks, bits: int | None = None) -> np.ndarray:
    """Fractional parts of ``k * alpha`` for integer ``k``, as float64.

    The rational part of ``alpha`` is reduced exactly; the irrational part is
    handled in fixed point with ``bits`` fractional bits (at least 128 and at
    least 64 more than the size of the largest ``|k|``), so the absolute error
    before the final rounding to double is below ``2**-64``.
    """
    ks = _as_object_ints(ks)
    if ks.size == 0:
        return np.zeros(ks.shape)
    if isinstance(alpha, (int, Fraction)):
        q = Fraction(alpha)
        irr = None
    else:
        q = alpha.rational_part()
        irr = alpha.irrational_part()
        if irr.is_zero():
            irr = None
    kmax = max(abs(int(k)) for k in (ks.min(), ks.max()))
    if bits is None:
        bits = max(128, 64 + kmax.bit_length())
    mod = 1 << bits
    num, den = q.numerator, q.denominator
    # exact rational contribution, then fixed-point irrational contribution
    total = ((ks * num) % den) * mod // den
    if irr is not None:
        total = total + ks * scaled_floor(irr, bits)
    total = total % mod
    shift = bits - 53
    return (total >> shift).astype(np.float64) * 2.0 ** -53


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_symreal(a: SymbolicReal) -> str:
    """Serialize in the coefficient sublanguage, e.g. ``3/2*sqrt(6) - 1/4``."""
    from ergolab.polyfam import RealPolynomial, format_polynomial

    return format_polynomial(RealPolynomial(a.basis, [a]))


def parse_symreal(text: str, basis: RadicalBasis) -> SymbolicReal:
    from ergolab.polyfam import parse_polynomial

    p = parse_polynomial(text, basis)
    if p.degree != 0:
        raise ValueError(f"expected a constant, got {text!r}")
    return p.coefficients[0]


def common_basis(values: Iterable[SymbolicReal]) -> RadicalBasis:
    bases = {v.basis for v in values}
    if len(bases) != 1:
        raise BasisError("values do not share one basis")
    return bases.pop()


def rebase(a: SymbolicReal, basis: RadicalBasis) -> SymbolicReal:
    """The same number expressed over a larger ``basis``."""
    coords = {}
    for radicand, q in a.terms():
        if not basis.contains(radicand):
            raise BasisError(f"sqrt({radicand}) is not in the basis {basis.radicands}")
        coords[basis.index[radicand]] = q
    return SymbolicReal(basis, coords)


def unify(values: Iterable) -> list:
    """Lift every SymbolicReal among ``values`` to the merged basis."""
    values = list(values)
    merged = None
    for v in values:
        if isinstance(v, SymbolicReal):
            merged = v.basis if merged is None else merged.merged(v.basis)
    if merged is None:
        return values
    return [rebase(v, merged) if isinstance(v, SymbolicReal) else v for v in values]
