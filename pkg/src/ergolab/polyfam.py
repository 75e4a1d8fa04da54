"""Real polynomials with exact multiquadratic coefficients.

Parsing and formatting follow the grammar::

    poly   := term (("+"|"-") term)*
    term   := coeff ("*"? var)? | var
    var    := "t" ("^" uint)?
    coeff  := rat | rat? "*"? "sqrt" "(" uint ")"
    rat    := "-"? uint ("/" uint)?

The parser also accepts a unary minus in front of any term (``-t``,
``-sqrt(2)*t``), which the formatter relies on for round trips.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ergolab._linalg import nullspace
from ergolab.symreal import (
    BasisError,
    RadicalBasis,
    SymbolicReal,
    floor_exact,
    format_rational,
    is_squarefree,
    scaled_floor,
    squarefree_part,
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


class RealPolynomial:
    """``c0 + c1 t + ... + cd t^d`` with coefficients in one radical basis."""

    __slots__ = ("basis", "coefficients")

    def __init__(self, basis: RadicalBasis, coefficients: Sequence):
        coeffs = [_lift(basis, c) for c in coefficients] or [basis.zero()]
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs.pop()
        self.basis = basis
        self.coefficients = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coefficients[0].is_zero()

    def coefficient(self, j: int) -> SymbolicReal:
        if 0 <= j < len(self.coefficients):
            return self.coefficients[j]
        return self.basis.zero()

    def nonconstant(self) -> tuple[SymbolicReal, ...]:
        return self.coefficients[1:]

    def is_rational(self) -> bool:
        return all(c.is_rational() for c in self.coefficients)

    def __eq__(self, other):
        if not isinstance(other, RealPolynomial):
            return NotImplemented
        return self.basis == other.basis and self.coefficients == other.coefficients

    def __hash__(self):
        return hash((self.basis, self.coefficients))

    def __add__(self, other: "RealPolynomial") -> "RealPolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        return RealPolynomial(self.basis, [self.coefficient(j) + other.coefficient(j)
                                           for j in range(n)])

    def __sub__(self, other: "RealPolynomial") -> "RealPolynomial":
        return self + other.scale(-1)

    def scale(self, c) -> "RealPolynomial":
        return RealPolynomial(self.basis, [a * c for a in self.coefficients])

    def __call__(self, n):
        return evaluate(self, n)

    def __repr__(self):
        return f"RealPolynomial({format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)


def _lift(basis: RadicalBasis, c) -> SymbolicReal:
    if isinstance(c, SymbolicReal):
        if c.basis != basis:
            raise BasisError("coefficient basis differs from polynomial basis")
        return c
    if isinstance(c, float):
        c = Fraction(c)
    return basis.rational(c)


@dataclass(frozen=True)
class PolynomialFamily:
    members: tuple[RealPolynomial, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a family needs at least one polynomial")
        if len({p.basis for p in members}) != 1:
            raise BasisError("family members must share one radical basis")
        object.__setattr__(self, "members", members)

    @property
    def basis(self) -> RadicalBasis:
        return self.members[0].basis

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @classmethod
    def from_strings(cls, texts: Iterable[str], basis: RadicalBasis | None = None) -> "PolynomialFamily":
        texts = list(texts)
        if basis is None:
            basis = infer_basis(texts)
        return cls(tuple(parse_polynomial(t, basis) for t in texts))

    def to_json(self) -> str:
        return json.dumps({"radicands": list(self.basis.radicands),
                           "family": [format_polynomial(p) for p in self.members]})

    @classmethod
    def from_json(cls, text: str) -> "PolynomialFamily":
        data = json.loads(text)
        return cls.from_strings(data["family"], RadicalBasis(tuple(data.get("radicands", ()))))


@dataclass(frozen=True)
class IndependenceVerdict:
    independent: bool
    witness: tuple[SymbolicReal, ...] | None = None
    rho: tuple[Fraction, ...] | None = None

    def to_dict(self) -> dict:
        out = {"independent": self.independent}
        if not self.independent:
            out["lambda"] = [str(x) for x in self.witness]
            out["rho"] = [format_rational(q) for q in self.rho]
        return out


# parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(sqrt)|(t)|([-+*/^()]))")
_SQRT_ARG = re.compile(r"sqrt\s*\(\s*(\d+)\s*\)")


def infer_basis(texts: Iterable[str]) -> RadicalBasis:
    """Smallest basis holding every squarefree radicand > 1 in ``texts``."""
    rads = set()
    for text in texts:
        for m in _SQRT_ARG.findall(text):
            m = int(m)
            if m > 1 and is_squarefree(m):
                rads.add(m)
    return RadicalBasis(tuple(sorted(rads)))


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            while stripped[pos].isspace():
                pos += 1
            raise ParseError("unexpected character", text, pos)
        start = m.start(m.lastindex)
        kind = ("uint", "sqrt", "t", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, basis: RadicalBasis):
        self.text = text
        self.basis = basis
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, value=None, kind=None):
        k, v, _ = self.tokens[self.i]
        if kind is not None and k != kind:
            return False
        if value is not None and v != value:
            return False
        return True

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        k, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}", self.text, pos)

    def error(self, message):
        raise ParseError(message, self.text, self.tokens[self.i][2])

    def uint(self) -> int:
        k, v, pos = self.take()
        if k != "uint":
            raise ParseError("expected an unsigned integer", self.text, pos)
        return int(v)

    def parse(self) -> dict[int, SymbolicReal]:
        if self.peek(kind="end"):
            self.error("empty polynomial")
        terms: dict[int, SymbolicReal] = {}
        sign = 1
        while True:
            deg, coef = self.term()
            terms[deg] = terms.get(deg, self.basis.zero()) + coef * sign
            if self.peek("+"):
                self.take()
                sign = 1
            elif self.peek("-"):
                self.take()
                sign = -1
            elif self.peek(kind="end"):
                return terms
            else:
                self.error("expected '+', '-' or end of input")

    def term(self) -> tuple[int, SymbolicReal]:
        neg = False
        if self.peek("-"):
            self.take()
            neg = True
        coef = None
        if self.peek(kind="uint"):
            num = self.uint()
            den = 1
            if self.peek("/"):
                self.take()
                pos = self.tokens[self.i][2]
                den = self.uint()
                if den == 0:
                    raise ParseError("zero denominator", self.text, pos)
            coef = self.basis.rational(Fraction(num, den))
            if self.peek("*"):
                self.take()
                if not (self.peek(kind="sqrt") or self.peek(kind="t")):
                    self.error("expected 'sqrt' or 't' after '*'")
        if self.peek(kind="sqrt"):
            root = self.sqrt()
            coef = root if coef is None else coef * root
            if self.peek("*"):
                self.take()
                if not self.peek(kind="t"):
                    self.error("expected 't' after '*'")
        deg = 0
        if self.peek(kind="t"):
            deg = self.var()
        elif coef is None:
            self.error("expected a coefficient or 't'")
        if coef is None:
            coef = self.basis.one()
        return deg, -coef if neg else coef

    def sqrt(self) -> SymbolicReal:
        self.take()
        self.expect("(")
        pos = self.tokens[self.i][2]
        m = self.uint()
        self.expect(")")
        if m == 0:
            return self.basis.zero()
        s, c = squarefree_part(m)
        if s != 1:
            raise ParseError(f"radicand {m} is not squarefree", self.text, pos)
        if not self.basis.contains(c):
            raise ParseError(f"radicand {m} is not in the basis {list(self.basis.radicands)}",
                             self.text, pos)
        return self.basis.sqrt(m)

    def var(self) -> int:
        self.take()
        if self.peek("^"):
            self.take()
            return self.uint()
        return 1


def parse_polynomial(text: str, basis: RadicalBasis | None = None) -> RealPolynomial:
    if basis is None:
        basis = infer_basis([text])
    terms = _Parser(text, basis).parse()
    deg = max(terms)
    return RealPolynomial(basis, [terms.get(j, basis.zero()) for j in range(deg + 1)])


def _format_term(q: Fraction, radicand: int, deg: int) -> str:
    mag = abs(q)
    var = "" if deg == 0 else ("t" if deg == 1 else f"t^{deg}")
    if radicand == 1:
        if deg == 0:
            return format_rational(mag)
        return var if mag == 1 else f"{format_rational(mag)}*{var}"
    body = f"sqrt({radicand})" if mag == 1 else f"{format_rational(mag)}*sqrt({radicand})"
    return body if deg == 0 else f"{body}*{var}"


def format_polynomial(p: RealPolynomial) -> str:
    pieces = []
    for deg in range(p.degree, -1, -1):
        for radicand, q in reversed(p.coefficients[deg].terms()):
            pieces.append((q < 0, _format_term(q, radicand, deg)))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out


# evaluation ----------------------------------------------------------------

def evaluate(p: RealPolynomial, n) -> SymbolicReal:
    """Horner evaluation at an integer or rational point, exactly."""
    acc = p.basis.zero()
    for c in reversed(p.coefficients):
        acc = acc * n + c
    return acc


def _horner(coeffs: Sequence[int], ns: np.ndarray) -> np.ndarray:
    acc = np.full(ns.shape, coeffs[-1], dtype=object)
    for c in reversed(coeffs[:-1]):
        acc = acc * ns + c
    return acc


def floor_values(p: RealPolynomial, ns) -> np.ndarray:
    """``[p(n)]`` for every integer in ``ns``, as an object array of ints.

    Rational coefficient parts are summed exactly over a common denominator;
    irrational parts go through a fixed-point enclosure whose width is
    certified per entry.  Entries whose enclosure straddles an integer fall
    back to :func:`floor_exact`.
    """
    ns = np.asarray(ns)
    obj = ns.astype(object)
    if obj.size == 0:
        return obj
    rats = [c.rational_part() for c in p.coefficients]
    den = math.lcm(*(q.denominator for q in rats))
    rat_num = _horner([int(q * den) for q in rats], obj)
    irr = [c.irrational_part() for c in p.coefficients]
    live = [j for j, c in enumerate(irr) if not c.is_zero()]
    if not live:
        return rat_num // den
    nmax = max(abs(int(ns.min())), abs(int(ns.max())), 1)
    bits = max(128, 64 + p.degree * nmax.bit_length())
    fixed = [scaled_floor(c, bits) if j in live else 0 for j, c in enumerate(irr)]
    base = _horner(fixed, obj)
    pos = np.zeros(obj.shape, dtype=object)
    neg = np.zeros(obj.shape, dtype=object)
    for j in live:
        power = obj ** j
        pos = pos + np.where(power > 0, power, 0)
        neg = neg + np.where(power < 0, power, 0)
    scale = den << bits
    head = rat_num << bits
    lo = (head + den * (base + neg)) // scale
    hi = (head + den * (base + pos)) // scale
    out = lo
    bad = np.nonzero(lo != hi)[0] if out.ndim == 1 else np.argwhere(lo != hi)
    for idx in bad:
        idx = tuple(np.atleast_1d(idx))
        out[idx] = floor_exact(evaluate(p, int(obj[idx])))
    return out


def frac_values(p: RealPolynomial, ns) -> np.ndarray:
    """``p(n) mod 1`` as float64, reduced in fixed point before rounding."""
    ns = np.asarray(ns)
    obj = ns.astype(object)
    if obj.size == 0:
        return np.zeros(ns.shape)
    rats = [c.rational_part() for c in p.coefficients]
    den = math.lcm(*(q.denominator for q in rats))
    rat_num = _horner([int(q * den) for q in rats], obj)
    nmax = max(abs(int(ns.min())), abs(int(ns.max())), 1)
    bits = max(128, 64 + max(p.degree, 0) * nmax.bit_length())
    mod = 1 << bits
    total = ((rat_num % den) << bits) // den
    irr = [c.irrational_part() for c in p.coefficients]
    if any(not c.is_zero() for c in irr):
        total = total + _horner([scaled_floor(c, bits) for c in irr], obj)
    total = total % mod
    return (total >> (bits - 53)).astype(np.float64) * 2.0 ** -53


def floor_orbit(p: RealPolynomial, n_from: int, n_to: int) -> list[int]:
    """The integer parts ``[p(n)]`` for ``n_from <= n <= n_to``."""
    if n_from > n_to:
        raise ValueError("n_from must not exceed n_to")
    return [int(v) for v in floor_values(p, np.arange(n_from, n_to + 1, dtype=np.int64))]


def shift_rescale(p: RealPolynomial, W: int, r: int) -> RealPolynomial:
    """The polynomial ``t -> p(W t + r)``."""
    if W < 1:
        raise ValueError("W must be a positive integer")
    acc = [p.basis.zero()]
    for c in reversed(p.coefficients):
        # acc * (W t + r) + c
        nxt = [p.basis.zero()] * (len(acc) + 1)
        for j, a in enumerate(acc):
            nxt[j] = nxt[j] + a * r
            nxt[j + 1] = nxt[j + 1] + a * W
        nxt[0] = nxt[0] + c
        acc = nxt
    return RealPolynomial(p.basis, acc)


# strong independence -------------------------------------------------------

def is_strongly_independent(fam: PolynomialFamily) -> IndependenceVerdict:
    """Decide whether every nonzero real combination of the family has an
    irrational coefficient on some positive power of ``t``.

    A real dependency exists iff one exists with coefficients in the field
    spanned by the basis, so the question becomes a homogeneous linear system
    over Q in the coordinates of the combination coefficients.
    """
    basis = fam.basis
    table = basis.table
    m = basis.dimension
    ell = len(fam)
    d = max(p.degree for p in fam)
    rows = []
    for j in range(1, d + 1):
        block = [[Fraction(0)] * (ell * m) for _ in range(m)]
        for i, p in enumerate(fam):
            c = p.coefficient(j)
            for e, q in c.coords.items():
                for k in range(m):
                    s, u = table[k][e]
                    block[u][i * m + k] += s * q
        rows.extend(block[1:])
    null = nullspace(rows, ell * m)
    if not null:
        return IndependenceVerdict(True)
    v = null[0]
    lam = tuple(SymbolicReal(basis, {k: v[i * m + k] for k in range(m)}) for i in range(ell))
    combo = linear_combination(fam, lam)
    rho = tuple(combo.coefficient(j).rational_part() for j in range(1, d + 1))
    return IndependenceVerdict(False, lam, rho)


def linear_combination(fam: PolynomialFamily, lam: Sequence[SymbolicReal]) -> RealPolynomial:
    acc = RealPolynomial(fam.basis, [0])
    for p, c in zip(fam, lam):
        acc = acc + p.scale(c)
    return acc
