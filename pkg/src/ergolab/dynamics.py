"""Concrete measure-preserving systems and observables on them.

Every system here acts on a compact abelian or 2-step nilmanifold whose Haar
measure is Lebesgue measure on the unit cube of the chosen coordinates:

* :class:`CyclicSystem` -- rotation ``r -> r + a`` on ``Z/m``;
* :class:`TorusRotation` -- ``x -> x + alpha`` on ``T^s``;
* :class:`AffineSkewSystem` -- ``(x, y) -> (x + alpha, y + x)`` on ``T^2``;
* :class:`HeisenbergSystem` -- left translation by ``b`` on the Heisenberg
  nilmanifold, coordinates ``(x, y, z)`` with
  ``(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')`` and lattice ``Z^3``.

Orbits under huge exponents ``k`` are computed from exact integers: the
pieces of ``T^k x`` that are reduced mod 1 are formed in fixed point before
conversion to double, so the result does not degrade as ``k`` grows.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from ergolab.symreal import (
    RadicalBasis,
    SymbolicReal,
    frac_of_multiples,
    parse_symreal,
    scaled_floor,
    unify,
)

Real = Union[SymbolicReal, Fraction, int]


class CompatibilityError(ValueError):
    """An observable or point does not fit the system it is used with."""


def _exact(v) -> Real:
    if isinstance(v, (SymbolicReal, Fraction, int)):
        return v
    if isinstance(v, float):
        return Fraction(v)
    raise TypeError(f"cannot use {v!r} as an exact real")


# systems -------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicSystem:
    m: int
    a: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "a", self.a % self.m)

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class TorusRotation:
    alpha: tuple

    def __post_init__(self):
        alpha = self.alpha
        if not isinstance(alpha, (tuple, list)):
            alpha = (alpha,)
        if not alpha:
            raise ValueError("torus dimension must be at least 1")
        object.__setattr__(self, "alpha", tuple(_exact(a) for a in alpha))

    @property
    def dim(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class AffineSkewSystem:
    alpha: Real

    def __post_init__(self):
        object.__setattr__(self, "alpha", _exact(self.alpha))

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class HeisenbergElement:
    x: Real
    y: Real
    z: Real

    def __mul__(self, other: "HeisenbergElement") -> "HeisenbergElement":
        return HeisenbergElement(self.x + other.x, self.y + other.y,
                                 self.z + other.z + self.x * other.y)

    def inverse(self) -> "HeisenbergElement":
        return HeisenbergElement(-self.x, -self.y, -self.z + self.x * self.y)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    @classmethod
    def identity(cls) -> "HeisenbergElement":
        return cls(0, 0, 0)


def heisenberg_power(b: HeisenbergElement, t) -> HeisenbergElement:
    """``b**t`` along the one-parameter subgroup through ``b``."""
    half = Fraction(t * (t - 1), 2) if isinstance(t, int) else t * (t - 1) / 2
    return HeisenbergElement(t * b.x, t * b.y, t * b.z + half * b.x * b.y)


def reduce_mod_lattice(g: HeisenbergElement) -> HeisenbergElement:
    """Representative of ``g Z^3`` in ``[0,1)^3``.

    Right-multiplies by ``(A, B, C)`` with ``A = -[x]``, ``B = -[y]``,
    ``C = -[z + x B]``.
    """
    A = -math.floor(g.x)
    B = -math.floor(g.y)
    zb = g.z + g.x * B
    C = -math.floor(zb)
    return HeisenbergElement(g.x + A, g.y + B, zb + C)


@dataclass(frozen=True)
class HeisenbergSystem:
    b: HeisenbergElement

    def __post_init__(self):
        b = self.b
        if not isinstance(b, HeisenbergElement):
            b = HeisenbergElement(*b)
        object.__setattr__(self, "b", HeisenbergElement(*unify(_exact(v) for v in b)))

    @property
    def dim(self) -> int:
        return 3


System = Union[CyclicSystem, TorusRotation, AffineSkewSystem, HeisenbergSystem]


# observables ---------------------------------------------------------------

@dataclass(frozen=True)
class TrigPolynomial:
    """Finite sum of characters ``c_h e(h . x)``."""

    terms: tuple

    def __post_init__(self):
        terms = self.terms
        if isinstance(terms, dict):
            terms = terms.items()
        merged: dict[tuple[int, ...], complex] = {}
        for h, c in terms:
            h = tuple(int(v) for v in h)
            merged[h] = merged.get(h, 0) + complex(c)
        dims = {len(h) for h in merged}
        if len(dims) > 1:
            raise ValueError("frequency vectors must share one dimension")
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))

    @property
    def dim(self) -> int:
        return len(self.terms[0][0]) if self.terms else 0

    @classmethod
    def constant(cls, c: complex, dim: int) -> "TrigPolynomial":
        return cls((((0,) * dim, c),))

    @classmethod
    def character(cls, *h: int, coef: complex = 1) -> "TrigPolynomial":
        return cls(((tuple(h), coef),))

    def coefficients(self) -> dict[tuple[int, ...], complex]:
        return dict(self.terms)

    def __mul__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        out: dict[tuple[int, ...], complex] = {}
        for h, c in self.terms:
            for g, d in other.terms:
                k = tuple(a + b for a, b in zip(h, g))
                out[k] = out.get(k, 0) + c * d
        return TrigPolynomial(tuple(out.items()))

    def padded(self, dim: int) -> "TrigPolynomial":
        if self.dim > dim:
            raise CompatibilityError(f"observable of dimension {self.dim} on a {dim}-dimensional space")
        return TrigPolynomial(tuple((h + (0,) * (dim - len(h)), c) for h, c in self.terms))


@dataclass(frozen=True)
class BoxIndicator:
    """Indicator of a product of arcs ``[u_i, v_i)`` with ``0 <= u_i < v_i <= 1``."""

    arcs: tuple

    def __post_init__(self):
        arcs = tuple((Fraction(u), Fraction(v)) for u, v in self.arcs)
        for u, v in arcs:
            if not (0 <= u < v <= 1):
                raise ValueError(f"arc [{u}, {v}) is not inside [0, 1)")
        object.__setattr__(self, "arcs", arcs)

    @property
    def dim(self) -> int:
        return len(self.arcs)

    @property
    def volume(self) -> Fraction:
        vol = Fraction(1)
        for u, v in self.arcs:
            vol *= v - u
        return vol


Observable = Union[TrigPolynomial, BoxIndicator]


def e(theta):
    """``exp(2 pi i theta)`` for scalars or arrays."""
    return np.exp(2j * np.pi * np.asarray(theta, dtype=float))


def evaluate_observable(f: Observable, points) -> np.ndarray:
    """Evaluate at points of shape ``(..., dim)`` with coordinates in [0, 1)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1)
    if pts.shape[-1] != f.dim and not (isinstance(f, TrigPolynomial) and f.dim < pts.shape[-1]):
        raise CompatibilityError(f"observable dimension {f.dim} vs point dimension {pts.shape[-1]}")
    if isinstance(f, TrigPolynomial):
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for h, c in f.terms:
            phase = np.zeros(pts.shape[:-1])
            for i, hi in enumerate(h):
                if hi:
                    phase = phase + hi * pts[..., i]
            out += c * np.exp(2j * np.pi * phase)
        return out
    inside = np.ones(pts.shape[:-1], dtype=bool)
    for i, (u, v) in enumerate(f.arcs):
        inside &= (pts[..., i] >= float(u)) & (pts[..., i] < float(v))
    return inside.astype(complex)


def _check_dim(system: System, f: Observable) -> None:
    if isinstance(system, HeisenbergSystem) and isinstance(f, TrigPolynomial):
        if f.dim not in (2, 3):
            raise CompatibilityError("Heisenberg characters need 2 or 3 frequency entries")
        if f.dim == 3 and any(h[2] for h, _ in f.terms):
            raise CompatibilityError(
                "only horizontal characters e(h1 x + h2 y) are supported on the Heisenberg nilmanifold")
        return
    if f.dim != system.dim:
        raise CompatibilityError(f"observable dimension {f.dim} on a {system.dim}-dimensional system")


def haar_integral(system: System, f: Observable) -> complex:
    """Exact integral of ``f`` against the Haar measure of ``system``."""
    _check_dim(system, f)
    if isinstance(system, CyclicSystem):
        m = system.m
        if isinstance(f, TrigPolynomial):
            return complex(sum(c for h, c in f.terms if h[0] % m == 0))
        u, v = f.arcs[0]
        # residues r with u <= r/m < v
        count = max(0, math.ceil(v * m) - math.ceil(u * m))
        return complex(Fraction(count, m))
    if isinstance(f, TrigPolynomial):
        return complex(sum(c for h, c in f.terms if not any(h)))
    return complex(f.volume)


# point handling ------------------------------------------------------------

def as_point(system: System, point) -> tuple[Fraction, ...]:
    """Exact coordinates of ``point`` (residues for cyclic systems)."""
    if isinstance(system, CyclicSystem):
        r = int(point[0] if isinstance(point, (tuple, list)) else point)
        return (Fraction(r % system.m, system.m),)
    if isinstance(point, HeisenbergElement):
        point = tuple(point)
    if not isinstance(point, (tuple, list)):
        point = (point,)
    if len(point) != system.dim:
        raise CompatibilityError(f"point {point} does not have dimension {system.dim}")
    out = []
    for v in point:
        v = _exact(v)
        if isinstance(v, SymbolicReal):
            v = Fraction(scaled_floor(v, 64), 1 << 64)
        v = Fraction(v)
        out.append(v - math.floor(v))
    return tuple(out)


def origin(system: System) -> tuple[Fraction, ...]:
    return (Fraction(0),) * system.dim


KOROBOV_MULTIPLIER = 157


def lattice_points(system: System, G: int = 256) -> list[tuple[Fraction, ...]]:
    """Deterministic low-discrepancy start points for L2 sampling.

    Cyclic systems with at most ``G`` residues use every residue.  Otherwise a
    centred rank-1 (Korobov) lattice with ``G`` points is used.
    """
    if isinstance(system, CyclicSystem):
        m = system.m
        if m <= G:
            return [(Fraction(r, m),) for r in range(m)]
        return [(Fraction((g * m) // G, m),) for g in range(G)]
    gen = [pow(KOROBOV_MULTIPLIER, i, G) for i in range(system.dim)]
    return [tuple(Fraction(2 * ((g * z) % G) + 1, 2 * G) for z in gen) for g in range(G)]


def _frac_times(ks: np.ndarray, q: Fraction, cache: dict) -> np.ndarray:
    """``frac(k q)`` for integer ``k`` and rational ``q``, exactly reduced."""
    num, den = q.numerator, q.denominator
    if num == 0:
        return np.zeros(ks.shape)
    if den < (1 << 31):
        key = ("mod", den)
        if key not in cache:
            cache[key] = (ks % den).astype(np.int64)
        r = (cache[key] * (num % den)) % den
        return r.astype(float) / den
    return (((ks * num) % den) / den).astype(float)


def _heisenberg_parts(b: HeisenbergElement, ks: np.ndarray) -> dict:
    """Per-exponent data for ``b**k`` (unreduced): integer and fractional
    parts of the first two coordinates and ``frac(w - frac(u) * [v])``."""
    kmax = max(abs(int(ks.min())), abs(int(ks.max())), 1)
    size = max(abs(math.floor(v)) + 1 for v in (b.x, b.y, b.z, b.x * b.y))
    K = 96 + 2 * kmax.bit_length() + 2 * size.bit_length()
    A1, A2 = scaled_floor(b.x, K), scaled_floor(b.y, K)
    A3 = scaled_floor(b.z, 2 * K)
    A12 = scaled_floor(b.x * b.y, 2 * K)
    mod = 1 << K
    uK = ks * A1
    vK = ks * A2
    U = uK >> K
    V = vK >> K
    fuK = uK - (U << K)
    fvK = vK - (V << K)
    C = (ks * (ks - 1)) // 2
    wK2 = ks * A3 + C * A12
    P = (wK2 - ((fuK * V) << K)) % (mod << K)
    to_float = lambda arr, bits: (arr >> (bits - 53)).astype(np.float64) * 2.0 ** -53
    return {"U": U, "V": V, "fu": to_float(fuK, K), "fv": to_float(fvK, K), "P": to_float(P, 2 * K)}


def orbit_points(system: System, ks, points: Sequence[tuple[Fraction, ...]]) -> np.ndarray:
    """``T^k x`` for every start point and exponent; shape ``(len(points), len(ks), dim)``.

    Coordinates are floats in [0,1).  For cyclic systems the coordinate is
    ``residue / m``.
    """
    ks = np.asarray(ks)
    ks = ks.astype(object) if ks.dtype != object else ks
    n = ks.shape[0]
    out = np.empty((len(points), n, system.dim))
    if n == 0:
        return out
    cache: dict = {}
    if isinstance(system, CyclicSystem):
        m = system.m
        steps = ((ks * system.a) % m).astype(np.int64)
        for g, (x,) in enumerate(points):
            r = int(x * m)
            out[g, :, 0] = ((steps + r) % m) / m
        return out
    if isinstance(system, TorusRotation):
        shifts = [frac_of_multiples(a, ks) for a in system.alpha]
        for g, x in enumerate(points):
            for s, sh in enumerate(shifts):
                out[g, :, s] = np.mod(float(x[s]) + sh, 1.0)
        return _clip(out)
    if isinstance(system, AffineSkewSystem):
        kalpha = frac_of_multiples(system.alpha, ks)
        calpha = frac_of_multiples(system.alpha, (ks * (ks - 1)) // 2)
        for g, (x, y) in enumerate(points):
            out[g, :, 0] = np.mod(float(x) + kalpha, 1.0)
            out[g, :, 1] = np.mod(float(y) + _frac_times(ks, x, cache) + calpha, 1.0)
        return _clip(out)
    if isinstance(system, HeisenbergSystem):
        parts = _heisenberg_parts(system.b, ks)
        fu, fv, P = parts["fu"], parts["fv"], parts["P"]
        for g, (x1, x2, x3) in enumerate(points):
            xs = fu + float(x1)
            cx = np.floor(xs)
            ys = fv + float(x2)
            cy = np.floor(ys)
            ux2 = _frac_times(parts["U"], x2, {})
            x1v = _frac_times(parts["V"], x1, {})
            z = P + float(x3) + ux2 + fu * float(x2) - x1v - (fu + float(x1)) * cy
            out[g, :, 0] = xs - cx
            out[g, :, 1] = ys - cy
            out[g, :, 2] = np.mod(z, 1.0)
        return _clip(out)
    raise TypeError(f"unknown system {system!r}")


def _clip(arr: np.ndarray) -> np.ndarray:
    # x mod 1.0 can round up to exactly 1.0 for tiny negative x
    arr[arr >= 1.0] = 0.0
    return arr


def iterate(system: System, point, k: int):
    """``T^k`` applied to one point (a residue for cyclic systems)."""
    x = as_point(system, point)
    if isinstance(system, HeisenbergSystem) and _is_rational_element(system.b):
        g = reduce_mod_lattice(heisenberg_power(system.b, k) * HeisenbergElement(*x))
        return tuple(float(v) for v in g)
    res = orbit_points(system, [int(k)], [x])[0, 0]
    if isinstance(system, CyclicSystem):
        return int(round(res[0] * system.m)) % system.m
    return tuple(float(v) for v in res)


def _is_rational_element(b: HeisenbergElement) -> bool:
    return all(isinstance(v, (int, Fraction)) or (isinstance(v, SymbolicReal) and v.is_rational())
               for v in b)


# descriptors ---------------------------------------------------------------

def _real_from_json(v, basis: RadicalBasis) -> Real:
    if isinstance(v, str):
        return parse_symreal(v, basis)
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(v)


def system_from_descriptor(desc: dict, basis: RadicalBasis | None = None) -> System:
    """Build a system from its JSON descriptor, e.g.
    ``{"kind": "torus", "alpha": ["sqrt(2)"], "dim": 1}``."""
    from ergolab.polyfam import infer_basis

    kind = desc.get("kind")
    strings = [v for v in _flatten(desc.values()) if isinstance(v, str)]
    basis = basis or infer_basis(strings)
    if kind == "cyclic":
        return CyclicSystem(int(desc["m"]), int(desc.get("a", 1)))
    if kind == "torus":
        alpha = desc["alpha"]
        if not isinstance(alpha, list):
            alpha = [alpha]
        if "dim" in desc and int(desc["dim"]) != len(alpha):
            raise ValueError("torus dim does not match the length of alpha")
        return TorusRotation(tuple(_real_from_json(a, basis) for a in alpha))
    if kind == "affine":
        return AffineSkewSystem(_real_from_json(desc["alpha"], basis))
    if kind == "heisenberg":
        b = desc["b"]
        if len(b) != 3:
            raise ValueError("heisenberg b needs three coordinates")
        return HeisenbergSystem(HeisenbergElement(*(_real_from_json(v, basis) for v in b)))
    raise ValueError(f"unknown system kind {kind!r}")


def _flatten(values):
    for v in values:
        if isinstance(v, list):
            yield from _flatten(v)
        else:
            yield v


def _real_to_json(v):
    if isinstance(v, SymbolicReal):
        return str(v)
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else float(v)


def system_descriptor(system: System) -> dict:
    if isinstance(system, CyclicSystem):
        return {"kind": "cyclic", "m": system.m, "a": system.a}
    if isinstance(system, TorusRotation):
        return {"kind": "torus", "alpha": [_real_to_json(a) for a in system.alpha], "dim": system.dim}
    if isinstance(system, AffineSkewSystem):
        return {"kind": "affine", "alpha": _real_to_json(system.alpha)}
    return {"kind": "heisenberg", "b": [_real_to_json(v) for v in system.b]}


# observable mini-language ---------------------------------------------------

_VARS = {"x": 0, "y": 1, "z": 2}
_CHAR = re.compile(r"([+-]?)\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\*?\s*)?e\(([^)]*)\)")
_NUM = re.compile(r"([+-]?)\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)")
_LIN = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*([a-z]\d*)")


def _var_index(name: str) -> int:
    if name in _VARS:
        return _VARS[name]
    if name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1:
        return int(name[1:]) - 1
    raise ValueError(f"unknown variable {name!r}")


def _parse_linear(text: str) -> dict[int, int]:
    out: dict[int, int] = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _LIN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse frequency expression {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) else 1
        idx = _var_index(m.group(3))
        out[idx] = out.get(idx, 0) + sign * coef
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_observable(text: str, dim: int) -> Observable:
    """Parse ``"e(h1 x + h2 y)"`` style sums or ``"box u1 v1 [u2 v2 ...]"``."""
    text = text.strip()
    if text.startswith("box"):
        nums = text[3:].split()
        if len(nums) % 2 or not nums:
            raise ValueError("box needs pairs of endpoints")
        arcs = [(Fraction(nums[i]), Fraction(nums[i + 1])) for i in range(0, len(nums), 2)]
        return BoxIndicator(tuple(arcs))
    terms: list[tuple[tuple[int, ...], complex]] = []
    pos = 0
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _CHAR.match(text, pos)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            coef = float(m.group(2)) if m.group(2) else 1.0
            freq = _parse_linear(m.group(3))
            if freq and max(freq) >= dim:
                raise CompatibilityError(f"variable index {max(freq)} exceeds dimension {dim}")
            h = tuple(freq.get(i, 0) for i in range(dim))
            terms.append((h, sign * coef))
            pos = m.end()
            continue
        m = _NUM.match(text, pos)
        if m and m.end() > pos:
            sign = -1 if m.group(1) == "-" else 1
            terms.append(((0,) * dim, sign * float(m.group(2))))
            pos = m.end()
            continue
        raise ValueError(f"cannot parse observable {text!r} at position {pos}")
    if not terms:
        raise ValueError("empty observable")
    return TrigPolynomial(tuple(terms))


def observable_dim(system: System) -> int:
    """Frequency-vector length used for characters on ``system``."""
    return 2 if isinstance(system, HeisenbergSystem) else system.dim
