"""Finite-window shadows of multiple recurrence and arithmetic configurations.

Sets live in a window ``[1, N]`` as boolean masks.  A set may additionally
remember that it is the Beatty-type set ``{m : frac(m alpha) in [u, v)}``;
shifted intersections of such sets are then counted exactly over the window
even when the shift leaves it, by intersecting arcs on the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from ergolab.polyfam import PolynomialFamily, RealPolynomial, floor_values, infer_basis
from ergolab.primes import sieve_covering
from ergolab.symreal import frac_of_multiples, parse_symreal


@dataclass(frozen=True)
class Rotation:
    """Membership rule ``frac(m alpha) in [u, v)``."""

    alpha: object
    u: float
    v: float


@dataclass(frozen=True)
class FiniteSet:
    N: int
    mask: np.ndarray = field(repr=False)  # mask[m - 1] is membership of m
    rotation: Rotation | None = None

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.N,):
            raise ValueError(f"mask must have length N={self.N}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_elements(cls, elements, N: int) -> "FiniteSet":
        mask = np.zeros(N, dtype=bool)
        el = np.asarray(list(elements), dtype=np.int64)
        el = el[(el >= 1) & (el <= N)]
        mask[el - 1] = True
        return cls(N, mask)

    @classmethod
    def beatty(cls, alpha, N: int, u: float = 0.0, v: float = 0.5) -> "FiniteSet":
        """``{m <= N : u <= frac(m alpha) < v}``."""
        fr = frac_of_multiples(alpha, np.arange(1, N + 1, dtype=np.int64))
        return cls(N, (fr >= u) & (fr < v), Rotation(alpha, float(u), float(v)))

    @property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.mask) + 1

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, m: int) -> bool:
        return 1 <= m <= self.N and bool(self.mask[m - 1])

    def __and__(self, other: "FiniteSet") -> "FiniteSet":
        _same_window(self, other)
        return FiniteSet(self.N, self.mask & other.mask)

    def complement(self) -> "FiniteSet":
        return FiniteSet(self.N, ~self.mask)


def _same_window(a: FiniteSet, b: FiniteSet) -> None:
    if a.N != b.N:
        raise ValueError("sets live in different windows")


def parse_set(spec: str, N: int) -> FiniteSet:
    """Generator expressions ``evens``, ``odds``, ``all``, ``primes``,
    ``beatty <alpha> <v> [<u>]`` or a path to a newline-delimited integer file."""
    words = spec.split()
    head = words[0] if words else ""
    if head == "evens":
        return FiniteSet.from_elements(range(2, N + 1, 2), N)
    if head == "odds":
        return FiniteSet.from_elements(range(1, N + 1, 2), N)
    if head == "all":
        return FiniteSet(N, np.ones(N, dtype=bool))
    if head == "primes":
        table = sieve_covering(N)
        return FiniteSet(N, table.is_prime[1:N + 1].copy())
    if head == "beatty":
        if len(words) not in (3, 4):
            raise ValueError("usage: beatty <alpha> <v> [<u>]")
        alpha = parse_symreal(words[1], infer_basis([words[1]]))
        u = float(Fraction(words[3])) if len(words) == 4 else 0.0
        return FiniteSet.beatty(alpha, N, u, float(Fraction(words[2])))
    path = Path(spec)
    if path.is_file():
        nums = [int(line) for line in path.read_text().split()]
        return FiniteSet.from_elements(nums, N)
    raise ValueError(f"unknown set expression {spec!r}")


# densities -----------------------------------------------------------------

def density(E: FiniteSet) -> Fraction:
    return Fraction(len(E), E.N)


def sliding_upper_density(E: FiniteSet, w: int) -> Fraction:
    """Maximum of ``|E ∩ [M+1, M+w]| / w`` over windows inside ``[1, N]``.

    A finite stand-in for upper Banach density.
    """
    if not 1 <= w <= E.N:
        raise ValueError("window width must satisfy 1 <= w <= N")
    csum = np.concatenate(([0], np.cumsum(E.mask, dtype=np.int64)))
    return Fraction(int(np.max(csum[w:] - csum[:-w])), w)


def shifted_count(E: FiniteSet, offsets: Sequence[int]) -> int:
    """``|{m in [1,N] : m in E, m + k in E for every offset k}|``.

    Membership of ``m + k`` outside the window is decided by the rotation
    rule when the set has one and counts as absent otherwise.
    """
    if E.rotation is not None:
        return _rotation_count(E, offsets)
    acc = E.mask.copy()
    N = E.N
    for k in offsets:
        k = int(k)
        if abs(k) >= N:
            return 0
        shifted = np.zeros(N, dtype=bool)
        if k >= 0:
            shifted[: N - k] = E.mask[k:]
        else:
            shifted[-k:] = E.mask[: N + k]
        acc &= shifted
    return int(acc.sum())


def _arc_pieces(u: float, v: float, s: float) -> list[tuple[float, float]]:
    """``{x in [0,1) : frac(x + s) in [u, v)}`` as disjoint intervals."""
    a, b = (u - s) % 1.0, (u - s) % 1.0 + (v - u)
    if b <= 1.0:
        return [(a, b)]
    return [(a, 1.0), (0.0, b - 1.0)]


def _intersect(xs: list[tuple[float, float]], ys: list[tuple[float, float]]):
    out = []
    for a, b in xs:
        for c, d in ys:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                out.append((lo, hi))
    return out


_FRAC_CACHE: dict = {}


def _sorted_fracs(rot: Rotation, N: int) -> np.ndarray:
    key = (id(rot.alpha), str(rot.alpha), N)
    if key not in _FRAC_CACHE:
        _FRAC_CACHE.clear()
        _FRAC_CACHE[key] = np.sort(frac_of_multiples(rot.alpha, np.arange(1, N + 1, dtype=np.int64)))
    return _FRAC_CACHE[key]


def _rotation_count(E: FiniteSet, offsets: Sequence[int]) -> int:
    rot = E.rotation
    fr = _sorted_fracs(rot, E.N)
    pieces = [(rot.u, rot.v)]
    if offsets:
        shifts = frac_of_multiples(rot.alpha, np.array([int(k) for k in offsets], dtype=object))
        for s in shifts:
            pieces = _intersect(pieces, _arc_pieces(rot.u, rot.v, float(s)))
    total = 0
    for lo, hi in pieces:
        total += int(np.searchsorted(fr, hi, "left") - np.searchsorted(fr, lo, "left"))
    return total


# recurrence ----------------------------------------------------------------

def _family_polys(family) -> list[RealPolynomial]:
    if isinstance(family, PolynomialFamily):
        return list(family.members)
    if isinstance(family, RealPolynomial):
        return [family]
    return list(family)


def _index(n_max: int, mode: str) -> np.ndarray:
    if mode == "all":
        return np.arange(1, n_max + 1, dtype=np.int64)
    if mode == "prime":
        table = sieve_covering(max(n_max, 2))
        return table.primes[table.primes <= n_max]
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class RecurrenceProfile:
    ns: np.ndarray
    terms: list[Fraction]
    density: Fraction
    ell: int
    edge: float
    tolerance: float = 0.0

    @property
    def average(self) -> float:
        return float(sum(self.terms, Fraction(0)) / len(self.terms)) if self.terms else 0.0

    @property
    def bound(self) -> float:
        return float(self.density ** (self.ell + 1))

    @property
    def passed(self) -> bool:
        return self.average >= self.bound - self.edge - self.tolerance

    def to_dict(self) -> dict:
        return {
            "terms": len(self.terms), "average": self.average, "density": float(self.density),
            "bound": self.bound, "epsilon_edge": self.edge, "tolerance": self.tolerance,
            "verdict": "pass" if self.passed else "fail",
        }


def recurrence_profile(E: FiniteSet, family, n_max: int, mode: str = "all",
                       tolerance: float = 0.0) -> RecurrenceProfile:
    """Terms ``d_N(E ∩ (E - [p_1(n)]) ∩ ... ∩ (E - [p_l(n)]))`` for ``n <= n_max``.

    Plain sets need every offset within ``N/2``; the verdict allows the edge
    loss ``l * max|offset| / N`` plus an optional finite-``n`` ``tolerance``.
    Rotation-backed sets are counted exactly
    over the window for any offset, so no edge term applies.
    """
    polys = _family_polys(family)
    ns = _index(n_max, mode)
    offsets = [floor_values(p, ns) for p in polys]
    biggest = max((max(abs(int(k.min())), abs(int(k.max()))) for k in offsets), default=0)
    if E.rotation is None:
        if 2 * biggest > E.N:
            raise ValueError(f"offsets up to {biggest} exceed half the window N={E.N}; lower n_max")
        edge = len(polys) * biggest / E.N
    else:
        edge = 0.0
    terms = [Fraction(shifted_count(E, [k[i] for k in offsets]), E.N) for i in range(ns.size)]
    return RecurrenceProfile(ns, terms, density(E), len(polys), edge, tolerance)


def measure_recurrence_terms(alpha, arc: tuple[float, float], ks) -> np.ndarray:
    """``mu(A ∩ T^{-k} A)`` for the rotation by ``alpha`` and an arc ``A``
    of length at most 1/2: equal to ``max(0, |A| - ||k alpha||)``."""
    length = arc[1] - arc[0]
    if not 0 < length <= 0.5:
        raise ValueError("arc length must lie in (0, 1/2]")
    fr = frac_of_multiples(alpha, ks)
    dist = np.minimum(fr, 1.0 - fr)
    return np.maximum(0.0, length - dist)


def cyclic_recurrence_profile(m: int, A: Sequence[int], poly_coeffs: Sequence[int],
                              period: int | None = None) -> Fraction:
    """Exact average over ``n = 1..period`` of ``|A ∩ (A - p(n))| / m`` on ``Z/m``."""
    period = period or m
    members = np.zeros(m, dtype=bool)
    members[[a % m for a in A]] = True
    total = 0
    for n in range(1, period + 1):
        k = _int_poly(poly_coeffs, n) % m
        total += int(np.sum(members & np.roll(members, -k)))
    return Fraction(total, m * period)


def _int_poly(coeffs: Sequence[int], n: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * n + c
    return acc


@dataclass(frozen=True)
class Violation:
    m: int
    A: tuple[int, ...]
    average: Fraction
    bound: Fraction

    def to_dict(self) -> dict:
        return {"m": self.m, "A": list(self.A), "average": str(self.average), "bound": str(self.bound)}


def cyclic_counterexample_search(max_m: int, poly_coeffs: Sequence[int], min_m: int = 1,
                                 ell: int = 1) -> list[Violation]:
    """Every ``(m, A)`` with period average strictly below ``(|A|/m)^(ell+1)``.

    ``poly_coeffs`` lists integer coefficients from the constant term up.
    Since ``p(n) mod m`` has period ``m``, one period is the exact limit.
    Subsets are enumerated as bitmasks, so ``max_m`` is capped at 16.
    """
    if max_m > 16:
        raise ValueError("exhaustive search is limited to m <= 16")
    out: list[Violation] = []
    for m in range(max(min_m, 1), max_m + 1):
        shifts = np.array([_int_poly(poly_coeffs, n) % m for n in range(1, m + 1)])
        masks = np.arange(1, 1 << m, dtype=np.uint32)
        full = (1 << m) - 1
        total = np.zeros(masks.shape, dtype=np.int64)
        for k in shifts:
            k = int(k)
            # rotate right by k: bit a of the result is bit (a + k) of the mask
            rot = ((masks >> k) | (masks << (m - k))) & full if k else masks
            total += np.bitwise_count(masks & rot)
        sizes = np.bitwise_count(masks).astype(np.int64)
        # total / m^2  <  (size/m)^(ell+1)   <=>   total * m^(ell-1) < size^(ell+1)
        bad = total * m ** (ell - 1) < sizes ** (ell + 1)
        for mask, tot, size in zip(masks[bad], total[bad], sizes[bad]):
            A = tuple(a for a in range(m) if (int(mask) >> a) & 1)
            out.append(Violation(m, A, Fraction(int(tot), m * m), Fraction(int(size), m) ** (ell + 1)))
    return out


# configurations ------------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    m: int
    n: int
    offsets: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "offsets": list(self.offsets)}


def validate_configuration(E: FiniteSet, family, config: Configuration) -> bool:
    """Recompute the offsets and check membership from scratch."""
    polys = _family_polys(family)
    offsets = tuple(math.floor(_evaluate(p, config.n)) for p in polys)
    if offsets != tuple(config.offsets) or any(k == 0 for k in offsets):
        return False
    return config.m in E and all(config.m + k in E for k in offsets)


def _evaluate(p: RealPolynomial, n: int):
    acc = p.basis.zero()
    for c in reversed(p.coefficients):
        acc = acc * n + c
    return acc


def find_configuration(E: FiniteSet, family, n_max: int, mode: str = "all") -> Configuration | None:
    """First ``(n, m)`` in lexicographic order with ``m, m + [p_i(n)]`` all in ``E``."""
    polys = _family_polys(family)
    ns = _index(n_max, mode)
    if ns.size == 0:
        return None
    offsets = [floor_values(p, ns) for p in polys]
    mask = E.mask
    N = E.N
    for i, n in enumerate(ns):
        ks = [int(k[i]) for k in offsets]
        if any(k == 0 or abs(k) >= N for k in ks):
            continue
        acc = mask.copy()
        for k in ks:
            shifted = np.zeros(N, dtype=bool)
            if k > 0:
                shifted[: N - k] = mask[k:]
            else:
                shifted[-k:] = mask[: N + k]
            acc &= shifted
        hits = np.flatnonzero(acc)
        if hits.size:
            return Configuration(int(hits[0]) + 1, int(n), tuple(ks))
    return None


def solve_dilated_system(E: FiniteSet, dilates: Sequence[int], family, n_max: int) -> tuple | None:
    """First ``(n, x_0)`` with ``c_i x_i - c_0 x_0 = [p_i(n)]`` solvable in ``E``.

    Returns ``((x_0, ..., x_l), n)`` or ``None``.
    """
    polys = _family_polys(family)
    if len(dilates) != len(polys) + 1:
        raise ValueError("need one dilate per polynomial plus c_0")
    if any(c < 1 for c in dilates):
        raise ValueError("dilates must be positive")
    if len(E) == 0:
        return None
    N = E.N
    c0 = dilates[0]
    xs = E.elements
    ns = _index(n_max, "all")
    offsets = [floor_values(p, ns) for p in polys]
    for i, n in enumerate(ns):
        # x_i = (c_0 x_0 + k_i) / c_i must be an integer in E
        ok = np.ones(xs.size, dtype=bool)
        sols = []
        for c, k in zip(dilates[1:], offsets):
            val = c0 * xs + int(k[i])
            xi = val // c
            good = (val % c == 0) & (xi >= 1) & (xi <= N)
            good[good] = E.mask[xi[good] - 1]
            ok &= good
            sols.append(xi)
        hits = np.flatnonzero(ok)
        if hits.size:
            j = int(hits[0])
            return (int(xs[j]),) + tuple(int(s[j]) for s in sols), int(n)
    return None


@dataclass(frozen=True)
class Gaps:
    interior: int
    leading: int
    trailing: int

    def to_dict(self) -> dict:
        return {"interior": self.interior, "leading": self.leading, "trailing": self.trailing}


def syndeticity_gap(E: FiniteSet) -> Gaps:
    """Largest gap between consecutive elements, plus the boundary gaps
    ``first - 1`` and ``N - last`` reported separately."""
    el = E.elements
    if el.size == 0:
        raise ValueError("empty set has no gaps")
    interior = int(np.max(np.diff(el))) if el.size > 1 else 0
    return Gaps(interior, int(el[0] - 1), int(E.N - el[-1]))


def recurrence_set(alpha, arc: tuple[float, float], family, n_max: int, eps: float) -> FiniteSet:
    """``{n <= n_max : mu(A ∩ T^{-[p(n)]} A) > mu(A)^2 - eps}`` for a rotation."""
    (p,) = _family_polys(family)
    ks = floor_values(p, np.arange(1, n_max + 1, dtype=np.int64))
    terms = measure_recurrence_terms(alpha, arc, ks)
    mu = arc[1] - arc[0]
    return FiniteSet(n_max, terms > mu * mu - eps)
