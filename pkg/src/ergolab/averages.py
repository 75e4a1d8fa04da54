"""Multiple ergodic averages, Weyl sums, equidistribution and uniformity norms.

Averages of ``prod_i f_i(T^{k_i(n)} x)`` are computed by one engine with two
backends:

``exact``
    Torus rotations with trigonometric-polynomial observables.  The average
    as a function of ``x`` is a trigonometric polynomial whose coefficient at
    frequency ``H`` is a weighted exponential sum; those sums are computed
    with phases reduced mod 1 in exact integer arithmetic.  The L2 distance
    to the target then follows from Parseval.
``sampling``
    Any system.  The average is evaluated at a deterministic lattice of
    start points and the L2 distance is the root-mean-square over it.

Work is split into fixed chunks of ``n`` whose edges do not depend on the
number of workers, and chunk sums are combined with a fixed pairwise tree, so
results are bit-for-bit identical for any worker count.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from ergolab.dynamics import (
    CompatibilityError,
    CyclicSystem,
    HeisenbergSystem,
    Observable,
    System,
    TorusRotation,
    TrigPolynomial,
    _check_dim,
    as_point,
    evaluate_observable,
    haar_integral,
    lattice_points,
    orbit_points,
)
from ergolab.polyfam import (
    PolynomialFamily,
    RealPolynomial,
    floor_values,
    frac_values,
    shift_rescale,
)
from ergolab.primes import W_of, sieve_covering
from ergolab.symreal import RadicalBasis, frac_of_multiples

DEFAULT_CHECKPOINTS = (10**3, 10**4, 10**5, 10**6)
CHUNK = 8192
TREND_SLACK = 1.5
DEFAULT_GRID = 256
MAX_SUBRUNS = 512


def default_workers() -> int:
    env = os.environ.get("ERGOLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def trend_ok(errors: Sequence[float], slack: float = TREND_SLACK) -> bool:
    """Errors never grow by more than ``slack`` between checkpoints."""
    return all(b <= slack * a + 1e-12 for a, b in zip(errors, errors[1:]))


# schemes -------------------------------------------------------------------

SCHEME_KINDS = ("cesaro", "uniform", "prime", "lambda_weighted", "w_tricked")


@dataclass(frozen=True)
class Scheme:
    """Summation scheme.  ``N`` is supplied by the checkpoint schedule."""

    kind: str = "cesaro"
    M: int = 0
    w: int | None = None
    r: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.M < 0:
            raise ValueError("M must be non-negative")
        if self.kind == "w_tricked":
            if self.w is None or self.r is None:
                raise ValueError("w_tricked needs w and r")
            W, _ = W_of(self.w)
            if not 1 <= self.r <= W or math.gcd(self.r, W) != 1:
                raise ValueError(f"r must be a unit modulo W={W}")

    @property
    def start(self) -> int:
        return self.M + 1 if self.kind == "uniform" else 1

    def label(self) -> str:
        if self.kind == "uniform":
            return f"uniform(M={self.M})"
        if self.kind == "w_tricked":
            return f"w_tricked(w={self.w},r={self.r})"
        return self.kind

    def check_checkpoint(self, N: int) -> None:
        if N < 1:
            raise ValueError("N must be at least 1")
        if self.kind == "uniform" and N <= self.M:
            raise ValueError(f"uniform scheme needs N > M (got N={N}, M={self.M})")

    def normalizer(self, N: int) -> float:
        if self.kind == "uniform":
            return float(N - self.M)
        if self.kind == "prime":
            return float(max(sieve_covering(N).pi_of(N), 1))
        return float(N)


# iterate families ----------------------------------------------------------

@dataclass(frozen=True)
class PolynomialIterates:
    """``k_i(n) = [p_i(n)]``."""

    polys: tuple

    @property
    def ell(self) -> int:
        return len(self.polys)

    def exponents(self, ns: np.ndarray) -> list[np.ndarray]:
        return [floor_values(p, ns) for p in self.polys]

    def rescaled(self, W: int, r: int) -> "PolynomialIterates":
        return PolynomialIterates(tuple(shift_rescale(p, W, r) for p in self.polys))


@dataclass(frozen=True)
class FurstenbergIterates:
    """``k_i(n) = i [q(n)]`` for ``i = 1..ell``."""

    q: RealPolynomial
    ell: int

    def exponents(self, ns: np.ndarray) -> list[np.ndarray]:
        base = floor_values(self.q, ns)
        return [i * base for i in range(1, self.ell + 1)]

    def rescaled(self, W: int, r: int) -> "FurstenbergIterates":
        return FurstenbergIterates(shift_rescale(self.q, W, r), self.ell)


@dataclass(frozen=True)
class LinearIterates:
    """``k_i(n) = i n``, the classical Furstenberg average."""

    ell: int

    def exponents(self, ns: np.ndarray) -> list[np.ndarray]:
        obj = ns.astype(object)
        return [i * obj for i in range(1, self.ell + 1)]


Iterates = Union[PolynomialIterates, FurstenbergIterates, LinearIterates]


def as_iterates(family) -> Iterates:
    if isinstance(family, (PolynomialIterates, FurstenbergIterates, LinearIterates)):
        return family
    if isinstance(family, PolynomialFamily):
        return PolynomialIterates(tuple(family.members))
    if isinstance(family, RealPolynomial):
        return PolynomialIterates((family,))
    return PolynomialIterates(tuple(family))


# kernels -------------------------------------------------------------------

class _ExactKernel:
    """Coefficient of every output frequency ``H`` of the average."""

    name = "exact"

    def __init__(self, system: TorusRotation, observables: Sequence[TrigPolynomial], x0):
        self.alpha = system.alpha
        self.dim = system.dim
        groups: dict[tuple[int, ...], list] = {}
        for combo in itertools.product(*(f.terms for f in observables)):
            hs = [h for h, _ in combo]
            coef = complex(np.prod([c for _, c in combo])) if combo else 1 + 0j
            H = tuple(sum(h[j] for h in hs) for j in range(self.dim))
            groups.setdefault(H, []).append((hs, coef))
        self.modes = sorted(groups)
        self.combos = [(self.modes.index(H), hs, coef)
                       for H in self.modes for hs, coef in groups[H]]
        x = [float(v) for v in x0]
        self.at_x0 = np.array([np.exp(2j * np.pi * sum(H[j] * x[j] for j in range(self.dim)))
                               for H in self.modes])
        self.zero_mode = self.modes.index((0,) * self.dim) if (0,) * self.dim in groups else None

    @property
    def rows(self) -> int:
        return len(self.modes)

    def chunk(self, exps: list[np.ndarray], weights: np.ndarray) -> np.ndarray:
        out = np.zeros(self.rows, dtype=complex)
        n = weights.shape[0]
        for mode, hs, coef in self.combos:
            phase = np.zeros(n)
            for j in range(self.dim):
                mult = sum(int(h[j]) * k for h, k in zip(hs, exps) if h[j])
                if isinstance(mult, np.ndarray):
                    phase += frac_of_multiples(self.alpha[j], mult)
            out[mode] += coef * np.sum(weights * np.exp(2j * np.pi * phase))
        return out

    def constant_rows(self, target: complex) -> np.ndarray:
        rows = np.zeros(self.rows, dtype=complex)
        if self.zero_mode is None:
            if target != 0:
                raise ValueError("target has no matching zero-frequency mode")
        else:
            rows[self.zero_mode] = target
        return rows

    def value(self, rows: np.ndarray) -> complex:
        return complex(np.sum(rows * self.at_x0))

    def distance(self, rows: np.ndarray, target_rows: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(rows - target_rows) ** 2)))


class _SamplingKernel:
    """Averages at the start point (row 0) and at a lattice of start points."""

    name = "sampling"

    def __init__(self, system: System, observables: Sequence[Observable], x0, grid: int):
        self.system = system
        self.observables = list(observables)
        self.points = [x0] + lattice_points(system, grid)

    @property
    def rows(self) -> int:
        return len(self.points)

    def chunk(self, exps: list[np.ndarray], weights: np.ndarray) -> np.ndarray:
        prod = np.ones((self.rows, weights.shape[0]), dtype=complex)
        for f, k in zip(self.observables, exps):
            prod *= evaluate_observable(f, orbit_points(self.system, k, self.points))
        return prod @ weights.astype(complex)

    def constant_rows(self, target: complex) -> np.ndarray:
        return np.full(self.rows, target, dtype=complex)

    def value(self, rows: np.ndarray) -> complex:
        return complex(rows[0])

    def distance(self, rows: np.ndarray, target_rows: np.ndarray) -> float:
        diff = np.abs(rows[1:] - target_rows[1:]) ** 2
        return float(np.sqrt(np.mean(diff)))


def _make_kernel(system, observables, x0, backend: str, grid: int):
    trig_torus = isinstance(system, TorusRotation) and all(
        isinstance(f, TrigPolynomial) for f in observables)
    if backend == "auto":
        backend = "exact" if trig_torus else "sampling"
    if backend == "exact":
        if not trig_torus:
            raise CompatibilityError("the exact backend needs a torus and trigonometric observables")
        return _ExactKernel(system, observables, x0)
    if backend == "sampling":
        return _SamplingKernel(system, observables, x0, grid)
    raise ValueError(f"unknown backend {backend!r}")


# the engine ----------------------------------------------------------------

IndexFn = Callable[[int, int], np.ndarray]
WeightFn = Callable[[np.ndarray], np.ndarray]


def _dense(a: int, b: int) -> np.ndarray:
    return np.arange(a, b + 1, dtype=np.int64)


def _primes_between(a: int, b: int) -> np.ndarray:
    table = sieve_covering(b)
    lo, hi = np.searchsorted(table.primes, [a, b + 1])
    return table.primes[lo:hi]


def _chunk_edges(start: int, checkpoints: Sequence[int]) -> list[tuple[int, int]]:
    edges = sorted(set(range(start - 1 + CHUNK, checkpoints[-1], CHUNK)) | set(checkpoints))
    out, a = [], start
    for b in edges:
        if b >= a:
            out.append((a, b))
            a = b + 1
    return out


def _tree_sum(parts: list[np.ndarray]) -> np.ndarray:
    """Pairwise reduction whose shape depends only on ``len(parts)``."""
    if not parts:
        raise ValueError("nothing to sum")
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _accumulate(kernel, iterates: Iterates, index: IndexFn, weight: WeightFn, start: int,
                checkpoints: Sequence[int], workers: int | None) -> list[np.ndarray]:
    """Weighted row sums ``sum_{start <= n <= N}`` for every checkpoint ``N``."""
    chunks = _chunk_edges(start, checkpoints)

    def work(edge):
        ns = index(*edge)
        if ns.size == 0:
            return np.zeros(kernel.rows, dtype=complex)
        return kernel.chunk(iterates.exponents(ns), weight(ns))

    workers = workers or default_workers()
    if workers == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, chunks))
    sums = []
    for N in checkpoints:
        upto = [p for (a, b), p in zip(chunks, parts) if b <= N]
        sums.append(_tree_sum(upto) if upto else np.zeros(kernel.rows, dtype=complex))
    return sums


def _scheme_plan(scheme: Scheme) -> tuple[IndexFn, WeightFn]:
    ones = lambda ns: np.ones(ns.shape)
    if scheme.kind in ("cesaro", "uniform"):
        return _dense, ones
    if scheme.kind == "prime":
        return _primes_between, ones
    if scheme.kind == "lambda_weighted":
        return _primes_between, lambda ns: np.log(ns.astype(float))
    W, phi = W_of(scheme.w)

    def index(a, b):
        ns = _dense(a, b)
        vals = W * ns + scheme.r
        return ns[sieve_covering(int(vals[-1])).is_prime[vals]] if ns.size else ns

    return index, lambda ns: (phi / W) * np.log((W * ns + scheme.r).astype(float))


# reports -------------------------------------------------------------------

@dataclass
class Checkpoint:
    N: int
    value: complex
    abs_error: float
    l2_error: float


@dataclass
class ConvergenceReport:
    scheme: str
    target: complex
    checkpoints: list[Checkpoint]
    backend: str
    reference: list[complex] | None = None

    @property
    def values(self) -> list[complex]:
        return [c.value for c in self.checkpoints]

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]

    @property
    def trend(self) -> bool:
        return trend_ok([c.l2_error for c in self.checkpoints])

    def to_dict(self) -> dict:
        out = {
            "scheme": self.scheme,
            "backend": self.backend,
            "checkpoints": [
                {"N": c.N, "value": [c.value.real, c.value.imag],
                 "abs_error": c.abs_error, "l2_error": c.l2_error}
                for c in self.checkpoints
            ],
            "target": [self.target.real, self.target.imag],
            "trend": "pass" if self.trend else "fail",
        }
        if self.reference is not None:
            out["reference"] = [[v.real, v.imag] for v in self.reference]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_tsv(self) -> str:
        lines = ["N\tre\tim\terr"]
        lines += [f"{c.N}\t{c.value.real!r}\t{c.value.imag!r}\t{c.abs_error!r}" for c in self.checkpoints]
        return "\n".join(lines) + "\n"


def _checked_schedule(checkpoints: Sequence[int], scheme: Scheme) -> list[int]:
    cps = [int(N) for N in checkpoints]
    if not cps:
        raise ValueError("empty checkpoint schedule")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    for N in cps:
        scheme.check_checkpoint(N)
    return cps


@dataclass(frozen=True)
class AverageRequest:
    system: System
    family: object
    observables: tuple
    scheme: Scheme = field(default_factory=Scheme)
    checkpoints: tuple = DEFAULT_CHECKPOINTS
    x0: object = None
    backend: str = "auto"
    grid: int = DEFAULT_GRID


def _prepare(system, observables, x0):
    for f in observables:
        _check_dim(system, f)
    return as_point(system, x0) if x0 is not None else as_point(
        system, 0 if isinstance(system, CyclicSystem) else (0,) * system.dim)


def _sums(system, iterates, observables, scheme, checkpoints, x0, backend, grid, workers):
    x = _prepare(system, observables, x0)
    kernel = _make_kernel(system, observables, x, backend, grid)
    if scheme.kind == "w_tricked":
        W, _ = W_of(scheme.w)
        iterates = iterates.rescaled(W, scheme.r)
    index, weight = _scheme_plan(scheme)
    sums = _accumulate(kernel, iterates, index, weight, scheme.start, checkpoints, workers)
    return kernel, [s / scheme.normalizer(N) for s, N in zip(sums, checkpoints)]


def _report(kernel, rows, checkpoints, target_rows, scheme_label, reference=None) -> ConvergenceReport:
    target = kernel.value(target_rows)
    cps = [Checkpoint(N, kernel.value(r), abs(kernel.value(r) - target), kernel.distance(r, target_rows))
           for N, r in zip(checkpoints, rows)]
    return ConvergenceReport(scheme_label, target, cps, kernel.name, reference)


def multi_ergodic_average(req: AverageRequest, workers: int | None = None) -> ConvergenceReport:
    """Scheme-weighted averages of ``prod_i f_i(T^{[p_i(n)]} x)`` at each checkpoint.

    The target is the product of the Haar integrals of the observables.
    """
    iterates = as_iterates(req.family)
    observables = tuple(req.observables)
    if iterates.ell != len(observables):
        raise ValueError(f"{iterates.ell} iterates but {len(observables)} observables")
    cps = _checked_schedule(req.checkpoints, req.scheme)
    kernel, rows = _sums(req.system, iterates, observables, req.scheme, cps,
                         req.x0, req.backend, req.grid, workers)
    target = complex(np.prod([haar_integral(req.system, f) for f in observables]))
    return _report(kernel, rows, cps, kernel.constant_rows(target), req.scheme.label())


def furstenberg_average(system: System, q: RealPolynomial, ell: int, observables: Sequence[Observable],
                        scheme: Scheme = Scheme(), checkpoints: Sequence[int] = DEFAULT_CHECKPOINTS,
                        x0=None, backend: str = "auto", grid: int = DEFAULT_GRID,
                        workers: int | None = None) -> ConvergenceReport:
    """Average with iterates ``[q(n)], 2[q(n)], ..., ell[q(n)]`` under ``scheme``.

    The reference is the Cesaro average with iterates ``n, 2n, ..., ell n``
    over the same checkpoints; its last value (as a function of the start
    point) is the target, and its values at ``x0`` are stored in
    ``reference``.
    """
    observables = tuple(observables)
    if len(observables) != ell:
        raise ValueError(f"ell={ell} but {len(observables)} observables")
    cps = _checked_schedule(checkpoints, scheme)
    kernel, rows = _sums(system, FurstenbergIterates(q, ell), observables, scheme, cps,
                         x0, backend, grid, workers)
    ref_kernel, ref_rows = _sums(system, LinearIterates(ell), observables, Scheme(), cps,
                                 x0, kernel.name, grid, workers)
    reference = [ref_kernel.value(r) for r in ref_rows]
    return _report(kernel, rows, cps, ref_rows[-1], scheme.label(), reference)


# weyl sums -----------------------------------------------------------------

def _as_poly(q) -> RealPolynomial:
    if isinstance(q, RealPolynomial):
        return q
    from fractions import Fraction
    return RealPolynomial(RadicalBasis(()), [Fraction(c) for c in q])


def weyl_sums(q, checkpoints: Sequence[int]) -> list[complex]:
    """``(1/N) sum_{n<=N} e(q(n))`` at each checkpoint.

    Arguments are reduced mod 1 in fixed point before exponentiation and
    the sums are compensated.
    """
    p = _as_poly(q)
    cps = [int(N) for N in checkpoints]
    if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be positive and strictly increasing")
    re_parts: list[float] = []
    im_parts: list[float] = []
    out, a = [], 1
    for N in cps:
        for lo in range(a, N + 1, CHUNK):
            ns = _dense(lo, min(lo + CHUNK - 1, N))
            z = np.exp(2j * np.pi * frac_values(p, ns))
            re_parts.extend(z.real.tolist())
            im_parts.extend(z.imag.tolist())
        a = N + 1
        out.append(complex(math.fsum(re_parts), math.fsum(im_parts)) / N)
    return out


def weyl_sum(q, N: int) -> complex:
    return weyl_sums(q, [N])[0]


# equidistribution ----------------------------------------------------------

@dataclass
class EquidistributionReport:
    N: int
    H: int
    grid: int
    character_discrepancy: float
    worst_frequency: tuple
    box_discrepancy: float
    cell_volume: float

    @property
    def equidistributed(self) -> bool:
        return self.box_discrepancy <= self.cell_volume / 2

    def to_dict(self) -> dict:
        return {
            "N": self.N, "H": self.H, "grid": self.grid,
            "character_discrepancy": self.character_discrepancy,
            "worst_frequency": list(self.worst_frequency),
            "box_discrepancy": self.box_discrepancy,
            "cell_volume": self.cell_volume,
            "equidistributed": self.equidistributed,
        }


MAX_FREQUENCIES = 200_000
MAX_CELLS = 1 << 22


def product_orbit(system: System, family, x0, N: int) -> np.ndarray:
    """Points ``(T^{k_1(n)} x, ..., T^{k_l(n)} x)`` for ``n = 1..N``; shape ``(N, l*dim)``."""
    iterates = as_iterates(family)
    x = _prepare(system, [], x0)
    ns = _dense(1, N)
    cols = [orbit_points(system, k, [x])[0] for k in iterates.exponents(ns)]
    return np.concatenate(cols, axis=1)


def equidistribution_test(system: System, family, N: int, H: int = 5, grid: int = 10,
                          x0=None) -> EquidistributionReport:
    """Character and box discrepancy of the product orbit.

    Characters use every nonzero integer vector with sup norm at most ``H``
    (on the Heisenberg nilmanifold, only the horizontal coordinates).  Boxes
    partition the product space into ``grid**D`` congruent cells.
    """
    if H < 1 or grid < 2:
        raise ValueError("need H >= 1 and grid >= 2")
    pts = product_orbit(system, family, x0, N)
    D = pts.shape[1]
    if isinstance(system, HeisenbergSystem):
        horiz = [c for c in range(D) if c % 3 != 2]
    else:
        horiz = list(range(D))
    proj = pts[:, horiz]
    nfreq = (2 * H + 1) ** len(horiz) - 1
    if nfreq > MAX_FREQUENCIES:
        raise ValueError(f"{nfreq} frequency vectors exceed the limit {MAX_FREQUENCIES}")
    freqs = np.array([h for h in itertools.product(range(-H, H + 1), repeat=len(horiz)) if any(h)])
    worst, worst_h = 0.0, ()
    for lo in range(0, len(freqs), 256):
        block = freqs[lo:lo + 256]
        vals = np.abs(np.mean(np.exp(2j * np.pi * (proj @ block.T)), axis=0))
        i = int(np.argmax(vals))
        if vals[i] > worst + 1e-15:
            worst, worst_h = float(vals[i]), tuple(int(v) for v in block[i])
    cells = grid ** D
    if cells > MAX_CELLS:
        raise ValueError(f"{cells} cells exceed the limit {MAX_CELLS}")
    idx = np.minimum((pts * grid).astype(np.int64), grid - 1)
    flat = np.ravel_multi_index(idx.T, (grid,) * D)
    counts = np.bincount(flat, minlength=cells)
    vol = 1.0 / cells
    box = float(np.max(np.abs(counts / N - vol)))
    return EquidistributionReport(N, H, grid, worst, worst_h, box, vol)


# W-trick -------------------------------------------------------------------

@dataclass
class WTrickReport:
    w: int
    W: int
    checkpoints: list[int]
    per_residue: dict[int, list[float]]

    @property
    def discrepancy(self) -> list[float]:
        return [max(v[i] for v in self.per_residue.values()) for i in range(len(self.checkpoints))]

    @property
    def final(self) -> float:
        return self.discrepancy[-1]

    @property
    def trend(self) -> bool:
        return trend_ok(self.discrepancy)

    def to_dict(self) -> dict:
        return {
            "w": self.w, "W": self.W,
            "checkpoints": [{"N": N, "discrepancy": d} for N, d in zip(self.checkpoints, self.discrepancy)],
            "per_residue": {str(r): v for r, v in sorted(self.per_residue.items())},
            "trend": "pass" if self.trend else "fail",
        }


def wtrick_discrepancy(system: System, family, observables: Sequence[Observable], w: int,
                       checkpoints: Sequence[int], x0=None, backend: str = "auto",
                       grid: int = DEFAULT_GRID, workers: int | None = None,
                       max_subruns: int = MAX_SUBRUNS) -> WTrickReport:
    """Norm of ``(1/N) sum (Lambda'_{w,r}(n) - 1) prod f_i(T^{k_i(W n + r)} x)``, maxed over units ``r``."""
    iterates = as_iterates(family)
    observables = tuple(observables)
    if iterates.ell != len(observables):
        raise ValueError(f"{iterates.ell} iterates but {len(observables)} observables")
    W, phi = W_of(w)
    if phi > max_subruns:
        raise ValueError(f"phi(W)={phi} residue classes exceed the limit {max_subruns}")
    cps = _checked_schedule(checkpoints, Scheme())
    x = _prepare(system, observables, x0)
    kernel = _make_kernel(system, observables, x, backend, grid)
    zero = kernel.constant_rows(0)
    per_residue = {}
    for r in range(1, W + 1):
        if math.gcd(r, W) != 1:
            continue
        table = sieve_covering(W * cps[-1] + r)

        def weight(ns, r=r, table=table):
            vals = W * ns + r
            lam = np.where(table.is_prime[vals], np.log(vals.astype(float)), 0.0)
            return (phi / W) * lam - 1.0

        sums = _accumulate(kernel, iterates.rescaled(W, r), _dense, weight, 1, cps, workers)
        per_residue[r] = [kernel.distance(s / N, zero) for s, N in zip(sums, cps)]
    return WTrickReport(w, W, cps, per_residue)


# Gowers norms --------------------------------------------------------------

def _gowers_power(F: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return np.abs(F.mean(axis=-1)) ** 2
    m = F.shape[-1]
    shifted = np.stack([np.roll(F, -t, axis=-1) for t in range(m)], axis=-2)
    return _gowers_power(np.conj(F)[..., None, :] * shifted, k - 1).mean(axis=-1)


def gowers_norm(f, k: int) -> float:
    """Uniformity norm ``||f||_{U^k}`` of a function on ``Z/m`` (``1 <= k <= 4``)."""
    if not 1 <= k <= 4:
        raise ValueError("k must lie in 1..4")
    f = np.asarray(f, dtype=complex)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("f must be a non-empty vector")
    power = float(_gowers_power(f, k))
    return max(power, 0.0) ** (1.0 / 2 ** k)
