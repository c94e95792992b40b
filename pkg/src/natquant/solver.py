"""Exact optimal n-means quantization over contiguous blocks of the support.

In one dimension the Voronoi cells of ordered codepoints are intervals, so an
optimal quantizer is determined by a contiguous partition of ``{1, 2, ...}``
into ``n`` blocks and its block centroids.  :func:`solve_n_means` searches all
such partitions with a dynamic program whose last block is an open tail
``[m, inf)`` evaluated in closed form, and returns every exact minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .measure import DiscreteDistribution, MeasureError, av, er, segment_moments


class SolverError(Exception):
    pass


class TooManyMeans(SolverError):
    pass


class TruncationExceeded(SolverError):
    pass


class CoverageMismatch(SolverError):
    pass


@dataclass(frozen=True, order=True)
class BlockPartition:
    """Block ``i`` is ``[boundaries[i], boundaries[i+1] - 1]``.

    The last block runs from ``boundaries[-1]`` to ``last``, where ``last`` is
    ``None`` for an infinite tail.
    """

    boundaries: tuple[int, ...]
    last: Optional[int] = None

    def __post_init__(self) -> None:
        b = tuple(self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if not b or b[0] != 1:
            raise CoverageMismatch(f"boundaries must start at 1: {b}")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise CoverageMismatch(f"boundaries must be strictly increasing: {b}")
        if self.last is not None and self.last < b[-1]:
            raise CoverageMismatch(f"last block [{b[-1]}, {self.last}] is empty")

    def __len__(self) -> int:
        return len(self.boundaries)

    def blocks(self) -> list[tuple[int, Optional[int]]]:
        b = self.boundaries
        out: list[tuple[int, Optional[int]]] = [(s, e - 1) for s, e in zip(b, b[1:])]
        out.append((b[-1], self.last))
        return out

    def describe(self) -> str:
        parts = []
        for s, e in self.blocks():
            if e is None:
                parts.append(f"[{s},∞)")
            elif s == e:
                parts.append(str(s))
            else:
                parts.append(f"[{s},{e}]")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class Quantizer:
    points: tuple[Fraction, ...]


@dataclass(frozen=True)
class Optimum:
    partition: BlockPartition
    quantizer: Quantizer


@dataclass(frozen=True)
class SolveResult:
    n: int
    vn: Fraction
    optima: tuple[Optimum, ...]
    truncation_used: int

    @property
    def boundary_sets(self) -> list[tuple[int, ...]]:
        return [o.partition.boundaries for o in self.optima]

    def same_solution(self, other: SolveResult) -> bool:
        """Equal value and optima, ignoring the truncation that produced them."""
        return (self.n, self.vn, self.optima) == (other.n, other.vn, other.optima)


@dataclass(frozen=True)
class SolverConfig:
    initial_truncation: Optional[int] = None  # default n + tail start + 16
    max_truncation: int = 4096

    def __post_init__(self) -> None:
        if self.initial_truncation is not None and self.initial_truncation >= self.max_truncation:
            raise ValueError(
                f"initial truncation {self.initial_truncation} must be below {self.max_truncation}"
            )

    def initial_for(self, d: DiscreteDistribution, n: int) -> int:
        if self.initial_truncation is not None:
            return self.initial_truncation
        assert d.tail is not None
        return n + d.tail.start + 16


@dataclass
class VerificationReport:
    passed: bool = True
    violations: list[str] = field(default_factory=list)
    midpoints: list[list[Fraction]] = field(default_factory=list)
    boundary_hits: list[str] = field(default_factory=list)

    def fail(self, message: str) -> None:
        self.passed = False
        self.violations.append(message)


def _check_coverage(d: DiscreteDistribution, p: BlockPartition) -> None:
    if d.tail is None:
        if p.last != len(d.head):
            raise CoverageMismatch(
                f"partition ends at {p.last}, support ends at {len(d.head)}"
            )
    elif p.last is not None:
        raise CoverageMismatch("distribution has a tail but the partition is bounded")


def quantizer_of(d: DiscreteDistribution, p: BlockPartition) -> Quantizer:
    return Quantizer(tuple(av(d, s, e) for s, e in p.blocks()))


def distortion(d: DiscreteDistribution, p: BlockPartition) -> Fraction:
    """Exact distortion of ``p`` with every block represented by its centroid."""
    _check_coverage(d, p)
    return sum((er(d, s, e) for s, e in p.blocks()), Fraction(0))


def _make_result(d: DiscreteDistribution, n: int, vn: Fraction,
                 boundary_sets: Sequence[tuple[int, ...]], truncation: int) -> SolveResult:
    last = None if d.tail is not None else len(d.head)
    parts = sorted({BlockPartition(b, last) for b in boundary_sets})
    optima = tuple(Optimum(p, quantizer_of(d, p)) for p in parts)
    return SolveResult(n, vn, optima, truncation)


class _BlockCosts:
    """Memoized ``er`` for finite blocks and open tails of one distribution."""

    def __init__(self, d: DiscreteDistribution):
        self.d = d
        self._finite: dict[tuple[int, int], Fraction] = {}
        self._open: dict[int, Fraction] = {}

    def finite(self, s: int, e: int) -> Fraction:
        key = (s, e)
        c = self._finite.get(key)
        if c is None:
            c = self._finite[key] = self.d_block(s, e)
        return c

    def d_block(self, s: int, e: int) -> Fraction:
        return (self.d.prefix_moments(e) - self.d.prefix_moments(s - 1)).sse

    def last(self, m: int, end: Optional[int]) -> Fraction:
        if end is not None:
            return self.finite(m, end)
        c = self._open.get(m)
        if c is None:
            c = self._open[m] = segment_moments(self.d, m).sse
        return c


def _solve_fixed(costs: _BlockCosts, n: int, T: int, end: Optional[int],
                 bound: Fraction) -> tuple[Fraction, list[tuple[int, ...]], bool]:
    """DP over partitions whose last block starts at some ``m <= T``.

    Finite blocks live inside ``[1, T]`` (``T = end`` for finite support).
    ``bound`` must be >= the optimum; partial costs above it are dropped.
    Rows are filled forward from their live states only, and since a block's
    cost never decreases as it is extended, each scan stops at the first
    extension that pushes the running cost past ``bound``.

    Returns ``(vn, argmin boundary tuples, certified)`` where ``certified``
    means no partition with the last block starting beyond ``T`` can reach
    ``vn``: its restriction to ``[1, T]`` is a partition into at most ``n - 1``
    blocks, and restriction never increases cost.
    """
    finite = costs.finite
    # rows[j][i]: (min cost of [1, i] in j blocks, list of start of the j-th block)
    rows: list[dict[int, tuple[Fraction, list[int]]]] = [{0: (Fraction(0), [])}]
    reach = T if end is None else T - 1
    for j in range(1, n):
        row: dict[int, tuple[Fraction, list[int]]] = {}
        for p, (base, _) in sorted(rows[-1].items()):
            s = p + 1
            for i in range(s, reach + 1):
                total = base + finite(s, i)
                if total > bound:
                    break
                entry = row.get(i)
                if entry is None or total < entry[0]:
                    row[i] = (total, [s])
                elif total == entry[0]:
                    entry[1].append(s)
        rows.append(row)

    vn: Optional[Fraction] = None
    tails: list[int] = []
    last_row = rows[n - 1]
    m_hi = T if end is None else end
    for m in range(max(n, 1), m_hi + 1):
        entry = last_row.get(m - 1)
        if entry is None:
            continue
        c = costs.last(m, end)
        total = entry[0] + c
        if total > bound:
            continue
        if vn is None or total < vn:
            vn, tails = total, [m]
        elif total == vn:
            tails.append(m)
    if vn is None:
        raise SolverError("bound excluded every partition; bound must dominate the optimum")

    def walk(j: int, i: int) -> Iterator[tuple[int, ...]]:
        if j == 0:
            yield ()
            return
        for s in rows[j][i][1]:
            for head in walk(j - 1, s - 1):
                yield head + (s,)

    found = [b + (m,) for m in tails for b in walk(n - 1, m - 1)]

    if end is not None or n == 1:
        certified = True
    else:
        spill = last_row.get(T)
        certified = spill is None or spill[0] > vn
    return vn, found, certified


def _start_bound(costs: _BlockCosts, n: int, end: Optional[int]) -> Fraction:
    """Cost of singletons ``1..n-1`` followed by one block from ``n``."""
    return costs.last(n, end)


def solve_n_means(d: DiscreteDistribution, n: int,
                  cfg: Optional[SolverConfig] = None) -> SolveResult:
    """Exact ``V_n`` and every optimal contiguous partition.

    For infinite support the truncation ``T`` doubles until the answer at two
    consecutive truncations agrees and no partition with its tail block
    starting past ``T`` can tie or beat it.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cfg = cfg or SolverConfig()
    costs = _BlockCosts(d)

    if d.tail is None:
        size = len(d.head)
        if n > size:
            raise TooManyMeans(f"{n} means requested for a support of {size} points")
        vn, found, _ = _solve_fixed(costs, n, size, size, _start_bound(costs, n, size))
        return _make_result(d, n, vn, found, size)

    T = max(cfg.initial_for(d, n), n)
    if T >= cfg.max_truncation:
        raise TruncationExceeded(f"n={n} needs a truncation above {cfg.max_truncation}")
    bound = _start_bound(costs, n, None)
    previous: Optional[SolveResult] = None
    while True:
        vn, found, certified = _solve_fixed(costs, n, T, None, bound)
        result = _make_result(d, n, vn, found, T)
        if certified and previous is not None and previous.same_solution(result):
            return result
        previous = result
        bound = min(bound, vn)
        if T * 2 > cfg.max_truncation:
            raise TruncationExceeded(
                f"n={n}: no certified answer up to truncation {cfg.max_truncation}"
            )
        T *= 2


def _scaled(values: dict, denominator: int) -> dict:
    return {k: v.numerator * (denominator // v.denominator) for k, v in values.items()}


def brute_force_n_means(d: DiscreteDistribution, n: int, T: Optional[int] = None) -> SolveResult:
    """Enumerate every boundary choice in ``{1..T}`` and keep all minimizers.

    Independent of :func:`solve_n_means`: block costs come straight from the
    moment routines, are put on one common integer denominator, and every one
    of the ``C(T-1, n-1)`` partitions is summed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d.tail is None:
        size = len(d.head)
        if n > size:
            raise TooManyMeans(f"{n} means requested for a support of {size} points")
        if T is not None and T < size:
            raise ValueError(f"truncation {T} is below the support size {size}")
        T, end = size, size
    else:
        if T is None:
            raise ValueError("a truncation is required for infinite support")
        if T < d.tail.start or T < n:
            raise ValueError(f"truncation {T} too small for n={n}, tail start {d.tail.start}")
        end = None

    finite = {(s, e): er(d, s, e) for s in range(1, T + 1) for e in range(s, T)}
    last = {m: er(d, m, end) for m in range(1, T + 1)}
    denom = 1
    for v in (*finite.values(), *last.values()):
        denom = math.lcm(denom, v.denominator)
    fin = _scaled(finite, denom)
    lst = _scaled(last, denom)

    best: Optional[int] = None
    argmins: list[tuple[int, ...]] = []

    def descend(chosen: list[int], acc: int, remaining: int) -> None:
        nonlocal best, argmins
        s = chosen[-1]
        if remaining == 0:
            total = acc + lst[s]
            if best is None or total < best:
                best, argmins = total, [tuple(chosen)]
            elif total == best:
                argmins.append(tuple(chosen))
            return
        for nxt in range(s + 1, T - remaining + 2):
            chosen.append(nxt)
            descend(chosen, acc + fin[(s, nxt - 1)], remaining - 1)
            chosen.pop()

    descend([1], 0, n - 1)
    assert best is not None
    return _make_result(d, n, Fraction(best, denom), argmins, T)


def verify_centroid_condition(d: DiscreteDistribution, r: SolveResult) -> VerificationReport:
    """Every codepoint must equal the conditional mean of its own block."""
    report = VerificationReport()
    for o in r.optima:
        blocks = o.partition.blocks()
        if len(blocks) != len(o.quantizer.points):
            report.fail(f"{o.partition.describe()}: {len(o.quantizer.points)} points for {len(blocks)} blocks")
            continue
        for (s, e), a in zip(blocks, o.quantizer.points):
            try:
                centroid = av(d, s, e)
            except MeasureError as exc:
                report.fail(f"{o.partition.describe()}: block at {s}: {exc}")
                continue
            if a != centroid:
                report.fail(f"{o.partition.describe()}: point {a} != Av = {centroid} for block starting at {s}")
    return report


def verify_voronoi_consistency(d: DiscreteDistribution, r: SolveResult) -> VerificationReport:
    """Each block must sit strictly inside the Voronoi cell of its codepoint.

    For consecutive codepoints the midpoint has to fall strictly between the
    last point of one block and the first point of the next; a support point
    on a midpoint is recorded as boundary mass.
    """
    report = VerificationReport()
    for o in r.optima:
        pts = o.quantizer.points
        blocks = o.partition.blocks()
        mids: list[Fraction] = []
        for i in range(len(pts) - 1):
            mid = (pts[i] + pts[i + 1]) / 2
            mids.append(mid)
            last_i = blocks[i][1]
            first_next = blocks[i + 1][0]
            assert last_i is not None
            if mid == last_i or mid == first_next:
                report.boundary_hits.append(f"{o.partition.describe()}: support point {mid} on a midpoint")
            if not last_i < mid < first_next:
                report.fail(
                    f"{o.partition.describe()}: midpoint {mid} not strictly between {last_i} and {first_next}"
                )
        report.midpoints.append(mids)
    return report
