"""Discrete distributions on {1, 2, 3, ...} and exact block moments.

A distribution is a finite head of point masses at ``1..k-1`` followed by an
optional geometric tail ``A * r**j`` for ``j >= k``.  Everything here is exact
``Fraction`` arithmetic.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Rational = Union[Fraction, int, str]


class MeasureError(ValueError):
    """Base class for invalid distributions and block queries."""


class MassNotOne(MeasureError):
    def __init__(self, total: Fraction):
        self.total = total
        self.deficit = 1 - total
        super().__init__(f"total mass is {total}, deficit {self.deficit}")


class NonpositiveProbability(MeasureError):
    pass


class TailStartMismatch(MeasureError):
    pass


class NotAPermutation(MeasureError):
    pass


class EmptyBlock(MeasureError):
    pass


class NoTail(MeasureError):
    pass


class StartInsideHead(MeasureError):
    pass


@dataclass(frozen=True)
class MomentTriple:
    """Mass, first and second moment of a set of support points."""

    m0: Fraction
    m1: Fraction
    m2: Fraction

    def __add__(self, other: MomentTriple) -> MomentTriple:
        return MomentTriple(self.m0 + other.m0, self.m1 + other.m1, self.m2 + other.m2)

    def __sub__(self, other: MomentTriple) -> MomentTriple:
        return MomentTriple(self.m0 - other.m0, self.m1 - other.m1, self.m2 - other.m2)

    @property
    def mean(self) -> Fraction:
        if self.m0 <= 0:
            raise EmptyBlock("block has no mass")
        return self.m1 / self.m0

    @property
    def sse(self) -> Fraction:
        """Squared error about the block mean, ``m2 - m1**2 / m0``."""
        if self.m0 <= 0:
            raise EmptyBlock("block has no mass")
        return self.m2 - self.m1 * self.m1 / self.m0


ZERO_MOMENTS = MomentTriple(Fraction(0), Fraction(0), Fraction(0))


@dataclass(frozen=True)
class GeometricTail:
    """Point masses ``coeff * ratio**j`` at every ``j >= start``."""

    start: int
    coeff: Fraction
    ratio: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        if self.start < 1:
            raise MeasureError(f"tail start must be >= 1, got {self.start}")
        if self.coeff <= 0:
            raise NonpositiveProbability(f"tail coefficient must be positive, got {self.coeff}")
        if not 0 < self.ratio < 1:
            raise MeasureError(f"tail ratio must lie in (0, 1), got {self.ratio}")

    def pmf(self, j: int) -> Fraction:
        return self.coeff * self.ratio**j if j >= self.start else Fraction(0)

    def moments_from(self, m: int) -> MomentTriple:
        """Closed-form ``sum_{j>=m} A r^j (1, j, j^2)`` for ``m >= start``."""
        if m < self.start:
            raise StartInsideHead(f"tail moments requested from {m}, tail starts at {self.start}")
        r = self.ratio
        q = 1 - r
        lead = self.coeff * r**m
        s0 = 1 / q
        s1 = m / q + r / q**2
        s2 = m * m / q + 2 * m * r / q**2 + r * (1 + r) / q**3
        return MomentTriple(lead * s0, lead * s1, lead * s2)

    @property
    def mass(self) -> Fraction:
        return self.moments_from(self.start).m0


def _as_fraction(value: Rational) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Head probabilities at ``1..len(head)`` plus an optional geometric tail.

    Construction does not validate; call :func:`validate` (the constructors in
    this module do so).
    """

    head: tuple[Fraction, ...]
    tail: Optional[GeometricTail] = None
    _prefix: list = field(default_factory=lambda: [ZERO_MOMENTS], init=False,
                          repr=False, compare=False, hash=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False,
                                  repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", tuple(_as_fraction(p) for p in self.head))

    @property
    def support_size(self) -> Optional[int]:
        """Number of support points, or ``None`` for infinite support."""
        return None if self.tail is not None else len(self.head)

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    def pmf(self, j: int) -> Fraction:
        if 1 <= j <= len(self.head):
            return self.head[j - 1]
        if self.tail is not None:
            return self.tail.pmf(j)
        return Fraction(0)

    def prefix_moments(self, upto: int) -> MomentTriple:
        """Moments of ``[1, upto]``; the prefix table grows on demand."""
        table = self._prefix
        if upto >= len(table):
            with self._lock:
                while len(table) <= upto:
                    j = len(table)
                    p = self.pmf(j)
                    # single append keeps concurrent readers on a consistent prefix
                    table.append(table[-1] + MomentTriple(p, p * j, p * j * j))
        return table[upto]


def validate(d: DiscreteDistribution) -> None:
    """Raise unless every head mass is positive and the total mass is exactly 1.

    ``p_j = 1`` is only reachable by the one-point distribution.
    """
    for j, p in enumerate(d.head, start=1):
        if not 0 < p <= 1:
            raise NonpositiveProbability(f"p_{j} = {p} is not in (0, 1]")
    total = sum(d.head, Fraction(0))
    if d.tail is not None:
        if d.tail.start != len(d.head) + 1:
            raise TailStartMismatch(
                f"tail starts at {d.tail.start} but head has {len(d.head)} points"
            )
        total += d.tail.mass
    elif not d.head:
        raise MassNotOne(total)
    if total != 1:
        raise MassNotOne(total)


def make_distribution(head: Iterable[Rational], tail: Optional[GeometricTail] = None) -> DiscreteDistribution:
    d = DiscreteDistribution(tuple(_as_fraction(p) for p in head), tail)
    validate(d)
    return d


def make_definition_distribution(permutation: Sequence[int]) -> DiscreteDistribution:
    """Head ``p_j = 2**-permutation[j]`` followed by the tail ``2**-j`` from ``k``.

    ``permutation`` must be a permutation of ``1..k-1`` for some ``k >= 2``.
    """
    perm = list(permutation)
    if not perm or sorted(perm) != list(range(1, len(perm) + 1)):
        raise NotAPermutation(f"{perm!r} is not a permutation of 1..{len(perm)}")
    head = [Fraction(1, 2**e) for e in perm]
    return make_distribution(head, GeometricTail(len(perm) + 1, Fraction(1), Fraction(1, 2)))


def definition_parameter(d: DiscreteDistribution) -> Optional[int]:
    """Return ``k`` if ``d`` belongs to the permuted-dyadic family, else ``None``."""
    t = d.tail
    if t is None or t.coeff != 1 or t.ratio != Fraction(1, 2):
        return None
    k = len(d.head) + 1
    if k < 2 or t.start != k:
        return None
    if sorted(d.head, reverse=True) != [Fraction(1, 2**e) for e in range(1, k)]:
        return None
    return k


def _check_block(d: DiscreteDistribution, start: int, stop: Optional[int]) -> None:
    if start < 1:
        raise EmptyBlock(f"block start {start} is below 1")
    if stop is not None:
        if start > stop:
            raise EmptyBlock(f"empty block [{start}, {stop}]")
        if d.tail is None and stop > len(d.head):
            raise EmptyBlock(f"block [{start}, {stop}] leaves the support 1..{len(d.head)}")
    elif d.tail is None and start > len(d.head):
        raise EmptyBlock(f"block [{start}, end] leaves the support 1..{len(d.head)}")


def block_moments(d: DiscreteDistribution, start: int, stop: int) -> MomentTriple:
    """Moments of the finite block ``[start, stop]``."""
    _check_block(d, start, stop)
    return d.prefix_moments(stop) - d.prefix_moments(start - 1)


def tail_moments(d: DiscreteDistribution, m: int) -> MomentTriple:
    """Closed-form moments of ``[m, inf)`` for ``m`` at or beyond the tail start."""
    if d.tail is None:
        raise NoTail("distribution has no geometric tail")
    return d.tail.moments_from(m)


def segment_moments(d: DiscreteDistribution, start: int, stop: Optional[int] = None) -> MomentTriple:
    """Moments of ``[start, stop]``, or of everything from ``start`` on when ``stop`` is None.

    An open block that begins inside the head is split at the tail start and
    recombined.
    """
    _check_block(d, start, stop)
    if stop is not None:
        return block_moments(d, start, stop)
    if d.tail is None:
        return block_moments(d, start, len(d.head))
    k = d.tail.start
    if start >= k:
        return tail_moments(d, start)
    return block_moments(d, start, k - 1) + tail_moments(d, k)


def av(d: DiscreteDistribution, start: int, stop: Optional[int] = None) -> Fraction:
    """Conditional mean of X on the block (``stop=None`` means an open tail)."""
    return segment_moments(d, start, stop).mean


def er(d: DiscreteDistribution, start: int, stop: Optional[int] = None) -> Fraction:
    """Probability-weighted squared deviation of the block about its mean."""
    return segment_moments(d, start, stop).sse


def global_mean_and_v1(d: DiscreteDistribution) -> tuple[Fraction, Fraction]:
    """Mean of the distribution and the optimal one-point distortion."""
    total = segment_moments(d, 1)
    return total.mean, total.sse
