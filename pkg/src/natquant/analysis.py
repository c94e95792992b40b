"""Checks on top of the solver: the two closed-form optimal families for the
permuted-dyadic distributions, the singleton-prefix property of optima, the
quantization-dimension sequence, and golden tables for the built-in
distributions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from .measure import (
    DiscreteDistribution,
    GeometricTail,
    definition_parameter,
    make_definition_distribution,
    make_distribution,
)
from .solver import (
    BlockPartition,
    Optimum,
    SolveResult,
    SolverConfig,
    distortion,
    solve_n_means,
)

log = logging.getLogger(__name__)


class AnalysisError(ValueError):
    pass


class NotDefinitionFamily(AnalysisError):
    pass


class NTooSmall(AnalysisError):
    pass


class UndefinedAtVnGE1(AnalysisError):
    pass


def closed_form_error(n: int) -> Fraction:
    """``2**(3-n) / 3``."""
    return Fraction(2**3, 3 * 2**n)


def theorem1_candidates(d: DiscreteDistribution, n: int) -> tuple[BlockPartition, BlockPartition]:
    """The two candidate partitions for ``n >= k + 2``.

    Singletons ``1..n-2`` then ``[n-1, n]`` and ``[n+1, inf)``; or singletons
    ``1..n-3`` then ``[n-2, n-1]``, ``[n, n+1]`` and ``[n+2, inf)``.
    """
    k = definition_parameter(d)
    if k is None:
        raise NotDefinitionFamily("head is not a permutation of 1/2, ..., 1/2^(k-1) with a 2^-j tail")
    if n < k + 2:
        raise NTooSmall(f"n={n} is below k+2={k + 2}")
    first = BlockPartition(tuple(range(1, n - 1)) + (n - 1, n + 1))
    second = BlockPartition(tuple(range(1, n - 2)) + (n - 2, n, n + 2))
    return first, second


@dataclass
class TheoremCheck:
    n: int
    expected: Fraction
    candidate_errors: tuple[Fraction, Fraction]
    vn: Fraction
    candidates_present: tuple[bool, bool]
    optima_count: int

    @property
    def passed(self) -> bool:
        return (
            self.candidate_errors == (self.expected, self.expected)
            and self.vn == self.expected
            and all(self.candidates_present)
        )


@dataclass
class TheoremReport:
    k: int
    checks: list[TheoremCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[TheoremCheck]:
        return [c for c in self.checks if not c.passed]


def verify_theorem1(d: DiscreteDistribution, n_max: int,
                    cfg: Optional[SolverConfig] = None) -> TheoremReport:
    """Solve every ``n`` in ``[k+2, n_max]`` and compare with both candidates."""
    k = definition_parameter(d)
    if k is None:
        raise NotDefinitionFamily("distribution is not in the permuted-dyadic family")
    report = TheoremReport(k)
    for n in range(k + 2, n_max + 1):
        cands = theorem1_candidates(d, n)
        res = solve_n_means(d, n, cfg)
        present = {o.partition for o in res.optima}
        report.checks.append(TheoremCheck(
            n=n,
            expected=closed_form_error(n),
            candidate_errors=(distortion(d, cands[0]), distortion(d, cands[1])),
            vn=res.vn,
            candidates_present=(cands[0] in present, cands[1] in present),
            optima_count=len(res.optima),
        ))
    return report


def _singleton_gaps(o: Optimum, n: int) -> list[int]:
    """Points of ``1..n-3`` not held as their own one-point block."""
    blocks = o.partition.blocks()
    have = {s for s, e in blocks if e == s}
    return [j for j in range(1, n - 2) if j not in have]


@dataclass
class ConjectureReport:
    n: int
    holds: bool
    witness: SolveResult
    missing_points: list[int]
    per_optimum: list[list[int]]


def check_conjecture(d: DiscreteDistribution, n_from: int, n_to: int,
                     cfg: Optional[SolverConfig] = None) -> list[ConjectureReport]:
    """For each ``n``, does every optimum keep ``1, ..., n-3`` as singleton codepoints?"""
    if n_from < 2:
        raise ValueError(f"n_from must be >= 2, got {n_from}")
    out = []
    for n in range(n_from, n_to + 1):
        res = solve_n_means(d, n, cfg)
        gaps = [_singleton_gaps(o, n) for o in res.optima]
        missing = sorted(set().union(*gaps))
        out.append(ConjectureReport(n, not missing, res, missing, gaps))
    return out


@dataclass(frozen=True)
class DimensionSample:
    n: int
    vn: Fraction
    dn: Decimal


def dimension_value(n: int, vn: Fraction, digits: int = 30) -> Decimal:
    """``2 ln n / (-ln vn)`` rounded to ``digits`` decimal places."""
    if vn >= 1:
        raise UndefinedAtVnGE1(f"V_{n} = {vn} >= 1")
    if vn <= 0:
        raise UndefinedAtVnGE1(f"V_{n} = {vn} has no logarithm")
    with localcontext() as ctx:
        ctx.prec = max(30, digits) + 20
        ratio = 2 * Decimal(n).ln() / -(Decimal(vn.numerator).ln() - Decimal(vn.denominator).ln())
        return ratio.quantize(Decimal(1).scaleb(-digits))


def dimension_sequence(d: DiscreteDistribution, n_max: int, digits: int = 30,
                       cfg: Optional[SolverConfig] = None) -> list[DimensionSample]:
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if not 0 <= digits <= 50:
        raise ValueError(f"digits must be in [0, 50], got {digits}")
    out = []
    for n in range(2, n_max + 1):
        if d.is_finite and n > len(d.head):
            break
        vn = solve_n_means(d, n, cfg).vn
        try:
            out.append(DimensionSample(n, vn, dimension_value(n, vn, digits)))
        except UndefinedAtVnGE1 as exc:
            log.warning("skipping n=%d: %s", n, exc)
    return out


@dataclass(frozen=True)
class GoldenRow:
    n: int
    vn: Fraction
    optima: Optional[tuple[tuple[int, ...], ...]] = None  # boundary tuples, sorted


@dataclass(frozen=True)
class Fixture:
    name: str
    dist: DiscreteDistribution
    rows: tuple[GoldenRow, ...]
    label: str = ""
    closed_form_from: Optional[int] = None  # vn = 2**(3-n)/3 for n >= this

    def expected(self, n: int) -> Optional[Fraction]:
        for row in self.rows:
            if row.n == n:
                return row.vn
        if self.closed_form_from is not None and n >= self.closed_form_from:
            return closed_form_error(n)
        return None


def dist_a() -> DiscreteDistribution:
    return make_definition_distribution([2, 1])


def dist_b() -> DiscreteDistribution:
    return make_definition_distribution([3, 2, 1])


def dist_c() -> DiscreteDistribution:
    return make_distribution(
        [Fraction(149, 200), Fraction(1, 200)],
        GeometricTail(3, Fraction(1), Fraction(1, 2)),
    )


def plain_geometric() -> DiscreteDistribution:
    return make_definition_distribution([1])


def paper_fixtures() -> list[Fixture]:
    F = Fraction
    return [
        Fixture("distA", dist_a(), (
            GoldenRow(2, F(17, 28), ((1, 4),)),
            GoldenRow(3, F(1, 3), ((1, 3, 5),)),
            GoldenRow(4, F(1, 6), ((1, 2, 3, 5),)),
        ), "p = (1/4, 1/2, 1/2^3, 1/2^4, ...)", closed_form_from=5),
        Fixture("distB", dist_b(), (
            GoldenRow(2, F(5, 7), ((1, 4),)),
            GoldenRow(3, F(19, 72), ((1, 3, 5),)),
            GoldenRow(4, F(1, 6), ((1, 3, 4, 6),)),
            GoldenRow(5, F(1, 12), ((1, 2, 3, 4, 6),)),
        ), "p = (1/8, 1/4, 1/2, 1/2^4, ...)", closed_form_from=6),
        Fixture("distC", dist_c(), (
            GoldenRow(5, F(29, 624), ((1, 2, 4, 5, 7), (1, 2, 4, 6, 8))),
        ), "p = (149/200, 1/200, 1/2^3, 1/2^4, ...)"),
        Fixture("geometric", plain_geometric(), (
            GoldenRow(1, F(2), ((1,),)),
        ), "p_j = 1/2^j", closed_form_from=4),
    ]


BUILTINS = {
    "distA": dist_a,
    "distB": dist_b,
    "distC": dist_c,
    "geometric": plain_geometric,
}
