from fractions import Fraction as F
import random
import threading

import pytest
from hypothesis import given, settings, strategies as st

from natquant.analysis import dist_a, dist_b, dist_c, plain_geometric
from natquant.measure import (
    DiscreteDistribution,
    EmptyBlock,
    GeometricTail,
    MassNotOne,
    MomentTriple,
    NoTail,
    NonpositiveProbability,
    NotAPermutation,
    StartInsideHead,
    TailStartMismatch,
    av,
    block_moments,
    definition_parameter,
    er,
    global_mean_and_v1,
    make_definition_distribution,
    make_distribution,
    segment_moments,
    tail_moments,
    validate,
)

from conftest import third_tail


def summed(d, start, stop):
    """Direct summation oracle for a finite block."""
    m0 = sum((d.pmf(j) for j in range(start, stop + 1)), F(0))
    m1 = sum((d.pmf(j) * j for j in range(start, stop + 1)), F(0))
    m2 = sum((d.pmf(j) * j * j for j in range(start, stop + 1)), F(0))
    return MomentTriple(m0, m1, m2)


def remainder_bound(tail, T):
    """Upper bound on the second-moment mass beyond T, which dominates all three."""
    return tail.coeff * tail.ratio**T * (T + 2) ** 2 / (1 - tail.ratio) ** 2


# ---- constructors and validation ---------------------------------------------------------


@pytest.mark.parametrize("perm, head, start", [
    ((2, 1), (F(1, 4), F(1, 2)), 3),
    ((3, 2, 1), (F(1, 8), F(1, 4), F(1, 2)), 4),
    ((1,), (F(1, 2),), 2),
])
def test_definition_constructor(perm, head, start):
    d = make_definition_distribution(perm)
    assert d.head == head
    assert d.tail == GeometricTail(start, F(1), F(1, 2))
    assert sum(d.head) + d.tail.mass == 1
    assert definition_parameter(d) == start


def test_identity_permutation_is_plain_geometric():
    d = make_definition_distribution([1])
    assert all(d.pmf(j) == F(1, 2**j) for j in range(1, 40))


@pytest.mark.parametrize("bad", [[], [2], [1, 1], [0, 1], [1, 3]])
def test_definition_constructor_rejects_non_permutations(bad):
    with pytest.raises(NotAPermutation):
        make_definition_distribution(bad)


def test_validate_accepts_paper_counterexample_and_two_point():
    validate(dist_c())
    validate(DiscreteDistribution((F(1, 2), F(1, 2))))
    assert definition_parameter(dist_c()) is None


def test_mass_deficit_is_exact():
    d = DiscreteDistribution((F(1, 2),), GeometricTail(2, F(1), F(1, 3)))
    # oracle: partial sums of (1/3)^j from 2 approach the tail mass from below
    partial = F(1, 2) + sum(F(1, 3**j) for j in range(2, 120))
    with pytest.raises(MassNotOne) as info:
        validate(d)
    deficit = info.value.deficit
    assert 0 <= (1 - partial) - deficit < F(1, 3**118)
    assert deficit == F(1, 3)


def test_validate_errors():
    with pytest.raises(NonpositiveProbability):
        validate(DiscreteDistribution((F(1), F(0))))
    with pytest.raises(TailStartMismatch):
        validate(DiscreteDistribution((F(1, 2),), GeometricTail(3, F(2), F(1, 2))))
    with pytest.raises(MassNotOne):
        validate(DiscreteDistribution((F(1, 2), F(1, 4))))
    with pytest.raises(NonpositiveProbability):
        GeometricTail(2, F(0), F(1, 2))


# ---- block and tail moments --------------------------------------------------------------


def test_block_moments_examples(distA, geometric):
    assert block_moments(distA, 1, 2) == MomentTriple(F(3, 4), F(5, 4), F(9, 4))
    assert block_moments(geometric, 3, 4) == summed(geometric, 3, 4)
    assert block_moments(geometric, 3, 4) == MomentTriple(F(3, 16), F(5, 8), F(17, 8))
    for j in range(1, 12):
        p = distA.pmf(j)
        assert block_moments(distA, j, j) == MomentTriple(p, p * j, p * j * j)


def test_block_errors(distA, two_point):
    with pytest.raises(EmptyBlock):
        block_moments(distA, 4, 3)
    with pytest.raises(EmptyBlock):
        block_moments(two_point, 1, 3)
    with pytest.raises(NoTail):
        tail_moments(two_point, 3)
    with pytest.raises(StartInsideHead):
        tail_moments(distA, 2)


def test_tail_moments_examples(geometric, distA):
    assert tail_moments(distA, 4) == MomentTriple(F(1, 8), F(5, 8), F(27, 8))
    assert av(distA, 4) == 5
    for n in range(2, 30):
        assert er(geometric, n) == F(4, 2**n)
    # oracle: partial sums to 200, truncation error far below the value
    approx = summed(geometric, 5, 200)
    assert abs(approx.sse - F(1, 8)) < F(1, 2**180)
    assert er(geometric, 5) == F(1, 8)


@pytest.mark.parametrize("make", [plain_geometric, dist_a, dist_b, dist_c, third_tail])
def test_tail_closed_form_against_partial_sums(make):
    d = make()
    t = d.tail
    for m in range(t.start, 65):
        T = m + 256
        exact = tail_moments(d, m)
        part = summed(d, m, T)
        bound = remainder_bound(t, T)
        for a, b in zip((exact.m0, exact.m1, exact.m2), (part.m0, part.m1, part.m2)):
            assert 0 <= a - b < bound


def test_open_block_straddling_head(distC):
    assert segment_moments(distC, 2) == block_moments(distC, 2, 2) + tail_moments(distC, 3)


# ---- av / er / global ------------------------------------------------------------------------


def test_av_examples(distA, distB, distC):
    assert av(distA, 1, 3) == F(13, 7)
    assert av(distB, 1, 3) == F(17, 7)
    oracle = (F(2, 200) + F(3, 8)) / (F(1, 200) + F(1, 8))
    assert av(distC, 2, 3) == oracle == F(77, 26)


def test_er_examples(distA, geometric):
    assert er(distA, 1, 3) == F(5, 14)
    assert er(distA, 1, 2) == F(1, 6)
    for ell in range(0, 30):
        assert er(geometric, ell + 1, ell + 2) == F(1, 3 * 2 ** (ell + 1))
    assert all(er(distA, j, j) == 0 for j in range(1, 20))


def test_er_matches_definition(distB):
    for s in range(1, 12):
        for e in range(s, 14):
            mu = av(distB, s, e)
            direct = sum((distB.pmf(j) * (j - mu) ** 2 for j in range(s, e + 1)), F(0))
            assert er(distB, s, e) == direct


def test_global_mean_and_v1(distA, geometric):
    assert global_mean_and_v1(distA) == (F(9, 4), F(27, 16))
    assert global_mean_and_v1(geometric) == (F(2), F(2))
    assert global_mean_and_v1(make_distribution([F(1, 1)])) == (F(1), F(0))
    # partial-sum cross-check
    approx = summed(distA, 1, 200)
    assert abs(approx.mean - F(9, 4)) < F(1, 2**180)


def test_plain_geometric_theorem_identity(geometric):
    for n in range(2, 65):
        assert er(geometric, n - 1, n) + er(geometric, n + 1) == F(8, 3 * 2**n)


# ---- properties -----------------------------------------------------------------------------


FIXTURES = [plain_geometric(), dist_a(), dist_b(), dist_c(), third_tail()]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(range(len(FIXTURES))), st.data())
def test_moment_additivity(idx, data):
    d = FIXTURES[idx]
    k = data.draw(st.integers(1, 58))
    ell = data.draw(st.integers(k, 59))
    m = data.draw(st.integers(ell + 1, 60))
    assert block_moments(d, k, ell) + block_moments(d, ell + 1, m) == block_moments(d, k, m)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(range(len(FIXTURES))), st.integers(1, 50), st.integers(0, 10))
def test_block_invariants(idx, s, width):
    d = FIXTURES[idx]
    e = s + width
    mom = block_moments(d, s, e)
    assert mom.m1 ** 2 <= mom.m0 * mom.m2
    assert (mom.m1 ** 2 == mom.m0 * mom.m2) == (width == 0)
    assert er(d, s, e) >= 0
    assert s <= av(d, s, e) <= e
    assert av(d, s) >= s


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=1, max_size=8))
def test_finite_distributions(weights):
    total = sum(weights)
    if len(weights) == 1:
        return
    d = make_distribution([F(w, total) for w in weights])
    mean, v1 = global_mean_and_v1(d)
    assert mean == sum(F(w, total) * j for j, w in enumerate(weights, 1))
    assert v1 == sum(F(w, total) * (j - mean) ** 2 for j, w in enumerate(weights, 1))


def test_prefix_cache_concurrent_readers():
    d = dist_b()
    expected = [summed(d, 1, j) for j in range(0, 301)]
    errors = []

    def reader(seed):
        rng = random.Random(seed)
        for _ in range(200):
            j = rng.randrange(0, 301)
            if d.prefix_moments(j) != expected[j]:
                errors.append(j)

    threads = [threading.Thread(target=reader, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
