import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from evshare.bargaining import (
    INFINITY,
    BargainConfig,
    BargainError,
    ReferencePoints,
    alpha_norm,
    bargain_select,
    distance_select,
    gnb_select,
    power_sum,
    reference_points,
)
from evshare.charging import build_charging_program
from evshare.core import CriterionPoint
from evshare.frontier import ParticipationPoint
from evshare.oracle import charging_frontier, noncollab_costs
from evshare.scenario import t1_instance

from helpers import make_point_program

P = CriterionPoint
F = Fraction

staircases = st.lists(
    st.tuples(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=40)),
    min_size=1, max_size=7,
).map(lambda raw: sorted({(z1, z2) for z1, z2 in raw}))


# -- generalized Nash bargaining ------------------------------------------------

def test_gnb_tie_breaks_to_smallest_z1():
    got = gnb_select({P(4, 8), P(8, 4)}, P(10, 10), F(1, 2))
    assert got == P(4, 8)


def test_gnb_prefers_balanced_gains():
    got = gnb_select({P(2, 9), P(5, 5)}, P(10, 10), F(1, 2))
    assert got == P(5, 5)


def test_gnb_weight_shifts_the_selection():
    got = gnb_select({P(4, 8), P(8, 4)}, P(10, 10), F(7, 10))
    assert got == P(4, 8)
    got = gnb_select({P(4, 8), P(8, 4)}, P(10, 10), F(3, 10))
    assert got == P(8, 4)


def test_gnb_zero_gain_ranks_below_positive_gain():
    # (10, 4) gives company 1 nothing; (6, 6) improves both
    got = gnb_select({P(10, 4), P(6, 6)}, P(10, 10), F(1, 2))
    assert got == P(6, 6)
    # with no positive-gain point at all, fall back to the tie-break order
    got = gnb_select({P(10, 4), P(10, 2)}, P(10, 10), F(1, 2))
    assert got == P(10, 2)


def test_gnb_validates_inputs():
    with pytest.raises(BargainError):
        gnb_select(set(), P(10, 10), F(1, 2))
    with pytest.raises(BargainError):
        gnb_select({P(1, 1)}, P(10, 10), F(0))
    with pytest.raises(BargainError):
        gnb_select({P(1, 1)}, P(10, 10), 1)


@given(staircases, st.integers(min_value=1, max_value=9))
@settings(max_examples=60, deadline=None)
def test_gnb_pi_monotonicity(raw, tenths):
    points = [P(z1, z2) for z1, z2 in raw]
    d = P(max(p.z1 for p in points) + 5, max(p.z2 for p in points) + 5)
    lo = gnb_select(points, d, F(tenths, 10))
    for later in range(tenths + 1, 10):
        hi = gnb_select(points, d, F(later, 10))
        assert hi.z1 <= lo.z1
        lo = hi


@given(staircases,
       st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=50),
       st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=50))
@settings(max_examples=60, deadline=None)
def test_gnb_gain_axis_rescaling_invariance(raw, a1, b1, a2, b2):
    points = [P(z1, z2) for z1, z2 in raw]
    d = P(max(p.z1 for p in points) + 3, max(p.z2 for p in points) + 3)
    base = gnb_select(points, d, F(1, 2))
    mapped = [P(a1 * p.z1 + b1, a2 * p.z2 + b2) for p in points]
    d2 = P(a1 * d.z1 + b1, a2 * d.z2 + b2)
    got = gnb_select(mapped, d2, F(1, 2))
    assert got == P(a1 * base.z1 + b1, a2 * base.z2 + b2)


# -- alpha norms -----------------------------------------------------------------

def test_alpha_norm_examples():
    f = (F(3, 10), F(2, 5))
    assert alpha_norm(f, 2) == F(1, 2)
    assert alpha_norm(f, 1) == F(7, 10)
    assert alpha_norm(f, INFINITY) == F(2, 5)
    assert alpha_norm(f, "inf") == F(2, 5)
    assert alpha_norm(f, "infinity") == F(2, 5)


def test_power_sum_stays_exact_on_rationals():
    f = (F(3, 10), F(2, 5))
    got = power_sum(f, 2)
    assert got == F(1, 4) and isinstance(got, Fraction)
    # alpha = 3/2 on perfect squares keeps exactness: (9/16)^(3/2) = 27/64
    got = power_sum((F(9, 16),), F(3, 2))
    assert got == F(27, 64) and isinstance(got, Fraction)


def test_power_sum_falls_back_to_float_when_roots_are_irrational():
    got = power_sum((F(1, 2),), F(3, 2))
    assert isinstance(got, float)
    assert got == pytest.approx(0.5 ** 1.5)


def test_power_sum_rejects_bad_alpha():
    with pytest.raises(BargainError):
        power_sum((F(1, 2),), 0)
    with pytest.raises(BargainError):
        power_sum((F(1, 2),), -2)


norm_vectors = st.lists(
    st.builds(lambda a, b: F(a, b) ** 2,
              st.integers(min_value=0, max_value=12), st.integers(min_value=1, max_value=9)),
    min_size=2, max_size=5)


@given(norm_vectors, st.sampled_from([F(1), F(3, 2), F(2), F(4), F(16)]))
@settings(max_examples=80, deadline=None)
def test_norm_sandwich_exact(f, alpha):
    n = len(f)
    peak = max(abs(v) for v in f)
    total = power_sum(f, alpha)
    assert isinstance(total, Fraction)
    # compare in power space: peak^alpha <= sum <= n * peak^alpha
    lo = power_sum((peak,), alpha)
    assert lo <= total <= n * lo


# -- distance selection ------------------------------------------------------------

def refs_0_10():
    return ReferencePoints(P(0, 0), P(10, 10))


def test_distance_select_examples():
    pts = {P(2, 8), P(4, 4)}
    assert distance_select(pts, refs_0_10(), 1) == P(4, 4)
    assert distance_select(pts, refs_0_10(), INFINITY) == P(4, 4)
    assert distance_select(pts, refs_0_10(), 2) == P(4, 4)


def test_distance_select_tie_breaks_to_smallest_z1():
    assert distance_select({P(4, 8), P(8, 4)}, refs_0_10(), 2) == P(4, 8)


def test_distance_select_errors():
    with pytest.raises(BargainError):
        distance_select(set(), refs_0_10(), 2)
    degenerate = ReferencePoints(P(5, 0), P(5, 10))
    with pytest.raises(BargainError, match="degenerate"):
        distance_select({P(5, 5)}, degenerate, 2)


def test_large_alpha_matches_the_infinite_norm():
    pts = {P(2, 8), P(4, 4)}
    want = distance_select(pts, refs_0_10(), INFINITY)
    assert distance_select(pts, refs_0_10(), 64) == want
    assert distance_select(pts, refs_0_10(), 128) == want


@given(staircases,
       st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=30),
       st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=30),
       st.sampled_from([F(1), F(2), F(4), INFINITY]))
@settings(max_examples=60, deadline=None)
def test_distance_select_affine_invariance(raw, a1, b1, a2, b2, alpha):
    points = [P(z1, z2) for z1, z2 in raw]
    ideal = P(min(p.z1 for p in points) - 1, min(p.z2 for p in points) - 1)
    dis = P(max(p.z1 for p in points) + 1, max(p.z2 for p in points) + 1)
    base = distance_select(points, ReferencePoints(ideal, dis), alpha)
    mapped = [P(a1 * p.z1 + b1, a2 * p.z2 + b2) for p in points]
    refs2 = ReferencePoints(P(a1 * ideal.z1 + b1, a2 * ideal.z2 + b2),
                            P(a1 * dis.z1 + b1, a2 * dis.z2 + b2))
    got = distance_select(mapped, refs2, alpha)
    assert got == P(a1 * base.z1 + b1, a2 * base.z2 + b2)


# -- reference points and dispatch ---------------------------------------------------

def test_reference_points_t1_matches_oracle():
    inst = t1_instance()
    prog = build_charging_program(inst)
    participation = ParticipationPoint(*noncollab_costs(inst))
    refs = reference_points(prog, participation)
    oracle_pts = charging_frontier(inst, participation=(participation.z1_non,
                                                        participation.z2_non))
    assert refs.ideal == P(min(p.z1 for p in oracle_pts), min(p.z2 for p in oracle_pts))
    assert refs.disagreement == P(2100, 2100)


def test_reference_points_singleton():
    prog = make_point_program([(5, 5)])
    refs = reference_points(prog, ParticipationPoint(9, 9))
    assert refs.ideal == P(5, 5)
    assert refs.disagreement == P(9, 9)


def test_reference_points_infeasible_region():
    prog = make_point_program([(5, 5)])
    with pytest.raises(BargainError):
        reference_points(prog, ParticipationPoint(4, 4))


def test_reference_points_invariant():
    with pytest.raises(BargainError):
        ReferencePoints(P(5, 5), P(4, 9))


def test_bargain_config_validation():
    assert BargainConfig().pi == F(1, 2)
    assert BargainConfig(pi="0.5").pi == F(1, 2)
    assert BargainConfig(alpha="2.5").alpha == F(5, 2)
    with pytest.raises(BargainError):
        BargainConfig(mode="auction")
    with pytest.raises(BargainError):
        BargainConfig(pi=1)
    with pytest.raises(BargainError):
        BargainConfig(alpha=0)
    assert BargainConfig(alpha=INFINITY).alpha == INFINITY


def test_bargain_select_dispatch():
    pts = {P(2, 8), P(4, 4)}
    refs = refs_0_10()
    assert bargain_select(pts, refs, BargainConfig(mode="gnb", pi=F(1, 2))) == P(4, 4)
    assert bargain_select(pts, refs, BargainConfig(mode="alpha-norm", alpha=2)) == P(4, 4)
    assert bargain_select(pts, refs, BargainConfig(mode="inf-norm")) == P(4, 4)
