import math

import numpy as np
import pytest
from oracles import _ball, _fold_to_axis

from selfint.bounds import GrowthBound
from selfint.census import CensusSlice
from selfint.cover import (
    CoverSpec,
    GeodesicNet,
    InsufficientCensusError,
    box_counts,
    box_dimension,
    build_cover,
    covering_check,
    curve_points,
    epsilon,
    hausdorff_closed_form,
    hausdorff_measure,
    intersection_budget,
    lebesgue_bound,
    lebesgue_measure,
    random_budget_proxies,
    subarc_intersection_profile,
    uniform_points,
)
from selfint.closer import random_arcs
from selfint.hyperbolic import frame_tangent
from selfint.intersections import closed_chords, count_self
from selfint.surface import sample_points
from selfint.tracer import GeodesicSpec

ZERO = lambda n: 0.0  # noqa: E731
LINEAR = lambda n: 0.01 * n  # noqa: E731


@pytest.fixture(scope="module")
def gb0():
    return GrowthBound(C=0.95, R_hat=10.0, a_X=math.e, injectivity_radius=1.128)


def test_epsilon_and_budget(gb0):
    assert epsilon(8) == pytest.approx(0.270671, abs=1e-6)
    assert intersection_budget(ZERO, 8, gb0) == 0
    assert intersection_budget(LINEAR, 8, gb0) == math.floor(gb0.c_X * 0.08)


def test_cover_spec_validation(census8):
    with pytest.raises(ValueError):
        CoverSpec(6, 0.1, census8)
    with pytest.raises(ValueError):
        CoverSpec(6, epsilon(6), census8, kind="square")
    partial = CensusSlice(8.0, math.inf, census8.records, False)
    with pytest.raises(InsufficientCensusError):
        CoverSpec(6, epsilon(6), partial)


def test_build_cover_needs_enough_census(census8, gb0):
    with pytest.raises(InsufficientCensusError, match="L >= 9"):
        build_cover(census8, 9, ZERO, gb0)
    small = census8.restrict(K=2)
    with pytest.raises(InsufficientCensusError, match="K >= "):
        build_cover(small, 8, lambda n: 1.0, gb0)


def test_zero_budget_gives_simple_members(census8, gb0):
    c = build_cover(census8, 8, ZERO, gb0)
    assert len(c.members) > 0
    assert all(r.self_intersections == 0 and r.length <= 8 + 1e-9 for r in c.members.records)


def test_member_count_nondecreasing(census8, gb0):
    sizes = [len(build_cover(census8, n, LINEAR, gb0).members) for n in range(2, 9)]
    assert sizes == sorted(sizes)
    assert sizes[0] == 0


def test_empty_cover_measures(S, census8, gb0):
    c = build_cover(census8, 2, ZERO, gb0)
    r = lebesgue_measure(S, c)
    assert (r.lebesgue_bound, r.lebesgue_mc) == (0.0, 0.0)
    assert r.mc_within_bound()


def test_lebesgue_bound_formula(census8, gb0):
    c = build_cover(census8, 6, ZERO, gb0)
    assert lebesgue_bound(c) == pytest.approx(len(c.members) * 30 * math.exp(-1.5), rel=1e-12)


def test_hausdorff_values(census8, gb0):
    c = build_cover(census8, 8, ZERO, gb0, kind="ball")
    m = len(c.members)
    r1 = hausdorff_measure(c, 1.0)
    assert r1.hausdorff_h == pytest.approx(4 * 8 * m, rel=1e-9)
    r = hausdorff_measure(c, 1.5)
    assert r.hausdorff_h == pytest.approx(m * 64 / math.e, rel=1e-9)
    for h in (0.3, 1.0, 1.5, 2.0):
        r = hausdorff_measure(c, h)
        assert abs(r.hausdorff_h - r.hausdorff_closed_form) <= 1e-9 * r.hausdorff_closed_form
    assert c.ball_count == m * math.ceil(16 / epsilon(8))


def test_hausdorff_rejects_bad_input(census8, gb0):
    c = build_cover(census8, 8, ZERO, gb0, kind="ball")
    for h in (0.0, -1.0, 2.5):
        with pytest.raises(ValueError):
            hausdorff_measure(c, h)
    with pytest.raises(ValueError):
        hausdorff_measure(build_cover(census8, 8, ZERO, gb0), 1.0)
    assert hausdorff_closed_form(0, 8, 1.5) == 0.0


def _distance_oracle(S, words, points, cutoff):
    """Distance to the union of closed geodesics, by brute force over the
    axes of conjugates g w g^-1 for g in a large ball."""
    R = S.circumradius
    best = np.full(len(points), np.inf)
    for w in words:
        m = _fold_to_axis(S, S.word_matrix(w))
        ell = 2 * math.acosh(abs(np.trace(m)) / 2)
        B = _ball(S, 2 * R + cutoff + 0.5 * ell + 0.2)
        for g in B:
            c = g @ m @ np.linalg.inv(g)
            p, q = np.roots([c[1, 0], c[1, 1] - c[0, 0], -c[0, 1]]).real
            u = (points - p) / (points - q)
            d = np.arcsinh(np.abs(u.real) / np.abs(u.imag))
            best = np.minimum(best, d)
    return best


def test_net_distances_match_brute_force(S, census8, gb0):
    c = build_cover(census8, 4, ZERO, gb0)
    net = GeodesicNet(S, c.words)
    pts = sample_points(S, np.random.default_rng(3), 300)
    d, member = net.distances(pts, 0.6)
    ref = _distance_oracle(S, c.words, pts, 0.6)
    near = ref <= 0.6 - 1e-6
    assert near.sum() > 30
    assert np.allclose(d[near], ref[near], atol=1e-7)
    assert np.all(np.isinf(d[ref > 0.6 + 1e-6]))
    assert np.all(member[near] >= 0)
    cov = net.covered(pts, 0.3)
    assert np.array_equal(cov, ref <= 0.3)


def test_mc_estimate_within_bound(S, census8, gb0):
    c = build_cover(census8, 6, ZERO, gb0)
    r1 = lebesgue_measure(S, c, 20_000, seed=1)
    r2 = lebesgue_measure(S, c, 20_000, seed=2)
    assert r1.mc_within_bound() and r2.mc_within_bound()
    assert abs(r1.lebesgue_mc - r2.lebesgue_mc) <= 4 * math.hypot(r1.lebesgue_stderr, r2.lebesgue_stderr)
    with pytest.raises(ValueError):
        lebesgue_measure(S, c, 100)
    d = r1.to_dict()
    assert d["hausdorff_h"] is None and d["lebesgue_mc"] == r1.lebesgue_mc


def _profile_oracle(a, L, n):
    t = np.array(count_self(a).times).reshape(-1, 2)
    lo, hi = t.min(axis=1), t.max(axis=1)
    out = {}
    for l in np.unique(np.concatenate([[L], (hi - lo)[(hi - lo >= L) & (hi - lo <= n)]])):
        # an optimal window can be slid right until it starts at some lo_k
        best = 0
        for s in np.concatenate([lo, [0.0]]):
            best = max(best, int(((lo >= s - 1e-12) & (hi <= s + l + 1e-12)).sum()))
        out[float(l)] = best
    return out


def test_subarc_profile_matches_oracle(S):
    for a in random_arcs(S, 15, 20.0, 30.0, seed=4):
        prof = subarc_intersection_profile(a, 2.0, 10.0)
        ref = _profile_oracle(a, 2.0, 10.0)
        assert {l: c for l, c in prof} == pytest.approx(ref)


def _geodesic_on(S, word, shift=0.3):
    from selfint.hyperbolic import translation_along_axis

    ch = closed_chords(S, S.word_matrix(word), word)
    return GeodesicSpec(frame_tangent(ch.frames[0] @ translation_along_axis(shift)))


def test_covering_check_on_member(S, census8, gb0):
    # a traced multiple of a closed geodesic drifts off itself and picks up
    # near-tangent crossings, so the budget here is generous
    g = _geodesic_on(S, "c")
    for n in (6, 8):
        r = covering_check(S, census8, g, lambda l: 10.0 * l, 2.0, n, gb0)
        assert r.covered is True and r.distance < 1e-8
        assert r.member and r.witness_ok
        assert r.witness_distance <= r.witness_bound


def test_covering_check_rejects_budget_violation(S, census8, gb0):
    g = _geodesic_on(S, "acbd")
    with pytest.raises(ValueError):
        covering_check(S, census8, g, ZERO, 2.0, 6, gb0)


def test_random_proxies_respect_budget(S):
    f = lambda l: 0.5 * l  # noqa: E731
    from selfint.cover import satisfies_budget
    from selfint.tracer import centered_subarc

    gs = random_budget_proxies(S, 3, f, 2.0, 6, seed=0)
    for g in gs:
        for n in (4, 6):
            assert satisfies_budget(centered_subarc(S, g, 0.0, 4.0 * n), f, 2.0, n)
    with pytest.raises(RuntimeError):
        random_budget_proxies(S, 1, lambda l: -1.0, 2.0, 6, max_tries=5)


def test_box_counts_by_hand():
    # disk coordinates 0.05, 0.15, 0.55 on the real axis, mapped to the half-plane
    w = np.array([0.05, 0.15, 0.55, -0.05])
    z = 1j * (1 + w) / (1 - w)
    assert list(box_counts(z, [1.0, 0.5, 0.1])) == [2, 3, 4]


def test_box_dimension_of_known_sets(S):
    w = np.linspace(-0.5, 0.5, 50_000)
    segment = 1j * (1 + w) / (1 - w)
    assert box_dimension(segment).dimension == pytest.approx(1.0, abs=0.05)
    bd = box_dimension(uniform_points(S, 100_000, seed=0))
    assert 1.85 <= bd.dimension <= 2.05
    assert len(bd.fitted) == 3 and bd.rows()[0][0] == max(bd.scales)


def test_box_dimension_errors(S):
    with pytest.raises(ValueError):
        box_dimension(uniform_points(S, 5_000))
    pts = uniform_points(S, 20_000)
    with pytest.raises(ValueError):
        box_dimension(pts, [0.1, 0.05, 0.04, 0.03])


def test_curve_points_spacing(S):
    pts = curve_points(S, ["c"], 0.01)
    ell = closed_chords(S, S.word_matrix("c"), "c").length
    assert abs(len(pts) - ell / 0.01) <= 5
