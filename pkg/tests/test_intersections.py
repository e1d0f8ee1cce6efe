import json
import math

import numpy as np
import pytest
from oracles import self_intersection_by_translates

from selfint.bounds import kappa_from_C
from selfint.closer import random_arcs
from selfint.hexagons import build_hexagons
from selfint.hyperbolic import HPoint, UnitTangent, translation_along_axis
from selfint.intersections import (
    IntersectionReport,
    closed_chords,
    closed_intersection,
    closed_self_intersection,
    count_pair,
    count_self,
    quadratic_bound,
)
from selfint.surface import invert_word
from selfint.tracer import HexagonTangencyError, hexagon_segments, trace, trace_frame


@pytest.fixture(scope="module")
def H(S):
    return build_hexagons(S, c_samples=300, seed=0)


def one_period(S, word, length):
    ch = closed_chords(S, S.word_matrix(word), word)
    # stop just short of a full turn so the ends do not touch; choose a start
    # whose trace never needs the corner perturbation
    for shift in (0.0123, 0.0371, 0.0517, 0.0779):
        a = trace_frame(S, ch.frames[0] @ translation_along_axis(shift), length - 1e-6)
        if not a.perturbed:
            return a
    return None  # the geodesic runs through an octagon vertex


def test_short_arc_is_simple(S, H):
    a = trace(S, UnitTangent(HPoint(0.1, 1.2), 0.7), 0.8)
    assert count_self(a).count == 0
    assert count_self(a, "hexagon", H).count == 0


def test_unknown_method(S):
    a = trace(S, UnitTangent(HPoint(0, 1), 0.0), 1.0)
    with pytest.raises(ValueError):
        count_self(a, "winding")
    with pytest.raises(ValueError):
        count_self(a, "hexagon")


def test_one_period_matches_translate_oracle(S, census8, H):
    # a period of a closed geodesic, traced as an arc, crosses itself i(gamma) times
    checked = 0
    for r in census8.records:
        if not r.primitive:
            continue
        a = one_period(S, r.word, r.length)
        if a is None:
            continue
        checked += 1
        assert count_self(a).count == r.self_intersections, r.word
        try:
            assert count_self(a, "hexagon", H).count == r.self_intersections, r.word
        except HexagonTangencyError:
            pass
    assert checked >= 150


def test_closed_counts_match_translate_oracle(S, census8):
    for r in census8.records:
        if r.primitive:
            assert self_intersection_by_translates(S, r.word) == r.self_intersections, r.word


def test_methods_agree_on_random_arcs(S, H):
    counts = []
    for a in random_arcs(S, 200, 1.0, 15.0, seed=11):
        x = count_self(a).count
        assert count_self(a, "hexagon", H).count == x
        counts.append(x)
    assert max(counts) > 5


def test_count_pair_symmetric_and_methods_agree(S, H):
    arcs = random_arcs(S, 40, 2.0, 10.0, seed=5)
    for a, b in zip(arcs[::2], arcs[1::2]):
        ab = count_pair(a, b).count
        assert count_pair(b, a).count == ab
        assert count_pair(a, b, "hexagon", H).count == ab


def test_at_most_one_crossing_per_piece_pair(S, H):
    for a in random_arcs(S, 50, 5.0, 15.0, seed=2):
        segs = hexagon_segments(H, a, S)
        r = count_self(a, "hexagon", H)
        pairs = {(min(i, j), max(i, j)) for i, j, _ in r.pairs}
        assert len(pairs) == r.count
        n = len(segs)
        assert r.count <= n * (n - 1) // 2


def test_pair_bound_holds(S, H):
    kappa = kappa_from_C(H.C_min)
    arcs = random_arcs(S, 200, 1.0, 15.0, seed=9)
    for a, b in zip(arcs[::2], arcs[1::2]):
        assert count_pair(a, b).count <= quadratic_bound(a.length, b.length, _Kappa(kappa))


class _Kappa:
    def __init__(self, kappa):
        self.kappa = kappa


def test_quadratic_bound_values():
    k = _Kappa(kappa_from_C(0.5))
    assert k.kappa == 64.0
    assert quadratic_bound(2.0, 3.0, k) == 384.0
    with pytest.raises(ValueError):
        quadratic_bound(0.5, 3.0, k)


def test_report_json_round_trip(S):
    a = random_arcs(S, 1, 14.0, 15.0, seed=4)[0]
    r = count_self(a)
    back = IntersectionReport.from_json(r.to_json())
    assert back.count == r.count and back.method == r.method
    assert len(back.pairs) == len(r.pairs)
    assert json.loads(r.to_json())["count"] == r.count


def test_crossing_times_inside_arc(S):
    for a in random_arcs(S, 20, 5.0, 15.0, seed=8):
        r = count_self(a)
        for ti, tj in r.times:
            assert 0 < ti < a.length and 0 < tj < a.length and abs(ti - tj) > 1e-9
        for (i, j, p), (ti, tj) in zip(r.pairs, r.times):
            assert abs(a.point_at(ti) - p.z) < 1e-6


def test_generators_are_simple(S):
    for w in "abcdABCD":
        assert closed_self_intersection(S, w) == 0


def test_closed_count_invariances(S):
    for w in ["aabb", "acbd", "abAd", "aabAB", "abcdd"]:
        v = closed_self_intersection(S, w)
        assert closed_self_intersection(S, invert_word(w)) == v
        assert closed_self_intersection(S, w[2:] + w[:2]) == v
        # conjugating by a letter does not change the class
        assert closed_self_intersection(S, "c" + w + "C") == v


def test_known_small_values(S):
    assert closed_self_intersection(S, "aabb") == self_intersection_by_translates(S, "aabb") == 1
    assert closed_self_intersection(S, "acbd") == self_intersection_by_translates(S, "acbd") == 3


def test_power_detection(S):
    for root in ["a", "ab", "aabb"]:
        i_root = closed_self_intersection(S, root)
        for k in (2, 3):
            ci = closed_intersection(S, root * k)
            assert ci.power == k
            assert ci.count == k * k * i_root + k - 1
            assert math.isclose(ci.length, k * closed_intersection(S, root).length, rel_tol=1e-9)


def test_trivial_word_rejected(S):
    with pytest.raises(ValueError):
        closed_intersection(S, "aA")


def test_census_crossing_positions_inside_period(S, census8):
    for r in census8.records[:60]:
        ci = closed_intersection(S, r.word)
        assert all(0 <= t <= ci.length + 1e-9 for t in np.ravel(ci.crossings))
