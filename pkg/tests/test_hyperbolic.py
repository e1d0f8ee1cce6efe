import math

import numpy as np
import pytest
from scipy import integrate, optimize

from selfint.hyperbolic import (
    GeodesicSegment,
    HPoint,
    Isometry,
    NonHyperbolicError,
    UnitTangent,
    apply,
    axis_frame,
    circle_curvature,
    distance_to_axis,
    hyp_dist,
    lambert_bound,
    lambert_chain_report,
    mobius,
    stated_lambert_majorant,
    to_disk,
    from_disk,
    to_klein,
    from_klein,
    translation_length,
)


def random_point(rng):
    return HPoint(rng.uniform(-5, 5), math.exp(rng.uniform(-3, 3)))


def random_isometry(rng, scale=10.0):
    """Uniform entries in [-scale, scale], conditioned on det = 1 and |d| <= scale."""
    while True:
        a, b, c = rng.uniform(-scale, scale, 3)
        if abs(a) > 1e-3 and abs((1 + b * c) / a) <= scale:
            return Isometry(a, b, c, (1 + b * c) / a)


def metric_length(p: complex, q: complex) -> float:
    """Length of the geodesic from p to q by integrating |dz| / y along it."""
    if abs(p.real - q.real) < 1e-14:
        return abs(integrate.quad(lambda y: 1.0 / y, p.imag, q.imag)[0])
    # centre and radius of the semicircle through p and q
    c = (abs(q) ** 2 - abs(p) ** 2) / (2 * (q.real - p.real))
    r = abs(p - c)
    t0, t1 = np.angle(p - c), np.angle(q - c)
    f = lambda t: r / (r * math.sin(t))
    return abs(integrate.quad(f, t0, t1, epsabs=1e-13, epsrel=1e-13)[0])


def test_hpoint_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        HPoint(0.0, -1.0)
    with pytest.raises(ValueError):
        HPoint(0.0, 0.0)


def test_isometry_determinant_and_sign():
    with pytest.raises(ValueError):
        Isometry(2.0, 0.0, 0.0, 2.0)
    T = Isometry(-2.0, 0.0, 0.0, -0.5)
    assert T.a == 2.0 and T.d == 0.5
    assert T.close_to(Isometry(2.0, 0.0, 0.0, 0.5))


def test_unit_tangent_angle_normalized():
    v = UnitTangent(HPoint(0, 1), -0.5)
    assert 0 <= v.angle < 2 * math.pi
    assert math.isclose(v.angle, 2 * math.pi - 0.5)
    assert math.isclose(v.reversed().angle, (v.angle + math.pi) % (2 * math.pi))


def test_segment_length_matches_distance():
    p, q = HPoint(0.3, 0.7), HPoint(-1.2, 2.5)
    s = GeodesicSegment.between(p, q)
    assert abs(s.length - hyp_dist(p, q)) < 1e-9
    with pytest.raises(ValueError):
        GeodesicSegment.between(p, p)


def test_distance_examples():
    i = HPoint(0, 1)
    assert hyp_dist(i, i) == 0.0
    assert abs(hyp_dist(i, HPoint(0, 2)) - math.log(2)) < 1e-15
    assert abs(hyp_dist(i, HPoint(1, 2)) - math.acosh(1.5)) < 1e-12


@pytest.mark.parametrize("p,q", [(1j, 1 + 2j), (1j, 2j), (-0.5 + 0.3j, 2 + 1.5j), (0.1 + 4j, 0.2 + 0.05j)])
def test_distance_matches_metric_integral(p, q):
    assert abs(hyp_dist(HPoint.from_complex(p), HPoint.from_complex(q)) - metric_length(p, q)) < 1e-8


def test_metric_axioms():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p, q, r = random_point(rng), random_point(rng), random_point(rng)
        d_pq = hyp_dist(p, q)
        assert d_pq >= 0
        assert abs(d_pq - hyp_dist(q, p)) < 1e-9
        assert d_pq <= hyp_dist(p, r) + hyp_dist(r, q) + 1e-9


def test_apply_examples():
    p = HPoint(0.3, 1.7)
    assert apply(Isometry.identity(), p) == p
    q = apply(Isometry(2.0, 0.0, 0.0, 0.5), HPoint(0, 1))
    assert abs(q.x) < 1e-15 and abs(q.y - 4.0) < 1e-15


def test_isometry_invariance():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        T = random_isometry(rng)
        p, q = HPoint(rng.uniform(-1, 1), rng.uniform(0.5, 2)), HPoint(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        d0 = hyp_dist(p, q)
        d1 = hyp_dist(T(p), T(q))
        assert abs(d0 - d1) < 1e-10


def test_translation_length_examples():
    assert abs(translation_length(Isometry(2.0, 0.0, 0.0, 0.5)) - 2 * math.log(2)) < 1e-12
    with pytest.raises(NonHyperbolicError):
        translation_length(Isometry(1.0, 1.0, 0.0, 1.0))  # parabolic
    with pytest.raises(NonHyperbolicError):
        translation_length(Isometry(math.cos(1), -math.sin(1), math.sin(1), math.cos(1)))


def test_translation_length_conjugation_invariant():
    rng = np.random.default_rng(3)
    done = 0
    while done < 1000:
        T = random_isometry(rng, 3.0)
        if abs(T.trace) <= 2.1:
            continue
        g = random_isometry(rng, 3.0)
        conj = g @ T @ g.inverse()
        l0, l1 = translation_length(T), translation_length(conj)
        assert abs(l0 - l1) < 1e-10
        done += 1


def test_translation_length_is_minimal_displacement():
    rng = np.random.default_rng(4)
    for _ in range(20):
        T = random_isometry(rng, 3.0)
        if abs(T.trace) <= 2.2:
            continue
        m = T.matrix

        def disp(v):
            z = complex(v[0], math.exp(v[1]))
            return hyp_dist(HPoint.from_complex(z), HPoint.from_complex(mobius(m, z)))

        best = min(optimize.minimize(disp, x0, method="Nelder-Mead",
                                     options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000}).fun
                   for x0 in ([0.0, 0.0], [1.0, 1.0], [-1.0, -1.0]))
        assert abs(best - translation_length(T)) < 1e-6


def test_axis_frame_and_distance():
    T = Isometry(2.0, 0.0, 0.0, 0.5)
    assert distance_to_axis(T.matrix, 3j) < 1e-12
    assert abs(distance_to_axis(T.matrix, 1 + 1j) - math.asinh(1.0)) < 1e-12
    F = axis_frame(T.matrix)
    assert abs(mobius(F, 1j).real) < 1e-12


def test_model_conversions_round_trip():
    for z in (1j, 0.3 + 0.2j, -4 + 7j):
        assert abs(from_disk(to_disk(z)) - z) < 1e-12
        assert abs(from_klein(to_klein(z)) - z) < 1e-12


def test_lambert_bound_values():
    assert abs(lambert_bound(4.0) - math.sinh(1) / math.cosh(2)) < 1e-15
    # sinh(1) = 1.17520119364380, cosh(2) = 3.76219569108363
    assert abs(lambert_bound(4.0) - 1.17520119364380 / 3.76219569108363) < 1e-12
    assert round(lambert_bound(4.0), 5) == 0.31237
    with pytest.raises(ValueError):
        lambert_bound(0.0)
    ls = np.linspace(0.1, 60, 500)
    vals = [lambert_bound(l) for l in ls]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_lambert_majorization_chain():
    # the exact bound exceeds 2 e^{-l/2} (sinh 1 / cosh(l/2) ~ 2.35 e^{-l/2})
    assert lambert_bound(4.0) > stated_lambert_majorant(4.0)
    assert abs(math.sinh(1) - 1.175201) < 1e-6 and math.sinh(1) < 2
    assert not math.cosh(2.0) > math.exp(2.0)
    rows = lambert_chain_report(np.arange(1, 51))
    assert all(r["sinh1_lt_2"] for r in rows)
    assert not any(r["cosh_gt_exp"] for r in rows)
    assert all(r["cosh_gt_half_exp"] and r["exact_le_4exp"] for r in rows)
    # sinh(1)/cosh(l/2) <= 2 e^{-l/2}  iff  e^l <= 1 / (sinh(1) - 1)
    cut = -math.log(math.sinh(1) - 1)
    assert all(r["exact_le_majorant"] == (r["l"] <= cut) for r in rows)


def test_circle_curvature():
    assert abs(circle_curvature(math.pi / 2)) < 1e-15
    assert circle_curvature(0.0) == 1.0
    assert abs(circle_curvature(math.pi / 3) - 0.5) < 1e-15
    with pytest.raises(ValueError):
        circle_curvature(4.0)
