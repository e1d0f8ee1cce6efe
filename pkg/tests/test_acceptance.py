"""Acceptance criteria, one test each. Every test prints a single
``CRITERION k: PASS|FAIL`` line with the measured numbers, then asserts."""
import math
import time

import numpy as np
from oracles import conjugacy_classes
from test_hyperbolic import random_isometry, random_point

from selfint.bounds import dim_bound_and_k0, k0_for
from selfint.census import growth_check, validate_certificate
from selfint.closer import close_arc, random_arcs
from selfint.cover import (
    box_dimension,
    build_cover,
    cover_net,
    covering_check,
    curve_points,
    hausdorff_measure,
    lebesgue_measure,
    random_budget_proxies,
    uniform_points,
)
from selfint.hexagons import build_hexagons
from selfint.hyperbolic import HPoint, hyp_dist, translation_length
from selfint.intersections import count_pair, count_self, quadratic_bound


def report(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")


def test_criterion_1_kernel(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    metric = iso = conj = 0.0
    for _ in range(1000):
        p, q, r = random_point(rng), random_point(rng), random_point(rng)
        d = hyp_dist(p, q)
        metric = max(metric, -d, abs(d - hyp_dist(q, p)), d - hyp_dist(p, r) - hyp_dist(r, q),
                     hyp_dist(p, p))
    for _ in range(1000):
        T = random_isometry(rng)
        p = HPoint(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        q = HPoint(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        iso = max(iso, abs(hyp_dist(p, q) - hyp_dist(T(p), T(q))))
    done = 0
    while done < 1000:
        T = random_isometry(rng, 3.0)
        if abs(T.trace) <= 2.1:
            continue
        g = random_isometry(rng, 3.0)
        conj = max(conj, abs(translation_length(T) - translation_length(g @ T @ g.inverse())))
        done += 1
    dt = time.perf_counter() - t0
    ok = metric <= 1e-9 and iso < 1e-10 and conj < 1e-10 and dt < 10
    report(capsys, 1, ok, f"metric {metric:.2e} isometry {iso:.2e} conjugation {conj:.2e} in {dt:.1f}s")
    assert ok


def test_criterion_2_intersections(capsys, S, gb):
    t0 = time.perf_counter()
    H = build_hexagons(S, c_samples=200)
    arcs = random_arcs(S, 200, 1.0, 15.0, seed=5)
    mismatch = sum(count_self(a).count != count_self(a, "hexagon", H).count for a in arcs)
    rng = np.random.default_rng(6)
    violations = 0
    for _ in range(100):
        i, j = rng.choice(len(arcs), 2, replace=False)
        a, b = arcs[i], arcs[j]
        if count_pair(a, b).count > quadratic_bound(a.length, b.length, gb):
            violations += 1
    dt = time.perf_counter() - t0
    ok = mismatch == 0 and violations == 0 and dt < 300
    report(capsys, 2, ok, f"method mismatches {mismatch}/200, kappa={gb.kappa:.3f} "
                          f"violations {violations}/100 in {dt:.1f}s")
    assert ok


def test_criterion_3_closing(capsys, S, gb):
    t0 = time.perf_counter()
    arcs = random_arcs(S, 50, 5.0, 20.0, seed=0)
    certs = [close_arc(S, a, 0.1) for a in arcs]
    wins = [c for c in certs if c.success]
    d = 2.0 * gb.kappa * gb.R_hat
    fellow = sum(c.fellow_travel_distance > 1.0 for c in wins)
    length = sum(c.closed_length > c.arc_length + gb.R_hat + 1e-9 for c in wins)
    doubling = sum(c.arc_length + gb.R_hat > 2.0 * c.arc_length for c in wins)
    lemma = sum(c.intersection_count > c.arc_self_intersections + d * c.arc_length for c in wins)
    failures = [round(c.arc_length, 2) for c in certs if not c.success]
    dt = time.perf_counter() - t0
    rate = len(wins) / len(certs)
    ok = rate >= 0.9 and fellow == length == doubling == lemma == 0 and dt < 600
    report(capsys, 3, ok, f"success {len(wins)}/50, R_hat={gb.R_hat:.3f}; violations: fellow {fellow}, "
                          f"l+R_hat {length}, l+R_hat<=2l {doubling}, lemma {lemma}; "
                          f"failed arcs (length) {failures} in {dt:.1f}s")
    assert ok


def test_criterion_4_census(capsys, S, census8):
    t0 = time.perf_counter()
    classes = conjugacy_classes(S, 8, 8.0)
    ours = np.sort([r.trace_abs for r in census8.records])
    theirs = np.sort([t for _, t in classes])
    same = len(ours) == len(theirs) and np.allclose(ours, theirs, rtol=1e-10)
    ident = max(abs(r.length - 2.0 * math.acosh(r.trace_abs / 2.0)) for r in census8.records)
    cert = validate_certificate(S, census8)
    dt = time.perf_counter() - t0
    ok = same and ident < 1e-9 and cert["ok"] and dt < 600
    report(capsys, 4, ok, f"{len(ours)} classes vs oracle {len(theirs)}, identity {ident:.1e}, "
                          f"certificate {cert['ok']} in {dt:.1f}s")
    assert ok


def test_criterion_5_growth(capsys, census12, gb):
    t0 = time.perf_counter()
    ks = (0.1, 0.2, 0.4)
    slacks = {k: growth_check(census12, range(4, 13), k, gb).min_slack for k in ks}
    mus = [gb.mu(k) for k in (0.4, 0.2, 0.1)]
    dt = time.perf_counter() - t0
    ok = min(slacks.values()) >= 0 and mus[0] > mus[1] > mus[2] and dt < 1200
    report(capsys, 5, ok, f"a_X={gb.a_X:.4f} min slack "
                          + ", ".join(f"k={k}: {s:.3f}" for k, s in slacks.items())
                          + f"; mu {[round(m, 4) for m in mus]} in {dt:.1f}s")
    assert ok


def test_criterion_6_measures(capsys, S, census12, gb):
    t0 = time.perf_counter()
    k = 0.05
    f = lambda l: (k * l) ** 2  # noqa: E731
    est, within, rel = [], True, 0.0
    for n in (6, 8, 10, 12):
        c = build_cover(census12, n, f, gb, kind="ball")
        leb = lebesgue_measure(S, c, 10_000, seed=n, net=cover_net(S, c))
        hau = hausdorff_measure(c, 1.5)
        est.append(leb.lebesgue_mc)
        within &= leb.mc_within_bound()
        rel = max(rel, abs(hau.hausdorff_h - hau.hausdorff_closed_form) / hau.hausdorff_closed_form)
    dt = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(est, est[1:]))
    ok = within and rel <= 1e-9 and decreasing and dt < 900
    report(capsys, 6, ok, f"MC within bound {within}, Hausdorff rel {rel:.1e}, "
                          f"lambda(C_n) {[round(x, 3) for x in est]} decreasing {decreasing} in {dt:.1f}s")
    assert ok


def test_criterion_7_covering(capsys, S, census12, gb):
    t0 = time.perf_counter()
    f = lambda l: l  # noqa: E731
    ns = list(range(6, 13))
    proxies = random_budget_proxies(S, 20, f, 5.0, max(ns), seed=0)
    N_obs, bad_witness, uncovered = [], 0, 0
    for g in proxies:
        outs = []
        for n in ns:
            r = covering_check(S, census12, g, f, 5.0, n, gb)
            outs.append(r.covered)
            if r.covered is not None and not r.witness_ok:
                bad_witness += 1
        N = None
        for i in range(len(ns) - 1, -1, -1):
            if outs[i] is not True:
                break
            N = ns[i]
        if N is None:
            uncovered += 1
        N_obs.append(N)
    dt = time.perf_counter() - t0
    N_observed = max((N for N in N_obs if N is not None), default=None)
    ok = uncovered == 0 and bad_witness == 0 and dt < 900
    report(capsys, 7, ok, f"N_observed={N_observed}, uncovered {uncovered}/20, "
                          f"witness violations {bad_witness} in {dt:.1f}s")
    assert ok


def test_criterion_8_dimension(capsys, S, census12, gb):
    t0 = time.perf_counter()
    uni = box_dimension(uniform_points(S, 100_000, seed=0)).dimension
    one = box_dimension(curve_points(S, ["ab"], 2.5e-4)).dimension
    words = [r.word for r in census12.restrict(10.0, 0).records]
    simple = box_dimension(curve_points(S, words, 2.5e-4)).dimension
    k0 = k0_for(gb.a_X, gb.mu_factor)
    ks = (0.2, 0.1, 0.05, 0.01)
    dims = [dim_bound_and_k0(gb, k)[0] for k in ks]
    dt = time.perf_counter() - t0
    ok = (1.85 <= uni <= 2.05 and 0.9 <= one <= 1.1 and 0.8 <= simple <= 1.4
          and abs(gb.mu(k0) - 0.25) <= 1e-9
          and all(b < a for a, b in zip(dims, dims[1:])) and all(x > 1 for x in dims) and dt < 1200)
    report(capsys, 8, ok, f"uniform {uni:.3f}, geodesic {one:.3f}, simple<=10 ({len(words)}) {simple:.3f}, "
                          f"mu(k0)-1/4 {gb.mu(k0) - 0.25:.1e}, dim_bound {[round(x, 4) for x in dims]} "
                          f"in {dt:.1f}s")
    assert ok

