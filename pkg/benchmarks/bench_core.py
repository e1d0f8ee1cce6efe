"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_core.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from selfint._core import _pycore
from selfint.hyperbolic import frame
from selfint.intersections import closed_chords
from selfint.surface import build_genus2, sample_points, sample_tangents

try:
    from selfint._core import _ccore
except ImportError:
    _ccore = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(S):
    rng = np.random.default_rng(0)
    tangents = sample_tangents(S, rng, 20)

    def walk(mod):
        for v in tangents:
            mod.trace_walk(S.side_forms, S.side_inverse_matrices, frame(v), 60.0, S.vertex_z, 1e-10, 100_000)

    P = rng.uniform(-0.7, 0.7, (2000, 4))
    Q = rng.uniform(-0.7, 0.7, (2000, 4))

    def crossings(mod):
        mod.segment_crossings(P, Q, False, 0)

    ch = closed_chords(S, S.word_matrix("aabbcd"), "aabbcd")
    F = ch.frames
    inv = np.stack([F[:, 1, 1], -F[:, 0, 1], -F[:, 1, 0], F[:, 0, 0]], axis=-1).reshape(-1, 2, 2)
    pts = sample_points(S, rng, 20_000)
    n = len(ch.lengths)
    idx = np.tile(np.arange(n), len(pts)).astype(np.int64)
    ptr = np.arange(0, n * len(pts) + 1, n).astype(np.int64)

    def min_dist(mod):
        mod.min_dist_to_segments(pts, inv, ch.lengths, ptr, idx)

    return {"trace_walk (20 arcs, length 60)": walk,
            "segment_crossings (2000 x 2000)": crossings,
            "min_dist_to_segments (20000 points)": min_dist}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    S = build_genus2()
    print(f"{'kernel':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>8s}")
    for name, fn in cases(S).items():
        tp = best_of(lambda: fn(_pycore), args.repeat)
        if _ccore is None:
            print(f"{name:40s} {tp:12.4f} {'n/a':>12s} {'':>8s}")
            continue
        tc = best_of(lambda: fn(_ccore), args.repeat)
        print(f"{name:40s} {tp:12.4f} {tc:12.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
