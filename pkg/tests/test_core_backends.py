import os
import subprocess
import sys

import numpy as np
import pytest

from selfint import _core
from selfint._core import _pycore
from selfint.hyperbolic import frame
from selfint.surface import sample_points, sample_tangents

ccore = pytest.importorskip("selfint._core._ccore")


def _walk_args(S, v, length):
    return (S.side_forms, S.side_inverse_matrices, frame(v), length, S.vertex_z, 1e-10, 100_000)


def test_default_backend_is_compiled():
    assert _core.BACKEND == "cython"


def test_pure_python_switch():
    env = dict(os.environ, SELFINT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from selfint import _core; print(_core.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_trace_walk_agrees(S):
    for v in sample_tangents(S, np.random.default_rng(0), 30):
        s1, t1, f1, c1 = _pycore.trace_walk(*_walk_args(S, v, 20.0))
        s2, t2, f2, c2 = ccore.trace_walk(*_walk_args(S, v, 20.0))
        assert list(s1) == list(s2) and c1 == c2
        assert np.allclose(t1, t2, atol=1e-10)
        assert np.allclose(f1, f2, atol=1e-8)


def test_segment_crossings_agree():
    rng = np.random.default_rng(1)
    P = rng.uniform(-0.7, 0.7, (300, 4))
    Q = rng.uniform(-0.7, 0.7, (200, 4))
    for args in ((P, Q, False, 0), (P, P, True, 0), (P, P, True, 1), (P, P, True, 2)):
        a = _pycore.segment_crossings(*args)
        b = ccore.segment_crossings(*args)
        ka = np.lexsort((a[1], a[0]))
        kb = np.lexsort((b[1], b[0]))
        for x, y in zip(a, b):
            assert np.allclose(np.asarray(x)[ka], np.asarray(y)[kb], atol=1e-12)


def test_segment_crossings_by_hand():
    # the diagonals of a square cross at their midpoints
    P = np.array([[-0.5, -0.5, 0.5, 0.5]])
    Q = np.array([[-0.5, 0.5, 0.5, -0.5], [0.6, 0.6, 0.7, 0.7]])
    for mod in (_pycore, ccore):
        i, j, s, u, sine = mod.segment_crossings(P, Q, False, 0)
        assert list(i) == [0] and list(j) == [0]
        assert s[0] == pytest.approx(0.5) and u[0] == pytest.approx(0.5)
        assert sine[0] == pytest.approx(1.0)


def test_min_dist_agrees(S):
    from selfint.intersections import closed_chords

    ch = closed_chords(S, S.word_matrix("aabb"), "aabb")
    F = ch.frames
    inv = np.stack([F[:, 1, 1], -F[:, 0, 1], -F[:, 1, 0], F[:, 0, 0]], axis=-1).reshape(-1, 2, 2)
    pts = sample_points(S, np.random.default_rng(2), 200)
    n = len(ch.lengths)
    idx = np.tile(np.arange(n), len(pts)).astype(np.int64)
    ptr = np.arange(0, n * len(pts) + 1, n).astype(np.int64)
    a = _pycore.min_dist_to_segments(pts, inv, ch.lengths, ptr, idx)
    b = ccore.min_dist_to_segments(pts, inv, ch.lengths, ptr, idx)
    assert np.allclose(a, b, atol=1e-12)


def test_frames_to_points_agree(S):
    F = np.array([frame(v) for v in sample_tangents(S, np.random.default_rng(3), 50)])
    t = np.linspace(0, 3, 50)
    assert np.allclose(_pycore.frames_to_points(F, t), ccore.frames_to_points(F, t))
