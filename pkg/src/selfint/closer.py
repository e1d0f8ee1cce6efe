"""Closing a geodesic arc to a nearby closed geodesic.

The arc ``alpha`` is lifted to the universal cover starting in the octagon.
A candidate closing word is ``W s`` where ``W`` is the crossing word of
``alpha`` and ``s`` a short suffix; the closing arc ``beta`` runs from the
end of ``alpha`` to the translate of its start point by ``W s``. Candidates
are scanned in ShortLex order of ``s`` and the first one whose two corner
deficits are at most ``eps`` is accepted.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .hyperbolic import (
    NonHyperbolicError,
    axis_frame,
    dist_array,
    frame,
    inv,
    mobius,
    mobius_array,
    normalize_det,
    translation_length,
)
from .intersections import closed_intersection, count_self
from .surface import LETTERS, SurfaceGroup, cyclic_reduce, free_reduce, sample_tangents, shortlex_key
from .tracer import TracedArc, trace_frame

DEFAULT_EPS = 0.1
DEFAULT_RADIUS = 6
FELLOW_SAMPLES = 64
MIN_ARC_LENGTH = 3.0


@dataclass
class ClosingCertificate:
    word: str
    closed_length: float
    fellow_travel_distance: float
    angle_deficits: tuple[float, float]
    beta_length: float
    intersection_count: int
    success: bool
    eps: float
    arc_length: float
    suffix: str = ""
    arc_self_intersections: int = -1
    search_trace: list[float] = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        d = asdict(self)
        d["angle_deficits"] = list(self.angle_deficits)
        return json.dumps(d)

    def lemma_bound(self, kappa: float, R_hat: float) -> float:
        """#alpha∩alpha + kappa R l + kappa R^2."""
        return self.arc_self_intersections + kappa * R_hat * self.arc_length + kappa * R_hat ** 2


@lru_cache(maxsize=8)
def _suffixes(S: SurfaceGroup, radius: int) -> tuple[list[str], np.ndarray]:
    words = [""]
    level = [""]
    for _ in range(radius):
        level = [w + c for w in level for c in LETTERS if not (w and w[-1] == c.swapcase())]
        words.extend(level)
    words.sort(key=shortlex_key)
    return words, np.array([S.word_matrix(w) for w in words])


def _cayley_angle(w: np.ndarray) -> np.ndarray:
    """Direction at i of the geodesic towards ``w``, with "up" as zero."""
    return np.angle((w - 1j) / (w + 1j))


def _deficits(a: TracedArc, s_mats: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner deficits and closing-arc lengths for suffix matrices ``s_mats``.

    Everything is expressed in the octagon coordinates of the last segment,
    where the end of the arc is ``q`` and the start copy is ``s z0``.
    """
    E = a.end_frame
    F0 = a.frames[0]
    z0 = complex(a.starts[0])
    q = mobius(E, 1j)
    w = mobius_array(s_mats, np.full(len(s_mats), z0))
    blen = dist_array(np.full(len(w), q), w)
    d_end = np.abs(_cayley_angle(mobius_array(inv(E), w)))
    G = s_mats @ F0
    back = mobius_array(np.linalg.inv(G), np.full(len(w), q))
    d_start = math.pi - np.abs(_cayley_angle(back))
    # a vanishing closing arc leaves a single corner between the two frames
    tiny = blen < 1e-9
    if tiny.any():
        rel = np.linalg.inv(G[tiny]) @ E
        # direction of E at the (common) base point, seen from G
        tip = mobius_array(rel, np.full(int(tiny.sum()), 1j * math.e))
        d_end[tiny] = np.abs(_cayley_angle(tip))
        d_start[tiny] = 0.0
    return d_end, d_start, blen


def crossing_matrix(S: SurfaceGroup, a: TracedArc) -> np.ndarray:
    return S.word_matrix(a.crossing_word)


def angle_deficit_of_closure(S: SurfaceGroup, a: TracedArc, w: str) -> tuple[float, float]:
    """Corner deficits (end, start) of the closed curve alpha∘beta whose
    holonomy is the word ``w`` (in the octagon frame of the arc's start)."""
    g = S.word_matrix(w)
    if abs(np.trace(g)) <= 2.0:
        raise NonHyperbolicError(f"word {w!r} is not hyperbolic")
    s = normalize_det(inv(crossing_matrix(S, a)) @ g)
    d1, d2, _ = _deficits(a, s[None])
    return float(d1[0]), float(d2[0])


def fellow_travel_distance(a: TracedArc, g: np.ndarray, n: int = FELLOW_SAMPLES) -> float:
    """Largest distance from ``n`` points of the lifted arc to the axis of ``g``
    (both in the octagon frame of the arc's start)."""
    N = inv(axis_frame(g))
    t = np.linspace(0.0, a.length, n)
    pts = mobius_array(a.frames[0], 1j * np.exp(t))
    w = mobius_array(N, pts)
    return float(np.arcsinh(np.abs(w.real) / w.imag).max())


def close_arc(S: SurfaceGroup, a: TracedArc, eps: float = DEFAULT_EPS, *,
              radius: int = DEFAULT_RADIUS, count_intersections: bool = True) -> ClosingCertificate:
    if a.length < MIN_ARC_LENGTH:
        raise ValueError(f"arc length must be at least {MIN_ARC_LENGTH}")
    words, mats = _suffixes(S, radius)
    d1, d2, blen = _deficits(a, mats)
    worst = np.maximum(d1, d2)
    W = crossing_matrix(S, a)
    tr = np.abs(np.einsum("ij,njk->nik", W, mats)[:, [0, 1], [0, 1]].sum(axis=1))
    worst = np.where(tr > 2.0 + 1e-9, worst, np.inf)
    ok = np.nonzero(worst <= eps)[0]
    success = len(ok) > 0
    pick = int(ok[0]) if success else int(np.argmin(worst))
    # running best score over the scanned prefix of the ShortLex order
    trace_best = np.minimum.accumulate(worst[: pick + 1])
    changes = np.nonzero(np.diff(np.concatenate([[np.inf], trace_best])))[0]
    search_trace = [float(trace_best[k]) for k in changes]
    suffix = words[pick]
    g = normalize_det(W @ mats[pick])
    word = cyclic_reduce(free_reduce(a.crossing_word + suffix))
    alpha_count = count_self(a).count if count_intersections else -1
    gamma_count = closed_intersection(S, word).count if count_intersections else -1
    return ClosingCertificate(
        word=word,
        closed_length=translation_length(g),
        fellow_travel_distance=fellow_travel_distance(a, g),
        angle_deficits=(float(d1[pick]), float(d2[pick])),
        beta_length=float(blen[pick]),
        intersection_count=gamma_count,
        success=success,
        eps=eps,
        arc_length=a.length,
        suffix=suffix,
        arc_self_intersections=alpha_count,
        search_trace=search_trace,
    )


def random_arcs(S: SurfaceGroup, n: int, lmin: float, lmax: float, seed: int = 0) -> list[TracedArc]:
    rng = np.random.default_rng(seed)
    out = []
    for v in sample_tangents(S, rng, n):
        out.append(trace_frame(S, frame(v), float(rng.uniform(lmin, lmax))))
    return out


@dataclass
class REstimate:
    R_hat: float
    lower_bound_only: bool
    eps: float
    radius: int
    beta_lengths: list[float]
    successes: int
    trials: int


def estimate_R(S: SurfaceGroup, eps: float = DEFAULT_EPS, trials: int = 50, *, seed: int = 0,
               radius: int = DEFAULT_RADIUS, lmin: float = 5.0, lmax: float = 20.0) -> REstimate:
    """Largest closing-arc length over ``trials`` random arcs closed at deficit ``eps``."""
    if trials < 20:
        raise ValueError("estimate_R needs at least 20 trials")
    lengths = []
    fails = 0
    for a in random_arcs(S, trials, lmin, lmax, seed):
        c = close_arc(S, a, eps, radius=radius, count_intersections=False)
        if c.success:
            lengths.append(c.beta_length)
        else:
            fails += 1
    R = max(lengths) if lengths else math.nan
    return REstimate(R, fails > 0, eps, radius, lengths, len(lengths), trials)
