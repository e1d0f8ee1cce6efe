"""Counting transverse intersections of traced arcs and closed geodesics.

Two independent methods are provided for arcs:

``pairwise-lift``
    every pair of folded octagon segments is compared in octagon coordinates
    (the relative deck transformation between their chambers is already
    applied by folding). In the Klein model the segments are straight, so a
    crossing is a Euclidean segment crossing.

``hexagon``
    the arc is cut into maximal pieces inside hexagons of the right-angled
    decomposition, each mapped to its hexagon's own coordinates, and only
    pieces in the same hexagon are compared.

Closed geodesics are handled in the cover: the self-intersection number is
half the number of distinct translates of a fixed lift that cross one period
of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .hyperbolic import (
    HPoint,
    axis_endpoints,
    axis_frame,
    dist_array,
    half_to_klein_array,
    inv,
    klein_to_half_array,
    mobius,
    normalize_det,
    translation_along_axis,
    translation_length,
)
from .surface import SurfaceGroup, cyclic_reduce, normalize_z
from .tracer import TracedArc, hexagon_segments

METHODS = ("pairwise-lift", "hexagon")
DEGENERATE_SINE = 1e-7


@dataclass
class IntersectionReport:
    count: int
    pairs: list[tuple[int, int, HPoint]]
    method: str
    degenerate: bool = False
    n_degenerate: int = 0
    # arc-length parameters of each crossing on the first and second arc
    times: list[tuple[float, float]] = field(default_factory=list)
    sines: list[float] = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        return json.dumps({
            "count": self.count,
            "method": self.method,
            "degenerate": self.degenerate,
            "n_degenerate": self.n_degenerate,
            "pairs": [[i, j, p.x, p.y] for i, j, p in self.pairs],
            "times": [list(t) for t in self.times],
        })

    @classmethod
    def from_json(cls, line: str) -> "IntersectionReport":
        d = json.loads(line)
        pairs = [(int(i), int(j), HPoint(x, y)) for i, j, x, y in d["pairs"]]
        return cls(d["count"], pairs, d["method"], d["degenerate"], d["n_degenerate"],
                   [tuple(t) for t in d["times"]])


# ---------------------------------------------------------------------------
# geometry helpers

def _forms_from_frames(frames: np.ndarray) -> np.ndarray:
    """Forms (a, b, c) of the geodesics frame(i R+)."""
    p1, q1 = frames[:, 0, 1], frames[:, 1, 1]
    p2, q2 = frames[:, 0, 0], frames[:, 1, 0]
    return np.stack([q1 * q2, -(p1 * q2 + p2 * q1), p1 * p2], axis=-1)


def _forms_from_points(z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    """Forms of the geodesics through pairs of half-plane points."""
    x0, y0, x1, y1 = z0.real, z0.imag, z1.real, z1.imag
    # a|z|^2 + b x + c through both points; vertical lines when x0 == x1
    r0 = x0 * x0 + y0 * y0
    r1 = x1 * x1 + y1 * y1
    dx = x1 - x0
    with np.errstate(divide="ignore", invalid="ignore"):
        b = -(r1 - r0) / dx
        c = -r0 - b * x0
    vertical = np.abs(dx) < 1e-15 * (np.abs(x0) + np.abs(x1) + 1)
    a = np.where(vertical, 0.0, 1.0)
    b = np.where(vertical, 1.0, b)
    c = np.where(vertical, -x0, c)
    return np.stack([a, b, c], axis=-1)


def crossing_sine(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Sine of the angle between intersecting geodesics with forms f, g."""
    def B(u, v):
        return 0.5 * u[..., 1] * v[..., 1] - u[..., 0] * v[..., 2] - v[..., 0] * u[..., 2]

    cos = B(f, g) / np.sqrt(B(f, f) * B(g, g))
    return np.sqrt(np.maximum(0.0, 1.0 - cos * cos))


def _klein(z0, z1) -> np.ndarray:
    from .hyperbolic import half_to_klein_array

    k0 = half_to_klein_array(z0)
    k1 = half_to_klein_array(z1)
    return np.column_stack([k0.real, k0.imag, k1.real, k1.imag])


def _crossing_points(K: np.ndarray, i: np.ndarray, s: np.ndarray) -> np.ndarray:
    k = K[i, 0] + s * (K[i, 2] - K[i, 0]) + 1j * (K[i, 1] + s * (K[i, 3] - K[i, 1]))
    return klein_to_half_array(k)


# ---------------------------------------------------------------------------
# arcs

def _lift_pieces(a: TracedArc):
    # every octagon segment lives in the same chart
    forms = _forms_from_frames(a.frames)
    return np.zeros(a.n_segments, dtype=np.int64), a.klein_segments, a.starts, a.offsets, forms


def _hex_pieces(H, a: TracedArc):
    segs = hexagon_segments(H, a)
    hexes = np.array([s.hexagon for s in segs], dtype=np.int64)
    z0 = np.array([s.segment.start.z for s in segs], dtype=complex)
    z1 = np.array([s.segment.end.z for s in segs], dtype=complex)
    t0 = np.array([s.t0 for s in segs])
    return hexes, _klein(z0, z1), z0, t0, _forms_from_points(z0, z1)


def _build_report(method, i, j, ti, tj, sines, witnesses):
    order = np.lexsort((j, i))
    deg = sines < DEGENERATE_SINE
    pairs = [(int(i[k]), int(j[k]), HPoint.from_complex(complex(witnesses[k]))) for k in order]
    times = [(float(ti[k]), float(tj[k])) for k in order]
    return IntersectionReport(len(pairs), pairs, method, bool(deg.any()), int(deg.sum()), times,
                              [float(sines[k]) for k in order])


def count_self(a: TracedArc, method: str = "pairwise-lift", H=None) -> IntersectionReport:
    """Transverse self-crossings of an arc, one per crossing pair of strands."""
    return _count(a, None, method, H)


def count_pair(a: TracedArc, b: TracedArc, method: str = "pairwise-lift", H=None) -> IntersectionReport:
    """Transverse crossings between two arcs."""
    return _count(a, b, method, H)


def _count(a, b, method, H):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    same = b is None
    if method == "pairwise-lift":
        ga, Ka, za, oa, fa = _lift_pieces(a)
        gb_, Kb, zb, ob, fb = (ga, Ka, za, oa, fa) if same else _lift_pieces(b)
    else:
        if H is None:
            raise ValueError("the hexagon method needs a HexagonDecomposition")
        ga, Ka, za, oa, fa = _hex_pieces(H, a)
        gb_, Kb, zb, ob, fb = (ga, Ka, za, oa, fa) if same else _hex_pieces(H, b)
    # pieces are lengthened slightly so that a crossing on a chart boundary is
    # seen from at least one side; repeats are merged by arc time below
    Ea = _extend(Ka)
    Eb = Ea if same else _extend(Kb)
    s0 = PIECE_EXTENSION / (1 + 2 * PIECE_EXTENSION)
    I, J, TI, TJ, SN = [], [], [], [], []
    for h in np.unique(ga):
        ia = np.nonzero(ga == h)[0]
        ib = ia if same else np.nonzero(gb_ == h)[0]
        if not len(ia) or not len(ib):
            continue
        i, j, s, u, _ = _core.segment_crossings(Ea[ia], Eb[ib], same, 0)
        gi, gj = ia[i], ib[j]
        w = _crossing_points(Ea, gi, s)
        wb = _crossing_points(Eb, gj, u)
        I.append(gi)
        J.append(gj)
        TI.append(oa[gi] + np.sign(s - s0) * dist_array(za[gi], w))
        TJ.append(ob[gj] + np.sign(u - s0) * dist_array(zb[gj], wb))
        SN.append(crossing_sine(fa[gi], fb[gj]))
    e = np.zeros(0)
    if not I:
        return _build_report(method, e.astype(int), e.astype(int), e, e, e, e.astype(complex))
    i, j = np.concatenate(I), np.concatenate(J)
    ti, tj = np.concatenate(TI), np.concatenate(TJ)
    sn = np.concatenate(SN)
    lb = a.length if same else b.length
    keep = (ti > 0) & (ti <= a.length) & (tj > 0) & (tj <= lb)
    if same:
        keep &= np.abs(ti - tj) > TIME_MERGE_TOL
        swap = ti > tj
        ti, tj = np.where(swap, tj, ti), np.where(swap, ti, tj)
        i, j = np.where(swap, j, i), np.where(swap, i, j)
    keep &= _first_of_repeats(ti, tj, keep)
    i, j, ti, tj, sn = i[keep], j[keep], ti[keep], tj[keep], sn[keep]
    # witnesses in octagon coordinates, read off the first arc
    w = np.array([a.point_at(t) for t in ti], dtype=complex)
    return _build_report(method, i, j, ti, tj, sn, w)


def quadratic_bound(L_a: float, L_b: float, gb) -> float:
    """kappa * L_a * L_b; the estimate requires both lengths at least 1."""
    if L_a < 1 or L_b < 1:
        raise ValueError("lengths must be at least 1")
    return gb.kappa * L_a * L_b


PIECE_EXTENSION = 1e-7
TIME_MERGE_TOL = 1e-6


def _extend(K: np.ndarray) -> np.ndarray:
    d = K[:, 2:] - K[:, :2]
    return np.hstack([K[:, :2] - PIECE_EXTENSION * d, K[:, 2:] + PIECE_EXTENSION * d])


def _first_of_repeats(ti: np.ndarray, tj: np.ndarray, keep: np.ndarray) -> np.ndarray:
    out = keep.copy()
    idx = np.nonzero(keep)[0]
    idx = idx[np.lexsort((tj[idx], ti[idx]))]
    for n, k in enumerate(idx):
        for m in idx[:n][::-1]:
            if ti[k] - ti[m] > TIME_MERGE_TOL:
                break
            if out[m] and abs(tj[k] - tj[m]) <= TIME_MERGE_TOL:
                out[k] = False
                break
    return out


# ---------------------------------------------------------------------------
# closed geodesics

BASE_SHIFT = 0.2718281828459045


@dataclass
class ClosedIntersection:
    word: str
    length: float
    count: int
    power: int
    root_word: str
    crossings: list[float] = field(default_factory=list, repr=False)
    degenerate: bool = False


class CuttingSequenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ClosedChords:
    """The closed geodesic of a hyperbolic class as chords of the octagon.

    ``sides`` is the cutting sequence of one period (side crossed at the end
    of each chord) and ``frames[k]`` maps ``i e^t`` (``0 <= t <= lengths[k]``)
    onto chord ``k``. Chord ``k`` lies on the axis of ``rotations[k]``, the
    cyclic rotation of the cutting word starting after ``k`` crossings; the
    chords are computed from these axes, not by a long floating-point trace
    (closed orbits are unstable and a trace drifts by roughly ``e^length``).
    """

    word: str
    length: float
    sides: np.ndarray
    rotations: np.ndarray = field(repr=False)
    frames: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.lengths)[:-1]])

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points (half-plane, octagon coordinates) of every chord."""
        return (_core.frames_to_points(self.frames, np.zeros(len(self.lengths))),
                _core.frames_to_points(self.frames, self.lengths))


def _boundary_point(v) -> complex:
    # homogeneous (p, q) on the real line to the unit circle
    p, q = v
    return complex(p, -q) / complex(p, q)


def _exit_side(V: np.ndarray, orient: float, N: np.ndarray, prefer: float = 1.0,
               tol: float = 1e-9) -> tuple[int, complex]:
    """Side through which the line ``N(i e^t)``, pushed infinitesimally to
    its left (``prefer = 1``) or right (``prefer = -1``), leaves the octagon
    with Klein vertices ``V``. Side k joins V[k] and V[k+1]; ``orient`` is
    +1 for counterclockwise order. Returns the side and the exit point
    (Klein). In the Klein model the line and the sides are straight."""
    e1 = _boundary_point((N[0, 1], N[1, 1]))
    e2 = _boundary_point((N[0, 0], N[1, 0]))
    d = e2 - e1
    dn = abs(d)
    cand = []
    for k in range(8):
        E = V[(k + 1) % 8] - V[k]
        en = abs(E)
        # f(s) for the point e1 + s d is a signed distance, >= 0 inside
        rate = orient * (E.real * d.imag - E.imag * d.real) / (en * dn)
        if rate >= -1e-12:
            continue
        w0 = e1 - V[k]
        f0 = orient * (E.real * w0.imag - E.imag * w0.real) / en
        cand.append((-f0 / (rate * dn), k))
    best = min(s for s, _ in cand)
    x = e1 + best * d
    ties = [k for s, k in cand if (s - best) * dn < tol]
    if len(ties) == 1:
        return ties[0], x

    def leftness(k):
        a, b = V[k], V[(k + 1) % 8]
        u = (a if abs(a - x) > abs(b - x) else b) - x
        return prefer * (d.real * u.imag - d.imag * u.real) / (abs(u) * dn)

    return max(ties, key=leftness), x


def _walk_line(S, V, orient, N, prefer, until, max_steps):
    """Exits (parameter, side) of the line N(i e^t) for t up to ``until``."""
    IM = S.side_inverse_matrices
    out = []
    for _ in range(max_steps):
        k, x = _exit_side(V, orient, N, prefer)
        w = mobius(inv(N), complex(klein_to_half_array(x)))
        t = math.log(abs(w))
        if t > until:
            return out
        out.append((t, k))
        N = normalize_det(IM[k] @ N)
    raise CuttingSequenceError("cutting sequence walk exceeded its step guard")


def cutting_sequence(S: SurfaceGroup, m: np.ndarray, shift: float = BASE_SHIFT,
                     max_steps: int = 20000) -> np.ndarray:
    """Sides crossed by one period of the closed geodesic of ``m``.

    The walk is combinatorial: a lift of the axis is carried across the exit
    side of the octagon again and again. Half a period is walked forward and
    half backward so rounding drift stays of order ``e^(length/2)``. When the
    geodesic runs through a vertex or along a side, ties are broken as for a
    copy pushed slightly to the left, so the sequence is that of a nearby
    freely homotopic curve in general position.
    """
    from .hyperbolic import rotation_about_i
    from .surface import PARTNER

    ell = translation_length(m)
    F = normalize_det(axis_frame(m) @ translation_along_axis(shift))
    z0 = mobius(F, complex(math.cos(0.5 * math.pi + 1e-6), math.sin(0.5 * math.pi + 1e-6)))
    _, h = normalize_z(S, z0)
    N0 = normalize_det(h @ F)
    V = half_to_klein_array(S.vertex_z)
    orient = math.copysign(1.0, np.sum(V.real * np.roll(V.imag, -1) - np.roll(V.real, -1) * V.imag))
    margin = 1.0
    reach = 0.5 * ell + margin
    fwd = _walk_line(S, V, orient, N0, 1.0, reach, max_steps)
    back = _walk_line(S, V, orient, normalize_det(N0 @ rotation_about_i(math.pi)), -1.0, reach, max_steps)
    # a backward exit through side k is a forward entry through k, that is
    # a forward exit through its partner from the neighbouring tile
    events = [(-t, PARTNER[k]) for t, k in reversed(back)] + fwd
    ts = np.array([t for t, _ in events])
    # cut the period where the events are sparsest
    lo, hi = -0.5 * ell - 0.5 * margin, -0.5 * ell + 0.5 * margin
    pts = np.sort(np.concatenate([[lo, hi], ts[(ts > lo) & (ts < hi)]]))
    gap = int(np.argmax(np.diff(pts)))
    c = 0.5 * (pts[gap] + pts[gap + 1])
    sides = [k for t, k in events if c <= t < c + ell]
    if not sides:
        raise CuttingSequenceError("empty cutting sequence")
    word = "".join(S.side_pairings[k][0] for k in sides)
    tw = abs(float(np.trace(S.word_matrix(word))))
    tm = abs(float(np.trace(m)))
    if abs(tw - tm) > 1e-8 * tm:
        raise CuttingSequenceError(f"cutting word {word} does not match the class (trace {tw} vs {tm})")
    return np.array(sides, dtype=np.int64)


def closed_chords(S: SurfaceGroup, m: np.ndarray, word: str = "") -> ClosedChords:
    sides = cutting_sequence(S, m)
    letters = [S.side_pairings[int(k)][0] for k in sides]
    n = len(letters)
    rots = np.array([S.word_matrix("".join(letters[k:] + letters[:k])) for k in range(n)])
    frames = np.empty((n, 2, 2))
    lengths = np.empty(n)
    for k in range(n):
        N = axis_frame(rots[k])
        t_in, t_out = _clip_axis(S, N)
        if not (math.isfinite(t_in) and math.isfinite(t_out)):
            raise CuttingSequenceError(f"rotation {k} of the cutting word misses the octagon")
        frames[k] = normalize_det(N @ translation_along_axis(t_in))
        lengths[k] = max(0.0, t_out - t_in)
    ell = translation_length(m)
    return ClosedChords(word, ell, sides, rots, frames, lengths)


def _clip_axis(S: SurfaceGroup, N: np.ndarray) -> tuple[float, float]:
    """Parameter interval of the line N(i e^t) inside the octagon."""
    f = S.side_forms
    a, b, c, d = N[0, 0], N[0, 1], N[1, 0], N[1, 1]
    ap = f[:, 0] * a * a + f[:, 1] * a * c + f[:, 2] * c * c
    cp = f[:, 0] * b * b + f[:, 1] * b * d + f[:, 2] * d * d
    t_in, t_out = -math.inf, math.inf
    for A_, C_ in zip(ap, cp):
        if A_ * C_ < 0:
            t = 0.5 * math.log(-C_ / A_)
            if A_ > 0:
                t_out = min(t_out, t)
            else:
                t_in = max(t_in, t)
    return t_in, t_out


def _translates(ch: ClosedChords, tol: float = 1e-7):
    """Distinct translates of the lift crossing one period of it, found as
    crossings of chord lines; also the chords lying on the lift itself."""
    fr = ch.frames
    inv = np.linalg.inv(fr)
    M = np.einsum("kij,ljm->klim", inv, fr)
    a, b, c, d = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    scale = np.abs(M).reshape(M.shape[0], M.shape[1], 4).max(axis=-1)
    own = (np.abs(b) < 1e-8 * scale) & (np.abs(c) < 1e-8 * scale)
    # endpoints M(0) = b/d and M(inf) = a/c lie on opposite sides of 0
    # exactly when the line crosses the imaginary axis
    with np.errstate(divide="ignore", invalid="ignore"):
        prod = (b * a) / (d * c)
        t_loc = 0.5 * np.log(-prod)
        w1 = (b / d) * np.exp(-t_loc)
        t = np.mod(ch.offsets[:, None] + t_loc, ch.length)
    ok = (prod < 0) & ~own & np.isfinite(t)
    K, L = np.nonzero(ok)
    tt, aa = t[K, L], np.arctan(w1[K, L])
    order = np.lexsort((aa, tt))
    tt, aa = tt[order], aa[order]
    kept_t: list[float] = []
    kept_a: list[float] = []
    for x, y in zip(tt, aa):
        dup = False
        for q in range(len(kept_t) - 1, -1, -1):
            if x - kept_t[q] > tol:
                break
            if abs(y - kept_a[q]) < tol:
                dup = True
                break
        if not dup:
            kept_t.append(float(x))
            kept_a.append(float(y))
    # wrap-around duplicates near t = 0 and t = length
    while len(kept_t) > 1 and kept_t[-1] > ch.length - tol and any(
            abs(kept_t[0] + ch.length - kept_t[-1]) < tol and abs(kept_a[q] - kept_a[-1]) < tol
            for q in range(len(kept_t) - 1) if kept_t[q] < tol):
        kept_t.pop()
        kept_a.pop()
    return kept_t, [int(k) for k in np.nonzero(own[0])[0] if k != 0]


def closed_intersection(S: SurfaceGroup, w: str) -> ClosedIntersection:
    """Self-intersection data for the closed geodesic of the class of ``w``.

    For a power ``u^k`` of a primitive class the value reported is
    ``k^2 i(u) + k - 1``, the self-intersection number of the ``k``-fold
    iterate after a generic perturbation.
    """
    w = cyclic_reduce(w)
    if not w:
        raise ValueError("trivial word")
    m = S.word_matrix(w)
    ell = translation_length(m)
    ch = closed_chords(S, m, w)
    ts, own = _translates(ch)
    power = len(own) + 1
    if power == 1:
        return ClosedIntersection(w, ell, len(ts) // 2, 1, w, ts, len(ts) % 2 == 1)
    n = len(ch.sides)
    letters = "".join(S.side_pairings[int(k)][0] for k in ch.sides)
    root = letters[: n // power]
    rch = closed_chords(S, S.word_matrix(root), root)
    rts, rown = _translates(rch)
    if rown:
        raise RuntimeError("primitive root detection failed")
    i_root = len(rts) // 2
    count = power * power * i_root + power - 1
    return ClosedIntersection(w, ell, count, power, root, rts, len(rts) % 2 == 1)


def closed_self_intersection(S: SurfaceGroup, w: str) -> int:
    return closed_intersection(S, w).count
