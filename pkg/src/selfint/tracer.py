"""Tracing geodesic arcs on the surface by unfolding through the octagon tiling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _core
from .hyperbolic import (
    GeodesicSegment,
    HPoint,
    Isometry,
    UnitTangent,
    frame,
    frame_tangent,
    half_to_klein_array,
    mobius,
    normalize_det,
    to_klein,
    translation_along_axis,
)
from .surface import SurfaceGroup, normalize_z

MAX_LENGTH = 1e4
CORNER_TOL = 1e-10
PERTURB_STEP = 1e-9


@dataclass(frozen=True, eq=False)
class TracedArc:
    """A geodesic arc folded into the octagon.

    ``frames[k]`` is the local frame of segment ``k`` in octagon coordinates
    (segment ``k`` is ``frames[k](i e^t)`` for ``0 <= t <= times[k]``) and
    ``chambers[k]`` carries octagon coordinates to the cover coordinates the
    arc was started in.
    """

    start: UnitTangent
    length: float
    frames: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    sides: np.ndarray = field(repr=False)
    chambers: np.ndarray = field(repr=False)
    crossing_word: str = ""
    perturbed: bool = False

    @property
    def n_segments(self) -> int:
        return len(self.times)

    @cached_property
    def starts(self) -> np.ndarray:
        return _core.frames_to_points(self.frames, np.zeros(len(self.times)))

    @cached_property
    def ends(self) -> np.ndarray:
        return _core.frames_to_points(self.frames, self.times)

    @cached_property
    def segments(self) -> list[tuple[GeodesicSegment, Isometry]]:
        out = []
        for k in range(self.n_segments):
            seg = GeodesicSegment(
                HPoint.from_complex(complex(self.starts[k])),
                HPoint.from_complex(complex(self.ends[k])),
                float(self.times[k]),
            )
            out.append((seg, Isometry.from_matrix(self.chambers[k])))
        return out

    @cached_property
    def klein_segments(self) -> np.ndarray:
        return klein_array(self.starts, self.ends)

    @property
    def start_frame(self) -> np.ndarray:
        return self.frames[0]

    @property
    def end_frame(self) -> np.ndarray:
        """Local frame at the endpoint, octagon coordinates."""
        return normalize_det(self.frames[-1] @ translation_along_axis(float(self.times[-1])))

    def end_tangent(self) -> UnitTangent:
        return frame_tangent(self.end_frame)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Arc-length parameter at the start of each segment."""
        return np.concatenate([[0.0], np.cumsum(self.times)[:-1]])

    def locate(self, t: float) -> tuple[int, float]:
        k = int(np.searchsorted(self.offsets, t, side="right") - 1)
        k = min(max(k, 0), self.n_segments - 1)
        return k, t - float(self.offsets[k])

    def point_at(self, t: float) -> complex:
        """Folded point (octagon coordinates) at arc length ``t``."""
        k, s = self.locate(t)
        return complex(_core.frames_to_points(self.frames[k:k + 1], [s])[0])

    def cover_point_at(self, t: float) -> complex:
        """Point at arc length ``t`` in the cover coordinates of the start."""
        k, s = self.locate(t)
        z = complex(_core.frames_to_points(self.frames[k:k + 1], [s])[0])
        return mobius(self.chambers[k], z)

    @cached_property
    def cover_frame(self) -> np.ndarray:
        """Frame of the whole arc in cover coordinates."""
        return normalize_det(self.chambers[0] @ self.frames[0])

    def segment_pairs(self):
        return [(seg, g) for seg, g in self.segments]


@dataclass(frozen=True)
class GeodesicSpec:
    """A complete geodesic given by its time-zero unit tangent."""

    base: UnitTangent


class CornerHitError(RuntimeError):
    pass


def klein_array(starts, ends) -> np.ndarray:
    ks = half_to_klein_array(starts)
    ke = half_to_klein_array(ends)
    return np.column_stack([ks.real, ks.imag, ke.real, ke.imag])


def fold_frame(S: SurfaceGroup, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold a frame's base point into the octagon.

    Returns ``(local_frame, chamber)`` with ``chamber @ local_frame == m``.
    """
    z = mobius(m, 1j)
    _, g = normalize_z(S, z)
    local = normalize_det(g @ m)
    chamber = np.linalg.inv(g)
    return local, normalize_det(chamber)


def walk(S: SurfaceGroup, local: np.ndarray, length: float, corner_tol: float = CORNER_TOL):
    return _core.trace_walk(
        S.side_forms, S.side_inverse_matrices, local, float(length), S.vertex_z, corner_tol,
        int(50 * length + 1000),
    )


def _chambers(S: SurfaceGroup, chamber0: np.ndarray, sides: np.ndarray) -> np.ndarray:
    out = np.empty((len(sides), 2, 2))
    g = chamber0
    for k, side in enumerate(sides):
        out[k] = g
        if side >= 0:
            g = g @ S.side_matrices[side]
            if k % 32 == 31:
                g = normalize_det(g)
    return out


def trace_frame(S: SurfaceGroup, m: np.ndarray, l: float, *, on_corner: str = "perturb",
                max_attempts: int = 20, perturb_step: float = PERTURB_STEP) -> TracedArc:
    """Trace from a frame given in cover coordinates.

    ``on_corner`` decides what happens when the arc runs into an octagon
    vertex: ``"perturb"`` rotates the start by ``perturb_step`` (growing with
    each attempt), ``"raise"`` raises :class:`CornerHitError` and ``"ignore"``
    keeps the exact arc, which then has zero-length segments at the vertex.
    """
    if on_corner not in ("perturb", "raise", "ignore"):
        raise ValueError(f"unknown corner policy {on_corner!r}")
    if not 0 < l <= MAX_LENGTH:
        raise ValueError(f"arc length must lie in (0, {MAX_LENGTH}]")
    perturbed = False
    base = m
    for attempt in range(max_attempts):
        local, chamber0 = fold_frame(S, base)
        sides, times, frames, corner = walk(S, local, l)
        if corner < 0 or on_corner == "ignore":
            break
        if on_corner == "raise":
            raise CornerHitError(f"geodesic passes within {CORNER_TOL} of a vertex")
        perturbed = True
        base = normalize_det(m @ _rotation(perturb_step * (attempt + 1)))
    else:
        raise CornerHitError("could not perturb away from octagon vertices")
    # a start on the boundary pointing outward yields an empty first segment
    while len(times) > 1 and times[0] < 1e-13 and sides[0] >= 0:
        chamber0 = normalize_det(chamber0 @ S.side_matrices[sides[0]])
        sides, times, frames = sides[1:], times[1:], frames[1:]
    chambers = _chambers(S, chamber0, sides)
    word = "".join(S.side_pairings[int(k)][0] for k in sides[:-1])
    start = frame_tangent(base)
    return TracedArc(start, float(l), frames, times, sides, chambers, word, perturbed)


def _rotation(phi: float) -> np.ndarray:
    from .hyperbolic import rotation_about_i

    return rotation_about_i(phi)


def trace(S: SurfaceGroup, v: UnitTangent, l: float) -> TracedArc:
    """Trace the geodesic arc of length ``l`` leaving ``v``."""
    return trace_frame(S, frame(v), l)


def centered_subarc(S: SurfaceGroup, g: GeodesicSpec, t_x: float, l: float) -> TracedArc:
    """The length-``l`` subarc of ``g`` centred at time ``t_x``."""
    m = frame(g.base) @ translation_along_axis(t_x - 0.5 * l)
    return trace_frame(S, normalize_det(m), l)


def reverse_frame(m: np.ndarray, l: float) -> np.ndarray:
    """Frame at the far end of a length-``l`` arc, pointing backward."""
    from .hyperbolic import rotation_about_i

    return normalize_det(m @ translation_along_axis(l) @ rotation_about_i(math.pi))


def arc_points(arc: TracedArc, n: int) -> np.ndarray:
    """``n`` evenly spaced folded points along the arc (endpoints included)."""
    ts = np.linspace(0.0, arc.length, n)
    return np.array([arc.point_at(t) for t in ts])


def dump_arc(arc: TracedArc) -> str:
    """Line-oriented dump: start frame, length, crossing word, segments."""
    lines = [
        f"start {arc.start.base.x:.16e} {arc.start.base.y:.16e} {arc.start.angle:.16e}",
        f"length {arc.length:.16e}",
        f"perturbed {int(arc.perturbed)}",
        f"word {arc.crossing_word or '-'}",
    ]
    for k in range(arc.n_segments):
        s, e = complex(arc.starts[k]), complex(arc.ends[k])
        lines.append(
            f"segment {k} {s.real:.16e} {s.imag:.16e} {e.real:.16e} {e.imag:.16e} {arc.times[k]:.16e}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# hexagon segments

HEX_VERTEX_TOL = 1e-9
HEX_PERTURB_STEP = 1e-7


class HexagonTangencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class HexagonSegment:
    """Maximal piece of an arc inside one hexagon of the cover.

    ``start``/``end`` are in the hexagon's own coordinates, ``t0``/``t1`` the
    arc-length parameters of the ends. Unpacks as ``(hexagon, segment)``.
    """

    hexagon: int
    segment: GeodesicSegment
    full: bool
    t0: float
    t1: float
    tile: np.ndarray = field(repr=False, compare=False)

    def __iter__(self):
        yield self.hexagon
        yield self.segment

    @property
    def length(self) -> float:
        return self.segment.length


def _cell_pieces(H, arc: TracedArc):
    """Clip every octagon segment by every cell; pieces ordered along the arc."""
    K = arc.klein_segments
    P0 = K[:, None, None, :2]
    D = (K[:, 2:] - K[:, :2])[:, None, None, :]
    A = H.cell_A[None]
    N = H.cell_N[None]
    num = np.sum(N * (P0 - A), axis=-1)
    den = np.sum(N * D, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -num / den
    lo = np.where(den > 0, t, -np.inf).max(axis=-1)
    hi = np.where(den < 0, t, np.inf).min(axis=-1)
    blocked = ((den == 0) & (num < 0)).any(axis=-1)
    tin = np.maximum(lo, 0.0)
    tout = np.minimum(hi, 1.0)
    ok = (tout - tin > 1e-12) & ~blocked
    seg, cell = np.nonzero(ok)
    tin, tout = tin[seg, cell], tout[seg, cell]
    order = np.lexsort((tin, seg))
    return seg[order], cell[order], tin[order], tout[order]


def hexagon_segments(H, a: TracedArc, S: SurfaceGroup | None = None) -> list[HexagonSegment]:
    """Cut an arc into maximal subarcs, each inside a single hexagon.

    If a cut point lands on a hexagon vertex and ``S`` is given, the arc is
    retraced from a start rotated by 1e-7 (repeatedly if needed); without
    ``S`` a :class:`HexagonTangencyError` is raised.
    """
    for attempt in range(20):
        try:
            return _hexagon_segments(H, a)
        except HexagonTangencyError:
            if S is None:
                raise
            m = normalize_det(frame(a.start) @ _rotation(HEX_PERTURB_STEP * (attempt + 1)))
            a = trace_frame(S, m, a.length)
    raise HexagonTangencyError("could not perturb away from hexagon vertices")


def _hexagon_segments(H, a: TracedArc) -> list[HexagonSegment]:
    from .hyperbolic import dist_array, klein_to_half_array, mobius_array

    seg, cell, tin, tout = _cell_pieces(H, a)
    K = a.klein_segments
    p0 = K[seg, 0] + 1j * K[seg, 1]
    p1 = K[seg, 2] + 1j * K[seg, 3]
    z_in = klein_to_half_array(p0 + tin * (p1 - p0))
    z_out = klein_to_half_array(p0 + tout * (p1 - p0))
    ginv = H.cell_group_inv[cell]
    h_in = mobius_array(ginv, z_in)
    h_out = mobius_array(ginv, z_out)
    hex_of = H.cell_hexagon[cell]
    # arc-length parameter at each piece start: offset + distance along the segment
    seg_start = a.starts[seg]
    t_in = a.offsets[seg] + dist_array(seg_start, z_in)
    t_out = a.offsets[seg] + dist_array(seg_start, z_out)
    hv = [np.array(h.vertices) for h in H.hexagons]
    for k in range(len(seg)):
        verts = hv[hex_of[k]]
        for z, tz in ((h_in[k], t_in[k]), (h_out[k], t_out[k])):
            # arc endpoints sitting on a vertex are harmless
            if 1e-12 < tz < a.length - 1e-12 and dist_array(z, verts).min() < HEX_VERTEX_TOL:
                raise HexagonTangencyError("arc passes through a hexagon vertex")
    out: list[HexagonSegment] = []
    cur = None
    for k in range(len(seg)):
        tile_g = H.cell_group[cell[k]]
        if cur is not None:
            prev_k = cur["last"]
            same = False
            if seg[k] == seg[prev_k] + 1 and hex_of[k] == hex_of[prev_k]:
                rel = H.side_matrices[a.sides[seg[prev_k]]] @ tile_g
                same = _same_psl(H.cell_group[cell[prev_k]], rel)
            if same:
                cur["last"] = k
                cur["end"] = h_out[k]
                cur["t1"] = t_out[k]
                continue
            out.append(_finish(cur, a))
        cur = {"first": k, "last": k, "hex": int(hex_of[k]), "start": h_in[k], "end": h_out[k],
               "t0": t_in[k], "t1": t_out[k], "tile": a.chambers[seg[k]] @ tile_g}
    if cur is not None:
        out.append(_finish(cur, a))
    n = len(out)
    return [
        HexagonSegment(s.hexagon, s.segment, 0 < i < n - 1, s.t0, s.t1, s.tile)
        for i, s in enumerate(out)
    ]


def _same_psl(m1, m2, tol: float = 1e-7) -> bool:
    return bool(np.abs(m1 - m2).max() < tol or np.abs(m1 + m2).max() < tol)


def _finish(cur, a: TracedArc) -> HexagonSegment:
    p = HPoint.from_complex(complex(cur["start"]))
    q = HPoint.from_complex(complex(cur["end"]))
    seg = GeodesicSegment(p, q, float(cur["t1"] - cur["t0"]))
    return HexagonSegment(cur["hex"], seg, False, float(cur["t0"]), float(cur["t1"]), cur["tile"])
