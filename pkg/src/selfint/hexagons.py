"""Right-angled hexagon decomposition of the genus-2 surface.

Two pairs of pants are cut along the curves ``a``, ``c`` and the separating
curve ``abAB``. In the cover, pants one is bounded by lifts of the axes of
``a``, ``bAB`` and ``abAB``; pants two by ``c``, ``dCD`` and ``cdCD``. Each
pants is the union of the right-angled hexagon spanned by common
perpendiculars between its three axes and the mirror image of that hexagon
across one seam.

Points of the octagon are located in the decomposition through *cells*, the
convex pieces ``P`` intersected with ``g H_j``, computed in the Klein model
where hyperbolic convex polygons are Euclidean convex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hyperbolic import (
    axis_frame,
    dist_z,
    from_klein,
    inv,
    mobius,
    normalize_det,
    to_klein,
)
from .surface import GroupBall, SurfaceGroup

PANTS_CURVES = (("a", "bAB", "abAB"), ("c", "dCD", "cdCD"))


@dataclass(frozen=True)
class Hexagon:
    """A right-angled hexagon in cover coordinates.

    Vertices run counterclockwise. Edges ``0, 2, 4`` lie on pants curves
    (``boundary_curves``) and edges ``1, 3, 5`` are seams.
    """

    index: int
    pants: int
    vertices: tuple[complex, ...]
    boundary_curves: tuple[str, str, str]

    def edge(self, k: int) -> tuple[complex, complex]:
        return self.vertices[k], self.vertices[(k + 1) % 6]

    def edge_lengths(self) -> list[float]:
        return [dist_z(*self.edge(k)) for k in range(6)]

    def klein(self) -> np.ndarray:
        return np.array([[to_klein(v).real, to_klein(v).imag] for v in self.vertices])


@dataclass
class HexagonDecomposition:
    hexagons: list[Hexagon]
    # cells: hexagon index, group element g and Klein polygon of P ∩ g H_j
    cell_hexagon: np.ndarray = field(repr=False)
    cell_group: np.ndarray = field(repr=False)
    cell_polygons: list[np.ndarray] = field(repr=False)
    C_min: float = float("nan")
    side_matrices: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        # padded edge data for vectorised Cyrus-Beck clipping
        mv = max(len(p) for p in self.cell_polygons)
        nc = len(self.cell_polygons)
        A = np.zeros((nc, mv, 2))
        N = np.zeros((nc, mv, 2))
        for c, poly in enumerate(self.cell_polygons):
            e = np.roll(poly, -1, axis=0) - poly
            A[c, :len(poly)] = poly
            A[c, len(poly):] = poly[-1]
            N[c, :len(poly), 0] = -e[:, 1]
            N[c, :len(poly), 1] = e[:, 0]
        self.cell_A = A
        self.cell_N = N
        self.cell_group_inv = np.array([inv(g) for g in self.cell_group]).reshape(-1, 2, 2)

    @property
    def boundary_edges(self) -> list[tuple[int, int]]:
        return [(h.index, k) for h in self.hexagons for k in (0, 2, 4)]

    @property
    def seam_edges(self) -> list[tuple[int, int]]:
        return [(h.index, k) for h in self.hexagons for k in (1, 3, 5)]

    def locate(self, z: complex) -> int:
        """Index of a cell containing the octagon point ``z`` (-1 if none)."""
        k = to_klein(z)
        p = np.array([k.real, k.imag])
        for c, poly in enumerate(self.cell_polygons):
            if _inside_convex(poly, p, 1e-12):
                return c
        return -1


# ---------------------------------------------------------------------------
# construction

def common_perpendicular(m1: np.ndarray, m2: np.ndarray) -> tuple[complex, complex]:
    """Feet on the axes of ``m1`` and ``m2`` of their common perpendicular."""
    n = axis_frame(m1)
    ni = inv(n)
    e2 = _axis_endpoints_real(ni @ m2 @ n)
    v1, v2 = e2
    if v1 * v2 <= 0:
        raise ValueError("axes intersect or share an endpoint")
    r = math.sqrt(v1 * v2)
    c = 0.5 * (v1 + v2)
    x = r * r / c
    y = math.sqrt(max(0.0, r * r - x * x))
    return mobius(n, 1j * r), mobius(n, complex(x, y))


def _axis_endpoints_real(m: np.ndarray) -> tuple[float, float]:
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    # fixed points of z -> (az+b)/(cz+d): c z^2 + (d - a) z - b = 0
    disc = math.sqrt((d - a) ** 2 + 4 * b * c)
    if abs(c) < 1e-300:
        raise ValueError("axis through infinity")
    return ((a - d) - disc) / (2 * c), ((a - d) + disc) / (2 * c)


def reflect_across(p: complex, q: complex, z: complex) -> complex:
    """Reflection of ``z`` in the geodesic through ``p`` and ``q``."""
    from .hyperbolic import _standard_frame

    m = _standard_frame(p, q)
    w = mobius(m, z)
    return mobius(inv(m), complex(-w.real, w.imag))


def pants_hexagon(S: SurfaceGroup, curves: tuple[str, str, str]) -> tuple[complex, ...]:
    mats = [S.word_matrix(w) for w in curves]
    f01, f10 = common_perpendicular(mats[0], mats[1])
    f12, f21 = common_perpendicular(mats[1], mats[2])
    f20, f02 = common_perpendicular(mats[2], mats[0])
    verts = [f02, f01, f10, f12, f21, f20]
    if _signed_area(verts) < 0:
        verts = verts[::-1]
    return tuple(verts)


def build_hexagons(S: SurfaceGroup, *, c_samples: int = 1000, seed: int = 0) -> HexagonDecomposition:
    hexagons: list[Hexagon] = []
    for p, curves in enumerate(PANTS_CURVES):
        verts = pants_hexagon(S, curves)
        hexagons.append(_oriented(len(hexagons), p, verts, curves))
        # mirror across the seam between the first two curves
        seam = _seam_between(verts, S, curves[0], curves[1])
        mirrored = tuple(reflect_across(seam[0], seam[1], v) for v in verts)[::-1]
        hexagons.append(_oriented(len(hexagons), p, mirrored, curves))
    cells_h, cells_g, polys = _cells(S, hexagons)
    dec = HexagonDecomposition(hexagons, cells_h, cells_g, polys, side_matrices=S.side_matrices)
    if c_samples:
        dec.C_min = estimate_C(S, dec, c_samples, seed)
    else:
        dec.C_min = float("nan")
    return dec


def _seam_between(verts, S, w0, w1):
    # the seam is the edge whose two endpoints sit on the axes of w0 and w1
    from .hyperbolic import distance_to_axis

    m0, m1 = S.word_matrix(w0), S.word_matrix(w1)
    for k in range(6):
        p, q = verts[k], verts[(k + 1) % 6]
        for a, b in ((p, q), (q, p)):
            if distance_to_axis(m0, a) < 1e-8 and distance_to_axis(m1, b) < 1e-8:
                return p, q
    raise RuntimeError("seam not found")


def _oriented(index, pants, verts, curves) -> Hexagon:
    # rotate so edge 0 lies on a pants curve: seams join feet on different axes
    verts = list(verts)
    if _signed_area(verts) < 0:
        verts = verts[::-1]
    return Hexagon(index, pants, tuple(verts), tuple(curves))


def _signed_area(verts) -> float:
    k = [to_klein(v) for v in verts]
    s = 0.0
    for i in range(len(k)):
        a, b = k[i], k[(i + 1) % len(k)]
        s += a.real * b.imag - b.real * a.imag
    return 0.5 * s


# ---------------------------------------------------------------------------
# Klein-model polygon utilities

def _inside_convex(poly: np.ndarray, p: np.ndarray, tol: float = 0.0) -> bool:
    e = np.roll(poly, -1, axis=0) - poly
    w = p - poly
    cross = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
    return bool(np.all(cross >= -tol))


def clip_convex(subject: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by a counterclockwise convex one."""
    out = [tuple(p) for p in subject]
    n = len(clipper)
    for i in range(n):
        if not out:
            break
        a = clipper[i]
        b = clipper[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]

        def side(p):
            return ex * (p[1] - a[1]) - ey * (p[0] - a[0])

        inp = out
        out = []
        for j in range(len(inp)):
            cur = inp[j]
            prev = inp[j - 1]
            sc, sp = side(cur), side(prev)
            if sc >= 0:
                if sp < 0:
                    out.append(_lerp(prev, cur, sp / (sp - sc)))
                out.append(cur)
            elif sp >= 0:
                out.append(_lerp(prev, cur, sp / (sp - sc)))
    return _dedupe(np.array(out, dtype=float).reshape(-1, 2))


def _dedupe(poly: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    if len(poly) < 2:
        return poly
    keep = np.hypot(*(poly - np.roll(poly, 1, axis=0)).T) > tol
    return poly[keep]


def _lerp(p, q, t):
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def klein_polygon_area(poly: np.ndarray) -> float:
    """Hyperbolic area of a Klein-model convex polygon (Gauss-Bonnet)."""
    from .surface import _angle_at

    pts = [from_klein(complex(x, y)) for x, y in poly]
    n = len(pts)
    if n < 3:
        return 0.0
    total = 0.0
    for i in range(n):
        total += _angle_at(pts[i], pts[i - 1], pts[(i + 1) % n])
    return (n - 2) * math.pi - total


def _octagon_klein(S: SurfaceGroup) -> np.ndarray:
    return np.array([[to_klein(v).real, to_klein(v).imag] for v in S.vertex_z])


def _cells(S: SurfaceGroup, hexagons: list[Hexagon]):
    octagon = _octagon_klein(S)
    rho = max(dist_z(1j, v) for h in hexagons for v in h.vertices)
    ball = GroupBall(S, S.circumradius + rho + 0.1)
    cells_h, cells_g, polys = [], [], []
    for idx in range(len(ball)):
        g = ball.matrices[idx]
        for h in hexagons:
            img = np.array([[to_klein(mobius(g, v)).real, to_klein(mobius(g, v)).imag]
                            for v in h.vertices])
            # quick reject by bounding boxes
            if (img[:, 0].max() < octagon[:, 0].min() or img[:, 0].min() > octagon[:, 0].max()
                    or img[:, 1].max() < octagon[:, 1].min() or img[:, 1].min() > octagon[:, 1].max()):
                continue
            poly = clip_convex(img, octagon)
            if len(poly) < 3 or abs(_shoelace(poly)) < 1e-14:
                continue
            cells_h.append(h.index)
            cells_g.append(g)
            polys.append(poly)
    return np.array(cells_h, dtype=np.int64), np.array(cells_g).reshape(-1, 2, 2), polys


def _shoelace(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


SAFETY_FACTOR = 0.9
C_ARC_LENGTH = 20.0


def estimate_C(S: SurfaceGroup, H: HexagonDecomposition, samples: int = 1000, seed: int = 0,
               arc_length: float = C_ARC_LENGTH) -> float:
    """Smallest observed total length of three consecutive full hexagon
    segments over ``samples`` random arcs, times 0.9.

    Sample ``i`` uses its own stream seeded by ``(seed, i)``, so a larger
    sample count extends a smaller one and the estimate can only shrink.
    """
    from .surface import sample_tangents
    from .tracer import hexagon_segments, trace

    best = math.inf
    for i in range(samples):
        v = sample_tangents(S, np.random.default_rng([seed, i]), 1)[0]
        segs = hexagon_segments(H, trace(S, v, arc_length), S)
        lengths = [s.length if s.full else math.nan for s in segs]
        for i in range(len(lengths) - 2):
            total = lengths[i] + lengths[i + 1] + lengths[i + 2]
            if total < best:
                best = total
    if not math.isfinite(best) or best <= 0:
        raise RuntimeError("no three consecutive full segments observed")
    return SAFETY_FACTOR * best
