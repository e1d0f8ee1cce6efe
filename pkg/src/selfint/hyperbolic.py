"""Upper half-plane geometry: points, isometries, distances and a few
closed-form estimates used by the covering arguments.

Isometries are stored as real 2x2 matrices of determinant one, normalized
so that ``a > 0`` (or ``a == 0`` and ``b > 0``); a matrix and its negation
describe the same Mobius map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GEOM_TOL = 1e-9
ALG_TOL = 1e-12
TWO_PI = 2.0 * math.pi


class NonHyperbolicError(ValueError):
    """Raised when a hyperbolic element is required but |trace| <= 2."""


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"point not in upper half-plane: y={self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)


def _canonical(a, b, c, d):
    if a < 0 or (a == 0 and b < 0):
        return -a, -b, -c, -d
    return a, b, c, d


@dataclass(frozen=True)
class Isometry:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-6 * max(1.0, abs(self.a * self.d)):
            raise ValueError(f"determinant {det!r} is not 1")
        a, b, c, d = _canonical(self.a, self.b, self.c, self.d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m, renormalize: bool = True) -> "Isometry":
        m = np.asarray(m, dtype=float)
        if renormalize:
            m = normalize_det(m)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __call__(self, p: HPoint) -> HPoint:
        return apply(self, p)

    def close_to(self, other: "Isometry", tol: float = 1e-8) -> bool:
        return matrices_close(self.matrix, other.matrix, tol)


@dataclass(frozen=True)
class UnitTangent:
    base: HPoint
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", self.angle % TWO_PI)

    def reversed(self) -> "UnitTangent":
        return UnitTangent(self.base, self.angle + math.pi)


@dataclass(frozen=True)
class GeodesicSegment:
    start: HPoint
    end: HPoint
    length: float

    @classmethod
    def between(cls, p: HPoint, q: HPoint) -> "GeodesicSegment":
        if p == q:
            raise ValueError("degenerate segment")
        return cls(p, q, hyp_dist(p, q))


# ---------------------------------------------------------------------------
# matrices

def normalize_det(m: np.ndarray) -> np.ndarray:
    ad, bc = m[0, 0] * m[1, 1], m[0, 1] * m[1, 0]
    det = ad - bc
    # for large entries det is mostly rounding noise; rescaling by it would
    # only inject that noise into the trace
    scale = abs(ad) + abs(bc)
    if scale > 1e6 and abs(det - 1.0) <= 64 * 2.2e-16 * scale:
        return m
    if det <= 0:
        raise ValueError("matrix is not orientation preserving")
    return m / math.sqrt(det)


def matrices_close(m1: np.ndarray, m2: np.ndarray, tol: float = 1e-8) -> bool:
    """Equality in PSL(2,R): compare up to an overall sign."""
    scale = max(1.0, float(np.abs(m1).max()))
    return bool(np.abs(m1 - m2).max() <= tol * scale or np.abs(m1 + m2).max() <= tol * scale)


def mobius(m, z: complex) -> complex:
    return (m[0][0] * z + m[0][1]) / (m[1][0] * z + m[1][1])


def inv(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def rotation_about_i(phi: float) -> np.ndarray:
    """Rotation fixing i that turns tangent vectors at i by ``phi``."""
    h = 0.5 * phi
    return np.array([[math.cos(h), math.sin(h)], [-math.sin(h), math.cos(h)]])


def translation_along_axis(t: float) -> np.ndarray:
    """z -> e^t z, moving i to e^t i."""
    return np.array([[math.exp(0.5 * t), 0.0], [0.0, math.exp(-0.5 * t)]])


def frame(v: UnitTangent) -> np.ndarray:
    """Isometry M with M(i e^t) the unit-speed geodesic leaving ``v``."""
    return frame_matrix(v.base.x, v.base.y, v.angle)


def frame_matrix(x: float, y: float, angle: float) -> np.ndarray:
    sy = math.sqrt(y)
    lift = np.array([[sy, x / sy], [0.0, 1.0 / sy]])
    return lift @ rotation_about_i(angle - 0.5 * math.pi)


def frame_base(m) -> complex:
    return mobius(m, 1j)


def frame_angle(m) -> float:
    """Direction of the tangent to t -> m(i e^t) at t = 0."""
    w = 1j / (m[1][0] * 1j + m[1][1]) ** 2
    return math.atan2(w.imag, w.real) % TWO_PI


def frame_tangent(m) -> UnitTangent:
    return UnitTangent(HPoint.from_complex(frame_base(m)), frame_angle(m))


def two_point_isometry(p1: complex, p2: complex, q1: complex, q2: complex) -> np.ndarray:
    """Orientation preserving isometry with p1 -> q1 and p2 -> q2.

    Requires d(p1, p2) == d(q1, q2); the match is checked by the caller.
    """
    return inv(_standard_frame(q1, q2)) @ _standard_frame(p1, p2)


def _standard_frame(p: complex, q: complex) -> np.ndarray:
    # isometry taking p to i and q onto the imaginary axis above i
    sy = math.sqrt(p.imag)
    down = np.array([[1.0 / sy, -p.real / sy], [0.0, sy]])
    w = mobius(down, q)
    # rotate about i so that w lands on the positive imaginary axis
    # direction of the geodesic from i to w, measured at i
    angle = _direction_at_i(w)
    return rotation_about_i(0.5 * math.pi - angle) @ down


def _direction_at_i(w: complex) -> float:
    # Cayley map to the disk sends i to 0 and geodesics through i to diameters
    u = (w - 1j) / (w + 1j)
    # disk direction arg(u) corresponds to half-plane direction arg(u) + pi/2
    # under the inverse Cayley map z = i(1+u)/(1-u), whose derivative at 0 is 2i
    return math.atan2(u.imag, u.real) + 0.5 * math.pi


# ---------------------------------------------------------------------------
# models

def to_disk(z: complex) -> complex:
    return (z - 1j) / (z + 1j)


def from_disk(w: complex) -> complex:
    return 1j * (1 + w) / (1 - w)


def disk_to_klein(w: complex) -> complex:
    return 2 * w / (1 + abs(w) ** 2)


def klein_to_disk(k: complex) -> complex:
    r2 = abs(k) ** 2
    return k / (1 + math.sqrt(max(0.0, 1 - r2)))


def to_klein(z: complex) -> complex:
    return disk_to_klein(to_disk(z))


def from_klein(k: complex) -> complex:
    return from_disk(klein_to_disk(k))


# ---------------------------------------------------------------------------
# operations

def hyp_dist(p: HPoint, q: HPoint) -> float:
    return dist_z(p.z, q.z)


def dist_z(p: complex, q: complex) -> float:
    num = (p.real - q.real) ** 2 + (p.imag - q.imag) ** 2
    # arccosh(1 + u) = 2 asinh(sqrt(u/2)) keeps precision for tiny u
    return 2.0 * math.asinh(math.sqrt(num / (4.0 * p.imag * q.imag)))


def apply(T: Isometry, p: HPoint) -> HPoint:
    return HPoint.from_complex(mobius(((T.a, T.b), (T.c, T.d)), p.z))


def translation_length(T) -> float:
    tr = abs(T.trace if isinstance(T, Isometry) else T[0][0] + T[1][1])
    if tr <= 2.0:
        raise NonHyperbolicError(f"|trace| = {tr} <= 2")
    return 2.0 * math.acosh(0.5 * tr)


def lambert_bound(l: float) -> float:
    """Distance from the midpoint of a length-``l`` arc to a geodesic that
    both endpoints are within distance one of."""
    if l <= 0:
        raise ValueError("arc length must be positive")
    return math.sinh(1.0) / math.cosh(0.5 * l)


def stated_lambert_majorant(l: float) -> float:
    """The coarser 2 e^{-l/2} majorant; not a valid upper bound for every l."""
    return 2.0 * math.exp(-0.5 * l)


def lambert_chain_report(ls) -> list[dict]:
    """Check, per length, which links of the majorization chain hold."""
    rows = []
    for l in ls:
        exact = lambert_bound(l)
        rows.append({
            "l": l,
            "exact": exact,
            "majorant": stated_lambert_majorant(l),
            "sinh1_lt_2": math.sinh(1.0) < 2.0,
            "cosh_gt_exp": math.cosh(0.5 * l) > math.exp(0.5 * l),
            # cosh(x) - e^x / 2 = e^{-x} / 2, evaluated without cancellation
            "cosh_gt_half_exp": 0.5 * math.exp(-0.5 * l) > 0.0,
            "exact_le_majorant": exact <= stated_lambert_majorant(l),
            "exact_le_4exp": exact <= 4.0 * math.exp(-0.5 * l),
        })
    return rows


def circle_curvature(phi: float) -> float:
    """Geodesic curvature of a Euclidean circle meeting the real axis at
    angle ``phi``."""
    if not 0.0 <= phi <= math.pi:
        raise ValueError("phi must lie in [0, pi]")
    return abs(math.cos(phi))


# ---------------------------------------------------------------------------
# geodesics as quadratic forms a|z|^2 + b x + c = 0

def geodesic_form(u1: tuple[float, float], u2: tuple[float, float]) -> tuple[float, float, float]:
    """Form of the geodesic between ideal points given homogeneously as
    (p, q) ~ p/q, with q == 0 meaning infinity."""
    p1, q1 = u1
    p2, q2 = u2
    return (q1 * q2, -(p1 * q2 + p2 * q1), p1 * p2)


def geodesic_through(p: complex, q: complex) -> tuple[tuple[float, float], tuple[float, float]]:
    """Ideal endpoints (homogeneous) of the geodesic through p and q,
    ordered so the geodesic runs from the first to the second through p then q."""
    m = _standard_frame(p, q)
    mi = inv(m)
    # the imaginary axis runs from 0 to infinity; map 0 and infinity back
    start = (mi[0, 1], mi[1, 1])
    end = (mi[0, 0], mi[1, 0])
    return start, end


def form_value(form, z: complex) -> float:
    a, b, c = form
    return a * (z.real ** 2 + z.imag ** 2) + b * z.real + c


def map_ideal(m, u: tuple[float, float]) -> tuple[float, float]:
    p, q = u
    return (m[0][0] * p + m[0][1] * q, m[1][0] * p + m[1][1] * q)


def axis_endpoints(m) -> tuple[tuple[float, float], tuple[float, float]]:
    """Repelling and attracting fixed points of a hyperbolic matrix,
    homogeneous coordinates."""
    a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
    tr = a + d
    if abs(tr) <= 2.0:
        raise NonHyperbolicError(f"|trace| = {abs(tr)} <= 2")
    if tr < 0:
        a, b, c, d = -a, -b, -c, -d
        tr = -tr
    disc = math.sqrt(tr * tr - 4.0)
    # fixed points solve c z^2 + (d - a) z - b = 0, written homogeneously
    # eigenvectors (z, 1) of [[a, b], [c, d]] with eigenvalues (tr +- disc)/2
    lam_big = 0.5 * (tr + disc)
    lam_small = 0.5 * (tr - disc)
    attract = _eigvec(a, b, c, d, lam_big)
    repel = _eigvec(a, b, c, d, lam_small)
    return repel, attract


def _eigvec(a, b, c, d, lam):
    v1 = (b, lam - a)
    v2 = (lam - d, c)
    n1 = abs(v1[0]) + abs(v1[1])
    n2 = abs(v2[0]) + abs(v2[1])
    v = v1 if n1 >= n2 else v2
    s = math.hypot(*v)
    return (v[0] / s, v[1] / s)


def axis_frame(m) -> np.ndarray:
    """Frame N with N(i e^t) tracing the axis of ``m`` in its translation
    direction; N(i) is the foot of the perpendicular from i."""
    repel, attract = axis_endpoints(m)
    # send 0 -> repel, infinity -> attract
    n = np.array([[attract[0], repel[0]], [attract[1], repel[1]]], dtype=float)
    det = n[0, 0] * n[1, 1] - n[0, 1] * n[1, 0]
    if det < 0:
        n[:, 1] = -n[:, 1]
        det = -det
    n = n / math.sqrt(det)
    # slide so that the base point is the projection of i onto the axis
    w = mobius(inv(n), 1j)
    t = math.log(abs(w))
    return n @ translation_along_axis(t)


def distance_to_axis(m, z: complex) -> float:
    n = axis_frame(m)
    w = mobius(inv(n), z)
    return math.asinh(abs(w.real) / w.imag)


def tangent_angle_between(a1: float, a2: float) -> float:
    """Unsigned angle in [0, pi] between two directions."""
    d = (a2 - a1) % TWO_PI
    return min(d, TWO_PI - d)


def half_to_klein_array(z) -> np.ndarray:
    """Vectorised half-plane to Klein map (complex in, complex out)."""
    z = np.asarray(z, dtype=complex)
    w = (z - 1j) / (z + 1j)
    return 2 * w / (1 + np.abs(w) ** 2)


def klein_to_half_array(k) -> np.ndarray:
    k = np.asarray(k, dtype=complex)
    w = k / (1 + np.sqrt(np.maximum(0.0, 1 - np.abs(k) ** 2)))
    return 1j * (1 + w) / (1 - w)


def dist_array(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    num = np.abs(p - q) ** 2
    return 2.0 * np.arcsinh(np.sqrt(num / (4.0 * p.imag * q.imag)))


def mobius_array(m, z) -> np.ndarray:
    """Apply one matrix, or a stack of matrices matched to ``z``, to points."""
    m = np.asarray(m, dtype=float)
    z = np.asarray(z, dtype=complex)
    return (m[..., 0, 0] * z + m[..., 0, 1]) / (m[..., 1, 0] * z + m[..., 1, 1])
