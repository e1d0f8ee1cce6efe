"""Census of closed geodesics of bounded length on the genus-2 surface.

Every closed geodesic of length ``l`` has a lift whose axis meets the
octagon ``P``; the corresponding group element ``g`` moves the centre ``i``
by at most ``r(l)`` with ``cosh r = cosh^2(R) cosh(l) - sinh^2(R)`` (``R`` the
circumradius of ``P``). Since ``P`` is the Dirichlet domain of ``i``, the
breadth-first enumeration of the ball of radius ``r(L)`` in the group is
complete, so the census of lengths ``<= L`` is complete as well.

Classes are identified through their chords: the segments in which the
lifts of a closed geodesic cross ``P``. An unoriented closed geodesic of a
given length is determined by any one of its chords.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import A_X_FLOOR, MU_FACTOR, GrowthBound, mu
from .intersections import ClosedChords, closed_chords, closed_intersection
from .surface import (
    FORMAT_VERSION,
    GroupBall,
    SurfaceGroup,
    canonical_cyclic_word,
    shortlex_key,
)

MAX_CENSUS_LENGTH = 14.0
LENGTH_TOL = 1e-9


@dataclass(frozen=True)
class ClosedGeodesicRecord:
    word: str
    trace_abs: float
    length: float
    self_intersections: int
    primitive: bool

    def row(self) -> str:
        return (f"{self.word},{self.trace_abs:.17g},{self.length:.17g},"
                f"{self.self_intersections},{int(self.primitive)}")

    @classmethod
    def from_row(cls, line: str) -> "ClosedGeodesicRecord":
        w, tr, ln, si, pr = line.strip().split(",")
        return cls(w, float(tr), float(ln), int(si), bool(int(pr)))


@dataclass
class CensusSlice:
    L: float
    K: float
    records: list[ClosedGeodesicRecord]
    complete: bool
    surface_hash: str = ""
    # diagnostics about the word-length cutoff; see ``word_length_certificate``
    info: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def restrict(self, L: float | None = None, K: float | None = None) -> "CensusSlice":
        L = self.L if L is None else L
        K = self.K if K is None else K
        if L > self.L + LENGTH_TOL or K > self.K:
            raise ValueError("cannot widen a census slice")
        recs = [r for r in self.records if r.length <= L + LENGTH_TOL and r.self_intersections <= K]
        return CensusSlice(L, K, recs, self.complete, self.surface_hash, dict(self.info))

    def count(self, L: float, K: float) -> int:
        return sum(1 for r in self.records if r.length <= L + LENGTH_TOL and r.self_intersections <= K)


# ---------------------------------------------------------------------------
# certificate

def certificate_radius(S: SurfaceGroup, L: float) -> float:
    """Ball radius that contains a lift of every closed geodesic of length <= L."""
    R = S.circumradius
    return math.acosh(max(1.0, math.cosh(R) ** 2 * math.cosh(L) - math.sinh(R) ** 2))


def validate_certificate(S: SurfaceGroup, sl: CensusSlice) -> dict:
    """Re-derive the ball bound on every lift crossing the octagon.

    For each record the lifts meeting the octagon (one per chord) must lie
    within ``R`` of ``i`` and move ``i`` by at most ``certificate_radius``
    of the record's length; the slice is complete only if the same bound
    at ``L`` covers all of them.
    """
    from .hyperbolic import distance_to_axis

    R = S.circumradius
    worst_axis = 0.0
    worst_ratio = 0.0
    n_lifts = 0
    for rec in sl.records:
        ch = closed_chords(S, S.word_matrix(rec.word))
        bound = certificate_radius(S, rec.length)
        for g in ch.rotations:
            n_lifts += 1
            worst_axis = max(worst_axis, distance_to_axis(g, 1j) / R)
            disp = math.acosh(max(1.0, 0.5 * float(np.sum(g * g))))
            worst_ratio = max(worst_ratio, disp / bound)
    r_L = certificate_radius(S, sl.L)
    ok = worst_axis <= 1 + 1e-9 and worst_ratio <= 1 + 1e-9
    return {"ok": bool(ok and sl.complete), "lifts": n_lifts, "max_axis_distance_over_R": worst_axis,
            "max_displacement_over_bound": worst_ratio, "ball_radius_needed": r_L}


def ell_min(S: SurfaceGroup) -> float:
    """Smallest distance between non-adjacent sides of the octagon."""
    # by symmetry every side is like side 0; sides 2..6 are non-adjacent
    best = math.inf
    v = S.vertex_z
    for j in (2, 3, 4, 5, 6):
        best = min(best, _segment_distance(v[0], v[1], v[j], v[(j + 1) % 8]))
    return best


def _segment_distance(p0, p1, q0, q1) -> float:
    # coarse grid scan, then Nelder-Mead refinement
    from scipy.optimize import minimize

    from .hyperbolic import _standard_frame, dist_z, inv, mobius

    fp = inv(_standard_frame(p0, p1))
    fq = inv(_standard_frame(q0, q1))
    lp = dist_z(p0, p1)
    lq = dist_z(q0, q1)

    def d(x):
        s = min(max(x[0], 0.0), lp)
        t = min(max(x[1], 0.0), lq)
        return dist_z(mobius(fp, 1j * math.exp(s)), mobius(fq, 1j * math.exp(t)))

    grid = np.linspace(0, 1, 21)
    start = min(((a * lp, b * lq) for a in grid for b in grid), key=d)
    res = minimize(d, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    return float(min(res.fun, d(start)))


def word_length_certificate(S: SurfaceGroup, records, L: float) -> dict:
    """Compare the word-length cutoff ceil(L / ell_min) with the census.

    Reports the cutoff, the longest canonical word met and whether every
    class has a representative no longer than the cutoff.
    """
    lm = ell_min(S)
    cutoff = math.ceil(L / lm)
    longest = max((len(r.word) for r in records), default=0)
    per_letter = min((r.length / len(r.word) for r in records), default=math.inf)
    return {
        "ell_min": lm,
        "word_length_cutoff": cutoff,
        "longest_word": longest,
        "min_length_per_letter": per_letter,
        "cutoff_holds": longest <= cutoff,
    }


# ---------------------------------------------------------------------------
# chords

def _fixed_points(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Repelling and attracting fixed points as disk-boundary complex numbers."""
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    sgn = np.where(a + d < 0, -1.0, 1.0)
    a, b, c, d = a * sgn, b * sgn, c * sgn, d * sgn
    tr = a + d
    disc = np.sqrt(np.maximum(tr * tr - 4.0, 0.0))
    out = []
    for lam in (0.5 * (tr - disc), 0.5 * (tr + disc)):
        v1p, v1q = b, lam - a
        v2p, v2q = lam - d, c
        use1 = (np.abs(v1p) + np.abs(v1q)) >= (np.abs(v2p) + np.abs(v2q))
        p = np.where(use1, v1p, v2p)
        q = np.where(use1, v1q, v2q)
        # homogeneous (p, q) -> disk: (p - i q) / (p + i q)
        out.append((p - 1j * q) / (p + 1j * q))
    return out[0], out[1]


def axis_meets_octagon(S: SurfaceGroup, m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Whether the axis of each matrix meets the closed octagon."""
    e1, e2 = _fixed_points(m)
    from .hyperbolic import half_to_klein_array

    V = half_to_klein_array(S.vertex_z)
    dx, dy = (e2 - e1).real, (e2 - e1).imag
    cross = dx[:, None] * (V.imag[None] - e1.imag[:, None]) - dy[:, None] * (V.real[None] - e1.real[:, None])
    return (cross.min(axis=1) <= tol) & (cross.max(axis=1) >= -tol)


def chord_descriptor(m: np.ndarray) -> np.ndarray:
    """(angle_lo, angle_hi) of the axis endpoints on the disk boundary."""
    e1, e2 = _fixed_points(m)
    a1 = np.mod(np.angle(e1), 2 * math.pi)
    a2 = np.mod(np.angle(e2), 2 * math.pi)
    return np.stack([np.minimum(a1, a2), np.maximum(a1, a2)], axis=-1)


class ChordIndex:
    """Tolerant lookup of (angle_lo, angle_hi, length) triples."""

    def __init__(self, tol: float = 1e-7, cell: float = 1e-4):
        self.tol = tol
        self.cell = cell
        self.grid: dict[tuple[int, int, int], list[tuple[np.ndarray, int]]] = {}

    def _cell(self, x):
        return tuple(int(math.floor(v / self.cell)) for v in x)

    def add(self, x: np.ndarray, value: int) -> None:
        self.grid.setdefault(self._cell(x), []).append((np.asarray(x, dtype=float), value))

    def find(self, x: np.ndarray) -> int | None:
        c = self._cell(x)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for dk in (-1, 0, 1):
                    for y, v in self.grid.get((c[0] + di, c[1] + dj, c[2] + dk), ()):
                        if np.abs(y - x).max() < self.tol:
                            return v
        return None


# ---------------------------------------------------------------------------
# enumeration

def enumerate_census(S: SurfaceGroup, L: float, K: float = math.inf, *,
                     max_length: float = MAX_CENSUS_LENGTH, ball: GroupBall | None = None,
                     max_elements: int = 20_000_000) -> CensusSlice:
    """All closed geodesics of length <= L with at most K self-intersections.

    Beyond ``max_length`` (or when the group ball would exceed
    ``max_elements``) a partial slice flagged incomplete is returned.
    """
    complete = L <= max_length
    r = certificate_radius(S, min(L, max_length)) + 1e-6
    if ball is None or ball.radius < r:
        while True:
            try:
                ball = GroupBall(S, r, max_elements=max_elements)
                break
            except MemoryError:
                complete = False
                r -= 0.5
    mats = ball.matrices
    tr = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
    cand = np.nonzero(tr > 2.0 + 1e-12)[0]
    cosh_half = np.cosh(0.5 * (L + LENGTH_TOL))
    cand = cand[tr[cand] <= 2.0 * cosh_half]
    cand = cand[axis_meets_octagon(S, mats[cand])]
    lengths = 2.0 * np.arccosh(tr[cand] / 2.0)
    desc = chord_descriptor(mats[cand])
    index = ChordIndex()
    class_of = np.full(len(cand), -1, dtype=np.int64)
    chords: list[ClosedChords] = []
    for n, idx in enumerate(cand):
        key = np.array([desc[n, 0], desc[n, 1], lengths[n]])
        hit = index.find(key)
        if hit is not None:
            class_of[n] = hit
            continue
        ch = closed_chords(S, mats[idx])
        rot_desc = chord_descriptor(ch.rotations)
        rot_keys = [np.array([d[0], d[1], lengths[n]]) for d in rot_desc]
        existing = next((v for v in (index.find(k) for k in rot_keys) if v is not None), None)
        cid = existing if existing is not None else len(chords)
        if existing is None:
            chords.append(ch)
        for k in rot_keys + [key]:
            if index.find(k) is None:
                index.add(k, cid)
        class_of[n] = cid
    # canonical words from the ShortLex-least breadth-first words of each class
    best: dict[int, str] = {}
    for n, idx in enumerate(cand):
        w = canonical_cyclic_word(ball.word(int(idx)))
        cid = int(class_of[n])
        if cid not in best or shortlex_key(w) < shortlex_key(best[cid]):
            best[cid] = w
    records = []
    for cid in range(len(chords)):
        w = best[cid]
        m = S.word_matrix(w)
        t = abs(float(np.trace(m)))
        ci = closed_intersection(S, w)
        records.append(ClosedGeodesicRecord(w, t, 2.0 * math.acosh(t / 2.0), ci.count, ci.power == 1))
    records.sort(key=lambda rec: (rec.length, shortlex_key(rec.word)))
    all_records = [rec for rec in records if rec.length <= L + LENGTH_TOL]
    info = word_length_certificate(S, all_records, L)
    info["ball_radius"] = ball.radius
    info["ball_size"] = len(ball)
    kept = [rec for rec in all_records if rec.self_intersections <= K]
    return CensusSlice(L, K, kept, complete, S.hash, info)


# ---------------------------------------------------------------------------
# persistence

def save_census(sl: CensusSlice, path) -> None:
    header = [
        f"#format_version={FORMAT_VERSION}",
        f"#surface_hash={sl.surface_hash}",
        f"#L={sl.L!r}",
        f"#K={sl.K!r}",
        f"#complete={int(sl.complete)}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(header + [r.row() for r in sl.records]) + "\n")


def load_census(path, S: SurfaceGroup | None = None) -> CensusSlice:
    meta: dict[str, str] = {}
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                meta[k] = v
            else:
                records.append(ClosedGeodesicRecord.from_row(line))
    if int(meta.get("format_version", -1)) != FORMAT_VERSION:
        raise ValueError(f"unsupported census format {meta.get('format_version')}")
    if S is not None and meta.get("surface_hash") != S.hash:
        raise ValueError(f"census surface hash {meta.get('surface_hash')} does not match {S.hash}")
    return CensusSlice(float(meta["L"]), float(meta["K"]), records, bool(int(meta["complete"])),
                       meta.get("surface_hash", ""))


# ---------------------------------------------------------------------------
# growth bound

def no_polynomial(n: float) -> float:
    return 1.0


@dataclass
class GrowthReport:
    k: float
    a_X: float
    mu: float
    factor: float
    c_X: float
    rows: list[dict]

    @property
    def min_slack(self) -> float:
        return min(r["slack"] for r in self.rows)

    def to_dict(self) -> dict:
        return {"k": self.k, "a_X": self.a_X, "mu": self.mu, "factor": self.factor,
                "c_X": self.c_X, "min_slack": self.min_slack, "rows": self.rows}


def _check_census(census: CensusSlice, ns, ks, c_X: float) -> None:
    if not census.complete:
        raise ValueError("refusing to use an incomplete census")
    if max(ns) > census.L + LENGTH_TOL:
        raise ValueError(f"census reaches L = {census.L}, need {max(ns)}")
    need_K = c_X * (max(ks) * max(ns)) ** 2
    if census.K < need_K:
        raise ValueError(f"census has K = {census.K}, need {need_K}")


def fit_a_X(census: CensusSlice, ns, ks, c_X: float, p=no_polynomial,
            factor: float = MU_FACTOR, a_min: float = A_X_FLOOR) -> float:
    """Smallest a_X >= a_min with log #G^c_n(c_X (kn)^2) <= mu(k) n + log p(n)
    for every n in ``ns`` and k in ``ks``."""
    _check_census(census, ns, ks, c_X)
    need = []
    for k in ks:
        for n in ns:
            cnt = census.count(n, c_X * (k * n) ** 2)
            if cnt > 0:
                need.append((k, n, math.log(cnt) - math.log(p(n))))

    def ok(a):
        return all(mu(k, a, factor) * n >= lhs for k, n, lhs in need)

    lo = hi = a_min
    if ok(lo):
        return lo
    while not ok(hi):
        hi *= 2.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def growth_check(census: CensusSlice, ns, k: float, gb: GrowthBound, p=no_polynomial,
                 factor: float | None = None, refit: bool = False) -> GrowthReport:
    """Per-n slack of log #G^c_n(c_X (kn)^2) <= mu(k) n + log p(n).

    With ``refit`` the constant a_X is fitted for this k alone, otherwise the
    one stored in ``gb`` is used."""
    factor = gb.mu_factor if factor is None else factor
    _check_census(census, ns, [k], gb.c_X)
    a_X = fit_a_X(census, ns, [k], gb.c_X, p, factor) if refit else gb.a_X
    m = mu(k, a_X, factor)
    rows = []
    for n in ns:
        K = gb.c_X * (k * n) ** 2
        cnt = census.count(n, K)
        lhs = math.log(cnt) if cnt else -math.inf
        rhs = m * n + math.log(p(n))
        rows.append({"n": n, "K": K, "count": cnt, "log_count": lhs, "bound": rhs, "slack": rhs - lhs})
    return GrowthReport(k, a_X, m, factor, gb.c_X, rows)
