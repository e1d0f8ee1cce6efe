"""Covers of low-intersection geodesics by neighbourhoods of closed geodesics,
their measures, covering checks and box-counting dimension."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from . import _core
from .bounds import GrowthBound, dim_bound_and_k0  # noqa: F401  (re-exported)
from .census import CensusSlice
from .closer import DEFAULT_RADIUS, close_arc, crossing_matrix
from .hyperbolic import axis_frame, dist_array, frame, inv, lambert_bound, mobius, normalize_det
from .intersections import closed_chords, count_self
from .surface import GroupBall, SurfaceGroup, sample_points
from .tracer import GeodesicSpec, TracedArc, centered_subarc

COVER_KINDS = ("neighborhood", "ball")
SURFACE_AREA = 4.0 * math.pi  # genus 2
MIN_MC_SAMPLES = 10_000
NET_SPACING = 0.05
WITNESS_EPS = 0.3

Budget = Callable[[float], float]


class InsufficientCensusError(ValueError):
    pass


def epsilon(n: float) -> float:
    return 2.0 * math.exp(-n / 4.0)


def intersection_budget(f: Budget, n: float, gb: GrowthBound) -> int:
    """floor(c_X f(n)), the self-intersection cap of the members of C_n."""
    return math.floor(gb.c_X * f(n))


@dataclass
class CoverSpec:
    n: int
    epsilon: float
    members: CensusSlice
    kind: str = "neighborhood"

    def __post_init__(self):
        if self.kind not in COVER_KINDS:
            raise ValueError(f"kind must be one of {COVER_KINDS}")
        if self.epsilon != epsilon(self.n):
            raise ValueError("epsilon must equal 2 exp(-n/4)")
        if not self.members.complete:
            raise InsufficientCensusError("cover members must come from a complete census")

    @property
    def words(self) -> list[str]:
        return [r.word for r in self.members.records]

    @property
    def ball_count(self) -> int:
        return len(self.members) * math.ceil(2.0 * self.n / self.epsilon)


def build_cover(census: CensusSlice, n: int, f: Budget, gb: GrowthBound,
                kind: str = "neighborhood") -> CoverSpec:
    K = intersection_budget(f, n, gb)
    if not census.complete or census.L + 1e-9 < n or census.K < K:
        raise InsufficientCensusError(
            f"cover C_{n} needs a complete census with L >= {n} and K >= {K} "
            f"(have L = {census.L}, K = {census.K}, complete = {census.complete})")
    return CoverSpec(n, epsilon(n), census.restrict(n, K), kind)


# ---------------------------------------------------------------------------
# distance to a finite union of closed geodesics

class GeodesicNet:
    """Closed geodesics cut into chords of the octagon, with a k-d tree of
    sample points (disk coordinates) for candidate lookup."""

    def __init__(self, S: SurfaceGroup, words: list[str], spacing: float = NET_SPACING):
        self.S = S
        self.words = list(words)
        self.spacing = spacing
        frames, lengths, owner = [], [], []
        for k, w in enumerate(self.words):
            ch = closed_chords(S, S.word_matrix(w), w)
            frames.append(ch.frames)
            lengths.append(ch.lengths)
            owner.append(np.full(len(ch.lengths), k))
        if frames:
            F = np.concatenate(frames)
            self.seg_len = np.concatenate(lengths)
            self.seg_owner = np.concatenate(owner)
        else:
            F = np.zeros((0, 2, 2))
            self.seg_len = np.zeros(0)
            self.seg_owner = np.zeros(0, dtype=np.int64)
        self.seg_inv = np.stack([F[:, 1, 1], -F[:, 0, 1], -F[:, 1, 0], F[:, 0, 0]],
                                axis=-1).reshape(-1, 2, 2)
        per = np.ceil(self.seg_len / spacing).astype(np.int64) + 1
        self.sample_seg = np.repeat(np.arange(len(per)), per)
        start = np.concatenate([[0], np.cumsum(per)[:-1]]).astype(np.int64)
        frac = (np.arange(per.sum()) - np.repeat(start, per)) / np.maximum(np.repeat(per, per) - 1, 1)
        t = frac * self.seg_len[self.sample_seg]
        self.samples = _core.frames_to_points(F[self.sample_seg], t)
        w = (self.samples - 1j) / (self.samples + 1j)
        self.tree = cKDTree(np.column_stack([w.real, w.imag])) if len(w) else None
        self._balls: dict[float, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.words)

    def _images(self, points: np.ndarray, cutoff: float):
        """Translates ``h x`` within ``R + cutoff`` of i, with the index of ``x``."""
        R = self.S.circumradius
        key = round(cutoff, 6)
        if key not in self._balls:
            self._balls[key] = GroupBall(self.S, 2.0 * R + cutoff + 1e-6).matrices
        H = self._balls[key]
        pts = np.asarray(points, dtype=complex)
        num = H[:, 0, 0][:, None] * pts[None] + H[:, 0, 1][:, None]
        den = H[:, 1, 0][:, None] * pts[None] + H[:, 1, 1][:, None]
        Y = num / den
        keep = dist_array(np.full(Y.shape, 1j), Y) <= R + cutoff + 1e-9
        owner = np.broadcast_to(np.arange(len(pts))[None], Y.shape)[keep]
        return Y[keep], owner

    def distances(self, points, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
        """Distance from each point to the union, and the nearest member.

        Exact whenever the distance is at most ``cutoff``; otherwise ``inf``
        and member ``-1``.
        """
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        dist = np.full(len(pts), np.inf)
        member = np.full(len(pts), -1, dtype=np.int64)
        if self.tree is None or not len(pts):
            return dist, member
        Y, owner = self._images(pts, cutoff)
        # hyperbolic distance in the disk is at least twice the Euclidean one
        r_e = 0.5 * (cutoff + 0.5 * self.spacing) + 1e-12
        wy = (Y - 1j) / (Y + 1j)
        lists = self.tree.query_ball_point(np.column_stack([wy.real, wy.imag]), r_e,
                                           return_sorted=False)
        counts = np.fromiter((len(l) for l in lists), dtype=np.int64, count=len(lists))
        if not counts.sum():
            return dist, member
        flat = np.concatenate([np.asarray(l, dtype=np.int64) for l in lists if len(l)])
        img = np.repeat(np.arange(len(Y)), counts)
        pairs = np.unique(img * len(self.seg_len) + self.sample_seg[flat])
        img, seg = pairs // len(self.seg_len), pairs % len(self.seg_len)
        ptr = np.arange(len(seg) + 1, dtype=np.int64)
        d = _core.min_dist_to_segments(Y[img], self.seg_inv, self.seg_len, ptr, seg)
        d = np.where(d <= cutoff, d, np.inf)
        o = owner[img]
        order = np.lexsort((d, o))
        o, d, seg = o[order], d[order], seg[order]
        first = np.concatenate([[True], o[1:] != o[:-1]])
        dist[o[first]] = d[first]
        hit = np.isfinite(d[first])
        member[o[first][hit]] = self.seg_owner[seg[first][hit]]
        return dist, member

    def covered(self, points, radius: float, batch: int = 4096) -> np.ndarray:
        """Whether each point lies within ``radius`` of the union."""
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.zeros(len(pts), dtype=bool)
        if self.tree is None:
            return out
        for s in range(0, len(pts), batch):
            chunk = pts[s:s + batch]
            Y, owner = self._images(chunk, radius)
            # cheap pass: nearest sample point already close enough
            wy = (Y - 1j) / (Y + 1j)
            _, j = self.tree.query(np.column_stack([wy.real, wy.imag]))
            near = dist_array(Y, self.samples[j]) <= radius
            hit = np.zeros(len(chunk), dtype=bool)
            hit[owner[near]] = True
            rest = np.nonzero(~hit)[0]
            if len(rest):
                d, _ = self.distances(chunk[rest], radius)
                hit[rest[d <= radius]] = True
            out[s:s + batch] = hit
        return out


# ---------------------------------------------------------------------------
# measures

@dataclass
class MeasureReport:
    n: int
    kind: str
    members: int
    lebesgue_bound: float = math.nan
    lebesgue_mc: float = math.nan
    lebesgue_stderr: float = math.nan
    mc_samples: int = 0
    h: float = math.nan
    hausdorff_h: float = math.nan
    hausdorff_closed_form: float = math.nan
    ball_count: int = 0

    def mc_within_bound(self, sigmas: float = 3.0) -> bool:
        return self.lebesgue_mc <= self.lebesgue_bound + sigmas * self.lebesgue_stderr

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in asdict(self).items()}


def lebesgue_bound(c: CoverSpec) -> float:
    return math.fsum(5.0 * c.n * math.exp(-c.n / 4.0) for _ in c.members.records)


def lebesgue_measure(S: SurfaceGroup, c: CoverSpec, mc_samples: int = MIN_MC_SAMPLES, *,
                     seed: int = 0, net: GeodesicNet | None = None) -> MeasureReport:
    """Bound and Monte Carlo estimate of the area of the cover."""
    if mc_samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} Monte Carlo samples")
    rep = MeasureReport(c.n, c.kind, len(c.members), ball_count=c.ball_count)
    rep.lebesgue_bound = lebesgue_bound(c)
    rep.mc_samples = mc_samples
    if not len(c.members):
        rep.lebesgue_mc = rep.lebesgue_stderr = 0.0
        return rep
    net = net or GeodesicNet(S, c.words)
    pts = sample_points(S, np.random.default_rng(seed), mc_samples)
    p = float(net.covered(pts, c.epsilon).mean())
    rep.lebesgue_mc = SURFACE_AREA * p
    rep.lebesgue_stderr = SURFACE_AREA * math.sqrt(p * (1.0 - p) / mc_samples)
    return rep


def hausdorff_closed_form(count: int, n: float, h: float) -> float:
    """count * 4^h * n * e^{-(n/4)(h-1)}: the sum below with eps = 2 e^{-n/4} substituted."""
    return count * 4.0 ** h * n * math.exp(-0.25 * n * (h - 1.0))


def hausdorff_measure(c: CoverSpec, h: float) -> MeasureReport:
    """nu_h of the ball cover: each member contributes 2n/eps balls of radius 2 eps."""
    if c.kind != "ball":
        raise ValueError("the Hausdorff sum is defined for ball covers")
    if not 0.0 < h <= 2.0:
        raise ValueError("h must lie in (0, 2]")
    eps = c.epsilon
    per = (2.0 * c.n / eps) * (2.0 * eps) ** h
    rep = MeasureReport(c.n, c.kind, len(c.members), ball_count=c.ball_count, h=h)
    rep.hausdorff_h = math.fsum(per for _ in c.members.records)
    rep.hausdorff_closed_form = hausdorff_closed_form(len(c.members), c.n, h)
    return rep


# ---------------------------------------------------------------------------
# covering of G(f, L) proxies

def subarc_intersection_profile(a: TracedArc, L: float, n: float) -> list[tuple[float, int]]:
    """(l, max self-crossings of a length-l subarc) at every l in [L, n] where
    the maximum can change."""
    rep = count_self(a)
    if not rep.count:
        return [(L, 0)]
    t = np.array(rep.times)
    lo, hi = t.min(axis=1), t.max(axis=1)
    gaps = hi - lo
    ls = np.unique(np.concatenate([[L], gaps[(gaps >= L) & (gaps <= n)]]))
    out = []
    for l in ls:
        # a window [s, s + l] achieving the max can start at some hi_k - l
        starts = np.clip(hi - l, 0.0, max(a.length - l, 0.0))
        inside = (lo[None] >= starts[:, None] - 1e-12) & (hi[None] <= starts[:, None] + l + 1e-12)
        out.append((float(l), int(inside.sum(axis=1).max())))
    return out


def satisfies_budget(a: TracedArc, f: Budget, L: float, n: float) -> bool:
    return all(c <= f(l) for l, c in subarc_intersection_profile(a, L, n))


@dataclass
class CoveringResult:
    n: int
    covered: bool | None
    distance: float
    epsilon: float
    member: str
    witness_word: str
    witness_distance: float
    witness_bound: float
    witness_ok: bool
    witness_length: float
    proxy_length: float
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.covered is True

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        return d


_NETS: dict[tuple, GeodesicNet] = {}


def cover_net(S: SurfaceGroup, c: CoverSpec) -> GeodesicNet:
    key = (id(S), tuple(c.words))
    if key not in _NETS:
        if len(_NETS) > 16:
            _NETS.clear()
        _NETS[key] = GeodesicNet(S, c.words)
    return _NETS[key]


def covering_check(S: SurfaceGroup, census: CensusSlice, g: GeodesicSpec, f: Budget, L: float,
                   n: int, gb: GrowthBound, *, witness_eps: float = WITNESS_EPS,
                   radius: int = DEFAULT_RADIUS) -> CoveringResult:
    """Is the midpoint of the proxy arc of ``g`` inside the cover C_n?

    The proxy is the length-4n arc of ``g`` centred at its base point; its
    subarc budgets must hold on [L, n]. Membership is decided by the distance
    to the members of C_n. Independently, the length-n subarc centred at the
    midpoint is closed with the arc closer, and the distance from the midpoint
    to the closed geodesic is compared with ``lambert_bound(n)``. A failed
    closing makes the outcome inconclusive (``covered is None``).
    """
    proxy = centered_subarc(S, g, 0.0, 4.0 * n)
    if not satisfies_budget(proxy, f, L, n):
        raise ValueError("proxy arc violates the subarc intersection budget")
    c = build_cover(census, n, f, gb)
    x = proxy.point_at(2.0 * n)
    d, m = cover_net(S, c).distances([x], c.epsilon)
    dist, member = float(d[0]), (c.words[int(m[0])] if m[0] >= 0 else "")
    alpha = centered_subarc(S, g, 0.0, float(n))
    cert = close_arc(S, alpha, witness_eps, radius=radius, count_intersections=False)
    G = normalize_det(crossing_matrix(S, alpha) @ S.word_matrix(cert.suffix))
    w = mobius(inv(axis_frame(G)), mobius(alpha.frames[0], 1j * math.exp(0.5 * n)))
    wdist = float(math.asinh(abs(w.real) / w.imag))
    bound = lambert_bound(n)
    notes = []
    if cert.fellow_travel_distance > 1.0:
        notes.append("closed geodesic leaves the unit neighbourhood of the arc")
    covered: bool | None = dist <= c.epsilon
    if not cert.success:
        covered = None
        notes.append("arc closer failed")
    return CoveringResult(
        n=n, covered=covered, distance=dist, epsilon=c.epsilon, member=member,
        witness_word=cert.word, witness_distance=wdist, witness_bound=bound,
        witness_ok=cert.success and cert.fellow_travel_distance <= 1.0 and wdist <= bound,
        witness_length=cert.closed_length, proxy_length=proxy.length, notes=notes)


def random_budget_proxies(S: SurfaceGroup, count: int, f: Budget, L: float, n_max: int,
                          seed: int = 0, max_tries: int = 1000) -> list[GeodesicSpec]:
    """Random geodesics whose length-4n proxies satisfy the budget for every n <= n_max."""
    from .surface import sample_tangents

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        g = GeodesicSpec(sample_tangents(S, rng, 1)[0])
        proxy = centered_subarc(S, g, 0.0, 4.0 * n_max)
        # a longer proxy contains every shorter one centred at the same point
        if satisfies_budget(proxy, f, L, n_max):
            out.append(g)
    if len(out) < count:
        raise RuntimeError(f"found only {len(out)} proxies in {max_tries} tries")
    return out


# ---------------------------------------------------------------------------
# box counting

@dataclass
class BoxDimension:
    dimension: float
    scales: list[float]
    counts: list[int]
    fitted: list[float]
    points: int

    def rows(self) -> list[tuple[float, int]]:
        return list(zip(self.scales, self.counts))

    def to_dict(self) -> dict:
        return asdict(self)


def box_counts(points, scales) -> np.ndarray:
    """Occupied boxes of a square grid in disk coordinates, per box size."""
    z = np.asarray(points, dtype=complex)
    w = (z - 1j) / (z + 1j)
    out = []
    for s in scales:
        ix = np.floor(w.real / s).astype(np.int64)
        iy = np.floor(w.imag / s).astype(np.int64)
        out.append(len(np.unique(ix * 4_000_003 + iy)))
    return np.array(out)


def default_scales(points, n_scales: int = 5, min_occupancy: float = 4.0,
                   coarsest: float = 0.2) -> list[float]:
    """Dyadic box sizes whose finest member still holds ``min_occupancy``
    points per occupied box on average."""
    N = len(points)
    s = coarsest
    while True:
        nxt = 0.5 * s
        if N / box_counts(points, [nxt])[0] < min_occupancy or nxt < 1e-7:
            break
        s = nxt
    return [s * 2 ** k for k in range(n_scales)][::-1]


def box_dimension(points, scales=None, *, fit: int = 3, min_occupancy: float = 4.0) -> BoxDimension:
    """Box-counting dimension of a point set in the octagon.

    The slope of log(count) against log(1/size) is fitted on the ``fit``
    finest scales among those whose boxes hold at least ``min_occupancy``
    points on average; finer scales are starved of samples.
    """
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 10_000:
        raise ValueError("box counting needs at least 10^4 points")
    scales = default_scales(pts, min_occupancy=min_occupancy) if scales is None else list(scales)
    scales = sorted((float(s) for s in scales), reverse=True)
    if len(scales) < 4 or scales[0] / scales[-1] < 10.0 - 1e-9:
        raise ValueError("need at least 4 box sizes spanning a decade")
    counts = box_counts(pts, scales)
    ok = [i for i, c in enumerate(counts) if c > 0 and len(pts) / c >= min_occupancy]
    use = ok[-fit:]
    if len(use) < 2 or len(set(counts[use])) < 2:
        raise ValueError("degenerate box-counting fit")
    x = np.log(1.0 / np.array(scales)[use])
    y = np.log(counts[use].astype(float))
    slope = float(np.polyfit(x, y, 1)[0])
    return BoxDimension(slope, scales, [int(c) for c in counts], [scales[i] for i in use], len(pts))


def curve_points(S: SurfaceGroup, words: list[str], spacing: float) -> np.ndarray:
    """Evenly spaced points (octagon coordinates) on the closed geodesics ``words``."""
    out = []
    for w in words:
        ch = closed_chords(S, S.word_matrix(w), w)
        for F, l in zip(ch.frames, ch.lengths):
            t = np.arange(0.0, l, spacing)
            out.append(_core.frames_to_points(np.repeat(F[None], len(t), axis=0), t))
    return np.concatenate(out) if out else np.zeros(0, dtype=complex)


def uniform_points(S: SurfaceGroup, n: int, seed: int = 0) -> np.ndarray:
    return sample_points(S, np.random.default_rng(seed), n)
