"""The reference genus-2 surface: a Fuchsian group generated by the side
pairings of the regular octagon with interior angles pi/4.

The octagon is centred at ``i``. Sides are numbered counterclockwise, side
``k`` running from vertex ``k`` to vertex ``k + 1``. Crossing side ``k`` out of
the octagon enters the translate ``s_k P`` where ``s_k`` is the side pairing
carrying the partner side onto side ``k``. Generator letters follow the
boundary word ``a b A B c d C D`` (upper case = inverse).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .hyperbolic import (
    HPoint,
    Isometry,
    UnitTangent,
    dist_z,
    from_disk,
    geodesic_form,
    geodesic_through,
    inv,
    matrices_close,
    mobius,
    normalize_det,
    to_disk,
    two_point_isometry,
)

FORMAT_VERSION = 1
LETTERS = "aAbBcCdD"
LETTER_ORDER = {ch: i for i, ch in enumerate(LETTERS)}
SIDE_LETTERS = ("a", "B", "A", "b", "c", "D", "C", "d")
PARTNER = (2, 3, 0, 1, 6, 7, 4, 5)
RELATOR = "abABcdCD"


class SurfaceConstructionError(RuntimeError):
    pass


def invert_word(word: str) -> str:
    return word[::-1].swapcase()


def free_reduce(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def cyclic_reduce(word: str) -> str:
    w = free_reduce(word)
    while len(w) > 1 and w[0] == w[-1].swapcase():
        w = w[1:-1]
    return w


def shortlex_key(word: str):
    return (len(word), [LETTER_ORDER[ch] for ch in word])


def canonical_cyclic_word(word: str) -> str:
    """ShortLex-least cyclic rotation of the cyclically reduced word or of its inverse."""
    w = cyclic_reduce(word)
    if not w:
        return w
    cands = [v[k:] + v[:k] for v in (w, invert_word(w)) for k in range(len(w))]
    return min(cands, key=shortlex_key)


@dataclass(frozen=True, eq=False)
class SurfaceGroup:
    generators: dict[str, Isometry]
    vertices: tuple[HPoint, ...]
    side_pairings: dict[int, tuple[str, int]]
    center: HPoint = field(default_factory=lambda: HPoint(0.0, 1.0))

    # -- cached numeric views -------------------------------------------------
    @cached_property
    def vertex_z(self) -> np.ndarray:
        return np.array([v.z for v in self.vertices])

    @cached_property
    def side_matrices(self) -> np.ndarray:
        """(8, 2, 2) array; entry k is the pairing s_k for side k."""
        return np.array([self.generators[self.side_pairings[k][0]].matrix for k in range(8)])

    @cached_property
    def side_inverse_matrices(self) -> np.ndarray:
        return np.array([inv(m) for m in self.side_matrices])

    @cached_property
    def side_forms(self) -> np.ndarray:
        """(8, 3) forms a|z|^2 + b x + c of the side geodesics, signed so the
        octagon interior is negative."""
        forms = []
        for k in range(8):
            p, q = self.vertex_z[k], self.vertex_z[(k + 1) % 8]
            u1, u2 = geodesic_through(p, q)
            f = np.array(geodesic_form(u1, u2), dtype=float)
            f /= np.abs(f).max()
            z0 = self.center.z
            if f[0] * abs(z0) ** 2 + f[1] * z0.real + f[2] > 0:
                f = -f
            forms.append(f)
        return np.array(forms)

    @cached_property
    def side_lengths(self) -> np.ndarray:
        return np.array([dist_z(self.vertex_z[k], self.vertex_z[(k + 1) % 8]) for k in range(8)])

    @cached_property
    def circumradius(self) -> float:
        return max(dist_z(self.center.z, v) for v in self.vertex_z)

    @cached_property
    def inradius(self) -> float:
        return 0.5 * dist_z(self.center.z, mobius(self.side_matrices[0], self.center.z))

    @cached_property
    def letter_matrices(self) -> dict[str, np.ndarray]:
        return {k: v.matrix for k, v in self.generators.items()}

    @cached_property
    def hash(self) -> str:
        return surface_hash(self)

    # -- helpers ----------------------------------------------------------------
    def word_matrix(self, word: str) -> np.ndarray:
        m = np.eye(2)
        for i, ch in enumerate(word):
            m = m @ self.letter_matrices[ch]
            if i % 32 == 31:
                m = normalize_det(m)
        return m

    def word_isometry(self, word: str) -> Isometry:
        return Isometry.from_matrix(self.word_matrix(word))

    def contains(self, z: complex, tol: float = 1e-12) -> bool:
        f = self.side_forms
        v = f[:, 0] * (z.real ** 2 + z.imag ** 2) + f[:, 1] * z.real + f[:, 2]
        return bool(np.all(v <= tol))

    def side_values(self, z: complex) -> np.ndarray:
        f = self.side_forms
        return f[:, 0] * (z.real ** 2 + z.imag ** 2) + f[:, 1] * z.real + f[:, 2]

    def area(self) -> float:
        # Gauss-Bonnet for a geodesic polygon: (n - 2) pi - sum of angles
        return 6.0 * math.pi - sum(self.interior_angles())

    def interior_angles(self) -> list[float]:
        angles = []
        for k in range(8):
            v = self.vertex_z[k]
            prev_v = self.vertex_z[(k - 1) % 8]
            next_v = self.vertex_z[(k + 1) % 8]
            angles.append(_angle_at(v, prev_v, next_v))
        return angles


def _direction(p: complex, q: complex) -> float:
    """Angle of the initial tangent of the geodesic from p to q."""
    from .hyperbolic import _standard_frame, frame_angle

    return frame_angle(inv(_standard_frame(p, q)))


def _angle_at(v: complex, p: complex, q: complex) -> float:
    d = (_direction(v, q) - _direction(v, p)) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def build_genus2() -> SurfaceGroup:
    cosh_r = 3.0 + 2.0 * math.sqrt(2.0)
    r_disk = math.tanh(0.5 * math.acosh(cosh_r))
    vertices = []
    for k in range(8):
        theta = (2 * k - 1) * math.pi / 8.0
        vertices.append(from_disk(r_disk * complex(math.cos(theta), math.sin(theta))))
    gens: dict[str, Isometry] = {}
    pairings: dict[int, tuple[str, int]] = {}
    for i in range(8):
        j = PARTNER[i]
        m = two_point_isometry(vertices[j], vertices[(j + 1) % 8], vertices[(i + 1) % 8], vertices[i])
        for src, dst in ((vertices[j], vertices[(i + 1) % 8]), (vertices[(j + 1) % 8], vertices[i])):
            if abs(mobius(m, src) - dst) > 1e-8:
                raise SurfaceConstructionError("side pairing does not match endpoints")
        gens[SIDE_LETTERS[i]] = Isometry.from_matrix(m)
        pairings[i] = (SIDE_LETTERS[i], j)
    S = SurfaceGroup(gens, tuple(HPoint.from_complex(v) for v in vertices), pairings)
    check_surface(S)
    return S


def check_surface(S: SurfaceGroup) -> None:
    rel = S.word_matrix(RELATOR)
    if not matrices_close(rel, np.eye(2), 1e-8):
        raise SurfaceConstructionError(f"relator product is not the identity: {rel}")
    for ch in "abcd":
        prod = S.letter_matrices[ch] @ S.letter_matrices[ch.upper()]
        if not matrices_close(prod, np.eye(2), 1e-8):
            raise SurfaceConstructionError(f"{ch} and {ch.upper()} are not inverse")


class NormalizationError(RuntimeError):
    pass


def normalize_point(S: SurfaceGroup, p: HPoint, max_steps: int = 10_000) -> tuple[HPoint, Isometry]:
    """Fold ``p`` into the closed octagon, returning ``(g p, g)``."""
    z, m = normalize_z(S, p.z, max_steps)
    return HPoint.from_complex(z), Isometry.from_matrix(m)


def normalize_z(S: SurfaceGroup, z: complex, max_steps: int = 10_000, tol: float = 1e-13):
    # The octagon is the Dirichlet domain of its centre, so stepping across a
    # violated side strictly decreases the distance to the centre.
    m = np.eye(2)
    for _ in range(max_steps):
        vals = S.side_values(z)
        k = int(np.argmax(vals))
        if vals[k] <= tol:
            return z, m
        step = S.side_inverse_matrices[k]
        z = mobius(step, z)
        m = step @ m
    raise NormalizationError(f"point did not fold into the octagon in {max_steps} steps")


# ---------------------------------------------------------------------------
# serialization

def _fmt(x: float) -> str:
    return f"{x:.16e}"


def surface_hash(S: SurfaceGroup) -> str:
    text = "".join(
        f"{ch}:" + ",".join(f"{v:.12e}" for v in S.generators[ch].matrix.ravel()) + ";"
        for ch in LETTERS
    )
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def dump_surface(S: SurfaceGroup, extra_lines: list[str] | None = None) -> str:
    lines = [f"# selfint surface format_version={FORMAT_VERSION}", f"hash {S.hash}"]
    for ch in LETTERS:
        g = S.generators[ch]
        lines.append("generator " + ch + " " + " ".join(_fmt(v) for v in (g.a, g.b, g.c, g.d)))
    for v in S.vertices:
        lines.append(f"vertex {_fmt(v.x)} {_fmt(v.y)}")
    for k in range(8):
        letter, partner = S.side_pairings[k]
        lines.append(f"side {k} {letter} {partner}")
    lines.extend(extra_lines or [])
    return "\n".join(lines) + "\n"


def parse_surface(text: str) -> tuple[SurfaceGroup, list[str]]:
    gens: dict[str, Isometry] = {}
    vertices: list[HPoint] = []
    pairings: dict[int, tuple[str, int]] = {}
    extra: list[str] = []
    stored_hash = None
    lines = text.splitlines()
    if not lines or "format_version=" not in lines[0]:
        raise ValueError("missing surface header")
    version = int(lines[0].split("format_version=")[1].split()[0])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported surface format version {version}")
    for line in lines[1:]:
        parts = line.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "hash":
            stored_hash = parts[1]
        elif tag == "generator":
            gens[parts[1]] = Isometry(*(float(x) for x in parts[2:6]))
        elif tag == "vertex":
            vertices.append(HPoint(float(parts[1]), float(parts[2])))
        elif tag == "side":
            pairings[int(parts[1])] = (parts[2], int(parts[3]))
        else:
            extra.append(line)
    S = SurfaceGroup(gens, tuple(vertices), pairings)
    check_surface(S)
    if stored_hash is not None and stored_hash != S.hash:
        raise ValueError(f"surface hash mismatch: file {stored_hash}, computed {S.hash}")
    return S, extra


def random_group_word(rng: np.random.Generator, length: int) -> str:
    out: list[str] = []
    while len(out) < length:
        ch = LETTERS[int(rng.integers(8))]
        if out and out[-1] == ch.swapcase():
            continue
        out.append(ch)
    return "".join(out)


def disk_coordinates(z) -> np.ndarray:
    """Poincare disk coordinates with the octagon centred at the origin."""
    w = to_disk(z) if np.isscalar(z) else (np.asarray(z) - 1j) / (np.asarray(z) + 1j)
    return w


class GroupBall:
    """All group elements ``g`` with ``d(i, g i) <= radius``.

    Found breadth first in word length. Because the octagon is the Dirichlet
    domain of ``i``, every nontrivial element has a neighbour ``g s`` strictly
    closer to ``i``, so restricting the search to the ball loses nothing.
    """

    def __init__(self, S: SurfaceGroup, radius: float, key_scale: float = 1e3,
                 max_elements: int = 20_000_000):
        self.S = S
        self.radius = float(radius)
        bound = 2.0 * math.cosh(radius) * (1 + 1e-12)
        letters = np.array([LETTER_ORDER[ch] for ch in LETTERS])
        gens = np.array([S.letter_matrices[ch] for ch in LETTERS])
        inverse_of = np.array([LETTER_ORDER[ch.swapcase()] for ch in LETTERS])
        mats = [np.eye(2)[None]]
        parents = [np.array([-1])]
        lets = [np.array([-1])]
        depths = [np.array([0])]
        keys_prev2 = np.zeros((0, 4), dtype=np.int64)
        keys_prev = _keys(mats[0], key_scale)
        frontier = mats[0]
        frontier_idx = np.array([0])
        frontier_let = np.array([-1])
        total = 1
        depth = 0
        while len(frontier):
            depth += 1
            # extend every frontier element by every letter except the inverse of its last one
            cand = np.einsum("nij,mjk->nmik", frontier, gens).reshape(-1, 2, 2)
            par = np.repeat(frontier_idx, 8)
            let = np.tile(letters, len(frontier))
            prev_let = np.repeat(frontier_let, 8)
            ok = (prev_let < 0) | (inverse_of[let] != prev_let)
            norm = np.einsum("nij,nij->n", cand, cand)
            ok &= norm <= bound
            cand, par, let = cand[ok], par[ok], let[ok]
            if not len(cand):
                break
            keys = _keys(cand, key_scale)
            _, first = np.unique(keys, axis=0, return_index=True)
            first.sort()
            cand, par, let, keys = cand[first], par[first], let[first], keys[first]
            old = np.concatenate([keys_prev, keys_prev2])
            if len(old):
                seen = _isin_rows(keys, old)
                cand, par, let, keys = cand[~seen], par[~seen], let[~seen], keys[~seen]
            n_new = len(cand)
            idx = np.arange(total, total + n_new)
            mats.append(cand)
            parents.append(par)
            lets.append(let)
            depths.append(np.full(n_new, depth))
            total += n_new
            if total > max_elements:
                raise MemoryError(f"group ball exceeds {max_elements} elements")
            keys_prev2, keys_prev = keys_prev, keys
            frontier, frontier_idx, frontier_let = cand, idx, let
        self.matrices = np.concatenate(mats)
        self.parent = np.concatenate(parents)
        self.letter = np.concatenate(lets)
        self.depth = np.concatenate(depths)
        self.max_depth = int(self.depth.max())

    def __len__(self) -> int:
        return len(self.matrices)

    def word(self, idx: int) -> str:
        out = []
        while self.parent[idx] >= 0:
            out.append(LETTERS[self.letter[idx]])
            idx = self.parent[idx]
        return "".join(reversed(out))

    def distances(self) -> np.ndarray:
        norm = np.einsum("nij,nij->n", self.matrices, self.matrices)
        return np.arccosh(np.maximum(1.0, 0.5 * norm))


def _keys(mats: np.ndarray, scale: float) -> np.ndarray:
    flat = mats.reshape(-1, 4).copy()
    neg = (flat[:, 0] < 0) | ((flat[:, 0] == 0) & (flat[:, 1] < 0))
    flat[neg] *= -1
    return np.round(flat * scale).astype(np.int64)


def _isin_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    dt = np.dtype((np.void, a.dtype.itemsize * a.shape[1]))
    av = np.ascontiguousarray(a).view(dt).ravel()
    bv = np.ascontiguousarray(b).view(dt).ravel()
    return np.isin(av, bv)


def sample_points(S: SurfaceGroup, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` points of the octagon, uniform for hyperbolic area (half-plane, complex)."""
    R = S.circumradius
    out = np.empty(0, dtype=complex)
    while len(out) < n:
        m = 2 * (n - len(out)) + 16
        rho = np.arccosh(1.0 + rng.random(m) * (math.cosh(R) - 1.0))
        theta = rng.random(m) * 2 * math.pi
        w = np.tanh(0.5 * rho) * np.exp(1j * theta)
        z = 1j * (1 + w) / (1 - w)
        f = S.side_forms
        vals = (f[:, 0][None] * np.abs(z[:, None]) ** 2 + f[:, 1][None] * z.real[:, None]
                + f[:, 2][None])
        out = np.concatenate([out, z[(vals <= 0).all(axis=1)]])
    return out[:n]


def sample_tangents(S: SurfaceGroup, rng: np.random.Generator, n: int) -> list[UnitTangent]:
    """Uniform (Liouville) random unit tangent vectors based in the octagon."""
    pts = sample_points(S, rng, n)
    angles = rng.random(n) * 2 * math.pi
    return [UnitTangent(HPoint.from_complex(complex(z)), float(t)) for z, t in zip(pts, angles)]
