"""Pure-Python/numpy implementations of the hot kernels.

Signatures mirror the compiled module ``_ccore`` exactly.
"""

from __future__ import annotations

import math

import numpy as np

HUGE = 1e300


def trace_walk(side_forms, side_inv, frame, length, vertex_z, corner_tol, max_steps):
    """Walk a geodesic through the octagon tiling.

    ``frame`` is the 2x2 local frame at the start (geodesic t -> frame(i e^t)).
    Returns ``(sides, times, frames, corner)`` where ``frames[k]`` is the
    local frame at the start of segment ``k`` (in octagon coordinates),
    ``times[k]`` its length, ``sides[k]`` the side crossed at its end
    (-1 for the last segment) and ``corner`` the index of the first segment
    whose exit point came within ``corner_tol`` of a vertex (-1 if none).
    """
    fa = [float(f[0]) for f in side_forms]
    fb = [float(f[1]) for f in side_forms]
    fc = [float(f[2]) for f in side_forms]
    inv_m = [(float(m[0][0]), float(m[0][1]), float(m[1][0]), float(m[1][1])) for m in side_inv]
    vx = [float(z.real) for z in vertex_z]
    vy = [float(z.imag) for z in vertex_z]
    a, b, c, d = float(frame[0][0]), float(frame[0][1]), float(frame[1][0]), float(frame[1][1])
    remaining = float(length)
    sides: list[int] = []
    times: list[float] = []
    frames: list[tuple[float, float, float, float]] = []
    corner = -1
    steps = 0
    while True:
        frames.append((a, b, c, d))
        best_t = HUGE
        best_k = -1
        for k in range(8):
            # transformed form F' = N^T F N; only the diagonal entries matter
            hb = 0.5 * fb[k]
            ap = fa[k] * a * a + 2.0 * hb * a * c + fc[k] * c * c
            cp = fa[k] * b * b + 2.0 * hb * b * d + fc[k] * d * d
            if ap > 0.0:
                if cp < 0.0:
                    t = 0.5 * math.log(-cp / ap)
                else:
                    t = -HUGE
                if t < best_t:
                    best_t = t
                    best_k = k
        if best_t < 0.0:
            best_t = 0.0
        if best_t >= remaining or best_k < 0:
            times.append(remaining)
            sides.append(-1)
            break
        times.append(best_t)
        sides.append(best_k)
        remaining -= best_t
        # exit point and corner test
        e = math.exp(best_t)
        zr, zi = 0.0, e
        den_r = c * zr + d
        den_i = c * zi
        num_r = a * zr + b
        num_i = a * zi
        dd = den_r * den_r + den_i * den_i
        px = (num_r * den_r + num_i * den_i) / dd
        py = (num_i * den_r - num_r * den_i) / dd
        if corner < 0:
            for v in ((best_k) % 8, (best_k + 1) % 8):
                dx = px - vx[v]
                dy = py - vy[v]
                u = (dx * dx + dy * dy) / (4.0 * py * vy[v])
                if 2.0 * math.asinh(math.sqrt(u)) < corner_tol:
                    corner = len(times) - 1
                    break
        # advance the frame to the exit point and fold across the side
        h = math.exp(0.5 * best_t)
        a2, b2, c2, d2 = a * h, b / h, c * h, d / h
        m = inv_m[best_k]
        a = m[0] * a2 + m[1] * c2
        b = m[0] * b2 + m[1] * d2
        c = m[2] * a2 + m[3] * c2
        d = m[2] * b2 + m[3] * d2
        steps += 1
        if steps % 32 == 0:
            det = a * d - b * c
            s = 1.0 / math.sqrt(det)
            a, b, c, d = a * s, b * s, c * s, d * s
        if steps > max_steps:
            raise RuntimeError("trace exceeded the step guard")
    return (
        np.asarray(sides, dtype=np.int64),
        np.asarray(times, dtype=float),
        np.asarray(frames, dtype=float).reshape(-1, 2, 2),
        corner,
    )


def segment_crossings(P, Q, same, exclude_adjacent):
    """All crossings between Klein-model segments.

    ``P`` and ``Q`` are (n, 4) and (m, 4) arrays of segments
    ``(x0, y0, x1, y1)``. When ``same`` is true, ``Q`` must be ``P`` and only
    pairs ``i < j`` are tested. ``exclude_adjacent``: 0 tests every pair,
    1 skips ``j == i + 1``, 2 additionally skips ``(0, n - 1)``.

    Parameters along each segment are taken in (0, 1], so a crossing at the
    junction of two consecutive segments belongs to the earlier one. Returns
    ``(i, j, s, u, sine)`` arrays: indices, parameters on each segment and the
    sine of the Euclidean crossing angle.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n, m = len(P), len(Q)
    out_i, out_j, out_s, out_u, out_sin = [], [], [], [], []
    if n == 0 or m == 0:
        return _empty()
    chunk = max(1, 4_000_000 // max(m, 1))
    for start in range(0, n, chunk):
        Pi = P[start:start + chunk]
        px, py = Pi[:, 0:1], Pi[:, 1:2]
        rx, ry = Pi[:, 2:3] - px, Pi[:, 3:4] - py
        qx, qy = Q[None, :, 0], Q[None, :, 1]
        sx, sy = Q[None, :, 2] - qx, Q[None, :, 3] - qy
        denom = rx * sy - ry * sx
        wx, wy = qx - px, qy - py
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (wx * sy - wy * sx) / denom
            u = (wx * ry - wy * rx) / denom
        ok = (denom != 0) & (s > 0) & (s <= 1) & (u > 0) & (u <= 1)
        ii = np.arange(start, start + len(Pi))[:, None]
        jj = np.arange(m)[None, :]
        if same:
            ok &= jj > ii
            if exclude_adjacent:
                ok &= jj != ii + 1
                if exclude_adjacent == 2:
                    ok &= ~((ii == 0) & (jj == m - 1))
        I, J = np.nonzero(ok)
        if len(I):
            den = denom[I, J]
            lr = np.hypot(rx[I, 0], ry[I, 0])
            ls = np.hypot(sx[0, J], sy[0, J])
            out_i.append(I + start)
            out_j.append(J)
            out_s.append(s[I, J])
            out_u.append(u[I, J])
            out_sin.append(np.abs(den) / (lr * ls))
    if not out_i:
        return _empty()
    return (
        np.concatenate(out_i).astype(np.int64),
        np.concatenate(out_j).astype(np.int64),
        np.concatenate(out_s),
        np.concatenate(out_u),
        np.concatenate(out_sin),
    )


def _empty():
    z = np.zeros(0)
    zi = np.zeros(0, dtype=np.int64)
    return zi, zi.copy(), z, z.copy(), z.copy()


def frames_to_points(frames, ts):
    """Points frames[k](i e^{ts[k]}) as a complex array."""
    frames = np.asarray(frames, dtype=float)
    w = 1j * np.exp(np.asarray(ts, dtype=float))
    a, b, c, d = frames[:, 0, 0], frames[:, 0, 1], frames[:, 1, 0], frames[:, 1, 1]
    return (a * w + b) / (c * w + d)


def min_dist_to_segments(points, seg_inv, seg_len, candidates_ptr, candidates_idx):
    """Distance from each point to the nearest of its candidate segments.

    Segment ``k`` is the image of [i, i e^{L_k}] under the inverse of
    ``seg_inv[k]``. ``candidates_ptr``/``candidates_idx`` form a CSR list of
    candidate segment indices per point. Points with no candidates get inf.
    """
    points = np.asarray(points)
    out = np.full(len(points), np.inf)
    ptr = np.asarray(candidates_ptr)
    idx = np.asarray(candidates_idx)
    if len(idx) == 0:
        return out
    owner = np.repeat(np.arange(len(points)), np.diff(ptr))
    M = seg_inv[idx]
    z = points[owner]
    w = (M[:, 0, 0] * z + M[:, 0, 1]) / (M[:, 1, 0] * z + M[:, 1, 1])
    L = seg_len[idx]
    r = np.abs(w)
    t = np.log(r)
    inside = (t >= 0) & (t <= L)
    d_axis = np.arcsinh(np.abs(w.real) / w.imag)
    d0 = _dist_complex(w, 1j)
    d1 = _dist_complex(w, 1j * np.exp(L))
    dist = np.where(inside, d_axis, np.minimum(d0, d1))
    np.minimum.at(out, owner, dist)
    return out


def _dist_complex(p, q):
    num = (p.real - q.real) ** 2 + (p.imag - q.imag) ** 2
    return 2.0 * np.arcsinh(np.sqrt(num / (4.0 * p.imag * np.imag(q))))
