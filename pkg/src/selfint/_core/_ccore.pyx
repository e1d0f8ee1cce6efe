# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_pycore`` for the reference
implementations and argument conventions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, asinh, fabs, hypot, INFINITY

cnp.import_array()

cdef double HUGE = 1e300


def trace_walk(side_forms, side_inv, frame, double length, vertex_z, double corner_tol,
               long max_steps):
    cdef double[:, :] F = np.ascontiguousarray(side_forms, dtype=np.float64)
    cdef double[:, :, :] IM = np.ascontiguousarray(side_inv, dtype=np.float64)
    cdef cnp.ndarray vz = np.asarray(vertex_z, dtype=np.complex128)
    cdef double[:] vx = np.ascontiguousarray(vz.real)
    cdef double[:] vy = np.ascontiguousarray(vz.imag)
    cdef double a = frame[0][0], b = frame[0][1], c = frame[1][0], d = frame[1][1]
    cdef double remaining = length
    cdef long cap = 64, n = 0, steps = 0, corner = -1
    cdef cnp.ndarray sides_a = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray times_a = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray frames_a = np.empty((cap, 4), dtype=np.float64)
    cdef long long[:] sides = sides_a
    cdef double[:] times = times_a
    cdef double[:, :] frames = frames_a
    cdef int k, best_k, v, vi
    cdef double best_t, t, hb, ap, cp, e, den_r, den_i, num_r, num_i, dd, px, py, dx, dy, u
    cdef double h, a2, b2, c2, d2, det, s
    while True:
        if n == cap:
            cap *= 2
            sides_a = np.resize(sides_a, cap)
            times_a = np.resize(times_a, cap)
            frames_a = np.resize(frames_a, (cap, 4))
            sides = sides_a
            times = times_a
            frames = frames_a
        frames[n, 0] = a
        frames[n, 1] = b
        frames[n, 2] = c
        frames[n, 3] = d
        best_t = HUGE
        best_k = -1
        for k in range(8):
            hb = 0.5 * F[k, 1]
            ap = F[k, 0] * a * a + 2.0 * hb * a * c + F[k, 2] * c * c
            cp = F[k, 0] * b * b + 2.0 * hb * b * d + F[k, 2] * d * d
            if ap > 0.0:
                if cp < 0.0:
                    t = 0.5 * log(-cp / ap)
                else:
                    t = -HUGE
                if t < best_t:
                    best_t = t
                    best_k = k
        if best_t < 0.0:
            best_t = 0.0
        if best_t >= remaining or best_k < 0:
            times[n] = remaining
            sides[n] = -1
            n += 1
            break
        times[n] = best_t
        sides[n] = best_k
        n += 1
        remaining -= best_t
        e = exp(best_t)
        den_r = d
        den_i = c * e
        num_r = b
        num_i = a * e
        dd = den_r * den_r + den_i * den_i
        px = (num_r * den_r + num_i * den_i) / dd
        py = (num_i * den_r - num_r * den_i) / dd
        if corner < 0:
            for vi in range(2):
                v = (best_k + vi) % 8
                dx = px - vx[v]
                dy = py - vy[v]
                u = (dx * dx + dy * dy) / (4.0 * py * vy[v])
                if 2.0 * asinh(sqrt(u)) < corner_tol:
                    corner = n - 1
                    break
        h = exp(0.5 * best_t)
        a2 = a * h
        b2 = b / h
        c2 = c * h
        d2 = d / h
        a = IM[best_k, 0, 0] * a2 + IM[best_k, 0, 1] * c2
        b = IM[best_k, 0, 0] * b2 + IM[best_k, 0, 1] * d2
        c = IM[best_k, 1, 0] * a2 + IM[best_k, 1, 1] * c2
        d = IM[best_k, 1, 0] * b2 + IM[best_k, 1, 1] * d2
        steps += 1
        if steps % 32 == 0:
            det = a * d - b * c
            s = 1.0 / sqrt(det)
            a *= s
            b *= s
            c *= s
            d *= s
        if steps > max_steps:
            raise RuntimeError("trace exceeded the step guard")
    return (sides_a[:n].copy(), times_a[:n].copy(), frames_a[:n].reshape(n, 2, 2).copy(), corner)


def segment_crossings(P, Q, bint same, int exclude_adjacent):
    cdef double[:, :] p = np.ascontiguousarray(P, dtype=np.float64).reshape(-1, 4)
    cdef double[:, :] q = np.ascontiguousarray(Q, dtype=np.float64).reshape(-1, 4)
    cdef long n = p.shape[0], m = q.shape[0]
    cdef long i, j, j0, cnt = 0, cap = 64
    cdef long[:] oi = np.empty(cap, dtype=np.int64)
    cdef long[:] oj = np.empty(cap, dtype=np.int64)
    cdef double[:, :] of = np.empty((cap, 3), dtype=np.float64)
    cdef double px, py, rx, ry, qx, qy, sx, sy, denom, wx, wy, s, u
    cdef double minx_p, maxx_p, miny_p, maxy_p
    for i in range(n):
        px = p[i, 0]
        py = p[i, 1]
        rx = p[i, 2] - px
        ry = p[i, 3] - py
        minx_p = px if rx > 0 else px + rx
        maxx_p = px + rx if rx > 0 else px
        miny_p = py if ry > 0 else py + ry
        maxy_p = py + ry if ry > 0 else py
        j0 = i + 1 if same else 0
        for j in range(j0, m):
            if same and exclude_adjacent:
                if j == i + 1:
                    continue
                if exclude_adjacent == 2 and i == 0 and j == m - 1:
                    continue
            qx = q[j, 0]
            qy = q[j, 1]
            sx = q[j, 2] - qx
            sy = q[j, 3] - qy
            # bounding-box rejection
            if (qx < minx_p and qx + sx < minx_p) or (qx > maxx_p and qx + sx > maxx_p):
                continue
            if (qy < miny_p and qy + sy < miny_p) or (qy > maxy_p and qy + sy > maxy_p):
                continue
            denom = rx * sy - ry * sx
            if denom == 0.0:
                continue
            wx = qx - px
            wy = qy - py
            s = (wx * sy - wy * sx) / denom
            u = (wx * ry - wy * rx) / denom
            if s > 0.0 and s <= 1.0 and u > 0.0 and u <= 1.0:
                if cnt == cap:
                    cap *= 2
                    oi = np.resize(np.asarray(oi), cap)
                    oj = np.resize(np.asarray(oj), cap)
                    of = np.resize(np.asarray(of), (cap, 3))
                oi[cnt] = i
                oj[cnt] = j
                of[cnt, 0] = s
                of[cnt, 1] = u
                of[cnt, 2] = fabs(denom) / (hypot(rx, ry) * hypot(sx, sy))
                cnt += 1
    f = np.asarray(of)[:cnt]
    return (np.asarray(oi)[:cnt].copy(), np.asarray(oj)[:cnt].copy(), f[:, 0].copy(), f[:, 1].copy(),
            f[:, 2].copy())


def frames_to_points(frames, ts):
    fr = np.asarray(frames, dtype=float)
    w = 1j * np.exp(np.asarray(ts, dtype=float))
    return (fr[:, 0, 0] * w + fr[:, 0, 1]) / (fr[:, 1, 0] * w + fr[:, 1, 1])


def min_dist_to_segments(points, seg_inv, seg_len, candidates_ptr, candidates_idx):
    cdef cnp.ndarray pts = np.asarray(points, dtype=np.complex128)
    cdef double[:] zx = np.ascontiguousarray(pts.real)
    cdef double[:] zy = np.ascontiguousarray(pts.imag)
    cdef double[:, :, :] M = np.ascontiguousarray(seg_inv, dtype=np.float64)
    cdef double[:] L = np.ascontiguousarray(seg_len, dtype=np.float64)
    cdef long long[:] ptr = np.ascontiguousarray(candidates_ptr, dtype=np.int64)
    cdef long long[:] idx = np.ascontiguousarray(candidates_idx, dtype=np.int64)
    cdef long n = zx.shape[0]
    cdef cnp.ndarray out_a = np.full(n, np.inf)
    cdef double[:] out = out_a
    cdef long i, k, s
    cdef double x, y, nr, ni, dr, di, dd, wr, wi, r, t, dist, e, d0, d1, best
    for i in range(n):
        x = zx[i]
        y = zy[i]
        best = INFINITY
        for k in range(ptr[i], ptr[i + 1]):
            s = idx[k]
            nr = M[s, 0, 0] * x + M[s, 0, 1]
            ni = M[s, 0, 0] * y
            dr = M[s, 1, 0] * x + M[s, 1, 1]
            di = M[s, 1, 0] * y
            dd = dr * dr + di * di
            wr = (nr * dr + ni * di) / dd
            wi = (ni * dr - nr * di) / dd
            r = sqrt(wr * wr + wi * wi)
            t = log(r)
            if t >= 0.0 and t <= L[s]:
                dist = asinh(fabs(wr) / wi)
            else:
                d0 = 2.0 * asinh(sqrt((wr * wr + (wi - 1.0) * (wi - 1.0)) / (4.0 * wi)))
                e = exp(L[s])
                d1 = 2.0 * asinh(sqrt((wr * wr + (wi - e) * (wi - e)) / (4.0 * wi * e)))
                dist = d0 if d0 < d1 else d1
            if dist < best:
                best = dist
        out[i] = best
    return out_a
