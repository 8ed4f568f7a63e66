"""Quadtree approximation of the repulsive t-SNE forces.

Positions are inserted into an array-backed quadtree; exact duplicates merge
into one leaf with a multiplicity, which also caps the tree depth. The force
pass walks the tree per point with an explicit stack and accepts a cell when
its side length over the distance to its center of mass is below ``theta``,
accumulating both the repulsive numerator and the global Student-t weight sum.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MIN_HALF = 1e-12


@njit(cache=True)
def _build(pos, root_cx, root_cy, root_half, cap):
    center = np.zeros((cap, 2))
    half = np.zeros(cap)
    child = np.full((cap, 4), -1, dtype=np.int64)
    count = np.zeros(cap, dtype=np.int64)
    com = np.zeros((cap, 2))
    leaf_pos = np.zeros((cap, 2))
    center[0, 0] = root_cx
    center[0, 1] = root_cy
    half[0] = root_half
    m = 1
    n = pos.shape[0]
    for p in range(n):
        x = pos[p, 0]
        y = pos[p, 1]
        node = 0
        while True:
            count[node] += 1
            com[node, 0] += x
            com[node, 1] += y
            if count[node] == 1:
                leaf_pos[node, 0] = x
                leaf_pos[node, 1] = y
                break
            is_leaf = (child[node, 0] == -1 and child[node, 1] == -1
                       and child[node, 2] == -1 and child[node, 3] == -1)
            if is_leaf:
                ex = leaf_pos[node, 0]
                ey = leaf_pos[node, 1]
                if (ex == x and ey == y) or half[node] < _MIN_HALF:
                    break  # coincident: keep as multiplicity
                # push the resident point(s) one level down
                q = 0
                if ex >= center[node, 0]:
                    q += 1
                if ey >= center[node, 1]:
                    q += 2
                if m >= cap:
                    raise RuntimeError("quadtree capacity exceeded")
                c = m
                m += 1
                h = half[node] * 0.5
                center[c, 0] = center[node, 0] + (h if ex >= center[node, 0] else -h)
                center[c, 1] = center[node, 1] + (h if ey >= center[node, 1] else -h)
                half[c] = h
                child[node, q] = c
                mult = count[node] - 1
                count[c] = mult
                com[c, 0] = ex * mult
                com[c, 1] = ey * mult
                leaf_pos[c, 0] = ex
                leaf_pos[c, 1] = ey
            q = 0
            if x >= center[node, 0]:
                q += 1
            if y >= center[node, 1]:
                q += 2
            c = child[node, q]
            if c == -1:
                if m >= cap:
                    raise RuntimeError("quadtree capacity exceeded")
                c = m
                m += 1
                h = half[node] * 0.5
                center[c, 0] = center[node, 0] + (h if x >= center[node, 0] else -h)
                center[c, 1] = center[node, 1] + (h if y >= center[node, 1] else -h)
                half[c] = h
                child[node, q] = c
            node = c
    return center, half, child, count, com, leaf_pos, m


@njit(cache=True)
def _forces(pos, theta, center, half, child, count, com, leaf_pos, m):
    n = pos.shape[0]
    rep = np.zeros((n, 2))
    zsum = 0.0
    stack = np.empty(m + 4, dtype=np.int64)
    theta2 = theta * theta
    for i in range(n):
        x = pos[i, 0]
        y = pos[i, 1]
        nx = 0.0
        ny = 0.0
        zi = 0.0
        top = 0
        stack[0] = 0
        while top >= 0:
            node = stack[top]
            top -= 1
            cnt = count[node]
            if cnt == 0:
                continue
            is_leaf = (child[node, 0] == -1 and child[node, 1] == -1
                       and child[node, 2] == -1 and child[node, 3] == -1)
            if is_leaf:
                cc = cnt
                if leaf_pos[node, 0] == x and leaf_pos[node, 1] == y:
                    cc -= 1
                if cc > 0:
                    dx = x - leaf_pos[node, 0]
                    dy = y - leaf_pos[node, 1]
                    w = 1.0 / (1.0 + dx * dx + dy * dy)
                    zi += cc * w
                    nx += cc * w * w * dx
                    ny += cc * w * w * dy
                continue
            dx = x - com[node, 0] / cnt
            dy = y - com[node, 1] / cnt
            dist2 = dx * dx + dy * dy
            size = 2.0 * half[node]
            if dist2 > 0.0 and size * size < theta2 * dist2:
                w = 1.0 / (1.0 + dist2)
                zi += cnt * w
                nx += cnt * w * w * dx
                ny += cnt * w * w * dy
            else:
                for q in range(4):
                    c = child[node, q]
                    if c != -1:
                        top += 1
                        stack[top] = c
        rep[i, 0] = nx
        rep[i, 1] = ny
        zsum += zi
    return rep, zsum


def bh_repulsion(coords: np.ndarray, theta: float):
    """Approximate (sum_j w_ij^2 (y_i - y_j), sum_ij w_ij) with w = Student-t weights."""
    pos = np.ascontiguousarray(coords, dtype=np.float64)
    lo = pos.min(axis=0)
    hi = pos.max(axis=0)
    cx = 0.5 * (lo[0] + hi[0])
    cy = 0.5 * (lo[1] + hi[1])
    half = 0.5 * max(hi[0] - lo[0], hi[1] - lo[1]) * 1.001 + 1e-8
    cap = 32 * pos.shape[0] + 1024
    center, halfarr, child, count, com, leaf_pos, m = _build(pos, cx, cy, half, cap)
    return _forces(pos, float(theta), center, halfarr, child, count, com, leaf_pos, m)
