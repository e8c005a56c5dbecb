"""Compiled inner loops.

Everything here works on flat numpy arrays.  Window positions ``p`` are
array offsets, ``p = i + back_len`` for contour index ``i``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

NO_CEILING = np.int64(2**62)

# walk_backward status codes
DONE = 0
OUT_OF_BITS = 1
CAPPED = 2


@njit(cache=True)
def walk_backward(bits, ceiling, target, fixed_len, max_len):
    """Backward contour ``w[j] = C_{-j}`` driven by fair bits.

    At level ``ceiling + 1`` the next step is forced down without consuming
    a bit; this collapses every excursion above ``ceiling`` to a single leaf.
    Stops after ``fixed_len`` steps when ``fixed_len >= 0``, otherwise at the
    first visit of ``-target``.  Returns ``(walk, bits_used, status)``.
    """
    cap = fixed_len if fixed_len >= 0 else max_len
    out = np.empty(cap + 1, dtype=np.int64)
    out[0] = 0
    used = 0
    n_bits = bits.shape[0]
    j = 0
    w = 0
    status = DONE
    while True:
        if fixed_len >= 0:
            if j == fixed_len:
                break
        elif w == -target:
            break
        if j == cap:
            status = CAPPED
            break
        if w == ceiling + 1:
            w -= 1
        else:
            if used == n_bits:
                status = OUT_OF_BITS
                break
            if bits[used]:
                w += 1
            else:
                w -= 1
            used += 1
        j += 1
        out[j] = w
    return out[: j + 1], used, status


@njit(cache=True)
def scan_tree(values):
    """Identify vertices along a contour window, left to right.

    Returns ``(vertex_of, parent, first)``; vertex ids follow first visit
    order, ``first[v]`` is the array position of the first visit and
    ``parent`` is -1 for the lowest vertex of the window.
    """
    n = values.shape[0]
    vertex_of = np.empty(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    first = np.empty(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    vertex_of[0] = 0
    first[0] = 0
    stack[0] = 0
    top = 1
    nv = 1
    for p in range(1, n):
        if values[p] > values[p - 1]:
            v = nv
            nv += 1
            first[v] = p
            parent[v] = stack[top - 1]
            stack[top] = v
            top += 1
        else:
            child = stack[top - 1]
            top -= 1
            if top == 0:
                v = nv
                nv += 1
                first[v] = p
                parent[child] = v
                stack[0] = v
                top = 1
            else:
                v = stack[top - 1]
        vertex_of[p] = v
    return vertex_of, parent[:nv].copy(), first[:nv].copy()


@njit(cache=True)
def place_vertices(values, offset, vertex_of, spine, fwd_codes, bwd_codes,
                   spine_codes, dim, step_keys):
    """Positions of every vertex of the window.

    Spine edges take their displacement from ``spine_codes`` (indexed by
    level), children discovered walking backward from index 0 from
    ``bwd_codes`` and children discovered walking forward from ``fwd_codes``,
    each in discovery order.  A code ``c`` is the unit vector with axis
    ``c >> 1`` and sign ``+`` for even ``c``.  ``disp[v]`` is the code of the
    edge from the parent of ``v`` to ``v`` (-1 when the parent is outside
    the window).
    """
    nv = 0
    for p in range(vertex_of.shape[0]):
        if vertex_of[p] + 1 > nv:
            nv = vertex_of[p] + 1
    pos = np.zeros((nv, dim), dtype=np.int32)
    keys = np.zeros(nv, dtype=np.uint64)
    disp = np.full(nv, -1, dtype=np.int16)
    known = np.zeros(nv, dtype=np.bool_)
    known[spine[0]] = True
    for lev in range(spine.shape[0] - 1):
        c = spine_codes[lev]
        child = spine[lev]
        up = spine[lev + 1]
        disp[child] = c
        for a in range(dim):
            pos[up, a] = pos[child, a]
        if c & 1:
            pos[up, c >> 1] += 1
        else:
            pos[up, c >> 1] -= 1
        keys[up] = keys[child] - step_keys[c]
        known[up] = True
    jb = 0
    for p in range(offset, 0, -1):
        if values[p - 1] > values[p]:
            v = vertex_of[p - 1]
            u = vertex_of[p]
            c = bwd_codes[jb]
            jb += 1
            disp[v] = c
            for a in range(dim):
                pos[v, a] = pos[u, a]
            if c & 1:
                pos[v, c >> 1] -= 1
            else:
                pos[v, c >> 1] += 1
            keys[v] = keys[u] + step_keys[c]
            known[v] = True
    jf = 0
    for p in range(offset + 1, values.shape[0]):
        if values[p] > values[p - 1]:
            v = vertex_of[p]
            u = vertex_of[p - 1]
            c = fwd_codes[jf]
            jf += 1
            disp[v] = c
            for a in range(dim):
                pos[v, a] = pos[u, a]
            if c & 1:
                pos[v, c >> 1] -= 1
            else:
                pos[v, c >> 1] += 1
            keys[v] = keys[u] + step_keys[c]
            known[v] = True
    ok = True
    for v in range(nv):
        if not known[v]:
            ok = False
    return pos, keys, disp, ok


@njit(cache=True)
def bounded_distance(a, b, depth, parent, limit):
    """Tree distance between vertices ``a`` and ``b`` or ``limit + 1``.

    Climbs parents, so the cost is at most ``limit`` steps.
    """
    steps = 0
    while depth[a] > depth[b]:
        a = parent[a]
        steps += 1
        if steps > limit or a < 0:
            return limit + 1
    while depth[b] > depth[a]:
        b = parent[b]
        steps += 1
        if steps > limit or b < 0:
            return limit + 1
    while a != b:
        a = parent[a]
        b = parent[b]
        steps += 2
        if steps > limit or a < 0 or b < 0:
            return limit + 1
    return steps


@njit(cache=True)
def group_by_key(keys):
    """Vertices bucketed by equal key: ``order[starts[g]:starts[g+1]]`` are
    the members of group ``g`` and ``group_of[v]`` is the group of ``v``.

    Open addressing on the low bits of the key; groups are numbered by
    first occurrence.
    """
    nv = keys.shape[0]
    size = 1
    while size < 2 * nv:
        size *= 2
    mask = np.uint64(size - 1)
    slot_key = np.empty(size, dtype=np.uint64)
    slot_group = np.full(size, -1, dtype=np.int64)
    group_of = np.empty(nv, dtype=np.int64)
    counts = np.zeros(nv + 1, dtype=np.int64)
    g = 0
    for v in range(nv):
        h = (keys[v] ^ (keys[v] >> np.uint64(29))) & mask
        while slot_group[h] >= 0 and slot_key[h] != keys[v]:
            h = (h + np.uint64(1)) & mask
        if slot_group[h] < 0:
            slot_group[h] = g
            slot_key[h] = keys[v]
            g += 1
        group_of[v] = slot_group[h]
        counts[slot_group[h] + 1] += 1
    starts = np.cumsum(counts[: g + 1])
    fill = starts[:g].copy()
    order = np.empty(nv, dtype=np.int64)
    for v in range(nv):
        order[fill[group_of[v]]] = v
        fill[group_of[v]] += 1
    return order, starts, group_of


@njit(cache=True)
def collision_distance(vertex_of, first, parent, depth, pos, order, starts,
                       group_of, p_lo, p_hi, limit):
    """For each window position p in [p_lo, p_hi]: the smallest tree distance
    from ``u_p`` to a vertex sharing its lattice position and visited before
    ``p``, capped at ``limit + 1``.  Zero when ``p`` is not a first visit.
    """
    dim = pos.shape[1]
    out = np.empty(p_hi - p_lo + 1, dtype=np.int64)
    for p in range(p_lo, p_hi + 1):
        v = vertex_of[p]
        if first[v] < p:
            out[p - p_lo] = 0
            continue
        best = limit + 1
        g = group_of[v]
        for r in range(starts[g], starts[g + 1]):
            w = order[r]
            if w == v or first[w] >= p:
                continue
            same = True
            for a in range(dim):
                if pos[w, a] != pos[v, a]:
                    same = False
                    break
            if not same:
                continue
            dd = bounded_distance(v, w, depth, parent, best - 1)
            if dd < best:
                best = dd
        out[p - p_lo] = best
    return out


@njit(cache=True)
def sparse_table(values):
    n = values.shape[0]
    levels = 1
    while (1 << levels) <= n:
        levels += 1
    table = np.empty((levels, n), dtype=values.dtype)
    table[0, :] = values
    for lev in range(1, levels):
        half = 1 << (lev - 1)
        for p in range(n - (1 << lev) + 1):
            x = table[lev - 1, p]
            y = table[lev - 1, p + half]
            table[lev, p] = x if x < y else y
    return table


@njit(cache=True)
def _grow(arr, size):
    out = np.empty((size,) + arr.shape[1:], dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def gw_subtree_hits(spine_codes, tree_bits, tree_codes, step_keys, dim,
                    js, max_generation):
    """Does the subtree hanging at spine level ``j`` cover the origin?

    One critical geometric Galton-Watson tree is grown generation by
    generation (offspring from consecutive fair bits: count the ones before
    the first zero) and carried by a branching random walk started at 0.
    For every ``j`` in ``js`` the subtree root is placed at ``S_j``, the
    position of spine vertex j, so the origin is covered iff some tree vertex
    sits at ``-S_j``.  Only two generations are held in memory.

    Returns ``(hit flags, vertices grown, truncated)``; the vertex count is
    -1 when the bits or codes ran out.
    """
    n_j = js.shape[0]
    jmax = 0
    for t in range(n_j):
        if js[t] > jmax:
            jmax = js[t]
    spine = np.zeros(dim, dtype=np.int64)
    targets = np.zeros((n_j, dim), dtype=np.int64)
    tkeys = np.zeros(n_j, dtype=np.uint64)
    key = np.uint64(0)
    for lev in range(jmax + 1):
        for t in range(n_j):
            if js[t] == lev:
                for a in range(dim):
                    targets[t, a] = -spine[a]
                tkeys[t] = np.uint64(0) - key
        if lev < jmax:
            c = spine_codes[lev]
            if c & 1:
                spine[c >> 1] -= 1
            else:
                spine[c >> 1] += 1
            key = key + step_keys[c]
    hits = np.zeros(n_j, dtype=np.bool_)
    cur_pos = np.zeros((64, dim), dtype=np.int64)
    cur_key = np.zeros(64, dtype=np.uint64)
    nxt_pos = np.empty((64, dim), dtype=np.int64)
    nxt_key = np.empty(64, dtype=np.uint64)
    n_cur = 1
    total = 1
    bit = 0
    code = 0
    n_bits = tree_bits.shape[0]
    n_codes = tree_codes.shape[0]
    generation = 0
    while True:
        for v in range(n_cur):
            for t in range(n_j):
                if cur_key[v] == tkeys[t] and not hits[t]:
                    same = True
                    for a in range(dim):
                        if cur_pos[v, a] != targets[t, a]:
                            same = False
                            break
                    if same:
                        hits[t] = True
        if n_cur == 0:
            return hits, total, False
        if generation == max_generation:
            return hits, total, True
        n_nxt = 0
        for v in range(n_cur):
            while True:
                if bit == n_bits:
                    return hits, -1, False
                b = tree_bits[bit]
                bit += 1
                if b == 0:
                    break
                if code == n_codes:
                    return hits, -1, False
                if n_nxt == nxt_key.shape[0]:
                    nxt_key = _grow(nxt_key, 2 * n_nxt)
                    nxt_pos = _grow(nxt_pos, 2 * n_nxt)
                c = tree_codes[code]
                code += 1
                for a in range(dim):
                    nxt_pos[n_nxt, a] = cur_pos[v, a]
                if c & 1:
                    nxt_pos[n_nxt, c >> 1] -= 1
                else:
                    nxt_pos[n_nxt, c >> 1] += 1
                nxt_key[n_nxt] = cur_key[v] + step_keys[c]
                n_nxt += 1
        cur_pos, nxt_pos = nxt_pos, cur_pos
        cur_key, nxt_key = nxt_key, cur_key
        n_cur = n_nxt
        total += n_nxt
        generation += 1


@njit(cache=True)
def uniform_codes(raw, modulus):
    """``floor(raw * modulus / 2**64)`` for each raw 64-bit word."""
    out = np.empty(raw.shape[0], dtype=np.int64)
    m = np.uint64(modulus)
    mask = np.uint64(0xFFFFFFFF)
    s32 = np.uint64(32)
    for i in range(raw.shape[0]):
        hi = raw[i] >> s32
        lo = raw[i] & mask
        out[i] = np.int64((hi * m + ((lo * m) >> s32)) >> s32)
    return out
