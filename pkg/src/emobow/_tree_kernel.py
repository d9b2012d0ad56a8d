"""Compiled inner loops for entropy trees over CSR count matrices.

Rows are samples, columns are vocabulary features. A node only ever touches
the nonzero entries of its own rows: zero counts are handled in aggregate
as "parent class counts minus the counts of rows holding a nonzero value".
"""

import math

import numpy as np
from numba import njit

# gains closer than this are ties; splits must beat it to be kept
GAIN_EPS = 1e-12


@njit(cache=True, nogil=True)
def entropy_bits(counts, total):
    h = 0.0
    for c in counts:
        if c > 0.0:
            p = c / total
            h -= p * math.log2(p)
    return h


@njit(cache=True, nogil=True)
def gather_entries(indptr, indices, data, samples, start, end):
    n = 0
    for i in range(start, end):
        r = samples[i]
        n += indptr[r + 1] - indptr[r]
    ent_col = np.empty(n, dtype=np.int64)
    ent_val = np.empty(n, dtype=np.float64)
    ent_row = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(start, end):
        r = samples[i]
        for p in range(indptr[r], indptr[r + 1]):
            ent_col[k] = indices[p]
            ent_val[k] = data[p]
            ent_row[k] = r
            k += 1
    return ent_col, ent_val, ent_row


@njit(cache=True, nogil=True)
def splittable_columns(ent_col, ent_val, n_rows, col_cnt, col_min, col_max):
    """Sorted columns taking at least two distinct values (zero included) in the node."""
    present = np.empty(len(ent_col), dtype=np.int64)
    m = 0
    for k in range(len(ent_col)):
        c = ent_col[k]
        v = ent_val[k]
        if col_cnt[c] == 0:
            present[m] = c
            m += 1
            col_min[c] = v
            col_max[c] = v
        else:
            if v < col_min[c]:
                col_min[c] = v
            if v > col_max[c]:
                col_max[c] = v
        col_cnt[c] += 1
    out = np.empty(m, dtype=np.int64)
    q = 0
    for i in range(m):
        c = present[i]
        if col_cnt[c] < n_rows or col_min[c] != col_max[c]:
            out[q] = c
            q += 1
        col_cnt[c] = 0
    out = out[:q]
    out.sort()
    return out


@njit(cache=True, nogil=True)
def search_split(ent_col, ent_val, ent_row, y, w, counts, n_w, candidates, col_pos,
                 min_leaf, n_classes):
    """Best ``(feature, threshold, gain)`` among sorted ``candidates``; feature -1 if none.

    Thresholds are midpoints between consecutive distinct values of a
    feature inside the node, zero included. Ties (within ``GAIN_EPS``) go to
    the lowest feature index, then the lowest threshold.
    """
    n_cand = len(candidates)
    for j in range(n_cand):
        col_pos[candidates[j]] = j
    bucket_n = np.zeros(n_cand + 1, dtype=np.int64)
    for k in range(len(ent_col)):
        j = col_pos[ent_col[k]]
        if j >= 0:
            bucket_n[j + 1] += 1
    for j in range(n_cand):
        bucket_n[j + 1] += bucket_n[j]
    fill = bucket_n[:-1].copy()
    b_val = np.empty(bucket_n[n_cand], dtype=np.float64)
    b_row = np.empty(bucket_n[n_cand], dtype=np.int64)
    for k in range(len(ent_col)):
        j = col_pos[ent_col[k]]
        if j >= 0:
            b_val[fill[j]] = ent_val[k]
            b_row[fill[j]] = ent_row[k]
            fill[j] += 1
    for j in range(n_cand):
        col_pos[candidates[j]] = -1

    h_parent = entropy_bits(counts, n_w)
    best_f = -1
    best_thr = 0.0
    best_gain = -np.inf
    left = np.empty(n_classes, dtype=np.float64)
    right = np.empty(n_classes, dtype=np.float64)
    for j in range(n_cand):
        lo = bucket_n[j]
        hi = bucket_n[j + 1]
        if hi == lo:
            continue
        vals = b_val[lo:hi]
        rows = b_row[lo:hi]
        order = np.argsort(vals)
        # left starts as the zero group: parent minus rows with a nonzero count
        for c in range(n_classes):
            left[c] = counts[c]
        for t in range(hi - lo):
            r = rows[t]
            left[y[r]] -= w[r]
        n_left = 0.0
        for c in range(n_classes):
            n_left += left[c]
        prev = 0.0
        for t in range(hi - lo):
            i = order[t]
            v = vals[i]
            if n_left > 0.0 and v != prev:
                n_right = n_w - n_left
                if n_left >= min_leaf and n_right >= min_leaf:
                    for c in range(n_classes):
                        right[c] = counts[c] - left[c]
                    gain = h_parent - (n_left / n_w) * entropy_bits(left, n_left) \
                        - (n_right / n_w) * entropy_bits(right, n_right)
                    thr = (prev + v) / 2.0
                    f = candidates[j]
                    if gain > best_gain + GAIN_EPS or (
                        abs(gain - best_gain) <= GAIN_EPS
                        and (f < best_f or (f == best_f and thr < best_thr))
                    ):
                        best_gain = gain
                        best_f = f
                        best_thr = thr
            r = rows[i]
            left[y[r]] += w[r]
            n_left += w[r]
            prev = v
    if best_f < 0 or best_gain <= GAIN_EPS:
        return -1, 0.0, 0.0
    return best_f, best_thr, best_gain


@njit(cache=True, nogil=True)
def build_tree(indptr, indices, data, y, w, samples, n_features, n_classes,
               max_depth, min_samples_split, min_samples_leaf, max_features, seed):
    np.random.seed(seed)
    n_samples = len(samples)
    samples = samples.copy()
    cap = 2 * n_samples + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left_child = np.full(cap, -1, dtype=np.int64)
    right_child = np.full(cap, -1, dtype=np.int64)
    gain = np.zeros(cap, dtype=np.float64)
    value = np.zeros((cap, n_classes), dtype=np.float64)
    depth = np.zeros(cap, dtype=np.int64)

    col_cnt = np.zeros(n_features, dtype=np.int64)
    col_min = np.zeros(n_features, dtype=np.float64)
    col_max = np.zeros(n_features, dtype=np.float64)
    col_pos = np.full(n_features, -1, dtype=np.int64)
    go_right = np.zeros(len(y), dtype=np.bool_)
    buf = np.empty(n_samples, dtype=np.int64)

    # stack of (node id, start, end)
    stack = np.empty((cap, 3), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_samples
    top = 1
    n_nodes = 1
    counts = np.zeros(n_classes, dtype=np.float64)
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        counts[:] = 0.0
        for i in range(start, end):
            r = samples[i]
            counts[y[r]] += w[r]
        n_w = 0.0
        n_pure = 0
        for c in range(n_classes):
            value[node, c] = counts[c]
            n_w += counts[c]
            if counts[c] > 0.0:
                n_pure += 1
        if (n_pure <= 1 or (max_depth >= 0 and depth[node] >= max_depth)
                or n_w < min_samples_split or n_w < 2 * min_samples_leaf):
            continue

        ent_col, ent_val, ent_row = gather_entries(indptr, indices, data, samples, start, end)
        usable = splittable_columns(ent_col, ent_val, end - start, col_cnt, col_min, col_max)
        m = len(usable)
        if m == 0:
            continue
        k = min(max_features, m)
        # partial Fisher-Yates draw of k candidate features
        for i in range(k):
            jj = i + np.random.randint(0, m - i)
            tmp = usable[i]
            usable[i] = usable[jj]
            usable[jj] = tmp
        cand = usable[:k].copy()
        cand.sort()
        f, thr, g = search_split(ent_col, ent_val, ent_row, y, w, counts, n_w, cand, col_pos,
                                 min_samples_leaf, n_classes)
        if f < 0:
            continue

        for q in range(len(ent_col)):
            if ent_col[q] == f and ent_val[q] > thr:
                go_right[ent_row[q]] = True
        n_l = 0
        for i in range(start, end):
            r = samples[i]
            if not go_right[r]:
                samples[start + n_l] = r
                n_l += 1
            else:
                buf[i - start - n_l] = r
        n_r = end - start - n_l
        for i in range(n_r):
            samples[start + n_l + i] = buf[i]
            go_right[buf[i]] = False

        feature[node] = f
        threshold[node] = thr
        gain[node] = g
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left_child[node] = lc
        right_child[node] = rc
        depth[lc] = depth[node] + 1
        depth[rc] = depth[node] + 1
        # right pushed first so the left subtree is grown first
        stack[top, 0] = rc
        stack[top, 1] = start + n_l
        stack[top, 2] = end
        top += 1
        stack[top, 0] = lc
        stack[top, 1] = start
        stack[top, 2] = start + n_l
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left_child[:n_nodes].copy(),
            right_child[:n_nodes].copy(), gain[:n_nodes].copy(), value[:n_nodes].copy(),
            depth[:n_nodes].copy())


@njit(cache=True, nogil=True)
def apply_tree(indptr, indices, data, feature, threshold, left_child, right_child):
    """Leaf id reached by every CSR row (``count <= threshold`` goes left)."""
    n = len(indptr) - 1
    out = np.empty(n, dtype=np.int64)
    for r in range(n):
        lo = indptr[r]
        hi = indptr[r + 1]
        node = 0
        while left_child[node] >= 0:
            f = feature[node]
            p = lo + np.searchsorted(indices[lo:hi], f)
            v = data[p] if p < hi and indices[p] == f else 0.0
            node = left_child[node] if v <= threshold[node] else right_child[node]
        out[r] = node
    return out
