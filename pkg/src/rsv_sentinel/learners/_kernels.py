"""Numba-compiled tree growth and traversal kernels.

Trees are built as flat arrays (feature/threshold/left/right indexed by
node id, pre-order numbering). Split search scans midpoints between
consecutive distinct sorted values per candidate feature.

Classification split quality is compared in exact integer arithmetic:
maximizing the weighted Gini decrease is equivalent to maximizing
Q = S_L/n_L + S_R/n_R with S the sum of squared class counts, and two
candidates are ordered by the exact cross product A1*B2 vs A2*B1 with
Q = A/B. This makes ties bit-reproducible and lets an independent
brute-force oracle agree exactly, including tie-breaks (lowest feature
index, then lowest threshold). int64 cross products bound the node size
to 10_000 samples, enforced by the callers.
"""

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True)
def grow_classification(X, y, idx0, n_classes, max_depth, min_split,
                        min_leaf, mtry, seed):
    n_total = idx0.shape[0]
    p = X.shape[1]
    if mtry < p:
        np.random.seed(seed)

    max_nodes = 2 * n_total + 1
    feature = np.full(max_nodes, LEAF, dtype=np.int64)
    threshold = np.full(max_nodes, np.nan)
    left = np.full(max_nodes, LEAF, dtype=np.int64)
    right = np.full(max_nodes, LEAF, dtype=np.int64)
    n_node = np.zeros(max_nodes, dtype=np.int64)
    counts = np.zeros((max_nodes, n_classes), dtype=np.int64)
    gain = np.zeros(max_nodes)

    idx = idx0.copy()
    stack = np.empty((max_nodes + 1, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = n_total
    stack[0, 2] = 0
    stack[0, 3] = 0
    top = 1
    node_count = 1

    vals = np.empty(n_total)
    buf = np.empty(n_total, dtype=np.int64)
    pool = np.empty(p, dtype=np.int64)
    cand = np.empty(p, dtype=np.int64)
    left_counts = np.empty(n_classes, dtype=np.int64)

    while top > 0:
        top -= 1
        s = stack[top, 0]
        e = stack[top, 1]
        depth = stack[top, 2]
        node = stack[top, 3]
        m = e - s

        for k in range(n_classes):
            counts[node, k] = 0
        for i in range(s, e):
            counts[node, y[idx[i]]] += 1
        n_node[node] = m

        present = 0
        for k in range(n_classes):
            if counts[node, k] > 0:
                present += 1
        if (depth >= max_depth or m < min_split or present <= 1
                or m < 2 * min_leaf):
            continue

        if mtry >= p:
            n_cand = p
            for j in range(p):
                cand[j] = j
        else:
            for j in range(p):
                pool[j] = j
            for j in range(mtry):
                r = np.random.randint(j, p)
                tmp = pool[j]
                pool[j] = pool[r]
                pool[r] = tmp
            n_cand = mtry
            for j in range(mtry):
                cand[j] = pool[j]
            cand[:mtry].sort()

        S_parent = np.int64(0)
        for k in range(n_classes):
            S_parent += counts[node, k] * counts[node, k]

        best_A = np.int64(-1)
        best_B = np.int64(0)
        best_feat = -1
        best_thr = 0.0
        for cj in range(n_cand):
            f = cand[cj]
            for i in range(m):
                vals[i] = X[idx[s + i], f]
            order = np.argsort(vals[:m])
            for k in range(n_classes):
                left_counts[k] = 0
            for pos in range(m - 1):
                left_counts[y[idx[s + order[pos]]]] += 1
                nL = pos + 1
                nR = m - nL
                if nL < min_leaf or nR < min_leaf:
                    continue
                v_lo = vals[order[pos]]
                v_hi = vals[order[pos + 1]]
                if v_lo == v_hi:
                    continue
                S_L = np.int64(0)
                S_R = np.int64(0)
                for k in range(n_classes):
                    cL = left_counts[k]
                    cR = counts[node, k] - cL
                    S_L += cL * cL
                    S_R += cR * cR
                A = S_L * nR + S_R * nL
                B = np.int64(nL) * np.int64(nR)
                if A * best_B > best_A * B:
                    thr = (v_lo + v_hi) * 0.5
                    if thr <= v_lo:
                        thr = v_hi  # adjacent floats: keep the split real
                    best_A = A
                    best_B = B
                    best_feat = f
                    best_thr = thr
        if best_feat < 0:
            continue
        if best_A * m <= S_parent * best_B:  # no positive impurity decrease
            continue

        nL = 0
        for i in range(s, e):
            if X[idx[i], best_feat] < best_thr:
                buf[nL] = idx[i]
                nL += 1
        nR = nL
        for i in range(s, e):
            if not (X[idx[i], best_feat] < best_thr):
                buf[nR] = idx[i]
                nR += 1
        for i in range(m):
            idx[s + i] = buf[i]

        # total Gini decrease in sample units: Q_best - S_parent/m
        gain[node] = best_A / best_B - S_parent / m
        feature[node] = best_feat
        threshold[node] = best_thr
        lid = node_count
        rid = node_count + 1
        node_count += 2
        left[node] = lid
        right[node] = rid
        stack[top, 0] = s + nL
        stack[top, 1] = e
        stack[top, 2] = depth + 1
        stack[top, 3] = rid
        top += 1
        stack[top, 0] = s
        stack[top, 1] = s + nL
        stack[top, 2] = depth + 1
        stack[top, 3] = lid
        top += 1

    return (feature[:node_count], threshold[:node_count], left[:node_count],
            right[:node_count], n_node[:node_count],
            counts[:node_count], gain[:node_count])


@njit(cache=True)
def grow_regression(X, r, w, order_all, max_depth, min_split, min_leaf):
    """Variance-reduction regression tree over residuals `r`.

    Boosting refits shallow trees on the same X every stage, so the
    per-feature sort orders are precomputed once per fit (`order_all`,
    shape (p, n)) and each tree level is built in one O(n) sweep per
    feature. Nodes are numbered breadth-first (children follow parents).

    `w` carries the per-sample curvature term used for leaf values; the
    kernel only accumulates its per-node sums. Split quality is the SSE
    decrease, compared in float64 with first-best tie-breaking in scan
    order (ascending feature, ascending threshold).
    """
    n, p = X.shape

    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, LEAF, dtype=np.int64)
    threshold = np.full(max_nodes, np.nan)
    left = np.full(max_nodes, LEAF, dtype=np.int64)
    right = np.full(max_nodes, LEAF, dtype=np.int64)
    n_node = np.zeros(max_nodes, dtype=np.int64)
    sum_r = np.zeros(max_nodes)
    sum_w = np.zeros(max_nodes)
    gain = np.zeros(max_nodes)

    node_of = np.zeros(n, dtype=np.int64)
    n_node[0] = n
    for i in range(n):
        sum_r[0] += r[i]
        sum_w[0] += w[i]
    node_count = 1

    best_gain = np.zeros(max_nodes)
    best_feat = np.full(max_nodes, LEAF, dtype=np.int64)
    best_thr = np.zeros(max_nodes)
    left_sum = np.zeros(max_nodes)
    left_cnt = np.zeros(max_nodes, dtype=np.int64)
    last_val = np.zeros(max_nodes)
    splittable = np.zeros(max_nodes, dtype=np.uint8)

    level_start = 0
    level_end = 1
    for _depth in range(max_depth):
        any_candidate = False
        for nd in range(level_start, level_end):
            m = n_node[nd]
            ok = m >= min_split and m >= 2 * min_leaf
            splittable[nd] = 1 if ok else 0
            best_gain[nd] = 1e-12
            best_feat[nd] = LEAF
            if ok:
                any_candidate = True
        if not any_candidate:
            break

        for f in range(p):
            for nd in range(level_start, level_end):
                left_sum[nd] = 0.0
                left_cnt[nd] = 0
            for ii in range(n):
                s = order_all[f, ii]
                nd = node_of[s]
                if nd < level_start or splittable[nd] == 0:
                    continue
                v = X[s, f]
                c = left_cnt[nd]
                if c > 0 and v != last_val[nd]:
                    m = n_node[nd]
                    nR = m - c
                    if c >= min_leaf and nR >= min_leaf:
                        ls = left_sum[nd]
                        rs = sum_r[nd] - ls
                        g = (ls * ls / c + rs * rs / nR
                             - sum_r[nd] * sum_r[nd] / m)
                        if g > best_gain[nd]:
                            thr = (last_val[nd] + v) * 0.5
                            if thr <= last_val[nd]:
                                thr = v  # adjacent floats: keep the split real
                            best_gain[nd] = g
                            best_feat[nd] = f
                            best_thr[nd] = thr
                left_sum[nd] += r[s]
                left_cnt[nd] = c + 1
                last_val[nd] = v

        new_start = node_count
        for nd in range(level_start, level_end):
            if best_feat[nd] >= 0:
                feature[nd] = best_feat[nd]
                threshold[nd] = best_thr[nd]
                gain[nd] = best_gain[nd]
                left[nd] = node_count
                right[nd] = node_count + 1
                node_count += 2
        if node_count == new_start:
            break
        for i in range(n):
            nd = node_of[i]
            if nd >= level_start and feature[nd] >= 0:
                if X[i, feature[nd]] < threshold[nd]:
                    child = left[nd]
                else:
                    child = right[nd]
                node_of[i] = child
                n_node[child] += 1
                sum_r[child] += r[i]
                sum_w[child] += w[i]
        level_start = new_start
        level_end = node_count

    return (feature[:node_count], threshold[:node_count], left[:node_count],
            right[:node_count], n_node[:node_count],
            sum_r[:node_count], sum_w[:node_count], gain[:node_count])


@njit(cache=True)
def predict_leaf(feature, threshold, left, right, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out
