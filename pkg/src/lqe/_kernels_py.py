"""NumPy implementations of the tree kernels.

These define the semantics; ``_ckernels.pyx`` must return identical results.
"""
import numpy as np

NAME = "python"


def best_split(X, y, idx, features, n_classes, min_samples_leaf):
    """Best Gini split of the samples ``idx`` over the candidate ``features``.

    Returns ``(feature, threshold, score)`` where ``score`` is
    ``sum_c(left_c**2)/n_left + sum_c(right_c**2)/n_right``; maximising it
    minimises the weighted Gini impurity of the children.  ``feature`` is -1
    when no split leaves at least ``min_samples_leaf`` samples on each side.
    Ties keep the first feature in ``features`` and the lowest threshold.
    """
    n = idx.shape[0]
    best = (-1, 0.0, -np.inf)
    lo = min_samples_leaf - 1
    hi = n - min_samples_leaf - 1
    if n < 2 or hi < lo:
        return best
    yi = y[idx]
    for f in features:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), yi[order]] = 1.0
        lc = np.cumsum(onehot, axis=0)
        total = lc[-1]
        pos = np.arange(lo, hi + 1)
        pos = pos[vs[pos] < vs[pos + 1]]
        if pos.size == 0:
            continue
        nl = (pos + 1).astype(np.float64)
        nr = n - nl
        lsq = np.zeros(pos.size)
        rsq = np.zeros(pos.size)
        for c in range(n_classes):
            a = lc[pos, c]
            b = total[c] - a
            lsq = lsq + a * a
            rsq = rsq + b * b
        score = lsq / nl + rsq / nr
        j = int(np.argmax(score))
        if score[j] > best[2]:
            a, b = vs[pos[j]], vs[pos[j] + 1]
            thr = (a + b) * 0.5
            if thr >= b:
                thr = a
            best = (int(f), float(thr), float(score[j]))
    return best


def tree_apply(X, feature, threshold, left, right):
    """Leaf node index reached by each row of ``X``; ``left == -1`` marks leaves."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.intp)
    active = np.flatnonzero(left[node] != -1)
    while active.size:
        cur = node[active]
        go_left = X[active, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[left[node[active]] != -1]
    return node
