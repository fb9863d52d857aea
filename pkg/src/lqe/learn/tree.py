"""CART classification trees with Gini splits and cost-complexity pruning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..featurize import N_CLASSES


@dataclass(eq=False)
class Tree:
    """Flat binary tree; node 0 is the root and ``left == -1`` marks a leaf.

    Nodes are numbered in preorder, so children always follow their parent.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, n_classes) training class counts

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.left == -1))

    def apply(self, X, backend=None) -> np.ndarray:
        k = backend or kernels
        return k.tree_apply(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold, self.left, self.right)

    def predict_proba(self, X, backend=None) -> np.ndarray:
        c = self.counts[self.apply(X, backend)]
        return c / c.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.intp),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.intp),
            np.asarray(d["right"], dtype=np.intp),
            np.asarray(d["counts"], dtype=np.float64).reshape(-1, N_CLASSES),
        )


def grow_tree(
    X,
    y,
    idx=None,
    *,
    min_samples_leaf=5,
    max_depth=32,
    max_features=None,
    rng=None,
    backend=None,
) -> Tree:
    """Grow an unpruned tree on rows ``idx`` (repeats allowed, as in a bootstrap).

    With ``max_features`` smaller than the feature count, each split draws
    that many candidate features from ``rng`` without replacement.
    """
    k = backend or kernels
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    idx = np.arange(len(y), dtype=np.intp) if idx is None else np.asarray(idx, dtype=np.intp)
    d = X.shape[1]
    all_features = list(range(d))
    subsample = max_features is not None and max_features < d
    if min_samples_leaf < 1:
        raise ValueError("min_samples_leaf must be >= 1")

    feature, threshold, left, right, counts = [], [], [], [], []
    # (node id, rows, depth); ids follow creation order and are renumbered to preorder at the end
    new = lambda: (feature.append(-1), threshold.append(0.0), left.append(-1), right.append(-1), counts.append(None))  # noqa: E731
    new()
    stack = [(0, idx, 0)]
    while stack:
        node, rows, depth = stack.pop()
        c = np.bincount(y[rows], minlength=N_CLASSES).astype(np.float64)
        counts[node] = c
        n = rows.size
        if depth >= max_depth or n < 2 * min_samples_leaf or np.count_nonzero(c) <= 1:
            continue
        cand = sorted(rng.choice(d, size=max_features, replace=False).tolist()) if subsample else all_features
        f, thr, score = k.best_split(X, y, rows, cand, N_CLASSES, min_samples_leaf)
        if f < 0:
            continue
        parent = float(np.dot(c, c)) / n
        if score - parent <= 1e-12 * n:
            continue
        go_left = X[rows, f] <= thr
        feature[node], threshold[node] = f, thr
        li = len(left)
        new()
        ri = len(left)
        new()
        left[node], right[node] = li, ri
        stack.append((ri, rows[~go_left], depth + 1))
        stack.append((li, rows[go_left], depth + 1))
    return _renumber(
        Tree(
            np.asarray(feature, dtype=np.intp),
            np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.intp),
            np.asarray(right, dtype=np.intp),
            np.vstack(counts),
        ),
        np.zeros(len(left), dtype=bool),
    )


def _renumber(tree: Tree, collapse: np.ndarray) -> Tree:
    """Copy the tree in preorder, turning nodes flagged in ``collapse`` into leaves."""
    order = []
    stack = [0]
    while stack:
        node = stack.pop()
        order.append(node)
        if tree.left[node] != -1 and not collapse[node]:
            stack.append(tree.right[node])
            stack.append(tree.left[node])
    new_id = {old: i for i, old in enumerate(order)}
    m = len(order)
    feature = np.full(m, -1, dtype=np.intp)
    threshold = np.zeros(m)
    left = np.full(m, -1, dtype=np.intp)
    right = np.full(m, -1, dtype=np.intp)
    for i, old in enumerate(order):
        if tree.left[old] != -1 and not collapse[old]:
            feature[i] = tree.feature[old]
            threshold[i] = tree.threshold[old]
            left[i] = new_id[tree.left[old]]
            right[i] = new_id[tree.right[old]]
    return Tree(feature, threshold, left, right, tree.counts[order].copy())


def node_risk(tree: Tree) -> np.ndarray:
    """Per-node ``n_t * gini(t)``: resubstitution Gini risk in sample units."""
    n = tree.counts.sum(axis=1)
    return n - np.einsum("ij,ij->i", tree.counts, tree.counts) / n


def prune(tree: Tree, alpha: float) -> Tree:
    """Smallest subtree minimising ``R(T) + alpha * |leaves(T)|``.

    ``R`` is the sample-weighted Gini impurity of the leaves, normalised by
    the root sample count.  A bottom-up pass collapses a node whenever its
    subtree does not beat it strictly.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    risk = node_risk(tree)
    scaled = alpha * tree.counts[0].sum()
    sub_risk = risk.copy()
    leaves = np.ones(tree.n_nodes, dtype=np.int64)
    collapse = np.zeros(tree.n_nodes, dtype=bool)
    for node in range(tree.n_nodes - 1, -1, -1):
        l, r = tree.left[node], tree.right[node]
        if l == -1:
            continue
        s = sub_risk[l] + sub_risk[r]
        nl = leaves[l] + leaves[r]
        if risk[node] - s <= (nl - 1) * scaled:
            collapse[node] = True
        else:
            sub_risk[node] = s
            leaves[node] = nl
    return _renumber(tree, collapse)


def balanced_accuracy(y_true, y_pred) -> float:
    recalls = [np.mean(y_pred[y_true == c] == c) for c in np.unique(y_true)]
    return float(np.mean(recalls))


def stratified_holdout(y, fraction, rng):
    """Split indices so each class sends ``round(fraction * n_c)`` rows to validation."""
    train, val = [], []
    for c in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == c))
        n_val = int(round(fraction * members.size))
        if members.size - n_val < 1:
            n_val = members.size - 1
        val.append(members[:n_val])
        train.append(members[n_val:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def accuracy(y_true, y_pred) -> float:
    return float(np.mean(y_true == y_pred))


_SELECTION_METRICS = {"accuracy": accuracy, "balanced_accuracy": balanced_accuracy}


class DecisionTree:
    """CART grown to ``min_samples_leaf`` and pruned with a validated alpha.

    When the grid holds several alphas, each is scored by
    ``selection_metric`` on a stratified 20% holdout of the training rows
    (ties go to the larger alpha); the tree is then regrown on all rows and
    pruned with the winner.
    """

    kind = "dtree"

    def __init__(
        self,
        min_samples_leaf=5,
        max_depth_cap=32,
        ccp_alpha_grid=(0.0, 1e-5, 1e-4, 1e-3, 1e-2),
        validation_fraction=0.2,
        selection_metric="accuracy",
        seed=0,
    ):
        self.min_samples_leaf = min_samples_leaf
        self.max_depth_cap = max_depth_cap
        self.ccp_alpha_grid = tuple(sorted(ccp_alpha_grid))
        self.validation_fraction = validation_fraction
        if selection_metric not in _SELECTION_METRICS:
            raise ValueError(f"selection_metric must be one of {sorted(_SELECTION_METRICS)}")
        self.selection_metric = selection_metric
        self.seed = seed

    def _grow(self, X, y, idx=None):
        return grow_tree(X, y, idx, min_samples_leaf=self.min_samples_leaf, max_depth=self.max_depth_cap)

    def select_alpha(self, X, y):
        grid = self.ccp_alpha_grid
        if len(grid) == 1:
            return grid[0], {}
        train, val = stratified_holdout(y, self.validation_fraction, np.random.default_rng(self.seed))
        if val.size == 0:
            # too few rows to hold any out
            return grid[0], {}
        full = self._grow(X, y, train)
        scores = {}
        best_alpha, best = grid[0], -np.inf
        for a in grid:
            pred = np.argmax(prune(full, a).predict_proba(X[val]), axis=1)
            scores[a] = _SELECTION_METRICS[self.selection_metric](y[val], pred)
            if scores[a] >= best:
                best_alpha, best = a, scores[a]
        return best_alpha, scores

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        self.alpha_, self.validation_scores_ = self.select_alpha(X, y)
        tree = self._grow(X, y)
        self.tree = prune(tree, self.alpha_) if self.alpha_ > 0 else tree
        return self

    def predict_scores(self, X):
        return self.tree.predict_proba(X)

    def get_params(self):
        return {"alpha": self.alpha_, "tree": self.tree.to_dict()}

    def set_params(self, p):
        self.alpha_ = p["alpha"]
        self.tree = Tree.from_dict(p["tree"])
        return self
