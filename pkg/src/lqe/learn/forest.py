from __future__ import annotations

import math

import numpy as np

from ..featurize import N_CLASSES
from .tree import Tree, grow_tree, prune


class RandomForest:
    """Bagged CART trees with per-split feature subsampling and hard voting.

    Tree ``t`` draws its bootstrap sample and candidate features from a
    generator seeded with ``(seed, t)``.
    """

    kind = "rforest"

    def __init__(
        self,
        n_trees=100,
        features_per_split=None,
        bootstrap=True,
        min_samples_leaf=5,
        max_depth_cap=32,
        ccp_alpha=0.0,
        seed=0,
    ):
        self.n_trees = n_trees
        self.features_per_split = features_per_split
        self.bootstrap = bootstrap
        self.min_samples_leaf = min_samples_leaf
        self.max_depth_cap = max_depth_cap
        self.ccp_alpha = ccp_alpha
        self.seed = seed

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        n, d = X.shape
        m = self.features_per_split or math.ceil(math.sqrt(d))
        m = min(m, d)
        self.trees = []
        for t in range(self.n_trees):
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, t]))
            idx = rng.integers(0, n, n) if self.bootstrap else None
            tree = grow_tree(
                X,
                y,
                idx,
                min_samples_leaf=self.min_samples_leaf,
                max_depth=self.max_depth_cap,
                max_features=m,
                rng=rng,
            )
            self.trees.append(prune(tree, self.ccp_alpha) if self.ccp_alpha > 0 else tree)
        return self

    def predict_scores(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], N_CLASSES))
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, np.argmax(tree.predict_proba(X), axis=1)] += 1.0
        return votes / len(self.trees)

    def get_params(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    def set_params(self, p):
        self.trees = [Tree.from_dict(t) for t in p["trees"]]
        return self
