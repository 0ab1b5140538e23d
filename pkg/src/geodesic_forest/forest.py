"""Bootstrap ensembles of decision trees with deterministic parallelism.

Every member tree owns the stream (seed, TAG_TREE, i), from which it
draws its own seed first and then its bootstrap resample. Fitting with
1 process or 8 therefore builds bit-identical forests; worker count
only changes wall-clock time.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .data import Dataset
from .geometry import Manifold
from .tree import TreeConfig, TreeModel, fit_tree

__all__ = ["ForestConfig", "ForestModel", "fit_forest"]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 12
    tree: TreeConfig = field(default_factory=TreeConfig)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")


@dataclass
class ForestModel:
    trees: list
    config: ForestConfig
    manifold: Manifold
    classes: np.ndarray | None

    def predict_proba(self, points, *, hard: bool = False) -> np.ndarray:
        """Soft voting averages member probabilities; hard voting counts
        each member's argmax as one vote."""
        if self.config.tree.task != "classification":
            raise ValueError("predict_proba requires a classification forest")
        stacked = np.stack([t.predict_proba(points) for t in self.trees])
        if not hard:
            return stacked.mean(axis=0)
        votes = np.argmax(stacked, axis=2)
        width = len(self.classes)
        counts = np.stack(
            [np.bincount(votes[:, j], minlength=width) for j in range(votes.shape[1])]
        )
        return counts / len(self.trees)

    def predict(self, points, *, hard: bool = False) -> np.ndarray:
        if self.config.tree.task == "classification":
            ids = np.argmax(self.predict_proba(points, hard=hard), axis=1)
            return self.classes[ids]
        return np.mean([t.predict(points) for t in self.trees], axis=0)


def _fit_member(payload) -> TreeModel:
    data, config, i = payload
    g = rng.stream(config.seed, rng.TAG_TREE, i)
    member_seed = int(g.integers(0, 2**63 - 1))
    sub = data.subset(g.integers(0, data.n_samples, size=data.n_samples)) if config.bootstrap else data
    return fit_tree(sub, replace(config.tree, seed=member_seed))


def fit_forest(data: Dataset, config: ForestConfig, *, jobs: int = 1) -> ForestModel:
    """Fit n_trees members; results do not depend on jobs."""
    payloads = [(data, config, i) for i in range(config.n_trees)]
    if jobs > 1 and config.n_trees > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(_fit_member, payloads))
    else:
        trees = [_fit_member(p) for p in payloads]
    classes = trees[0].classes
    return ForestModel(trees=trees, config=config, manifold=data.manifold, classes=classes)
