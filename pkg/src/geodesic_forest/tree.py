"""Greedy decision trees with hyperbolic or euclidean split rules.

A hyperboloid split is a homogeneous hyperplane spanned by all axes but
one spacelike axis d, rotated by an angle theta in (pi/4, 3pi/4); the
decision is the sign of sin(theta) x_d - cos(theta) x_0. Each training
point contributes one plane angle per axis, so candidate boundaries are
midpoints between consecutive distinct angles exactly as in the
euclidean sweep, and training stays O(D n log n) per node.

The gain computations are shared between the vectorized sweep and the
scalar public operations so that identical counts give bit-identical
gains on every path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .geometry import Manifold, midpoint_angle, point_angles

__all__ = [
    "SplitRule",
    "TreeNode",
    "TreeConfig",
    "TreeModel",
    "impurity",
    "information_gain",
    "split_decide",
    "candidate_splits",
    "best_split",
    "fit_tree",
]

IMPURITIES = ("gini", "entropy", "mse")
MIDPOINT_MODES = ("geodesic", "naive")
TASKS = ("classification", "regression")

# Gains within this tolerance of the maximum are considered tied; ties
# resolve to the lowest dimension, then the smallest parameter.
GAIN_TIE_TOL = 1e-12


@dataclass(frozen=True)
class SplitRule:
    """One decision boundary: axis index and threshold/angle parameter."""

    dim: int
    param: float


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 3
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    impurity: str = "gini"
    task: str = "classification"
    midpoint_mode: str = "geodesic"
    seed: int = 0
    max_features: int | None = None

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.impurity not in IMPURITIES:
            raise ValueError(f"impurity must be one of {IMPURITIES}")
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.midpoint_mode not in MIDPOINT_MODES:
            raise ValueError(f"midpoint_mode must be one of {MIDPOINT_MODES}")
        if (self.task == "regression") != (self.impurity == "mse"):
            raise ValueError("mse impurity pairs with the regression task only")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1 when set")


@dataclass
class TreeNode:
    """Internal node (rule set) or leaf (probs or value set)."""

    rule: SplitRule | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    probs: np.ndarray | None = None
    value: float | None = None
    n_train: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.rule is None


@dataclass
class TreeModel:
    root: TreeNode
    config: TreeConfig
    manifold: Manifold
    classes: np.ndarray | None

    def predict_proba(self, points) -> np.ndarray:
        if self.config.task != "classification":
            raise ValueError("predict_proba requires a classification model")
        points = np.asarray(points, dtype=np.float64)
        out = np.empty((len(points), len(self.classes)), dtype=np.float64)
        _route(self.root, points, np.arange(len(points)), self.manifold.kind, out)
        return out

    def predict(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if self.config.task == "classification":
            ids = np.argmax(self.predict_proba(points), axis=1)
            return self.classes[ids]
        out = np.empty(len(points), dtype=np.float64)
        _route(self.root, points, np.arange(len(points)), self.manifold.kind, out)
        return out

    def depth(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 1
            return walk(node.left) + walk(node.right)

        return walk(self.root)

    def iter_nodes(self):
        """Yield (node, depth, path) with path the ancestor rule/side list."""
        stack = [(self.root, 0, ())]
        while stack:
            node, depth, path = stack.pop()
            yield node, depth, path
            if not node.is_leaf:
                stack.append((node.right, depth + 1, path + ((node.rule, 1),)))
                stack.append((node.left, depth + 1, path + ((node.rule, 0),)))


def _route(node, points, idx, kind, out):
    if node.is_leaf:
        out[idx] = node.probs if node.probs is not None else node.value
        return
    if idx.size == 0:
        return
    side = split_decide(points[idx], node.rule, kind)
    _route(node.left, points, idx[side == 0], kind, out)
    _route(node.right, points, idx[side == 1], kind, out)


# ---------------------------------------------------------------------------
# Impurity and gain. Counts enter as int64 arrays of a fixed class width
# so the scalar and vectorized paths run identical elementwise ops.

def _impurity_from_counts(counts: np.ndarray, kind: str):
    n = counts.sum(axis=-1).astype(np.float64)
    p = counts / n[..., None]
    if kind == "gini":
        return 1.0 - np.sum(p * p, axis=-1)
    if kind == "entropy":
        safe = np.where(counts > 0, p, 1.0)
        return -np.sum(np.where(counts > 0, p * np.log2(safe), 0.0), axis=-1)
    raise ValueError(f"no count-based impurity named {kind!r}")


def _gain_from_counts(parent, left, right, kind):
    # Subtraction order is part of the contract: the left term comes off
    # first so every caller reproduces the same rounding.
    n = parent.sum(axis=-1).astype(np.float64)
    nl = left.sum(axis=-1).astype(np.float64)
    nr = right.sum(axis=-1).astype(np.float64)
    gain = _impurity_from_counts(parent, kind) - (nl / n) * _impurity_from_counts(
        left, kind
    )
    return gain - (nr / n) * _impurity_from_counts(right, kind)


def impurity(values, kind: str) -> float:
    """Impurity of one label/target set: gini, entropy (bits), or mse."""
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("impurity of an empty set is undefined")
    if kind == "mse":
        values = values.astype(np.float64)
        return float(np.mean((values - values.mean()) ** 2))
    if kind not in IMPURITIES:
        raise ValueError(f"impurity must be one of {IMPURITIES}")
    labels = values.astype(np.int64)
    counts = np.bincount(labels, minlength=int(labels.max()) + 1)
    return float(_impurity_from_counts(counts, kind))


def information_gain(parent, left, right, kind: str) -> float:
    """Impurity decrease of a split: C(parent) - f0 C(left) - f1 C(right)."""
    parent = np.asarray(parent)
    left = np.asarray(left)
    right = np.asarray(right)
    if left.size == 0 or right.size == 0:
        raise ValueError("information gain needs two nonempty children")
    if left.size + right.size != parent.size:
        raise ValueError("children must partition the parent")
    if kind == "mse":
        n = float(parent.size)
        gain = impurity(parent, kind) - (left.size / n) * impurity(left, kind)
        return float(gain - (right.size / n) * impurity(right, kind))
    width = int(parent.max()) + 1
    pc = np.bincount(parent.astype(np.int64), minlength=width)
    lc = np.bincount(left.astype(np.int64), minlength=width)
    rc = np.bincount(right.astype(np.int64), minlength=width)
    return float(_gain_from_counts(pc, lc, rc, kind))


# ---------------------------------------------------------------------------
# Decisions and candidates

def split_decide(x, rule: SplitRule, geometry_kind: str):
    """Evaluate the split side for one point or a batch: 0 left, 1 right.

    hyperboloid: 1 iff sin(theta) x_d - cos(theta) x_0 > 0. The point
    angle atan2(x_0, x_d) is below theta exactly on side 1, and a point
    lying on the plane itself goes left. euclidean: 1 iff x_d > param.
    Constant cost per point; no dense normal vector is formed.
    """
    x = np.asarray(x, dtype=np.float64)
    ncols = x.shape[-1]
    if geometry_kind == "hyperboloid":
        if not 1 <= rule.dim <= ncols - 1:
            raise ValueError(f"split axis {rule.dim} out of range 1..{ncols - 1}")
        s = np.sin(rule.param) * x[..., rule.dim] - np.cos(rule.param) * x[..., 0]
        out = (s > 0).astype(np.int64)
    elif geometry_kind == "euclidean":
        if not 0 <= rule.dim <= ncols - 1:
            raise ValueError(f"split axis {rule.dim} out of range 0..{ncols - 1}")
        out = (x[..., rule.dim] > rule.param).astype(np.int64)
    else:
        raise ValueError(f"unknown geometry kind {geometry_kind!r}")
    return int(out) if out.ndim == 0 else out


def _feature_values(points: np.ndarray, manifold: Manifold) -> tuple[np.ndarray, np.ndarray]:
    """Per-point feature matrix and the split axis index of each column."""
    if manifold.kind == "hyperboloid":
        return point_angles(points), np.arange(1, manifold.dim + 1)
    return points, np.arange(points.shape[1])


def _candidate_params(sorted_vals: np.ndarray, geodesic: bool):
    """Midpoints between consecutive distinct sorted values.

    Returns (params, prefix_sizes, valid): prefix_sizes[j] counts the
    points at or below the lower value of pair j, and valid masks out
    pairs so close that the midpoint failed to land strictly between
    them (adjacent floats).
    """
    n = len(sorted_vals)
    if n < 2:
        empty = np.empty(0)
        return empty, np.empty(0, dtype=np.int64), np.empty(0, dtype=bool)
    boundary = np.flatnonzero(sorted_vals[:-1] != sorted_vals[1:])
    a = sorted_vals[boundary]
    b = sorted_vals[boundary + 1]
    params = midpoint_angle(a, b) if geodesic else 0.5 * (a + b)
    valid = (params > a) & (params < b)
    return params, boundary + 1, valid


def candidate_splits(data: Dataset, d: int, config: TreeConfig) -> list[SplitRule]:
    """All candidate rules for one axis, ordered by parameter."""
    feats, dims = _feature_values(data.points, data.manifold)
    col = np.flatnonzero(dims == d)
    if col.size == 0:
        raise ValueError(f"axis {d} is not a valid split axis for this geometry")
    vals = np.sort(feats[:, col[0]])
    geodesic = (
        data.manifold.kind == "hyperboloid" and config.midpoint_mode == "geodesic"
    )
    params, _, valid = _candidate_params(vals, geodesic)
    return [SplitRule(d, float(p)) for p in params[valid]]


def best_split(data: Dataset, config: TreeConfig, *, dims=None):
    """Highest-gain rule over all axes, or None when nothing clears zero.

    Sorting each axis once and sweeping class counts across the sorted
    order gives every candidate's gain in one vectorized pass. Gains
    tied within GAIN_TIE_TOL of the maximum resolve to the lowest axis,
    then the smallest parameter. Candidates leaving a child below
    min_samples_leaf are discarded.
    """
    points = data.points
    n = len(points)
    if n < config.min_samples_split:
        return None
    feats, all_dims = _feature_values(points, data.manifold)
    if dims is None:
        use = np.arange(len(all_dims))
    else:
        wanted = set(int(d) for d in dims)
        use = np.array([i for i, d in enumerate(all_dims) if int(d) in wanted], dtype=int)

    classification = config.task == "classification"
    if classification:
        y = data.labels.astype(np.int64)
        width = data.n_classes if data.classes is not None else int(y.max()) + 1
        total = np.bincount(y, minlength=width)
    else:
        y = data.raw_labels().astype(np.float64)

    geodesic = (
        data.manifold.kind == "hyperboloid" and config.midpoint_mode == "geodesic"
    )
    prefix_is_right = data.manifold.kind == "hyperboloid"

    per_dim = []
    best_gain = -np.inf
    for i in use:
        vals = feats[:, i]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        params, prefix_n, valid = _candidate_params(sv, geodesic)
        if len(params) == 0:
            continue
        ys = y[order]
        if classification:
            onehot = np.zeros((n, width), dtype=np.int64)
            onehot[np.arange(n), ys] = 1
            prefix_counts = np.cumsum(onehot, axis=0)[prefix_n - 1]
            if prefix_is_right:
                left_c = total - prefix_counts
                right_c = prefix_counts
            else:
                left_c = prefix_counts
                right_c = total - prefix_counts
            nl = left_c.sum(axis=1)
            nr = right_c.sum(axis=1)
            gains = _gain_from_counts(total, left_c, right_c, config.impurity)
        else:
            s1 = np.cumsum(ys)[prefix_n - 1]
            s2 = np.cumsum(ys * ys)[prefix_n - 1]
            t1 = ys.sum()
            t2 = (ys * ys).sum()
            npre = prefix_n.astype(np.float64)
            if prefix_is_right:
                nl_f, nr_f = n - npre, npre
                l1, l2 = t1 - s1, t2 - s2
                r1, r2 = s1, s2
            else:
                nl_f, nr_f = npre, n - npre
                l1, l2 = s1, s2
                r1, r2 = t1 - s1, t2 - s2
            ml = np.maximum(l2 / nl_f - (l1 / nl_f) ** 2, 0.0)
            mr = np.maximum(r2 / nr_f - (r1 / nr_f) ** 2, 0.0)
            mp = max(t2 / n - (t1 / n) ** 2, 0.0)
            gains = mp - (nl_f / n) * ml
            gains = gains - (nr_f / n) * mr
            nl, nr = nl_f, nr_f
        ok = valid & (nl >= config.min_samples_leaf) & (nr >= config.min_samples_leaf)
        if not np.any(ok):
            continue
        gains = np.where(ok, gains, -np.inf)
        per_dim.append((int(all_dims[i]), params, gains))
        dim_max = float(np.max(gains))
        if dim_max > best_gain:
            best_gain = dim_max

    if not per_dim or best_gain <= 0.0:
        return None
    # Candidate params are strictly increasing within an axis, so the
    # first qualifying lane in (axis, param) scan order is the winner.
    for dim, params, gains in per_dim:
        hit = np.flatnonzero(gains >= best_gain - GAIN_TIE_TOL)
        if hit.size:
            j = int(hit[0])
            return SplitRule(dim, float(params[j])), float(gains[j])
    raise AssertionError("unreachable: a qualifying lane must exist")


# ---------------------------------------------------------------------------
# Fitting

def fit_tree(data: Dataset, config: TreeConfig) -> TreeModel:
    """Grow a tree by greedy gain maximization.

    Recursion stops at max_depth, on pure nodes, under
    min_samples_split, or when no candidate has positive gain.
    """
    if len(data.points) == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    if not np.all(np.isfinite(data.points)):
        raise ValueError("dataset coordinates must be finite")
    classification = config.task == "classification"
    if classification:
        if data.classes is None:
            raise ValueError("classification needs an integer class vocabulary")
        classes = np.asarray(data.classes)
        y = data.labels.astype(np.int64)
        width = len(classes)
    else:
        classes = None
        y = data.raw_labels().astype(np.float64)
        width = 0

    g = None
    feat_dims = None
    if config.max_features is not None:
        from . import rng as _rng

        g = _rng.stream(config.seed, 0)
        _, feat_dims = _feature_values(data.points[:1], data.manifold)

    def make_leaf(idx) -> TreeNode:
        if classification:
            counts = np.bincount(y[idx], minlength=width)
            return TreeNode(probs=counts / counts.sum(), n_train=len(idx))
        return TreeNode(value=float(np.mean(y[idx])), n_train=len(idx))

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        node_y = y[idx]
        if (
            depth >= config.max_depth
            or len(idx) < config.min_samples_split
            or np.all(node_y == node_y[0])
        ):
            return make_leaf(idx)
        sub = data.subset(idx)
        dims = None
        if g is not None and config.max_features < len(feat_dims):
            dims = sorted(
                g.choice(feat_dims, size=config.max_features, replace=False).tolist()
            )
        found = best_split(sub, config, dims=dims)
        if found is None:
            return make_leaf(idx)
        rule, _ = found
        side = split_decide(data.points[idx], rule, data.manifold.kind)
        left_idx = idx[side == 0]
        right_idx = idx[side == 1]
        if len(left_idx) == 0 or len(right_idx) == 0:
            # Degenerate rounding near a boundary; refuse the split.
            return make_leaf(idx)
        return TreeNode(
            rule=rule,
            left=grow(left_idx, depth + 1),
            right=grow(right_idx, depth + 1),
            n_train=len(idx),
        )

    root = grow(np.arange(len(data.points)), 0)
    return TreeModel(root=root, config=config, manifold=data.manifold, classes=classes)


def training_accuracy(model: TreeModel, data: Dataset) -> float:
    pred = model.predict(data.points)
    if model.config.task == "classification":
        return float(np.mean(pred == data.raw_labels()))
    raise ValueError("training accuracy is a classification metric")
