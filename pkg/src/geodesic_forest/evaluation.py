"""Benchmark harness: F1 metrics, cross-validation, paired t-tests,
runtime sweeps, and decision-boundary export for 2-d models.

Fold assignment and every generated dataset derive from named RNG
streams, so tables are reproducible row for row no matter how the work
is scheduled: result rows are ordered by (predictor, seed, fold) or by
(grid value, trial), never by completion time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from . import rng
from .data import Dataset, GaussianMixtureSpec, sample_gaussian_mixture
from .forest import ForestConfig, fit_forest
from .geometry import from_poincare, geodesic_point, to_poincare
from .tree import TreeConfig, split_decide

__all__ = [
    "F1Scores",
    "f1_scores",
    "average_precision",
    "TTestResult",
    "paired_t_test",
    "CVRecord",
    "cross_validate",
    "summarize_cv",
    "SweepRow",
    "scaling_sweep",
    "GeodesicBoundary",
    "export_boundaries",
]


# ---------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class F1Scores:
    micro: float
    macro: float


def f1_scores(y_true, y_pred, *, vocabulary=None, count_missing: bool = False) -> F1Scores:
    """Micro and macro F1 for single-label predictions.

    Micro-F1 pools all decisions and equals plain accuracy here: every
    error is one false positive and one false negative at once, so
    TP / (TP + (FP + FN)/2) collapses to TP / n.

    Macro-F1 averages per-class F1 over the vocabulary (default: union
    of observed labels). Classes absent from both y_true and y_pred are
    excluded from the average unless count_missing is set, in which
    case they contribute an F1 of 0.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have matching shapes")
    if y_true.size == 0:
        raise ValueError("cannot score an empty label set")
    if vocabulary is None:
        vocabulary = np.union1d(y_true, y_pred)
    else:
        vocabulary = np.asarray(vocabulary)

    micro = float(np.mean(y_true == y_pred))

    per_class = []
    for c in vocabulary:
        tp = int(np.sum((y_true == c) & (y_pred == c)))
        fp = int(np.sum((y_true != c) & (y_pred == c)))
        fn = int(np.sum((y_true == c) & (y_pred != c)))
        if tp + fp + fn == 0:
            if count_missing:
                per_class.append(0.0)
            continue
        per_class.append(2 * tp / (2 * tp + fp + fn))
    if not per_class:
        raise ValueError("no class present in either label set")
    return F1Scores(micro=micro, macro=float(np.mean(per_class)))


def average_precision(y_true, scores) -> float | None:
    """Area under the precision-recall curve by the step interpolation
    used for ranking metrics; None when there is no positive example."""
    y_true = np.asarray(y_true).astype(np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(y_true.sum())
    if n_pos == 0:
        return None
    order = np.argsort(-scores, kind="stable")
    hits = y_true[order]
    cum_tp = np.cumsum(hits)
    ranks = np.arange(1, len(hits) + 1)
    precision_at_hit = (cum_tp / ranks)[hits == 1]
    return float(precision_at_hit.sum() / n_pos)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    identical: bool


def paired_t_test(a, b) -> TTestResult:
    """Two-tailed paired t-test on aligned score vectors.

    Fully identical samples have no defined statistic and come back as
    the identical sentinel (reported as missing in tables). A constant
    nonzero difference has zero spread: t is +-inf and p is 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two equal-length 1-d score vectors")
    n = len(a)
    if n < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    d = a - b
    if np.all(d == 0.0):
        return TTestResult(t=float("nan"), p=float("nan"), identical=True)
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0.0:
        return TTestResult(t=float(np.sign(mean) * np.inf), p=0.0, identical=False)
    t = float(mean / (sd / np.sqrt(n)))
    df = n - 1
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(t=t, p=p, identical=False)


# ---------------------------------------------------------------------------
# Cross-validation

@dataclass(frozen=True)
class CVRecord:
    predictor: str
    seed: int
    fold: int
    micro_f1: float
    macro_f1: float
    fit_seconds: float
    predict_seconds: float
    aupr: float | None


def cv_folds(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Disjoint covering folds with sizes differing by at most one."""
    if not 2 <= k <= n:
        raise ValueError(f"fold count {k} must be in [2, {n}]")
    perm = rng.stream(seed, rng.TAG_CV_SPLIT).permutation(n)
    return np.array_split(perm, k)


def cross_validate(predictors, data: Dataset, k: int, seed: int) -> list[CVRecord]:
    """k-fold CV of several predictors on one dataset.

    predictors is a sequence of (name, factory) pairs where
    factory(train_data, model_seed) returns a fitted model exposing
    predict. Folds and per-fold model seeds are shared across all
    predictors so scores are paired; fit and predict wall-clock times
    are measured separately on a monotonic clock.
    """
    if data.classes is None:
        raise ValueError("cross_validate expects a classification dataset")
    folds = cv_folds(data.n_samples, k, seed)
    raw = data.raw_labels()
    binary = data.n_classes == 2
    records = []
    for name, factory in predictors:
        for fold_id, test_idx in enumerate(folds):
            train_idx = np.concatenate(
                [f for j, f in enumerate(folds) if j != fold_id]
            )
            model_seed = rng.derive_seed(seed, rng.TAG_FOLD_MODEL, fold_id)
            train = data.subset(train_idx)
            t0 = time.perf_counter()
            model = factory(train, model_seed)
            fit_seconds = time.perf_counter() - t0
            test_pts = data.points[test_idx]
            t0 = time.perf_counter()
            pred = model.predict(test_pts)
            predict_seconds = time.perf_counter() - t0
            scores = f1_scores(raw[test_idx], pred, vocabulary=data.classes)
            aupr = None
            if binary:
                proba = model.predict_proba(test_pts)[:, 1]
                aupr = average_precision(data.labels[test_idx] == 1, proba)
            records.append(
                CVRecord(
                    predictor=name,
                    seed=seed,
                    fold=fold_id,
                    micro_f1=scores.micro,
                    macro_f1=scores.macro,
                    fit_seconds=fit_seconds,
                    predict_seconds=predict_seconds,
                    aupr=aupr,
                )
            )
    return records


def summarize_cv(records) -> dict:
    """Aggregate CV rows into {means, stds, t_tests}.

    The t-test matrix pairs predictors on micro-F1 rows aligned by
    (seed, fold); the identical sentinel is serialized as nulls with
    identical=true.
    """
    names = []
    for r in records:
        if r.predictor not in names:
            names.append(r.predictor)
    by_name = {
        name: sorted(
            (r for r in records if r.predictor == name),
            key=lambda r: (r.seed, r.fold),
        )
        for name in names
    }
    means = {}
    stds = {}
    for name, rows in by_name.items():
        micro = np.array([r.micro_f1 for r in rows])
        macro = np.array([r.macro_f1 for r in rows])
        means[name] = {"micro_f1": float(micro.mean()), "macro_f1": float(macro.mean())}
        stds[name] = {
            "micro_f1": float(micro.std(ddof=1)) if len(micro) > 1 else 0.0,
            "macro_f1": float(macro.std(ddof=1)) if len(macro) > 1 else 0.0,
        }
    t_tests = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            keys_a = [(r.seed, r.fold) for r in by_name[a]]
            keys_b = [(r.seed, r.fold) for r in by_name[b]]
            if keys_a != keys_b:
                raise ValueError(f"rows of {a!r} and {b!r} are not aligned")
            res = paired_t_test(
                [r.micro_f1 for r in by_name[a]],
                [r.micro_f1 for r in by_name[b]],
            )
            t_tests.setdefault(a, {})[b] = {
                "t": None if res.identical else res.t,
                "p": None if res.identical else res.p,
                "identical": res.identical,
            }
    return {"means": means, "stds": stds, "t_tests": t_tests}


# ---------------------------------------------------------------------------
# Scaling sweep

SWEEP_AXES = ("n_samples", "dim", "n_trees", "max_depth")

# Desk-scale defaults: 5-class mixtures, D=2, 800 training points, a
# 12-tree depth-3 forest, 200 held-out points per trial.
_SWEEP_BASE = {"n_samples": 800, "dim": 2, "n_trees": 12, "max_depth": 3}
_SWEEP_TEST_N = 200
_SWEEP_CLASSES = 5


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: int
    trials: int
    mean_fit_seconds: float
    ci95_fit_seconds: float
    mean_micro_f1: float
    ci95_micro_f1: float


def _ci95(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / np.sqrt(len(values)))


def scaling_sweep(axis: str, grid, seed: int, *, trials: int = 20) -> list[SweepRow]:
    """Runtime/accuracy profile along one configuration axis.

    Each grid point runs `trials` independent rounds: generate a fresh
    mixture from the stream (seed, TAG_SWEEP, value, trial), train the
    forest on the first n_samples points, score micro-F1 on 200 held
    out points, and record the fit wall-clock time around the training
    call alone. Rows carry normal-approximation 95% confidence bands.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    grid = [int(v) for v in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    rows = []
    for value in grid:
        runtimes = np.empty(trials)
        micros = np.empty(trials)
        params = dict(_SWEEP_BASE)
        params[axis] = value
        for trial in range(trials):
            ds_seed = rng.derive_seed(seed, rng.TAG_SWEEP, value, trial)
            spec = GaussianMixtureSpec(
                n_classes=_SWEEP_CLASSES,
                dim=params["dim"],
                curvature=1.0,
                noise_scale=1.0,
                seed=ds_seed,
            )
            full = sample_gaussian_mixture(spec, params["n_samples"] + _SWEEP_TEST_N)
            train = full.subset(np.arange(params["n_samples"]))
            test = full.subset(np.arange(params["n_samples"], full.n_samples))
            config = ForestConfig(
                n_trees=params["n_trees"],
                tree=TreeConfig(max_depth=params["max_depth"]),
                bootstrap=True,
                seed=ds_seed,
            )
            t0 = time.perf_counter()
            model = fit_forest(train, config, jobs=1)
            runtimes[trial] = time.perf_counter() - t0
            micros[trial] = f1_scores(
                test.raw_labels(),
                model.predict(test.points),
                vocabulary=full.classes,
            ).micro
        rows.append(
            SweepRow(
                axis=axis,
                value=value,
                trials=trials,
                mean_fit_seconds=float(runtimes.mean()),
                ci95_fit_seconds=_ci95(runtimes),
                mean_micro_f1=float(micros.mean()),
                ci95_micro_f1=_ci95(micros),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Boundary export (D = 2)

@dataclass(frozen=True)
class GeodesicBoundary:
    dim: int
    angle: float
    depth: int
    region: str
    polyline: np.ndarray  # (m, 2) Poincare disk vertices


def export_boundaries(
    model, *, resolution: int = 512, arc_points: int = 1000
) -> tuple[list[GeodesicBoundary], np.ndarray]:
    """Poincare-disk geometry of a fitted 2-d model.

    For every internal node the split geodesic is sampled at arc_points
    parameters strictly inside (-10, 10), clipped to the node's active
    region by evaluating each ancestor's decision on the hyperboloid
    samples (each ancestor plane crosses the geodesic at most once, so
    the clip is a contiguous arc), and projected to the disk.

    The class grid covers [-1, 1]^2 with resolution x resolution cell
    centers in row-major order: entry [i, j] is the predicted class
    index at (x_j, y_i) with x_j = -1 + (j + 0.5) * 2/resolution, and
    -1 marks centers outside the open unit disk.
    """
    if model.manifold.kind != "hyperboloid" or model.manifold.dim != 2:
        raise ValueError("boundary export requires a 2-d hyperboloid model")
    trees = getattr(model, "trees", None)
    if trees is not None:
        raise ValueError("boundary export works on single trees, not forests")
    if model.config.task != "classification":
        raise ValueError("boundary export requires a classification model")
    curvature = model.manifold.curvature

    t = np.linspace(-10.0, 10.0, arc_points + 2)[1:-1]
    boundaries = []
    for node, depth, path in model.iter_nodes():
        if node.is_leaf:
            continue
        pts = geodesic_point(
            node.rule.param, node.rule.dim, t[:, None], 2, curvature
        )
        keep = np.ones(len(pts), dtype=bool)
        for anc_rule, side in path:
            keep &= split_decide(pts, anc_rule, "hyperboloid") == side
        polyline = to_poincare(pts[keep], curvature, validate=False)
        boundaries.append(
            GeodesicBoundary(
                dim=node.rule.dim,
                angle=float(node.rule.param),
                depth=depth,
                region="".join("LR"[side] for _, side in path),
                polyline=polyline,
            )
        )
    boundaries.sort(key=lambda b: (b.depth, b.region))

    centers = -1.0 + (np.arange(resolution) + 0.5) * 2.0 / resolution
    xg, yg = np.meshgrid(centers, centers)  # [i, j] -> (x_j, y_i)
    inside = xg * xg + yg * yg < 1.0
    grid = np.full((resolution, resolution), -1, dtype=np.int64)
    disk = np.stack([xg[inside], yg[inside]], axis=1)
    ambient = from_poincare(disk, curvature)
    pred = model.predict(ambient)
    grid[inside] = np.searchsorted(model.classes, pred)
    return boundaries, grid
