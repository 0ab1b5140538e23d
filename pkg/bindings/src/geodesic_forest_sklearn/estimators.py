"""Estimator facades over geodesic-forest.

Each class follows scikit-learn API conventions: the constructor only
stores its keyword arguments, get_params/set_params expose exactly
those arguments, fit returns self and hangs learned state off
underscore-suffixed attributes, and predicting before fit raises
NotFittedError. All numeric work is delegated to the core package;
arrays pass through as float64 with no copies beyond validation.

Inputs are hyperboloid ambient coordinates, one row per point,
(x0, x1, ..., xD) with x0 > 0. Use lift_poincare to bring Poincare
disk coordinates onto the sheet first. The Euclidean variants treat
the columns as plain features and skip the manifold check.
"""

from __future__ import annotations

import inspect

import numpy as np

from geodesic_forest import (
    Dataset,
    ForestConfig,
    Manifold,
    TreeConfig,
    check_points,
    fit_forest,
    fit_tree,
    from_poincare,
)

__all__ = [
    "NotFittedError",
    "lift_poincare",
    "HyperbolicDecisionTreeClassifier",
    "HyperbolicDecisionTreeRegressor",
    "HyperbolicRandomForestClassifier",
    "HyperbolicRandomForestRegressor",
    "EuclideanDecisionTreeClassifier",
    "EuclideanDecisionTreeRegressor",
    "EuclideanRandomForestClassifier",
    "EuclideanRandomForestRegressor",
]


class NotFittedError(ValueError, AttributeError):
    """Raised when predict/score is called before fit.

    Inherits from both ValueError and AttributeError, mirroring the
    exception hierarchy scikit-learn uses for the same condition.
    """


def lift_poincare(X, curvature: float = 1.0) -> np.ndarray:
    """Map Poincare-disk rows (n, D) to hyperboloid rows (n, D+1)."""
    return from_poincare(np.asarray(X, dtype=np.float64), curvature)


class _Facade:
    """Parameter bookkeeping and array checks shared by all estimators."""

    _geometry = "hyperboloid"
    _task = "classification"
    _ensemble = False

    @classmethod
    def _param_names(cls):
        signature = inspect.signature(cls.__init__)
        return sorted(name for name in signature.parameters if name != "self")

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = self._param_names()
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"unknown parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters: {valid}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    # -- input handling -----------------------------------------------

    def _validate_X(self, X, *, fitting: bool) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if not fitting and X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, this estimator was fit with "
                f"{self.n_features_in_}"
            )
        if self._geometry == "hyperboloid":
            if X.shape[1] < 2:
                raise ValueError("hyperboloid rows need at least 2 columns")
            check_points(X, self.curvature)
        return X

    def _dataset(self, X: np.ndarray, y) -> Dataset:
        y = np.asarray(y)
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError("y must be 1-d with one entry per row of X")
        if self._geometry == "hyperboloid":
            manifold = Manifold.hyperboloid(X.shape[1] - 1, self.curvature)
        else:
            manifold = Manifold.euclidean(X.shape[1])
        if self._task == "classification":
            classes = np.unique(y)
            labels = np.searchsorted(classes, y)
        else:
            classes = None
            labels = y.astype(np.float64)
        return Dataset(points=X, labels=labels, manifold=manifold, classes=classes)

    def _tree_config(self) -> TreeConfig:
        classify = self._task == "classification"
        return TreeConfig(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            min_samples_split=self.min_samples_split,
            impurity=self.impurity if classify else "mse",
            task=self._task,
            midpoint_mode=getattr(self, "midpoint_mode", "geodesic"),
            seed=self.seed,
            max_features=self.max_features,
        )

    # -- estimator surface --------------------------------------------

    def fit(self, X, y):
        X = self._validate_X(X, fitting=True)
        data = self._dataset(X, y)
        if self._ensemble:
            config = ForestConfig(
                n_trees=self.n_trees,
                tree=self._tree_config(),
                bootstrap=self.bootstrap,
                seed=self.seed,
            )
            self.model_ = fit_forest(data, config, jobs=max(1, int(self.n_jobs)))
        else:
            self.model_ = fit_tree(data, self._tree_config())
        if self._task == "classification":
            self.classes_ = data.classes
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(
                f"this {type(self).__name__} is not fitted yet; call fit first"
            )

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return self.model_.predict(self._validate_X(X, fitting=False))


class _ClassifierFacade(_Facade):
    def predict_proba(self, X) -> np.ndarray:
        """Per-class probabilities, columns ordered like classes_."""
        self._check_fitted()
        return self.model_.predict_proba(self._validate_X(X, fitting=False))

    def score(self, X, y) -> float:
        """Micro-averaged F1, which for single-label output is accuracy."""
        return float(np.mean(self.predict(X) == np.asarray(y)))


class _RegressorFacade(_Facade):
    _task = "regression"

    def score(self, X, y) -> float:
        """Coefficient of determination of the predictions."""
        y = np.asarray(y, dtype=np.float64)
        residual = y - self.predict(X)
        total = y - y.mean()
        return 1.0 - float(np.sum(residual**2)) / float(np.sum(total**2))


class HyperbolicDecisionTreeClassifier(_ClassifierFacade):
    """Single decision tree with geodesic split boundaries."""

    def __init__(self, *, max_depth=3, min_samples_leaf=1, min_samples_split=2,
                 impurity="gini", midpoint_mode="geodesic", seed=0,
                 max_features=None, curvature=1.0):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.impurity = impurity
        self.midpoint_mode = midpoint_mode
        self.seed = seed
        self.max_features = max_features
        self.curvature = curvature


class HyperbolicDecisionTreeRegressor(_RegressorFacade):
    """Single regression tree with geodesic split boundaries."""

    def __init__(self, *, max_depth=3, min_samples_leaf=1, min_samples_split=2,
                 midpoint_mode="geodesic", seed=0, max_features=None,
                 curvature=1.0):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.midpoint_mode = midpoint_mode
        self.seed = seed
        self.max_features = max_features
        self.curvature = curvature


class HyperbolicRandomForestClassifier(_ClassifierFacade):
    """Bootstrap ensemble of geodesic-split trees with soft voting."""

    _ensemble = True

    def __init__(self, *, n_trees=12, max_depth=3, min_samples_leaf=1,
                 min_samples_split=2, impurity="gini",
                 midpoint_mode="geodesic", bootstrap=True, seed=0,
                 max_features=None, curvature=1.0, n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.impurity = impurity
        self.midpoint_mode = midpoint_mode
        self.bootstrap = bootstrap
        self.seed = seed
        self.max_features = max_features
        self.curvature = curvature
        self.n_jobs = n_jobs


class HyperbolicRandomForestRegressor(_RegressorFacade):
    """Bootstrap ensemble of geodesic-split regression trees."""

    _ensemble = True

    def __init__(self, *, n_trees=12, max_depth=3, min_samples_leaf=1,
                 min_samples_split=2, midpoint_mode="geodesic",
                 bootstrap=True, seed=0, max_features=None, curvature=1.0,
                 n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.midpoint_mode = midpoint_mode
        self.bootstrap = bootstrap
        self.seed = seed
        self.max_features = max_features
        self.curvature = curvature
        self.n_jobs = n_jobs


class EuclideanDecisionTreeClassifier(_ClassifierFacade):
    """Axis-parallel CART baseline on raw feature columns."""

    _geometry = "euclidean"

    def __init__(self, *, max_depth=3, min_samples_leaf=1, min_samples_split=2,
                 impurity="gini", seed=0, max_features=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.impurity = impurity
        self.seed = seed
        self.max_features = max_features


class EuclideanDecisionTreeRegressor(_RegressorFacade):
    """Axis-parallel regression tree on raw feature columns."""

    _geometry = "euclidean"

    def __init__(self, *, max_depth=3, min_samples_leaf=1, min_samples_split=2,
                 seed=0, max_features=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.seed = seed
        self.max_features = max_features


class EuclideanRandomForestClassifier(_ClassifierFacade):
    """Bootstrap ensemble of axis-parallel trees with soft voting."""

    _geometry = "euclidean"
    _ensemble = True

    def __init__(self, *, n_trees=12, max_depth=3, min_samples_leaf=1,
                 min_samples_split=2, impurity="gini", bootstrap=True,
                 seed=0, max_features=None, n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.impurity = impurity
        self.bootstrap = bootstrap
        self.seed = seed
        self.max_features = max_features
        self.n_jobs = n_jobs


class EuclideanRandomForestRegressor(_RegressorFacade):
    """Bootstrap ensemble of axis-parallel regression trees."""

    _geometry = "euclidean"
    _ensemble = True

    def __init__(self, *, n_trees=12, max_depth=3, min_samples_leaf=1,
                 min_samples_split=2, bootstrap=True, seed=0,
                 max_features=None, n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.bootstrap = bootstrap
        self.seed = seed
        self.max_features = max_features
        self.n_jobs = n_jobs
