"""scikit-learn style estimator facades for geodesic-forest."""

from .estimators import (
    EuclideanDecisionTreeClassifier,
    EuclideanDecisionTreeRegressor,
    EuclideanRandomForestClassifier,
    EuclideanRandomForestRegressor,
    HyperbolicDecisionTreeClassifier,
    HyperbolicDecisionTreeRegressor,
    HyperbolicRandomForestClassifier,
    HyperbolicRandomForestRegressor,
    NotFittedError,
    lift_poincare,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
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
