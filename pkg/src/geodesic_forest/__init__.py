"""Decision trees and random forests for hyperboloid-model data.

Splits are homogeneous hyperplanes (geodesic submanifolds), found with
the same sorted sweep that powers euclidean CART, so training costs
O(D n log n) per node in either geometry.
"""

__version__ = "0.1.0"

from .data import Dataset, GaussianMixtureSpec, load_dataset, sample_gaussian_mixture, save_dataset
from .evaluation import (
    CVRecord,
    F1Scores,
    GeodesicBoundary,
    SweepRow,
    TTestResult,
    average_precision,
    cross_validate,
    cv_folds,
    export_boundaries,
    f1_scores,
    paired_t_test,
    scaling_sweep,
    summarize_cv,
)
from .forest import ForestConfig, ForestModel, fit_forest
from .geometry import (
    Manifold,
    OffManifoldError,
    check_points,
    exp_map,
    exp_map_origin,
    from_klein,
    from_poincare,
    geodesic_point,
    geodesic_vertex_scale,
    hyperbolic_distance,
    midpoint_angle,
    minkowski_inner,
    origin,
    parallel_transport_from_origin,
    point_angle,
    point_angles,
    project_to_sheet,
    to_klein,
    to_poincare,
)
from .serialize import dumps_model, load_model, loads_model, save_model
from .tree import (
    SplitRule,
    TreeConfig,
    TreeModel,
    TreeNode,
    best_split,
    candidate_splits,
    fit_tree,
    impurity,
    information_gain,
    split_decide,
    training_accuracy,
)

__all__ = [
    "__version__",
    "Dataset",
    "GaussianMixtureSpec",
    "load_dataset",
    "sample_gaussian_mixture",
    "save_dataset",
    "CVRecord",
    "F1Scores",
    "GeodesicBoundary",
    "SweepRow",
    "TTestResult",
    "average_precision",
    "cross_validate",
    "cv_folds",
    "export_boundaries",
    "f1_scores",
    "paired_t_test",
    "scaling_sweep",
    "summarize_cv",
    "ForestConfig",
    "ForestModel",
    "fit_forest",
    "Manifold",
    "OffManifoldError",
    "check_points",
    "exp_map",
    "exp_map_origin",
    "from_klein",
    "from_poincare",
    "geodesic_point",
    "geodesic_vertex_scale",
    "hyperbolic_distance",
    "midpoint_angle",
    "minkowski_inner",
    "origin",
    "parallel_transport_from_origin",
    "point_angle",
    "point_angles",
    "project_to_sheet",
    "to_klein",
    "to_poincare",
    "dumps_model",
    "load_model",
    "loads_model",
    "save_model",
    "SplitRule",
    "TreeConfig",
    "TreeModel",
    "TreeNode",
    "best_split",
    "candidate_splits",
    "fit_tree",
    "impurity",
    "information_gain",
    "split_decide",
    "training_accuracy",
]
