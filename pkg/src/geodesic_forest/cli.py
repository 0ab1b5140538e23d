"""Command-line entry point: geodesic-forest <command> [flags].

Every command that writes an output file also writes a manifest beside
it (<out>.manifest.json) recording the resolved arguments, seeds, and
input/output paths, so runs can be reproduced from the artifact alone.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .data import (
    COORD_KINDS,
    Dataset,
    GaussianMixtureSpec,
    load_dataset,
    sample_gaussian_mixture,
    save_dataset,
)
from .evaluation import (
    SWEEP_AXES,
    cross_validate,
    export_boundaries,
    scaling_sweep,
    summarize_cv,
)
from .forest import ForestConfig, ForestModel, fit_forest
from .geometry import Manifold, to_klein, to_poincare
from .serialize import load_model, save_model
from .tree import TreeConfig, fit_tree, training_accuracy

PREDICTOR_SPECS = (
    "hyperboloid-tree",
    "euclidean-tree",
    "hyperboloid-forest",
    "euclidean-forest",
)


def _resolve_jobs(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("GEODESIC_FOREST_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _write_manifest(out_path: str, command: str, args: argparse.Namespace,
                    *, inputs, outputs, extra=None) -> None:
    arguments = {
        k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None
    }
    doc = {
        "command": command,
        "arguments": arguments,
        "seeds": {"seed": getattr(args, "seed", None)},
        "inputs": list(inputs),
        "outputs": list(outputs),
        "version": __version__,
        "started_at": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        doc.update(extra)
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _euclidean_view(data: Dataset) -> Dataset:
    """Baseline view: ambient coordinates treated as plain features."""
    return Dataset(
        data.points, data.labels, Manifold.euclidean(data.points.shape[1]), data.classes
    )


# ---------------------------------------------------------------------------
# Commands

def cmd_generate(args) -> int:
    spec = GaussianMixtureSpec(
        n_classes=args.classes,
        dim=args.dim,
        curvature=args.curvature,
        noise_scale=args.noise,
        seed=args.seed,
    )
    data = sample_gaussian_mixture(spec, args.n)
    save_dataset(data, args.out)
    _write_manifest(args.out, "generate", args, inputs=[], outputs=[args.out])
    return 0


def _tree_config(args, seed: int) -> TreeConfig:
    task = "regression" if args.impurity == "mse" else "classification"
    return TreeConfig(
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        min_samples_split=args.min_samples_split,
        impurity=args.impurity,
        task=task,
        midpoint_mode=args.midpoint,
        seed=seed,
        max_features=args.max_features,
    )


def cmd_fit(args) -> int:
    data = load_dataset(
        args.data,
        geometry=args.geometry,
        curvature=args.curvature,
        coords=args.coords,
    )
    tree_config = _tree_config(args, args.seed)
    if args.model == "tree":
        model = fit_tree(data, tree_config)
    else:
        config = ForestConfig(
            n_trees=args.trees,
            tree=tree_config,
            bootstrap=not args.no_bootstrap,
            seed=args.seed,
        )
        model = fit_forest(data, config, jobs=_resolve_jobs(args.jobs))
    save_model(model, args.out)
    extra = {"jobs": _resolve_jobs(args.jobs)}
    if tree_config.task == "classification":
        extra["training_accuracy"] = training_accuracy_of(model, data)
    else:
        residual = model.predict(data.points) - data.raw_labels()
        extra["training_mse"] = float(np.mean(residual**2))
    _write_manifest(args.out, "fit", args, inputs=[args.data], outputs=[args.out],
                    extra=extra)
    return 0


def training_accuracy_of(model, data: Dataset) -> float:
    if isinstance(model, ForestModel):
        return float(np.mean(model.predict(data.points) == data.raw_labels()))
    return training_accuracy(model, data)


def cmd_predict(args) -> int:
    model = load_model(args.model)
    geometry = model.manifold.kind
    curvature = model.manifold.curvature if geometry == "hyperboloid" else 1.0
    data = load_dataset(
        args.data, geometry=geometry, curvature=curvature, coords=args.coords
    )
    task = model.config.task if not isinstance(model, ForestModel) else model.config.tree.task
    kwargs = {"hard": True} if (args.hard_vote and isinstance(model, ForestModel)) else {}
    pred = model.predict(data.points, **kwargs)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if args.proba:
            if task != "classification":
                raise ValueError("--proba requires a classification model")
            proba = model.predict_proba(data.points, **kwargs)
            writer.writerow(["label"] + [f"p{int(c)}" for c in model.classes])
            for lab, row in zip(pred, proba):
                writer.writerow([int(lab)] + [format(p, ".17g") for p in row])
        else:
            writer.writerow(["label"])
            for lab in pred:
                writer.writerow([int(lab) if task == "classification" else format(lab, ".17g")])
    _write_manifest(args.out, "predict", args, inputs=[args.model, args.data],
                    outputs=[args.out])
    return 0


def _make_predictor(spec: str, args, jobs: int):
    geometry, kind = spec.split("-")

    def factory(train: Dataset, model_seed: int):
        tree_config = _tree_config(args, model_seed)
        fit_data = _euclidean_view(train) if geometry == "euclidean" else train
        if kind == "tree":
            return fit_tree(fit_data, tree_config)
        config = ForestConfig(
            n_trees=args.trees, tree=tree_config, bootstrap=True, seed=model_seed
        )
        return fit_forest(fit_data, config, jobs=jobs)

    return spec, factory


def cmd_evaluate(args) -> int:
    data = load_dataset(
        args.data, geometry="hyperboloid", curvature=args.curvature, coords=args.coords
    )
    jobs = _resolve_jobs(args.jobs)
    predictors = [_make_predictor(spec, args, jobs) for spec in args.predictor]
    records = []
    for i in range(args.seeds):
        records.extend(cross_validate(predictors, data, args.folds, args.seed + i))
    rows_path = args.out + ".csv"
    summary_path = args.out + ".json"
    with open(rows_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["predictor", "seed", "fold", "micro_f1", "macro_f1",
             "fit_seconds", "predict_seconds", "aupr"]
        )
        for r in records:
            writer.writerow([
                r.predictor, r.seed, r.fold,
                format(r.micro_f1, ".17g"), format(r.macro_f1, ".17g"),
                format(r.fit_seconds, ".6g"), format(r.predict_seconds, ".6g"),
                "" if r.aupr is None else format(r.aupr, ".17g"),
            ])
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summarize_cv(records), fh, indent=2)
        fh.write("\n")
    _write_manifest(args.out, "evaluate", args, inputs=[args.data],
                    outputs=[rows_path, summary_path],
                    extra={"jobs": jobs, "n_seeds": args.seeds})
    return 0


def cmd_sweep(args) -> int:
    grid = [int(v) for v in args.grid.split(",") if v.strip()]
    rows = scaling_sweep(args.axis, grid, args.seed, trials=args.trials)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["axis", "value", "trials", "mean_fit_seconds", "ci95_fit_seconds",
             "mean_micro_f1", "ci95_micro_f1"]
        )
        for r in rows:
            writer.writerow([
                r.axis, r.value, r.trials,
                format(r.mean_fit_seconds, ".6g"), format(r.ci95_fit_seconds, ".6g"),
                format(r.mean_micro_f1, ".17g"), format(r.ci95_micro_f1, ".6g"),
            ])
    _write_manifest(args.out, "sweep", args, inputs=[], outputs=[args.out])
    return 0


def cmd_boundaries(args) -> int:
    model = load_model(args.model)
    boundaries, grid = export_boundaries(
        model, resolution=args.resolution, arc_points=args.arc_points
    )
    doc = {
        "boundaries": [
            {
                "dim": b.dim,
                "angle": b.angle,
                "depth": b.depth,
                "region": b.region,
                "polyline": [[float(u), float(v)] for u, v in b.polyline],
            }
            for b in boundaries
        ],
        "grid": {
            "resolution": args.resolution,
            "classes": [int(c) for c in grid.ravel()],
        },
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    _write_manifest(args.out, "boundaries", args, inputs=[args.model],
                    outputs=[args.out])
    return 0


def cmd_convert(args) -> int:
    data = load_dataset(
        args.data, geometry="hyperboloid", curvature=args.curvature,
        coords=args.from_coords,
    )
    if args.to == "hyperboloid":
        points = data.points
    elif args.to == "poincare":
        points = to_poincare(data.points, args.curvature)
    else:
        points = to_klein(data.points, args.curvature)
    out = Dataset(
        points, data.labels, Manifold.euclidean(points.shape[1]), data.classes
    )
    save_dataset(out, args.out)
    _write_manifest(args.out, "convert", args, inputs=[args.data], outputs=[args.out])
    return 0


# ---------------------------------------------------------------------------
# Parser

def _add_tree_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--impurity", choices=("gini", "entropy", "mse"), default="gini")
    p.add_argument("--midpoint", choices=("geodesic", "naive"), default="geodesic")
    p.add_argument("--max-features", type=int, default=None)
    p.add_argument("--trees", type=int, default=12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geodesic-forest",
        description="Decision trees and random forests on the hyperboloid",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a wrapped-Gaussian mixture to CSV")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--curvature", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="train a tree or forest on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--geometry", choices=("hyperboloid", "euclidean"),
                   default="hyperboloid")
    p.add_argument("--model", choices=("tree", "forest"), default="tree")
    p.add_argument("--coords", choices=COORD_KINDS, default="hyperboloid")
    p.add_argument("--curvature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_tree_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a saved model to a CSV dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--coords", choices=COORD_KINDS, default="hyperboloid")
    p.add_argument("--proba", action="store_true")
    p.add_argument("--hard-vote", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate",
                       help="cross-validate predictors and run paired t-tests")
    p.add_argument("--data", required=True)
    p.add_argument("--predictor", action="append", choices=PREDICTOR_SPECS,
                   required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seeds", type=int, default=1,
                   help="number of CV repetitions (seed, seed+1, ...)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coords", choices=COORD_KINDS, default="hyperboloid")
    p.add_argument("--curvature", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True,
                   help="output prefix; writes <out>.csv and <out>.json")
    _add_tree_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="runtime scaling profile along one axis")
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--grid", required=True, help="comma-separated integers")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("boundaries",
                       help="export Poincare-disk boundaries and class grid")
    p.add_argument("--model", required=True)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--arc-points", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("convert", help="map a CSV between coordinate systems")
    p.add_argument("--data", required=True)
    p.add_argument("--from", dest="from_coords", choices=COORD_KINDS,
                   default="hyperboloid")
    p.add_argument("--to", choices=COORD_KINDS, required=True)
    p.add_argument("--curvature", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"geodesic-forest: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
