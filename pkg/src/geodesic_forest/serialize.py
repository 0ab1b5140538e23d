"""Canonical JSON model files.

Field order is fixed and floats are written with 17 significant digits,
so equal models produce byte-identical files and every float survives
the round trip exactly. A document with a "trees" key is a forest;
anything else is a single tree.
"""

from __future__ import annotations

import json

import numpy as np

from .forest import ForestConfig, ForestModel
from .geometry import Manifold
from .tree import SplitRule, TreeConfig, TreeModel, TreeNode

__all__ = ["dumps_model", "save_model", "loads_model", "load_model"]

FORMAT_VERSION = 1


def _emit(obj) -> str:
    if isinstance(obj, dict):
        body = ",".join(f"{json.dumps(k)}:{_emit(v)}" for k, v in obj.items())
        return "{" + body + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_emit(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _node_doc(node: TreeNode) -> dict:
    if not node.is_leaf:
        return {
            "dim": node.rule.dim,
            "param": float(node.rule.param),
            "left": _node_doc(node.left),
            "right": _node_doc(node.right),
        }
    if node.probs is not None:
        return {"probs": [float(p) for p in node.probs], "n_train": node.n_train}
    return {"value": float(node.value), "n_train": node.n_train}


def _manifold_doc(m: Manifold) -> dict:
    return {"kind": m.kind, "dim": m.dim, "curvature": float(m.curvature)}


def _tree_config_doc(c: TreeConfig) -> dict:
    return {
        "max_depth": c.max_depth,
        "min_samples_leaf": c.min_samples_leaf,
        "min_samples_split": c.min_samples_split,
        "impurity": c.impurity,
        "task": c.task,
        "midpoint_mode": c.midpoint_mode,
        "seed": c.seed,
        "max_features": c.max_features,
    }


def _tree_doc(model: TreeModel) -> dict:
    classes = None if model.classes is None else [int(c) for c in model.classes]
    return {
        "format_version": FORMAT_VERSION,
        "manifold": _manifold_doc(model.manifold),
        "config": _tree_config_doc(model.config),
        "classes": classes,
        "root": _node_doc(model.root),
    }


def dumps_model(model) -> str:
    if isinstance(model, ForestModel):
        doc = {
            "format_version": FORMAT_VERSION,
            "config": {
                "n_trees": model.config.n_trees,
                "bootstrap": model.config.bootstrap,
                "seed": model.config.seed,
                "tree": _tree_config_doc(model.config.tree),
            },
            "trees": [_tree_doc(t) for t in model.trees],
        }
    elif isinstance(model, TreeModel):
        doc = _tree_doc(model)
    else:
        raise TypeError(f"not a model: {type(model)!r}")
    return _emit(doc)


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))
        fh.write("\n")


def _node_from_doc(doc: dict) -> TreeNode:
    if "dim" in doc:
        return TreeNode(
            rule=SplitRule(int(doc["dim"]), float(doc["param"])),
            left=_node_from_doc(doc["left"]),
            right=_node_from_doc(doc["right"]),
        )
    if "probs" in doc:
        return TreeNode(
            probs=np.asarray(doc["probs"], dtype=np.float64),
            n_train=int(doc["n_train"]),
        )
    return TreeNode(value=float(doc["value"]), n_train=int(doc["n_train"]))


def _tree_from_doc(doc: dict) -> TreeModel:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format_version')!r}")
    m = doc["manifold"]
    manifold = Manifold(m["kind"], int(m["dim"]), float(m["curvature"]))
    config = TreeConfig(**doc["config"])
    classes = doc["classes"]
    classes = None if classes is None else np.asarray(classes, dtype=np.int64)
    return TreeModel(
        root=_node_from_doc(doc["root"]),
        config=config,
        manifold=manifold,
        classes=classes,
    )


def loads_model(text: str):
    doc = json.loads(text)
    if "trees" in doc:
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {doc.get('format_version')!r}")
        trees = [_tree_from_doc(t) for t in doc["trees"]]
        cfg = doc["config"]
        config = ForestConfig(
            n_trees=int(cfg["n_trees"]),
            tree=TreeConfig(**cfg["tree"]),
            bootstrap=bool(cfg["bootstrap"]),
            seed=int(cfg["seed"]),
        )
        return ForestModel(
            trees=trees,
            config=config,
            manifold=trees[0].manifold,
            classes=trees[0].classes,
        )
    return _tree_from_doc(doc)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read())
