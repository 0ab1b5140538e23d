import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geodesic_forest import (
    ForestConfig,
    GaussianMixtureSpec,
    TreeConfig,
    dumps_model,
    fit_forest,
    fit_tree,
    load_model,
    loads_model,
    sample_gaussian_mixture,
    save_model,
)


def mixture(seed, n=150):
    return sample_gaussian_mixture(
        GaussianMixtureSpec(3, 2, 1.0, 1.0, seed=seed), n
    )


class TestTreeSerialization:
    def test_round_trip_is_byte_stable(self):
        model = fit_tree(mixture(0), TreeConfig(max_depth=3))
        text = dumps_model(model)
        again = dumps_model(loads_model(text))
        assert text == again

    def test_round_trip_predictions_identical(self):
        ds = mixture(1)
        model = fit_tree(ds, TreeConfig(max_depth=4))
        back = loads_model(dumps_model(model))
        probe = mixture(2, n=10_000)
        assert np.array_equal(model.predict(probe.points), back.predict(probe.points))
        assert np.array_equal(
            model.predict_proba(probe.points), back.predict_proba(probe.points)
        )

    def test_document_shape(self):
        model = fit_tree(mixture(3), TreeConfig())
        doc = json.loads(dumps_model(model))
        assert doc["format_version"] == 1
        assert doc["manifold"] == {"kind": "hyperboloid", "dim": 2, "curvature": 1.0}
        assert doc["config"]["max_depth"] == 3
        assert doc["classes"] == [0, 1, 2]
        root = doc["root"]
        assert ("dim" in root and "param" in root) or "probs" in root

    def test_seventeen_digit_floats_survive(self):
        model = fit_tree(mixture(4), TreeConfig(max_depth=5))
        back = loads_model(dumps_model(model))

        def params(m):
            out = []
            for node, _, _ in m.iter_nodes():
                if not node.is_leaf:
                    out.append(node.rule.param)
            return out

        assert params(model) == params(back)

    def test_file_round_trip(self, tmp_path):
        ds = mixture(5)
        model = fit_tree(ds, TreeConfig())
        path = tmp_path / "tree.json"
        save_model(model, path)
        back = load_model(path)
        assert dumps_model(back) == dumps_model(model)
        assert path.read_text().endswith("\n")

    def test_config_round_trips(self):
        config = TreeConfig(
            max_depth=5,
            min_samples_leaf=2,
            min_samples_split=4,
            impurity="entropy",
            midpoint_mode="naive",
            seed=11,
        )
        model = fit_tree(mixture(6), config)
        back = loads_model(dumps_model(model))
        assert back.config == config

    def test_regression_leaves(self):
        from geodesic_forest import Dataset

        rng = np.random.default_rng(7)
        base = mixture(7, n=60)
        ds = Dataset(base.points, rng.normal(size=60), base.manifold, classes=None)
        config = TreeConfig(max_depth=2, task="regression", impurity="mse")
        model = fit_tree(ds, config)
        back = loads_model(dumps_model(model))
        assert np.array_equal(model.predict(ds.points), back.predict(ds.points))


class TestForestSerialization:
    def test_round_trip_byte_stable(self):
        forest = fit_forest(mixture(8), ForestConfig(n_trees=3, seed=1))
        text = dumps_model(forest)
        assert text == dumps_model(loads_model(text))

    def test_detected_by_trees_key(self):
        forest = fit_forest(mixture(9), ForestConfig(n_trees=2, seed=2))
        doc = json.loads(dumps_model(forest))
        assert doc["format_version"] == 1
        assert len(doc["trees"]) == 2
        back = loads_model(dumps_model(forest))
        assert hasattr(back, "trees")

    def test_round_trip_predictions(self):
        ds = mixture(10)
        forest = fit_forest(ds, ForestConfig(n_trees=4, seed=3))
        back = loads_model(dumps_model(forest))
        assert np.array_equal(forest.predict(ds.points), back.predict(ds.points))
        assert_allclose(
            forest.predict_proba(ds.points), back.predict_proba(ds.points), rtol=0
        )

    def test_forest_config_round_trips(self):
        config = ForestConfig(
            n_trees=3, bootstrap=False, seed=5, tree=TreeConfig(max_depth=2)
        )
        forest = fit_forest(mixture(11), config)
        back = loads_model(dumps_model(forest))
        assert back.config == config


class TestMalformedInput:
    def test_not_json(self):
        with pytest.raises(ValueError):
            loads_model("this is not json")

    def test_wrong_version(self):
        with pytest.raises(ValueError):
            loads_model(json.dumps({"format_version": 99, "trees": []}))
