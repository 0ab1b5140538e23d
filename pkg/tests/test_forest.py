import numpy as np
import pytest
from numpy.testing import assert_allclose

from geodesic_forest import (
    Dataset,
    ForestConfig,
    ForestModel,
    GaussianMixtureSpec,
    Manifold,
    TreeConfig,
    TreeModel,
    TreeNode,
    dumps_model,
    f1_scores,
    fit_forest,
    fit_tree,
    sample_gaussian_mixture,
)


def mixture(seed, n=200, **spec_overrides):
    base = dict(n_classes=3, dim=2, curvature=1.0, noise_scale=1.0, seed=seed)
    base.update(spec_overrides)
    return sample_gaussian_mixture(GaussianMixtureSpec(**base), n)


def leaf_tree(probs, manifold, classes):
    """Single-leaf stand-in tree for voting arithmetic tests."""
    node = TreeNode(probs=np.asarray(probs, dtype=np.float64), n_train=1)
    return TreeModel(root=node, config=TreeConfig(), manifold=manifold, classes=classes)


class TestConfig:
    def test_defaults(self):
        config = ForestConfig()
        assert config.n_trees == 12
        assert config.bootstrap is True

    def test_needs_a_tree(self):
        with pytest.raises(ValueError):
            ForestConfig(n_trees=0)


class TestVoting:
    def setup_method(self):
        self.manifold = Manifold.hyperboloid(2, 1.0)
        self.classes = np.array([0, 1])
        self.point = np.array([[1.0, 0.0, 0.0]])

    def test_hard_majority(self):
        trees = [
            leaf_tree([1.0, 0.0], self.manifold, self.classes),
            leaf_tree([1.0, 0.0], self.manifold, self.classes),
            leaf_tree([0.0, 1.0], self.manifold, self.classes),
        ]
        forest = ForestModel(trees, ForestConfig(n_trees=3), self.manifold, self.classes)
        assert forest.predict(self.point, hard=True)[0] == 0
        assert_allclose(
            forest.predict_proba(self.point, hard=True)[0], [2 / 3, 1 / 3]
        )

    def test_soft_vs_hard_disagree(self):
        # two lukewarm votes for class 0, one emphatic vote for class 1
        trees = [
            leaf_tree([0.6, 0.4], self.manifold, self.classes),
            leaf_tree([0.6, 0.4], self.manifold, self.classes),
            leaf_tree([0.0, 1.0], self.manifold, self.classes),
        ]
        forest = ForestModel(trees, ForestConfig(n_trees=3), self.manifold, self.classes)
        assert forest.predict(self.point, hard=True)[0] == 0
        assert forest.predict(self.point)[0] == 1
        assert_allclose(forest.predict_proba(self.point)[0], [0.4, 0.6])

    def test_identical_trees_match_single_tree(self):
        ds = mixture(0)
        config = ForestConfig(n_trees=4, bootstrap=False, seed=1)
        forest = fit_forest(ds, config)
        tree = forest.trees[0]
        assert np.array_equal(forest.predict(ds.points), tree.predict(ds.points))


class TestFitForest:
    def test_single_tree_no_bootstrap_equals_tree(self):
        ds = mixture(1)
        forest = fit_forest(ds, ForestConfig(n_trees=1, bootstrap=False, seed=7))
        member_config = forest.trees[0].config
        solo = fit_tree(ds, member_config)
        assert np.array_equal(forest.predict(ds.points), solo.predict(ds.points))
        assert_allclose(forest.predict_proba(ds.points), solo.predict_proba(ds.points))

    def test_deterministic_across_jobs(self):
        ds = mixture(2)
        config = ForestConfig(n_trees=6, seed=3)
        a = fit_forest(ds, config, jobs=1)
        b = fit_forest(ds, config, jobs=2)
        assert dumps_model(a) == dumps_model(b)

    def test_deterministic_across_calls(self):
        ds = mixture(3)
        config = ForestConfig(n_trees=4, seed=4)
        assert dumps_model(fit_forest(ds, config)) == dumps_model(fit_forest(ds, config))

    def test_members_differ_under_bootstrap(self):
        ds = mixture(4)
        forest = fit_forest(ds, ForestConfig(n_trees=4, seed=5))
        docs = {dumps_model(t) for t in forest.trees}
        assert len(docs) > 1

    def test_proba_rows_sum_to_one(self):
        ds = mixture(5)
        forest = fit_forest(ds, ForestConfig(n_trees=5, seed=6))
        for hard in (False, True):
            proba = forest.predict_proba(ds.points, hard=hard)
            assert_allclose(proba.sum(axis=1), 1.0, rtol=1e-12)

    def test_forest_close_to_tree_on_matched_seeds(self):
        # ensemble mean micro-F1 stays within one point of the single tree
        gaps = []
        for seed in range(5):
            ds = mixture(100 + seed, n=800)
            train = ds.subset(np.arange(640))
            test = ds.subset(np.arange(640, 800))
            tree = fit_tree(train, TreeConfig(max_depth=3))
            forest = fit_forest(
                train, ForestConfig(n_trees=12, seed=seed, tree=TreeConfig(max_depth=3))
            )
            truth = test.raw_labels()
            tree_f1 = f1_scores(truth, tree.predict(test.points)).micro
            forest_f1 = f1_scores(truth, forest.predict(test.points)).micro
            gaps.append(forest_f1 - tree_f1)
        assert float(np.mean(gaps)) >= -0.01

    def test_regression_forest_averages(self):
        rng = np.random.default_rng(7)
        base = mixture(8, n=120)
        ds = Dataset(base.points, rng.normal(size=120), base.manifold, classes=None)
        tree_config = TreeConfig(max_depth=3, task="regression", impurity="mse")
        forest = fit_forest(ds, ForestConfig(n_trees=3, tree=tree_config, seed=9))
        got = forest.predict(ds.points)
        want = np.mean([t.predict(ds.points) for t in forest.trees], axis=0)
        assert np.array_equal(got, want)
