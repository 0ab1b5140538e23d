import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geodesic_forest import (
    Dataset,
    GaussianMixtureSpec,
    Manifold,
    SplitRule,
    TreeConfig,
    best_split,
    candidate_splits,
    fit_tree,
    impurity,
    information_gain,
    midpoint_angle,
    point_angle,
    sample_gaussian_mixture,
    split_decide,
    training_accuracy,
)
from oracles import (
    TIE_TOL,
    brute_force_best_split,
    minkowski_decision_value,
    oracle_mse,
)

MID_09_13 = 1.0351836933794396


def points_at_angles(angles, curvature=1.0):
    """Hyperboloid points with prescribed plane angle per spacelike axis.

    Solves x_d = x_0 cot(theta_d) against the sheet constraint; requires
    sum cot^2 < 1, which holds for angles near pi/2.
    """
    angles = np.atleast_2d(np.asarray(angles, dtype=np.float64))
    cots = 1.0 / np.tan(angles)
    denom = 1.0 - np.sum(cots * cots, axis=1)
    assert np.all(denom > 0), "angles too far from pi/2 for this construction"
    x0 = np.sqrt(1.0 / (curvature * denom))
    return np.concatenate([x0[:, None], x0[:, None] * cots], axis=1)


def hyper_dataset(angles, labels, curvature=1.0):
    angles = np.atleast_2d(np.asarray(angles, dtype=np.float64))
    labels = np.asarray(labels)
    classes = np.unique(labels)
    return Dataset(
        points=points_at_angles(angles, curvature),
        labels=np.searchsorted(classes, labels),
        manifold=Manifold.hyperboloid(angles.shape[1], curvature),
        classes=classes,
    )


def euclid_dataset(points, labels):
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    labels = np.asarray(labels)
    classes = np.unique(labels)
    return Dataset(
        points=points,
        labels=np.searchsorted(classes, labels),
        manifold=Manifold.euclidean(points.shape[1]),
        classes=classes,
    )


class TestImpurity:
    def test_pure_gini(self):
        assert impurity([1, 1, 1, 1], "gini") == 0.0

    def test_balanced_gini(self):
        assert impurity([0, 1, 0, 1], "gini") == 0.5

    def test_entropy_one_bit(self):
        assert impurity([0, 0, 1, 1], "entropy") == 1.0

    def test_mse(self):
        assert impurity([1.0, 3.0], "mse") == 1.0
        assert impurity([2.0, 2.0, 2.0], "mse") == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            impurity([], "gini")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            impurity([0, 1], "misclassification")


class TestInformationGain:
    def test_perfect_separation(self):
        assert information_gain([0, 0, 1, 1], [0, 0], [1, 1], "gini") == 0.5

    def test_distribution_copy_is_zero(self):
        got = information_gain([0, 1, 0, 1], [0, 1], [0, 1], "gini")
        assert got == 0.0

    def test_hand_computed_sixth(self):
        got = information_gain([0, 0, 1, 1], [0, 0, 1], [1], "gini")
        assert_allclose(got, 1.0 / 6.0, rtol=1e-15)

    def test_empty_child_rejected(self):
        with pytest.raises(ValueError):
            information_gain([0, 1], [0, 1], [], "gini")

    def test_partition_checked(self):
        with pytest.raises(ValueError):
            information_gain([0, 1, 1], [0], [1], "gini")

    def test_mse_gain(self):
        got = information_gain([0.0, 0.0, 4.0, 4.0], [0.0, 0.0], [4.0, 4.0], "mse")
        assert got == 4.0


class TestSplitDecide:
    def test_half_pi_reduces_to_sign(self):
        rule = SplitRule(1, np.pi / 2)
        x = np.array([math.cosh(1.0), math.sinh(1.0), 0.0])
        assert split_decide(x, rule, "hyperboloid") == 1
        x[1] = -x[1]
        assert split_decide(x, rule, "hyperboloid") == 0

    def test_exact_zero_goes_left(self):
        # crafted so sin(theta) x_d and cos(theta) x_0 are bit-identical
        theta = np.pi / 2
        x = np.array([1.0, np.cos(theta), 0.0])
        value = np.sin(theta) * x[1] - np.cos(theta) * x[0]
        assert value == 0.0
        assert split_decide(x, SplitRule(1, theta), "hyperboloid") == 0

    def test_euclidean_threshold(self):
        rule = SplitRule(0, 1.5)
        assert split_decide(np.array([2.0, 0.0]), rule, "euclidean") == 1
        assert split_decide(np.array([1.5, 0.0]), rule, "euclidean") == 0
        assert split_decide(np.array([1.0, 0.0]), rule, "euclidean") == 0

    def test_batch_shape(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(100, 2))
        pts = np.concatenate([np.sqrt(1 + (z * z).sum(1))[:, None], z], axis=1)
        sides = split_decide(pts, SplitRule(2, 1.2), "hyperboloid")
        assert sides.shape == (100,)
        assert set(np.unique(sides)) <= {0, 1}

    def test_minkowski_form_equivalence(self):
        # dense-normal Minkowski evaluation at -theta is the exact
        # negation of the sparse form, so the sides swap consistently
        rng = np.random.default_rng(1)
        n, dim = 10_000, 3
        z = rng.normal(size=(n, dim)) * 2.0
        pts = np.concatenate([np.sqrt(1 + (z * z).sum(1))[:, None], z], axis=1)
        thetas = rng.uniform(np.pi / 4 + 0.01, 3 * np.pi / 4 - 0.01, size=n)
        dims = rng.integers(1, dim + 1, size=n)
        sparse = np.sin(thetas) * pts[np.arange(n), dims] - np.cos(thetas) * pts[:, 0]
        dense = np.array(
            [minkowski_decision_value(x, t, d) for x, t, d in zip(pts, thetas, dims)]
        )
        assert np.array_equal(sparse, -dense)
        sides = np.array(
            [
                split_decide(x, SplitRule(int(d), float(t)), "hyperboloid")
                for x, t, d in zip(pts, thetas, dims)
            ]
        )
        assert np.array_equal(sides == 1, dense < 0)

    def test_dim_range(self):
        x = np.array([1.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            split_decide(x, SplitRule(0, 1.5), "hyperboloid")
        with pytest.raises(ValueError):
            split_decide(x, SplitRule(3, 1.5), "hyperboloid")
        with pytest.raises(ValueError):
            split_decide(np.array([1.0, 2.0]), SplitRule(2, 0.0), "euclidean")


class TestCandidateSplits:
    def test_shared_angle_gives_nothing(self):
        ds = hyper_dataset([[1.1, 0.9], [1.1, 1.3]], [0, 1])
        assert candidate_splits(ds, 1, TreeConfig()) == []

    def test_two_point_geodesic_candidate(self):
        ds = hyper_dataset([[0.9], [1.3]], [0, 1])
        rules = candidate_splits(ds, 1, TreeConfig())
        assert len(rules) == 1
        assert rules[0].dim == 1
        # the construction reproduces the requested angles to an ulp, so
        # the candidate sits within float noise of the frozen bisection value
        assert_allclose(rules[0].param, MID_09_13, atol=1e-12, rtol=0)

    def test_two_point_naive_candidate(self):
        ds = hyper_dataset([[0.9], [1.3]], [0, 1])
        rules = candidate_splits(ds, 1, TreeConfig(midpoint_mode="naive"))
        assert len(rules) == 1
        assert_allclose(rules[0].param, 1.1, atol=1e-12, rtol=0)

    def test_modes_differ(self):
        ds = hyper_dataset([[0.9], [1.3]], [0, 1])
        geo = candidate_splits(ds, 1, TreeConfig())[0].param
        naive = candidate_splits(ds, 1, TreeConfig(midpoint_mode="naive"))[0].param
        assert geo != naive

    def test_euclidean_midpoints(self):
        ds = euclid_dataset([[0.0], [1.0], [1.0], [3.0]], [0, 0, 1, 1])
        rules = candidate_splits(ds, 0, TreeConfig())
        assert [r.param for r in rules] == [0.5, 2.0]

    def test_count_bound(self):
        ds = sample_gaussian_mixture(
            GaussianMixtureSpec(3, 2, 1.0, 1.0, seed=0), 40
        )
        for d in (1, 2):
            assert len(candidate_splits(ds, d, TreeConfig())) <= 39

    def test_every_candidate_separates(self):
        ds = sample_gaussian_mixture(
            GaussianMixtureSpec(3, 2, 1.0, 1.0, seed=1), 30
        )
        for d in (1, 2):
            angles = point_angle(ds.points, d)
            for rule in candidate_splits(ds, d, TreeConfig()):
                below = np.sum(angles < rule.param)
                assert 0 < below < len(angles)

    def test_bad_axis(self):
        ds = hyper_dataset([[0.9], [1.3]], [0, 1])
        with pytest.raises(ValueError):
            candidate_splits(ds, 2, TreeConfig())


class TestBestSplit:
    def test_pure_labels_give_none(self):
        ds = hyper_dataset([[0.9], [1.1], [1.3]], [0, 0, 0])
        assert best_split(ds, TreeConfig()) is None

    def test_two_points_split_on_differing_axis(self):
        # identical angle in axis 2 leaves that axis without candidates,
        # so the rule lands on the axis where the points actually differ
        ds = hyper_dataset([[1.0, 1.2], [1.4, 1.2]], [0, 1])
        rule, gain = best_split(ds, TreeConfig())
        assert rule.dim == 1
        assert gain == 0.5
        ds = hyper_dataset([[1.2, 1.0], [1.2, 1.4]], [0, 1])
        rule, gain = best_split(ds, TreeConfig())
        assert rule.dim == 2

    def test_gain_tie_prefers_lowest_axis(self):
        # both axes separate the two classes perfectly
        ds = hyper_dataset([[1.0, 1.05], [1.4, 1.45]], [0, 1])
        rule, gain = best_split(ds, TreeConfig())
        assert gain == 0.5
        assert rule.dim == 1

    def test_min_samples_leaf_filters(self):
        ds = hyper_dataset([[0.9], [1.0], [1.1], [1.3]], [0, 1, 1, 1])
        got = best_split(ds, TreeConfig(min_samples_leaf=2))
        assert got is not None
        rule, _ = got
        angles = point_angle(ds.points, 1)
        n_right = int(np.sum(angles < rule.param))
        assert 2 <= n_right <= 2

    def test_all_leaf_violations_give_none(self):
        ds = hyper_dataset([[0.9], [1.3]], [0, 1])
        assert best_split(ds, TreeConfig(min_samples_leaf=2)) is None

    @pytest.mark.parametrize("kind", ["gini", "entropy"])
    def test_matches_brute_force_exactly(self, kind):
        rng = np.random.default_rng(99)
        for _ in range(60):
            spec = GaussianMixtureSpec(
                int(rng.integers(2, 5)),
                int(rng.integers(2, 5)),
                1.0,
                float(rng.uniform(0.3, 2.0)),
                seed=int(rng.integers(0, 2**31)),
            )
            ds = sample_gaussian_mixture(spec, int(rng.integers(4, 31)))
            config = TreeConfig(impurity=kind)
            got = best_split(ds, config)
            want = brute_force_best_split(ds, config)
            if want is None:
                assert got is None
            else:
                rule, gain = got
                assert gain == want[0]
                assert rule.dim == want[1]
                assert rule.param == want[2]

    def test_euclidean_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            n = int(rng.integers(4, 25))
            ds = euclid_dataset(
                rng.normal(size=(n, 3)), rng.integers(0, 3, size=n)
            )
            config = TreeConfig()
            got = best_split(ds, config)
            want = brute_force_best_split(ds, config)
            if want is None:
                assert got is None
            else:
                assert got[1] == want[0]
                assert (got[0].dim, got[0].param) == (want[1], want[2])

    def test_regression_close_to_brute_force(self):
        # prefix-sum mse differs from direct summation by rounding only
        rng = np.random.default_rng(6)
        for _ in range(30):
            n = int(rng.integers(4, 25))
            spec = GaussianMixtureSpec(2, 2, 1.0, 1.0, seed=int(rng.integers(0, 2**31)))
            base = sample_gaussian_mixture(spec, n)
            ds = Dataset(
                points=base.points,
                labels=rng.normal(size=n),
                manifold=base.manifold,
                classes=None,
            )
            config = TreeConfig(task="regression", impurity="mse")
            got = best_split(ds, config)
            want = brute_force_best_split(ds, config)
            if want is None:
                assert got is None or got[1] <= TIE_TOL
            else:
                assert got is not None
                assert_allclose(got[1], want[0], rtol=1e-10)


class TestFitTree:
    def test_stump_separates_two_classes(self):
        ds = hyper_dataset([[0.9], [0.95], [1.25], [1.3]], [0, 0, 1, 1])
        model = fit_tree(ds, TreeConfig(max_depth=1))
        assert model.depth() == 1
        assert training_accuracy(model, ds) == 1.0

    def test_depth_three_leaf_bound(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(4, 2, 1.0, 1.5, seed=3), 300)
        model = fit_tree(ds, TreeConfig(max_depth=3))
        assert model.depth() <= 3
        assert model.n_leaves() <= 8

    def test_memorizes_distinct_points(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(3, 2, 1.0, 2.0, seed=4), 64)
        model = fit_tree(ds, TreeConfig(max_depth=64))
        assert np.array_equal(model.predict(ds.points), ds.raw_labels())

    def test_proba_rows_sum_to_one(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(3, 2, 1.0, 1.0, seed=5), 200)
        model = fit_tree(ds, TreeConfig())
        proba = model.predict_proba(ds.points)
        assert proba.shape == (200, 3)
        assert_allclose(proba.sum(axis=1), 1.0, rtol=1e-12)

    def test_monotone_depth_training_accuracy(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(4, 2, 1.0, 1.5, seed=6), 240)
        accs = [
            training_accuracy(fit_tree(ds, TreeConfig(max_depth=d)), ds)
            for d in (1, 2, 3, 5, 8)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:]))

    def test_deterministic(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(3, 3, 1.0, 1.0, seed=7), 150)
        a = fit_tree(ds, TreeConfig())
        b = fit_tree(ds, TreeConfig())
        assert np.array_equal(a.predict(ds.points), b.predict(ds.points))

    def test_leaf_populations_partition_training_set(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(3, 2, 1.0, 1.0, seed=8), 120)
        model = fit_tree(ds, TreeConfig(max_depth=4))
        leaf_sizes = [n.n_train for n, _, _ in model.iter_nodes() if n.is_leaf]
        assert sum(leaf_sizes) == 120
        # every point's leaf distribution acknowledges its label
        proba = model.predict_proba(ds.points)
        assert np.all(proba[np.arange(120), ds.labels] > 0)

    def test_min_samples_split_stops(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(2, 2, 1.0, 1.0, seed=9), 9)
        model = fit_tree(ds, TreeConfig(min_samples_split=10))
        assert model.root.is_leaf

    def test_pure_node_stops(self):
        ds = hyper_dataset([[0.9], [1.1], [1.3]], [1, 1, 1])
        model = fit_tree(ds, TreeConfig())
        assert model.root.is_leaf
        assert np.array_equal(model.predict(ds.points), [1, 1, 1])

    def test_curvature_rescaling_invariance(self):
        # x -> x/2 moves K=1 data to K=4 but preserves every angle
        ds = sample_gaussian_mixture(GaussianMixtureSpec(3, 2, 1.0, 1.0, seed=10), 200)
        scaled = Dataset(
            points=ds.points / 2.0,
            labels=ds.labels,
            manifold=Manifold.hyperboloid(2, 4.0),
            classes=ds.classes,
        )
        a = fit_tree(ds, TreeConfig())
        b = fit_tree(scaled, TreeConfig())
        for (na, _, _), (nb, _, _) in zip(
            sorted(a.iter_nodes(), key=lambda t: t[2]),
            sorted(b.iter_nodes(), key=lambda t: t[2]),
        ):
            assert na.is_leaf == nb.is_leaf
            if na.is_leaf:
                assert np.array_equal(na.probs, nb.probs)
            else:
                assert na.rule == nb.rule

    def test_empty_dataset_rejected(self):
        ds = Dataset(
            points=np.zeros((0, 3)),
            labels=np.zeros(0, dtype=np.int64),
            manifold=Manifold.hyperboloid(2, 1.0),
            classes=np.array([0]),
        )
        with pytest.raises(ValueError):
            fit_tree(ds, TreeConfig())

    def test_nan_rejected(self):
        ds = hyper_dataset([[0.9], [1.3]], [0, 1])
        pts = ds.points.copy()
        pts[0, 0] = np.nan
        bad = Dataset(pts, ds.labels, ds.manifold, ds.classes)
        with pytest.raises(ValueError):
            fit_tree(bad, TreeConfig())

    def test_max_features_subsampling(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(3, 4, 1.0, 1.0, seed=11), 150)
        a = fit_tree(ds, TreeConfig(max_features=2, seed=5))
        b = fit_tree(ds, TreeConfig(max_features=2, seed=5))
        assert np.array_equal(a.predict(ds.points), b.predict(ds.points))

    def test_regression_fit(self):
        rng = np.random.default_rng(12)
        base = sample_gaussian_mixture(GaussianMixtureSpec(2, 2, 1.0, 1.0, seed=13), 100)
        target = point_angle(base.points, 1) * 2.0 + rng.normal(scale=0.05, size=100)
        ds = Dataset(base.points, target, base.manifold, classes=None)
        config = TreeConfig(max_depth=4, task="regression", impurity="mse")
        model = fit_tree(ds, config)
        pred = model.predict(ds.points)
        assert oracle_mse(target - pred) < oracle_mse(target)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TreeConfig(max_depth=0)
        with pytest.raises(ValueError):
            TreeConfig(impurity="mse")
        with pytest.raises(ValueError):
            TreeConfig(task="regression")
        with pytest.raises(ValueError):
            TreeConfig(midpoint_mode="midway")

    def test_hyperbolic_splits_never_use_axis_zero(self):
        ds = sample_gaussian_mixture(GaussianMixtureSpec(4, 3, 1.0, 1.5, seed=14), 300)
        model = fit_tree(ds, TreeConfig(max_depth=6))
        for node, _, _ in model.iter_nodes():
            if not node.is_leaf:
                assert 1 <= node.rule.dim <= 3
