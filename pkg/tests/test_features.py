import json

import numpy as np
import pytest

from activesearch import (
    DataWarning,
    Dataset,
    ParameterError,
    RffMap,
    ShapeError,
    median_heuristic,
    rff_fit,
    rff_transform,
)
from activesearch.features import negative_pair_fraction, similarity_sanity_warning


class TestRffMap:
    def test_shapes(self):
        m = rff_fit(input_dim=55, dim=550, sigma=2.0, seed=1)
        d = Dataset(X=np.random.default_rng(0).random((55, 12)))
        out = rff_transform(m, d)
        assert out.r == 550 and out.n == 12
        assert m.W.shape == (550, 55)
        assert m.b.shape == (550,)

    def test_deterministic(self):
        a = rff_fit(10, 64, 1.5, seed=9)
        b = rff_fit(10, 64, 1.5, seed=9)
        assert np.array_equal(a.W, b.W)
        assert np.array_equal(a.b, b.b)
        c = rff_fit(10, 64, 1.5, seed=10)
        assert not np.array_equal(a.W, c.W)

    def test_dimension_one_works(self):
        m = rff_fit(3, 1, 1.0)
        d = Dataset(X=np.ones((3, 4)))
        assert rff_transform(m, d).r == 1

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_rejects_bad_sigma(self, sigma):
        with pytest.raises(ParameterError):
            rff_fit(5, 10, sigma)

    def test_rejects_bad_dims(self):
        with pytest.raises(ParameterError):
            rff_fit(5, 0, 1.0)
        with pytest.raises(ParameterError):
            rff_fit(0, 5, 1.0)

    def test_input_dim_mismatch(self):
        m = rff_fit(5, 10, 1.0)
        with pytest.raises(ShapeError):
            rff_transform(m, Dataset(X=np.ones((4, 3))))

    def test_json_round_trip_regenerates_matrices(self):
        m = rff_fit(7, 33, 0.8, seed=4)
        doc = json.loads(m.to_json())
        assert set(doc) == {"version", "kind", "seed", "dim", "input_dim", "sigma"}
        back = RffMap.from_json(m.to_json())
        assert np.array_equal(back.W, m.W)
        assert np.array_equal(back.b, m.b)

    def test_from_json_rejects_foreign_document(self):
        with pytest.raises(ParameterError):
            RffMap.from_json('{"kind": "other", "version": 1}')


class TestKernelApproximation:
    def test_self_similarity_near_one(self):
        # k(x, x) = 1; the feature dot product should be close at large D
        rng = np.random.default_rng(0)
        x = rng.standard_normal(8)
        m = rff_fit(8, 2000, sigma=1.0, seed=0)
        phi = rff_transform(m, Dataset(X=x[:, None])).X[:, 0]
        assert abs(phi @ phi - 1.0) <= 0.1

    def test_unit_distance_pair_matches_kernel(self):
        # ||x - y|| = 1, sigma = 1 -> k = exp(-1/2) ~ 0.6065
        x = np.zeros(6)
        y = np.zeros(6)
        y[0] = 1.0
        d = Dataset(X=np.stack([x, y], axis=1))
        estimates = []
        for seed in range(20):
            m = rff_fit(6, 4000, sigma=1.0, seed=seed)
            phi = rff_transform(m, d).X
            estimates.append(phi[:, 0] @ phi[:, 1])
        target = np.exp(-0.5)
        assert abs(np.mean(estimates) - target) < 0.05
        for est in estimates:
            assert abs(est - target) < 0.15

    def test_estimates_center_on_kernel_across_seeds(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(4)
        y = rng.standard_normal(4)
        sigma = 2.0
        target = np.exp(-np.sum((x - y) ** 2) / (2 * sigma**2))
        d = Dataset(X=np.stack([x, y], axis=1))
        vals = []
        for seed in range(50):
            m = rff_fit(4, 500, sigma=sigma, seed=seed)
            phi = rff_transform(m, d).X
            vals.append(phi[:, 0] @ phi[:, 1])
        assert abs(np.mean(vals) - target) < 0.02

    def test_feature_norm_bounded(self):
        # each coordinate is sqrt(2/D) cos(.), so ||phi||^2 <= 2
        m = rff_fit(5, 300, sigma=0.5, seed=2)
        d = Dataset(X=np.random.default_rng(1).standard_normal((5, 50)) * 3)
        phi = rff_transform(m, d).X
        assert (np.sum(phi * phi, axis=0) <= 2.0 + 1e-12).all()


class TestHeuristics:
    def test_median_heuristic_two_points(self):
        d = Dataset(X=np.array([[0.0, 3.0], [0.0, 4.0]]))
        assert median_heuristic(d) == pytest.approx(5.0)

    def test_median_heuristic_subsamples(self):
        rng = np.random.default_rng(0)
        d = Dataset(X=rng.standard_normal((4, 3000)))
        full = median_heuristic(d, sample=3000)
        sub = median_heuristic(d, sample=400)
        assert abs(full - sub) / full < 0.15

    def test_median_heuristic_needs_two_points(self):
        with pytest.raises(ParameterError):
            median_heuristic(Dataset(X=np.ones((2, 1))))

    def test_median_heuristic_rejects_identical_points(self):
        with pytest.raises(ParameterError):
            median_heuristic(Dataset(X=np.ones((2, 5))))

    def test_negative_fraction_zero_for_nonnegative_data(self):
        X = np.random.default_rng(0).random((3, 100)) + 0.1
        assert negative_pair_fraction(X) == 0.0

    def test_negative_fraction_positive_for_centered_data(self):
        X = np.random.default_rng(0).standard_normal((3, 200))
        assert negative_pair_fraction(X) > 0.2

    def test_sanity_warning_fires_on_centered_data(self):
        X = np.random.default_rng(0).standard_normal((3, 200))
        with pytest.warns(DataWarning, match="negative"):
            frac = similarity_sanity_warning(X)
        assert frac > 0.01

    def test_sanity_warning_silent_on_nonnegative_data(self):
        import warnings as w
        X = np.random.default_rng(0).random((3, 200)) + 0.1
        with w.catch_warnings():
            w.simplefilter("error")
            assert similarity_sanity_warning(X) == 0.0
