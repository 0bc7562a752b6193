import numpy as np
import pytest
from scipy import stats

import preddiff as pd
from preddiff.errors import ImputerError, SchemaError

from conftest import exact_moment_data


class TestTrainSetImputer:
    def test_single_row_always_copied(self):
        data = pd.Dataset(np.array([[7.0, 8.0, 9.0]]))
        imp = pd.fit_train_set(data)
        batch = imp.impute(pd.FeatureSet([0, 2]), data.row(0), 50, seed=1)
        assert np.array_equal(batch.blocks, np.tile([7.0, 9.0], (50, 1)))

    def test_two_row_frequencies(self):
        data = pd.Dataset(np.array([[0.0], [1.0]]))
        imp = pd.fit_train_set(data)
        batch = imp.impute(pd.FeatureSet([0]), data.row(0), 10_000, seed=2)
        freq = batch.blocks.mean()
        assert abs(freq - 0.5) < 0.02  # binomial 3 sigma ~ 0.015

    def test_ignores_conditioning(self):
        data = pd.Dataset(np.array([[0.0, 5.0], [1.0, 6.0]]))
        imp = pd.fit_train_set(data)
        a = imp.impute(pd.FeatureSet([0]), np.array([0.0, 5.0]), 100, seed=3)
        b = imp.impute(pd.FeatureSet([0]), np.array([1.0, 6.0]), 100, seed=3)
        assert np.array_equal(a.blocks, b.blocks)

    def test_occluded_wider_than_schema(self):
        data = pd.Dataset(np.array([[0.0, 1.0]]))
        with pytest.raises(SchemaError):
            pd.fit_train_set(data).impute(pd.FeatureSet([2]), data.row(0), 5)

    def test_determinism(self):
        data = pd.Dataset(np.arange(20.0).reshape(10, 2))
        imp = pd.fit_train_set(data)
        a = imp.impute(pd.FeatureSet([1]), data.row(0), 64, seed=9)
        b = imp.impute(pd.FeatureSet([1]), data.row(0), 64, seed=9)
        assert np.array_equal(a.blocks, b.blocks)


class TestConditionalGaussian:
    def test_closed_form_conditional(self):
        # bivariate standard normal with correlation 0.5, condition x2 = 1:
        # mean = 0.5, variance = 1 - 0.5^2 = 0.75
        data = exact_moment_data(4000, [0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]], seed=4)
        imp = pd.fit_conditional_gaussian(data, ridge=0.0)
        mean, cov = imp.conditional(pd.FeatureSet([0]), np.array([0.0, 1.0]))
        assert mean[0] == pytest.approx(0.5, abs=1e-9)
        assert cov[0, 0] == pytest.approx(0.75, abs=1e-9)

    def test_sampler_matches_conditional_moments(self):
        # Monte-Carlo oracle over the fitted sampler, 4 sigma bounds at n=50000
        data = exact_moment_data(4000, [0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]], seed=4)
        imp = pd.fit_conditional_gaussian(data, ridge=0.0)
        n = 50_000
        batch = imp.impute(pd.FeatureSet([0]), np.array([0.0, 1.0]), n, seed=5)
        draws = batch.blocks[:, 0]
        assert abs(draws.mean() - 0.5) < 4 * np.sqrt(0.75 / n)
        assert abs(draws.var(ddof=1) - 0.75) < 4 * 0.75 * np.sqrt(2 / (n - 1))

    def test_independent_columns_conditional_is_marginal(self):
        rng = np.random.default_rng(6)
        data = pd.Dataset(rng.standard_normal((5000, 3)))
        imp = pd.fit_conditional_gaussian(data)
        n = 20_000
        batch = imp.impute(pd.FeatureSet([0]), np.array([0.0, 3.0, -3.0]), n, seed=7)
        marginal_mean = data.values[:, 0].mean()
        # empirical correlations ~ 1/sqrt(5000) leak a small conditional shift
        cond_mean, cond_var = imp.conditional(pd.FeatureSet([0]), np.array([0.0, 3.0, -3.0]))
        assert abs(cond_mean[0] - marginal_mean) < 0.3
        assert abs(batch.blocks.mean() - cond_mean[0]) < 4 * np.sqrt(cond_var[0, 0] / n)

    def test_occlude_all_gives_marginal(self):
        data = exact_moment_data(3000, [1.0, -2.0], [[2.0, 0.0], [0.0, 0.5]], seed=8)
        imp = pd.fit_conditional_gaussian(data, ridge=0.0)
        n = 50_000
        batch = imp.impute(pd.FeatureSet([0, 1]), data.row(0), n, seed=9)
        means = batch.blocks.mean(axis=0)
        assert abs(means[0] - 1.0) < 4 * np.sqrt(2.0 / n)
        assert abs(means[1] + 2.0) < 4 * np.sqrt(0.5 / n)

    def test_singular_without_ridge(self):
        col = np.linspace(0.0, 1.0, 50)
        data = pd.Dataset(np.column_stack([col, col, np.sin(col)]))  # exact collinearity
        imp = pd.fit_conditional_gaussian(data, ridge=0.0)
        with pytest.raises(ImputerError, match="ridge"):
            imp.impute(pd.FeatureSet([2]), data.row(0), 10, seed=0)

    def test_needs_two_rows(self):
        with pytest.raises(ImputerError):
            pd.fit_conditional_gaussian(pd.Dataset(np.zeros((1, 2))))


class TestExhaustive:
    def test_marginal_enumeration(self, gate_dataset):
        batch = pd.exhaustive_conditional(gate_dataset, pd.FeatureSet([0]),
                                          gate_dataset.row(0), "marginal")
        assert np.array_equal(batch.blocks.ravel(), [0.0, 1.0])
        assert np.array_equal(batch.weights, [0.5, 0.5])

    def test_exact_match_enumeration(self, gate_dataset):
        batch = pd.exhaustive_conditional(gate_dataset, pd.FeatureSet([0]),
                                          np.array([0.0, 1.0]), "exact-match")
        assert np.array_equal(batch.blocks.ravel(), [0.0, 1.0])
        assert np.array_equal(batch.weights, [0.5, 0.5])

    def test_exact_match_weighting(self):
        data = pd.Dataset(np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 1.0], [5.0, 2.0]]))
        batch = pd.exhaustive_conditional(data, pd.FeatureSet([0]),
                                          np.array([9.0, 1.0]), "exact-match")
        assert np.array_equal(batch.blocks.ravel(), [0.0, 1.0])
        assert np.allclose(batch.weights, [2 / 3, 1 / 3])

    def test_missing_conditioning_value(self, gate_dataset):
        with pytest.raises(ImputerError, match="no dataset row"):
            pd.exhaustive_conditional(gate_dataset, pd.FeatureSet([0]),
                                      np.array([0.0, 7.0]), "exact-match")

    def test_weighted_expectation_equals_brute_force(self):
        # the enumeration must reproduce a plain average over matching rows
        rng = np.random.default_rng(10)
        values = np.column_stack([
            rng.integers(0, 3, size=60).astype(float),
            rng.integers(0, 2, size=60).astype(float),
            rng.integers(0, 2, size=60).astype(float),
        ])
        data = pd.Dataset(values)
        occluded = pd.FeatureSet([0, 1])
        conditioning = np.array([0.0, 0.0, 1.0])
        batch = pd.exhaustive_conditional(data, occluded, conditioning, "exact-match")

        def g(block):
            return np.sin(block[0]) + block[0] * block[1] ** 2

        weighted = float(np.sum(batch.weights * np.array([g(b) for b in batch.blocks])))
        matching = values[values[:, 2] == 1.0]
        brute = float(np.mean([g(row[[0, 1]]) for row in matching]))
        assert abs(weighted - brute) < 1e-12


class TestFactorized:
    def test_requires_disjoint(self):
        data = pd.Dataset(np.zeros((3, 3)))
        base = pd.fit_train_set(data)
        with pytest.raises(SchemaError):
            pd.factorize(base, pd.FeatureSet([0, 1]), pd.FeatureSet([1, 2]))

    def test_odd_count_contract(self):
        rng = np.random.default_rng(11)
        data = pd.Dataset(rng.standard_normal((100, 2)))
        fac = pd.factorize(pd.fit_train_set(data), pd.FeatureSet([0]), pd.FeatureSet([1]))
        batch = fac.impute(pd.FeatureSet([0, 1]), data.row(0), 251, seed=1)
        assert batch.n == 251

    def test_independent_base_unchanged_moments(self):
        rng = np.random.default_rng(12)
        data = pd.Dataset(rng.standard_normal((2000, 2)) * [1.0, 2.0] + [0.5, -1.0])
        base = pd.fit_train_set(data)
        fac = pd.factorize(base, pd.FeatureSet([0]), pd.FeatureSet([1]))
        n = 40_000
        crossed = fac.impute(pd.FeatureSet([0, 1]), data.row(0), n, seed=2)
        plain = base.impute(pd.FeatureSet([0, 1]), data.row(0), n, seed=3)
        for col, sigma in ((0, 1.0), (1, 2.0)):
            delta = crossed.blocks[:, col].mean() - plain.blocks[:, col].mean()
            assert abs(delta) < 3 * sigma * np.sqrt(2 / n)

    def test_perfectly_correlated_base_decorrelated(self):
        col = np.random.default_rng(13).standard_normal(3000)
        data = pd.Dataset(np.column_stack([col, col]))  # Y = Z exactly
        fac = pd.factorize(pd.fit_train_set(data), pd.FeatureSet([0]), pd.FeatureSet([1]))
        n = 40_000
        batch = fac.impute(pd.FeatureSet([0, 1]), data.row(0), n, seed=4)
        corr = np.corrcoef(batch.blocks.T)[0, 1]
        assert abs(corr) < 3 / np.sqrt(n)

    def test_marginals_preserved_ks(self):
        # two-sample Kolmogorov-Smirnov at alpha = 0.01 on n = 20000
        rng = np.random.default_rng(14)
        z = rng.standard_normal(4000)
        data = pd.Dataset(np.column_stack([z, 0.7 * z + 0.3 * rng.standard_normal(4000)]))
        base = pd.fit_train_set(data)
        fac = pd.factorize(base, pd.FeatureSet([0]), pd.FeatureSet([1]))
        n = 20_000
        crossed = fac.impute(pd.FeatureSet([0, 1]), data.row(0), n, seed=5)
        reference = base.impute(pd.FeatureSet([0, 1]), data.row(0), n, seed=6)
        for col in (0, 1):
            result = stats.ks_2samp(crossed.blocks[:, col], reference.blocks[:, col])
            assert result.pvalue > 0.01

    def test_exhaustive_product_measure(self, gate_dataset):
        base = pd.ExhaustiveConditionalImputer(gate_dataset, "marginal")
        fac = pd.factorize(base, pd.FeatureSet([0]), pd.FeatureSet([1]))
        batch = fac.impute(pd.FeatureSet([0, 1]), gate_dataset.row(0), None)
        assert batch.n == 4
        assert np.allclose(batch.weights, 0.25)
        # expectation of any separable product factorizes exactly
        e_joint = float(np.sum(batch.weights * batch.blocks[:, 0] * batch.blocks[:, 1]))
        e_y = float(np.sum(batch.weights * batch.blocks[:, 0]))
        e_z = float(np.sum(batch.weights * batch.blocks[:, 1]))
        assert abs(e_joint - e_y * e_z) < 1e-15

    def test_wrong_occlusion_rejected(self, gate_dataset):
        fac = pd.factorize(pd.ExhaustiveConditionalImputer(gate_dataset),
                           pd.FeatureSet([0]), pd.FeatureSet([1]))
        with pytest.raises(SchemaError):
            fac.impute(pd.FeatureSet([0]), gate_dataset.row(0), 10)


class TestImputationBatch:
    def test_weight_validation(self):
        fs = pd.FeatureSet([0])
        with pytest.raises(ImputerError):
            pd.ImputationBatch(fs, np.zeros((2, 1)), np.array([0.6, 0.6]))
        with pytest.raises(ImputerError):
            pd.ImputationBatch(fs, np.zeros((2, 1)), np.array([1.5, -0.5]))

    def test_empty_rejected(self):
        with pytest.raises(ImputerError):
            pd.ImputationBatch(pd.FeatureSet([0]), np.zeros((0, 1)))

    def test_shape_checked(self):
        with pytest.raises(ImputerError):
            pd.ImputationBatch(pd.FeatureSet([0, 1]), np.zeros((3, 1)))
