import numpy as np
import pytest

import preddiff as pd
from preddiff.errors import ModelError, SchemaError


class TestGates:
    def test_or_truth_table(self):
        m = pd.logic_gate_model("or")
        assert np.array_equal(
            pd.predict_batch(m, [[0, 0], [0, 1], [1, 0], [1, 1]]).ravel(),
            [0, 1, 1, 1],
        )

    def test_and_xor(self):
        assert pd.logic_gate_model("and").predict([[0, 1]])[0, 0] == 0.0
        assert pd.logic_gate_model("xor").predict([[1, 1]])[0, 0] == 0.0

    def test_unknown_gate(self):
        with pytest.raises(SchemaError):
            pd.logic_gate_model("nand")


class TestLinear:
    def test_values(self):
        m = pd.linear_model([2.0, 3.0])
        assert m.predict([[1.0, 2.0]])[0, 0] == 8.0
        m1 = pd.linear_model([2.0, 3.0], intercept=1.0)
        assert m1.predict([[0.0, 0.0]])[0, 0] == 1.0
        m2 = pd.linear_model([1.0] * 4)
        assert m2.predict([[1.0, 1.0, 1.0, 1.0]])[0, 0] == 4.0


class TestSyntheticTarget:
    def test_origin(self):
        assert pd.synthetic_target([0.0, 0.0, 0.0, 0.0]) == 0.0

    def test_known_points(self):
        assert pd.synthetic_target([1.0, 1.0, 0.0, 0.0]) == pytest.approx(6.0, abs=1e-12)
        assert pd.synthetic_target([0.0, 1.0, 0.5, 1.0]) == pytest.approx(3.5, abs=1e-12)

    def test_sign_zero_convention(self):
        # sgn(0) = 0 removes the interaction term entirely at x_a = 0
        assert pd.synthetic_target([0.0, 5.0, 0.0, 0.0]) == pytest.approx(15.0)


class TestCallCounter:
    def test_counts_rows(self):
        m = pd.logic_gate_model("or")
        assert m.call_count == 0
        m.predict(np.zeros((5, 2)))
        assert m.call_count == 5
        m.predict(np.zeros((3, 2)))
        assert m.call_count == 8
        m.reset_counter()
        assert m.call_count == 0

    def test_thread_safety(self):
        from concurrent.futures import ThreadPoolExecutor

        m = pd.linear_model([1.0, 1.0])
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(lambda _: m.predict(np.zeros((10, 2))), range(100)))
        assert m.call_count == 1000


class TestModelContract:
    def test_width_mismatch(self):
        with pytest.raises(SchemaError):
            pd.logic_gate_model("or").predict([[1.0, 2.0, 3.0]])

    def test_non_finite_output(self):
        bad = pd.Model(lambda rows: np.full((rows.shape[0], 1), np.nan),
                       "regression", 1)
        with pytest.raises(ModelError):
            bad.predict([[1.0]])

    def test_probability_rows_validated(self):
        bad = pd.Model(lambda rows: np.tile([0.7, 0.7], (rows.shape[0], 1)),
                       pd.TASK_CLASS_PROBS, 2)
        with pytest.raises(ModelError):
            bad.predict([[1.0]])

    def test_regression_single_output(self):
        with pytest.raises(SchemaError):
            pd.Model(lambda rows: rows, "regression", 2)


class TestTaskKind:
    def test_classification_requirements(self):
        with pytest.raises(SchemaError):
            pd.TaskKind.classification(1)
        with pytest.raises(SchemaError):
            pd.TaskKind.classification(3)  # laplace on but no train size
        kind = pd.TaskKind.classification(3, laplace=False)
        assert kind.is_classification


class TestSyntheticDataset:
    def test_shape_and_determinism(self):
        a = pd.generate_synthetic_dataset(3600, seed=11)
        b = pd.generate_synthetic_dataset(3600, seed=11)
        assert a.values.shape == (3600, 4)
        assert np.array_equal(a.values, b.values)
        c = pd.generate_synthetic_dataset(3600, seed=12)
        assert not np.array_equal(a.values, c.values)

    def test_rejects_empty(self):
        with pytest.raises(SchemaError):
            pd.generate_synthetic_dataset(0, seed=1)

    def test_column_means_near_zero(self):
        # CLT bound: 3 sigma / sqrt(n) ~ 0.0095, widened to 0.02
        d = pd.generate_synthetic_dataset(100_000, seed=5)
        assert np.all(np.abs(d.values.mean(axis=0)) < 0.02)
