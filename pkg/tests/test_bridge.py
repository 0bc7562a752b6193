import sys
from pathlib import Path

import numpy as np
import pytest

import preddiff as pd
from preddiff.errors import BridgeError

WORKER = Path(__file__).parent / "workers" / "worker.py"


def worker_cmd(mode, *extra):
    return [sys.executable, str(WORKER), mode, *extra]


class TestHandshake:
    def test_linear_worker_hello(self):
        with pd.BridgeConnection(worker_cmd("linear", "--betas", "2,3")) as conn:
            assert conn.hello == {
                "preddiff_bridge": 1,
                "task": "regression",
                "n_features": 2,
                "n_outputs": 1,
            }

    def test_garbage_hello_names_line(self):
        with pytest.raises(BridgeError, match="this is not json"):
            pd.BridgeConnection(worker_cmd("garbage-hello"))

    def test_feature_mismatch_before_prediction(self):
        with pytest.raises(BridgeError, match="n_features"):
            pd.bridge_model(worker_cmd("wrong-features", "--n-features", "2"),
                            expected_features=2)

    def test_spawn_failure(self):
        with pytest.raises(BridgeError, match="spawn"):
            pd.BridgeConnection(["/no/such/binary-xyz"])

    def test_command_string_rejected(self):
        with pytest.raises(BridgeError):
            pd.BridgeConnection("echo hello")


class TestPredict:
    def test_identity_round_trip(self):
        with pd.BridgeConnection(worker_cmd("identity", "--n-features", "2")) as conn:
            out = conn.predict(np.array([[1.0, 2.0]]))
            assert out.shape == (1, 2)
            assert np.array_equal(out, [[1.0, 2.0]])

    def test_bit_exact_round_trip(self):
        # shortest round-trip decimal serialization preserves every double
        rng = np.random.default_rng(0)
        rows = np.concatenate([
            rng.standard_normal((8, 3)) * 10.0 ** rng.integers(-300, 300, (8, 1)),
            np.array([[0.1, -0.0, 1.7976931348623157e308],
                      [5e-324, 2.2250738585072014e-308, -1e-16]]),
        ])
        with pd.BridgeConnection(worker_cmd("identity", "--n-features", "3")) as conn:
            out = conn.predict(rows)
        assert out.tobytes() == rows.tobytes()

    def test_zero_row_batch(self):
        with pd.BridgeConnection(worker_cmd("identity", "--n-features", "2")) as conn:
            out = conn.predict(np.zeros((0, 2)))
            assert out.shape == (0, 2)

    def test_linear_prediction(self):
        cmd = worker_cmd("linear", "--betas", "2,3,-1", "--intercept", "0.5")
        with pd.BridgeConnection(cmd) as conn:
            out = conn.predict(np.array([[1.0, 2.0, 3.0]]))
            assert out[0, 0] == pytest.approx(2 + 6 - 3 + 0.5, abs=1e-15)

    def test_sequential_ids(self):
        with pd.BridgeConnection(worker_cmd("identity", "--n-features", "1")) as conn:
            for value in (1.0, 2.0, 3.0):
                assert conn.predict(np.array([[value]]))[0, 0] == value

    def test_error_object_raises_and_connection_survives(self):
        with pd.BridgeConnection(worker_cmd("error-on-negative", "--n-features", "1")) as conn:
            with pytest.raises(BridgeError, match="negative input rejected"):
                conn.predict(np.array([[-1.0]]))
            # next request on the same connection still works
            assert conn.predict(np.array([[4.0]]))[0, 0] == 4.0

    def test_id_mismatch_detected(self):
        with pd.BridgeConnection(worker_cmd("bad-id", "--n-features", "1")) as conn:
            with pytest.raises(BridgeError, match="id"):
                conn.predict(np.array([[1.0]]))

    def test_worker_death_attaches_stderr(self):
        with pd.BridgeConnection(worker_cmd("die-on-request", "--n-features", "1")) as conn:
            with pytest.raises(BridgeError, match="worker crashed on purpose"):
                conn.predict(np.array([[1.0]]))

    def test_shape_validation(self):
        with pd.BridgeConnection(worker_cmd("identity", "--n-features", "2")) as conn:
            with pytest.raises(BridgeError):
                conn.predict(np.array([[1.0, 2.0, 3.0]]))

    def test_non_finite_rejected_before_send(self):
        with pd.BridgeConnection(worker_cmd("identity", "--n-features", "1")) as conn:
            with pytest.raises(BridgeError):
                conn.predict(np.array([[np.nan]]))


class TestBridgeModel:
    def test_engine_over_bridge_matches_builtin(self):
        rng = np.random.default_rng(1)
        data = pd.Dataset(rng.standard_normal((50, 3)))
        cmd = worker_cmd("linear", "--betas", "2,3,-1")
        remote = pd.bridge_model(cmd, expected_features=3)
        local = pd.linear_model([2.0, 3.0, -1.0])
        try:
            imp = pd.ExhaustiveConditionalImputer(data, "marginal")
            task = pd.TaskKind.regression()
            for j in range(3):
                a = pd.relevance(remote, task, data.row(0), pd.FeatureSet([j]), imp, None)
                b = pd.relevance(local, task, data.row(0), pd.FeatureSet([j]), imp, None)
                assert a.scalar() == pytest.approx(b.scalar(), abs=1e-12)
        finally:
            remote.close()

    def test_counter_counts_rows(self):
        remote = pd.bridge_model(worker_cmd("identity", "--n-features", "2"))
        try:
            remote.predict(np.zeros((7, 2)))
            assert remote.call_count == 7
        finally:
            remote.close()


class TestPool:
    def test_parallel_predictions(self):
        from concurrent.futures import ThreadPoolExecutor

        model = pd.pooled_bridge_model(worker_cmd("identity", "--n-features", "1"), 3)
        try:
            values = np.arange(60.0)
            with ThreadPoolExecutor(max_workers=6) as pool:
                outs = list(pool.map(
                    lambda v: model.predict(np.array([[v]]))[0, 0], values))
            assert outs == list(values)
            assert model.call_count == 60
        finally:
            model.close()

    def test_pool_size_validated(self):
        with pytest.raises(BridgeError):
            pd.BridgePool(worker_cmd("identity"), 0)
