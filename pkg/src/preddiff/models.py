"""Model abstraction and built-in analytic models used as ground-truth fixtures."""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .data import Dataset, as_sample
from .errors import ModelError, SchemaError

__all__ = [
    "TASK_REGRESSION",
    "TASK_CLASS_PROBS",
    "TASK_CLASS_LOGITS",
    "TaskKind",
    "Model",
    "predict_batch",
    "logic_gate_model",
    "linear_model",
    "constant_model",
    "synthetic_target",
    "synthetic_model",
    "generate_synthetic_dataset",
]

TASK_REGRESSION = "regression"
TASK_CLASS_PROBS = "classification_probabilities"
TASK_CLASS_LOGITS = "classification_logits"

_TASKS = (TASK_REGRESSION, TASK_CLASS_PROBS, TASK_CLASS_LOGITS)


@dataclass(frozen=True)
class TaskKind:
    """Task declaration plus the constants needed for probability smoothing.

    ``train_size`` and ``n_classes`` feed the additive smoothing map
    p -> (p*N + 1) / (N + K); ``laplace=False`` disables smoothing for
    analytic fixtures whose probabilities are exact.
    """

    kind: str
    n_classes: int | None = None
    train_size: int | None = None
    laplace: bool = True

    def __post_init__(self) -> None:
        if self.kind not in _TASKS:
            raise SchemaError(f"unknown task kind: {self.kind!r}")
        if self.kind != TASK_REGRESSION:
            if self.n_classes is None or self.n_classes < 2:
                raise SchemaError("classification requires n_classes >= 2")
            if self.laplace and (self.train_size is None or self.train_size < 1):
                raise SchemaError("Laplace smoothing requires train_size >= 1")

    @property
    def is_classification(self) -> bool:
        return self.kind != TASK_REGRESSION

    @staticmethod
    def regression() -> "TaskKind":
        return TaskKind(TASK_REGRESSION)

    @staticmethod
    def classification(n_classes: int, train_size: int | None = None,
                       laplace: bool = True) -> "TaskKind":
        return TaskKind(TASK_CLASS_PROBS, n_classes, train_size, laplace)


class Model:
    """Opaque batch predictor with a declared task and a row counter.

    ``predict_fn`` maps an (n, n_features) array to an (n, n_outputs) array.
    Every prediction increments ``call_count`` by the batch size; the counter
    is the basis for the model-call accounting checks and is guarded by a lock
    so worker threads can share one model.
    """

    def __init__(self, predict_fn, task: str, n_outputs: int,
                 n_features: int | None = None, name: str = "model") -> None:
        if task not in _TASKS:
            raise SchemaError(f"unknown task kind: {task!r}")
        if n_outputs < 1:
            raise SchemaError("n_outputs must be >= 1")
        if task == TASK_REGRESSION and n_outputs != 1:
            raise SchemaError("regression models have exactly one output")
        self._predict_fn = predict_fn
        self.task = task
        self.n_outputs = int(n_outputs)
        self.n_features = None if n_features is None else int(n_features)
        self.name = name
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def reset_counter(self) -> None:
        with self._lock:
            self._calls = 0

    def predict(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.ndim != 2:
            raise SchemaError(f"prediction input must be 2-D, got shape {rows.shape}")
        if self.n_features is not None and rows.shape[1] != self.n_features:
            raise SchemaError(
                f"{self.name}: input width {rows.shape[1]}, expected {self.n_features}"
            )
        if rows.shape[0] == 0:
            out = np.zeros((0, self.n_outputs))
        else:
            out = np.asarray(self._predict_fn(rows), dtype=float)
            if out.ndim == 1:
                out = out[:, None]
            if out.shape != (rows.shape[0], self.n_outputs):
                raise ModelError(
                    f"{self.name}: output shape {out.shape}, "
                    f"expected {(rows.shape[0], self.n_outputs)}"
                )
            if not np.all(np.isfinite(out)):
                raise ModelError(f"{self.name}: non-finite prediction")
            if self.task == TASK_CLASS_PROBS:
                if np.any(out < -1e-9) or np.any(out > 1 + 1e-9):
                    raise ModelError(f"{self.name}: probabilities outside [0, 1]")
                sums = out.sum(axis=1)
                if np.any(np.abs(sums - 1.0) > 1e-9):
                    raise ModelError(f"{self.name}: probability rows do not sum to 1")
        with self._lock:
            self._calls += rows.shape[0]
        return out


def predict_batch(model: Model, rows) -> np.ndarray:
    """Predict a batch of samples, enforcing the shape and counting contract."""
    return model.predict(np.asarray(rows, dtype=float))


def logic_gate_model(kind: str) -> Model:
    """OR / AND / XOR of two binary features as a 0/1 regression model."""
    kind = kind.lower()
    ops = {
        "or": lambda a, b: np.logical_or(a, b),
        "and": lambda a, b: np.logical_and(a, b),
        "xor": lambda a, b: np.logical_xor(a, b),
    }
    if kind not in ops:
        raise SchemaError(f"unknown gate: {kind!r} (expected or|and|xor)")
    op = ops[kind]

    def predict(rows):
        a = rows[:, 0] != 0
        b = rows[:, 1] != 0
        return op(a, b).astype(float)

    return Model(predict, TASK_REGRESSION, 1, n_features=2, name=kind)


def linear_model(betas, intercept: float = 0.0) -> Model:
    """Regression model ``intercept + betas . x``."""
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 1 or betas.size == 0:
        raise SchemaError("betas must be a non-empty 1-D vector")

    def predict(rows):
        return rows @ betas + intercept

    return Model(predict, TASK_REGRESSION, 1, n_features=betas.size, name="linear")


def constant_model(value, n_outputs: int = 1, task: str = TASK_REGRESSION,
                   n_features: int | None = None) -> Model:
    """Model that ignores its input, useful for dummy-feature checks."""
    value = np.broadcast_to(np.asarray(value, dtype=float), (n_outputs,)).copy()

    def predict(rows):
        return np.tile(value, (rows.shape[0], 1))

    return Model(predict, task, n_outputs, n_features=n_features, name="constant")


def synthetic_target(x) -> np.ndarray:
    """Four-feature benchmark target with one sign/abs interaction.

    f(x) = x_a^2 + 3 x_b + sin(pi x_c) - x_d^3 / 2 + 2 sgn(x_a) |x_b|,
    with sgn(0) = 0. Accepts a single vector or an (n, 4) matrix.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != 4:
        raise SchemaError(f"synthetic target expects 4 features, got {x.shape[1]}")
    a, b, c, d = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    out = a ** 2 + 3.0 * b + np.sin(np.pi * c) - 0.5 * d ** 3 + 2.0 * np.sign(a) * np.abs(b)
    return out[0] if single else out


def synthetic_model() -> Model:
    return Model(synthetic_target, TASK_REGRESSION, 1, n_features=4, name="synthetic")


def generate_synthetic_dataset(n: int, seed: int) -> Dataset:
    """n rows of four independent standard-normal features (unit variance)."""
    if n < 1:
        raise SchemaError("n must be >= 1")
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((n, 4))
    return Dataset(values, ("x_a", "x_b", "x_c", "x_d"))


def sample_prediction(model: Model, sample) -> np.ndarray:
    """Predict a single sample; returns a vector of length n_outputs."""
    x = as_sample(sample, model.n_features)
    return model.predict(x[None, :])[0]
