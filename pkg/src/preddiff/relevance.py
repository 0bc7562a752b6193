"""Prediction-difference relevances: m-values, centered effects, bootstrap.

The m-value of a feature set is the conditional expectation of the model
output with that set marginalized out. The relevance is the prediction at the
sample minus its m-value; for classification both are mapped through log2 of
(optionally Laplace-smoothed) class probabilities, so relevances read as
information differences in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FeatureSet, as_sample
from .errors import ImputerError, PredDiffError, SchemaError
from .imputers import ImputationBatch, Imputer, child_seed
from .models import TASK_CLASS_PROBS, TASK_REGRESSION, Model, TaskKind

__all__ = [
    "EffectReport",
    "laplace_correct",
    "m_value",
    "relevance",
    "relevance_profile",
    "bootstrap_ci",
]


@dataclass
class EffectReport:
    """Point estimate (per model output) with optional bootstrap interval."""

    estimate: np.ndarray
    ci_low: np.ndarray | None
    ci_high: np.ndarray | None
    n_imputations: int
    model_calls: int
    kind: str
    label: str = ""

    def scalar(self, output: int = 0) -> float:
        return float(self.estimate[output])


def laplace_correct(p, n_train: int, n_classes: int):
    """Additive smoothing p -> (p*N + 1) / (N + K), strictly inside (0, 1)."""
    if n_train < 1:
        raise SchemaError("n_train must be >= 1")
    if n_classes < 2:
        raise SchemaError("n_classes must be >= 2")
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise SchemaError("probabilities must lie in [0, 1]")
    arr = np.clip(arr, 0.0, 1.0)
    out = (arr * n_train + 1.0) / (n_train + n_classes)
    return float(out) if np.isscalar(p) else out


def _log2_probs(values: np.ndarray, task: TaskKind) -> np.ndarray:
    if task.laplace:
        values = laplace_correct(values, task.train_size, task.n_classes)
    if np.any(values <= 0):
        raise PredDiffError(
            "zero class probability in a log2 relevance; enable Laplace "
            "smoothing or use a model with full support"
        )
    return np.log2(values)


def imputed_rows(sample: np.ndarray, batch: ImputationBatch,
                 subset: FeatureSet | None = None) -> np.ndarray:
    """Tile the sample and overwrite ``subset``'s columns with block values.

    ``subset`` defaults to the batch's full occluded set; passing a smaller
    set realizes the partial substitutions of the interaction estimators while
    reusing one shared batch.
    """
    rows = np.tile(sample, (batch.n, 1))
    if subset is None:
        rows[:, batch.feature_set.indices] = batch.blocks
    else:
        pos = batch.column_positions(subset)
        rows[:, subset.indices] = batch.blocks[:, pos]
    return rows


def weighted_average(values: np.ndarray, batch: ImputationBatch) -> np.ndarray:
    """Average per-imputation outputs (n, k) with the batch's weights."""
    if batch.weights is not None:
        return batch.weights @ values
    return values.mean(axis=0)


def m_value(model: Model, sample, occluded: FeatureSet,
            batch: ImputationBatch) -> np.ndarray:
    """Expected model output with ``occluded`` replaced by the batch's blocks."""
    x = as_sample(sample, model.n_features)
    occluded.validate_width(x.shape[0])
    if batch.feature_set.indices != occluded.indices:
        raise SchemaError(
            f"batch covers columns {batch.feature_set.indices}, "
            f"expected {occluded.indices}"
        )
    preds = model.predict(imputed_rows(x, batch))
    return weighted_average(preds, batch)


def _check_task(model: Model, task: TaskKind) -> None:
    if task.is_classification:
        if model.task != TASK_CLASS_PROBS:
            raise SchemaError(
                "classification relevances need probability outputs; "
                "calibrate logits first (see calibration.apply_temperature)"
            )
        if model.n_outputs != task.n_classes:
            raise SchemaError(
                f"model has {model.n_outputs} outputs, task declares "
                f"{task.n_classes} classes"
            )
    elif model.task != TASK_REGRESSION:
        raise SchemaError("regression task requires a regression model")


def _centered(f0: np.ndarray, m: np.ndarray, task: TaskKind) -> np.ndarray:
    if task.is_classification:
        return _log2_probs(f0, task) - _log2_probs(m, task)
    return f0 - m


def _resample_indices(rng: np.random.Generator, batch: ImputationBatch) -> np.ndarray:
    if batch.weights is not None:
        return rng.choice(batch.n, size=batch.n, p=batch.weights)
    return rng.integers(0, batch.n, size=batch.n)


def _percentile_ci(replicates: np.ndarray, estimate: np.ndarray, level: float):
    lo = np.percentile(replicates, 100 * (1 - level) / 2, axis=0)
    hi = np.percentile(replicates, 100 * (1 + level) / 2, axis=0)
    # the interval always brackets the point estimate
    return np.minimum(lo, estimate), np.maximum(hi, estimate)


def relevance(model: Model, task: TaskKind, sample, occluded: FeatureSet,
              imputer: Imputer, n_imputations: int, seed=None,
              bootstrap: int = 0, level: float = 0.95,
              _f0: np.ndarray | None = None) -> EffectReport:
    """Centered relevance of ``occluded`` at ``sample``.

    Regression: f(x) - m. Classification: log2 p_c(x) - log2 m_c per class,
    after optional Laplace smoothing of both factors. Bootstrap intervals
    resample the imputation blocks, which is where the estimator's randomness
    lives.
    """
    _check_task(model, task)
    x = as_sample(sample, model.n_features)
    if _f0 is None:
        f0 = model.predict(x[None, :])[0]
        sample_calls = 1
    else:
        f0 = np.asarray(_f0, dtype=float)
        sample_calls = 0
    batch = imputer.impute(occluded, x, n_imputations, seed)
    preds = model.predict(imputed_rows(x, batch))
    m = weighted_average(preds, batch)
    est = _centered(f0, m, task)
    ci_low = ci_high = None
    if bootstrap:
        rng = np.random.default_rng(child_seed(seed, 0xB0075) if seed is not None else None)
        reps = np.empty((bootstrap, est.shape[0]))
        for b in range(bootstrap):
            idx = _resample_indices(rng, batch)
            reps[b] = _centered(f0, preds[idx].mean(axis=0), task)
        ci_low, ci_high = _percentile_ci(reps, est, level)
    return EffectReport(
        estimate=est,
        ci_low=ci_low,
        ci_high=ci_high,
        n_imputations=batch.n,
        model_calls=batch.n + sample_calls,
        kind="relevance",
    )


def relevance_profile(model: Model, task: TaskKind, sample,
                      sets: list[FeatureSet], imputer: Imputer,
                      n_imputations: int, seed=None, bootstrap: int = 0,
                      level: float = 0.95) -> list[EffectReport]:
    """Relevances of several feature sets sharing one sample prediction.

    With a sampling imputer this costs exactly len(sets) * n_imputations + 1
    model-call rows.
    """
    _check_task(model, task)
    x = as_sample(sample, model.n_features)
    f0 = model.predict(x[None, :])[0]
    reports = []
    for k, s in enumerate(sets):
        sub_seed = child_seed(seed, k) if seed is not None else None
        reports.append(
            relevance(model, task, x, s, imputer, n_imputations,
                      seed=sub_seed, bootstrap=bootstrap, level=level, _f0=f0)
        )
    return reports


def bootstrap_ci(values, n_boot: int, level: float = 0.95, seed=None):
    """Percentile bootstrap interval for the mean of a sample.

    Returns (low, high); deterministic in the seed.
    """
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size < 2:
        raise ImputerError("bootstrap needs at least two values")
    if not 0 < level < 1:
        raise SchemaError("level must lie strictly between 0 and 1")
    if n_boot < 1:
        raise SchemaError("n_boot must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, vals.size, size=(n_boot, vals.size))
    means = vals[idx].mean(axis=1)
    lo = float(np.percentile(means, 100 * (1 - level) / 2))
    hi = float(np.percentile(means, 100 * (1 + level) / 2))
    return lo, hi
