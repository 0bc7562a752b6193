"""Temperature scaling: one global factor that turns logits into calibrated
probabilities, fitted by minimizing the negative log-likelihood."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .models import TASK_CLASS_LOGITS, TASK_CLASS_PROBS, Model

__all__ = ["softmax", "nll", "TemperatureFit", "fit_temperature", "apply_temperature"]

LOG_T_BOUNDS = (-4.0, 4.0)


def softmax(logits, axis: int = -1) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=axis, keepdims=True)  # overflow safety
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _check_inputs(logits, labels):
    logits = np.asarray(logits, dtype=float)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise SchemaError("logits must be (n, K) with K >= 2")
    if logits.shape[0] < 2:
        raise SchemaError("temperature fitting needs at least two rows")
    if not np.all(np.isfinite(logits)):
        raise SchemaError("non-finite logits")
    if labels.shape != (logits.shape[0],):
        raise SchemaError("labels must be one class index per logit row")
    labels = labels.astype(int)
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise SchemaError("label out of class range")
    if np.unique(labels).size < 2:
        raise SchemaError("temperature fitting needs at least two distinct classes")
    return logits, labels


def nll(logits, labels, temperature: float = 1.0) -> float:
    """Mean negative log-likelihood of softmax(logits / T)."""
    if temperature <= 0:
        raise SchemaError("temperature must be positive")
    z = np.asarray(logits, dtype=float) / temperature
    z = z - z.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    rows = np.arange(z.shape[0])
    return float(-log_probs[rows, np.asarray(labels, dtype=int)].mean())


@dataclass(frozen=True)
class TemperatureFit:
    temperature: float
    nll: float
    nll_at_unit: float
    at_bound: bool


def fit_temperature(logits, labels, log_t_bounds=LOG_T_BOUNDS,
                    tol: float = 1e-6) -> TemperatureFit:
    """Minimize NLL over log T on a bounded interval by golden-section search.

    The search domain is bounded, so a monotone NLL (e.g. a two-row toy set
    that rewards ever-larger confidence) pins T at an endpoint; that case is
    flagged via ``at_bound`` instead of silently returned.
    """
    logits, labels = _check_inputs(logits, labels)
    lo, hi = map(float, log_t_bounds)
    if not lo < hi:
        raise SchemaError("log-temperature bounds must satisfy lo < hi")

    def objective(u: float) -> float:
        return nll(logits, labels, float(np.exp(u)))

    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = objective(d)
    u_best = (a + b) / 2.0
    candidates = [(objective(u), u) for u in (lo, u_best, hi)]
    best_val, best_u = min(candidates)
    temperature = float(np.exp(best_u))
    at_bound = bool(min(best_u - lo, hi - best_u) <= 10 * tol)
    return TemperatureFit(
        temperature=temperature,
        nll=best_val,
        nll_at_unit=nll(logits, labels, 1.0),
        at_bound=at_bound,
    )


def apply_temperature(model: Model, temperature: float) -> Model:
    """Wrap a logits model into a calibrated-probability model."""
    if temperature <= 0:
        raise SchemaError("temperature must be positive")
    if model.task != TASK_CLASS_LOGITS:
        raise SchemaError("apply_temperature expects a logits model")

    def predict(rows):
        return softmax(model.predict(rows) / temperature, axis=1)

    wrapped = Model(predict, TASK_CLASS_PROBS, model.n_outputs,
                    n_features=model.n_features, name=f"{model.name}@T={temperature:g}")
    wrapped.temperature = temperature
    wrapped.wrapped = model
    return wrapped
