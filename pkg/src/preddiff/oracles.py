"""Exact brute-force references: Shapley values, interaction indices, and the
sample-anchored decomposition.

Everything here enumerates coalitions or subset lattices explicitly, which is
exponential in the number of feature sets. These oracles exist to validate
the linear-cost engine at small scale, so every entry point is guarded at 15
sets. Combinatorial weights are built as exact rationals before the single
float conversion, which keeps weight round-off out of the efficiency checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .data import FeatureSet, as_sample
from .errors import CostGuardError, SchemaError
from .imputers import ImputationBatch, Imputer
from .models import Model, TaskKind
from .relevance import _log2_probs, imputed_rows, weighted_average

__all__ = [
    "CoalitionTable",
    "VALUE_REGRESSION_OBSERVATIONAL",
    "VALUE_REGRESSION_INTERVENTIONAL",
    "VALUE_CLASSIFICATION_LOG",
    "build_value_table",
    "exact_shapley",
    "shapley_interaction_index",
    "interaction_delta",
    "shapley_efficiency_residual",
    "anchored_decomposition",
]

MAX_SETS = 15

VALUE_REGRESSION_OBSERVATIONAL = "regression-observational"
VALUE_REGRESSION_INTERVENTIONAL = "regression-interventional"
VALUE_CLASSIFICATION_LOG = "classification-log"

_KINDS = (
    VALUE_REGRESSION_OBSERVATIONAL,
    VALUE_REGRESSION_INTERVENTIONAL,
    VALUE_CLASSIFICATION_LOG,
)


@dataclass
class CoalitionTable:
    """Value v(S) for every coalition S of the partition's feature sets.

    Coalitions are frozensets of positions into ``partition``; values are
    per-output vectors so classification tables carry one game per class.
    """

    partition: tuple[FeatureSet, ...]
    kind: str
    values: dict[frozenset, np.ndarray] = field(default_factory=dict)

    @property
    def n_sets(self) -> int:
        return len(self.partition)

    def value(self, coalition) -> np.ndarray:
        return self.values[frozenset(coalition)]

    def is_complete(self) -> bool:
        return len(self.values) == 2 ** self.n_sets


def _guard(n_sets: int) -> None:
    if n_sets > MAX_SETS:
        raise CostGuardError(
            f"{n_sets} feature sets exceed the brute-force guard of {MAX_SETS}"
        )


def build_value_table(model: Model, task: TaskKind, sample,
                      partition: list[FeatureSet], imputer: Imputer | None,
                      kind: str, n_imputations: int | None = None, seed=None,
                      shared_batch: ImputationBatch | None = None) -> CoalitionTable:
    """Evaluate v(S) for every coalition by occluding the complement.

    ``kind`` selects the game: raw expectations for regression, log2 of
    (optionally smoothed) class probabilities for classification. The
    observational variant expects a conditional imputer (exact-match
    enumeration or Gaussian), the interventional variant a marginal one
    (train-set or marginal enumeration).

    When ``shared_batch`` covers the union of the partition, every coalition
    value is a weighted average over that single enumeration, which makes
    identities against engine quantities hold at float precision.
    """
    if kind not in _KINDS:
        raise SchemaError(f"unknown value-function kind: {kind!r}")
    _guard(len(partition))
    FeatureSet.assert_disjoint(*partition)
    x = as_sample(sample, model.n_features)

    if kind == VALUE_REGRESSION_INTERVENTIONAL and imputer is not None \
            and not imputer.is_marginal:
        raise SchemaError("interventional value functions need a marginal imputer")
    if kind == VALUE_REGRESSION_OBSERVATIONAL and imputer is not None \
            and imputer.is_marginal:
        raise SchemaError("observational value functions need a conditional imputer")

    union = partition[0].union(*partition[1:]) if len(partition) > 1 else partition[0]
    if shared_batch is not None and shared_batch.feature_set.indices != union.indices:
        raise SchemaError("shared batch must cover the union of the partition")
    if shared_batch is None and imputer is None:
        raise SchemaError("either an imputer or a shared batch is required")

    f_full = model.predict(x[None, :])[0]
    table = CoalitionTable(tuple(partition), kind)
    positions = list(range(len(partition)))
    for r in range(len(partition) + 1):
        for keep in itertools.combinations(positions, r):
            coalition = frozenset(keep)
            occluded_members = [partition[i] for i in positions if i not in keep]
            if not occluded_members:
                raw = f_full
            else:
                occ = occluded_members[0].union(*occluded_members[1:]) \
                    if len(occluded_members) > 1 else occluded_members[0]
                if shared_batch is not None:
                    preds = model.predict(imputed_rows(x, shared_batch, occ))
                    raw = weighted_average(preds, shared_batch)
                else:
                    batch = imputer.impute(occ, x, n_imputations, seed)
                    preds = model.predict(imputed_rows(x, batch))
                    raw = weighted_average(preds, batch)
            if kind == VALUE_CLASSIFICATION_LOG:
                table.values[coalition] = _log2_probs(raw, task)
            else:
                table.values[coalition] = np.asarray(raw, dtype=float)
    return table


def exact_shapley(table: CoalitionTable, j: int) -> np.ndarray:
    """Shapley value of set ``j``: the factorially weighted average of its
    marginal contributions v(S u {j}) - v(S) over all coalitions S.
    """
    n = table.n_sets
    _guard(n)
    if not table.is_complete():
        raise SchemaError("coalition table is incomplete")
    if not 0 <= j < n:
        raise SchemaError(f"set index {j} out of range for {n} sets")
    others = [i for i in range(n) if i != j]
    total = np.zeros_like(table.value(range(n)))
    for size in range(n):
        weight = float(Fraction(factorial(size) * factorial(n - size - 1), factorial(n)))
        inner = np.zeros_like(total)
        for s in itertools.combinations(others, size):
            inner = inner + (table.value(set(s) | {j}) - table.value(s))
        total = total + weight * inner
    return total


def shapley_interaction_index(table: CoalitionTable, i: int, j: int) -> np.ndarray:
    """Pairwise interaction index: weighted sum of the discrete second-order
    derivatives delta_ij(S) over coalitions excluding i and j.
    """
    n = table.n_sets
    _guard(n)
    if i == j:
        raise SchemaError("interaction index needs two distinct sets")
    if not table.is_complete():
        raise SchemaError("coalition table is incomplete")
    others = [k for k in range(n) if k not in (i, j)]
    total = np.zeros_like(table.value(range(n)))
    for size in range(n - 1):
        weight = float(Fraction(factorial(size) * factorial(n - size - 2),
                                2 * factorial(n - 1)))
        inner = np.zeros_like(total)
        for s in itertools.combinations(others, size):
            inner = inner + interaction_delta(table, i, j, s)
        total = total + weight * inner
    return total


def interaction_delta(table: CoalitionTable, i: int, j: int, coalition) -> np.ndarray:
    """delta_ij(S) = v(S u {i,j}) - v(S u {i}) - v(S u {j}) + v(S)."""
    s = frozenset(coalition)
    if i in s or j in s:
        raise SchemaError("coalition must exclude both sets of the pair")
    return (table.value(s | {i, j}) - table.value(s | {i})
            - table.value(s | {j}) + table.value(s))


def shapley_efficiency_residual(table: CoalitionTable) -> float:
    """Max deviation of sum_j phi_j from v(full) - v(empty)."""
    total = np.zeros_like(table.value(range(table.n_sets)))
    for j in range(table.n_sets):
        total = total + exact_shapley(table, j)
    target = table.value(range(table.n_sets)) - table.value(())
    return float(np.max(np.abs(total - target)))


def anchored_decomposition(f, sets: list[FeatureSet], anchor, query):
    """Inclusion-exclusion expansion of ``f`` around ``anchor``.

    Returns a dict mapping every subset V of set positions (as a tuple,
    including the empty tuple) to the component value

        f^V(query) = sum_{W subset of V} (-1)^{|V|-|W|} f(blend(W)),

    where blend(W) takes the query's values on the sets in W and the anchor's
    values elsewhere. Components sum to f(query); any component whose sets
    include one fixed at its anchor value vanishes.

    ``f`` may be a Model or any callable accepting an (n, d) array.
    """
    _guard(len(sets))
    FeatureSet.assert_disjoint(*sets)
    anchor = np.asarray(anchor, dtype=float)
    query = np.asarray(query, dtype=float)
    if anchor.shape != query.shape or anchor.ndim != 1:
        raise SchemaError("anchor and query must be vectors of equal length")

    evaluate = f.predict if isinstance(f, Model) else f
    k = len(sets)
    subsets = [combo for r in range(k + 1)
               for combo in itertools.combinations(range(k), r)]

    rows = np.tile(anchor, (len(subsets), 1))
    for row, combo in zip(rows, subsets):
        for i in combo:
            row[list(sets[i].indices)] = query[list(sets[i].indices)]
    values = np.asarray(evaluate(rows), dtype=float)
    if values.ndim == 2:
        if values.shape[1] != 1:
            raise SchemaError("anchored decomposition expects a scalar function")
        values = values[:, 0]
    point = {combo: values[i] for i, combo in enumerate(subsets)}

    components = {}
    for v in subsets:
        total = 0.0
        for r in range(len(v) + 1):
            for w in itertools.combinations(v, r):
                total += (-1) ** (len(v) - len(w)) * point[w]
        components[v] = total
    return components
