"""Conditional samplers that realize the marginalization over occluded features.

Every imputer answers the same question: given a sample ``x`` and a feature
set to occlude, produce replacement value-blocks distributed (exactly or
approximately) like those features conditional on the rest of ``x``.

* ``TrainSetImputer`` draws whole training rows, ignoring the conditioning
  values. Its effective distribution is the marginal, i.e. an intervention.
* ``ConditionalGaussianImputer`` fits a joint Gaussian and samples the exact
  Gaussian conditional (Schur-complement covariance).
* ``ExhaustiveConditionalImputer`` enumerates the empirical distribution with
  weights instead of sampling, so downstream expectations are exact. This is
  the workhorse for zero-variance golden tests.
* ``FactorizedImputer`` wraps any of the above and forces the two halves of a
  pair of feature sets to be independent, which classification interaction
  measures require.

Fitted imputers are immutable; every draw takes an explicit seed so parallel
callers control their own streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, FeatureSet, as_sample
from .errors import ImputerError, SchemaError

__all__ = [
    "ImputationBatch",
    "Imputer",
    "TrainSetImputer",
    "ConditionalGaussianImputer",
    "ExhaustiveConditionalImputer",
    "FactorizedImputer",
    "fit_train_set",
    "fit_conditional_gaussian",
    "exhaustive_conditional",
    "factorize",
]

_WEIGHT_TOL = 1e-12
_PRODUCT_GUARD = 2_000_000


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seed(root, *key: int) -> np.random.SeedSequence:
    """Deterministic, order-independent substream for a work item.

    The same (root, key) pair always yields the same stream regardless of
    which worker draws it first. Chaining composes: a child of a child keeps
    the full key path, so (sample, set) grids get pairwise disjoint streams.
    """
    key = tuple(int(k) for k in key)
    if isinstance(root, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=root.entropy, spawn_key=tuple(root.spawn_key) + key
        )
    return np.random.SeedSequence(entropy=root, spawn_key=key)


@dataclass(frozen=True)
class ImputationBatch:
    """Replacement blocks for one occluded feature set.

    ``blocks`` has one row per imputation and one column per occluded index
    (in sorted index order). ``weights`` carries exact probabilities for
    enumerated batches and is ``None`` for equally-weighted sampled batches.
    """

    feature_set: FeatureSet
    blocks: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.ndim != 2 or blocks.shape[1] != len(self.feature_set):
            raise ImputerError(
                f"blocks shape {blocks.shape} does not match occluded set "
                f"of size {len(self.feature_set)}"
            )
        if blocks.shape[0] == 0:
            raise ImputerError("empty imputation batch")
        if not np.all(np.isfinite(blocks)):
            raise ImputerError("non-finite imputation block")
        object.__setattr__(self, "blocks", blocks)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (blocks.shape[0],):
                raise ImputerError("weights must have one entry per block")
            if np.any(w < 0):
                raise ImputerError("negative imputation weight")
            if abs(w.sum() - 1.0) > _WEIGHT_TOL:
                raise ImputerError(f"weights sum to {w.sum()!r}, expected 1")
            object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    def effective_weights(self) -> np.ndarray:
        if self.weights is not None:
            return self.weights
        return np.full(self.n, 1.0 / self.n)

    def column_positions(self, subset: FeatureSet) -> np.ndarray:
        """Positions of ``subset``'s columns inside this batch's block columns."""
        index_of = {c: p for p, c in enumerate(self.feature_set.indices)}
        try:
            return np.array([index_of[c] for c in subset.indices], dtype=int)
        except KeyError:
            raise SchemaError(
                f"subset {subset.indices} not contained in batch set "
                f"{self.feature_set.indices}"
            ) from None


class Imputer:
    """Interface: ``impute(occluded, conditioning, n, seed) -> ImputationBatch``."""

    is_exhaustive = False
    # Marginal imputers ignore the conditioning values (interventional draws).
    is_marginal = False

    def impute(self, occluded: FeatureSet, conditioning, n: int,
               seed=None) -> ImputationBatch:
        raise NotImplementedError


class TrainSetImputer(Imputer):
    """Draws rows uniformly with replacement and copies the occluded columns."""

    is_marginal = True

    def __init__(self, data: Dataset) -> None:
        if data.n_rows < 1:
            raise ImputerError("train-set imputer needs at least one row")
        self.data = data

    def impute(self, occluded: FeatureSet, conditioning, n: int,
               seed=None) -> ImputationBatch:
        occluded.validate_width(self.data.n_cols)
        if n < 1:
            raise ImputerError("n must be >= 1")
        rows = _rng(seed).integers(0, self.data.n_rows, size=n)
        blocks = self.data.values[np.ix_(rows, occluded.indices)]
        return ImputationBatch(occluded, blocks)


def fit_train_set(data: Dataset) -> TrainSetImputer:
    return TrainSetImputer(data)


class ConditionalGaussianImputer(Imputer):
    """Samples occluded features from the fitted Gaussian conditional.

    With mean mu and (ridge-stabilized) covariance S fitted on the data, the
    conditional of the occluded block Y given the remaining features R = r is

        mean = mu_Y + S_YR S_RR^{-1} (r - mu_R)
        cov  = S_YY - S_YR S_RR^{-1} S_RY

    Occluding every column degenerates to the marginal N(mu, S).
    """

    def __init__(self, data: Dataset, ridge: float | None = None) -> None:
        if data.n_rows < 2:
            raise ImputerError("Gaussian imputer needs at least two rows")
        self.data = data
        self.mean = data.values.mean(axis=0)
        cov = np.cov(data.values, rowvar=False, ddof=1)
        cov = np.atleast_2d(cov)
        if ridge is None:
            # default keeps near-singular fits usable; explicit 0 disables it
            ridge = 1e-6 * np.trace(cov) / cov.shape[0]
        if ridge < 0:
            raise ImputerError("ridge must be >= 0")
        self.ridge = float(ridge)
        self.cov = cov + self.ridge * np.eye(cov.shape[0])

    def conditional(self, occluded: FeatureSet, conditioning):
        """Closed-form conditional mean and covariance of the occluded block."""
        occluded.validate_width(self.data.n_cols)
        x = as_sample(conditioning, self.data.n_cols)
        occ = np.array(occluded.indices, dtype=int)
        rest = np.array(occluded.complement(self.data.n_cols), dtype=int)
        if rest.size == 0:
            return self.mean[occ].copy(), self.cov[np.ix_(occ, occ)].copy()
        s_oo = self.cov[np.ix_(occ, occ)]
        s_or = self.cov[np.ix_(occ, rest)]
        s_rr = self.cov[np.ix_(rest, rest)]
        try:
            solved = np.linalg.solve(s_rr, np.column_stack([s_or.T, (x[rest] - self.mean[rest])]))
        except np.linalg.LinAlgError:
            raise ImputerError(
                "singular conditioning covariance; refit with ridge > 0"
            ) from None
        gain = solved[:, :-1].T
        shift = gain @ (x[rest] - self.mean[rest])
        mean = self.mean[occ] + shift
        cov = s_oo - gain @ s_or.T
        return mean, cov

    def impute(self, occluded: FeatureSet, conditioning, n: int,
               seed=None) -> ImputationBatch:
        if n < 1:
            raise ImputerError("n must be >= 1")
        mean, cov = self.conditional(occluded, conditioning)
        # symmetrize before factorizing; roundoff can leave cov slightly skew
        cov = (cov + cov.T) / 2.0
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            eigvals, eigvecs = np.linalg.eigh(cov)
            if np.any(eigvals < -1e-10 * max(1.0, np.abs(eigvals).max())):
                raise ImputerError(
                    "conditional covariance not positive semi-definite; "
                    "refit with ridge > 0"
                ) from None
            chol = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
        z = _rng(seed).standard_normal((n, len(occluded)))
        return ImputationBatch(occluded, mean + z @ chol.T)


def fit_conditional_gaussian(data: Dataset, ridge: float | None = None) -> ConditionalGaussianImputer:
    return ConditionalGaussianImputer(data, ridge)


class ExhaustiveConditionalImputer(Imputer):
    """Enumerates distinct occluded blocks with exact empirical weights.

    ``match_mode='marginal'`` enumerates over all rows; ``'exact-match'``
    restricts to rows that agree with the conditioning sample on every
    non-occluded column (strict equality, intended for discrete fixtures).
    """

    is_exhaustive = True

    def __init__(self, data: Dataset, match_mode: str = "marginal") -> None:
        if match_mode not in ("marginal", "exact-match"):
            raise ImputerError(f"unknown match mode: {match_mode!r}")
        if data.n_rows < 1:
            raise ImputerError("exhaustive imputer needs at least one row")
        self.data = data
        self.match_mode = match_mode
        self.is_marginal = match_mode == "marginal"

    def impute(self, occluded: FeatureSet, conditioning, n: int | None = None,
               seed=None) -> ImputationBatch:
        occluded.validate_width(self.data.n_cols)
        values = self.data.values
        if self.match_mode == "exact-match":
            rest = np.array(occluded.complement(self.data.n_cols), dtype=int)
            x = as_sample(conditioning, self.data.n_cols)
            mask = np.all(values[:, rest] == x[rest], axis=1) if rest.size else \
                np.ones(values.shape[0], dtype=bool)
            if not mask.any():
                raise ImputerError(
                    "no dataset row matches the conditioning values "
                    f"on columns {tuple(rest)}"
                )
            values = values[mask]
        blocks, counts = np.unique(values[:, occluded.indices], axis=0,
                                   return_counts=True)
        return ImputationBatch(occluded, blocks, counts / counts.sum())


def exhaustive_conditional(data: Dataset, occluded: FeatureSet, conditioning,
                           match_mode: str = "marginal") -> ImputationBatch:
    """One-shot enumeration of the empirical conditional (or marginal)."""
    return ExhaustiveConditionalImputer(data, match_mode).impute(occluded, conditioning)


class FactorizedImputer(Imputer):
    """Forces independence between two disjoint feature sets.

    For sampling imputers the joint draw for Y union Z is replaced by crossing
    consecutive pairs of base draws: pairs ((y1, z1), (y2, z2)) become
    ((y1, z2), (y2, z1)), so each output block is distributed like
    q(Y|x) q(Z|x) while the Y- and Z-marginals are untouched.

    For exhaustive imputers the exact equivalent is returned instead: the
    product measure of the two marginal enumerations.
    """

    def __init__(self, base: Imputer, set_y: FeatureSet, set_z: FeatureSet) -> None:
        FeatureSet.assert_disjoint(set_y, set_z)
        self.base = base
        self.set_y = set_y
        self.set_z = set_z
        self.is_exhaustive = base.is_exhaustive
        self.is_marginal = base.is_marginal

    def impute(self, occluded: FeatureSet, conditioning, n: int,
               seed=None) -> ImputationBatch:
        union = self.set_y.union(self.set_z)
        if occluded.indices != union.indices:
            raise SchemaError(
                "factorized imputer only serves its configured pair "
                f"{union.indices}, got {occluded.indices}"
            )
        if self.base.is_exhaustive:
            return self._product_enumeration(union, conditioning)
        return self._crossed_samples(union, conditioning, n, seed)

    def _product_enumeration(self, union: FeatureSet, conditioning) -> ImputationBatch:
        joint = self.base.impute(union, conditioning, None)
        w = joint.effective_weights()
        pos_y = joint.column_positions(self.set_y)
        pos_z = joint.column_positions(self.set_z)
        y_blocks, y_w = _marginalize(joint.blocks[:, pos_y], w)
        z_blocks, z_w = _marginalize(joint.blocks[:, pos_z], w)
        if y_blocks.shape[0] * z_blocks.shape[0] > _PRODUCT_GUARD:
            raise ImputerError("factorized enumeration exceeds the size guard")
        ny, nz = y_blocks.shape[0], z_blocks.shape[0]
        blocks = np.empty((ny * nz, len(union)))
        blocks[:, pos_y] = np.repeat(y_blocks, nz, axis=0)
        blocks[:, pos_z] = np.tile(z_blocks, (ny, 1))
        weights = np.repeat(y_w, nz) * np.tile(z_w, ny)
        weights = weights / weights.sum()
        return ImputationBatch(union, blocks, weights)

    def _crossed_samples(self, union: FeatureSet, conditioning, n: int,
                         seed) -> ImputationBatch:
        if n < 1:
            raise ImputerError("n must be >= 1")
        m = n if n % 2 == 0 else n + 1  # one extra draw pairs up the remainder
        joint = self.base.impute(union, conditioning, m, seed)
        if joint.weights is not None:
            raise ImputerError("crossing expects an equally-weighted batch")
        pos_y = joint.column_positions(self.set_y)
        pos_z = joint.column_positions(self.set_z)
        crossed = joint.blocks.copy()
        even = np.arange(0, m, 2)
        odd = even + 1
        crossed[np.ix_(even, pos_z)] = joint.blocks[np.ix_(odd, pos_z)]
        crossed[np.ix_(odd, pos_z)] = joint.blocks[np.ix_(even, pos_z)]
        return ImputationBatch(union, crossed[:n])


def _marginalize(blocks: np.ndarray, weights: np.ndarray):
    distinct, inverse = np.unique(blocks, axis=0, return_inverse=True)
    w = np.zeros(distinct.shape[0])
    np.add.at(w, inverse, weights)
    return distinct, w


def factorize(imputer: Imputer, set_y: FeatureSet, set_z: FeatureSet) -> FactorizedImputer:
    """Wrap an imputer so joint draws for (set_y, set_z) factorize."""
    return FactorizedImputer(imputer, set_y, set_z)
