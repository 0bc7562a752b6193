import numpy as np
import pytest

import preddiff as pd


@pytest.fixture
def gate_dataset() -> pd.Dataset:
    return pd.Dataset(
        np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]), ("x", "y")
    )


def make_naive_bayes():
    """Three-class classifier over two binary features, conditionally
    independent given the class by construction.

    The class-conditional probabilities are chosen so the features are also
    marginally independent (all four joint cells have probability 1/4) while
    both stay informative; that is the regime in which the factorized
    no-interaction property and the two-feature Shapley identity are exact.
    """
    pi = np.array([1 / 3, 1 / 3, 1 / 3])
    alpha = np.array([0.2, 0.5, 0.8])  # p(y=1 | c)
    beta = np.array([0.3, 0.9, 0.3])   # p(z=1 | c)

    def cond(v, probs):
        return np.where(v == 1, probs, 1 - probs)

    def posterior(rows):
        out = np.empty((rows.shape[0], 3))
        for i, (y, z) in enumerate(rows):
            joint = pi * cond(y, alpha) * cond(z, beta)
            out[i] = joint / joint.sum()
        return out

    model = pd.Model(posterior, pd.TASK_CLASS_PROBS, 3, n_features=2,
                     name="naive-bayes")
    data = pd.Dataset(
        np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]), ("y", "z")
    )
    task = pd.TaskKind.classification(3, laplace=False)
    return model, data, task


@pytest.fixture
def naive_bayes():
    return make_naive_bayes()


def exact_moment_data(n: int, mean, cov, seed: int = 0) -> pd.Dataset:
    """Gaussian-looking data whose sample mean and ddof=1 covariance are
    exactly the requested values (whiten, then recolor)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, mean.size))
    z = z - z.mean(axis=0)
    emp = np.cov(z, rowvar=False, ddof=1)
    z = z @ np.linalg.inv(np.linalg.cholesky(emp)).T
    return pd.Dataset(mean + z @ np.linalg.cholesky(cov).T)
