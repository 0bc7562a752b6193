"""Classification: calibration, log2 relevances, and the no-interaction test.

Classification relevances read probabilities as information, so they need a
calibrated classifier. This demo fits a softmax temperature on logits,
computes per-class log2 relevances with Laplace smoothing, and checks the
defining property of the interaction measure: a classifier whose features
are conditionally independent given the class has zero joint effect once
the imputer is factorized.

Run: python demos/04_classification_calibration.py
"""

import numpy as np

import preddiff as pd

rng = np.random.default_rng(11)

# --- temperature scaling -------------------------------------------------
k = 4
centers = np.eye(k) * 3.0 + rng.standard_normal((k, k)) * 0.5
labels = rng.integers(0, k, 600)
logits = (centers[labels] + rng.standard_normal((600, k))) * 2.5  # overconfident

fit = pd.fit_temperature(logits, labels)
print(f"fitted temperature T = {fit.temperature:.3f} "
      f"(NLL {fit.nll_at_unit:.3f} -> {fit.nll:.3f})")

logits_model = pd.Model(lambda rows: rows @ centers.T * 2.5,
                        pd.TASK_CLASS_LOGITS, k, n_features=k)
calibrated = pd.apply_temperature(logits_model, fit.temperature)

# --- per-class relevances on the calibrated model ------------------------
data = pd.Dataset(rng.standard_normal((500, k)))
task = pd.TaskKind.classification(k, train_size=data.n_rows)
imputer = pd.fit_train_set(data)
sample = data.row(0)
predicted = int(np.argmax(calibrated.predict(sample[None, :])))
print(f"\nsample 0 predicted class: {predicted}")
print(f"{'feature':>8} " + " ".join(f"class{c:>2}" for c in range(k)))
for j in range(k):
    rep = pd.relevance(calibrated, task, sample, pd.FeatureSet([j]), imputer,
                       400, seed=pd.child_seed(4, j))
    print(f"{j:>8} " + " ".join(f"{rep.estimate[c]:+7.3f}" for c in range(k)))
print("(positive: the feature value adds bits of evidence for that class)")

# --- no-interaction property ---------------------------------------------
print("\nnaive-Bayes no-interaction check (factorized exhaustive imputer):")
pi = np.array([1 / 3, 1 / 3, 1 / 3])
alpha = np.array([0.2, 0.5, 0.8])
beta = np.array([0.3, 0.9, 0.3])


def posterior(rows):
    out = np.empty((rows.shape[0], 3))
    for i, (y, z) in enumerate(rows):
        joint = pi * np.where(y == 1, alpha, 1 - alpha) \
            * np.where(z == 1, beta, 1 - beta)
        out[i] = joint / joint.sum()
    return out


nb_model = pd.Model(posterior, pd.TASK_CLASS_PROBS, 3, n_features=2)
nb_data = pd.Dataset(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]))
nb_task = pd.TaskKind.classification(3, laplace=False)
nb_imputer = pd.ExhaustiveConditionalImputer(nb_data, "marginal")
worst = 0.0
for i in range(4):
    rep = pd.joint_effect(nb_model, nb_task, nb_data.row(i), pd.FeatureSet([0]),
                          pd.FeatureSet([1]), nb_imputer, None)
    worst = max(worst, float(np.max(np.abs(rep.joint.estimate))))
print(f"max |joint effect| over the support: {worst:.2e} (zero up to roundoff)")
