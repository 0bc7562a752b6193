"""Interaction effects: raw and shielded joint effects on shared imputations.

All terms of one decomposition are computed from a single batch of joint
imputations for the combined feature set. That choice makes the completeness
relation

    relevance(Y u Z) = main(Y) + main(Z) + joint(Y, Z)

an algebraic identity of the estimator rather than something that only holds
in expectation, and it is what keeps additive models at exactly zero joint
effect per sample.

Classification joint effects are always routed through the factorizing
wrapper: the estimator is only sound when the occluded pair is imputed from a
product distribution, so the public API gives no way to skip it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .data import FeatureSet, as_sample
from .errors import CostGuardError, SchemaError
from .imputers import FactorizedImputer, Imputer, child_seed
from .models import Model, TaskKind
from .relevance import (
    EffectReport,
    _centered,
    _check_task,
    _log2_probs,
    _percentile_ci,
    _resample_indices,
    imputed_rows,
    weighted_average,
)

__all__ = [
    "InteractionReport",
    "ThreePointReport",
    "joint_effect",
    "interaction_profile",
    "three_point_effects",
    "completeness_check",
    "decomposition_components",
]


@dataclass
class InteractionReport:
    """Two-point decomposition of the combined relevance of (Y, Z)."""

    set_y: FeatureSet
    set_z: FeatureSet
    relevance_yz: EffectReport
    main_y: EffectReport
    main_z: EffectReport
    joint: EffectReport
    shielded_main_y: EffectReport | None
    shielded_main_z: EffectReport | None
    shielded_joint: EffectReport | None
    completeness_residual: float
    model_calls: int


@dataclass
class ThreePointReport:
    """Raw and shielded three-point decomposition terms (regression only)."""

    sets: tuple[FeatureSet, FeatureSet, FeatureSet]
    relevance_abc: EffectReport
    mains: tuple[EffectReport, EffectReport, EffectReport]
    pairs: tuple[EffectReport, EffectReport, EffectReport]  # AB, BC, AC
    triple: EffectReport
    shielded_mains: tuple[EffectReport, EffectReport, EffectReport]
    shielded_pairs: tuple[EffectReport, EffectReport, EffectReport]
    completeness_residual: float
    shielded_completeness_residual: float
    model_calls: int


def _report(est, n, calls, kind, label="", ci=None) -> EffectReport:
    lo, hi = (None, None) if ci is None else ci
    return EffectReport(estimate=est, ci_low=lo, ci_high=hi, n_imputations=n,
                        model_calls=calls, kind=kind, label=label)


def _interaction_imputer(imputer: Imputer, task: TaskKind, set_y: FeatureSet,
                         set_z: FeatureSet) -> Imputer:
    if not task.is_classification:
        return imputer
    if isinstance(imputer, FactorizedImputer):
        pair = {imputer.set_y.indices, imputer.set_z.indices}
        if pair == {set_y.indices, set_z.indices}:
            return imputer
        raise SchemaError("factorized imputer configured for a different pair")
    return FactorizedImputer(imputer, set_y, set_z)


def joint_effect(model: Model, task: TaskKind, sample, set_y: FeatureSet,
                 set_z: FeatureSet, imputer: Imputer, n_imputations: int,
                 seed=None, bootstrap: int = 0, level: float = 0.95,
                 _f0: np.ndarray | None = None) -> InteractionReport:
    """Raw main/joint effects of a disjoint pair, plus shielded regrouping.

    Per shared joint imputation (Y_j, Z_j) the estimator accumulates
    f(x, Y_j, z) + f(x, y, Z_j) - f(x, Y_j, Z_j), averages, and subtracts
    f(x, y, z); the main effects reuse the same blocks. Classification runs
    the identical structure on log2 (optionally Laplace-smoothed)
    probabilities with the factorizing wrapper applied automatically; its
    shielded terms are not defined and are reported as None.
    """
    _check_task(model, task)
    FeatureSet.assert_disjoint(set_y, set_z)
    x = as_sample(sample, model.n_features)
    imputer = _interaction_imputer(imputer, task, set_y, set_z)
    union = set_y.union(set_z)

    sample_calls = 1 if _f0 is None else 0
    f0 = model.predict(x[None, :])[0] if _f0 is None else np.asarray(_f0, dtype=float)
    batch = imputer.impute(union, x, n_imputations, seed)
    n = batch.n
    stacked = np.concatenate([
        imputed_rows(x, batch, set_y),
        imputed_rows(x, batch, set_z),
        imputed_rows(x, batch),
    ])
    preds = model.predict(stacked)
    v_y, v_z, v_yz = preds[:n], preds[n:2 * n], preds[2 * n:]

    def terms(idx=None):
        if idx is None:
            m_y = weighted_average(v_y, batch)
            m_z = weighted_average(v_z, batch)
            m_yz = weighted_average(v_yz, batch)
            combo = weighted_average(v_y + v_z - v_yz, batch)
        else:
            m_y = v_y[idx].mean(axis=0)
            m_z = v_z[idx].mean(axis=0)
            m_yz = v_yz[idx].mean(axis=0)
            combo = (v_y[idx] + v_z[idx] - v_yz[idx]).mean(axis=0)
        rel = _centered(f0, m_yz, task)
        main_y = _centered(f0, m_y, task)
        main_z = _centered(f0, m_z, task)
        if task.is_classification:
            joint = (_log2_probs(m_y, task) + _log2_probs(m_z, task)
                     - _log2_probs(m_yz, task) - _log2_probs(f0, task))
        else:
            joint = combo - f0
        return rel, main_y, main_z, joint

    rel, main_y, main_z, joint = terms()
    residual = float(np.max(np.abs(rel - (main_y + main_z + joint))))

    cis = {name: None for name in
           ("rel", "main_y", "main_z", "joint", "sh_y", "sh_z", "sh_joint")}
    if bootstrap:
        rng = np.random.default_rng(child_seed(seed, 0xB0075) if seed is not None else None)
        reps = {name: np.empty((bootstrap, model.n_outputs)) for name in cis}
        for b in range(bootstrap):
            idx = _resample_indices(rng, batch)
            r_rel, r_my, r_mz, r_joint = terms(idx)
            reps["rel"][b], reps["main_y"][b] = r_rel, r_my
            reps["main_z"][b], reps["joint"][b] = r_mz, r_joint
            reps["sh_y"][b] = r_joint + r_my
            reps["sh_z"][b] = r_joint + r_mz
            reps["sh_joint"][b] = -r_joint
        point = {"rel": rel, "main_y": main_y, "main_z": main_z, "joint": joint,
                 "sh_y": joint + main_y, "sh_z": joint + main_z, "sh_joint": -joint}
        cis = {name: _percentile_ci(reps[name], point[name], level) for name in reps}

    total_calls = 3 * n + sample_calls
    label_y = f"{set_y.indices}"
    label_z = f"{set_z.indices}"
    if task.is_classification:
        sh_y = sh_z = sh_joint = None
    else:
        sh_y = _report(joint + main_y, n, 0, "shielded-main", label_y, cis["sh_y"])
        sh_z = _report(joint + main_z, n, 0, "shielded-main", label_z, cis["sh_z"])
        sh_joint = _report(-joint, n, 0, "shielded-joint",
                           f"{label_y}*{label_z}", cis["sh_joint"])
    return InteractionReport(
        set_y=set_y,
        set_z=set_z,
        relevance_yz=_report(rel, n, n, "relevance", f"{label_y}+{label_z}", cis["rel"]),
        main_y=_report(main_y, n, n, "main", label_y, cis["main_y"]),
        main_z=_report(main_z, n, n, "main", label_z, cis["main_z"]),
        joint=_report(joint, n, n, "joint", f"{label_y}*{label_z}", cis["joint"]),
        shielded_main_y=sh_y,
        shielded_main_z=sh_z,
        shielded_joint=sh_joint,
        completeness_residual=residual,
        model_calls=total_calls,
    )


def interaction_profile(model: Model, task: TaskKind, sample,
                        pairs: list[tuple[FeatureSet, FeatureSet]],
                        imputer: Imputer, n_imputations: int, seed=None,
                        bootstrap: int = 0, level: float = 0.95) -> list[InteractionReport]:
    """Joint effects for several pairs sharing one sample prediction.

    With a sampling imputer this costs at most 3 * len(pairs) * n_imputations
    + 1 model-call rows.
    """
    _check_task(model, task)
    x = as_sample(sample, model.n_features)
    f0 = model.predict(x[None, :])[0]
    reports = []
    for k, (set_y, set_z) in enumerate(pairs):
        sub_seed = child_seed(seed, k) if seed is not None else None
        reports.append(
            joint_effect(model, task, x, set_y, set_z, imputer, n_imputations,
                         seed=sub_seed, bootstrap=bootstrap, level=level, _f0=f0)
        )
    return reports


def three_point_effects(model: Model, sample, set_a: FeatureSet,
                        set_b: FeatureSet, set_c: FeatureSet, imputer: Imputer,
                        n_imputations: int, seed=None) -> ThreePointReport:
    """Three-point decomposition on shared imputations (regression only).

    The seven raw terms are the projections of the sample-anchored expansion:
    each main effect occludes one set with the partners frozen at the sample,
    each pair term subtracts its two mains from the pairwise relevance, and
    the triple term is the remainder against the combined relevance. Shielded
    variants marginalize the partners instead of freezing them.
    """
    if model.task != "regression":
        raise SchemaError("three-point effects are defined for regression models")
    FeatureSet.assert_disjoint(set_a, set_b, set_c)
    x = as_sample(sample, model.n_features)
    sets = (set_a, set_b, set_c)
    union = set_a.union(set_b, set_c)

    f0 = model.predict(x[None, :])[0]
    batch = imputer.impute(union, x, n_imputations, seed)
    n = batch.n

    # occlusion patterns: every non-empty subset of {A, B, C}
    patterns = [combo for r in (1, 2, 3) for combo in itertools.combinations(range(3), r)]
    stacked = np.concatenate([
        imputed_rows(x, batch, _union_of(sets, combo)) for combo in patterns
    ])
    preds = model.predict(stacked)
    m = {
        combo: weighted_average(preds[i * n:(i + 1) * n], batch)
        for i, combo in enumerate(patterns)
    }

    rel = {combo: f0 - m[combo] for combo in patterns}
    mains = {i: rel[(i,)] for i in range(3)}
    pair_keys = [(0, 1), (1, 2), (0, 2)]
    pairs = {k: rel[k] - mains[k[0]] - mains[k[1]] for k in pair_keys}
    triple = rel[(0, 1, 2)] - sum(pairs.values()) - sum(mains.values())
    residual = float(np.max(np.abs(
        rel[(0, 1, 2)] - (sum(mains.values()) + sum(pairs.values()) + triple)
    )))

    # shielded main of A marginalizes B and C, shielded pair AB marginalizes C
    sh_mains = {i: rel[(0, 1, 2)] - rel[_others(i)] for i in range(3)}
    sh_pairs = {k: rel[(0, 1, 2)] - rel[(_third(k),)] for k in pair_keys}
    sh_residual = float(np.max(np.abs(
        rel[(0, 1, 2)]
        - (-sum(sh_mains.values()) + sum(sh_pairs.values()) + triple)
    )))

    total_calls = 7 * n + 1
    names = tuple(str(s.indices) for s in sets)

    def rep(est, kind, label, calls=0):
        return _report(est, n, calls, kind, label)

    return ThreePointReport(
        sets=sets,
        relevance_abc=rep(rel[(0, 1, 2)], "relevance", "+".join(names), calls=n),
        mains=tuple(rep(mains[i], "main", names[i], calls=n) for i in range(3)),
        pairs=tuple(rep(pairs[k], "joint", f"{names[k[0]]}*{names[k[1]]}", calls=n)
                    for k in pair_keys),
        triple=rep(triple, "joint", "*".join(names), calls=n),
        shielded_mains=tuple(rep(sh_mains[i], "shielded-main", names[i]) for i in range(3)),
        shielded_pairs=tuple(rep(sh_pairs[k], "shielded-joint",
                                 f"{names[k[0]]}*{names[k[1]]}") for k in pair_keys),
        completeness_residual=residual,
        shielded_completeness_residual=sh_residual,
        model_calls=total_calls,
    )


def _union_of(sets, combo) -> FeatureSet:
    members = [sets[i] for i in combo]
    return members[0].union(*members[1:])


def _others(i: int) -> tuple[int, ...]:
    return tuple(sorted(set(range(3)) - {i}))


def _third(pair: tuple[int, int]) -> int:
    return ({0, 1, 2} - set(pair)).pop()


def decomposition_components(model: Model, sample, sets: list[FeatureSet],
                             imputer: Imputer, n_imputations: int, seed=None):
    """Anchored decomposition of the combined relevance into 2^K - 1 terms.

    Returns (components, residual) where components maps each non-empty
    subset of set positions to its effect value. Costs (2^K - 1) * n model
    rows, so it is guarded; the dedicated two- and three-point paths above
    are the practical choice for low orders.
    """
    if model.task != "regression":
        raise SchemaError("generic decompositions are defined for regression models")
    if len(sets) > 15:
        raise CostGuardError("decomposition guard: at most 15 feature sets")
    FeatureSet.assert_disjoint(*sets)
    x = as_sample(sample, model.n_features)
    k = len(sets)
    union = sets[0].union(*sets[1:]) if k > 1 else sets[0]

    f0 = model.predict(x[None, :])[0]
    batch = imputer.impute(union, x, n_imputations, seed)

    subsets = [combo for r in range(1, k + 1)
               for combo in itertools.combinations(range(k), r)]
    stacked = np.concatenate([
        imputed_rows(x, batch, _union_of(sets, combo)) for combo in subsets
    ])
    preds = model.predict(stacked)
    n = batch.n
    m = {combo: weighted_average(preds[i * n:(i + 1) * n], batch)
         for i, combo in enumerate(subsets)}
    m[()] = f0

    components = {}
    for v in subsets:
        total = np.zeros_like(f0)
        for r in range(len(v) + 1):
            for w in itertools.combinations(v, r):
                total = total + (-1) ** (len(v) - len(w)) * m[w]
        components[v] = -total
    residual = float(np.max(np.abs(
        (f0 - m[subsets[-1]]) - sum(components.values())
    )))
    return components, residual


def completeness_check(model: Model, task: TaskKind, sample,
                       sets: list[FeatureSet], imputer: Imputer,
                       n_imputations: int, seed=None) -> float:
    """Residual of the completeness relation on shared imputations.

    Exact (float roundoff only) for regression by construction; two-set
    classification uses the log2 decomposition. Orders above three fall back
    to the generic anchored decomposition and are regression-only.
    """
    if len(sets) < 2:
        raise SchemaError("completeness needs at least two feature sets")
    if len(sets) == 2:
        rep = joint_effect(model, task, sample, sets[0], sets[1], imputer,
                           n_imputations, seed)
        return rep.completeness_residual
    if task.is_classification:
        raise SchemaError(
            "classification completeness is only defined for two sets"
        )
    if len(sets) == 3:
        rep = three_point_effects(model, sample, sets[0], sets[1], sets[2],
                                  imputer, n_imputations, seed)
        return rep.completeness_residual
    _, residual = decomposition_components(model, sample, sets, imputer,
                                           n_imputations, seed)
    return residual
