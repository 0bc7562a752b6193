"""End-to-end golden checks over the built-in analytic fixtures.

These are the binary-gate tables, the linear-model closed form with its
Shapley cross-check, and the three-point product fixture. They run in well
under a second and back the ``preddiff validate`` command.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, FeatureSet
from .imputers import ExhaustiveConditionalImputer
from .interactions import joint_effect, three_point_effects
from .models import Model, TaskKind, linear_model, logic_gate_model
from .oracles import (
    VALUE_REGRESSION_INTERVENTIONAL,
    build_value_table,
    exact_shapley,
    shapley_efficiency_residual,
)
from .relevance import relevance_profile

__all__ = ["CheckResult", "run_golden_checks", "GATE_SAMPLES", "GATE_TABLES"]

TOL_EXACT = 1e-12
TOL_ORACLE = 1e-10

GATE_SAMPLES = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]

# Expected effects for the uniform two-bit design, already scaled by the
# design constant 1/4; sample order matches GATE_SAMPLES.
GATE_TABLES = {
    "and": {
        "main_x": [0, -2, 0, 2], "main_y": [0, 0, -2, 2], "joint": [-1, 1, 1, -1],
        "sh_x": [-1, -1, 1, 1], "sh_y": [-1, 1, -1, 1], "sh_joint": [1, -1, -1, 1],
    },
    "or": {
        "main_x": [-2, 0, 2, 0], "main_y": [-2, 2, 0, 0], "joint": [1, -1, -1, 1],
        "sh_x": [-1, -1, 1, 1], "sh_y": [-1, 1, -1, 1], "sh_joint": [-1, 1, 1, -1],
    },
    "xor": {
        "main_x": [-2, 2, 2, -2], "main_y": [-2, 2, 2, -2], "joint": [2, -2, -2, 2],
        "sh_x": [0, 0, 0, 0], "sh_y": [0, 0, 0, 0], "sh_joint": [-2, 2, 2, -2],
    },
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float
    detail: str = ""
    failures: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "detail": self.detail,
            "failures": self.failures,
        }


def two_bit_design() -> Dataset:
    return Dataset(np.array(GATE_SAMPLES, dtype=float), ("x", "y"))


def gate_effects(kind: str, fault: str | None = None):
    """Raw and shielded effects of one gate at all four design points."""
    model = logic_gate_model(kind)
    data = two_bit_design()
    imputer = ExhaustiveConditionalImputer(data, "marginal")
    task = TaskKind.regression()
    fs_x, fs_y = FeatureSet([0]), FeatureSet([1])
    rows = []
    for sample in GATE_SAMPLES:
        rep = joint_effect(model, task, np.array(sample), fs_x, fs_y, imputer, None)
        joint = rep.joint.scalar()
        if fault == f"{kind}:flip-joint-sign":
            joint = -joint  # test hook: deliberately corrupt the joint term
        rows.append({
            "main_x": rep.main_y.scalar(),
            "main_y": rep.main_z.scalar(),
            "joint": joint,
            "sh_x": joint + rep.main_y.scalar(),
            "sh_y": joint + rep.main_z.scalar(),
            "sh_joint": -joint,
            "relevance_xy": rep.relevance_yz.scalar(),
            "completeness": rep.completeness_residual,
        })
    return rows


def _check_gate(kind: str, fault: str | None) -> CheckResult:
    rows = gate_effects(kind, fault)
    expected = GATE_TABLES[kind]
    failures = []
    worst = 0.0
    for i, (sample, row) in enumerate(zip(GATE_SAMPLES, rows)):
        for key in ("main_x", "main_y", "joint", "sh_x", "sh_y", "sh_joint"):
            want = expected[key][i] / 4.0
            got = row[key]
            residual = abs(got - want)
            worst = max(worst, residual)
            if residual > TOL_EXACT:
                failures.append(
                    f"{kind} {key} at (x,y)={sample}: got {got!r}, expected {want!r}"
                )
    return CheckResult(
        name=f"gate-table-{kind}",
        passed=not failures,
        max_residual=worst,
        detail="raw and shielded effects vs the uniform-design table (x 1/4)",
        failures=failures,
    )


def _check_column_totals(fault: str | None) -> CheckResult:
    failures = []
    worst = 0.0
    for kind in GATE_TABLES:
        rows = gate_effects(kind, fault)
        for sample, row in zip(GATE_SAMPLES, rows):
            raw_sum = row["main_x"] + row["main_y"] + row["joint"]
            shielded_sum = row["sh_x"] + row["sh_y"] + row["sh_joint"]
            for label, total in (("raw", raw_sum), ("shielded", shielded_sum)):
                residual = abs(total - row["relevance_xy"])
                worst = max(worst, residual)
                if residual > TOL_EXACT:
                    failures.append(
                        f"{kind} {label} column total at {sample}: "
                        f"{total!r} != {row['relevance_xy']!r}"
                    )
    return CheckResult(
        name="gate-column-totals",
        passed=not failures,
        max_residual=worst,
        detail="raw and shielded decompositions both sum to the pair relevance",
        failures=failures,
    )


def _check_shared_shielded_joints(fault: str | None) -> CheckResult:
    joints = {kind: np.array([row["sh_joint"] for row in gate_effects(kind, fault)])
              for kind in GATE_TABLES}
    failures = []
    worst = 0.0
    # and = -or, xor = 2 * or: one interaction pattern up to a constant factor
    for name, lhs, rhs, factor in (
        ("and-vs-or", joints["and"], joints["or"], -1.0),
        ("xor-vs-or", joints["xor"], joints["or"], 2.0),
    ):
        residual = float(np.max(np.abs(lhs - factor * rhs)))
        worst = max(worst, residual)
        if residual > TOL_EXACT:
            failures.append(f"{name}: shielded joints differ beyond factor {factor}")
    return CheckResult(
        name="gates-shared-shielded-joint",
        passed=not failures,
        max_residual=worst,
        detail="all three gates share one shielded joint pattern up to a constant",
        failures=failures,
    )


def _check_linear(fault: str | None) -> CheckResult:
    rng = np.random.default_rng(17)
    data = Dataset(rng.standard_normal((200, 3)), ("f0", "f1", "f2"))
    betas = np.array([2.0, 3.0, -1.0])
    model = linear_model(betas, intercept=0.5)
    imputer = ExhaustiveConditionalImputer(data, "marginal")
    task = TaskKind.regression()
    sets = [FeatureSet([j]) for j in range(3)]
    means = data.values.mean(axis=0)
    failures = []
    worst = 0.0
    for i in range(5):
        sample = data.row(i)
        reports = relevance_profile(model, task, sample, sets, imputer, None)
        estimates = np.array([r.scalar() for r in reports])
        closed_form = betas * (sample - means)
        residual = float(np.max(np.abs(estimates - closed_form)))
        worst = max(worst, residual)
        if residual > TOL_EXACT:
            failures.append(f"sample {i}: relevance vs closed form residual {residual:g}")
        table = build_value_table(model, task, sample, sets, imputer,
                                  VALUE_REGRESSION_INTERVENTIONAL)
        phis = np.array([float(exact_shapley(table, j)[0]) for j in range(3)])
        residual = float(np.max(np.abs(phis - estimates)))
        worst = max(worst, residual)
        if residual > TOL_ORACLE:
            failures.append(f"sample {i}: Shapley vs relevance residual {residual:g}")
        completeness = abs(estimates.sum()
                           - (model.predict(sample[None, :])[0, 0]
                              - float(table.value(())[0])))
        worst = max(worst, completeness)
        if completeness > TOL_ORACLE:
            failures.append(f"sample {i}: completeness residual {completeness:g}")
        efficiency = shapley_efficiency_residual(table)
        worst = max(worst, efficiency)
        if efficiency > TOL_ORACLE:
            failures.append(f"sample {i}: Shapley efficiency residual {efficiency:g}")
    return CheckResult(
        name="linear-closed-form",
        passed=not failures,
        max_residual=worst,
        detail="per-feature relevance equals beta_j (x_j - mean_j) and the "
               "interventional Shapley value; relevances complete to f(x) - mean f",
        failures=failures,
    )


def _check_three_point(fault: str | None) -> CheckResult:
    cube = np.array([[a, b, c] for a in (-1.0, 1.0) for b in (-1.0, 1.0)
                     for c in (-1.0, 1.0)])
    data = Dataset(cube, ("a", "b", "c"))
    model = Model(lambda rows: rows[:, 0] * rows[:, 1] * rows[:, 2],
                  "regression", 1, n_features=3, name="abc-product")
    imputer = ExhaustiveConditionalImputer(data, "marginal")
    rep = three_point_effects(model, np.array([1.0, 1.0, 1.0]),
                              FeatureSet([0]), FeatureSet([1]), FeatureSet([2]),
                              imputer, None)
    failures = []
    worst = 0.0
    expectations = (
        [(m.scalar(), 1.0, f"main {m.label}") for m in rep.mains]
        + [(p.scalar(), -1.0, f"pair {p.label}") for p in rep.pairs]
        + [(rep.triple.scalar(), 1.0, "triple"),
           (rep.relevance_abc.scalar(), 1.0, "combined relevance")]
    )
    for got, want, label in expectations:
        residual = abs(got - want)
        worst = max(worst, residual)
        if residual > TOL_EXACT:
            failures.append(f"{label}: got {got!r}, expected {want!r}")
    worst = max(worst, rep.completeness_residual, rep.shielded_completeness_residual)
    if rep.completeness_residual > TOL_EXACT:
        failures.append(f"three-point completeness residual {rep.completeness_residual:g}")
    if rep.shielded_completeness_residual > TOL_EXACT:
        failures.append(
            f"shielded three-point completeness residual "
            f"{rep.shielded_completeness_residual:g}"
        )
    return CheckResult(
        name="three-point-product",
        passed=not failures,
        max_residual=worst,
        detail="f = a*b*c on the uniform cube: mains +1, pairs -1, triple +1",
        failures=failures,
    )


def run_golden_checks(fault: str | None = None) -> list[CheckResult]:
    """Run every golden check; ``fault`` is a test hook that corrupts one
    intermediate so the failure path stays exercised."""
    checks = [
        _check_gate("or", fault),
        _check_gate("and", fault),
        _check_gate("xor", fault),
        _check_column_totals(fault),
        _check_shared_shielded_joints(fault),
        _check_linear(fault),
        _check_three_point(fault),
    ]
    return checks
