"""Command-line front end: data ingestion, configuration, report emission."""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import urllib.parse
from concurrent.futures import ThreadPoolExecutor

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

from .bridge import bridge_model, pooled_bridge_model
from .calibration import apply_temperature, fit_temperature
from .data import Dataset, FeatureSet, load_csv
from .errors import PredDiffError, SchemaError
from .imputers import (
    ConditionalGaussianImputer,
    ExhaustiveConditionalImputer,
    TrainSetImputer,
    child_seed,
)
from .interactions import interaction_profile, joint_effect
from .models import (
    TASK_CLASS_LOGITS,
    TASK_CLASS_PROBS,
    TASK_REGRESSION,
    TaskKind,
    constant_model,
    linear_model,
    logic_gate_model,
    synthetic_model,
)
from .oracles import (
    VALUE_CLASSIFICATION_LOG,
    VALUE_REGRESSION_INTERVENTIONAL,
    VALUE_REGRESSION_OBSERVATIONAL,
    build_value_table,
    exact_shapley,
    shapley_interaction_index,
)
from .relevance import relevance_profile
from .reports import write_report
from .validation import run_golden_checks

USAGE_EXIT = 2
FAILURE_EXIT = 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return USAGE_EXIT
    try:
        return args.handler(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except PredDiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="preddiff",
        description="Prediction-difference relevances and interaction effects",
    )
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    def add_common(p):
        p.add_argument("--data", required=True, help="dataset CSV (header row required)")
        p.add_argument("--model", required=True,
                       help="builtin:<name>[?k=v&...] or bridge:\"<command>\"")
        p.add_argument("--task", choices=[TASK_REGRESSION, TASK_CLASS_PROBS,
                                          TASK_CLASS_LOGITS],
                       help="defaults to the model's declared task")
        p.add_argument("--sets", required=True, help="feature-set definition file (TOML)")
        p.add_argument("--imputer", choices=["train", "gaussian", "exhaustive"],
                       default="exhaustive")
        p.add_argument("--match-mode", choices=["marginal", "exact-match"],
                       default="marginal", help="exhaustive imputer conditioning")
        p.add_argument("--ridge", type=float, default=None,
                       help="Gaussian imputer covariance ridge")
        p.add_argument("--n-imputations", type=int, default=100)
        p.add_argument("--seed", type=int, default=None,
                       help="defaults to $PREDDIFF_SEED, then 0")
        p.add_argument("--bootstrap", type=int, default=0,
                       help="bootstrap replicates for confidence intervals")
        p.add_argument("--level", type=float, default=0.95)
        p.add_argument("--samples", default="all",
                       help="rows to explain: 'all', 'i,j,k' or 'start:stop'")
        p.add_argument("--classes", default=None,
                       help="class indices to report: 'predicted', or e.g. '0,2'"
                            " (default: all)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--temperature", type=float, default=None,
                       help="wrap a logits model with this temperature")
        p.add_argument("--train-size", type=int, default=None,
                       help="N for Laplace smoothing (default: dataset rows)")
        p.add_argument("--no-laplace", action="store_true",
                       help="disable Laplace smoothing of probabilities")
        p.add_argument("--bridge-timeout", type=float, default=30.0)
        p.add_argument("--out", default=None, help="report path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p_rel = sub.add_parser("relevance", help="per-set relevances")
    add_common(p_rel)
    p_rel.set_defaults(handler=cmd_relevance)

    p_int = sub.add_parser("interaction", help="pairwise joint effects")
    add_common(p_int)
    p_int.add_argument("--pairs", default=None,
                       help="pairs of set names, e.g. 'a:b,c:d'")
    p_int.add_argument("--reference", default=None,
                       help="one set name to pair with every other set")
    p_int.set_defaults(handler=cmd_interaction)

    p_orc = sub.add_parser("oracle", help="exact Shapley values vs engine estimates")
    add_common(p_orc)
    p_orc.add_argument("--value-function",
                       choices=["interventional", "observational", "classification-log"],
                       default="interventional")
    p_orc.set_defaults(handler=cmd_oracle)

    p_cal = sub.add_parser("calibrate", help="fit a softmax temperature on logits")
    p_cal.add_argument("--logits", required=True,
                       help="CSV of logit columns plus a label column")
    p_cal.add_argument("--label-column", required=True)
    p_cal.add_argument("--out", default=None)
    p_cal.add_argument("--format", choices=["csv", "json"], default="json")
    p_cal.set_defaults(handler=cmd_calibrate)

    p_val = sub.add_parser("validate", help="run the golden fixture checks")
    p_val.add_argument("--out", default=None)
    p_val.set_defaults(handler=cmd_validate)

    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PREDDIFF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SchemaError(f"PREDDIFF_SEED must be an integer, got {env!r}") from None
    return 0


def load_feature_sets(path: str, dataset: Dataset) -> list[tuple[str, FeatureSet]]:
    """Parse the TOML set-definition file.

    Entries live in a ``[sets]`` table and may be an index list, a list of
    column names, a single index, or a contiguous half-open range 'a:b'.
    """
    with open(path, "rb") as fh:
        doc = _toml.load(fh)
    table = doc.get("sets", doc)
    if not isinstance(table, dict) or not table:
        raise SchemaError(f"{path}: expected a non-empty [sets] table")
    resolved = []
    for name, spec in table.items():
        resolved.append((str(name), _resolve_set(spec, dataset, name)))
    return resolved


def _resolve_set(spec, dataset: Dataset, name: str) -> FeatureSet:
    if isinstance(spec, int):
        indices = [spec]
    elif isinstance(spec, str):
        indices = _parse_range(spec, name)
    elif isinstance(spec, list):
        indices = []
        for item in spec:
            if isinstance(item, int):
                indices.append(item)
            elif isinstance(item, str):
                indices.append(dataset.column_index(item))
            else:
                raise SchemaError(f"set {name!r}: unsupported entry {item!r}")
    else:
        raise SchemaError(f"set {name!r}: unsupported definition {spec!r}")
    fs = FeatureSet(indices)
    fs.validate_width(dataset.n_cols)
    return fs


def _parse_range(text: str, name: str) -> list[int]:
    if ":" not in text:
        raise SchemaError(f"set {name!r}: expected 'start:stop', got {text!r}")
    start_s, stop_s = text.split(":", 1)
    try:
        start, stop = int(start_s), int(stop_s)
    except ValueError:
        raise SchemaError(f"set {name!r}: non-integer range {text!r}") from None
    if stop <= start:
        raise SchemaError(f"set {name!r}: empty range {text!r}")
    return list(range(start, stop))


def _parse_samples(text: str, n_rows: int) -> list[int]:
    if text == "all":
        return list(range(n_rows))
    if ":" in text:
        start_s, stop_s = text.split(":", 1)
        start, stop = int(start_s), int(stop_s)
        indices = list(range(start, min(stop, n_rows)))
    else:
        indices = [int(t) for t in text.split(",") if t.strip()]
    for i in indices:
        if not 0 <= i < n_rows:
            raise SchemaError(f"sample index {i} out of range for {n_rows} rows")
    return indices


def build_model(args, dataset: Dataset):
    """Resolve --model into a Model; returns (model, closer)."""
    spec = args.model
    if spec.startswith("builtin:"):
        model = _builtin_model(spec[len("builtin:"):])
        if model.n_features is not None and model.n_features != dataset.n_cols:
            raise SchemaError(
                f"model expects {model.n_features} features, data has {dataset.n_cols}"
            )
        closer = lambda: None
    elif spec.startswith("bridge:"):
        command = shlex.split(spec[len("bridge:"):])
        if not command:
            raise SchemaError("empty bridge command")
        workers = getattr(args, "workers", 1)
        if workers > 1:
            model = pooled_bridge_model(command, workers, args.bridge_timeout,
                                        expected_features=dataset.n_cols)
        else:
            model = bridge_model(command, args.bridge_timeout,
                                 expected_features=dataset.n_cols)
        closer = model.close
    else:
        raise SchemaError(f"model spec must start with builtin: or bridge:, got {spec!r}")

    if getattr(args, "temperature", None) is not None:
        model = apply_temperature(model, args.temperature)
    if getattr(args, "task", None) and args.task != model.task:
        raise SchemaError(
            f"--task {args.task} does not match the model's task {model.task}"
        )
    if model.task == TASK_CLASS_LOGITS:
        raise SchemaError(
            "logits models must be wrapped: fit a temperature with "
            "'preddiff calibrate' and pass --temperature"
        )
    return model, closer


def _builtin_model(spec: str):
    name, _, query = spec.partition("?")
    params = dict(urllib.parse.parse_qsl(query)) if query else {}
    name = name.lower()
    if name in ("or", "and", "xor"):
        return logic_gate_model(name)
    if name == "synthetic":
        return synthetic_model()
    if name == "linear":
        if "betas" not in params:
            raise SchemaError("builtin:linear needs ?betas=b1,b2,...")
        betas = [float(b) for b in params["betas"].split(",")]
        return linear_model(betas, float(params.get("intercept", 0.0)))
    if name == "constant":
        return constant_model(float(params.get("value", 0.0)))
    raise SchemaError(f"unknown builtin model: {name!r}")


def build_imputer(args, dataset: Dataset):
    if args.imputer == "train":
        return TrainSetImputer(dataset)
    if args.imputer == "gaussian":
        return ConditionalGaussianImputer(dataset, args.ridge)
    return ExhaustiveConditionalImputer(dataset, args.match_mode)


def _task_kind(args, model, dataset: Dataset) -> TaskKind:
    if model.task == TASK_REGRESSION:
        return TaskKind.regression()
    laplace = not args.no_laplace
    train_size = args.train_size
    if train_size is None and laplace:
        train_size = dataset.n_rows
    return TaskKind(TASK_CLASS_PROBS, n_classes=model.n_outputs,
                    train_size=train_size, laplace=laplace)


def _class_filter(args, n_outputs: int) -> list[int] | None:
    """Explicit class selection; None means 'predicted class per sample'."""
    if args.classes is None:
        return list(range(n_outputs))
    if args.classes.strip() == "predicted":
        return None
    picked = [int(c) for c in args.classes.split(",") if c.strip()]
    for c in picked:
        if not 0 <= c < n_outputs:
            raise SchemaError(f"class {c} out of range for {n_outputs} outputs")
    return picked


def _classes_for_sample(classes, model, sample) -> list[int]:
    if classes is not None:
        return classes
    return [int(np.argmax(model.predict(sample[None, :])[0]))]


def _effect_rows(sample_idx, label, report, classes):
    rows = []
    for c in classes:
        rows.append({
            "sample": sample_idx,
            "set": label,
            "kind": report.kind,
            "class": c,
            "estimate": float(report.estimate[c]),
            "ci_low": None if report.ci_low is None else float(report.ci_low[c]),
            "ci_high": None if report.ci_high is None else float(report.ci_high[c]),
            "n_imputations": report.n_imputations,
            "model_calls": report.model_calls,
        })
    return rows


def _run_per_sample(args, dataset, sample_indices, worker):
    """Map ``worker(sample_index)`` over samples, preserving order."""
    if args.workers > 1 and len(sample_indices) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(worker, sample_indices))
    else:
        results = [worker(i) for i in sample_indices]
    rows = []
    for chunk in results:
        rows.extend(chunk)
    return rows


def _meta(args, seed, model, extra=None) -> dict:
    meta = {
        "command": args.command,
        "seed": seed,
        "model": args.model,
        "imputer": args.imputer,
        "n_imputations": args.n_imputations,
        "bootstrap": args.bootstrap,
        "model_calls": model.call_count,
    }
    if extra:
        meta.update(extra)
    return meta


def cmd_relevance(args) -> int:
    dataset = load_csv(args.data)
    sets = load_feature_sets(args.sets, dataset)
    seed = _resolve_seed(args)
    model, closer = build_model(args, dataset)
    try:
        imputer = build_imputer(args, dataset)
        task = _task_kind(args, model, dataset)
        classes = _class_filter(args, model.n_outputs)
        indices = _parse_samples(args.samples, dataset.n_rows)
        set_list = [fs for _, fs in sets]

        def worker(i):
            sample = dataset.row(i)
            sample_classes = _classes_for_sample(classes, model, sample)
            reports = relevance_profile(
                model, task, sample, set_list, imputer,
                args.n_imputations, seed=child_seed(seed, i),
                bootstrap=args.bootstrap, level=args.level,
            )
            rows = []
            for (name, _), rep in zip(sets, reports):
                rows.extend(_effect_rows(i, name, rep, sample_classes))
            return rows

        rows = _run_per_sample(args, dataset, indices, worker)
        write_report(_meta(args, seed, model), rows, args.format, args.out)
        return 0
    finally:
        closer()


def _resolve_pairs(args, sets):
    names = {name: fs for name, fs in sets}

    def lookup(name):
        if name not in names:
            raise SchemaError(f"unknown set name: {name!r}")
        return names[name]

    if args.reference is not None:
        ref = lookup(args.reference)
        return [(f"{args.reference}:{other}", ref, fs)
                for other, fs in sets if other != args.reference]
    if not args.pairs:
        raise SchemaError("interaction needs --pairs or --reference")
    resolved = []
    for token in args.pairs.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            left, right = token.split(":")
        except ValueError:
            raise SchemaError(f"pair {token!r} is not 'name:name'") from None
        resolved.append((token, lookup(left.strip()), lookup(right.strip())))
    if not resolved:
        raise SchemaError("no pairs given")
    return resolved


def cmd_interaction(args) -> int:
    dataset = load_csv(args.data)
    sets = load_feature_sets(args.sets, dataset)
    seed = _resolve_seed(args)
    model, closer = build_model(args, dataset)
    try:
        imputer = build_imputer(args, dataset)
        task = _task_kind(args, model, dataset)
        classes = _class_filter(args, model.n_outputs)
        indices = _parse_samples(args.samples, dataset.n_rows)
        pairs = _resolve_pairs(args, sets)

        def worker(i):
            sample = dataset.row(i)
            sample_classes = _classes_for_sample(classes, model, sample)
            reports = interaction_profile(
                model, task, sample,
                [(y, z) for _, y, z in pairs], imputer,
                args.n_imputations, seed=child_seed(seed, i),
                bootstrap=args.bootstrap, level=args.level,
            )
            rows = []
            for (pair_name, _, _), rep in zip(pairs, reports):
                left, right = pair_name.split(":", 1)
                rows.extend(_effect_rows(i, left, rep.main_y, sample_classes))
                rows.extend(_effect_rows(i, right, rep.main_z, sample_classes))
                rows.extend(_effect_rows(i, pair_name, rep.joint, sample_classes))
                for label, shielded in ((left, rep.shielded_main_y),
                                        (right, rep.shielded_main_z),
                                        (pair_name, rep.shielded_joint)):
                    if shielded is not None:
                        rows.extend(_effect_rows(i, label, shielded, sample_classes))
                rows.append({
                    "sample": i, "set": pair_name, "kind": "completeness-residual",
                    "class": "", "estimate": rep.completeness_residual,
                    "ci_low": None, "ci_high": None,
                    "n_imputations": rep.joint.n_imputations,
                    "model_calls": rep.model_calls,
                })
            return rows

        rows = _run_per_sample(args, dataset, indices, worker)
        write_report(_meta(args, seed, model), rows, args.format, args.out)
        return 0
    finally:
        closer()


def cmd_oracle(args) -> int:
    dataset = load_csv(args.data)
    sets = load_feature_sets(args.sets, dataset)
    seed = _resolve_seed(args)
    model, closer = build_model(args, dataset)
    try:
        task = _task_kind(args, model, dataset)
        classes = _class_filter(args, model.n_outputs)
        indices = _parse_samples(args.samples, dataset.n_rows)
        kind = {
            "interventional": VALUE_REGRESSION_INTERVENTIONAL,
            "observational": VALUE_REGRESSION_OBSERVATIONAL,
            "classification-log": VALUE_CLASSIFICATION_LOG,
        }[args.value_function]
        if args.value_function == "observational" and args.imputer == "train":
            raise SchemaError("observational value functions need a conditional imputer")
        imputer = build_imputer(args, dataset)
        set_list = [fs for _, fs in sets]
        names = [name for name, _ in sets]

        def emit(rows, i, label, kind_name, values, sample_classes):
            for c in sample_classes:
                rows.append({
                    "sample": i, "set": label, "kind": kind_name, "class": c,
                    "estimate": float(values[c]), "ci_low": None, "ci_high": None,
                    "n_imputations": args.n_imputations, "model_calls": None,
                })

        def worker(i):
            sample = dataset.row(i)
            sample_classes = _classes_for_sample(classes, model, sample)
            table = build_value_table(model, task, sample, set_list, imputer,
                                      kind, args.n_imputations,
                                      seed=child_seed(seed, i))
            reports = relevance_profile(model, task, sample, set_list, imputer,
                                        args.n_imputations,
                                        seed=child_seed(seed, i, 1))
            rows = []
            for j, name in enumerate(names):
                phi = exact_shapley(table, j)
                rel = reports[j].estimate
                emit(rows, i, name, "shapley", phi, sample_classes)
                emit(rows, i, name, "relevance", rel, sample_classes)
                emit(rows, i, name, "shapley-minus-relevance", phi - rel, sample_classes)
            for a in range(len(names)):
                for b in range(a + 1, len(names)):
                    idx = shapley_interaction_index(table, a, b)
                    emit(rows, i, f"{names[a]}:{names[b]}", "interaction-index",
                         idx, sample_classes)
                    if not task.is_classification:
                        rep = joint_effect(model, task, sample, set_list[a],
                                           set_list[b], imputer, args.n_imputations,
                                           seed=child_seed(seed, i, 2, a, b))
                        shielded = rep.shielded_joint.estimate
                        emit(rows, i, f"{names[a]}:{names[b]}",
                             "shielded-joint", shielded, sample_classes)
                        emit(rows, i, f"{names[a]}:{names[b]}",
                             "index-minus-shielded", idx - shielded, sample_classes)
            return rows

        rows = _run_per_sample(args, dataset, indices, worker)
        write_report(_meta(args, seed, model, {"value_function": args.value_function}),
                     rows, args.format, args.out)
        return 0
    finally:
        closer()


def cmd_calibrate(args) -> int:
    dataset = load_csv(args.logits)
    label_idx = dataset.column_index(args.label_column)
    logit_cols = [i for i in range(dataset.n_cols) if i != label_idx]
    logits = dataset.values[:, logit_cols]
    labels = dataset.values[:, label_idx]
    if np.any(labels != labels.astype(int)):
        raise SchemaError("label column must hold integer class indices")
    fit = fit_temperature(logits, labels.astype(int))
    payload = {
        "temperature": fit.temperature,
        "nll": fit.nll,
        "nll_at_unit": fit.nll_at_unit,
        "at_bound": fit.at_bound,
        "model_spec": f"--temperature {fit.temperature!r}",
    }
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        keys = list(payload)
        text = ",".join(keys) + "\n" + ",".join(str(payload[k]) for k in keys) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_validate(args) -> int:
    checks = run_golden_checks(fault=os.environ.get("PREDDIFF_FAULT"))
    passed = all(c.passed for c in checks)
    payload = {"passed": passed, "checks": [c.as_dict() for c in checks]}
    text = json.dumps(payload, indent=2) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if passed else FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
