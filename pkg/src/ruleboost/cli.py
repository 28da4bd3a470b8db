"""Command line interface: train, predict, evaluate, tune, synth, trajectory."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import serialization
from .dataio import load_arff, load_csv, save_arff
from .dataset import Dataset
from .errors import ConfigError, RuleBoostError
from .heads import HEAD_MULTI, HEAD_SINGLE
from .losses import EXAMPLE_WISE_LOGISTIC, LABEL_WISE_LOGISTIC
from .metrics import evaluate_predictions
from .prediction import (
    DECODE_KNOWN_VECTORS,
    DECODE_METHODS,
    decode_scores,
    default_decode_method,
)
from .rules import Ensemble, ensemble_scores
from .synthetic import SCENARIOS, SyntheticConfig, SyntheticProcess, generate
from .trajectory import ALL_VARIANTS, DEFAULT_CHECKPOINTS, run_trajectory
from .training import TrainConfig, train
from .tuning import (
    DEFAULT_L2_WEIGHTS,
    DEFAULT_RULE_COUNTS,
    DEFAULT_SHRINKAGES,
    GridSearchConfig,
    grid_search,
)

LOSS_CHOICES = (LABEL_WISE_LOGISTIC, EXAMPLE_WISE_LOGISTIC)
HEAD_CHOICES = (HEAD_SINGLE, HEAD_MULTI)


def _parse_labels(spec: str):
    try:
        return int(spec)
    except ValueError:
        return [name.strip() for name in spec.split(",") if name.strip()]


def _load_dataset(path: str, labels_spec: str) -> Dataset:
    labels = _parse_labels(labels_spec)
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return load_csv(path, labels)
    return load_arff(path, labels)


def _float_list(spec: str) -> tuple[float, ...]:
    return tuple(float(x) for x in spec.split(",") if x.strip())


def _int_list(spec: str) -> tuple[int, ...]:
    return tuple(int(x) for x in spec.split(",") if x.strip())


def _add_data_arguments(parser):
    parser.add_argument("--data", required=True, help="dataset file (.arff or .csv)")
    parser.add_argument(
        "--labels",
        required=True,
        help="label columns: a trailing count (e.g. 6) or comma-separated names",
    )


def _decode_predictions(ensemble: Ensemble, dataset: Dataset, method: str | None):
    if method is None:
        method = default_decode_method(ensemble.meta.loss)
    if method == DECODE_KNOWN_VECTORS and ensemble.label_vectors is None:
        raise ConfigError("model carries no training label vectors; use --decode sign")
    scores = ensemble_scores(ensemble, dataset)
    return decode_scores(scores, method, ensemble.label_vectors), method


def _cmd_train(args) -> int:
    dataset = _load_dataset(args.data, args.labels)
    config = TrainConfig(
        loss=args.loss,
        n_rules=args.rules,
        shrinkage=args.shrinkage,
        l2_weight=args.l2,
        head_mode=args.head,
        bagging=not args.no_bagging,
        feature_sampling=not args.no_feature_sampling,
        seed=args.seed,
    )
    started = time.perf_counter()
    ensemble = train(dataset, config)
    elapsed = time.perf_counter() - started
    serialization.save(ensemble, args.model)
    print(f"trained {len(ensemble)} rules on {dataset.n_examples} examples in {elapsed:.1f}s")
    print(f"model written to {args.model}")
    return 0


def _cmd_predict(args) -> int:
    ensemble = serialization.load(args.model)
    dataset = _load_dataset(args.data, args.labels)
    predicted, method = _decode_predictions(ensemble, dataset, args.decode)
    lines = [",".join(ensemble.label_names)]
    for row in predicted:
        lines.append(",".join("1" if v == 1 else "0" for v in row))
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {len(predicted)} predictions ({method} decoding) to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_evaluate(args) -> int:
    ensemble = serialization.load(args.model)
    dataset = _load_dataset(args.data, args.labels)
    predicted, method = _decode_predictions(ensemble, dataset, args.decode)
    report = evaluate_predictions(dataset.labels, predicted)
    report["decode"] = method
    report["n_examples"] = dataset.n_examples
    for key, value in report.items():
        print(f"{key}={value}")
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_tune(args) -> int:
    dataset = _load_dataset(args.data, args.labels)
    config = GridSearchConfig(
        loss=args.loss,
        head_mode=args.head,
        shrinkages=_float_list(args.shrinkage_grid),
        l2_weights=_float_list(args.l2_grid),
        rule_counts=_int_list(args.rules_grid),
        validation_fraction=args.val_fraction,
        metric=args.metric,
        seed=args.seed,
    )
    best, report = grid_search(dataset, config)
    print(f"grid search over {len(report.cells)} cells ({len(report.failures)} failures)")
    print(f"best: rules={best.n_rules} shrinkage={best.shrinkage} l2={best.l2_weight}")
    print(f"metric={report.metric}")
    if args.json:
        payload = report.to_dict()
        payload["best"] = {
            "n_rules": best.n_rules,
            "shrinkage": best.shrinkage,
            "l2_weight": best.l2_weight,
            "loss": best.loss,
            "head_mode": best.head_mode,
        }
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_synth(args) -> int:
    config = SyntheticConfig(
        scenario=args.scenario,
        n_examples=args.n,
        n_labels=args.labels,
        noise_rate=args.noise,
        boundary_angle_spread=args.spread,
        seed=args.seed,
    )
    train_data, test_data = generate(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_arff(train_data, out / "train.arff", relation=f"synthetic_{args.scenario}_train")
    save_arff(test_data, out / "test.arff", relation=f"synthetic_{args.scenario}_test")
    process = SyntheticProcess(config)
    sidecar = {
        "scenario": args.scenario,
        "seed": args.seed,
        "noise_rate": args.noise,
        "boundary_angles": [float(a) for a in process.angles],
    }
    (out / "boundaries.json").write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    print(f"wrote train.arff, test.arff and boundaries.json to {out}")
    return 0


def _cmd_trajectory(args) -> int:
    config = SyntheticConfig(
        scenario=args.scenario,
        n_examples=args.n,
        n_labels=args.labels,
        noise_rate=args.noise,
        boundary_angle_spread=args.spread,
        seed=args.seed,
    )
    train_data, test_data = generate(config)
    wanted = {v.strip() for v in args.variants.split(",") if v.strip()}
    variants = [v for v in ALL_VARIANTS if v.name in wanted]
    unknown = wanted - {v.name for v in ALL_VARIANTS}
    if unknown:
        raise ConfigError(
            f"unknown variants {sorted(unknown)}; "
            f"choose from {[v.name for v in ALL_VARIANTS]}"
        )
    checkpoints = _int_list(args.checkpoints)
    series = run_trajectory(
        train_data,
        test_data,
        variants,
        checkpoints,
        shrinkage=args.shrinkage,
        l2_weight=args.l2,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, points in series.items():
        path = out / f"trajectory_{name}.csv"
        lines = ["rules,hamming,subset01"]
        lines += [f"{p.n_rules},{p.hamming},{p.subset01}" for p in points]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruleboost",
        description="Gradient-boosted single- and multi-label classification rules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a rule ensemble and save the model")
    _add_data_arguments(p_train)
    p_train.add_argument("--loss", choices=LOSS_CHOICES, default=LABEL_WISE_LOGISTIC)
    p_train.add_argument("--head", choices=HEAD_CHOICES, default=HEAD_MULTI)
    p_train.add_argument("--rules", type=int, default=100)
    p_train.add_argument("--shrinkage", type=float, default=0.3)
    p_train.add_argument("--l2", type=float, default=0.0)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--no-bagging", action="store_true")
    p_train.add_argument("--no-feature-sampling", action="store_true")
    p_train.add_argument("--model", required=True, help="output model path")
    p_train.set_defaults(func=_cmd_train)

    p_predict = sub.add_parser("predict", help="predict label vectors for a dataset")
    _add_data_arguments(p_predict)
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--decode", choices=DECODE_METHODS, default=None)
    p_predict.add_argument("--output", help="output CSV path (default: stdout)")
    p_predict.set_defaults(func=_cmd_predict)

    p_eval = sub.add_parser("evaluate", help="evaluate a model on a labeled dataset")
    _add_data_arguments(p_eval)
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--decode", choices=DECODE_METHODS, default=None)
    p_eval.add_argument("--json", help="also write the metrics as JSON")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_tune = sub.add_parser("tune", help="holdout grid search over hyperparameters")
    _add_data_arguments(p_tune)
    p_tune.add_argument("--loss", choices=LOSS_CHOICES, default=LABEL_WISE_LOGISTIC)
    p_tune.add_argument("--head", choices=HEAD_CHOICES, default=HEAD_MULTI)
    p_tune.add_argument(
        "--shrinkage-grid", default=",".join(str(x) for x in DEFAULT_SHRINKAGES)
    )
    p_tune.add_argument("--l2-grid", default=",".join(str(x) for x in DEFAULT_L2_WEIGHTS))
    p_tune.add_argument(
        "--rules-grid", default=",".join(str(x) for x in DEFAULT_RULE_COUNTS)
    )
    p_tune.add_argument("--val-fraction", type=float, default=1.0 / 3.0)
    p_tune.add_argument("--metric", choices=("hamming", "subset01"), default="subset01")
    p_tune.add_argument("--seed", type=int, default=0)
    p_tune.add_argument("--json", help="write the full report as JSON")
    p_tune.set_defaults(func=_cmd_tune)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark")
    p_synth.add_argument("--scenario", choices=SCENARIOS, required=True)
    p_synth.add_argument("--n", type=int, default=10000)
    p_synth.add_argument("--labels", type=int, default=6)
    p_synth.add_argument("--noise", type=float, default=0.1)
    p_synth.add_argument("--spread", type=float, default=0.1)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.set_defaults(func=_cmd_synth)

    p_traj = sub.add_parser(
        "trajectory", help="loss trajectories of the four variants on synthetic data"
    )
    p_traj.add_argument("--scenario", choices=SCENARIOS, required=True)
    p_traj.add_argument("--n", type=int, default=10000)
    p_traj.add_argument("--labels", type=int, default=6)
    p_traj.add_argument("--noise", type=float, default=0.1)
    p_traj.add_argument("--spread", type=float, default=0.1)
    p_traj.add_argument("--seed", type=int, default=0)
    p_traj.add_argument(
        "--variants",
        default=",".join(v.name for v in ALL_VARIANTS),
        help="comma-separated variant names",
    )
    p_traj.add_argument(
        "--checkpoints", default=",".join(str(t) for t in DEFAULT_CHECKPOINTS)
    )
    p_traj.add_argument("--shrinkage", type=float, default=0.3)
    p_traj.add_argument("--l2", type=float, default=0.0)
    p_traj.add_argument("--out", required=True, help="output directory")
    p_traj.set_defaults(func=_cmd_trajectory)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RuleBoostError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
