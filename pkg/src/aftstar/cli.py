"""Config-driven experiment runner.

Subcommands:

* ``generate``: write a synthetic dataset (train.csv, test.csv, meta.json);
* ``run``: run one strategy over a dataset for each seed, writing a
  learning-curve CSV, a summary JSON and a selection audit JSONL per seed;
* ``compare``: run a grid of strategies over shared dataset/seeds and
  write a mean/sd ALC comparison table (CSV + JSON).

Configs are strict JSON: a ``schema_version`` field is required and
unknown keys are errors. Exit codes: 0 success, 1 config error,
2 runtime error. The environment variable ``AFTSTAR_OUTPUT_DIR``
provides the default output directory.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import datagen, loop, metrics
from .datagen import DatagenConfig
from .errors import AftError, ConfigError
from .learner import TrainConfig
from .loop import StopRule, make_strategy
from .metrics import FLOAT_FMT

SCHEMA_VERSION = 1
OUTPUT_ENV_VAR = "AFTSTAR_OUTPUT_DIR"

STRATEGY_KEYS = {"name", "criterion", "batch_size", "alpha", "omega", "lambda1", "lambda2"}
LEARNER_KEYS = {
    "learning_rate",
    "epochs",
    "momentum",
    "lr_decay_gamma",
    "minibatch_size",
    "finetune_lr_factor",
}
STOP_KEYS = {"query_budget", "auc_target"}
ORACLE_KEYS = {"label_noise_rate"}
DATAGEN_KEYS = {f.name for f in DatagenConfig.__dataclass_fields__.values()}


def _check_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _load_config(path: str) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: schema_version must be {SCHEMA_VERSION}")
    return cfg


def _resolve_output_dir(cfg: dict, args) -> Path:
    out = args.output or cfg.get("output_dir") or os.environ.get(OUTPUT_ENV_VAR)
    if not out:
        raise ConfigError(
            f"no output directory: set output_dir, --output, or ${OUTPUT_ENV_VAR}"
        )
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_datagen(obj: dict, where: str) -> DatagenConfig:
    _check_keys(obj, DATAGEN_KEYS, set(), where)
    fixed = dict(obj)
    if "class_weights" in fixed:
        fixed["class_weights"] = tuple(fixed["class_weights"])
    try:
        return DatagenConfig(**fixed)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}")


def _parse_strategy(obj: dict, where: str):
    _check_keys(obj, STRATEGY_KEYS, {"name", "batch_size"}, where)
    kwargs = {
        k: obj[k] for k in ("alpha", "omega", "lambda1", "lambda2") if k in obj
    }
    return make_strategy(
        obj["name"],
        criterion=obj.get("criterion", "entropy^a_w"),
        batch_size=int(obj["batch_size"]),
        **kwargs,
    )


def _parse_learner(obj: dict, where: str) -> TrainConfig:
    _check_keys(obj, LEARNER_KEYS, set(), where)
    return TrainConfig(**obj)


def _parse_stop(obj: dict, where: str) -> StopRule:
    _check_keys(obj, STOP_KEYS, set(), where)
    return StopRule(
        query_budget=obj.get("query_budget"), auc_target=obj.get("auc_target")
    )


def _slug(label: str) -> str:
    return label.replace("^", "_")


def cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, {"schema_version", "output_dir", "datagen"}, {"datagen"}, args.config)
    datagen_cfg = _parse_datagen(cfg["datagen"], "datagen")
    if args.seed is not None:
        datagen_cfg = DatagenConfig(**{**_datagen_dict(datagen_cfg), "seed": args.seed})
    out_dir = _resolve_output_dir(cfg, args)
    datagen.write_dataset(datagen_cfg, out_dir)
    print(f"wrote {out_dir / 'train.csv'}, {out_dir / 'test.csv'}, {out_dir / 'meta.json'}")
    return 0


def _datagen_dict(cfg: DatagenConfig) -> dict:
    out = dict(cfg.__dict__)
    out["class_weights"] = tuple(out["class_weights"])
    return out


def _resolve_dataset(spec, where: str):
    """Return (train, test, num_classes) from a directory path or an
    inline datagen config."""
    if isinstance(spec, str):
        try:
            train, test, meta = datagen.load_dataset(spec)
        except OSError as exc:
            raise ConfigError(f"{where}: cannot load dataset {spec}: {exc}")
        if meta is not None:
            num_classes = int(meta["config"]["num_classes"])
        else:
            num_classes = datagen.infer_num_classes(train + test)
        return train, test, num_classes
    cfg = _parse_datagen(spec, where)
    train, test, _ = datagen.generate(cfg)
    return train, test, cfg.num_classes


def _run_one(
    dataset_spec,
    strategy_obj: dict,
    learner_obj: dict,
    stop_obj: dict,
    oracle_obj: dict,
    positive_class: int,
    seed: int,
    out_dir: str,
) -> dict:
    """Run one (strategy, seed) experiment and write its artifacts.

    Module-level and dict-driven so compare can fan out worker processes.
    """
    train, test, num_classes = _resolve_dataset(dataset_spec, "dataset")
    strategy = _parse_strategy(strategy_obj, "strategy")
    train_cfg = _parse_learner(learner_obj, "learner")
    stop = _parse_stop(stop_obj, "stop")
    _check_keys(oracle_obj, ORACLE_KEYS, set(), "oracle")
    noise = float(oracle_obj.get("label_noise_rate", 0.0))

    slug = _slug(strategy.label)
    out = Path(out_dir)
    records = loop.run_experiment(
        train,
        test,
        strategy,
        train_cfg,
        stop,
        seed,
        num_classes=num_classes,
        positive_class=positive_class,
        oracle_noise=noise,
        audit_path=out / f"audit_{slug}_seed{seed}.jsonl",
    )
    metrics.write_curve_csv(records, out / f"curve_{slug}_seed{seed}.csv")
    curve = metrics.LearningCurve.from_records(records, total_pool=len(train))
    summary = {
        "strategy": strategy.label,
        "seed": seed,
        "alc": curve.alc,
        "final_auc": records[-1].test_auc,
        "total_queries": records[-1].queries_cum,
    }
    metrics.write_summary_json(summary, out / f"summary_{slug}_seed{seed}.json")
    return summary


RUN_KEYS = {
    "schema_version",
    "dataset",
    "strategy",
    "learner",
    "stop",
    "oracle",
    "positive_class",
    "seeds",
    "output_dir",
}


def _common_run_fields(cfg: dict, args, where: str):
    seeds = cfg["seeds"] if args.seed is None else [args.seed]
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError(f"{where}: seeds must be a non-empty list")
    out_dir = _resolve_output_dir(cfg, args)
    return (
        cfg["dataset"],
        cfg.get("learner", {}),
        cfg.get("stop", {}),
        cfg.get("oracle", {}),
        int(cfg.get("positive_class", 0)),
        [int(s) for s in seeds],
        out_dir,
    )


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, RUN_KEYS, {"dataset", "strategy", "seeds"}, args.config)
    dataset, learner_obj, stop_obj, oracle_obj, pos, seeds, out_dir = _common_run_fields(
        cfg, args, args.config
    )
    _parse_strategy(cfg["strategy"], "strategy")  # fail fast before any run
    jobs = [
        (dataset, cfg["strategy"], learner_obj, stop_obj, oracle_obj, pos, seed, str(out_dir))
        for seed in seeds
    ]
    summaries = _execute(jobs, args.jobs)
    for s in summaries:
        print(f"{s['strategy']} seed={s['seed']} alc={s['alc']:.6f} final_auc={s['final_auc']:.6f}")
    return 0


COMPARE_KEYS = (RUN_KEYS - {"strategy"}) | {"strategies"}


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    _check_keys(cfg, COMPARE_KEYS, {"dataset", "strategies", "seeds"}, args.config)
    dataset, learner_obj, stop_obj, oracle_obj, pos, seeds, out_dir = _common_run_fields(
        cfg, args, args.config
    )
    strategies = cfg["strategies"]
    if not isinstance(strategies, list) or not strategies:
        raise ConfigError(f"{args.config}: strategies must be a non-empty list")
    labels = []
    for i, strategy_obj in enumerate(strategies):
        labels.append(_parse_strategy(strategy_obj, f"strategies[{i}]").label)

    jobs = [
        (dataset, strategy_obj, learner_obj, stop_obj, oracle_obj, pos, seed, str(out_dir))
        for strategy_obj in strategies
        for seed in seeds
    ]
    summaries = _execute(jobs, args.jobs)

    by_label: dict[str, list[float]] = {label: [] for label in labels}
    for s in summaries:
        by_label[s["strategy"]].append(s["alc"])
    cells = []
    for label in labels:
        values = by_label[label]
        mean = float(np.mean(values))
        sd = float(np.std(values))
        cells.append({"strategy": label, "mean_alc": mean, "sd_alc": sd, "n_seeds": len(values)})
    best = max(range(len(cells)), key=lambda i: cells[i]["mean_alc"])
    for i, cell in enumerate(cells):
        cell["best"] = i == best

    with open(out_dir / "comparison.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "mean_alc", "sd_alc", "n_seeds", "best"])
        for cell in cells:
            writer.writerow(
                [
                    cell["strategy"],
                    FLOAT_FMT % cell["mean_alc"],
                    FLOAT_FMT % cell["sd_alc"],
                    cell["n_seeds"],
                    int(cell["best"]),
                ]
            )
    comparison = {"seeds": seeds, "cells": cells, "best": cells[best]["strategy"]}
    (out_dir / "comparison.json").write_text(
        json.dumps(comparison, indent=2, sort_keys=True), encoding="utf-8"
    )
    for cell in cells:
        marker = " *" if cell["best"] else ""
        print(f"{cell['strategy']}: {cell['mean_alc']:.6f} +/- {cell['sd_alc']:.6f}{marker}")
    return 0


def _execute(jobs: list[tuple], n_jobs: int) -> list[dict]:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_run_one(*job) for job in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=n_jobs) as pool:
        futures = [pool.submit(_run_one, *job) for job in jobs]
        return [f.result() for f in futures]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aftstar", description="Active-learning experiment runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("generate", cmd_generate), ("run", cmd_run), ("compare", cmd_compare)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--output", default=None, help="override the output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seeds")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except AftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
