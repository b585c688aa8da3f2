"""Command-line entry points: ``run``, ``sweep``, ``auto-k``, ``predict``, ``baseline``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import statistics
import sys
from dataclasses import dataclass, field, fields, replace

from . import graph as gc
from .heuristics import METHODS, heuristic_scores, write_scores_csv
from .louvain import louvain_auto_k
from .metrics import evaluate
from .model import (HyperParams, TrainingDivergence, _parse_value, load_model, predict,
                    save_model, train)

logger = logging.getLogger("clusterlp")

OUTPUT_DIR_ENV = "CLUSTERLP_OUTPUT_DIR"
TASKS = ("undirected_lp", "reconstruction", "bns", "bidirectional")
TRIAL_COLUMNS = ("trial", "seed", "auc", "ap", "accuracy", "precision", "recall", "f1",
                 "links", "loss_final")
METRICS = TRIAL_COLUMNS[2:]

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dataset: str = ""
    task: str = "undirected_lp"
    train_frac: float = 0.9
    trials: int = 10
    output_dir: str = "runs"
    hyperparams: HyperParams = field(default_factory=HyperParams)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 < self.train_frac < 1:
            raise ConfigError("train_frac must lie strictly between 0 and 1")
        directed = self.hyperparams.directed
        if self.task in ("bns", "bidirectional") and not directed:
            raise ConfigError(f"task {self.task} needs directed=true")
        if self.task == "undirected_lp" and directed:
            raise ConfigError("task undirected_lp needs directed=false")

    @property
    def directed(self) -> bool:
        return self.hyperparams.directed


def config_keys() -> dict[str, type]:
    keys = {f.name: type(f.default) for f in fields(RunConfig) if f.name != "hyperparams"}
    keys.update(HyperParams.field_types())
    return keys


def build_config(values: dict[str, str]) -> RunConfig:
    """Turn raw ``key -> text`` settings into a validated :class:`RunConfig`."""
    types = config_keys()
    run_kw, hp_kw = {}, {}
    hp_names = set(HyperParams.field_types())
    for key, raw in values.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            value = _parse_value(raw, types[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
        (hp_kw if key in hp_names else run_kw)[key] = value
    try:
        hp = HyperParams(**hp_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(hyperparams=hp, **run_kw)


def read_config_file(path) -> dict[str, str]:
    values = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, raw = line.split("=", 1)
            values[key.strip()] = raw.strip()
    return values


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

def _build_split(g: gc.Graph, cfg: RunConfig, seed: int):
    if cfg.task == "undirected_lp":
        return gc.split_undirected(g, cfg.train_frac, seed=seed)
    if cfg.task == "bns":
        return gc.split_bns(g, 1.0 - cfg.train_frac, seed=seed)
    if cfg.task == "bidirectional":
        return gc.split_bidirectional(g, seed=seed)
    return None


def run_trial(g: gc.Graph, cfg: RunConfig, trial: int, trial_dir=None) -> dict:
    """Split, train and evaluate one trial; returns a per-trial CSV row."""
    seed = cfg.hyperparams.seed + trial
    hp = replace(cfg.hyperparams, seed=seed)
    split = _build_split(g, cfg, seed)
    if split is None:
        pairs = gc.reconstruction_pairs(g)
        model = train(pairs, g.n, hp)
        eval_pairs = pairs
    else:
        model = train(split, g.n, hp)
        eval_pairs = split.test_pairs
    scores = predict(model, eval_pairs)
    report = evaluate(scores, [p[2] for p in eval_pairs], hp.threshold)
    if trial_dir is not None:
        save_model(model, trial_dir, g.node_labels)
        if split is not None:
            with open(os.path.join(trial_dir, "split.tsv"), "w", encoding="utf-8") as fh:
                split.write_tsv(fh, g.node_labels)
    return {"trial": trial, "seed": seed, "auc": report.auc, "ap": report.ap,
            "accuracy": report.accuracy, "precision": report.precision,
            "recall": report.recall, "f1": report.f1,
            "links": report.predicted_link_count, "loss_final": model.final_loss}


def summarise(rows) -> dict:
    """Mean and sample standard deviation of every metric column."""
    out = {"trials": len(rows)}
    for m in METRICS:
        vals = [float(r[m]) for r in rows]
        out[f"{m}_mean"] = statistics.fmean(vals)
        out[f"{m}_std"] = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return out


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[h]) for h in header])


def resolve_output_dir(cfg: RunConfig) -> str:
    return os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir


def execute_run(cfg: RunConfig, out_dir: str, g: gc.Graph | None = None) -> dict:
    """Run every trial of ``cfg`` and write ``trials.csv`` and ``summary.csv``."""
    if g is None:
        g = gc.read_edge_list(cfg.dataset, directed=cfg.directed)
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for t in range(cfg.trials):
        rows.append(run_trial(g, cfg, t, os.path.join(out_dir, f"trial_{t}")))
        logger.info("trial %d: auc=%.4f ap=%.4f", t, rows[-1]["auc"], rows[-1]["ap"])
    _write_csv(os.path.join(out_dir, "trials.csv"), TRIAL_COLUMNS, rows)
    summary = summarise(rows)
    _write_csv(os.path.join(out_dir, "summary.csv"), list(summary), [summary])
    return summary


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load_cfg(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in config_keys():
        override = getattr(args, key, None)
        if override is not None:
            values[key] = override
    return build_config(values)


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    if not cfg.dataset:
        raise ConfigError("dataset is required")
    summary = execute_run(cfg, resolve_output_dir(cfg))
    for m in METRICS:
        print(f"{m:<10} {summary[m + '_mean']:.4f} +- {summary[m + '_std']:.4f}")
    return EXIT_OK


def _grid(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad grid {text!r}") from None
    if not vals:
        raise ConfigError("grid must be non-empty")
    return vals


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    if not cfg.dataset:
        raise ConfigError("dataset is required")
    alphas, betas = _grid(args.alphas), _grid(args.betas)
    g = gc.read_edge_list(cfg.dataset, directed=cfg.directed)
    out_dir = resolve_output_dir(cfg)
    os.makedirs(out_dir, exist_ok=True)
    header = ("alpha", "beta", "auc_mean", "ap_mean", "auc_std", "ap_std")
    rows = []
    for a in alphas:
        for b in betas:
            cell = replace(cfg, hyperparams=replace(cfg.hyperparams, alpha=a, beta=b))
            try:
                s = execute_run(cell, os.path.join(out_dir, f"alpha_{a}_beta_{b}"), g)
                row = {k: s[k] for k in header[2:]}
            except (TrainingDivergence, gc.SplitError, ValueError) as exc:
                logger.warning("cell alpha=%s beta=%s failed: %s", a, b, exc)
                row = {k: math.nan for k in header[2:]}
            rows.append({"alpha": a, "beta": b, **row})
    _write_csv(os.path.join(out_dir, "sweep.csv"), header, rows)
    return EXIT_OK


def cmd_auto_k(args) -> int:
    g = gc.read_edge_list(args.dataset, directed=args.directed)
    part = louvain_auto_k(g, seed=args.seed)
    print(part.k)
    out = args.output or os.path.join(os.environ.get(OUTPUT_DIR_ENV) or ".", "partition.tsv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        part.write_tsv(fh, g.node_labels)
    return EXIT_OK


def _read_pair_file(path, index):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) < 2:
                raise gc.GraphFormatError(f"{path}:{lineno}: expected two node labels")
            try:
                pairs.append((index[tok[0]], index[tok[1]]))
            except KeyError as exc:
                raise gc.GraphFormatError(f"{path}:{lineno}: unknown node {exc}") from None
    return pairs


def cmd_predict(args) -> int:
    try:
        model, labels = load_model(args.model)
    except (OSError, KeyError, ValueError) as exc:
        raise gc.GraphFormatError(f"cannot load model from {args.model}: {exc}") from None
    pairs = _read_pair_file(args.pairs, {lab: i for i, lab in enumerate(labels)})
    scores = predict(model, pairs)
    fh = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "score"])
        for (i, j), s in zip(pairs, scores):
            w.writerow([labels[i], labels[j], repr(float(s))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_baseline(args) -> int:
    g = gc.read_edge_list(args.dataset, directed=False)
    pairs = _read_pair_file(args.pairs, {lab: i for i, lab in enumerate(g.node_labels)})
    scores = heuristic_scores(g, pairs, args.method)
    write_scores_csv(sys.stdout, pairs, args.method, scores, g.node_labels)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad flags are configuration mistakes, so they share exit code 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_config_flags(p):
    p.add_argument("--config", help="key=value config file")
    for key in config_keys():
        p.add_argument("--" + key.replace("_", "-"), dest=key, metavar="VALUE",
                       help=argparse.SUPPRESS)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clusterlp",
                     description="Cluster-aware link prediction experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="repeat trials of one task and summarise",
                       epilog="Any config key may be overridden as --key VALUE "
                              f"(keys: {', '.join(config_keys())}).")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid over alpha and beta")
    _add_config_flags(p)
    p.add_argument("--alphas", required=True, help="comma-separated alpha values")
    p.add_argument("--betas", required=True, help="comma-separated beta values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("auto-k", help="pick the cluster count with Louvain")
    p.add_argument("dataset")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="partition TSV path")
    p.set_defaults(func=cmd_auto_k)

    p = sub.add_parser("predict", help="score a pair file with a saved model")
    p.add_argument("--model", required=True, help="directory written by run")
    p.add_argument("--pairs", required=True, help="file of 'src dst' label pairs")
    p.add_argument("--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("baseline", help="heuristic scores for a pair file")
    p.add_argument("dataset")
    p.add_argument("--pairs", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDivergence as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (OSError, gc.GraphFormatError, gc.SplitError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # e.g. K larger than the node count: a setting that does not fit the data
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
