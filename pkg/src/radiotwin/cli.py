"""Command line interface.

Subcommands: generate, train, evaluate, sweep, radiomap. Exit codes:
0 success, 2 configuration error, 3 data error, 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import dataset as ds
from . import experiments
from .detectors import DETECTORS, load_model, make_detector, save_model
from .errors import ConfigError, DataFormatError, RadioTwinError, SolverNonConvergence
from .metrics import evaluate_scores
from .scenario import ScenarioConfig, sample_rng, sample_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radiotwin",
        description="Jammer detection benchmark on a digital twin of the radio environment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a labeled train/test dataset")
    p.add_argument("--sigma", type=float, required=True, help="shadowing std in dB")
    p.add_argument("--grid", type=float, default=10.0, help="SU grid size in m")
    p.add_argument("--n-train", type=int, default=4000)
    p.add_argument("--n-test", type=int, default=4000)
    p.add_argument("--anomaly-frac", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pos-err-std", type=float, default=1.02,
                   help="localization error std per axis in m")
    p.add_argument("--out", required=True,
                   help="dataset basename; writes <out>.train.csv, <out>.test.csv, <out>.meta")

    p = sub.add_parser("train", help="fit a detector on a normal-only sample file")
    p.add_argument("--detector", required=True, choices=sorted(DETECTORS))
    p.add_argument("--data", required=True, help="CSV of training samples (all normal)")
    p.add_argument("--sorted", action="store_true",
                   help="apply the descending-sort preprocessing")
    p.add_argument("--model-out", required=True)

    p = sub.add_parser("evaluate", help="score a sample file with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="CSV of labeled test samples")
    p.add_argument("--sorted", action="store_true",
                   help="apply the descending-sort preprocessing")
    p.add_argument("--report", required=True, help="output JSON path")

    p = sub.add_parser("sweep", help="run a full experiment sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="zero the timing columns for byte-reproducible output")

    p = sub.add_parser("radiomap", help="render debug radio maps for one scenario")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--no-jammer", action="store_true")
    p.add_argument("--out", required=True,
                   help="output basename; writes <out>.txt and <out>.svg")
    return parser


def _cmd_generate(args) -> int:
    config = ScenarioConfig(
        sigma_shadow=args.sigma,
        grid_size=args.grid,
        pos_err_std=args.pos_err_std,
        master_seed=args.seed,
    )
    data = ds.generate(config, args.n_train, args.n_test, args.anomaly_frac)
    paths = ds.save_csv(data, args.out)
    for path in paths:
        print(path)
    return 0


def _load_sorted(path: str, apply_sort: bool) -> tuple[np.ndarray, np.ndarray]:
    features, labels = ds.load_samples_csv(path)
    if apply_sort:
        features = np.sort(features, axis=1)[:, ::-1].copy()
    return features, labels


def _cmd_train(args) -> int:
    features, labels = _load_sorted(args.data, args.sorted)
    if np.any(labels != ds.LABEL_NORMAL):
        raise DataFormatError(
            f"{args.data}: training data contains {int((labels != 0).sum())} anomaly rows; "
            "detectors are fit on normal samples only"
        )
    det = make_detector(args.detector)
    det.fit(features)
    save_model(det, args.model_out)
    print(f"fitted {args.detector} on {len(features)} samples -> {args.model_out}")
    return 0


def _cmd_evaluate(args) -> int:
    det = load_model(args.model)
    features, labels = _load_sorted(args.data, args.sorted)
    if len(np.unique(labels)) < 2:
        raise DataFormatError(
            f"{args.data}: need both normal and anomaly rows to evaluate"
        )
    scores = det.score_batch(features)
    preds = det.predict_batch(features)
    report = evaluate_scores(labels, scores, preds, beta=2.0)
    payload = {"detector": det.name, "n_samples": int(len(features))}
    payload.update(report.to_dict())
    parent = os.path.dirname(args.report)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(
        f"{det.name}: auc={report.auc:.4f} precision={report.precision:.4f} "
        f"recall={report.recall:.4f} f2={report.f_beta:.4f}"
    )
    return 0


def _cmd_sweep(args) -> int:
    spec = experiments.spec_from_file(args.config)
    result = experiments.run_sweep(spec, workers=args.workers, timing=not args.no_timing)
    os.makedirs(args.out_dir, exist_ok=True)
    results_path = os.path.join(args.out_dir, "results.csv")
    aggregate_path = os.path.join(args.out_dir, "aggregate.csv")
    experiments.write_results_csv(result, results_path)
    agg = experiments.aggregate(result)
    experiments.write_aggregate_csv(agg, aggregate_path)
    plots = experiments.render_plots(agg, os.path.join(args.out_dir, "plots"), result.roc)
    print(f"{len(result.rows)} rows -> {results_path}")
    print(f"{len(agg)} aggregate rows -> {aggregate_path}")
    print(f"{len(plots)} figures -> {os.path.join(args.out_dir, 'plots')}")
    if result.failures:
        print(f"{len(result.failures)} cell(s) FAILED:", file=sys.stderr)
        for key, message in result.failures:
            print(f"  {key}: {message}", file=sys.stderr)
    return 0


def _cmd_radiomap(args) -> int:
    config = ScenarioConfig(sigma_shadow=args.sigma, master_seed=args.seed)
    rng = sample_rng(config.master_seed, phase=2, index=0)
    scenario = sample_scenario(config, anomalous=not args.no_jammer, rng=rng)
    grid_path, svg_path = experiments.render_radio_map(
        scenario, args.resolution, args.out
    )
    print(grid_path)
    print(svg_path)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "radiomap": _cmd_radiomap,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except SolverNonConvergence as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 4
    except RadioTwinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
