"""
Command-line entry point: `mcrard {fit,predict,bench,cv,lagged,timing}`.

Exit codes: 0 success, 2 bad input, 3 every feature pruned, 4 numerical
failure, 5 every bench cell failed.
"""
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from typing import Optional
import argparse
import logging
import os
import sys

import numpy as np
import pandas as pd
import yaml

from mcrard import __version__
from mcrard.exceptions import AllFeaturesPruned, NotSPD, McrArdError, \
                              FeatureMismatch, InputFormatError
from mcrard.experiments import BandwidthGrid, CvLayout, SyntheticSpec, \
                               BenchConfig, default_master_seed, merge_config, \
                               run_monte_carlo, save_bench_outputs, \
                               select_bandwidth, select_bandwidth_holdout, \
                               save_cv_table, measure_iteration_time
from mcrard.experiments.bench import DEFAULT_PROPORTIONS, DEFAULT_SCALES, \
                                     all_failed
from mcrard.io import LagSpec, load_dataset_csv, save_dataset_csv, \
                      read_numeric_csv, standardize, append_intercept, \
                      build_lagged_design, load_time_series_csv, \
                      normalize_target_01
from mcrard.metrics import evaluate_regression
from mcrard.models import LsrArdConfig, McrArdConfig, fit_lsr_ard, \
                          fit_mcr_ard, predict, predict_raw, save_model, \
                          load_model
from mcrard.utils import FLOAT_FORMAT, file_digest, maybe_mkdir, save_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRUNED = 3
EXIT_NUMERICAL = 4
EXIT_ALL_FAILED = 5

COMMON_DEFAULTS = {"seed": 0, "out": "."}
GRID_DEFAULTS = {"grid_lo": 1.0, "grid_hi": 1000.0, "grid_n": 30, "folds": 5}
FIT_SETTINGS = {"a_max": 1e6, "max_iters": 500,
                "hessian_mode": "exact_with_safeguard"}
DEFAULTS = {
    "fit": {**COMMON_DEFAULTS, **GRID_DEFAULTS, **FIT_SETTINGS,
            "algo": "mcr-ard", "input": None, "target_column": "target",
            "h": None, "cv_h": False, "intercept": False,
            "no_standardize": False},
    "predict": {**COMMON_DEFAULTS, "model": None, "input": None,
                "target_column": "target"},
    "bench": {**COMMON_DEFAULTS, **GRID_DEFAULTS, **FIT_SETTINGS,
              "reps": 100, "proportions": list(DEFAULT_PROPORTIONS),
              "scales": list(DEFAULT_SCALES), "n_train": 300, "n_test": 300,
              "dim": 500, "n_relevant": 30, "fixed_h": None,
              "fix_solution": False, "jobs": None, "eval_bandwidth": 1.0},
    "cv": {**COMMON_DEFAULTS, **GRID_DEFAULTS, **FIT_SETTINGS,
           "input": None, "target_column": "target", "metric": "correlation",
           "holdout": None, "no_standardize": False, "jobs": 1},
    "lagged": {**COMMON_DEFAULTS, "series": None, "target": None,
               "target_column": "target", "lags": 21, "stride": 1,
               "normalize_target": False},
    "timing": {**COMMON_DEFAULTS, "sizes": "300x500,600x500,300x1000",
               "reps": 3, "h": 10.0},
}

@dataclass
class RunManifest:
    """
    Provenance written next to every output as manifest.json. Timestamps
    live here only, so the data files themselves are reproducible.
    """
    command: str
    config: dict
    master_seed: int
    version: str = __version__
    input_digests: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    started: Optional[str] = None
    finished: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def save(self, out_dir):
        path = os.path.join(out_dir, "manifest.json")
        save_json(asdict(self), path)
        logger.info(f"Saving {path}...")
        return path

def _now():
    return datetime.now(timezone.utc).isoformat()

def configure_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        force=True)

def load_config_file(path):
    """
    Reads a flat YAML mapping whose keys mirror the flag names.
    """
    if path is None:
        return {}
    with open(path, "r") as stream:
        try:
            config = yaml.safe_load(stream)
        except yaml.YAMLError as exc:
            raise InputFormatError(f"invalid YAML ({exc})", path=path) from exc
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise InputFormatError("config must be a mapping of key: value lines",
                               path=path)
    return config

def parse_floats(value):
    """
    "0,0.1,0.2" (or a YAML list) -> [0.0, 0.1, 0.2]; "" -> [].
    """
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in str(value).split(",") if v.strip() != ""]

def parse_sizes(value):
    """
    "300x500,600x500" -> [(300, 500), (600, 500)]
    """
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    sizes = []
    for item in items:
        try:
            n_samples, dim = str(item).lower().split("x")
            sizes.append((int(n_samples), int(dim)))
        except ValueError as exc:
            raise ValueError(f"sizes must look like 300x500, got {item!r}.") from exc
    return sizes

def prepare_training_data(data, standardize_covariates=True, intercept=False):
    """
    Standardizes covariates and either centers the target or appends a
    protected intercept column.

    Returns:
        (Dataset in fit space, StandardizationParams or None, target offset)
    """
    params = None
    if standardize_covariates:
        data, params = standardize(data)
    offset = 0.0
    if intercept:
        data = append_intercept(data)
    else:
        offset = float(np.mean(data.t))
        data = data.with_target(data.t - offset)
    return (data, params, offset)

def _grid_and_layout(cfg):
    grid = BandwidthGrid(lo=float(cfg["grid_lo"]), hi=float(cfg["grid_hi"]),
                         n_points=int(cfg["grid_n"]))
    cv = CvLayout(n_folds=int(cfg["folds"]), seed=int(cfg["seed"]),
                  selection_metric=cfg.get("metric", "correlation"))
    return (grid, cv)

def _mcr_config(cfg, h=1.0):
    return McrArdConfig(bandwidth=h, prune_threshold=float(cfg["a_max"]),
                        max_outer_iters=int(cfg["max_iters"]),
                        hessian_mode=cfg["hessian_mode"])

def _lsr_config(cfg):
    return LsrArdConfig(prune_threshold=float(cfg["a_max"]),
                        max_iters=int(cfg["max_iters"]))

def _require(cfg, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise InputFormatError(f"missing required option --{key.replace('_', '-')}")

def cmd_fit(cfg, manifest, disable=False):
    _require(cfg, "input")
    if cfg["algo"] not in ("lsr-ard", "mcr-ard"):
        raise InputFormatError(f"unknown algorithm {cfg['algo']!r}")
    data = load_dataset_csv(cfg["input"], cfg["target_column"])
    manifest.input_digests[cfg["input"]] = file_digest(cfg["input"])
    train, params, offset = prepare_training_data(data, not cfg["no_standardize"],
                                                  cfg["intercept"])
    protected = [train.n_features - 1] if cfg["intercept"] else None
    out_dir = cfg["out"]
    report = {}

    if cfg["algo"] == "lsr-ard":
        model = fit_lsr_ard(train, _lsr_config(cfg), protected=protected)
    else:
        if cfg["cv_h"]:
            grid, cv = _grid_and_layout(cfg)
            h, cv_table = select_bandwidth(train, grid, cv, _mcr_config(cfg),
                                           disable=disable)
            cv_path = save_cv_table(cv_table, os.path.join(out_dir, "cv_table.csv"))
            manifest.outputs.append(cv_path)
            report["bandwidth_source"] = "cv"
        elif cfg["h"] is not None:
            h = float(cfg["h"])
            report["bandwidth_source"] = "fixed"
        else:
            raise InputFormatError("mcr-ard needs either --h or --cv-h")
        model = fit_mcr_ard(train, _mcr_config(cfg, h), protected=protected)

    model.feature_names = train.names()
    model.standardization = params
    model.target_offset = offset
    model.has_intercept = bool(cfg["intercept"])
    train_metrics = evaluate_regression(predict(model, train.X), train.t,
                                        model.active_mask)
    report.update({"algorithm": model.algorithm, "n_iters": model.n_iters,
                   "converged": model.converged,
                   "n_features": model.n_features,
                   "n_active": int(model.active_mask.sum()),
                   "active_features": [model.feature_names[i]
                                       for i in model.active_indices],
                   "bandwidth": model.bandwidth,
                   "noise_variance": model.noise_variance,
                   "objective_trace": model.objective_trace,
                   "train_metrics": train_metrics.to_dict()})
    model_path = os.path.join(out_dir, "model.json")
    report_path = os.path.join(out_dir, "fit_report.json")
    save_model(model, model_path)
    save_json(report, report_path)
    logger.info(f"Saving {report_path}...")
    manifest.outputs += [model_path, report_path]
    if not model.converged:
        logger.warning(f"{model.algorithm} stopped at the iteration cap "
                       f"({model.n_iters}) without converging")
    return EXIT_OK

def _model_covariate_names(model):
    n_cov = model.n_features - int(model.has_intercept)
    if model.feature_names is None:
        return [f"x{d}" for d in range(n_cov)]
    return list(model.feature_names[:n_cov])

def cmd_predict(cfg, manifest, disable=False):
    _require(cfg, "model", "input")
    model = load_model(cfg["model"])
    df = read_numeric_csv(cfg["input"])
    for path in (cfg["model"], cfg["input"]):
        manifest.input_digests[path] = file_digest(path)
    names = _model_covariate_names(model)
    target_column = cfg["target_column"]
    missing = [name for name in names if name not in df.columns]
    unexpected = [c for c in df.columns if c not in names and c != target_column]
    if missing or unexpected:
        raise FeatureMismatch(f"input columns do not match the model: missing "
                              f"{missing}, unexpected {unexpected}",
                              missing=missing, unexpected=unexpected)
    pred = predict_raw(model, df[names].to_numpy())
    pred_path = os.path.join(cfg["out"], "predictions.csv")
    pd.DataFrame({"prediction": pred}).to_csv(pred_path, index=False,
                                              float_format=FLOAT_FORMAT)
    logger.info(f"Saving {pred_path}...")
    manifest.outputs.append(pred_path)
    if target_column in df.columns:
        metrics = evaluate_regression(pred, df[target_column].to_numpy(),
                                      model.active_mask)
        metrics_path = os.path.join(cfg["out"], "metrics.json")
        save_json({"correlation": metrics.correlation, "rmse": metrics.rmse},
                  metrics_path)
        logger.info(f"Saving {metrics_path}...")
        manifest.outputs.append(metrics_path)
    return EXIT_OK

def bench_config_from(cfg):
    grid, cv = _grid_and_layout(cfg)
    synthetic = SyntheticSpec(n_train=int(cfg["n_train"]), n_test=int(cfg["n_test"]),
                              dim=int(cfg["dim"]), n_relevant=int(cfg["n_relevant"]))
    return BenchConfig(synthetic=synthetic,
                       proportions=parse_floats(cfg["proportions"]),
                       scales=parse_floats(cfg["scales"]),
                       reps=int(cfg["reps"]), grid=grid, cv=cv,
                       mcr=_mcr_config(cfg), lsr=_lsr_config(cfg),
                       fixed_h=None if cfg["fixed_h"] is None else float(cfg["fixed_h"]),
                       fix_solution=bool(cfg["fix_solution"]),
                       master_seed=int(cfg["seed"]),
                       eval_bandwidth=float(cfg["eval_bandwidth"]))

def cmd_bench(cfg, manifest, disable=False):
    bench_cfg = bench_config_from(cfg)
    n_jobs = cfg["jobs"] if cfg["jobs"] is not None else (os.cpu_count() or 1)
    manifest.extra["bench_config"] = bench_cfg.to_dict()
    manifest.extra["bandwidth_mode"] = "fixed" if bench_cfg.fixed_h is not None \
                                       else "cv"
    results = run_monte_carlo(bench_cfg, n_jobs=int(n_jobs), disable=disable)
    paths = save_bench_outputs(results, cfg["out"])
    manifest.outputs += list(paths.values())
    if all_failed(results):
        logger.error("Every bench cell failed.")
        return EXIT_ALL_FAILED
    return EXIT_OK

def cmd_cv(cfg, manifest, disable=False):
    _require(cfg, "input")
    data = load_dataset_csv(cfg["input"], cfg["target_column"])
    manifest.input_digests[cfg["input"]] = file_digest(cfg["input"])
    train, _, _ = prepare_training_data(data, not cfg["no_standardize"])
    grid, cv = _grid_and_layout(cfg)
    if cfg["holdout"] is not None:
        h, cv_table = select_bandwidth_holdout(train, grid, float(cfg["holdout"]),
                                               seed=cv.seed, cfg=_mcr_config(cfg),
                                               selection_metric=cv.selection_metric,
                                               n_jobs=int(cfg["jobs"]),
                                               disable=disable)
    else:
        h, cv_table = select_bandwidth(train, grid, cv, _mcr_config(cfg),
                                       n_jobs=int(cfg["jobs"]), disable=disable)
    cv_path = save_cv_table(cv_table, os.path.join(cfg["out"], "cv_table.csv"))
    manifest.outputs.append(cv_path)
    manifest.extra["selected_h"] = h
    print(FLOAT_FORMAT % h)
    return EXIT_OK

def cmd_lagged(cfg, manifest, disable=False):
    _require(cfg, "series", "target")
    series, target, sources = load_time_series_csv(cfg["series"], cfg["target"],
                                                    cfg["target_column"])
    for path in (cfg["series"], cfg["target"]):
        manifest.input_digests[path] = file_digest(path)
    if cfg["normalize_target"]:
        target, t_min, t_max = normalize_target_01(target)
        manifest.extra["target_range"] = [t_min, t_max]
    spec = LagSpec(n_lags=int(cfg["lags"]), stride=int(cfg["stride"]))
    design = build_lagged_design(series, target, spec)
    manifest.extra["sources"] = sources
    design_path = save_dataset_csv(design, os.path.join(cfg["out"], "design.csv"),
                                   cfg["target_column"])
    manifest.outputs.append(design_path)
    return EXIT_OK

def cmd_timing(cfg, manifest, disable=False):
    table = measure_iteration_time(parse_sizes(cfg["sizes"]), reps=int(cfg["reps"]),
                                   seed=int(cfg["seed"]), h=float(cfg["h"]))
    timing_path = os.path.join(cfg["out"], "timing.csv")
    table.to_csv(timing_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saving {timing_path}...")
    manifest.outputs.append(timing_path)
    return EXIT_OK

COMMANDS = {"fit": cmd_fit, "predict": cmd_predict, "bench": cmd_bench,
            "cv": cmd_cv, "lagged": cmd_lagged, "timing": cmd_timing}

def _add_grid_flags(parser):
    parser.add_argument("--grid-lo", type=float, help="Smallest bandwidth (1.0).")
    parser.add_argument("--grid-hi", type=float, help="Largest bandwidth (1000).")
    parser.add_argument("--grid-n", type=int, help="Grid points (30).")
    parser.add_argument("--folds", type=int, help="CV folds (5).")

def _add_fit_flags(parser):
    parser.add_argument("--a-max", type=float, help="Pruning threshold (1e6).")
    parser.add_argument("--max-iters", type=int, help="Outer iteration cap (500).")
    parser.add_argument("--hessian-mode",
                        choices=["exact_with_safeguard", "gauss_style_psd"])

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="YAML file of flag defaults.")
    common.add_argument("--verbose", action="store_true", default=None)
    common.add_argument("--quiet", action="store_true", default=None)
    common.add_argument("--seed", type=int, help="Master seed (env CORR_ARD_SEED).")
    common.add_argument("--out", type=str, help="Output directory.")

    parser = argparse.ArgumentParser(prog="mcrard",
                                     description="Sparse robust regression with "
                                                 "MCR-ARD and LSR-ARD.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common], help="Fit a model on a csv.")
    fit.add_argument("--algo", choices=["lsr-ard", "mcr-ard"])
    fit.add_argument("--input", type=str)
    fit.add_argument("--target-column", type=str)
    fit.add_argument("--h", type=float, help="Fixed kernel bandwidth.")
    fit.add_argument("--cv-h", action="store_true", default=None,
                     help="Select the bandwidth by cross-validation.")
    fit.add_argument("--intercept", action="store_true", default=None)
    fit.add_argument("--no-standardize", action="store_true", default=None)
    _add_grid_flags(fit)
    _add_fit_flags(fit)

    pred = sub.add_parser("predict", parents=[common], help="Predict from a model.")
    pred.add_argument("--model", type=str)
    pred.add_argument("--input", type=str)
    pred.add_argument("--target-column", type=str)

    bench = sub.add_parser("bench", parents=[common],
                           help="Monte-Carlo corruption benchmark.")
    bench.add_argument("--reps", type=int)
    bench.add_argument("--proportions", type=str, help="e.g. 0,0.1,0.2")
    bench.add_argument("--scales", type=str, help="e.g. 0.2,0.5,1.0")
    bench.add_argument("--n-train", type=int)
    bench.add_argument("--n-test", type=int)
    bench.add_argument("--dim", type=int)
    bench.add_argument("--n-relevant", type=int)
    bench.add_argument("--fixed-h", type=float, help="Skip the bandwidth search.")
    bench.add_argument("--fix-solution", action="store_true", default=None)
    bench.add_argument("--jobs", type=int)
    bench.add_argument("--eval-bandwidth", type=float)
    _add_grid_flags(bench)
    _add_fit_flags(bench)

    cv = sub.add_parser("cv", parents=[common], help="Bandwidth cross-validation.")
    cv.add_argument("--input", type=str)
    cv.add_argument("--target-column", type=str)
    cv.add_argument("--metric", choices=["correlation", "rmse"])
    cv.add_argument("--holdout", type=float,
                    help="Train fraction of a single holdout split.")
    cv.add_argument("--no-standardize", action="store_true", default=None)
    cv.add_argument("--jobs", type=int)
    _add_grid_flags(cv)
    _add_fit_flags(cv)

    lagged = sub.add_parser("lagged", parents=[common],
                            help="Build a lagged design csv.")
    lagged.add_argument("--series", type=str)
    lagged.add_argument("--target", type=str)
    lagged.add_argument("--target-column", type=str)
    lagged.add_argument("--lags", type=int)
    lagged.add_argument("--stride", type=int)
    lagged.add_argument("--normalize-target", action="store_true", default=None)

    timing = sub.add_parser("timing", parents=[common],
                            help="Per-iteration MCR-ARD wall time.")
    timing.add_argument("--sizes", type=str, help="e.g. 300x500,600x500")
    timing.add_argument("--reps", type=int)
    timing.add_argument("--h", type=float)
    return parser

def resolve_config(args):
    """
    flags > --config file > built-in defaults (seed default from
    CORR_ARD_SEED).
    """
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "verbose", "quiet")}
    defaults = dict(DEFAULTS[args.command])
    defaults["seed"] = default_master_seed(defaults["seed"])
    return merge_config(defaults, load_config_file(args.config), flags)

def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(verbose=bool(args.verbose), quiet=bool(args.quiet))
    started = _now()
    try:
        cfg = resolve_config(args)
        maybe_mkdir(cfg["out"])
        manifest = RunManifest(command=args.command, config=cfg,
                               master_seed=int(cfg["seed"]), started=started)
        status = COMMANDS[args.command](cfg, manifest, disable=bool(args.quiet))
        manifest.finished = _now()
        manifest.save(cfg["out"])
        return status
    except AllFeaturesPruned as exc:
        logger.error(str(exc))
        return EXIT_PRUNED
    except NotSPD as exc:
        logger.error(f"Numerical failure: {exc}")
        return EXIT_NUMERICAL
    except (McrArdError, ValueError, OSError) as exc:
        logger.error(str(exc))
        return EXIT_INPUT

if __name__ == "__main__":
    sys.exit(main())
