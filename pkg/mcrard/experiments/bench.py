"""
Monte-Carlo comparison of LSR-ARD and MCR-ARD under arbitrary covariate
corruption, plus the per-iteration timing experiment.
"""
from dataclasses import dataclass, asdict, field, replace
from typing import Optional, Sequence
import os
import time
import logging

import numpy as np
import pandas as pd

from mcrard.exceptions import McrArdError
from mcrard.metrics import evaluate_regression, empirical_correntropy
from mcrard.models import LsrArdConfig, McrArdConfig, fit_lsr_ard, \
                          fit_mcr_ard, predict, ridge_init, mcr_ard_iteration
from mcrard.utils import FLOAT_FORMAT
from .bandwidth import BandwidthGrid, CvLayout, select_bandwidth
from .synthetic import SyntheticSpec, CorruptionSpec, generate, \
                       corrupt_covariates, draw_solution
from .utils import derive_seed, run_tasks

logger = logging.getLogger(__name__)

ALGORITHMS = ("lsr-ard", "mcr-ard")
DEFAULT_PROPORTIONS = tuple(round(0.1 * i, 1) for i in range(11))
DEFAULT_SCALES = (0.2, 0.3, 0.5, 0.7, 1.0, 1.2, 1.5)
RESULT_COLUMNS = ["rep", "proportion", "scale", "algorithm", "seed", "status",
                  "correlation", "rmse", "n_selected", "recall", "selected_h",
                  "empirical_correntropy", "n_iters", "converged"]
TIMING_COLUMNS = ["rep", "proportion", "scale", "algorithm", "wall_time"]
SUMMARY_METRICS = ["correlation", "rmse", "n_selected", "recall"]

@dataclass
class BenchConfig:
    """
    Everything a Monte-Carlo sweep depends on; recorded verbatim in the run
    manifest.

    Attributes:
        synthetic (SyntheticSpec): data sizes (its seed is replaced per cell)
        proportions, scales: corruption grid; an empty grid runs a single
            uncorrupted cell
        algorithms: subset of ("lsr-ard", "mcr-ard")
        reps (int): Monte-Carlo repetitions
        grid, cv: bandwidth search settings for MCR-ARD
        fixed_h (float): skips the bandwidth search when set
        fix_solution (bool): one w_true for every cell instead of one per cell
        master_seed (int): root of every derived seed
        eval_bandwidth (float): kernel width of the reported empirical
            correntropy, shared by both algorithms
    """
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    proportions: Sequence[float] = DEFAULT_PROPORTIONS
    scales: Sequence[float] = DEFAULT_SCALES
    algorithms: Sequence[str] = ALGORITHMS
    reps: int = 100
    grid: BandwidthGrid = field(default_factory=BandwidthGrid)
    cv: CvLayout = field(default_factory=CvLayout)
    mcr: McrArdConfig = field(default_factory=McrArdConfig)
    lsr: LsrArdConfig = field(default_factory=LsrArdConfig)
    fixed_h: Optional[float] = None
    fix_solution: bool = False
    master_seed: int = 0
    eval_bandwidth: float = 1.0

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}.")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or len(self.algorithms) == 0:
            raise ValueError(f"algorithms must be a nonempty subset of {ALGORITHMS}.")
        for p in self.proportions:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"proportions must be in [0, 1], got {p}.")
        for s in self.scales:
            if not s > 0:
                raise ValueError(f"scales must be > 0, got {s}.")

    def to_dict(self):
        d = asdict(self)
        d["proportions"] = list(self.proportions)
        d["scales"] = list(self.scales)
        d["algorithms"] = list(self.algorithms)
        return d

@dataclass
class BenchResult:
    """
    One (repetition, corruption cell, algorithm) outcome. Failed fits keep
    their row with `status` set to the error name and NaN metrics.
    """
    rep: int
    proportion: float
    scale: float
    algorithm: str
    seed: int
    status: str = "ok"
    correlation: float = np.nan
    rmse: float = np.nan
    n_selected: float = np.nan
    recall: float = np.nan
    selected_h: float = np.nan
    empirical_correntropy: float = np.nan
    n_iters: float = np.nan
    converged: Optional[bool] = None
    wall_time: float = np.nan

def corruption_cells(proportions, scales):
    """
    (proportion_idx, scale_idx, proportion, scale) for the full grid. An
    empty grid gives the single uncorrupted cell (0, 0, 0.0, 0.0).
    """
    if len(proportions) == 0 or len(scales) == 0:
        return [(0, 0, 0.0, 0.0)]
    return [(i, j, float(p), float(s)) for i, p in enumerate(proportions)
            for j, s in enumerate(scales)]

def _fit_and_score(algorithm, train, test, relevant, cfg, h, eval_bandwidth):
    start = time.perf_counter()
    if algorithm == "mcr-ard":
        model = fit_mcr_ard(train, cfg.mcr.with_bandwidth(h))
    else:
        model = fit_lsr_ard(train, cfg.lsr)
    wall_time = time.perf_counter() - start
    pred = predict(model, test.X)
    record = evaluate_regression(pred, test.t, model.active_mask,
                                 relevant if len(relevant) else None)
    return dict(correlation=np.nan if record.correlation is None \
                            else record.correlation,
                rmse=record.rmse, n_selected=record.n_selected,
                recall=np.nan if record.recall is None else record.recall,
                empirical_correntropy=empirical_correntropy(pred, test.t,
                                                            eval_bandwidth),
                n_iters=model.n_iters, converged=model.converged,
                wall_time=wall_time)

def run_cell(task):
    """
    Generates, corrupts, selects h (MCR-ARD only) and fits every algorithm
    for one (repetition, proportion, scale) cell.

    Args:
        task (tuple): (cfg, rep, p_idx, s_idx, proportion, scale, w_true)
    Returns:
        list of BenchResult, one per algorithm in `cfg.algorithms` order
    """
    cfg, rep, p_idx, s_idx, proportion, scale, w_true = task
    seed = derive_seed(cfg.master_seed, rep, p_idx, s_idx)
    spec = replace(cfg.synthetic, seed=seed)
    train, test, _, relevant = generate(spec, w_true)
    if proportion > 0:
        corruption = CorruptionSpec(proportion, scale,
                                    seed=derive_seed(seed, "corruption"))
        train = corrupt_covariates(train, corruption)

    results = []
    h, cv_time = np.nan, 0.0
    for algorithm in cfg.algorithms:
        row = BenchResult(rep=rep, proportion=proportion, scale=scale,
                          algorithm=algorithm, seed=seed)
        try:
            if algorithm == "mcr-ard":
                start = time.perf_counter()
                if cfg.fixed_h is not None:
                    h = float(cfg.fixed_h)
                else:
                    cv = replace(cfg.cv, seed=derive_seed(seed, "cv"))
                    h, _ = select_bandwidth(train, cfg.grid, cv, cfg.mcr)
                cv_time = time.perf_counter() - start
                row.selected_h = h
            scores = _fit_and_score(algorithm, train, test, relevant, cfg, h,
                                    cfg.eval_bandwidth)
            if algorithm == "mcr-ard":
                scores["wall_time"] += cv_time
            for key, value in scores.items():
                setattr(row, key, value)
        except (McrArdError, ValueError, np.linalg.LinAlgError) as exc:
            row.status = type(exc).__name__
            logger.warning(f"rep {rep}, proportion {proportion:g}, scale "
                           f"{scale:g}: {algorithm} failed ({exc})")
        results.append(row)
    return results

def run_monte_carlo(cfg=None, n_jobs=1, disable=False):
    """
    Full sweep: every repetition x corruption cell x algorithm. Cells run on
    a worker pool; the output order is canonical (rep, proportion index,
    scale index, algorithm) whatever the execution order.

    Returns:
        list of BenchResult
    """
    cfg = BenchConfig() if cfg is None else cfg
    cells = corruption_cells(cfg.proportions, cfg.scales)
    w_true = None
    if cfg.fix_solution:
        rng = np.random.default_rng(derive_seed(cfg.master_seed, "solution"))
        w_true = draw_solution(cfg.synthetic, rng)
    tasks = [(cfg, rep, p_idx, s_idx, p, s, w_true)
             for rep in range(cfg.reps) for (p_idx, s_idx, p, s) in cells]
    mode = f"fixed h={cfg.fixed_h:g}" if cfg.fixed_h is not None else "CV-selected h"
    logger.info(f"Running {cfg.reps} reps x {len(cells)} cells ({mode})...")
    cell_results = run_tasks(run_cell, tasks, n_jobs=n_jobs, desc="bench",
                             disable=disable)
    return [row for rows in cell_results for row in rows]

def results_frame(results):
    """
    bench_results table (no timing column, so reruns are byte-identical).
    """
    df = pd.DataFrame([asdict(r) for r in results])
    return df.reindex(columns=RESULT_COLUMNS)

def timing_frame(results):
    df = pd.DataFrame([asdict(r) for r in results])
    return df.reindex(columns=TIMING_COLUMNS)

def summarize(results_df):
    """
    Mean and sd (ddof=1) of correlation, rmse, n_selected and recall per
    (proportion, scale, algorithm) over the successful repetitions, plus
    the counts of successful and failed fits.
    """
    keys = ["proportion", "scale", "algorithm"]
    # failed rows carry NaN metrics, which mean/std skip
    grouped = results_df.assign(ok=results_df["status"] == "ok").groupby(keys)
    summary = grouped["ok"].agg(n_ok="sum", n_total="size")
    for metric in SUMMARY_METRICS:
        values = grouped[metric]
        summary[f"mean_{metric}"] = values.mean()
        summary[f"sd_{metric}"] = values.std(ddof=1)
    summary = summary.reset_index()
    summary["n_failed"] = summary["n_total"] - summary["n_ok"]
    ordered = keys + ["n_ok", "n_failed"] + \
              [f"{stat}_{m}" for m in SUMMARY_METRICS for stat in ("mean", "sd")]
    return summary.reindex(columns=ordered)

def all_failed(results):
    return len(results) > 0 and all(r.status != "ok" for r in results)

def save_bench_outputs(results, out_dir):
    """
    Writes bench_results.csv, bench_summary.csv and bench_timing.csv.

    Returns:
        dict of output name -> path
    """
    results_df = results_frame(results)
    paths = {"results": os.path.join(out_dir, "bench_results.csv"),
             "summary": os.path.join(out_dir, "bench_summary.csv"),
             "timing": os.path.join(out_dir, "bench_timing.csv")}
    results_df.to_csv(paths["results"], index=False, float_format=FLOAT_FORMAT)
    summarize(results_df).to_csv(paths["summary"], index=False,
                                 float_format=FLOAT_FORMAT)
    timing_frame(results).to_csv(paths["timing"], index=False,
                                 float_format=FLOAT_FORMAT)
    for path in paths.values():
        logger.info(f"Saving {path}...")
    return paths

def measure_iteration_time(sizes, reps=3, seed=0, h=10.0, n_iters=5, fp_passes=3):
    """
    Average wall time of one outer MCR-ARD iteration (w-step, Hessian,
    Laplace variances, a-step) on synthetic data with all D features active.

    Every timed iteration starts from the same state (ridge weights, unit
    relevance) and runs exactly `fp_passes` fixed-point passes, so the cost
    depends on N and D only.

    Args:
        sizes (list of (N, D)): problem sizes
        reps (int): timing repetitions per size
        seed (int): data seed
        h (float): bandwidth
        n_iters (int): iterations timed per repetition
        fp_passes (int): fixed-point passes per w-step
    Returns:
        DataFrame with columns N, D, seconds_per_iter
    """
    rows = []
    # fp_tol this small never triggers the inner stop
    cfg = McrArdConfig(bandwidth=h, max_fp_iters=fp_passes, fp_tol=1e-300)
    for n_samples, dim in sizes:
        spec = SyntheticSpec(n_train=n_samples, n_test=1, dim=dim,
                             n_relevant=min(30, dim), seed=seed)
        train, _, _, _ = generate(spec)
        w0, a0 = ridge_init(train.X, train.t), np.ones(dim)
        mcr_ard_iteration(train.X, train.t, w0, a0, h, cfg)
        per_iter = []
        for _ in range(reps):
            start = time.perf_counter()
            for _ in range(n_iters):
                mcr_ard_iteration(train.X, train.t, w0, a0, h, cfg)
            per_iter.append((time.perf_counter() - start) / n_iters)
        rows.append({"N": n_samples, "D": dim,
                     "seconds_per_iter": float(np.mean(per_iter))})
        logger.info(f"N={n_samples}, D={dim}: {rows[-1]['seconds_per_iter']:.4f} s/iter")
    return pd.DataFrame(rows, columns=["N", "D", "seconds_per_iter"])

def scaling_ratios(table):
    """
    Ratios of seconds_per_iter against the first row of a timing table,
    keyed by "N" (rows that double N only) and "D" (rows that double D only).
    """
    base = table.iloc[0]
    ratios = {}
    for _, row in table.iloc[1:].iterrows():
        if row["D"] == base["D"] and row["N"] == 2 * base["N"]:
            ratios["N"] = row["seconds_per_iter"] / base["seconds_per_iter"]
        elif row["N"] == base["N"] and row["D"] == 2 * base["D"]:
            ratios["D"] = row["seconds_per_iter"] / base["seconds_per_iter"]
    return ratios
