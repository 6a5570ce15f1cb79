from .utils import derive_seed, merge_config, run_tasks, default_master_seed
from .synthetic import SyntheticSpec, CorruptionSpec, generate, sample_laplace, \
                       corrupt_covariates
from .bandwidth import BandwidthGrid, CvLayout, grid_points, select_bandwidth, \
                       select_bandwidth_holdout, pick_bandwidth, save_cv_table
from .bench import BenchConfig, BenchResult, run_monte_carlo, summarize, \
                   results_frame, save_bench_outputs, measure_iteration_time, \
                   scaling_ratios
