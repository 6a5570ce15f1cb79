
import sys
sys.path.append(".")

from mcrard.cli import RunManifest, configure_logging
from mcrard.experiments import BenchConfig, SyntheticSpec, BandwidthGrid, \
                               CvLayout, run_monte_carlo, save_bench_outputs
from mcrard.models import McrArdConfig, LsrArdConfig
from mcrard.utils import maybe_mkdir

def main(config):
    """
    Main code for running the Monte-Carlo corruption benchmark.

    Args:
        config (dict): dictionary read from a yaml file
            i.e. script_configs/bench.yml
    Returns:
        None
    """
    runner_params = config["runner_params"]
    corruption_params = config["corruption_params"]
    bench_cfg = BenchConfig(synthetic=SyntheticSpec(**config["synthetic_params"]),
                            proportions=corruption_params["proportions"],
                            scales=corruption_params["scales"],
                            reps=runner_params["reps"],
                            grid=BandwidthGrid(**config["bandwidth_params"]["grid"]),
                            cv=CvLayout(**config["bandwidth_params"]["cv"]),
                            mcr=McrArdConfig(**config.get("mcr_params", {})),
                            lsr=LsrArdConfig(**config.get("lsr_params", {})),
                            fixed_h=runner_params.get("fixed_h"),
                            fix_solution=runner_params.get("fix_solution", False),
                            master_seed=runner_params["master_seed"])
    print(f"Seed: {bench_cfg.master_seed}")
    out_dir = maybe_mkdir(runner_params["out_dir"])
    manifest = RunManifest(command="bench_yaml", config=config,
                           master_seed=bench_cfg.master_seed)
    results = run_monte_carlo(bench_cfg, n_jobs=runner_params.get("jobs", 1))
    manifest.outputs = list(save_bench_outputs(results, out_dir).values())
    manifest.save(out_dir)

if __name__ == "__main__":
    import yaml
    import argparse

    parser = argparse.ArgumentParser(description="For benchmarking.")
    parser.add_argument("--yml_path", type=str, required=True,
                        help="Path to the .yml config.")
    args = parser.parse_args()

    with open(args.yml_path, 'r') as stream:
        try:
            config = yaml.safe_load(stream)
        except yaml.YAMLError as exc:
            print(exc)

    configure_logging()
    main(config)
