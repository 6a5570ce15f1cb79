import os

import sys
sys.path.append(".")

from mcrard.cli import RunManifest, configure_logging, prepare_training_data
from mcrard.experiments import BandwidthGrid, CvLayout, select_bandwidth, \
                               select_bandwidth_holdout, save_cv_table
from mcrard.io import load_dataset_csv
from mcrard.models import McrArdConfig
from mcrard.utils import file_digest, maybe_mkdir

def main(config):
    """
    Main code for selecting the MCR-ARD bandwidth on a training csv.

    Args:
        config (dict): dictionary read from a yaml file
            i.e. script_configs/cv.yml
    Returns:
        h (float): the selected bandwidth
    """
    io_params = config["io_params"]
    data = load_dataset_csv(io_params["input"], io_params["target_column"])
    train, _, _ = prepare_training_data(data, io_params.get("standardize", True))
    grid = BandwidthGrid(**config["bandwidth_params"]["grid"])
    cv = CvLayout(**config["bandwidth_params"]["cv"])
    mcr_cfg = McrArdConfig(**config.get("mcr_params", {}))
    holdout = config["bandwidth_params"].get("holdout")
    if holdout is not None:
        h, cv_table = select_bandwidth_holdout(train, grid, holdout, seed=cv.seed,
                                               cfg=mcr_cfg,
                                               selection_metric=cv.selection_metric)
    else:
        h, cv_table = select_bandwidth(train, grid, cv, mcr_cfg)
    print(f"Selected h: {h}")

    out_dir = maybe_mkdir(io_params["out_dir"])
    manifest = RunManifest(command="cv_yaml", config=config, master_seed=cv.seed,
                           input_digests={io_params["input"]:
                                          file_digest(io_params["input"])})
    manifest.outputs = [save_cv_table(cv_table, os.path.join(out_dir, "cv_table.csv"))]
    manifest.extra["selected_h"] = h
    manifest.save(out_dir)
    return h

if __name__ == "__main__":
    import yaml
    import argparse

    parser = argparse.ArgumentParser(description="For bandwidth selection.")
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
