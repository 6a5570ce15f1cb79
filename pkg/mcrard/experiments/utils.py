from concurrent.futures import ProcessPoolExecutor, as_completed
import os
import hashlib
import logging

from tqdm import tqdm

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "CORR_ARD_SEED"

def default_master_seed(fallback=0):
    """
    Master seed from `CORR_ARD_SEED` if set, else `fallback`.
    """
    value = os.environ.get(SEED_ENV_VAR)
    if value is None or value.strip() == "":
        return int(fallback)
    try:
        return int(value)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {value!r}.") from exc

def derive_seed(*parts):
    """
    Stable 32-bit seed from any sequence of ints/strings, e.g.
    derive_seed(master, rep, proportion_idx, scale_idx). Independent of
    PYTHONHASHSEED and of the order in which cells are executed.
    """
    key = ":".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "little")

def normalize_keys(config):
    """
    Maps `grid-lo` style keys to `grid_lo`.
    """
    return {str(k).replace("-", "_"): v for k, v in (config or {}).items()}

def merge_config(defaults, file_config=None, flag_config=None):
    """
    Resolves the effective config: flags > config file > defaults. Flags set
    to None count as "not given". Keys of the config file that no default
    knows about are ignored with a warning.

    Returns:
        dict
    """
    merged = dict(defaults)
    for key, value in normalize_keys(file_config).items():
        if key not in defaults:
            logger.warning(f"Ignoring unknown config key: {key}")
            continue
        merged[key] = value
    for key, value in normalize_keys(flag_config).items():
        if value is not None and key in defaults:
            merged[key] = value
    return merged

def run_tasks(fn, tasks, n_jobs=1, desc=None, disable=False):
    """
    Maps `fn` over `tasks` with a process pool when n_jobs > 1. Results come
    back in task order no matter which worker finished first.

    Args:
        fn (callable): module-level function (must be picklable)
        tasks (list): one argument per call
        n_jobs (int): worker count; <= 1 runs inline
        desc (str): progress bar label
        disable (bool): hides the progress bar
    Returns:
        list of results, aligned with `tasks`
    """
    tasks = list(tasks)
    if n_jobs is None or n_jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tqdm(tasks, desc=desc, disable=disable)]

    n_workers = min(n_jobs, len(tasks))
    logger.info(f"Using {n_workers} workers for {len(tasks)} tasks...")
    results = [None] * len(tasks)
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futures = {pool.submit(fn, task): i for i, task in enumerate(tasks)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc,
                           disable=disable):
            results[futures[future]] = future.result()
    return results
