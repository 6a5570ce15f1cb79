import os
import json
import hashlib
import logging

import numpy as np

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every float64 exactly
FLOAT_FORMAT = "%.17g"

def load_json(json_path):
    """
    Loads a json file as a dictionary.
    Returns:
        loaded_dict
    """
    with open(json_path, "r") as fp:
        loaded_dict = json.load(fp)
    return loaded_dict

def save_json(dict_to_save, json_path):
    """
    Saving dictionary, `dict_to_save`, to a .json at `json_path`
    """
    with open(json_path, "w") as fp:
        json.dump(to_builtin(dict_to_save), fp, indent=2, sort_keys=True)

def to_builtin(obj):
    """
    Recursively converts numpy scalars/arrays (and tuples) into plain python
    objects so they can be json serialized.
    """
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj

def file_digest(path, chunk_size=1 << 20):
    """
    sha256 content digest of a file, used in run manifests.
    """
    sha = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(chunk_size), b""):
            sha.update(chunk)
    return sha.hexdigest()

def maybe_mkdir(out_dir):
    """
    Creates `out_dir` (and parents) if it doesn't exist.
    """
    if out_dir and not os.path.isdir(out_dir):
        os.makedirs(out_dir)
        logger.info(f"Created {out_dir}")
    return out_dir
