from .dataset import Dataset, load_dataset_csv, save_dataset_csv, read_numeric_csv
from .preprocess import StandardizationParams, standardize, apply_standardization, \
                        destandardize_weights, append_intercept, \
                        normalize_target_01, denormalize_target_01
from .lagged import LagSpec, build_lagged_design, lagged_feature_names, \
                    load_time_series_csv
