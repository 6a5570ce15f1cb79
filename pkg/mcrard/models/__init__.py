from .base import FittedModel, a_step, prune, ridge_init, predict, predict_raw, \
                  model_to_dict, model_from_dict, save_model, load_model
from .lsr_ard import LsrArdConfig, fit_lsr_ard, gaussian_posterior, \
                     fit_least_squares, refit_top_sources
from .mcr_ard import McrArdConfig, fit_mcr_ard, w_step, negative_hessian, \
                     laplace_moments, psi_weights, correntropy_density, \
                     correntropy_log_density, correntropy_objective, \
                     correntropy_gradient, mcr_ard_iteration, weighted_gram
