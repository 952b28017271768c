"""Robust huberized M-estimation of the Weibull tail coefficient."""

from .asymptotics import (GeneralFReport, VarianceReport, aeff, aeff_curve,
                          general_root_and_variance, influence, influence_curve,
                          lambda_general, sigma_sq, sigma_star_sq, sigma_tilde_sq)
from .core import (CensoredWeibull, Gamma, HuberizedModel, Mixture, TruncatedWeibull, Weibull,
                   contaminated_weibull, dist_cdf, dist_quantile, dist_sample, find_t0,
                   h_eval, h_prime, h_second, h_star_inverse, h_tilde_inverse, substream)
from .errors import (ConfigError, DataError, DegenerateError, DomainError, InsufficientDataError,
                     IntegrationError, NoRootError, StudyError, WTCError)
from .estimators import (EstimateResult, SampleSummary, estimate_star, estimate_tilde,
                         hill_curve, hill_estimate, mle_truncated, mle_weibull_fit,
                         mle_weibull_interval, mle_weibull_shape, select_k_bootstrap,
                         select_k_mle)
from .psi import EstimatorConfig, mu_star, mu_tilde, psi_star, psi_tilde

__version__ = "0.1.0"

__all__ = [
    "CensoredWeibull", "ConfigError", "DataError", "DegenerateError", "DomainError",
    "EstimateResult", "EstimatorConfig", "Gamma", "GeneralFReport", "HuberizedModel",
    "InsufficientDataError", "IntegrationError", "Mixture", "NoRootError", "SampleSummary",
    "StudyError", "TruncatedWeibull", "VarianceReport", "WTCError", "Weibull", "aeff",
    "aeff_curve", "contaminated_weibull", "dist_cdf", "dist_quantile", "dist_sample",
    "estimate_star", "estimate_tilde", "find_t0", "general_root_and_variance", "h_eval",
    "h_prime", "h_second", "h_star_inverse", "h_tilde_inverse", "hill_curve", "hill_estimate",
    "influence", "influence_curve", "lambda_general", "mle_truncated", "mle_weibull_fit",
    "mle_weibull_interval", "mle_weibull_shape", "mu_star", "mu_tilde", "psi_star",
    "psi_tilde", "select_k_bootstrap", "select_k_mle", "sigma_sq", "sigma_star_sq",
    "sigma_tilde_sq", "substream", "__version__",
]
