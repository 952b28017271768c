"""Asymptotic variances, relative efficiency and influence functions.

Closed forms hold under the reference Weibull model; :func:`general_root_and_variance`
handles an arbitrary :class:`~wtcrobust.core.DistModel` by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DistModel, Gamma
from .errors import DegenerateError, DomainError, NoRootError
from .estimators import BRACKET_LIMITS, INITIAL_BRACKET, _brent, _expand_bracket
from .psi import (EstimatorConfig, clip_moments, lambda_model_star_prime,
                  lambda_model_tilde_prime, mu_star, mu_tilde)


@dataclass(frozen=True)
class VarianceReport:
    """``sigma_sq = prefactor * alpha0**2 / c0**2 * numerator / denominator**2``."""

    sigma_sq: float
    numerator: float
    denominator: float
    mu: float
    prefactor: float = 1.0


@dataclass(frozen=True)
class GeneralFReport:
    t0: float
    sigma_sq: float
    lambda_prime: float
    lambda_at_root: float
    second_moment: float
    p_tail: float


def _reference_moments(cfg: EstimatorConfig) -> tuple[float, float, float]:
    """(mu, variance numerator, efficiency denominator) at ``alpha = alpha0``."""
    c0 = cfg.c0
    if cfg.kind == "tilde":
        mu = mu_tilde(cfg)
        surv = lambda s: math.exp(-c0 * (s - 1.0))
        # alpha0-free form: lambda'(alpha0) = c0/alpha0 * denominator
        den = lambda_model_tilde_prime(1.0, 1.0, cfg) / c0
    else:
        mu = mu_star(cfg)
        surv = lambda s: math.exp(-c0 * s)
        den = lambda_model_star_prime(1.0, 1.0, cfg) / c0
    _, num = clip_moments(surv, cfg, mu=mu)
    return mu, num, den


def sigma_tilde_sq(alpha0: float, cfg: EstimatorConfig) -> VarianceReport:
    """Asymptotic variance of ``sqrt(n) (T~_n - alpha0)`` under ``F_W(c0, alpha0)``."""
    if cfg.kind != "tilde":
        raise DomainError("sigma_tilde_sq needs a tilde configuration")
    if not alpha0 > 0:
        raise DomainError("alpha0 must be positive")
    mu, num, den = _reference_moments(cfg)
    pref = math.exp(cfg.c0)
    sig = pref * alpha0**2 / cfg.c0**2 * num / den**2
    if not (math.isfinite(sig) and sig > 0):
        raise DegenerateError(f"variance is not positive and finite ({sig})")
    return VarianceReport(sig, num, den, mu, pref)


def sigma_star_sq(alpha0: float, cfg: EstimatorConfig) -> VarianceReport:
    """Asymptotic variance of ``sqrt(n) (T*_n - alpha0)`` under ``F_W(c0, alpha0)``."""
    if cfg.kind != "star":
        raise DomainError("sigma_star_sq needs a star configuration")
    if not alpha0 > 0:
        raise DomainError("alpha0 must be positive")
    mu, num, den = _reference_moments(cfg)
    sig = alpha0**2 / cfg.c0**2 * num / den**2
    if not (math.isfinite(sig) and sig > 0):
        raise DegenerateError(f"variance is not positive and finite ({sig})")
    return VarianceReport(sig, num, den, mu, 1.0)


def sigma_sq(alpha0: float, cfg: EstimatorConfig) -> VarianceReport:
    return sigma_tilde_sq(alpha0, cfg) if cfg.kind == "tilde" else sigma_star_sq(alpha0, cfg)


def aeff(cfg: EstimatorConfig, alpha0: float = 1.0) -> float:
    """Asymptotic efficiency relative to the truncated MLE (``v=-1, u=inf``)."""
    mle = EstimatorConfig.tilde(cfg.c0, -1.0, math.inf)
    return sigma_tilde_sq(alpha0, mle).sigma_sq / sigma_sq(alpha0, cfg).sigma_sq


# ---------------------------------------------------------------------------
# general F
# ---------------------------------------------------------------------------

def _data_survival(F: DistModel, cfg: EstimatorConfig):
    """Survival function of the truncated (tilde) or censored (star) law of ``F``.

    Returns the survival function, its breakpoints and ``P_F(X >= 1)`` (tilde)
    or 1 (star).
    """
    if cfg.kind == "tilde":
        p1 = float(F.sf(1.0))
        if not p1 > 0:
            raise DegenerateError("distribution puts no mass on [1, inf); truncated law undefined")
        return (lambda y: float(F.sf(y)) / p1 if y >= 1.0 else 1.0), (), p1
    x0 = cfg.model.x0
    return (lambda y: 1.0 if y < x0 else float(F.sf(y))), (x0,), 1.0


def lambda_general(t: float, F: DistModel, cfg: EstimatorConfig) -> float:
    """``E_F psi(X; t)`` over the truncated (tilde) or censored (star) law of ``F``."""
    if not t > 0:
        raise DomainError("t must be positive")
    surv, pts, _ = _data_survival(F, cfg)
    mu = mu_tilde(cfg) if cfg.kind == "tilde" else mu_star(cfg)
    mean, _ = clip_moments(surv, cfg, power=t, points=pts)
    return mean - mu


def general_root_and_variance(F: DistModel, cfg: EstimatorConfig,
                              fd_step: float = 1e-5) -> GeneralFReport:
    """Limit ``t0`` of the estimator under ``F`` and its asymptotic variance.

    The truncated estimator's variance carries the factor ``1 / P_F(X >= 1)``
    turning the per-``m`` variance into a per-``n`` one.
    """
    f = lambda t: lambda_general(t, F, cfg)
    if cfg.kind == "tilde":
        lo, hi, f_lo, f_hi = _expand_bracket(f, *INITIAL_BRACKET, *BRACKET_LIMITS)
    else:
        lo_limit = cfg.d0 if cfg.model.t0 > 1.0 else BRACKET_LIMITS[0]
        lo, hi, f_lo, f_hi = _expand_bracket(f, cfg.d0, cfg.d1, lo_limit, BRACKET_LIMITS[1])
    if f_lo > 0 or f_hi < 0:
        raise NoRootError("lambda_F has no sign change over the admissible range")
    t0 = _brent(f, lo, hi)[0] if f_lo < 0 < f_hi else (lo if f_lo == 0 else hi)
    step = fd_step * t0
    lam_prime = (f(t0 + step) - f(t0 - step)) / (2.0 * step)
    if abs(lam_prime) < 1e-10:
        raise DegenerateError("lambda_F is flat at its root")
    surv, pts, p_tail = _data_survival(F, cfg)
    mu = mu_tilde(cfg) if cfg.kind == "tilde" else mu_star(cfg)
    mean, second = clip_moments(surv, cfg, mu=mu, power=t0, points=pts)
    sig = second / lam_prime**2 / p_tail
    return GeneralFReport(t0, sig, lam_prime, mean - mu, second, p_tail)


# ---------------------------------------------------------------------------
# influence functions
# ---------------------------------------------------------------------------

def influence(cfg: EstimatorConfig, contaminant: DistModel, alpha0: float) -> float:
    """Influence of the contamination direction ``contaminant`` at ``F_W(c0, alpha0)``.

    For the truncated estimator the contaminant is conditioned on ``[1, inf)``;
    for the censored one its mass below ``x0`` moves to an atom at ``x0``.
    """
    if cfg.kind == "tilde":
        num = lambda_general(alpha0, contaminant, cfg)
        den = lambda_model_tilde_prime(alpha0, alpha0, cfg)
    else:
        num = lambda_general(alpha0, contaminant, cfg)
        den = lambda_model_star_prime(alpha0, alpha0, cfg)
    return -num / den


# ---------------------------------------------------------------------------
# curves for plotting
# ---------------------------------------------------------------------------

def aeff_curve(c0: float, v_grid, kind: str = "tilde", u: float = math.inf,
               d0: float = 1.0, d1: float = 2.0) -> list[tuple[float, float]]:
    out = []
    for v in np.asarray(v_grid, dtype=float):
        if kind == "tilde":
            cfg = EstimatorConfig.tilde(c0, float(v), u)
        else:
            cfg = EstimatorConfig.star(c0, d0, d1, float(v), u)
        out.append((float(v), aeff(cfg)))
    return out


def influence_curve(cfg: EstimatorConfig, alpha0: float, beta_grid,
                    gamma_rate: float = 2.0) -> list[tuple[float, float]]:
    """Influence of ``Gamma(rate, beta)`` contamination over a grid of shapes ``beta``."""
    return [(float(b), influence(cfg, Gamma(gamma_rate, float(b)), alpha0))
            for b in np.asarray(beta_grid, dtype=float)]
