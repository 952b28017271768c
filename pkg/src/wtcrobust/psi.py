"""Huberized psi-functions, their centring constants and the model-side lambdas.

Every centring constant, variance numerator and model lambda in this package
is an expectation of a clipped transform ``[h(W)]_v^u`` for some positive
random variable ``W`` living on the increasing branch of ``h``.  With
``z = h(s)`` these reduce to one-dimensional integrals in ``s``::

    E[h(W)]_v^u            = v + int_a^b P(W > s) h'(s) ds
    E([h(W)]_v^u - mu)^2   = (v - mu)^2 + 2 int_a^b (h(s) - mu) P(W > s) h'(s) ds

with ``a = h^{-1}(v)``, ``b = h^{-1}(u)`` taken on the increasing branch.
:func:`clip_moments` evaluates both.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .core import HuberizedModel, h_eval, h_prime, h_tilde_inverse, increasing_branch_inverse
from .errors import ConfigError, DomainError, IntegrationError

INF = math.inf
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-11
TAIL_EPS = 1e-18
_MAX_UPPER = 1e12


@dataclass(frozen=True)
class ClipBounds:
    """``clip(y) = min(max(y, v), u)``."""

    v: float
    u: float = INF

    def __call__(self, y):
        out = np.minimum(np.maximum(np.asarray(y, dtype=float), self.v), self.u)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning constants of one huberized estimator.

    ``kind="tilde"`` works on the sample truncated at 1, ``kind="star"`` on the
    sample censored at ``x0 = t0**(1/d0)``.  ``u`` may be ``math.inf``.
    """

    c0: float
    v: float = 0.0
    u: float = INF
    kind: str = "tilde"
    d0: float | None = None
    d1: float | None = None

    def __post_init__(self):
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ConfigError(f"c0 must be positive, got {self.c0!r}")
        if math.isnan(self.v) or math.isnan(self.u):
            raise ConfigError("clip bounds must not be NaN")
        if not self.v < self.u:
            raise ConfigError(f"need v < u, got v={self.v}, u={self.u}")
        if self.kind == "tilde":
            if self.v < -1.0:
                raise ConfigError(f"tilde estimator needs v >= -1, got {self.v}")
        elif self.kind == "star":
            if self.d0 is None or self.d1 is None:
                raise ConfigError("star estimator needs d0 and d1")
            if not (0 < self.d0 <= self.d1 < INF):
                raise ConfigError(f"need 0 < d0 <= d1, got d0={self.d0}, d1={self.d1}")
            if self.v < self.model.v0:
                raise ConfigError(f"star estimator needs v >= v0 = {self.model.v0:.12g}, got {self.v}")
        else:
            raise ConfigError(f"kind must be 'tilde' or 'star', got {self.kind!r}")

    @classmethod
    def tilde(cls, c0: float = 1.0, v: float = 0.0, u: float = INF) -> "EstimatorConfig":
        return cls(c0=c0, v=v, u=u, kind="tilde")

    @classmethod
    def star(cls, c0: float = 1.0, d0: float = 1.0, d1: float = 2.0,
             v: float = 0.0, u: float = INF) -> "EstimatorConfig":
        return cls(c0=c0, v=v, u=u, kind="star", d0=d0, d1=d1)

    @cached_property
    def model(self) -> HuberizedModel:
        if self.kind == "star":
            return HuberizedModel(self.c0, self.d0, self.d1)
        return HuberizedModel(self.c0)

    @property
    def clip(self) -> ClipBounds:
        return ClipBounds(self.v, self.u)

    @cached_property
    def s_bounds(self) -> tuple[float, float]:
        """Integration limits ``(h^{-1}(v), h^{-1}(u))`` on the increasing branch."""
        a = increasing_branch_inverse(self.v, self.c0)
        b = INF if math.isinf(self.u) else increasing_branch_inverse(self.u, self.c0)
        return a, b

    def with_bounds(self, v: float, u: float = INF) -> "EstimatorConfig":
        return EstimatorConfig(self.c0, v, u, self.kind, self.d0, self.d1)


# ---------------------------------------------------------------------------
# integration core
# ---------------------------------------------------------------------------

def _quad(f, a, b, points=()):
    pts = [p for p in points if a < p < b]
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _err = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                       limit=500, points=pts or None)
        except integrate.IntegrationWarning:
            # roundoff-limited panels still give a usable value; retry loosely
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, a, b, epsabs=1e-11, epsrel=1e-9,
                                      limit=1000, points=pts or None)
            if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
                raise IntegrationError(f"quadrature failed on [{a}, {b}] (err {err:.3g})")
    if not math.isfinite(val):
        raise IntegrationError(f"integral over [{a}, {b}] is not finite")
    return val


def tail_cutoff(surv: Callable[[float], float], start: float) -> float:
    """Smallest doubling of ``start`` beyond which ``surv`` is below ``TAIL_EPS``."""
    s = max(start, 2.0)
    while surv(s) > TAIL_EPS:
        s *= 2.0
        if s > _MAX_UPPER:
            raise IntegrationError("survival function does not vanish; integral diverges")
    return s


def clip_moments(surv: Callable[[float], float], cfg: EstimatorConfig,
                 mu: float | None = None, power: float = 1.0,
                 points=()) -> tuple[float, float | None]:
    """Mean of ``[h(Y**power)]_v^u`` and, if ``mu`` is given, ``E([h(Y**power)]_v^u - mu)**2``.

    ``surv(y) = P(Y > y)``.  Substituting ``s = y**power`` in the
    layer-cake integrals keeps the upper cut-off on the scale of ``Y``, where
    the tail of ``surv`` is known.  ``Y**power`` must put all of its mass
    below ``h^{-1}(v)`` in a region where ``h <= v`` (true for the truncated
    and censored constructions).
    """
    c0, v = cfg.c0, cfg.v
    a, b = cfg.s_bounds
    p = float(power)
    ya = a ** (1.0 / p)
    yb = tail_cutoff(surv, ya) if math.isinf(b) else b ** (1.0 / p)
    if yb <= ya:
        return v, (None if mu is None else (v - mu) ** 2)

    def jac_dh(y):
        # h'(y**p) * d(y**p)/dy
        s = y**p
        return (c0 * (p * math.log(y) + 1.0) - 1.0 / s) * p * s / y

    def f_mean(y):
        w = surv(y)
        return 0.0 if w == 0.0 else w * jac_dh(y)

    mean = v + _quad(f_mean, ya, yb, points)
    if mu is None:
        return mean, None

    def f_var(y):
        w = surv(y)
        if w == 0.0:
            return 0.0
        s = y**p
        return ((c0 * s - 1.0) * p * math.log(y) - 1.0 - mu) * w * jac_dh(y)

    second = (v - mu) ** 2 + 2.0 * _quad(f_var, ya, yb, points)
    return mean, second


# ---------------------------------------------------------------------------
# centring constants
# ---------------------------------------------------------------------------

def _require(cfg: EstimatorConfig, kind: str):
    if cfg.kind != kind:
        raise ConfigError(f"expected a {kind!r} configuration, got {cfg.kind!r}")


@lru_cache(maxsize=256)
def mu_tilde(cfg: EstimatorConfig) -> float:
    """Centring constant of the truncated psi-function.

    Under the reference model ``X**alpha`` given ``X >= 1`` is ``1 + Exp(c0)``
    whatever ``alpha`` is, so the constant does not depend on ``alpha``.
    """
    _require(cfg, "tilde")
    c0 = cfg.c0
    return clip_moments(lambda s: math.exp(-c0 * (s - 1.0)), cfg)[0]


@lru_cache(maxsize=256)
def mu_star(cfg: EstimatorConfig) -> float:
    """Centring constant of the censored psi-function."""
    _require(cfg, "star")
    c0 = cfg.c0
    return clip_moments(lambda s: math.exp(-c0 * s), cfg)[0]


def mu_tilde_z(cfg: EstimatorConfig) -> float:
    """``v + int_v^u exp(-c0 (h~^{-1}(z) - 1)) dz`` integrated literally in ``z``.

    Slow (one root-find per node); kept as an independent cross-check of
    :func:`mu_tilde`.
    """
    _require(cfg, "tilde")
    c0, v, u = cfg.c0, cfg.v, cfg.u
    if math.isinf(u):
        u = h_eval(1.0 + 40.0 / c0, c0)
    f = lambda z: math.exp(-c0 * (h_tilde_inverse(z, c0) - 1.0))
    return v + _quad(f, v, u)


def mu_star_z(cfg: EstimatorConfig) -> float:
    """z-domain counterpart of :func:`mu_star`."""
    _require(cfg, "star")
    c0, v, u = cfg.c0, cfg.v, cfg.u
    if math.isinf(u):
        u = h_eval(40.0 / c0 + 2.0, c0)
    model = cfg.model
    f = lambda z: math.exp(-c0 * model.h_star_inverse(z))
    return v + _quad(f, v, u)


# ---------------------------------------------------------------------------
# psi-functions
# ---------------------------------------------------------------------------

def _clipped_h(y, alpha, cfg):
    with np.errstate(over="ignore"):
        t = np.asarray(y, dtype=float) ** alpha
    return cfg.clip(h_eval(t, cfg.c0))


def psi_tilde(y, alpha: float, cfg: EstimatorConfig):
    """``[h(y**alpha)]_v^u - mu_tilde`` for observations ``y >= 1``."""
    _require(cfg, "tilde")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if np.any(~(np.asarray(y, dtype=float) >= 1.0)):
        raise DomainError("psi_tilde needs y >= 1; truncate the sample first")
    return _clipped_h(y, alpha, cfg) - mu_tilde(cfg)


def psi_star(y, alpha: float, cfg: EstimatorConfig):
    """``[h*(y**alpha)]_v^u - mu_star`` for observations ``y >= x0`` and ``d0 <= alpha <= d1``."""
    _require(cfg, "star")
    if not (cfg.d0 <= alpha <= cfg.d1):
        raise DomainError(f"psi_star needs d0 <= alpha <= d1, got alpha={alpha!r}")
    if np.any(~(np.asarray(y, dtype=float) >= cfg.model.x0)):
        raise DomainError(f"psi_star needs y >= x0 = {cfg.model.x0:.12g}; censor the sample first")
    return _clipped_h(y, alpha, cfg) - mu_star(cfg)


# ---------------------------------------------------------------------------
# model lambdas (reference Weibull with true coefficient alpha0)
# ---------------------------------------------------------------------------

def _check_alphas(alpha, alpha0):
    if not (alpha > 0 and alpha0 > 0):
        raise DomainError("alpha and alpha0 must be positive")


def lambda_model_tilde(alpha: float, alpha0: float, cfg: EstimatorConfig) -> float:
    """Expected truncated psi at ``alpha`` when the data follow ``F_W(c0, alpha0)``."""
    _require(cfg, "tilde")
    _check_alphas(alpha, alpha0)
    # X**alpha0 given X >= 1 is 1 + Exp(c0); evaluate h at its power alpha/alpha0
    c0 = cfg.c0
    mean, _ = clip_moments(lambda y: math.exp(-c0 * (y - 1.0)), cfg, power=alpha / alpha0)
    return mean - mu_tilde(cfg)


def lambda_model_tilde_prime(alpha: float, alpha0: float, cfg: EstimatorConfig) -> float:
    """Closed-form derivative of :func:`lambda_model_tilde` in ``alpha``."""
    _require(cfg, "tilde")
    _check_alphas(alpha, alpha0)
    c0, r = cfg.c0, alpha0 / alpha
    a, b = cfg.s_bounds
    weight = lambda s: math.exp(-c0 * (s**r - 1.0))
    if math.isinf(b):
        b = tail_cutoff(weight, a)
    f = lambda s: s**r * math.log(s) * weight(s) * h_prime(s, c0)
    return c0 * alpha0 / alpha**2 * _quad(f, a, b)


def lambda_model_star(alpha: float, alpha0: float, cfg: EstimatorConfig) -> float:
    """Expected censored psi at ``alpha`` when the data follow ``F_W(c0, alpha0)``."""
    _require(cfg, "star")
    _check_alphas(alpha, alpha0)
    # max(X, x0)**alpha0 is Exp(c0) floored at x0**alpha0
    c0 = cfg.c0
    floor = cfg.model.x0**alpha0
    surv = lambda y: 1.0 if y < floor else math.exp(-c0 * y)
    mean, _ = clip_moments(surv, cfg, power=alpha / alpha0, points=(floor,))
    return mean - mu_star(cfg)


def lambda_model_star_prime(alpha: float, alpha0: float, cfg: EstimatorConfig) -> float:
    """Closed-form derivative of :func:`lambda_model_star` (valid for ``alpha <= d1``)."""
    _require(cfg, "star")
    _check_alphas(alpha, alpha0)
    c0, r = cfg.c0, alpha0 / alpha
    a, b = cfg.s_bounds
    weight = lambda s: math.exp(-c0 * s**r)
    if math.isinf(b):
        b = tail_cutoff(weight, a)
    f = lambda s: s**r * math.log(s) * weight(s) * h_prime(s, c0)
    return c0 * alpha0 / alpha**2 * _quad(f, a, b)
