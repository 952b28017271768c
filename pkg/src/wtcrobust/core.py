"""Base function ``h``, its argmin and inverses, and the distribution models.

The reference model is the Weibull law ``F_W(x) = 1 - exp(-c0 * x**alpha)``.
Its score in ``alpha`` is ``-h(x**alpha) / alpha`` with

    h(t) = (c0 * t - 1) * ln(t) - 1,   t > 0.

``h`` is strictly convex, so it decreases up to its stationary point and then
increases.  The estimators only ever use ``h`` on ``[t0, inf)`` where
``t0 = argmin_{t >= 1} h(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol

import numpy as np
from scipy import optimize, special

from .errors import DomainError

ROOT_XTOL = 1e-12
_MAX_DOUBLINGS = 60


# ---------------------------------------------------------------------------
# h and friends
# ---------------------------------------------------------------------------

def _check_c0(c0: float) -> None:
    if not (c0 > 0 and math.isfinite(c0)):
        raise DomainError(f"c0 must be a positive finite number, got {c0!r}")


def h_eval(t, c0: float):
    """Evaluate ``h(t) = (c0*t - 1)*ln(t) - 1`` (vectorised over ``t``)."""
    _check_c0(c0)
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("h is only defined for t > 0")
    with np.errstate(over="ignore", invalid="ignore"):
        out = (c0 * arr - 1.0) * np.log(arr) - 1.0
    return float(out) if out.ndim == 0 else out


def h_prime(t, c0: float):
    """First derivative ``c0*(ln t + 1) - 1/t``."""
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("h' is only defined for t > 0")
    out = c0 * (np.log(arr) + 1.0) - 1.0 / arr
    return float(out) if out.ndim == 0 else out


def h_second(t, c0: float):
    """Second derivative ``c0/t + 1/t**2`` (always positive)."""
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("h'' is only defined for t > 0")
    out = c0 / arr + 1.0 / arr**2
    return float(out) if out.ndim == 0 else out


def _h(t: float, c0: float) -> float:
    # scalar fast path for root finders
    return (c0 * t - 1.0) * math.log(t) - 1.0


def find_t0(c0: float) -> float:
    """Return ``argmin_{t >= 1} h(t)``.

    Since ``h'(1) = c0 - 1`` and ``h`` is convex, the minimiser is ``1`` for
    ``c0 >= 1`` and the unique stationary point in ``(1, inf)`` otherwise.
    """
    _check_c0(c0)
    if c0 >= 1.0:
        return 1.0

    def dh(t):
        return c0 * (math.log(t) + 1.0) - 1.0 / t

    hi = 2.0
    for _ in range(_MAX_DOUBLINGS):
        if dh(hi) > 0:
            break
        hi *= 2.0
    return optimize.brentq(dh, 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _increasing_root(y: float, c0: float, lo: float) -> float:
    """Unique ``t >= lo`` with ``h(t) = y``; ``h`` must be increasing on ``[lo, inf)``."""
    h_lo = _h(lo, c0)
    if y <= h_lo:
        return lo
    hi = max(lo, 2.0)
    for _ in range(_MAX_DOUBLINGS):
        if _h(hi, c0) >= y:
            break
        lo, hi = hi, hi * 2.0
    else:  # pragma: no cover - h grows like t*ln(t)
        raise DomainError(f"could not bracket h(t) = {y}")
    if _h(hi, c0) == y:
        return hi
    return optimize.brentq(lambda t: _h(t, c0) - y, lo, hi,
                           xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)


def increasing_branch_inverse(y: float, c0: float) -> float:
    """Inverse of ``h`` restricted to its increasing branch ``[t0, inf)``.

    Values below ``h(t0)`` map to ``t0``.
    """
    _check_c0(c0)
    return _increasing_root(float(y), c0, find_t0(c0))


def h_tilde_inverse(y: float, c0: float) -> float:
    """Generalised inverse ``inf{t >= 1 : h(t) >= y}`` for ``y >= -1``.

    For ``c0 < 1`` the function dips below ``-1`` on ``(1, t0)``, so ``y = -1``
    maps to ``1`` while any ``y > -1`` maps into the increasing branch.
    """
    _check_c0(c0)
    if not y >= -1.0:
        raise DomainError(f"h_tilde_inverse needs y >= -1, got {y!r}")
    if y == -1.0:
        return 1.0
    return _increasing_root(float(y), c0, find_t0(c0))


@dataclass(frozen=True)
class HuberizedModel:
    """Derived constants of the censored construction.

    ``x0 = t0**(1/d0)`` is the censoring point and ``v0 = h(x0**d1)`` the
    smallest admissible lower clip bound.
    """

    c0: float
    d0: float = 1.0
    d1: float = 1.0

    def __post_init__(self):
        _check_c0(self.c0)
        if not (0 < self.d0 <= self.d1 < math.inf):
            raise DomainError(f"need 0 < d0 <= d1 < inf, got d0={self.d0}, d1={self.d1}")

    @cached_property
    def t0(self) -> float:
        return find_t0(self.c0)

    @cached_property
    def x0(self) -> float:
        return self.t0 ** (1.0 / self.d0)

    @cached_property
    def v0(self) -> float:
        return _h(self.x0**self.d1, self.c0)

    @cached_property
    def h_t0(self) -> float:
        return _h(self.t0, self.c0)

    def h_star_inverse(self, y: float) -> float:
        return h_star_inverse(y, self)


def h_star_inverse(y: float, model: HuberizedModel) -> float:
    """Unique ``t >= t0`` with ``h(t) = y``; requires ``y >= h(t0)``."""
    if not y >= model.h_t0:
        raise DomainError(f"h_star_inverse needs y >= h(t0) = {model.h_t0}, got {y!r}")
    return _increasing_root(float(y), model.c0, model.t0)


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent PCG64 stream derived from ``(seed, *keys)``.

    The same key tuple always yields the same stream, whatever order streams
    are requested in.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------

class DistModel(Protocol):
    def cdf(self, x): ...
    def sf(self, x): ...
    def quantile(self, p): ...
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray: ...


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _as_scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("probabilities must lie in (0, 1)")
    return p


@dataclass(frozen=True)
class Weibull:
    """``F(x) = 1 - exp(-c0 * x**alpha)``, x > 0."""

    c0: float
    alpha: float

    def __post_init__(self):
        _positive("c0", self.c0)
        _positive("alpha", self.alpha)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        with np.errstate(over="ignore"):
            return _as_scalar(np.exp(-self.c0 * x**self.alpha))

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        with np.errstate(over="ignore"):
            return _as_scalar(-np.expm1(-self.c0 * x**self.alpha))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.where(x > 0, x, 1.0)
        out = self.c0 * self.alpha * xp ** (self.alpha - 1) * np.exp(-self.c0 * xp**self.alpha)
        return _as_scalar(np.where(x > 0, out, 0.0))

    def quantile(self, p):
        p = _check_p(p)
        return _as_scalar((-np.log1p(-p) / self.c0) ** (1.0 / self.alpha))

    def sample(self, rng, n):
        u = rng.random(n)
        return (-np.log1p(-u) / self.c0) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class TruncatedWeibull:
    """Weibull conditioned on ``X >= 1``: ``F(x) = 1 - exp(-c0 (x**alpha - 1))``."""

    c0: float
    alpha: float

    def __post_init__(self):
        _positive("c0", self.c0)
        _positive("alpha", self.alpha)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 1.0)
        with np.errstate(over="ignore"):
            return _as_scalar(np.exp(-self.c0 * (x**self.alpha - 1.0)))

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 1.0)
        with np.errstate(over="ignore"):
            return _as_scalar(-np.expm1(-self.c0 * (x**self.alpha - 1.0)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 1.0)
        out = self.c0 * self.alpha * xp ** (self.alpha - 1) * np.exp(-self.c0 * (xp**self.alpha - 1))
        return _as_scalar(np.where(x >= 1, out, 0.0))

    def quantile(self, p):
        p = _check_p(p)
        return _as_scalar((1.0 - np.log1p(-p) / self.c0) ** (1.0 / self.alpha))

    def sample(self, rng, n):
        u = rng.random(n)
        return (1.0 - np.log1p(-u) / self.c0) ** (1.0 / self.alpha)


@dataclass(frozen=True)
class CensoredWeibull:
    """Law of ``max(X, x0)`` for Weibull ``X``; an atom of mass ``F_W(x0)`` sits at ``x0``."""

    c0: float
    alpha: float
    x0: float

    def __post_init__(self):
        _positive("c0", self.c0)
        _positive("alpha", self.alpha)
        _positive("x0", self.x0)

    @property
    def base(self) -> Weibull:
        return Weibull(self.c0, self.alpha)

    @property
    def atom(self) -> float:
        return self.base.cdf(self.x0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _as_scalar(np.where(x < self.x0, 0.0, self.base.cdf(x)))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return _as_scalar(np.where(x < self.x0, 1.0, self.base.sf(x)))

    def quantile(self, p):
        p = _check_p(p)
        return _as_scalar(np.maximum(self.base.quantile(p), self.x0))

    def sample(self, rng, n):
        return np.maximum(self.base.sample(rng, n), self.x0)


@dataclass(frozen=True)
class Gamma:
    """Gamma law with density ``rate**shape / Gamma(shape) * x**(shape-1) * exp(-rate*x)``."""

    rate: float
    shape: float

    def __post_init__(self):
        _positive("rate", self.rate)
        _positive("shape", self.shape)

    @classmethod
    def from_scale(cls, scale: float, shape: float) -> "Gamma":
        _positive("scale", scale)
        return cls(1.0 / scale, shape)

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _as_scalar(special.gammainc(self.shape, self.rate * x))

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _as_scalar(special.gammaincc(self.shape, self.rate * x))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.where(x > 0, x, 1.0)
        logpdf = (self.shape * math.log(self.rate) - special.gammaln(self.shape)
                  + (self.shape - 1) * np.log(xp) - self.rate * xp)
        return _as_scalar(np.where(x > 0, np.exp(logpdf), 0.0))

    def quantile(self, p):
        p = _check_p(p)
        return _as_scalar(special.gammaincinv(self.shape, p) / self.rate)

    def sample(self, rng, n):
        return rng.gamma(self.shape, 1.0 / self.rate, size=n)


@dataclass(frozen=True)
class Mixture:
    """``(1 - weight) * base + weight * contaminant``."""

    weight: float
    base: DistModel
    contaminant: DistModel

    def __post_init__(self):
        if not (0.0 <= self.weight <= 1.0):
            raise DomainError(f"mixture weight must lie in [0, 1], got {self.weight!r}")

    def cdf(self, x):
        w = self.weight
        return _as_scalar((1 - w) * np.asarray(self.base.cdf(x)) + w * np.asarray(self.contaminant.cdf(x)))

    def sf(self, x):
        w = self.weight
        return _as_scalar((1 - w) * np.asarray(self.base.sf(x)) + w * np.asarray(self.contaminant.sf(x)))

    def pdf(self, x):
        w = self.weight
        return _as_scalar((1 - w) * np.asarray(self.base.pdf(x)) + w * np.asarray(self.contaminant.pdf(x)))

    def quantile(self, p):
        p = _check_p(p)

        def one(q):
            lo, hi = 0.0, 1.0
            while self.cdf(hi) < q:
                hi *= 2.0
            return optimize.brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-14, rtol=1e-15)

        out = np.vectorize(one, otypes=[float])(p)
        return _as_scalar(out)

    def sample(self, rng, n):
        pick = rng.random(n) < self.weight
        a = self.base.sample(rng, n)
        b = self.contaminant.sample(rng, n)
        return np.where(pick, b, a)


def contaminated_weibull(epsilon: float, c0: float, alpha: float,
                         gamma_rate: float, gamma_shape: float) -> Mixture:
    """Weibull ``F_W(c0, alpha)`` contaminated by a Gamma law at level ``epsilon``."""
    return Mixture(epsilon, Weibull(c0, alpha), Gamma(gamma_rate, gamma_shape))


def dist_cdf(model: DistModel, x):
    return model.cdf(x)


def dist_quantile(model: DistModel, p):
    return model.quantile(p)


def dist_sample(model: DistModel, rng: np.random.Generator, n: int) -> np.ndarray:
    return model.sample(rng, n)
