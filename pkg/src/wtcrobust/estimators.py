"""Point estimators of the Weibull tail coefficient.

* :func:`estimate_tilde` / :func:`estimate_star` -- the huberized M-estimators,
  roots of a monotone empirical lambda.
* :func:`mle_weibull_shape` -- two-parameter Weibull maximum likelihood shape.
* :func:`hill_estimate` and the two data-driven ``k`` selectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .core import substream
from .errors import (ConfigError, DegenerateError, DomainError,
                     InsufficientDataError, NoRootError)
from .psi import EstimatorConfig, mu_star, mu_tilde

ROOT_XTOL = 1e-12
INITIAL_BRACKET = (0.05, 20.0)
BRACKET_LIMITS = (1e-4, 1e4)
MAX_ROOT_ITER = 200


@dataclass(frozen=True, eq=False)
class SampleSummary:
    """A sample of positive reals with its truncated and censored views."""

    raw: np.ndarray
    sorted: np.ndarray = field(repr=False)

    @classmethod
    def from_values(cls, values) -> "SampleSummary":
        raw = np.array(values, dtype=float).ravel()
        if raw.size == 0:
            raise InsufficientDataError("empty sample")
        if not np.all(np.isfinite(raw)):
            raise DomainError("sample contains non-finite values")
        if np.any(raw <= 0):
            raise DomainError("sample values must be strictly positive")
        raw.setflags(write=False)
        srt = np.sort(raw)
        srt.setflags(write=False)
        return cls(raw, srt)

    @property
    def n(self) -> int:
        return int(self.raw.size)

    # views are taken from the sorted copy so results do not depend on input order
    @property
    def truncated(self) -> np.ndarray:
        return self.sorted[np.searchsorted(self.sorted, 1.0):]

    @property
    def m(self) -> int:
        return int(self.n - np.searchsorted(self.sorted, 1.0))

    def censored(self, x0: float) -> np.ndarray:
        return np.maximum(self.sorted, x0)


def _as_sample(sample) -> SampleSummary:
    return sample if isinstance(sample, SampleSummary) else SampleSummary.from_values(sample)


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    iterations: int
    bracket: tuple[float, float]
    m_used: int
    converged: bool
    clamped: bool = False
    standard_error: float | None = None

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "iterations": self.iterations,
            "bracket": list(self.bracket),
            "m_used": self.m_used,
            "converged": self.converged,
            "clamped": self.clamped,
            "standard_error": self.standard_error,
        }


# ---------------------------------------------------------------------------
# empirical lambdas
# ---------------------------------------------------------------------------

def _clipped_sum(log_y: np.ndarray, t: float, cfg: EstimatorConfig) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.exp(t * log_y)
        # h(y**t) with ln(y**t) taken as t*ln(y), which keeps power transforms exact
        hv = (cfg.c0 * w - 1.0) * (t * log_y) - 1.0
    return float(np.sum(np.minimum(np.maximum(hv, cfg.v), cfg.u)))


def empirical_lambda_tilde(sample, t: float, cfg: EstimatorConfig) -> float:
    """``sum_j psi_tilde(X_j; t)`` over the observations ``X_j >= 1``."""
    s = _as_sample(sample)
    log_y = np.log(s.truncated)
    return _clipped_sum(log_y, t, cfg) - log_y.size * mu_tilde(cfg)


def empirical_lambda_star(sample, t: float, cfg: EstimatorConfig) -> float:
    """``sum_i psi_star(max(X_i, x0); t)`` over the whole sample."""
    s = _as_sample(sample)
    log_y = np.log(s.censored(cfg.model.x0))
    return _clipped_sum(log_y, t, cfg) - log_y.size * mu_star(cfg)


def _brent(f, lo, hi):
    root, info = optimize.brentq(f, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps,
                                 maxiter=MAX_ROOT_ITER, full_output=True, disp=False)
    return root, info.iterations, info.converged


def _expand_bracket(f, lo, hi, lo_limit, hi_limit):
    f_lo, f_hi = f(lo), f(hi)
    while f_lo > 0 and lo > lo_limit:
        lo = max(lo / 2.0, lo_limit)
        f_lo = f(lo)
    while f_hi < 0 and hi < hi_limit:
        hi = min(hi * 2.0, hi_limit)
        f_hi = f(hi)
    return lo, hi, f_lo, f_hi


def estimate_tilde(sample, cfg: EstimatorConfig) -> EstimateResult:
    """Huberized M-estimate from the observations at or above 1."""
    if cfg.kind != "tilde":
        raise ConfigError("estimate_tilde needs a tilde configuration")
    s = _as_sample(sample)
    if s.m < 2:
        raise InsufficientDataError(f"need at least 2 observations >= 1, got m={s.m}")
    log_y = np.log(s.truncated)
    target = log_y.size * mu_tilde(cfg)
    f = lambda t: _clipped_sum(log_y, t, cfg) - target

    lo, hi, f_lo, f_hi = _expand_bracket(f, *INITIAL_BRACKET, *BRACKET_LIMITS)
    if f_lo > 0:
        raise NoRootError("empirical lambda is positive over the whole bracket: "
                          "observations saturate the upper clip bound even for tiny t")
    if f_hi < 0:
        raise NoRootError("empirical lambda stays negative over the whole bracket: "
                          "observations saturate the lower clip bound (or sit at 1)")
    if f_lo == 0:
        return EstimateResult(lo, 0, (lo, hi), s.m, True)
    if f_hi == 0:
        return EstimateResult(hi, 0, (lo, hi), s.m, True)
    root, it, conv = _brent(f, lo, hi)
    return EstimateResult(root, it, (lo, hi), s.m, conv)


def estimate_star(sample, cfg: EstimatorConfig, clamp: bool = True) -> EstimateResult:
    """Huberized M-estimate from the sample censored at ``x0``.

    The root is searched on ``[d0, d1]``.  Without a sign change there, the
    boundary with the smaller ``|lambda|`` is returned and ``clamped`` is set.
    A sample lying entirely at or below ``x0`` has no information and raises
    :class:`NoRootError`.
    With ``clamp=False`` the search is widened to the range on which the
    censored psi-function stays defined (``t >= d0`` whenever ``t0 > 1``).
    """
    if cfg.kind != "star":
        raise ConfigError("estimate_star needs a star configuration")
    s = _as_sample(sample)
    if s.n < 2:
        raise InsufficientDataError(f"need at least 2 observations, got n={s.n}")
    model = cfg.model
    log_y = np.log(s.censored(model.x0))
    target = log_y.size * mu_star(cfg)
    f = lambda t: _clipped_sum(log_y, t, cfg) - target

    lo, hi = cfg.d0, cfg.d1
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == f_hi != 0 and s.sorted[-1] <= model.x0:
        raise NoRootError("every observation is censored at x0; empirical lambda is constant")
    if not clamp and (f_lo > 0 or f_hi < 0):
        lo_limit = cfg.d0 if model.t0 > 1.0 else BRACKET_LIMITS[0]
        lo, hi, f_lo, f_hi = _expand_bracket(f, lo, hi, lo_limit, BRACKET_LIMITS[1])
        if f_lo > 0 or f_hi < 0:
            raise NoRootError("empirical lambda has no sign change over the admissible range")
    if f_lo > 0 or f_hi < 0:
        # lambda is nondecreasing, so the sign picks the boundary with smaller |lambda|
        # and still decides when lambda is flat because every value saturates a clip bound
        side = hi if f_hi < 0 else lo
        return EstimateResult(side, 0, (lo, hi), s.n, False, clamped=True)
    if f_lo == 0:
        return EstimateResult(lo, 0, (lo, hi), s.n, True)
    if f_hi == 0:
        return EstimateResult(hi, 0, (lo, hi), s.n, True)
    root, it, conv = _brent(f, lo, hi)
    return EstimateResult(root, it, (lo, hi), s.n, conv)


# ---------------------------------------------------------------------------
# maximum likelihood
# ---------------------------------------------------------------------------

def _profile_parts(log_x: np.ndarray, alpha: float):
    # weights rescaled by max(x)**alpha; the ratios are scale free
    w = np.exp(alpha * (log_x - log_x.max()))
    sw = w.sum()
    m1 = float(np.dot(w, log_x) / sw)
    m2 = float(np.dot(w, log_x**2) / sw)
    return m1, m2


def weibull_profile_residual(sample, alpha: float) -> float:
    """``sum x^a ln x / sum x^a - 1/a - mean(ln x)``; zero at the shape MLE."""
    log_x = np.log(_as_sample(sample).sorted)
    m1, _ = _profile_parts(log_x, alpha)
    return m1 - 1.0 / alpha - float(log_x.mean())


def mle_weibull_shape(sample, tol: float = 1e-12, maxiter: int = 200) -> float:
    """Two-parameter Weibull MLE of the shape, by bracketed (safeguarded) Newton."""
    s = _as_sample(sample)
    if s.n < 2:
        raise InsufficientDataError("need at least 2 observations")
    log_x = np.log(s.sorted)
    mean_log = float(log_x.mean())
    spread = float(log_x.std())
    if spread <= 1e-12 * max(1.0, abs(mean_log)):
        raise DegenerateError("all observations are (numerically) equal; shape MLE undefined")

    def g(a):
        m1, m2 = _profile_parts(log_x, a)
        return m1 - 1.0 / a - mean_log, (m2 - m1 * m1) + 1.0 / a**2

    # g increases from -inf (a -> 0) to max(ln x) - mean(ln x) > 0
    a = math.pi / (math.sqrt(6.0) * spread)
    lo, hi = a, a
    while g(lo)[0] > 0:
        lo /= 2.0
    while g(hi)[0] < 0:
        hi *= 2.0
        if hi > 1e8:
            raise DegenerateError("shape MLE diverges")
    for _ in range(maxiter):
        val, der = g(a)
        if abs(val) <= tol:
            return a
        if val < 0:
            lo = a
        else:
            hi = a
        step = a - val / der
        a = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return a
    raise DegenerateError("shape MLE did not converge")


def mle_weibull_fit(sample) -> tuple[float, float, float]:
    """Shape MLE, rate MLE (``F = 1 - exp(-rate x^shape)``) and the shape's standard error.

    The standard error comes from the inverse observed information of the
    two-parameter log-likelihood.
    """
    s = _as_sample(sample)
    k = mle_weibull_shape(s)
    x, lx, n = s.sorted, np.log(s.sorted), s.n
    xk = x**k
    c = n / xk.sum()
    i_kk = n / k**2 + c * float(np.sum(xk * lx**2))
    i_kc = float(np.sum(xk * lx))
    i_cc = n / c**2
    det = i_kk * i_cc - i_kc**2
    if det <= 0:
        raise DegenerateError("observed information is singular")
    return k, c, math.sqrt(i_cc / det)


def mle_weibull_interval(sample, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wald interval ``shape +- z * se`` for the Weibull shape."""
    k, _, se = mle_weibull_fit(sample)
    return k - z * se, k + z * se


def mle_truncated(sample, c0: float) -> EstimateResult:
    """Known-``c0`` MLE on the truncated sample (the ``v=-1, u=inf`` M-estimate)."""
    return estimate_tilde(sample, EstimatorConfig.tilde(c0, -1.0, math.inf))


# ---------------------------------------------------------------------------
# Hill-type estimator
# ---------------------------------------------------------------------------

def hill_curve(sample) -> np.ndarray:
    """Hill-type estimates for every ``k = 1..n-1`` (entry ``k-1``).

    Entries whose denominator vanishes (tied top order statistics) are NaN.
    """
    s = _as_sample(sample)
    n = s.n
    if n < 2:
        raise InsufficientDataError("Hill estimator needs n >= 2")
    log_desc = np.log(s.sorted[::-1])
    k = np.arange(1, n)
    loglog = np.log(np.log((n + 1) / np.arange(1, n + 1)))
    num = np.cumsum(loglog[:-1]) / k - np.log(np.log((n + 1) / (k + 1)))
    den = np.cumsum(log_desc[:-1]) / k - log_desc[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out[den <= 0] = np.nan
    return out


def hill_estimate(sample, k: int) -> float:
    """Hill-type Weibull tail estimate from the top ``k + 1`` order statistics."""
    s = _as_sample(sample)
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= s.n - 1):
        raise DomainError(f"k must be an integer in [1, n-1] = [1, {s.n - 1}], got {k!r}")
    n = s.n
    top = np.log(s.sorted[::-1][: k + 1])
    den = top[:k].mean() - top[k]
    if den <= 0:
        raise DegenerateError(f"top {k + 1} order statistics are equal; Hill denominator is zero")
    j = np.arange(1, k + 1)
    num = np.mean(np.log(np.log((n + 1) / j))) - math.log(math.log((n + 1) / (k + 1)))
    return float(num / den)


def _argmin_k(objective: np.ndarray) -> int:
    if np.all(np.isnan(objective)):
        raise DegenerateError("no admissible k: every Hill estimate is degenerate")
    return int(np.nanargmin(objective)) + 1


def bootstrap_k_objective(sample, B: int = 100, seed: int = 0) -> np.ndarray:
    """``|hill(k) - mean_b hill_b(k)|`` for ``k = 1..n-1`` over ``B`` bootstrap resamples."""
    s = _as_sample(sample)
    if B < 1:
        raise DomainError("B must be positive")
    base = hill_curve(s)
    boot = np.empty((B, base.size))
    for b in range(B):
        rng = substream(seed, b)
        boot[b] = hill_curve(SampleSummary.from_values(rng.choice(s.sorted, size=s.n, replace=True)))
    valid = ~np.isnan(boot)
    counts = valid.sum(axis=0)
    sums = np.where(valid, boot, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        boot_mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return np.abs(base - boot_mean)


def select_k_bootstrap(sample, B: int = 100, seed: int = 0) -> int:
    """``k`` minimising the gap between the Hill estimate and its bootstrap mean."""
    s = _as_sample(sample)
    if s.n < 10:
        raise InsufficientDataError("bootstrap k selection needs n >= 10")
    return _argmin_k(bootstrap_k_objective(s, B, seed))


def mle_k_objective(sample) -> np.ndarray:
    s = _as_sample(sample)
    return np.abs(hill_curve(s) - mle_weibull_shape(s))


def select_k_mle(sample) -> int:
    """``k`` whose Hill estimate is closest to the Weibull shape MLE."""
    return _argmin_k(mle_k_objective(sample))
