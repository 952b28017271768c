"""Monte Carlo comparison of the huberized estimators with the MLE and Hill.

Each replicate draws a sample from a Gamma-contaminated Weibull, then
computes the Weibull MLE, both M-estimators and the whole Hill curve.
Replicate ``r`` at sample size ``n`` uses ``substream(master_seed, n, r)``,
so results do not depend on how replicates are scheduled.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .core import contaminated_weibull, substream
from .errors import ConfigError, StudyError, WTCError
from .estimators import (SampleSummary, estimate_star, estimate_tilde, hill_curve,
                         mle_truncated, mle_weibull_shape)
from .psi import EstimatorConfig

DEFAULT_N_GRID = (30, 50, 80, 100)
MLE_KINDS = ("weibull", "truncated")


@dataclass(frozen=True)
class StudyConfig:
    """One row block of the study: a contamination model and a grid of sample sizes.

    ``gamma_rate`` is the rate of the Gamma contaminant (density
    ``rate**shape x**(shape-1) exp(-rate x) / Gamma(shape)``).
    ``mle="truncated"`` replaces the two-parameter Weibull MLE by the
    known-``c0`` MLE on the truncated sample.
    """

    epsilon: float
    c0: float
    alpha: float
    gamma_rate: float = 2.0
    gamma_shape: float = 0.5
    d0: float = 1.0
    d1: float = 2.0
    v: float = 0.0
    u: float = math.inf
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    replicates: int = 1000
    master_seed: int = 20160901
    max_failure_rate: float = 0.05
    mle: str = "weibull"

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        for name in ("c0", "alpha", "gamma_rate", "gamma_shape", "d0", "d1"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ConfigError(f"{name} must be positive and finite, got {val!r}")
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if min(self.n_grid) < 3:
            raise ConfigError("every sample size must be at least 3")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if not 0.0 <= self.max_failure_rate <= 1.0:
            raise ConfigError("max_failure_rate must lie in [0, 1]")
        if self.mle not in MLE_KINDS:
            raise ConfigError(f"mle must be one of {MLE_KINDS}, got {self.mle!r}")
        # validates v, u, d0, d1 eagerly
        self.tilde_config, self.star_config

    @property
    def model(self):
        return contaminated_weibull(self.epsilon, self.c0, self.alpha,
                                    self.gamma_rate, self.gamma_shape)

    @property
    def tilde_config(self) -> EstimatorConfig:
        return EstimatorConfig.tilde(self.c0, self.v, self.u)

    @property
    def star_config(self) -> EstimatorConfig:
        return EstimatorConfig.star(self.c0, self.d0, self.d1, self.v, self.u)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        return d


@dataclass(frozen=True)
class StudyRow:
    epsilon: float
    c0: float
    alpha: float
    n: int
    mean_mle: float
    mean_hill: float
    mean_tilde: float
    mean_star: float
    var_mle: float
    var_hill: float
    var_tilde: float
    var_star: float
    r_hat: float
    r_tilde: float
    r_star: float
    p_hill: float
    k_opt: int
    used: int
    failures: int
    clamped: int
    failure_reasons: dict = field(default_factory=dict, compare=False)

    CSV_FIELDS = ("epsilon", "c0", "alpha", "n", "mean_mle", "mean_hill", "mean_tilde",
                  "mean_star", "var_mle", "var_hill", "var_tilde", "var_star",
                  "r_hat", "r_tilde", "r_star", "p_hill", "k_opt", "used", "failures", "clamped")


@dataclass(frozen=True)
class ReplicateBatch:
    """Per-replicate estimates at one sample size, failed replicates removed."""

    n: int
    mle: np.ndarray
    tilde: np.ndarray
    star: np.ndarray
    hill: np.ndarray          # shape (used, n - 1)
    clamped: int
    failures: dict


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def mse(estimates, alpha: float) -> float:
    e = np.asarray(estimates, dtype=float)
    if e.size == 0:
        raise ConfigError("MSE of an empty estimate vector")
    return float(np.mean((e - alpha) ** 2))


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.inf
    return num / den


def mse_ratios(hill_at_kopt, mle, tilde, star, alpha: float) -> tuple[float, float, float]:
    """``(MSE(hill)/MSE(T~), MSE(mle)/MSE(T~), MSE(mle)/MSE(T*))``; a zero denominator gives ``inf``."""
    m_tilde = mse(tilde, alpha)
    m_mle = mse(mle, alpha)
    return (_ratio(mse(hill_at_kopt, alpha), m_tilde),
            _ratio(m_mle, m_tilde),
            _ratio(m_mle, mse(star, alpha)))


def hill_mse_curve(hill: np.ndarray, alpha: float) -> np.ndarray:
    """Per-``k`` MSE over replicates, ignoring degenerate (NaN) entries."""
    h = np.asarray(hill, dtype=float)
    with np.errstate(invalid="ignore"):
        sq = (h - alpha) ** 2
    ok = ~np.isnan(sq)
    cnt = ok.sum(axis=0)
    tot = np.where(ok, sq, 0.0).sum(axis=0)
    out = np.full(h.shape[1], np.nan)
    np.divide(tot, cnt, out=out, where=cnt > 0)
    return out


def k_opt(hill_mse) -> int:
    """Smallest ``k`` minimising the Hill MSE curve (entry ``k-1``)."""
    arr = np.asarray(hill_mse, dtype=float)
    if arr.size == 0 or np.all(np.isnan(arr)):
        raise StudyError("Hill MSE is undefined for every k")
    return int(np.nanargmin(arr)) + 1


def p_hill(hill_mse, mse_tilde: float) -> float:
    """Percentage of ``k`` whose Hill MSE does not exceed ``mse_tilde``."""
    arr = np.asarray(hill_mse, dtype=float)
    if arr.size == 0:
        return 0.0
    return 100.0 * float(np.count_nonzero(arr <= mse_tilde)) / arr.size


# ---------------------------------------------------------------------------
# replicates
# ---------------------------------------------------------------------------

def _one_replicate(cfg: StudyConfig, n: int, r: int):
    rng = substream(cfg.master_seed, n, r)
    x = cfg.model.sample(rng, n)
    try:
        s = SampleSummary.from_values(x)
        if cfg.mle == "weibull":
            a_mle = mle_weibull_shape(s)
        else:
            a_mle = mle_truncated(s, cfg.c0).estimate
        t = estimate_tilde(s, cfg.tilde_config)
        st = estimate_star(s, cfg.star_config)
        hc = hill_curve(s)
    except WTCError as exc:
        return type(exc).__name__
    return a_mle, t.estimate, st.estimate, st.clamped, hc


def _run_chunk(args):
    cfg, n, rs = args
    return [_one_replicate(cfg, n, r) for r in rs]


def _default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def simulate_replicates(cfg: StudyConfig, n: int, workers: int | None = None,
                        chunk: int = 50) -> ReplicateBatch:
    """Run every replicate at sample size ``n``; results are ordered by replicate index."""
    workers = _default_workers() if workers is None else max(1, int(workers))
    idx = list(range(cfg.replicates))
    chunks = [(cfg, n, idx[i:i + chunk]) for i in range(0, len(idx), chunk)]
    if workers == 1 or len(chunks) == 1:
        results = [res for c in chunks for res in _run_chunk(c)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = [res for part in ex.map(_run_chunk, chunks) for res in part]

    failures: dict[str, int] = {}
    good = []
    for res in results:
        if isinstance(res, str):
            failures[res] = failures.get(res, 0) + 1
        else:
            good.append(res)
    if good:
        mle, tilde, star, clamped, hill = zip(*good)
        hill_arr = np.vstack(hill)
    else:
        mle = tilde = star = clamped = ()
        hill_arr = np.empty((0, n - 1))
    return ReplicateBatch(n, np.array(mle, dtype=float), np.array(tilde, dtype=float),
                          np.array(star, dtype=float), hill_arr, int(sum(clamped)), failures)


def summarize(cfg: StudyConfig, batch: ReplicateBatch) -> StudyRow:
    """Aggregate one batch into a table row; raises :class:`StudyError` on too many failures."""
    n_fail = sum(batch.failures.values())
    if n_fail > cfg.max_failure_rate * cfg.replicates:
        raise StudyError(
            f"n={batch.n}: {n_fail} of {cfg.replicates} replicates failed "
            f"({', '.join(f'{k}: {v}' for k, v in sorted(batch.failures.items()))}); "
            f"tolerated rate is {cfg.max_failure_rate:.0%}")
    used = batch.tilde.size
    if used < 2:
        raise StudyError(f"n={batch.n}: fewer than two usable replicates")
    a = cfg.alpha
    hm = hill_mse_curve(batch.hill, a)
    k = k_opt(hm)
    h_k = batch.hill[:, k - 1]
    h_k = h_k[~np.isnan(h_k)]
    r_hat, r_tilde, r_star = mse_ratios(h_k, batch.mle, batch.tilde, batch.star, a)
    return StudyRow(
        epsilon=cfg.epsilon, c0=cfg.c0, alpha=a, n=batch.n,
        mean_mle=float(batch.mle.mean()), mean_hill=float(h_k.mean()),
        mean_tilde=float(batch.tilde.mean()), mean_star=float(batch.star.mean()),
        var_mle=float(batch.mle.var(ddof=1)), var_hill=float(h_k.var(ddof=1)),
        var_tilde=float(batch.tilde.var(ddof=1)), var_star=float(batch.star.var(ddof=1)),
        r_hat=r_hat, r_tilde=r_tilde, r_star=r_star,
        p_hill=p_hill(hm, mse(batch.tilde, a)), k_opt=k,
        used=used, failures=n_fail, clamped=batch.clamped,
        failure_reasons=dict(sorted(batch.failures.items())),
    )


def run_study(cfg: StudyConfig, workers: int | None = None) -> list[StudyRow]:
    """One :class:`StudyRow` per sample size in ``cfg.n_grid``."""
    return [summarize(cfg, simulate_replicates(cfg, n, workers)) for n in cfg.n_grid]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.10g}"


def write_study_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(StudyRow.CSV_FIELDS)
        for row in rows:
            w.writerow([_fmt(getattr(row, f)) for f in StudyRow.CSV_FIELDS])


def _json_num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def study_sidecar(cfgs, rows) -> dict:
    return {
        "configs": [{k: _json_num(v) for k, v in c.to_dict().items()} for c in cfgs],
        "rows": [{f.name: _json_num(getattr(r, f.name)) for f in fields(r)} for r in rows],
    }


def write_study_sidecar(cfgs, rows, path) -> None:
    with open(path, "w") as fh:
        json.dump(study_sidecar(cfgs, rows), fh, indent=2)
        fh.write("\n")
