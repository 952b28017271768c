"""Real-data pipeline: returns -> positive scaled sample -> diagnostics -> deviation table."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DistModel, Gamma, substream
from .errors import ConfigError, DataError, InsufficientDataError, WTCError
from .estimators import (SampleSummary, estimate_star, estimate_tilde, hill_estimate,
                         mle_weibull_interval, select_k_bootstrap, select_k_mle)
from .psi import EstimatorConfig


@dataclass(frozen=True)
class TransformSpec:
    """How raw values become the analysed sample.

    ``log_returns`` turns levels into ``diff(log(levels))``; ``positive_only``
    drops values ``<= 0``; ``scale`` multiplies what is left.
    """

    log_returns: bool = False
    positive_only: bool = True
    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigError(f"scale must be positive and finite, got {self.scale!r}")


@dataclass(frozen=True)
class LoadedSample:
    sample: SampleSummary
    dates: tuple | None
    n_raw: int

    @property
    def m(self) -> int:
        """Number of transformed values at or above 1 (the truncated sample size)."""
        return self.sample.m


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def read_series(path, value_column: int = -1, date_column: int | None = None):
    """Read one numeric column (and optionally a label column) from a CSV file.

    A first line whose value field is not numeric is taken as a header.
    Returns ``(values, dates)``.  Any other unparsable line raises
    :class:`DataError` listing the offending line numbers.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values, dates, bad = [], [], []
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                cell = row[value_column].strip()
            except IndexError:
                bad.append(lineno)
                continue
            x = _parse_float(cell)
            if x is None or math.isnan(x):
                if lineno == 1 and not values:
                    continue
                bad.append(lineno)
                continue
            values.append(x)
            if date_column is not None:
                try:
                    dates.append(row[date_column].strip())
                except IndexError:
                    bad.append(lineno)
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise DataError(f"{path}: unparsable rows at line(s) {shown}")
    if not values:
        raise DataError(f"{path}: no numeric values found")
    return np.array(values, dtype=float), (tuple(dates) if date_column is not None else None)


def transform(values, spec: TransformSpec, dates=None):
    """Apply ``spec`` to raw values; returns ``(sample_values, dates)``."""
    x = np.asarray(values, dtype=float)
    d = None if dates is None else np.asarray(dates, dtype=object)
    if spec.log_returns:
        if np.any(x <= 0):
            raise DataError("log returns need strictly positive levels")
        x = np.diff(np.log(x))
        d = None if d is None else d[1:]
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    if spec.positive_only:
        keep = x > 0
        x = x[keep]
        d = None if d is None else d[keep]
    x = x * spec.scale
    if x.size == 0:
        raise InsufficientDataError("no observations left after the transform")
    if np.any(x <= 0):
        raise DataError("transformed sample has non-positive values; enable the positive filter")
    return x, (None if d is None else tuple(d))


def load_and_transform(path, spec: TransformSpec = TransformSpec(), value_column: int = -1,
                       date_column: int | None = None) -> LoadedSample:
    values, dates = read_series(path, value_column, date_column)
    x, d = transform(values, spec, dates)
    return LoadedSample(SampleSummary.from_values(x), d, int(values.size))


def write_sample_csv(sample, path, dates=None) -> None:
    """Write the sample with ``repr`` floats so that reloading is bit-exact."""
    vals = sample.raw if isinstance(sample, SampleSummary) else np.asarray(sample, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if dates is None:
            w.writerow(["value"])
            w.writerows([repr(float(v))] for v in vals)
        else:
            w.writerow(["date", "value"])
            w.writerows([dt, repr(float(v))] for dt, v in zip(dates, vals))


# ---------------------------------------------------------------------------
# mean excess
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeanExcessCurve:
    t: np.ndarray
    mean_excess: np.ndarray
    log_mean_excess: np.ndarray
    excluded: tuple = ()

    def rows(self):
        return list(zip(self.t.tolist(), self.mean_excess.tolist(), self.log_mean_excess.tolist()))


def mean_excess_curve(sample, thresholds=None) -> MeanExcessCurve:
    """Empirical mean excess ``sum (X_i - t) 1{X_i > t} / sum 1{X_i > t}``.

    Default thresholds are the sample quantiles at levels 0.50, 0.51, ..., 0.99.
    Thresholds at or above the sample maximum are dropped and listed in
    ``excluded``.
    """
    s = sample if isinstance(sample, SampleSummary) else SampleSummary.from_values(sample)
    x = s.sorted
    if thresholds is None:
        thresholds = np.quantile(x, np.linspace(0.5, 0.99, 50))
    t = np.unique(np.asarray(thresholds, dtype=float))
    if np.any(np.isnan(t)):
        raise ConfigError("thresholds must not be NaN")
    ok = t < x[-1]
    excluded = tuple(t[~ok].tolist())
    t = t[ok]
    # suffix sums over the sorted sample
    idx = np.searchsorted(x, t, side="right")
    suffix = np.concatenate([np.cumsum(x[::-1])[::-1], [0.0]])
    count = x.size - idx
    me = suffix[idx] / count - t
    return MeanExcessCurve(t, me, np.log(me), excluded)


def write_mean_excess_csv(curve: MeanExcessCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean_excess", "log_mean_excess"])
        for row in curve.rows():
            w.writerow([f"{v:.10g}" for v in row])


# ---------------------------------------------------------------------------
# contamination and deviation table
# ---------------------------------------------------------------------------

def contaminate(sample, epsilon: float, contaminant: DistModel,
                rng: np.random.Generator) -> SampleSummary:
    """Replace each observation, independently with probability ``epsilon``, by a contaminant draw."""
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigError(f"epsilon must lie in [0, 1], got {epsilon}")
    x = sample.raw if isinstance(sample, SampleSummary) else np.asarray(sample, dtype=float)
    pick = rng.random(x.size) < epsilon
    draws = contaminant.sample(rng, x.size)
    return SampleSummary.from_values(np.where(pick, draws, x))


@dataclass(frozen=True)
class EmpiricalConfig:
    """Estimator settings for the deviation table.

    ``d0``/``d1`` default to the 95% Wald interval of the Weibull shape MLE
    on the uncontaminated sample.  The contaminant defaults to a Gamma law
    with rate 2 and shape 0.5.
    """

    c0: float = 1.0
    v: float = 0.0
    u: float = math.inf
    d0: float | None = None
    d1: float | None = None
    bootstrap_b: int = 100
    contaminant: DistModel = field(default_factory=lambda: Gamma(2.0, 0.5))

    def resolve(self, sample) -> "EmpiricalConfig":
        if self.d0 is not None and self.d1 is not None:
            return self
        lo, hi = mle_weibull_interval(sample)
        return EmpiricalConfig(self.c0, self.v, self.u,
                               lo if self.d0 is None else self.d0,
                               hi if self.d1 is None else self.d1,
                               self.bootstrap_b, self.contaminant)

    @property
    def tilde(self) -> EstimatorConfig:
        return EstimatorConfig.tilde(self.c0, self.v, self.u)

    @property
    def star(self) -> EstimatorConfig:
        return EstimatorConfig.star(self.c0, self.d0, self.d1, self.v, self.u)


ESTIMATOR_COLUMNS = ("tilde", "star", "hill_boot", "hill_mle")


@dataclass(frozen=True)
class DeviationRow:
    epsilon: float
    tilde: float | None
    star: float | None
    hill_boot: float | None
    hill_mle: float | None
    k_boot: int | None
    k_mle: int | None
    d_tilde: float | None = None
    d_star: float | None = None
    d_hill_boot: float | None = None
    d_hill_mle: float | None = None
    errors: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class DeviationTable:
    rows: tuple
    config: EmpiricalConfig
    seed: int
    step: float | None
    coupling: str = "independent"

    CSV_FIELDS = ("epsilon", "tilde", "star", "hill_boot", "hill_mle", "k_boot", "k_mle",
                  "d_tilde", "d_star", "d_hill_boot", "d_hill_mle")

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_FIELDS)
            for r in self.rows:
                w.writerow(["" if (v := getattr(r, f)) is None else
                            (str(v) if isinstance(v, int) else f"{v:.10g}")
                            for f in self.CSV_FIELDS])


def _grid_step(eps_grid) -> float | None:
    g = np.asarray(eps_grid, dtype=float)
    if g.size == 0:
        raise ConfigError("epsilon grid must not be empty")
    if np.any((g < 0) | (g > 1)):
        raise ConfigError("epsilon values must lie in [0, 1]")
    if g.size == 1:
        return None
    d = np.diff(g)
    if np.any(d <= 0):
        raise ConfigError("epsilon grid must be strictly increasing")
    if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12):
        raise ConfigError("epsilon grid must be uniformly spaced")
    return float(d[0])


def _derived_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence(int(seed), spawn_key=keys).generate_state(1, np.uint64)[0])


def _estimates(s: SampleSummary, cfg: EmpiricalConfig, boot_seed: int) -> tuple[dict, dict]:
    out: dict = {}
    errors: dict = {}

    def attempt(name, fn):
        try:
            out[name] = fn()
        except WTCError as exc:
            out[name] = None
            errors[name] = f"{type(exc).__name__}: {exc}"

    attempt("tilde", lambda: estimate_tilde(s, cfg.tilde).estimate)
    attempt("star", lambda: estimate_star(s, cfg.star).estimate)
    attempt("k_boot", lambda: select_k_bootstrap(s, cfg.bootstrap_b, boot_seed))
    attempt("k_mle", lambda: select_k_mle(s))
    for col, kcol in (("hill_boot", "k_boot"), ("hill_mle", "k_mle")):
        if out[kcol] is None:
            out[col] = None
        else:
            attempt(col, lambda k=out[kcol]: hill_estimate(s, k))
    return out, errors


COUPLINGS = ("independent", "nested")


def deviation_table(sample, eps_grid, cfg: EmpiricalConfig = EmpiricalConfig(),
                    seed: int = 0, coupling: str = "independent") -> DeviationTable:
    """Estimates at each contamination level and their change to the next level.

    With ``coupling="independent"`` level ``i`` is contaminated with
    ``substream(seed, i)`` and bootstraps with a seed derived from
    ``(seed, i)``.  With ``coupling="nested"`` every level shares one set of
    uniforms, contaminant draws and bootstrap seed, so the points replaced at
    level ``eps`` are also replaced at every larger level.  Estimator failures
    leave the cell empty.
    """
    if coupling not in COUPLINGS:
        raise ConfigError(f"coupling must be one of {COUPLINGS}, got {coupling!r}")
    s = sample if isinstance(sample, SampleSummary) else SampleSummary.from_values(sample)
    step = _grid_step(eps_grid)
    cfg = cfg.resolve(s)
    if coupling == "nested":
        rng = substream(seed, 0)
        uniforms = rng.random(s.n)
        draws = cfg.contaminant.sample(rng, s.n)
    raw_rows = []
    for i, eps in enumerate(np.asarray(eps_grid, dtype=float)):
        if coupling == "nested":
            cs = SampleSummary.from_values(np.where(uniforms < eps, draws, s.raw))
            boot_seed = _derived_seed(seed, 0, 1)
        else:
            cs = contaminate(s, float(eps), cfg.contaminant, substream(seed, i))
            boot_seed = _derived_seed(seed, i, 1)
        est, errs = _estimates(cs, cfg, boot_seed)
        raw_rows.append((float(eps), est, errs))
    rows = []
    for i, (eps, est, errs) in enumerate(raw_rows):
        devs = {}
        if i + 1 < len(raw_rows):
            nxt = raw_rows[i + 1][1]
            for col in ESTIMATOR_COLUMNS:
                a, b = est[col], nxt[col]
                devs["d_" + col] = None if a is None or b is None else abs(b - a)
        rows.append(DeviationRow(eps, est["tilde"], est["star"], est["hill_boot"], est["hill_mle"],
                                 est["k_boot"], est["k_mle"], errors=errs, **devs))
    return DeviationTable(tuple(rows), cfg, int(seed), step, coupling)


def eps_grid(eps_max: float, eps_step: float) -> np.ndarray:
    """``0, step, 2 step, ...`` up to ``eps_max`` inclusive."""
    if not (eps_step > 0 and 0 <= eps_max <= 1):
        raise ConfigError("need eps_step > 0 and 0 <= eps_max <= 1")
    k = int(math.floor(eps_max / eps_step + 1e-9))
    return np.round(np.arange(k + 1) * eps_step, 12)
