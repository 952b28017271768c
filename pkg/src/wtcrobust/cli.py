"""Command-line front end: ``wtcrobust {estimate,simulate,asymptotics,empirical,replay}``.

Exit codes: 0 success, 2 bad input or configuration, 3 numerical failure
(no root, degenerate quantity, quadrature failure, too many failed
replicates, or a replay that did not reproduce its outputs).

Every option may also come from ``--config FILE`` (``key = value`` lines,
keys spelled like the long option without dashes, ``#`` comments).
Command-line flags override the file, which overrides the defaults.
The environment variable ``WTC_SEED`` overrides the default seed.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import aeff, influence, sigma_star_sq, sigma_tilde_sq
from .core import Gamma
from .empirical import (COUPLINGS, EmpiricalConfig, TransformSpec, deviation_table, eps_grid,
                        load_and_transform, mean_excess_curve, write_mean_excess_csv,
                        write_sample_csv)
from .errors import (ConfigError, DataError, DegenerateError, IntegrationError, NoRootError,
                     StudyError, WTCError)
from .estimators import (estimate_star, estimate_tilde, hill_estimate, mle_truncated,
                         mle_weibull_fit, select_k_bootstrap, select_k_mle)
from .psi import EstimatorConfig
from .simulation import (MLE_KINDS, StudyConfig, run_study, write_study_csv,
                         write_study_sidecar)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
DEFAULT_SEED = 20160901
SEED_ENV = "WTC_SEED"
ESTIMATORS = ("tilde", "star", "mle", "mle-truncated", "hill-boot", "hill-mle")


class ReplayMismatch(WTCError):
    """A replayed run did not reproduce the recorded outputs."""


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------

def real(text: str) -> float:
    """Float parser accepting ``inf``/``-inf`` and rejecting NaN."""
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(x):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return x


def real_list(text: str) -> list[float]:
    return [real(p) for p in text.split(",") if p.strip()]


def int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# JSON and manifests
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(obj, path=None) -> str:
    # json.dumps writes floats with repr, the shortest exact round-trip form
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    argv: list
    seed: int | None
    version: str = __version__
    started_utc: str = ""
    wall_clock_seconds: float = 0.0
    outputs: list = field(default_factory=list)

    def add_output(self, path) -> None:
        self.outputs.append({"path": str(path), "name": Path(path).name,
                             "sha256": sha256_file(path)})

    def write(self, path) -> None:
        dump_json(asdict(self), path)


def _resolved_argv(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> list[str]:
    """Option list that reproduces ``ns`` exactly when parsed by ``parser``."""
    out = []
    for act in parser._actions:
        if act.dest in ("help", "config") or not act.option_strings:
            continue
        val = getattr(ns, act.dest, None)
        if val is None:
            continue
        flag = next(o for o in act.option_strings if o.startswith("--"))
        if isinstance(act, argparse.BooleanOptionalAction):
            out.append(flag if val else "--no-" + flag[2:])
        elif isinstance(val, list):
            out.append(f"{flag}=" + ",".join(repr(v) if isinstance(v, float) else str(v) for v in val))
        elif isinstance(val, float):
            out.append(f"{flag}={val!r}")
        else:
            out.append(f"{flag}={val}")
    return out


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

def read_config_file(path) -> list[tuple[str, str]]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    items = []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        items.append((key.replace("_", "-"), value))
    return items


def _config_tokens(sub: argparse.ArgumentParser, items) -> list[str]:
    known = {o[2:]: a for a in sub._actions for o in a.option_strings if o.startswith("--")}
    tokens = []
    for key, value in items:
        act = known.get(key)
        if act is None or key == "config":
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(act, argparse.BooleanOptionalAction):
            truth = value.lower()
            if truth not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"config key {key!r} needs a boolean, got {value!r}")
            tokens.append(f"--{key}" if truth in ("true", "1", "yes") else f"--no-{key}")
        else:
            # "--key=value" keeps values such as "-1,0" from looking like options
            tokens.append(f"--{key}={value}")
    return tokens


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_estimator_flags(p, star_defaults: bool):
    p.add_argument("--c0", type=real, default=1.0, help="reference constant c0 (default 1)")
    p.add_argument("--v", type=real, default=0.0, help="lower clip bound (default 0)")
    p.add_argument("--u", type=real, default=math.inf, help="upper clip bound, 'inf' allowed (default inf)")
    d = 1.0 if star_defaults else None
    p.add_argument("--d0", type=real, default=d, help="lower end of the censored-estimator range")
    p.add_argument("--d1", type=real, default=2.0 if star_defaults else None,
                   help="upper end of the censored-estimator range")


def _add_transform_flags(p):
    p.add_argument("--input", required=True, help="CSV file with one value column")
    p.add_argument("--value-column", type=int, default=-1, help="0-based value column (default last)")
    p.add_argument("--date-column", type=int, default=None, help="optional 0-based label column")
    p.add_argument("--log-returns", action=argparse.BooleanOptionalAction, default=False,
                   help="treat values as levels and take log differences")
    p.add_argument("--positive-only", action=argparse.BooleanOptionalAction, default=True,
                   help="drop non-positive values (default on)")
    p.add_argument("--scale", type=real, default=1.0, help="multiply the sample by this factor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wtcrobust",
        description="Robust estimation of the Weibull tail coefficient.",
        epilog="Exit codes: 0 ok, 2 input/configuration error, 3 numerical failure.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    # estimate
    p = sub.add_parser("estimate", help="estimate the tail coefficient from a CSV sample",
                       description="Print a JSON object with one EstimateResult per estimator.")
    p.add_argument("--config", help="key = value config file")
    _add_transform_flags(p)
    p.add_argument("--estimator", choices=ESTIMATORS + ("all",), default="tilde")
    _add_estimator_flags(p, star_defaults=False)
    p.add_argument("--pure-weibull", action=argparse.BooleanOptionalAction, default=False,
                   help="declare the data pure Weibull: adds plug-in standard errors")
    p.add_argument("--bootstrap-b", type=int, default=100, help="bootstrap resamples for hill-boot")
    p.add_argument("--seed", type=int, default=None, help=f"bootstrap seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--output", default=None, help="also write the JSON here, with a manifest")

    # simulate
    p = sub.add_parser(
        "simulate", help="Monte Carlo comparison of the four estimators",
        description="Writes study.csv (columns: epsilon,c0,alpha,n,mean_mle,mean_hill,mean_tilde,"
                    "mean_star,var_mle,var_hill,var_tilde,var_star,r_hat,r_tilde,r_star,p_hill,"
                    "k_opt,used,failures,clamped), study.json and study.manifest.json. "
                    "Comma lists for --epsilon/--c0/--alpha run every combination.")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--epsilon", type=real_list, default=[0.3])
    p.add_argument("--c0", type=real_list, default=[1.0])
    p.add_argument("--alpha", type=real_list, default=[1.0])
    p.add_argument("--gamma-rate", type=real, default=2.0, help="Gamma contaminant rate (default 2)")
    p.add_argument("--gamma-shape", type=real, default=0.5, help="Gamma contaminant shape (default 0.5)")
    p.add_argument("--d0", type=real, default=1.0)
    p.add_argument("--d1", type=real, default=2.0)
    p.add_argument("--v", type=real, default=0.0)
    p.add_argument("--u", type=real, default=math.inf)
    p.add_argument("--n-grid", type=int_list, default=[30, 50, 80, 100])
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--max-failure-rate", type=real, default=0.05)
    p.add_argument("--mle", choices=MLE_KINDS, default="weibull")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--out-dir", default=".")

    # asymptotics
    p = sub.add_parser(
        "asymptotics", help="efficiency and influence-function curves",
        description="Writes aeff_<kind>.csv (columns: v,value) and if_<kind>.csv "
                    "(columns: beta,v,value) for kind in tilde/star.")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--kind", choices=("tilde", "star", "both"), default="both")
    p.add_argument("--c0", type=real, default=1.0)
    p.add_argument("--alpha0", type=real, default=1.0)
    p.add_argument("--u", type=real, default=math.inf)
    p.add_argument("--d0", type=real, default=1.0)
    p.add_argument("--d1", type=real, default=2.0)
    p.add_argument("--v-min", type=real, default=-1.0)
    p.add_argument("--v-max", type=real, default=1.0)
    p.add_argument("--v-points", type=int, default=50)
    p.add_argument("--if-v", type=real_list, default=[-1.0, -0.5, 0.0, 0.5, 1.0],
                   help="clip bounds v for the influence curves")
    p.add_argument("--beta-min", type=real, default=0.1)
    p.add_argument("--beta-max", type=real, default=4.9)
    p.add_argument("--beta-points", type=int, default=49)
    p.add_argument("--gamma-rate", type=real, default=2.0, help="Gamma contaminant rate (default 2)")
    p.add_argument("--out-dir", default=".")

    # empirical
    p = sub.add_parser(
        "empirical", help="mean excess diagnostics and contamination deviation table",
        description="Writes sample.csv, mean_excess.csv (columns: t,mean_excess,log_mean_excess), "
                    "deviation.csv (columns: epsilon,tilde,star,hill_boot,hill_mle,k_boot,k_mle,"
                    "d_tilde,d_star,d_hill_boot,d_hill_mle), deviation.json and a manifest. "
                    "d0/d1 default to the 95%% MLE interval of the shape.")
    p.add_argument("--config", help="key = value config file")
    _add_transform_flags(p)
    _add_estimator_flags(p, star_defaults=False)
    p.add_argument("--eps-max", type=real, default=0.5)
    p.add_argument("--eps-step", type=real, default=0.05)
    p.add_argument("--gamma-rate", type=real, default=2.0)
    p.add_argument("--gamma-shape", type=real, default=0.5)
    p.add_argument("--bootstrap-b", type=int, default=100)
    p.add_argument("--coupling", choices=COUPLINGS, default="independent")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=".")

    # replay
    p = sub.add_parser("replay", help="re-run a manifest and check its outputs bit for bit")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default=None, help="where to write the replayed outputs "
                                                   "(default: <manifest dir>/replay)")
    return parser


def _subparser(parser, name) -> argparse.ArgumentParser:
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[name]
    raise KeyError(name)


def parse_args(argv):
    """Parse ``argv`` with config-file support (flags > file > defaults)."""
    parser = build_parser()
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    if known.config and argv and argv[0] in COMMANDS:
        tokens = _config_tokens(_subparser(parser, argv[0]), read_config_file(known.config))
        # file values go first so that explicit flags, parsed later, win
        argv = [argv[0]] + tokens + argv[1:]
    ns = parser.parse_args(argv)
    if hasattr(ns, "seed") and ns.seed is None:
        ns.seed = _default_seed()
    return parser, ns


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _load(ns):
    spec = TransformSpec(ns.log_returns, ns.positive_only, ns.scale)
    return load_and_transform(ns.input, spec, ns.value_column, ns.date_column)


def _estimate_one(name, s, ns):
    se = None
    if name == "tilde":
        cfg = EstimatorConfig.tilde(ns.c0, ns.v, ns.u)
        r = estimate_tilde(s, cfg)
        if ns.pure_weibull:
            se = math.sqrt(sigma_tilde_sq(r.estimate, cfg).sigma_sq / s.n)
        return r.to_dict() | {"standard_error": se}
    if name == "star":
        if ns.d0 is None or ns.d1 is None:
            raise ConfigError("the star estimator needs --d0 and --d1")
        cfg = EstimatorConfig.star(ns.c0, ns.d0, ns.d1, ns.v, ns.u)
        r = estimate_star(s, cfg)
        if ns.pure_weibull:
            se = math.sqrt(sigma_star_sq(r.estimate, cfg).sigma_sq / s.n)
        return r.to_dict() | {"standard_error": se}
    if name == "mle":
        shape, rate, se = mle_weibull_fit(s)
        return {"estimate": shape, "rate": rate, "standard_error": se}
    if name == "mle-truncated":
        r = mle_truncated(s, ns.c0)
        if ns.pure_weibull:
            cfg = EstimatorConfig.tilde(ns.c0, -1.0, math.inf)
            se = math.sqrt(sigma_tilde_sq(r.estimate, cfg).sigma_sq / s.n)
        return r.to_dict() | {"standard_error": se}
    if name == "hill-boot":
        k = select_k_bootstrap(s, ns.bootstrap_b, ns.seed)
        return {"estimate": hill_estimate(s, k), "k": k, "standard_error": None}
    if name == "hill-mle":
        k = select_k_mle(s)
        return {"estimate": hill_estimate(s, k), "k": k, "standard_error": None}
    raise ConfigError(f"unknown estimator {name!r}")


def cmd_estimate(ns, parser) -> int:
    if ns.estimator == "star" and (ns.d0 is None or ns.d1 is None):
        raise ConfigError("the star estimator needs --d0 and --d1")
    loaded = _load(ns)
    s = loaded.sample
    if ns.estimator == "all":
        names = [e for e in ESTIMATORS if e != "star" or (ns.d0 is not None and ns.d1 is not None)]
    else:
        names = [ns.estimator]
    results = {name: _estimate_one(name, s, ns) for name in names}
    out = {"n": s.n, "m": s.m, "results": results}
    text = dump_json(out)
    sys.stdout.write(text)
    if ns.output:
        Path(ns.output).parent.mkdir(parents=True, exist_ok=True)
        Path(ns.output).write_text(text)
        return _finish(ns, parser, [ns.output], Path(str(ns.output) + ".manifest.json"))
    return EXIT_OK


def cmd_simulate(ns, parser) -> int:
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfgs, rows = [], []
    for eps, c0, alpha in itertools.product(ns.epsilon, ns.c0, ns.alpha):
        cfg = StudyConfig(epsilon=eps, c0=c0, alpha=alpha, gamma_rate=ns.gamma_rate,
                          gamma_shape=ns.gamma_shape, d0=ns.d0, d1=ns.d1, v=ns.v, u=ns.u,
                          n_grid=tuple(ns.n_grid), replicates=ns.replicates,
                          master_seed=ns.seed, max_failure_rate=ns.max_failure_rate, mle=ns.mle)
        cfgs.append(cfg)
        rows += run_study(cfg, workers=ns.threads)
    csv_path, json_path = out_dir / "study.csv", out_dir / "study.json"
    write_study_csv(rows, csv_path)
    write_study_sidecar(cfgs, rows, json_path)
    for r in rows:
        print(f"eps={r.epsilon:g} c0={r.c0:g} alpha={r.alpha:g} n={r.n}: "
              f"mle={r.mean_mle:.4f} hill={r.mean_hill:.4f} tilde={r.mean_tilde:.4f} "
              f"star={r.mean_star:.4f} p_hill={r.p_hill:.2f} failures={r.failures}")
    return _finish(ns, parser, [csv_path, json_path], out_dir / "study.manifest.json")


def _fmt10(x: float) -> str:
    return f"{x:.10g}"


def cmd_asymptotics(ns, parser) -> int:
    if ns.v_points < 1 or ns.beta_points < 1:
        raise ConfigError("grid sizes must be positive")
    if not (ns.v_min <= ns.v_max and 0 < ns.beta_min <= ns.beta_max):
        raise ConfigError("need v-min <= v-max and 0 < beta-min <= beta-max")
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kinds = ("tilde", "star") if ns.kind == "both" else (ns.kind,)
    v_grid = np.linspace(ns.v_min, ns.v_max, ns.v_points)
    b_grid = np.linspace(ns.beta_min, ns.beta_max, ns.beta_points)

    def make(kind, v):
        if kind == "tilde":
            return EstimatorConfig.tilde(ns.c0, float(v), ns.u)
        return EstimatorConfig.star(ns.c0, ns.d0, ns.d1, float(v), ns.u)

    paths = []
    for kind in kinds:
        lines, skipped = ["v,value"], []
        for v in v_grid:
            try:
                cfg = make(kind, v)
            except ConfigError:
                skipped.append(float(v))
                continue
            lines.append(f"{_fmt10(v)},{_fmt10(aeff(cfg, ns.alpha0))}")
        if skipped:
            print(f"{kind}: skipped {len(skipped)} v below the admissible minimum", file=sys.stderr)
        path = out_dir / f"aeff_{kind}.csv"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)

        lines = ["beta,v,value"]
        for v in ns.if_v:
            try:
                cfg = make(kind, v)
            except ConfigError as exc:
                print(f"{kind}: skipping v={v:g}: {exc}", file=sys.stderr)
                continue
            for b in b_grid:
                val = influence(cfg, Gamma(ns.gamma_rate, float(b)), ns.alpha0)
                lines.append(f"{_fmt10(b)},{_fmt10(v)},{_fmt10(val)}")
        path = out_dir / f"if_{kind}.csv"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return _finish(ns, parser, paths, out_dir / "asymptotics.manifest.json")


def cmd_empirical(ns, parser) -> int:
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    loaded = _load(ns)
    s = loaded.sample
    print(f"n={s.n} m={s.m} (values >= 1 after scaling by {ns.scale:g})")
    sample_path = out_dir / "sample.csv"
    write_sample_csv(s, sample_path)
    me_path = out_dir / "mean_excess.csv"
    curve = mean_excess_curve(s)
    write_mean_excess_csv(curve, me_path)
    cfg = EmpiricalConfig(ns.c0, ns.v, ns.u, ns.d0, ns.d1, ns.bootstrap_b,
                          Gamma(ns.gamma_rate, ns.gamma_shape))
    table = deviation_table(s, eps_grid(ns.eps_max, ns.eps_step), cfg, ns.seed, ns.coupling)
    print(f"d0={table.config.d0:.6g} d1={table.config.d1:.6g}")
    dev_path = out_dir / "deviation.csv"
    table.write_csv(dev_path)
    dev_json = out_dir / "deviation.json"
    dump_json({
        "n": s.n, "m": s.m, "d0": table.config.d0, "d1": table.config.d1, "c0": ns.c0,
        "v": ns.v, "u": ns.u, "seed": table.seed, "coupling": table.coupling, "step": table.step,
        "excluded_thresholds": list(curve.excluded),
        "rows": [asdict(r) for r in table.rows],
    }, dev_json)
    return _finish(ns, parser, [sample_path, me_path, dev_path, dev_json],
                   out_dir / "empirical.manifest.json")


def cmd_replay(ns, parser) -> int:
    mpath = Path(ns.manifest)
    try:
        manifest = json.loads(mpath.read_text())
    except OSError as exc:
        raise DataError(f"cannot read manifest {mpath}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{mpath} is not valid JSON: {exc}") from exc
    try:
        command, argv = manifest["subcommand"], list(manifest["argv"])
        recorded = {o["name"]: o["sha256"] for o in manifest["outputs"]}
    except (KeyError, TypeError) as exc:
        raise DataError(f"{mpath} is not a run manifest") from exc
    out_dir = Path(ns.out_dir) if ns.out_dir else mpath.parent / "replay"
    out_dir.mkdir(parents=True, exist_ok=True)
    if command == "estimate":
        argv = _replace_flag(argv, "--output", str(out_dir / Path(manifest["config"]["output"]).name))
    else:
        argv = _replace_flag(argv, "--out-dir", str(out_dir))
    with open(os.devnull, "w") as sink:
        saved, sys.stdout = sys.stdout, sink
        try:
            code = main([command] + argv)
        finally:
            sys.stdout = saved
    if code != EXIT_OK:
        return code
    mismatched = [name for name, digest in recorded.items()
                  if not (out_dir / name).exists() or sha256_file(out_dir / name) != digest]
    if mismatched:
        raise ReplayMismatch(f"outputs differ from the manifest: {', '.join(sorted(mismatched))}")
    print(f"replay reproduced {len(recorded)} output file(s) bit for bit in {out_dir}")
    return EXIT_OK


def _replace_flag(argv, flag, value):
    out = [a for a in argv if not a.startswith(flag + "=")]
    return out + [f"{flag}={value}"]


def _finish(ns, parser, outputs, manifest_path) -> int:
    sub = _subparser(parser, ns.command)
    config = {k: v for k, v in vars(ns).items()
              if k not in ("command", "config") and not k.startswith("_")}
    m = RunManifest(ns.command, config, _resolved_argv(sub, ns), getattr(ns, "seed", None),
                    started_utc=ns._started_utc, wall_clock_seconds=time.perf_counter() - ns._started)
    for p in outputs:
        m.add_output(p)
    m.write(manifest_path)
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "asymptotics": cmd_asymptotics,
    "empirical": cmd_empirical,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, ns = parse_args(argv)
    except SystemExit as exc:       # argparse usage errors and --help
        return int(exc.code or 0)
    except (ConfigError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ns._started = time.perf_counter()
    ns._started_utc = datetime.now(timezone.utc).isoformat(timespec="seconds")
    try:
        return COMMANDS[ns.command](ns, parser)
    except (NoRootError, DegenerateError, IntegrationError, StudyError, ReplayMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, WTCError) as exc:   # ConfigError, DataError, DomainError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
