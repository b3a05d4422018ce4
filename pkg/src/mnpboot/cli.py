"""Command-line interface: ``mnpboot {simulate,bootstrap,test,bench}``.

Every option can also be given in a ``key = value`` config file passed with
``--config``; flags override the file. Each output file starts with the fully
resolved configuration (derived ``q`` and all seeds included).

Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from mnpboot import __version__
from mnpboot import io
from mnpboot import rng as rngmod
from mnpboot.bench import run_bench, scaling_slope
from mnpboot.bootstrap import ProjectionStrategy, projected_dimension, run_bootstrap
from mnpboot.datagen import (CovarianceSpec, InnovationDist, generate_sample, parse_model,
                             population_spectral_measure)
from mnpboot.errors import CapabilityError, ContractError, DomainError, ModelError, NumericalError
from mnpboot.mp import MPModel, mp_density, mp_support_bound
from mnpboot.spectra import LEDOIT_WOLF
from mnpboot.testing import MCConfig, identity_test, rejection_probability_mc

__all__ = ["main", "build_parser", "resolve_config"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _bool(text: str | bool) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> list[float]:
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if tok:
            out.append(float(tok[:-1]) / 100.0 if tok.endswith("%") else float(tok))
    return out


def _ints(text: str) -> list[int]:
    return [int(t) for t in str(text).split(",") if t.strip()]


# key -> (type, default, choices, help). Keys double as config-file keys.
COMMON: dict[str, tuple] = {
    "model": (str, "identity", None,
              "population covariance: identity | two-point[:f] | three-block | toeplitz[:base] "
              "| ma:rho:r (r may be NN%%) | dense:<csv>"),
    "dist": (str, "normal", ("normal", "chisq20", "rademacher"), "innovation law"),
    "n": (int, 200, None, "number of observations"),
    "p": (int, 100, None, "dimension"),
    "data": (str, None, None, "read the data matrix from this CSV instead of simulating"),
    "seed": (int, None, None, "top-level seed (drawn from system entropy and printed if absent)"),
    "workers": (int, os.cpu_count() or 1, None, "worker threads"),
    "out": (str, None, None, "primary output path"),
}
BOOT: dict[str, tuple] = {
    "m": (int, None, None, "bootstrap sample size (default n/10)"),
    "B": (int, 200, None, "bootstrap replicates"),
    "strategy": (str, "uniform", None, "coordinate projection: uniform | consecutive | first | block:s1,s2,..."),
    "projection_resample": (str, "per-replicate", ("per-replicate", "per-run"),
                            "draw a new projection per replicate or once per run"),
}
KEYS: dict[str, dict[str, tuple]] = {
    "simulate": {**COMMON},
    "bootstrap": {**COMMON, **BOOT,
                  "bins": (int, None, None, "histogram bin count (default Freedman-Diaconis)"),
                  "density_points": (int, 400, None, "grid size of the MP density curve"),
                  "hist_out": (str, None, None, "histogram CSV (default <out>.hist.csv)"),
                  "density_out": (str, None, None, "MP density CSV (default <out>.mp.csv)")},
    "test": {**COMMON, **BOOT,
             "m_rule": (str, "bs", None, "bs | dk | fixed; a comma list in table mode"),
             "alpha": (float, 0.05, None, "nominal level"),
             "psi": (float, 0.75, None, "ladder ratio"),
             "K": (int, 30, None, "ladder length minus one"),
             "j_start": (int, 10, None, "first ladder exponent"),
             "refined_centering": (_bool, False, None, "subtract the contour bias term on both sides"),
             "n_sim": (int, 0, None, "Monte Carlo repetitions; > 0 switches to table mode"),
             "r_over_p": (str, None, None, "table mode: comma list of MA fractions, e.g. 0,2%%,5%%"),
             "rho": (float, 0.05, None, "table mode: MA off-diagonal value"),
             "timings": (str, "include", ("include", "omit"),
                         "table mode: write mean_runtime_s or NA (omit keeps files reproducible)"),
             "diagnostics_out": (str, None, None, "ladder diagnostics CSV (default <out>.ladder.csv)")},
    "bench": {**COMMON,
              "m": (int, None, None, "bootstrap sample size (default n/10)"),
              "B": (int, 20, None, "timed replicates per leg; 0 times only the statistic"),
              "mem_limit_mb": (float, 2048.0, None, "skip the classical leg above this estimate"),
              "q_scan": (str, None, None, "comma list of q values for the log-log scaling slope")},
}
DEFAULT_OUT = {"simulate": "data.csv", "bootstrap": "run.jsonl", "test": "test.jsonl", "bench": "bench.jsonl"}


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mnpboot", description="(m, mp/n)-out-of-(n, p) bootstrap tools")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"simulate": "write a synthetic data matrix",
             "bootstrap": "run the bootstrap and emit spectra, histogram and MP density",
             "test": "identity test, single run or Monte Carlo table",
             "bench": "time the bootstrap against the classical one"}
    for cmd, keys in KEYS.items():
        sp = sub.add_parser(cmd, help=helps[cmd], description=helps[cmd],
                            epilog="config keys: config, " + ", ".join(keys),
                            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        sp.add_argument("--config", default=None, help="key = value file; flags override it")
        for key, (typ, default, choices, text) in keys.items():
            # default=None marks "not given"; the real default is applied in resolve_config
            sp.add_argument(_flag(key), dest=key, type=typ, choices=choices, default=None,
                            help=f"{text} [default: {default}]")
    return parser


def resolve_config(command: str, ns: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    keys = KEYS[command]
    cfg = {k: spec[1] for k, spec in keys.items()}
    if ns.config:
        for k, raw in io.read_config(ns.config).items():
            if k not in keys:
                raise DomainError(f"unknown config key {k!r} for {command}")
            typ, _, choices, _ = keys[k]
            try:
                val = typ(raw)
            except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                raise DomainError(f"config key {k}: {exc}") from exc
            if choices and val not in choices:
                raise DomainError(f"config key {k}: {val!r} not in {choices}")
            cfg[k] = val
    for k in keys:
        v = getattr(ns, k, None)
        if v is not None:
            cfg[k] = v
    if cfg["seed"] is None:
        cfg["seed"] = rngmod.fresh_seed()
        print(f"seed = {cfg['seed']}", file=sys.stderr)
    if cfg["out"] is None:
        cfg["out"] = DEFAULT_OUT[command]
    if cfg["workers"] < 1:
        raise DomainError("workers must be at least 1")
    return cfg


def _sibling(out: str, suffix: str) -> str:
    p = Path(out)
    return str(p.with_name(p.name.split(".")[0] + suffix))


def _echo(cfg: dict) -> dict:
    # workers is left out: results do not depend on it, and files must not either
    return {k: v for k, v in cfg.items() if v is not None and k != "workers"}


def _load_data(cfg: dict) -> tuple[np.ndarray, CovarianceSpec | None]:
    """Data from ``--data`` or simulated from the model with the top-level seed."""
    if cfg["data"]:
        Y = io.read_matrix_csv(cfg["data"])
        cfg["n"], cfg["p"] = Y.shape
        spec = parse_model(cfg["model"], cfg["p"]) if cfg["model"] else None
        return Y, spec
    spec = parse_model(cfg["model"], cfg["p"])
    return generate_sample(spec, InnovationDist(cfg["dist"]), cfg["n"], cfg["seed"]), spec


def _resample_policy(cfg: dict) -> str:
    return cfg["projection_resample"].replace("-", "_")


def _default_m(cfg: dict) -> int:
    return cfg["m"] if cfg["m"] is not None else max(2, cfg["n"] // 10)


def cmd_simulate(cfg: dict) -> int:
    spec = parse_model(cfg["model"], cfg["p"])
    Y = generate_sample(spec, InnovationDist(cfg["dist"]), cfg["n"], cfg["seed"])
    io.write_matrix_csv(cfg["out"], Y)
    # the matrix CSV is header-free, so the config echo lives next to it
    io.write_config(cfg["out"] + ".config", _echo(cfg))
    H = population_spectral_measure(spec)
    print(f"wrote {cfg['n']} x {cfg['p']} matrix to {cfg['out']}")
    print(f"population spectrum ({spec.describe()}): {len(H.points)} distinct values in "
          f"[{H.points.min():.6g}, {H.points.max():.6g}], mean {H.moment(1):.6g}")
    return EXIT_OK


def cmd_bootstrap(cfg: dict) -> int:
    Y, spec = _load_data(cfg)
    n, p = Y.shape
    cfg["m"] = m = _default_m(cfg)
    cfg["q"] = projected_dimension(m, n, p)
    strategy = ProjectionStrategy.parse(cfg["strategy"])
    run = run_bootstrap(Y, m, cfg["B"], strategy, _resample_policy(cfg), [LEDOIT_WOLF],
                        cfg["seed"], cfg["workers"])
    header = _echo(cfg)
    io.write_run_jsonl(cfg["out"], run, {"config": header})

    hist_out = cfg["hist_out"] or _sibling(cfg["out"], ".hist.csv")
    io.write_table_csv(hist_out, io.histogram(run.pooled_eigenvalues(), cfg["bins"]),
                       ["bin_left", "bin_right", "density"], header)
    print(f"n={n} p={p} m={m} q={run.q} B={cfg['B']} seed={cfg['seed']}")
    print(f"wrote {cfg['out']} and {hist_out}")
    if spec is not None:
        model = MPModel(p / n, population_spectral_measure(spec))
        lo, hi = mp_support_bound(model)
        x = np.linspace(lo, hi, cfg["density_points"])
        rows = [{"x": float(a), "density": float(d)} for a, d in zip(x, mp_density(model, x))]
        dens_out = cfg["density_out"] or _sibling(cfg["out"], ".mp.csv")
        io.write_table_csv(dens_out, rows, ["x", "density"], header)
        print(f"wrote {dens_out}")
    return EXIT_OK


def _m_rule(token: str, cfg: dict):
    token = token.strip().lower()
    if token in ("bs", "dk"):
        return token
    if token == "fixed":
        return _default_m(cfg)
    raise DomainError(f"unknown m rule {token!r} (bs, dk or fixed)")


def cmd_test(cfg: dict) -> int:
    strategy = ProjectionStrategy.parse(cfg["strategy"])
    if cfg["n_sim"] > 0:
        return _test_table(cfg, strategy)
    Y, _ = _load_data(cfg)
    rule = _m_rule(cfg["m_rule"], cfg)
    res = identity_test(Y, rule, cfg["B"], cfg["alpha"], strategy, cfg["seed"], cfg["workers"],
                        psi=cfg["psi"], K=cfg["K"], j_start=cfg["j_start"],
                        projection_resample=_resample_policy(cfg),
                        refined_centering=cfg["refined_centering"])
    cfg["m"], cfg["q"] = res.m, res.q
    header = _echo(cfg)
    io.write_records_jsonl(cfg["out"], {"config": header}, [res.record()])
    print(f"T = {res.statistic:.6g}, centering p^2/n = {res.centering:.6g}, "
          f"quantile = {res.quantile:.6g}, m = {res.m}, q = {res.q}")
    print("reject H0" if res.decision else "do not reject H0")
    if res.diagnostics is not None:
        diag_out = cfg["diagnostics_out"] or _sibling(cfg["out"], ".ladder.csv")
        io.write_table_csv(diag_out, res.diagnostics,
                           ["j", "m_j", "q_j", "d_consecutive", "d_rowsum"], header)
        print(f"wrote {cfg['out']} and {diag_out}")
    else:
        print(f"wrote {cfg['out']}")
    return EXIT_OK


def _test_table(cfg: dict, strategy: ProjectionStrategy) -> int:
    n, p = cfg["n"], cfg["p"]
    if cfg["r_over_p"]:
        fracs = _floats(cfg["r_over_p"])
        specs = [(f, CovarianceSpec.tridiagonal_ma(p, cfg["rho"], int(round(f * p)))) for f in fracs]
    else:
        specs = [(None, parse_model(cfg["model"], p))]
    rows = []
    for token in cfg["m_rule"].split(","):
        rule = _m_rule(token, cfg)
        for frac, spec in specs:
            mc = MCConfig(spec, n, InnovationDist(cfg["dist"]), rule, cfg["B"], cfg["alpha"],
                          cfg["n_sim"], cfg["seed"], strategy, cfg["psi"], cfg["K"], cfg["j_start"],
                          cfg["refined_centering"], cfg["workers"])
            res = rejection_probability_mc(mc)
            rows.append({"rule": token.strip().lower() if isinstance(rule, str) else f"fixed:{rule}",
                         "r_over_p": "NA" if frac is None else frac,
                         "rate": res.rate, "se": res.se,
                         "mean_runtime_s": res.mean_runtime_s if cfg["timings"] == "include" else "NA"})
            print(f"{rows[-1]['rule']:>10}  r/p={rows[-1]['r_over_p']}  rate={res.rate:.3f}  se={res.se:.3f}")
    out = cfg["out"] if not cfg["out"].endswith(".jsonl") else _sibling(cfg["out"], ".table.csv")
    header = _echo(cfg)
    io.write_table_csv(out, rows, ["rule", "r_over_p", "rate", "se", "mean_runtime_s"], header)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_bench(cfg: dict) -> int:
    Y, _ = _load_data(cfg)
    n, p = Y.shape
    cfg["m"] = m = _default_m(cfg)
    cfg["q"] = projected_dimension(m, n, p)
    rep = run_bench(Y, m, cfg["B"], cfg["seed"], mem_limit_bytes=int(cfg["mem_limit_mb"] * 1024**2))
    rows = rep.rows()
    if cfg["q_scan"]:
        slope = scaling_slope(Y, _ints(cfg["q_scan"]), max(cfg["B"], 1), cfg["seed"])
        rows.append({"phase": "loglog_slope_time_vs_q", "seconds": slope})
    header = _echo(cfg)
    io.write_records_jsonl(cfg["out"], {"config": header, "notes": rep.notes}, rows)
    for r in rows:
        print(f"{r['phase']:>28}  {r['seconds']:.6g}")
    for note in rep.notes:
        print(note)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "bootstrap": cmd_bootstrap, "test": cmd_test, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns.command, ns)
        return COMMANDS[ns.command](cfg)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, ContractError, ModelError, CapabilityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
