"""
Command-line entry point ``gpucb-lab``.

Subcommands
-----------
simulate   run policies on sampled paths, write run tables and summary.json
mig        evaluate information-gain bounds as JSON
eigen      tabulate sphere eigenvalues and their decay bounds as CSV
decompose  regret decomposition and dyadic diagnostics for one run table

Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import SCHEMA_LINE, format_float, read_run_csv, write_json, write_run_csv
from .errors import ConfigError, DomainError, LabError, NumericError
from .experiment import ExperimentConfig, gamma_model, parse_config_text, run_experiment, run_metadata
from .kernels import KernelSpec
from .mig import best_general_bound, eigen_table, greedy_mig, mig_bound_radius, mig_bound_theorem
from .regret import (
    decompose,
    dyadic_thresholds,
    eta_set_sizes,
    full_subset_check,
    lenient_cap,
    lenient_count,
    sigma_constant,
)

OUT_DIR_ENV = "GPUCB_LAB_OUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# flag name -> config key for simulate
_SIM_FLAGS = {
    "kernel": str,
    "lengthscale": float,
    "nu": float,
    "d": int,
    "r": float,
    "points_per_dim": int,
    "noise_variance": float,
    "T": int,
    "policies": str,
    "delta": float,
    "a": float,
    "b": float,
    "seeds": int,
    "base_seed": int,
    "epsilon": str,
    "gamma_source": str,
    "radius_fraction": float,
    "jitter": float,
    "absolute_c": float,
    "out_dir": str,
    "workers": int,
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=("se", "matern"), required=True)
    p.add_argument("--lengthscale", type=float, help="ell (SE also accepts --theta = 2 ell^2)")
    p.add_argument("--theta", type=float, help="SE width theta = 2 ell^2")
    p.add_argument("--nu", type=float, help="Matérn smoothness")
    p.add_argument("--d", type=int, required=True, help="sphere S^d / ball dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpucb-lab", description="GP-UCB regret and information-gain laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run policies on sampled GP paths")
    sim.add_argument("--config", type=Path, help="key=value config file; flags override it")
    for name, typ in _SIM_FLAGS.items():
        sim.add_argument(_flag(name), dest=name, type=typ, default=None)

    mig = sub.add_parser("mig", help="evaluate information-gain bounds")
    _add_kernel_flags(mig)
    mig.add_argument("--T", type=int, required=True)
    mig.add_argument("--lam", type=float, default=1.0, help="noise scale lambda (lambda^2 plays the noise variance)")
    mig.add_argument("--eta", type=float, help="ball radius for the radius bound")
    mig.add_argument("--M", type=int, nargs="*", help="candidate truncation orders (default: search)")
    mig.add_argument("--points", type=Path, help="whitespace-separated point file for the greedy interval")
    mig.add_argument("--absolute-c", type=float, default=2.0)
    mig.add_argument("--output", type=Path)

    eig = sub.add_parser("eigen", help="tabulate eigenvalues on S^d")
    _add_kernel_flags(eig)
    eig.add_argument("--m-max", type=int, required=True)
    eig.add_argument("--output", type=Path)

    dec = sub.add_parser("decompose", help="regret decomposition of one run table")
    dec.add_argument("csv", type=Path)
    dec.add_argument("--epsilon", default="auto", help="positive number or 'auto' (use the value stored with the run)")
    dec.add_argument("--output", type=Path)
    return parser


# -- helpers ---------------------------------------------------------------------


def _spec_from_args(args) -> KernelSpec:
    if args.kernel == "se":
        if args.nu is not None:
            raise ConfigError("--nu is only used with --kernel matern")
        if args.theta is not None and args.lengthscale is not None:
            if not math.isclose(args.theta, 2 * args.lengthscale**2, rel_tol=1e-12):
                raise ConfigError("--theta and --lengthscale disagree (theta = 2 ell^2)")
        if args.theta is not None:
            if not args.theta > 0:
                raise ConfigError("--theta must be positive")
            return KernelSpec.se(math.sqrt(args.theta / 2.0))
        return KernelSpec.se(args.lengthscale if args.lengthscale is not None else 1.0)
    if args.theta is not None:
        raise ConfigError("--theta is only used with --kernel se")
    if args.nu is None:
        raise ConfigError("--kernel matern needs --nu")
    return KernelSpec.matern(args.nu, args.lengthscale if args.lengthscale is not None else 1.0)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _json_text(payload: dict) -> str:
    buf = io.StringIO()
    json.dump(payload, buf, sort_keys=True, indent=2, allow_nan=True)
    return buf.getvalue() + "\n"


def _guarded(fn):
    try:
        return fn(), "ok", None
    except DomainError as exc:
        return None, "condition unmet", str(exc)


# -- simulate --------------------------------------------------------------------


def load_config(args) -> ExperimentConfig:
    values: dict = {}
    if args.config is not None:
        try:
            values.update(parse_config_text(args.config.read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    env_dir = os.environ.get(OUT_DIR_ENV)
    if env_dir:
        values["out_dir"] = env_dir
    for name in _SIM_FLAGS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    return ExperimentConfig.from_mapping(values)


def _write_path_csv(path: Path, sample) -> None:
    grid = sample.grid
    with path.open("w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + [f"x{j}" for j in range(1, grid.d + 1)] + ["f"])
        for i, (x, f) in enumerate(zip(grid.points, sample.values)):
            w.writerow([str(i)] + [format_float(v) for v in x] + [format_float(f)])


def cmd_simulate(args) -> int:
    config = load_config(args)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_experiment(config)
    for seed_result in result.results:
        _write_path_csv(out / f"path_seed{seed_result.seed}.csv", seed_result.path)
        for policy, run in seed_result.runs.items():
            meta = run_metadata(config, seed_result, policy, result.gamma)
            write_run_csv(out / f"run_{policy}_seed{seed_result.seed}.csv", run, meta)
    write_json(out / "summary.json", result.summary)
    print(out / "summary.json")
    return EXIT_OK


# -- mig -------------------------------------------------------------------------


def cmd_mig(args) -> int:
    spec = _spec_from_args(args)
    d, T, lam = args.d, args.T, args.lam
    if T < 1 or not lam > 0 or d < 1:
        raise ConfigError("need --T >= 1, --lam > 0 and --d >= 1")
    payload: dict = {"kernel": spec.to_dict(), "d": d, "T": T, "lambda": lam, "bounds": {}}
    if spec.nu is not None:
        payload["exponent"] = d / (2 * spec.nu + d)

    value, status, reason = _guarded(lambda: mig_bound_theorem(spec, d, T, lam, args.absolute_c))
    payload["bounds"]["theorem"] = {"status": status, "reason": reason, **(value.to_dict() if value else {})}

    def general():
        if args.M:
            return best_general_bound(spec, d, T, lam, candidates=args.M)
        return best_general_bound(spec, d, T, lam)

    value, status, reason = _guarded(general)
    payload["bounds"]["general"] = {"status": status, "reason": reason, **(value.to_dict() if value else {})}

    if args.eta is not None:
        value, status, reason = _guarded(lambda: mig_bound_radius(spec, d, T, lam, args.eta, args.absolute_c))
        payload["bounds"]["radius"] = {"status": status, "reason": reason, **(value.to_dict() if value else {})}

    if args.points is not None:
        try:
            pts = np.loadtxt(args.points, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read point file: {exc}") from exc
        g = greedy_mig(spec, pts, T, lam * lam)
        payload["greedy"] = {"info_gain": g.info_gain, "interval": [g.lower, g.upper], "indices": list(g.indices)}
    _emit(_json_text(payload), args.output)
    return EXIT_OK


# -- eigen -----------------------------------------------------------------------


def cmd_eigen(args) -> int:
    spec = _spec_from_args(args)
    if args.m_max < 0:
        raise ConfigError("--m-max must be >= 0")
    rows = eigen_table(spec, args.d, args.m_max)
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "lambda_quadrature", "lambda_bound", "bound_valid", "N_dim"])
    for row in rows:
        w.writerow([row.m, format_float(row.lambda_quadrature), format_float(row.lambda_bound), str(row.bound_valid).lower(), row.n_dim])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# -- decompose -------------------------------------------------------------------


def _meta_config(meta: dict, T: int) -> ExperimentConfig:
    """Rebuild the experiment settings recorded in a run table's metadata."""
    keys = ("kernel", "lengthscale", "nu", "d", "r", "points_per_dim", "noise_variance", "delta", "a", "b", "jitter", "absolute_c", "gamma_source")
    missing = [k for k in keys if k not in meta]
    if missing:
        raise ConfigError(f"run metadata lacks {missing}")
    return ExperimentConfig.from_mapping({**{k: meta[k] for k in keys}, "T": T})


def decompose_table(table, eps_arg: str = "auto") -> dict:
    meta = table.metadata
    if str(eps_arg).lower() == "auto":
        eps = meta.get("epsilon_auto")
        if eps is None:
            raise ConfigError("--epsilon auto needs 'epsilon_auto' in the run metadata; pass a number")
    else:
        try:
            eps = float(eps_arg)
        except ValueError as exc:
            raise ConfigError(f"--epsilon must be a number or 'auto', got {eps_arg!r}") from exc
    if not eps > 0:
        raise ConfigError("epsilon must be positive")
    gaps = table["inst_regret"]
    T = table.T
    dec = decompose(gaps, eps)
    out = {
        "T": T,
        "epsilon": eps,
        "R1": dec.R1,
        "R2": dec.R2,
        "total": dec.total,
        "T_eps": dec.T_eps.tolist(),
    }
    noise = meta.get("noise_variance")
    beta_T = float(table["beta"][-1])
    if noise is None:
        out["diagnostics"] = None
        return out
    C = sigma_constant(float(noise))
    if not math.isfinite(beta_T):
        # MVR tables carry no beta; use the schedule the run would have used
        beta_T = _meta_config(meta, T).schedule(T)
    gamma_T = meta.get("gamma_T")
    diag: dict = {"C": C, "beta_T": beta_T, "gamma_T": gamma_T}
    if gamma_T is not None and math.isfinite(beta_T):
        gamma = gamma_model(_meta_config(meta, T))
        dy = dyadic_thresholds(T, beta_T, gamma.gamma_bar, gamma.T_bar, C)
        sizes = eta_set_sizes(gaps, dy.eta)
        N = lenient_cap(eps, beta_T, float(gamma_T), C)
        count = lenient_count(gaps, eps)
        diag["dyadic"] = {
            "eta": dy.eta,
            "i_bar": dy.i_bar,
            "T_bar": dy.T_bar,
            "ratio_nonincreasing": dy.ratio_nonincreasing,
            "sizes": [s.size for s in sizes],
            "caps": [s.cap for s in sizes],
            "holds": [s.holds for s in sizes],
        }
        diag["lenient"] = {"N": N, "count": count, "holds": count <= N}
    if meta.get("policy") == "gp-ucb" and math.isfinite(beta_T):
        chk = full_subset_check(gaps, float(table["info_gain"][-1]), C, beta_T)
        diag["subset"] = {"lhs": chk.lhs, "rhs": chk.rhs, "holds": chk.holds}
    holds = []
    if "dyadic" in diag:
        holds += diag["dyadic"]["holds"]
    for key in ("lenient", "subset"):
        if key in diag:
            holds.append(diag[key]["holds"])
    diag["pass_fraction"] = float(np.mean(holds)) if holds else None
    out["diagnostics"] = diag
    return out


def cmd_decompose(args) -> int:
    if not args.csv.exists():
        raise ConfigError(f"no such file: {args.csv}")
    table = read_run_csv(args.csv)
    _emit(_json_text(decompose_table(table, args.epsilon)), args.output)
    return EXIT_OK


_COMMANDS = {"simulate": cmd_simulate, "mig": cmd_mig, "eigen": cmd_eigen, "decompose": cmd_decompose}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except NumericError as exc:
        print(f"gpucb-lab: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LabError as exc:
        print(f"gpucb-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
