"""
Seeded policy comparisons on GP sample paths, with every regret diagnostic
evaluated per run and aggregated into pass fractions.

Seed ``base_seed + i`` drives both the sample path (``default_rng(seed)``)
and, through ``run_policy``, the observation noise (``default_rng([seed, 1])``).
All policies of one seed face the same path and the same noise stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConfigError, DomainError, LabError
from .kernels import KernelSpec
from .mig import greedy_mig, mig_bound_radius
from .policies import BetaSchedule, GpUcb, Mvr, RunRecord, run_policy
from .regret import (
    concentration_profile,
    decompose,
    dyadic_thresholds,
    epsilon_thresholds,
    eta_set_sizes,
    full_subset_check,
    lenient_cap,
    lenient_count,
    sigma_constant,
)
from .sampler import Grid, SamplePath, estimate_regularity, sample_prior

POLICY_NAMES = ("gp-ucb", "mvr")
GAMMA_SOURCES = ("analytic", "greedy")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a batch of runs.

    Defaults describe a one-dimensional Matérn-5/2 comparison of GP-UCB with
    MVR at noise variance 3 over 200 steps.
    """

    kernel: str = "matern"
    lengthscale: float = 0.1
    nu: float | None = 2.5
    d: int = 1
    r: float = 1.0
    points_per_dim: int = 256
    noise_variance: float = 3.0
    T: int = 200
    policies: tuple[str, ...] = POLICY_NAMES
    delta: float = 0.1
    a: float = 1.0
    b: float = 1.0
    seeds: int = 1
    base_seed: int = 0
    epsilon: float | str = "auto"
    gamma_source: str = "analytic"
    radius_fraction: float = 0.1
    jitter: float = 1e-8
    absolute_c: float = 2.0
    out_dir: str = "runs"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    # -- construction ----------------------------------------------------------

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        """Build from string or typed values, e.g. a parsed key=value file."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key '{key}'")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)

    def replace(self, **changes) -> "ExperimentConfig":
        data = asdict(self)
        data.update(changes)
        return ExperimentConfig(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["policies"] = list(self.policies)
        return out

    # -- derived objects -------------------------------------------------------

    @property
    def spec(self) -> KernelSpec:
        if self.kernel == "se":
            return KernelSpec.se(self.lengthscale)
        return KernelSpec.matern(self.nu, self.lengthscale)

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.r, self.points_per_dim)

    @property
    def schedule(self) -> BetaSchedule:
        return BetaSchedule(self.delta, self.d, self.a, self.b, self.r)

    @property
    def seed_list(self) -> list[int]:
        return [self.base_seed + i for i in range(self.seeds)]

    def validate(self) -> None:
        if self.kernel not in ("se", "matern"):
            raise ConfigError(f"kernel must be 'se' or 'matern', got {self.kernel!r}")
        if self.kernel == "se" and self.nu is not None:
            object.__setattr__(self, "nu", None)
        if self.kernel == "matern" and self.nu is None:
            raise ConfigError("the Matérn kernel needs nu")
        for name in ("lengthscale", "r", "noise_variance", "radius_fraction"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        for name in ("d", "points_per_dim", "T", "seeds", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.points_per_dim**self.d > 20_000:
            raise ConfigError("grid has more than 20000 points; coarsen points_per_dim")
        if self.jitter < 0:
            raise ConfigError("jitter must be nonnegative")
        if not self.policies or any(p not in POLICY_NAMES for p in self.policies):
            raise ConfigError(f"policies must be a nonempty subset of {POLICY_NAMES}, got {self.policies}")
        if self.gamma_source not in GAMMA_SOURCES:
            raise ConfigError(f"gamma_source must be one of {GAMMA_SOURCES}")
        if self.epsilon != "auto" and not (isinstance(self.epsilon, (int, float)) and self.epsilon > 0):
            raise ConfigError(f"epsilon must be 'auto' or a positive number, got {self.epsilon!r}")
        try:
            self.spec
            self.schedule
        except LabError as exc:
            raise ConfigError(str(exc)) from exc


_INT_KEYS = {"d", "points_per_dim", "T", "seeds", "base_seed", "workers"}
_FLOAT_KEYS = {"lengthscale", "r", "noise_variance", "delta", "a", "b", "radius_fraction", "jitter", "absolute_c"}


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return tuple(raw) if key == "policies" else raw
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "nu":
            return None if raw.lower() in ("", "none") else float(raw)
        if key == "epsilon":
            return "auto" if raw.lower() == "auto" else float(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key}={raw!r}") from exc
    if key == "policies":
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {n}: empty key")
        out[key] = value
    return out


# -- information-gain inputs for the caps ------------------------------------------


@dataclass(frozen=True)
class GammaModel:
    """gamma_t inputs for the caps, from the analytic bound or the greedy proxy.

    ``T_bar`` is the start of the range where gamma_bar(t)/t must be
    nonincreasing for the dyadic thresholds.
    """

    source: str
    gamma_T: float | None
    T_bar: int
    analytic_gamma_T: float | None
    greedy_gamma_T: float
    _bar: object = field(repr=False, compare=False, default=None)

    def gamma_bar(self, t: int) -> float:
        return self._bar(t)


def ball_radius(config: ExperimentConfig) -> float:
    """Radius of the smallest ball containing [0, r]^d."""
    return config.r * math.sqrt(config.d) / 2.0


def gamma_model(config: ExperimentConfig) -> GammaModel:
    spec = config.spec
    lam = math.sqrt(config.noise_variance)
    eta = ball_radius(config)
    greedy = greedy_mig(spec, config.grid.points, config.T, config.noise_variance)

    def analytic(t):
        return mig_bound_radius(spec, config.d, t, lam, eta, config.absolute_c)

    try:
        analytic_T = analytic(config.T).value
    except DomainError:
        analytic_T = None

    if config.gamma_source == "greedy":
        def bar(t):
            return greedy.upper_at(min(int(t), config.T))

        return GammaModel("greedy", greedy.upper, 1, analytic_T, greedy.upper, bar)

    if analytic_T is None:
        return GammaModel("analytic", None, 1, None, greedy.upper, None)
    if spec.nu is not None:
        T_bar = math.ceil(math.exp(2.0 + config.d / (2.0 * spec.nu)))

        def bar(t):
            c = analytic(t).constants
            return c["gamma_bar_log_term"] + c["gamma_bar_poly_term"]
    else:
        T_bar = 1

        def bar(t):
            return analytic(t).value

    return GammaModel("analytic", analytic_T, T_bar, analytic_T, greedy.upper, bar)


# -- per-seed work -------------------------------------------------------------------


@dataclass
class SeedResult:
    seed: int
    path: SamplePath
    runs: dict
    diagnostics: dict


def choose_epsilon(config: ExperimentConfig, path: SamplePath) -> tuple[float | None, dict]:
    """Explicit epsilon, or the regularity-based one when set to "auto".

    Grids with fewer than 3 points per axis have no regularity estimate; there
    "auto" yields None and the epsilon-dependent diagnostics are skipped.
    """
    explicit = None if config.epsilon == "auto" else float(config.epsilon)
    if config.points_per_dim < 3:
        return explicit, {"regularity": None, "thresholds": None, "epsilon": explicit, "epsilon_auto": None}
    report = estimate_regularity(path)
    th = epsilon_thresholds(report)
    eps = th.eps if explicit is None else explicit
    return eps, {"regularity": report.to_dict(), "thresholds": th.to_dict(), "epsilon": eps, "epsilon_auto": th.eps}


def run_diagnostics(config: ExperimentConfig, run: RunRecord, path: SamplePath, eps: float | None, gamma: GammaModel) -> dict:
    C = sigma_constant(config.noise_variance)
    beta_T = config.schedule(run.T)
    radii = [f * config.r for f in (0.05, config.radius_fraction, 0.2)]
    conc = concentration_profile(run, path, sorted(set(radii)))
    out = {
        "policy": run.policy,
        "info_gain": float(run.info_gain[-1]),
        "cum_regret": float(np.sum(run.inst_regret)),
        "concentration": conc.to_dict(),
        "near_fraction_last_half": conc.fraction_last_half[conc.radii.index(config.radius_fraction * config.r)],
        "decomposition": None,
    }
    if eps is not None:
        dec = decompose(run, eps)
        out["decomposition"] = {"eps": eps, "R1": dec.R1, "R2": dec.R2, "T_eps_size": int(dec.T_eps.size)}
    if isinstance(gamma.gamma_T, float):
        dy = dyadic_thresholds(run.T, beta_T, gamma.gamma_bar, gamma.T_bar, C)
        sizes = eta_set_sizes(run, dy.eta)
        out["dyadic"] = {
            "eta": dy.eta,
            "i_bar": dy.i_bar,
            "T_bar": dy.T_bar,
            "ratio_nonincreasing": dy.ratio_nonincreasing,
            "sizes": [s.size for s in sizes],
            "caps": [s.cap for s in sizes],
            "holds": [s.holds for s in sizes],
        }
    else:
        out["dyadic"] = None
    out["lenient"] = None
    if isinstance(gamma.gamma_T, float) and eps is not None:
        N = lenient_cap(eps, beta_T, gamma.gamma_T, C)
        count = lenient_count(run, eps)
        out["lenient"] = {"N": N, "count": count, "holds": count <= N, "gamma_T": gamma.gamma_T}
    if run.policy == "gp-ucb":
        chk = full_subset_check(run.inst_regret, float(run.info_gain[-1]), C, beta_T)
        out["subset"] = {"lhs": chk.lhs, "rhs": chk.rhs, "holds": chk.holds}
    else:
        out["subset"] = None
    return out


def make_policy(name: str, config: ExperimentConfig):
    return GpUcb(config.schedule) if name == "gp-ucb" else Mvr()


def run_seed(config: ExperimentConfig, seed: int, gamma: GammaModel) -> SeedResult:
    path = sample_prior(config.spec, config.grid, config.jitter, seed)
    eps, eps_info = choose_epsilon(config, path)
    runs = {}
    diags = {"seed": seed, "f_star": path.f_star, "x_star": path.x_star.tolist(), **eps_info, "runs": {}}
    for name in config.policies:
        run = run_policy(path, make_policy(name, config), config.noise_variance, config.T, seed)
        runs[name] = run
        diags["runs"][name] = run_diagnostics(config, run, path, eps, gamma)
    return SeedResult(seed, path, runs, diags)


# -- aggregation ---------------------------------------------------------------------


def growth_ratios(cum_regret: np.ndarray) -> dict:
    """(R_2t - R_t) / R_t for t = T//2, T//4, ..., 1, keyed by t (skipping R_t = 0)."""
    out = {}
    t = len(cum_regret) // 2
    while t >= 1:
        if cum_regret[t - 1] > 0:
            out[t] = float((cum_regret[2 * t - 1] - cum_regret[t - 1]) / cum_regret[t - 1])
        t //= 2
    return dict(sorted(out.items()))


def _fraction(flags) -> float | None:
    flags = [bool(f) for f in flags]
    return float(np.mean(flags)) if flags else None


def summarize(config: ExperimentConfig, results: list[SeedResult], gamma: GammaModel) -> dict:
    t = np.arange(1, config.T + 1)
    summary = {
        "config": config.to_dict(),
        "gamma": {
            "source": gamma.source,
            "gamma_T": gamma.gamma_T,
            "analytic_gamma_T": gamma.analytic_gamma_T,
            "greedy_gamma_T": gamma.greedy_gamma_T,
            "T_bar": gamma.T_bar,
        },
        "reference_info_gain": (0.5 * np.log1p(t / config.noise_variance)).tolist(),
        "seeds": [r.diagnostics for r in results],
        "policies": {},
    }
    for name in config.policies:
        diags = [r.diagnostics["runs"][name] for r in results]
        cum = np.mean([np.cumsum(r.runs[name].inst_regret) for r in results], axis=0)
        info = np.mean([r.runs[name].info_gain for r in results], axis=0)
        pass_fractions = {
            "lenient": _fraction(d["lenient"]["holds"] for d in diags if d["lenient"] is not None),
            "eta_caps": _fraction(h for d in diags if d["dyadic"] is not None for h in d["dyadic"]["holds"]),
            "subset": _fraction(d["subset"]["holds"] for d in diags if d["subset"] is not None),
        }
        summary["policies"][name] = {
            "mean_cum_regret": cum.tolist(),
            "mean_info_gain": info.tolist(),
            "growth_ratios": {str(k): v for k, v in growth_ratios(cum).items()},
            "pass_fractions": pass_fractions,
        }
    if {"gp-ucb", "mvr"} <= set(config.policies):
        ucb = [r.diagnostics["runs"]["gp-ucb"] for r in results]
        mvr = [r.diagnostics["runs"]["mvr"] for r in results]
        summary["comparison"] = {
            "info_gain_ucb_below_mvr": _fraction(u["info_gain"] < m["info_gain"] for u, m in zip(ucb, mvr)),
            "concentration_ucb_above_mvr": _fraction(
                u["near_fraction_last_half"] > m["near_fraction_last_half"] for u, m in zip(ucb, mvr)
            ),
        }
    return summary


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    gamma: GammaModel
    results: list
    summary: dict


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every seed (optionally on worker threads) and aggregate."""
    gamma = gamma_model(config)
    seeds = config.seed_list
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda s: run_seed(config, s, gamma), seeds))
    else:
        results = [run_seed(config, s, gamma) for s in seeds]
    return ExperimentResult(config, gamma, results, summarize(config, results, gamma))


def run_metadata(config: ExperimentConfig, result: SeedResult, policy: str, gamma: GammaModel) -> dict:
    """Metadata line stored with each run table; enough to rerun the diagnostics."""
    spec = config.spec
    return {
        "kernel": spec.family.value,
        "lengthscale": spec.lengthscale,
        "nu": spec.nu,
        "noise_variance": config.noise_variance,
        "policy": policy,
        "seed": result.seed,
        "d": config.d,
        "r": config.r,
        "points_per_dim": config.points_per_dim,
        "delta": config.delta,
        "a": config.a,
        "b": config.b,
        "jitter": config.jitter,
        "absolute_c": config.absolute_c,
        "gamma_source": gamma.source,
        "gamma_T": gamma.gamma_T,
        "epsilon_auto": result.diagnostics["epsilon_auto"],
    }
