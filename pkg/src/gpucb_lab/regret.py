"""
Post-hoc regret accounting over a finished ``RunRecord``.

The high-probability statements (dyadic set-size caps, lenient-regret count,
subset regret bound) are evaluated as per-run booleans and reported, never
asserted: a single run may legitimately violate a 1 - delta statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .gp import information_gain
from .policies import RunRecord
from .sampler import RegularityReport, SamplePath

PI2_6 = math.pi**2 / 6.0


def sigma_constant(noise_variance: float) -> float:
    """C = 2 / ln(1 + 1/s2), the constant in the sum-of-sigma inequality."""
    return 2.0 / math.log1p(1.0 / noise_variance)


def cumulative_regret(run: RunRecord) -> np.ndarray:
    return np.cumsum(run.inst_regret)


def _gaps(run_or_gaps) -> np.ndarray:
    if isinstance(run_or_gaps, RunRecord):
        return np.asarray(run_or_gaps.inst_regret, dtype=float)
    return np.asarray(run_or_gaps, dtype=float)


def exceedance_set(gaps, eps: float) -> np.ndarray:
    """1-based steps t with gap_t > eps (strict)."""
    return np.flatnonzero(_gaps(gaps) > eps) + 1


@dataclass(frozen=True)
class Decomposition:
    eps: float
    R1: float
    R2: float
    T_eps: np.ndarray

    @property
    def total(self) -> float:
        return self.R1 + self.R2


def decompose(run_or_gaps, eps: float) -> Decomposition:
    """Split cumulative regret into steps with gap > eps (R1) and the rest (R2)."""
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    g = _gaps(run_or_gaps)
    mask = g > eps
    return Decomposition(eps, math.fsum(g[mask]), math.fsum(g[~mask]), np.flatnonzero(mask) + 1)


@dataclass(frozen=True)
class DyadicThresholds:
    eta: list[float]
    i_bar: int
    T_bar: int
    horizons: list[float]
    ratio_nonincreasing: bool


def dyadic_thresholds(T: int, beta_T: float, gamma_bar, T_bar: int, C: float) -> DyadicThresholds:
    """eta_i = 2 (2 sqrt(C beta_T T_i gbar(T_i)) + pi^2/6) / T_i, T_i = T / 2^(i-1).

    ``gamma_bar`` is called on integers; fractional horizons are rounded up.
    ``ratio_nonincreasing`` reports whether ``gbar(t)/t`` is nonincreasing
    across the horizons used, which is what makes the eta sequence monotone.
    """
    if T_bar < 1:
        raise InputError("T_bar must be >= 1")
    if T < T_bar:
        return DyadicThresholds([], 0, T_bar, [], True)
    i_bar = int(math.floor(math.log2(T / T_bar))) + 1
    # guard against log2 rounding at exact powers of two
    while T / 2 ** (i_bar - 1) < T_bar:
        i_bar -= 1
    while T / 2**i_bar >= T_bar:
        i_bar += 1
    horizons = [T / 2 ** (i - 1) for i in range(1, i_bar + 1)]
    eta = []
    ratios = []
    for Ti in horizons:
        g = float(gamma_bar(math.ceil(Ti)))
        ratios.append(g / math.ceil(Ti))
        eta.append(2.0 * (2.0 * math.sqrt(C * beta_T * Ti * g) + PI2_6) / Ti)
    # horizons shrink along the list, so the ratio may only grow
    ok = all(small >= big * (1 - 1e-12) for big, small in zip(ratios, ratios[1:]))
    return DyadicThresholds(eta, i_bar, T_bar, horizons, ok)


@dataclass(frozen=True)
class EtaSetSize:
    i: int
    eta: float
    size: int
    cap: float
    holds: bool


def eta_set_sizes(run_or_gaps, eta) -> list[EtaSetSize]:
    """|T(eta_i)| against the dyadic cap T / 2^i, reported per i."""
    g = _gaps(run_or_gaps)
    T = len(g)
    out = []
    for i, e in enumerate(eta, start=1):
        size = int(np.count_nonzero(g > e))
        cap = T / 2**i
        out.append(EtaSetSize(i, float(e), size, cap, size <= cap))
    return out


def lenient_cap(eps: float, beta_T: float, gamma_T: float, C: float) -> float:
    """N(eps) = 16 C beta_T gamma_T / eps^2."""
    if not (eps > 0 and beta_T > 0 and gamma_T > 0 and C > 0):
        raise InputError("lenient_cap needs positive eps, beta_T, gamma_T and C")
    return 16.0 * C * beta_T * gamma_T / eps**2


def lenient_count(run_or_gaps, eps: float) -> int:
    """|T(eps) ∩ {t >= sqrt(2/eps)}|."""
    g = _gaps(run_or_gaps)
    t = np.arange(1, len(g) + 1)
    return int(np.count_nonzero((g > eps) & (t >= math.sqrt(2.0 / eps))))


@dataclass(frozen=True)
class SubsetCheck:
    lhs: float
    rhs: float
    holds: bool
    info_gain: float


def subset_regret_check(run: RunRecord, subset, C: float, beta_T: float) -> SubsetCheck:
    """Compare sum of gaps over ``subset`` (1-based steps) with
    ``2 sqrt(C beta_T |S| I(X_S)) + pi^2/6``; I is recomputed on the subset's
    inputs in step order."""
    steps = np.asarray(sorted(set(int(s) for s in subset)), dtype=int)
    if steps.size == 0:
        return SubsetCheck(0.0, PI2_6, True, 0.0)
    if steps[0] < 1 or steps[-1] > run.T:
        raise InputError(f"subset must lie in 1..{run.T}")
    lhs = math.fsum(run.inst_regret[steps - 1])
    if steps.size == run.T:
        info = float(run.info_gain[-1])
    else:
        info = information_gain(run.spec, run.x[steps - 1], run.noise_variance)
    rhs = 2.0 * math.sqrt(C * beta_T * steps.size * info) + PI2_6
    return SubsetCheck(lhs, rhs, lhs <= rhs, info)


def full_subset_check(gaps, info_gain_T: float, C: float, beta_T: float) -> SubsetCheck:
    """Subset check on the full index set from the columns of a run table."""
    g = _gaps(gaps)
    lhs = math.fsum(g)
    rhs = 2.0 * math.sqrt(C * beta_T * len(g) * info_gain_T) + PI2_6
    return SubsetCheck(lhs, rhs, lhs <= rhs, info_gain_T)


@dataclass(frozen=True)
class ConcentrationProfile:
    radii: list[float]
    fraction_all: list[float]
    fraction_last_half: list[float]
    bin_edges: list[float]
    histogram: list[list[int]]

    def to_dict(self) -> dict:
        return {
            "radii": self.radii,
            "fraction_all": self.fraction_all,
            "fraction_last_half": self.fraction_last_half,
            "bin_edges": self.bin_edges,
            "histogram": self.histogram,
        }


def concentration_profile(run: RunRecord, path: SamplePath, radii, bins: int = 20) -> ConcentrationProfile:
    """Share of queries within each radius of x*, overall and over the last
    ``T - T//2`` steps, plus per-coordinate fixed-width histograms on [0, r]."""
    radii = [float(r) for r in radii]
    if any(not r > 0 for r in radii):
        raise InputError("radii must be positive")
    x_star = path.x_star
    dist = np.linalg.norm(run.x - x_star, axis=1)
    late = dist[run.T // 2 :]
    frac_all = [float(np.mean(dist <= r)) for r in radii]
    frac_late = [float(np.mean(late <= r)) for r in radii]
    edges = np.linspace(0.0, path.grid.r, bins + 1)
    hist = [np.histogram(run.x[:, j], bins=edges)[0].astype(int).tolist() for j in range(run.x.shape[1])]
    return ConcentrationProfile(radii, frac_all, frac_late, edges.tolist(), hist)


@dataclass(frozen=True)
class EpsilonThresholds:
    eps1: float
    eps2: float
    eps: float

    def to_dict(self) -> dict:
        return {"eps1": self.eps1, "eps2": self.eps2, "eps": self.eps}


def epsilon_thresholds(report: RegularityReport) -> EpsilonThresholds:
    """eps1 = min(c_gap, c_lin rho_lin), eps2 = min(c_gap, c_quad rho_quad^2), eps = min.

    A missing fit contributes ``inf`` to its arm, so ``eps`` falls back on the
    other arm; with ``c_gap = inf`` the growth fit alone decides.
    """
    lin = report.c_lin * report.rho_lin if report.c_lin is not None else math.inf
    quad = report.c_quad * report.rho_quad**2 if report.c_quad is not None else math.inf
    eps1 = min(report.c_gap, lin)
    eps2 = min(report.c_gap, quad)
    return EpsilonThresholds(eps1, eps2, min(eps1, eps2))


def neighbourhood_violations(path: SamplePath, report: RegularityReport, eps: float | None = None) -> int:
    """Grid points with gap <= eps lying outside the fitted ball around x*.

    ``eps`` defaults to the threshold from ``epsilon_thresholds``.
    """
    th = epsilon_thresholds(report)
    if eps is None:
        eps = th.eps
    rho = report.rho_quad if report.rho_quad is not None else report.rho_lin
    gap = path.f_star - path.values
    dist = np.linalg.norm(path.grid.points - path.x_star, axis=1)
    return int(np.count_nonzero((gap <= eps) & (dist > rho)))
