"""
Explicit upper bounds on the maximum information gain gamma_T.

Three layers, each dominating the previous one on matched inputs:

* ``mig_bound_general``: truncation at order M,
  ``N_M ln(1 + T/lam^2) + T / (|S^d| lam^2) * sum_{m>M} lambda_m N_{d+1,m}``,
  with the tail supplied by the caller or built from the eigendecay bounds.
* ``mig_bound_se`` / ``mig_bound_matern``: closed-form values obtained by
  choosing M explicitly and replacing N_M and the tail by their bounds.
* ``mig_bound_radius``: the same closed forms for a ball of radius eta,
  through the rescaling ell -> ell / eta.

All constants are assembled in log space and returned alongside the value so
they can be audited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import DomainError, InputError
from ..kernels import Family, KernelSpec
from .eigen import log_matern_c_tilde, log_se_eigen_bound
from .harmonics import harmonic_count, harmonic_dim, sphere_area

# default for the unnamed absolute constant added in the Matérn bound
DEFAULT_ABSOLUTE_C = 2.0

# explicit terms summed before the Matérn tail is closed by an integral bound
_MATERN_TAIL_TERMS = 2000


@dataclass(frozen=True)
class MigBound:
    """A bound value plus the ingredients used to build it."""

    name: str
    value: float
    M: int | None = None
    branch: str | None = None
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "M": self.M, "branch": self.branch, "constants": dict(self.constants)}


def _check_common(d: int, T: float, lam: float) -> None:
    if d < 1:
        raise InputError("d must be >= 1")
    if not (T > 0 and math.isfinite(T)):
        raise InputError(f"T must be positive, got {T}")
    if not (lam > 0 and math.isfinite(lam)):
        raise InputError(f"lambda must be positive, got {lam}")


def c_d(d: int) -> float:
    """c_d = max(1, exp((d/2 - 1) / e))."""
    return max(1.0, math.exp((0.5 * d - 1.0) / math.e))


# -- tails ---------------------------------------------------------------------


def se_tail(d: int, theta: float, M: int) -> float:
    """sum_{m>M} bound(lambda_m) N_{d+1,m} for SE, summed until terms vanish."""
    total = 0.0
    m = M + 1
    while True:
        term = math.exp(log_se_eigen_bound(d, theta, m) + math.log(harmonic_dim(d, m)))
        total += term
        if term <= 1e-17 * total or term == 0.0:
            return total
        m += 1


def matern_tail(d: int, nu: float, lengthscale: float, M: int) -> float:
    """sum_{m>M} bound(lambda_m) N_{d+1,m} for Matérn; needs M >= floor(2 nu).

    The first terms are summed exactly; the remainder beyond K uses
    N_{d+1,m} <= (d+1) e^(d-1) m^(d-1) and sum_{m>K} m^(-2nu-1) <= K^(-2nu) / (2nu).
    """
    if not nu > 0.5:
        raise DomainError(f"Matérn tail needs nu > 1/2, got {nu}")
    if not M + 1 > 2 * nu:
        raise DomainError(f"Matérn tail needs every m > M to exceed 2 nu; M={M} is too small")
    log_ct = log_matern_c_tilde(d, nu) - 2 * nu * math.log(lengthscale)
    K = M + _MATERN_TAIL_TERMS
    head = math.fsum(
        math.exp(log_ct - (2 * nu + d) * math.log(m) + math.log(harmonic_dim(d, m))) for m in range(M + 1, K + 1)
    )
    rest = (d + 1) * math.exp(d - 1 + log_ct) * K ** (-2 * nu) / (2 * nu)
    return head + rest


def analytic_tail(spec: KernelSpec, d: int, M: int) -> float:
    if spec.family is Family.SE:
        return se_tail(d, spec.theta, M)
    return matern_tail(d, spec.nu, spec.lengthscale, M)


def min_truncation(spec: KernelSpec) -> int:
    """Smallest M for which ``analytic_tail`` is defined."""
    if spec.family is Family.SE:
        return 0
    return int(math.floor(2 * spec.nu))


# -- general truncation bound ----------------------------------------------------


def mig_bound_general(d: int, T: float, lam: float, M: int, tail_sum: float) -> float:
    """N_M ln(1 + T/lam^2) + T / (|S^d| lam^2) * tail_sum."""
    _check_common(d, T, lam)
    if M < 0:
        raise InputError("M must be >= 0")
    if not (tail_sum >= 0 and math.isfinite(tail_sum)):
        raise InputError("tail_sum must be finite and nonnegative")
    lam2 = lam * lam
    return harmonic_count(d, M) * math.log1p(T / lam2) + T / (sphere_area(d) * lam2) * tail_sum


def best_general_bound(spec: KernelSpec, d: int, T: float, lam: float, candidates=None) -> MigBound:
    """Minimize ``mig_bound_general`` with the analytic tail over candidate M.

    By default the candidates run from the smallest admissible M until the
    bound has increased for 20 consecutive orders.
    """
    _check_common(d, T, lam)
    lo = min_truncation(spec)
    if candidates is not None:
        cands = [int(M) for M in candidates if int(M) >= lo]
        if not cands:
            raise DomainError(f"no candidate M >= {lo}")
        values = [(mig_bound_general(d, T, lam, M, analytic_tail(spec, d, M)), M) for M in cands]
        value, M = min(values)
    else:
        value, M = math.inf, lo
        M_try, since_best = lo, 0
        while since_best < 20:
            v = mig_bound_general(d, T, lam, M_try, analytic_tail(spec, d, M_try))
            if v < value:
                value, M, since_best = v, M_try, 0
            else:
                since_best += 1
            M_try += 1
    return MigBound("general", value, M, None, {"tail": analytic_tail(spec, d, M), "N_M": harmonic_count(d, M)})


# -- SE closed form --------------------------------------------------------------


def se_constant(d: int, theta: float) -> float:
    """C_{d,theta} = (2e)^((d+1)/2) Gamma((d+1)/2) / sqrt(pi) * exp(-2/theta + 1/theta^2)."""
    return math.exp(
        0.5 * (d + 1) * math.log(2 * math.e) + math.lgamma(0.5 * (d + 1)) - 0.5 * math.log(math.pi) - 2.0 / theta + 1.0 / theta**2
    )


def mig_bound_se(d: int, T: float, lam: float, theta: float) -> MigBound:
    """Closed-form SE bound on S^d.

    Small-width branch (theta <= e^2 c_d, needs T/(e-1) >= lam^2), with
    L = ln(1 + T/lam^2) and M = floor(e^2 c_d L / theta):

        [1 + (d+1) e^(d-1) (e^2 c_d L / theta)^d] L + e C_{d,theta} (d+1) e^(d-1)

    Large-width branch (theta > e^2 c_d), with M = ceil(L / ln(theta / (e c_d))):

        [1 + (d+1) e^(d-1) (L / ln(theta / (e c_d)) + 1)^d] L + C_{d,theta} (d+1) e^(d-1)
    """
    _check_common(d, T, lam)
    if not (theta > 0 and math.isfinite(theta)):
        raise InputError(f"theta must be positive, got {theta}")
    cd = c_d(d)
    L = math.log1p(T / lam**2)
    C = se_constant(d, theta)
    ed = (d + 1) * math.exp(d - 1)
    consts = {"c_d": cd, "C_d_theta": C, "log_term": L, "theta": theta}
    if theta <= math.e**2 * cd:
        if T / (math.e - 1.0) < lam**2:
            raise DomainError("small-theta SE branch needs T/(e-1) >= lambda^2")
        ratio = math.e**2 * cd / theta * L
        M = int(math.floor(ratio))
        value = (1.0 + ed * ratio**d) * L + math.e * C * ed
        return MigBound("se", value, M, "small-theta", consts)
    denom = math.log(theta / (math.e * cd))
    M = int(math.ceil(L / denom))
    value = (1.0 + ed * (L / denom + 1.0) ** d) * L + C * ed
    return MigBound("se", value, M, "large-theta", consts)


# -- Matérn closed form ----------------------------------------------------------


def matern_sup_constant(nu: float) -> float:
    """C_nu = sup_{z >= 1} z^(nu-1) e^(-z/2)."""
    a = nu - 1.0
    if a <= 0.5:
        return math.exp(-0.5)
    return math.exp(a * math.log(2 * a) - a)


def matern_log_factor(T: float, nu: float, lam: float) -> float:
    """C(T, nu, lam) = max{1, log2(1 + Gamma(nu)/C_nu * max(0, ln(T^2/lam^2)))
    + (1/nu) log2(T^2 / (nu Gamma(nu) lam^2)) + 1}."""
    g = math.gamma(nu)
    inner = 1.0 + g / matern_sup_constant(nu) * max(0.0, math.log(T * T / (lam * lam)))
    val = math.log2(inner) + math.log2(T * T / (nu * g * lam * lam)) / nu + 1.0
    return max(1.0, val)


def matern_bar_constants(d: int, nu: float) -> dict:
    """C-bar = (d+1) e^(d-1) C~ / |S^d| and C' = C-bar/(2nu) + (d+1) e^(d-1)."""
    ed = (d + 1) * math.exp(d - 1)
    c_tilde = math.exp(log_matern_c_tilde(d, nu))
    c_bar = ed * c_tilde / sphere_area(d)
    c_prime = c_bar / (2 * nu) + ed
    return {"C_tilde": c_tilde, "C_bar": c_bar, "C_prime": c_prime}


def mig_bound_matern(d: int, nu: float, lengthscale: float, T: float, lam: float, absolute_c: float = DEFAULT_ABSOLUTE_C) -> MigBound:
    """Closed-form Matérn bound on S^d.

    The effective noise lam^2/2 enters the truncated chain, evaluated at
    M = ceil(max{2nu, [T'/ell^(2nu) / ln(1 + T')]^(1/(2nu+d))}) with T' = 2T/lam^2:

        [1 + (d+1) e^(d-1) M^d] ln(1 + T') + C-bar T' ell^(-2nu) M^(-2nu) / (2nu),

    which is multiplied by C(T, nu, lam) and shifted by ``absolute_c``.  The
    constants also carry the two displayed summands of the smooth envelope
    gamma-bar (a log term and a T^(d/(2nu+d)) term) for scaling checks.
    """
    _check_common(d, T, lam)
    if not nu > 0.5:
        raise DomainError(f"the Matérn bound needs nu > 1/2, got {nu}")
    if not lengthscale > 0:
        raise InputError("lengthscale must be positive")
    Tp = 2.0 * T / lam**2
    L = math.log1p(Tp)
    scaled = Tp / lengthscale ** (2 * nu)
    cm = matern_bar_constants(d, nu)
    M = int(math.ceil(max(2 * nu, (scaled / L) ** (1.0 / (2 * nu + d)))))
    ed = (d + 1) * math.exp(d - 1)
    chain = (1.0 + ed * M**d) * L + cm["C_bar"] * scaled * M ** (-2 * nu) / (2 * nu)
    factor = matern_log_factor(T, nu, lam)
    exponent = d / (2 * nu + d)
    log_part = (cm["C_prime"] * (2 * nu) ** d + 1.0) * L
    poly_part = cm["C_prime"] * scaled**exponent * L ** (2 * nu / (2 * nu + d))
    consts = dict(cm)
    consts.update(
        {
            "C_T_nu_lambda": factor,
            "C_nu": matern_sup_constant(nu),
            "absolute_C": absolute_c,
            "chain": chain,
            "gamma_bar_log_term": log_part,
            "gamma_bar_poly_term": poly_part,
            "exponent": exponent,
        }
    )
    return MigBound("matern", factor * chain + absolute_c, M, None, consts)


def mig_bound_theorem(spec: KernelSpec, d: int, T: float, lam: float, absolute_c: float = DEFAULT_ABSOLUTE_C) -> MigBound:
    if spec.family is Family.SE:
        return mig_bound_se(d, T, lam, spec.theta)
    return mig_bound_matern(d, spec.nu, spec.lengthscale, T, lam, absolute_c)


def mig_bound_radius(spec: KernelSpec, d: int, T: float, lam: float, eta: float, absolute_c: float = DEFAULT_ABSOLUTE_C) -> MigBound:
    """Bound for inputs in a ball of radius eta via ell -> ell/eta.

    The SE case is only available when 2 ell^2 / eta^2 > e^2 c_d.
    """
    if not (eta > 0 and math.isfinite(eta)):
        raise InputError(f"eta must be positive, got {eta}")
    if spec.family is Family.SE:
        theta_eff = spec.theta / eta**2
        if not theta_eff > math.e**2 * c_d(d):
            raise DomainError(f"radius SE bound needs 2 ell^2 / eta^2 > e^2 c_d = {math.e**2 * c_d(d):.6g}, got {theta_eff:.6g}")
        out = mig_bound_se(d, T, lam, theta_eff)
    else:
        out = mig_bound_matern(d, spec.nu, spec.lengthscale / eta, T, lam, absolute_c)
    consts = dict(out.constants)
    consts["eta"] = eta
    return MigBound("radius", out.value, out.M, out.branch, consts)
