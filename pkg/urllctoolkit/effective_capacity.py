"""Effective capacity: stochastic form, Nakagami series form and the Rayleigh J-kernel form."""
import enum
import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np

from .channel import expect
from .errors import ConvergenceWarning, DomainError
from .fbl_rate import dispersion_coefficient, expected_rate, rate
from .math_kernels import (LOG2E, KernelValue, dispersion_power_integral, power_breakpoints,
                           power_exp_integral)

# β above which the quadratic expansion of e^{βγ} behind the J kernel stops tracking ψ
CLOSED_FORM_BETA_MAX = 2.0


class EcMethod(str, enum.Enum):
    STOCHASTIC = 'stochastic'
    LEMMA1 = 'lemma1'
    THEOREM1 = 'theorem1'
    SHANNON = 'shannon'


@dataclass(frozen=True)
class QoSConstraints:
    """Statistical delay requirements.

    Args:
        theta (float): Delay exponent per symbol (≥ 0).
        delta (float, optional): Delay bound in symbol periods. Defaults to 500.
        violation (float, optional): Delay-violation probability Λ. Defaults to 1e-2.
        epsilon_t (float, optional): Target packet error probability. Defaults to 0.5 (inactive).
    """
    theta: float
    delta: float = 500.0
    violation: float = 1e-2
    epsilon_t: float = 0.5

    def __post_init__(self):
        if not self.theta >= 0:
            raise DomainError(f'Delay exponent must be non-negative, got {self.theta}')
        if not self.delta > 0:
            raise DomainError(f'Delay bound must be positive, got {self.delta}')
        if not 0 < self.violation < 1:
            raise DomainError(f'Violation probability must lie in (0, 1), got {self.violation}')
        if not 0 < self.epsilon_t <= 0.5:
            raise DomainError(f'Target error must lie in (0, 0.5], got {self.epsilon_t}')


@dataclass(frozen=True)
class ClosedFormTerms:
    alpha: float
    beta: float
    taylor_terms: int = 3

    def __post_init__(self):
        if int(self.taylor_terms) < 1:
            raise DomainError('At least one Taylor term is required')

    @classmethod
    def from_params(cls, p, q, taylor_terms=3):
        """α = -θn/ln 2 and β = θ√n Q⁻¹(ε) log₂(e) for a link and QoS pair."""
        alpha = -q.theta * p.n * LOG2E
        beta = q.theta * p.n * float(dispersion_coefficient(p.n, p.epsilon))
        return cls(alpha=float(alpha), beta=float(beta), taylor_terms=int(taylor_terms))

    @property
    def kappas(self):
        """(κ₁, κ₂) = (β²/2 + β + 1, β²/2 + β)."""
        half_sq = 0.5 * self.beta ** 2
        return half_sq + self.beta + 1.0, half_sq + self.beta


@dataclass(frozen=True)
class EcResult:
    ec: float
    psi: float
    method: EcMethod
    est_error: float = 0.0

    def __str__(self):
        return f'EC={self.ec:.6g} bpcu (psi={self.psi:.6g}, {self.method.value})'


def ec_from_psi(psi, n, theta):
    """C_e = -ln(ψ)/(nθ)."""
    return float(-np.log(psi) / (n * theta))


def _psi_kernel(p, q, cfg=None, model=None, task=0):
    if p.epsilon >= 1 or p.rho == 0 or q.theta == 0:
        return KernelValue(1.0)
    model = model or p.fading
    t = p.n * q.theta
    eps = p.epsilon

    def g(z):
        return eps + (1.0 - eps) * np.exp(-t * rate(p, z))

    return expect(model, g, cfg, power_breakpoints(p.rho, t * LOG2E, model.m), task)


def psi_stochastic(p, q, cfg=None, model=None, task=0):
    """ψ = E_Z[ε + (1-ε) e^{-nθ r}] with the raw rate.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        float: ψ (> 0).
    """
    return _psi_kernel(p, q, cfg, model, task).value


def _theta_zero_limit(p, method, cfg=None, model=None, task=0):
    mean = expected_rate(p, model, cfg, task=task)
    return EcResult((1.0 - p.epsilon) * mean.value, 1.0, method, mean.est_error)


def ec_stochastic(p, q, cfg=None, model=None, task=0):
    """Effective capacity C_e = -ln(ψ)/(nθ). θ = 0 returns the limit (1-ε)E[r].

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        EcResult: EC in bpcu.
    """
    if q.theta == 0:
        return _theta_zero_limit(p, EcMethod.STOCHASTIC, cfg, model, task)
    if p.rho == 0 or p.epsilon >= 1:
        return EcResult(0.0, 1.0, EcMethod.STOCHASTIC)
    psi = _psi_kernel(p, q, cfg, model, task)
    t = p.n * q.theta
    return EcResult(ec_from_psi(psi.value, p.n, q.theta), psi.value, EcMethod.STOCHASTIC,
                    psi.est_error / (psi.value * t))


def psi_lemma1(p, q, terms=None, cfg=None):
    """ψ with e^{βγ} replaced by its Taylor series truncated at terms.taylor_terms.

    ψ ≈ ε + (1-ε) Σ_k β^k/k! E[(1+ρZ)^α γ^k].

    Args:
        p (LinkParams): Link parameters (any m).
        q (QoSConstraints): QoS constraints.
        terms (ClosedFormTerms, optional): α, β and truncation. Defaults to 3 terms.
        cfg (EvalConfig, optional): Only the quadrature tolerances are used.

    Returns:
        KernelValue: Approximate ψ.
    """
    terms = terms or ClosedFormTerms.from_params(p, q)
    quad = cfg.quad if cfg is not None else None
    if p.rho == 0 or p.epsilon >= 1:
        return KernelValue(1.0)
    inner, err = 0.0, 0.0
    for k in range(int(terms.taylor_terms)):
        coef = terms.beta ** k / factorial(k)
        if coef == 0:
            continue
        kv = dispersion_power_integral(terms.alpha, k, p.rho, p.m, quad)
        inner += coef * kv.value
        err += abs(coef) * kv.est_error
    eps = p.epsilon
    return KernelValue(eps + (1.0 - eps) * inner, (1.0 - eps) * err)


def ec_lemma1(p, q, terms=None, cfg=None):
    """Nakagami-m EC from the truncated-series ψ.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        terms (ClosedFormTerms, optional): Truncation. Defaults to 3 Taylor terms.
        cfg (EvalConfig, optional): Quadrature tolerances. Defaults to None.

    Returns:
        EcResult: EC in bpcu.
    """
    if q.theta == 0:
        return _theta_zero_limit(p, EcMethod.LEMMA1, cfg)
    psi = psi_lemma1(p, q, terms, cfg)
    t = p.n * q.theta
    return EcResult(ec_from_psi(psi.value, p.n, q.theta), psi.value, EcMethod.LEMMA1,
                    psi.est_error / (psi.value * t))


def _require_rayleigh(p):
    if p.m != 1:
        raise DomainError(f'The J kernel is defined for Rayleigh fading (m = 1), got m={p.m}')


def j_kernel(p, q, cfg=None):
    """J = κ₁ I(α) - κ₂ I(α-2) with I(b) = E[(1+ρZ)^b].

    Equivalently J = E[(1+ρZ)^α (1 + (β + β²/2) γ²)], which never exceeds E[(1+ρZ)^α e^{βγ}].

    Args:
        p (LinkParams): Link parameters, m = 1.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Quadrature tolerances. Defaults to None.

    Raises:
        DomainError: m ≠ 1.

    Returns:
        float: J.
    """
    _require_rayleigh(p)
    terms = ClosedFormTerms.from_params(p, q)
    quad = cfg.quad if cfg is not None else None
    k1, k2 = terms.kappas
    out = k1 * power_exp_integral(terms.alpha, p.rho, 1.0, quad).value
    if k2:
        out -= k2 * power_exp_integral(terms.alpha - 2.0, p.rho, 1.0, quad).value
    return float(out)


def _integral_drho(b, rho, quad):
    # dI(b)/dρ = b E[Z (1+ρZ)^{b-1}] = (b/ρ)(I(b) - I(b-1))
    if b == 0:
        return 0.0
    return b / rho * (power_exp_integral(b, rho, 1.0, quad).value
                      - power_exp_integral(b - 1.0, rho, 1.0, quad).value)


def j_kernel_drho(p, q, cfg=None):
    """dJ/dρ assembled from derivatives of the stable I(b) kernels.

    Args:
        p (LinkParams): Link parameters, m = 1 and ρ > 0.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Quadrature tolerances. Defaults to None.

    Returns:
        float: J'(ρ).
    """
    _require_rayleigh(p)
    if not p.rho > 0:
        raise DomainError('dJ/dρ needs ρ > 0')
    terms = ClosedFormTerms.from_params(p, q)
    quad = cfg.quad if cfg is not None else None
    k1, k2 = terms.kappas
    out = k1 * _integral_drho(terms.alpha, p.rho, quad)
    if k2:
        out -= k2 * _integral_drho(terms.alpha - 2.0, p.rho, quad)
    return float(out)


def psi_closed(p, q, cfg=None):
    """ψ ≈ ε + (1-ε) J for Rayleigh fading."""
    if p.epsilon >= 1:
        return 1.0
    return p.epsilon + (1.0 - p.epsilon) * j_kernel(p, q, cfg)


def ec_theorem1(p, q, cfg=None):
    """Rayleigh closed-form EC built on the J kernel.

    Warns with ConvergenceWarning when β = θ√n Q⁻¹(ε) log₂(e) exceeds
    CLOSED_FORM_BETA_MAX: the kernel then underestimates ψ and the EC can be
    far off or of the wrong sign.

    Args:
        p (LinkParams): Link parameters, m = 1.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Quadrature tolerances. Defaults to None.

    Returns:
        EcResult: EC in bpcu.
    """
    _require_rayleigh(p)
    if q.theta == 0:
        return _theta_zero_limit(p, EcMethod.THEOREM1, cfg)
    beta = ClosedFormTerms.from_params(p, q).beta
    if beta > CLOSED_FORM_BETA_MAX:
        warnings.warn(f'Closed-form EC is unreliable at beta={beta:.3g} '
                      f'(n={p.n}, theta={q.theta:g}); prefer the stochastic form',
                      ConvergenceWarning)
    psi = psi_closed(p, q, cfg)
    return EcResult(ec_from_psi(psi, p.n, q.theta), psi, EcMethod.THEOREM1)


def ec_shannon(p, q, cfg=None, model=None, task=0):
    """Long-packet baseline: ε = 0 and r = log₂(1+ρz).

    Args:
        p (LinkParams): Link parameters; epsilon is ignored.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        EcResult: EC in bpcu.
    """
    model = model or p.fading
    if p.rho == 0:
        return EcResult(0.0, 1.0, EcMethod.SHANNON)
    if q.theta == 0:
        mean = expect(model, lambda z: np.log1p(p.rho * z) * LOG2E, cfg, (1.0 / p.rho,), task)
        return EcResult(mean.value, 1.0, EcMethod.SHANNON, mean.est_error)
    alpha = -q.theta * p.n * LOG2E
    psi = expect(model, lambda z: (1.0 + p.rho * z) ** alpha, cfg,
                 power_breakpoints(p.rho, alpha, model.m), task)
    t = p.n * q.theta
    return EcResult(ec_from_psi(psi.value, p.n, q.theta), psi.value, EcMethod.SHANNON,
                    psi.est_error / (psi.value * t))


def effective_capacity(p, q, method=EcMethod.STOCHASTIC, cfg=None, model=None, task=0):
    """Dispatches to the EC evaluation selected by method.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        method (EcMethod, optional): Evaluation method. Defaults to stochastic.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        EcResult: EC in bpcu.
    """
    method = EcMethod(method)
    if method == EcMethod.STOCHASTIC:
        return ec_stochastic(p, q, cfg, model, task)
    elif method == EcMethod.LEMMA1:
        return ec_lemma1(p, q, cfg=cfg)
    elif method == EcMethod.THEOREM1:
        return ec_theorem1(p, q, cfg)
    else:
        return ec_shannon(p, q, cfg, model, task)


def delay_bound(ec, q, theta=None):
    """Delay bound δ = -ln(Λ)/(θ C_e), floored to whole symbol periods.

    Args:
        ec (float): Effective capacity (> 0).
        q (QoSConstraints): Supplies Λ, and θ unless given.
        theta (float, optional): Delay exponent. Defaults to q.theta.

    Raises:
        DomainError: Non-positive EC or θ.

    Returns:
        int: δ.
    """
    theta = q.theta if theta is None else theta
    if not ec > 0:
        raise DomainError(f'EC must be positive, got {ec}')
    if not theta > 0:
        raise DomainError(f'Delay exponent must be positive, got {theta}')
    return int(np.floor(-np.log(q.violation) / (theta * ec)))
