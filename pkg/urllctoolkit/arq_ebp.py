"""Buffer-aware single-retransmission ARQ (EBP-ARQ).

When the next slot is known to be empty, the packet goes out at a relaxed
first-round error ε₁ and the free slot carries one retransmission at
ε₂ = ε/ε₁, so the aggregate reliability ε₁ε₂ = ε is unchanged.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import expect
from .effective_capacity import EcMethod, EcResult, ec_from_psi
from .errors import DomainError, InfeasibleError, SlackConstraintWarning
from .fbl_rate import EPS_CEILING, achievable_rate, mean_rate, mean_rate_terms
from .math_kernels import (LOG2E, finite_diff, power_breakpoints, q_inv_derivative,
                           q_inv_second_derivative)


@dataclass(frozen=True)
class ArqParams:
    """Error split between the two transmission rounds.

    Args:
        eps1 (float): First-round error probability in [eps_target, 1).
        eps_target (float): Aggregate reliability target ε in (0, 1).
        nack_overhead (float, optional): NACK span in symbols. Defaults to 6.
        eps2 (float, optional): Second-round error. Defaults to eps_target/eps1.
    """
    eps1: float
    eps_target: float
    nack_overhead: float = 6.0
    eps2: float = None

    def __post_init__(self):
        if not 0 < self.eps_target < 1:
            raise DomainError(f'Target error must lie in (0, 1), got {self.eps_target}')
        if not 0 < self.eps1 < 1:
            raise DomainError(f'First-round error must lie in (0, 1), got {self.eps1}')
        if not self.nack_overhead >= 0:
            raise DomainError('NACK overhead must be non-negative')
        if self.eps2 is None:
            if self.eps1 < self.eps_target:
                raise DomainError('First-round error below the target leaves ε₂ > 1')
            object.__setattr__(self, 'eps2', min(self.eps_target / self.eps1, EPS_CEILING))
        elif not 0 < self.eps2 < 1:
            raise DomainError(f'Second-round error must lie in (0, 1), got {self.eps2}')
        if self.eps1 * self.eps2 > self.eps_target * (1 + 1e-12):
            raise DomainError('ε₁ε₂ exceeds the reliability target')

    @property
    def degenerate(self):
        """No relaxation: the second round has no reliability left to meet."""
        return self.eps2 >= EPS_CEILING


@dataclass(frozen=True)
class ArqRates:
    r0: float
    r1: float
    r2: float
    kappa: float


@dataclass(frozen=True)
class ArqResult:
    p_nb_mod: float
    ec2: float
    p_total: float
    eee2: float
    tau_n: float
    stable: bool
    degenerate: bool = False

    def __str__(self):
        flag = '' if self.stable else ' [unstable]'
        return (f"EEE={self.eee2:.6g} bpcu/W (EC={self.ec2:.6g}, p'={self.p_nb_mod:.6g}, "
                f'P_t={self.p_total:.6g} W, tau_n={self.tau_n:.6g}){flag}')


@dataclass(frozen=True)
class CurvatureReport:
    eps1: np.ndarray
    d2_kappa: np.ndarray
    violations: tuple
    p_nb_single_valley: bool
    fd_rel_error: float

    @property
    def ok(self):
        return not self.violations and self.p_nb_single_valley


def kappa_value(r1, r2, eps1):
    """κ = (1-ε₁) r₁ + ε₁ r₂/2."""
    return (1.0 - eps1) * r1 + 0.5 * eps1 * r2


def averaged_arq_rates(terms, n, eps_target, eps1, eps2=None):
    """ArqRates from precomputed mean rate terms.

    Args:
        terms (RateTerms): Output of mean_rate_terms.
        n (int): Blocklength.
        eps_target (float): Aggregate error ε.
        eps1 (float): First-round error.
        eps2 (float, optional): Second-round error. Defaults to ε/ε₁.

    Returns:
        ArqRates: r₀, r₁, r₂ and κ.
    """
    if eps2 is None:
        eps2 = min(eps_target / eps1, EPS_CEILING)
    r0 = float(mean_rate(terms, n, eps_target))
    r1 = float(mean_rate(terms, n, eps1))
    r2 = float(mean_rate(terms, n, eps2))
    return ArqRates(r0, r1, r2, float(kappa_value(r1, r2, eps1)))


def arq_rates(p, a, model=None, cfg=None, task=0):
    """Averaged rates at the target and at both round errors.

    The aggregate target a.eps_target stands in for p.epsilon.

    Args:
        p (LinkParams): Link parameters.
        a (ArqParams): Error split.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        ArqRates: r₀ = E[r(ε)], r₁ = E[r(ε₁)], r₂ = E[r(ε₂)] and κ.
    """
    terms = mean_rate_terms(p, model, cfg, task)
    return averaged_arq_rates(terms, p.n, a.eps_target, a.eps1, a.eps2)


def nbp_modified(rates, arrival_rate):
    """Root p' of p'(p'(r₀-κ) + κ) = λ, written as 2λ/(κ + √(κ² + 4(r₀-κ)λ)).

    The rationalized form is continuous through r₀ = κ, where it equals λ/κ.
    Values above one mean the queue is unstable; callers cap and flag them.

    Args:
        rates (ArqRates): Averaged rates.
        arrival_rate (float): λ in bpcu (> 0).

    Raises:
        DomainError: Non-positive λ.
        InfeasibleError: No real root.

    Returns:
        float: p'_nb.
    """
    if not arrival_rate > 0:
        raise DomainError(f'Arrival rate must be positive, got {arrival_rate}')
    k = rates.kappa
    disc = k * k + 4.0 * (rates.r0 - k) * arrival_rate
    if disc < 0 or not k + np.sqrt(max(disc, 0.0)) > 0:
        raise InfeasibleError('Modified non-empty buffer probability has no real solution')
    return float(2.0 * arrival_rate / (k + np.sqrt(disc)))


def _arq_numerator(rates, a, p_nb_mod):
    eps = a.eps_target
    return (p_nb_mod * (1.0 - eps) * rates.r0
            + (1.0 - p_nb_mod) * ((1.0 - a.eps1) * rates.r1
                                  + 0.5 * a.eps1 * (1.0 - a.eps2) * rates.r2))


def ec_arq(p, q, a, rates, p_nb_mod, model=None, cfg=None, task=0):
    """EC of EBP-ARQ with per-realization rates inside the expectation.

    ψ = E_Z[p'(ε + (1-ε)e^{-nθr₀}) + (1-p')((1-ε₁)e^{-nθr₁} + ε₁(1-ε₂)e^{-nθr₂/2} + ε)].
    At θ = 0 the averaged rates give the limit p'(1-ε)r₀ + (1-p')((1-ε₁)r₁ + ε₁(1-ε₂)r₂/2).

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        a (ArqParams): Error split.
        rates (ArqRates): Averaged rates for the θ = 0 limit.
        p_nb_mod (float): p'_nb in (0, 1].
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        EcResult: C_e2 in bpcu.
    """
    if q.theta == 0:
        return EcResult(float(_arq_numerator(rates, a, p_nb_mod)), 1.0, EcMethod.STOCHASTIC)
    if p.rho == 0:
        return EcResult(0.0, 1.0, EcMethod.STOCHASTIC)
    model = model or p.fading
    t = p.n * q.theta
    eps, eps1, eps2 = a.eps_target, a.eps1, a.eps2
    pn = p_nb_mod

    def g(z):
        x = p.rho * z
        r0 = achievable_rate(x, p.n, eps)
        r1 = achievable_rate(x, p.n, eps1)
        r2 = achievable_rate(x, p.n, eps2)
        return (pn * (eps + (1.0 - eps) * np.exp(-t * r0))
                + (1.0 - pn) * ((1.0 - eps1) * np.exp(-t * r1)
                                + eps1 * (1.0 - eps2) * np.exp(-0.5 * t * r2) + eps))

    psi = expect(model, g, cfg, power_breakpoints(p.rho, t * LOG2E, model.m), task)
    return EcResult(ec_from_psi(psi.value, p.n, q.theta), psi.value, EcMethod.STOCHASTIC,
                    psi.est_error / (psi.value * t))


def power_arq(rho, p_nb_mod, a, pm):
    """P_t = [p'² + p'(1-p')(1+ε₁)] ζρ + P_c."""
    pn = p_nb_mod
    return (pn * pn + pn * (1.0 - pn) * (1.0 + a.eps1)) * pm.zeta * rho + pm.pc


def power_arq_dp(rho, p_nb_mod, a, pm):
    """∂P_t/∂p' = [(1+ε₁) - 2ε₁p'] ζρ, non-negative on [0, 1]."""
    return ((1.0 + a.eps1) - 2.0 * a.eps1 * p_nb_mod) * pm.zeta * rho


def normalized_delay(a, p_nb_mod, n):
    """τ_n = 1 + (1 + overhead/n)(1-p')ε₁, the mean service time relative to one slot.

    Args:
        a (ArqParams): Error split and NACK overhead.
        p_nb_mod (float): p'_nb.
        n (int): Blocklength.

    Returns:
        float: τ_n ≥ 1.
    """
    return float(1.0 + (1.0 + a.nack_overhead / n) * (1.0 - p_nb_mod) * a.eps1)


def theorem4_upper_bound(rates, a, p_nb_mod, pm, rho):
    """EEE ceiling of EBP-ARQ: the θ → 0 EC over the ARQ power.

    Args:
        rates (ArqRates): Averaged rates.
        a (ArqParams): Error split.
        p_nb_mod (float): p'_nb.
        pm (PowerModel): Power model.
        rho (float): Transmit power.

    Returns:
        float: Upper bound in bpcu per watt.
    """
    return float(_arq_numerator(rates, a, p_nb_mod) / power_arq(rho, p_nb_mod, a, pm))


def eee_arq(p, q, a, pm, tm, model=None, cfg=None, task=0):
    """η_ee2 = C_e2 / P_t along arq_rates → nbp_modified → ec_arq → power_arq.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        a (ArqParams): Error split.
        pm (PowerModel): Power model.
        tm (TrafficModel): Arrival rate.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        ArqResult: EEE, EC, p', power and normalized delay.
    """
    if a.degenerate:
        warnings.warn('ε₁ equals the target: the retransmission carries no reliability',
                      SlackConstraintWarning)
    rates = arq_rates(p, a, model, cfg, task)
    raw = nbp_modified(rates, tm.arrival_rate)
    stable = raw <= 1.0
    pn = min(raw, 1.0)
    ec = ec_arq(p, q, a, rates, pn, model, cfg, task).ec
    p_total = power_arq(p.rho, pn, a, pm)
    return ArqResult(pn, ec, float(p_total), float(ec / p_total),
                     normalized_delay(a, pn, p.n), bool(stable), a.degenerate)


def equal_split_params(eps_target, nack_overhead=6.0):
    """ε₁ = ε₂ = √ε."""
    root = float(np.sqrt(eps_target))
    return ArqParams(eps1=root, eps_target=eps_target, nack_overhead=nack_overhead)


def _eps2_slope(eps1, eps_target):
    eps2 = eps_target / eps1
    return eps2, q_inv_derivative(eps2), q_inv_second_derivative(eps2)


def kappa_d1(terms, n, eps1, eps_target):
    """dκ/dε₁ with r(ε) = E[C] - Q⁻¹(ε) E[μ].

    Args:
        terms (RateTerms): Mean rate terms.
        n (int): Blocklength.
        eps1 (float): First-round error in (ε, 1).
        eps_target (float): Aggregate error ε.

    Returns:
        float: First derivative.
    """
    c = terms.mu
    r1 = mean_rate(terms, n, eps1)
    eps2, dq2, _ = _eps2_slope(eps1, eps_target)
    r2 = mean_rate(terms, n, eps2)
    dr1 = -c * q_inv_derivative(eps1)
    dr2 = c * dq2 * eps2 / eps1
    return float(-r1 + (1.0 - eps1) * dr1 + 0.5 * r2 + 0.5 * eps1 * dr2)


def kappa_d2(terms, n, eps1, eps_target):
    """d²κ/dε₁² = -2r₁' + (1-ε₁)r₁'' + r₂' + (ε₁/2)r₂''.

    Args:
        terms (RateTerms): Mean rate terms.
        n (int): Blocklength.
        eps1 (float): First-round error in (ε, 1).
        eps_target (float): Aggregate error ε.

    Returns:
        float: Second derivative, negative on (ε, 1/2).
    """
    c = terms.mu
    eps2, dq2, d2q2 = _eps2_slope(eps1, eps_target)
    ratio = eps2 / eps1
    dr1 = -c * q_inv_derivative(eps1)
    d2r1 = -c * q_inv_second_derivative(eps1)
    dr2 = c * dq2 * ratio
    # dε₂/dε₁ = -ε₂/ε₁
    d2r2 = -c * (d2q2 * ratio * ratio + 2.0 * dq2 * eps2 / eps1 ** 2)
    return float(-2.0 * dr1 + (1.0 - eps1) * d2r1 + dr2 + 0.5 * eps1 * d2r2)


def kappa_curvature_check(p, eps_target, arrival_rate=0.5, points=1000, eps1_lo=None,
                          eps1_hi=0.5, fd_at=1e-3, model=None, cfg=None):
    """Grid check that κ is concave in ε₁ and p'(ε₁) has a single valley.

    Args:
        p (LinkParams): Link parameters.
        eps_target (float): Aggregate error ε.
        arrival_rate (float, optional): λ used for the p' profile. Defaults to 0.5.
        points (int, optional): Log-spaced grid size. Defaults to 1000.
        eps1_lo (float, optional): Grid start. Defaults to 2ε.
        eps1_hi (float, optional): Grid end. Defaults to 0.5.
        fd_at (float, optional): ε₁ where the analytic curvature is compared with
            finite differences. Defaults to 1e-3.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.

    Raises:
        DomainError: Grid not inside (ε, 1/2].

    Returns:
        CurvatureReport: Curvature values, violating cells and the p' shape flag.
    """
    lo = 2.0 * eps_target if eps1_lo is None else eps1_lo
    if not eps_target < lo < eps1_hi <= 0.5:
        raise DomainError('The ε₁ grid must lie inside (ε, 0.5]')
    terms = mean_rate_terms(p, model, cfg)
    grid = np.logspace(np.log10(lo), np.log10(eps1_hi), int(points))
    d2 = np.array([kappa_d2(terms, p.n, e, eps_target) for e in grid])
    violations = tuple(float(e) for e, v in zip(grid, d2) if not v < 0)

    p_nb = np.array([nbp_modified(averaged_arq_rates(terms, p.n, eps_target, e),
                                  arrival_rate) for e in grid])
    signs = np.sign(np.diff(p_nb))
    signs = signs[signs != 0]
    single_valley = bool(np.sum(signs[1:] != signs[:-1]) <= 1
                         and (signs.size == 0 or signs[0] < 0 or np.all(signs > 0)))

    def kappa(e):
        return kappa_value(mean_rate(terms, p.n, e), mean_rate(terms, p.n, eps_target / e), e)

    analytic = kappa_d2(terms, p.n, fd_at, eps_target)
    numeric = finite_diff(kappa, fd_at, order=2)
    fd_rel = abs(numeric - analytic) / abs(analytic)
    return CurvatureReport(grid, d2, violations, single_valley, float(fd_rel))


