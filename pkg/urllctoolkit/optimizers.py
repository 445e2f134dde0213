"""Scalar searches and the optimizers built on them.

Optimal error probability, optimal transmit power (stationarity root and a
quasi-concave fallback), the delay-constrained EEE maximization and the
Dinkelbach minimization of the ARQ non-empty buffer probability.
"""
import logging
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .arq_ebp import ArqParams, averaged_arq_rates, nbp_modified
from .effective_capacity import (EcMethod, effective_capacity, j_kernel, j_kernel_drho,
                                 psi_stochastic)
from .eee_models import (BufferMode, EeeResult, ebp_method, eee_ebp, eee_full_buffer, nbp,
                         nbp_shannon, power_total_linear, theta_star)
from .errors import ConvergenceError, DomainError, InfeasibleError, SlackConstraintWarning
from .fbl_rate import EPS_CEILING, dispersion_coefficient, mean_rate_terms
from .math_kernels import LOG2E, power_exp_integral
from .tools import log_grid

logger = logging.getLogger(__name__)

PHI_RATIO = 2.0 / (1.0 + np.sqrt(5.0))
EPS_SEARCH = (1e-12, 0.5)


@dataclass(frozen=True)
class OptimResult:
    arg_opt: float
    value_opt: float
    iterations: int
    converged: bool
    bracket: tuple
    trace: list = None

    def __str__(self):
        state = 'converged' if self.converged else 'not converged'
        return (f'arg={self.arg_opt:.10g} value={self.value_opt:.10g} '
                f'({self.iterations} iterations, {state})')


@dataclass(frozen=True)
class DinkelbachState:
    sigma: float
    f_value: float
    iterate: float
    tolerance: float
    max_iter: int


@dataclass(frozen=True)
class ConstrainedPoint:
    rho: float
    epsilon: float
    theta: float
    p_nb: float
    ec: float
    p_total: float
    eee: float
    feasible: bool


@dataclass(frozen=True)
class ConstrainedOptimum:
    point: ConstrainedPoint
    result: EeeResult
    optim: OptimResult
    constraints: dict


def _min_value(v):
    v = float(v)
    return np.inf if np.isnan(v) else v


def golden_section_min(f, lo, hi, tol=1e-10, max_iter=200):
    """Golden-section minimization of a unimodal function on [lo, hi].

    The interval shrinks until its width is below tol·max(1, |lo|, |hi|).
    Endpoints are checked last, so a monotone f returns the better boundary.

    Args:
        f (function): Scalar objective; NaN counts as +inf.
        lo (float): Lower bound.
        hi (float): Upper bound (> lo).
        tol (float, optional): Relative width tolerance. Defaults to 1e-10.
        max_iter (int, optional): Iteration cap. Defaults to 200.

    Raises:
        DomainError: Empty interval.

    Returns:
        OptimResult: Minimizer and minimum.
    """
    a, b = float(lo), float(hi)
    if not b > a:
        raise DomainError(f'Empty search interval [{lo}, {hi}]')
    x1 = b - PHI_RATIO * (b - a)
    x2 = a + PHI_RATIO * (b - a)
    f1, f2 = _min_value(f(x1)), _min_value(f(x2))
    iteration = 0
    while iteration < max_iter and b - a > tol * max(1.0, abs(a), abs(b)):
        if f2 > f1:
            b, x2, f2 = x2, x1, f1
            x1 = b - PHI_RATIO * (b - a)
            f1 = _min_value(f(x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + PHI_RATIO * (b - a)
            f2 = _min_value(f(x2))
        iteration += 1

    arg, val = (x1, f1) if f1 <= f2 else (x2, f2)
    for edge in (float(lo), float(hi)):
        fe = _min_value(f(edge))
        if fe < val:
            arg, val = edge, fe
    return OptimResult(float(arg), float(val), iteration, iteration < max_iter,
                       (min(a, arg), max(b, arg)))


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Golden-section maximization; see golden_section_min."""
    res = golden_section_min(lambda x: -f(x), lo, hi, tol, max_iter)
    return replace(res, value_opt=-res.value_opt)


def log_scan_min(f, lo, hi, points=64, tol=1e-10, max_iter=200):
    """Coarse log-grid scan, then golden-section refinement around the best cell.

    Ties on the grid go to the smallest argument.

    Args:
        f (function): Scalar objective on (0, ∞); NaN counts as +inf.
        lo (float): Lower bound (> 0).
        hi (float): Upper bound (> lo).
        points (int, optional): Scan size. Defaults to 64.
        tol (float, optional): Refinement tolerance in log units. Defaults to 1e-10.
        max_iter (int, optional): Golden-section iteration cap. Defaults to 200.

    Returns:
        OptimResult: Minimizer and minimum.
    """
    if not 0 < lo < hi:
        raise DomainError(f'Log scan needs 0 < lo < hi, got [{lo}, {hi}]')
    grid = log_grid(lo, hi, points)
    vals = np.array([_min_value(f(x)) for x in grid])
    i = int(np.argmin(vals))
    left, right = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = golden_section_min(lambda u: f(np.exp(u)), np.log(left), np.log(right), tol, max_iter)
    arg, val = float(np.exp(res.arg_opt)), res.value_opt
    if not val < vals[i]:
        arg, val = float(grid[i]), float(vals[i])
    return OptimResult(arg, float(val), res.iterations + len(grid), res.converged,
                       (float(left), float(right)))


def log_scan_max(f, lo, hi, points=64, tol=1e-10, max_iter=200):
    """Maximizing counterpart of log_scan_min."""
    res = log_scan_min(lambda x: -f(x), lo, hi, points, tol, max_iter)
    return replace(res, value_opt=-res.value_opt)


def epsilon_objective(p, q, cfg=None, model=None):
    """ψ as a function of ε alone, the quantity optimal_epsilon minimizes.

    For m = 1 this is ε + (1-ε)(κ₁(ε) I(α) - κ₂(ε) I(α-2)); I(α) and I(α-2) do
    not depend on ε and are integrated once. Other shapes use the stochastic ψ.

    Args:
        p (LinkParams): Link parameters; epsilon is ignored.
        q (QoSConstraints): QoS constraints.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.

    Returns:
        function: ε ↦ ψ(ε).
    """
    if p.m != 1 or (model is not None and model.m != 1):
        return lambda eps: psi_stochastic(replace(p, epsilon=float(eps)), q, cfg, model)

    quad = cfg.quad if cfg is not None else None
    alpha = -q.theta * p.n * LOG2E
    i0 = power_exp_integral(alpha, p.rho, 1.0, quad).value
    i2 = power_exp_integral(alpha - 2.0, p.rho, 1.0, quad).value

    def objective(eps):
        beta = q.theta * p.n * float(dispersion_coefficient(p.n, eps))
        half_sq = 0.5 * beta * beta
        j = (half_sq + beta + 1.0) * i0 - (half_sq + beta) * i2
        return eps + (1.0 - eps) * j

    return objective


def optimal_epsilon(p, q, cfg=None, model=None, tol=1e-10, max_iter=200):
    """ε* = argmin ψ(ε) over [1e-12, 0.5], clipped to the target q.epsilon_t.

    Args:
        p (LinkParams): Link parameters; epsilon is ignored.
        q (QoSConstraints): QoS constraints with θ > 0.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        tol (float, optional): Golden-section tolerance in log₁₀ ε. Defaults to 1e-10.
        max_iter (int, optional): Iteration cap. Defaults to 200.

    Raises:
        DomainError: θ = 0 (ψ does not depend on ε).
        ConvergenceError: The search ran out of iterations.

    Returns:
        OptimResult: ε* and the minimized ψ.
    """
    if not q.theta > 0:
        raise DomainError('optimal_epsilon needs θ > 0')
    objective = epsilon_objective(p, q, cfg, model)
    lo, hi = np.log10(EPS_SEARCH[0]), np.log10(EPS_SEARCH[1])
    res = golden_section_min(lambda u: objective(10.0 ** u), lo, hi, tol, max_iter)
    if not res.converged:
        raise ConvergenceError(f'optimal_epsilon did not converge in {max_iter} iterations')
    eps = float(10.0 ** res.arg_opt)
    if eps > q.epsilon_t:
        logger.debug('ε* = %g clipped to the target %g', eps, q.epsilon_t)
        eps = float(q.epsilon_t)
    return OptimResult(eps, float(objective(eps)), res.iterations, True, EPS_SEARCH)


def _closed_form_slope(p, q, pm, cfg):
    # (η, sign of dη/dρ) from the Rayleigh J kernel
    eps = p.epsilon
    t = p.n * q.theta
    psi = eps + (1.0 - eps) * j_kernel(p, q, cfg)
    ec = -np.log(psi) / t
    dec = -(1.0 - eps) * j_kernel_drho(p, q, cfg) / (t * psi)
    p_total = power_total_linear(p.rho, pm)
    return ec / p_total, dec * p_total - pm.zeta * ec


def eee_closed_form(p, q, pm, cfg=None):
    """Rayleigh closed-form full-buffer EEE."""
    return _closed_form_slope(p, q, pm, cfg)[0]


def optimal_power_theorem3(p, q, pm, cfg=None, rho_max=1000.0, grid_points=64, rel_tol=1e-8,
                           max_iter=200):
    """Root of the closed-form EEE stationarity condition, for Rayleigh fading.

    Solves dη/dρ = 0 with η = -ln(ε + (1-ε)J)/(nθ(ζρ + P_c)), i.e.
    η(ρ*) ζ = -(1-ε)J'(ρ*)/(nθψ(ρ*)). The sign change of dη/dρ nearest the
    grid maximum of η is bracketed on a log grid over [ρ_max·1e-6, ρ_max] and
    bisected in log ρ.

    Args:
        p (LinkParams): Link parameters, m = 1; rho is ignored.
        q (QoSConstraints): QoS constraints, θ > 0.
        pm (PowerModel): Power model.
        cfg (EvalConfig, optional): Quadrature tolerances. Defaults to None.
        rho_max (float, optional): Power ceiling in watts. Defaults to 1000 (30 dB).
        grid_points (int, optional): Bracketing grid size. Defaults to 64.
        rel_tol (float, optional): Relative bracket width at stop. Defaults to 1e-8.
        max_iter (int, optional): Bisection cap. Defaults to 200.

    Raises:
        DomainError: m ≠ 1, θ = 0 or rho_max ≤ 0.

    Returns:
        OptimResult: ρ* and η(ρ*); converged is False when no sign change was
        found and the best grid boundary is returned.
    """
    if p.m != 1:
        raise DomainError('The stationarity root needs the Rayleigh kernel (m = 1)')
    if not q.theta > 0:
        raise DomainError('The stationarity root needs θ > 0')
    if not rho_max > 0:
        raise DomainError(f'rho_max must be positive, got {rho_max}')

    def slope(rho):
        return _closed_form_slope(replace(p, rho=float(rho)), q, pm, cfg)

    grid = log_grid(rho_max * 1e-6, rho_max, grid_points)
    evals = [slope(r) for r in grid]
    eta = np.array([e[0] for e in evals])
    sign = np.array([e[1] for e in evals])
    best = int(np.argmax(eta))
    crossings = [i for i in range(len(grid) - 1) if sign[i] > 0 >= sign[i + 1]]
    if not crossings:
        logger.warning('No sign change of dη/dρ on (%g, %g]; returning the best grid point',
                       grid[0], rho_max)
        return OptimResult(float(grid[best]), float(eta[best]), 0, False,
                           (float(grid[0]), float(rho_max)))

    i = min(crossings, key=lambda c: abs(c - best + 0.5))
    lo, hi = np.log(grid[i]), np.log(grid[i + 1])
    iteration = 0
    while iteration < max_iter and np.expm1(hi - lo) > rel_tol:
        mid = 0.5 * (lo + hi)
        if slope(np.exp(mid))[1] > 0:
            lo = mid
        else:
            hi = mid
        iteration += 1
        logger.debug('Bisection bracket [%.12g, %.12g]', np.exp(lo), np.exp(hi))
    rho = float(np.exp(0.5 * (lo + hi)))
    return OptimResult(rho, float(slope(rho)[0]), iteration, iteration < max_iter,
                       (float(np.exp(lo)), float(np.exp(hi))))


def optimal_power_golden(p, q, pm, cfg=None, method=EcMethod.STOCHASTIC, rho_max=1000.0,
                         tm=None, model=None, points=64, tol=1e-10):
    """Direct maximization of the quasi-concave EEE(ρ) on [ρ_max·1e-6, ρ_max].

    Works for any fading shape and EC method; with a traffic model the EBP
    EEE is maximized instead of the full-buffer one.

    Args:
        p (LinkParams): Link parameters; rho is ignored.
        q (QoSConstraints): QoS constraints.
        pm (PowerModel): Power model.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        method (EcMethod, optional): EC evaluation. Defaults to stochastic.
        rho_max (float, optional): Power ceiling. Defaults to 1000.
        tm (TrafficModel, optional): Traffic model for the EBP EEE. Defaults to None.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        points (int, optional): Coarse scan size. Defaults to 64.
        tol (float, optional): Refinement tolerance in log ρ. Defaults to 1e-10.

    Returns:
        OptimResult: ρ* and the maximal EEE.
    """
    if not rho_max > 0:
        raise DomainError(f'rho_max must be positive, got {rho_max}')
    if tm is not None:
        method = ebp_method(p, method)

    def eee(rho):
        pr = replace(p, rho=float(rho))
        if tm is None:
            return eee_full_buffer(pr, q, pm, cfg, method, model).eee
        return eee_ebp(pr, q, pm, tm, cfg, method, model).eee

    return log_scan_max(eee, rho_max * 1e-6, rho_max, points, tol)


def _point_state(p, tm, method, cfg, model):
    if tm.buffer_mode == BufferMode.FULL_BUFFER:
        return 1.0, True
    state = (nbp_shannon if method == EcMethod.SHANNON else nbp)(p, tm, model, cfg)
    return state.p_nb, state.feasible


def evaluate_constrained_point(rho, p, q, pm, tm, cfg=None, method=EcMethod.THEOREM1,
                               model=None):
    """One line-search candidate of the delay-constrained EEE maximization.

    P_nb at the target ε_t fixes θ*; ε = min(ε*(θ*), ε_t); P_nb and θ* are then
    recomputed at the chosen ε so the Λ-constraint holds at equality.

    Args:
        rho (float): Candidate power.
        p (LinkParams): Link template; rho and epsilon are ignored.
        q (QoSConstraints): Supplies δ, Λ and ε_t; theta is ignored.
        pm (PowerModel): Power model.
        tm (TrafficModel): Arrival rate and buffer mode.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        method (EcMethod, optional): EC evaluation. Defaults to the Rayleigh closed form.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.

    Returns:
        ConstrainedPoint: The candidate with its feasibility flag.
    """
    pr = replace(p, rho=float(rho), epsilon=float(q.epsilon_t))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', SlackConstraintWarning)
        p_nb, stable = _point_state(pr, tm, method, cfg, model)
        theta = theta_star(tm, q, p_nb)
        eps = float(q.epsilon_t)
        if theta > 0 and method != EcMethod.SHANNON:
            eps = optimal_epsilon(pr, replace(q, theta=theta), cfg, model).arg_opt
            pr = replace(pr, epsilon=eps)
            p_nb, stable = _point_state(pr, tm, method, cfg, model)
            theta = theta_star(tm, q, p_nb)

    ec = effective_capacity(pr, replace(q, theta=theta), method, cfg, model).ec
    p_total = p_nb * pm.zeta * pr.rho + pm.pc
    feasible = bool(stable and ec >= tm.arrival_rate * (1.0 - 1e-9))
    return ConstrainedPoint(float(rho), eps, float(theta), float(p_nb), float(ec),
                            float(p_total), float(ec / p_total), feasible)


def check_constraints(point, q, tm, rho_max):
    """Re-verifies every constraint of the delay-constrained problem at a point.

    Returns:
        dict: Constraint name to bool.
    """
    slack = 1e-9
    return {
        'ec_ge_lambda': point.ec >= tm.arrival_rate * (1.0 - slack),
        'delay_violation': (point.p_nb * np.exp(-point.theta * tm.arrival_rate * q.delta)
                            <= q.violation * (1.0 + slack)),
        'power_range': 0.0 <= point.rho <= rho_max * (1.0 + slack),
        'error_target': point.epsilon <= q.epsilon_t * (1.0 + slack),
        'theta_nonneg': point.theta >= 0.0,
    }


def maximize_eee_constrained(p, q, pm, tm, cfg=None, rho_max=1000.0, n_grid=256,
                             method=EcMethod.THEOREM1, model=None, tol=1e-8):
    """Maximizes EEE subject to EC ≥ λ and P_nb e^{-θλδ} ≤ Λ over ρ ∈ (0, ρ_max].

    Line search over n_grid log-spaced powers in (ρ_max·1e-3, ρ_max], then a
    golden-section refinement between the neighbors of the best feasible cell;
    infeasible candidates score -inf. The smallest power wins ties.

    Args:
        p (LinkParams): Link template; rho and epsilon are ignored.
        q (QoSConstraints): δ, Λ and the target error ε_t.
        pm (PowerModel): Power model.
        tm (TrafficModel): Arrival rate and buffer mode.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        rho_max (float, optional): Power ceiling. Defaults to 1000.
        n_grid (int, optional): Line-search grid size. Defaults to 256.
        method (EcMethod, optional): EC evaluation. Defaults to the Rayleigh closed form.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        tol (float, optional): Refinement tolerance in log ρ. Defaults to 1e-8.

    Raises:
        InfeasibleError: No grid power satisfies the constraints.

    Returns:
        ConstrainedOptimum: Optimal point, its EeeResult, search summary and the
        re-verified constraints.
    """
    if not rho_max > 0:
        raise DomainError(f'rho_max must be positive, got {rho_max}')
    method = ebp_method(p, method)

    def evaluate(rho):
        return evaluate_constrained_point(rho, p, q, pm, tm, cfg, method, model)

    grid = log_grid(rho_max * 1e-3, rho_max, n_grid)
    points = [evaluate(r) for r in grid]
    scores = np.array([pt.eee if pt.feasible else -np.inf for pt in points])
    if not np.isfinite(scores).any():
        raise InfeasibleError(f'EC ≥ λ={tm.arrival_rate} is not met for any ρ ≤ {rho_max:g}')
    i = int(np.argmax(scores))
    best = points[i]
    logger.info('Constrained line search: best grid ρ=%.6g, EEE=%.6g', best.rho, best.eee)

    left, right = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    iterations = n_grid
    converged = True
    if right > left:
        def score(u):
            pt = evaluate(np.exp(u))
            return pt.eee if pt.feasible else -np.inf

        res = golden_section_max(score, np.log(left), np.log(right), tol)
        iterations += res.iterations
        converged = res.converged
        refined = evaluate(np.exp(res.arg_opt))
        if refined.feasible and refined.eee > best.eee:
            best = refined

    constraints = check_constraints(best, q, tm, rho_max)
    if not all(constraints.values()):
        raise InfeasibleError(f'Returned point violates {constraints}')
    result = EeeResult(best.eee, best.ec, best.p_nb, best.p_total, True)
    optim = OptimResult(best.rho, best.eee, iterations, converged, (float(left), float(right)))
    return ConstrainedOptimum(best, result, optim, constraints)


def _kappa_window(terms, n, eps_t, points=64, rel_tol=1e-6):
    # ε₁ interval around the κ maximum on which κ - r₀ clears rel_tol·r₀; None if empty
    r0 = averaged_arq_rates(terms, n, eps_t, eps_t).r0
    floor = rel_tol * max(abs(r0), 1e-12)

    def excess(e):
        rates = averaged_arq_rates(terms, n, eps_t, e)
        return rates.kappa - rates.r0 - floor

    grid = log_grid(eps_t, 1.0 - 1e-9, points)
    vals = np.array([excess(e) for e in grid])
    i = int(np.argmax(vals))
    if not vals[i] > 0:
        return None
    j = i
    while j > 0 and vals[j - 1] > 0:
        j -= 1
    k = i
    while k < points - 1 and vals[k + 1] > 0:
        k += 1
    lo = grid[j] if j == 0 else optimize.brentq(excess, grid[j - 1], grid[j], xtol=1e-15)
    hi = grid[k] if k == points - 1 else optimize.brentq(excess, grid[k], grid[k + 1])
    return float(lo), float(hi)


def dinkelbach_min_nbp(terms, n, eps_t, arrival_rate, tol=1e-8, max_iter=50, scan_points=64):
    """Dinkelbach minimization of the ARQ non-empty buffer probability over ε₁.

    p'(ε₁) = num/den with num = κ - √(κ² - 4(κ - r₀)λ) and den = 2(κ - r₀),
    searched where κ exceeds r₀ by a relative margin of 1e-6 (the minimum lies
    there whenever λ < r₀; closer to ε₁ = ε the ratio is 0/0). Each step
    minimizes num - σ_k·den by a log scan plus golden section and sets
    σ_{k+1} = num/den at the minimizer, until |F(σ_k)| ≤ tol. The best iterate
    seen is returned.

    When no relaxed first round raises κ above r₀, the boundary ε₁ = ε with
    p' = λ/κ is returned without iterating.

    Args:
        terms (RateTerms): Mean rate terms of the link.
        n (int): Blocklength.
        eps_t (float): Aggregate error target in (0, 0.25].
        arrival_rate (float): λ (< r₀).
        tol (float, optional): Stopping tolerance on |F|. Defaults to 1e-8.
        max_iter (int, optional): Iteration cap. Defaults to 50.
        scan_points (int, optional): Inner scan size. Defaults to 64.

    Raises:
        DomainError: eps_t outside (0, 0.25] or tol ≤ 0.
        InfeasibleError: λ ≥ r₀.
        ConvergenceError: max_iter exhausted.

    Returns:
        OptimResult: ε₁*, the minimal p', and a trace of DinkelbachState.
    """
    if not 0 < eps_t <= 0.25:
        raise DomainError(f'eps_t must lie in (0, 0.25], got {eps_t}')
    if not tol > 0:
        raise DomainError('tol must be positive')
    lam = float(arrival_rate)
    r0 = averaged_arq_rates(terms, n, eps_t, eps_t).r0
    if not lam < r0:
        raise InfeasibleError(f'λ={lam} is not below the mean rate r₀={r0:.6g}')

    def ratio(e):
        return nbp_modified(averaged_arq_rates(terms, n, eps_t, e), lam)

    window = _kappa_window(terms, n, eps_t)
    if window is None:
        logger.info('No relaxed first round raises the mean rate; keeping ε₁ = ε = %g', eps_t)
        return OptimResult(float(eps_t), float(ratio(eps_t)), 0, True,
                           (float(eps_t), float(eps_t)), [])
    lo, hi = window

    def num_den(e):
        k = averaged_arq_rates(terms, n, eps_t, e).kappa
        return k - np.sqrt(max(k * k - 4.0 * (k - r0) * lam, 0.0)), 2.0 * (k - r0)

    x = float(np.clip(np.sqrt(eps_t), lo, hi))
    sigma = ratio(x)
    best_x, best = x, sigma
    trace = []
    for iteration in range(1, max_iter + 1):
        def sub(e, s=sigma):
            nm, dn = num_den(e)
            return nm - s * dn

        res = log_scan_min(sub, lo, hi, scan_points)
        if res.value_opt <= sub(x):
            x = res.arg_opt
        f_value = float(sub(x))
        value = ratio(x)
        if value < best:
            best_x, best = x, value
        trace.append(DinkelbachState(float(sigma), f_value, x, tol, max_iter))
        logger.debug('Dinkelbach k=%d sigma=%.12g F=%.3e eps1=%.6g', iteration, sigma,
                     f_value, x)
        if abs(f_value) <= tol:
            return OptimResult(best_x, float(best), iteration, True, (lo, hi), trace)
        nm, dn = num_den(x)
        sigma = nm / dn
    raise ConvergenceError(f'Dinkelbach did not reach |F| ≤ {tol:g} in {max_iter} iterations')


def min_power_params(p, eps_target, arrival_rate, nack_overhead=6.0, model=None, cfg=None,
                     tol=1e-8):
    """Error split minimizing the ARQ transmit power (minimal p').

    Args:
        p (LinkParams): Link parameters.
        eps_target (float): Aggregate error target.
        arrival_rate (float): λ.
        nack_overhead (float, optional): NACK span in symbols. Defaults to 6.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        tol (float, optional): Dinkelbach tolerance. Defaults to 1e-8.

    Returns:
        tuple: (ArqParams, OptimResult).
    """
    terms = mean_rate_terms(p, model, cfg)
    res = dinkelbach_min_nbp(terms, p.n, eps_target, arrival_rate, tol)
    eps1 = min(max(res.arg_opt, eps_target), EPS_CEILING)
    return ArqParams(eps1=eps1, eps_target=eps_target, nack_overhead=nack_overhead), res


def shannon_optimal_power(p, q, pm, tm, cfg=None, rho_max=1000.0, n_grid=256, model=None):
    """Long-packet counterpart of maximize_eee_constrained."""
    return maximize_eee_constrained(p, q, pm, tm, cfg, rho_max, n_grid, EcMethod.SHANNON, model)
