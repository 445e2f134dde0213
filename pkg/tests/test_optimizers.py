from dataclasses import replace

import numpy as np
import pytest

from urllctoolkit.eee_models import PowerModel, TrafficModel
from urllctoolkit.effective_capacity import EcMethod, QoSConstraints
from urllctoolkit.errors import DomainError, InfeasibleError
from urllctoolkit.arq_ebp import averaged_arq_rates, nbp_modified
from urllctoolkit.fbl_rate import RateTerms, mean_rate_terms
from urllctoolkit.optimizers import (check_constraints, dinkelbach_min_nbp, eee_closed_form,
                                     epsilon_objective, golden_section_max,
                                     golden_section_min, log_scan_max, log_scan_min,
                                     maximize_eee_constrained, min_power_params,
                                     optimal_epsilon, optimal_power_golden,
                                     optimal_power_theorem3)
from urllctoolkit.oracles import grid_argopt_oracle
from urllctoolkit.tools import db_to_linear

EPS = 1e-9


def test_golden_section_min_quadratic():
    res = golden_section_min(lambda x: (x - 2.0) ** 2 + 1.0, 0.0, 5.0)
    assert res.converged
    assert res.arg_opt == pytest.approx(2.0, abs=1e-6)
    assert res.value_opt == pytest.approx(1.0)


def test_golden_section_monotone_returns_edge():
    assert golden_section_min(lambda x: x, 1.0, 3.0).arg_opt == 1.0
    assert golden_section_max(lambda x: x, 1.0, 3.0).arg_opt == 3.0


def test_golden_section_nan_is_worst():
    res = golden_section_min(lambda x: np.nan if x > 4.0 else (x - 1.0) ** 2, 0.0, 5.0)
    assert res.arg_opt == pytest.approx(1.0, abs=1e-6)


def test_golden_section_empty_interval():
    with pytest.raises(DomainError):
        golden_section_min(lambda x: x, 1.0, 1.0)


def test_log_scan():
    res = log_scan_min(lambda x: (np.log(x) - np.log(3.0)) ** 2, 1e-3, 1e3)
    assert res.arg_opt == pytest.approx(3.0, rel=1e-6)
    top = log_scan_max(lambda x: -(np.log(x) - np.log(0.02)) ** 2, 1e-6, 1.0)
    assert top.arg_opt == pytest.approx(0.02, rel=1e-6)
    assert top.value_opt == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        log_scan_min(lambda x: x, 0.0, 1.0)


def test_optimal_epsilon_matches_grid(link, qos):
    res = optimal_epsilon(link, qos)
    _, grid_min = grid_argopt_oracle(epsilon_objective(link, qos), (1e-12, 0.5), log=True)
    assert res.value_opt == pytest.approx(grid_min, rel=1e-8)
    assert 1e-12 <= res.arg_opt <= 0.5


def test_optimal_epsilon_clipped_to_target(link, qos):
    free = optimal_epsilon(link, qos).arg_opt
    target = free / 10.0
    clipped = optimal_epsilon(link, replace(qos, epsilon_t=target))
    assert clipped.arg_opt == target


def test_optimal_epsilon_needs_delay_exponent(link):
    with pytest.raises(DomainError):
        optimal_epsilon(link, QoSConstraints(theta=0.0))


def test_epsilon_objective_nakagami_uses_expectation(link, qos):
    f = epsilon_objective(replace(link, m=2.0), qos)
    assert 0.0 < f(1e-4) < 1.0


def test_theorem3_optimal_power(link):
    q = QoSConstraints(theta=1e-3)
    pm = PowerModel(zeta=1.2, pc=1.2)
    res = optimal_power_theorem3(link, q, pm)
    assert res.converged
    assert res.arg_opt == pytest.approx(1.68, rel=0.02)
    golden = optimal_power_golden(link, q, pm, method=EcMethod.THEOREM1)
    assert res.arg_opt == pytest.approx(golden.arg_opt, rel=1e-3)
    assert res.value_opt == pytest.approx(eee_closed_form(replace(link, rho=res.arg_opt), q,
                                                          pm))


def test_theorem3_power_grows_as_delay_relaxes(link):
    pm = PowerModel(zeta=1.2, pc=1.2)
    rhos = [optimal_power_theorem3(link, QoSConstraints(theta=theta), pm).arg_opt
            for theta in (1e-3, 3e-3, 1e-2)]
    assert rhos[0] > rhos[1] > rhos[2]


def test_theorem3_rejects_other_fading_and_zero_theta(link):
    pm = PowerModel(zeta=1.2, pc=1.2)
    with pytest.raises(DomainError):
        optimal_power_theorem3(replace(link, m=2.0), QoSConstraints(theta=1e-3), pm)
    with pytest.raises(DomainError):
        optimal_power_theorem3(link, QoSConstraints(theta=0.0), pm)


def test_optimal_power_golden_beats_neighbours(link, qos, power):
    res = optimal_power_golden(link, qos, power)
    for factor in (0.5, 2.0):
        other = optimal_power_golden(link, qos, power, rho_max=res.arg_opt * factor)
        assert other.value_opt <= res.value_opt * (1.0 + 1e-9)


@pytest.fixture
def fig4_problem(link):
    q = QoSConstraints(theta=0.0, delta=500.0, violation=1e-2, epsilon_t=1e-4)
    return link, q, PowerModel(zeta=1.2, pc=0.2), TrafficModel(arrival_rate=1.0)


def test_constrained_optimum_meets_constraints(fig4_problem):
    p, q, pm, tm = fig4_problem
    rho_max = float(db_to_linear(13.0))
    opt = maximize_eee_constrained(p, q, pm, tm, rho_max=rho_max, n_grid=32)
    assert all(opt.constraints.values())
    assert opt.point.feasible
    assert opt.point.epsilon <= q.epsilon_t
    assert opt.point.rho <= rho_max * (1.0 + 1e-9)
    assert opt.result.eee == pytest.approx(opt.point.ec / opt.point.p_total)
    assert check_constraints(opt.point, q, tm, rho_max) == opt.constraints


def test_constrained_full_buffer_not_better(fig4_problem):
    p, q, pm, tm = fig4_problem
    rho_max = float(db_to_linear(13.0))
    ebp = maximize_eee_constrained(p, q, pm, tm, rho_max=rho_max, n_grid=32)
    full = maximize_eee_constrained(p, q, pm, replace(tm, buffer_mode='full_buffer'),
                                    rho_max=rho_max, n_grid=32)
    assert full.result.eee <= ebp.result.eee * (1.0 + 1e-9)


def test_constrained_infeasible(fig4_problem):
    p, q, pm, _ = fig4_problem
    with pytest.raises(InfeasibleError):
        maximize_eee_constrained(p, q, pm, TrafficModel(arrival_rate=50.0), rho_max=20.0,
                                 n_grid=16)


@pytest.fixture
def arq_terms(arq_link):
    return mean_rate_terms(arq_link)


def test_dinkelbach_converges(arq_link, arq_terms):
    res = dinkelbach_min_nbp(arq_terms, arq_link.n, EPS, 0.5)
    assert res.converged
    assert res.iterations <= 15
    sigmas = [state.sigma for state in res.trace]
    assert all(b < a for a, b in zip(sigmas, sigmas[1:]))
    assert abs(res.trace[-1].f_value) <= 1e-8


def test_dinkelbach_matches_grid(arq_link, arq_terms):
    res = dinkelbach_min_nbp(arq_terms, arq_link.n, EPS, 0.5)

    def p_nb(e):
        return nbp_modified(averaged_arq_rates(arq_terms, arq_link.n, EPS, e), 0.5)

    _, grid_min = grid_argopt_oracle(p_nb, res.bracket, log=True)
    assert res.value_opt == pytest.approx(grid_min, abs=1e-6)
    assert res.value_opt == pytest.approx(0.287, abs=0.01)


def test_dinkelbach_domain(arq_link, arq_terms):
    with pytest.raises(DomainError):
        dinkelbach_min_nbp(arq_terms, arq_link.n, 0.3, 0.5)
    with pytest.raises(DomainError):
        dinkelbach_min_nbp(arq_terms, arq_link.n, EPS, 0.5, tol=0.0)
    with pytest.raises(InfeasibleError):
        dinkelbach_min_nbp(arq_terms, arq_link.n, EPS, 2.0)


def test_min_power_params(arq_link):
    a, res = min_power_params(arq_link, EPS, 0.5)
    assert a.eps1 == res.arg_opt
    assert a.eps1 * a.eps2 == pytest.approx(EPS, rel=1e-12)
    assert a.nack_overhead == 6.0
    assert a.eps1 == pytest.approx(0.02, rel=0.5)


def test_min_power_params_beats_whole_split_range(arq_link, arq_terms):
    # the search must leave the ε₁ = ε_t end, where numerator and denominator both vanish
    a, res = min_power_params(arq_link, EPS, 0.5)

    def p_nb(e):
        return nbp_modified(averaged_arq_rates(arq_terms, arq_link.n, EPS, e), 0.5)

    x_grid, grid_min = grid_argopt_oracle(p_nb, (EPS, 0.5), log=True)
    assert res.value_opt == pytest.approx(grid_min, abs=1e-6)
    assert a.eps1 == pytest.approx(x_grid, rel=0.1)
    assert a.eps1 == pytest.approx(0.0239, rel=0.05)
    assert a.eps2 < 1e-6
    assert res.value_opt < p_nb(np.sqrt(EPS))
    assert res.value_opt < p_nb(EPS)


def test_dinkelbach_returns_boundary_without_retransmission_gain():
    # rate independent of ε: κ never exceeds r₀ and splitting buys nothing
    terms = RateTerms(shannon=1.0, dispersion_root=0.0, phi=0.0, mu=0.0)
    eps_t = 1e-3
    res = dinkelbach_min_nbp(terms, 500, eps_t, 0.5)
    assert res.converged
    assert res.iterations == 0
    assert res.arg_opt == eps_t
    assert res.bracket == (eps_t, eps_t)
    rates = averaged_arq_rates(terms, 500, eps_t, eps_t)
    assert res.value_opt == pytest.approx(nbp_modified(rates, 0.5))
