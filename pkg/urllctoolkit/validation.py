"""Cross-check battery behind the `validate` command.

Every check pairs a toolkit result with an oracle from .oracles (or a known
constant) and records the outcome as an OracleReport.
"""
import logging
from dataclasses import replace

import numpy as np
import pandas as pd

from .arq_ebp import (arq_rates, averaged_arq_rates, kappa_curvature_check, nbp_modified,
                      theorem4_upper_bound)
from .effective_capacity import (EcMethod, QoSConstraints, ec_stochastic, ec_theorem1,
                                 delay_bound, j_kernel, j_kernel_drho, psi_lemma1,
                                 psi_stochastic)
from .eee_models import PowerModel
from .fbl_rate import LinkParams, mean_rate_terms, rate, rate_drho
from .optimizers import (dinkelbach_min_nbp, epsilon_objective, min_power_params,
                         optimal_epsilon, optimal_power_golden, optimal_power_theorem3)
from .math_kernels import finite_diff
from .oracles import OracleReport, gauss_legendre_psi, grid_argopt_oracle, mc_ec_oracle
from .tools import db_to_linear

logger = logging.getLogger(__name__)

STDERR_ACCEPT = 3.0


def _delay_checks():
    q = QoSConstraints(theta=0.01, delta=500.0, violation=1e-5)
    return [
        OracleReport.compare('delay_bound_theta_0.01', delay_bound(1.0, q), 1151, 0,
                             'abs'),
        OracleReport.compare('delay_bound_theta_0.1', delay_bound(1.0, q, 0.1), 115,
                             0, 'abs'),
    ]


def _ec_checks(cfg, samples, seed):
    p = LinkParams(n=500, rho=2.0, m=1.0, epsilon=1e-4)
    q = QoSConstraints(theta=0.01)
    mc = mc_ec_oracle(p, q, samples, seed)
    reports = [
        OracleReport.compare('psi_quadrature_vs_mc', psi_stochastic(p, q, cfg), mc.psi,
                             STDERR_ACCEPT, 'stderr', mc.psi_stderr),
        OracleReport.compare('psi_quadrature_vs_gauss_legendre', psi_stochastic(p, q, cfg),
                             gauss_legendre_psi(p, q), 1e-6),
    ]
    p10 = replace(p, rho=float(db_to_linear(10.0)))
    q3 = QoSConstraints(theta=1e-3)
    reports.append(OracleReport.compare('psi_series_3_terms', psi_lemma1(p10, q3, cfg=cfg).value,
                                        psi_stochastic(p10, q3, cfg), 1e-3))
    reports.append(OracleReport.compare('ec_closed_form', ec_theorem1(p10, q3, cfg).ec,
                                        ec_stochastic(p10, q3, cfg).ec, 1e-2))
    return reports


def _derivative_checks(cfg):
    p = LinkParams(n=500, rho=2.0, m=1.0, epsilon=1e-4)
    q = QoSConstraints(theta=0.01)

    def j_of(rho):
        return j_kernel(replace(p, rho=rho), q, cfg)

    def r_of(rho):
        return float(rate(replace(p, rho=rho), 1.0))

    reports = [
        OracleReport.compare('j_kernel_drho', j_kernel_drho(p, q, cfg),
                             finite_diff(j_of, p.rho, rel_step=1e-4), 1e-5),
        OracleReport.compare('rate_drho', float(rate_drho(p, 1.0)),
                             finite_diff(r_of, p.rho), 1e-6),
    ]
    curvature = kappa_curvature_check(replace(p, rho=float(db_to_linear(6.0)), epsilon=1e-9),
                                      1e-9, points=200, cfg=cfg)
    reports.append(OracleReport.compare('kappa_d2_vs_finite_diff', curvature.fd_rel_error, 0.0,
                                        1e-4, 'abs'))
    reports.append(OracleReport.compare('kappa_concave_cells', len(curvature.violations), 0, 0,
                                        'abs'))
    return reports


def _optimizer_checks(cfg):
    p = LinkParams(n=500, rho=2.0, m=1.0, epsilon=1e-4)
    q = QoSConstraints(theta=0.01)
    pm = PowerModel(zeta=1.2, pc=1.2)
    eps = optimal_epsilon(p, q, cfg)
    _, psi_grid = grid_argopt_oracle(epsilon_objective(p, q, cfg), (1e-12, 0.5), log=True)
    reports = [OracleReport.compare('optimal_epsilon_value', eps.value_opt, psi_grid, 1e-8)]

    q3 = QoSConstraints(theta=1e-3)
    root = optimal_power_theorem3(p, q3, pm, cfg)
    golden = optimal_power_golden(p, q3, pm, cfg, EcMethod.THEOREM1)
    reports.append(OracleReport.compare('optimal_power_root_vs_golden', root.arg_opt,
                                        golden.arg_opt, 1e-3))
    return reports


def _arq_checks(cfg):
    p = LinkParams(n=500, rho=float(db_to_linear(6.0)), m=1.0, epsilon=1e-9)
    eps_t, lam = 1e-9, 0.5
    terms = mean_rate_terms(p, cfg=cfg)
    res = dinkelbach_min_nbp(terms, p.n, eps_t, lam)

    def p_nb(e):
        return nbp_modified(averaged_arq_rates(terms, p.n, eps_t, e), lam)

    _, grid_min = grid_argopt_oracle(p_nb, res.bracket, log=True)
    reports = [OracleReport.compare('dinkelbach_min_nbp', res.value_opt, grid_min, 1e-6, 'abs')]

    a, _ = min_power_params(p, eps_t, lam, cfg=cfg)
    rates = arq_rates(p, a, cfg=cfg)
    pn = nbp_modified(rates, lam)
    residual = pn * (pn * (rates.r0 - rates.kappa) + rates.kappa) - lam
    reports.append(OracleReport.compare('nbp_modified_residual', residual, 0.0, 1e-10, 'abs'))
    bound = theorem4_upper_bound(rates, a, pn, PowerModel(zeta=1.2, pc=0.2), p.rho)
    reports.append(OracleReport.compare('arq_eee_ceiling', bound, 1.07, 0.1))
    return reports


def run_validation(cfg=None, samples=200_000, seed=0):
    """Runs every cross-check.

    Args:
        cfg (EvalConfig, optional): Evaluation settings of the primary side. Defaults to None.
        samples (int, optional): Monte Carlo oracle draws. Defaults to 200000.
        seed (int, optional): Oracle seed. Defaults to 0.

    Returns:
        list: OracleReport per check.
    """
    reports = []
    for name, checks in (('delay', _delay_checks), ('ec', lambda: _ec_checks(cfg, samples, seed)),
                         ('derivatives', lambda: _derivative_checks(cfg)),
                         ('optimizers', lambda: _optimizer_checks(cfg)),
                         ('arq', lambda: _arq_checks(cfg))):
        batch = checks()
        logger.info('Validation group %s: %d/%d passed', name,
                    sum(r.passed for r in batch), len(batch))
        reports.extend(batch)
    return reports


def reports_frame(reports):
    """OracleReport rows as a DataFrame."""
    return pd.DataFrame([r.as_row() for r in reports],
                        columns=['quantity', 'primary', 'oracle', 'tolerance', 'kind', 'stderr',
                                 'passed'])
