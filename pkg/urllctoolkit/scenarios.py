"""Parameter sweeps behind each experiment and the two-user SIC example.

Rows are pure functions of (spec, grid value, row index), so a sweep is
reproducible for a fixed seed whatever the worker count.
"""
import asyncio
import enum
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy import integrate

from . import config
from .arq_ebp import (arq_rates, eee_arq, equal_split_params, nbp_modified, power_arq,
                      theorem4_upper_bound)
from .channel import EvalMethod, FadingModel, sample
from .eee_models import (BufferMode, TrafficModel, eee_ebp, eee_full_buffer, eee_shannon_ebp,
                         nbp, nbp_shannon, theta_star)
from .effective_capacity import EcMethod, QoSConstraints, ec_from_psi, psi_stochastic
from .errors import ConvergenceError, DomainError, InfeasibleError, SlackConstraintWarning
from .fbl_rate import LinkParams, achievable_rate, expected_rate
from .math_kernels import fading_upper_limit
from .optimizers import maximize_eee_constrained, min_power_params
from .tools import chunks, db_to_linear, linear_to_db, round_sig

logger = logging.getLogger(__name__)


class Experiment(str, enum.Enum):
    FIG1 = 'fig1'
    FIG2 = 'fig2'
    FIG3 = 'fig3'
    FIG4 = 'fig4'
    FIG5 = 'fig5'
    FIG6 = 'fig6'
    FIG7 = 'fig7'
    FIG8 = 'fig8'
    FIG9 = 'fig9'
    FIG10 = 'fig10'


AXES = {
    Experiment.FIG1: 'rho_db', Experiment.FIG2: 'theta', Experiment.FIG3: 'arrival_rate',
    Experiment.FIG4: 'delta', Experiment.FIG5: 'lambda1', Experiment.FIG6: 'delta',
    Experiment.FIG7: 'theta', Experiment.FIG8: 'epsilon', Experiment.FIG9: 'arrival_rate',
    Experiment.FIG10: 'arrival_rate',
}

COLUMNS = {
    Experiment.FIG1: ['rho_db', 'theta', 'eee_closed', 'eee_stochastic', 'n'],
    Experiment.FIG2: ['theta', 'pc', 'eee_fbl', 'eee_shannon', 'ec_fbl', 'ec_shannon'],
    Experiment.FIG3: ['arrival_rate', 'pc', 'p_nb', 'eee_fbl', 'p_nb_shannon', 'eee_shannon',
                      'feasible'],
    Experiment.FIG4: ['delta', 'violation', 'eee_ebp', 'eee_full_buffer', 'eee_shannon',
                      'rho_db_ebp', 'epsilon_ebp', 'theta_ebp', 'feasible'],
    Experiment.FIG5: ['lambda1', 'p_nb1', 'p_nb2', 'eee_user1', 'eee_user2', 'residual',
                      'converged'],
    Experiment.FIG6: ['delta', 'violation', 'rho_db_ebp', 'rho_db_full_buffer',
                      'rho_db_shannon', 'feasible'],
    Experiment.FIG7: ['theta', 'eee_min_power', 'eee_equal_split', 'eee_ebp',
                      'eee_full_buffer', 'upper_bound', 'eps1', 'p_nb_mod', 'tau_n',
                      'gain_vs_ebp'],
    Experiment.FIG8: ['epsilon', 'violation', 'theta_ebp', 'eee_ebp', 'eee_full_buffer',
                      'eee_shannon', 'feasible'],
    Experiment.FIG9: ['arrival_rate', 'p_total_arq', 'p_total_ebp', 'p_total_full_buffer',
                      'p_nb', 'p_nb_mod'],
    Experiment.FIG10: ['arrival_rate', 'eps_target', 'tau_n', 'p_nb_mod', 'eps1'],
}

SIC_NOTES = (
    'two-user uplink with successive interference cancellation',
    'user 2 is decoded first, treating user 1 as interference while user 1 has data',
    'user 1 is decoded interference-free after ideal cancellation',
)


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: the swept axis, its grid and the fixed parameter record.

    Args:
        experiment (Experiment): Experiment id.
        grid (tuple): Strictly monotone axis values.
        fixed (dict): Resolved parameters (see config.resolve_config).
        methods (tuple, optional): EC methods compared. Defaults to stochastic.
        notes (tuple, optional): Modelling notes echoed in output headers.
    """
    experiment: Experiment
    grid: tuple
    fixed: dict
    methods: tuple = (EcMethod.STOCHASTIC,)
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'experiment', Experiment(self.experiment))
        grid = np.asarray(self.grid, dtype=float)
        if grid.size == 0:
            raise DomainError('Sweep grid is empty')
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise DomainError('Sweep grid must be strictly monotone')
        object.__setattr__(self, 'grid', tuple(float(g) for g in grid))

    @property
    def axis(self):
        return AXES[self.experiment]


@dataclass(frozen=True)
class TwoUserConfig:
    """Two users sharing a base station with SIC; user 2 is decoded first.

    Args:
        rho1 (float): User 1 transmit power (watts).
        rho2 (float): User 2 transmit power (watts).
        eps1_user (float): User 1 error probability.
        eps2_user (float): User 2 error probability.
        lambda1 (float): User 1 arrival rate.
        lambda2 (float): User 2 arrival rate.
        n (int, optional): Blocklength. Defaults to 500.
        theta (float, optional): Delay exponent. Defaults to 0.01.
        pm (PowerModel, optional): Power model. Defaults to config defaults.
        delta (float, optional): Delay bound. Defaults to 500.
        m (float, optional): Fading shape. Defaults to 1.0.
    """
    rho1: float
    rho2: float
    eps1_user: float
    eps2_user: float
    lambda1: float
    lambda2: float
    n: int = 500
    theta: float = 0.01
    pm: object = None
    delta: float = 500.0
    m: float = 1.0

    def __post_init__(self):
        if self.pm is None:
            object.__setattr__(self, 'pm', config.power_model(config.BASE))
        if not (self.rho1 >= 0 and self.rho2 > 0):
            raise DomainError('User powers must be non-negative (user 2 positive)')
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise DomainError('Arrival rates must be positive')


@dataclass(frozen=True)
class TwoUserResult:
    p_nb1: float
    p_nb2: float
    eee_user1: float
    eee_user2: float
    mean_rate_user2: float
    iterations: int
    residual: float
    converged: bool


def build_spec(experiment, points=None, preset_overrides=None, file_values=None):
    """SweepSpec with the preset grid and parameters of an experiment.

    Args:
        experiment (Experiment|str): Experiment id.
        points (int, optional): Grid size. Defaults to the resolved 'points' (41).
        preset_overrides (dict, optional): Flag overrides. Defaults to None.
        file_values (dict, optional): Config file values. Defaults to None.

    Returns:
        SweepSpec: Ready to run.
    """
    experiment = Experiment(experiment)
    fixed = config.resolve_config(experiment.value, file_values, preset_overrides)
    count = int(points or fixed['points'])
    lo, hi = fixed['grid_lo'], fixed['grid_hi']
    if fixed['grid_scale'] == 'log':
        grid = np.geomspace(lo, hi, count)
    else:
        grid = np.linspace(lo, hi, count)
    methods = {Experiment.FIG1: (EcMethod.THEOREM1, EcMethod.STOCHASTIC)}.get(
        experiment, (EcMethod.STOCHASTIC,))
    notes = SIC_NOTES if experiment == Experiment.FIG5 else ()
    return SweepSpec(experiment, tuple(grid), fixed, methods, notes)


def _expect2(g, m, cfg, task):
    # E[g(Z1, Z2)] for independent unit-mean gamma(m) gains
    model = FadingModel(m)
    if cfg is not None and cfg.method == EvalMethod.MONTE_CARLO:
        z1 = sample(model, cfg, cfg.mc_samples, 2 * task)
        z2 = sample(model, cfg, cfg.mc_samples, 2 * task + 1)
        return float(np.mean(g(z1, z2)))
    dist = model.distribution
    z_max = fading_upper_limit(m)
    quad = cfg.quad if cfg is not None else None
    abs_tol = max(quad.abs_tol if quad else 1e-12, 1e-10)
    rel_tol = max(quad.rel_tol if quad else 1e-10, 1e-8)
    value, _ = integrate.dblquad(lambda z2, z1: g(z1, z2) * dist.pdf(z1) * dist.pdf(z2),
                                 0.0, z_max, 0.0, z_max, epsabs=abs_tol, epsrel=rel_tol)
    return float(value)


def two_user_sic(tu, cfg=None, tol=1e-8, max_iter=100, damping=1.0, task=0):
    """Non-empty buffer probabilities and per-user EEE for the two-user SIC uplink.

    User 1 sees no interference, so P_nb1 = λ1/E[max(r(ρ1Z1), 0)]. User 2 is
    interfered by user 1 only while user 1 has data:
    E[r_2] = P_nb1 E[max(r(SINR), 0)] + (1-P_nb1) E[max(r(ρ2Z2), 0)] with
    SINR = ρ2Z2/(1+ρ1Z1), and P_nb2 = λ2/E[r_2]. ψ of user 2 mixes the two
    channel states with the same weights. The pair is iterated with damping
    until the update moves less than tol.

    Args:
        tu (TwoUserConfig): Configuration.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        tol (float, optional): Fixed-point tolerance. Defaults to 1e-8.
        max_iter (int, optional): Iteration cap. Defaults to 100.
        damping (float, optional): Weight of the new iterate in (0, 1]. Defaults to 1.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        TwoUserResult: Per-user P_nb and EEE with the fixed-point diagnostics.
    """
    if not 0 < damping <= 1:
        raise DomainError(f'damping must lie in (0, 1], got {damping}')
    user1 = LinkParams(n=tu.n, rho=tu.rho1, m=tu.m, epsilon=tu.eps1_user)
    user2 = LinkParams(n=tu.n, rho=tu.rho2, m=tu.m, epsilon=tu.eps2_user)
    t = tu.n * tu.theta

    def rate2(z1, z2):
        return np.maximum(achievable_rate(tu.rho2 * z2 / (1.0 + tu.rho1 * z1), tu.n,
                                          tu.eps2_user), 0.0)

    def psi2(z1, z2):
        r = achievable_rate(tu.rho2 * z2 / (1.0 + tu.rho1 * z1), tu.n, tu.eps2_user)
        return tu.eps2_user + (1.0 - tu.eps2_user) * np.exp(-t * r)

    tm1 = TrafficModel(tu.lambda1)
    p1_load = nbp(user1, tm1, cfg=cfg, task=task).p_nb
    mean2_free = expected_rate(user2, cfg=cfg, clamp_nonneg=True, task=task).value
    q2 = QoSConstraints(theta=tu.theta, delta=tu.delta)
    psi2_free = psi_stochastic(user2, q2, cfg, task=task)
    if tu.rho1 == 0:
        mean2_int, psi2_int = mean2_free, psi2_free
    else:
        mean2_int = _expect2(rate2, tu.m, cfg, task)
        psi2_int = _expect2(psi2, tu.m, cfg, task)

    def update():
        mean2 = p1_load * mean2_int + (1.0 - p1_load) * mean2_free
        return np.array([p1_load, min(tu.lambda2 / mean2, 1.0)]), mean2

    state = np.ones(2)
    residual, mean2 = np.inf, np.nan
    iteration = 0
    while iteration < max_iter and residual > tol:
        new, mean2 = update()
        new = (1.0 - damping) * state + damping * new
        residual = float(np.max(np.abs(new - state)))
        state = new
        iteration += 1
    converged = residual <= tol
    if not converged:
        logger.warning('Two-user fixed point stopped at residual %.3e', residual)

    p1, p2 = (float(s) for s in state)
    q1 = QoSConstraints(theta=tu.theta, delta=tu.delta)
    eee1 = eee_ebp(user1, q1, tu.pm, tm1, cfg, task=task).eee
    ec2 = ec_from_psi(p1 * psi2_int + (1.0 - p1) * psi2_free, tu.n, tu.theta)
    eee2 = ec2 / (p2 * tu.pm.zeta * tu.rho2 + tu.pm.pc)
    return TwoUserResult(p1, p2, float(eee1), float(eee2), float(mean2), iteration,
                         residual, bool(converged))


def _link(c, rho=None, **changes):
    return replace(config.link_params(c, rho), **changes)


def _quiet_theta(tm, q, p_nb):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', SlackConstraintWarning)
        return theta_star(tm, q, p_nb)


def _rows_fig1(spec, value, cfg, task):
    c = spec.fixed
    rho = float(db_to_linear(value))
    pm = config.power_model(c)
    rows = []
    for n in c['ns']:
        p = _link(c, rho, n=int(n))
        for theta in c['thetas']:
            q = replace(config.qos_constraints(c), theta=theta)
            closed = eee_full_buffer(p, q, pm, cfg, EcMethod.THEOREM1, task=task).eee
            stoch = eee_full_buffer(p, q, pm, cfg, EcMethod.STOCHASTIC, task=task).eee
            rows.append([value, theta, closed, stoch, int(n)])
    return rows


def _rows_fig2(spec, value, cfg, task):
    c = spec.fixed
    p = _link(c)
    q = replace(config.qos_constraints(c), theta=value)
    rows = []
    for pc in c['pcs']:
        pm = replace(config.power_model(c), pc=pc)
        fbl = eee_full_buffer(p, q, pm, cfg, EcMethod.STOCHASTIC, task=task)
        sh = eee_full_buffer(p, q, pm, cfg, EcMethod.SHANNON, task=task)
        rows.append([value, pc, fbl.eee, sh.eee, fbl.ec, sh.ec])
    return rows


def _rows_fig3(spec, value, cfg, task):
    c = spec.fixed
    p = _link(c)
    q = config.qos_constraints(c)
    tm = TrafficModel(value)
    rows = []
    for pc in c['pcs']:
        pm = replace(config.power_model(c), pc=pc)
        fbl = eee_ebp(p, q, pm, tm, cfg, EcMethod.STOCHASTIC, task=task)
        sh = eee_shannon_ebp(p, q, pm, tm, cfg, task=task)
        rows.append([value, pc, fbl.p_nb, fbl.eee, sh.p_nb, sh.eee, fbl.feasible])
    return rows


def _constrained(c, q, pm, tm, cfg, method):
    rho_max = float(db_to_linear(c['rho_max_db']))
    try:
        return maximize_eee_constrained(_link(c), q, pm, tm, cfg, rho_max, c['n_grid'], method)
    except InfeasibleError as exc:
        logger.info('Infeasible row: %s', exc)
        return None


def _constrained_trio(spec, value, cfg):
    c = spec.fixed
    pm = config.power_model(c)
    out = []
    for violation in c['violations']:
        q = replace(config.qos_constraints(c), delta=value, violation=violation)
        ebp = _constrained(c, q, pm, TrafficModel(c['arrival_rate']), cfg, EcMethod.THEOREM1)
        full = _constrained(c, q, pm, TrafficModel(c['arrival_rate'], BufferMode.FULL_BUFFER),
                            cfg, EcMethod.THEOREM1)
        shannon = _constrained(c, q, pm, TrafficModel(c['arrival_rate']), cfg, EcMethod.SHANNON)
        out.append((violation, ebp, full, shannon))
    return out


def _field(opt, getter):
    return np.nan if opt is None else getter(opt)


def _rows_fig4(spec, value, cfg, task):
    rows = []
    for violation, ebp, full, shannon in _constrained_trio(spec, value, cfg):
        rows.append([value, violation, _field(ebp, lambda o: o.result.eee),
                     _field(full, lambda o: o.result.eee),
                     _field(shannon, lambda o: o.result.eee),
                     _field(ebp, lambda o: float(linear_to_db(o.point.rho))),
                     _field(ebp, lambda o: o.point.epsilon),
                     _field(ebp, lambda o: o.point.theta), ebp is not None])
    return rows


def _rows_fig6(spec, value, cfg, task):
    rows = []
    rho_db = lambda o: float(linear_to_db(o.point.rho))
    for violation, ebp, full, shannon in _constrained_trio(spec, value, cfg):
        rows.append([value, violation, _field(ebp, rho_db), _field(full, rho_db),
                     _field(shannon, rho_db), ebp is not None])
    return rows


def _rows_fig5(spec, value, cfg, task):
    c = spec.fixed
    tu = TwoUserConfig(rho1=float(db_to_linear(c['rho1_db'])),
                       rho2=float(db_to_linear(c['rho2_db'])), eps1_user=c['eps_user1'],
                       eps2_user=c['eps_user2'], lambda1=value, lambda2=c['lambda2'],
                       n=int(c['n']), theta=c['theta'], pm=config.power_model(c),
                       delta=c['delta'], m=c['m'])
    res = two_user_sic(tu, cfg, damping=c['damping'], task=task)
    return [[value, res.p_nb1, res.p_nb2, res.eee_user1, res.eee_user2, res.residual,
             res.converged]]


def _arq_link(c, eps):
    return _link(c, epsilon=eps)


def _rows_fig7(spec, value, cfg, task):
    c = spec.fixed
    eps = c['eps_target']
    p = _arq_link(c, eps)
    q = replace(config.qos_constraints(c), theta=value)
    pm = config.power_model(c)
    tm = TrafficModel(c['arrival_rate'])
    a_min, _ = min_power_params(p, eps, tm.arrival_rate, c['nack_overhead'], cfg=cfg)
    best = eee_arq(p, q, a_min, pm, tm, cfg=cfg, task=task)
    equal = eee_arq(p, q, equal_split_params(eps, c['nack_overhead']), pm, tm, cfg=cfg,
                    task=task)
    ebp = eee_ebp(p, q, pm, tm, cfg, task=task).eee
    full = eee_full_buffer(p, q, pm, cfg, task=task).eee
    rates = arq_rates(p, a_min, cfg=cfg, task=task)
    bound = theorem4_upper_bound(rates, a_min, best.p_nb_mod, pm, p.rho)
    # gain is undefined once plain EBP has a negative EC
    gain = best.eee2 / ebp if ebp > 0 else np.nan
    return [[value, best.eee2, equal.eee2, ebp, full, bound, a_min.eps1, best.p_nb_mod,
             best.tau_n, gain]]


def _rows_fig8(spec, value, cfg, task):
    c = spec.fixed
    p = _link(c, epsilon=value)
    pm = config.power_model(c)
    tm = TrafficModel(c['arrival_rate'])
    rows = []
    for violation in c['violations']:
        q = replace(config.qos_constraints(c), violation=violation)
        state = nbp(p, tm, cfg=cfg, task=task)
        theta_ebp = _quiet_theta(tm, q, state.p_nb)
        ebp = eee_ebp(p, replace(q, theta=theta_ebp), pm, tm, cfg, EcMethod.THEOREM1,
                      task=task)
        theta_full = _quiet_theta(tm, q, 1.0)
        full = eee_full_buffer(p, replace(q, theta=theta_full), pm, cfg, EcMethod.THEOREM1,
                               task=task)
        sh_state = nbp_shannon(p, tm, cfg=cfg, task=task)
        theta_sh = _quiet_theta(tm, q, sh_state.p_nb)
        shannon = eee_shannon_ebp(p, replace(q, theta=theta_sh), pm, tm, cfg, task=task)
        rows.append([value, violation, theta_ebp, ebp.eee, full.eee, shannon.eee,
                     ebp.feasible])
    return rows


def _rows_fig9(spec, value, cfg, task):
    c = spec.fixed
    eps = c['eps_target']
    p = _arq_link(c, eps)
    pm = config.power_model(c)
    tm = TrafficModel(value)
    a_min, _ = min_power_params(p, eps, value, c['nack_overhead'], cfg=cfg)
    p_mod = min(nbp_modified(arq_rates(p, a_min, cfg=cfg, task=task), value), 1.0)
    p_nb = nbp(p, tm, cfg=cfg, task=task).p_nb
    return [[value, float(power_arq(p.rho, p_mod, a_min, pm)),
             p_nb * pm.zeta * p.rho + pm.pc, pm.zeta * p.rho + pm.pc, p_nb, p_mod]]


def _rows_fig10(spec, value, cfg, task):
    c = spec.fixed
    rows = []
    for eps in c['eps_targets']:
        p = _arq_link(c, eps)
        q = config.qos_constraints(c)
        a_min, _ = min_power_params(p, eps, value, c['nack_overhead'], cfg=cfg)
        res = eee_arq(p, q, a_min, config.power_model(c), TrafficModel(value), cfg=cfg,
                      task=task)
        rows.append([value, eps, res.tau_n, res.p_nb_mod, a_min.eps1])
    return rows


ROW_FUNCTIONS = {
    Experiment.FIG1: _rows_fig1, Experiment.FIG2: _rows_fig2, Experiment.FIG3: _rows_fig3,
    Experiment.FIG4: _rows_fig4, Experiment.FIG5: _rows_fig5, Experiment.FIG6: _rows_fig6,
    Experiment.FIG7: _rows_fig7, Experiment.FIG8: _rows_fig8, Experiment.FIG9: _rows_fig9,
    Experiment.FIG10: _rows_fig10,
}


def sweep_rows(spec, index, value, cfg=None):
    """Rows of one grid point; failures become NaN rows flagged infeasible."""
    try:
        return ROW_FUNCTIONS[spec.experiment](spec, value, cfg, index)
    except (InfeasibleError, ConvergenceError) as exc:
        logger.info('Row %d (%s=%s) failed: %s', index, spec.axis, round_sig(value, 4), exc)
        columns = COLUMNS[spec.experiment]
        row = [np.nan] * len(columns)
        row[0] = value
        for flag in ('feasible', 'converged'):
            if flag in columns:
                row[columns.index(flag)] = False
        return [row]


def _run_batch(spec, batch, cfg):
    return [row for index, value in batch for row in sweep_rows(spec, index, value, cfg)]


async def pipeline_sweep(spec, cfg=None, threads=None, batch_size=4):
    """Evaluates every grid point in worker threads and assembles them in grid order.

    Args:
        spec (SweepSpec): Experiment to run.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to the sweep's own record.
        threads (int, optional): Worker count. Defaults to URLLC_THREADS or the CPU count.
        batch_size (int, optional): Grid points per submitted task. Defaults to 4.

    Returns:
        pd.DataFrame: One row per grid cell, columns fixed per experiment.
    """
    cfg = cfg or config.eval_config(spec.fixed)
    threads = threads or config.default_threads()
    loop = asyncio.get_running_loop()
    batches = list(chunks(list(enumerate(spec.grid)), batch_size))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [loop.run_in_executor(pool, _run_batch, spec, batch, cfg)
                   for batch in batches]
        results = []
        for i, rows in enumerate(await asyncio.gather(*futures)):
            logger.info('%s: batch %d/%d done', spec.experiment.value, i + 1, len(batches))
            results.extend(rows)
    return pd.DataFrame(results, columns=COLUMNS[spec.experiment])


def run_sweep(spec, cfg=None, threads=None, batch_size=4):
    """Synchronous wrapper around pipeline_sweep."""
    return asyncio.run(pipeline_sweep(spec, cfg, threads, batch_size))
