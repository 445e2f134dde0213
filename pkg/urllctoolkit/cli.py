"""Command-line front end: `urllctoolkit <command> [options]`.

Every command writes one CSV table (stdout or --out) headed by a
`# config:` line echoing the resolved parameters. Exit codes: 0 success,
1 failed validation, 2 invalid arguments, 3 infeasible problem,
4 non-convergence.
"""
import argparse
import logging
import sys
import warnings
from dataclasses import replace

import numpy as np
import pandas as pd

from . import config
from .arq_ebp import ArqParams, arq_rates, eee_arq, equal_split_params, theorem4_upper_bound
from .effective_capacity import ClosedFormTerms, EcMethod, ec_lemma1, effective_capacity
from .eee_models import eee_ebp
from .errors import ConvergenceError, DomainError, InfeasibleError
from .fbl_rate import mean_rate_terms
from .optimizers import (dinkelbach_min_nbp, maximize_eee_constrained, min_power_params,
                         optimal_epsilon, optimal_power_golden, optimal_power_theorem3)
from .scenarios import Experiment, build_spec, run_sweep
from .tools import db_to_linear, format_sig, linear_to_db
from .validation import reports_frame, run_validation

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VALIDATION, EXIT_DOMAIN, EXIT_INFEASIBLE, EXIT_CONVERGENCE = 0, 1, 2, 3, 4

# argparse dest -> config key
LINK_FLAGS = (
    ('--rho-db', 'rho_db', float, 'Transmit SNR in dB'),
    ('--n', 'n', int, 'Blocklength in channel uses'),
    ('--m', 'm', float, 'Nakagami shape'),
    ('--eps', 'epsilon', float, 'Decoding error probability'),
    ('--theta', 'theta', float, 'Delay exponent'),
    ('--delta', 'delta', float, 'Delay bound in symbol periods'),
    ('--violation', 'violation', float, 'Delay violation probability'),
    ('--eps-t', 'epsilon_t', float, 'Error probability ceiling'),
    ('--zeta', 'zeta', float, 'Inverse drain efficiency'),
    ('--pc', 'pc', float, 'Circuit power in watts'),
    ('--lambda', 'arrival_rate', float, 'Arrival rate in bpcu'),
    ('--buffer-mode', 'buffer_mode', str, 'full_buffer or ebp'),
    ('--rho-max-db', 'rho_max_db', float, 'Power ceiling in dB'),
    ('--n-grid', 'n_grid', int, 'Line-search grid size'),
)
ARQ_FLAGS = (
    ('--eps-target', 'eps_target', float, 'Aggregate reliability target'),
    ('--eps1', 'eps1', float, 'First-round error (default: minimum-power split)'),
    ('--nack-overhead', 'nack_overhead', float, 'NACK span in symbols'),
)


def _add_flags(parser, flags):
    for flag, dest, kind, helptext in flags:
        parser.add_argument(flag, dest=dest, type=kind, default=None, help=helptext)


def build_parser():
    """Argument parser with one subcommand per operation."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for INFO, -vv for DEBUG')
    common.add_argument('--config', help='key = value configuration file')
    common.add_argument('--preset', default=None, choices=sorted(config.PRESETS),
                        help='Named parameter preset')
    common.add_argument('--out', help='Output CSV path (default: stdout)')
    common.add_argument('--threads', type=int, default=None,
                        help=f'Worker threads (default: ${config.THREADS_ENV} or CPU count)')
    common.add_argument('--seed', dest='seed', type=int, default=None)
    common.add_argument('--eval-method', dest='eval_method', default=None,
                        choices=['quadrature', 'monte_carlo'])
    common.add_argument('--mc-samples', dest='mc_samples', type=int, default=None)
    _add_flags(common, LINK_FLAGS)

    methods = [m.value for m in EcMethod]
    parser = argparse.ArgumentParser(prog='urllctoolkit', description=__doc__.split('\n')[0])
    sub = parser.add_subparsers(dest='command', required=True)

    ec = sub.add_parser('ec', parents=[common], help='Point EC evaluation')
    ec.add_argument('--method', dest='method', default=None, choices=methods + ['all'])
    ec.add_argument('--taylor-terms', dest='taylor_terms', type=int, default=None)

    eee = sub.add_parser('eee', parents=[common], help='Point EEE, full buffer or EBP-aware')
    eee.add_argument('--method', dest='method', default=None, choices=methods)

    opt_power = sub.add_parser('opt-power', parents=[common], help='EEE-optimal transmit power')
    opt_power.add_argument('--method', dest='method', default=None, choices=methods)

    sub.add_parser('opt-eps', parents=[common], help='Error probability minimizing ψ')

    constrained = sub.add_parser('opt-constrained', parents=[common],
                                 help='Delay-constrained EEE maximization')
    constrained.add_argument('--method', dest='method', default=None, choices=methods)

    arq = sub.add_parser('arq', parents=[common], help='EBP-ARQ point evaluation')
    _add_flags(arq, ARQ_FLAGS)
    arq.add_argument('--split', choices=['min-power', 'equal'], default='min-power')

    dink = sub.add_parser('dinkelbach', parents=[common],
                          help='Minimum non-empty buffer probability of EBP-ARQ')
    _add_flags(dink, ARQ_FLAGS[:1])
    dink.add_argument('--tol', type=float, default=1e-8)
    dink.add_argument('--max-iter', type=int, default=50)
    dink.add_argument('--trace', action='store_true', help='One row per iteration')

    sweep = sub.add_parser('sweep', parents=[common], help='Experiment parameter sweep')
    sweep.add_argument('--fig', required=True, type=int, choices=range(1, 11))
    sweep.add_argument('--points', dest='points', type=int, default=None)
    _add_flags(sweep, ARQ_FLAGS[::2])

    validate = sub.add_parser('validate', parents=[common], help='Oracle cross-check battery')
    validate.add_argument('--samples', type=int, default=200_000)
    return parser


def _overrides(args):
    keys = set(config.KEY_TYPES)
    return {k: v for k, v in vars(args).items() if k in keys and v is not None}


def resolve(args):
    """Resolved parameter record for parsed arguments."""
    file_values = config.read_config_file(args.config) if args.config else None
    return config.resolve_config(args.preset or 'default', file_values, _overrides(args))


def _header_value(value):
    if isinstance(value, (tuple, list)):
        return ','.join(format_sig(v) for v in value)
    if isinstance(value, (int, float, np.number)):
        return format_sig(value)
    return str(value)


def write_csv(frame, resolved, out=None):
    """Writes a table in the toolkit CSV dialect with a `# config:` header."""
    pairs = (f'{k}={_header_value(resolved[k])}' for k in sorted(resolved))
    header = '# config: ' + ' '.join(pairs) + '\n'
    body = frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as fh:
            fh.write(header + body)
        logger.info('Wrote %d rows to %s', len(frame), out)
    else:
        sys.stdout.write(header + body)


def _models(c):
    return (config.link_params(c), config.qos_constraints(c), config.power_model(c),
            config.traffic_model(c), config.eval_config(c))


def cmd_ec(args, c):
    p, q, _, _, cfg = _models(c)
    requested = c['method']
    if requested == 'all':
        methods = [EcMethod.STOCHASTIC, EcMethod.LEMMA1, EcMethod.THEOREM1, EcMethod.SHANNON]
        if p.m != 1:
            methods.remove(EcMethod.THEOREM1)
    else:
        methods = [EcMethod(requested)]
    results = []
    for method in methods:
        if method == EcMethod.LEMMA1:
            terms = ClosedFormTerms.from_params(p, q, c['taylor_terms'])
            results.append(ec_lemma1(p, q, terms, cfg))
        else:
            results.append(effective_capacity(p, q, method, cfg))
    rows = []
    for res in results:
        row = {'method': res.method.value, 'ec': res.ec, 'psi': res.psi,
               'est_error': res.est_error}
        for other in results:
            if other is not res:
                row[f'dev_vs_{other.method.value}'] = _relative_dev(res.ec, other.ec)
        rows.append(row)
    return pd.DataFrame(rows)


def _relative_dev(value, reference):
    # NaN against a zero reference, e.g. every finite-blocklength EC at ε = 1
    if reference == 0:
        return np.nan
    return (value - reference) / reference


def cmd_eee(args, c):
    p, q, pm, tm, cfg = _models(c)
    res = eee_ebp(p, q, pm, tm, cfg, c['method'])
    return pd.DataFrame([{'buffer_mode': tm.buffer_mode.value, 'eee': res.eee, 'ec': res.ec,
                          'p_nb': res.p_nb, 'p_total': res.p_total,
                          'feasible': res.feasible}])


def cmd_opt_power(args, c):
    p, q, pm, _, cfg = _models(c)
    rho_max = float(db_to_linear(c['rho_max_db']))
    method = EcMethod(c['method'] if args.method is not None else EcMethod.THEOREM1)
    if method == EcMethod.THEOREM1 and p.m == 1:
        res = optimal_power_theorem3(p, q, pm, cfg, rho_max)
        solver = 'stationarity_root'
    else:
        res = optimal_power_golden(p, q, pm, cfg, method, rho_max)
        solver = 'golden_section'
    if not res.converged:
        logger.warning('No interior optimum below %g dB; boundary point returned',
                       c['rho_max_db'])
    return pd.DataFrame([{'rho_opt': res.arg_opt, 'rho_opt_db': float(linear_to_db(res.arg_opt)),
                          'eee_opt': res.value_opt, 'iterations': res.iterations,
                          'converged': res.converged, 'solver': solver}])


def cmd_opt_eps(args, c):
    p, q, _, _, cfg = _models(c)
    res = optimal_epsilon(p, q, cfg)
    ec = float(-np.log(res.value_opt) / (p.n * q.theta))
    return pd.DataFrame([{'eps_opt': res.arg_opt, 'psi': res.value_opt, 'ec': ec,
                          'iterations': res.iterations}])


def cmd_opt_constrained(args, c):
    p, q, pm, tm, cfg = _models(c)
    method = EcMethod(c['method'] if args.method is not None else EcMethod.THEOREM1)
    opt = maximize_eee_constrained(p, q, pm, tm, cfg, float(db_to_linear(c['rho_max_db'])),
                                   c['n_grid'], method)
    pt = opt.point
    row = {'rho_opt': pt.rho, 'rho_opt_db': float(linear_to_db(pt.rho)), 'epsilon': pt.epsilon,
           'theta': pt.theta, 'p_nb': pt.p_nb, 'ec': pt.ec, 'p_total': pt.p_total,
           'eee': pt.eee}
    row.update(opt.constraints)
    return pd.DataFrame([row])


def _arq_split(args, p, c, cfg):
    eps = c['eps_target']
    if c.get('eps1') is not None:
        return ArqParams(eps1=c['eps1'], eps_target=eps, nack_overhead=c['nack_overhead'])
    if args.split == 'equal':
        return equal_split_params(eps, c['nack_overhead'])
    a, _ = min_power_params(p, eps, c['arrival_rate'], c['nack_overhead'], cfg=cfg)
    return a


def cmd_arq(args, c):
    p, q, pm, tm, cfg = _models(c)
    p = replace(p, epsilon=c['eps_target'])
    a = _arq_split(args, p, c, cfg)
    res = eee_arq(p, q, a, pm, tm, cfg=cfg)
    rates = arq_rates(p, a, cfg=cfg)
    bound = theorem4_upper_bound(rates, a, res.p_nb_mod, pm, p.rho)
    return pd.DataFrame([{'eps1': a.eps1, 'eps2': a.eps2, 'p_nb_mod': res.p_nb_mod,
                          'ec2': res.ec2, 'p_total': res.p_total, 'eee2': res.eee2,
                          'upper_bound': bound, 'tau_n': res.tau_n, 'stable': res.stable}])


def cmd_dinkelbach(args, c):
    p, _, _, _, cfg = _models(c)
    eps = c['eps_target']
    terms = mean_rate_terms(replace(p, epsilon=eps), cfg=cfg)
    res = dinkelbach_min_nbp(terms, p.n, eps, c['arrival_rate'], args.tol, args.max_iter)
    if args.trace:
        rows = [{'iteration': k, 'sigma': s.sigma, 'f_value': s.f_value, 'eps1': s.iterate,
                 'converged': k == len(res.trace)} for k, s in enumerate(res.trace, 1)]
        return pd.DataFrame(rows)
    return pd.DataFrame([{'eps1_opt': res.arg_opt, 'p_nb_mod': res.value_opt,
                          'iterations': res.iterations, 'converged': res.converged}])


def cmd_validate(args, c):
    return reports_frame(run_validation(config.eval_config(c), args.samples, c['seed']))


COMMANDS = {
    'ec': cmd_ec, 'eee': cmd_eee, 'opt-power': cmd_opt_power, 'opt-eps': cmd_opt_eps,
    'opt-constrained': cmd_opt_constrained, 'arq': cmd_arq, 'dinkelbach': cmd_dinkelbach,
    'validate': cmd_validate,
}


def _configure_logging(verbosity):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    logging.captureWarnings(True)


def run(args):
    """Executes parsed arguments; library errors propagate."""
    if args.command == 'sweep':
        experiment = Experiment(f'fig{args.fig}')
        file_values = config.read_config_file(args.config) if args.config else None
        spec = build_spec(experiment, args.points, _overrides(args), file_values)
        frame = run_sweep(spec, config.eval_config(spec.fixed), args.threads)
        write_csv(frame, spec.fixed, args.out)
        return EXIT_OK
    c = resolve(args)
    frame = COMMANDS[args.command](args, c)
    write_csv(frame, c, args.out)
    if args.command == 'validate' and not frame['passed'].all():
        failed = ', '.join(frame.loc[~frame['passed'], 'quantity'])
        logger.error('Validation failed: %s', failed)
        return EXIT_VALIDATION
    return EXIT_OK


def main(argv=None):
    """Entry point.

    Args:
        argv (list, optional): Arguments without the program name. Defaults to sys.argv[1:].

    Returns:
        int: Exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('default')
            return run(args)
    except DomainError as exc:
        logger.error('Invalid argument: %s', exc)
        return EXIT_DOMAIN
    except InfeasibleError as exc:
        logger.error('Infeasible: %s', exc)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        logger.error('Did not converge: %s', exc)
        return EXIT_CONVERGENCE


if __name__ == '__main__':
    raise SystemExit(main())
