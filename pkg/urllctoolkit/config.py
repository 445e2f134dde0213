"""Named parameter presets, key = value config files and precedence resolution.

Values resolve as command-line flags > config file > preset. SNR-like keys
ending in _db are in decibels; everything else is in natural units.
"""
import os

from .channel import EvalConfig
from .eee_models import PowerModel, TrafficModel
from .effective_capacity import QoSConstraints
from .errors import DomainError
from .fbl_rate import LinkParams
from .tools import db_to_linear

THREADS_ENV = 'URLLC_THREADS'


def _float_list(value):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).split(',') if v.strip())


KEY_TYPES = {
    'n': int, 'm': float, 'rho_db': float, 'epsilon': float, 'theta': float,
    'delta': float, 'violation': float, 'epsilon_t': float, 'zeta': float, 'pc': float,
    'arrival_rate': float, 'buffer_mode': str, 'rho_max_db': float, 'eps_target': float,
    'eps1': float, 'nack_overhead': float, 'method': str, 'eval_method': str,
    'mc_samples': int, 'seed': int, 'taylor_terms': int, 'n_grid': int, 'points': int,
    'grid_lo': float, 'grid_hi': float, 'grid_scale': str,
    'thetas': _float_list, 'ns': _float_list, 'pcs': _float_list, 'violations': _float_list,
    'eps_targets': _float_list,
    'rho1_db': float, 'rho2_db': float, 'eps_user1': float, 'eps_user2': float,
    'lambda2': float, 'damping': float,
}

BASE = {
    'n': 500, 'm': 1.0, 'rho_db': 3.0, 'epsilon': 1e-4, 'theta': 0.01, 'delta': 500.0,
    'violation': 1e-2, 'epsilon_t': 0.5, 'zeta': 1.2, 'pc': 0.2, 'arrival_rate': 1.0,
    'buffer_mode': 'ebp', 'rho_max_db': 30.0, 'eps_target': 1e-9, 'nack_overhead': 6.0,
    'method': 'stochastic', 'eval_method': 'quadrature', 'mc_samples': 100_000, 'seed': 0,
    'taylor_terms': 3, 'n_grid': 256, 'points': 41,
}

PRESETS = {
    'default': {},
    # EEE against transmit SNR, closed form against expectation
    'fig1': {'pc': 1.2, 'zeta': 1.2, 'epsilon': 1e-4, 'thetas': (1e-3, 1e-2, 0.1),
             'ns': (500, 50), 'grid_lo': -5.0, 'grid_hi': 30.0, 'grid_scale': 'linear'},
    'fig2': {'rho_db': 3.0, 'epsilon': 1e-4, 'pcs': (0.2, 1.0, 2.0), 'grid_lo': 1e-4,
             'grid_hi': 1.0, 'grid_scale': 'log'},
    'fig3': {'rho_db': 3.0, 'epsilon': 1e-4, 'theta': 0.01, 'pcs': (0.2, 1.0),
             'grid_lo': 0.05, 'grid_hi': 0.95, 'grid_scale': 'linear'},
    'fig4': {'rho_max_db': 13.0, 'epsilon_t': 1e-4, 'arrival_rate': 1.0,
             'violations': (1e-2, 1e-3), 'n_grid': 64, 'grid_lo': 200.0, 'grid_hi': 2000.0,
             'grid_scale': 'linear'},
    'fig5': {'rho1_db': 6.0, 'rho2_db': 0.0, 'eps_user1': 1e-4, 'eps_user2': 0.1,
             'lambda2': 0.1, 'theta': 0.01, 'damping': 1.0, 'grid_lo': 0.1, 'grid_hi': 1.4,
             'grid_scale': 'linear'},
    'fig6': {'rho_max_db': 10.0, 'epsilon_t': 1e-4, 'arrival_rate': 1.0,
             'violations': (1e-2, 1e-3), 'n_grid': 64, 'grid_lo': 200.0, 'grid_hi': 2000.0,
             'grid_scale': 'linear'},
    'fig7': {'rho_db': 6.0, 'eps_target': 1e-9, 'arrival_rate': 0.5, 'pc': 0.2,
             'zeta': 1.2, 'grid_lo': 1e-4, 'grid_hi': 1.0, 'grid_scale': 'log'},
    'fig8': {'rho_db': 10.0, 'arrival_rate': 1.0, 'violations': (1e-2, 1e-3),
             'grid_lo': 1e-9, 'grid_hi': 1e-1, 'grid_scale': 'log'},
    'fig9': {'rho_db': 6.0, 'eps_target': 1e-9, 'theta': 0.01, 'grid_lo': 0.1,
             'grid_hi': 1.5, 'grid_scale': 'linear'},
    'fig10': {'rho_db': 6.0, 'theta': 0.01, 'eps_targets': (1e-9, 1e-5), 'grid_lo': 0.1,
              'grid_hi': 1.5, 'grid_scale': 'linear'},
}


def coerce(key, value):
    """Converts a raw value to the type registered for key.

    Raises:
        DomainError: Unknown key or unparsable value.
    """
    if key not in KEY_TYPES:
        raise DomainError(f'Unknown configuration key {key!r}')
    try:
        return KEY_TYPES[key](value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f'Bad value {value!r} for {key!r}: {exc}') from exc


def parse_config_text(text):
    """Parses flat `key = value` lines; `#` starts a comment.

    Args:
        text (str): File contents.

    Raises:
        DomainError: Malformed line or unknown key.

    Returns:
        dict: Typed values.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise DomainError(f'Line {lineno}: expected key = value, got {line!r}')
        key, value = (s.strip() for s in line.split('=', 1))
        values[key] = coerce(key, value)
    return values


def read_config_file(path):
    """Reads a key = value configuration file.

    Args:
        path (str): File path.

    Returns:
        dict: Typed values.
    """
    with open(path, encoding='utf-8') as fh:
        return parse_config_text(fh.read())


def resolve_config(preset='default', file_values=None, overrides=None):
    """Merges base values, a preset, file values and overrides, later winning.

    Overrides set to None are ignored so unset command-line flags fall through.

    Args:
        preset (str, optional): Preset name. Defaults to 'default'.
        file_values (dict, optional): Values from read_config_file. Defaults to None.
        overrides (dict, optional): Values from command-line flags. Defaults to None.

    Raises:
        DomainError: Unknown preset or key.

    Returns:
        dict: Fully resolved parameter record.
    """
    if preset not in PRESETS:
        raise DomainError(f'Unknown preset {preset!r}; choose from {sorted(PRESETS)}')
    resolved = dict(BASE)
    resolved.update(PRESETS[preset])
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is not None:
                resolved[key] = coerce(key, value)
    return resolved


def default_threads():
    """Worker count from URLLC_THREADS, else the CPU count.

    Raises:
        DomainError: URLLC_THREADS is not a positive integer.
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError as exc:
        raise DomainError(f'{THREADS_ENV} must be an integer, got {raw!r}') from exc
    if threads < 1:
        raise DomainError(f'{THREADS_ENV} must be positive, got {threads}')
    return threads


def link_params(c, rho=None):
    """LinkParams from a resolved record; rho in watts overrides rho_db."""
    rho = float(db_to_linear(c['rho_db'])) if rho is None else float(rho)
    return LinkParams(n=int(c['n']), rho=rho, m=float(c['m']), epsilon=float(c['epsilon']))


def qos_constraints(c):
    return QoSConstraints(theta=c['theta'], delta=c['delta'], violation=c['violation'],
                          epsilon_t=c['epsilon_t'])


def power_model(c):
    return PowerModel(zeta=c['zeta'], pc=c['pc'])


def traffic_model(c):
    return TrafficModel(arrival_rate=c['arrival_rate'], buffer_mode=c['buffer_mode'])


def eval_config(c):
    return EvalConfig(method=c['eval_method'], mc_samples=c['mc_samples'], seed=c['seed'])
