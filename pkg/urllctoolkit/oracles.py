"""Brute-force reference computations used to cross-check the toolkit.

Nothing here calls the quadrature, sampling or rate code the toolkit uses
elsewhere: rates are rebuilt from scipy.stats, Monte Carlo draws come from a
separate PCG64DXSM stream and the alternative quadrature is a fixed
Gauss-Legendre rule.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import DomainError
from .math_kernels import finite_diff  # noqa: F401

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleReport:
    """One primary-versus-oracle comparison.

    kind is 'abs', 'rel' or 'stderr' (tolerance counts standard errors).
    """
    quantity: str
    primary: float
    oracle: float
    tolerance: float
    kind: str = 'rel'
    stderr: float = None
    passed: bool = False

    @classmethod
    def compare(cls, quantity, primary, oracle, tolerance, kind='rel', stderr=None):
        """Builds a report and decides pass/fail."""
        diff = abs(float(primary) - float(oracle))
        if kind == 'abs':
            passed = diff <= tolerance
        elif kind == 'rel':
            passed = diff <= tolerance * abs(float(oracle))
        elif kind == 'stderr':
            passed = diff <= tolerance * float(stderr or 0.0)
        else:
            raise DomainError(f'Unknown tolerance kind {kind!r}')
        if not passed:
            logger.warning('Oracle check %s failed: %r vs %r', quantity, primary, oracle)
        return cls(quantity, float(primary), float(oracle), float(tolerance), kind,
                   None if stderr is None else float(stderr), bool(passed))

    def as_row(self):
        return {'quantity': self.quantity, 'primary': self.primary, 'oracle': self.oracle,
                'tolerance': self.tolerance, 'kind': self.kind,
                'stderr': np.nan if self.stderr is None else self.stderr,
                'passed': self.passed}


@dataclass(frozen=True)
class McEstimate:
    psi: float
    psi_stderr: float
    ec: float
    ec_stderr: float


def _reference_rate(x, n, eps):
    v = 1.0 - (1.0 + x) ** -2
    return (np.log2(1.0 + x)
            - np.sqrt(v / n) * stats.norm.isf(min(eps, 1 - 1e-12)) / np.log(2.0))


def _draws(m, samples, seed):
    rng = np.random.Generator(np.random.PCG64DXSM(int(seed)))
    return rng.gamma(shape=m, scale=1.0 / m, size=int(samples))


def mc_ec_oracle(p, q, samples=100_000, seed=0):
    """ψ and EC by raw sampling of the fading, stderr by the delta method.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints, θ > 0.
        samples (int, optional): Draw count (≥ 10⁴). Defaults to 100000.
        seed (int, optional): Seed of the oracle stream. Defaults to 0.

    Raises:
        DomainError: Too few samples or θ = 0.

    Returns:
        McEstimate: ψ, EC and their standard errors.
    """
    if samples < 10_000:
        raise DomainError('The Monte Carlo oracle needs at least 10^4 samples')
    if not q.theta > 0:
        raise DomainError('The Monte Carlo EC oracle needs θ > 0')
    t = p.n * q.theta
    if p.epsilon >= 1 or p.rho == 0:
        return McEstimate(1.0, 0.0, 0.0, 0.0)
    z = _draws(p.m, samples, seed)
    r = _reference_rate(p.rho * z, p.n, p.epsilon)
    vals = p.epsilon + (1.0 - p.epsilon) * np.exp(-t * r)
    psi = float(vals.mean())
    psi_se = float(vals.std(ddof=1) / np.sqrt(vals.size))
    return McEstimate(psi, psi_se, float(-np.log(psi) / t), psi_se / (psi * t))


def mc_mean_rate_oracle(p, samples=100_000, seed=0, clamp_nonneg=False):
    """Sample mean of the achievable rate and its standard error.

    Args:
        p (LinkParams): Link parameters.
        samples (int, optional): Draw count. Defaults to 100000.
        seed (int, optional): Seed of the oracle stream. Defaults to 0.
        clamp_nonneg (bool, optional): Average max(r, 0). Defaults to False.

    Returns:
        tuple: (mean, stderr).
    """
    z = _draws(p.m, samples, seed)
    r = _reference_rate(p.rho * z, p.n, p.epsilon)
    if clamp_nonneg:
        r = np.maximum(r, 0.0)
    return float(r.mean()), float(r.std(ddof=1) / np.sqrt(r.size))


def gauss_legendre_psi(p, q, order=400):
    """ψ by fixed-order Gauss-Legendre quadrature in s = √z.

    The rate behaves like √z near zero SNR; in s the integrand is smooth for
    m = 1 and the rule converges quickly.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        order (int, optional): Number of nodes. Defaults to 400.

    Returns:
        float: ψ.
    """
    if p.epsilon >= 1 or p.rho == 0 or q.theta == 0:
        return 1.0
    s_max = np.sqrt(stats.gamma.isf(1e-16, a=p.m, scale=1.0 / p.m))
    x, w = special.roots_legendre(int(order))
    s = 0.5 * s_max * (x + 1.0)
    z = s * s
    density = 2.0 * s * stats.gamma.pdf(z, a=p.m, scale=1.0 / p.m)
    r = _reference_rate(p.rho * z, p.n, p.epsilon)
    g = p.epsilon + (1.0 - p.epsilon) * np.exp(-p.n * q.theta * r)
    return float(0.5 * s_max * np.sum(w * g * density))


def grid_argopt_oracle(objective, interval, points=1000, maximize=False, log=False):
    """Exhaustive grid search with one refinement pass around the best cell.

    Args:
        objective (function): Scalar function.
        interval (tuple): (lo, hi).
        points (int, optional): Points per pass (≥ 10³). Defaults to 1000.
        maximize (bool, optional): Search for a maximum. Defaults to False.
        log (bool, optional): Log-spaced grid (positive interval). Defaults to False.

    Returns:
        tuple: (argument, value).
    """
    lo, hi = map(float, interval)
    if not hi > lo:
        raise DomainError('Empty search interval')
    if points < 1000:
        raise DomainError('The grid oracle needs at least 10^3 points')
    sign = -1.0 if maximize else 1.0

    def search(a, b):
        grid = np.geomspace(a, b, int(points)) if log else np.linspace(a, b, int(points))
        vals = np.array([sign * objective(x) for x in grid])
        vals[np.isnan(vals)] = np.inf
        i = int(np.argmin(vals))
        return grid, i, vals[i]

    grid, i, best = search(lo, hi)
    grid2, j, best2 = search(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)])
    if best2 <= best:
        return float(grid2[j]), float(sign * best2)
    return float(grid[i]), float(sign * best)
