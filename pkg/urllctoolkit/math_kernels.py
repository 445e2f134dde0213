"""Special functions and fading-expectation kernels.

Every closed form in the toolkit is assembled from the functions here. Gamma
products such as e^{1/ρ} ρ^α Γ(α+1, 1/ρ) are evaluated as bounded integrals
E[(1+ρZ)^b] rather than by multiplying factors that overflow once α ≪ 0.
"""
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats

from .errors import ConvergenceWarning, DomainError

SQRT_2PI = float(np.sqrt(2.0 * np.pi))
LOG2E = float(1.0 / np.log(2.0))
TAIL_MASS = 1e-14


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive quadrature.

    Args:
        abs_tol (float, optional): Absolute tolerance. Defaults to 1e-12.
        rel_tol (float, optional): Relative tolerance. Defaults to 1e-10.
        max_subdivisions (int, optional): Subinterval budget. Defaults to 200.
    """
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError('Quadrature tolerances must be positive')
        if int(self.max_subdivisions) < 1:
            raise DomainError('max_subdivisions must be at least 1')


@dataclass(frozen=True)
class KernelValue:
    """A numerically evaluated quantity with its error estimate."""
    value: float
    est_error: float = 0.0
    converged: bool = True

    def __float__(self):
        return float(self.value)


def _check_probability(p, name='p'):
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0)) or np.any(~(arr < 1)):
        raise DomainError(f'{name} must lie strictly between 0 and 1, got {p}')


def gaussian_q(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Args:
        x (float|np.ndarray): Argument.

    Returns:
        float|np.ndarray: Tail probability, underflowing to 0 far in the tail.
    """
    return special.ndtr(-np.asarray(x, dtype=float))


def gaussian_q_inv(p):
    """Inverse of the Gaussian Q-function.

    Args:
        p (float|np.ndarray): Probability in (0, 1).

    Raises:
        DomainError: p outside (0, 1).

    Returns:
        float|np.ndarray: x with Q(x) = p.
    """
    _check_probability(p)
    return -special.ndtri(np.asarray(p, dtype=float))


def q_inv_derivative(eps):
    """Derivative of the inverse Q-function, dQ⁻¹(ε)/dε = -√(2π) exp(Q⁻¹(ε)²/2).

    Args:
        eps (float|np.ndarray): Probability in (0, 1).

    Raises:
        DomainError: eps outside (0, 1).

    Returns:
        float|np.ndarray: Derivative, always negative.
    """
    q = gaussian_q_inv(eps)
    return -SQRT_2PI * np.exp(0.5 * q * q)


def q_inv_second_derivative(eps):
    """Second derivative of the inverse Q-function, 2π Q⁻¹(ε) exp(Q⁻¹(ε)²).

    Args:
        eps (float|np.ndarray): Probability in (0, 1).

    Returns:
        float|np.ndarray: Second derivative.
    """
    q = gaussian_q_inv(eps)
    return 2.0 * np.pi * q * np.exp(q * q)


def dispersion_root(x):
    """γ(x) = √(1 - (1+x)⁻²), written to stay accurate as x → 0.

    Args:
        x (float|np.ndarray): Received SNR ρz (≥ 0).

    Returns:
        float|np.ndarray: γ in [0, 1).
    """
    x = np.asarray(x, dtype=float)
    return np.sqrt(x * (2.0 + x)) / (1.0 + x)


@lru_cache(maxsize=64)
def fading_upper_limit(m):
    """Truncation point of the unit-mean gamma(m, m) density (tail mass 1e-14).

    Args:
        m (float): Fading shape.

    Returns:
        float: Upper integration limit.
    """
    return float(stats.gamma.isf(TAIL_MASS, a=m, scale=1.0 / m))


def power_breakpoints(rho, b, m=1.0):
    """Break points that resolve the z-scale of (1+ρz)^b under the fading density.

    Args:
        rho (float): Average SNR (> 0).
        b (float): Exponent.
        m (float, optional): Fading shape. Defaults to 1.0.

    Returns:
        tuple: Increasing positive break points.
    """
    if not rho > 0:
        return ()
    scale = 1.0 / (rho * (abs(b) + 1.0))
    return tuple(sorted({scale, 10.0 * scale, 1.0 / m}))


def gamma_expectation(g, m, cfg=None, points=None):
    """E[g(Z)] for Z ~ gamma(m, rate m) by adaptive Gauss-Kronrod quadrature.

    Args:
        g (function): Integrand in z, numpy-friendly.
        m (float): Fading shape (≥ 0.5).
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.
        points (tuple, optional): Interior break points. Defaults to None.

    Returns:
        KernelValue: Expectation, QUADPACK error estimate and convergence flag.
    """
    cfg = cfg or QuadratureConfig()
    z_max = fading_upper_limit(m)
    log_norm = m * np.log(m) - special.gammaln(m)

    def integrand(z):
        return g(z) * np.exp(log_norm + special.xlogy(m - 1.0, z) - m * z)

    brk = sorted(p for p in (points or ()) if 0.0 < p < z_max) or None
    out = integrate.quad(integrand, 0.0, z_max, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                         limit=int(cfg.max_subdivisions), points=brk, full_output=1)
    converged = len(out) < 4
    if not converged:
        warnings.warn(f'Quadrature flagged: {out[3]}', ConvergenceWarning)
    return KernelValue(float(out[0]), float(abs(out[1])), converged)


def dispersion_power_integral(alpha, k, rho, m=1.0, cfg=None):
    """E[(1+ρZ)^α γ(ρZ)^k], the integral family of the Nakagami EC approximation.

    Args:
        alpha (float): Exponent of (1+ρz).
        k (int): Power of the dispersion root γ.
        rho (float): Average SNR (≥ 0).
        m (float, optional): Fading shape. Defaults to 1.0.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.

    Raises:
        DomainError: rho < 0 or m < 0.5.

    Returns:
        KernelValue: The integral.
    """
    if rho < 0:
        raise DomainError(f'rho must be non-negative, got {rho}')
    if m < 0.5:
        raise DomainError(f'Fading shape must be at least 0.5, got {m}')
    if rho == 0:
        return KernelValue(1.0 if k == 0 else 0.0)

    def g(z):
        x = rho * z
        out = (1.0 + x) ** alpha
        if k:
            out = out * dispersion_root(x) ** k
        return out

    return gamma_expectation(g, m, cfg, power_breakpoints(rho, alpha, m))


def power_exp_integral(beta, rho, m=1.0, cfg=None):
    """I(β) = E[(1+ρZ)^β] under unit-mean Nakagami-m fading.

    For m = 1 this equals e^{1/ρ} ρ^β Γ(β+1, 1/ρ). For β ≤ 0 the value lies in (0, 1].

    Args:
        beta (float): Exponent.
        rho (float): Average SNR (≥ 0).
        m (float, optional): Fading shape. Defaults to 1.0.
        cfg (QuadratureConfig, optional): Tolerances. Defaults to None.

    Returns:
        KernelValue: The integral.
    """
    return dispersion_power_integral(beta, 0, rho, m, cfg)


def upper_incomplete_gamma_scaled(a, x):
    """Scaled upper incomplete gamma e^x x^{-a} Γ(a, x) for any real a.

    Negative orders use the downward recurrence S(a) = (x S(a+1) - 1)/a from an
    order in (0, 1], or from S(0) = e^x E₁(x) when a is a non-positive integer.

    Args:
        a (float): Order, may be negative and non-integer.
        x (float): Argument (> 0, below the exp overflow threshold).

    Raises:
        DomainError: x ≤ 0.

    Returns:
        float: Scaled incomplete gamma.
    """
    if not x > 0:
        raise DomainError(f'x must be positive, got {x}')
    a = float(a)
    x = float(x)
    if a > 0:
        return float(np.exp(x - a * np.log(x) + special.gammaln(a)) * special.gammaincc(a, x))

    steps = int(np.ceil(-a))
    if a == np.floor(a):
        # Γ(0, x) = E₁(x)
        s = float(np.exp(x) * special.exp1(x))
    else:
        s = upper_incomplete_gamma_scaled(a + steps, x)
    for j in range(steps, 0, -1):
        order = a + j - 1
        s = (x * s - 1.0) / order
    return float(s)


def rayleigh_power_integral(beta, rho):
    """E[(1+ρZ)^β] for Rayleigh fading via e^{1/ρ} ρ^β Γ(β+1, 1/ρ).

    Args:
        beta (float): Exponent.
        rho (float): Average SNR (> 0).

    Returns:
        float: The integral.
    """
    return upper_incomplete_gamma_scaled(beta + 1.0, 1.0 / rho) / rho


def finite_diff(f, x, order=1, rel_step=None):
    """Central difference derivative with one Richardson extrapolation step.

    The step is h = max(s|x|, 1e-9) with s = 1e-6 for first and 1e-4 for
    second derivatives unless rel_step is given.

    Args:
        f (function): Scalar function, evaluable on [x - h, x + h].
        x (float): Evaluation point.
        order (int, optional): 1 or 2. Defaults to 1.
        rel_step (float, optional): Relative step s. Defaults to None.

    Raises:
        DomainError: Unsupported order.

    Returns:
        float: Derivative estimate.
    """
    if order not in (1, 2):
        raise DomainError(f'Only first and second derivatives are supported, got {order}')
    x = float(x)
    s = rel_step if rel_step is not None else (1e-6 if order == 1 else 1e-4)
    h = max(s * abs(x), 1e-9)
    if x + 0.5 * h == x:
        warnings.warn(f'Finite-difference step {h:g} underflows at x={x:g}', ConvergenceWarning)

    if order == 1:
        def diff(step):
            return (f(x + step) - f(x - step)) / (2.0 * step)
    else:
        fx = f(x)

        def diff(step):
            return (f(x + step) - 2.0 * fx + f(x - step)) / step ** 2

    return float((4.0 * diff(0.5 * h) - diff(h)) / 3.0)
