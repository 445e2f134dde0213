"""Finite-blocklength achievable rate (normal approximation) and its ρ-derivatives."""
from dataclasses import dataclass

import numpy as np

from .channel import EvalConfig, FadingModel, expect
from .errors import DomainError, SingularityError
from .math_kernels import LOG2E, KernelValue, dispersion_root, gaussian_q_inv

EPS_CEILING = 1.0 - 1e-12


@dataclass(frozen=True)
class LinkParams:
    """Physical configuration of one link.

    Args:
        n (int): Blocklength in symbols (≥ 1).
        rho (float): Average SNR, linear (transmit power in watts, unit noise).
        m (float, optional): Nakagami shape. Defaults to 1.0.
        epsilon (float, optional): Packet error probability in (0, 1]. Defaults to 1e-4.
    """
    n: int
    rho: float
    m: float = 1.0
    epsilon: float = 1e-4

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError(f'Blocklength must be positive, got {self.n}')
        if not self.rho >= 0:
            raise DomainError(f'SNR must be non-negative, got {self.rho}')
        if not self.m >= 0.5:
            raise DomainError(f'Nakagami shape must be at least 0.5, got {self.m}')
        if not 0 < self.epsilon <= 1:
            raise DomainError(f'Error probability must lie in (0, 1], got {self.epsilon}')

    @property
    def fading(self):
        return FadingModel(self.m)


@dataclass(frozen=True)
class RateTerms:
    shannon: float
    dispersion_root: float
    phi: float
    mu: float


def dispersion_coefficient(n, epsilon):
    """φ = Q⁻¹(ε) log₂(e) / √n. ε ≥ 1 - 1e-12 is clipped so φ stays finite.

    Args:
        n (int): Blocklength.
        epsilon (float|np.ndarray): Error probability.

    Returns:
        float|np.ndarray: φ (non-negative for ε ≤ 0.5).
    """
    eps = np.minimum(np.asarray(epsilon, dtype=float), EPS_CEILING)
    return gaussian_q_inv(eps) * LOG2E / np.sqrt(n)


def rate_terms(p, z):
    """Components of the normal-approximation rate at power gain z.

    Args:
        p (LinkParams): Link parameters.
        z (float|np.ndarray): Power gain.

    Returns:
        RateTerms: log₂(1+ρz), γ, φ and μ = γ log₂(e)/√n.
    """
    x = p.rho * np.asarray(z, dtype=float)
    gamma = dispersion_root(x)
    return RateTerms(shannon=np.log1p(x) * LOG2E, dispersion_root=gamma,
                     phi=dispersion_coefficient(p.n, p.epsilon),
                     mu=gamma * LOG2E / np.sqrt(p.n))


def achievable_rate(x, n, epsilon):
    """r = log₂(1+x) - φ(n, ε) γ(x) in bpcu at received SNR x.

    Args:
        x (float|np.ndarray): Received SNR ρz.
        n (int): Blocklength.
        epsilon (float): Error probability.

    Returns:
        float|np.ndarray: Raw rate, negative in deep fades.
    """
    x = np.asarray(x, dtype=float)
    return np.log1p(x) * LOG2E - dispersion_coefficient(n, epsilon) * dispersion_root(x)


def rate(p, z):
    """Normal-approximation achievable rate in bpcu.

    Args:
        p (LinkParams): Link parameters.
        z (float|np.ndarray): Power gain (≥ 0).

    Returns:
        float|np.ndarray: Raw rate; clamping is the caller's policy.
    """
    return achievable_rate(p.rho * np.asarray(z, dtype=float), p.n, p.epsilon)


def _check_nonsingular(p, z):
    x = p.rho * np.asarray(z, dtype=float)
    if np.any(x <= 0):
        raise SingularityError('Rate derivatives need ρz > 0 (γ vanishes at zero SNR)')
    return x


def rate_drho(p, z):
    """dr/dρ = z/((1+ρz) ln 2) - φ z / ((1+ρz)³ γ).

    Args:
        p (LinkParams): Link parameters.
        z (float|np.ndarray): Power gain.

    Raises:
        SingularityError: ρz = 0.

    Returns:
        float|np.ndarray: First derivative in bpcu per watt.
    """
    x = _check_nonsingular(p, z)
    z = np.asarray(z, dtype=float)
    u = 1.0 + x
    phi = dispersion_coefficient(p.n, p.epsilon)
    return z * LOG2E / u - phi * z / (u ** 3 * dispersion_root(x))


def rate_d2rho(p, z):
    """d²r/dρ² = -z²/((1+ρz)² ln 2) + φ z² [3/((1+ρz)⁴ γ) + 1/((1+ρz)⁶ γ³)].

    Negative for ρz ≥ 0 dB in the URLLC regime (n ≥ 100, ε ≤ 1e-3).

    Args:
        p (LinkParams): Link parameters.
        z (float|np.ndarray): Power gain.

    Raises:
        SingularityError: ρz = 0.

    Returns:
        float|np.ndarray: Second derivative.
    """
    x = _check_nonsingular(p, z)
    z = np.asarray(z, dtype=float)
    u = 1.0 + x
    gamma = dispersion_root(x)
    phi = dispersion_coefficient(p.n, p.epsilon)
    return (-z * z * LOG2E / u ** 2
            + phi * z * z * (3.0 / (u ** 4 * gamma) + 1.0 / (u ** 6 * gamma ** 3)))


def expected_rate(p, model=None, cfg=None, clamp_nonneg=False, task=0):
    """E_Z[r], or E_Z[max(r, 0)] when clamp_nonneg.

    Args:
        p (LinkParams): Link parameters.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        clamp_nonneg (bool, optional): Serve at zero rate in deep fades. Defaults to False.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        KernelValue: Mean rate in bpcu.
    """
    model = model or p.fading
    if p.rho == 0:
        return KernelValue(0.0)

    def g(z):
        r = rate(p, z)
        return np.maximum(r, 0.0) if clamp_nonneg else r

    return expect(model, g, cfg, points=(1.0 / p.rho,), task=task)


def mean_rate_terms(p, model=None, cfg=None, task=0):
    """E[log₂(1+ρZ)] and E[γ(ρZ)] for the link.

    The averaged raw rate at any error level ε is then
    E[log₂(1+ρZ)] - Q⁻¹(ε) log₂(e)/√n · E[γ].

    Args:
        p (LinkParams): Link parameters; epsilon fixes the returned phi.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        RateTerms: Averaged shannon, dispersion_root and mu, with phi at p.epsilon.
    """
    model = model or p.fading
    phi = float(dispersion_coefficient(p.n, p.epsilon))
    if p.rho == 0:
        return RateTerms(0.0, 0.0, phi, 0.0)
    points = (1.0 / p.rho,)
    shannon = expect(model, lambda z: np.log1p(p.rho * z) * LOG2E, cfg, points, task)
    gamma = expect(model, lambda z: dispersion_root(p.rho * z), cfg, points, task)
    return RateTerms(shannon=shannon.value, dispersion_root=gamma.value, phi=phi,
                     mu=gamma.value * LOG2E / np.sqrt(p.n))


def mean_rate(terms, n, epsilon):
    """Averaged raw rate at error level epsilon from precomputed mean terms.

    Args:
        terms (RateTerms): Output of mean_rate_terms.
        n (int): Blocklength.
        epsilon (float|np.ndarray): Error probability.

    Returns:
        float|np.ndarray: E[r] in bpcu.
    """
    return terms.shannon - dispersion_coefficient(n, epsilon) * terms.dispersion_root
