"""Quasi-static Nakagami-m block fading with unit mean power gain."""
import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError
from .math_kernels import KernelValue, QuadratureConfig, gamma_expectation


class EvalMethod(str, enum.Enum):
    QUADRATURE = 'quadrature'
    MONTE_CARLO = 'monte_carlo'


@dataclass(frozen=True)
class FadingModel:
    """Power gain Z = |h|² ~ gamma(shape m, rate m), so E[Z] = 1. m = 1 is Rayleigh.

    Args:
        m (float, optional): Fading shape (≥ 0.5). Defaults to 1.0.
    """
    m: float = 1.0

    def __post_init__(self):
        if not self.m >= 0.5:
            raise DomainError(f'Nakagami shape must be at least 0.5, got {self.m}')

    @property
    def distribution(self):
        return stats.gamma(a=self.m, scale=1.0 / self.m)

    def __str__(self):
        return f'Nakagami-m fading (m={self.m:g})'


@dataclass(frozen=True)
class EvalConfig:
    """How fading expectations are evaluated.

    Args:
        method (EvalMethod, optional): Quadrature or Monte Carlo. Defaults to quadrature.
        mc_samples (int, optional): Monte Carlo sample count. Defaults to 100000.
        seed (int, optional): Master seed for Monte Carlo streams. Defaults to 0.
        quad (QuadratureConfig, optional): Quadrature tolerances.
    """
    method: EvalMethod = EvalMethod.QUADRATURE
    mc_samples: int = 100_000
    seed: int = 0
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        object.__setattr__(self, 'method', EvalMethod(self.method))
        if int(self.mc_samples) < 1:
            raise DomainError('mc_samples must be at least 1')
        if int(self.seed) < 0:
            raise DomainError('seed must be a non-negative integer')


def pdf(model, z):
    """Density m^m z^{m-1} e^{-mz} / Γ(m) of the power gain.

    Args:
        model (FadingModel): Fading model.
        z (float|np.ndarray): Power gain (≥ 0).

    Raises:
        DomainError: Negative z.

    Returns:
        float|np.ndarray: Density value.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError('Power gain must be non-negative')
    return model.distribution.pdf(z)


def rng_for(cfg, task=0):
    """Independent generator for one (master seed, task index) pair.

    Args:
        cfg (EvalConfig): Carries the master seed.
        task (int, optional): Task index, e.g. a sweep row. Defaults to 0.

    Returns:
        np.random.Generator: Seeded generator.
    """
    return np.random.default_rng(np.random.SeedSequence([int(cfg.seed), int(task)]))


def sample(model, cfg, count, task=0):
    """I.i.d. power-gain draws, deterministic for a fixed (seed, task).

    Args:
        model (FadingModel): Fading model.
        cfg (EvalConfig): Carries the seed.
        count (int): Number of draws (≥ 1).
        task (int, optional): Stream index. Defaults to 0.

    Returns:
        np.ndarray: Draws of Z.
    """
    if int(count) < 1:
        raise DomainError('count must be at least 1')
    return rng_for(cfg, task).gamma(shape=model.m, scale=1.0 / model.m, size=int(count))


def expect(model, g, cfg=None, points=None, task=0):
    """E_Z[g(Z)] by quadrature or Monte Carlo, as selected in cfg.

    Args:
        model (FadingModel): Fading model.
        g (function): Numpy-friendly function of z.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        points (tuple, optional): Quadrature break points. Defaults to None.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        KernelValue: Estimate; for Monte Carlo est_error is the standard error.
    """
    cfg = cfg or EvalConfig()
    if cfg.method == EvalMethod.QUADRATURE:
        return gamma_expectation(g, model.m, cfg.quad, points)

    values = np.asarray(g(sample(model, cfg, cfg.mc_samples, task)), dtype=float)
    stderr = values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else 0.0
    return KernelValue(float(values.mean()), float(stderr), True)
