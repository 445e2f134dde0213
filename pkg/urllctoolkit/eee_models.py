"""Power consumption models and the effective energy efficiency (EEE) quotient."""
import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import expect
from .effective_capacity import EcMethod, effective_capacity
from .errors import DomainError, SlackConstraintWarning
from .fbl_rate import expected_rate
from .math_kernels import LOG2E


class BufferMode(str, enum.Enum):
    FULL_BUFFER = 'full_buffer'
    EMPTY_BUFFER_AWARE = 'ebp'


@dataclass(frozen=True)
class PowerModel:
    """Linear consumption P_t = ζρ + P_c.

    Args:
        zeta (float, optional): Inverse drain efficiency (≥ 1). Defaults to 1.2.
        pc (float, optional): Circuit power in watts (≥ 0). Defaults to 0.2.
    """
    zeta: float = 1.2
    pc: float = 0.2

    def __post_init__(self):
        if not self.zeta >= 1:
            raise DomainError(f'Inverse drain efficiency must be at least 1, got {self.zeta}')
        if not self.pc >= 0:
            raise DomainError(f'Circuit power must be non-negative, got {self.pc}')


@dataclass(frozen=True)
class TrafficModel:
    """Constant-rate source feeding the transmit buffer.

    Args:
        arrival_rate (float, optional): λ in bpcu (> 0). Defaults to 1.0.
        buffer_mode (BufferMode, optional): Full buffer or EBP-aware. Defaults to EBP-aware.
    """
    arrival_rate: float = 1.0
    buffer_mode: BufferMode = BufferMode.EMPTY_BUFFER_AWARE

    def __post_init__(self):
        object.__setattr__(self, 'buffer_mode', BufferMode(self.buffer_mode))
        if not self.arrival_rate > 0:
            raise DomainError(f'Arrival rate must be positive, got {self.arrival_rate}')


@dataclass(frozen=True)
class BufferState:
    p_nb: float
    mean_rate: float
    feasible: bool


@dataclass(frozen=True)
class EeeResult:
    eee: float
    ec: float
    p_nb: float
    p_total: float
    feasible: bool

    def __str__(self):
        flag = '' if self.feasible else ' [infeasible]'
        return (f'EEE={self.eee:.6g} bpcu/W (EC={self.ec:.6g}, P_nb={self.p_nb:.6g}, '
                f'P_t={self.p_total:.6g} W){flag}')


def power_total_linear(rho, pm):
    """P_t = ζρ + P_c in watts.

    Args:
        rho (float|np.ndarray): Transmit power (≥ 0).
        pm (PowerModel): Power model.

    Returns:
        float|np.ndarray: Total power.
    """
    if np.any(np.asarray(rho) < 0):
        raise DomainError('Transmit power must be non-negative')
    return pm.zeta * rho + pm.pc


def queue_state(p_nb_raw, mean_rate):
    """Caps λ/E[r] at one and flags an unstable queue."""
    if not mean_rate > 0:
        return BufferState(1.0, float(mean_rate), False)
    return BufferState(float(min(p_nb_raw, 1.0)), float(mean_rate), bool(p_nb_raw <= 1.0))


def nbp(p, tm, model=None, cfg=None, task=0):
    """Non-empty buffer probability P_nb = min(λ/E[max(r, 0)], 1).

    Args:
        p (LinkParams): Link parameters.
        tm (TrafficModel): Arrival rate.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        BufferState: P_nb, the clamped mean service rate and the stability flag.
    """
    mean = expected_rate(p, model, cfg, clamp_nonneg=True, task=task).value
    raw = tm.arrival_rate / mean if mean > 0 else np.inf
    return queue_state(raw, mean)


def nbp_shannon(p, tm, model=None, cfg=None, task=0):
    """P_nb with the long-packet service rate E[log₂(1+ρZ)]."""
    model = model or p.fading
    if p.rho == 0:
        return queue_state(np.inf, 0.0)
    mean = expect(model, lambda z: np.log1p(p.rho * z) * LOG2E, cfg, (1.0 / p.rho,), task).value
    return queue_state(tm.arrival_rate / mean, mean)


def eee_full_buffer(p, q, pm, cfg=None, method=EcMethod.STOCHASTIC, model=None, task=0):
    """η_ee = C_e/(ζρ + P_c) with the buffer always full.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        pm (PowerModel): Power model.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        method (EcMethod, optional): EC evaluation. Defaults to stochastic.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        EeeResult: EEE in bpcu per watt.
    """
    ec = effective_capacity(p, q, method, cfg, model, task).ec
    p_total = power_total_linear(p.rho, pm)
    return EeeResult(ec / p_total, ec, 1.0, p_total, True)


def ebp_method(p, method):
    """EC method used on the EBP path.

    The Rayleigh closed form falls back to the series form for m != 1.
    """
    method = EcMethod(method)
    if method == EcMethod.THEOREM1 and p.m != 1:
        warnings.warn('No Rayleigh closed form for m != 1; using the Nakagami series EC',
                      UserWarning)
        return EcMethod.LEMMA1
    return method


def eee_ebp(p, q, pm, tm, cfg=None, method=EcMethod.STOCHASTIC, model=None, task=0):
    """η_ee = C_e/(P_nb ζρ + P_c) accounting for empty-buffer slots.

    With buffer_mode FULL_BUFFER, P_nb is fixed to one. An unstable queue
    (λ > E[r]) is reported with feasible=False and P_nb capped at one.

    Args:
        p (LinkParams): Link parameters.
        q (QoSConstraints): QoS constraints.
        pm (PowerModel): Power model.
        tm (TrafficModel): Traffic model.
        cfg (EvalConfig, optional): Evaluation settings. Defaults to None.
        method (EcMethod, optional): EC evaluation. Defaults to stochastic.
        model (FadingModel, optional): Fading model. Defaults to Nakagami with p.m.
        task (int, optional): Monte Carlo stream index. Defaults to 0.

    Returns:
        EeeResult: EEE in bpcu per watt.
    """
    method = ebp_method(p, method)
    if tm.buffer_mode == BufferMode.FULL_BUFFER:
        state = BufferState(1.0, np.nan, True)
    elif method == EcMethod.SHANNON:
        state = nbp_shannon(p, tm, model, cfg, task)
    else:
        state = nbp(p, tm, model, cfg, task)
    ec = effective_capacity(p, q, method, cfg, model, task).ec
    p_total = state.p_nb * pm.zeta * p.rho + pm.pc
    return EeeResult(ec / p_total, ec, state.p_nb, p_total, state.feasible)


def theta_star(tm, q, p_nb):
    """Delay exponent meeting P_nb e^{-θλδ} = Λ at equality: θ* = ln(P_nb/Λ)/(λδ).

    Args:
        tm (TrafficModel): Arrival rate λ.
        q (QoSConstraints): Delay bound δ and violation probability Λ.
        p_nb (float): Non-empty buffer probability in (0, 1].

    Raises:
        DomainError: p_nb outside (0, 1].

    Returns:
        float: θ*, or 0 with a SlackConstraintWarning when P_nb ≤ Λ.
    """
    if not 0 < p_nb <= 1:
        raise DomainError(f'P_nb must lie in (0, 1], got {p_nb}')
    if p_nb <= q.violation:
        warnings.warn('P_nb does not exceed the violation probability; the delay '
                      'constraint is slack and θ* is clamped to 0', SlackConstraintWarning)
        return 0.0
    return float(np.log(p_nb / q.violation) / (tm.arrival_rate * q.delta))


def eee_shannon_ebp(p, q, pm, tm, cfg=None, model=None, task=0):
    """Long-packet baseline of eee_ebp: ε = 0, r = log₂(1+ρz) in both EC and P_nb."""
    return eee_ebp(p, q, pm, tm, cfg, EcMethod.SHANNON, model, task)
