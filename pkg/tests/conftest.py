import pytest

from urllctoolkit.channel import EvalConfig
from urllctoolkit.eee_models import PowerModel, TrafficModel
from urllctoolkit.effective_capacity import QoSConstraints
from urllctoolkit.fbl_rate import LinkParams
from urllctoolkit.tools import db_to_linear


@pytest.fixture
def link():
    return LinkParams(n=500, rho=2.0, m=1.0, epsilon=1e-4)


@pytest.fixture
def qos():
    return QoSConstraints(theta=0.01)


@pytest.fixture
def power():
    return PowerModel(zeta=1.2, pc=0.2)


@pytest.fixture
def traffic():
    return TrafficModel(arrival_rate=0.5)


@pytest.fixture
def arq_link():
    # 6 dB, ε = 1e-9: the retransmission experiments' operating point
    return LinkParams(n=500, rho=float(db_to_linear(6.0)), m=1.0, epsilon=1e-9)


@pytest.fixture
def mc_cfg():
    return EvalConfig(method='monte_carlo', mc_samples=200_000, seed=7)
