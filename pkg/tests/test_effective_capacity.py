import warnings
from dataclasses import replace

import numpy as np
import pytest

from urllctoolkit.errors import ConvergenceWarning, DomainError
from urllctoolkit.effective_capacity import (ClosedFormTerms, EcMethod, QoSConstraints,
                                             delay_bound, ec_from_psi, ec_lemma1, ec_shannon,
                                             ec_stochastic, ec_theorem1, effective_capacity,
                                             j_kernel, j_kernel_drho, psi_closed, psi_lemma1,
                                             psi_stochastic)
from urllctoolkit.fbl_rate import LinkParams, expected_rate
from urllctoolkit.math_kernels import LOG2E, finite_diff
from urllctoolkit.tools import db_to_linear


def _link(rho_db, n=500, m=1.0, eps=1e-4):
    return LinkParams(n=n, rho=float(db_to_linear(rho_db)), m=m, epsilon=eps)


@pytest.mark.parametrize('kwargs', [
    {'theta': -0.1}, {'theta': 0.01, 'delta': 0.0}, {'theta': 0.01, 'violation': 1.0},
    {'theta': 0.01, 'epsilon_t': 0.6},
])
def test_qos_validation(kwargs):
    with pytest.raises(DomainError):
        QoSConstraints(**kwargs)


def test_closed_form_terms(link, qos):
    terms = ClosedFormTerms.from_params(link, qos)
    assert terms.alpha == pytest.approx(-0.01 * 500 * LOG2E)
    k1, k2 = terms.kappas
    assert k1 - k2 == pytest.approx(1.0)
    assert k2 == pytest.approx(0.5 * terms.beta ** 2 + terms.beta)
    with pytest.raises(DomainError):
        ClosedFormTerms(alpha=-1.0, beta=0.1, taylor_terms=0)


def test_degenerate_links(link, qos):
    assert psi_stochastic(replace(link, epsilon=1.0), qos) == 1.0
    assert ec_stochastic(replace(link, epsilon=1.0), qos).ec == 0.0
    assert ec_stochastic(replace(link, rho=0.0), qos).ec == 0.0
    assert psi_closed(replace(link, epsilon=1.0), qos) == 1.0


def test_zero_theta_limit(link):
    q0 = QoSConstraints(theta=0.0)
    res = ec_stochastic(link, q0)
    assert res.ec == pytest.approx((1.0 - link.epsilon) * expected_rate(link).value)
    assert ec_theorem1(link, q0).ec == pytest.approx(res.ec)


def test_ec_from_psi():
    assert ec_from_psi(np.exp(-5.0), 500, 0.01) == pytest.approx(1.0)


def test_ec_decreases_with_theta(link):
    ecs = [ec_stochastic(link, QoSConstraints(theta=t)).ec for t in (1e-3, 1e-2, 1e-1)]
    assert ecs[0] > ecs[1] > ecs[2] > 0


def test_ec_increases_with_fading_parameter(qos):
    ecs = [ec_stochastic(_link(10.0, m=m), qos).ec for m in (0.5, 1.0, 2.0)]
    assert 0 < ecs[0] < ecs[1] < ecs[2]


@pytest.mark.parametrize('theta', [1e-3, 1e-2])
def test_ec_single_peak_in_error_probability(link, theta):
    eps = np.geomspace(1e-9, 0.5, 60)
    q = QoSConstraints(theta=theta)
    ecs = np.array([ec_stochastic(replace(link, epsilon=e), q).ec for e in eps])
    rising = np.diff(ecs) > 0
    assert rising[0] and not rising[-1]
    assert np.count_nonzero(rising[:-1] != rising[1:]) == 1


@pytest.mark.parametrize('theta', [1e-3, 1e-2, 0.1])
@pytest.mark.parametrize('rho_db', [-5.0, 10.0, 20.0])
@pytest.mark.parametrize('n', [50, 500])
def test_closed_form_never_below_stochastic(theta, rho_db, n):
    p, q = _link(rho_db, n), QoSConstraints(theta=theta)
    assert ec_theorem1(p, q).ec >= ec_stochastic(p, q).ec * (1.0 - 1e-9)


@pytest.mark.parametrize('rho_db', [0.0, 10.0, 20.0])
def test_closed_form_accurate_at_small_theta(rho_db):
    p, q = _link(rho_db), QoSConstraints(theta=1e-3)
    assert ec_theorem1(p, q).ec == pytest.approx(ec_stochastic(p, q).ec, rel=1e-2)


def test_closed_form_warns_at_large_beta():
    p, q = _link(10.0, n=50), QoSConstraints(theta=0.1)
    assert ClosedFormTerms.from_params(p, q).beta == pytest.approx(3.79, rel=1e-2)
    with pytest.warns(ConvergenceWarning, match='beta'):
        ec_theorem1(p, q)
    with warnings.catch_warnings():
        warnings.simplefilter('error', ConvergenceWarning)
        ec_theorem1(_link(10.0), QoSConstraints(theta=0.01))


@pytest.mark.parametrize('m', [1.0, 2.0])
@pytest.mark.parametrize('rho_db', [0.0, 10.0])
def test_series_psi_three_terms(m, rho_db):
    p, q = _link(rho_db, m=m), QoSConstraints(theta=1e-3)
    assert psi_lemma1(p, q).value == pytest.approx(psi_stochastic(p, q), rel=1e-3)


def test_series_ec_at_moderate_theta(link, qos):
    assert ec_lemma1(link, qos).ec == pytest.approx(ec_stochastic(link, qos).ec, rel=5e-2)


def test_series_converges_with_terms(link, qos):
    terms = ClosedFormTerms.from_params(link, qos, taylor_terms=12)
    assert psi_lemma1(link, qos, terms).value == pytest.approx(psi_stochastic(link, qos), abs=1e-6)


def test_j_kernel_requires_rayleigh(qos):
    with pytest.raises(DomainError):
        j_kernel(_link(3.0, m=2.0), qos)
    with pytest.raises(DomainError):
        ec_theorem1(_link(3.0, m=2.0), qos)


def test_j_kernel_derivative(link, qos):
    fd = finite_diff(lambda r: j_kernel(replace(link, rho=r), qos), link.rho, rel_step=1e-4)
    assert j_kernel_drho(link, qos) == pytest.approx(fd, rel=1e-5)
    assert j_kernel_drho(link, qos) < 0
    with pytest.raises(DomainError):
        j_kernel_drho(replace(link, rho=0.0), qos)


def test_shannon_dominates(link, qos):
    assert ec_shannon(link, qos).ec > ec_stochastic(link, qos).ec
    assert ec_shannon(replace(link, rho=0.0), qos).ec == 0.0


@pytest.mark.parametrize('method', list(EcMethod))
def test_dispatcher(link, qos, method):
    res = effective_capacity(link, qos, method)
    assert res.method == method
    assert res.ec > 0


def test_delay_bound_examples():
    q = QoSConstraints(theta=0.01, violation=1e-5)
    assert delay_bound(1.0, q) == 1151
    assert delay_bound(1.0, q, theta=0.1) == 115
    assert isinstance(delay_bound(0.37, q), int)
    with pytest.raises(DomainError):
        delay_bound(0.0, q)
    with pytest.raises(DomainError):
        delay_bound(1.0, QoSConstraints(theta=0.0))
