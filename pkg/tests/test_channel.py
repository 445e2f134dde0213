import numpy as np
import pytest

from urllctoolkit.channel import EvalConfig, EvalMethod, FadingModel, expect, pdf, sample
from urllctoolkit.errors import DomainError


def test_fading_model_validation():
    with pytest.raises(DomainError):
        FadingModel(0.4)
    assert str(FadingModel(2.0)) == 'Nakagami-m fading (m=2)'


def test_eval_config_validation():
    assert EvalConfig(method='monte_carlo').method == EvalMethod.MONTE_CARLO
    with pytest.raises(ValueError):
        EvalConfig(method='bogus')
    with pytest.raises(DomainError):
        EvalConfig(mc_samples=0)
    with pytest.raises(DomainError):
        EvalConfig(seed=-1)


def test_pdf():
    assert pdf(FadingModel(1.0), 1.0) == pytest.approx(np.exp(-1.0))
    with pytest.raises(DomainError):
        pdf(FadingModel(1.0), -0.5)


def test_sample_is_seed_deterministic():
    model, cfg = FadingModel(2.0), EvalConfig(seed=11)
    np.testing.assert_array_equal(sample(model, cfg, 100, task=3), sample(model, cfg, 100, task=3))
    assert not np.array_equal(sample(model, cfg, 100, task=3), sample(model, cfg, 100, task=4))
    with pytest.raises(DomainError):
        sample(model, cfg, 0)


@pytest.mark.parametrize('m', [1.0, 3.0])
def test_sample_moments(m):
    z = sample(FadingModel(m), EvalConfig(seed=5), 100_000)
    stderr = np.sqrt(1.0 / m) / np.sqrt(z.size)
    assert abs(z.mean() - 1.0) < 4 * stderr


@pytest.mark.parametrize('m', [1.0, 2.5])
def test_expect_quadrature(m):
    val = expect(FadingModel(m), lambda z: z * z)
    assert val.value == pytest.approx(1.0 + 1.0 / m, rel=1e-8)
    assert val.converged


def test_expect_monte_carlo_matches_quadrature(mc_cfg):
    model = FadingModel(1.0)
    g = lambda z: np.log1p(2.0 * z)
    mc = expect(model, g, mc_cfg)
    exact = expect(model, g).value
    assert mc.est_error > 0
    assert abs(mc.value - exact) < 4 * mc.est_error
