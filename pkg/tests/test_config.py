import pytest

from urllctoolkit import config
from urllctoolkit.channel import EvalMethod
from urllctoolkit.eee_models import BufferMode
from urllctoolkit.errors import DomainError


def test_every_preset_resolves():
    for name in config.PRESETS:
        resolved = config.resolve_config(name)
        assert set(config.BASE) <= set(resolved)
        assert all(key in config.KEY_TYPES for key in resolved)


def test_unknown_preset():
    with pytest.raises(DomainError):
        config.resolve_config('fig11')


def test_parse_config_text():
    values = config.parse_config_text('''
        # comment line
        n = 200
        theta = 1e-3   # trailing comment
        thetas = 1e-3, 1e-2
        buffer_mode = full_buffer
    ''')
    assert values == {'n': 200, 'theta': 1e-3, 'thetas': (1e-3, 1e-2),
                      'buffer_mode': 'full_buffer'}


@pytest.mark.parametrize('text', ['n 200', 'colour = blue', 'n = many'])
def test_parse_config_text_rejects(text):
    with pytest.raises(DomainError):
        config.parse_config_text(text)


def test_read_config_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('rho_db = 6\neps_target = 1e-5\n', encoding='utf-8')
    assert config.read_config_file(str(path)) == {'rho_db': 6.0, 'eps_target': 1e-5}


def test_precedence():
    resolved = config.resolve_config('fig7', file_values={'rho_db': 3.0, 'n': 200},
                                     overrides={'rho_db': 9.0, 'n': None})
    assert resolved['rho_db'] == 9.0
    assert resolved['n'] == 200
    assert resolved['eps_target'] == 1e-9
    assert resolved['theta'] == config.BASE['theta']


def test_override_unknown_key():
    with pytest.raises(DomainError):
        config.resolve_config(overrides={'rho': 2.0})


def test_default_threads(monkeypatch):
    monkeypatch.setenv(config.THREADS_ENV, '3')
    assert config.default_threads() == 3
    monkeypatch.delenv(config.THREADS_ENV)
    assert config.default_threads() >= 1


@pytest.mark.parametrize('raw', ['0', 'four'])
def test_default_threads_rejects(monkeypatch, raw):
    monkeypatch.setenv(config.THREADS_ENV, raw)
    with pytest.raises(DomainError):
        config.default_threads()


def test_builders():
    c = config.resolve_config('fig7')
    p = config.link_params(c)
    assert p.rho == pytest.approx(10 ** 0.6)
    assert p.n == 500
    assert config.link_params(c, rho=2.0).rho == 2.0
    q = config.qos_constraints(c)
    assert q.theta == c['theta']
    assert config.power_model(c).pc == 0.2
    tm = config.traffic_model(c)
    assert tm.arrival_rate == 0.5
    assert tm.buffer_mode is BufferMode.EMPTY_BUFFER_AWARE
    assert config.eval_config(c).method is EvalMethod.QUADRATURE
