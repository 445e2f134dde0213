import io

import numpy as np
import pandas as pd
import pytest

from urllctoolkit.cli import (EXIT_DOMAIN, EXIT_INFEASIBLE, EXIT_OK, build_parser, main,
                              resolve)


def _table(text):
    lines = text.splitlines()
    assert lines[0].startswith('# config: ')
    return lines


def test_ec_single_method(capsys):
    assert main(['ec', '--rho-db', '3', '--theta', '0.01']) == EXIT_OK
    lines = _table(capsys.readouterr().out)
    assert ' rho_db=3 ' in lines[0]
    assert lines[1] == 'method,ec,psi,est_error'
    assert lines[2].startswith('stochastic,')
    assert len(lines) == 3


def test_ec_all_methods(capsys):
    assert main(['ec', '--method', 'all', '--theta', '1e-3']) == EXIT_OK
    lines = _table(capsys.readouterr().out)
    assert len(lines) == 2 + 4
    assert 'dev_vs_stochastic' in lines[1]


def test_ec_deviation_against_zero_reference(capsys):
    assert main(['ec', '--eps', '1', '--method', 'all']) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out), skiprows=1).set_index('method')
    assert frame.loc['stochastic', 'ec'] == 0.0
    assert np.isnan(frame.loc['shannon', 'dev_vs_stochastic'])
    assert frame.loc['stochastic', 'dev_vs_shannon'] == -1.0


def test_bad_value_is_domain_error(capsys):
    assert main(['ec', '--eps', '2']) == EXIT_DOMAIN
    assert capsys.readouterr().out == ''


def test_unknown_choice_exits_from_argparse():
    with pytest.raises(SystemExit) as info:
        main(['ec', '--method', 'bogus'])
    assert info.value.code == 2


def test_infeasible_arq(capsys):
    assert main(['arq', '--rho-db', '6', '--eps-target', '1e-9', '--lambda', '2.0']) == \
        EXIT_INFEASIBLE


def test_dinkelbach_trace(capsys):
    argv = ['dinkelbach', '--rho-db', '6', '--eps-target', '1e-9', '--lambda', '0.5', '--trace']
    assert main(argv) == EXIT_OK
    lines = _table(capsys.readouterr().out)
    assert lines[1] == 'iteration,sigma,f_value,eps1,converged'
    assert lines[-1].endswith(',True')
    assert all(line.endswith(',False') for line in lines[2:-1])


def test_arq_point(capsys):
    assert main(['arq', '--rho-db', '6', '--eps-target', '1e-9', '--lambda', '0.5',
                 '--split', 'equal']) == EXIT_OK
    lines = _table(capsys.readouterr().out)
    assert lines[1].split(',')[:3] == ['eps1', 'eps2', 'p_nb_mod']
    eps1, eps2 = (float(v) for v in lines[2].split(',')[:2])
    assert eps1 == pytest.approx(eps2)


def test_sweep_to_file(tmp_path):
    out = tmp_path / 'fig1.csv'
    assert main(['sweep', '--fig', '1', '--points', '2', '--threads', '2',
                 '--out', str(out)]) == EXIT_OK
    text = out.read_text(encoding='utf-8')
    lines = _table(text)
    assert lines[1] == 'rho_db,theta,eee_closed,eee_stochastic,n'
    assert ' ns=500,50 ' in lines[0]
    frame = pd.read_csv(out, skiprows=1)
    assert len(frame) == 2 * 2 * 3
    assert '\r' not in text


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / 'link.cfg'
    path.write_text('rho_db = 6\ntheta = 0.1\n', encoding='utf-8')
    args = build_parser().parse_args(['eee', '--config', str(path), '--theta', '0.02'])
    c = resolve(args)
    assert c['rho_db'] == 6.0
    assert c['theta'] == 0.02


def test_preset_feeds_resolution():
    args = build_parser().parse_args(['arq', '--preset', 'fig7'])
    assert resolve(args)['eps_target'] == 1e-9


def test_sweep_csv_independent_of_threads(tmp_path):
    outputs = []
    for threads in ('1', '3'):
        out = tmp_path / f'fig3_{threads}.csv'
        assert main(['sweep', '--fig', '3', '--points', '3', '--threads', threads,
                     '--out', str(out)]) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
