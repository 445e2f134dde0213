import numpy as np
import pandas as pd
import pytest

from urllctoolkit.effective_capacity import EcMethod
from urllctoolkit.errors import DomainError
from urllctoolkit.fbl_rate import LinkParams, expected_rate
from urllctoolkit.scenarios import (COLUMNS, Experiment, SweepSpec, TwoUserConfig, build_spec,
                                    run_sweep, sweep_rows, two_user_sic)


def test_every_experiment_has_rows_and_columns():
    for experiment in Experiment:
        spec = build_spec(experiment, points=2)
        assert len(spec.grid) == 2
        assert COLUMNS[experiment][0] == spec.axis


def test_sweep_spec_validation():
    with pytest.raises(DomainError):
        SweepSpec('fig1', (), {})
    with pytest.raises(DomainError):
        SweepSpec('fig1', (1.0, 3.0, 2.0), {})
    with pytest.raises(ValueError):
        SweepSpec('fig42', (1.0,), {})
    assert SweepSpec('fig2', (3.0, 2.0), {}).grid == (3.0, 2.0)


def test_build_spec_grids():
    fig1 = build_spec('fig1', points=8)
    assert fig1.grid[0] == -5.0 and fig1.grid[-1] == 30.0
    assert fig1.methods == (EcMethod.THEOREM1, EcMethod.STOCHASTIC)
    fig7 = build_spec('fig7', points=5)
    assert fig7.grid == pytest.approx((1e-4, 1e-3, 1e-2, 1e-1, 1.0))
    assert build_spec('fig5').notes
    assert build_spec('fig3', preset_overrides={'n': 200}).fixed['n'] == 200


def test_fig1_sweep():
    frame = run_sweep(build_spec('fig1', points=3), threads=2)
    assert list(frame.columns) == COLUMNS[Experiment.FIG1]
    assert len(frame) == 3 * 2 * 3
    assert list(frame['rho_db'].unique()) == [-5.0, 12.5, 30.0]
    assert (frame['eee_closed'] >= frame['eee_stochastic'] * (1.0 - 1e-6)).all()


def test_fig2_shannon_above_finite_blocklength():
    frame = run_sweep(build_spec('fig2', points=3), threads=1)
    assert len(frame) == 9
    assert (frame['ec_shannon'] > frame['ec_fbl']).all()
    assert (frame['eee_shannon'] > frame['eee_fbl']).all()


def test_sweep_is_thread_count_independent():
    spec = build_spec('fig3', points=4,
                      preset_overrides={'eval_method': 'monte_carlo', 'mc_samples': 2000})
    one = run_sweep(spec, threads=1, batch_size=1)
    three = run_sweep(spec, threads=3, batch_size=1)
    pd.testing.assert_frame_equal(one, three)
    assert list(one['arrival_rate'].unique()) == list(spec.grid)


def test_failed_row_is_flagged():
    spec = build_spec('fig9', points=2)
    [row] = sweep_rows(spec, 0, 1.7)
    assert row[0] == 1.7
    assert all(np.isnan(v) for v in row[1:])


def test_fig7_row():
    spec = build_spec('fig7', points=2)
    [row] = sweep_rows(spec, 0, 0.01)
    values = dict(zip(COLUMNS[Experiment.FIG7], row))
    assert values['upper_bound'] >= values['eee_min_power']
    assert values['eps1'] == pytest.approx(0.02, rel=0.5)
    assert values['tau_n'] <= 1.03
    assert values['eee_min_power'] > values['eee_ebp']
    assert values['gain_vs_ebp'] == pytest.approx(values['eee_min_power'] / values['eee_ebp'])


def test_fig7_gain_at_tight_delay():
    [row] = sweep_rows(build_spec('fig7', points=2), 0, 0.1)
    values = dict(zip(COLUMNS[Experiment.FIG7], row))
    assert values['eee_min_power'] >= values['eee_equal_split']
    assert values['gain_vs_ebp'] > 1.5


def test_two_user_without_interference():
    tu = TwoUserConfig(rho1=0.0, rho2=1.0, eps1_user=1e-4, eps2_user=0.1, lambda1=0.1,
                       lambda2=0.1)
    res = two_user_sic(tu)
    assert res.converged
    assert res.iterations <= 3
    assert res.p_nb1 == 1.0
    free = expected_rate(LinkParams(n=500, rho=1.0, m=1.0, epsilon=0.1),
                         clamp_nonneg=True).value
    assert res.p_nb2 == pytest.approx(0.1 / free)
    assert res.mean_rate_user2 == pytest.approx(free)


def test_two_user_rejects_bad_damping():
    tu = TwoUserConfig(rho1=0.0, rho2=1.0, eps1_user=1e-4, eps2_user=0.1, lambda1=0.1,
                       lambda2=0.1)
    with pytest.raises(DomainError):
        two_user_sic(tu, damping=0.0)


@pytest.mark.slow
def test_two_user_interference_raises_user2_load():
    base = dict(rho2=1.0, eps1_user=1e-4, eps2_user=0.1, lambda1=0.5, lambda2=0.1)
    quiet = two_user_sic(TwoUserConfig(rho1=0.0, **base))
    loud = two_user_sic(TwoUserConfig(rho1=4.0, **base))
    assert loud.converged
    assert 0.0 < loud.p_nb1 < 1.0
    assert loud.p_nb2 > quiet.p_nb2
    assert loud.mean_rate_user2 < quiet.mean_rate_user2


@pytest.fixture(scope='module')
def constrained_overrides():
    return {'grid_lo': 1000.0, 'n_grid': 24}


@pytest.mark.slow
def test_fig4_eee_grows_with_delay_bound(constrained_overrides):
    frame = run_sweep(build_spec('fig4', points=3, preset_overrides=constrained_overrides),
                      threads=2)
    assert frame['feasible'].all()
    assert (frame['eee_ebp'] >= frame['eee_full_buffer']).all()
    by_violation = {v: g.sort_values('delta') for v, g in frame.groupby('violation')}
    for group in by_violation.values():
        assert group['eee_ebp'].is_monotonic_increasing
    strict, loose = by_violation[1e-3], by_violation[1e-2]
    assert (strict['eee_ebp'].to_numpy() < loose['eee_ebp'].to_numpy()).all()


@pytest.mark.slow
def test_fig6_optimal_power_orderings(constrained_overrides):
    frame = run_sweep(build_spec('fig6', points=3, preset_overrides=constrained_overrides),
                      threads=2)
    assert frame['feasible'].all()
    loose = frame[frame['violation'] == 1e-2].sort_values('delta')
    assert loose['rho_db_ebp'].diff().iloc[1:].gt(0).all()
    # at the tightest delay bound the EC ≥ λ constraint binds and a stricter Λ needs more power
    first = frame[frame['delta'] == 1000.0].set_index('violation')
    assert first.loc[1e-3, 'rho_db_ebp'] > first.loc[1e-2, 'rho_db_ebp']


def test_fig8_orderings():
    frame = run_sweep(build_spec('fig8', points=3), threads=1)
    assert (frame['eee_shannon'] >= frame['eee_ebp']).all()
    assert (frame['eee_ebp'] >= frame['eee_full_buffer']).all()
    strict = frame[frame['violation'] == 1e-3].set_index('epsilon')
    loose = frame[frame['violation'] == 1e-2].set_index('epsilon')
    assert (strict['theta_ebp'] > loose['theta_ebp']).all()
    assert (strict['eee_ebp'] < loose['eee_ebp']).all()


@pytest.mark.slow
def test_fig10_latency_and_load():
    frame = run_sweep(build_spec('fig10', points=3), threads=2)
    for _, group in frame.groupby('eps_target'):
        group = group.sort_values('arrival_rate')
        assert group['p_nb_mod'].diff().iloc[1:].gt(0).all()
        assert group['tau_n'].diff().iloc[1:].lt(0).all()
        assert group['tau_n'].between(1.0, 1.03).all()
    tight = frame[frame['eps_target'] == 1e-9].set_index('arrival_rate')
    relaxed = frame[frame['eps_target'] == 1e-5].set_index('arrival_rate')
    assert (relaxed['p_nb_mod'] < tight['p_nb_mod']).all()
    assert (relaxed['tau_n'] > tight['tau_n']).all()
