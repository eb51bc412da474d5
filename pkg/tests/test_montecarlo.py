import math

import numpy as np
import pytest

from errors import ConfigurationError, DomainError
from models import AfGains, CorrelationState, NetworkConfig
from strategies.amplify_forward import max_gains
from utils.montecarlo import SE_FLOOR, SimRun, _standard_error, simulate


def correlated_run(config, rho, seed=42, blocks=50, samples=2000):
    corr = CorrelationState.full(config.num_relays, rho)
    return SimRun(seed=seed, num_blocks=blocks, samples_per_block=samples,
                  config=config, corr=corr)


def test_unity_moments_match(unity):
    report = simulate(correlated_run(unity, 0.0))
    assert report.mode == 'correlated'
    assert report.passed
    assert [c.name for c in report.checks] == [
        'var_yd', 'relay_power_r1', 'cov_yd_r1_given_xr1',
        'cov_yd_r1_given_xs_xr1', 'var_yd_given_all_inputs',
    ]
    var = report.check('var_yd')
    assert var.predicted == 3.0
    expected_se = math.sqrt(2 * 9.0 / (50 * 2000))
    assert 0.5 * expected_se < var.std_error < 2.0 * expected_se


def test_full_correlation_leaves_noise(unity):
    report = simulate(correlated_run(unity, 1.0))
    assert report.passed
    assert report.check('cov_yd_r1_given_xr1').predicted == unity.noise_power
    assert report.check('var_yd').predicted == 5.0
    assert report.notes == {'rho': 1.0}


def test_two_relays_negative_rho(unity_two):
    report = simulate(correlated_run(unity_two, -0.4, seed=7, blocks=40, samples=1500))
    assert report.passed
    assert set(report.empirical_cov_pairs) == {
        'cov_yd_r1_given_xr1', 'cov_yd_r1_given_xs_xr1',
        'cov_yd_r2_given_xr2', 'cov_yd_r2_given_xs_xr2',
    }


def test_silent_relay_skips_conditioning():
    config = NetworkConfig(source_power=1.0, relay_powers=[0.0], noise_power=1.0,
                           gain_sd=1.0, gains_sr=[1.0], gains_rd=[1.0])
    report = simulate(correlated_run(config, 0.5, blocks=20, samples=1000))
    assert [c.name for c in report.checks] == [
        'var_yd', 'relay_power_r1', 'var_yd_given_all_inputs']
    assert report.check('relay_power_r1').empirical == 0.0
    assert report.passed


def test_simulator_needs_common_full_correlation(unity_two):
    run = SimRun(seed=1, num_blocks=2, samples_per_block=10, config=unity_two,
                 corr=CorrelationState.uniform(2, 0.3, 0.5))
    with pytest.raises(DomainError):
        simulate(run)


def test_af_pipeline_at_maximal_gain(unity):
    run = SimRun(seed=3, num_blocks=50, samples_per_block=2000, config=unity,
                 gains=max_gains(unity))
    report = simulate(run)
    assert report.mode == 'af'
    assert report.passed
    assert report.check('relay_power_r1').predicted == pytest.approx(1.0)
    assert report.check('noise_floor').predicted == pytest.approx(1.5)
    assert report.check('var_yd').predicted == pytest.approx(1.0 + 0.5 + 1.5)
    assert report.notes['coherent_excess'] == pytest.approx(2 * math.sqrt(0.5))


def test_af_pipeline_without_amplification(unity):
    run = SimRun(seed=3, num_blocks=10, samples_per_block=500, config=unity,
                 gains=AfGains((0.0,)))
    report = simulate(run)
    assert report.passed
    assert report.check('noise_floor').predicted == unity.noise_power
    assert report.check('relay_power_r1').empirical == 0.0
    assert report.notes['coherent_excess'] == 0.0


def test_reports_are_reproducible(unity_two):
    first = simulate(correlated_run(unity_two, 0.2, seed=11, blocks=5, samples=200))
    again = simulate(correlated_run(unity_two, 0.2, seed=11, blocks=5, samples=200))
    other = simulate(correlated_run(unity_two, 0.2, seed=12, blocks=5, samples=200))
    assert first.to_dict() == again.to_dict()
    assert first.to_dict() != other.to_dict()


def test_standard_error_shrinks_with_blocks(unity):
    small = simulate(correlated_run(unity, 0.0, seed=5, blocks=40, samples=500))
    large = simulate(correlated_run(unity, 0.0, seed=5, blocks=160, samples=500))
    ratio = small.check('var_yd').std_error / large.check('var_yd').std_error
    assert 2.0 / 1.5 < ratio < 2.0 * 1.5


def test_single_block_is_split_into_batches(unity):
    report = simulate(correlated_run(unity, 0.0, blocks=1, samples=5000))
    assert report.check('var_yd').std_error > SE_FLOOR


def test_run_validation(unity):
    corr = CorrelationState.full(1, 0.0)
    cases = [
        (dict(seed=-1, num_blocks=1, samples_per_block=1, corr=corr), 'seed'),
        (dict(seed=0, num_blocks=0, samples_per_block=1, corr=corr), 'blocks'),
        (dict(seed=0, num_blocks=1, samples_per_block=0, corr=corr), 'samples'),
        (dict(seed=0, num_blocks=1, samples_per_block=1), 'mode'),
        (dict(seed=0, num_blocks=1, samples_per_block=1, corr=corr,
              gains=AfGains((0.1,))), 'mode'),
    ]
    for kwargs, name in cases:
        with pytest.raises(ConfigurationError) as info:
            SimRun(config=unity, **kwargs)
        assert info.value.field == name


def test_lag_one_term_only_widens():
    smooth = [math.sin(k / 3.0) for k in range(30)]
    assert _standard_error(smooth, lag_one=True) > 1.4 * _standard_error(smooth)
    alternating = [1.0, -1.0] * 10
    assert _standard_error(alternating, lag_one=True) == _standard_error(alternating)
    assert _standard_error([2.0], lag_one=True) == SE_FLOOR


def test_af_standard_errors_are_calibrated(unity):
    # Across seeds the reported deviations should spread like a unit normal
    gains = max_gains(unity)
    deviations = {'signal_power': [], 'var_yd': [], 'relay_power_r1': []}
    for seed in range(300):
        report = simulate(SimRun(seed=seed, num_blocks=60, samples_per_block=100,
                                 config=unity, gains=gains))
        for name, values in deviations.items():
            values.append(report.check(name).deviation)
    for name, values in deviations.items():
        assert 0.8 < float(np.std(values)) < 1.17, name
        assert abs(float(np.mean(values))) < 0.25, name
