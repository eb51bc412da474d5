import time

import pytest

from errors import ConfigurationError, UnknownNameError
from models import NetworkConfig
from utils.sweeps import SweepSpec
from utils.verification import (MAX_REDUCTION_RELAYS, RHO_RR_GRID, full_correlation_check,
                                ordering_point, random_config, reduction_deviation,
                                run_suite, trial_rng)


def two_relays(gain_sr, gain_rd):
    return NetworkConfig(source_power=1.0, relay_powers=[1.0, 1.0], noise_power=1.0,
                         gain_sd=1.0, gains_sr=[gain_sr] * 2, gains_rd=[gain_rd] * 2)


def test_trial_generators_are_independent_of_order():
    first = trial_rng(5, 3).uniform(size=4)
    trial_rng(5, 0).uniform(size=100)
    assert (trial_rng(5, 3).uniform(size=4) == first).all()
    assert not (trial_rng(5, 4).uniform(size=4) == first).all()


def test_cut_reduction_suite_counts_trials_per_relay_count():
    report = run_suite('cut-reduction', seed=1, trials=2)
    assert report.suite == 'cut-reduction'
    assert report.passed
    assert [t.index for t in report.trials] == list(range(16))
    details = [t.detail for t in report.trials]
    assert all(details.count(f'R={r}') == 2 for r in range(1, 9))
    assert report.worst_deviation < 1e-6


def test_reduction_check_with_eight_relays_is_fast():
    config = random_config(trial_rng(0, 7), MAX_REDUCTION_RELAYS)
    started = time.perf_counter()
    deviation = reduction_deviation(config)
    elapsed = time.perf_counter() - started
    assert deviation < 1e-6
    assert elapsed < 3.0


@pytest.mark.parametrize('seed', [-1, 1.5, True])
def test_suite_rejects_bad_seeds(seed):
    with pytest.raises(ConfigurationError) as info:
        run_suite('cut-reduction', seed=seed, trials=1)
    assert info.value.field == 'seed'


def test_reduction_holds_at_the_grid_edges(rng):
    config = random_config(rng, 2)
    assert reduction_deviation(config, (-1.0, 1.0)) < 1e-6


def test_full_correlation_when_mac_limited():
    check = full_correlation_check(two_relays(1000.0, 1.0), 0.0)
    assert check.passed
    assert check.argmax == RHO_RR_GRID[-1]
    assert None not in check.values


def test_full_correlation_can_fail():
    # A strong relay-destination link makes the single-relay cuts shrink with rho_rr
    check = full_correlation_check(two_relays(1.0, 10.0), 0.0)
    assert not check.passed
    assert check.argmax < RHO_RR_GRID[-1]
    assert check.values[0] == pytest.approx(1.0, abs=1e-9)


def test_infeasible_grid_points_are_skipped():
    check = full_correlation_check(two_relays(1.0, 1.0), 0.9, grid=(0.0, 0.7, 0.99))
    assert check.values[0] is None
    assert check.feasible == check.values[1:]


def test_empty_suite_passes():
    report = run_suite('moments', trials=0)
    assert report.passed
    assert report.trials == []
    assert report.to_dict()['kind'] == 'verification_report'


def test_moments_suite_small():
    report = run_suite('moments', seed=2, trials=2, blocks=20, samples=500)
    assert len(report.trials) == 2
    assert report.trials[0].detail.startswith('correlated')
    assert report.trials[1].detail.startswith('af')


def test_ordering_along_coarse_sweep():
    spec = SweepSpec(name='coarse', d_sd=1.0, d_r=0.1, start=-0.5, stop=1.5, step=0.25,
                     source_power=0.1, relay_power=0.1, noise_power=1e-6)
    report = run_suite('upper-bound-ordering', trials=5, sweeps=[spec])
    assert report.passed
    assert len(report.trials) == 6


def test_ordering_point_verdicts(unity):
    point = ordering_point(unity, 'unity')
    assert point.violations['direct'] < 0
    assert point.exceedances == {}


def test_unknown_suite():
    with pytest.raises(UnknownNameError) as info:
        run_suite('cut_reductoin', trials=1)
    assert info.value.suggestion == 'cut-reduction'
