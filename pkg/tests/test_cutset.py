import math

import pytest

from errors import DomainError
from models import BindingCut, CutsetResult, NetworkConfig
from strategies.cutset import (awgn_capacity, broadcast_term, cutset, cutset_objective,
                               mac_term, parallel_channels_rate)
from strategies.combining import direct_rate
from utils.channel_model import snr
from utils.verification import random_config

HALF_LOG3 = 0.5 * math.log2(3.0)


def test_awgn_capacity():
    assert awgn_capacity(0.0) == 0.0
    assert awgn_capacity(1.0) == 0.5
    assert awgn_capacity(3.0) == 1.0
    with pytest.raises(DomainError):
        awgn_capacity(-1e-3)


def test_terms_single_relay(unity):
    assert broadcast_term(unity, 0, 1.0) == 0.0
    assert broadcast_term(unity, 0, 0.0) == pytest.approx(HALF_LOG3)
    assert mac_term(unity, 0.0) == pytest.approx(HALF_LOG3)
    assert mac_term(unity, 1.0) == pytest.approx(0.5 * math.log2(5.0))
    with pytest.raises(DomainError):
        mac_term(unity, 1.5)


def test_broadcast_without_source_relay_link():
    config = NetworkConfig(source_power=1.0, relay_powers=[1.0], noise_power=1.0,
                           gain_sd=1.0, gains_sr=[0.0], gains_rd=[1.0])
    assert broadcast_term(config, 0, 0.0) == pytest.approx(direct_rate(config))


def test_no_relays_is_direct_link():
    config = NetworkConfig(source_power=1.0, relay_powers=[], noise_power=1.0, gain_sd=1.0)
    result = cutset(config)
    assert result.rate == awgn_capacity(snr(config).snr_sd)
    assert result.rho_star == 0.0
    assert result.binding == BindingCut(mac=True)
    assert result.binding.label() == 'mac'


def test_unity_single_relay_fixed_point(unity):
    result = cutset(unity)
    assert result.rate == pytest.approx(0.792481, abs=1e-6)
    assert result.rho_star == pytest.approx(0.0, abs=1e-6)
    assert result.binding.is_tie
    assert result.binding.label() == 'tie(r1,mac)'
    assert result.rate == min(result.term_values.values())


def test_weak_relay_pins_direct_rate(unity):
    config = NetworkConfig(source_power=1.0, relay_powers=[1.0], noise_power=1.0,
                           gain_sd=1.0, gains_sr=[1e-9], gains_rd=[1.0])
    result = cutset(config)
    assert result.rate == pytest.approx(direct_rate(config), abs=1e-6)
    assert result.rho_star == 0.0
    assert result.binding.label() == 'r1'


def test_adding_weak_relay_lowers_bound(unity):
    grown = unity.with_relay(1.0, 1e-9, 1.0)
    before, after = cutset(unity).rate, cutset(grown).rate
    assert after == pytest.approx(0.5, abs=1e-4)
    assert before - after > 0.01


def test_non_monotone_in_relay_count(rng):
    checked = 0
    while checked < 20:
        config = random_config(rng, int(rng.integers(1, 4)))
        base = cutset(config).rate
        if base <= direct_rate(config) + 0.02:
            continue
        grown = config.with_relay(config.relay_powers[0], 1e-9, config.gains_rd[0])
        assert base - cutset(grown).rate > 0.01
        checked += 1


def test_never_below_direct_link(rng):
    for _ in range(100):
        config = random_config(rng, int(rng.integers(1, 6)))
        result = cutset(config)
        assert result.rate >= direct_rate(config) - 1e-9
        assert result.rate == pytest.approx(min(result.term_values.values()), abs=1e-12)
        assert -1.0 <= result.rho_star <= 1.0


def _relay_favoured(rng, count):
    """Random network with snr_sr < snr_rd on every relay"""
    config = random_config(rng, count)
    gains_rd = [g * config.source_power / p * rng.uniform(2.0, 10.0)
                for g, p in zip(config.gains_sr, config.relay_powers)]
    return NetworkConfig(source_power=config.source_power, relay_powers=config.relay_powers,
                         noise_power=config.noise_power, gain_sd=config.gain_sd,
                         gains_sr=config.gains_sr, gains_rd=gains_rd)


def test_uncorrelated_optimum_when_relays_hear_poorly(rng):
    for _ in range(100):
        config = _relay_favoured(rng, int(rng.integers(1, 5)))
        result = cutset(config)
        weakest = min(range(config.num_relays), key=lambda r: snr(config).snr_sr[r])
        assert result.rho_star < 1e-6
        assert not result.binding.mac
        assert weakest in result.binding.relays


def test_useless_crowd(rng):
    for _ in range(50):
        config = _relay_favoured(rng, int(rng.integers(2, 6)))
        weakest = min(range(config.num_relays), key=lambda r: config.gains_sr[r])
        alone = config.only_relays([weakest])
        assert cutset(alone).rate == pytest.approx(cutset(config).rate, abs=1e-6)


def test_full_correlation_regime():
    # snr_sr far above snr_rd: the MAC/broadcast crossing sits just below rho = 1
    config = NetworkConfig(source_power=1.0, relay_powers=[1.0], noise_power=1.0,
                           gain_sd=1.0, gains_sr=[1e8], gains_rd=[1.0])
    result = cutset(config)
    assert result.rho_star > 1 - 1e-6
    assert result.binding.mac
    assert result.rate == pytest.approx(awgn_capacity(4.0), abs=1e-6)
    assert result.rate >= parallel_channels_rate(config) - 1e-9


def test_mac_limited_dominates_parallel_channels(rng):
    for _ in range(100):
        config = random_config(rng, int(rng.integers(1, 5)))
        result = cutset(config)
        if result.mac_limited:
            assert result.rate >= parallel_channels_rate(config) - 1e-9


def test_bisection_matches_dense_grid(rng):
    for _ in range(20):
        config = random_config(rng, int(rng.integers(1, 4)))
        result = cutset(config)
        best = max(cutset_objective(config, i / 4000) for i in range(4001))
        assert result.rate >= best - 1e-9


def test_parallel_channels_rate(unity):
    empty = NetworkConfig(source_power=1.0, relay_powers=[], noise_power=1.0, gain_sd=1.0)
    assert parallel_channels_rate(empty) == 0.5
    assert parallel_channels_rate(unity) == pytest.approx(HALF_LOG3)
    silent = NetworkConfig(source_power=1.0, relay_powers=[0.0], noise_power=1.0,
                           gain_sd=1.0, gains_sr=[1.0], gains_rd=[1.0])
    assert parallel_channels_rate(silent) == 0.5


def test_binding_labels_round_trip():
    for binding in (BindingCut(mac=True), BindingCut(relays=(1,)),
                    BindingCut(relays=(0, 1), mac=True)):
        assert BindingCut.from_label(binding.label()) == binding


def test_cutset_result_document(unity):
    result = cutset(unity)
    assert CutsetResult.from_dict(result.to_dict()) == result
