import math

import numpy as np
import pytest

from errors import CapabilityError, DomainError
from models import CorrelationState, Cut, NetworkConfig
from strategies.cutset import awgn_capacity, broadcast_term, cutset_objective, mac_term
from utils.gauss_info import (JointGaussian, _cut_sets, aref_cut_value, aref_min_cut,
                              build_joint, cond_cov_broadcast, conditional_covariance,
                              cut_values, mutual_information, var_yd)
from utils.verification import random_config


def pair(correlation):
    return JointGaussian(np.array([[1.0, correlation], [correlation, 1.0]]), 0)


def test_mutual_information_closed_forms():
    assert mutual_information(pair(0.0), [0], [1]) == 0.0
    assert mutual_information(pair(0.5), [0], [1]) == pytest.approx(0.5 * math.log2(1 / 0.75))
    # Y = X + Z with unit powers
    awgn = JointGaussian(np.array([[1.0, 1.0], [1.0, 2.0]]), 0)
    assert mutual_information(awgn, [0], [1]) == pytest.approx(0.5)


def test_mutual_information_rejects_overlap():
    with pytest.raises(DomainError):
        mutual_information(pair(0.3), [0], [0])


def test_build_joint_no_relays():
    config = NetworkConfig(source_power=2.0, relay_powers=[], noise_power=0.5, gain_sd=4.0)
    joint = build_joint(config, CorrelationState((), ()))
    assert joint.covariance.shape == (2, 2)
    assert joint.covariance[1, 1] == pytest.approx(4.0 * 2.0 + 0.5)
    assert joint.covariance[0, 1] == pytest.approx(2.0 * 2.0)


def test_build_joint_diagonals(unity, unity_two):
    joint = build_joint(unity, CorrelationState.uniform(1, 0.0, 1.0))
    assert joint.covariance[joint.yd, joint.yd] == pytest.approx(3.0)
    assert joint.covariance[joint.yr(0), joint.yr(0)] == pytest.approx(2.0)

    joint = build_joint(unity_two, CorrelationState.full(2, 1.0))
    assert joint.covariance[joint.yd, joint.yd] == pytest.approx(10.0)
    assert joint.covariance[joint.xr(1), joint.xr(1)] == pytest.approx(1.0)


def test_build_joint_matches_var_yd(rng):
    for _ in range(20):
        config = random_config(rng, 3)
        rho = float(rng.uniform(-1, 1))
        joint = build_joint(config, CorrelationState.full(3, rho))
        assert joint.covariance[joint.yd, joint.yd] == pytest.approx(var_yd(config, rho),
                                                                     rel=1e-12)


def test_var_yd_examples(unity, unity_two):
    empty = NetworkConfig(source_power=2.0, relay_powers=[], noise_power=0.5, gain_sd=4.0)
    assert var_yd(empty, 0.3) == 8.5
    assert var_yd(unity, 0.0) == 3.0
    assert var_yd(unity_two, 1.0) == 10.0


def test_cond_cov_broadcast_examples(unity):
    assert cond_cov_broadcast(unity, 0, 1.0) == unity.noise_power
    assert cond_cov_broadcast(unity, 0, 0.0) == 3.0
    config = NetworkConfig(source_power=0.1, relay_powers=[0.1], noise_power=1e-6,
                           gain_sd=1.0, gains_sr=[3.846], gains_rd=[1.0])
    assert cond_cov_broadcast(config, 0, 0.0) == pytest.approx(0.4846 + 1e-6)


def test_correlation_state_rejects_non_psd():
    with pytest.raises(DomainError):
        CorrelationState.uniform(2, 0.9, 0.0)
    with pytest.raises(DomainError):
        CorrelationState(rho_sr=(0.1, 0.2), rho_rr=((1.0, 0.3), (0.2, 1.0)))


def test_regularized_state():
    corr = CorrelationState.full(3, 0.4).regularized(1e-9)
    assert corr.rho_rr[0][1] == 1.0 - 1e-9
    assert corr.rho_rr[2][2] == 1.0


def test_single_relay_cuts(unity):
    corr = CorrelationState.full(1, 0.0)
    broadcast = aref_cut_value(unity, corr, Cut(frozenset()))
    mac = aref_cut_value(unity, corr, Cut(frozenset({0})))
    assert broadcast == pytest.approx(0.5 * math.log2(3.0), abs=1e-9)
    assert mac == pytest.approx(0.5 * math.log2(3.0), abs=1e-9)

    value, cut = aref_min_cut(unity, corr)
    assert value == pytest.approx(0.5 * math.log2(3.0), abs=1e-9)
    assert cut == Cut(frozenset())


def test_min_cut_without_relays():
    config = NetworkConfig(source_power=1.0, relay_powers=[], noise_power=1.0, gain_sd=3.0)
    value, cut = aref_min_cut(config, CorrelationState((), ()))
    assert value == pytest.approx(1.0)
    assert cut.subset == frozenset()


def test_dead_source_relay_link_binds():
    config = NetworkConfig(source_power=1.0, relay_powers=[1.0, 1.0], noise_power=1.0,
                           gain_sd=1.0, gains_sr=[0.0, 1.0], gains_rd=[1.0, 1.0])
    value, cut = aref_min_cut(config, CorrelationState.full(2, 0.0))
    assert value == pytest.approx(awgn_capacity(1.0), abs=1e-9)
    assert cut.subset == frozenset({1})


def test_oracle_matches_closed_forms(rng):
    for _ in range(10):
        config = random_config(rng, 2)
        rho = float(rng.uniform(-1, 1))
        corr = CorrelationState.full(2, rho)
        mac = aref_cut_value(config, corr, Cut(frozenset({0, 1})))
        assert mac == pytest.approx(mac_term(config, rho), abs=1e-6)
        # With relay 1 grouped with the source, only relay 2's broadcast remains
        single = aref_cut_value(config, corr, Cut(frozenset({0})))
        assert single == pytest.approx(broadcast_term(config, 1, rho), abs=1e-6)


def test_oracle_reduction_small_networks(rng):
    for count in (1, 2, 3):
        config = random_config(rng, count)
        for rho in (-0.7, 0.0, 0.35, 0.9, 1.0):
            value, _ = aref_min_cut(config, CorrelationState.full(count, rho))
            assert value == pytest.approx(cutset_objective(config, rho), abs=1e-6)


def test_mutual_information_symmetric_and_data_processing(rng):
    for _ in range(10):
        config = random_config(rng, 2)
        joint = build_joint(config, CorrelationState.uniform(2, 0.3, 0.5))
        ab = mutual_information(joint, [joint.xs], [joint.yd])
        ba = mutual_information(joint, [joint.yd], [joint.xs])
        assert ab >= 0
        assert ab == pytest.approx(ba, abs=1e-9)
        for r in range(2):
            more = mutual_information(joint, [joint.xs], [joint.yd, joint.yr(r)])
            assert more >= ab - 1e-9


def test_stacked_cut_values_match_determinants(rng):
    config = random_config(rng, 4)
    corr = CorrelationState.uniform(4, 0.3, 0.5)
    joint = build_joint(config, corr)
    masks = [5, 0, 15, 3, 8, 12]
    expected = []
    for mask in masks:
        a, b, c = _cut_sets(joint, Cut.from_mask(mask, 4))
        given_c = conditional_covariance(joint.covariance, b, c)
        given_ac = conditional_covariance(joint.covariance, b, c + a)
        expected.append(0.5 * math.log2(np.linalg.det(given_c) / np.linalg.det(given_ac)))
    assert cut_values(config, corr, masks) == pytest.approx(expected, abs=1e-7)


def test_stacked_cut_values_with_full_correlation(unity_two):
    corr = CorrelationState.full(2, 0.4)
    single = [aref_cut_value(unity_two, corr, Cut.from_mask(m, 2)) for m in range(4)]
    assert cut_values(unity_two, corr, [3, 2, 1, 0]) == pytest.approx(single[::-1], abs=1e-12)


def test_enumeration_guard():
    config = NetworkConfig.unity(21)
    with pytest.raises(CapabilityError):
        aref_min_cut(config, CorrelationState.full(21, 0.0))
