"""Amplify-and-forward rates, amplification limits and the AF-vs-MRC comparison"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from errors import ConfigurationError, ConstraintError, DomainError
from models import AfGains, NetworkConfig
from strategies.combining import mrc_rate
from strategies.cutset import awgn_capacity
from utils.channel_model import snr

logger = logging.getLogger(__name__)

# Slack on |beta_r|^2 against the power limit
GAIN_SLACK = 1e-12
USELESS_RATIO_THRESHOLD = 100.0


def _check_index(config: NetworkConfig, relay_index: int):
    if not 0 <= relay_index < config.num_relays:
        raise DomainError(f"relay index {relay_index} outside 0..{config.num_relays - 1}")


def af_gain_limit(config: NetworkConfig, relay_index: int) -> float:
    """Largest |beta_r| meeting the relay power constraint: sqrt(P_r / (N + g_sr P_s))"""
    _check_index(config, relay_index)
    received = config.noise_power + config.gains_sr[relay_index] * config.source_power
    return math.sqrt(config.relay_powers[relay_index] / received)


def max_gains(config: NetworkConfig) -> AfGains:
    return AfGains(tuple(af_gain_limit(config, r) for r in range(config.num_relays)))


def check_gains(config: NetworkConfig, gains: AfGains):
    if len(gains.beta) != config.num_relays:
        raise ConfigurationError(
            f"has {len(gains.beta)} entries for {config.num_relays} relays", field='beta')
    for r, beta in enumerate(gains.beta):
        limit = af_gain_limit(config, r)
        if beta * beta > limit * limit + GAIN_SLACK:
            raise ConstraintError(r, beta, limit)


def af_rate(config: NetworkConfig, gains: Optional[AfGains] = None) -> float:
    """
    Amplify-and-forward rate with the relays' delayed copies summed coherently:

        C( (sqrt(g_sd) + sum_r beta_r sqrt(g_sr g_rd))^2 P_s / ((1 + sum_r beta_r^2 g_rd) N) )

    Defaults to the largest feasible amplification of every relay.
    """
    gains = gains if gains is not None else max_gains(config)
    check_gains(config, gains)

    relay_amplitude = math.fsum(
        b * math.sqrt(g_sr * g_rd)
        for b, g_sr, g_rd in zip(gains.beta, config.gains_sr, config.gains_rd)
    )
    if relay_amplitude == 0.0:
        signal = config.gain_sd * config.source_power
    else:
        signal = (math.sqrt(config.gain_sd) + relay_amplitude) ** 2 * config.source_power
    noise_gain = 1.0 + math.fsum(b * b * g for b, g in zip(gains.beta, config.gains_rd))
    return awgn_capacity(signal / (noise_gain * config.noise_power))


def af_rate_profile(config: NetworkConfig,
                    fractions: Sequence[float]) -> List[Tuple[float, float]]:
    """AF rate as every relay's amplification is scaled to a fraction of its limit"""
    limit = max_gains(config)
    profile = []
    for fraction in fractions:
        if not 0.0 <= fraction <= 1.0:
            raise DomainError(f"gain fraction must lie in [0, 1], got {fraction}")
        profile.append((float(fraction), af_rate(config, limit.scaled(fraction))))
    return profile


def useless_relay_predicate(config: NetworkConfig, relay_index: int,
                            threshold: float = USELESS_RATIO_THRESHOLD) -> bool:
    """True when (N + g_sr P_s) / P_r exceeds the threshold: the relay can barely amplify"""
    _check_index(config, relay_index)
    received = config.noise_power + config.gains_sr[relay_index] * config.source_power
    power = config.relay_powers[relay_index]
    if power <= 0:
        return True
    return received / power > threshold


def condition_gains(config: NetworkConfig) -> AfGains:
    """Operating point of the comparison: beta_r = min(limit_r, snr_sr)"""
    link = snr(config)
    return AfGains(tuple(min(af_gain_limit(config, r), link.snr_sr[r])
                         for r in range(config.num_relays)))


@dataclass
class AfMrcReport:
    """AF at the comparison operating point against maximal ratio combining"""
    beta: Tuple[float, ...]
    condition_holds: Tuple[bool, ...]
    af_rate: float
    mrc_rate: float
    difference: float = field(init=False)

    def __post_init__(self):
        self.difference = self.af_rate - self.mrc_rate

    @property
    def af_better(self) -> bool:
        return self.difference > 0

    def to_dict(self) -> dict:
        return {
            'beta': list(self.beta),
            'condition_holds': list(self.condition_holds),
            'af': self.af_rate,
            'mrc': self.mrc_rate,
            'difference': self.difference,
            'af_better': self.af_better,
        }


def af_mrc_comparison(config: NetworkConfig) -> AfMrcReport:
    """
    Report whether AF outperforms MRC when |beta_r| <= snr_sr.

    The condition mixes an amplitude with an SNR; it is evaluated literally and
    reported. Configurations where it holds for every relay yet AF loses are
    logged as counterexamples.
    """
    link = snr(config)
    limits = max_gains(config).beta
    holds = tuple(limit <= s for limit, s in zip(limits, link.snr_sr))
    gains = condition_gains(config)
    report = AfMrcReport(beta=gains.beta, condition_holds=holds,
                         af_rate=af_rate(config, gains), mrc_rate=mrc_rate(config))
    if holds and all(holds) and not report.af_better:
        logger.warning("AF (%.6f) does not beat MRC (%.6f) although |beta_r| <= snr_sr "
                       "holds for every relay", report.af_rate, report.mrc_rate)
    return report
