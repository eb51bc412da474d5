"""Reference rates that need no relay processing model: direct link and MRC"""
import math

from models import NetworkConfig
from strategies.cutset import awgn_capacity
from utils.channel_model import snr


def direct_rate(config: NetworkConfig) -> float:
    """Relay-off rate C(snr_sd)"""
    return awgn_capacity(snr(config).snr_sd)


def harmonic_term(snr_sr: float, snr_rd: float) -> float:
    """Two-hop SNR snr_sr*snr_rd/(snr_sr + snr_rd), zero for a dead relay"""
    total = snr_sr + snr_rd
    if total <= 0:
        return 0.0
    return snr_sr * snr_rd / total


def mrc_rate(config: NetworkConfig) -> float:
    """Maximal ratio combining: C(snr_sd + sum_r harmonic(snr_sr, snr_rd))"""
    link = snr(config)
    hops = math.fsum(harmonic_term(sr, rd) for sr, rd in zip(link.snr_sr, link.snr_rd))
    return awgn_capacity(link.snr_sd + hops)
