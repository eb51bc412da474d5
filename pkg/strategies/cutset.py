"""AWGN cutset upper bound for one source, parallel relays and one destination"""
import logging
import math
from typing import List

import numpy as np
from scipy.optimize import bisect

from errors import DomainError
from models import BindingCut, CutsetResult, NetworkConfig, relay_label
from utils.channel_model import snr
from utils.gauss_info import cond_cov_broadcast, var_yd

logger = logging.getLogger(__name__)

RHO_TOLERANCE = 1e-12
TIE_TOLERANCE = 1e-9
FALLBACK_GRID_POINTS = 1001


def awgn_capacity(snr_value: float) -> float:
    """C(x) = 0.5 * log2(1 + x) bits per real channel use"""
    if snr_value < 0:
        raise DomainError(f"SNR must be >= 0, got {snr_value}")
    return 0.5 * math.log2(1.0 + snr_value)


def _check_rho(rho: float):
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")


def broadcast_term(config: NetworkConfig, relay_index: int, rho: float) -> float:
    """C((g_sd + g_sr) P_s (1 - rho^2) / N): source to (destination, relay r) given X_r"""
    _check_rho(rho)
    excess = cond_cov_broadcast(config, relay_index, rho) - config.noise_power
    return awgn_capacity(max(excess, 0.0) / config.noise_power)


def broadcast_terms(config: NetworkConfig, rho: float) -> List[float]:
    return [broadcast_term(config, r, rho) for r in range(config.num_relays)]


def mac_term(config: NetworkConfig, rho: float) -> float:
    """C((Var(Y_d) - N) / N): source and all relays jointly into the destination"""
    _check_rho(rho)
    excess = var_yd(config, rho) - config.noise_power
    return awgn_capacity(max(excess, 0.0) / config.noise_power)


def cutset_objective(config: NetworkConfig, rho: float) -> float:
    terms = broadcast_terms(config, rho)
    mac = mac_term(config, rho)
    return min(terms + [mac])


def _result_at(config: NetworkConfig, rho: float, crossing: bool = False) -> CutsetResult:
    terms = broadcast_terms(config, rho)
    mac = mac_term(config, rho)
    rate = min(terms + [mac])

    weakest = min(terms) if terms else math.inf
    relays = tuple(r for r, v in enumerate(terms) if v <= weakest + TIE_TOLERANCE)
    if crossing:
        # Both sides are equal at a crossing by construction
        binding = BindingCut(relays=relays, mac=True)
    else:
        relays = relays if weakest <= rate + TIE_TOLERANCE else ()
        binding = BindingCut(relays=relays, mac=mac <= rate + TIE_TOLERANCE)

    values = {relay_label(r): v for r, v in enumerate(terms)}
    values['mac'] = mac
    return CutsetResult(rate=rate, rho_star=rho, binding=binding, term_values=values)


def cutset(config: NetworkConfig) -> CutsetResult:
    """
    sup over rho of min{ min_r broadcast_r(rho), mac(rho) }.

    Broadcast terms are even and shrink with |rho| while the MAC term grows
    with rho, so the search runs on [0, 1] and the optimum sits at the
    crossing of the two sides or at an endpoint.
    """
    if config.num_relays == 0:
        return _result_at(config, 0.0)

    def gap(rho: float) -> float:
        return mac_term(config, rho) - min(broadcast_terms(config, rho))

    low, high = gap(0.0), gap(1.0)
    if low >= 0.0:
        result = _result_at(config, 0.0)
    elif high <= 0.0:
        result = _result_at(config, 1.0)
    else:
        root = bisect(gap, 0.0, 1.0, xtol=RHO_TOLERANCE, maxiter=200)
        result = _result_at(config, float(root), crossing=True)

    grid = np.linspace(0.0, 1.0, FALLBACK_GRID_POINTS)
    values = [cutset_objective(config, float(rho)) for rho in grid]
    best = int(np.argmax(values))
    if values[best] > result.rate + RHO_TOLERANCE:
        logger.warning("bisection missed the optimum (%.12g < %.12g at rho=%.4f); using grid",
                       result.rate, values[best], grid[best])
        result = _result_at(config, float(grid[best]))

    logger.debug("cutset %.6f bits at rho*=%.9f, binding %s",
                 result.rate, result.rho_star, result.binding.label())
    return result


def parallel_channels_rate(config: NetworkConfig) -> float:
    """C(snr_sd + sum_r snr_rd): independent pipes into the destination"""
    link = snr(config)
    return awgn_capacity(link.snr_sd + math.fsum(link.snr_rd))
