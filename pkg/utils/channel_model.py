"""Path-loss gains, geometry-to-network conversion and per-link SNRs"""
import logging
import math
from typing import Sequence, Union

from errors import ConfigurationError
from models import Geometry, NetworkConfig, Point, SnrTriple

logger = logging.getLogger(__name__)


def path_gain(distance: float, geometry: Geometry) -> float:
    """
    Power gain of a link of the given length under the geometry's path-loss law.

    g = (max(d, d_min) / d0) ** (-alpha); distances below d_min are clamped so a
    node sitting on top of another never produces an infinite gain.
    """
    effective = max(abs(distance), geometry.min_distance)
    return (effective / geometry.reference_distance) ** (-geometry.path_loss_exponent)


def _distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def config_from_geometry(geometry: Geometry, source_power: float,
                         relay_powers: Union[float, Sequence[float]],
                         noise_power: float) -> NetworkConfig:
    """Build the NetworkConfig whose gains follow from the node positions"""
    count = len(geometry.relay_positions)
    if isinstance(relay_powers, (int, float)):
        relay_powers = [float(relay_powers)] * count
    relay_powers = list(relay_powers)
    if len(relay_powers) != count:
        raise ConfigurationError(
            f"has {len(relay_powers)} entries but the geometry places {count} relays",
            field='relay_powers',
        )

    gains_sr = [path_gain(_distance(geometry.source_pos, p), geometry)
                for p in geometry.relay_positions]
    gains_rd = [path_gain(_distance(p, geometry.dest_pos), geometry)
                for p in geometry.relay_positions]
    gain_sd = path_gain(_distance(geometry.source_pos, geometry.dest_pos), geometry)

    return NetworkConfig(
        source_power=source_power,
        relay_powers=relay_powers,
        noise_power=noise_power,
        gain_sd=gain_sd,
        gains_sr=gains_sr,
        gains_rd=gains_rd,
    )


def snr(config: NetworkConfig) -> SnrTriple:
    """Linear SNR of every link: g_sd*P_s/N, g_sr*P_s/N and g_rd*P_r/N"""
    n = config.noise_power
    return SnrTriple(
        snr_sd=config.gain_sd * config.source_power / n,
        snr_sr=tuple(g * config.source_power / n for g in config.gains_sr),
        snr_rd=tuple(g * p / n for g, p in zip(config.gains_rd, config.relay_powers)),
    )
