"""
Block simulator of the relay protocol at the second-moment level.

Every (block, node) pair draws from its own numpy stream,
SeedSequence(seed, spawn_key=(block, node)), so a report depends only on the
seed and the run parameters. Node ids: 0 source symbols, 1 shared relay
innovation, 2 destination noise, 3 + r noise of relay r.

Point estimates come from moments pooled over all blocks with compensated
sums; standard errors are batch means over blocks, widened by the lag-1
autocovariance where the AF delay links neighbouring blocks.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from errors import ConfigurationError, DomainError
from models import AfGains, CorrelationState, NetworkConfig, relay_label
from strategies.amplify_forward import check_gains
from utils.gauss_info import cond_cov_broadcast, conditional_covariance, var_yd

logger = logging.getLogger(__name__)

SOURCE_STREAM = 0
SHARED_STREAM = 1
DEST_NOISE_STREAM = 2
RELAY_NOISE_BASE = 3

PASS_SIGMAS = 4.0
MIN_BATCHES = 10
SE_FLOOR = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class SimRun:
    """One simulation request: correlated-input mode (corr) or amplify-and-forward mode (gains)"""
    seed: int
    num_blocks: int
    samples_per_block: int
    config: NetworkConfig
    corr: Optional[CorrelationState] = None
    gains: Optional[AfGains] = None

    def __post_init__(self):
        if int(self.seed) < 0:
            raise ConfigurationError("must be >= 0", field='seed')
        if self.num_blocks < 1:
            raise ConfigurationError("must be >= 1", field='blocks')
        if self.samples_per_block < 1:
            raise ConfigurationError("must be >= 1", field='samples')
        if (self.corr is None) == (self.gains is None):
            raise ConfigurationError("exactly one of a correlation state or AF gains is required",
                                     field='mode')

    @property
    def mode(self) -> str:
        return 'af' if self.gains is not None else 'correlated'

    @property
    def total_samples(self) -> int:
        return self.num_blocks * self.samples_per_block


@dataclass
class MomentCheck:
    name: str
    predicted: float
    empirical: float
    std_error: float

    @property
    def deviation(self) -> float:
        return (self.empirical - self.predicted) / self.std_error

    @property
    def passed(self) -> bool:
        return abs(self.empirical - self.predicted) <= PASS_SIGMAS * self.std_error

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'predicted': self.predicted,
            'empirical': self.empirical,
            'std_error': self.std_error,
            'sigmas': self.deviation,
            'passed': self.passed,
        }


@dataclass
class MomentReport:
    """Empirical vs closed-form second moments of one simulation run"""
    mode: str
    seed: int
    num_blocks: int
    samples_per_block: int
    checks: List[MomentCheck] = field(default_factory=list)
    notes: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> MomentCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def empirical_var_yd(self) -> float:
        return self.check('var_yd').empirical

    @property
    def empirical_cov_pairs(self) -> Dict[str, float]:
        return {c.name: c.empirical for c in self.checks if c.name.startswith('cov_')}

    def to_dict(self) -> dict:
        return {
            'kind': 'moment_report',
            'mode': self.mode,
            'seed': self.seed,
            'num_blocks': self.num_blocks,
            'samples_per_block': self.samples_per_block,
            'passed': self.passed,
            'checks': [c.to_dict() for c in self.checks],
            'notes': dict(self.notes),
        }


def block_streams(seed: int, block: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(block, node)))
            for node in range(count)]


def _batches(per_block: List[np.ndarray], samples: List[np.ndarray]) -> List[np.ndarray]:
    """Per-batch statistics; a single block is split so a spread can still be measured"""
    if len(per_block) >= 2 or not samples:
        return per_block
    return samples


def _pool(values: List[np.ndarray]) -> np.ndarray:
    stacked = np.stack(values)
    flat = stacked.reshape(len(values), -1)
    pooled = np.array([math.fsum(flat[:, j]) for j in range(flat.shape[1])]) / len(values)
    return pooled.reshape(stacked.shape[1:])


def _standard_error(values: List[float], lag_one: bool = False) -> float:
    """
    Batch-means standard error. With lag_one the batches may be correlated with
    their neighbours, and a positive lag-1 autocovariance widens the error.
    """
    count = len(values)
    if count < 2:
        return SE_FLOOR
    centred = np.asarray(values, dtype=float) - float(np.mean(values))
    variance = float(centred @ centred) / (count - 1)
    if lag_one and count >= 3:
        variance += 2.0 * max(float(centred[:-1] @ centred[1:]) / (count - 1), 0.0)
    return max(math.sqrt(variance / count), SE_FLOOR)


def _moment_check(name: str, predicted: float, statistic: Callable[[np.ndarray], float],
                  pooled: np.ndarray, batches: List[np.ndarray],
                  lag_one: bool = False) -> MomentCheck:
    return MomentCheck(
        name=name,
        predicted=float(predicted),
        empirical=float(statistic(pooled)),
        std_error=_standard_error([statistic(b) for b in batches], lag_one),
    )


def _common_rho(config: NetworkConfig, corr: CorrelationState) -> float:
    if corr.num_relays != config.num_relays:
        raise DomainError(
            f"correlation state describes {corr.num_relays} relays, network has {config.num_relays}")
    if config.num_relays == 0:
        return 0.0
    rho = corr.rho_sr[0]
    if any(v != rho for v in corr.rho_sr) or any(v != 1.0 for row in corr.rho_rr for v in row):
        raise DomainError("the simulator realises fully correlated relays sharing one rho_sr")
    return rho


def _second_moments(vectors: np.ndarray) -> np.ndarray:
    return vectors @ vectors.T / vectors.shape[1]


def _split_moments(vectors: np.ndarray) -> List[np.ndarray]:
    parts = np.array_split(vectors, min(MIN_BATCHES, vectors.shape[1]), axis=1)
    return [_second_moments(p) for p in parts if p.shape[1] > 0] if len(parts) > 1 else []


def simulate_correlated(run: SimRun) -> MomentReport:
    """
    Fully correlated relay inputs: X_s = sqrt(P_s) S and
    X_r = sqrt(P_r) (rho S + sqrt(1 - rho^2) W) with one innovation W shared by all relays.
    """
    if run.corr is None:
        raise ConfigurationError("correlated mode needs a correlation state", field='mode')
    config = run.config
    count = config.num_relays
    rho = _common_rho(config, run.corr)
    n = run.samples_per_block
    noise_std = math.sqrt(config.noise_power)
    gains_sr = np.sqrt(np.array(config.gains_sr))
    gains_rd = np.sqrt(np.array(config.gains_rd))
    powers = np.sqrt(np.array(config.relay_powers))

    per_block = []
    split = []
    for block in range(run.num_blocks):
        streams = block_streams(run.seed, block, RELAY_NOISE_BASE + count)
        symbols = streams[SOURCE_STREAM].standard_normal(n)
        shared = streams[SHARED_STREAM].standard_normal(n)
        x_s = math.sqrt(config.source_power) * symbols
        x_r = powers[:, None] * (rho * symbols + math.sqrt(max(1.0 - rho * rho, 0.0)) * shared)
        relay_noise = np.array([streams[RELAY_NOISE_BASE + r].standard_normal(n)
                                for r in range(count)]).reshape(count, n)
        y_r = gains_sr[:, None] * x_s + noise_std * relay_noise
        y_d = (math.sqrt(config.gain_sd) * x_s + (gains_rd[:, None] * x_r).sum(axis=0)
               + noise_std * streams[DEST_NOISE_STREAM].standard_normal(n))

        # Same ordering as the joint model: (X_s, X_1..X_R, Y_1..Y_R, Y_d)
        vectors = np.vstack([x_s[None, :], x_r, y_r, y_d[None, :]])
        per_block.append(_second_moments(vectors))
        if run.num_blocks == 1:
            split = _split_moments(vectors)

    pooled = _pool(per_block)
    batches = _batches(per_block, split)
    xs, yd = 0, 2 * count + 1

    def xr(r):
        return 1 + r

    def yr(r):
        return 1 + count + r

    n0 = config.noise_power
    checks = [_moment_check('var_yd', var_yd(config, rho), lambda m: m[yd, yd], pooled, batches)]
    for r in range(count):
        label = relay_label(r)
        checks.append(_moment_check(f'relay_power_{label}', config.relay_powers[r],
                                    lambda m, r=r: m[xr(r), xr(r)], pooled, batches))
        if config.relay_powers[r] <= 0:
            logger.debug("relay %s is silent; conditioning on it removes nothing", label)
            continue
        checks.append(_moment_check(
            f'cov_yd_{label}_given_x{label}', cond_cov_broadcast(config, r, rho),
            lambda m, r=r: float(np.linalg.det(
                conditional_covariance(m, [yd, yr(r)], [xr(r)]))) / n0,
            pooled, batches))
        checks.append(_moment_check(
            f'cov_yd_{label}_given_xs_x{label}', n0,
            lambda m, r=r: float(np.linalg.det(
                conditional_covariance(m, [yd, yr(r)], [xs, xr(r)]))) / n0,
            pooled, batches))
    checks.append(_moment_check(
        'var_yd_given_all_inputs', n0,
        lambda m: float(conditional_covariance(m, [yd], list(range(count + 1)))[0, 0]),
        pooled, batches))

    report = MomentReport(mode='correlated', seed=run.seed, num_blocks=run.num_blocks,
                          samples_per_block=n, checks=checks, notes={'rho': rho})
    _log_report(report)
    return report


def simulate_af(run: SimRun) -> MomentReport:
    """
    Amplify-and-forward pipeline: relay r sends beta_r times what it heard one block
    earlier. Block keys start at 1; key 0 only fills the relays' buffers.

    Neighbouring blocks share the delayed symbols, so their means are correlated
    and standard errors include the lag-1 autocovariance of the block means.
    """
    if run.gains is None:
        raise ConfigurationError("AF mode needs amplification gains", field='mode')
    config = run.config
    check_gains(config, run.gains)
    count = config.num_relays
    n = run.samples_per_block
    noise_std = math.sqrt(config.noise_power)
    beta = np.array(run.gains.beta).reshape(count)
    root_sr = np.sqrt(np.array(config.gains_sr))
    root_rd = np.sqrt(np.array(config.gains_rd))
    root_sd = math.sqrt(config.gain_sd)

    per_block = []
    split = []
    previous = None
    for key in range(run.num_blocks + 1):
        streams = block_streams(run.seed, key, RELAY_NOISE_BASE + count)
        x_s = math.sqrt(config.source_power) * streams[SOURCE_STREAM].standard_normal(n)
        relay_noise = noise_std * np.array([streams[RELAY_NOISE_BASE + r].standard_normal(n)
                                            for r in range(count)]).reshape(count, n)
        y_r = root_sr[:, None] * x_s + relay_noise

        if previous is not None:
            prev_x_s, prev_y_r, prev_noise = previous
            x_r = beta[:, None] * prev_y_r
            z_d = noise_std * streams[DEST_NOISE_STREAM].standard_normal(n)
            direct = root_sd * x_s
            branches = (beta * root_sr * root_rd)[:, None] * prev_x_s
            noise = ((beta * root_rd)[:, None] * prev_noise).sum(axis=0) + z_d
            y_d = direct + (root_rd[:, None] * x_r).sum(axis=0) + z_d

            # Rows: relay powers, branch powers, then direct, signal, noise, Y_d
            rows = np.vstack([x_r, branches, direct[None, :],
                              (direct + branches.sum(axis=0))[None, :],
                              noise[None, :], y_d[None, :]])
            squares = rows * rows
            per_block.append(squares.mean(axis=1))
            if run.num_blocks == 1:
                parts = np.array_split(squares, min(MIN_BATCHES, n), axis=1)
                split = [p.mean(axis=1) for p in parts if p.shape[1] > 0] if len(parts) > 1 else []
        previous = (x_s, y_r, relay_noise)

    pooled = _pool(per_block)
    batches = _batches(per_block, split)
    # Block k carries the source symbols and relay noise of block k-1
    overlapping = run.num_blocks >= 2

    p_s, n0 = config.source_power, config.noise_power
    amplitude = math.fsum(beta * root_sr * root_rd)
    noise_floor = (1.0 + math.fsum(beta * beta * np.array(config.gains_rd))) * n0
    signal = config.gain_sd * p_s + amplitude * amplitude * p_s
    direct_row = 2 * count

    checks = []
    for r in range(count):
        label = relay_label(r)
        checks.append(_moment_check(
            f'relay_power_{label}', beta[r] ** 2 * (config.gains_sr[r] * p_s + n0),
            lambda v, r=r: v[r], pooled, batches, overlapping))
    checks.append(_moment_check('branch_power_direct', config.gain_sd * p_s,
                                lambda v: v[direct_row], pooled, batches, overlapping))
    for r in range(count):
        checks.append(_moment_check(
            f'branch_power_{relay_label(r)}',
            beta[r] ** 2 * config.gains_sr[r] * config.gains_rd[r] * p_s,
            lambda v, r=r: v[count + r], pooled, batches, overlapping))
    checks.append(_moment_check('signal_power', signal, lambda v: v[direct_row + 1],
                                pooled, batches, overlapping))
    checks.append(_moment_check('noise_floor', noise_floor, lambda v: v[direct_row + 2],
                                pooled, batches, overlapping))
    checks.append(_moment_check('var_yd', signal + noise_floor, lambda v: v[direct_row + 3],
                                pooled, batches, overlapping))

    # The rate formula adds the delayed relay copies to the direct path coherently
    coherent = (root_sd + amplitude) ** 2 * p_s
    notes = {
        'coherent_signal_power': coherent,
        'independent_signal_power': signal,
        'coherent_excess': coherent - signal,
    }
    report = MomentReport(mode='af', seed=run.seed, num_blocks=run.num_blocks,
                          samples_per_block=n, checks=checks, notes=notes)
    _log_report(report)
    return report


def simulate(run: SimRun) -> MomentReport:
    return simulate_af(run) if run.mode == 'af' else simulate_correlated(run)


def _log_report(report: MomentReport):
    for item in report.checks:
        if not item.passed:
            logger.warning("%s: empirical %.6g vs predicted %.6g (%.1f sigma)",
                           item.name, item.empirical, item.predicted, item.deviation)
    logger.info("%s simulation over %d x %d samples: %d/%d checks within %.0f sigma",
                report.mode, report.num_blocks, report.samples_per_block,
                sum(c.passed for c in report.checks), len(report.checks), PASS_SIGMAS)
