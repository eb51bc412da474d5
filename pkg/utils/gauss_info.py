"""
Gaussian information kernel.

Variables of the joint model are ordered (X_s, X_1..X_R, Y_1..Y_R, Y_d):
index 0 is the source input, 1..R the relay inputs, R+1..2R the relay
observations and 2R+1 the destination observation.
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.linalg import pinvh

from errors import CapabilityError, DomainError, NumericalDegeneracyError
from models import Cut, CorrelationState, NetworkConfig

logger = logging.getLogger(__name__)

# Eigenvalues at or below this fraction of a block's trace are treated as zero
EIGEN_THRESHOLD = 1e-12
# Values within this many bits are considered equal when picking the minimum cut
CUT_TIE_TOLERANCE = 1e-9
MAX_ENUMERATED_RELAYS = 20
# Cuts stacked into one eigendecomposition call
CUT_BATCH_SIZE = 4096


@dataclass(frozen=True)
class JointGaussian:
    """Covariance (W) of all transmit and receive variables of the network"""
    covariance: np.ndarray
    num_relays: int

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        size = 2 * self.num_relays + 2
        if cov.shape != (size, size):
            raise DomainError(f"covariance must be {size}x{size}, got {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(np.trace(cov), 1.0)):
            raise DomainError("covariance must be symmetric")
        smallest = float(np.linalg.eigvalsh(cov).min())
        if smallest < -1e-9 * max(np.trace(cov), 0.0):
            raise DomainError(f"covariance is not positive semidefinite ({smallest:.3e})")
        object.__setattr__(self, 'covariance', cov)

    @property
    def xs(self) -> int:
        return 0

    def xr(self, relay: int) -> int:
        return 1 + relay

    def yr(self, relay: int) -> int:
        return 1 + self.num_relays + relay

    @property
    def yd(self) -> int:
        return 2 * self.num_relays + 1


def build_joint(config: NetworkConfig, corr: CorrelationState) -> JointGaussian:
    """
    Joint covariance implied by the signal model

        Y_r = sqrt(g_sr) X_s + Z_r
        Y_d = sqrt(g_sd) X_s + sum_r sqrt(g_rd) X_r + Z_d

    with independent noises of variance N and transmit covariance
    rho_ab * sqrt(P_a P_b).
    """
    count = config.num_relays
    if corr.num_relays != count:
        raise DomainError(
            f"correlation state describes {corr.num_relays} relays, network has {count}")

    std = np.sqrt(np.array((config.source_power,) + config.relay_powers))
    transmit = corr.matrix() * np.outer(std, std)

    # Linear map from the R+1 inputs to the R+1 noiseless observations
    channel = np.zeros((count + 1, count + 1))
    channel[:count, 0] = np.sqrt(config.gains_sr)
    channel[count, 0] = math.sqrt(config.gain_sd)
    channel[count, 1:] = np.sqrt(config.gains_rd)

    cross = channel @ transmit
    observed = cross @ channel.T + config.noise_power * np.eye(count + 1)
    covariance = np.block([[transmit, cross.T], [cross, observed]])
    return JointGaussian(covariance=(covariance + covariance.T) / 2.0, num_relays=count)


def var_yd(config: NetworkConfig, rho: float) -> float:
    """Closed-form Var(Y_d) with fully correlated relays and common correlation rho"""
    direct = config.gain_sd * config.source_power
    relay_amplitudes = [math.sqrt(g * p) for g, p in zip(config.gains_rd, config.relay_powers)]
    coherent = math.fsum(relay_amplitudes)
    return (direct
            + 2.0 * rho * math.sqrt(direct) * coherent
            + coherent * coherent
            + config.noise_power)


def cond_cov_broadcast(config: NetworkConfig, relay_index: int, rho: float) -> float:
    """Closed-form cov[Y_d Y_r | X_r] = (g_sd + g_sr) P_s (1 - rho^2) + N"""
    gain_sr = config.gains_sr[relay_index]
    return (config.gain_sd + gain_sr) * config.source_power * (1.0 - rho * rho) + config.noise_power


def _threshold(block: np.ndarray) -> float:
    trace = float(np.trace(block))
    return EIGEN_THRESHOLD * trace if trace > 0 else 0.0


def conditional_covariance(cov: np.ndarray, b: List[int], c: List[int]) -> np.ndarray:
    """Schur complement Sigma_BB - Sigma_BC Sigma_CC^+ Sigma_CB"""
    s_bb = cov[np.ix_(b, b)]
    if not c:
        return s_bb
    s_cc = cov[np.ix_(c, c)]
    s_bc = cov[np.ix_(b, c)]
    inverse = pinvh(s_cc, atol=_threshold(s_cc), rtol=0.0)
    result = s_bb - s_bc @ inverse @ s_bc.T
    return (result + result.T) / 2.0


def _traces(blocks: np.ndarray) -> np.ndarray:
    return np.clip(np.trace(blocks, axis1=1, axis2=2), 0.0, None)


def _gather(cov: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Stack of sub-blocks cov[rows[k]][:, cols[k]], shape (k, |rows|, |cols|)"""
    return cov[rows[:, :, None], cols[:, None, :]]


def _pinv_stack(blocks: np.ndarray) -> np.ndarray:
    """Pseudo-inverses of symmetric blocks, same cutoff as conditional_covariance"""
    eigenvalues, vectors = np.linalg.eigh(blocks)
    keep = np.abs(eigenvalues) > (EIGEN_THRESHOLD * _traces(blocks))[:, None]
    inverse = np.where(keep, 1.0 / np.where(keep, eigenvalues, 1.0), 0.0)
    return (vectors * inverse[:, None, :]) @ np.swapaxes(vectors, 1, 2)


def _conditional_stack(cov: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """conditional_covariance for k index sets of equal sizes at once"""
    s_bb = _gather(cov, b, b)
    if c.shape[1] == 0:
        return s_bb
    s_bc = _gather(cov, b, c)
    result = s_bb - s_bc @ _pinv_stack(_gather(cov, c, c)) @ np.swapaxes(s_bc, 1, 2)
    return (result + np.swapaxes(result, 1, 2)) / 2.0


def _log2_pdet_stack(blocks: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """log2 pseudo-determinants, numerical ranks and smallest eigenvalues of PSD blocks"""
    eigenvalues = np.linalg.eigvalsh(blocks)
    tau = EIGEN_THRESHOLD * _traces(blocks)
    smallest = eigenvalues.min(axis=1)
    indefinite = smallest < -np.maximum(tau, 1e-300)
    if np.any(indefinite):
        raise NumericalDegeneracyError("conditional covariance is indefinite",
                                       float(smallest[indefinite][0]))
    keep = eigenvalues > tau[:, None]
    logs = np.where(keep, np.log2(np.where(keep, eigenvalues, 1.0)), 0.0).sum(axis=1)
    return logs, keep.sum(axis=1), smallest


def _mutual_information_stack(cov: np.ndarray, a: np.ndarray, b: np.ndarray,
                              c: np.ndarray) -> np.ndarray:
    """I(A_k; B_k | C_k) for k rows of index arrays; every row of a, b and c has one size"""
    log_num, rank_num, _ = _log2_pdet_stack(_conditional_stack(cov, b, c))
    log_den, rank_den, smallest_den = _log2_pdet_stack(
        _conditional_stack(cov, b, np.concatenate([c, a], axis=1)))
    collapsed = rank_num != rank_den
    if np.any(collapsed):
        # A determines part of B exactly: the information is unbounded
        k = int(np.argmax(collapsed))
        raise NumericalDegeneracyError(
            f"conditioning collapses {rank_num[k] - rank_den[k]} dimension(s) of B",
            float(smallest_den[k]))

    values = 0.5 * (log_num - log_den)
    if np.any(values < -1e-9):
        logger.debug("mutual information %.3e below zero, clamped", float(values.min()))
    return np.maximum(values, 0.0)


def mutual_information(joint: JointGaussian, a: Iterable[int], b: Iterable[int],
                       c: Iterable[int] = ()) -> float:
    """
    I(A; B | C) in bits for jointly Gaussian variables.

    Uses 0.5 * log2(pdet(Sigma_B|C) / pdet(Sigma_B|A,C)) with pseudo-determinants
    so fully correlated conditioning sets are handled without regularisation.
    """
    a, b, c = sorted(set(a)), sorted(set(b)), sorted(set(c))
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise DomainError("index sets A, B and C must be disjoint")
    if not a or not b:
        return 0.0
    rows = [np.array([s], dtype=int).reshape(1, len(s)) for s in (a, b, c)]
    return float(_mutual_information_stack(joint.covariance, *rows)[0])


def _cut_sets(joint: JointGaussian, cut: Cut) -> Tuple[List[int], List[int], List[int]]:
    count = joint.num_relays
    inside = sorted(cut.subset)
    outside = [r for r in range(count) if r not in cut.subset]
    a = [joint.xs] + [joint.xr(r) for r in inside]
    b = [joint.yd] + [joint.yr(r) for r in outside]
    c = [joint.xr(r) for r in outside]
    return a, b, c


def aref_cut_value(config: NetworkConfig, corr: CorrelationState, cut: Cut,
                   joint: JointGaussian = None) -> float:
    """I(X_s X_T ; Y_d Y_T^c | X_T^c) for the relays T grouped with the source"""
    if any(r < 0 or r >= config.num_relays for r in cut.subset):
        raise DomainError(f"cut {cut.label()} names relays outside 1..{config.num_relays}")
    joint = joint or build_joint(config, corr)
    a, b, c = _cut_sets(joint, cut)
    return mutual_information(joint, a, b, c)


def cut_values(config: NetworkConfig, corr: CorrelationState,
               masks: Sequence[int]) -> List[float]:
    """
    Cut values for a batch of subset bitmasks; safe to run on any partition of masks.

    Cuts with the same number of relays on the source side share block shapes,
    so each such group is evaluated with stacked eigendecompositions.
    """
    joint = build_joint(config, corr)
    cuts = [Cut.from_mask(m, config.num_relays) for m in masks]
    groups = defaultdict(list)
    for position, cut in enumerate(cuts):
        groups[len(cut.subset)].append(position)

    values = np.zeros(len(cuts))
    for members in groups.values():
        for start in range(0, len(members), CUT_BATCH_SIZE):
            chunk = members[start:start + CUT_BATCH_SIZE]
            sets = [_cut_sets(joint, cuts[p]) for p in chunk]
            a, b, c = (np.array([s[k] for s in sets], dtype=int) for k in range(3))
            values[chunk] = _mutual_information_stack(joint.covariance, a, b, c)
    return values.tolist()


def aref_min_cut(config: NetworkConfig, corr: CorrelationState) -> Tuple[float, Cut]:
    """
    Exhaustive minimum over all 2^R cuts.

    Ties (within CUT_TIE_TOLERANCE bits) resolve to the smallest subset bitmask,
    chosen after every value is known so evaluation order never matters.
    """
    count = config.num_relays
    if count > MAX_ENUMERATED_RELAYS:
        raise CapabilityError(
            f"{count} relays means 2^{count} cuts; enumeration is limited to "
            f"{MAX_ENUMERATED_RELAYS} relays")
    masks = list(range(1 << count))
    values = cut_values(config, corr, masks)
    best = min(values)
    chosen = min(m for m, v in zip(masks, values) if v <= best + CUT_TIE_TOLERANCE)
    return values[chosen], Cut.from_mask(chosen, count)
