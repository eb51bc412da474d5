"""
Property suites that check the closed-form bound against the Gaussian oracle,
the simulator against the second-moment formulas, and rate orderings along sweeps.

Each trial seeds its own generator from SeedSequence(seed, spawn_key=(trial,)),
so trials may run in any order or process and still reproduce.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from errors import ConfigurationError, DomainError
from models import AfGains, CorrelationState, NetworkConfig
from strategies.amplify_forward import af_rate, max_gains
from strategies.combining import direct_rate, mrc_rate
from strategies.cutset import cutset, cutset_objective, parallel_channels_rate
from utils.gauss_info import aref_min_cut
from utils.montecarlo import SimRun, simulate
from utils.name_matching import resolve_name
from utils.sweeps import SweepSpec, af_gains_at

logger = logging.getLogger(__name__)

SUITES = ('cut-reduction', 'full-correlation', 'moments', 'upper-bound-ordering')

REDUCTION_TOLERANCE = 1e-6
ORDERING_TOLERANCE = 1e-9
ARGMAX_TOLERANCE = 1e-9
MAX_REDUCTION_RELAYS = 8
RHO_GRID = tuple(np.linspace(-1.0, 1.0, 21))
RHO_RR_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
RHO_SR_VALUES = (0.0, 0.3, 0.6, 0.9)


@dataclass
class TrialResult:
    index: int
    deviation: float
    passed: bool
    detail: str = ''

    def to_dict(self) -> dict:
        return {'trial': self.index, 'deviation': self.deviation,
                'passed': self.passed, 'detail': self.detail}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: List[TrialResult] = field(default_factory=list)
    findings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trials)

    @property
    def failures(self) -> List[TrialResult]:
        return [t for t in self.trials if not t.passed]

    @property
    def worst_deviation(self) -> float:
        return max((t.deviation for t in self.trials), default=0.0)

    def to_dict(self) -> dict:
        return {
            'kind': 'verification_report',
            'suite': self.suite,
            'seed': self.seed,
            'passed': self.passed,
            'num_trials': len(self.trials),
            'num_failures': len(self.failures),
            'worst_deviation': self.worst_deviation,
            'trials': [t.to_dict() for t in self.trials],
            'findings': list(self.findings),
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(trial,)))


def random_config(rng: np.random.Generator, num_relays: int,
                  noise_power: float = 1e-6) -> NetworkConfig:
    """Gains log-uniform in [1e-4, 10], powers uniform in [1e-3, 1] W"""
    def gains(count):
        return tuple(10.0 ** rng.uniform(-4.0, 1.0, size=count))

    return NetworkConfig(
        source_power=float(rng.uniform(1e-3, 1.0)),
        relay_powers=tuple(rng.uniform(1e-3, 1.0, size=num_relays)),
        noise_power=noise_power,
        gain_sd=gains(1)[0],
        gains_sr=gains(num_relays),
        gains_rd=gains(num_relays),
    )


def reduction_deviation(config: NetworkConfig, rho_grid: Sequence[float] = RHO_GRID) -> float:
    """Largest gap between the all-cuts minimum and the reduced broadcast/MAC minimum"""
    worst = 0.0
    for rho in rho_grid:
        oracle, _ = aref_min_cut(config, CorrelationState.full(config.num_relays, float(rho)))
        worst = max(worst, abs(oracle - cutset_objective(config, float(rho))))
    return worst


def _cut_reduction_trial(seed: int, trial: int) -> TrialResult:
    rng = trial_rng(seed, trial)
    count = 1 + trial % MAX_REDUCTION_RELAYS
    config = random_config(rng, count)
    deviation = reduction_deviation(config)
    return TrialResult(trial, deviation, deviation < REDUCTION_TOLERANCE, f'R={count}')


@dataclass
class FullCorrelationCheck:
    """Min-cut value over a relay-relay correlation grid at fixed source-relay correlation"""
    rho_sr: float
    grid: List[float]
    values: List[Optional[float]]

    @property
    def feasible(self) -> List[float]:
        return [v for v in self.values if v is not None]

    @property
    def deviation(self) -> float:
        """Grid maximum minus the value at the largest feasible grid point"""
        feasible = self.feasible
        return max(feasible) - feasible[-1] if feasible else 0.0

    @property
    def passed(self) -> bool:
        return self.deviation <= ARGMAX_TOLERANCE

    @property
    def argmax(self) -> Optional[float]:
        feasible = [(v, x) for v, x in zip(self.values, self.grid) if v is not None]
        if not feasible:
            return None
        best = max(v for v, _ in feasible)
        return max(x for v, x in feasible if v >= best - ARGMAX_TOLERANCE)


def full_correlation_check(config: NetworkConfig, rho_sr: float,
                           grid: Sequence[float] = RHO_RR_GRID) -> FullCorrelationCheck:
    """Grid points whose correlation matrix is not PSD are recorded as None"""
    values = []
    for rho_rr in grid:
        try:
            corr = CorrelationState.uniform(config.num_relays, rho_sr, rho_rr)
        except DomainError:
            values.append(None)
            continue
        values.append(aref_min_cut(config, corr)[0])
    return FullCorrelationCheck(rho_sr=rho_sr, grid=[float(x) for x in grid], values=values)


def _full_correlation_trial(seed: int, trial: int) -> TrialResult:
    config = random_config(trial_rng(seed, trial), 2)
    checks = [full_correlation_check(config, rho_sr) for rho_sr in RHO_SR_VALUES]
    worst = max(checks, key=lambda c: c.deviation)
    detail = f'rho_sr={worst.rho_sr}, argmax rho_rr={worst.argmax}'
    return TrialResult(trial, worst.deviation, all(c.passed for c in checks), detail)


def _moments_trial(seed: int, trial: int, blocks: int, samples: int) -> TrialResult:
    rng = trial_rng(seed, trial)
    count = 1 + trial % 2
    config = random_config(rng, count)
    if trial % 2 == 0:
        rho = float(rng.uniform(0.0, 1.0))
        run = SimRun(seed=seed + trial, num_blocks=blocks, samples_per_block=samples,
                     config=config, corr=CorrelationState.full(count, rho))
        label = f'correlated rho={rho:.3f}'
    else:
        gains = max_gains(config).scaled(float(rng.uniform(0.0, 1.0)))
        run = SimRun(seed=seed + trial, num_blocks=blocks, samples_per_block=samples,
                     config=config, gains=gains)
        label = 'af'
    report = simulate(run)
    worst = max(report.checks, key=lambda c: abs(c.deviation))
    return TrialResult(trial, abs(worst.deviation), report.passed,
                       f'{label}, worst {worst.name}')


@dataclass
class OrderingPoint:
    """Rates at one configuration and the ordering verdicts derived from them"""
    label: str
    cutset: float
    direct: float
    af: float
    mrc: float
    parallel: float
    mac_limited: bool

    @property
    def violations(self) -> Dict[str, float]:
        """Hard ordering checks: positive values are violations in bits"""
        found = {'direct': self.direct - self.cutset}
        if self.mac_limited:
            found['parallel'] = self.parallel - self.cutset
        return found

    @property
    def exceedances(self) -> Dict[str, float]:
        return {name: value - self.cutset
                for name, value in (('af', self.af), ('mrc', self.mrc))
                if value > self.cutset + ORDERING_TOLERANCE}


def ordering_point(config: NetworkConfig, label: str,
                   gains: Optional[AfGains] = None) -> OrderingPoint:
    result = cutset(config)
    return OrderingPoint(label=label, cutset=result.rate, direct=direct_rate(config),
                         af=af_rate(config, gains), mrc=mrc_rate(config),
                         parallel=parallel_channels_rate(config),
                         mac_limited=result.mac_limited)


def _ordering_trial(index: int, points: List[OrderingPoint], findings: List[str]) -> TrialResult:
    worst = -math.inf
    for point in points:
        worst = max(worst, *point.violations.values())
        for name, excess in point.exceedances.items():
            findings.append(f'{point.label}: {name} exceeds cutset by {excess:.3e} bits')
    worst = max(worst, 0.0)
    return TrialResult(index, worst, worst <= ORDERING_TOLERANCE, f'{len(points)} points')


def _sweep_points(spec: SweepSpec) -> List[OrderingPoint]:
    points = []
    for d_sr in spec.grid():
        config = spec.config_at(d_sr)
        points.append(ordering_point(config, f'{spec.name}@{d_sr:g}',
                                     af_gains_at(spec, d_sr, config)))
    return points


def _random_ordering_points(seed: int, trial: int) -> List[OrderingPoint]:
    rng = trial_rng(seed, trial)
    config = random_config(rng, 1 + trial % 4)
    return [ordering_point(config, f'random#{trial}')]


def _run_trials(job: Callable, seed: int, trials: int, workers: int, *extra) -> List[TrialResult]:
    args = [(seed, t) + extra for t in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, *zip(*args)))
    return [job(*a) for a in args]


def run_suite(name: str, seed: int = 0, trials: int = 200, workers: int = 1,
              sweeps: Sequence[SweepSpec] = (), blocks: int = 100,
              samples: int = 1000) -> SuiteReport:
    """
    Run one named suite; trial results keep their index order.

    For cut-reduction, trials counts random networks per relay count 1..8.
    """
    suite = resolve_name('suite', name, SUITES)
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigurationError(f"must be a non-negative integer, got {seed!r}",
                                 field='seed')
    report = SuiteReport(suite=suite, seed=seed)
    if trials <= 0 and not (suite == 'upper-bound-ordering' and sweeps):
        return report

    if suite == 'cut-reduction':
        report.trials = _run_trials(_cut_reduction_trial, seed, trials * MAX_REDUCTION_RELAYS,
                                    workers)
    elif suite == 'full-correlation':
        report.trials = _run_trials(_full_correlation_trial, seed, trials, workers)
        for t in report.failures:
            report.findings.append(
                f'trial {t.index}: min-cut peaks below rho_rr={RHO_RR_GRID[-1]} '
                f'({t.detail}, short by {t.deviation:.3e} bits)')
    elif suite == 'moments':
        report.trials = _run_trials(_moments_trial, seed, trials, workers, blocks, samples)
    else:
        for i, spec in enumerate(sweeps):
            report.trials.append(_ordering_trial(i, _sweep_points(spec), report.findings))
        for t in range(max(trials, 0)):
            report.trials.append(_ordering_trial(
                len(sweeps) + t, _random_ordering_points(seed, t), report.findings))

    if report.findings:
        logger.warning("%s: %d finding(s), first: %s", suite, len(report.findings),
                       report.findings[0])
    for finding in report.findings:
        logger.debug("%s finding: %s", suite, finding)
    logger.info("suite %s: %d/%d trials passed, worst deviation %.3e",
                suite, len(report.trials) - len(report.failures), len(report.trials),
                report.worst_deviation)
    return report
