"""
Relay-position sweeps over the two-relay case-study layout.

Relays move together along the source-destination axis at vertical offsets
+d_r and -d_r (or a single relay at +d_r); every grid point is evaluated
independently and rows are always returned in d_sr order.
"""
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError
from models import AfGains, Geometry, NetworkConfig, parse_relay_counts
from strategies.amplify_forward import af_rate, condition_gains, max_gains
from strategies.combining import direct_rate, mrc_rate
from strategies.cutset import cutset, cutset_objective, parallel_channels_rate
from utils.channel_model import config_from_geometry
from utils.name_matching import resolve_name

logger = logging.getLogger(__name__)

# Column order of every rate table
STRATEGIES = ('direct', 'cutset', 'af', 'mrc', 'parallel')
AF_POLICIES = ('max', 'fraction', 'reference', 'condition')
ONE_RELAY_BASELINE = "one-relay baseline places its relay at (d_sr, +d_r)"


def _number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ConfigurationError(f"expected a number, got {value!r}", field=key)
    return float(value)


@dataclass(frozen=True)
class ReferenceLayout:
    """Layout whose maximal AF gains are reused at the same normalised position d_sr/d_sd"""
    d_sd: float
    d_r: float
    source_power: float
    relay_power: float
    noise_power: float

    @classmethod
    def from_dict(cls, data: dict) -> 'ReferenceLayout':
        try:
            return cls(**{f.name: _number(data[f.name], f'af_reference.{f.name}')
                          for f in dataclasses.fields(cls)})
        except KeyError as e:
            raise ConfigurationError("missing required field", field=f'af_reference.{e.args[0]}')

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SweepSpec:
    """Geometry template, d_sr grid, powers and the strategies to evaluate"""
    name: str
    d_sd: float
    d_r: float
    start: float
    stop: float
    step: float
    source_power: float
    relay_power: float
    noise_power: float
    strategies: Tuple[str, ...] = STRATEGIES
    af_policy: str = 'max'
    af_fraction: float = 1.0
    af_reference: Optional[ReferenceLayout] = None
    relays: int = 2
    path_loss_exponent: float = 2.0
    rho_table: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigurationError("must be > 0", field='step')
        if not self.start < self.stop:
            raise ConfigurationError("start must be smaller than stop", field='start')
        if self.d_sd <= 0:
            raise ConfigurationError("must be > 0", field='d_sd')
        object.__setattr__(self, 'relays', parse_relay_counts([self.relays])[0])
        for key in ('af_fraction', 'path_loss_exponent'):
            object.__setattr__(self, key, _number(getattr(self, key), key))

        names = {resolve_name('strategy', s, STRATEGIES) for s in self.strategies}
        object.__setattr__(self, 'strategies', tuple(s for s in STRATEGIES if s in names))
        object.__setattr__(self, 'af_policy', resolve_name('AF policy', self.af_policy, AF_POLICIES))
        if not 0.0 <= self.af_fraction <= 1.0:
            raise ConfigurationError("must lie in [0, 1]", field='af_fraction')
        if self.af_policy == 'reference' and self.af_reference is None:
            raise ConfigurationError("the 'reference' policy needs a reference layout",
                                     field='af_reference')

        table = tuple(sorted((float(x), float(r)) for x, r in self.rho_table))
        if any(abs(r) > 1.0 for _, r in table):
            raise ConfigurationError("correlations must lie in [-1, 1]", field='rho_table')
        if len({x for x, _ in table}) != len(table):
            raise ConfigurationError("positions must be distinct", field='rho_table')
        object.__setattr__(self, 'rho_table', table)

    def grid(self) -> List[float]:
        """start, start + step, ... up to stop inclusive"""
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return [round(self.start + i * self.step, 10) for i in range(count + 1)]

    def geometry_at(self, d_sr: float, relays: Optional[int] = None,
                    d_sd: Optional[float] = None, d_r: Optional[float] = None) -> Geometry:
        relays = relays or self.relays
        d_sd = self.d_sd if d_sd is None else d_sd
        d_r = self.d_r if d_r is None else d_r
        law = {'path_loss_exponent': self.path_loss_exponent}
        if relays == 1:
            return Geometry.one_relay(d_sd, d_sr, d_r, **law)
        return Geometry.two_relay(d_sd, d_sr, d_r, **law)

    def config_at(self, d_sr: float) -> NetworkConfig:
        return config_from_geometry(self.geometry_at(d_sr), self.source_power,
                                    self.relay_power, self.noise_power)

    def rho_at(self, d_sr: float) -> Optional[float]:
        if not self.rho_table:
            return None
        xs, rhos = zip(*self.rho_table)
        return float(np.interp(d_sr, xs, rhos))

    def to_dict(self) -> dict:
        data = {
            'name': self.name,
            'd_sd': self.d_sd,
            'd_r': self.d_r,
            'start': self.start,
            'stop': self.stop,
            'step': self.step,
            'source_power': self.source_power,
            'relay_power': self.relay_power,
            'noise_power': self.noise_power,
            'strategies': list(self.strategies),
            'af_policy': self.af_policy,
            'af_fraction': self.af_fraction,
            'relays': self.relays,
            'path_loss_exponent': self.path_loss_exponent,
        }
        if self.af_reference is not None:
            data['af_reference'] = self.af_reference.to_dict()
        if self.rho_table:
            data['rho_table'] = [list(p) for p in self.rho_table]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'SweepSpec':
        known = {f.name for f in dataclasses.fields(cls)} | {'active', 'description'}
        for key in data:
            if key not in known:
                raise ConfigurationError("unknown key", field=key)
        required = ('name', 'd_sd', 'd_r', 'start', 'stop', 'step',
                    'source_power', 'relay_power', 'noise_power')
        for key in required:
            if key not in data:
                raise ConfigurationError("missing required field", field=key)

        kwargs = {key: data[key] for key in required}
        for key in ('d_sd', 'd_r', 'start', 'stop', 'step', 'source_power',
                    'relay_power', 'noise_power'):
            kwargs[key] = _number(kwargs[key], key)
        if 'strategies' in data:
            kwargs['strategies'] = tuple(data['strategies'])
        for key in ('af_policy', 'af_fraction', 'relays', 'path_loss_exponent'):
            if key in data:
                kwargs[key] = data[key]
        if data.get('af_reference') is not None:
            kwargs['af_reference'] = ReferenceLayout.from_dict(data['af_reference'])
        if data.get('rho_table'):
            try:
                kwargs['rho_table'] = tuple((p[0], p[1]) for p in data['rho_table'])
            except (TypeError, IndexError, KeyError):
                raise ConfigurationError("expected [d_sr, rho] pairs", field='rho_table')
        return cls(**kwargs)


@dataclass
class RateRow:
    d_sr: float
    rates: Dict[str, float] = field(default_factory=dict)
    rho_star: Optional[float] = None
    binding: Optional[str] = None
    cutset_at_rho: Optional[float] = None


@dataclass
class RateCurve:
    """Rates of every requested strategy at each relay position, ordered by d_sr"""
    name: str
    strategies: Tuple[str, ...]
    rows: List[RateRow] = field(default_factory=list)
    with_rho_table: bool = False

    def column(self, strategy: str) -> List[float]:
        return [row.rates[strategy] for row in self.rows]

    @property
    def positions(self) -> List[float]:
        return [row.d_sr for row in self.rows]

    def header(self) -> List[str]:
        columns = ['d_sr']
        for strategy in self.strategies:
            columns.append(strategy)
            if strategy == 'cutset':
                columns.extend(['rho_star', 'binding_cut'])
        if self.with_rho_table and 'cutset' in self.strategies:
            columns.append('cutset_at_rho')
        return columns

    def table(self) -> List[list]:
        """Rows matching header(), ready for a CSV writer"""
        lines = []
        for row in self.rows:
            line = [row.d_sr]
            for strategy in self.strategies:
                line.append(row.rates[strategy])
                if strategy == 'cutset':
                    line.extend([row.rho_star, row.binding])
            if self.with_rho_table and 'cutset' in self.strategies:
                line.append(row.cutset_at_rho)
            lines.append(line)
        return lines

    def to_dict(self) -> dict:
        return {
            'kind': 'rate_curve',
            'name': self.name,
            'columns': self.header(),
            'rows': self.table(),
        }


def af_gains_at(spec: SweepSpec, d_sr: float, config: NetworkConfig) -> AfGains:
    """Amplification used at one grid point under the sweep's AF policy"""
    limit = max_gains(config)
    if spec.af_policy == 'max':
        return limit
    if spec.af_policy == 'fraction':
        return limit.scaled(spec.af_fraction)
    if spec.af_policy == 'condition':
        return condition_gains(config)

    ref = spec.af_reference
    position = d_sr / spec.d_sd * ref.d_sd
    reference = config_from_geometry(
        spec.geometry_at(position, d_sd=ref.d_sd, d_r=ref.d_r),
        ref.source_power, ref.relay_power, ref.noise_power)
    borrowed = max_gains(reference).beta
    clipped = tuple(min(b, cap) for b, cap in zip(borrowed, limit.beta))
    if clipped != borrowed:
        logger.warning("reference gains exceed the power limit at d_sr=%g; clipped", d_sr)
    return AfGains(clipped)


def evaluate_point(spec: SweepSpec, d_sr: float) -> RateRow:
    config = spec.config_at(d_sr)
    row = RateRow(d_sr=d_sr)
    for strategy in spec.strategies:
        if strategy == 'direct':
            row.rates['direct'] = direct_rate(config)
        elif strategy == 'cutset':
            result = cutset(config)
            row.rates['cutset'] = result.rate
            row.rho_star = result.rho_star
            row.binding = result.binding.label()
            rho = spec.rho_at(d_sr)
            if rho is not None:
                row.cutset_at_rho = cutset_objective(config, rho)
        elif strategy == 'af':
            row.rates['af'] = af_rate(config, af_gains_at(spec, d_sr, config))
        elif strategy == 'mrc':
            row.rates['mrc'] = mrc_rate(config)
        elif strategy == 'parallel':
            row.rates['parallel'] = parallel_channels_rate(config)
    return row


def _evaluate_job(job: Tuple[SweepSpec, float]) -> RateRow:
    return evaluate_point(*job)


def run_sweep(spec: SweepSpec, workers: int = 1) -> RateCurve:
    """Evaluate every grid point; a process pool is used when workers > 1"""
    grid = spec.grid()
    jobs = [(spec, d_sr) for d_sr in grid]
    logger.info("sweep '%s': %d positions from %g to %g m, strategies %s",
                spec.name, len(grid), grid[0], grid[-1], ','.join(spec.strategies) or '-')
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_evaluate_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_evaluate_job(job) for job in jobs]
    return RateCurve(name=spec.name, strategies=spec.strategies, rows=rows,
                     with_rho_table=bool(spec.rho_table))


@dataclass
class RelayCountTable:
    """Cutset rates of the same sweep run with different relay counts"""
    name: str
    counts: Tuple[int, ...]
    positions: List[float]
    cutset: Dict[int, List[float]]
    note: str = ONE_RELAY_BASELINE

    def ratio(self) -> Optional[List[Optional[float]]]:
        """Two-relay over one-relay cutset rate per position, when both were run"""
        if 1 not in self.cutset or 2 not in self.cutset:
            return None
        return [two / one if one > 0 else None
                for one, two in zip(self.cutset[1], self.cutset[2])]

    def header(self) -> List[str]:
        columns = ['d_sr'] + [f'cutset_{c}relay' for c in self.counts]
        if self.ratio() is not None:
            columns.append('ratio')
        return columns

    def table(self) -> List[list]:
        ratio = self.ratio()
        lines = []
        for i, d_sr in enumerate(self.positions):
            line = [d_sr] + [self.cutset[c][i] for c in self.counts]
            if ratio is not None:
                line.append(ratio[i])
            lines.append(line)
        return lines

    def to_dict(self) -> dict:
        return {
            'kind': 'relay_count_comparison',
            'name': self.name,
            'note': self.note,
            'columns': self.header(),
            'rows': self.table(),
        }


def compare_relay_counts(spec: SweepSpec, counts: Sequence[int] = (1, 2),
                         workers: int = 1) -> RelayCountTable:
    counts = tuple(parse_relay_counts(list(counts)))
    rates = {}
    positions = []
    for count in counts:
        variant = dataclasses.replace(spec, relays=count, strategies=('cutset',), rho_table=())
        curve = run_sweep(variant, workers=workers)
        rates[count] = curve.column('cutset')
        positions = curve.positions
    return RelayCountTable(name=spec.name, counts=counts, positions=positions, cutset=rates)
