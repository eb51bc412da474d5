"""Reading configuration documents and writing JSON, CSV and SVG artifacts"""
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Dict, IO, List, Optional, Sequence

from lxml import etree

from errors import ConfigurationError, ParseError
from models import AfGains, CorrelationState, Geometry, NetworkConfig
from strategies.amplify_forward import (af_mrc_comparison, af_rate, max_gains,
                                        useless_relay_predicate)
from strategies.combining import direct_rate, mrc_rate
from strategies.cutset import cutset, parallel_channels_rate
from utils.channel_model import config_from_geometry, snr
from utils.sweeps import RateCurve, SweepSpec

logger = logging.getLogger(__name__)

RATE_UNIT = 'bps/Hz'
NETWORK_KEYS = ('source_power', 'relay_powers', 'noise_power', 'gain_sd', 'gains_sr', 'gains_rd')
OPTIONAL_KEYS = ('rho', 'beta', 'mode', 'description')
SIM_MODES = ('correlated', 'af')


def load_json(path: str) -> dict:
    """Read a JSON object; syntax errors become ParseError with line and column"""
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON in {path}: {e.msg}", line=e.lineno, column=e.colno)
    if not isinstance(data, dict):
        raise ParseError(f"{path} must contain a JSON object", line=1, column=1)
    return data


def save_json(data: dict, path: Optional[str] = None, stream: Optional[IO] = None):
    """Write a document with repr floats so values re-parse bit-exactly"""
    text = json.dumps(data, indent=2, ensure_ascii=False)
    if path:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    else:
        (stream or sys.stdout).write(text + '\n')


@dataclass
class NetworkDocument:
    """A single-network document: the network plus optional correlation, gains and mode"""
    config: NetworkConfig
    rho: Optional[float] = None
    beta: Optional[AfGains] = None
    mode: str = 'correlated'

    def correlation(self) -> CorrelationState:
        return CorrelationState.full(self.config.num_relays, self.rho or 0.0)


def parse_network_document(data: dict) -> NetworkDocument:
    """
    Accepts the network form (powers, noise, gains) or the geometry form
    ("geometry" plus powers and noise). Unknown keys are rejected.
    """
    geometry_form = 'geometry' in data
    allowed = set(OPTIONAL_KEYS)
    if geometry_form:
        allowed |= {'geometry', 'source_power', 'relay_powers', 'noise_power'}
    else:
        allowed |= set(NETWORK_KEYS)
    for key in data:
        if key not in allowed:
            raise ConfigurationError("unknown key", field=key)

    required = ('source_power', 'noise_power') + (('geometry',) if geometry_form else ('gain_sd',))
    for key in required:
        if key not in data:
            raise ParseError("missing required field", field=key)

    if geometry_form:
        if not isinstance(data['geometry'], dict):
            raise ParseError("expected an object", field='geometry')
        geometry = Geometry.from_dict(data['geometry'])
        if geometry.relay_positions and 'relay_powers' not in data:
            raise ParseError("required when relay_positions is non-empty", field='relay_powers')
        config = config_from_geometry(geometry, data['source_power'],
                                      data.get('relay_powers', []), data['noise_power'])
    else:
        config = NetworkConfig.from_dict(data)

    mode = data.get('mode', 'correlated')
    if mode not in SIM_MODES:
        raise ConfigurationError(f"must be one of {', '.join(SIM_MODES)}", field='mode')
    rho = data.get('rho')
    if rho is not None:
        try:
            rho = float(rho)
        except (TypeError, ValueError):
            raise ConfigurationError("expected a number", field='rho')
        if not -1.0 <= rho <= 1.0:
            raise ConfigurationError("must lie in [-1, 1]", field='rho')
    beta = AfGains(tuple(data['beta'])) if data.get('beta') is not None else None
    return NetworkDocument(config=config, rho=rho, beta=beta, mode=mode)


def load_network(path: str) -> NetworkDocument:
    return parse_network_document(load_json(path))


def parse_sweep_documents(data: dict, only_active: bool = True) -> List[SweepSpec]:
    """
    A single sweep object, or {"sweeps": {key: [sweep, ...]}} where entries
    carry an "active" flag and take their key as the default name.
    """
    if 'sweeps' not in data:
        return [SweepSpec.from_dict(data)]
    if not isinstance(data['sweeps'], dict):
        raise ParseError("expected an object of named sweep lists", field='sweeps')

    specs = []
    for key, entries in data['sweeps'].items():
        if isinstance(entries, dict):
            entries = [entries]
        if not isinstance(entries, list) or not all(isinstance(e, dict) for e in entries):
            raise ParseError("expected a sweep object or a list of sweep objects", field=key)
        for entry in entries:
            if only_active and not entry.get('active', False):
                logger.debug("skipping inactive sweep '%s'", key)
                continue
            specs.append(SweepSpec.from_dict({'name': key, **entry}))

    # Sweep names become output file suffixes
    seen = set()
    for spec in specs:
        if spec.name in seen:
            raise ConfigurationError(f"duplicate sweep name '{spec.name}'", field='name')
        seen.add(spec.name)
    return specs


def rate_summary(config: NetworkConfig, gains: Optional[AfGains] = None) -> dict:
    """Direct, cutset, AF, MRC and parallel-channel rates of one network"""
    result = cutset(config)
    gains = gains if gains is not None else max_gains(config)
    comparison = af_mrc_comparison(config)
    return {
        'kind': 'rate_summary',
        'unit': RATE_UNIT,
        'config': config.to_dict(),
        'snr': snr(config).to_dict(),
        'direct': direct_rate(config),
        'cutset': result.rate,
        'rho_star': result.rho_star,
        'binding_cut': result.binding.label(),
        'term_values': dict(result.term_values),
        'af': af_rate(config, gains),
        'af_beta': list(gains.beta),
        'mrc': mrc_rate(config),
        'parallel': parallel_channels_rate(config),
        'af_vs_mrc': comparison.to_dict(),
        'useless_relays': [r + 1 for r in range(config.num_relays)
                           if useless_relay_predicate(config, r)],
    }


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(header: Sequence[str], rows: Sequence[Sequence], path: Optional[str] = None,
              stream: Optional[IO] = None):
    """',' separator, '.' decimal, header first; None cells stay empty"""
    def emit(handle):
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])

    if path:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            emit(f)
    else:
        emit(stream or sys.stdout)


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


class RateChart:
    """Standalone SVG line chart of a rate curve: one polyline per strategy plus a legend"""

    SVG_NS = 'http://www.w3.org/2000/svg'
    WIDTH = 820
    HEIGHT = 500
    MARGIN_LEFT = 70
    MARGIN_RIGHT = 160
    MARGIN_TOP = 40
    MARGIN_BOTTOM = 60
    TICKS = 6

    COLORS = {
        'direct': '#7f7f7f',
        'cutset': '#d62728',
        'af': '#1f77b4',
        'mrc': '#2ca02c',
        'parallel': '#9467bd',
        'cutset_at_rho': '#ff7f0e',
    }

    def __init__(self, curve: RateCurve):
        self.curve = curve
        self.series = self._collect_series()
        xs = curve.positions or [0.0, 1.0]
        self.x_min, self.x_max = min(xs), max(xs)
        if self.x_max == self.x_min:
            self.x_max = self.x_min + 1.0
        peak = max((max(v) for v in self.series.values() if v), default=0.0)
        self.y_max = peak * 1.05 if peak > 0 else 1.0

    def _collect_series(self) -> Dict[str, List[float]]:
        series = {s: self.curve.column(s) for s in self.curve.strategies}
        if self.curve.with_rho_table and 'cutset' in self.curve.strategies:
            series['cutset_at_rho'] = [row.cutset_at_rho for row in self.curve.rows]
        return series

    def _el(self, parent, tag: str, text: Optional[str] = None, **attrs):
        node = etree.SubElement(parent, f'{{{self.SVG_NS}}}{tag}',
                                {k.replace('_', '-'): str(v) for k, v in attrs.items()})
        if text is not None:
            node.text = text
        return node

    def _x(self, value: float) -> float:
        span = self.WIDTH - self.MARGIN_LEFT - self.MARGIN_RIGHT
        return self.MARGIN_LEFT + (value - self.x_min) / (self.x_max - self.x_min) * span

    def _y(self, value: float) -> float:
        span = self.HEIGHT - self.MARGIN_TOP - self.MARGIN_BOTTOM
        return self.HEIGHT - self.MARGIN_BOTTOM - value / self.y_max * span

    def _axes(self, root):
        bottom = self.HEIGHT - self.MARGIN_BOTTOM
        right = self.WIDTH - self.MARGIN_RIGHT
        self._el(root, 'line', x1=self.MARGIN_LEFT, y1=bottom, x2=right, y2=bottom, stroke='black')
        self._el(root, 'line', x1=self.MARGIN_LEFT, y1=self.MARGIN_TOP,
                 x2=self.MARGIN_LEFT, y2=bottom, stroke='black')
        for i in range(self.TICKS):
            fx = self.x_min + (self.x_max - self.x_min) * i / (self.TICKS - 1)
            fy = self.y_max * i / (self.TICKS - 1)
            x, y = self._x(fx), self._y(fy)
            self._el(root, 'line', x1=f'{x:.2f}', y1=bottom, x2=f'{x:.2f}', y2=bottom + 5,
                     stroke='black')
            self._el(root, 'text', f'{fx:.3g}', x=f'{x:.2f}', y=bottom + 20,
                     text_anchor='middle', font_size=12)
            self._el(root, 'line', x1=self.MARGIN_LEFT - 5, y1=f'{y:.2f}',
                     x2=self.MARGIN_LEFT, y2=f'{y:.2f}', stroke='black')
            self._el(root, 'text', f'{fy:.3g}', x=self.MARGIN_LEFT - 8, y=f'{y + 4:.2f}',
                     text_anchor='end', font_size=12)
        self._el(root, 'text', 'd_sr [m]', x=(self.MARGIN_LEFT + right) / 2,
                 y=self.HEIGHT - 15, text_anchor='middle', font_size=14)
        self._el(root, 'text', f'Rate [{RATE_UNIT}]', x=18, y=(self.MARGIN_TOP + bottom) / 2,
                 text_anchor='middle', font_size=14,
                 transform=f'rotate(-90 18 {(self.MARGIN_TOP + bottom) / 2:.2f})')

    def _legend(self, root):
        left = self.WIDTH - self.MARGIN_RIGHT + 20
        for i, name in enumerate(self.series):
            y = self.MARGIN_TOP + 20 * i + 10
            self._el(root, 'line', x1=left, y1=y, x2=left + 25, y2=y,
                     stroke=self.COLORS.get(name, 'black'), stroke_width=2)
            self._el(root, 'text', name, x=left + 32, y=y + 4, font_size=12)

    def build(self) -> etree._Element:
        root = etree.Element(f'{{{self.SVG_NS}}}svg', nsmap={None: self.SVG_NS},
                             width=str(self.WIDTH), height=str(self.HEIGHT),
                             viewBox=f'0 0 {self.WIDTH} {self.HEIGHT}')
        self._el(root, 'title', f'Rates along sweep {self.curve.name}')
        self._el(root, 'text', self.curve.name, x=self.WIDTH / 2, y=22,
                 text_anchor='middle', font_size=16)
        self._axes(root)
        for name, values in self.series.items():
            points = ' '.join(f'{self._x(x):.2f},{self._y(v):.2f}'
                              for x, v in zip(self.curve.positions, values) if v is not None)
            self._el(root, 'polyline', points=points, fill='none',
                     stroke=self.COLORS.get(name, 'black'), stroke_width=2,
                     data_strategy=name)
        self._legend(root)
        return root

    def to_string(self) -> bytes:
        return etree.tostring(self.build(), pretty_print=True, xml_declaration=True,
                              encoding='utf-8')

    def save(self, path: str):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'wb') as f:
            f.write(self.to_string())


def write_svg(curve: RateCurve, path: Optional[str] = None,
              stream: Optional[IO] = None):
    chart = RateChart(curve)
    if path:
        chart.save(path)
    else:
        (stream or sys.stdout).write(chart.to_string().decode('utf-8'))


def write_curve(curve, fmt: str, path: Optional[str] = None):
    """Emit a rate curve or relay-count table as csv, json or svg"""
    if fmt == 'json':
        save_json(curve.to_dict(), path)
    elif fmt == 'csv':
        write_csv(curve.header(), curve.table(), path)
    elif fmt == 'svg':
        if not isinstance(curve, RateCurve):
            raise ConfigurationError("svg output is only available for rate curves",
                                     field='format')
        write_svg(curve, path)
    else:
        raise ConfigurationError(f"unsupported format '{fmt}'", field='format')
