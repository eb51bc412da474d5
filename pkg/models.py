from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import math

import numpy as np

from errors import ConfigurationError, DomainError

Point = Tuple[float, float]

# Transmit correlation matrices may dip this far below zero and still count as PSD
PSD_TOLERANCE = 1e-9


def relay_label(index: int) -> str:
    """1-based label used in documents and CSV columns ('r1', 'r2', ...)"""
    return f"r{index + 1}"


def _as_floats(values: Iterable, name: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigurationError("expected a list of numbers", field=name)


def _finite(value: float, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError("expected a number", field=name)
    if not math.isfinite(value):
        raise ConfigurationError("must be finite", field=name)
    return value


@dataclass(frozen=True)
class NetworkConfig:
    """Powers (W), common receiver noise (W) and power gains of a parallel-relay link"""
    source_power: float
    relay_powers: Tuple[float, ...]
    noise_power: float
    gain_sd: float
    gains_sr: Tuple[float, ...] = ()
    gains_rd: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'source_power', _finite(self.source_power, 'source_power'))
        object.__setattr__(self, 'noise_power', _finite(self.noise_power, 'noise_power'))
        object.__setattr__(self, 'gain_sd', _finite(self.gain_sd, 'gain_sd'))
        for name in ('relay_powers', 'gains_sr', 'gains_rd'):
            values = _as_floats(getattr(self, name), name)
            if any(not math.isfinite(v) for v in values):
                raise ConfigurationError("must be finite", field=name)
            object.__setattr__(self, name, values)

        if self.source_power < 0:
            raise ConfigurationError("must be >= 0", field='source_power')
        if self.noise_power <= 0:
            raise ConfigurationError("must be > 0", field='noise_power')
        if self.gain_sd < 0:
            raise ConfigurationError("must be >= 0", field='gain_sd')
        for name in ('relay_powers', 'gains_sr', 'gains_rd'):
            if any(v < 0 for v in getattr(self, name)):
                raise ConfigurationError("entries must be >= 0", field=name)

        count = len(self.relay_powers)
        if len(self.gains_sr) != count:
            raise ConfigurationError(
                f"has {len(self.gains_sr)} entries, relay_powers has {count}", field='gains_sr')
        if len(self.gains_rd) != count:
            raise ConfigurationError(
                f"has {len(self.gains_rd)} entries, relay_powers has {count}", field='gains_rd')

    @property
    def num_relays(self) -> int:
        return len(self.relay_powers)

    @classmethod
    def unity(cls, num_relays: int = 1) -> 'NetworkConfig':
        """All powers, gains and the noise level equal to one"""
        ones = (1.0,) * num_relays
        return cls(source_power=1.0, relay_powers=ones, noise_power=1.0,
                   gain_sd=1.0, gains_sr=ones, gains_rd=ones)

    def with_relay(self, power: float, gain_sr: float, gain_rd: float) -> 'NetworkConfig':
        """Copy of this network with one more relay appended"""
        return NetworkConfig(
            source_power=self.source_power,
            relay_powers=self.relay_powers + (power,),
            noise_power=self.noise_power,
            gain_sd=self.gain_sd,
            gains_sr=self.gains_sr + (gain_sr,),
            gains_rd=self.gains_rd + (gain_rd,),
        )

    def only_relays(self, indices: Sequence[int]) -> 'NetworkConfig':
        """Copy keeping only the relays at the given 0-based indices"""
        indices = list(indices)
        return NetworkConfig(
            source_power=self.source_power,
            relay_powers=tuple(self.relay_powers[i] for i in indices),
            noise_power=self.noise_power,
            gain_sd=self.gain_sd,
            gains_sr=tuple(self.gains_sr[i] for i in indices),
            gains_rd=tuple(self.gains_rd[i] for i in indices),
        )

    def scaled(self, factor: float) -> 'NetworkConfig':
        """Multiply every power and the noise level by the same factor"""
        return NetworkConfig(
            source_power=self.source_power * factor,
            relay_powers=tuple(p * factor for p in self.relay_powers),
            noise_power=self.noise_power * factor,
            gain_sd=self.gain_sd,
            gains_sr=self.gains_sr,
            gains_rd=self.gains_rd,
        )

    def to_dict(self) -> dict:
        return {
            'source_power': self.source_power,
            'relay_powers': list(self.relay_powers),
            'noise_power': self.noise_power,
            'gain_sd': self.gain_sd,
            'gains_sr': list(self.gains_sr),
            'gains_rd': list(self.gains_rd),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'NetworkConfig':
        for key in ('source_power', 'noise_power', 'gain_sd'):
            if key not in data:
                raise ConfigurationError("missing required field", field=key)
        return cls(
            source_power=data['source_power'],
            relay_powers=data.get('relay_powers', []),
            noise_power=data['noise_power'],
            gain_sd=data['gain_sd'],
            gains_sr=data.get('gains_sr', []),
            gains_rd=data.get('gains_rd', []),
        )


@dataclass(frozen=True)
class Geometry:
    """Planar node layout (meters) and the path-loss law that turns it into gains"""
    source_pos: Point
    dest_pos: Point
    relay_positions: Tuple[Point, ...] = ()
    path_loss_exponent: float = 2.0
    reference_distance: float = 1.0
    min_distance: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, 'source_pos', self._point(self.source_pos, 'source_pos'))
        object.__setattr__(self, 'dest_pos', self._point(self.dest_pos, 'dest_pos'))
        object.__setattr__(self, 'relay_positions', tuple(
            self._point(p, f'relay_positions[{i}]') for i, p in enumerate(self.relay_positions)
        ))
        for name in ('path_loss_exponent', 'reference_distance', 'min_distance'):
            value = _finite(getattr(self, name), name)
            if value <= 0:
                raise ConfigurationError("must be > 0", field=name)
            object.__setattr__(self, name, value)

    @staticmethod
    def _point(value, name: str) -> Point:
        try:
            x, y = value
        except (TypeError, ValueError):
            raise ConfigurationError("expected an (x, y) pair", field=name)
        return (_finite(x, name), _finite(y, name))

    @classmethod
    def two_relay(cls, d_sd: float, d_sr: float, d_r: float, **law) -> 'Geometry':
        """Source at the origin, destination at (d_sd, 0), relays at (d_sr, +d_r) and (d_sr, -d_r)"""
        return cls(source_pos=(0.0, 0.0), dest_pos=(d_sd, 0.0),
                   relay_positions=((d_sr, d_r), (d_sr, -d_r)), **law)

    @classmethod
    def one_relay(cls, d_sd: float, d_sr: float, d_r: float, **law) -> 'Geometry':
        """Single relay at (d_sr, d_r) above the direct link"""
        return cls(source_pos=(0.0, 0.0), dest_pos=(d_sd, 0.0),
                   relay_positions=((d_sr, d_r),), **law)

    def to_dict(self) -> dict:
        return {
            'source_pos': list(self.source_pos),
            'dest_pos': list(self.dest_pos),
            'relay_positions': [list(p) for p in self.relay_positions],
            'path_loss_exponent': self.path_loss_exponent,
            'reference_distance': self.reference_distance,
            'min_distance': self.min_distance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Geometry':
        for key in ('source_pos', 'dest_pos'):
            if key not in data:
                raise ConfigurationError("missing required field", field=key)
        return cls(
            source_pos=tuple(data['source_pos']),
            dest_pos=tuple(data['dest_pos']),
            relay_positions=tuple(tuple(p) for p in data.get('relay_positions', [])),
            path_loss_exponent=data.get('path_loss_exponent', 2.0),
            reference_distance=data.get('reference_distance', 1.0),
            min_distance=data.get('min_distance', 0.01),
        )


@dataclass(frozen=True)
class SnrTriple:
    """Linear per-link SNRs: direct, source->relay and relay->destination"""
    snr_sd: float
    snr_sr: Tuple[float, ...]
    snr_rd: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {'snr_sd': self.snr_sd, 'snr_sr': list(self.snr_sr), 'snr_rd': list(self.snr_rd)}


@dataclass(frozen=True)
class CorrelationState:
    """Correlation of the source codeword with each relay output, and between relay outputs"""
    rho_sr: Tuple[float, ...]
    rho_rr: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        rho_sr = _as_floats(self.rho_sr, 'rho_sr')
        try:
            rho_rr = tuple(tuple(float(v) for v in row) for row in self.rho_rr)
        except (TypeError, ValueError):
            raise DomainError("rho_rr must be a square matrix of numbers")
        object.__setattr__(self, 'rho_sr', rho_sr)
        object.__setattr__(self, 'rho_rr', rho_rr)

        count = len(rho_sr)
        if len(rho_rr) != count or any(len(row) != count for row in rho_rr):
            raise DomainError(f"rho_rr must be {count}x{count} to match rho_sr")
        if any(abs(v) > 1.0 for v in rho_sr):
            raise DomainError("every rho_sr entry must lie in [-1, 1]")
        matrix = np.array(rho_rr, dtype=float).reshape(count, count)
        if np.any(np.abs(matrix) > 1.0):
            raise DomainError("every rho_rr entry must lie in [-1, 1]")
        if not np.array_equal(matrix, matrix.T):
            raise DomainError("rho_rr must be symmetric")
        if np.any(np.diag(matrix) != 1.0):
            raise DomainError("rho_rr must have a unit diagonal")

        smallest = float(np.linalg.eigvalsh(self.matrix()).min())
        if smallest < -PSD_TOLERANCE:
            raise DomainError(
                f"transmit correlation matrix is not positive semidefinite "
                f"(smallest eigenvalue {smallest:.3e})"
            )

    @property
    def num_relays(self) -> int:
        return len(self.rho_sr)

    def matrix(self) -> np.ndarray:
        """Correlation matrix of (X_s, X_1..X_R)"""
        count = len(self.rho_sr)
        full = np.eye(count + 1)
        if count:
            full[0, 1:] = self.rho_sr
            full[1:, 0] = self.rho_sr
            full[1:, 1:] = np.array(self.rho_rr, dtype=float)
        return full

    @classmethod
    def uniform(cls, num_relays: int, rho_sr: float, rho_rr: float) -> 'CorrelationState':
        """Common source-relay correlation and common relay-relay correlation"""
        rr = np.full((num_relays, num_relays), float(rho_rr))
        np.fill_diagonal(rr, 1.0)
        return cls(rho_sr=(float(rho_sr),) * num_relays,
                   rho_rr=tuple(tuple(row) for row in rr.tolist()))

    @classmethod
    def full(cls, num_relays: int, rho: float) -> 'CorrelationState':
        """Fully correlated relay outputs sharing correlation rho with the source"""
        return cls.uniform(num_relays, rho, 1.0)

    def regularized(self, eps: float = 1e-9) -> 'CorrelationState':
        """Replace every unit off-diagonal relay correlation by 1 - eps"""
        rr = np.array(self.rho_rr, dtype=float).reshape(self.num_relays, self.num_relays)
        off = ~np.eye(self.num_relays, dtype=bool)
        rr[off & (rr >= 1.0)] = 1.0 - eps
        return CorrelationState(rho_sr=self.rho_sr, rho_rr=tuple(tuple(row) for row in rr.tolist()))


@dataclass(frozen=True)
class Cut:
    """Relays grouped with the source on the transmit side of a network cut"""
    subset: FrozenSet[int] = frozenset()

    @property
    def mask(self) -> int:
        return sum(1 << r for r in self.subset)

    @classmethod
    def from_mask(cls, mask: int, num_relays: int) -> 'Cut':
        return cls(frozenset(r for r in range(num_relays) if mask >> r & 1))

    def label(self) -> str:
        return '{' + ','.join(relay_label(r) for r in sorted(self.subset)) + '}'


@dataclass(frozen=True)
class AfGains:
    """Per-relay amplitude factors |beta_r| of amplify-and-forward"""
    beta: Tuple[float, ...]

    def __post_init__(self):
        beta = _as_floats(self.beta, 'beta')
        if any(not math.isfinite(b) or b < 0 for b in beta):
            raise ConfigurationError("entries must be finite and >= 0", field='beta')
        object.__setattr__(self, 'beta', beta)

    def scaled(self, fraction: float) -> 'AfGains':
        return AfGains(tuple(b * fraction for b in self.beta))


@dataclass(frozen=True)
class BindingCut:
    """Which term limits the cutset bound: one or more broadcast relays, the MAC, or a tie"""
    relays: Tuple[int, ...] = ()
    mac: bool = False

    @property
    def is_tie(self) -> bool:
        return len(self.relays) + int(self.mac) > 1

    def label(self) -> str:
        parts = [relay_label(r) for r in self.relays]
        if self.mac:
            parts.append('mac')
        if self.is_tie:
            return 'tie(' + ','.join(parts) + ')'
        return parts[0] if parts else 'none'

    @classmethod
    def from_label(cls, text: str) -> 'BindingCut':
        text = text.strip()
        if text.startswith('tie(') and text.endswith(')'):
            parts = [p for p in text[4:-1].split(',') if p]
        else:
            parts = [text]
        relays = tuple(int(p[1:]) - 1 for p in parts if p.startswith('r'))
        return cls(relays=relays, mac='mac' in parts)


@dataclass
class CutsetResult:
    """Cutset bound value, the optimal source-relay correlation and the limiting cut"""
    rate: float
    rho_star: float
    binding: BindingCut
    term_values: Dict[str, float] = field(default_factory=dict)

    @property
    def mac_limited(self) -> bool:
        return self.binding.mac

    def to_dict(self) -> dict:
        return {
            'rate': self.rate,
            'rho_star': self.rho_star,
            'binding_cut': self.binding.label(),
            'term_values': dict(self.term_values),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CutsetResult':
        return cls(
            rate=float(data['rate']),
            rho_star=float(data['rho_star']),
            binding=BindingCut.from_label(data['binding_cut']),
            term_values={k: float(v) for k, v in data.get('term_values', {}).items()},
        )


def _relay_count(value) -> int:
    if isinstance(value, str):
        return int(value.strip())
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(value)
    return int(value)


def parse_relay_counts(values: Optional[List]) -> List[int]:
    """Normalise a relay-count list such as [1, 2] or '1,2'"""
    if values is None:
        return [2]
    if isinstance(values, str):
        values = [v for v in values.split(',') if v.strip()]
    try:
        counts = sorted({_relay_count(v) for v in values})
    except (TypeError, ValueError, OverflowError):
        raise ConfigurationError(f"relay counts must be integers, got {values!r}",
                                 field='relays') from None
    if not counts or any(c not in (1, 2) for c in counts):
        raise ConfigurationError("relay counts must be drawn from {1, 2}", field='relays')
    return counts
