"""Exception hierarchy shared by the library and the command-line front end"""
from typing import Optional


class RelayBoundsError(Exception):
    """Base class for every error raised by this package"""


class ConfigurationError(RelayBoundsError):
    """A network, geometry or sweep description violates an invariant"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ParseError(RelayBoundsError):
    """A JSON document could not be read or lacks a required field"""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DomainError(RelayBoundsError):
    """An argument lies outside the mathematical domain of an operation"""


class ConstraintError(RelayBoundsError):
    """An amplification factor exceeds the relay power constraint"""

    def __init__(self, relay_index: int, beta: float, limit: float):
        self.relay_index = relay_index
        self.beta = beta
        self.limit = limit
        super().__init__(
            f"relay {relay_index + 1}: |beta|={beta:.6g} exceeds the power limit {limit:.6g}"
        )


class NumericalDegeneracyError(RelayBoundsError):
    """A conditional covariance block is singular or indefinite beyond tolerance"""

    def __init__(self, message: str, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"{message} (eigenvalue {eigenvalue:.3e})")


class CapabilityError(RelayBoundsError):
    """A request exceeds what the implementation is willing to enumerate"""


class UnknownNameError(RelayBoundsError):
    """A suite, strategy or policy name is not recognised"""

    def __init__(self, kind: str, name: str, suggestion: Optional[str] = None):
        self.kind = kind
        self.name = name
        self.suggestion = suggestion
        message = f"unknown {kind} '{name}'"
        if suggestion:
            message += f"; did you mean '{suggestion}'?"
        super().__init__(message)
