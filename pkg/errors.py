"""
Исключения симулятора и машиночитаемые коды ошибок
"""

from enum import Enum
from typing import Any, Dict, List, Optional


class ErrorCode(str, Enum):
    CONFIG_PARSE = 'config_parse'
    VALIDATION = 'validation'
    DOMAIN = 'domain'
    MISSING_DRIVE = 'missing_drive'
    UNKNOWN_PRESET = 'unknown_preset'
    SINGULAR_SYSTEM = 'singular_system'
    INSTABILITY = 'instability'
    CONVERGENCE = 'convergence'
    NUMERICAL = 'numerical'
    UNPHYSICAL_STATE = 'unphysical_state'
    DIMENSION = 'dimension'
    IO = 'io'


# Коды возврата CLI
EXIT_CODES = {
    ErrorCode.CONFIG_PARSE: 1,
    ErrorCode.VALIDATION: 1,
    ErrorCode.DOMAIN: 1,
    ErrorCode.MISSING_DRIVE: 1,
    ErrorCode.UNKNOWN_PRESET: 1,
    ErrorCode.DIMENSION: 1,
    ErrorCode.INSTABILITY: 2,
    ErrorCode.IO: 3,
    ErrorCode.SINGULAR_SYSTEM: 4,
    ErrorCode.CONVERGENCE: 4,
    ErrorCode.NUMERICAL: 4,
    ErrorCode.UNPHYSICAL_STATE: 4,
}


class SimulatorError(Exception):
    """Базовое исключение: код ошибки + детали для JSON"""

    code = ErrorCode.NUMERICAL

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.code, 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.code.value,
            'message': self.message,
            'details': {key: _jsonable(value) for key, value in self.details.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        # JSON не знает inf/nan
        return value if value == value and abs(value) != float('inf') else str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    return str(value)


class ConfigParseError(SimulatorError):
    code = ErrorCode.CONFIG_PARSE

    def __init__(self, message: str, lineno: Optional[int] = None, path: Optional[str] = None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}", lineno=lineno, path=path)
        self.lineno = lineno


class ValidationError(SimulatorError):
    """Все нарушенные инварианты сразу, каждое с именем ключа"""

    code = ErrorCode.VALIDATION

    def __init__(self, violations: List[str], path: Optional[str] = None):
        super().__init__("; ".join(violations), violations=list(violations), path=path)
        self.violations = list(violations)


class DomainError(SimulatorError, ValueError):
    code = ErrorCode.DOMAIN


class MissingDriveError(SimulatorError):
    code = ErrorCode.MISSING_DRIVE


class UnknownPresetError(SimulatorError, KeyError):
    code = ErrorCode.UNKNOWN_PRESET

    def __str__(self) -> str:
        return self.message


class SingularSystemError(SimulatorError):
    code = ErrorCode.SINGULAR_SYSTEM


class InstabilityError(SimulatorError):
    code = ErrorCode.INSTABILITY


class ConvergenceError(SimulatorError):
    code = ErrorCode.CONVERGENCE


class NumericalError(SimulatorError):
    code = ErrorCode.NUMERICAL


class UnphysicalStateError(SimulatorError):
    code = ErrorCode.UNPHYSICAL_STATE


class DimensionError(SimulatorError, ValueError):
    code = ErrorCode.DIMENSION


class OutputError(SimulatorError):
    code = ErrorCode.IO
