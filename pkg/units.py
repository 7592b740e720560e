import logging
import math
from typing import Dict, Optional

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class UnitHandler:
    # Множители перевода во внутренние единицы (рад/с, К, м, Тл, рад/(с·Тл), рад)
    # Частоты в Hz подразумевают соглашение "/2π"
    UNIT_FACTORS: Dict[str, Dict[str, float]] = {
        'frequency': {
            'Hz': TWO_PI,
            'kHz': TWO_PI * 1e3,
            'MHz': TWO_PI * 1e6,
            'GHz': TWO_PI * 1e9,
            'rad/s': 1.0,
        },
        'temperature': {
            'K': 1.0,
            'mK': 1e-3,
            'uK': 1e-6,
        },
        'length': {
            'm': 1.0,
            'mm': 1e-3,
            'um': 1e-6,
        },
        'field': {
            'T': 1.0,
            'mT': 1e-3,
            'uT': 1e-6,
        },
        'gyromagnetic': {
            'Hz/T': TWO_PI,
            'GHz/T': TWO_PI * 1e9,
            'rad/(s*T)': 1.0,
        },
        'angle': {
            'rad': 1.0,
            'deg': math.pi / 180.0,
        },
        'time': {
            's': 1.0,
            'ms': 1e-3,
            'us': 1e-6,
            'ns': 1e-9,
        },
        'density': {
            'm^-3': 1.0,
        },
        'dimensionless': {
            '1': 1.0,
        },
    }

    # Единица по умолчанию, если в файле она не указана
    DEFAULT_UNITS = {
        'frequency': 'Hz',
        'temperature': 'K',
        'length': 'm',
        'field': 'T',
        'gyromagnetic': 'Hz/T',
        'angle': 'rad',
        'time': 's',
        'density': 'm^-3',
        'dimensionless': '1',
    }

    # Единица, в которой значение записывается без потерь точности
    EXACT_UNITS = {
        'frequency': 'rad/s',
        'gyromagnetic': 'rad/(s*T)',
    }

    @staticmethod
    def hz_to_rad(value_hz: float) -> float:
        """x/2π в Гц -> 2π·x рад/с"""
        return TWO_PI * value_hz

    @staticmethod
    def rad_to_hz(value_rad: float) -> float:
        """рад/с -> значение "/2π" в Гц"""
        return value_rad / TWO_PI

    @staticmethod
    def to_internal(value: float, unit: Optional[str], kind: str) -> float:
        """Перевести значение из единиц файла во внутренние"""
        table = UnitHandler.UNIT_FACTORS[kind]
        unit = unit or UnitHandler.DEFAULT_UNITS[kind]
        if unit not in table:
            raise KeyError(f"unit '{unit}' is not valid for a {kind} quantity "
                           f"(expected one of: {', '.join(table)})")
        factor = table[unit]
        return value if factor == 1.0 else value * factor

    @staticmethod
    def exact_unit(kind: str) -> str:
        return UnitHandler.EXACT_UNITS.get(kind, UnitHandler.DEFAULT_UNITS[kind])

    @staticmethod
    def format_frequency(value_rad: float) -> str:
        """Показать частоту и в рад/с, и в "/2π" Гц"""
        hz = UnitHandler.rad_to_hz(value_rad)
        magnitude = abs(hz)
        if magnitude >= 1e9:
            scaled, unit = hz / 1e9, 'GHz'
        elif magnitude >= 1e6:
            scaled, unit = hz / 1e6, 'MHz'
        elif magnitude >= 1e3:
            scaled, unit = hz / 1e3, 'kHz'
        else:
            scaled, unit = hz, 'Hz'
        return f"{value_rad:.6e} rad/s  ({scaled:.6g} {unit} /2π)"

    @staticmethod
    def format_quantity(value: float, kind: str) -> str:
        """Читаемое представление величины"""
        if kind in ('frequency', 'gyromagnetic'):
            if kind == 'gyromagnetic':
                return f"{value:.6e} rad/(s*T)  ({UnitHandler.rad_to_hz(value) / 1e9:.6g} GHz/T /2π)"
            return UnitHandler.format_frequency(value)
        if kind == 'temperature':
            return f"{value:.6g} K" if value >= 1.0 or value == 0 else f"{value * 1e3:.6g} mK"
        if kind == 'dimensionless':
            return f"{value:.6g}"
        return f"{value:.6g} {UnitHandler.DEFAULT_UNITS[kind]}"

    @staticmethod
    def axis_factor(unit: str, reference: Optional[Dict[str, float]] = None) -> float:
        """
        Множитель для значений оси свипа.
        Единица может быть физической (Hz, mK, us, ...) или именем параметра
        модели (omega_b, g_a, ...), тогда значения заданы в его долях.
        """
        for table in UnitHandler.UNIT_FACTORS.values():
            if unit in table:
                return table[unit]
        if reference and unit in reference:
            return reference[unit]
        logger.debug(f"Unknown axis unit requested: {unit}")
        raise KeyError(f"unknown axis unit '{unit}'")
