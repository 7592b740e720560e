"""
Валидаторы параметров модели
"""

import math
from typing import Tuple


class Validators:
    @staticmethod
    def validate_finite(name: str, value: float) -> Tuple[bool, str]:
        """Число должно быть конечным"""
        if value is None or not math.isfinite(value):
            return False, f"{name}: must be a finite number (got {value})"
        return True, "OK"

    @staticmethod
    def validate_rate(name: str, value: float) -> Tuple[bool, str]:
        """Скорости затухания и связи не могут быть отрицательными"""
        ok, message = Validators.validate_finite(name, value)
        if not ok:
            return ok, message
        if value < 0:
            return False, f"{name}: rate must be >= 0 (got {value})"
        return True, "OK"

    @staticmethod
    def validate_positive(name: str, value: float) -> Tuple[bool, str]:
        """Строго положительная величина"""
        ok, message = Validators.validate_finite(name, value)
        if not ok:
            return ok, message
        if value <= 0:
            return False, f"{name}: must be > 0 (got {value})"
        return True, "OK"

    @staticmethod
    def validate_temperature(name: str, value: float) -> Tuple[bool, str]:
        ok, message = Validators.validate_finite(name, value)
        if not ok:
            return ok, message
        if value < 0:
            return False, f"{name}: temperature must be >= 0 K (got {value})"
        return True, "OK"

    @staticmethod
    def validate_phase(name: str, value: float) -> Tuple[bool, str]:
        """Фаза сжатия в [0, 2π)"""
        ok, message = Validators.validate_finite(name, value)
        if not ok:
            return ok, message
        if not 0.0 <= value < 2.0 * math.pi:
            return False, f"{name}: phase must lie in [0, 2π) (got {value})"
        return True, "OK"
