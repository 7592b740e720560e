"""
Двухмодовые гауссовы меры: логарифмическая негативность, чистота,
полная и фазовая квантовая синхронизация.

Блок 4×4 в порядке (X_d1, P_d1, X_d2, P_d2), индексы в формулах 1-based:
C13: корреляция X_d1 с X_d2, C24: P_d1 с P_d2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from config import Config
from errors import DimensionError, UnphysicalStateError
from lindyn import symplectic_eigenvalues

logger = logging.getLogger(__name__)

DISCRIMINANT_SLACK = 1e-12
# 2μ⁻ ≥ 1 − slack считается сепарабельным: E_dd отличается от max(0, −ln 2μ⁻)
# не более чем на −ln(1 − slack) ≈ 1e-9
SEPARABILITY_SLACK = 1e-9
# disc < DEGENERACY·Γ²: корень из разности теряет точность, μ⁻ уточняется по спектру
DEGENERACY = 1e-6

MAGNON_PAIR = (0, 1)


@dataclass(frozen=True)
class TwoModeCM:
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> 'TwoModeCM':
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (4, 4):
            raise DimensionError(f"two-mode covariance matrix must be 4x4, got {matrix.shape}")
        return cls(X=matrix[:2, :2].copy(), Y=matrix[2:, 2:].copy(), Z=matrix[:2, 2:].copy())

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.X, self.Z], [self.Z.T, self.Y]])


@dataclass(frozen=True)
class MeasureSet:
    E_dd: float
    purity: float
    S_c: float
    S_p: float
    nu_minus: float
    min_symplectic: float

    def as_dict(self):
        return {
            'E_dd': self.E_dd,
            'purity': self.purity,
            'S_c': self.S_c,
            'S_p': self.S_p,
            'nu_minus': self.nu_minus,
            'min_symplectic': self.min_symplectic,
        }


def extract_two_mode(C16: np.ndarray, mode_pair: Tuple[int, int] = MAGNON_PAIR) -> TwoModeCM:
    """Главная подматрица двух мод (мода k: квадратуры 2k, 2k+1)"""
    C16 = np.asarray(C16, dtype=float)
    n_modes = C16.shape[0] // 2
    first, second = mode_pair
    for mode in (first, second):
        if not 0 <= mode < n_modes:
            raise IndexError(f"mode index {mode} out of range for {n_modes} modes")
    if first == second:
        raise IndexError(f"mode pair must name two different modes, got {mode_pair}")

    indices = [2 * first, 2 * first + 1, 2 * second, 2 * second + 1]
    return TwoModeCM.from_matrix(C16[np.ix_(indices, indices)])


def partial_transpose(cm: TwoModeCM) -> TwoModeCM:
    """Частичное транспонирование: P_d2 -> −P_d2"""
    flip = np.diag([1.0, -1.0])
    return TwoModeCM(X=cm.X, Y=flip @ cm.Y @ flip, Z=cm.Z @ flip)


def _det2(block: np.ndarray) -> float:
    return float(block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0])


def _det4(matrix: np.ndarray) -> float:
    # LU (getrf), произведение диагонали
    return float(scipy.linalg.det(matrix))


def smallest_pt_eigenvalue(cm: TwoModeCM) -> float:
    """μ⁻ = sqrt((Γ − sqrt(Γ² − 4 det C)) / 2), Γ = det X + det Y − 2 det Z"""
    gamma = _det2(cm.X) + _det2(cm.Y) - 2.0 * _det2(cm.Z)
    det_c = _det4(cm.matrix)
    discriminant = gamma ** 2 - 4.0 * det_c

    if discriminant < -DISCRIMINANT_SLACK:
        raise UnphysicalStateError(
            f"negative discriminant {discriminant:.3e} in partial-transpose spectrum",
            discriminant=float(discriminant),
        )
    if discriminant < DEGENERACY * gamma ** 2:
        # почти вырожденный спектр (вакуум, произведение состояний)
        return float(symplectic_eigenvalues(partial_transpose(cm).matrix)[0])

    # (Γ − √disc)/2 = 2 det C / (Γ + √disc) без вычитания близких чисел
    radicand = 2.0 * det_c / (gamma + math.sqrt(discriminant))
    if not radicand > 0:
        raise UnphysicalStateError(f"partially transposed spectrum is not positive ({radicand:.3e})",
                                   radicand=float(radicand))
    return math.sqrt(radicand)


def log_negativity(cm: TwoModeCM) -> float:
    """E_dd = max(0, −ln(2μ⁻)), натуральный логарифм"""
    nu_minus = smallest_pt_eigenvalue(cm)
    return _negativity_from(nu_minus)


def _negativity_from(nu_minus: float) -> float:
    if 2.0 * nu_minus >= 1.0 - SEPARABILITY_SLACK:
        return 0.0
    return max(0.0, -math.log(2.0 * nu_minus))


def negativity_in_base(E: float, base: str = 'e') -> float:
    """Перевод E_dd для печати: 'e' или '2'"""
    if base in ('e', 'ln'):
        return E
    if base == '2':
        return E / math.log(2.0)
    raise ValueError(f"unsupported logarithm base: {base}")


def purity(cm: TwoModeCM) -> float:
    """P = 1 / (4 sqrt(det C))"""
    det_c = _det4(cm.matrix)
    if det_c <= 0:
        raise UnphysicalStateError(f"non-positive determinant {det_c:.3e}", determinant=float(det_c))
    return 1.0 / (4.0 * math.sqrt(det_c))


def _difference_variances(cm: TwoModeCM) -> Tuple[float, float]:
    C = cm.matrix
    var_x = (C[0, 0] + C[2, 2] - 2.0 * C[0, 2]) / 2.0
    var_p = (C[1, 1] + C[3, 3] - 2.0 * C[1, 3]) / 2.0
    return float(var_x), float(var_p)


def complete_sync(cm: TwoModeCM) -> float:
    """S_c = 1 / ⟨δX_−² + δP_−²⟩"""
    var_x, var_p = _difference_variances(cm)
    total = var_x + var_p
    if total <= 0:
        raise UnphysicalStateError(f"non-positive error-operator variance {total:.3e}", variance=total)
    return 1.0 / total


def phase_sync(cm: TwoModeCM) -> float:
    """S_p = 1 / (2⟨δP_−²⟩); при S_p > 1 разностная фаза сжата"""
    _, var_p = _difference_variances(cm)
    if var_p <= 0:
        raise UnphysicalStateError(f"non-positive momentum-difference variance {var_p:.3e}", variance=var_p)
    return 1.0 / (2.0 * var_p)


def measure_all(C16: np.ndarray, mode_pair: Tuple[int, int] = MAGNON_PAIR) -> MeasureSet:
    """Все меры магнонного блока за один проход"""
    cm = extract_two_mode(C16, mode_pair)
    min_symplectic = float(symplectic_eigenvalues(cm.matrix)[0])
    if min_symplectic < 0.5 - Config.PHYSICALITY_SLACK:
        raise UnphysicalStateError(
            f"two-mode block is unphysical: min symplectic eigenvalue {min_symplectic:.6e}",
            min_symplectic=min_symplectic,
        )

    nu_minus = smallest_pt_eigenvalue(cm)
    return MeasureSet(
        E_dd=_negativity_from(nu_minus),
        purity=purity(cm),
        S_c=complete_sync(cm),
        S_p=phase_sync(cm),
        nu_minus=nu_minus,
        min_symplectic=min_symplectic,
    )
