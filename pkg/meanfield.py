"""
Стационарные средние поля и эффективная магномеханическая связь
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from errors import ConvergenceError, MissingDriveError, SingularSystemError
from physpar import SystemConfig

logger = logging.getLogger(__name__)

# Порядок комплексных неизвестных
A1, A2, C1, C2, D1, D2 = range(6)

SINGULAR_CONDITION = 1e14
SHIFT_MAX_ITERATIONS = 200
SHIFT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OperatingPoint:
    a1: complex
    a2: complex
    c1: complex
    c2: complex
    d1: complex
    d2: complex
    q1: float
    q2: float
    G1: complex
    G2: complex
    # диагностика
    residual: float = 0.0
    condition: float = 1.0
    delta_d1: float = 0.0
    delta_d2: float = 0.0
    iterations: int = 1

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for name in ('a1', 'a2', 'c1', 'c2', 'd1', 'd2', 'G1', 'G2'):
            value = complex(getattr(self, name))
            data[name] = {'re': value.real, 'im': value.imag, 'abs': abs(value)}
        data.update({
            'q1': self.q1,
            'q2': self.q2,
            'residual': self.residual,
            'condition': self.condition,
            'delta_d1': self.delta_d1,
            'delta_d2': self.delta_d2,
            'iterations': self.iterations,
        })
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class CouplingInfo:
    """Вещественные G_j для дрейфовой матрицы и отброшенные фазы"""

    G: Tuple[float, float]
    phase_rotation: Tuple[float, float]


# ===== ЛИНЕЙНАЯ СИСТЕМА =====

def _complex_system(config: SystemConfig, delta_d: Tuple[float, float]):
    """A z + B z* + f = 0 для z = (a1, a2, c1, c2, d1, d2)"""
    A = np.zeros((6, 6), dtype=complex)
    B = np.zeros((6, 6), dtype=complex)
    f = np.zeros(6, dtype=complex)
    drive = config.drive
    E = drive.E

    for j, (a, c, d) in ((1, (A1, C1, D1)), (2, (A2, C2, D2))):
        site = config.site(j)
        a_other, c_other = (A2, C2) if j == 1 else (A1, C1)

        A[a, a] = -(1j * site.delta_a + site.kappa_a)
        A[a, d] = -1j * site.g_a
        A[a, a_other] = 1j * config.J_a

        # c-моды туннелируют с J_c (как в гамильтониане)
        A[c, c] = -(1j * site.delta_c + site.kappa_c)
        A[c, d] = -1j * site.g_c
        A[c, c_other] = 1j * config.J_c

        A[d, d] = -(1j * delta_d[j - 1] + site.kappa_d)
        A[d, a] = -1j * site.g_a
        A[d, c] = -1j * site.g_c
        B[d, d] = 2.0 * site.lam * np.exp(1j * config.theta)
        f[d] = drive.rabi(j)

        if j == 1:
            f[a] = -1j * E
            f[c] = -1j * E

    return A, B, f


def _realify(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Вещественная 12×12 матрица для неизвестных [Re z; Im z]"""
    Ar, Ai, Br, Bi = A.real, A.imag, B.real, B.imag
    return np.block([
        [Ar + Br, -Ai + Bi],
        [Ai + Bi, Ar - Br],
    ])


def _solve_amplitudes(config: SystemConfig, delta_d: Tuple[float, float]):
    A, B, f = _complex_system(config, delta_d)
    M = _realify(A, B)
    rhs = -np.concatenate([f.real, f.imag])

    condition = float(np.linalg.cond(M))
    if not math.isfinite(condition) or condition > SINGULAR_CONDITION:
        raise SingularSystemError(
            f"mean-field system is singular (condition estimate {condition:.3e})",
            condition=condition,
        )

    lu, piv = scipy.linalg.lu_factor(M)
    solution = scipy.linalg.lu_solve((lu, piv), rhs)
    z = solution[:6] + 1j * solution[6:]

    # относительная невязка уравнений средних полей
    residual_vector = A @ z + B @ np.conj(z) + f
    scale = max(
        float(np.max(np.abs(A * z[np.newaxis, :]))),
        float(np.max(np.abs(B * np.conj(z)[np.newaxis, :]))),
        float(np.max(np.abs(f))),
    )
    residual = float(np.linalg.norm(residual_vector) / scale) if scale > 0 else 0.0
    return z, residual, condition


# ===== ОПЕРАЦИИ =====

def solve_operating_point(config: SystemConfig) -> OperatingPoint:
    """Стационарные амплитудные средние ⟨a_j⟩, ⟨c_j⟩, ⟨d_j⟩ и смещения ⟨q_j⟩"""
    if config.drive is None:
        raise MissingDriveError("mean-field solution needs a [drive] section")

    g_db = config.drive.g_db_bare
    sites = (config.site(1), config.site(2))
    delta_d = (sites[0].delta_d, sites[1].delta_d)
    iterations = 0

    while True:
        iterations += 1
        z, residual, condition = _solve_amplitudes(config, delta_d)
        q = tuple(-g_db * abs(z[D1 + k]) ** 2 / sites[k].omega_b for k in range(2))

        if not config.meanfield_shift:
            break

        # сдвиг частоты магнона g_db⟨q⟩; неподвижная точка
        shifted = tuple(sites[k].delta_d + g_db * q[k] for k in range(2))
        change = max(abs(shifted[k] - delta_d[k]) for k in range(2))
        scale = max(abs(value) for value in shifted) or 1.0
        delta_d = shifted
        if change <= SHIFT_TOLERANCE * scale:
            z, residual, condition = _solve_amplitudes(config, delta_d)
            q = tuple(-g_db * abs(z[D1 + k]) ** 2 / sites[k].omega_b for k in range(2))
            break
        if iterations >= SHIFT_MAX_ITERATIONS:
            raise ConvergenceError(
                f"mean-field detuning shift did not converge in {iterations} iterations",
                iterations=iterations,
                last_change=change,
            )

    G = tuple(1j * math.sqrt(2.0) * g_db * z[D1 + k] for k in range(2))

    point = OperatingPoint(
        a1=complex(z[A1]), a2=complex(z[A2]),
        c1=complex(z[C1]), c2=complex(z[C2]),
        d1=complex(z[D1]), d2=complex(z[D2]),
        q1=float(q[0]), q2=float(q[1]),
        G1=complex(G[0]), G2=complex(G[1]),
        residual=residual,
        condition=condition,
        delta_d1=float(delta_d[0]),
        delta_d2=float(delta_d[1]),
        iterations=iterations,
    )
    logger.info(f"✅ Operating point solved: |d1|={abs(point.d1):.4e}, |G1|/2π={abs(point.G1) / (2 * math.pi):.4e} Hz, "
                f"residual={residual:.2e}")
    logger.debug(f"Mean-field condition estimate {condition:.3e}, iterations {iterations}")
    return point


def effective_coupling(op: OperatingPoint, config: Optional[SystemConfig] = None) -> CouplingInfo:
    """
    |G_j| с глобальной фазой, при которой arg⟨d_j⟩ = −π/2 (G вещественна и положительна).
    Запоминает, на какой угол пришлось повернуть.
    """
    g_db = config.drive.g_db_bare if config is not None and config.drive is not None else None
    magnitudes, rotations = [], []

    for d, G in ((op.d1, op.G1), (op.d2, op.G2)):
        if d == 0:
            magnitudes.append(0.0)
            rotations.append(0.0)
            continue
        magnitude = math.sqrt(2.0) * g_db * abs(d) if g_db is not None else abs(G)
        rotation = math.remainder(float(np.angle(d)) + math.pi / 2, 2 * math.pi)
        magnitudes.append(float(magnitude))
        rotations.append(float(rotation))

    return CouplingInfo(G=(magnitudes[0], magnitudes[1]), phase_rotation=(rotations[0], rotations[1]))


def calibrate_bare_coupling(config: SystemConfig, G_target: float) -> float:
    """g_db такой, что |G| = G_target в заданной рабочей точке (узел 1)"""
    if config.drive is None:
        raise MissingDriveError("calibration needs a [drive] section")
    site = config.site(1)
    z, _, _ = _solve_amplitudes(config, (site.delta_d, config.site(2).delta_d))
    magnitude = abs(z[D1])
    if magnitude == 0:
        raise SingularSystemError("cannot calibrate: magnon amplitude is zero", condition=float('inf'))
    return G_target / (math.sqrt(2.0) * magnitude)


def resolve_couplings(config: SystemConfig) -> Tuple[Tuple[float, float], Optional[Tuple[float, float]],
                                                     Optional[OperatingPoint]]:
    """
    G для линейной модели: напрямую из G_db либо через средние поля.
    Возвращает (G, сдвинутые Δ_d или None, рабочая точка или None).
    """
    if config.drive is None:
        return (config.site(1).G_db, config.site(2).G_db), None, None

    point = solve_operating_point(config)
    coupling = effective_coupling(point, config)
    delta_d = (point.delta_d1, point.delta_d2) if config.meanfield_shift else None
    return coupling.G, delta_d, point
