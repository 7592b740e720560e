"""
Линеаризованная гауссова динамика: дрейф K, диффузия L, устойчивость,
стационарная и зависящая от времени ковариационные матрицы.

Порядок квадратур:
    [X_d1, P_d1, X_d2, P_d2, q1, p1, q2, p2,
     X_a1, P_a1, X_a2, P_a2, X_c1, P_c1, X_c2, P_c2]
Вакуум: ⟨δX²⟩ = 1/2.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import Config
from errors import ConvergenceError, DimensionError, InstabilityError, NumericalError
from meanfield import OperatingPoint, resolve_couplings
from physpar import SystemConfig, thermal_occupation

logger = logging.getLogger(__name__)

ORDERING = (
    'X_d1', 'P_d1', 'X_d2', 'P_d2',
    'q1', 'p1', 'q2', 'p2',
    'X_a1', 'P_a1', 'X_a2', 'P_a2',
    'X_c1', 'P_c1', 'X_c2', 'P_c2',
)
DIMENSION = len(ORDERING)

# Индексы пар квадратур по узлам
MAGNON = {1: (0, 1), 2: (2, 3)}
PHONON = {1: (4, 5), 2: (6, 7)}
CAVITY_A = {1: (8, 9), 2: (10, 11)}
CAVITY_C = {1: (12, 13), 2: (14, 15)}

MIN_STEP = 1e-18  # с


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class LinearModel:
    K: np.ndarray
    L: np.ndarray
    ordering: Tuple[str, ...] = ORDERING

    def __post_init__(self):
        object.__setattr__(self, 'K', _frozen(self.K))
        object.__setattr__(self, 'L', _frozen(self.L))


@dataclass(frozen=True)
class CovarianceMatrix:
    matrix: np.ndarray
    residual: Optional[float] = None   # невязка Ляпунова для стационарного решения
    time: Optional[float] = None
    min_symplectic: Optional[float] = None   # по всему состоянию, не только по магнонам

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen(self.matrix))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def physical(self) -> bool:
        return self.min_symplectic is None or self.min_symplectic >= 0.5 - Config.PHYSICALITY_SLACK


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'stable', bool(self.max_real_part < 0))


# ===== СБОРКА МАТРИЦ =====

def assemble_drift(config: SystemConfig, G: Sequence[float],
                   delta_d: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    Дрейфовая матрица 16×16 линеаризованных уравнений для флуктуаций.
    delta_d переопределяет отстройки магнонов (сдвиг средним полем).
    """
    K = np.zeros((DIMENSION, DIMENSION))
    cos_t, sin_t = math.cos(config.theta), math.sin(config.theta)

    for j in (1, 2):
        s = 2 if j == 1 else 1
        site = config.site(j)
        G_j = float(G[j - 1])
        detuning = site.delta_d if delta_d is None else float(delta_d[j - 1])
        squeeze = 2.0 * site.lam

        xd, pd = MAGNON[j]
        q, p = PHONON[j]
        xa, pa = CAVITY_A[j]
        xc, pc = CAVITY_C[j]
        xa_s, pa_s = CAVITY_A[s]
        xc_s, pc_s = CAVITY_C[s]

        # магнон со сжатием
        K[xd, xd] = squeeze * cos_t - site.kappa_d
        K[xd, pd] = detuning + squeeze * sin_t
        K[xd, pa] = site.g_a
        K[xd, pc] = site.g_c
        if config.full_linearization:
            K[xd, q] = -G_j

        K[pd, xd] = squeeze * sin_t - detuning
        K[pd, pd] = -(squeeze * cos_t + site.kappa_d)
        K[pd, xa] = -site.g_a
        K[pd, xc] = -site.g_c

        # механика
        K[q, p] = site.omega_b
        K[p, q] = -site.omega_b
        K[p, p] = -site.gamma_b
        K[p, pd] = G_j

        # полость a
        K[xa, xa] = -site.kappa_a
        K[xa, pa] = site.delta_a
        K[xa, pd] = site.g_a
        K[xa, pa_s] = -config.J_a
        K[pa, xa] = -site.delta_a
        K[pa, pa] = -site.kappa_a
        K[pa, xd] = -site.g_a
        K[pa, xa_s] = config.J_a

        # полость c
        K[xc, xc] = -site.kappa_c
        K[xc, pc] = site.delta_c
        K[xc, pd] = site.g_c
        K[xc, pc_s] = -config.J_c
        K[pc, xc] = -site.delta_c
        K[pc, pc] = -site.kappa_c
        K[pc, xd] = -site.g_c
        K[pc, xc_s] = config.J_c

    return K


def assemble_diffusion(config: SystemConfig) -> np.ndarray:
    """Диагональная матрица диффузии L = L_db ⊕ L_ac"""
    diagonal = np.zeros(DIMENSION)
    for j in (1, 2):
        site = config.site(j)
        N_d = thermal_occupation(site.omega_d, config.T)
        n_b = thermal_occupation(site.omega_b, config.T)
        N_a = thermal_occupation(site.omega_a, config.T)
        N_c = thermal_occupation(site.omega_c, config.T)

        diagonal[list(MAGNON[j])] = site.kappa_d * (1 + 2 * N_d)
        diagonal[PHONON[j][1]] = site.gamma_b * (1 + 2 * n_b)
        diagonal[list(CAVITY_A[j])] = site.kappa_a * (1 + 2 * N_a)
        diagonal[list(CAVITY_C[j])] = site.kappa_c * (1 + 2 * N_c)
    return np.diag(diagonal)


def build_linear_model(config: SystemConfig) -> Tuple[LinearModel, Optional[OperatingPoint]]:
    """Связь G (напрямую или из средних полей) -> K, L"""
    G, delta_d, point = resolve_couplings(config)
    model = LinearModel(K=assemble_drift(config, G, delta_d), L=assemble_diffusion(config))
    return model, point


# ===== УСТОЙЧИВОСТЬ =====

def stability(K: np.ndarray) -> StabilityReport:
    """Собственные числа K (LAPACK geev: балансировка + QR Хессенберга)"""
    K = np.asarray(K, dtype=float)
    if not np.all(np.isfinite(K)):
        raise NumericalError("drift matrix contains non-finite entries")
    try:
        eigenvalues = scipy.linalg.eigvals(K)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {e}",
                               iterations=f"LAPACK geev, {30 * K.shape[0]} sweeps max")
    order = np.lexsort((eigenvalues.imag, -eigenvalues.real))
    eigenvalues = eigenvalues[order]
    return StabilityReport(eigenvalues=eigenvalues, max_real_part=float(np.max(eigenvalues.real)))


# ===== СТАЦИОНАРНОЕ СОСТОЯНИЕ =====

def lyapunov_residual(K: np.ndarray, C: np.ndarray, L: np.ndarray) -> float:
    """‖KC + CKᵀ + L‖_F / ‖L‖_F (абсолютная, если L = 0)"""
    residual = np.linalg.norm(K @ C + C @ K.T + L)
    scale = np.linalg.norm(L)
    return float(residual / scale) if scale > 0 else float(residual)


def _solve_kronecker(K: np.ndarray, L: np.ndarray) -> np.ndarray:
    n = K.shape[0]
    identity = np.eye(n)
    # vec по столбцам: vec(KC) = (I⊗K)vec(C), vec(CKᵀ) = (K⊗I)vec(C)
    M = np.kron(identity, K) + np.kron(K, identity)

    condition = float(np.linalg.cond(M, 1))
    if condition > Config.CONDITION_WARNING:
        logger.warning(f"⚠️ Lyapunov system is ill-conditioned: condition estimate {condition:.3e}")
    else:
        logger.debug(f"Lyapunov condition estimate {condition:.3e}")

    lu, piv = scipy.linalg.lu_factor(M)
    vec = scipy.linalg.lu_solve((lu, piv), -L.reshape(-1, order='F'))
    return vec.reshape((n, n), order='F')


def steady_covariance(K: np.ndarray, L: np.ndarray, method: str = 'kron') -> CovarianceMatrix:
    """Решение K C + C Kᵀ + L = 0 для устойчивой K"""
    K = np.asarray(K, dtype=float)
    L = np.asarray(L, dtype=float)
    if K.shape != L.shape or K.shape[0] != K.shape[1]:
        raise DimensionError(f"K {K.shape} and L {L.shape} must be equal square matrices")

    report = stability(K)
    if not report.stable:
        raise InstabilityError(
            f"drift matrix is unstable: max real part {report.max_real_part:.6e} rad/s",
            max_real_part=report.max_real_part,
        )

    if method == 'kron':
        C = _solve_kronecker(K, L)
    elif method == 'bartels-stewart':
        C = scipy.linalg.solve_continuous_lyapunov(K, -L)
    else:
        raise ValueError(f"unknown Lyapunov method: {method}")

    C = 0.5 * (C + C.T)
    residual = lyapunov_residual(K, C, L)
    if residual > Config.LYAPUNOV_TOLERANCE:
        logger.warning(f"⚠️ Lyapunov residual {residual:.3e} above tolerance {Config.LYAPUNOV_TOLERANCE:.1e}")

    covariance = CovarianceMatrix(matrix=C, residual=residual, min_symplectic=_min_symplectic(C))
    if not covariance.physical:
        logger.warning(f"⚠️ Steady covariance is unphysical: min symplectic eigenvalue "
                       f"{covariance.min_symplectic:.6e}")
    return covariance


# ===== ДИНАМИКА =====

def _step_limit(K: np.ndarray, omega_b: float) -> float:
    bound = np.linalg.norm(K, np.inf) + omega_b
    if bound == 0:
        return math.inf
    return Config.ODE_STEP_FACTOR / bound


def _check_grid(t_grid: Sequence[float]) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise DimensionError("time grid must be a non-empty 1-D sequence")
    if t_grid[0] != 0:
        raise ValueError(f"time grid must start at 0 (got {t_grid[0]})")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t_grid


def evolve_covariance(K: np.ndarray, L: np.ndarray, C0: Optional[np.ndarray] = None,
                      t_grid: Sequence[float] = (0.0,), omega_b: float = 0.0) -> List[CovarianceMatrix]:
    """
    Ċ = K C + C Kᵀ + L, классический RK4 с фиксированным шагом
    h ≤ ODE_STEP_FACTOR / (‖K‖_∞ + ω_b). По умолчанию старт из вакуума I/2.
    """
    K = np.asarray(K, dtype=float)
    L = np.asarray(L, dtype=float)
    n = K.shape[0]
    C = 0.5 * np.eye(n) if C0 is None else np.array(C0, dtype=float)
    if C.shape != K.shape or L.shape != K.shape:
        raise DimensionError(f"K {K.shape}, L {L.shape} and C0 {C.shape} must match")
    t_grid = _check_grid(t_grid)

    h_max = _step_limit(K, omega_b)
    KT = K.T

    def rhs(X: np.ndarray) -> np.ndarray:
        return K @ X + X @ KT + L

    samples = [CovarianceMatrix(matrix=C, time=0.0, min_symplectic=_min_symplectic(C))]
    total_steps = 0
    warned = not samples[0].physical

    for t_start, t_end in zip(t_grid[:-1], t_grid[1:]):
        interval = t_end - t_start
        n_sub = max(1, int(math.ceil(interval / h_max))) if math.isfinite(h_max) else 1
        h = interval / n_sub
        if h < MIN_STEP:
            raise NumericalError(f"step size underflow at t = {t_start:.6e} s (h = {h:.3e} s)",
                                 time=float(t_start), step=h)

        for k in range(n_sub):
            k1 = rhs(C)
            k2 = rhs(C + 0.5 * h * k1)
            k3 = rhs(C + 0.5 * h * k2)
            k4 = rhs(C + h * k3)
            C = C + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            C = 0.5 * (C + C.T)

            if not np.all(np.isfinite(C)):
                time = float(t_start + (k + 1) * h)
                raise NumericalError(f"covariance became non-finite at t = {time:.6e} s", time=time)

        total_steps += n_sub
        sample = CovarianceMatrix(matrix=C, time=float(t_end), min_symplectic=_min_symplectic(C))
        if not sample.physical and not warned:
            logger.warning(f"⚠️ Covariance became unphysical at t = {t_end:.6e} s: "
                           f"min symplectic eigenvalue {sample.min_symplectic:.6e}")
            warned = True
        samples.append(sample)

    logger.debug(f"RK4 covariance evolution: {total_steps} steps, h_max = {h_max:.3e} s")
    return samples


def evolve_mean(K: np.ndarray, r0: np.ndarray, t_grid: Sequence[float], omega_b: float = 0.0) -> np.ndarray:
    """ṙ = K r тем же RK4 (для проверки дрейфа); по строке на момент времени"""
    K = np.asarray(K, dtype=float)
    r = np.array(r0, dtype=float)
    t_grid = _check_grid(t_grid)
    h_max = _step_limit(K, omega_b)

    trajectory = [r.copy()]
    for t_start, t_end in zip(t_grid[:-1], t_grid[1:]):
        interval = t_end - t_start
        n_sub = max(1, int(math.ceil(interval / h_max))) if math.isfinite(h_max) else 1
        h = interval / n_sub
        for _ in range(n_sub):
            k1 = K @ r
            k2 = K @ (r + 0.5 * h * k1)
            k3 = K @ (r + 0.5 * h * k2)
            k4 = K @ (r + h * k3)
            r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        trajectory.append(r.copy())
    return np.array(trajectory)


# ===== ФИЗИЧНОСТЬ =====

def symplectic_form(n_modes: int) -> np.ndarray:
    """Ω_s = ⊕ [[0, 1], [-1, 0]] для пар (X, P)"""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(C: np.ndarray) -> np.ndarray:
    """Симплектические собственные числа по возрастанию (по одному на моду)"""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] % 2:
        raise DimensionError(f"covariance matrix must be square with even size, got {C.shape}")
    omega = symplectic_form(C.shape[0] // 2)
    values = np.sort(np.abs(np.linalg.eigvals(1j * omega @ C)))
    # каждое значение встречается дважды (±ν)
    return values[::2]


def _min_symplectic(C: np.ndarray) -> Optional[float]:
    if C.shape[0] % 2:
        return None
    return float(symplectic_eigenvalues(C)[0])


def physicality_check(C: np.ndarray) -> float:
    """Минимальное симплектическое собственное число; физично, если ≥ 1/2 − slack"""
    nu_min = float(symplectic_eigenvalues(C)[0])
    if nu_min < 0.5 - Config.PHYSICALITY_SLACK:
        logger.debug(f"Unphysical covariance matrix: min symplectic eigenvalue {nu_min:.6e}")
    return nu_min


def is_physical(C: np.ndarray) -> bool:
    return physicality_check(C) >= 0.5 - Config.PHYSICALITY_SLACK
