"""
Свипы по параметрам и пресеты рисунков: таблицы мер на сетках и во времени
"""

import itertools
import logging
import math
import multiprocessing as mp
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import SimulatorError, UnknownPresetError, ValidationError
from lindyn import build_linear_model, evolve_covariance, stability, steady_covariance
from measures import measure_all
from physpar import SystemConfig, baseline_config
from units import UnitHandler

logger = logging.getLogger(__name__)

MODES = ('steady', 'evolve')

# Псевдонимы осей -> поля SystemConfig
AXIS_ALIASES = {
    'delta_ac': ('delta_a', 'delta_c'),
    'J': ('J_a', 'J_c'),
    'lambda': ('lam',),
}
AXIS_FIELDS = (
    'omega_b', 'delta_a', 'delta_c', 'delta_d', 'kappa_a', 'kappa_c', 'kappa_d',
    'gamma_b', 'g_a', 'g_c', 'G_db', 'J_a', 'J_c', 'lam', 'theta', 'T',
)

MEASURE_COLUMNS = [
    'E_dd', 'purity', 'S_c', 'S_p', 'nu_minus',
    'min_symplectic',   # всё 16-модовое состояние
    'stable', 'max_real_part', 'residual', 'error',
]
TIME_COLUMN = 't[us]'

# Разрешение сеток по умолчанию
MAP_POINTS = 101
LINE_POINTS = 201
TIME_SAMPLES = 2001


@dataclass(frozen=True)
class Axis:
    name: str
    unit: str
    values: Tuple[float, ...]
    log: bool = False

    @classmethod
    def linspace(cls, name: str, unit: str, start: float, stop: float, num: int) -> 'Axis':
        return cls(name, unit, tuple(float(v) for v in np.linspace(start, stop, num)))

    @classmethod
    def logspace(cls, name: str, unit: str, start: float, stop: float, num: int) -> 'Axis':
        values = np.logspace(math.log10(start), math.log10(stop), num)
        return cls(name, unit, tuple(float(v) for v in values), log=True)

    @property
    def column(self) -> str:
        return f"{self.name}[{self.unit}]"

    @property
    def fields(self) -> Tuple[str, ...]:
        return AXIS_ALIASES.get(self.name, (self.name,))


def _reference_values(config: SystemConfig) -> Dict[str, float]:
    """Параметры базовой точки как единицы осей (g_a, omega_b, ...)"""
    reference = {name: getattr(config, name) for name in AXIS_FIELDS if getattr(config, name) is not None}
    reference['lambda'] = config.lam
    return reference


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    axes: Tuple[Axis, ...] = ()
    mode: str = 'steady'
    time_grid: Tuple[float, ...] = ()    # секунды
    output: Optional[str] = None
    name: str = 'sweep'

    def __post_init__(self):
        violations = self.violations()
        if violations:
            raise ValidationError(violations)

    def violations(self) -> List[str]:
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode: expected one of {', '.join(MODES)}, got {self.mode!r}")
        low = 0 if self.mode == 'evolve' else 1
        if not low <= len(self.axes) <= 2:
            problems.append(f"axes: {self.mode} sweeps take {low} to 2 axes, got {len(self.axes)}")

        reference = _reference_values(self.base)
        for axis in self.axes:
            usable = True
            for name in axis.fields:
                if name not in AXIS_FIELDS:
                    problems.append(f"{axis.name}: not a sweepable parameter")
                    usable = False
            try:
                UnitHandler.axis_factor(axis.unit, reference)
            except KeyError as e:
                problems.append(f"{axis.name}: {e.args[0]}")
                usable = False
            if not axis.values:
                problems.append(f"{axis.name}: empty grid")
            elif len(axis.values) > 1:
                steps = np.diff(axis.values)
                if not (np.all(steps > 0) or np.all(steps < 0)):
                    problems.append(f"{axis.name}: grid must be strictly monotone")
            if usable:
                problems.extend(_value_violations(self.base, axis))

        if self.mode == 'evolve':
            grid = np.asarray(self.time_grid, dtype=float)
            if grid.size == 0:
                problems.append("time_grid: evolve mode needs a time grid")
            elif grid[0] != 0 or np.any(np.diff(grid) <= 0):
                problems.append("time_grid: must start at 0 and increase strictly")
        return problems

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(axis.values) for axis in self.axes)

    def points(self) -> List[Tuple[int, ...]]:
        """Индексы точек сетки; первая ось внешняя"""
        return list(itertools.product(*(range(n) for n in self.shape)))

    @property
    def columns(self) -> List[str]:
        axis_columns = [axis.column for axis in self.axes]
        if self.mode == 'evolve':
            axis_columns.append(TIME_COLUMN)
        return axis_columns + MEASURE_COLUMNS

    def describe(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'mode': self.mode,
            'axes': [
                {'name': axis.name, 'unit': axis.unit, 'points': len(axis.values),
                 'first': axis.values[0], 'last': axis.values[-1], 'log': axis.log}
                for axis in self.axes
            ],
            'time_grid': ({'points': len(self.time_grid), 'start_s': self.time_grid[0],
                           'stop_s': self.time_grid[-1]} if self.time_grid else None),
        }


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def columns(self) -> List[str]:
        return self.spec.columns

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    @property
    def failed(self) -> int:
        return sum(1 for row in self.rows if row.get('error'))


# ===== ВЫЧИСЛЕНИЕ ТОЧКИ =====

def apply_axes(base: SystemConfig, axes: Sequence[Axis], values: Sequence[float]) -> SystemConfig:
    """Подставить значения осей (в единицах оси) в базовую конфигурацию"""
    reference = _reference_values(base)
    changes: Dict[str, float] = {}
    for axis, value in zip(axes, values):
        internal = value * UnitHandler.axis_factor(axis.unit, reference)
        for name in axis.fields:
            changes[name] = internal
    return base.with_updates(**changes) if changes else base


def _value_violations(base: SystemConfig, axis: Axis) -> List[str]:
    """Значения оси, при которых конфигурация не проходит проверку (первое нарушение)"""
    for value in axis.values:
        try:
            apply_axes(base, (axis,), (value,))
        except ValidationError as e:
            return [f"{axis.name}={value:g} {axis.unit}: {violation}" for violation in e.violations]
    return []


def _blank_measures() -> Dict[str, Any]:
    return {'E_dd': math.nan, 'purity': math.nan, 'S_c': math.nan, 'S_p': math.nan,
            'nu_minus': math.nan, 'min_symplectic': math.nan, 'stable': False, 'max_real_part': math.nan,
            'residual': math.nan, 'error': ''}


def evaluate_point(spec: SweepSpec, index: Tuple[int, ...]) -> List[Dict[str, Any]]:
    """Одна точка сетки: средние поля (если есть накачка) -> K, L -> меры"""
    values = [axis.values[i] for axis, i in zip(spec.axes, index)]
    prefix = {axis.column: value for axis, value in zip(spec.axes, values)}
    times = spec.time_grid if spec.mode == 'evolve' else (None,)

    def rows_with(updates: Dict[str, Any]) -> List[Dict[str, Any]]:
        rows = []
        for t in times:
            row = dict(prefix)
            if spec.mode == 'evolve':
                row[TIME_COLUMN] = t * 1e6
            row.update(_blank_measures())
            row.update(updates)
            rows.append(row)
        return rows

    try:
        config = apply_axes(spec.base, spec.axes, values)
        model, _ = build_linear_model(config)
        report = stability(model.K)
        status = {'stable': report.stable, 'max_real_part': report.max_real_part}

        if spec.mode == 'steady':
            if not report.stable:
                logger.warning(f"⚠️ Unstable point {prefix}: max real part {report.max_real_part:.3e}")
                return rows_with(status)
            covariance = steady_covariance(model.K, model.L)
            row = rows_with(status)[0]
            row.update(measure_all(covariance.matrix).as_dict())
            row['min_symplectic'] = covariance.min_symplectic
            row['residual'] = covariance.residual
            return [row]

        omega_b = max(config.site(1).omega_b, config.site(2).omega_b)
        samples = evolve_covariance(model.K, model.L, None, spec.time_grid, omega_b)
        rows = rows_with(status)
        for row, sample in zip(rows, samples):
            row.update(measure_all(sample.matrix).as_dict())
            row['min_symplectic'] = sample.min_symplectic
        return rows

    except SimulatorError as e:
        logger.error(f"❌ Point {prefix} failed: {e.message}")
        return rows_with({'error': f"{e.code.value}: {e.message}"})


class _Progress:
    """Счётчик выполненных точек (лог каждые 10 %)"""

    def __init__(self, total: int, name: str):
        self.total = total
        self.name = name
        self.done = 0
        self._next_mark = 10

    def advance(self):
        self.done += 1
        percent = 100 * self.done // self.total
        if percent >= self._next_mark:
            logger.info(f"📈 {self.name}: {self.done}/{self.total} points ({percent}%)")
            self._next_mark = (percent // 10 + 1) * 10


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Все точки сетки; порядок строк не зависит от числа процессов"""
    indices = spec.points() or [()]
    task = partial(evaluate_point, spec)
    progress = _Progress(len(indices), spec.name)
    result = SweepResult(spec=spec)

    logger.info(f"🚀 Sweep '{spec.name}' ({spec.mode}): {len(indices)} points, {workers} worker(s)")

    if workers <= 1 or len(indices) == 1:
        chunks: Iterable[List[Dict[str, Any]]] = map(task, indices)
        for rows in chunks:
            result.rows.extend(rows)
            progress.advance()
    else:
        chunksize = max(1, len(indices) // (workers * 8))
        with mp.Pool(workers) as pool:
            # imap сохраняет порядок задач
            for rows in pool.imap(task, indices, chunksize=chunksize):
                result.rows.extend(rows)
                progress.advance()

    logger.info(f"✅ Sweep '{spec.name}' finished: {len(result.rows)} rows, {result.failed} failed")
    return result


# ===== ПРЕСЕТЫ РИСУНКОВ =====

FIGURES = ('fig1a', 'fig1b', 'fig1c', 'fig2a', 'fig2b', 'fig4', 'fig5', 'fig6')

FIG1_LAMBDA = {'fig1a': 0.0, 'fig1b': 0.005, 'fig1c': 0.05}   # в единицах g_a
FIG2A_LAMBDAS = (0.02, 0.035, 0.05)
FIG4_TEMPERATURES_MK = (0.1, 100.0, 200.0)
FIG5_LAMBDAS = (0.0, 0.025, 0.05)


def _figure_point(base: SystemConfig, lam_over_g: float) -> SystemConfig:
    """Общая точка подписей: Δ_a=Δ_c=ω_b, Δ_d=0.4ω_b, J=0.5g_a, T=0.1 мК"""
    return base.with_updates(
        delta_a=base.omega_b,
        delta_c=base.omega_b,
        delta_d=0.4 * base.omega_b,
        J_a=0.5 * base.g_a,
        J_c=0.5 * base.g_a,
        T=0.1e-3,
        lam=lam_over_g * base.g_a,
    )


def figure_preset(name: str, base: Optional[SystemConfig] = None,
                  resolution: Optional[int] = None) -> SweepSpec:
    """SweepSpec для рисунка; resolution заменяет число точек непрерывных осей"""
    if name not in FIGURES:
        raise UnknownPresetError(f"unknown figure preset '{name}' (expected one of: {', '.join(FIGURES)})",
                                 preset=name)
    base = base or baseline_config()
    map_points = resolution or MAP_POINTS
    line_points = resolution or LINE_POINTS
    time_samples = resolution or TIME_SAMPLES

    if name in FIG1_LAMBDA:
        axes = (
            Axis.linspace('delta_ac', 'omega_b', 0.0, 2.0, map_points),
            Axis.linspace('delta_d', 'omega_b', 0.0, 2.0, map_points),
        )
        return SweepSpec(base=_figure_point(base, FIG1_LAMBDA[name]), axes=axes, name=name)

    if name == 'fig2a':
        axes = (
            Axis('lambda', 'g_a', FIG2A_LAMBDAS),
            Axis.logspace('T', 'K', 1e-4, 1.0, line_points),
        )
        return SweepSpec(base=_figure_point(base, 0.05), axes=axes, name=name)

    if name == 'fig2b':
        axes = (Axis.linspace('lambda', 'g_a', 0.0, 0.06, line_points),)
        return SweepSpec(base=_figure_point(base, 0.05), axes=axes, name=name)

    if name == 'fig4':
        axes = (
            Axis('T', 'mK', FIG4_TEMPERATURES_MK),
            Axis.linspace('J', 'g_a', 0.0, 2.0, line_points),
        )
        return SweepSpec(base=_figure_point(base, 0.05), axes=axes, name=name)

    if name == 'fig5':
        axes = (
            Axis('lambda', 'g_a', FIG5_LAMBDAS),
            Axis.logspace('T', 'K', 1e-4, 1.0, line_points),
        )
        return SweepSpec(base=_figure_point(base, 0.05), axes=axes, name=name)

    # fig6: эволюция из вакуума на [0, 1 мкс]
    time_grid = tuple(float(t) for t in np.linspace(0.0, 1e-6, time_samples))
    return SweepSpec(base=_figure_point(base, 0.05), mode='evolve', time_grid=time_grid, name=name)
