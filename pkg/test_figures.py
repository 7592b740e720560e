#!/usr/bin/env python3
"""
Качественная форма рисунков на грубых сетках
"""

import numpy as np
import pytest

from lindyn import build_linear_model, evolve_covariance, steady_covariance
from measures import measure_all
from physpar import baseline_config
from sweep import SweepSpec, figure_preset, run_sweep


def preset_frame(name, resolution, full_linearization=False):
    base = baseline_config(full_linearization=full_linearization)
    return run_sweep(figure_preset(name, base=base, resolution=resolution)).to_frame()


def entangled_frame(name, resolution):
    """Сначала без обратного действия фононов, затем с полной линеаризацией"""
    frame = preset_frame(name, resolution)
    if np.nanmax(frame['E_dd']) > 0:
        return frame, False
    return preset_frame(name, resolution, full_linearization=True), True


def first_crossing(x, y, level):
    """Первое пересечение уровня, линейная интерполяция между соседними точками"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    side = np.sign(y - level)
    changes = np.flatnonzero(side[1:] != side[:-1])
    if len(changes) == 0:
        return None
    i = changes[0]
    return x[i] + (level - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])


def test_fig1a_without_squeezing_is_separable():
    frame = preset_frame('fig1a', 5)
    stable = frame[frame['stable']]
    assert len(stable) == len(frame)
    assert (stable['E_dd'] == 0.0).all()


def test_fig1_squeezing_strength_orders_maps():
    strong, full = entangled_frame('fig1c', 11)
    weak = preset_frame('fig1b', 11, full_linearization=full)
    assert np.nanmax(strong['E_dd']) > np.nanmax(weak['E_dd'])


def test_fig2a_entanglement_decays_with_temperature():
    frame, _ = entangled_frame('fig2a', 9)
    for _, family in frame.groupby('lambda[g_a]'):
        values = family.sort_values('T[K]')['E_dd'].to_numpy()
        values = values[~np.isnan(values)]
        assert np.all(np.diff(values) <= 1e-9)
    # самая холодная точка запутана сильнее самой горячей
    coldest = frame[frame['T[K]'] == frame['T[K]'].min()]['E_dd']
    hottest = frame[frame['T[K]'] == frame['T[K]'].max()]['E_dd']
    assert coldest.max() >= hottest.max()


def test_fig4_needs_inter_site_coupling():
    frame, _ = entangled_frame('fig4', 9)
    uncoupled = frame[frame['J[g_a]'] == 0.0]
    assert (uncoupled['E_dd'] == 0.0).all()
    assert np.nanmax(frame['E_dd']) > 0


def test_fig5_measures_positive():
    frame = preset_frame('fig5', 5)
    stable = frame[frame['stable']]
    assert len(stable) > 0
    for column in ('purity', 'S_c', 'S_p'):
        assert (stable[column] > 0).all()
    assert (stable['purity'] <= 1.0 + 1e-12).all()


def test_fig6_starts_from_vacuum():
    frame = preset_frame('fig6', 11)
    first = frame.iloc[0]
    assert first['t[us]'] == 0.0
    assert first['E_dd'] == 0.0
    assert first['purity'] == pytest.approx(1.0)
    assert frame['error'].eq('').all()


def test_fig1b_optimum_location():
    frame = preset_frame('fig1b', 21)
    best = frame.loc[frame['E_dd'].idxmax()]
    assert best['E_dd'] > 0
    # максимум смещён к большим Δ_ac относительно общей точки (ω_b, 0.4ω_b)
    assert best['delta_ac[omega_b]'] == pytest.approx(1.45, abs=0.2)
    assert best['delta_d[omega_b]'] == pytest.approx(0.30, abs=0.2)


def test_fig2a_vanishing_temperature_grows_with_squeezing():
    frame, _ = entangled_frame('fig2a', 41)
    vanishing = []
    for lam, family in sorted(frame.groupby('lambda[g_a]'), key=lambda item: item[0]):
        family = family.sort_values('T[K]')
        assert family['E_dd'].iloc[0] > 0
        log_T = first_crossing(np.log10(family['T[K]']), 2.0 * family['nu_minus'], 1.0)
        assert log_T is not None, f"lambda={lam}: entanglement survives the whole range"
        vanishing.append(log_T)
    assert all(a < b for a, b in zip(vanishing, vanishing[1:]))


def test_fig4_interior_maximum_in_coupling():
    frame, _ = entangled_frame('fig4', 21)
    cold = frame[frame['T[mK]'] == 0.1].sort_values('J[g_a]')
    values = cold['E_dd'].to_numpy()
    best = int(np.nanargmax(values))
    assert values[0] == 0.0
    assert 0 < best < len(values) - 1
    assert values[-1] < values[best]
    assert 0.0 < cold['J[g_a]'].iloc[best] < 2.0


def test_fig5_phase_sync_crossover():
    frame = preset_frame('fig5', 41)
    family = frame[frame['lambda[g_a]'] == 0.05].sort_values('T[K]')
    log_T = first_crossing(np.log10(family['T[K]']), family['S_p'], 1.0)
    assert log_T is not None
    assert 0.1 <= 10 ** log_T <= 0.6

    separable = family[family['E_dd'] == 0.0]
    assert len(separable) > 0
    for column in ('S_c', 'S_p', 'purity'):
        assert (separable[column] > 0).all()


def test_fig6_early_dynamics():
    base = figure_preset('fig6').base
    grid = tuple(float(t) for t in np.linspace(0.0, 0.05e-6, 51))
    frame = run_sweep(SweepSpec(base=base, mode='evolve', time_grid=grid, name='fig6_early')).to_frame()
    assert frame['E_dd'].iloc[0] == 0.0
    assert frame['S_p'].iloc[0] == pytest.approx(1.0)
    # и запутанность, и фазовая синхронизация появляются уже в первые десятки нс
    onset = frame.loc[frame['E_dd'] > 0, 't[us]']
    assert len(onset) > 0 and onset.iloc[0] < 0.05
    crossing = frame.loc[frame['S_p'] > 1.0, 't[us]']
    assert len(crossing) > 0 and crossing.iloc[0] <= 0.01


def test_fig6_approaches_steady_state():
    base = figure_preset('fig6').base
    model, _ = build_linear_model(base)
    steady = measure_all(steady_covariance(model.K, model.L).matrix)
    samples = evolve_covariance(model.K, model.L, t_grid=(0.0, 5e-6, 10e-6), omega_b=base.omega_b)
    late = measure_all(samples[-1].matrix)
    for name in ('E_dd', 'purity', 'S_c', 'S_p'):
        assert getattr(late, name) == pytest.approx(getattr(steady, name), rel=1e-3, abs=1e-9)
