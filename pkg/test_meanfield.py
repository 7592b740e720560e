#!/usr/bin/env python3
"""
Тесты средних полей и эффективной связи
"""

import dataclasses
import json
import math

import numpy as np
import pytest

from errors import MissingDriveError, SingularSystemError
from meanfield import (calibrate_bare_coupling, effective_coupling, resolve_couplings,
                       solve_operating_point)
from physpar import DriveSpec, baseline_drive, load_config
from units import TWO_PI


@pytest.fixture
def driven(baseline):
    return baseline.with_updates(G_db=None, drive=baseline_drive(g_db_bare=TWO_PI * 2.5e-3))


def test_direct_path_needs_no_mean_field(baseline):
    G, delta_d, point = resolve_couplings(baseline)
    assert G == (baseline.G_db, baseline.G_db)
    assert delta_d is None and point is None
    with pytest.raises(MissingDriveError):
        solve_operating_point(baseline)


def test_operating_point_solves_equations(driven):
    point = solve_operating_point(driven)
    assert point.residual < 1e-10
    # одинаковые узлы, накачка полостей выключена
    assert point.d1 == pytest.approx(point.d2, rel=1e-10)
    assert point.G1 == pytest.approx(1j * math.sqrt(2) * driven.drive.g_db_bare * point.d1)
    assert point.q1 == pytest.approx(-driven.drive.g_db_bare * abs(point.d1) ** 2 / driven.omega_b)


def test_isolated_magnon_closed_form(driven):
    # без связей и сжатия: <d> = Ω / (iΔ_d + κ_d)
    config = driven.with_updates(g_a=0.0, g_c=0.0, lam=0.0)
    point = solve_operating_point(config)
    Omega = config.drive.rabi(1)
    expected = Omega / (1j * config.delta_d + config.kappa_d)
    assert point.d1 == pytest.approx(expected, rel=1e-12)
    assert abs(point.a1) <= 1e-12 * abs(point.d1)
    assert abs(point.c1) <= 1e-12 * abs(point.d1)


def test_effective_coupling_is_real_magnitude(driven):
    point = solve_operating_point(driven)
    info = effective_coupling(point, driven)
    assert info.G[0] == pytest.approx(abs(point.G1), rel=1e-12)
    assert -math.pi <= info.phase_rotation[0] <= math.pi
    # после поворота фаза <d> равна −π/2
    rotated = point.d1 * np.exp(-1j * info.phase_rotation[0])
    assert np.angle(rotated) == pytest.approx(-math.pi / 2, abs=1e-12)


def test_calibration_hits_target(driven):
    target = TWO_PI * 0.1e6
    g_db = calibrate_bare_coupling(driven, target)
    calibrated = driven.with_updates(drive=dataclasses.replace(driven.drive, g_db_bare=g_db))
    G, _, _ = resolve_couplings(calibrated)
    assert G[0] == pytest.approx(target, rel=1e-10)
    assert G[1] == pytest.approx(target, rel=1e-10)


def test_cavity_drive_breaks_site_symmetry(driven):
    drive = DriveSpec(B0=driven.drive.B0, sphere_diameter=driven.drive.sphere_diameter,
                      g_db_bare=driven.drive.g_db_bare, E=TWO_PI * 1e9)
    point = solve_operating_point(driven.with_updates(drive=drive))
    assert point.a1 != pytest.approx(point.a2)


def test_meanfield_shift_converges(driven):
    config = driven.with_updates(meanfield_shift=True)
    G, delta_d, point = resolve_couplings(config)
    assert point.iterations > 1
    shifted = config.delta_d + config.drive.g_db_bare * point.q1
    assert delta_d[0] == pytest.approx(shifted, rel=1e-9)


def test_singular_system(baseline):
    config = baseline.with_updates(
        G_db=None, drive=baseline_drive(),
        delta_a=0.0, delta_c=0.0, delta_d=0.0,
        kappa_a=0.0, kappa_c=0.0, kappa_d=0.0,
        g_a=0.0, g_c=0.0, J_a=0.0, J_c=0.0, lam=0.0,
    )
    with pytest.raises(SingularSystemError) as excinfo:
        solve_operating_point(config)
    assert excinfo.value.exit_code == 4


def test_operating_point_json(driven):
    payload = json.loads(solve_operating_point(driven).to_json())
    assert set(payload['d1']) == {'re', 'im', 'abs'}
    assert payload["residual"] < 1e-10


def test_driven_file_reaches_target_coupling(driven_path):
    config = load_config(driven_path)
    target = TWO_PI * 0.1e6
    G, _, point = resolve_couplings(config)
    assert G[0] == pytest.approx(target, rel=1e-3)
    assert G[1] == pytest.approx(target, rel=1e-3)
    assert calibrate_bare_coupling(config, target) == pytest.approx(config.drive.g_db_bare, rel=1e-3)


def test_amplitudes_scale_with_drive(driven):
    k = 3.0
    drive = dataclasses.replace(driven.drive, Omega=TWO_PI * 1e12, E=TWO_PI * 1e9)
    scaled = dataclasses.replace(drive, Omega=k * drive.Omega, E=k * drive.E)
    first = solve_operating_point(driven.with_updates(drive=drive))
    second = solve_operating_point(driven.with_updates(drive=scaled))
    for name in ('a1', 'a2', 'c1', 'c2', 'd1', 'd2', 'G1', 'G2'):
        assert getattr(second, name) == pytest.approx(k * getattr(first, name), rel=1e-8)
    # смещение фонона квадратично по амплитуде
    assert second.q1 == pytest.approx(k ** 2 * first.q1, rel=1e-8)
    assert second.q2 == pytest.approx(k ** 2 * first.q2, rel=1e-8)


def test_undriven_point_is_zero(driven):
    drive = dataclasses.replace(driven.drive, Omega=0.0, E=0.0)
    point = solve_operating_point(driven.with_updates(drive=drive))
    for name in ('a1', 'a2', 'c1', 'c2', 'd1', 'd2', 'G1', 'G2'):
        assert getattr(point, name) == 0
    assert point.q1 == 0 and point.q2 == 0
    assert tuple(effective_coupling(point, driven).G) == (0.0, 0.0)
