#!/usr/bin/env python3
"""
Тесты гауссовых мер на аналитических состояниях
"""

import math

import numpy as np
import pytest
import scipy.linalg

from errors import DimensionError, UnphysicalStateError
from lindyn import build_linear_model, steady_covariance, symplectic_eigenvalues
from measures import (SEPARABILITY_SLACK, TwoModeCM, complete_sync, extract_two_mode, log_negativity,
                      measure_all, negativity_in_base, partial_transpose, phase_sync, purity, smallest_pt_eigenvalue)


@pytest.mark.parametrize('r', [0.1, 0.3, 0.5])
def test_two_mode_squeezed_vacuum(r, tmsv, embed):
    result = measure_all(embed(tmsv(r)))
    assert result.E_dd == pytest.approx(2 * r, abs=1e-12)
    assert result.purity == pytest.approx(1.0, abs=1e-12)
    assert result.S_c == pytest.approx(1 / math.cosh(2 * r), rel=1e-12)
    assert result.S_p == pytest.approx(math.exp(2 * r), rel=1e-12)
    assert result.nu_minus == pytest.approx(math.exp(-2 * r) / 2, rel=1e-10)


def test_vacuum_is_exact(embed):
    result = measure_all(embed(0.5 * np.eye(4)))
    assert (result.E_dd, result.purity, result.S_c, result.S_p) == (0.0, 1.0, 1.0, 1.0)


def test_thermal_product_state():
    n = 0.7
    cm = TwoModeCM.from_matrix((n + 0.5) * np.eye(4))
    assert log_negativity(cm) == 0.0
    assert purity(cm) == pytest.approx(1 / (4 * (n + 0.5) ** 2))
    assert complete_sync(cm) == pytest.approx(1 / (2 * (n + 0.5)))
    assert phase_sync(cm) == pytest.approx(1 / (2 * (n + 0.5)))


def test_partial_transpose_spectrum_matches_closed_form(tmsv):
    cm = TwoModeCM.from_matrix(tmsv(0.4))
    pt_spectrum = symplectic_eigenvalues(partial_transpose(cm).matrix)
    assert pt_spectrum[0] == pytest.approx(smallest_pt_eigenvalue(cm), rel=1e-10)
    # исходное состояние чистое
    np.testing.assert_allclose(symplectic_eigenvalues(cm.matrix), [0.5, 0.5], rtol=1e-12)


def test_negativity_bases(tmsv):
    E = log_negativity(TwoModeCM.from_matrix(tmsv(0.3)))
    assert negativity_in_base(E, 'e') == E
    assert negativity_in_base(E, '2') == pytest.approx(E / math.log(2))
    with pytest.raises(ValueError):
        negativity_in_base(E, '10')


def test_extract_two_mode():
    C = np.arange(256, dtype=float).reshape(16, 16)
    C = C + C.T
    cm = extract_two_mode(C, (1, 3))
    np.testing.assert_array_equal(cm.X, C[2:4, 2:4])
    np.testing.assert_array_equal(cm.Y, C[6:8, 6:8])
    np.testing.assert_array_equal(cm.Z, C[2:4, 6:8])
    with pytest.raises(IndexError):
        extract_two_mode(C, (0, 8))
    with pytest.raises(IndexError):
        extract_two_mode(C, (2, 2))


def test_wrong_block_size():
    with pytest.raises(DimensionError):
        TwoModeCM.from_matrix(np.eye(3))


def test_unphysical_block_rejected(embed):
    with pytest.raises(UnphysicalStateError) as excinfo:
        measure_all(embed(0.1 * np.eye(4)))
    assert excinfo.value.exit_code == 4


def test_baseline_magnons_entangled(baseline):
    """Сжатие магнонов при оптимальных отстройках запутывает узлы"""
    values = []
    for config in (baseline, baseline.with_updates(full_linearization=True)):
        model, _ = build_linear_model(config)
        values.append(measure_all(steady_covariance(model.K, model.L).matrix).E_dd)
    assert max(values) > 0


def test_no_squeezing_no_entanglement(baseline):
    model, _ = build_linear_model(baseline.with_updates(lam=0.0))
    result = measure_all(steady_covariance(model.K, model.L).matrix)
    assert result.E_dd == 0.0


def test_uncoupled_sites_are_separable(baseline):
    model, _ = build_linear_model(baseline.with_updates(J_a=0.0, J_c=0.0))
    result = measure_all(steady_covariance(model.K, model.L).matrix)
    assert result.E_dd == 0.0
    assert result.purity > 0 and result.S_c > 0 and result.S_p > 0


def test_near_separable_threshold(tmsv, embed):
    assert measure_all(embed(tmsv(1e-11))).E_dd == 0.0
    result = measure_all(embed(tmsv(1e-6)))
    assert result.E_dd == pytest.approx(2e-6, rel=1e-6)
    # отсечка меняет E_dd не больше чем на величину порядка slack
    assert -math.log(1 - SEPARABILITY_SLACK) < 2e-9


def test_identity_state_purity():
    # две тепловые моды с N = 1/2
    cm = TwoModeCM.from_matrix(np.eye(4))
    assert purity(cm) == pytest.approx(0.25, rel=1e-14)
    assert log_negativity(cm) == 0.0


def _rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _local_symplectic(rng):
    blocks = []
    for _ in range(2):
        squeeze = rng.uniform(-0.5, 0.5)
        blocks.append(_rotation(rng.uniform(0, 2 * math.pi))
                      @ np.diag([math.exp(squeeze), math.exp(-squeeze)])
                      @ _rotation(rng.uniform(0, 2 * math.pi)))
    return scipy.linalg.block_diag(*blocks)


def _random_state(rng):
    nu1, nu2 = 0.5 + rng.uniform(0.0, 1.5, size=2)
    eye, flip = np.eye(2), np.diag([1.0, -1.0])
    theta, r = rng.uniform(0, math.pi), rng.uniform(0.0, 1.0)
    splitter = np.block([[math.cos(theta) * eye, math.sin(theta) * eye],
                         [-math.sin(theta) * eye, math.cos(theta) * eye]])
    squeezer = np.block([[math.cosh(r) * eye, math.sinh(r) * flip],
                         [math.sinh(r) * flip, math.cosh(r) * eye]])
    S = _local_symplectic(rng) @ splitter @ squeezer @ _local_symplectic(rng)
    return S @ np.diag([nu1, nu1, nu2, nu2]) @ S.T


def test_negativity_invariant_under_local_operations(embed):
    rng = np.random.default_rng(7)
    for _ in range(20):
        C = _random_state(rng)
        S = _local_symplectic(rng)
        before = measure_all(embed(C))
        after = measure_all(embed(S @ C @ S.T))
        assert after.E_dd == pytest.approx(before.E_dd, rel=1e-8, abs=1e-10)
        assert after.purity == pytest.approx(before.purity, rel=1e-8)


def test_complete_sync_bounded_by_phase_sync(embed):
    rng = np.random.default_rng(11)
    for _ in range(50):
        result = measure_all(embed(_random_state(rng)))
        assert 0 < result.S_c <= 2 * result.S_p
        assert 0 < result.purity <= 1 + 1e-12
