#!/usr/bin/env python3
"""
Тесты записи результатов
"""

import json
import os

import numpy as np
import pytest

from errors import OutputError
from lindyn import ORDERING
from physpar import config_hash
from storage import ResultStore
from sweep import Axis, SweepSpec, run_sweep


@pytest.fixture
def store(tmp_path):
    return ResultStore(str(tmp_path / 'out'))


@pytest.fixture
def small_result(baseline):
    spec = SweepSpec(base=baseline, axes=(Axis('lambda', 'g_a', (0.0, 0.05, 3.0)),), name='small')
    return run_sweep(spec)


def test_csv_header_and_body(store, small_result, baseline):
    csv_path, json_path = store.write_sweep(small_result)
    with open(csv_path, encoding='utf-8') as handle:
        first = handle.readline().strip()
    assert first.startswith(f"# config_hash={config_hash(baseline)} version=")

    frame = ResultStore.read_frame(csv_path)
    assert list(frame.columns)[:3] == ['lambda[g_a]', 'E_dd', 'purity']
    assert len(frame) == 3
    # неустойчивая точка: пустые поля мер
    assert np.isnan(frame['E_dd'].iloc[2])
    assert not frame['stable'].iloc[2]

    with open(json_path, encoding='utf-8') as handle:
        sidecar = json.load(handle)
    assert sidecar['config_hash'] == config_hash(baseline)
    assert sidecar['rows'] == 3
    assert sidecar['sweep']['axes'][0]['name'] == 'lambda'
    assert sidecar['config']['omega_b'] == baseline.omega_b


def test_rerun_writes_identical_bytes(store, baseline):
    spec = SweepSpec(base=baseline, axes=(Axis('T', 'mK', (0.1, 50.0)),), name='repeat')
    first_path, _ = store.write_sweep(run_sweep(spec))
    with open(first_path, 'rb') as handle:
        first = handle.read()
    second_path, _ = store.write_sweep(run_sweep(spec))
    with open(second_path, 'rb') as handle:
        assert handle.read() == first


def test_array_dump_roundtrip(store, baseline):
    K = np.arange(256, dtype=float).reshape(16, 16) / 7.0
    L = np.diag(np.linspace(0.0, 1.0, 16))
    path = store.dump_arrays([('K', K), ('L', L)], 'model.bin', config=baseline, ordering=ORDERING)

    header, arrays = ResultStore.load_arrays(path)
    assert header['ordering'] == list(ORDERING)
    assert header['config_hash'] == config_hash(baseline)
    assert header['arrays'][0]['order'] == 'F'
    np.testing.assert_array_equal(arrays['K'], K)
    np.testing.assert_array_equal(arrays['L'], L)

    # полезная нагрузка по столбцам
    with open(path, 'rb') as handle:
        handle.readline()
        raw = handle.read(16)
    np.testing.assert_array_equal(np.frombuffer(raw, dtype='<f8'), [K[0, 0], K[1, 0]])


def test_atomic_write_cleans_up(store):
    with pytest.raises(RuntimeError):
        with store.atomic_path('broken.csv') as tmp_path:
            with open(tmp_path, 'w') as handle:
                handle.write('partial')
            raise RuntimeError('boom')
    assert os.listdir(store.output_dir) == []


def test_output_dir_must_be_directory(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('x')
    with pytest.raises(OutputError) as excinfo:
        ResultStore(str(blocker))
    assert excinfo.value.exit_code == 3


def test_bad_dump_format(tmp_path):
    path = tmp_path / 'other.bin'
    path.write_bytes(b'{"format": "something-else", "arrays": []}\n')
    with pytest.raises(OutputError):
        ResultStore.load_arrays(str(path))
