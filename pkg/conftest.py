"""
Общие фикстуры тестов
"""

import math
import os

import numpy as np
import pytest

from config import Config
from physpar import baseline_config

CONFIG_DIR = 'configs'


@pytest.fixture(autouse=True)
def no_log_file(monkeypatch):
    """Тесты не пишут magnomech.log в рабочий каталог"""
    monkeypatch.setattr(Config, 'LOG_FILE', '')


@pytest.fixture
def baseline():
    return baseline_config()


@pytest.fixture
def baseline_path():
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), CONFIG_DIR, 'baseline.cfg')


@pytest.fixture
def driven_path():
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), CONFIG_DIR, 'driven.cfg')


def tmsv_matrix(r: float) -> np.ndarray:
    """
    Двухмодовый сжатый вакуум: X = Y = cosh(2r)/2·I, Z = sinh(2r)/2·diag(−1, 1).
    При таком знаке сжата разность импульсов, S_p = e^{2r}.
    """
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    return np.array([
        [c, 0.0, -s, 0.0],
        [0.0, c, 0.0, s],
        [-s, 0.0, c, 0.0],
        [0.0, s, 0.0, c],
    ])


@pytest.fixture
def tmsv():
    return tmsv_matrix


def embed_block(block: np.ndarray, size: int = 16) -> np.ndarray:
    """Вакуум на остальных модах, блок 4×4 на магнонах"""
    C = 0.5 * np.eye(size)
    C[:4, :4] = block
    return C


@pytest.fixture
def embed():
    return embed_block
