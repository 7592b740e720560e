#!/usr/bin/env python3
"""
Storage module: CSV/JSON results and binary matrix dumps
"""

import json
import logging
import os
import subprocess
from contextlib import contextmanager
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import Config
from errors import OutputError
from physpar import SystemConfig, config_hash

logger = logging.getLogger(__name__)

DUMP_FORMAT = 'magnomech-arrays/1'


def version_string() -> str:
    """Версия пакета + git describe, если репозиторий доступен"""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        described = subprocess.run(
            ['git', 'describe', '--always', '--dirty'],
            cwd=here, capture_output=True, text=True, timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return Config.VERSION
    if described.returncode != 0 or not described.stdout.strip():
        return Config.VERSION
    return f"{Config.VERSION}+{described.stdout.strip()}"


class ResultStore:
    def __init__(self, output_dir: Optional[str] = None):
        """Каталог результатов создаётся при первом обращении"""
        self.output_dir = output_dir or Config.OUTPUT_DIR
        self.version = version_string()
        self.ensure_dir()

    def ensure_dir(self):
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as e:
            raise OutputError(f"cannot create output directory: {e}", path=self.output_dir)
        if not os.access(self.output_dir, os.W_OK):
            raise OutputError("output directory is not writable", path=self.output_dir)

    def path_for(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    @contextmanager
    def atomic_path(self, filename: str):
        """
        Контекстный менеджер для записи файла.
        Пишем во временный файл рядом и переименовываем при успехе.
        """
        final_path = self.path_for(filename)
        tmp_path = f"{final_path}.tmp"
        try:
            yield tmp_path
            os.replace(tmp_path, final_path)
        except OSError as e:
            self._discard(tmp_path)
            logger.error(f"Output error: {e}")
            raise OutputError(f"cannot write {final_path}: {e}", path=final_path)
        except Exception:
            self._discard(tmp_path)
            raise

    @staticmethod
    def _discard(path: str):
        if os.path.exists(path):
            os.remove(path)

    # ===== ТАБЛИЦЫ =====

    def write_frame(self, frame: pd.DataFrame, filename: str, config: SystemConfig) -> str:
        """CSV: строка '# config_hash=... version=...', затем заголовок и данные"""
        header = f"# config_hash={config_hash(config)} version={self.version}\n"
        with self.atomic_path(filename) as tmp_path:
            with open(tmp_path, 'w', encoding='utf-8', newline='') as handle:
                handle.write(header)
                frame.to_csv(handle, index=False, float_format='%.17g', na_rep='', lineterminator='\n')
        path = self.path_for(filename)
        logger.info(f"💾 Table written: {path} ({len(frame)} rows)")
        return path

    def write_json(self, payload: Dict[str, Any], filename: str) -> str:
        with self.atomic_path(filename) as tmp_path:
            with open(tmp_path, 'w', encoding='utf-8') as handle:
                json.dump(payload, handle, indent=2, sort_keys=True, default=_json_default)
                handle.write('\n')
        path = self.path_for(filename)
        logger.info(f"💾 JSON written: {path}")
        return path

    def sidecar(self, config: SystemConfig, **extra: Any) -> Dict[str, Any]:
        payload = {
            'config': config.to_dict(),
            'config_hash': config_hash(config),
            'units': 'rad/s, K, s',
            'version': self.version,
        }
        payload.update(extra)
        return payload

    def write_sweep(self, result, stem: Optional[str] = None) -> Tuple[str, str]:
        """CSV + JSON-описание для SweepResult"""
        spec = result.spec
        stem = stem or spec.name
        frame = result.to_frame()
        csv_path = self.write_frame(frame, f"{stem}.csv", spec.base)
        json_path = self.write_json(
            self.sidecar(spec.base, sweep=spec.describe(), columns=list(frame.columns), rows=len(frame)),
            f"{stem}.json",
        )
        return csv_path, json_path

    @staticmethod
    def read_frame(path: str) -> pd.DataFrame:
        try:
            return pd.read_csv(path, comment='#')
        except OSError as e:
            raise OutputError(f"cannot read {path}: {e}", path=path)

    # ===== БИНАРНЫЕ МАТРИЦЫ =====

    def dump_arrays(self, arrays: Sequence[Tuple[str, np.ndarray]], filename: str,
                    config: Optional[SystemConfig] = None, ordering: Sequence[str] = ()) -> str:
        """
        Заголовок: одна строка JSON, затем массивы float64 little-endian
        по столбцам (порядок Fortran) подряд.
        """
        entries: List[Dict[str, Any]] = []
        payloads: List[bytes] = []
        offset = 0
        for name, array in arrays:
            data = np.asarray(array, dtype='<f8')
            raw = data.tobytes(order='F')
            entries.append({'name': name, 'shape': list(data.shape), 'dtype': '<f8',
                            'order': 'F', 'offset': offset, 'nbytes': len(raw)})
            payloads.append(raw)
            offset += len(raw)

        header = {
            'format': DUMP_FORMAT,
            'ordering': list(ordering),
            'units': 'rad/s',
            'config_hash': config_hash(config) if config is not None else None,
            'version': self.version,
            'arrays': entries,
        }

        with self.atomic_path(filename) as tmp_path:
            with open(tmp_path, 'wb') as handle:
                handle.write(json.dumps(header, sort_keys=True).encode('utf-8'))
                handle.write(b'\n')
                for raw in payloads:
                    handle.write(raw)
        path = self.path_for(filename)
        logger.info(f"💾 Arrays dumped: {path} ({', '.join(name for name, _ in arrays)})")
        return path

    @staticmethod
    def load_arrays(path: str) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
        try:
            with open(path, 'rb') as handle:
                header = json.loads(handle.readline().decode('utf-8'))
                body = handle.read()
        except (OSError, ValueError) as e:
            raise OutputError(f"cannot read array dump {path}: {e}", path=path)

        if header.get('format') != DUMP_FORMAT:
            raise OutputError(f"unsupported dump format {header.get('format')!r}", path=path)

        arrays = {}
        for entry in header['arrays']:
            chunk = body[entry['offset']:entry['offset'] + entry['nbytes']]
            flat = np.frombuffer(chunk, dtype=entry['dtype'])
            arrays[entry['name']] = flat.reshape(entry['shape'], order=entry['order']).astype(float)
        return header, arrays


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
