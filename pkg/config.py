import logging
import os
import sys
from logging.handlers import RotatingFileHandler

import psutil
from dotenv import load_dotenv

load_dotenv()

class Config:
    VERSION = '1.0.0'

    # Логирование
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE', 'magnomech.log')
    LOG_MAX_SIZE = int(os.getenv('LOG_MAX_SIZE', '10485760'))  # 10MB
    LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', '5'))

    # Вывод результатов
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'out')
    LOG_BASE = os.getenv('LOG_BASE', 'e')  # основание логарифма для печати E_dd

    # Параллельные свипы (0 = по числу физических ядер)
    WORKERS = int(os.getenv('WORKERS', '0'))

    # Численные допуски
    LYAPUNOV_TOLERANCE = float(os.getenv('LYAPUNOV_TOLERANCE', '1e-10'))
    PHYSICALITY_SLACK = float(os.getenv('PHYSICALITY_SLACK', '1e-9'))
    CONDITION_WARNING = float(os.getenv('CONDITION_WARNING', '1e12'))
    ODE_STEP_FACTOR = float(os.getenv('ODE_STEP_FACTOR', '0.05'))

    # Системные настройки
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

    @classmethod
    def validate(cls):
        """Проверка конфигурации"""
        if cls.DEBUG:
            cls.LOG_LEVEL = 'DEBUG'

        cls.check_log_level(cls.LOG_LEVEL)

        if cls.LOG_BASE not in ('e', '2'):
            raise ValueError(f"LOG_BASE must be 'e' or '2', got {cls.LOG_BASE!r}")

        if cls.WORKERS < 0:
            raise ValueError("WORKERS must be >= 0")

        if cls.ODE_STEP_FACTOR <= 0:
            raise ValueError("ODE_STEP_FACTOR must be positive")

    @staticmethod
    def check_log_level(level: str):
        if not isinstance(logging.getLevelName(str(level).upper()), int):
            raise ValueError(f"Unknown LOG_LEVEL: {level}")

    @classmethod
    def default_workers(cls) -> int:
        """Число процессов для свипа"""
        if cls.WORKERS > 0:
            return cls.WORKERS
        return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1

    @classmethod
    def setup_logging(cls, level: str = None):
        """Файл с ротацией + stderr (stdout занят результатами)"""
        handlers = [logging.StreamHandler(sys.stderr)]
        if cls.LOG_FILE:
            handlers.append(RotatingFileHandler(
                cls.LOG_FILE,
                maxBytes=cls.LOG_MAX_SIZE,
                backupCount=cls.LOG_BACKUP_COUNT,
            ))

        logging.basicConfig(
            level=getattr(logging, (level or cls.LOG_LEVEL).upper()),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=handlers,
            force=True,
        )
