"""
Физические параметры двухузловой магномеханической системы

Все частотоподобные величины хранятся в рад/с, время в секундах.
Перевод из "/2π Гц" делает только слой конфигурации.
"""

import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from scipy.constants import hbar as HBAR, k as K_B

from errors import ConfigParseError, DomainError, ValidationError
from units import TWO_PI, UnitHandler
from utils.config_parser import ConfigFileParser, RawEntry
from utils.validators import Validators

logger = logging.getLogger(__name__)

# Константы YIG
DEFAULT_RHO_SPIN = 4.22e27                 # м^-3
DEFAULT_GYROMAGNETIC = TWO_PI * 28e9       # рад/(с·Тл)
SPIN_NUMBER = 5 / 2                        # Fe3+, только для вывода Ω
DEFAULT_MODE_FREQUENCY = TWO_PI * 10e9     # ω_a, ω_c, ω_d по умолчанию

# Показатель экспоненты, выше которого заселённость считается нулём
_EXPONENT_CUTOFF = 700.0

# Параметры, которые могут различаться на узлах 1 и 2
SITE_KEYS = (
    'omega_b', 'delta_a', 'delta_c', 'delta_d',
    'kappa_a', 'kappa_c', 'kappa_d', 'gamma_b',
    'g_a', 'g_c', 'G_db', 'lam',
    'omega_a', 'omega_c', 'omega_d',
)

RATE_KEYS = ('kappa_a', 'kappa_c', 'kappa_d', 'gamma_b', 'g_a', 'g_c', 'lam', 'J_a', 'J_c')


# ===== ПРОИЗВОДНЫЕ ВЕЛИЧИНЫ =====

def thermal_occupation(omega: float, T: float) -> float:
    """Равновесная тепловая заселённость моды [exp(ħω/k_B T) − 1]^-1"""
    if not omega > 0:
        raise DomainError(f"thermal_occupation: omega must be > 0 (got {omega})", omega=omega)
    if not T >= 0:
        raise DomainError(f"thermal_occupation: T must be >= 0 (got {T})", T=T)
    if T == 0:
        return 0.0

    exponent = HBAR * omega / (K_B * T)
    if exponent > _EXPONENT_CUTOFF:
        # меньше 1e-300: в double это ноль
        return 0.0
    return 1.0 / math.expm1(exponent)


def spin_count(diameter: float, rho: float = DEFAULT_RHO_SPIN) -> float:
    """Число спинов в сфере N = ρ·(4/3)π(d/2)^3"""
    if not diameter > 0:
        raise DomainError(f"spin_count: diameter must be > 0 (got {diameter})", diameter=diameter)
    if not rho > 0:
        raise DomainError(f"spin_count: rho must be > 0 (got {rho})", rho=rho)
    return rho * (4.0 / 3.0) * math.pi * (diameter / 2.0) ** 3


def rabi_frequency(B0: float, N: float, gamma: float = DEFAULT_GYROMAGNETIC) -> float:
    """Ω = (√5/4)·γ·√N·B0, рад/с"""
    for name, value in (('B0', B0), ('N', N), ('gamma', gamma)):
        if not value > 0:
            raise DomainError(f"rabi_frequency: {name} must be > 0 (got {value})", **{name: value})
    return math.sqrt(5.0) / 4.0 * gamma * math.sqrt(N) * B0


# ===== ТИПЫ =====

@dataclass(frozen=True)
class DriveSpec:
    """Параметры накачки для среднеполевого пути"""

    B0: float
    sphere_diameter: float
    g_db_bare: float
    rho_spin: float = DEFAULT_RHO_SPIN
    gyromagnetic: float = DEFAULT_GYROMAGNETIC
    Omega: Optional[float] = None      # None: из B0 и N
    Omega_2: Optional[float] = None    # None: как у узла 1
    E: float = 0.0                     # накачка полостей a1, c1

    def __post_init__(self):
        violations = self.violations()
        if violations:
            raise ValidationError(violations)

    def violations(self) -> List[str]:
        checks = [
            Validators.validate_positive('B0', self.B0),
            Validators.validate_positive('sphere_diameter', self.sphere_diameter),
            Validators.validate_positive('rho_spin', self.rho_spin),
            Validators.validate_positive('gyromagnetic', self.gyromagnetic),
            Validators.validate_rate('g_db_bare', self.g_db_bare),
            Validators.validate_finite('E', self.E),
        ]
        for name in ('Omega', 'Omega_2'):
            value = getattr(self, name)
            if value is not None:
                checks.append(Validators.validate_rate(name, value))
        return [message for ok, message in checks if not ok]

    @property
    def spin_number(self) -> float:
        return spin_count(self.sphere_diameter, self.rho_spin)

    def rabi(self, site: int = 1) -> float:
        """Ω_j: заданная в файле или выведенная из B0"""
        if site == 2 and self.Omega_2 is not None:
            return self.Omega_2
        if self.Omega is not None:
            return self.Omega
        return rabi_frequency(self.B0, self.spin_number, self.gyromagnetic)


@dataclass(frozen=True)
class SiteParams:
    omega_b: float
    delta_a: float
    delta_c: float
    delta_d: float
    kappa_a: float
    kappa_c: float
    kappa_d: float
    gamma_b: float
    g_a: float
    g_c: float
    G_db: Optional[float]
    lam: float
    omega_a: float
    omega_c: float
    omega_d: float


@dataclass(frozen=True)
class SystemConfig:
    """Все параметры гамильтониана и ванн; неизменяемый после валидации"""

    omega_b: float
    delta_a: float
    delta_c: float
    delta_d: float
    kappa_a: float
    kappa_c: float
    kappa_d: float
    gamma_b: float
    g_a: float
    g_c: float
    J_a: float
    J_c: float
    T: float
    G_db: Optional[float] = None
    lam: float = 0.0
    theta: float = 0.0
    omega_a: float = DEFAULT_MODE_FREQUENCY
    omega_c: float = DEFAULT_MODE_FREQUENCY
    omega_d: float = DEFAULT_MODE_FREQUENCY
    symmetric_sites: bool = True
    full_linearization: bool = False
    meanfield_shift: bool = False
    drive: Optional[DriveSpec] = None
    # переопределения узла 2: ((ключ, значение), ...)
    site2: Tuple[Tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        violations = self.violations()
        if violations:
            raise ValidationError(violations)

    def violations(self) -> List[str]:
        """Список нарушенных инвариантов (пустой, если всё в порядке)"""
        checks = [Validators.validate_positive('omega_b', self.omega_b)]
        checks += [Validators.validate_rate(name, getattr(self, name)) for name in RATE_KEYS]
        checks += [Validators.validate_finite(name, getattr(self, name))
                   for name in ('delta_a', 'delta_c', 'delta_d')]
        checks += [Validators.validate_positive(name, getattr(self, name))
                   for name in ('omega_a', 'omega_c', 'omega_d')]
        checks.append(Validators.validate_temperature('T', self.T))
        checks.append(Validators.validate_phase('theta', self.theta))
        if self.G_db is not None:
            checks.append(Validators.validate_rate('G_db', self.G_db))

        problems = [message for ok, message in checks if not ok]

        if self.G_db is not None and self.drive is not None:
            problems.append("G_db: give either G_db or a [drive] section, not both")
        if self.G_db is None and self.drive is None:
            problems.append("G_db: required unless a [drive] section is given")

        if self.site2 and self.symmetric_sites:
            keys = ', '.join(f"{key}_2" for key, _ in self.site2)
            problems.append(f"{keys}: site-2 overrides require symmetric_sites = false")

        for key, value in self.site2:
            if key not in SITE_KEYS:
                problems.append(f"{key}_2: not a per-site parameter")
            elif key == 'omega_b' or key.startswith('omega_'):
                ok, message = Validators.validate_positive(f"{key}_2", value)
                if not ok:
                    problems.append(message)
            elif key.startswith('delta_'):
                ok, message = Validators.validate_finite(f"{key}_2", value)
                if not ok:
                    problems.append(message)
            else:
                ok, message = Validators.validate_rate(f"{key}_2", value)
                if not ok:
                    problems.append(message)

        if self.drive is not None:
            problems += self.drive.violations()
        return problems

    def site(self, j: int) -> SiteParams:
        """Параметры узла j (1 или 2)"""
        if j not in (1, 2):
            raise DomainError(f"site index must be 1 or 2 (got {j})", site=j)
        values = {key: getattr(self, key) for key in SITE_KEYS}
        if j == 2 and not self.symmetric_sites:
            values.update(dict(self.site2))
        return SiteParams(**values)

    def with_updates(self, **changes: Any) -> 'SystemConfig':
        """Копия с изменёнными полями (повторная валидация)"""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data['site2'] = {key: value for key, value in self.site2}
        return data


# ===== ЭТАЛОННАЯ ТОЧКА =====

def baseline_config(**changes: Any) -> SystemConfig:
    """Параметры раздела результатов (оба узла одинаковы, θ = 0)"""
    omega_b = TWO_PI * 10e6
    kappa = TWO_PI * 1e6
    g = TWO_PI * 4.8e6
    config = SystemConfig(
        omega_b=omega_b,
        delta_a=omega_b,
        delta_c=omega_b,
        delta_d=0.4 * omega_b,
        kappa_a=kappa,
        kappa_c=kappa,
        kappa_d=0.6 * kappa,
        gamma_b=TWO_PI * 100.0,
        g_a=g,
        g_c=g,
        J_a=0.5 * g,
        J_c=0.5 * g,
        T=0.1e-3,
        G_db=TWO_PI * 0.1e6,
        lam=0.05 * g,
        theta=0.0,
    )
    return config.with_updates(**changes) if changes else config


def baseline_drive(g_db_bare: float = 1.0, **changes: Any) -> DriveSpec:
    """Накачка сферы 250 мкм полем B0 ≈ 3.9e-5 Тл"""
    drive = DriveSpec(B0=3.9e-5, sphere_diameter=250e-6, g_db_bare=g_db_bare)
    return dataclasses.replace(drive, **changes) if changes else drive


def config_hash(config: SystemConfig) -> str:
    """sha256 канонического JSON разрешённой конфигурации"""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


# ===== ФАЙЛ КОНФИГУРАЦИИ =====

# (секция, ключ в файле, атрибут, вид величины, обязателен)
SCHEMA = (
    ('system', 'omega_b', 'omega_b', 'frequency', True),
    ('system', 'delta_a', 'delta_a', 'frequency', True),
    ('system', 'delta_c', 'delta_c', 'frequency', True),
    ('system', 'delta_d', 'delta_d', 'frequency', True),
    ('system', 'kappa_a', 'kappa_a', 'frequency', True),
    ('system', 'kappa_c', 'kappa_c', 'frequency', True),
    ('system', 'kappa_d', 'kappa_d', 'frequency', True),
    ('system', 'gamma_b', 'gamma_b', 'frequency', True),
    ('system', 'g_a', 'g_a', 'frequency', True),
    ('system', 'g_c', 'g_c', 'frequency', True),
    ('system', 'J_a', 'J_a', 'frequency', True),
    ('system', 'J_c', 'J_c', 'frequency', True),
    ('system', 'G_db', 'G_db', 'frequency', False),
    ('system', 'lambda', 'lam', 'frequency', False),
    ('system', 'theta', 'theta', 'angle', False),
    ('system', 'omega_a', 'omega_a', 'frequency', False),
    ('system', 'omega_c', 'omega_c', 'frequency', False),
    ('system', 'omega_d', 'omega_d', 'frequency', False),
    ('bath', 'T', 'T', 'temperature', True),
    ('drive', 'B0', 'B0', 'field', True),
    ('drive', 'sphere_diameter', 'sphere_diameter', 'length', True),
    ('drive', 'g_db_bare', 'g_db_bare', 'frequency', True),
    ('drive', 'rho_spin', 'rho_spin', 'density', False),
    ('drive', 'gyromagnetic', 'gyromagnetic', 'gyromagnetic', False),
    ('drive', 'Omega', 'Omega', 'frequency', False),
    ('drive', 'Omega_2', 'Omega_2', 'frequency', False),
    ('drive', 'E', 'E', 'frequency', False),
)

FLAGS = ('symmetric_sites', 'full_linearization', 'meanfield_shift')

SECTIONS = ('system', 'bath', 'drive', 'flags')

# атрибут -> ключ файла (для узла 2 и записи)
FILE_KEYS = {attribute: key for _, key, attribute, _, _ in SCHEMA}


def _schema_for(section: str) -> Dict[str, Tuple[str, str, bool]]:
    return {key: (attribute, kind, required)
            for sec, key, attribute, kind, required in SCHEMA if sec == section}


def _resolve_section(section: str, entries: Dict[str, RawEntry], parser: ConfigFileParser,
                     path: Optional[str]) -> Dict[str, float]:
    """Перевести значения секции в рад/с и т.п., раскрывая ссылки key = 0.6*other"""
    schema = _schema_for(section)
    site_attributes = set(SITE_KEYS)

    def kind_of(key: str) -> Optional[str]:
        if key in schema:
            return schema[key][1]
        if section == 'system' and key.endswith('_2'):
            base = key[:-2]
            if base in schema and schema[base][0] in site_attributes:
                return schema[base][1]
        return None

    resolved: Dict[str, float] = {}
    in_progress = set()

    def resolve(key: str) -> float:
        if key in resolved:
            return resolved[key]
        entry = entries[key]
        if key in in_progress:
            raise ConfigParseError(f"circular reference through '{key}'", entry.lineno, path)
        in_progress.add(key)

        value = parser.parse_value(entry, path)
        kind = kind_of(key)
        if value.reference is not None:
            target = value.reference
            if target not in entries:
                raise ConfigParseError(f"'{key}' refers to unknown key '{target}' in [{section}]",
                                       entry.lineno, path)
            if kind_of(target) != kind:
                raise ConfigParseError(f"'{key}' ({kind}) cannot reference '{target}' "
                                       f"({kind_of(target)})", entry.lineno, path)
            result = value.number * resolve(target)
        else:
            try:
                result = UnitHandler.to_internal(value.number, value.unit, kind)
            except KeyError as e:
                raise ConfigParseError(f"'{key}': {e.args[0]}", entry.lineno, path)

        in_progress.discard(key)
        resolved[key] = result
        return result

    for key in entries:
        if kind_of(key) is not None:
            resolve(key)
    return resolved


def parse_config_text(text: str, path: Optional[str] = None) -> SystemConfig:
    """Разобрать текст конфигурации в проверенный SystemConfig"""
    parser = ConfigFileParser()
    sections = parser.parse_text(text, path)
    problems: List[str] = []

    for name in sections:
        if name not in SECTIONS:
            problems.append(f"[{name}]: unknown section (expected {', '.join(SECTIONS)})")

    values: Dict[str, float] = {}
    site2: Dict[str, float] = {}
    drive_values: Dict[str, float] = {}

    for section in ('system', 'bath', 'drive'):
        if section == 'drive' and section not in sections:
            continue
        entries = sections.get(section, {})
        schema = _schema_for(section)
        resolved = _resolve_section(section, entries, parser, path)

        for key in entries:
            if key in schema:
                continue
            if section == 'system' and key.endswith('_2') and key in resolved:
                site2[schema[key[:-2]][0]] = resolved[key]
                continue
            problems.append(f"{key}: unknown key in [{section}]")

        for key, (attribute, _, required) in schema.items():
            if key in resolved:
                target = drive_values if section == 'drive' else values
                target[attribute] = resolved[key]
            elif required:
                problems.append(f"{key}: missing required key in [{section}]")

    flags: Dict[str, bool] = {}
    for key, entry in sections.get('flags', {}).items():
        if key not in FLAGS:
            problems.append(f"{key}: unknown key in [flags]")
            continue
        flags[key] = parser.parse_bool(entry, path)

    if problems:
        raise ValidationError(problems, path=path)

    try:
        drive = DriveSpec(**drive_values) if 'drive' in sections else None
        config = SystemConfig(
            **values,
            **flags,
            drive=drive,
            site2=tuple(sorted(site2.items())),
        )
    except ValidationError as e:
        raise ValidationError(e.violations, path=path)

    logger.debug(f"Loaded config from {path or '<text>'}: hash {config_hash(config)[:12]}")
    return config


def load_config(path: str) -> SystemConfig:
    """Загрузить и проверить файл конфигурации модели"""
    parser_path = str(path)
    try:
        with open(parser_path, 'r', encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigParseError(f"cannot read config file: {e}", path=parser_path)
    return parse_config_text(text, parser_path)


def render_config(config: SystemConfig) -> str:
    """Текст конфигурации с точными единицами (повторная загрузка бит-в-бит)"""
    system, bath, drive = [], [], []
    for section, key, attribute, kind, _ in SCHEMA:
        owner = config.drive if section == 'drive' else config
        if owner is None:
            continue
        value = getattr(owner, attribute)
        if value is None:
            continue
        line = (key, f"{float(value)!r} {UnitHandler.exact_unit(kind)}")
        {'system': system, 'bath': bath, 'drive': drive}[section].append(line)

    for attribute, value in config.site2:
        system.append((f"{FILE_KEYS[attribute]}_2", f"{float(value)!r} rad/s"))

    flags = [(name, 'true' if getattr(config, name) else 'false') for name in FLAGS]

    sections = [('system', system), ('bath', bath)]
    if drive:
        sections.append(('drive', drive))
    sections.append(('flags', flags))
    return ConfigFileParser.render(sections)


def save_config(config: SystemConfig, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(render_config(config))
    logger.info(f"💾 Config written to {path}")
