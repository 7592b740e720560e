"""
Парсер секционного файла параметров модели

Грамматика:
    [section]
    key = <число> [единица]       # комментарий
    key = <множитель>*<другой_ключ>
    flag = true | false | yes | no | on | off | 1 | 0
"""

import re
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from errors import ConfigParseError

logger = logging.getLogger(__name__)

NUMBER = r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?'


@dataclass(frozen=True)
class RawEntry:
    key: str
    text: str
    lineno: int


@dataclass(frozen=True)
class ParsedValue:
    number: float
    unit: Optional[str] = None
    reference: Optional[str] = None   # для "0.6*kappa_c"
    lineno: Optional[int] = None


class ConfigFileParser:
    def __init__(self):
        # Строки файла
        self.line_patterns = {
            'blank': re.compile(r'^\s*$'),
            'comment': re.compile(r'^\s*[#;]'),
            'section': re.compile(r'^\s*\[\s*([A-Za-z_]\w*)\s*\]\s*$'),
            'entry': re.compile(r'^\s*([A-Za-z_]\w*)\s*=\s*(.*?)\s*$'),
        }

        # Значения. ВАЖНО: relative ДО quantity
        self.value_patterns = {
            'relative': re.compile(rf'^({NUMBER})\s*\*\s*([A-Za-z_]\w*)$'),
            'quantity': re.compile(rf'^({NUMBER})\s*([A-Za-z][\w/*()^\-]*)?$'),
        }

        self.booleans = {
            'true': True, 'yes': True, 'on': True, '1': True,
            'false': False, 'no': False, 'off': False, '0': False,
        }

    def parse_text(self, text: str, path: Optional[str] = None) -> Dict[str, Dict[str, RawEntry]]:
        """Разобрать текст на секции и записи (без интерпретации значений)"""
        sections: Dict[str, Dict[str, RawEntry]] = {}
        current: Optional[str] = None

        for lineno, line in enumerate(text.splitlines(), start=1):
            if self.line_patterns['blank'].match(line) or self.line_patterns['comment'].match(line):
                continue

            match = self.line_patterns['section'].match(line)
            if match:
                current = match.group(1).lower()
                if current in sections:
                    raise ConfigParseError(f"duplicate section [{current}]", lineno, path)
                sections[current] = {}
                continue

            match = self.line_patterns['entry'].match(line)
            if not match:
                raise ConfigParseError(f"cannot parse line: {line.strip()!r}", lineno, path)

            if current is None:
                raise ConfigParseError("entry outside of any [section]", lineno, path)

            key, value = match.group(1), self._strip_inline_comment(match.group(2))
            if not value:
                raise ConfigParseError(f"empty value for '{key}'", lineno, path)
            if key in sections[current]:
                raise ConfigParseError(f"duplicate key '{key}' in [{current}]", lineno, path)

            sections[current][key] = RawEntry(key, value, lineno)

        logger.debug(f"Parsed {sum(len(s) for s in sections.values())} entries from {path or '<text>'}")
        return sections

    def parse_value(self, entry: RawEntry, path: Optional[str] = None) -> ParsedValue:
        """Число с необязательной единицей или ссылка с множителем"""
        text = entry.text
        match = self.value_patterns['relative'].match(text)
        if match:
            return ParsedValue(float(match.group(1)), reference=match.group(2), lineno=entry.lineno)

        match = self.value_patterns['quantity'].match(text)
        if match:
            return ParsedValue(float(match.group(1)), unit=match.group(2), lineno=entry.lineno)

        raise ConfigParseError(f"'{entry.key}': expected a number, '<number> <unit>' or "
                               f"'<factor>*<key>', got {text!r}", entry.lineno, path)

    def parse_bool(self, entry: RawEntry, path: Optional[str] = None) -> bool:
        value = self.booleans.get(entry.text.lower())
        if value is None:
            raise ConfigParseError(f"'{entry.key}': expected a boolean, got {entry.text!r}",
                                   entry.lineno, path)
        return value

    @staticmethod
    def render(sections: Iterable[Tuple[str, List[Tuple[str, str]]]]) -> str:
        """Собрать текст файла из секций [(имя, [(ключ, значение), ...])]"""
        lines = []
        for name, entries in sections:
            if lines:
                lines.append('')
            lines.append(f'[{name}]')
            for key, value in entries:
                lines.append(f'{key} = {value}')
        return '\n'.join(lines) + '\n'

    @staticmethod
    def _strip_inline_comment(value: str) -> str:
        for marker in (' #', '\t#', ' ;', '\t;'):
            position = value.find(marker)
            if position != -1:
                value = value[:position]
        return value.strip()
