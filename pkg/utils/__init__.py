from .config_parser import ConfigFileParser
from .validators import Validators

__all__ = ['ConfigFileParser', 'Validators']
