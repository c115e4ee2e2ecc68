from utils.config_loader import ConfigLoader, LoadedConfig, config_hash
from utils.file_handler import FileHandler
from utils.logger import setup_logging, StageLogger
from utils.errors import (
    MIAToolkitError,
    ConfigError,
    DatasetFormatError,
    ModelFormatError,
    StageError,
    RunDirectoryError,
)
from utils.seeding import derive_seed

__all__ = [
    'ConfigLoader',
    'LoadedConfig',
    'config_hash',
    'FileHandler',
    'setup_logging',
    'StageLogger',
    'MIAToolkitError',
    'ConfigError',
    'DatasetFormatError',
    'ModelFormatError',
    'StageError',
    'RunDirectoryError',
    'derive_seed',
]
