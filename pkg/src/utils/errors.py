from typing import List, Optional


class MIAToolkitError(Exception):
    """Base class for toolkit errors."""


class ConfigError(MIAToolkitError, ValueError):
    """Invalid configuration value or unknown key."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        self.base_message = message
        super().__init__(self._compose())

    def _compose(self) -> str:
        parts = [self.base_message]
        if self.key:
            parts.append(f"key '{self.key}'")
        if self.line is not None:
            parts.append(f"line {self.line}")
        return " | ".join(parts)

    def with_line(self, line: Optional[int]) -> "ConfigError":
        """Return a copy of this error annotated with a source line."""
        return ConfigError(self.base_message, key=self.key, line=line)


class DatasetFormatError(MIAToolkitError, ValueError):
    """Malformed dataset or record file."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        super().__init__(f"{message} (row {row})" if row is not None else message)


class ModelFormatError(MIAToolkitError, ValueError):
    """Malformed parameter file (bad magic, version or array shape)."""


class StageError(MIAToolkitError, RuntimeError):
    """A pipeline stage failed."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"Stage '{stage}' failed: {cause}")


class RunDirectoryError(MIAToolkitError, ValueError):
    """A run directory lacks artifacts needed for reporting."""

    def __init__(self, run_dir: str, missing: List[str]):
        self.run_dir = run_dir
        self.missing = list(missing)
        super().__init__(f"Run directory {run_dir} is incomplete; missing: {', '.join(self.missing)}")
