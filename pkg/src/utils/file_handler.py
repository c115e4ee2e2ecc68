import json
import hashlib
import logging
from pathlib import Path
from typing import List, Dict, Any, Iterable

import pandas as pd

logger = logging.getLogger(__name__)

RUN_SUBDIRS = ("data", "models", "attacks", "records", "reports", "sweep")


class FileHandler:
    """Handles the run directory: layout, deterministic JSON/CSV writes and hashing."""

    def __init__(self, run_dir: Path, float_format: str = "%.17g", json_indent: int = 2):
        """
        Initialize FileHandler for one run directory.

        Args:
            run_dir: Root of the run's artifacts
            float_format: printf-style format for floats in CSV files
            json_indent: Indentation of JSON files
        """
        self.run_dir = Path(run_dir)
        self.float_format = float_format
        self.json_indent = json_indent

    def ensure_directories(self) -> None:
        """Create the run directory and its standard subdirectories."""
        for name in RUN_SUBDIRS:
            directory = self.run_dir / name
            directory.mkdir(parents=True, exist_ok=True)
            logger.debug(f"Ensured directory exists: {directory}")

    def path(self, *parts: str) -> Path:
        return self.run_dir.joinpath(*parts)

    def relative(self, path: Path) -> str:
        """Path of an artifact relative to the run directory, with forward slashes."""
        return Path(path).relative_to(self.run_dir).as_posix()

    def save_json(self, data: Any, path: Path) -> Path:
        """
        Write JSON with sorted keys so identical content gives identical bytes.

        Args:
            data: JSON-serializable object
            path: Target path

        Returns:
            Path to saved file
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump(data, f, indent=self.json_indent, sort_keys=True, ensure_ascii=False, allow_nan=False)
                f.write("\n")
            logger.debug(f"JSON saved to: {path}")
            return path
        except Exception as e:
            logger.error(f"Failed to save {path}: {e}")
            raise

    def load_json(self, path: Path) -> Any:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)

    def save_table(self, frame: pd.DataFrame, path: Path) -> Path:
        """Write a DataFrame as UTF-8 CSV with ``\\n`` line endings and round-trip floats."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n", encoding="utf-8")
        logger.debug(f"Table saved to: {path} ({len(frame)} rows)")
        return path

    def missing(self, relative_paths: Iterable[str]) -> List[str]:
        """Return the artifacts from ``relative_paths`` that do not exist."""
        return [p for p in relative_paths if not (self.run_dir / p).exists()]

    @staticmethod
    def calculate_file_hash(file_path: Path) -> str:
        """
        Calculate SHA256 hash of a file.

        Args:
            file_path: Path to the file

        Returns:
            File hash as hex string
        """
        sha256_hash = hashlib.sha256()
        with open(file_path, "rb") as f:
            for byte_block in iter(lambda: f.read(4096), b""):
                sha256_hash.update(byte_block)
        return sha256_hash.hexdigest()

    def artifact_hashes(self, relative_paths: Iterable[str]) -> Dict[str, str]:
        return {p: self.calculate_file_hash(self.run_dir / p) for p in relative_paths}
