"""Reports management: JSON records, CSV tables and the run manifest"""
import os
import io
import csv
import json
import hashlib
import logging
import platform
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union
import numpy as np
import scipy
import yaml

logger = logging.getLogger(__name__)


def to_builtin(value: Any) -> Any:
    """Converts numpy scalars and arrays, tuples and non finite floats into JSON friendly values

    Args:
        value (Any): value to convert

    Returns:
        Any: plain python value
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if np.isnan(value):
            return "nan"
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def dumps(value: Any) -> str:
    """Canonical JSON text: sorted keys, no extra whitespace"""
    return json.dumps(to_builtin(value), sort_keys=True, separators=(",", ":"))


def atomic_write(path: str, content: Union[str, bytes]):
    """Writes the content in a temporary file of the same directory, then renames it on the destination

    Args:
        path (str): destination file
        content (Union[str, bytes]): data to write
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    payload = content.encode("utf-8") if isinstance(content, str) else content
    descriptor, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(descriptor, "wb") as tmp_file:
            tmp_file.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


@dataclass
class Report():
    """Class that represents the outcome of an operation

    Args:
        op (:class:`str`): name of the operation
        params (:class:`dict`): parameters the operation was called with
        value (:class:`Any`): main result
        per_block (:class:`list`): optional per-block detail as (q, value) pairs
        passed (:class:`bool`): whether the acceptance threshold of the operation was met, None if it has none
    """
    op: str
    params: Dict[str, Any] = field(default_factory=dict)
    value: Any = None
    per_block: List[Tuple[int, float]] = field(default_factory=list)
    passed: Optional[bool] = None

    def to_dict(self) -> dict:
        """Plain dictionary of the report"""
        record = {"op": self.op, "params": self.params, "value": self.value, "per_block": self.per_block}
        if self.passed is not None:
            record["passed"] = self.passed
        return to_builtin(record)

    def to_json(self) -> str:
        """Canonical JSON line of the report"""
        return dumps(self.to_dict())


class ReportWriter():
    """Writes the outputs of a run in a directory.
    The manifest must be written before any data file

    Args:
        out_dir (:class:`str`): output directory, created if missing
    """

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.manifest_written = False
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        """Path of a file of the output directory"""
        return os.path.join(self.out_dir, name)

    def _check_manifest(self, name: str):
        if not self.manifest_written:
            raise RuntimeError(f"manifest must be written before {name}")

    def write_manifest(self, subcommand: str, config: dict, seed: int, threads: int) -> dict:
        """Writes manifest.json with the config hash, seed and package versions

        Args:
            subcommand (str): name of the command that produced the run
            config (dict): merged configuration of the run
            seed (int): seed of every random generator
            threads (int): number of worker threads

        Returns:
            dict: the manifest
        """
        manifest = {
            "subcommand": subcommand,
            "config_sha256": config_hash(config),
            "seed": seed,
            "threads": threads,
            "versions": package_versions(),
        }
        atomic_write(self.path("manifest.json"), json.dumps(to_builtin(manifest), sort_keys=True, indent=2) + "\n")
        self.manifest_written = True
        logger.info("manifest written in %s", self.out_dir)
        return manifest

    def write_json(self, name: str, content: Any):
        """Writes a JSON document"""
        self._check_manifest(name)
        atomic_write(self.path(name), json.dumps(to_builtin(content), sort_keys=True, indent=2) + "\n")

    def write_jsonl(self, name: str, reports: Iterable[Union[Report, dict]]):
        """Writes one JSON record per line"""
        self._check_manifest(name)
        lines = [report.to_json() if isinstance(report, Report) else dumps(report) for report in reports]
        atomic_write(self.path(name), "".join(line + "\n" for line in lines))

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]):
        """Writes a CSV table with the given header"""
        self._check_manifest(name)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(cell) for cell in row])
        atomic_write(self.path(name), buffer.getvalue())


def _csv_cell(cell: Any) -> Any:
    cell = to_builtin(cell)
    return repr(cell) if isinstance(cell, float) else cell


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON text of the configuration"""
    return hashlib.sha256(dumps(config).encode("utf-8")).hexdigest()


def package_versions() -> Dict[str, str]:
    """Versions of python and of the numerical stack"""
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "yaml": yaml.__version__,
    }
