"""Run manifests and byte-reproducible CSV emission.

CSV cells are rendered with ``repr`` for floats (shortest string that
round-trips to the same double) and plain ``str`` for integers, so a rerun
with the same config and seed produces byte-identical files regardless of
thread count.  The manifest records the canonical config hash, the seed,
every emitted file with its sha256, and the pass/fail checks; timestamps
live only in the manifest, never in data files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import ReportError

ARTIFACT_VERSION = "0.1.0"


@dataclass(frozen=True)
class Check:
    """One named assertion with its outcome and a human-readable detail."""

    name: str
    passed: bool
    detail: str = ""


def format_cell(value: object) -> str:
    if hasattr(value, "item"):  # numpy scalar -> plain Python scalar
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        text = repr(value)  # shortest round-trip representation
    elif isinstance(value, int):
        text = str(value)
    else:
        text = str(value)
    if "," in text or "\n" in text:
        raise ReportError(f"CSV cell would need quoting: {text!r}")
    return text


def write_csv(path: Path, header: list[str], rows) -> str:
    """Write rows and return the file's sha256 hex digest."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def write_text_file(path: Path, text: str) -> str:
    """Write a plain-text artifact and return its sha256 hex digest."""
    data = text.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.exists():
        raise ReportError(f"missing CSV file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ReportError(f"empty CSV file: {path}")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:] if line]


@dataclass
class RunManifest:
    """Record of one experiment run: inputs, outputs, and check results."""

    experiment: str
    config_hash: str
    seed: int
    version: str = ARTIFACT_VERSION
    started_at: str = ""
    finished_at: str = ""
    files: list[dict] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)

    @staticmethod
    def timestamp() -> str:
        return datetime.now(timezone.utc).isoformat(timespec="microseconds")

    def add_file(self, path: Path, digest: str) -> None:
        self.files.append({"path": str(path), "sha256": digest})

    def add_checks(self, checks) -> None:
        self.checks.extend(asdict(c) for c in checks)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def load_manifest(path: Path) -> RunManifest:
    if not path.exists():
        raise ReportError(f"missing manifest: {path}")
    payload = json.loads(path.read_text())
    return RunManifest(**payload)
