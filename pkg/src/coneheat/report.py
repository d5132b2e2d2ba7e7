"""Run reports and atomic artifact output.

Artifacts are written to a temp file in the destination directory and
renamed into place, so partial results never masquerade as finished ones.
CSV bodies are deterministic for a fixed (config, seed, version); wall time
lives only in the JSON summary.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

__all__ = ["CheckResult", "RunReport", "write_text_atomic", "write_csv", "format_float"]


def format_float(x) -> str:
    return repr(float(x))


@dataclass
class CheckResult:
    name: str
    measured: float | None
    threshold: float | None
    status: str  # PASS | FAIL | SKIP

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "threshold": self.threshold,
            "status": self.status,
        }


@dataclass
class RunReport:
    command: str
    config_hash: str
    checks: list[CheckResult] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__
    artifacts: list[str] = field(default_factory=list)

    def add(self, name: str, measured, threshold, passed: bool | None) -> None:
        # a skipped check is reported as SKIP, never PASS
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        self.checks.append(
            CheckResult(
                name=name,
                measured=None if measured is None else float(measured),
                threshold=None if threshold is None else float(threshold),
                status=status,
            )
        )

    @property
    def all_passed(self) -> bool:
        return all(c.status != "FAIL" for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "checks": [c.as_dict() for c in self.checks],
            "wall_time": self.wall_time,
            "version": self.version,
            "artifacts": self.artifacts,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str | Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(x) if isinstance(x, float) else str(x) for x in row))
    write_text_atomic(path, "\n".join(lines) + "\n")
