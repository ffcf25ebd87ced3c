"""File formats: CSV tables, matrix JSON documents, and run manifests."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import model as model_mod
from .errors import ParseError

TOOL_VERSION = "0.1.0"


def write_csv(path, header: list[str], rows) -> None:
    """RFC-4180 CSV; floats keep full precision via shortest round-trip repr."""
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(x) for x in row])


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def read_matrix_file(path) -> np.ndarray:
    """Matrix JSON document: nested rows of [re, im] pairs, optionally under
    a top-level "matrix" key."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("matrix")
    if doc is None:
        raise ParseError(f"{path}: expected a matrix or a 'matrix' field")
    return model_mod.matrix_from_json(doc, str(path))


def write_matrix_file(path, a: np.ndarray) -> None:
    Path(path).write_text(
        json.dumps({"matrix": model_mod.matrix_to_json(a)}, indent=2)
    )


def write_pulses_csv(path, controls: model_mod.PwcControls) -> None:
    rows = [
        (k, j, controls.channels[j, k])
        for j in range(controls.n_channels)
        for k in range(controls.n_pulses)
    ]
    write_csv(path, ["segment", "channel", "amplitude"], rows)


def read_pulses_csv(path, gate_time: float = 1.0, v_max: float = 7.5):
    """Rebuild PwcControls from a pulses CSV written by write_pulses_csv."""
    try:
        with Path(path).open(newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            cells = [
                (int(r["segment"]), int(r["channel"]), float(r["amplitude"]))
                for r in reader
            ]
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: not a pulses CSV: {exc}") from exc
    if not cells:
        raise ParseError(f"{path}: empty pulses CSV")
    n_pulses = max(k for k, _, _ in cells) + 1
    n_channels = max(j for _, j, _ in cells) + 1
    channels = np.zeros((n_channels, n_pulses))
    for k, j, v in cells:
        channels[j, k] = v
    return model_mod.PwcControls(
        gate_time=gate_time, n_pulses=n_pulses, channels=channels, v_max=v_max
    )


@dataclass
class RunManifest:
    """Reproducibility record written next to every command's outputs."""

    command: str
    argv: list[str]
    config: dict
    seed: int
    version: str = TOOL_VERSION
    outputs: list[str] = field(default_factory=list)
    duration_s: float = 0.0

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / "run_manifest.json"
        path.write_text(
            json.dumps(
                {
                    "command": self.command,
                    "argv": self.argv,
                    "config": self.config,
                    "seed": self.seed,
                    "version": self.version,
                    "outputs": self.outputs,
                    "duration_s": self.duration_s,
                },
                indent=2,
            )
        )
        return path


class ManifestTimer:
    def __init__(self):
        self.start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self.start
