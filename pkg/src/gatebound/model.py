"""Declarative description of the controlled bipartite system.

A :class:`HamiltonianModel` holds the drift, control generators, optional
piecewise-constant coherent error, bath self-Hamiltonian, and system-bath
coupling terms.  :class:`PwcControls` holds the piecewise-constant control
amplitudes on a uniform grid over the gate time.  All values are in
normalized units (gate time defaults to 1); physical-unit conversion happens
only at reporting time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import linalg
from .errors import (
    DimensionLimitExceeded,
    DimensionMismatch,
    GridMismatch,
    NonHermitianInput,
    NotUnitary,
    ParseError,
    ValidationError,
)


@dataclass(eq=False)
class PwcControls:
    """Piecewise-constant control amplitudes, one row per channel."""

    gate_time: float = 1.0
    n_pulses: int = 5
    channels: np.ndarray = field(default_factory=lambda: np.zeros((0, 5)))
    v_max: float = 7.5

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=float))
        if self.gate_time <= 0:
            raise ValidationError("controls.T: gate time must be positive")
        if self.n_pulses < 1:
            raise ValidationError("controls.n_pulses: need at least one segment")
        if self.channels.size and self.channels.shape[1] != self.n_pulses:
            raise ValidationError(
                f"controls.channels: expected {self.n_pulses} segments per channel, "
                f"got {self.channels.shape[1]}"
            )
        if self.v_max <= 0:
            raise ValidationError("controls.v_max: bound must be positive")
        if self.channels.size and np.max(np.abs(self.channels)) > self.v_max * (1 + 1e-12):
            raise ValidationError(
                f"controls.channels: amplitude {np.max(np.abs(self.channels)):.6g} "
                f"exceeds v_max = {self.v_max:.6g}"
            )

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    def segment_duration(self) -> float:
        return self.gate_time / self.n_pulses


@dataclass(eq=False)
class TargetGate:
    matrix: np.ndarray
    label: str = "target"

    def __post_init__(self):
        try:
            self.matrix = linalg.check_unitary(self.matrix, f"target '{self.label}'")
        except NotUnitary as exc:
            raise ValidationError(str(exc)) from exc

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def hadamard_gate() -> TargetGate:
    return TargetGate((linalg.sigma_x + linalg.sigma_z) / np.sqrt(2.0), "hadamard")


@dataclass(eq=False)
class HamiltonianModel:
    """Drift, controls, optional coherent error, bath, and coupling terms."""

    n_s: int
    n_b: int
    drift: np.ndarray
    control_generators: list[np.ndarray] = field(default_factory=list)
    coherent_error: np.ndarray | None = None  # (n_segments, n_s, n_s) or None
    bath: np.ndarray | None = None
    couplings: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        if self.n_s < 1 or self.n_b < 1:
            raise ValidationError("n_S/n_B: dimensions must be >= 1")
        if self.n_s * self.n_b > linalg.MAX_DIM:
            raise DimensionLimitExceeded(
                f"d = n_S*n_B = {self.n_s * self.n_b} exceeds {linalg.MAX_DIM}"
            )
        self.drift = self._herm(self.drift, self.n_s, "drift")
        self.control_generators = [
            self._herm(h, self.n_s, f"control_generators[{j}]")
            for j, h in enumerate(self.control_generators)
        ]
        if self.bath is None:
            self.bath = np.zeros((self.n_b, self.n_b), dtype=complex)
        self.bath = self._herm(self.bath, self.n_b, "bath")
        self.couplings = [
            (
                self._herm(s, self.n_s, f"couplings[{i}].system"),
                self._herm(b, self.n_b, f"couplings[{i}].bath"),
            )
            for i, (s, b) in enumerate(self.couplings)
        ]
        if self.coherent_error is not None:
            c = np.asarray(self.coherent_error, dtype=complex)
            if c.ndim == 2:
                c = c[None, :, :]
            for k in range(c.shape[0]):
                self._herm(c[k], self.n_s, f"coherent_error[{k}]")
            self.coherent_error = c

    @staticmethod
    def _herm(a, dim: int, name: str) -> np.ndarray:
        try:
            a = linalg.check_hermitian(a, name)
        except NonHermitianInput as exc:
            raise ValidationError(str(exc)) from exc
        if a.shape != (dim, dim):
            raise ValidationError(f"{name}: expected shape ({dim},{dim}), got {a.shape}")
        return a

    @property
    def dim(self) -> int:
        return self.n_s * self.n_b

    def coherent_error_segment(self, k: int, n_segments: int) -> np.ndarray | None:
        if self.coherent_error is None:
            return None
        if self.coherent_error.shape[0] != n_segments:
            raise GridMismatch(
                f"coherent error has {self.coherent_error.shape[0]} segments, "
                f"controls have {n_segments}"
            )
        return self.coherent_error[k]

    def with_bath(self, bath: np.ndarray, couplings) -> "HamiltonianModel":
        """Copy of the model with bath self-dynamics and couplings replaced."""
        n_b = bath.shape[0]
        return HamiltonianModel(
            n_s=self.n_s,
            n_b=n_b,
            drift=self.drift,
            control_generators=list(self.control_generators),
            coherent_error=self.coherent_error,
            bath=bath,
            couplings=list(couplings),
        )


def nominal_system_hamiltonian(
    model: HamiltonianModel, controls: PwcControls, k: int
) -> np.ndarray:
    """H_S on control segment k: drift plus amplitude-weighted generators."""
    if controls.n_channels != len(model.control_generators):
        raise DimensionMismatch(
            f"{controls.n_channels} control channels vs "
            f"{len(model.control_generators)} generators"
        )
    h = model.drift.copy()
    for j, gen in enumerate(model.control_generators):
        h = h + controls.channels[j, k] * gen
    return h


def assemble_total_hamiltonian(
    model: HamiltonianModel, controls: PwcControls, k: int
) -> np.ndarray:
    """Full system-bath Hamiltonian on control segment k.

    (H_S + H_coh) kron I_B + I_S kron H_B + sum_a S_a kron B_a.
    """
    h_s = nominal_system_hamiltonian(model, controls, k)
    coh = model.coherent_error_segment(k, controls.n_pulses)
    if coh is not None:
        h_s = h_s + coh
    eye_s = np.eye(model.n_s)
    eye_b = np.eye(model.n_b)
    h = np.kron(h_s, eye_b) + np.kron(eye_s, model.bath)
    for s_op, b_op in model.couplings:
        h = h + np.kron(s_op, b_op)
    return h


def uncertainty_hamiltonian(
    model: HamiltonianModel, controls: PwcControls, k: int
) -> np.ndarray:
    """The uncertain part: H_coh kron I_B + I_S kron H_B + couplings."""
    eye_s = np.eye(model.n_s)
    eye_b = np.eye(model.n_b)
    coh = model.coherent_error_segment(k, controls.n_pulses)
    h = np.kron(eye_s, model.bath)
    if coh is not None:
        h = h + np.kron(coh, eye_b)
    for s_op, b_op in model.couplings:
        h = h + np.kron(s_op, b_op)
    return h


# --- JSON config -----------------------------------------------------------
#
# Matrices are row-major nested arrays with complex entries as [re, im] pairs.


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows, path: str = "matrix") -> np.ndarray:
    try:
        out = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in rows],
            dtype=complex,
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"{path}: expected nested rows of [re, im] pairs") from exc
    if out.ndim != 2:
        raise ParseError(f"{path}: expected a 2-d matrix")
    return out


def model_to_config(
    model: HamiltonianModel, controls: PwcControls, target: TargetGate
) -> dict:
    cfg = {
        "n_S": model.n_s,
        "n_B": model.n_b,
        "drift": matrix_to_json(model.drift),
        "control_generators": [matrix_to_json(h) for h in model.control_generators],
        "bath": matrix_to_json(model.bath),
        "couplings": [
            {"system": matrix_to_json(s), "bath": matrix_to_json(b)}
            for s, b in model.couplings
        ],
        "target": {"matrix": matrix_to_json(target.matrix), "label": target.label},
        "controls": {
            "T": controls.gate_time,
            "n_pulses": controls.n_pulses,
            "v_max": controls.v_max,
            "channels": [[float(v) for v in ch] for ch in controls.channels],
        },
    }
    if model.coherent_error is not None:
        cfg["coherent_error"] = [matrix_to_json(c) for c in model.coherent_error]
    return cfg


def _resolve_preset(cfg: dict) -> dict:
    name = cfg["preset"]
    if name != "hadamard-sigma-z-bath":
        raise ValidationError(f"preset: unknown preset '{name}'")
    from .bath import BathEnsembleSpec, sample_bath

    q_b = int(cfg.get("q_B", 2))
    gate_time = float(cfg.get("T", 1.0))
    spec = BathEnsembleSpec(
        q_b=q_b,
        commuting=bool(cfg.get("commuting", True)),
        target_tb_norm=float(cfg.get("target_tb_norm", 0.3)),
        seed=int(cfg.get("seed", 0)),
    )
    rng = np.random.default_rng(spec.seed)
    h_b, b_op, _ = sample_bath(spec, float(cfg.get("th_b_norm", 1.0)), rng, gate_time)
    n_pulses = int(cfg.get("n_pulses", 5))
    full = {
        "n_S": 2,
        "n_B": 2**q_b,
        "drift": matrix_to_json(np.zeros((2, 2))),
        "control_generators": [
            matrix_to_json(linalg.sigma_x),
            matrix_to_json(linalg.sigma_y),
        ],
        "bath": matrix_to_json(h_b),
        "couplings": [
            {"system": matrix_to_json(linalg.sigma_z), "bath": matrix_to_json(b_op)}
        ],
        "target": {
            "matrix": matrix_to_json(hadamard_gate().matrix),
            "label": "hadamard",
        },
        "controls": {
            "T": gate_time,
            "n_pulses": n_pulses,
            "v_max": float(cfg.get("v_max", 7.5)),
            "channels": [[0.0] * n_pulses, [0.0] * n_pulses],
        },
    }
    return full


def load_model(source) -> tuple[HamiltonianModel, PwcControls, TargetGate]:
    """Load (model, controls, target) from a config dict, JSON text, or path."""
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        try:
            cfg = json.loads(Path(source).read_text())
        except OSError as exc:
            raise ParseError(f"cannot read config file {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}: invalid JSON: {exc}") from exc
    elif isinstance(source, str):
        try:
            cfg = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    elif isinstance(source, dict):
        cfg = source
    else:
        raise ParseError(f"unsupported config source type {type(source)!r}")

    if "preset" in cfg:
        cfg = _resolve_preset(cfg)

    for key in ("n_S", "n_B", "drift", "bath", "target", "controls"):
        if key not in cfg:
            raise ValidationError(f"{key}: required field missing")

    model = HamiltonianModel(
        n_s=int(cfg["n_S"]),
        n_b=int(cfg["n_B"]),
        drift=matrix_from_json(cfg["drift"], "drift"),
        control_generators=[
            matrix_from_json(m, f"control_generators[{j}]")
            for j, m in enumerate(cfg.get("control_generators", []))
        ],
        coherent_error=(
            np.array(
                [
                    matrix_from_json(m, f"coherent_error[{k}]")
                    for k, m in enumerate(cfg["coherent_error"])
                ]
            )
            if cfg.get("coherent_error") is not None
            else None
        ),
        bath=matrix_from_json(cfg["bath"], "bath"),
        couplings=[
            (
                matrix_from_json(c["system"], f"couplings[{i}].system"),
                matrix_from_json(c["bath"], f"couplings[{i}].bath"),
            )
            for i, c in enumerate(cfg.get("couplings", []))
        ],
    )
    ctl = cfg["controls"]
    controls = PwcControls(
        gate_time=float(ctl.get("T", 1.0)),
        n_pulses=int(ctl["n_pulses"]),
        channels=np.asarray(ctl["channels"], dtype=float)
        if ctl.get("channels")
        else np.zeros((0, int(ctl["n_pulses"]))),
        v_max=float(ctl.get("v_max", 7.5)),
    )
    if controls.n_channels != len(model.control_generators):
        raise ValidationError(
            f"controls.channels: {controls.n_channels} channels but "
            f"{len(model.control_generators)} control generators"
        )
    target = TargetGate(
        matrix_from_json(cfg["target"]["matrix"], "target.matrix"),
        str(cfg["target"].get("label", "target")),
    )
    if target.dim != model.n_s:
        raise ValidationError(
            f"target.matrix: dimension {target.dim} does not match n_S = {model.n_s}"
        )
    return model, controls, target


def save_model(
    path, model: HamiltonianModel, controls: PwcControls, target: TargetGate
) -> None:
    Path(path).write_text(json.dumps(model_to_config(model, controls, target), indent=2))


def with_controls(controls: PwcControls, channels: np.ndarray) -> PwcControls:
    """Copy of the controls with new channel amplitudes."""
    return replace(controls, channels=np.asarray(channels, dtype=float))
