"""Unitary evolution over the gate time and interaction-frame operators.

Controls are piecewise constant, so each propagator is an exact product of
segment exponentials; no ODE integrator is involved.  Time averages use
midpoint samples t_i = (i - 1/2) T / N_avg on a grid that refines the control
grid, which keeps the interaction-frame identity exact on the discrete model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, model as model_mod
from .errors import EmptyInput, GridMismatch

DEFAULT_N_AVG = 25


def _pwc_propagate(hams, gate_time: float, n_avg: int):
    """Propagate through per-segment constant Hamiltonians.

    Returns the final unitary and the unitaries at the n_avg midpoint times.
    """
    n_segments = len(hams)
    if n_avg < 1 or n_avg % n_segments != 0:
        raise GridMismatch(
            f"n_avg = {n_avg} must be a positive multiple of {n_segments} segments"
        )
    per_segment = n_avg // n_segments
    dt = gate_time / n_avg
    dim = hams[0].shape[0]
    u = np.eye(dim, dtype=complex)
    samples = np.empty((n_avg, dim, dim), dtype=complex)
    i = 0
    for h in hams:
        w, v = linalg.eig_hermitian(h)
        half = (v * np.exp(-1j * w * dt / 2.0)) @ v.conj().T
        full = (v * np.exp(-1j * w * dt)) @ v.conj().T
        cur = half @ u
        samples[i] = cur
        i += 1
        for _ in range(per_segment - 1):
            cur = full @ cur
            samples[i] = cur
            i += 1
        u = half @ cur
    return u, samples


def sample_times(gate_time: float, n_avg: int) -> np.ndarray:
    return (np.arange(n_avg) + 0.5) * gate_time / n_avg


def propagate_nominal(
    model: model_mod.HamiltonianModel,
    controls: model_mod.PwcControls,
    n_avg: int = DEFAULT_N_AVG,
):
    """Uncertainty-free system evolution: final U_S(T) and midpoint samples."""
    hams = [
        model_mod.nominal_system_hamiltonian(model, controls, k)
        for k in range(controls.n_pulses)
    ]
    return _pwc_propagate(hams, controls.gate_time, n_avg)


def propagate_bath(
    model: model_mod.HamiltonianModel, gate_time: float, n_avg: int = DEFAULT_N_AVG
):
    """Bath self-evolution exp(-i H_B t) at T and at the midpoint times."""
    w, v = linalg.eig_hermitian(model.bath)
    times = sample_times(gate_time, n_avg)
    samples = np.einsum(
        "ij,tj,kj->tik", v, np.exp(-1j * np.outer(times, w)), v.conj()
    )
    u_t = (v * np.exp(-1j * w * gate_time)) @ v.conj().T
    return u_t, samples


@dataclass(eq=False)
class PropagationResult:
    """Nominal, bath, and total unitaries over one gate."""

    sample_times: np.ndarray
    u_s_samples: np.ndarray
    u_b_samples: np.ndarray
    u_s_final: np.ndarray
    u_b_final: np.ndarray
    u_total_final: np.ndarray
    u_tilde_final: np.ndarray
    n_pulses: int

    @property
    def n_avg(self) -> int:
        return len(self.sample_times)


def propagate_total(
    model: model_mod.HamiltonianModel,
    controls: model_mod.PwcControls,
    n_avg: int = DEFAULT_N_AVG,
) -> PropagationResult:
    """Propagate nominal, bath, and full system-bath evolutions on one grid."""
    u_s_final, u_s_samples = propagate_nominal(model, controls, n_avg)
    u_b_final, u_b_samples = propagate_bath(model, controls.gate_time, n_avg)
    hams = [
        model_mod.assemble_total_hamiltonian(model, controls, k)
        for k in range(controls.n_pulses)
    ]
    u_total_final, _ = _pwc_propagate(hams, controls.gate_time, n_avg)
    u_tilde_final = np.kron(u_s_final, u_b_final).conj().T @ u_total_final
    return PropagationResult(
        sample_times=sample_times(controls.gate_time, n_avg),
        u_s_samples=u_s_samples,
        u_b_samples=u_b_samples,
        u_s_final=u_s_final,
        u_b_final=u_b_final,
        u_total_final=u_total_final,
        u_tilde_final=u_tilde_final,
        n_pulses=controls.n_pulses,
    )


@dataclass(eq=False)
class InteractionOps:
    """Interaction-frame operators at every midpoint sample."""

    coh_tilde: np.ndarray | None  # (n_avg, n_s, n_s) or None
    s_tilde: list[np.ndarray]  # per coupling, (n_avg, n_s, n_s)
    b_tilde: list[np.ndarray]  # per coupling, (n_avg, n_b, n_b)
    n_s: int
    n_b: int
    n_avg: int

    def h_tilde(self) -> np.ndarray:
        """Assembled interaction-frame uncertainty Hamiltonian per sample."""
        d = self.n_s * self.n_b
        out = np.zeros((self.n_avg, d, d), dtype=complex)
        eye_b = np.eye(self.n_b)
        for i in range(self.n_avg):
            if self.coh_tilde is not None:
                out[i] += np.kron(self.coh_tilde[i], eye_b)
            for s_t, b_t in zip(self.s_tilde, self.b_tilde):
                out[i] += np.kron(s_t[i], b_t[i])
        return out


def _conjugate_samples(frames: np.ndarray, op: np.ndarray) -> np.ndarray:
    return np.einsum("tji,jk,tkl->til", frames.conj(), op, frames)


def interaction_ops(
    prop: PropagationResult, model: model_mod.HamiltonianModel
) -> InteractionOps:
    """Conjugate coherent-error and coupling operators into the rotating frame."""
    coh_tilde = None
    if model.coherent_error is not None:
        per_segment = prop.n_avg // prop.n_pulses
        coh_tilde = np.empty((prop.n_avg, model.n_s, model.n_s), dtype=complex)
        for i in range(prop.n_avg):
            seg = model.coherent_error_segment(i // per_segment, prop.n_pulses)
            u = prop.u_s_samples[i]
            coh_tilde[i] = u.conj().T @ seg @ u
    s_tilde = [
        _conjugate_samples(prop.u_s_samples, s_op) for s_op, _ in model.couplings
    ]
    b_tilde = [
        _conjugate_samples(prop.u_b_samples, b_op) for _, b_op in model.couplings
    ]
    return InteractionOps(
        coh_tilde=coh_tilde,
        s_tilde=s_tilde,
        b_tilde=b_tilde,
        n_s=model.n_s,
        n_b=model.n_b,
        n_avg=prop.n_avg,
    )


def time_average(samples) -> np.ndarray:
    """Arithmetic mean of equally weighted matrix samples."""
    samples = np.asarray(samples, dtype=complex)
    if samples.size == 0:
        raise EmptyInput("time_average of an empty sample list")
    return samples.mean(axis=0)
