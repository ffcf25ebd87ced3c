"""Gate fidelity measures: state, nominal, worst-case, average, nuclear.

The worst-case and average fidelities admit analytic lower bounds in terms of
the final-time interaction-frame unitary's deviation from the identity; the
exact worst case is the distance from the origin to the numerical range of a
single composite matrix, and the nuclear-norm fidelity optimizes over a free
final-time bath unitary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotNormalized


def state_fidelity(u_tilde_t, u_s_t, target_matrix, psi_in) -> float:
    """|<psi|(W^dag U_S(T) kron I_B) U~(T)|psi>| for a unit system-bath state."""
    psi = np.asarray(psi_in, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise NotNormalized(f"input state norm {np.linalg.norm(psi):.15g} != 1")
    a = composite_error_unitary(u_tilde_t, u_s_t, target_matrix)
    if a.shape[0] != psi.size:
        raise DimensionMismatch(f"state dim {psi.size} vs unitary dim {a.shape[0]}")
    return float(abs(psi.conj() @ (a @ psi)))


def nominal_fidelity(u_s_t, target_matrix) -> float:
    """Overlap fidelity |Tr(W^dag U_S(T)) / n_S|; 1 iff U_S(T) = phi W."""
    u = np.asarray(u_s_t, dtype=complex)
    w = np.asarray(target_matrix, dtype=complex)
    if u.shape != w.shape:
        raise DimensionMismatch(f"unitary {u.shape} vs target {w.shape}")
    n = u.shape[0]
    return float(abs(np.trace(w.conj().T @ u)) / n)


def worst_case_lower_bound(u_tilde_t) -> float:
    """max(1 - ||U~(T) - I||^2 / 2, 0)."""
    u = linalg.check_unitary(u_tilde_t, "interaction-frame unitary")
    dev = np.linalg.norm(u - np.eye(u.shape[0]), 2)
    return max(1.0 - 0.5 * dev**2, 0.0)


def average_lower_bound(u_tilde_t) -> float:
    """max(1 - ||U~(T) - I||_F^2 / (2d), 0)."""
    u = linalg.check_unitary(u_tilde_t, "interaction-frame unitary")
    d = u.shape[0]
    dev = np.linalg.norm(u - np.eye(d))
    return max(1.0 - dev**2 / (2.0 * d), 0.0)


def eigenphase_lower_bounds(u_tilde_t) -> tuple[float, float]:
    """Eigenphase forms of the two lower bounds.

    For eigenvalues exp(i phi_k) of the unitary these are
    max(min_k cos(phi_k), 0) and max(mean_k cos(phi_k), 0); they must agree
    with the norm forms to within the eigensolver tolerance.
    """
    u = linalg.check_unitary(u_tilde_t, "interaction-frame unitary")
    re = np.linalg.eigvals(u).real
    return max(float(re.min()), 0.0), max(float(re.mean()), 0.0)


def composite_error_unitary(u_tilde_t, u_s_t=None, target_matrix=None) -> np.ndarray:
    """(W^dag U_S(T) kron I_B) U~(T); the identity factor when W, U_S are omitted."""
    u_tilde = np.asarray(u_tilde_t, dtype=complex)
    if u_s_t is None or target_matrix is None:
        return u_tilde
    u_s = np.asarray(u_s_t, dtype=complex)
    w = np.asarray(target_matrix, dtype=complex)
    d = u_tilde.shape[0]
    n_s = u_s.shape[0]
    if d % n_s != 0:
        raise DimensionMismatch(f"total dim {d} not a multiple of system dim {n_s}")
    n_b = d // n_s
    return np.kron(w.conj().T @ u_s, np.eye(n_b)) @ u_tilde


def worst_case_exact(u_tilde_t, u_s_t=None, target_matrix=None) -> float:
    """Exact worst-case fidelity over all pure system-bath input states.

    Equals the distance from the origin to the numerical range of the
    composite matrix, i.e. the minimum of |Tr(A rho)| over density matrices.
    """
    a = composite_error_unitary(u_tilde_t, u_s_t, target_matrix)
    linalg.check_unitary(a, "composite error unitary")
    return linalg.numerical_range_distance(a)


def block_trace(u_tilde_t, n_s: int, n_b: int) -> np.ndarray:
    """Sum of the n_B x n_B diagonal blocks in system-major ordering."""
    u = np.asarray(u_tilde_t, dtype=complex)
    if u.shape != (n_s * n_b, n_s * n_b):
        raise DimensionMismatch(
            f"unitary shape {u.shape} does not match n_S*n_B = {n_s}*{n_b}"
        )
    gamma = np.zeros((n_b, n_b), dtype=complex)
    for i in range(n_s):
        gamma += u[i * n_b : (i + 1) * n_b, i * n_b : (i + 1) * n_b]
    return gamma


def nuclear_fidelity(u_tilde_t, n_s: int, n_b: int) -> tuple[float, np.ndarray]:
    """Fidelity optimized over a free final-time bath unitary.

    Returns (F_nuc, Phi_B_opt) where F_nuc is the scaled nuclear norm of the
    block trace and Phi_B_opt = V_L V_R^dag attains the minimum of
    ||U~ - I_S kron Phi_B||_F over bath unitaries.
    """
    gamma = block_trace(u_tilde_t, n_s, n_b)
    v_l, s, v_rh = np.linalg.svd(gamma)
    f_nuc = float(s.sum()) / (n_s * n_b)
    return f_nuc, v_l @ v_rh


def average_fidelity_mc(
    u_tilde_t, n_states: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo estimate of the Haar-average state fidelity.

    Returns (mean, standard error) of |<psi|U|psi>| over Haar-random states.
    """
    u = np.asarray(u_tilde_t, dtype=complex)
    d = u.shape[0]
    vals = np.empty(n_states)
    for i in range(n_states):
        psi = linalg.haar_state(d, rng)
        vals[i] = abs(psi.conj() @ (u @ psi))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_states))


@dataclass
class FidelityReport:
    f_nom: float
    f_wc_low: float
    f_avg_low: float
    f_nuc: float
    f_wc_exact: float | None = None
    f_state: float | None = None
    phi_b_opt: np.ndarray | None = None


def fidelity_report(
    u_tilde_t,
    u_s_t,
    target_matrix,
    n_s: int,
    n_b: int,
    psi_in=None,
    exact: bool = True,
) -> FidelityReport:
    """Evaluate every fidelity measure for one propagated gate."""
    f_nuc, phi_b = nuclear_fidelity(u_tilde_t, n_s, n_b)
    return FidelityReport(
        f_nom=nominal_fidelity(u_s_t, target_matrix),
        f_wc_low=worst_case_lower_bound(u_tilde_t),
        f_avg_low=average_lower_bound(u_tilde_t),
        f_nuc=f_nuc,
        f_wc_exact=(
            worst_case_exact(u_tilde_t, u_s_t, target_matrix) if exact else None
        ),
        f_state=(
            state_fidelity(u_tilde_t, u_s_t, target_matrix, psi_in)
            if psi_in is not None
            else None
        ),
        phi_b_opt=phi_b,
    )
