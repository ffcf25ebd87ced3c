"""Uncertainty measures, the time-bandwidth error bound, and fidelity limits.

Everything funnels into a single dimensionless quantity: the effective
time-bandwidth uncertainty T*Omega_bnd, whose square over four is the
accumulated error constant c(T).  The fidelity limit is nontrivial only for
T*Omega_bnd below about 1.8776 rad; beyond that it clamps to zero with a
saturation flag.  Radians are the internal unit everywhere; conversion to Hz
(divide by 2 pi) happens only in reporting helpers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg, model as model_mod, propagation
from .errors import GridMismatch, OutOfRange, PreconditionViolated

# Published endpoint of the physical range, 2*sqrt(ln(1 + sqrt(2))) rounded to
# the four digits used everywhere downstream; the bound clamps to zero there.
T_OMEGA_SATURATION = 1.8776


@dataclass(frozen=True)
class UncertaintyBounds:
    """Aggregate (T, Omega_unc, Omega_avg, Omega_avg_dev), all in rad/time."""

    gate_time: float
    omega_unc: float
    omega_avg: float
    omega_avg_dev: float

    def __post_init__(self):
        if self.gate_time <= 0:
            raise OutOfRange(f"gate_time must be positive, got {self.gate_time}")
        for name in ("omega_unc", "omega_avg", "omega_avg_dev"):
            if getattr(self, name) < 0:
                raise OutOfRange(f"{name} must be nonnegative")
        slack = 1e-9 * max(self.omega_unc, 1.0)
        # time-averaging cannot raise the norm, and a deviation from the
        # average is at most twice the maximum norm
        if self.omega_avg > self.omega_unc + slack:
            raise OutOfRange(
                f"omega_avg = {self.omega_avg:.6g} exceeds omega_unc = "
                f"{self.omega_unc:.6g}"
            )
        if self.omega_avg_dev > 2.0 * self.omega_unc + slack:
            raise OutOfRange(
                f"omega_avg_dev = {self.omega_avg_dev:.6g} exceeds "
                f"2*omega_unc = {2 * self.omega_unc:.6g}"
            )

    @property
    def t_omega_unc(self) -> float:
        return self.gate_time * self.omega_unc

    @property
    def t_omega_avg(self) -> float:
        return self.gate_time * self.omega_avg

    @property
    def t_omega_avg_dev(self) -> float:
        return self.gate_time * self.omega_avg_dev


@dataclass(frozen=True)
class BoundResult:
    t_omega_bnd: float  # radians
    c_t: float
    f_lb: float
    infidelity_ub: float
    saturated: bool


def fidelity_lower_bound(t_omega_bnd: float) -> float:
    """F_lb as a function of the effective time-bandwidth uncertainty (rad)."""
    if t_omega_bnd < 0:
        raise OutOfRange(f"t_omega_bnd must be nonnegative, got {t_omega_bnd}")
    if t_omega_bnd >= T_OMEGA_SATURATION:
        return 0.0
    c_t = (t_omega_bnd / 2.0) ** 2
    return max(1.0 - 0.5 * (np.expm1(c_t)) ** 2, 0.0)


def bound_from_t_omega(t_omega_bnd: float) -> BoundResult:
    f_lb = fidelity_lower_bound(t_omega_bnd)
    return BoundResult(
        t_omega_bnd=t_omega_bnd,
        c_t=(t_omega_bnd / 2.0) ** 2,
        f_lb=f_lb,
        infidelity_ub=1.0 - f_lb,
        saturated=t_omega_bnd >= T_OMEGA_SATURATION,
    )


def effective_error_bound(u: UncertaintyBounds) -> BoundResult:
    """Theorem-level aggregate: T*Omega_bnd and the fidelity lower bound."""
    t_omega = np.sqrt(
        u.t_omega_unc * u.t_omega_avg_dev + 4.0 * u.t_omega_avg
    )
    return bound_from_t_omega(float(t_omega))


def invert_bound(infidelity: float, gate_time_s: float) -> float:
    """Largest uncertainty frequency (Hz) whose bound meets a target infidelity.

    Solves 1 - F_lb = infidelity for T*Omega_bnd and reports Omega_bnd / 2pi.
    """
    if not 0.0 < infidelity < 1.0:
        raise OutOfRange(f"target infidelity must be in (0, 1), got {infidelity}")
    if gate_time_s <= 0:
        raise OutOfRange(f"gate time must be positive, got {gate_time_s}")
    t_omega = 2.0 * np.sqrt(np.log1p(np.sqrt(2.0 * infidelity)))
    return float(t_omega / gate_time_s / (2.0 * np.pi))


def bound_curve(
    t_omega_min: float, t_omega_max: float, n_points: int
) -> np.ndarray:
    """Rows of (T*Omega_bnd in rad, infidelity upper bound 1 - F_lb)."""
    if n_points < 2:
        raise OutOfRange(f"need at least 2 points, got {n_points}")
    if not 0.0 < t_omega_min < t_omega_max <= T_OMEGA_SATURATION:
        raise OutOfRange(
            f"range ({t_omega_min}, {t_omega_max}] must sit within "
            f"(0, {T_OMEGA_SATURATION}]"
        )
    grid = np.linspace(t_omega_min, t_omega_max, n_points)
    return np.column_stack([grid, [1.0 - fidelity_lower_bound(x) for x in grid]])


def measure_uncertainty(
    model: model_mod.HamiltonianModel,
    prop: propagation.PropagationResult,
    iops: propagation.InteractionOps,
) -> UncertaintyBounds:
    """Evaluate the three uncertainty measures on the sampling grid.

    Omega_unc uses the raw operator norms (unitary conjugation preserves
    them); Omega_avg and Omega_avg_dev are measured on the discrete midpoint
    grid carried by the propagation result.
    """
    if iops.n_avg != prop.n_avg:
        raise GridMismatch(
            f"interaction ops sampled on {iops.n_avg} points, "
            f"propagation on {prop.n_avg}"
        )
    gate_time = float(prop.sample_times[-1] + prop.sample_times[0])

    omega_unc = 0.0
    if model.coherent_error is not None:
        omega_unc += max(linalg.op_norm(c) for c in model.coherent_error)
    omega_unc += sum(
        linalg.op_norm(s) * linalg.op_norm(b) for s, b in model.couplings
    )

    omega_avg = 0.0
    if iops.coh_tilde is not None:
        omega_avg += linalg.op_norm(propagation.time_average(iops.coh_tilde))
    for s_t, b_t in zip(iops.s_tilde, iops.b_tilde):
        coupling_samples = np.einsum("tij,tkl->tikjl", s_t, b_t).reshape(
            s_t.shape[0], model.dim, model.dim
        )
        omega_avg += linalg.op_norm(propagation.time_average(coupling_samples))

    h_tilde = iops.h_tilde()
    h_avg = propagation.time_average(h_tilde)
    deviations = np.linalg.eigvalsh(h_tilde - h_avg)
    omega_avg_dev = float(np.abs(deviations).max()) if h_tilde.size else 0.0

    return UncertaintyBounds(
        gate_time=gate_time,
        omega_unc=omega_unc,
        omega_avg=omega_avg,
        omega_avg_dev=omega_avg_dev,
    )


def minimum_uncertainty_corollary(
    model: model_mod.HamiltonianModel,
    prop: propagation.PropagationResult,
    iops: propagation.InteractionOps,
    target_matrix,
    avg_tol: float = 1e-6,
) -> BoundResult:
    """Intrinsic-uncertainty bound when control nulls every time average.

    Requires nominal fidelity 1 and all time-averaged interaction terms below
    ``avg_tol``; then T*Omega_bnd collapses to T*Omega_unc.
    """
    from .fidelity import nominal_fidelity

    f_nom = nominal_fidelity(prop.u_s_final, target_matrix)
    if 1.0 - f_nom > 1e-6:
        raise PreconditionViolated(f"nominal fidelity 1 - F_nom = {1 - f_nom:.3e}")
    if iops.coh_tilde is not None:
        avg = linalg.op_norm(propagation.time_average(iops.coh_tilde))
        if avg > avg_tol:
            raise PreconditionViolated(f"averaged coherent error norm = {avg:.3e}")
    for alpha, (s_t, b_t) in enumerate(zip(iops.s_tilde, iops.b_tilde)):
        coupling_samples = np.einsum("tij,tkl->tikjl", s_t, b_t).reshape(
            s_t.shape[0], model.dim, model.dim
        )
        avg = linalg.op_norm(propagation.time_average(coupling_samples))
        if avg > avg_tol:
            raise PreconditionViolated(
                f"averaged coupling term {alpha} norm = {avg:.3e}"
            )
    gate_time = float(prop.sample_times[-1] + prop.sample_times[0])
    omega_unc = sum(
        linalg.op_norm(s) * linalg.op_norm(b) for s, b in model.couplings
    )
    if model.coherent_error is not None:
        omega_unc += max(linalg.op_norm(c) for c in model.coherent_error)
    return bound_from_t_omega(gate_time * omega_unc)


def average_case_bound(u: UncertaintyBounds, d: int, kappa: float | None = None) -> float:
    """Frobenius-route average-fidelity bound with rank proxy kappa.

    Known to be loose (the worst-case bound is substituted for it in the main
    result); kept for the proof-constant checks.  ``kappa`` defaults to d.
    """
    if kappa is None:
        kappa = float(d)
    if kappa < 1.0:
        raise OutOfRange(f"kappa must be >= 1, got {kappa}")
    c_t = u.t_omega_avg + u.t_omega_unc * u.t_omega_avg_dev / 4.0
    return max(1.0 - (np.expm1(kappa * c_t)) ** 2 / (2.0 * d), 0.0)


class AntiHermitianInverseCheck(NamedTuple):
    op_norm_inv: float
    frob_norm_inv: float
    op_bound_ok: bool
    frob_bound_ok: bool


def anti_hermitian_inverse_check(k_matrix) -> AntiHermitianInverseCheck:
    """Verify ||(I+K)^{-1}|| <= 1 and ||(I+K)^{-1}||_F <= sqrt(d) for K^dag = -K."""
    k = linalg.check_anti_hermitian(k_matrix, "K")
    d = k.shape[0]
    inv = np.linalg.inv(np.eye(d) + k)
    op = float(np.linalg.norm(inv, 2))
    fro = float(np.linalg.norm(inv))
    tol = 1e-9
    return AntiHermitianInverseCheck(
        op_norm_inv=op,
        frob_norm_inv=fro,
        op_bound_ok=op <= 1.0 + tol,
        frob_bound_ok=fro <= np.sqrt(d) + tol,
    )
