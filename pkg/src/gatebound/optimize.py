"""Robust pulse search: nominal-fidelity and time-average objectives.

The search is a spectral projected gradient (Barzilai-Borwein step with
monotone Armijo backtracking) on the box |v| <= v_max, restarted from
uniformly random pulse tables.  Gradients are exact: each segment exponential
is differentiated through its eigendecomposition, so finite differences serve
only as a verification oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, model as model_mod
from .errors import DimensionMismatch, GridMismatch, StageOneFailed, ValidationError


@dataclass(frozen=True)
class OptimizerConfig:
    lam: float = 0.1            # weight on the robustness term
    f0: float = 0.9999          # two-stage switching threshold
    v_max: float = 7.5
    n_restarts: int = 20
    max_iters: int = 4000
    step_init: float = 0.25
    grad_tol: float = 1e-10     # projected-gradient infinity norm
    f_tol: float = 0.0          # absolute objective floor for early stop
    feasibility_tol: float = 1e-9  # stage-2 allowance below f0 during search
    seed: int = 0
    n_pulses: int = 5
    n_avg: int = 25
    gate_time: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.f0 <= 1.0:
            raise ValidationError(f"f0 must lie in [0, 1], got {self.f0}")
        if self.v_max <= 0:
            raise ValidationError(f"v_max must be positive, got {self.v_max}")
        if self.lam < 0:
            raise ValidationError(f"lambda weight must be >= 0, got {self.lam}")
        if self.n_avg % self.n_pulses != 0:
            raise GridMismatch(
                f"n_avg = {self.n_avg} must be a multiple of n_pulses = {self.n_pulses}"
            )


@dataclass(eq=False)
class OptimizationOutcome:
    controls: model_mod.PwcControls
    f_nom: float                # squared overlap |Tr(W^dag U_S(T))/n_S|^2
    j_rbst: float               # operator norm of the worst time-averaged term
    objective: float
    trace: list = field(default_factory=list)
    restart_index: int = 0
    converged: bool = True
    stage: str = "single-stage"
    constraint_violation: float = 0.0
    seed: int = 0

    def summary(self) -> dict:
        return {
            "stage": self.stage,
            "f_nom": self.f_nom,
            "infidelity_nom": 1.0 - self.f_nom,
            "j_rbst": self.j_rbst,
            "objective": self.objective,
            "restart_index": self.restart_index,
            "converged": self.converged,
            "constraint_violation": self.constraint_violation,
            "iterations": len(self.trace),
            "seed": self.seed,
            "max_amplitude": float(np.max(np.abs(self.controls.channels)))
            if self.controls.channels.size
            else 0.0,
        }


def _dexp_factors(w: np.ndarray, tau) -> np.ndarray:
    """Divided-difference tables for d/dH exp(-i H tau) in the eigenbasis.

    Entry (p, q) is (f(w_p) - f(w_q)) / (w_p - w_q) for f(x) = exp(-i x tau),
    in the cancellation-free product form with a sinc.  Broadcasts over any
    leading axes shared by ``w`` and ``tau``.
    """
    tau = np.asarray(tau)[..., None, None]
    diff = (w[..., :, None] - w[..., None, :]) * tau / 2.0
    mean = (w[..., :, None] + w[..., None, :]) * tau / 2.0
    return -1j * tau * np.exp(-1j * mean) * np.sinc(diff / np.pi)


class _PulseWorkspace:
    """Propagation cache for one pulse table.

    Batched over segments: eigendecompositions, segment-start prefix
    unitaries, midpoint sample unitaries, and the derivative tables that the
    two objectives share.
    """

    def __init__(self, model, channels, n_pulses, n_avg, gate_time):
        if channels.shape[0] != len(model.control_generators):
            raise DimensionMismatch(
                f"{channels.shape[0]} channels vs "
                f"{len(model.control_generators)} generators"
            )
        if n_avg % n_pulses != 0:
            raise GridMismatch(
                f"n_avg = {n_avg} must be a multiple of n_pulses = {n_pulses}"
            )
        self.model = model
        self.channels = channels
        self.n_pulses = n_pulses
        self.n_avg = n_avg
        self.per_segment = n_avg // n_pulses
        self.dt = gate_time / n_avg
        self.seg_tau = gate_time / n_pulses
        n_s = model.n_s

        self.gens = (
            np.stack(model.control_generators)
            if model.control_generators
            else np.zeros((0, n_s, n_s), dtype=complex)
        )
        hams = model.drift[None, :, :] + np.einsum(
            "jk,jpq->kpq", channels, self.gens, optimize=True
        )
        self.w, self.v = np.linalg.eigh(hams)  # (K, n), (K, n, n)
        half = np.einsum(
            "kip,kp,kjp->kij", self.v, np.exp(-1j * self.w * self.dt / 2), self.v.conj()
        )
        full = np.einsum(
            "kip,kp,kjp->kij", self.v, np.exp(-1j * self.w * self.dt), self.v.conj()
        )

        prefix = np.empty((n_pulses + 1, n_s, n_s), dtype=complex)
        prefix[0] = np.eye(n_s)
        samples = np.empty((n_avg, n_s, n_s), dtype=complex)
        i = 0
        for k in range(n_pulses):
            cur = half[k] @ prefix[k]
            samples[i] = cur
            i += 1
            for _ in range(self.per_segment - 1):
                cur = full[k] @ cur
                samples[i] = cur
                i += 1
            prefix[k + 1] = half[k] @ cur
        self.prefix = prefix
        self.samples = samples
        self.u_final = prefix[-1]
        self.local_taus = (np.arange(self.per_segment) + 0.5) * self.dt
        self._dp = None
        self._directions = None

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    def _derivative_tables(self):
        """dP[k, j] = d/dv_{j,k} exp(-i H_k seg_tau), plus the eigenbasis
        directions reused by the in-segment sample derivatives."""
        if self._dp is None:
            directions = np.einsum(
                "kpi,jpq,kqm->kjim", self.v.conj(), self.gens, self.v, optimize=True
            )
            gamma = _dexp_factors(self.w, self.seg_tau)  # (K, n, n)
            self._dp = np.einsum(
                "kip,kjpq,kmq->kjim",
                self.v,
                gamma[:, None, :, :] * directions,
                self.v.conj(),
                optimize=True,
            )
            self._directions = directions
        return self._dp, self._directions

    # -- nominal fidelity ---------------------------------------------------

    def fidelity_value(self, target_matrix) -> float:
        z = np.trace(np.asarray(target_matrix, complex).conj().T @ self.u_final)
        return float(abs(z / self.model.n_s) ** 2)

    def fidelity_value_grad(self, target_matrix):
        n_s = self.model.n_s
        w_dag = np.asarray(target_matrix, dtype=complex).conj().T
        z = np.trace(w_dag @ self.u_final) / n_s
        if self.n_channels == 0:
            return float(abs(z) ** 2), np.zeros((0, self.n_pulses))
        dp, _ = self._derivative_tables()
        post = self.u_final[None] @ self.prefix[1:].conj().transpose(0, 2, 1)
        left = w_dag[None] @ post  # (K, n, n)
        dz = (
            np.einsum("kab,kjbc,kca->kj", left, dp, self.prefix[:-1], optimize=True)
            / n_s
        )
        grad = 2.0 * np.real(np.conj(z) * dz)  # (K, J)
        return float(abs(z) ** 2), grad.T.copy()

    # -- robustness measure ---------------------------------------------------

    def _averaged_terms(self):
        """(per-sample operator stack, average) for each interaction term."""
        terms = []
        if self.model.coherent_error is not None:
            ops = np.repeat(
                self.model.coherent_error, self.per_segment, axis=0
            ).astype(complex)
            if ops.shape[0] != self.n_avg:
                raise GridMismatch(
                    f"coherent error spans {ops.shape[0]} samples, grid has {self.n_avg}"
                )
            terms.append(ops)
        for s_op, _ in self.model.couplings:
            terms.append(
                np.broadcast_to(s_op, (self.n_avg, self.model.n_s, self.model.n_s))
            )
        return terms

    def robust_value(self) -> float:
        best = 0.0
        for ops in self._averaged_terms():
            avg = (
                np.einsum(
                    "tji,tjk,tkl->il", self.samples.conj(), ops, self.samples,
                    optimize=True,
                )
                / self.n_avg
            )
            best = max(best, float(np.abs(np.linalg.eigvalsh(avg)).max()))
        return best

    def robust_value_grad(self):
        """J_rbst and its gradient.

        J_rbst is the largest operator norm among the time-averaged
        interaction-frame terms; the gradient follows the active term through
        its extremal eigenvector (a subgradient at eigenvalue crossings).
        """
        terms = self._averaged_terms()
        if not terms or self.n_channels == 0:
            return (
                self.robust_value() if terms else 0.0,
                np.zeros((self.n_channels, self.n_pulses)),
            )
        best = None
        for ops in terms:
            avg = (
                np.einsum(
                    "tji,tjk,tkl->il", self.samples.conj(), ops, self.samples,
                    optimize=True,
                )
                / self.n_avg
            )
            evals, evecs = np.linalg.eigh(avg)
            top = int(np.argmax(np.abs(evals)))
            value = float(abs(evals[top]))
            if best is None or value > best[0]:
                sign = 1.0 if evals[top] >= 0 else -1.0
                best = (value, sign, evecs[:, top], ops)
        value, sign, u_top, ops = best

        k_dim, m = self.n_pulses, self.per_segment
        dp, directions = self._derivative_tables()
        x = np.einsum("tij,j->ti", self.samples, u_top)  # U_i u
        cx = np.einsum("tij,tj->ti", ops, x)  # C_i U_i u
        rows = np.einsum("ti,tij->tj", cx.conj(), self.samples)  # (C x)^dag U_i
        seg_rows = rows.reshape(k_dim, m, -1).sum(axis=1)
        suffix = np.zeros_like(seg_rows)
        if k_dim > 1:
            suffix[:-1] = seg_rows[::-1].cumsum(axis=0)[::-1][1:]
        qk = np.einsum("kij,j->ki", self.prefix[:-1], u_top)
        later = np.real(
            np.einsum(
                "ka,kba,kjbc,kc->kj",
                suffix,
                self.prefix[1:].conj(),
                dp,
                qk,
                optimize=True,
            )
        )
        a = np.einsum(
            "kip,kli->klp", self.v.conj(), cx.reshape(k_dim, m, -1), optimize=True
        )
        b = np.einsum("kip,ki->kp", self.v.conj(), qk)
        gamma_local = _dexp_factors(
            self.w[:, None, :], self.local_taus[None, :]
        )  # (K, m, n, n)
        inside = np.real(
            np.einsum(
                "klp,klpq,kjpq,kq->kj",
                a.conj(),
                gamma_local,
                directions,
                b,
                optimize=True,
            )
        )
        grad = sign * 2.0 / self.n_avg * (later + inside)  # (K, J)
        return value, grad.T.copy()


def _workspace(model, controls, n_avg) -> _PulseWorkspace:
    return _PulseWorkspace(
        model, controls.channels, controls.n_pulses, n_avg, controls.gate_time
    )


def objective_nominal(model, target, controls):
    """Squared overlap fidelity and its exact gradient w.r.t. all amplitudes."""
    target_matrix = target.matrix if hasattr(target, "matrix") else target
    ws = _workspace(model, controls, controls.n_pulses)
    return ws.fidelity_value_grad(target_matrix)


def objective_robust(model, controls, n_avg):
    """J_rbst (worst time-averaged interaction-term norm) and its gradient."""
    return _workspace(model, controls, n_avg).robust_value_grad()


def averaged_coupling(model, controls, n_avg, op=None) -> np.ndarray:
    """Discrete time average of U_S(t)^dag C U_S(t) on the midpoint grid."""
    ws = _workspace(model, controls, n_avg)
    if op is None:
        op = _single_coupling_op(model)
    return (
        np.einsum(
            "tji,jk,tkl->il", ws.samples.conj(), np.asarray(op, complex), ws.samples
        )
        / n_avg
    )


def _single_coupling_op(model) -> np.ndarray:
    if len(model.couplings) != 1:
        raise DimensionMismatch(
            f"expected exactly one coupling to pick the operator, "
            f"model has {len(model.couplings)}"
        )
    return model.couplings[0][0]


def nullspace_check(controls, model, n_avg, op=None) -> float:
    """Certificate that the averaged conjugation annihilates the coupling.

    Builds the averaged two-sided conjugation matrix (transpose factor on the
    left, adjoint on the right, column-stacking convention) and returns the
    norm of its action on the vectorized coupling operator.
    """
    ws = _workspace(model, controls, n_avg)
    if op is None:
        op = _single_coupling_op(model)
    n_s = model.n_s
    cal_a = np.zeros((n_s * n_s, n_s * n_s), dtype=complex)
    for i in range(n_avg):
        u = ws.samples[i]
        cal_a += np.kron(u.T, u.conj().T)
    cal_a /= n_avg
    return float(np.linalg.norm(cal_a @ linalg.vec(op)))


def _spg_minimize(
    value_grad,
    value_only,
    x0: np.ndarray,
    v_max: float,
    max_iters: int,
    grad_tol: float,
    f_floor: float,
    step_init: float,
):
    """Monotone spectral projected gradient on the box |x| <= v_max.

    Returns (x, f, trace, converged); the trace holds the objective after
    every accepted step and is non-increasing by construction.
    """
    x = np.clip(x0, -v_max, v_max)
    f, g = value_grad(x)
    trace = [f]
    if f <= f_floor:
        return x, f, trace, True
    step = step_init
    converged = False
    stall_window, stall_drop = 200, 1e-2
    f_checkpoint = f
    for it in range(max_iters):
        if it and it % stall_window == 0:
            # a basin is declared converged when two hundred accepted steps
            # shave off less than a percent
            if f > (1.0 - stall_drop) * f_checkpoint:
                converged = True
                break
            f_checkpoint = f
        projected_grad = np.max(np.abs(np.clip(x - g, -v_max, v_max) - x))
        if projected_grad <= grad_tol:
            converged = True
            break
        d = np.clip(x - step * g, -v_max, v_max) - x
        slope = float(np.sum(g * d))
        if slope > -1e-18:
            converged = True
            break
        alpha, accepted = 1.0, False
        f_new = f
        while alpha >= 1e-13:
            x_new = x + alpha * d
            f_new = value_only(x_new)
            if f_new <= f + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            converged = True  # no descent along the arc at machine scale
            break
        g_old, x_old = g, x
        x = x_new
        f, g = value_grad(x)
        trace.append(f)
        s = x - x_old
        y = g - g_old
        sy = float(np.sum(s * y))
        step = float(np.sum(s * s)) / sy if sy > 1e-18 else step_init
        step = float(np.clip(step, 1e-8, 1e6))
        if f <= f_floor:
            converged = True
            break
    return x, f, trace, converged


def _controls_factory(model, config):
    n_ch = len(model.control_generators)
    shape = (n_ch, config.n_pulses)

    def controls_of(x):
        return model_mod.PwcControls(
            gate_time=config.gate_time,
            n_pulses=config.n_pulses,
            channels=x.reshape(shape),
            v_max=config.v_max,
        )

    def workspace_of(x):
        return _PulseWorkspace(
            model, x.reshape(shape), config.n_pulses, config.n_avg, config.gate_time
        )

    return controls_of, workspace_of


def _restart_points(model, config, x0):
    n_params = len(model.control_generators) * config.n_pulses
    streams = np.random.SeedSequence(config.seed).spawn(config.n_restarts)
    points = []
    for r, ss in enumerate(streams):
        if r == 0 and x0 is not None:
            points.append(np.asarray(x0, dtype=float).reshape(-1).copy())
        else:
            rng = np.random.default_rng(ss)
            points.append(
                rng.uniform(-config.v_max / 2.0, config.v_max / 2.0, n_params)
            )
    return points


def optimize_single_stage(
    model, target, config: OptimizerConfig, x0=None
) -> OptimizationOutcome:
    """Best-of-restarts minimizer of 1 - F_nom + lambda * J_rbst over the box."""
    target_matrix = target.matrix if hasattr(target, "matrix") else target
    controls_of, workspace_of = _controls_factory(model, config)

    def value_grad(x):
        ws = workspace_of(x)
        f_nom, g_nom = ws.fidelity_value_grad(target_matrix)
        value, grad = 1.0 - f_nom, -g_nom
        if config.lam > 0:
            j, g_j = ws.robust_value_grad()
            value += config.lam * j
            grad = grad + config.lam * g_j
        return value, grad.reshape(-1)

    def value_only(x):
        ws = workspace_of(x)
        value = 1.0 - ws.fidelity_value(target_matrix)
        if config.lam > 0:
            value += config.lam * ws.robust_value()
        return value

    best = None
    for r, point in enumerate(_restart_points(model, config, x0)):
        x, f, trace, converged = _spg_minimize(
            value_grad,
            value_only,
            point,
            config.v_max,
            config.max_iters,
            config.grad_tol,
            config.f_tol,
            config.step_init,
        )
        if best is None or f < best[1]:
            best = (x, f, trace, converged, r)
    x, f, trace, converged, r = best
    ws = workspace_of(x)
    return OptimizationOutcome(
        controls=controls_of(x),
        f_nom=ws.fidelity_value(target_matrix),
        j_rbst=ws.robust_value(),
        objective=f,
        trace=trace,
        restart_index=r,
        converged=converged,
        stage="single-stage",
        seed=config.seed,
    )


def _stage2_minimize(workspace_of, target_matrix, x0, config):
    """Minimize J_rbst on {F_nom >= f0}: projected-gradient descent.

    While the constraint is active the descent direction is the J-gradient
    projected onto the fidelity level set (the flat top of the landscape);
    every line-search candidate is pulled back onto the feasible side by
    first-order restoration steps along the fidelity gradient before it is
    judged, so step lengths are not throttled by the surface curvature.
    """
    f0 = config.f0
    active_band = 1e-7
    v_max = config.v_max

    def evaluate(x):
        ws = workspace_of(x)
        j, g_j = ws.robust_value_grad()
        f_nom, g_f = ws.fidelity_value_grad(target_matrix)
        return j, g_j.reshape(-1), f_nom, g_f.reshape(-1)

    def restore(x):
        # Newton-like steps back onto the constraint surface F_nom = f0
        for _ in range(8):
            ws = workspace_of(x)
            f_nom, g_f = ws.fidelity_value_grad(target_matrix)
            if f_nom >= f0:
                return x, True
            g_f = g_f.reshape(-1)
            norm_sq = float(np.sum(g_f * g_f))
            if norm_sq <= 0.0:
                return x, False
            x = np.clip(x + g_f * (f0 - f_nom + 1e-14) / norm_sq, -v_max, v_max)
        return x, workspace_of(x).fidelity_value(target_matrix) >= f0 - config.feasibility_tol

    x = np.clip(x0, -v_max, v_max)
    x, _ = restore(x)
    j, g_j, f_nom, g_f = evaluate(x)
    trace = [j]
    step = config.step_init
    converged = False
    stall_window, stall_drop = 200, 1e-2
    j_checkpoint = j
    for it in range(config.max_iters):
        if it and it % stall_window == 0:
            if j > (1.0 - stall_drop) * j_checkpoint:
                converged = True
                break
            j_checkpoint = j
        direction_grad = g_j
        if f_nom - f0 < active_band:
            norm_sq = float(np.sum(g_f * g_f))
            if norm_sq > 0.0:
                direction_grad = g_j - (float(np.sum(g_j * g_f)) / norm_sq) * g_f
        projected = np.max(np.abs(np.clip(x - direction_grad, -v_max, v_max) - x))
        if projected <= config.grad_tol:
            converged = True
            break
        d = np.clip(x - step * direction_grad, -v_max, v_max) - x
        slope = float(np.sum(direction_grad * d))
        if slope > -1e-18:
            converged = True
            break
        alpha, accepted = 1.0, False
        x_new = x
        while alpha >= 1e-13:
            x_new, feasible = restore(x + alpha * d)
            if feasible:
                j_new = workspace_of(x_new).robust_value()
                if j_new <= j + 1e-4 * alpha * slope:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            converged = True
            break
        g_old, x_old = g_j, x
        x = x_new
        j, g_j, f_nom, g_f = evaluate(x)
        trace.append(j)
        s = x - x_old
        y = g_j - g_old
        sy = float(np.sum(s * y))
        step = float(np.sum(s * s)) / sy if sy > 1e-18 else config.step_init
        step = float(np.clip(step, 1e-8, 1e6))
        if j <= config.f_tol:
            converged = True
            break
    return x, j, trace, converged


def optimize_two_stage(
    model, target, config: OptimizerConfig, x0=None
) -> OptimizationOutcome:
    """Maximize F_nom to the threshold, then minimize J_rbst holding it there.

    Stage 2 is a feasible-direction search: the J gradient is projected onto
    the fidelity level set whenever the constraint is active, so the iterate
    roams the flat top of the fidelity landscape instead of fighting it.
    """
    target_matrix = target.matrix if hasattr(target, "matrix") else target
    controls_of, workspace_of = _controls_factory(model, config)

    def stage1_vg(x):
        ws = workspace_of(x)
        f_nom, g_nom = ws.fidelity_value_grad(target_matrix)
        return 1.0 - f_nom, -g_nom.reshape(-1)

    def stage1_v(x):
        return 1.0 - workspace_of(x).fidelity_value(target_matrix)

    best = None
    for r, point in enumerate(_restart_points(model, config, x0)):
        x1, f1, trace1, _ = _spg_minimize(
            stage1_vg,
            stage1_v,
            point,
            config.v_max,
            config.max_iters,
            config.grad_tol,
            1.0 - config.f0,  # stop stage 1 once the threshold is crossed
            config.step_init,
        )
        if 1.0 - f1 < config.f0 - 1e-12:
            continue
        x2, j2, trace2, converged = _stage2_minimize(
            workspace_of, target_matrix, x1, config
        )
        if best is None or j2 < best[1]:
            best = (x2, j2, trace1 + trace2, converged, r)
    if best is None:
        raise StageOneFailed(
            f"no restart reached the stage-switch threshold f0 = {config.f0}"
        )
    x, j, trace, converged, r = best
    ws = workspace_of(x)
    f_nom = ws.fidelity_value(target_matrix)
    return OptimizationOutcome(
        controls=controls_of(x),
        f_nom=f_nom,
        j_rbst=ws.robust_value(),
        objective=j,
        trace=trace,
        restart_index=r,
        converged=converged,
        stage="two-stage",
        constraint_violation=max(0.0, config.f0 - f_nom),
        seed=config.seed,
    )
