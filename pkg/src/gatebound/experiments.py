"""Monte-Carlo studies: bound validation and the bath-unitary comparison.

These drive the two numerical experiments that sit outside the pulse
pipeline: comparing the fidelity limit against the nuclear-norm and average
lower bounds on random near-identity unitaries, and validating the limit
theorem on random bounded-uncertainty models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bounds, fidelity, linalg, model as model_mod, propagation


@dataclass(eq=False)
class NuclearSample:
    n_b: int
    sample_index: int
    t_omega_bnd: float
    infidelity_bound: float
    infidelity_avg_low: float
    infidelity_nuc: float


def nuclear_experiment(
    delta: float = 0.025,
    n_mc: int = 500,
    n_b_list: tuple[int, ...] = (4, 64),
    n_s: int = 2,
    seed: int = 0,
) -> list[NuclearSample]:
    """Bound comparison on random unitaries exp(i delta H), ||H|| = 1.

    Each sample's generator is a constant uncertainty Hamiltonian of norm
    delta over unit gate time, so its effective time-bandwidth bound is
    2*sqrt(delta * ||H||): the average term is the whole generator and the
    deviation term vanishes.
    """
    rng = np.random.default_rng(seed)
    out = []
    for n_b in n_b_list:
        d = n_s * n_b
        for i in range(n_mc):
            h = linalg.random_hermitian(d, rng)
            h /= linalg.op_norm(h)
            u_tilde = linalg.expm_hermitian(h, -delta)  # exp(+i delta H)
            t_omega = 2.0 * np.sqrt(delta)
            f_nuc, _ = fidelity.nuclear_fidelity(u_tilde, n_s, n_b)
            out.append(
                NuclearSample(
                    n_b=n_b,
                    sample_index=i,
                    t_omega_bnd=t_omega,
                    infidelity_bound=1.0 - bounds.fidelity_lower_bound(t_omega),
                    infidelity_avg_low=1.0 - fidelity.average_lower_bound(u_tilde),
                    infidelity_nuc=1.0 - f_nuc,
                )
            )
    return out


@dataclass(eq=False)
class ValidationSample:
    index: int
    n_b: int
    t_omega_bnd: float
    f_lb: float
    f_wc_exact: float
    f_wc_low: float

    @property
    def violated(self) -> bool:
        return self.f_wc_exact < self.f_lb


def _scale_for_target(u: bounds.UncertaintyBounds, target: float) -> float:
    """Uncertainty-block scale c so the time-bandwidth bound hits ``target``.

    The bound squared is quadratic in a uniform scale of the uncertain
    blocks: c^2 (T Omega_unc)(T Omega_dev) + 4 c (T Omega_avg) = target^2.
    """
    quad = u.t_omega_unc * u.t_omega_avg_dev
    lin = 4.0 * u.t_omega_avg
    if quad <= 1e-300 and lin <= 1e-300:
        raise ValueError("model carries no uncertainty to scale")
    if quad <= 1e-300:
        return target**2 / lin
    return (-lin + np.sqrt(lin**2 + 4.0 * quad * target**2)) / (2.0 * quad)


def random_validation_model(
    rng: np.random.Generator, n_b: int, n_s: int = 2
) -> tuple[model_mod.HamiltonianModel, model_mod.PwcControls]:
    """Random bounded-uncertainty model with the identity as exact target.

    Zero drift and no controls leave the nominal propagator at the identity,
    so the nominal fidelity is exactly 1 and the theorem premise holds.
    """
    n_terms = int(rng.integers(1, 3))
    couplings = [
        (linalg.random_hermitian(n_s, rng), linalg.random_hermitian(n_b, rng))
        for _ in range(n_terms)
    ]
    coherent = None
    if rng.uniform() < 0.3:
        coherent = linalg.random_hermitian(n_s, rng)[None, :, :] * 0.3
    h_b = linalg.random_hermitian(n_b, rng)
    h_b *= rng.uniform(0.1, 3.0) / linalg.op_norm(h_b)
    model = model_mod.HamiltonianModel(
        n_s=n_s,
        n_b=n_b,
        drift=np.zeros((n_s, n_s)),
        control_generators=[],
        coherent_error=coherent,
        bath=h_b,
        couplings=couplings,
    )
    controls = model_mod.PwcControls(
        gate_time=1.0, n_pulses=1, channels=np.zeros((0, 1)), v_max=1.0
    )
    return model, controls


def _scaled_model(model: model_mod.HamiltonianModel, c: float):
    return model_mod.HamiltonianModel(
        n_s=model.n_s,
        n_b=model.n_b,
        drift=model.drift,
        control_generators=list(model.control_generators),
        coherent_error=(
            model.coherent_error * c if model.coherent_error is not None else None
        ),
        bath=model.bath,
        couplings=[(s, b * c) for s, b in model.couplings],
    )


def theorem_validation(
    n_models: int = 500,
    seed: int = 0,
    n_avg: int = 200,
    t_omega_range: tuple[float, float] = (0.05, 1.8),
) -> list[ValidationSample]:
    """Check F_wc_exact >= F_lb on random models across the physical range.

    Each model's uncertain blocks are rescaled so the effective bound lands
    on a uniformly drawn target; the exact worst-case fidelity of the
    propagated interaction-frame unitary is then compared against the limit.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_models):
        n_b = int(rng.choice([2, 4, 8]))
        base_model, controls = random_validation_model(rng, n_b)
        prop = propagation.propagate_total(base_model, controls, n_avg)
        iops = propagation.interaction_ops(prop, base_model)
        base_u = bounds.measure_uncertainty(base_model, prop, iops)
        target = float(rng.uniform(*t_omega_range))
        model = _scaled_model(base_model, _scale_for_target(base_u, target))
        prop = propagation.propagate_total(model, controls, n_avg)
        iops = propagation.interaction_ops(prop, model)
        result = bounds.effective_error_bound(
            bounds.measure_uncertainty(model, prop, iops)
        )
        out.append(
            ValidationSample(
                index=i,
                n_b=n_b,
                t_omega_bnd=result.t_omega_bnd,
                f_lb=result.f_lb,
                f_wc_exact=fidelity.worst_case_exact(prop.u_tilde_final),
                f_wc_low=fidelity.worst_case_lower_bound(prop.u_tilde_final),
            )
        )
    return out
