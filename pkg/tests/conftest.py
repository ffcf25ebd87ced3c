import numpy as np
import pytest

from gatebound import linalg, model as model_mod, optimize


def hadamard_model(q_b: int = 1, h_b=None, b_op=None):
    """Single qubit with x/y controls coupled through sigma_z to a bath."""
    n_b = 2**q_b
    if h_b is None:
        h_b = np.zeros((n_b, n_b))
    if b_op is None:
        b_op = np.zeros((n_b, n_b))
    return model_mod.HamiltonianModel(
        n_s=2,
        n_b=n_b,
        drift=np.zeros((2, 2)),
        control_generators=[linalg.sigma_x, linalg.sigma_y],
        bath=h_b,
        couplings=[(linalg.sigma_z, b_op)],
    )


def full_rotation_controls(n_avg_compatible: int = 1):
    """One sigma_x channel driving a full 2*pi rotation over unit gate time.

    Averages the conjugated sigma_z coupling to zero exactly on any midpoint
    grid, with U_S(T) = I.
    """
    return model_mod.PwcControls(
        gate_time=1.0,
        n_pulses=n_avg_compatible,
        channels=np.full((1, n_avg_compatible), 2.0 * np.pi),
        v_max=10.0,
    )


def rotation_model(q_b: int = 1, h_b=None, b_op=None):
    """Like hadamard_model but with a single x channel (identity target)."""
    n_b = 2**q_b
    if h_b is None:
        h_b = np.zeros((n_b, n_b))
    if b_op is None:
        b_op = np.zeros((n_b, n_b))
    return model_mod.HamiltonianModel(
        n_s=2,
        n_b=n_b,
        drift=np.zeros((2, 2)),
        control_generators=[linalg.sigma_x],
        bath=h_b,
        couplings=[(linalg.sigma_z, b_op)],
    )


@pytest.fixture(scope="session")
def hadamard_optimum():
    """One robust-control solution of the single-qubit example, reused by the
    optimizer, ensemble, and acceptance tests."""
    model = hadamard_model(q_b=1)
    target = model_mod.hadamard_gate()
    config = optimize.OptimizerConfig(seed=7, n_restarts=8, f_tol=1e-9)
    outcome = optimize.optimize_single_stage(model, target, config)
    return model, target, config, outcome
