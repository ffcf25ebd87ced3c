import json

import numpy as np
import pytest

from gatebound import linalg, model as model_mod
from gatebound.errors import GridMismatch, ValidationError
from gatebound.model import (
    HamiltonianModel,
    PwcControls,
    assemble_total_hamiltonian,
    hadamard_gate,
    load_model,
    model_to_config,
    nominal_system_hamiltonian,
    save_model,
    uncertainty_hamiltonian,
)

from conftest import hadamard_model


def _random_model(rng, n_pulses=4):
    n_b = int(rng.integers(1, 4))
    model = HamiltonianModel(
        n_s=2,
        n_b=n_b,
        drift=linalg.random_hermitian(2, rng),
        control_generators=[linalg.sigma_x, linalg.sigma_y],
        coherent_error=np.array(
            [linalg.random_hermitian(2, rng) * 0.1 for _ in range(n_pulses)]
        ),
        bath=linalg.random_hermitian(n_b, rng),
        couplings=[(linalg.random_hermitian(2, rng), linalg.random_hermitian(n_b, rng))],
    )
    controls = PwcControls(
        gate_time=1.0,
        n_pulses=n_pulses,
        channels=rng.uniform(-2, 2, (2, n_pulses)),
        v_max=5.0,
    )
    return model, controls


def test_assemble_minimal_example():
    model = HamiltonianModel(
        n_s=2,
        n_b=1,
        drift=np.zeros((2, 2)),
        control_generators=[linalg.sigma_x],
        bath=np.zeros((1, 1)),
    )
    controls = PwcControls(1.0, 1, np.array([[1.0]]), 5.0)
    assert np.allclose(assemble_total_hamiltonian(model, controls, 0), linalg.sigma_x)


def test_assemble_hadamard_example_structure():
    rng = np.random.default_rng(0)
    h_b = linalg.random_hermitian(2, rng)
    b_op = linalg.random_hermitian(2, rng)
    model = hadamard_model(q_b=1, h_b=h_b, b_op=b_op)
    controls = PwcControls(1.0, 2, np.array([[0.7, -0.2], [0.1, 0.4]]), 5.0)
    for k in range(2):
        vx, vy = controls.channels[0, k], controls.channels[1, k]
        expected = (
            np.kron(vx * linalg.sigma_x + vy * linalg.sigma_y, np.eye(2))
            + np.kron(np.eye(2), h_b)
            + np.kron(linalg.sigma_z, b_op)
        )
        assert np.allclose(assemble_total_hamiltonian(model, controls, k), expected)


def test_assemble_is_hermitian():
    rng = np.random.default_rng(1)
    for _ in range(10):
        model, controls = _random_model(rng)
        h = assemble_total_hamiltonian(model, controls, 1)
        assert np.linalg.norm(h - h.conj().T, 2) <= 1e-12 * max(np.linalg.norm(h, 2), 1)


def test_control_linearity():
    rng = np.random.default_rng(2)
    model, controls = _random_model(rng)
    w = rng.uniform(-1, 1, controls.channels.shape)
    shifted = PwcControls(1.0, controls.n_pulses, controls.channels + w, 50.0)
    for k in range(controls.n_pulses):
        diff = nominal_system_hamiltonian(model, shifted, k) - nominal_system_hamiltonian(
            model, controls, k
        )
        expected = w[0, k] * linalg.sigma_x + w[1, k] * linalg.sigma_y
        assert np.allclose(diff, expected, atol=1e-13)


def test_uncertainty_split_reassembly():
    rng = np.random.default_rng(3)
    for _ in range(5):
        model, controls = _random_model(rng)
        for k in range(controls.n_pulses):
            total = assemble_total_hamiltonian(model, controls, k)
            nominal = np.kron(
                nominal_system_hamiltonian(model, controls, k), np.eye(model.n_b)
            )
            unc = uncertainty_hamiltonian(model, controls, k)
            assert np.linalg.norm(total - (nominal + unc), 2) <= 1e-14


def test_controls_validation():
    with pytest.raises(ValidationError):
        PwcControls(1.0, 3, np.array([[1.0, 2.0, 9.0]]), v_max=5.0)
    with pytest.raises(ValidationError):
        PwcControls(-1.0, 3, np.zeros((1, 3)), 5.0)
    with pytest.raises(ValidationError):
        PwcControls(1.0, 3, np.zeros((1, 4)), 5.0)


def test_coherent_error_grid_mismatch():
    rng = np.random.default_rng(4)
    model, _ = _random_model(rng, n_pulses=4)
    bad = PwcControls(1.0, 5, np.zeros((2, 5)), 5.0)
    with pytest.raises(GridMismatch):
        assemble_total_hamiltonian(model, bad, 0)


def test_preset_hadamard_sigma_z_bath():
    model, controls, target = load_model({"preset": "hadamard-sigma-z-bath", "q_B": 2})
    assert model.n_s == 2 and model.n_b == 4
    assert len(model.couplings) == 1
    s_op, b_op = model.couplings[0]
    assert np.allclose(s_op, linalg.sigma_z)
    assert linalg.op_norm(b_op) > 0
    assert target.label == "hadamard"
    assert np.allclose(target.matrix, (linalg.sigma_x + linalg.sigma_z) / np.sqrt(2))
    assert controls.n_pulses == 5 and controls.v_max == 7.5


def test_unknown_preset():
    with pytest.raises(ValidationError):
        load_model({"preset": "nope"})


def test_non_hermitian_bath_rejected():
    cfg = model_to_config(
        hadamard_model(1), PwcControls(1.0, 5, np.zeros((2, 5)), 7.5), hadamard_gate()
    )
    cfg["bath"] = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    with pytest.raises(ValidationError):
        load_model(cfg)


def test_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    model, controls = _random_model(rng)
    target = hadamard_gate()
    path = tmp_path / "model.json"
    save_model(path, model, controls, target)
    model2, controls2, target2 = load_model(path)
    assert np.allclose(model.drift, model2.drift)
    assert np.allclose(model.bath, model2.bath)
    assert np.allclose(model.coherent_error, model2.coherent_error)
    for (s1, b1), (s2, b2) in zip(model.couplings, model2.couplings):
        assert np.allclose(s1, s2) and np.allclose(b1, b2)
    assert np.allclose(controls.channels, controls2.channels)
    assert np.allclose(target.matrix, target2.matrix)
    # and the JSON document itself round-trips exactly
    cfg = model_to_config(model2, controls2, target2)
    assert json.loads(path.read_text()) == json.loads(json.dumps(cfg))


def test_config_field_errors():
    with pytest.raises(ValidationError, match="n_S"):
        load_model({"n_B": 1})
    with pytest.raises(model_mod.ParseError):
        load_model("{not json")
