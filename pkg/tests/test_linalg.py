import numpy as np
import pytest
from scipy.spatial import ConvexHull

from gatebound import linalg
from gatebound.errors import (
    DimensionLimitExceeded,
    NonHermitianInput,
    NotUnitary,
)

DIAG_34 = np.diag([3.0, -4.0j])


def test_op_norm_examples():
    assert linalg.op_norm(linalg.sigma_x) == pytest.approx(1.0)
    assert linalg.op_norm(np.zeros((3, 3))) == 0.0
    assert linalg.op_norm(DIAG_34) == pytest.approx(4.0)


def test_frobenius_examples():
    for d in (2, 5):
        assert linalg.frobenius_norm(np.eye(d)) == pytest.approx(np.sqrt(d))
    assert linalg.frobenius_norm(linalg.sigma_x) == pytest.approx(np.sqrt(2))
    assert linalg.frobenius_norm(DIAG_34) == pytest.approx(5.0)


def test_nuclear_examples():
    for d in (2, 7):
        assert linalg.nuclear_norm(np.eye(d)) == pytest.approx(d)
    assert linalg.nuclear_norm(DIAG_34) == pytest.approx(7.0)
    rng = np.random.default_rng(0)
    u = linalg.haar_state(6, rng)
    v = linalg.haar_state(6, rng)
    assert linalg.nuclear_norm(np.outer(u, v.conj())) == pytest.approx(1.0)


def test_norm_inequality_chain():
    rng = np.random.default_rng(1)
    for _ in range(20):
        d = int(rng.integers(2, 12))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        op = linalg.op_norm(a)
        fro = linalg.frobenius_norm(a)
        rank = np.linalg.matrix_rank(a)
        assert op <= fro + 1e-12
        assert fro <= np.sqrt(rank) * op + 1e-12
        assert fro <= np.sqrt(d) * op + 1e-12


def test_expm_examples():
    assert np.allclose(linalg.expm_hermitian(np.zeros((3, 3)), 2.7), np.eye(3))
    assert np.allclose(
        linalg.expm_hermitian(linalg.sigma_z, np.pi), -np.eye(2), atol=1e-12
    )
    assert np.allclose(
        linalg.expm_hermitian(linalg.sigma_x, np.pi / 2),
        -1j * linalg.sigma_x,
        atol=1e-12,
    )


def test_expm_unitarity_and_group_property():
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = int(rng.integers(2, 9))
        h = linalg.random_hermitian(d, rng)
        tau = rng.uniform(0.0, 10.0)
        u = linalg.expm_hermitian(h, tau)
        assert np.linalg.norm(u.conj().T @ u - np.eye(d), 2) <= 1e-10
        a, b = rng.uniform(0, 3, 2)
        lhs = linalg.expm_hermitian(h, a) @ linalg.expm_hermitian(h, b)
        assert np.linalg.norm(lhs - linalg.expm_hermitian(h, a + b), 2) <= 1e-9


def test_expm_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        linalg.expm_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


def test_kron_examples():
    assert np.allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    zx = linalg.kron(linalg.sigma_z, linalg.sigma_x)
    assert np.allclose(zx[:2, :2], linalg.sigma_x)
    assert np.allclose(zx[2:, 2:], -linalg.sigma_x)
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((4, 4))
    assert linalg.op_norm(linalg.kron(a, b)) == pytest.approx(
        linalg.op_norm(a) * linalg.op_norm(b)
    )


def test_dimension_cap():
    with pytest.raises(DimensionLimitExceeded):
        linalg.as_matrix(np.zeros((1100, 2)))
    with pytest.raises(DimensionLimitExceeded):
        linalg.kron(np.eye(64), np.eye(64))


def test_eig_hermitian():
    w, v = linalg.eig_hermitian(linalg.sigma_z)
    assert np.allclose(sorted(w), [-1.0, 1.0])
    w, _ = linalg.eig_hermitian(linalg.sigma_x)
    assert np.allclose(sorted(w), [-1.0, 1.0])
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = linalg.random_hermitian(int(rng.integers(2, 10)), rng)
        w, v = linalg.eig_hermitian(a)
        assert np.linalg.norm((v * w) @ v.conj().T - a, 2) <= 1e-10


def test_svd():
    _, s, _ = linalg.svd(np.eye(5))
    assert np.allclose(s, 1.0)
    _, s, _ = linalg.svd(DIAG_34)
    assert np.allclose(s, [4.0, 3.0])
    rng = np.random.default_rng(5)
    u = linalg.random_unitary(6, rng)
    _, s, _ = linalg.svd(u)
    assert np.allclose(s, 1.0, atol=1e-12)
    a = rng.standard_normal((4, 7)) + 1j * rng.standard_normal((4, 7))
    ul, s, vr = linalg.svd(a)
    assert np.all(np.diff(s) <= 1e-15)
    assert np.linalg.norm(ul @ np.diag(s) @ vr[: len(s)] - a, 2) <= 1e-10


def _hull_distance(points: np.ndarray) -> float:
    """Distance from the origin to the convex hull of complex points.

    Independent geometric oracle: inside test through hull facet offsets,
    otherwise the minimum over point-to-segment distances of all pairs.
    """
    pts = np.column_stack([points.real, points.imag])
    pts = pts + 1e-14 * np.arange(len(pts))[:, None]  # break exact degeneracy
    try:
        hull = ConvexHull(pts)
        if np.all(hull.equations[:, -1] <= 1e-12):
            return 0.0
    except Exception:
        pass
    best = np.inf
    for i in range(len(pts)):
        for j in range(len(pts)):
            a, b = pts[i], pts[j]
            seg = b - a
            denom = float(seg @ seg)
            t = 0.0 if denom == 0 else float(np.clip(-(a @ seg) / denom, 0, 1))
            best = min(best, float(np.linalg.norm(a + t * seg)))
    return best


def test_numerical_range_examples():
    assert linalg.numerical_range_distance(np.eye(3)) == pytest.approx(1.0)
    assert linalg.numerical_range_distance(linalg.sigma_z) == pytest.approx(
        0.0, abs=1e-12
    )
    a = np.diag([np.exp(0.3j), np.exp(-0.3j)])
    val = linalg.numerical_range_distance(a)
    assert val == pytest.approx(np.cos(0.3), abs=1e-9)
    # Rayleigh-quotient sampling can only sit above the distance
    rng = np.random.default_rng(6)
    samples = [abs(psi.conj() @ a @ psi) for psi in (linalg.haar_state(2, rng) for _ in range(2000))]
    assert val <= min(samples) + 1e-9


def test_numerical_range_lower_bounds_rayleigh_quotients():
    rng = np.random.default_rng(7)
    for _ in range(10):
        d = int(rng.integers(2, 8))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        dist = linalg.numerical_range_distance(a)
        for _ in range(200):
            psi = linalg.haar_state(d, rng)
            assert dist <= abs(psi.conj() @ a @ psi) + 1e-9


def test_numerical_range_matches_hull_for_normal_matrices():
    rng = np.random.default_rng(8)
    for _ in range(25):
        d = int(rng.integers(3, 9))
        eigs = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        a = np.diag(eigs)
        assert linalg.numerical_range_distance(a) == pytest.approx(
            _hull_distance(eigs), abs=1e-7
        )


def test_unitary_check():
    linalg.check_unitary(linalg.random_unitary(5, np.random.default_rng(9)))
    with pytest.raises(NotUnitary):
        linalg.check_unitary(np.diag([1.0, 2.0]))


def test_vec_roth_convention():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    lhs = linalg.vec(a @ b @ c)
    rhs = np.kron(c.T, a) @ linalg.vec(b)
    assert np.allclose(lhs, rhs)
    assert np.allclose(linalg.unvec(linalg.vec(b), 3, 3), b)
