"""Dense complex-matrix services: norms, decompositions, unitary generators.

All matrices are plain ``numpy`` complex arrays. Generators are Hermitian by
construction, so matrix exponentials go through the eigendecomposition (exactly
unitary up to the eigensolver tolerance) rather than scaling-and-squaring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionLimitExceeded,
    DimensionMismatch,
    NonHermitianInput,
    NotAntiHermitian,
    NotUnitary,
)


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12    # relative, ||A - A^dag|| <= tol * ||A||
    unitary: float = 1e-10      # absolute, ||A^dag A - I|| <= tol
    residual: float = 1e-10     # decomposition reconstruction residual
    anti_hermitian: float = 1e-10


TOL = Tolerances()

MAX_DIM = 1024

sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
sigma_y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
sigma_z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex array and enforce the dense dimension cap."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a nonempty 2-d matrix, got shape {a.shape}")
    if max(a.shape) > MAX_DIM:
        raise DimensionLimitExceeded(
            f"dimension {max(a.shape)} exceeds the dense cap {MAX_DIM}"
        )
    return a


def op_norm(a) -> float:
    """Operator norm (largest singular value)."""
    return float(np.linalg.norm(as_matrix(a), 2))


def frobenius_norm(a) -> float:
    """Frobenius norm, sqrt(Tr A^dag A)."""
    return float(np.linalg.norm(as_matrix(a)))


def nuclear_norm(a) -> float:
    """Nuclear (trace) norm, the sum of singular values."""
    return float(np.linalg.svd(as_matrix(a), compute_uv=False).sum())


def check_hermitian(a, name: str = "matrix") -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    defect = np.linalg.norm(a - a.conj().T, 2)
    scale = max(np.linalg.norm(a, 2), 1.0)
    if defect > TOL.hermitian * scale:
        raise NonHermitianInput(
            f"{name} is not Hermitian: ||A - A^dag|| = {defect:.3e} (scale {scale:.3e})"
        )
    return a


def check_unitary(a, name: str = "matrix") -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    defect = np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0]), 2)
    if defect > TOL.unitary:
        raise NotUnitary(f"{name} is not unitary: ||A^dag A - I|| = {defect:.3e}")
    return a


def check_anti_hermitian(a, name: str = "matrix") -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    defect = np.linalg.norm(a + a.conj().T, 2)
    if defect > TOL.anti_hermitian:
        raise NotAntiHermitian(
            f"{name} is not anti-Hermitian: ||A + A^dag|| = {defect:.3e}"
        )
    return a


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition A = V diag(w) V^dag of a Hermitian matrix."""
    a = check_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w, v


def expm_hermitian(h, tau: float = 1.0) -> np.ndarray:
    """exp(-i h tau) for Hermitian h, via eigendecomposition."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * w * tau)) @ v.conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product with the dense dimension cap enforced on the result."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM or a.shape[1] * b.shape[1] > MAX_DIM:
        raise DimensionLimitExceeded(
            f"kron result {a.shape[0] * b.shape[0]}x{a.shape[1] * b.shape[1]} "
            f"exceeds the dense cap {MAX_DIM}"
        )
    return np.kron(a, b)


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD A = U diag(s) Vh with singular values in descending order."""
    return np.linalg.svd(as_matrix(a))


def vec(a) -> np.ndarray:
    """Column-stacking vectorization, so that vec(ABC) = (C^T kron A) vec(B)."""
    return as_matrix(a).reshape(-1, order="F")


def unvec(x, rows: int, cols: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size != rows * cols:
        raise DimensionMismatch(f"cannot unvec length {x.size} into {rows}x{cols}")
    return x.reshape((rows, cols), order="F")


def _support_values(a: np.ndarray, thetas: np.ndarray, block: int = 64) -> np.ndarray:
    """-lambda_max of the Hermitian part of exp(-i theta) A, per theta."""
    out = np.empty(len(thetas))
    for start in range(0, len(thetas), block):
        phases = np.exp(-1j * thetas[start : start + block])
        m = phases[:, None, None] * a[None, :, :]
        h = (m + m.conj().transpose(0, 2, 1)) / 2.0
        out[start : start + block] = -np.linalg.eigvalsh(h)[:, -1]
    return out


def numerical_range_distance(a, n_sweep: int = 720, theta_tol: float = 1e-10) -> float:
    """Distance from the origin to the numerical range W(A) = {<psi|A|psi>}.

    W(A) is convex, so the distance equals the minimum of |Tr(A rho)| over
    density matrices.  It is computed as max(0, sup_theta g(theta)) with
    g(theta) = -lambda_max(Herm(exp(-i theta) A)): a uniform sweep over
    [0, 2pi) brackets the maximizer, then golden-section refinement narrows
    theta to ``theta_tol``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"numerical range needs a square matrix, got {a.shape}")
    thetas = np.linspace(0.0, 2.0 * np.pi, n_sweep, endpoint=False)
    g = _support_values(a, thetas)
    k = int(np.argmax(g))
    step = 2.0 * np.pi / n_sweep

    def g_of(theta: float) -> float:
        phase = np.exp(-1j * theta)
        h = (phase * a + np.conj(phase) * a.conj().T) / 2.0
        return -float(np.linalg.eigvalsh(h)[-1])

    # Golden-section refinement of the bracket [theta_k - step, theta_k + step].
    lo, hi = thetas[k] - step, thetas[k] + step
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    g1, g2 = g_of(x1), g_of(x2)
    while hi - lo > theta_tol:
        if g1 > g2:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - invphi * (hi - lo)
            g1 = g_of(x1)
        else:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + invphi * (hi - lo)
            g2 = g_of(x2)
    best = max(float(g[k]), g1, g2)
    return max(best, 0.0)


def haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state: normalized complex standard-normal vector."""
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2.0


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
