"""Dense complex vector/matrix arithmetic used by every other layer.

Matrices and vectors are plain numpy arrays with dtype complex128.
Functions are pure: inputs are never mutated.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import CapacityExceeded, InvalidState, ShapeError

# Hard cap on any vector/matrix dimension handled by the package.
MAX_DIM = 2**20

# Default tolerance for structural checks (normalization, unitarity).
STRUCT_TOL = 1e-10


def as_cvec(entries: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Coerce to a finite 1-d complex vector."""
    v = np.asarray(entries, dtype=complex).reshape(-1)
    if v.size < 1:
        raise ShapeError("vector must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise InvalidState("vector entries must be finite")
    return v


def as_cmat(entries: Sequence[Sequence[complex]] | np.ndarray) -> np.ndarray:
    """Coerce to a finite square complex matrix."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidState("matrix entries must be finite")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square matrices."""
    a, b = as_cmat(a), as_cmat(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise CapacityExceeded(
            f"kron result dimension {a.shape[0] * b.shape[0]} exceeds cap {MAX_DIM}"
        )
    return np.kron(a, b)


def kron_all(*mats: np.ndarray) -> np.ndarray:
    """Left-to-right tensor product of several square matrices."""
    if not mats:
        raise ShapeError("kron_all needs at least one matrix")
    out = as_cmat(mats[0])
    for m in mats[1:]:
        out = kron(out, m)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return as_cmat(m).conj().T


def unitarity_defect(m: np.ndarray) -> float:
    """Frobenius norm of m^dag m - I; zero iff m is unitary."""
    m = as_cmat(m)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def complete_to_unitary(col0: Sequence[complex] | np.ndarray, tol: float = STRUCT_TOL) -> np.ndarray:
    """Deterministic unitary whose column 0 equals ``col0`` exactly.

    Uses a Householder reflection about w = col0 + e^{i arg(col0[0])} e0
    (sign chosen to avoid cancellation), then pins column 0 verbatim.
    """
    v = as_cvec(col0)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise InvalidState(f"column must be normalized, |norm - 1| = {abs(norm - 1.0):.3e}")
    d = v.size
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0 + 0.0j
    w = v.copy()
    w[0] += phase  # w0 = phase * (|col0[0]| + 1), never cancels
    u = np.eye(d, dtype=complex) - (2.0 / np.vdot(w, w).real) * np.outer(w, w.conj())
    # The reflector sends e0 to -conj(phase) * col0; absorbing -phase into
    # column 0 makes that column equal col0 up to rounding. Pin it exactly.
    u[:, 0] = v
    return u


def fidelity_pure(a: Sequence[complex] | np.ndarray, b: Sequence[complex] | np.ndarray) -> float:
    """|<a|b>|^2 for normalized pure states of equal dimension."""
    a, b = as_cvec(a), as_cvec(b)
    if a.size != b.size:
        raise ShapeError(f"dimension mismatch: {a.size} vs {b.size}")
    for v in (a, b):
        if abs(np.linalg.norm(v) - 1.0) > STRUCT_TOL:
            raise InvalidState("fidelity_pure expects normalized states")
    return float(abs(np.vdot(a, b)) ** 2)


def transport_unitary(
    frm: Sequence[complex] | np.ndarray, to: Sequence[complex] | np.ndarray
) -> np.ndarray:
    """Unitary V with V @ frm == to, exact including phase.

    Built by completing each state to an orthonormal basis with the fixed
    Householder convention and composing the two bases.
    """
    frm, to = as_cvec(frm), as_cvec(to)
    if frm.size != to.size:
        raise ShapeError(f"dimension mismatch: {frm.size} vs {to.size}")
    return complete_to_unitary(to) @ dagger(complete_to_unitary(frm))
