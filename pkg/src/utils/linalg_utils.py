"""Dense linear-algebra helpers shared by the services.

Vectorization is column stacking throughout: vec(A O B) = (B^T kron A) vec(O).
"""

from typing import Iterable

import numpy as np


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices."""
    vector = np.asarray(vector)
    dim = int(round(np.sqrt(vector.size)))
    return vector.reshape((dim, dim), order="F")


def max_abs(matrix: np.ndarray) -> float:
    """Largest entrywise modulus, 0.0 for empty input."""
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def canonical_phase(matrix: np.ndarray, hermitian: bool, tol: float = 1e-10) -> np.ndarray:
    """Normalize to unit HS norm and fix the global phase.

    The first entry in row-major order with modulus above ``tol`` is made
    positive real. Hermitian input is only sign-fixed (positive real part,
    or positive imaginary part when the entry is purely imaginary) so the
    result stays Hermitian.
    """
    matrix = np.asarray(matrix, dtype=complex)
    matrix = matrix / np.linalg.norm(matrix)
    flat = matrix.ravel()
    pivot = next((x for x in flat if abs(x) > tol), None)
    if pivot is None:
        return matrix
    if hermitian:
        key = pivot.real if abs(pivot.real) > tol else pivot.imag
        return -matrix if key < 0 else matrix
    return matrix * (abs(pivot) / pivot)


def hermitian_basis(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Hermitian orthonormal basis of a span closed under conjugate transpose.

    ``vectors`` holds vec'd operators as columns. Returns the same number of
    columns, each the vec of a Hermitian operator, orthonormal in the
    Hilbert-Schmidt inner product.
    """
    dim = int(round(np.sqrt(vectors.shape[0])))
    count = vectors.shape[1]
    parts = []
    for j in range(count):
        op = unvec(vectors[:, j])
        parts.append((op + op.conj().T) / 2)
        parts.append((op - op.conj().T) / 2j)
    coords = np.column_stack(
        [np.concatenate([p.real.ravel(), p.imag.ravel()]) for p in parts]
    )
    left, _, _ = np.linalg.svd(coords, full_matrices=False)
    basis = []
    for j in range(count):
        u = left[:, j]
        op = (u[: dim * dim] + 1j * u[dim * dim:]).reshape(dim, dim)
        op = (op + op.conj().T) / 2
        basis.append(vec(op / np.linalg.norm(op)))
    return np.column_stack(basis)


def span_residual(basis: np.ndarray, vector: np.ndarray) -> float:
    """Norm of the part of ``vector`` outside the span of orthonormal ``basis``."""
    vector = np.asarray(vector, dtype=complex)
    norm = np.linalg.norm(vector)
    if norm == 0:
        return 0.0
    unit = vector / norm
    if basis.size == 0:
        return 1.0
    return float(np.linalg.norm(unit - basis @ (basis.conj().T @ unit)))


def orthonormal_columns(columns: Iterable[np.ndarray], tol: float = 1e-10) -> np.ndarray:
    """Gram-Schmidt over the given vectors, dropping dependent ones."""
    basis = []
    for column in columns:
        v = np.asarray(column, dtype=complex).copy()
        for b in basis:
            v = v - b * np.vdot(b, v)
        norm = np.linalg.norm(v)
        if norm > tol:
            basis.append(v / norm)
    if not basis:
        return np.zeros((0, 0), dtype=complex)
    return np.column_stack(basis)
