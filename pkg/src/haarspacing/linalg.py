"""Dense complex linear algebra: Ginibre draws, Householder QR, unitary spectra.

Matrices are plain ``numpy`` complex128 arrays. Functions named ``*_batch``
take a stack of shape ``(B, M, M)`` and run the compiled kernels once per
block; the single-matrix functions are thin wrappers around them, so both
paths produce bitwise-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels

DEFLATION_TOL = 1e-14
ITERATIONS_PER_DIM = 100
UNITARY_TOL = 1e-8
MODULUS_TOL = 1e-8


class NonFiniteMatrixError(ValueError):
    """Input matrix has NaN or infinite entries."""


class NotUnitaryError(ValueError):
    """Input to a unitary-only routine fails the unitarity check."""


class ConvergenceError(ArithmeticError):
    """QR iteration exceeded its iteration cap."""


def as_complex_matrix(a, *, batch: bool = False) -> np.ndarray:
    """Validate and convert to a C-contiguous complex128 square matrix (or stack)."""
    arr = np.ascontiguousarray(a, dtype=np.complex128)
    ndim = 3 if batch else 2
    if arr.ndim != ndim or arr.shape[-1] != arr.shape[-2]:
        shape = "(B, M, M)" if batch else "(M, M)"
        raise ValueError(f"expected a square matrix of shape {shape}, got {arr.shape}")
    if arr.shape[-1] < 1:
        raise ValueError("dim must be >= 1")
    if not np.isfinite(arr).all():
        raise NonFiniteMatrixError("matrix contains non-finite entries")
    return arr


def sample_ginibre(dim: int, rng) -> np.ndarray:
    """``dim x dim`` matrix with independent standard complex normal entries.

    Real and imaginary parts are each N(0, 1). Exactly ``2 * dim**2``
    normals are consumed from ``rng.normal``, in row-major order with the
    real part first.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    z = np.asarray(rng.normal(2 * dim * dim), dtype=float)
    return (z[0::2] + 1j * z[1::2]).reshape(dim, dim)


class QRFactors(NamedTuple):
    q: np.ndarray
    r: np.ndarray


def householder_qr_batch(a) -> QRFactors:
    a = as_complex_matrix(a, batch=True)
    q = np.empty_like(a)
    r = np.empty_like(a)
    _kernels.householder_qr_batch(a, q, r)
    return QRFactors(q, r)


def householder_qr(a) -> QRFactors:
    """Householder QR factorization ``a = q @ r``.

    Each column ``k`` is reduced by the Hermitian reflection mapping
    ``x = r[k:, k]`` to ``-phase(x[0]) * ||x|| * e1``. No normalization of
    the diagonal of ``r`` is applied afterwards, so its phases depend on
    the input. Raises :class:`NonFiniteMatrixError` on NaN/inf input.
    """
    a = as_complex_matrix(a)
    q, r = householder_qr_batch(a[None])
    return QRFactors(q[0], r[0])


def qr_determinant(a) -> complex:
    """Determinant from the QR factors: every reflection contributes -1."""
    q, r = householder_qr(a)
    return (-1) ** q.shape[0] * np.prod(np.diag(r))


def unitarity_error(u) -> float:
    """``max |u* u - I|`` over the trailing two axes (max over a stack too)."""
    u = np.asarray(u)
    gram = np.conj(np.swapaxes(u, -1, -2)) @ u
    return float(np.abs(gram - np.eye(u.shape[-1])).max())


@dataclass(frozen=True)
class EigenvalueSet:
    """Eigenvalues of a unitary matrix, projected to the unit circle.

    ``residuals[j]`` is ``max |u v_j - lambda_j v_j|`` for the unit
    eigenvector ``v_j``, measured before projection. ``moduli`` holds the
    unprojected ``|lambda_j|``.
    """

    values: np.ndarray
    residuals: np.ndarray
    moduli: np.ndarray


def _check_unitary(u: np.ndarray) -> None:
    err = unitarity_error(u)
    if err > UNITARY_TOL:
        raise NotUnitaryError(f"max |U*U - I| = {err:.3g} exceeds {UNITARY_TOL:g}")


def _eig(u: np.ndarray, want_vectors: bool):
    b, m, _ = u.shape
    values = np.empty((b, m), dtype=np.complex128)
    vectors = np.empty((b if want_vectors else 1, m, m), dtype=np.complex128)
    status, where = _kernels.eig_batch(
        u, values, vectors, want_vectors, DEFLATION_TOL, ITERATIONS_PER_DIM * m
    )
    if status != _kernels.OK:
        raise ConvergenceError(
            f"QR iteration did not converge within {ITERATIONS_PER_DIM * m} "
            f"iterations (matrix {where} of the batch)"
        )
    return values, vectors


def _project(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    moduli = np.abs(values)
    bad = np.abs(moduli - 1.0) > MODULUS_TOL
    if bad.any():
        worst = float(np.abs(moduli - 1.0).max())
        raise NotUnitaryError(f"eigenvalue modulus deviates from 1 by {worst:.3g}")
    return values / moduli, moduli


def unitary_eigenvalues(u, *, check: bool = True) -> EigenvalueSet:
    """Eigenvalues of a unitary matrix by Hessenberg reduction and shifted QR.

    The iteration deflates once a subdiagonal entry drops to
    ``1e-14 * max|H|`` and gives up after ``100 * dim`` QR steps. Because
    the input is normal, the accumulated Schur vectors are eigenvectors and
    give per-pair residuals directly.

    Raises
    ------
    NotUnitaryError
        If ``max |u*u - I| > 1e-8`` (skipped with ``check=False``) or an
        eigenvalue modulus is off by more than ``1e-8``.
    ConvergenceError
        If the iteration cap is exceeded.
    """
    u = as_complex_matrix(u)
    if check:
        _check_unitary(u)
    values, vectors = _eig(u[None], True)
    lam, z = values[0], vectors[0]
    residuals = np.abs(u @ z - z * lam).max(axis=0)
    projected, moduli = _project(lam)
    return EigenvalueSet(projected, residuals, moduli)


def unitary_eigenvalues_batch(u) -> np.ndarray:
    """Projected eigenvalues of a stack of unitary matrices, shape ``(B, M)``.

    Same solver as :func:`unitary_eigenvalues` without the eigenvector
    residuals; the modulus check still applies.
    """
    u = as_complex_matrix(u, batch=True)
    values, _ = _eig(u, False)
    return _project(values)[0]
