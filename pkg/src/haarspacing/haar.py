"""Haar-distributed unitary matrices from Ginibre draws, plus a biased control.

``q`` from a Householder QR of a Ginibre matrix is not Haar distributed: the
reflector convention fixes the phases of the diagonal of ``r`` as a function
of the input, and that dependence leaks into ``q``. Multiplying ``q`` by
``diag(r_jj / |r_jj|)`` removes it. :func:`sample_naive_unitary` skips that
step on purpose and shows a depletion of eigenvalues near 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import householder_qr, householder_qr_batch, sample_ginibre

MIN_DIAGONAL = 1e-300


class DegenerateFactorizationError(ArithmeticError):
    """A diagonal entry of ``r`` is numerically zero."""


@dataclass(frozen=True)
class PhaseCorrection:
    """Unit-modulus diagonal ``d`` such that ``q @ diag(d)`` is Haar."""

    diag: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.diag)


def _phases(diag: np.ndarray) -> np.ndarray:
    mod = np.abs(diag)
    if (mod <= MIN_DIAGONAL).any():
        raise DegenerateFactorizationError(
            "R has a zero diagonal entry; the Ginibre draw is singular"
        )
    return diag / mod


def phase_correction(r) -> PhaseCorrection:
    """``diag[j] = r[j, j] / |r[j, j]|`` for an upper-triangular ``r``."""
    r = np.asarray(r)
    return PhaseCorrection(_phases(np.diagonal(r).astype(np.complex128)))


def sample_haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random element of U(dim): ``q @ diag(r_jj / |r_jj|)``."""
    q, r = householder_qr(sample_ginibre(dim, rng))
    return q * phase_correction(r).diag


def sample_naive_unitary(dim: int, rng) -> np.ndarray:
    """The uncorrected ``q`` factor. Unitary, but not Haar distributed.

    With the reflector convention of :func:`haarspacing.linalg.householder_qr`
    ``det q = (-1)**dim``; for ``dim = 1`` the result is always ``-1``.
    """
    q, r = householder_qr(sample_ginibre(dim, rng))
    _phases(np.diagonal(r))
    return q


def unitaries_from_ginibre(g, *, corrected: bool = True) -> np.ndarray:
    """Stack version: map Ginibre matrices ``(B, M, M)`` to unitaries."""
    q, r = householder_qr_batch(g)
    phases = _phases(np.diagonal(r, axis1=1, axis2=2))
    if corrected:
        q *= phases[:, None, :]
    return q
