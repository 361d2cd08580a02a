"""Eigenangles, normalized neighbor spacings and the two ways to pick a gap.

Angles live in [-pi, pi) and are sorted ascending. For ``M`` angles the
spacing vector has ``M`` entries: ``M/(2 pi) * (theta[m+1] - theta[m])`` for
the first ``M - 1`` and the wrap-around gap ``M/(2 pi) * (theta[0] + 2 pi -
theta[M-1])`` last, so the entries always sum to ``M``.

Picking a gap by a uniform index is unbiased. Picking the gap that contains
a uniform point selects gap ``j`` with probability ``delta_j / M``, so its
expected size is the mean of the squared spacings. The wrap-around gap is
exactly the gap containing the point -pi.

Functions accept a single spectrum of shape ``(M,)`` or a stack ``(..., M)``
unless noted otherwise.
"""

from __future__ import annotations

import numpy as np

from .linalg import unitary_eigenvalues

TWO_PI = 2.0 * np.pi


def wrap_angles(x):
    """Map angles into [-pi, pi); +pi becomes -pi."""
    w = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    return np.where(w >= np.pi, w - TWO_PI, w)


def angles_from_eigenvalues(values) -> np.ndarray:
    """Sorted principal arguments in [-pi, pi), along the last axis."""
    return np.sort(wrap_angles(np.angle(values)), axis=-1)


def eigenangles(u) -> np.ndarray:
    """Sorted eigenangles of a unitary matrix."""
    return angles_from_eigenvalues(unitary_eigenvalues(u).values)


def check_eigenangles(angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    if angles.shape[-1] < 1:
        raise ValueError("need at least one eigenangle")
    if (angles < -np.pi).any() or (angles >= np.pi).any():
        raise ValueError("eigenangles must lie in [-pi, pi)")
    if (np.diff(angles, axis=-1) < 0).any():
        raise ValueError("eigenangles must be sorted ascending")
    return angles


def normalized_spacings(angles) -> np.ndarray:
    """Spacing vector including the wrap-around gap as the last entry."""
    angles = check_eigenangles(angles)
    m = angles.shape[-1]
    scale = m / TWO_PI
    out = np.empty_like(angles)
    out[..., :-1] = np.diff(angles, axis=-1) * scale
    out[..., -1] = (angles[..., 0] + TWO_PI - angles[..., -1]) * scale
    return out


def select_gap_uniform_index(spacings, rng) -> float:
    """Spacing at an index drawn uniformly from ``0 .. M-1``."""
    spacings = np.asarray(spacings, dtype=float)
    return float(spacings[rng.integers(spacings.shape[-1])])


def gap_index_containing(angles, point):
    """Index of the gap ``[theta[m], theta[m+1])`` that contains ``point``.

    The wrap-around gap has index ``M - 1``. A point equal to an eigenangle
    belongs to the gap starting there; among repeated angles, the last copy
    starts the gap. ``point`` may be an array (one spectrum only).
    """
    angles = np.asarray(angles, dtype=float)
    idx = np.searchsorted(angles, point, side="right") - 1
    return np.where(idx < 0, angles.shape[-1] - 1, idx)


def select_gap_containing_point(angles, point):
    """Normalized spacing of the gap containing ``point`` in [-pi, pi)."""
    angles = check_eigenangles(angles)
    if angles.ndim != 1:
        raise ValueError("expected a single spectrum of shape (M,)")
    spacings = normalized_spacings(angles)
    pts = np.asarray(point, dtype=float)
    if (pts < -np.pi).any() or (pts >= np.pi).any():
        raise ValueError("point must lie in [-pi, pi)")
    picked = spacings[gap_index_containing(angles, pts)]
    return float(picked) if picked.ndim == 0 else picked


def size_biased_mean(spacings):
    """Expected spacing of the gap hit by a uniform point: mean of squares."""
    s = np.asarray(spacings, dtype=float)
    return np.mean(s * s, axis=-1)


def lazy_mean(spacings):
    """Mean of the first ``M - 1`` spacings, dropping the wrap-around gap."""
    s = np.asarray(spacings, dtype=float)
    m = s.shape[-1]
    if m < 2:
        raise ValueError("lazy mean needs M >= 2")
    return s[..., :-1].sum(axis=-1) / (m - 1)
