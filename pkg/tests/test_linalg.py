import itertools

import numpy as np
import pytest

from haarspacing.haar import sample_haar_unitary
from haarspacing.linalg import (
    ConvergenceError,
    NonFiniteMatrixError,
    NotUnitaryError,
    householder_qr,
    householder_qr_batch,
    qr_determinant,
    sample_ginibre,
    unitarity_error,
    unitary_eigenvalues,
    unitary_eigenvalues_batch,
)
from haarspacing.rng import RandomStream

from conftest import ScriptedNormals


def haar(dim, index, seed=2024):
    return sample_haar_unitary(dim, RandomStream.for_matrix(seed, dim, index))


def match_distance(a, b):
    """Largest distance after optimal one-to-one matching (brute force for small sets)."""
    a, b = np.asarray(a), np.asarray(b)
    if len(a) <= 7:
        return min(np.abs(a - b[list(p)]).max() for p in itertools.permutations(range(len(b))))
    cost = np.abs(a[:, None] - b[None, :])
    from scipy.optimize import linear_sum_assignment

    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].max()


# -- Ginibre -----------------------------------------------------------------


def test_ginibre_dim1_takes_two_normals():
    rng = ScriptedNormals([0.3, -0.7, 9.0])
    g = sample_ginibre(1, rng)
    assert g.shape == (1, 1)
    assert g[0, 0] == 0.3 - 0.7j
    assert rng.consumed == 2


def test_ginibre_is_row_major_real_first():
    vals = np.arange(8.0)
    g = sample_ginibre(2, ScriptedNormals(vals))
    assert np.array_equal(g, [[0 + 1j, 2 + 3j], [4 + 5j, 6 + 7j]])


def test_ginibre_rejects_zero_dim():
    with pytest.raises(ValueError):
        sample_ginibre(0, RandomStream((0, 0)))


def test_ginibre_moments():
    n, dim = 10_000, 50
    re_sum = re_sq = im_sum = abs_sq = 0.0
    for i in range(n):
        g = sample_ginibre(dim, RandomStream.for_matrix(1, dim, i))
        re_sum += g.real.sum()
        re_sq += (g.real**2).sum()
        im_sum += g.imag.sum()
        abs_sq += (np.abs(g) ** 2).sum()
    total = n * dim * dim
    re_mean = re_sum / total
    assert abs(re_mean) < 0.01
    assert abs(re_sq / total - re_mean**2 - 1.0) < 0.02
    assert abs(im_sum / total) < 0.01
    assert abs(abs_sq / total - 2.0) < 0.02


# -- QR ----------------------------------------------------------------------


def test_qr_identity():
    q, r = householder_qr(np.eye(3))
    assert np.abs(q @ r - np.eye(3)).max() <= 1e-12
    assert unitarity_error(q) <= 1e-12


def test_qr_diagonal_moduli():
    q, r = householder_qr(np.diag([2.0, 3.0]))
    assert np.abs(np.abs(np.diag(r)) - [2.0, 3.0]).max() < 1e-14
    assert r[1, 0] == 0
    assert np.abs(q @ r - np.diag([2.0, 3.0])).max() < 1e-14


@pytest.mark.parametrize("dim", [1, 2, 5, 14, 33, 64])
def test_qr_on_ginibre(dim):
    for i in range(5):
        a = sample_ginibre(dim, RandomStream.for_matrix(3, dim, i))
        q, r = householder_qr(a)
        assert np.abs(q @ r - a).max() <= 1e-10 * np.abs(a).max()
        assert unitarity_error(q) <= 1e-10
        assert np.all(np.tril(r, -1) == 0)


def test_qr_leaves_diagonal_phases_free():
    a = sample_ginibre(6, RandomStream((4, 4)))
    r = householder_qr(a).r
    phases = np.diag(r) / np.abs(np.diag(r))
    assert not np.allclose(phases, 1.0)


def test_qr_rejects_non_finite():
    a = np.eye(3, dtype=complex)
    a[1, 2] = np.nan
    with pytest.raises(NonFiniteMatrixError):
        householder_qr(a)
    a[1, 2] = np.inf
    with pytest.raises(NonFiniteMatrixError):
        householder_qr(a)


def test_qr_rejects_non_square():
    with pytest.raises(ValueError):
        householder_qr(np.ones((2, 3)))


def test_batch_and_single_qr_agree_bitwise():
    g = np.stack([sample_ginibre(7, RandomStream.for_matrix(8, 7, i)) for i in range(4)])
    qb, rb = householder_qr_batch(g)
    for i in range(4):
        q, r = householder_qr(g[i])
        assert np.array_equal(q, qb[i]) and np.array_equal(r, rb[i])


def test_qr_determinant_matches_numpy():
    for dim in (1, 2, 9, 20):
        a = sample_ginibre(dim, RandomStream.for_matrix(5, dim, 0))
        assert qr_determinant(a) == pytest.approx(np.linalg.det(a), rel=1e-10)


# -- eigenvalues ---------------------------------------------------------------


def test_eigenvalues_identity():
    ev = unitary_eigenvalues(np.eye(4))
    assert np.abs(ev.values - 1).max() < 1e-14
    assert ev.residuals.max() < 1e-14


def test_eigenvalues_diagonal_unitary():
    expected = np.exp(1j * np.array([np.pi / 3, -np.pi / 4]))
    ev = unitary_eigenvalues(np.diag(expected))
    assert match_distance(ev.values, expected) <= 1e-12


def test_eigenvalues_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        unitary_eigenvalues(np.diag([1.0, 1.1]))


@pytest.mark.parametrize("dim", [1, 2, 3, 14, 32, 64])
def test_eigenvalues_of_haar_samples(dim):
    for i in range(5):
        u = haar(dim, i)
        ev = unitary_eigenvalues(u)
        assert ev.residuals.max() <= 1e-8 * dim
        assert np.abs(ev.moduli - 1).max() <= 1e-8
        assert np.abs(np.abs(ev.values) - 1).max() <= 1e-15
        # independent oracle: LAPACK
        assert match_distance(ev.values, np.linalg.eigvals(u)) <= 1e-9


@pytest.mark.parametrize("dim", [2, 8, 31, 64])
def test_eigenvalue_product_is_qr_determinant(dim):
    for i in range(3):
        u = haar(dim, i, seed=77)
        prod = np.prod(unitary_eigenvalues(u).values)
        det = qr_determinant(u)
        assert abs(prod - det) <= 1e-6 * abs(det)


def test_spectrum_invariant_under_permutation_conjugation():
    rng = np.random.default_rng(11)
    for dim in (5, 14):
        u = haar(dim, 0)
        p = np.eye(dim)[rng.permutation(dim)]
        a = unitary_eigenvalues(u).values
        b = unitary_eigenvalues(p.T @ u @ p).values
        assert match_distance(a, b) <= 1e-8


def test_repeated_eigenvalues_and_permutation_matrix():
    # cyclic shift: eigenvalues are the 6th roots of unity
    p = np.roll(np.eye(6), 1, axis=0)
    ev = unitary_eigenvalues(p)
    assert match_distance(ev.values, np.exp(2j * np.pi * np.arange(6) / 6)) <= 1e-12
    # reflection with eigenvalue -1 of multiplicity 3
    d = np.diag([1, -1, -1, -1, 1.0]).astype(complex)
    w = haar(5, 3)
    ev = unitary_eigenvalues(w @ d @ w.conj().T)
    assert match_distance(ev.values, np.diag(d)) <= 1e-10


def test_batch_eigenvalues_match_single():
    us = np.stack([haar(10, i) for i in range(3)])
    batch = unitary_eigenvalues_batch(us)
    for i in range(3):
        assert np.array_equal(batch[i], unitary_eigenvalues(us[i]).values)


def test_iteration_cap_reports_non_convergence(monkeypatch):
    from haarspacing import linalg

    monkeypatch.setattr(linalg, "ITERATIONS_PER_DIM", 0)
    with pytest.raises(ConvergenceError):
        unitary_eigenvalues(haar(6, 0))
