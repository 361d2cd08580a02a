"""Compiled dense complex kernels.

Every routine works in place on C-contiguous complex128 arrays and loops
over a leading batch axis, so a block of matrices costs one call. Status
codes are returned instead of raising; the Python wrappers in
:mod:`haarspacing.linalg` translate them into exceptions.
"""

import numba as nb
import numpy as np

OK = 0
NOT_CONVERGED = 1

_JIT = dict(nogil=True, cache=True)


@nb.njit(**_JIT)
def _reflector(x):
    """Householder vector ``v`` and ``alpha`` with ``(I - 2vv*/v*v) x = alpha e1``.

    ``alpha = -phase(x[0]) * ||x||`` so no cancellation occurs in ``v[0]``.
    Returns ``(v, alpha, 2 / v*v)``; the scale is 0 for a zero column.
    A nonzero column always gets a reflection, even if it is already
    reduced, so ``det`` of the reflector is -1 without exception.
    """
    nrm2 = 0.0
    for i in range(x.shape[0]):
        nrm2 += x[i].real * x[i].real + x[i].imag * x[i].imag
    v = x.copy()
    if nrm2 == 0.0:
        return v, 0j, 0.0
    nrm = np.sqrt(nrm2)
    ax0 = abs(x[0])
    phase = x[0] / ax0 if ax0 > 0.0 else 1.0 + 0j
    alpha = -phase * nrm
    v[0] = x[0] - alpha
    return v, alpha, 1.0 / (nrm * (nrm + ax0))


@nb.njit(**_JIT)
def householder_qr_batch(a, q, r):
    """Factor each ``a[b] = q[b] @ r[b]``.

    One Hermitian reflection per column, the last (1x1) one included, so
    ``det(q[b]) == (-1)**M`` whenever ``a[b]`` has full rank. The diagonal
    phases of ``r`` follow from the reflector choice and are left alone.
    """
    nb_, m, _ = a.shape
    vs = np.zeros((m, m), dtype=np.complex128)
    scales = np.zeros(m)
    for b in range(nb_):
        rb = r[b]
        rb[:, :] = a[b]
        for k in range(m):
            v, alpha, scale = _reflector(rb[k:, k])
            vs[k, :] = 0.0
            vs[k, k:] = v
            scales[k] = scale
            if scale == 0.0:
                continue
            for j in range(k + 1, m):
                s = 0j
                for i in range(k, m):
                    s += np.conj(v[i - k]) * rb[i, j]
                s *= scale
                for i in range(k, m):
                    rb[i, j] -= s * v[i - k]
            rb[k, k] = alpha
            for i in range(k + 1, m):
                rb[i, k] = 0.0
        qb = q[b]
        qb[:, :] = 0.0
        for i in range(m):
            qb[i, i] = 1.0
        for k in range(m - 1, -1, -1):
            scale = scales[k]
            if scale == 0.0:
                continue
            for j in range(k, m):
                s = 0j
                for i in range(k, m):
                    s += np.conj(vs[k, i]) * qb[i, j]
                s *= scale
                for i in range(k, m):
                    qb[i, j] -= s * vs[k, i]


@nb.njit(**_JIT)
def _hessenberg(h, z, want_z):
    m = h.shape[0]
    for k in range(m - 2):
        v, alpha, scale = _reflector(h[k + 1:, k])
        if scale == 0.0:
            continue
        # left: rows k+1.., columns k..
        for j in range(k, m):
            s = 0j
            for i in range(k + 1, m):
                s += np.conj(v[i - k - 1]) * h[i, j]
            s *= scale
            for i in range(k + 1, m):
                h[i, j] -= s * v[i - k - 1]
        # right: all rows, columns k+1..
        for i in range(m):
            s = 0j
            for j in range(k + 1, m):
                s += h[i, j] * v[j - k - 1]
            s *= scale
            for j in range(k + 1, m):
                h[i, j] -= s * np.conj(v[j - k - 1])
        h[k + 1, k] = alpha
        for i in range(k + 2, m):
            h[i, k] = 0.0
        if want_z:
            for i in range(m):
                s = 0j
                for j in range(k + 1, m):
                    s += z[i, j] * v[j - k - 1]
                s *= scale
                for j in range(k + 1, m):
                    z[i, j] -= s * np.conj(v[j - k - 1])


@nb.njit(**_JIT)
def _givens(x, y):
    """``(c, s)`` with real ``c`` and ``[[c, s], [-conj(s), c]] @ [x, y] = [rho, 0]``."""
    ax = abs(x)
    ay = abs(y)
    if ay == 0.0:
        return 1.0, 0j
    if ax == 0.0:
        return 0.0, 1.0 + 0j
    rho = np.hypot(ax, ay)
    return ax / rho, (x / ax) * np.conj(y) / rho


@nb.njit(**_JIT)
def _shifted_qr(h, z, want_z, defl_rel, max_iter):
    """Single-shift QR iteration on upper Hessenberg ``h`` until it is triangular.

    Subdiagonal entries at or below ``defl_rel * max|h|`` are set to zero.
    Returns the number of iterations used, or -1 when ``max_iter`` is
    exceeded.
    """
    m = h.shape[0]
    hmax = 0.0
    for i in range(m):
        for j in range(m):
            a = abs(h[i, j])
            if a > hmax:
                hmax = a
    tol = defl_rel * hmax
    cs = np.zeros(m)
    ss = np.zeros(m, dtype=np.complex128)
    hi = m - 1
    total = 0
    since_defl = 0
    while hi > 0:
        lo = hi
        while lo > 0 and abs(h[lo, lo - 1]) > tol:
            lo -= 1
        if lo > 0:
            h[lo, lo - 1] = 0.0
        if lo == hi:
            hi -= 1
            since_defl = 0
            continue
        if total >= max_iter:
            return -1
        total += 1
        since_defl += 1

        a = h[hi - 1, hi - 1]
        b = h[hi - 1, hi]
        c = h[hi, hi - 1]
        d = h[hi, hi]
        if since_defl % 11 == 10:
            # exceptional shift to break cycles
            mu = d + abs(c)
        else:
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            t = 0.5 * (a + d)
            mu1 = t + disc
            mu2 = t - disc
            mu = mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2

        for i in range(lo, hi + 1):
            h[i, i] -= mu
        for k in range(lo, hi):
            cc, s = _givens(h[k, k], h[k + 1, k])
            cs[k] = cc
            ss[k] = s
            for j in range(k, hi + 1):
                x = h[k, j]
                y = h[k + 1, j]
                h[k, j] = cc * x + s * y
                h[k + 1, j] = -np.conj(s) * x + cc * y
            h[k + 1, k] = 0.0
        for k in range(lo, hi):
            cc = cs[k]
            s = ss[k]
            top = min(k + 2, hi)
            for i in range(lo, top + 1):
                x = h[i, k]
                y = h[i, k + 1]
                h[i, k] = cc * x + np.conj(s) * y
                h[i, k + 1] = -s * x + cc * y
            if want_z:
                for i in range(m):
                    x = z[i, k]
                    y = z[i, k + 1]
                    z[i, k] = cc * x + np.conj(s) * y
                    z[i, k + 1] = -s * x + cc * y
        for i in range(lo, hi + 1):
            h[i, i] += mu
    return total


@nb.njit(**_JIT)
def eig_batch(u, values, vectors, want_vectors, defl_rel, max_iter):
    """Eigenvalues (and Schur vectors when ``want_vectors``) of each ``u[b]``.

    For a normal input the Schur form is diagonal, so the Schur vectors are
    eigenvectors. Returns ``(status, index of the failing matrix)``.
    """
    nb_, m, _ = u.shape
    h = np.empty((m, m), dtype=np.complex128)
    z = np.empty((m, m), dtype=np.complex128)
    for b in range(nb_):
        h[:, :] = u[b]
        if want_vectors:
            z[:, :] = 0.0
            for i in range(m):
                z[i, i] = 1.0
        _hessenberg(h, z, want_vectors)
        if _shifted_qr(h, z, want_vectors, defl_rel, max_iter) < 0:
            return NOT_CONVERGED, b
        for i in range(m):
            values[b, i] = h[i, i]
        if want_vectors:
            vectors[b, :, :] = z
    return OK, -1

