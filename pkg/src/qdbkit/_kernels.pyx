# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense kernels for complex matrices.

The functions mirror :mod:`qdbkit._kernels_py` one for one and share the
same signatures and return conventions, so :mod:`qdbkit._backend` can pick
either implementation at import time.

All inputs are complex128 arrays; every function works on a private copy.
"""

import numpy as np
from libc.math cimport sqrt, fabs, hypot

ctypedef double complex cplx

cdef double EPS = 2.220446049250313e-16
cdef double TINY = 1e-300


cdef inline double cabs(cplx z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline cplx cconj(cplx z) noexcept nogil:
    return z.conjugate()


cdef inline void jacobi_params(double app, double aqq, double mag,
                               double *c, double *s, double *t) noexcept nogil:
    cdef double tau = (aqq - app) / (2.0 * mag)
    cdef double tt
    if tau >= 0:
        tt = 1.0 / (tau + sqrt(1.0 + tau * tau))
    else:
        tt = -1.0 / (-tau + sqrt(1.0 + tau * tau))
    c[0] = 1.0 / sqrt(1.0 + tt * tt)
    s[0] = tt * c[0]
    t[0] = tt


def jacobi_eigh(A_in, int max_sweeps):
    """Cyclic Jacobi diagonalisation of a Hermitian matrix.

    Returns ``(w, V, converged)`` with unsorted real eigenvalues ``w`` and
    eigenvectors in the columns of ``V``.
    """
    A_np = np.array(A_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = A_np.shape[0]
    V_np = np.eye(n, dtype=np.complex128)
    cdef cplx[:, ::1] a = A_np
    cdef cplx[:, ::1] v = V_np
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotations
    cdef bint converged = n <= 1
    cdef double fro = 0.0, app, aqq, mag, c, s, t, thresh
    cdef cplx apq, e, se, sec, x, y
    with nogil:
        for p in range(n):
            a[p, p] = a[p, p].real
            for q in range(n):
                fro += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        fro = sqrt(fro)
        for sweep in range(max_sweeps):
            if converged:
                break
            rotations = 0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    mag = cabs(apq)
                    app = a[p, p].real
                    aqq = a[q, q].real
                    thresh = EPS * sqrt(fabs(app * aqq))
                    if thresh < 1e-20 * fro:
                        thresh = 1e-20 * fro
                    if mag <= thresh or mag <= TINY:
                        continue
                    rotations += 1
                    jacobi_params(app, aqq, mag, &c, &s, &t)
                    e = apq / mag
                    se = s * e
                    sec = s * cconj(e)
                    for k in range(n):
                        x = a[k, p]
                        y = a[k, q]
                        a[k, p] = c * x - sec * y
                        a[k, q] = se * x + c * y
                    for k in range(n):
                        x = a[p, k]
                        y = a[q, k]
                        a[p, k] = c * x - se * y
                        a[q, k] = sec * x + c * y
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - sec * y
                        v[k, q] = se * x + c * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    a[p, p] = app - t * mag
                    a[q, q] = aqq + t * mag
            if rotations == 0:
                converged = True
    w = np.real(np.diag(A_np)).copy()
    return w, V_np, bool(converged)


def jacobi_svd(A_in, int max_sweeps):
    """One-sided (Hestenes) Jacobi orthogonalisation of the columns of ``A``.

    Returns ``(B, V, converged)`` where ``B = A V`` has mutually orthogonal
    columns and ``V`` is unitary.  Singular values are the column norms of
    ``B``.
    """
    B_np = np.array(A_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t m = B_np.shape[0]
    cdef Py_ssize_t n = B_np.shape[1]
    V_np = np.eye(n, dtype=np.complex128)
    cdef cplx[:, ::1] b = B_np
    cdef cplx[:, ::1] v = V_np
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotations
    cdef bint converged = n <= 1
    cdef double alpha, beta, mag, c, s, t, fro = 0.0, thresh
    cdef cplx gam, e, se, sec, x, y
    with nogil:
        for p in range(m):
            for q in range(n):
                fro += b[p, q].real * b[p, q].real + b[p, q].imag * b[p, q].imag
        for sweep in range(max_sweeps):
            if converged:
                break
            rotations = 0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    alpha = 0.0
                    beta = 0.0
                    gam = 0.0
                    for k in range(m):
                        x = b[k, p]
                        y = b[k, q]
                        alpha += x.real * x.real + x.imag * x.imag
                        beta += y.real * y.real + y.imag * y.imag
                        gam = gam + cconj(x) * y
                    mag = cabs(gam)
                    thresh = EPS * sqrt(alpha * beta)
                    if thresh < 1e-30 * fro:
                        thresh = 1e-30 * fro
                    if mag <= thresh or mag <= TINY:
                        continue
                    rotations += 1
                    jacobi_params(alpha, beta, mag, &c, &s, &t)
                    e = gam / mag
                    se = s * e
                    sec = s * cconj(e)
                    for k in range(m):
                        x = b[k, p]
                        y = b[k, q]
                        b[k, p] = c * x - sec * y
                        b[k, q] = se * x + c * y
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - sec * y
                        v[k, q] = se * x + c * y
            if rotations == 0:
                converged = True
    return B_np, V_np, bool(converged)


def hessenberg(A_in):
    """Householder reduction to upper Hessenberg form.

    Returns ``(H, Q)`` with ``A = Q H Q^H`` and ``Q`` unitary.
    """
    H_np = np.array(A_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = H_np.shape[0]
    Q_np = np.eye(n, dtype=np.complex128)
    w_np = np.zeros(n, dtype=np.complex128)
    cdef cplx[:, ::1] h = H_np
    cdef cplx[:, ::1] qm = Q_np
    cdef cplx[::1] w = w_np
    cdef Py_ssize_t k, i, j
    cdef double xnorm, vnorm, ax0
    cdef cplx phase, acc
    with nogil:
        for k in range(n - 2):
            xnorm = 0.0
            for i in range(k + 1, n):
                xnorm += h[i, k].real * h[i, k].real + h[i, k].imag * h[i, k].imag
            xnorm = sqrt(xnorm)
            if xnorm == 0.0:
                continue
            ax0 = cabs(h[k + 1, k])
            if ax0 > 0.0:
                phase = h[k + 1, k] / ax0
            else:
                phase = 1.0
            for i in range(k + 1, n):
                w[i] = h[i, k]
            w[k + 1] = w[k + 1] + phase * xnorm
            vnorm = 0.0
            for i in range(k + 1, n):
                vnorm += w[i].real * w[i].real + w[i].imag * w[i].imag
            vnorm = sqrt(vnorm)
            for i in range(k + 1, n):
                w[i] = w[i] / vnorm
            # H <- P H on rows k+1..n-1
            for j in range(k, n):
                acc = 0.0
                for i in range(k + 1, n):
                    acc = acc + cconj(w[i]) * h[i, j]
                for i in range(k + 1, n):
                    h[i, j] = h[i, j] - 2.0 * w[i] * acc
            # H <- H P and Q <- Q P on columns k+1..n-1
            for i in range(n):
                acc = 0.0
                for j in range(k + 1, n):
                    acc = acc + h[i, j] * w[j]
                for j in range(k + 1, n):
                    h[i, j] = h[i, j] - 2.0 * acc * cconj(w[j])
                acc = 0.0
                for j in range(k + 1, n):
                    acc = acc + qm[i, j] * w[j]
                for j in range(k + 1, n):
                    qm[i, j] = qm[i, j] - 2.0 * acc * cconj(w[j])
            for i in range(k + 2, n):
                h[i, k] = 0.0
    return H_np, Q_np


cdef inline void givens(cplx x, cplx y, double *c, cplx *s) noexcept nogil:
    cdef double ax = cabs(x)
    cdef double ay = cabs(y)
    cdef double r
    if ay == 0.0:
        c[0] = 1.0
        s[0] = 0.0
        return
    if ax == 0.0:
        c[0] = 0.0
        s[0] = cconj(y) / ay
        return
    r = hypot(ax, ay)
    c[0] = ax / r
    s[0] = (x / ax) * cconj(y) / r


def schur_qr(H_in, Q_in, int max_iter):
    """Single-shift complex QR iteration on a Hessenberg matrix.

    Returns ``(T, Q, converged)`` with ``T`` upper triangular and the
    accumulated unitary ``Q`` such that ``A = Q T Q^H`` for the matrix
    ``A = Q_in H_in Q_in^H``.  ``max_iter`` caps iterations per eigenvalue.
    """
    H_np = np.array(H_in, dtype=np.complex128, order="C", copy=True)
    Q_np = np.array(Q_in, dtype=np.complex128, order="C", copy=True)
    cdef cplx[:, ::1] h = H_np
    cdef cplx[:, ::1] qm = Q_np
    cdef Py_ssize_t n = H_np.shape[0]
    cdef Py_ssize_t hi = n - 1
    cdef Py_ssize_t l, k, i, j, start, stop
    cdef int its = 0
    cdef bint converged = True
    cdef double sdiag, c, hnorm = 0.0
    cdef cplx mu, a, bb, cc, d, delta, disc, den, x, y, s, t1, t2
    with nogil:
        for i in range(n):
            for j in range(n):
                hnorm += cabs(h[i, j])
        if hnorm == 0.0:
            hnorm = 1.0
        while hi >= 1:
            l = hi
            while l >= 1:
                sdiag = cabs(h[l - 1, l - 1]) + cabs(h[l, l])
                if sdiag == 0.0:
                    sdiag = hnorm
                if cabs(h[l, l - 1]) <= EPS * sdiag:
                    h[l, l - 1] = 0.0
                    break
                l -= 1
            if l == hi:
                hi -= 1
                its = 0
                continue
            its += 1
            if its > max_iter:
                converged = False
                break
            if its % 11 == 0:
                mu = h[hi, hi] + cabs(h[hi, hi - 1])
                if hi >= 2:
                    mu = mu + cabs(h[hi - 1, hi - 2])
            else:
                a = h[hi - 1, hi - 1]
                bb = h[hi - 1, hi]
                cc = h[hi, hi - 1]
                d = h[hi, hi]
                delta = (a - d) / 2.0
                disc = (delta * delta + bb * cc) ** 0.5
                if (cconj(delta) * disc).real < 0:
                    disc = -disc
                den = delta + disc
                if cabs(den) == 0.0:
                    mu = d
                else:
                    mu = d - bb * cc / den
            x = h[l, l] - mu
            y = h[l + 1, l]
            for k in range(l, hi):
                if k > l:
                    x = h[k, k - 1]
                    y = h[k + 1, k - 1]
                givens(x, y, &c, &s)
                start = k - 1 if k > l else l
                for j in range(start, n):
                    t1 = h[k, j]
                    t2 = h[k + 1, j]
                    h[k, j] = c * t1 + s * t2
                    h[k + 1, j] = -cconj(s) * t1 + c * t2
                stop = k + 2 if k + 2 < hi else hi
                for i in range(stop + 1):
                    t1 = h[i, k]
                    t2 = h[i, k + 1]
                    h[i, k] = c * t1 + cconj(s) * t2
                    h[i, k + 1] = -s * t1 + c * t2
                for i in range(n):
                    t1 = qm[i, k]
                    t2 = qm[i, k + 1]
                    qm[i, k] = c * t1 + cconj(s) * t2
                    qm[i, k + 1] = -s * t1 + c * t2
                if k > l:
                    h[k + 1, k - 1] = 0.0
        for i in range(n):
            for j in range(i):
                h[i, j] = 0.0
    return H_np, Q_np, bool(converged)


def tri_solve_shifted(T_in, double complex mu, b_in, double small):
    """Solve ``(T - mu I) y = b`` for upper triangular ``T``.

    Pivots smaller than ``small`` in modulus are replaced by ``small``, which
    is the standard safeguard for inverse iteration at an exact eigenvalue.
    """
    T_np = np.ascontiguousarray(T_in, dtype=np.complex128)
    y_np = np.array(b_in, dtype=np.complex128, copy=True)
    cdef cplx[:, ::1] tm = T_np
    cdef cplx[::1] y = y_np
    cdef Py_ssize_t n = T_np.shape[0]
    cdef Py_ssize_t i, j
    cdef cplx acc, piv
    with nogil:
        for i in range(n - 1, -1, -1):
            acc = y[i]
            for j in range(i + 1, n):
                acc = acc - tm[i, j] * y[j]
            piv = tm[i, i] - mu
            if cabs(piv) < small:
                piv = small
            y[i] = acc / piv
    return y_np
