# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: ADAR simulation recursion and batched cone projection."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def simulate_recursion(double[::1] eta, double u, double[::1] phi, double omega,
                       double[::1] alpha, double bound):
    cdef Py_ssize_t n = eta.shape[0], p = phi.shape[0], q = alpha.shape[0]
    cdef Py_ssize_t t, i
    cdef double mean, var, yl, val
    out = np.zeros(n)
    cdef double[::1] y = out
    cdef Py_ssize_t bad = -1
    with nogil:
        for t in range(n):
            mean = u
            for i in range(p):
                if t - 1 - i >= 0:
                    mean = mean + phi[i] * y[t - 1 - i]
            var = omega
            for i in range(q):
                if t - 1 - i >= 0:
                    yl = y[t - 1 - i]
                    var = var + alpha[i] * yl * yl
            val = mean + eta[t] * sqrt(var)
            if not (fabs(val) <= bound):
                bad = t
                break
            y[t] = val
    return out, bad


cdef int _cholesky_solve(double* A, double* b, Py_ssize_t n) noexcept nogil:
    """In-place Cholesky of row-major n x n A, then solve A x = b into b."""
    cdef Py_ssize_t i, j, k
    cdef double s
    for j in range(n):
        s = A[j * n + j]
        for k in range(j):
            s -= A[j * n + k] * A[j * n + k]
        if s <= 0.0:
            return -1
        A[j * n + j] = sqrt(s)
        for i in range(j + 1, n):
            s = A[i * n + j]
            for k in range(j):
                s -= A[i * n + k] * A[j * n + k]
            A[i * n + j] = s / A[j * n + j]
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= A[i * n + k] * b[k]
        b[i] = s / A[i * n + i]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, n):
            s -= A[k * n + i] * b[k]
        b[i] = s / A[i * n + i]
    return 0


cdef int _equality(const double* z, const double* J, const char* fixed, double* lam,
                   Py_ssize_t d, double* M, double* rhs, Py_ssize_t* fidx) noexcept nogil:
    cdef Py_ssize_t nf = 0, a, b, s
    cdef double acc
    for a in range(d):
        if not fixed[a]:
            fidx[nf] = a
            nf += 1
    for a in range(d):
        lam[a] = 0.0
    if nf == 0:
        return 0
    for a in range(nf):
        for b in range(nf):
            M[a * nf + b] = J[fidx[a] * d + fidx[b]]
        acc = 0.0
        for s in range(d):
            if fixed[s]:
                acc += J[fidx[a] * d + s] * z[s]
        rhs[a] = acc
    if _cholesky_solve(M, rhs, nf) != 0:
        return -1
    for a in range(nf):
        lam[fidx[a]] = z[fidx[a]] + rhs[a]
    return 0


cdef int _project(const double* z, const double* J, const char* half, const char* zero,
                  double* lam, Py_ssize_t d, char* active, char* fixed, double* cand,
                  double* grad, double* M, double* rhs, Py_ssize_t* fidx,
                  double tol, int max_iter) noexcept nogil:
    cdef Py_ssize_t i, k, blocking, argmin
    cdef double ratio, r, step, mu_min, gmax, acc
    cdef int it
    for i in range(d):
        active[i] = half[i]
        fixed[i] = active[i] or zero[i]
    if _equality(z, J, fixed, lam, d, M, rhs, fidx) != 0:
        return -1
    for it in range(max_iter):
        for i in range(d):
            fixed[i] = active[i] or zero[i]
        if _equality(z, J, fixed, cand, d, M, rhs, fidx) != 0:
            return -1
        blocking = -1
        ratio = 1.0
        for i in range(d):
            if half[i] and not active[i]:
                step = cand[i] - lam[i]
                if step < 0.0:
                    r = -lam[i] / step
                    if r < ratio:
                        ratio = r
                        blocking = i
        if blocking < 0:
            for i in range(d):
                lam[i] = cand[i]
            gmax = 0.0
            for i in range(d):
                acc = 0.0
                for k in range(d):
                    acc += J[i * d + k] * (z[k] - lam[k])
                grad[i] = -2.0 * acc
                if fabs(grad[i]) > gmax:
                    gmax = fabs(grad[i])
            argmin = -1
            mu_min = 0.0
            for i in range(d):
                if active[i]:
                    if argmin < 0 or grad[i] < mu_min:
                        mu_min = grad[i]
                        argmin = i
            if argmin < 0:
                break
            if gmax < 1.0:
                gmax = 1.0
            if mu_min >= -tol * gmax:
                break
            active[argmin] = 0
        else:
            for i in range(d):
                lam[i] = lam[i] + ratio * (cand[i] - lam[i])
            lam[blocking] = 0.0
            active[blocking] = 1
    for i in range(d):
        if zero[i] or active[i]:
            lam[i] = 0.0
    return 0


def project_batch(Z, J, halfline, zero):
    cdef double[:, ::1] Zv = np.ascontiguousarray(Z, dtype=np.float64)
    cdef double[:, ::1] Jv = np.ascontiguousarray(J, dtype=np.float64)
    cdef char[::1] hv = np.ascontiguousarray(halfline, dtype=np.int8).view(np.int8)
    cdef char[::1] zv = np.ascontiguousarray(zero, dtype=np.int8).view(np.int8)
    cdef Py_ssize_t N = Zv.shape[0], d = Zv.shape[1], r
    out = np.empty((N, d))
    cdef double[:, ::1] ov = out
    cdef double[::1] M = np.empty(max(d * d, 1))
    cdef double[::1] rhs = np.empty(max(d, 1))
    cdef double[::1] cand = np.empty(max(d, 1))
    cdef double[::1] grad = np.empty(max(d, 1))
    cdef char[::1] active = np.zeros(max(d, 1), dtype=np.int8)
    cdef char[::1] fixed = np.zeros(max(d, 1), dtype=np.int8)
    cdef Py_ssize_t[::1] fidx = np.zeros(max(d, 1), dtype=np.intp)
    cdef int nh = 0, max_iter, status = 0
    for r in range(d):
        nh += hv[r]
    max_iter = 10 * (nh + 1) + 50
    if d == 0:
        return out
    with nogil:
        for r in range(N):
            status = _project(&Zv[r, 0], &Jv[0, 0], &hv[0], &zv[0], &ov[r, 0], d,
                              &active[0], &fixed[0], &cand[0], &grad[0], &M[0],
                              &rhs[0], &fidx[0], 1e-12, max_iter)
            if status != 0:
                break
    if status != 0:
        raise np.linalg.LinAlgError("metric matrix is not positive definite")
    return out
