"""
Pure Python/numpy versions of the hot kernels.

These mirror ``adar._core`` exactly and are used when the compiled
extension is unavailable or ``ADAR_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np


def simulate_recursion(eta, u, phi, omega, alpha, bound):
    """Run the ADAR recursion from a zero start; returns (y, first_bad_index or -1)."""
    eta = np.asarray(eta, dtype=float)
    phi = [float(v) for v in phi]
    alpha = [float(v) for v in alpha]
    p, q = len(phi), len(alpha)
    n = eta.shape[0]
    y = [0.0] * n
    for t in range(n):
        mean = u
        for i in range(p):
            if t - 1 - i >= 0:
                mean += phi[i] * y[t - 1 - i]
        var = omega
        for j in range(q):
            if t - 1 - j >= 0:
                yl = y[t - 1 - j]
                var += alpha[j] * yl * yl
        val = mean + eta[t] * math.sqrt(var)
        if not abs(val) <= bound:
            out = np.array(y, dtype=float)
            return out, t
        y[t] = val
    return np.array(y, dtype=float), -1


def _equality_solution(z, J, fixed):
    """Minimise (z-l)'J(z-l) with l[fixed] = 0 and the rest free."""
    lam = np.zeros_like(z)
    free = ~fixed
    if not free.any():
        return lam
    if fixed.any():
        rhs = J[np.ix_(free, fixed)] @ z[fixed]
        lam[free] = z[free] + np.linalg.solve(J[np.ix_(free, free)], rhs)
    else:
        lam[free] = z[free]
    return lam


def project_one(z, J, halfline, zero, tol=1e-12, max_iter=None):
    """
    Primal active-set projection of ``z`` onto the cone in the J-metric.

    Returns ``(lam, active, iterations)`` where ``active`` flags half-line
    coordinates held at zero.
    """
    d = z.shape[0]
    hidx = np.flatnonzero(halfline)
    active = halfline.copy()
    lam = _equality_solution(z, J, active | zero)
    if max_iter is None:
        max_iter = 10 * (len(hidx) + 1) + 50
    it = 0
    for it in range(1, max_iter + 1):
        cand = _equality_solution(z, J, active | zero)
        step = cand - lam
        inactive_h = hidx[~active[hidx]]
        blocking = -1
        ratio = 1.0
        for i in inactive_h:
            if step[i] < 0.0:
                r = -lam[i] / step[i]
                if r < ratio:
                    ratio = r
                    blocking = i
        if blocking < 0:
            lam = cand
            grad = -2.0 * (J @ (z - lam))
            act = hidx[active[hidx]]
            if act.size == 0:
                break
            mu = grad[act]
            k = int(np.argmin(mu))
            scale = max(1.0, float(np.max(np.abs(grad))))
            if mu[k] >= -tol * scale:
                break
            active[act[k]] = False
        else:
            lam = lam + ratio * step
            lam[blocking] = 0.0
            active[blocking] = True
    lam[zero] = 0.0
    lam[active] = 0.0
    return lam, active, it


def project_batch(Z, J, halfline, zero):
    Z = np.asarray(Z, dtype=float)
    J = np.asarray(J, dtype=float)
    halfline = np.asarray(halfline, dtype=bool)
    zero = np.asarray(zero, dtype=bool)
    out = np.empty_like(Z)
    if not halfline.any():
        # closed form: no inequality constraints
        fixed = zero
        free = ~fixed
        out[:] = 0.0
        if fixed.any() and free.any():
            A = np.linalg.solve(J[np.ix_(free, free)], J[np.ix_(free, fixed)])
            out[:, free] = Z[:, free] + Z[:, fixed] @ A.T
        elif free.any():
            out[:, free] = Z[:, free]
        return out
    for r in range(Z.shape[0]):
        out[r], _, _ = project_one(Z[r], J, halfline, zero)
    return out
