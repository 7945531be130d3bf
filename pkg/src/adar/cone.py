"""
Projection onto product cones of lines, half-lines and points in the
metric of a positive definite matrix:

    argmin_{lam in cone} (z - lam)' J (z - lam)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adar import kernels
from adar._fallback import project_one
from adar.errors import MatrixError

__all__ = ["ConeSpec", "ProjectionResult", "project_cone", "project_batch", "check_pd"]


@dataclass(frozen=True)
class ConeSpec:
    d: int
    halfline_mask: tuple
    zero_mask: tuple

    def __post_init__(self) -> None:
        h = tuple(bool(v) for v in self.halfline_mask)
        z = tuple(bool(v) for v in self.zero_mask)
        if len(h) != self.d or len(z) != self.d:
            raise ValueError("mask lengths must equal d")
        if any(a and b for a, b in zip(h, z)):
            raise ValueError("half-line and zero masks must be disjoint")
        object.__setattr__(self, "halfline_mask", h)
        object.__setattr__(self, "zero_mask", z)

    @classmethod
    def from_indices(cls, d: int, halflines=(), zeros=()) -> "ConeSpec":
        h = np.zeros(d, dtype=bool)
        z = np.zeros(d, dtype=bool)
        h[list(halflines)] = True
        z[list(zeros)] = True
        return cls(d, tuple(h), tuple(z))

    @classmethod
    def free(cls, d: int) -> "ConeSpec":
        return cls.from_indices(d)

    @property
    def halfline(self) -> np.ndarray:
        return np.array(self.halfline_mask, dtype=bool)

    @property
    def zero(self) -> np.ndarray:
        return np.array(self.zero_mask, dtype=bool)

    def contains(self, lam, tol: float = 0.0) -> bool:
        lam = np.asarray(lam)
        return bool(np.all(lam[self.halfline] >= -tol) and np.all(lam[self.zero] == 0.0))


@dataclass
class ProjectionResult:
    lam: np.ndarray
    active_set: tuple
    objective: float
    kkt_residual: float
    iterations: int


def check_pd(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise MatrixError(f"metric must be square, got shape {J.shape}")
    if not np.allclose(J, J.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(J).max())):
        raise MatrixError("metric matrix is not symmetric")
    J = 0.5 * (J + J.T)
    try:
        np.linalg.cholesky(J)
    except np.linalg.LinAlgError as exc:
        raise MatrixError("metric matrix is not positive definite") from exc
    return J


def _kkt_residual(z, J, lam, halfline, zero) -> float:
    grad = -2.0 * J @ (z - lam)
    free = ~(halfline | zero)
    res = np.abs(grad[free]).tolist()
    h = np.flatnonzero(halfline)
    for i in h:
        if lam[i] > 0:
            res.append(abs(grad[i]))
        else:
            res.append(max(0.0, -grad[i]))
            res.append(max(0.0, -lam[i]))
    return float(max(res)) if res else 0.0


def project_cone(z, J, cone: ConeSpec) -> ProjectionResult:
    """
    Exact projection by a primal active-set method.

    Examples
    --------
    >>> r = project_cone([-1.0, 2.0], [[2.0, 1.0], [1.0, 2.0]], ConeSpec.from_indices(2, [0]))
    >>> r.lam
    array([0. , 1.5])
    """
    z = np.asarray(z, dtype=float)
    J = check_pd(J)
    if z.shape != (cone.d,) or J.shape != (cone.d, cone.d):
        raise ValueError("dimension mismatch between z, J and cone")
    h, zm = cone.halfline, cone.zero
    lam, active, it = project_one(z, J, h, zm)
    diff = z - lam
    return ProjectionResult(
        lam=lam,
        active_set=tuple(int(i) for i in np.flatnonzero(active)),
        objective=float(diff @ J @ diff),
        kkt_residual=_kkt_residual(z, J, lam, h, zm),
        iterations=it,
    )


def project_batch(Z, J, cone: ConeSpec) -> np.ndarray:
    """Project every row of ``Z``; uses the compiled kernel when available."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    J = check_pd(J)
    if Z.shape[1] != cone.d:
        raise ValueError("dimension mismatch")
    try:
        return kernels.project_batch(Z, J, cone.halfline, cone.zero)
    except np.linalg.LinAlgError as exc:
        raise MatrixError(str(exc)) from exc
