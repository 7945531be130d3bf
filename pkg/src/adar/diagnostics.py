"""
Model checking: mixed portmanteau test on weighted residuals and weighted
squared residuals, Hill tail-index estimators and information criteria.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import stats

from adar.cone import ConeSpec, project_batch
from adar.errors import ADARError, MatrixError, ParameterError
from adar.inference import Estimate, matrix_square_root, mc_pvalue
from adar.model import SeriesFrame, make_rng

__all__ = [
    "PortmanteauReport",
    "portmanteau",
    "simulate_portmanteau_null",
    "hill",
    "information_criteria",
    "DEFAULT_LAGS",
]

DEFAULT_LAGS = (6, 12, 18)
SE_MULTIPLE = 5.0


def _acf(x: np.ndarray, M: int) -> np.ndarray:
    xc = x - x.mean()
    den = float(xc @ xc)
    if den <= 0:
        raise ADARError("series of weighted residuals is constant; autocorrelations undefined")
    return np.array([float(xc[k:] @ xc[:-k]) / den for k in range(1, M + 1)])


@dataclass
class PortmanteauReport:
    M: int
    rho: np.ndarray
    r: np.ndarray
    QM: float
    dof: int
    pvalue: float
    method: str
    V: np.ndarray = field(repr=False, default=None)
    G: np.ndarray = field(repr=False, default=None)
    J: np.ndarray = field(repr=False, default=None)
    halfline: np.ndarray = field(repr=False, default=None)
    thresholds: Dict[float, float] = field(default_factory=dict)
    N: Optional[int] = None
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "rho": self.rho.tolist(),
            "r": self.r.tolist(),
            "QM": self.QM,
            "dof": self.dof,
            "pvalue": self.pvalue,
            "method": self.method,
            "thresholds": {str(k): v for k, v in self.thresholds.items()},
            "N": self.N,
            "seed": self.seed,
        }


def _pieces(est: Estimate, M: int):
    """rho, r, V-hat and G-hat for an estimate."""
    lik = est.lik
    w = lik.w
    n = lik.n
    if M < 1:
        raise ParameterError("M must be at least 1")
    d = len(est.free)
    if n <= 2 * M + d + 10:
        raise ParameterError(f"sample too short for M={M}: n={n}, need well above {2 * M + d}")
    theta = est.theta
    eta, _ = lik.residuals(theta)
    h = lik.X @ theta[lik.spec.p + 1 :]
    zeta = w * eta
    xi = w * w * (eta * eta - 1.0)
    rho = _acf(zeta, M)
    r = _acf(xi, M)

    ew2 = float(np.mean(w * w))
    kappa4 = float(np.sum(w * eta**4) / np.sum(w))
    sbar2 = (kappa4 - 1.0) * float(np.mean(w**4))
    if sbar2 <= 0:
        raise MatrixError("weighted fourth moment of residuals does not exceed one")

    free = est.free
    p1 = lik.spec.p + 1
    Yd = lik.Y / np.sqrt(h)[:, None]
    Xd = lik.X / h[:, None]
    Ur = np.zeros((M, lik.spec.d))
    Up = np.zeros((M, lik.spec.d))
    for k in range(1, M + 1):
        a = w[k:] * w[:-k] * eta[:-k]
        Up[k - 1, :p1] = -(a @ Yd[k:]) / n
        b = w[k:] ** 2 * w[:-k] ** 2 * (eta[:-k] ** 2 - 1.0)
        Ur[k - 1, p1:] = -(b @ Xd[k:]) / n
    V = np.zeros((2 * M, 2 * M + d))
    V[:, : 2 * M] = np.eye(2 * M)
    V[:M, 2 * M :] = Up[:, free] / ew2
    V[M:, 2 * M :] = Ur[:, free] / sbar2

    # influence of the estimator: -J^-1 w_t dl_t/dtheta
    J = est.J
    S = lik.per_obs_scores(theta)[:, free] * w[:, None]
    infl = -np.linalg.solve(J, S.T).T
    vt = np.zeros((n, 2 * M + d))
    for k in range(1, M + 1):
        vt[k:, k - 1] = zeta[k:] * zeta[:-k] / ew2
        vt[k:, M + k - 1] = xi[k:] * xi[:-k] / sbar2
    vt[:, 2 * M :] = infl
    G = vt.T @ vt / n
    return rho, r, V, 0.5 * (G + G.T), J


def _quad_inverse(V: np.ndarray, G: np.ndarray) -> np.ndarray:
    A = V @ G @ V.T
    A = 0.5 * (A + A.T)
    rank = np.linalg.matrix_rank(A)
    cond = np.linalg.cond(A)
    if rank < A.shape[0] or not np.isfinite(cond) or cond > 1e12:
        raise MatrixError(f"V G V' is singular: rank {rank} of {A.shape[0]}, condition number {cond:.3g}")
    return np.linalg.inv(A)


def simulate_portmanteau_null(
    V: np.ndarray,
    G: np.ndarray,
    J: np.ndarray,
    halfline: Sequence[bool],
    N: int = 50_000,
    seed: int = 0,
    levels=(0.01, 0.05, 0.10),
) -> tuple[np.ndarray, Dict[float, float]]:
    """
    Null draws of the portmanteau statistic when some volatility
    coefficients sit on the boundary.

    ``g ~ N(0, G)``; the last ``d`` coordinates are projected onto the cone
    with half-lines at ``halfline`` (J-metric), the first ``2M`` are kept.
    Returns the sample and its upper percentiles at ``levels``.
    """
    V, G, J = (np.asarray(a, dtype=float) for a in (V, G, J))
    d = J.shape[0]
    m2 = V.shape[0]
    Ainv = _quad_inverse(V, G)
    S = matrix_square_root(G)
    rng = make_rng(seed)
    g = rng.standard_normal((N, m2 + d)) @ S
    cone = ConeSpec(d, tuple(bool(b) for b in halfline), (False,) * d)
    g[:, m2:] = project_batch(g[:, m2:], J, cone)
    x = g @ V.T
    sample = np.einsum("ij,jk,ik->i", x, Ainv, x)
    thr = {b: float(np.percentile(sample, 100 * (1 - b))) for b in levels}
    return sample, thr


def portmanteau(
    est: Estimate,
    M: int = 6,
    simulate_null: Optional[bool] = None,
    N: int = 50_000,
    seed: int = 0,
    se_multiple: float = SE_MULTIPLE,
) -> PortmanteauReport:
    """
    Mixed portmanteau statistic ``Q_M`` for the fitted model.

    The chi-square(2M) reference is used when every free volatility
    coefficient exceeds ``se_multiple`` standard errors; otherwise (or when
    ``simulate_null`` is true) the p-value comes from the projected Gaussian
    null with half-lines at the small coefficients.
    """
    rho, r, V, G, J = _pieces(est, M)
    Ainv = _quad_inverse(V, G)
    x = np.concatenate([rho, r])
    QM = float(est.n * x @ Ainv @ x)
    a0 = est.spec.omega_index + 1
    se = est.se
    halfline = np.array([i >= a0 and not est.theta[i] > se_multiple * se[i] for i in est.free])
    if simulate_null is None:
        simulate_null = bool(halfline.any())
    rep = PortmanteauReport(M=M, rho=rho, r=r, QM=QM, dof=2 * M, pvalue=float(stats.chi2.sf(QM, 2 * M)),
                            method="chi-square", V=V, G=G, J=J, halfline=halfline)
    if simulate_null:
        sample, thr = simulate_portmanteau_null(V, G, J, halfline, N=N, seed=seed)
        rep.pvalue = mc_pvalue(QM, sample)
        rep.thresholds = thr
        rep.method = "simulated-boundary"
        rep.N, rep.seed = N, seed
    else:
        rep.thresholds = {b: float(stats.chi2.ppf(1 - b, 2 * M)) for b in (0.01, 0.05, 0.10)}
    return rep


def hill(data, k: int) -> Dict[str, float]:
    """
    Hill estimators from the ascending order statistics ``y_(1) <= ... <= y_(n)``.

    ``H1k`` uses the k smallest observations relative to ``y_(k+1)``,
    ``H2k`` the k largest relative to ``y_(n-k)``; so ``H1k`` on ``y``
    equals ``H2k`` on ``-y``.

    Examples
    --------
    >>> out = hill([1.0, 2.0, 4.0, 8.0, 16.0], 2)
    >>> round(out["H2k"], 6)
    0.961797
    """
    if isinstance(data, SeriesFrame):
        data = data.data
    y = np.sort(np.asarray(data, dtype=float))
    n = y.size
    if not 1 <= k < n:
        raise ParameterError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    out = {}
    for name, num, den in (("H1k", y[:k], y[k]), ("H2k", y[::-1][:k], y[n - k - 1])):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = num / den
        bad = int(np.sum(~(ratio > 0)))
        if bad:
            raise ADARError(f"{name}: {bad} of {k} order-statistic ratios are not positive; log undefined")
        s = float(np.mean(np.log(ratio)))
        if s == 0.0:
            raise ADARError(f"{name}: all ratios equal one, estimator diverges")
        out[name] = 1.0 / s
    return out


def information_criteria(est_or_fit) -> Dict[str, float]:
    """AIC and BIC on the ``2 n F_n`` scale with ``k`` free parameters."""
    fr = getattr(est_or_fit, "fit", est_or_fit)
    k = fr.free_count
    base = 2.0 * fr.n * fr.F_value
    return {"aic": base + 2.0 * k, "bic": base + k * math.log(fr.n), "k": k}
