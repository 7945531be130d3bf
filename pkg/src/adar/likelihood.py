"""
Self-weighted Gaussian quasi-likelihood: objective, analytic score and
Hessian, sandwich ingredients and residuals.

For ``h_t = alpha' x_{t-1}`` and ``e_t = y_t - phi' y_{t-1}`` the
per-observation loss is ``l_t = (log h_t + e_t^2 / h_t) / 2`` and the
objective is ``F_n = mean(w_t l_t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from adar.errors import DomainError, ParameterError
from adar.model import ModelSpec, ParamVector, SeriesFrame

__all__ = [
    "QuasiLikelihood",
    "LikelihoodWorkspace",
    "objective",
    "score_and_hessian",
    "sandwich_parts",
    "residuals",
]

_SQRT2 = np.sqrt(2.0)


def _as_array(theta, spec: ModelSpec) -> np.ndarray:
    if isinstance(theta, ParamVector):
        theta = theta.to_array()
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.d,):
        raise ParameterError(f"expected {spec.d} parameters, got shape {theta.shape}")
    return theta


@dataclass
class LikelihoodWorkspace:
    theta: np.ndarray
    F: float
    score: np.ndarray
    hessian: np.ndarray
    sigma: np.ndarray
    dmat: np.ndarray
    gamma_j: np.ndarray
    residuals: np.ndarray
    eps: np.ndarray
    wbar: float

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class QuasiLikelihood:
    """
    Quasi-likelihood of an ADAR(p, q) model on a fixed frame and weights.

    Parameters
    ----------
    frame : SeriesFrame
        Data with at least ``max(p, q)`` presample values.
    spec : ModelSpec
        Model orders.
    weights : ndarray, optional
        Self-weights ``w_1..w_n``; unit weights when omitted.
    """

    def __init__(self, frame: SeriesFrame, spec: ModelSpec, weights=None):
        self.frame = frame
        self.spec = spec
        self.Y, self.X = frame.regressors(spec)
        self.y = frame.data
        self.n = frame.n
        if weights is None:
            weights = np.ones(self.n)
        self.w = np.asarray(weights, dtype=float)
        if self.w.shape != (self.n,):
            raise ParameterError(f"need {self.n} weights, got {self.w.shape}")
        p = spec.p
        self._phi = slice(0, p + 1)
        self._alpha = slice(p + 1, spec.d)

    def _parts(self, theta):
        theta = _as_array(theta, self.spec)
        h = self.X @ theta[self._alpha]
        if not np.all(h > 0):
            t = int(np.flatnonzero(~(h > 0))[0]) + 1
            raise DomainError(f"conditional variance alpha'x_(t-1) = {h[t - 1]:g} is not positive at t={t}", t=t)
        e = self.y - self.Y @ theta[self._phi]
        return theta, h, e

    def residuals(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """Standardized residuals ``e_t / sqrt(h_t)`` and raw ``e_t``."""
        _, h, e = self._parts(theta)
        return e / np.sqrt(h), e

    def objective(self, theta) -> float:
        _, h, e = self._parts(theta)
        return float(np.mean(self.w * 0.5 * (np.log(h) + e * e / h)))

    def per_obs_scores(self, theta) -> np.ndarray:
        """Rows ``d l_t / d theta`` (unweighted), shape (n, d)."""
        _, h, e = self._parts(theta)
        gphi = (-e / h)[:, None] * self.Y
        galpha = (0.5 * (h - e * e) / (h * h))[:, None] * self.X
        return np.hstack([gphi, galpha])

    def derivatives(self, theta) -> tuple[float, np.ndarray, np.ndarray]:
        """Objective, score and Hessian in one pass."""
        _, h, e = self._parts(theta)
        w, Y, X, n = self.w, self.Y, self.X, self.n
        e2 = e * e
        F = float(np.mean(w * 0.5 * (np.log(h) + e2 / h)))
        g = np.concatenate(
            [
                Y.T @ (w * (-e / h)) / n,
                X.T @ (w * 0.5 * (h - e2) / (h * h)) / n,
            ]
        )
        Hpp = (Y * (w / h)[:, None]).T @ Y / n
        Hpa = (Y * (w * e / (h * h))[:, None]).T @ X / n
        Haa = (X * (w * (2.0 * e2 - h) / (2.0 * h**3))[:, None]).T @ X / n
        H = np.block([[Hpp, Hpa], [Hpa.T, Haa]])
        H = 0.5 * (H + H.T)
        return F, g, H

    def score(self, theta) -> np.ndarray:
        return self.derivatives(theta)[1]

    def hessian(self, theta) -> np.ndarray:
        return self.derivatives(theta)[2]

    def dmat(self, theta) -> np.ndarray:
        """Skewness/kurtosis matrix built from weight-normalized residual moments."""
        _, h, e = self._parts(theta)
        w = self.w
        sw = w.sum()
        d12 = np.sum(w * e**3 / h**1.5) / (_SQRT2 * sw)
        d22 = np.sum(w * e**4 / h**2) / (2.0 * sw) - 0.5
        return np.array([[1.0, d12], [d12, d22]])

    def sandwich_parts(self, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Returns
        -------
        sigma : ndarray
            ``n^-1 sum w_t^2 Gamma_t D_n Gamma_t'``.
        dmat : ndarray
            The 2x2 matrix ``D_n``.
        gamma_j : ndarray
            ``n^-1 sum w_t Gamma_t Gamma_t'`` (block diagonal).
        """
        _, h, e = self._parts(theta)
        D = self.dmat(theta)
        w, Y, X, n = self.w, self.Y, self.X, self.n
        w2 = w * w
        S_pp = D[0, 0] * (Y * (w2 / h)[:, None]).T @ Y / n
        S_pa = D[0, 1] * (Y * (w2 / (_SQRT2 * h**1.5))[:, None]).T @ X / n
        S_aa = D[1, 1] * (X * (w2 / (2.0 * h * h))[:, None]).T @ X / n
        sigma = np.block([[S_pp, S_pa], [S_pa.T, S_aa]])
        sigma = 0.5 * (sigma + sigma.T)
        J_pp = (Y * (w / h)[:, None]).T @ Y / n
        J_aa = (X * (w / (2.0 * h * h))[:, None]).T @ X / n
        p1, q1 = Y.shape[1], X.shape[1]
        gamma_j = np.block([[J_pp, np.zeros((p1, q1))], [np.zeros((q1, p1)), J_aa]])
        gamma_j = 0.5 * (gamma_j + gamma_j.T)
        return sigma, D, gamma_j

    def workspace(self, theta) -> LikelihoodWorkspace:
        theta = _as_array(theta, self.spec)
        F, g, H = self.derivatives(theta)
        sigma, D, gj = self.sandwich_parts(theta)
        eta, e = self.residuals(theta)
        return LikelihoodWorkspace(
            theta=theta, F=F, score=g, hessian=H, sigma=sigma, dmat=D, gamma_j=gj,
            residuals=eta, eps=e, wbar=float(self.w.mean()),
        )


def objective(theta, frame: SeriesFrame, weights=None, spec: ModelSpec | None = None) -> float:
    spec = spec or (theta.spec if isinstance(theta, ParamVector) else None)
    return QuasiLikelihood(frame, spec, weights).objective(theta)


def score_and_hessian(theta, frame: SeriesFrame, weights=None, spec: ModelSpec | None = None):
    spec = spec or (theta.spec if isinstance(theta, ParamVector) else None)
    _, g, H = QuasiLikelihood(frame, spec, weights).derivatives(theta)
    return g, H


def sandwich_parts(theta, frame: SeriesFrame, weights=None, spec: ModelSpec | None = None):
    spec = spec or (theta.spec if isinstance(theta, ParamVector) else None)
    return QuasiLikelihood(frame, spec, weights).sandwich_parts(theta)


def residuals(theta, frame: SeriesFrame, spec: ModelSpec | None = None):
    spec = spec or (theta.spec if isinstance(theta, ParamVector) else None)
    return QuasiLikelihood(frame, spec).residuals(theta)
