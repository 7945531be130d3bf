"""
Box-constrained minimisation of the quasi-likelihood.

A projected Newton method: the binding face of the box is identified from
the projected gradient, a Levenberg-damped Newton step is taken on the
remaining coordinates and an Armijo search runs along the projected arc.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from adar.errors import ParameterError
from adar.likelihood import QuasiLikelihood
from adar.model import ModelSpec

__all__ = ["BoxResult", "FitResult", "fit_box", "fit", "default_starts"]

TOL = 1e-8
MAX_ITER = 500


@dataclass
class BoxResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    pg_norm: float
    history: list = field(default_factory=list)
    message: str = ""


def _projected_gradient(x, g, lower, fixed):
    pg = x - np.maximum(x - g, lower)
    pg[fixed] = 0.0
    return pg


def _damped_solve(H, g):
    n = H.shape[0]
    mu = 0.0
    scale = max(1e-12, float(np.max(np.abs(np.diag(H))))) if n else 1.0
    for _ in range(60):
        try:
            L = np.linalg.cholesky(H + mu * np.eye(n))
        except np.linalg.LinAlgError:
            mu = max(1e-10 * scale, 10.0 * mu)
            continue
        return -np.linalg.solve(L.T, np.linalg.solve(L, g))
    return -g


def fit_box(
    fun: Callable[[np.ndarray], tuple],
    x0,
    lower,
    fixed_zero: Sequence[int] = (),
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    value: Optional[Callable[[np.ndarray], float]] = None,
) -> BoxResult:
    """
    Minimise a smooth function subject to ``x >= lower`` with the
    ``fixed_zero`` coordinates held at exactly zero.

    Parameters
    ----------
    fun : callable
        Returns ``(f, gradient, hessian)`` at a point.
    x0 : array_like
        Feasible start (it is projected onto the box first).
    lower : array_like
        Lower bounds; ``-inf`` for unbounded coordinates.
    value : callable, optional
        Cheap objective-only evaluation used in the line search.
    """
    lower = np.asarray(lower, dtype=float)
    x = np.maximum(np.asarray(x0, dtype=float).copy(), lower)
    d = x.size
    fixed = np.zeros(d, dtype=bool)
    fixed[list(fixed_zero)] = True
    x[fixed] = 0.0
    if np.any(lower[fixed] > 0):
        raise ParameterError("cannot pin a coordinate whose lower bound is positive")
    value = value or (lambda z: fun(z)[0])

    f, g, H = fun(x)
    history = [f]
    pg = _projected_gradient(x, g, lower, fixed)
    pgn = float(np.max(np.abs(pg))) if d else 0.0
    it = 0
    msg = ""
    while pgn > tol and it < max_iter:
        it += 1
        eps = min(1e-6, pgn)
        binding = (x <= lower + eps) & (g > 0)
        free = ~(binding | fixed)
        step = np.zeros(d)
        if free.any():
            step[free] = _damped_solve(H[np.ix_(free, free)], g[free])
        step[binding] = lower[binding] - x[binding]
        accepted = False
        for direction in (step, -g * ~fixed):
            s = 1.0
            while s > 1e-14:
                xn = np.maximum(x + s * direction, lower)
                xn[fixed] = 0.0
                try:
                    fn = value(xn)
                except Exception:
                    fn = np.inf
                if np.isfinite(fn) and fn <= f + 1e-4 * float(g @ (xn - x)):
                    accepted = True
                    break
                s *= 0.5
            if accepted:
                break
        if not accepted:
            msg = "line search failed"
            break
        if fn > f:
            msg = "no decrease"
            break
        x = xn
        f, g, H = fun(x)
        history.append(f)
        pg = _projected_gradient(x, g, lower, fixed)
        pgn = float(np.max(np.abs(pg)))
    converged = pgn <= tol
    if not converged and not msg:
        msg = "maximum iterations reached"
    return BoxResult(x=x, fun=f, converged=converged, iterations=it, pg_norm=pgn, history=history, message=msg)


@dataclass
class FitResult:
    theta_hat: np.ndarray
    F_value: float
    converged: bool
    iterations: int
    final_gradient_norm: float
    spec: ModelSpec
    fixed_zero: tuple
    n: int
    starts: list = field(default_factory=list)
    message: str = ""

    @property
    def free_count(self) -> int:
        return self.spec.d - len(self.fixed_zero)

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.tolist(),
            "names": self.spec.names(),
            "F_value": self.F_value,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_gradient_norm": self.final_gradient_norm,
            "fixed_zero": list(self.fixed_zero),
            "n": self.n,
            "message": self.message,
        }


def lower_bounds(spec: ModelSpec, omega_lower: float = 1e-8) -> np.ndarray:
    lower = np.full(spec.d, -np.inf)
    lower[spec.p + 1] = omega_lower
    lower[spec.p + 2 :] = 0.0
    return lower


def default_starts(lik: QuasiLikelihood, fixed_zero=(), omega_lower: float = 1e-8) -> list[np.ndarray]:
    """Five starting points: weighted OLS mean with several volatility levels, plus a zero-mean start."""
    spec = lik.spec
    w = lik.w
    Y, X, y = lik.Y, lik.X, lik.y
    fixed = np.zeros(spec.d, dtype=bool)
    fixed[list(fixed_zero)] = True
    pfix = fixed[: spec.p + 1]
    phi = np.zeros(spec.p + 1)
    cols = ~pfix
    if cols.any():
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(Y[:, cols] * sw[:, None], y * sw, rcond=None)
        phi[cols] = coef
    e = y - Y @ phi
    s2 = max(float(np.sum(w * e * e) / np.sum(w)), 10 * omega_lower)
    ybar = float(np.sum(w * y) / np.sum(w)) if not pfix[0] else 0.0
    ey2 = float(np.mean(X[:, 1:])) if spec.q else 0.0
    afix = fixed[spec.p + 2 :]
    n_alpha = int(np.sum(~afix))
    starts = []
    for c, mean_start in ((0.0, phi), (0.05, phi), (0.2, phi), (0.5, phi), (0.1, None)):
        th = np.zeros(spec.d)
        if mean_start is None:
            th[0] = ybar
        else:
            th[: spec.p + 1] = mean_start
        alpha = np.where(afix, 0.0, c / max(n_alpha, 1))
        omega = max(s2 - float(alpha.sum()) * ey2, 0.1 * s2)
        th[spec.p + 1] = omega
        th[spec.p + 2 :] = alpha
        th[fixed] = 0.0
        starts.append(th)
    return starts


def fit(
    lik: QuasiLikelihood,
    fixed_zero: Sequence[int] = (),
    starts: Optional[list] = None,
    n_starts: int = 5,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    omega_lower: float = 1e-8,
) -> FitResult:
    """
    Self-weighted quasi-maximum likelihood fit with optional zero restrictions.

    Multi-start; the result with the lowest objective among converged runs
    wins (lexicographic order of theta breaks ties).
    """
    spec = lik.spec
    fixed_zero = tuple(sorted(set(int(i) for i in fixed_zero)))
    for i in fixed_zero:
        if not 0 <= i < spec.d or i == spec.p + 1:
            raise ParameterError(f"cannot pin coordinate {i} (omega or out of range 0..{spec.d - 1})")
    lower = lower_bounds(spec, omega_lower)
    if starts is None:
        starts = default_starts(lik, fixed_zero, omega_lower)[:n_starts]
    runs = []
    for x0 in starts:
        r = fit_box(lik.derivatives, x0, lower, fixed_zero, tol=tol, max_iter=max_iter, value=lik.objective)
        runs.append(r)
    pool = [r for r in runs if r.converged] or runs
    best = min(pool, key=lambda r: (round(r.fun, 12), tuple(r.x)))
    return FitResult(
        theta_hat=best.x,
        F_value=best.fun,
        converged=best.converged,
        iterations=best.iterations,
        final_gradient_norm=best.pg_norm,
        spec=spec,
        fixed_zero=fixed_zero,
        n=lik.n,
        starts=[(r.fun, r.converged, r.iterations) for r in runs],
        message=best.message,
    )
