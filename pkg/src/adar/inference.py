"""
Estimation with sandwich covariance and tests for null coefficients.

Wald, Lagrange multiplier (score), quasi-likelihood ratio and t-type
statistics. When the tested coefficients are volatility coefficients the
estimator's limit is a projection of a Gaussian vector onto a cone, so
critical values come either from closed forms (one tested coefficient, no
other boundary nuisance) or from simulating that projection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Dict, Optional, Sequence
import warnings

import numpy as np
from scipy import stats

from adar.cone import ConeSpec, project_batch
from adar.errors import FitError, MatrixError, ParameterError
from adar.fitting import FitResult, fit
from adar.likelihood import QuasiLikelihood
from adar.model import ModelSpec, make_rng

__all__ = [
    "HypothesisSpec",
    "Estimate",
    "TestReport",
    "NullSimulation",
    "estimate",
    "wald",
    "lm",
    "qlr",
    "t_test",
    "simulate_critical_values",
    "matrix_square_root",
    "local_power_curve",
    "closed_form_thresholds",
    "run_tests",
]

DEFAULT_LEVELS = (0.01, 0.05, 0.10)
DEFAULT_N = 50_000
BOUNDARY_TOL = 1e-6
QLR_TOL = 1e-8


def matrix_square_root(M, tol: float = 1e-10) -> np.ndarray:
    """Symmetric square root of a symmetric PSD matrix (negative eigenvalues clipped)."""
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > tol * scale:
        raise MatrixError("matrix is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    vals = np.clip(vals, 0.0, None)
    S = (vecs * np.sqrt(vals)) @ vecs.T
    return 0.5 * (S + S.T)


@dataclass(frozen=True)
class HypothesisSpec:
    """
    Null hypothesis that the ``test_coords`` entries of theta are zero.

    Coordinates are flat indices into ``(u, phi_1..phi_p, omega, alpha_1..alpha_q)``.
    ``nuisance_boundary`` lists volatility coordinates known to be zero
    under the null but left free in estimation (their cone component is a
    half-line in both the unrestricted and restricted cones).
    """

    spec: ModelSpec
    test_coords: tuple
    nuisance_boundary: tuple = ()

    def __post_init__(self) -> None:
        tc = tuple(sorted(set(int(i) for i in self.test_coords)))
        nb = tuple(sorted(set(int(i) for i in self.nuisance_boundary)))
        object.__setattr__(self, "test_coords", tc)
        object.__setattr__(self, "nuisance_boundary", nb)
        d = self.spec.d
        valid = f"valid indices: u, phi1..phi{self.spec.p}, a1..a{self.spec.q}"
        if not tc:
            raise ParameterError("hypothesis needs at least one tested coefficient")
        for i in tc + nb:
            if not 0 <= i < d or i == self.spec.omega_index:
                raise ParameterError(f"coefficient index {i} out of range ({valid})")
        if set(tc) & set(nb):
            raise ParameterError("tested and nuisance-boundary coefficients must be disjoint")
        kinds = {self._is_alpha(i) for i in tc}
        if len(kinds) > 1:
            raise ParameterError("test mean and volatility coefficients in separate steps")
        if not all(self._is_alpha(i) for i in nb):
            raise ParameterError("nuisance boundary coefficients must be volatility coefficients")

    def _is_alpha(self, i: int) -> bool:
        return i > self.spec.omega_index

    @property
    def on_mean(self) -> bool:
        return not self._is_alpha(self.test_coords[0])

    @property
    def d3(self) -> int:
        return len(self.test_coords)

    @property
    def d2(self) -> int:
        return len(self.nuisance_boundary)

    @classmethod
    def alpha(cls, spec: ModelSpec, js: Sequence[int], nuisance: Sequence[int] = ()) -> "HypothesisSpec":
        return cls(spec, tuple(spec.alpha_index(j) for j in js), tuple(spec.alpha_index(j) for j in nuisance))

    @classmethod
    def parse(cls, spec: ModelSpec, text: str, nuisance: str = "") -> "HypothesisSpec":
        """Parse ``"a4,a5"`` or ``"u,phi2"`` (1-based lag numbers)."""
        return cls(spec, _parse_coords(spec, text), _parse_coords(spec, nuisance) if nuisance else ())

    def describe(self) -> str:
        names = self.spec.names()
        return ",".join(names[i] for i in self.test_coords)


def _parse_coords(spec: ModelSpec, text: str) -> tuple:
    out = []
    valid = f"valid: u, phi1..phi{spec.p}, a1..a{spec.q}"
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        try:
            if tok == "u":
                out.append(0)
            elif tok.startswith("phi"):
                out.append(spec.phi_index(int(tok[3:])))
                if int(tok[3:]) < 1:
                    raise ParameterError(tok)
            elif tok.startswith("alpha"):
                out.append(spec.alpha_index(int(tok[5:])))
            elif tok.startswith("a"):
                out.append(spec.alpha_index(int(tok[1:])))
            else:
                raise ParameterError(tok)
        except (ValueError, ParameterError):
            raise ParameterError(f"bad coefficient {tok!r} ({valid})") from None
    return tuple(out)


@dataclass
class Estimate:
    """
    Fitted model with sandwich covariance over the free coordinates.

    ``cov`` is the asymptotic covariance of ``sqrt(n)(theta_hat - theta_0)``
    restricted to ``free``; standard errors divide by ``sqrt(n)``.
    """

    fit: FitResult
    lik: QuasiLikelihood
    free: np.ndarray
    J: np.ndarray
    Sigma: np.ndarray
    D: np.ndarray
    score: np.ndarray
    cov: np.ndarray
    Jinv: np.ndarray
    warnings: list = field(default_factory=list)
    j_form: str = "gamma"

    @property
    def theta(self) -> np.ndarray:
        return self.fit.theta_hat

    @property
    def n(self) -> int:
        return self.lik.n

    @property
    def spec(self) -> ModelSpec:
        return self.lik.spec

    def pos(self, coords) -> list[int]:
        idx = list(self.free)
        try:
            return [idx.index(int(c)) for c in coords]
        except ValueError:
            raise ParameterError(f"coefficients {coords} are not free in this fit") from None

    @property
    def se(self) -> np.ndarray:
        out = np.full(self.spec.d, np.nan)
        out[self.free] = np.sqrt(np.clip(np.diag(self.cov), 0, None) / self.n)
        return out

    @property
    def t_ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = self.theta / self.se
        return t

    def boundary_coords(self, tol: float = BOUNDARY_TOL) -> list[int]:
        a0 = self.spec.omega_index + 1
        return [int(i) for i in self.free if i >= a0 and self.theta[i] <= tol]

    def to_dict(self) -> dict:
        names = self.spec.names()
        coef = []
        for i, nm in enumerate(names):
            coef.append(
                {
                    "name": nm,
                    "estimate": float(self.theta[i]),
                    "se": None if i not in self.free else float(self.se[i]),
                    "t": None if i not in self.free else float(self.t_ratios[i]),
                    "pinned": i not in self.free,
                }
            )
        return {
            "p": self.spec.p,
            "q": self.spec.q,
            "n": self.n,
            "coefficients": coef,
            "F_value": self.fit.F_value,
            "converged": self.fit.converged,
            "iterations": self.fit.iterations,
            "final_gradient_norm": self.fit.final_gradient_norm,
            "warnings": list(self.warnings),
        }


def _inverse(M: np.ndarray, what: str, cond_limit: float = 1e12) -> np.ndarray:
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > cond_limit:
        raise MatrixError(f"{what} is singular or ill-conditioned (condition number {cond:.3g})")
    return np.linalg.inv(M)


J_FORMS = ("hessian", "gamma")


def _j_matrix(lik: QuasiLikelihood, theta, j_form: str):
    """Objective, score, sandwich meat, D and the chosen J (full coordinates)."""
    if j_form not in J_FORMS:
        raise ParameterError(f"j_form must be one of {J_FORMS}, got {j_form!r}")
    _, g, H = lik.derivatives(theta)
    Sigma, D, G = lik.sandwich_parts(theta)
    return g, Sigma, D, (H if j_form == "hessian" else G)


def _build_estimate(lik: QuasiLikelihood, fr: FitResult, free: np.ndarray, j_form: str = "gamma") -> Estimate:
    theta = fr.theta_hat
    g, Sigma, D, Jfull = _j_matrix(lik, theta, j_form)
    ix = np.ix_(free, free)
    J = Jfull[ix]
    Jinv = _inverse(J, f"J_n ({j_form} form)")
    S = Sigma[ix]
    cov = Jinv @ S @ Jinv
    cov = 0.5 * (cov + cov.T)
    est = Estimate(fit=fr, lik=lik, free=free, J=J, Sigma=S, D=D, score=g[free], cov=cov, Jinv=Jinv,
                   j_form=j_form)
    if not fr.converged:
        est.warnings.append(f"optimizer did not converge: {fr.message}")
    names = lik.spec.names()
    for i in est.boundary_coords():
        est.warnings.append(
            f"{names[i]} is on the boundary (estimate {theta[i]:.3g}); its normal-theory standard error is not valid"
        )
    return est


def estimate(
    lik: QuasiLikelihood,
    fixed_zero: Sequence[int] = (),
    n_starts: int = 5,
    fit_result: Optional[FitResult] = None,
    j_form: str = "gamma",
) -> Estimate:
    """
    Unrestricted (apart from ``fixed_zero``) fit with sandwich covariance.

    ``j_form`` selects the curvature matrix used in the sandwich, the tests
    and the cone metric: ``"gamma"`` (default) is the plug-in
    ``n^-1 sum w_t Gamma_t Gamma_t'`` of the population matrix
    ``E(w_t Gamma_t Gamma_t')``; ``"hessian"`` is the second derivative of
    the objective at the estimate. Both are consistent; the plug-in form
    gives better-sized Wald tests at moderate n.
    """
    spec = lik.spec
    if lik.n <= spec.d:
        raise ParameterError(f"need n > d ({lik.n} <= {spec.d})")
    fr = fit_result or fit(lik, fixed_zero=fixed_zero, n_starts=n_starts)
    free = np.array([i for i in range(spec.d) if i not in fr.fixed_zero], dtype=int)
    return _build_estimate(lik, fr, free, j_form)


@dataclass
class TestReport:
    statistic: float
    kind: str
    pvalue: Optional[float]
    critical_values: Dict[float, float]
    method: str
    null_sample: Optional[np.ndarray] = None
    seed: Optional[int] = None
    hypothesis: str = ""
    df: Optional[int] = None
    scale: Optional[float] = None
    warnings: list = field(default_factory=list)

    def reject(self, level: float) -> bool:
        stat = self.statistic * (self.scale if self.scale is not None else 1.0)
        return bool(stat > self.critical_values[level])

    def to_dict(self, include_sample: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "statistic": self.statistic,
            "pvalue": self.pvalue,
            "critical_values": {str(k): v for k, v in self.critical_values.items()},
            "method": self.method,
            "seed": self.seed,
            "hypothesis": self.hypothesis,
            "df": self.df,
            "scale": self.scale,
            "warnings": list(self.warnings),
            "null_sample_size": None if self.null_sample is None else int(len(self.null_sample)),
        }
        if include_sample and self.null_sample is not None:
            out["null_sample"] = self.null_sample.tolist()
        return out


def _check_hyp(est: Estimate, hyp: HypothesisSpec) -> None:
    if hyp.spec != est.spec:
        raise ParameterError("hypothesis and fit refer to different models")


def wald_statistic(est: Estimate, hyp: HypothesisSpec) -> float:
    _check_hyp(est, hyp)
    k = est.pos(hyp.test_coords)
    th3 = est.theta[list(hyp.test_coords)]
    V33 = est.cov[np.ix_(k, k)]
    return float(est.n * th3 @ np.linalg.solve(V33, th3))


def t_statistic(est: Estimate, coord: int) -> float:
    k = est.pos([coord])[0]
    return float(math.sqrt(est.n) * est.theta[coord] / math.sqrt(est.cov[k, k]))


def lm_statistic(est_r: Estimate, hyp: HypothesisSpec, free: np.ndarray) -> tuple[float, list]:
    """Score statistic at the restricted fit; matrices taken over ``free``."""
    lik, theta = est_r.lik, est_r.theta
    g, Sigma, _, Jfull = _j_matrix(lik, theta, est_r.j_form)
    ix = np.ix_(free, free)
    J = Jfull[ix]
    warn = []
    cond = np.linalg.cond(J)
    if cond > 1e10:
        warn.append(f"restricted J condition number {cond:.3g} exceeds 1e10")
    idx = list(free)
    k = [idx.index(c) for c in hyp.test_coords]
    gJ = np.linalg.solve(J, g[free])
    JiS = np.linalg.solve(J, Sigma[ix])
    V = np.linalg.solve(J, JiS.T).T  # J^-1 S J^-1
    V = 0.5 * (V + V.T)
    a = gJ[k]
    stat = float(est_r.n * a @ np.linalg.solve(V[np.ix_(k, k)], a))
    return stat, warn


def qlr_statistic(est: Estimate, est_r: Estimate) -> float:
    q = 2.0 * est.n * (est_r.fit.F_value - est.fit.F_value)
    if q < -QLR_TOL:
        raise FitError(
            f"restricted objective below unrestricted by {q / (2 * est.n):.3g}; one of the fits failed"
        )
    return max(q, 0.0)


def closed_form_thresholds(kind: str, levels=DEFAULT_LEVELS) -> Dict[float, float]:
    """Critical values for one tested coefficient with no boundary nuisance."""
    out = {}
    for b in levels:
        if kind == "t":
            out[b] = float(stats.norm.ppf(1 - b))
        elif kind in ("wald", "qlr"):
            out[b] = float(stats.chi2.ppf(1 - 2 * b, 1))
        elif kind == "lm":
            out[b] = float(stats.chi2.ppf(1 - b, 1))
        else:
            raise ParameterError(f"unknown test kind {kind!r}")
    return out


def _half_chi2_pvalue(x: float) -> float:
    return 0.5 * float(stats.chi2.sf(x, 1)) if x > 0 else 1.0


def local_power_curve(kind: str, h_star: float, beta: float = 0.05) -> float:
    """Asymptotic local power at drift ``h_star`` (one tested coefficient, no boundary nuisance)."""
    if not 0 < beta < 0.5:
        raise ParameterError("beta must lie in (0, 1/2)")
    if kind in ("t", "wald", "qlr"):
        c1 = stats.norm.ppf(1 - beta)
        return float(stats.norm.sf(c1 - h_star))
    if kind == "lm":
        c2 = stats.norm.ppf(1 - beta / 2)
        return float(stats.norm.sf(c2 - h_star) + stats.norm.cdf(-c2 - h_star))
    raise ParameterError(f"unknown test kind {kind!r}")


@dataclass
class NullSimulation:
    w_star: np.ndarray
    q_star: np.ndarray
    t_star: Optional[np.ndarray]
    w_thresholds: Dict[float, float]
    q_thresholds: Dict[float, float]
    t_thresholds: Optional[Dict[float, float]]
    Omega: np.ndarray
    Xi: np.ndarray
    xi: Optional[float]
    N: int
    seed: int
    warnings: list = field(default_factory=list)


def _selector(k: Sequence[int], d: int) -> np.ndarray:
    K = np.zeros((len(k), d))
    K[np.arange(len(k)), list(k)] = 1.0
    return K


def omega_xi(est: Estimate, hyp: HypothesisSpec) -> tuple[np.ndarray, np.ndarray]:
    """Weight matrices of the Wald and QLR limits (sandwich and J based)."""
    d = len(est.free)
    k3 = est.pos(hyp.test_coords)
    kb = sorted(est.pos(hyp.nuisance_boundary) + k3)
    Ka = _selector(k3, d)
    K = _selector(kb, d)
    Omega = Ka.T @ np.linalg.inv(Ka @ est.cov @ Ka.T) @ Ka
    Xi = K.T @ np.linalg.inv(K @ est.Jinv @ K.T) @ K
    return Omega, Xi


def _cones(est: Estimate, hyp: HypothesisSpec) -> tuple[ConeSpec, ConeSpec]:
    d = len(est.free)
    k3 = est.pos(hyp.test_coords)
    k2 = est.pos(hyp.nuisance_boundary)
    if hyp.on_mean:
        # mean block is asymptotically normal: no half-lines
        return ConeSpec.from_indices(d), ConeSpec.from_indices(d, zeros=k3)
    return ConeSpec.from_indices(d, halflines=k2 + k3), ConeSpec.from_indices(d, halflines=k2, zeros=k3)


def _percentiles(sample: np.ndarray, levels) -> Dict[float, float]:
    return {b: float(np.percentile(sample, 100 * (1 - b))) for b in levels}


def simulate_critical_values(
    est: Estimate,
    hyp: HypothesisSpec,
    N: int = DEFAULT_N,
    levels=DEFAULT_LEVELS,
    seed: int = 0,
) -> NullSimulation:
    """
    Simulated null distributions of the Wald and QLR statistics.

    Draws ``Z = [J^-1 S J^-1]^{1/2} e`` with ``e ~ N(0, I)``, projects onto
    the unrestricted and restricted cones in the J-metric and evaluates
    ``w = lam' Omega lam`` and ``q = lam' Xi lam - lam3' Xi lam3``.
    """
    _check_hyp(est, hyp)
    warn = []
    if N < 1000:
        warn.append(f"N={N} simulated draws is small; use at least 1000")
    vals = np.linalg.eigvalsh(est.cov)
    if vals.min() < -1e-10 * max(1.0, abs(vals.max())):
        raise MatrixError(f"sandwich covariance is not positive semidefinite (min eigenvalue {vals.min():.3g})")
    S = matrix_square_root(est.cov)
    d = len(est.free)
    rng = make_rng(seed)
    E = rng.standard_normal((N, d))
    Z = E @ S
    cone, cone3 = _cones(est, hyp)
    lam = project_batch(Z, est.J, cone)
    lam3 = project_batch(Z, est.J, cone3)
    Omega, Xi = omega_xi(est, hyp)
    w_star = np.einsum("ij,jk,ik->i", lam, Omega, lam)
    q_star = np.einsum("ij,jk,ik->i", lam, Xi, lam) - np.einsum("ij,jk,ik->i", lam3, Xi, lam3)
    t_star = None
    t_thr = None
    xi = None
    if hyp.d3 == 1:
        k = est.pos(hyp.test_coords)[0]
        t_star = lam[:, k] / math.sqrt(est.cov[k, k])
        t_thr = _percentiles(t_star, levels)
        xi = float(Omega[k, k] / Xi[k, k])
    return NullSimulation(
        w_star=w_star,
        q_star=q_star,
        t_star=t_star,
        w_thresholds=_percentiles(w_star, levels),
        q_thresholds=_percentiles(q_star, levels),
        t_thresholds=t_thr,
        Omega=Omega,
        Xi=Xi,
        xi=xi,
        N=N,
        seed=seed,
        warnings=warn,
    )


def mc_pvalue(stat: float, sample: np.ndarray) -> float:
    return float((1 + np.sum(sample >= stat)) / (len(sample) + 1))


def xi_hat(est: Estimate, hyp: HypothesisSpec) -> float:
    """Ratio of the Wald and QLR weights for one tested coefficient."""
    if hyp.d3 != 1:
        raise ParameterError("xi is defined for a single tested coefficient")
    Omega, Xi = omega_xi(est, hyp)
    k = est.pos(hyp.test_coords)[0]
    return float(Omega[k, k] / Xi[k, k])


def restricted_estimate(est: Estimate, hyp: HypothesisSpec, n_starts: int = 5) -> Estimate:
    fixed = tuple(sorted(set(est.fit.fixed_zero) | set(hyp.test_coords)))
    fr = fit(est.lik, fixed_zero=fixed, n_starts=n_starts)
    free = np.array([i for i in range(est.spec.d) if i not in fixed], dtype=int)
    try:
        return _build_estimate(est.lik, fr, free, est.j_form)
    except MatrixError:
        # sandwich of the restricted fit is only used through the full-coordinate matrices
        return Estimate(fit=fr, lik=est.lik, free=free, J=np.empty((0, 0)), Sigma=np.empty((0, 0)),
                        D=np.empty((0, 0)), score=np.empty(0), cov=np.empty((0, 0)), Jinv=np.empty((0, 0)),
                        j_form=est.j_form)


def wald(est: Estimate, hyp: HypothesisSpec, method: str = "auto", N: int = DEFAULT_N,
         levels=DEFAULT_LEVELS, seed: int = 0, null: Optional[NullSimulation] = None) -> TestReport:
    return run_tests(est, hyp, method=method, N=N, levels=levels, seed=seed, null=null, kinds=("wald",))["wald"]


def t_test(est: Estimate, coord: int, method: str = "auto", N: int = DEFAULT_N,
           levels=DEFAULT_LEVELS, seed: int = 0) -> TestReport:
    hyp = HypothesisSpec(est.spec, (coord,))
    return run_tests(est, hyp, method=method, N=N, levels=levels, seed=seed, kinds=("t",))["t"]


def lm(est: Estimate, hyp: HypothesisSpec, levels=DEFAULT_LEVELS, est_r: Optional[Estimate] = None) -> TestReport:
    return run_tests(est, hyp, levels=levels, est_r=est_r, kinds=("lm",))["lm"]


def qlr(est: Estimate, hyp: HypothesisSpec, method: str = "auto", N: int = DEFAULT_N,
        levels=DEFAULT_LEVELS, seed: int = 0, est_r: Optional[Estimate] = None) -> TestReport:
    return run_tests(est, hyp, method=method, N=N, levels=levels, seed=seed, est_r=est_r, kinds=("qlr",))["qlr"]


def resolve_method(hyp: HypothesisSpec, method: str) -> str:
    if method not in ("auto", "alg1", "closedform"):
        raise ParameterError(f"unknown method {method!r}")
    if hyp.on_mean:
        return "chi-square" if method != "alg1" else "alg1"
    closed_ok = hyp.d3 == 1 and hyp.d2 == 0
    if method == "closedform":
        if not closed_ok:
            raise ParameterError("closed-form critical regions need one tested coefficient and no boundary nuisance")
        return "closed-form"
    if method == "auto":
        return "closed-form" if closed_ok else "alg1"
    return "alg1"


def run_tests(
    est: Estimate,
    hyp: HypothesisSpec,
    method: str = "auto",
    N: int = DEFAULT_N,
    levels=DEFAULT_LEVELS,
    seed: int = 0,
    est_r: Optional[Estimate] = None,
    null: Optional[NullSimulation] = None,
    kinds=("t", "wald", "lm", "qlr"),
    n_starts: int = 5,
) -> Dict[str, TestReport]:
    """
    Compute the requested statistics with p-values and critical values.

    Volatility hypotheses with one coefficient and no boundary nuisance use
    the closed-form regions; otherwise the Wald and QLR statistics use the
    simulated null. The LM statistic is always referred to chi-square.
    Mean-coefficient hypotheses use chi-square for Wald and LM; the QLR null
    is simulated through the unconstrained cone, which reduces to chi-square
    when the sandwich equals J.
    """
    _check_hyp(est, hyp)
    levels = tuple(levels)
    resolved = resolve_method(hyp, method)
    kinds = tuple(k for k in kinds if k != "t" or hyp.d3 == 1)
    desc = hyp.describe()
    out: Dict[str, TestReport] = {}
    need_r = any(k in kinds for k in ("lm", "qlr"))
    if need_r and est_r is None:
        est_r = restricted_estimate(est, hyp, n_starts=n_starts)
    need_sim = resolved == "alg1" or (hyp.on_mean and "qlr" in kinds)
    if need_sim and null is None:
        null = simulate_critical_values(est, hyp, N=N, levels=levels, seed=seed)

    if "t" in kinds:
        t = t_statistic(est, hyp.test_coords[0])
        if resolved == "closed-form":
            out["t"] = TestReport(t, "t", float(stats.norm.sf(t)) if t > 0 else 1.0,
                                  closed_form_thresholds("t", levels), "closed-form", hypothesis=desc)
        elif resolved == "chi-square":
            out["t"] = TestReport(t, "t", float(2 * stats.norm.sf(abs(t))),
                                  {b: float(stats.norm.ppf(1 - b / 2)) for b in levels}, "chi-square",
                                  hypothesis=desc)
        else:
            out["t"] = TestReport(t, "t", mc_pvalue(t, null.t_star), null.t_thresholds, "simulated",
                                  null_sample=null.t_star, seed=seed, hypothesis=desc, warnings=list(null.warnings))
    if "wald" in kinds:
        w = wald_statistic(est, hyp)
        if resolved == "closed-form":
            out["wald"] = TestReport(w, "wald", _half_chi2_pvalue(w), closed_form_thresholds("wald", levels),
                                     "closed-form", hypothesis=desc, df=1)
        elif resolved == "chi-square":
            out["wald"] = TestReport(w, "wald", float(stats.chi2.sf(w, hyp.d3)),
                                     {b: float(stats.chi2.ppf(1 - b, hyp.d3)) for b in levels}, "chi-square",
                                     hypothesis=desc, df=hyp.d3)
        else:
            out["wald"] = TestReport(w, "wald", mc_pvalue(w, null.w_star), null.w_thresholds, "simulated",
                                     null_sample=null.w_star, seed=seed, hypothesis=desc,
                                     warnings=list(null.warnings))
    if "lm" in kinds:
        free = est.free
        L, warn = lm_statistic(est_r, hyp, free)
        out["lm"] = TestReport(L, "lm", float(stats.chi2.sf(L, hyp.d3)),
                               {b: float(stats.chi2.ppf(1 - b, hyp.d3)) for b in levels}, "chi-square",
                               hypothesis=desc, df=hyp.d3, warnings=warn)
    if "qlr" in kinds:
        Q = qlr_statistic(est, est_r)
        if resolved == "closed-form":
            xi = xi_hat(est, hyp)
            out["qlr"] = TestReport(Q, "qlr", _half_chi2_pvalue(xi * Q), closed_form_thresholds("qlr", levels),
                                    "closed-form", hypothesis=desc, df=1, scale=xi)
        else:
            out["qlr"] = TestReport(Q, "qlr", mc_pvalue(Q, null.q_star), null.q_thresholds, "simulated",
                                    null_sample=null.q_star, seed=seed, hypothesis=desc,
                                    warnings=list(null.warnings))
    return out
