"""
Model specification, parameters, innovation laws and process simulation
for augmented double autoregressive models

    y_t = u + sum_i phi_i y_{t-i} + eta_t * sqrt(omega + sum_j alpha_j y_{t-j}^2)
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
import json
import math
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy import special, stats

from adar.errors import ExplosionError, ParameterError
from adar import kernels

__all__ = [
    "ModelSpec",
    "ParamVector",
    "InnovationLaw",
    "SeriesFrame",
    "RegionReport",
    "simulate",
    "sample_innovation",
    "law_moment",
    "moment_region_dar11",
    "make_rng",
]

EXPLOSION_BOUND = 1e150
DEFAULT_BURN_IN = 500


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator: ``key`` identifies a sub-stream of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ModelSpec:
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0:
            raise ParameterError(f"orders must be nonnegative, got p={self.p}, q={self.q}")

    @property
    def m(self) -> int:
        return max(self.p, self.q)

    @property
    def d(self) -> int:
        return self.p + self.q + 2

    @property
    def omega_index(self) -> int:
        return self.p + 1

    def alpha_index(self, j: int) -> int:
        """Position of alpha_j (1-based j) in the flat parameter vector."""
        if not 1 <= j <= self.q:
            raise ParameterError(f"alpha index {j} outside 1..{self.q}")
        return self.p + 1 + j

    def phi_index(self, i: int) -> int:
        """Position of phi_i (1-based; 0 is the intercept u)."""
        if not 0 <= i <= self.p:
            raise ParameterError(f"phi index {i} outside 0..{self.p}")
        return i

    def names(self) -> list[str]:
        return (
            ["u"]
            + [f"phi{i}" for i in range(1, self.p + 1)]
            + ["omega"]
            + [f"a{j}" for j in range(1, self.q + 1)]
        )

    def alpha_slice(self) -> slice:
        return slice(self.p + 1, self.d)

    def to_dict(self) -> Dict[str, int]:
        return {"p": self.p, "q": self.q, "m": self.m}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ModelSpec":
        return cls(p=int(d["p"]), q=int(d["q"]))


@dataclass(frozen=True)
class ParamVector:
    """theta = (u, phi_1..phi_p, omega, alpha_1..alpha_q)."""

    u: float
    phi: tuple
    omega: float
    alpha: tuple
    omega_lower: float = 1e-8

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        if not self.omega >= self.omega_lower:
            raise ParameterError(f"omega={self.omega} below floor {self.omega_lower}")
        if any(not a >= 0 for a in self.alpha):
            raise ParameterError(f"alpha coefficients must be nonnegative: {self.alpha}")
        vals = [self.u, self.omega, *self.phi, *self.alpha]
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("parameters must be finite")

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(len(self.phi), len(self.alpha))

    def to_array(self) -> np.ndarray:
        return np.array([self.u, *self.phi, self.omega, *self.alpha], dtype=float)

    @classmethod
    def from_array(cls, theta, spec: ModelSpec, omega_lower: float = 1e-8) -> "ParamVector":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (spec.d,):
            raise ParameterError(f"expected {spec.d} parameters, got shape {theta.shape}")
        p = spec.p
        return cls(
            u=float(theta[0]),
            phi=tuple(theta[1 : p + 1]),
            omega=float(theta[p + 1]),
            alpha=tuple(theta[p + 2 :]),
            omega_lower=omega_lower,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "u": self.u,
            "phi": list(self.phi),
            "omega": self.omega,
            "alpha": list(self.alpha),
            "omega_lower": self.omega_lower,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ParamVector":
        return cls(
            u=float(d["u"]),
            phi=tuple(d.get("phi", ())),
            omega=float(d["omega"]),
            alpha=tuple(d.get("alpha", ())),
            omega_lower=float(d.get("omega_lower", 1e-8)),
        )


_KINDS = ("standard-normal", "standardized-student-t", "standardized-skewed-student-t")


@dataclass(frozen=True)
class InnovationLaw:
    kind: str = "standard-normal"
    nu: Optional[float] = None
    xi: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown innovation law {self.kind!r}; choose from {_KINDS}")
        if self.kind != "standard-normal":
            if self.nu is None or not self.nu > 4:
                raise ParameterError(f"degrees of freedom must exceed 4, got nu={self.nu}")
        if self.kind == "standardized-skewed-student-t":
            if self.xi is None or not self.xi > 0:
                raise ParameterError(f"skewness xi must be positive, got xi={self.xi}")

    @classmethod
    def normal(cls) -> "InnovationLaw":
        return cls("standard-normal")

    @classmethod
    def student_t(cls, nu: float) -> "InnovationLaw":
        return cls("standardized-student-t", nu=nu)

    @classmethod
    def skewed_t(cls, nu: float, xi: float) -> "InnovationLaw":
        return cls("standardized-skewed-student-t", nu=nu, xi=xi)

    @classmethod
    def parse(cls, text: str) -> "InnovationLaw":
        """Parse ``normal``, ``t10`` / ``st10`` or ``sst10,2``."""
        s = text.strip().lower()
        if s in ("normal", "n", "gaussian", "standard-normal"):
            return cls.normal()
        if s.startswith("sst"):
            nu, xi = s[3:].split(",")
            return cls.skewed_t(float(nu), float(xi))
        if s.startswith("st"):
            return cls.student_t(float(s[2:]))
        if s.startswith("t"):
            return cls.student_t(float(s[1:]))
        raise ParameterError(f"cannot parse innovation law {text!r}")

    @property
    def label(self) -> str:
        """Short form accepted by :meth:`parse`."""
        if self.kind == "standard-normal":
            return "normal"
        if self.kind == "standardized-student-t":
            return f"st{self.nu:g}"
        return f"sst{self.nu:g},{self.xi:g}"

    def skew_constants(self) -> tuple[float, float]:
        """Location ``omega_bar`` and scale ``rho`` of the skewed-t standardization."""
        nu, xi = self.nu, self.xi
        m1 = _half_moment_t(1, nu)
        omega_bar = m1 * (xi - 1.0 / xi)
        rho = math.sqrt((xi**2 + xi**-2 - 1.0) - omega_bar**2)
        return omega_bar, rho

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "InnovationLaw":
        return cls(kind=d["kind"], nu=d.get("nu"), xi=d.get("xi"))


def _half_moment_t(r: int, nu: float) -> float:
    """E|T|^r for T standardized Student-t (unit variance); inf when r >= nu."""
    if r >= nu:
        return math.inf
    logm = (
        0.5 * r * math.log(nu - 2.0)
        + special.gammaln((r + 1) / 2.0)
        + special.gammaln((nu - r) / 2.0)
        - 0.5 * math.log(math.pi)
        - special.gammaln(nu / 2.0)
    )
    return math.exp(logm)


def law_moment(law: InnovationLaw, r: int) -> float:
    """Raw moment E eta^r; ``inf`` (or nan for odd r) when it does not exist."""
    if r == 0:
        return 1.0
    if law.kind == "standard-normal":
        return 0.0 if r % 2 else float(special.factorial2(r - 1, exact=True))
    if law.kind == "standardized-student-t":
        if r >= law.nu:
            return math.nan if r % 2 else math.inf
        return 0.0 if r % 2 else _half_moment_t(r, law.nu)
    # skewed: eta = (z - omega_bar) / rho, with E z^k = M_k (xi^{k+1} + (-1)^k xi^{-k-1}) / (xi + 1/xi)
    if r >= law.nu:
        return math.nan if r % 2 else math.inf
    xi = law.xi
    omega_bar, rho = law.skew_constants()
    total = 0.0
    for k in range(r + 1):
        if k == 0:
            ez = 1.0
        else:
            ez = _half_moment_t(k, law.nu) * (xi ** (k + 1) + (-1) ** k * xi ** (-k - 1)) / (xi + 1 / xi)
        total += math.comb(r, k) * ez * (-omega_bar) ** (r - k)
    return total / rho**r


def sample_innovation(law: InnovationLaw, count: int, seed=None, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Draw ``count`` i.i.d. zero-mean, unit-variance innovations."""
    if rng is None:
        rng = make_rng(seed if seed is not None else 0)
    if count < 0:
        raise ParameterError("count must be nonnegative")
    if law.kind == "standard-normal":
        return rng.standard_normal(count)
    nu = law.nu
    scale = math.sqrt((nu - 2.0) / nu)
    if law.kind == "standardized-student-t":
        return rng.standard_t(nu, size=count) * scale
    # two-piece inverse CDF of the Fernandez-Steel skewed standardized t
    xi = law.xi
    omega_bar, rho = law.skew_constants()
    u = rng.random(count)
    left_mass = 1.0 / (1.0 + xi**2)
    z = np.empty(count)
    left = u < left_mass
    pl = u[left] * (1.0 + xi**2) / 2.0
    z[left] = stats.t.ppf(pl, nu) * scale / xi
    pr = 0.5 + (u[~left] - left_mass) * (1.0 + xi**2) / (2.0 * xi**2)
    z[~left] = stats.t.ppf(pr, nu) * scale * xi
    return (z - omega_bar) / rho


@dataclass
class SeriesFrame:
    """Observed series ``data`` (y_1..y_n) with ``presample`` values ending at y_0."""

    data: np.ndarray
    presample: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float).ravel()
        self.presample = np.asarray(self.presample, dtype=float).ravel()
        if not (np.all(np.isfinite(self.data)) and np.all(np.isfinite(self.presample))):
            raise ParameterError("series contains non-finite values")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.presample.shape[0]

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.presample, self.data])

    def lags(self, k: int) -> np.ndarray:
        """Matrix whose row t-1 holds (y_{t-1}, ..., y_{t-k}) for t=1..n."""
        if k > self.m:
            raise ParameterError(f"need {k} presample values, frame has {self.m}")
        full = self.full
        m, n = self.m, self.n
        out = np.empty((n, k))
        for i in range(1, k + 1):
            out[:, i - 1] = full[m - i : m - i + n]
        return out

    def regressors(self, spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
        """Mean regressors (1, y_{t-1..t-p}) and volatility regressors (1, y^2_{t-1..t-q})."""
        ones = np.ones((self.n, 1))
        Y = np.hstack([ones, self.lags(spec.p)])
        X = np.hstack([ones, self.lags(spec.q) ** 2])
        return Y, X

    @classmethod
    def from_series(cls, y, m: int) -> "SeriesFrame":
        """Reserve the first ``m`` values of ``y`` as presample."""
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] <= m:
            raise ParameterError(f"series of length {y.shape[0]} too short for {m} presample values")
        return cls(data=y[m:], presample=y[:m])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesFrame):
            return NotImplemented
        return np.array_equal(self.data, other.data) and np.array_equal(self.presample, other.presample)


def simulate(
    spec: ModelSpec,
    theta: ParamVector,
    law: Optional[InnovationLaw] = None,
    n: int = 1000,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> SeriesFrame:
    """
    Simulate an ADAR(p, q) path.

    The recursion starts from zeros, runs ``burn_in`` steps that are
    discarded and returns ``spec.m`` presample values followed by ``n``
    observations. Innovations are the first ``burn_in + m + n`` draws of
    :func:`sample_innovation` with the same seed.
    """
    if theta.spec != spec:
        raise ParameterError(f"parameter vector is for {theta.spec}, not {spec}")
    if n < 1 or burn_in < 0:
        raise ParameterError("need n >= 1 and burn_in >= 0")
    law = law or InnovationLaw.normal()
    total = burn_in + spec.m + n
    eta = sample_innovation(law, total, seed=seed, rng=rng)
    y, bad = kernels.simulate_recursion(
        eta,
        theta.u,
        np.asarray(theta.phi, dtype=float),
        theta.omega,
        np.asarray(theta.alpha, dtype=float),
        EXPLOSION_BOUND,
    )
    if bad >= 0:
        raise ExplosionError(
            f"simulated value at recursion index {bad} (post burn-in index {bad - burn_in - spec.m + 1}) "
            f"exceeded {EXPLOSION_BOUND:g}; parameters look explosive",
            index=bad,
        )
    y = y[burn_in:]
    return SeriesFrame(data=y[spec.m :], presample=y[: spec.m])


@dataclass
class RegionReport:
    strict_stationary: bool
    m2: bool
    m4: bool
    m6: bool
    lyapunov: float
    lyapunov_se: float
    inconclusive: bool
    moments: Dict[int, float]


def _moment_poly(phi: float, alpha: float, law: InnovationLaw, k: int) -> float:
    """E(phi + eta sqrt(alpha))^k."""
    total = 0.0
    sa = math.sqrt(alpha)
    for j in range(k + 1):
        if alpha == 0.0 and j > 0:
            continue
        mj = law_moment(law, j)
        coef = math.comb(k, j) * phi ** (k - j) * sa**j
        if coef == 0.0:
            continue
        if not math.isfinite(mj):
            return math.inf
        total += coef * mj
    return total


def moment_region_dar11(
    phi: float,
    alpha: float,
    law: Optional[InnovationLaw] = None,
    mc_draws: int = 1_000_000,
    seed: int = 0,
) -> RegionReport:
    """
    Stationarity and moment-region membership for the DAR(1,1) model
    ``y_t = phi y_{t-1} + eta_t sqrt(omega + alpha y_{t-1}^2)``.

    The 2nd/4th/6th moment conditions are ``E(phi + eta sqrt(alpha))^k < 1``
    using exact law moments (this reproduces the closed-form Gaussian
    polynomials). Strict stationarity uses a Monte Carlo estimate of the
    Lyapunov exponent ``E log|phi + eta sqrt(alpha)|``.
    """
    if alpha < 0:
        raise ParameterError("alpha must be nonnegative")
    law = law or InnovationLaw.normal()
    if alpha == 0.0:
        lyap = math.log(abs(phi)) if phi != 0 else -math.inf
        se = 0.0
    else:
        eta = sample_innovation(law, mc_draws, seed=seed)
        vals = np.log(np.abs(phi + eta * math.sqrt(alpha)))
        lyap = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(mc_draws))
    inconclusive = bool(abs(lyap) < 2 * se)
    moments = {k: _moment_poly(phi, alpha, law, k) for k in (2, 4, 6)}
    return RegionReport(
        strict_stationary=bool(lyap < 0),
        m2=bool(moments[2] < 1),
        m4=bool(moments[4] < 1),
        m6=bool(moments[6] < 1),
        lyapunov=lyap,
        lyapunov_se=se,
        inconclusive=inconclusive,
        moments=moments,
    )


def dumps(obj) -> str:
    return json.dumps(obj.to_dict(), indent=2)
