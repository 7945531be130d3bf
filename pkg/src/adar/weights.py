"""
Self-weight functions.

Every weight ``w_t`` depends only on the lags ``y_{t-1}, ..., y_{t-m}`` and
lies in (0, 1]. Down-weighting observations that follow large values
removes the moment conditions the unweighted quasi-likelihood needs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from adar.errors import ConfigurationError, ParameterError
from adar.model import SeriesFrame

__all__ = ["WeightScheme", "compute_weights"]

_ALIASES = {
    "unit": "unit",
    "none": "unit",
    "hv": "inverse-sixth-power",
    "inverse-sixth-power": "inverse-sixth-power",
    "ling": "truncation",
    "truncation": "truncation",
}


@dataclass(frozen=True)
class WeightScheme:
    """
    Parameters
    ----------
    kind : {"unit", "inverse-sixth-power", "truncation"}
        ``inverse-sixth-power`` is ``1 / (1 + sum y_{t-i}^6)``; ``truncation``
        is ``(C_w / a_t)^3`` with ``a_t = sum y_{t-i}^2 1(y_{t-i}^2 >= C_w)``.
    m : int, optional
        Window length; defaults to ``max(p, q)`` of the model being fitted.
    c_w : float, optional
        Truncation constant. When omitted it is the ``percentile`` quantile
        of ``y_t^2`` over the estimation sample.
    percentile : float
        Quantile level (in percent) used when ``c_w`` is not given.
    """

    kind: str = "inverse-sixth-power"
    m: Optional[int] = None
    c_w: Optional[float] = None
    percentile: float = 95.0

    def __post_init__(self) -> None:
        kind = _ALIASES.get(self.kind)
        if kind is None:
            raise ParameterError(f"unknown weight scheme {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.m is not None and self.m < 1 and kind != "unit":
            raise ParameterError("weight window m must be >= 1")
        if not 0 < self.percentile < 100:
            raise ParameterError("percentile must lie in (0, 100)")

    @classmethod
    def unit(cls) -> "WeightScheme":
        return cls("unit")

    def with_window(self, m: int) -> "WeightScheme":
        if self.m is not None:
            return self
        return WeightScheme(self.kind, m, self.c_w, self.percentile)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "c_w": self.c_w, "percentile": self.percentile}


def compute_weights(scheme: WeightScheme, frame: SeriesFrame, m: Optional[int] = None) -> np.ndarray:
    """Weights ``w_1..w_n`` for ``frame`` under ``scheme``."""
    n = frame.n
    if scheme.kind == "unit":
        return np.ones(n)
    m = scheme.m if scheme.m is not None else m
    if m is None:
        m = frame.m
    if m < 1:
        return np.ones(n)
    lags = frame.lags(m)
    if scheme.kind == "inverse-sixth-power":
        return 1.0 / (1.0 + np.sum(lags**6, axis=1))
    sq = lags**2
    c_w = scheme.c_w
    if c_w is None:
        c_w = float(np.percentile(frame.data**2, scheme.percentile))
    if not c_w > 0:
        raise ConfigurationError(
            f"truncation constant C_w={c_w} is not positive (series is degenerate at the "
            f"{scheme.percentile}% level)"
        )
    a = np.sum(np.where(sq >= c_w, sq, 0.0), axis=1)
    w = np.ones(n)
    big = a > 0
    w[big] = (c_w / a[big]) ** 3
    return w
