"""
Size and local-power experiments for the boundary tests.

Three designs with a drift ``k = h / sqrt(n)`` on the volatility
coefficients under test (``phi1 = 0.5``, ``phi2 = -0.3``, ``omega = 1``):

1. ``y_t = phi1 y_{t-1} + eta_t sqrt(omega + a y_{t-1}^2 + k y_{t-2}^2)``;
   one boundary coefficient, closed-form critical regions.
2. two lags in the mean, ``k`` on both ``y_{t-2}^2`` and ``y_{t-3}^2``;
   two boundary coefficients, simulated critical values.
3. two lags in the mean, ``sqrt(omega + a y_{t-2}^2 + k y_{t-3}^2)``;
   the first ARCH coefficient is a known boundary nuisance.

Each replication draws from its own counter-based stream so any subset of
replications can be rerun in isolation, whatever the number of workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import csv
import math
import os
import time
from typing import Dict, Optional, Sequence
import warnings

import numpy as np

from adar.errors import ADARError, ParameterError
from adar.inference import HypothesisSpec, estimate, local_power_curve, run_tests
from adar.likelihood import QuasiLikelihood
from adar.model import InnovationLaw, ModelSpec, ParamVector, make_rng, simulate
from adar.weights import WeightScheme, compute_weights

__all__ = [
    "ExperimentPlan",
    "ExperimentResult",
    "dgp_setup",
    "run_replication",
    "run_experiment",
    "size_adjust",
    "THREADS_ENV",
]

THREADS_ENV = "ADAR_WORKERS"
CASES = {"I": 0.1, "II": 0.6}
PHI1, PHI2, OMEGA = 0.5, -0.3, 1.0


@dataclass(frozen=True)
class ExperimentPlan:
    dgp: int = 1
    alpha_case: str = "I"
    law: InnovationLaw = field(default_factory=InnovationLaw.normal)
    n: int = 1000
    reps: int = 500
    h_grid: tuple = (0,)
    weight: WeightScheme = field(default_factory=lambda: WeightScheme("hv"))
    levels: tuple = (0.01, 0.05, 0.10)
    seed: int = 0
    N_alg1: int = 10_000
    burn_in: int = 500
    j_form: str = "gamma"

    def __post_init__(self) -> None:
        if self.dgp not in (1, 2, 3):
            raise ParameterError(f"dgp must be 1, 2 or 3, got {self.dgp}")
        if self.alpha_case not in CASES:
            raise ParameterError(f"alpha_case must be 'I' or 'II', got {self.alpha_case!r}")
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if any(h < 0 for h in self.h_grid):
            raise ParameterError("h values must be nonnegative")
        object.__setattr__(self, "h_grid", tuple(self.h_grid))
        object.__setattr__(self, "levels", tuple(float(b) for b in self.levels))

    @property
    def alpha(self) -> float:
        return CASES[self.alpha_case]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["law"] = self.law.to_dict()
        out["weight"] = self.weight.to_dict()
        return out


def dgp_setup(dgp: int, alpha: float, k: float):
    """True model, true parameters, fitted model, hypothesis and self-weight window."""
    if dgp == 1:
        spec = ModelSpec(1, 2)
        theta = ParamVector(0.0, [PHI1], OMEGA, [alpha, k])
        return spec, theta, HypothesisSpec.alpha(spec, [2]), 2
    spec = ModelSpec(2, 3)
    if dgp == 2:
        theta = ParamVector(0.0, [PHI1, PHI2], OMEGA, [alpha, k, k])
        return spec, theta, HypothesisSpec.alpha(spec, [2, 3]), 3
    if dgp == 3:
        theta = ParamVector(0.0, [PHI1, PHI2], OMEGA, [0.0, alpha, k])
        return spec, theta, HypothesisSpec.alpha(spec, [3], nuisance=[1]), 3
    raise ParameterError(f"unknown dgp {dgp}")


def _alg1_seed(seed: int, rep: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(rep, 1))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def run_replication(plan: ExperimentPlan, h: float, rep: int) -> dict:
    """One replication at drift ``h``; returns statistics or the failure reason."""
    k = h / math.sqrt(plan.n)
    spec, theta, hyp, m = dgp_setup(plan.dgp, plan.alpha, k)
    out = {"rep": rep, "h": h, "ok": False}
    try:
        frame = simulate(spec, theta, plan.law, n=plan.n, burn_in=plan.burn_in, rng=make_rng(plan.seed, rep, 0))
        w = compute_weights(plan.weight.with_window(m), frame)
        lik = QuasiLikelihood(frame, spec, w)
        est = estimate(lik, j_form=plan.j_form)
        reports = run_tests(est, hyp, N=plan.N_alg1, levels=plan.levels, seed=_alg1_seed(plan.seed, rep))
    except (ADARError, np.linalg.LinAlgError, FloatingPointError) as exc:
        out["error"] = type(exc).__name__
        return out
    out["ok"] = True
    coord = hyp.test_coords[-1]
    kk = est.pos([coord])[0]
    out["sigma_d"] = float(math.sqrt(est.cov[kk, kk]))
    for name, r in reports.items():
        # statistic on which the level-b decision is a threshold crossing;
        # simulated tests are ranked by their p-value
        if r.method == "simulated":
            adj = 1.0 - r.pvalue
        else:
            adj = r.statistic * (r.scale or 1.0)
        out[name] = {
            "statistic": r.statistic,
            "pvalue": r.pvalue,
            "adj_stat": adj,
            "reject": {b: r.reject(b) for b in plan.levels},
            "method": r.method,
        }
    return out


def size_adjust(null_stats, alt_stats, level: float) -> float:
    """Fraction of ``alt_stats`` above the empirical (1 - level) quantile of ``null_stats``."""
    null_stats = np.asarray(null_stats, dtype=float)
    alt_stats = np.asarray(alt_stats, dtype=float)
    if null_stats.size * level < 5:
        warnings.warn(
            f"only {null_stats.size} null replications for level {level}; empirical critical value is unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    crit = float(np.percentile(null_stats, 100 * (1 - level)))
    return float(np.mean(alt_stats > crit))


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    records: list
    runtime: float
    rejection_rates: Dict[tuple, dict] = field(default_factory=dict)
    size_adjusted_power: Optional[Dict[tuple, float]] = None
    failures: Dict[float, dict] = field(default_factory=dict)

    @property
    def tests(self) -> list[str]:
        names = []
        for r in self.records:
            if r["ok"]:
                names = [k for k in ("t", "wald", "lm", "qlr") if k in r]
                break
        return names

    def rate(self, test: str, level: float, h: float = 0) -> float:
        return self.rejection_rates[(test, level, h)]["rate"]

    def ok_records(self, h) -> list:
        return [r for r in self.records if r["h"] == h and r["ok"]]

    def tidy_rows(self) -> list[dict]:
        p = self.plan
        rows = []
        for (test, level, h), v in sorted(self.rejection_rates.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1])):
            rows.append(
                {
                    "dgp": p.dgp,
                    "case": p.alpha_case,
                    "law": p.law.label,
                    "n": p.n,
                    "weight": p.weight.kind,
                    "h": h,
                    "test": test,
                    "level": level,
                    "rate": v["rate"],
                    "se": v["se"],
                    "successes": v["successes"],
                    "failures": self.failures[h]["count"],
                }
            )
        return rows

    def power_rows(self) -> list[dict]:
        rows = []
        sig = [r["sigma_d"] for r in self.ok_records(0)] if 0 in self.plan.h_grid else []
        sigma = float(np.median(sig)) if sig else float("nan")
        for (test, level, h), v in sorted(self.rejection_rates.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
            row = {"test": test, "level": level, "h": h, "power": v["rate"], "se": v["se"]}
            if self.size_adjusted_power is not None:
                row["size_adjusted_power"] = self.size_adjusted_power.get((test, level, h))
            if self.plan.dgp == 1 and np.isfinite(sigma):
                kind = "lm" if test == "lm" else "t"
                row["theory"] = local_power_curve(kind, h / sigma, level)
            rows.append(row)
        return rows

    def write_csv(self, path: str, power_path: Optional[str] = None) -> None:
        _write_rows(path, self.tidy_rows())
        if power_path:
            _write_rows(power_path, self.power_rows())

    def summary(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "runtime_seconds": self.runtime,
            "failures": {str(h): v for h, v in self.failures.items()},
            "rates": self.tidy_rows(),
        }


def _write_rows(path: str, rows: list[dict]) -> None:
    if not rows:
        return
    keys = list(rows[0].keys())
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=keys)
        wr.writeheader()
        wr.writerows(rows)


def _run_chunk(args) -> list:
    plan, jobs = args
    return [run_replication(plan, h, rep) for h, rep in jobs]


def _workers(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, workers)


def run_experiment(plan: ExperimentPlan, workers: Optional[int] = None, progress=None) -> ExperimentResult:
    """
    Run every (h, replication) pair of the plan and aggregate rejection rates.

    Replications whose simulation or fit fails are counted per failure type
    and excluded from the rates; they are never redrawn.
    """
    t0 = time.perf_counter()
    jobs = [(h, rep) for h in plan.h_grid for rep in range(plan.reps)]
    workers = _workers(workers)
    if workers == 1:
        records = []
        for i, (h, rep) in enumerate(jobs):
            records.append(run_replication(plan, h, rep))
            if progress is not None:
                progress(i + 1, len(jobs))
    else:
        chunks = [jobs[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, [(plan, c) for c in chunks]))
        records = sorted((r for part in parts for r in part), key=lambda r: (plan.h_grid.index(r["h"]), r["rep"]))
    result = ExperimentResult(plan=plan, records=records, runtime=time.perf_counter() - t0)
    _aggregate(result)
    return result


def _aggregate(res: ExperimentResult) -> None:
    plan = res.plan
    tests = res.tests
    for h in plan.h_grid:
        recs = [r for r in res.records if r["h"] == h]
        bad = [r for r in recs if not r["ok"]]
        reasons: Dict[str, int] = {}
        for r in bad:
            reasons[r["error"]] = reasons.get(r["error"], 0) + 1
        res.failures[h] = {"count": len(bad), "successes": len(recs) - len(bad), "reasons": reasons}
        ok = [r for r in recs if r["ok"]]
        for test in tests:
            for b in plan.levels:
                hits = sum(1 for r in ok if r[test]["reject"][b])
                m = len(ok)
                rate = hits / m if m else float("nan")
                se = math.sqrt(rate * (1 - rate) / m) if m else float("nan")
                res.rejection_rates[(test, b, h)] = {"rate": rate, "se": se, "successes": m, "rejections": hits}
    if 0 in plan.h_grid and len(plan.h_grid) > 1:
        res.size_adjusted_power = {}
        null = res.ok_records(0)
        if null and len(null) * min(plan.levels) < 5:
            warnings.warn(
                f"only {len(null)} null replications; size-adjusted power at level {min(plan.levels)} is unreliable",
                RuntimeWarning,
                stacklevel=3,
            )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for test in tests:
                ns = [r[test]["adj_stat"] for r in null]
                for h in plan.h_grid:
                    alt = [r[test]["adj_stat"] for r in res.ok_records(h)]
                    for b in plan.levels:
                        res.size_adjusted_power[(test, b, h)] = size_adjust(ns, alt, b) if alt and ns else float("nan")
