"""Monte Carlo estimators that cross-check the analytic results.

Paths are split into fixed chunks of consecutive path ids. Chunks may run
on any number of threads; results are reassembled in path-id order before
any reduction, so an estimate depends only on its inputs and the master
seed.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import CensoringWarning, ConfigError, RegimeError
from .inequalities import hardy_admissible
from .model import _as_vectorized
from .sde import BatchResult, BoundaryHit, SdeField, grid_steps, simulate_batch
from .spectral import semigroup_apply

__all__ = [
    "SCHEMA_VERSION",
    "McEstimate",
    "run_paths",
    "calibrate_horizon",
    "estimate_hit_prob",
    "conservativity_check",
    "ergodic_average",
    "occupation_integral",
    "occupation_batch",
    "semigroup_mc_check",
]

SCHEMA_VERSION = 1
CHUNK = 256
TAIL_TOL = 1e-3
# pilot runs use path ids offset by this much, away from the main stream
_PILOT_OFFSET = 2**62


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_paths: int
    dt: float
    ci95: tuple[float, float]
    diagnostics: dict = dc_field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples: np.ndarray, dt: float, diagnostics: dict | None = None) -> "McEstimate":
        x = np.asarray(samples, dtype=float)
        n = len(x)
        mean = float(np.sum(x) / n)
        sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
        se = sd / math.sqrt(n)
        return cls(mean, se, n, float(dt), (mean - 1.96 * se, mean + 1.96 * se), dict(diagnostics or {}))

    def brackets(self, value: float, margin: float = 0.0, k: float = 3.0) -> bool:
        """|mean - value| <= k stderr + margin (+ the censoring bound, if any)."""
        tail = float(self.diagnostics.get("censored_fraction", 0.0))
        lo = self.mean - k * self.stderr - margin
        hi = self.mean + k * self.stderr + margin + tail
        return lo <= value <= hi

    def to_record(self, estimator: str, params: dict, seed: int) -> dict:
        rec = {
            "schema_version": SCHEMA_VERSION,
            "estimator": estimator,
            "params": params,
            "seed": seed,
        }
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        rec.update(d)
        return rec

    def to_json(self, estimator: str, params: dict, seed: int) -> str:
        return json.dumps(self.to_record(estimator, params, seed), sort_keys=True)


def _check_paths(n_paths: int) -> int:
    if int(n_paths) != n_paths or n_paths < 1:
        raise ConfigError(f"n_paths must be a positive integer, got {n_paths}")
    return int(n_paths)


def run_paths(
    field: SdeField,
    x0: float,
    T: float,
    dt: float,
    n_paths: int,
    seed: int,
    g: Callable | None = None,
    stop_on: BoundaryHit = BoundaryHit.NONE,
    mark_step: int | None = None,
    workers: int = 1,
    id_offset: int = 0,
    substeps: int = 1,
) -> BatchResult:
    """Simulate path ids id_offset .. id_offset + n_paths - 1 in chunks."""
    n_paths = _check_paths(n_paths)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    grid_steps(T, dt)
    starts = range(0, n_paths, CHUNK)

    def job(s):
        ids = np.arange(id_offset + s, id_offset + min(s + CHUNK, n_paths))
        return simulate_batch(field, x0, T, dt, seed, ids, g=g, stop_on=stop_on, mark_step=mark_step, substeps=substeps)

    if workers == 1:
        parts = [job(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, starts))

    def cat(name):
        vals = [getattr(p, name) for p in parts]
        return None if vals[0] is None else np.concatenate(vals)

    return BatchResult(
        cat("path_ids"),
        cat("tau_0"),
        cat("tau_d"),
        cat("tau_exit"),
        cat("final"),
        cat("integral"),
        cat("integral_mark"),
        parts[0].horizon,
        float(dt),
    )


def _resolution_times(res: BatchResult, target: BoundaryHit | None) -> np.ndarray:
    """Time at which a path's outcome is settled: target hit or exit."""
    t = res.tau_exit.copy()
    if target is BoundaryHit.D:
        t = np.fmin(t, res.tau_d)
    elif target is BoundaryHit.ZERO:
        t = np.fmin(t, res.tau_0)
    return np.where(np.isnan(t), np.inf, t)


def _tail_extrapolate(times: np.ndarray, tol: float) -> tuple[float | None, float]:
    """Fit an exponential to the tail of the unresolved fraction S(t).

    Returns (time where the fitted S reaches tol, fitted decay rate); the
    time is None when the tail is too thin to fit.
    """
    n = len(times)
    done = np.sort(times[np.isfinite(times)])
    if len(done) < 20:
        return None, 0.0
    # S(t) at the 90% and last-but-ten resolution quantiles
    i1 = min(int(0.9 * len(done)), len(done) - 11)
    i2 = len(done) - 11
    if i1 < 0 or i2 <= i1:
        return None, 0.0
    s1, s2 = 1.0 - (i1 + 1) / n, 1.0 - (i2 + 1) / n
    t1, t2 = done[i1], done[i2]
    if not (s2 > 0 and s1 > s2 and t2 > t1):
        return (float(t2), math.inf) if s2 <= tol else (None, 0.0)
    rate = math.log(s1 / s2) / (t2 - t1)
    return float(t2 + max(0.0, math.log(s2 / tol)) / rate), rate


def calibrate_horizon(
    field: SdeField,
    x0: float,
    dt: float,
    seed: int,
    n_pilot: int = 1000,
    target: BoundaryHit | None = None,
    tail_tol: float = TAIL_TOL,
    T_max: float = 200.0,
    T_start: float = 1.0,
    workers: int = 1,
) -> tuple[float, dict]:
    """Pick T so the fraction of paths still unresolved at T is below tail_tol.

    A pilot run (separate path ids) is extended by doubling until its
    unresolved fraction can be extrapolated to tail_tol; the horizon is
    capped at T_max, in which case a CensoringWarning is issued.
    """
    T = T_start
    info: dict = {"n_pilot": n_pilot, "tail_tol": tail_tol}
    while True:
        res = run_paths(field, x0, T, dt, n_pilot, seed, stop_on=target or BoundaryHit.NONE,
                        workers=workers, id_offset=_PILOT_OFFSET)
        times = _resolution_times(res, target)
        left = float(np.mean(~np.isfinite(times)))
        t_fit, rate = _tail_extrapolate(times, tail_tol)
        if left <= tail_tol:
            info.update(pilot_T=T, unresolved=left, decay_rate=float(rate))
            return T, info
        if t_fit is not None and t_fit <= 2 * T:
            # margin for the scatter of the fitted tail rate
            T_new = min(max(1.25 * t_fit, T), T_max)
            info.update(pilot_T=T, unresolved=left, decay_rate=float(rate))
            return T_new, info
        if T >= T_max:
            warnings.warn(f"horizon capped at T={T_max} with {left:.3g} unresolved in the pilot", CensoringWarning)
            info.update(pilot_T=T, unresolved=left, decay_rate=float(rate), capped=True)
            return T_max, info
        T = min(2 * T, T_max)


def estimate_hit_prob(
    field: SdeField,
    x0: float,
    boundary: BoundaryHit,
    T: float | None = None,
    dt: float = 1e-3,
    n_paths: int = 10_000,
    seed: int = 42,
    workers: int = 1,
    tail_tol: float = TAIL_TOL,
    substeps: int = 1,
) -> McEstimate:
    """Fraction of paths that hit ``boundary`` before T.

    The diagnostics carry ``censored_fraction``, the share of paths whose
    outcome is still open at T. It bounds the probability mass missed by
    stopping at T, and :meth:`McEstimate.brackets` widens the upper side
    by it. With T omitted the horizon comes from :func:`calibrate_horizon`.
    ``substeps`` couples runs across step sizes (see ``simulate_batch``).
    """
    if boundary is BoundaryHit.NONE:
        raise ConfigError("boundary must be ZERO or D")
    n_paths = _check_paths(n_paths)
    diag: dict = {}
    if T is None:
        T, info = calibrate_horizon(field, x0, dt, seed, max(100, n_paths // 10), boundary, tail_tol,
                                    workers=workers)
        diag["calibration"] = info
    res = run_paths(field, x0, T, dt, n_paths, seed, stop_on=boundary, workers=workers, substeps=substeps)
    tau = res.tau_d if boundary is BoundaryHit.D else res.tau_0
    hits = np.isfinite(tau).astype(float)
    open_ = ~np.isfinite(_resolution_times(res, boundary))
    censored = float(np.mean(open_))
    _, rate = _tail_extrapolate(_resolution_times(res, boundary), tail_tol)
    diag.update(T=float(res.horizon), censored_fraction=censored, tail_decay_rate=float(rate))
    if censored > tail_tol:
        warnings.warn(f"{censored:.3g} of the paths are unresolved at T={res.horizon}", CensoringWarning)
    return McEstimate.from_samples(hits, dt, diag)


def conservativity_check(
    field: SdeField,
    x0: float,
    T: float | None = None,
    dt: float = 1e-3,
    n_paths: int = 10_000,
    seed: int = 42,
    workers: int = 1,
) -> McEstimate:
    """Fraction of paths whose maximal lifetime ends before T.

    ``boundary_touch_fraction`` in the diagnostics counts paths that reached
    0 or d at all, including overshoots pushed back by an inward drift.
    """
    n_paths = _check_paths(n_paths)
    diag: dict = {}
    if T is None:
        T, info = calibrate_horizon(field, x0, dt, seed, max(100, n_paths // 10), None, workers=workers)
        diag["calibration"] = info
    res = run_paths(field, x0, T, dt, n_paths, seed, workers=workers)
    dead = np.isfinite(res.tau_exit).astype(float)
    touched = np.isfinite(res.tau_0) | np.isfinite(res.tau_d)
    diag.update(T=float(res.horizon), boundary_touch_fraction=float(np.mean(touched)))
    return McEstimate.from_samples(dead, dt, diag)


def _require_conservative(field: SdeField) -> None:
    s = field.coeffs.shape
    if s.alpha <= -1 or s.beta <= -1:
        raise RegimeError("needs alpha, beta > -1 (no killing)")


def ergodic_average(field: SdeField, x0: float, f: Callable, T: float, dt: float = 1e-3, seed: int = 42,
                    path_id: int = 0) -> float:
    """Time average (1/T) int_0^T f(Z_s) ds along one path, trapezoid rule."""
    _require_conservative(field)
    g = _as_vectorized(f)
    res = simulate_batch(field, x0, T, dt, seed, [path_id], g=g)
    return float(res.integral[0] / res.horizon)


def _occupation_weight(field: SdeField, r: float, s: float, require_admissible: bool) -> Callable:
    c = field.coeffs
    if require_admissible and not hardy_admissible(c.shape, r, s).admissible:
        raise RegimeError(f"(r, s) = ({r}, {s}) is not admissible for these parameters")
    d = c.d

    def g(z):
        return z**r * (d - z) ** s

    return g


def occupation_batch(
    field: SdeField,
    x0: float,
    r: float,
    s: float,
    T: float,
    dt: float = 1e-3,
    n_paths: int = 1000,
    seed: int = 42,
    workers: int = 1,
    require_admissible: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Occupation integrals of path ids 0 .. n_paths - 1 and their stabilized flags.

    Same quantity as :func:`occupation_integral`, path by path.
    """
    g = _occupation_weight(field, r, s, require_admissible)
    n = grid_steps(T, dt)
    res = run_paths(field, x0, T, dt, n_paths, seed, g=g, mark_step=n - n // 10, workers=workers)
    value = res.integral
    late = value - res.integral_mark
    stabilized = (late <= 0.01 * np.abs(value)) | (value == 0)
    return value, stabilized


def occupation_integral(
    field: SdeField,
    x0: float,
    r: float,
    s: float,
    T: float,
    dt: float = 1e-3,
    seed: int = 42,
    path_id: int = 0,
    require_admissible: bool = True,
) -> tuple[float, bool]:
    """int_0^{T ^ lifetime} Z^r (d - Z)^s dt along one path.

    ``stabilized`` is true when the last tenth of the horizon adds less
    than 1% to the value. ``require_admissible=False`` skips the Hardy
    admissibility check, which is needed for conservative parameters where
    the integral simply grows like T.
    """
    g = _occupation_weight(field, r, s, require_admissible)
    n = grid_steps(T, dt)
    res = simulate_batch(field, x0, T, dt, seed, [path_id], g=g, mark_step=n - n // 10)
    value = float(res.integral[0])
    early = float(res.integral_mark[0])
    stabilized = (value - early) <= 0.01 * abs(value) if value != 0 else True
    return value, bool(stabilized)


def semigroup_mc_check(
    field: SdeField,
    x0: float,
    f: Callable,
    t: float,
    dt: float = 1e-3,
    n_paths: int = 10_000,
    seed: int = 42,
    workers: int = 1,
) -> tuple[McEstimate, float]:
    """MC mean of f(Z_t) next to the spectral value of T_t f(x0)."""
    _require_conservative(field)
    n_paths = _check_paths(n_paths)
    g = _as_vectorized(f)
    if t == 0:
        v = float(g(np.array([float(x0)]))[0])
        return McEstimate(v, 0.0, n_paths, float(dt), (v, v), {"t": 0.0}), v
    if t < 0:
        raise ConfigError("t must be nonnegative")
    res = run_paths(field, x0, t, dt, n_paths, seed, workers=workers)
    est = McEstimate.from_samples(g(res.final), dt, {"t": float(res.horizon)})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        exact = float(semigroup_apply(field.coeffs, t, g, float(x0)))
    return est, exact
