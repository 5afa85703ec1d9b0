"""Euler-Maruyama simulation of the Jacobi SDE with lifetime bookkeeping.

The SDE runs with drift ``a - b x`` (smoothly cut off far outside [0, d])
and diffusion ``sigma sqrt(x (d - x))`` (zero outside [0, d]). A step
that overshoots a boundary is treated according to the drift there:

* drift pointing out of [0, d]: the path leaves, and the interpolated
  crossing time is both the first boundary hit and the first exit;
* drift zero or pointing in: the overshoot is a discretization artifact,
  so the hit is recorded and the path is put back on the boundary.

Every path draws its Gaussian increments from a Philox stream keyed by
``(master, path_id)``, so a path is a pure function of its inputs and
independent of how paths are batched or scheduled.

The modified process is built path by path; a discrete path cannot tell
whether it belongs to a null set of Brownian paths on which the
construction fails, so that distinction is not represented.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError
from .model import JacobiCoeffs

__all__ = [
    "SdeField",
    "BoundaryHit",
    "PathRecord",
    "BatchResult",
    "normal_stream",
    "brownian_normals",
    "coarsen_normals",
    "grid_steps",
    "simulate_path",
    "simulate_batch",
    "minimal_lifetime",
    "maximal_lifetime",
    "extension_flow",
    "modified_lifetime",
    "modified_process",
    "refinement_distances",
]

_BLOCK = 1024


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, increasing between."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        v = 1.0 - u
        f1 = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    return f0 / (f0 + f1)


@dataclass(frozen=True)
class SdeField:
    """Drift and diffusion of the SDE.

    The drift equals a - b x on [-delta, d + delta] and rolls off to 0
    outside [-2 delta, d + 2 delta]; ``delta`` defaults to d. Setting
    ``noise=False`` switches the diffusion off, which turns the scheme
    into the explicit Euler method for the drift ODE.
    """

    coeffs: JacobiCoeffs
    cutoff_halfwidth: float | None = None
    noise: bool = True

    def __post_init__(self):
        if self.cutoff_halfwidth is None:
            object.__setattr__(self, "cutoff_halfwidth", self.coeffs.d)
        if not self.cutoff_halfwidth > 0:
            raise ConfigError("cutoff_halfwidth must be positive")

    @property
    def delta(self) -> float:
        return float(self.cutoff_halfwidth)

    def cutoff(self, x):
        d, h = self.coeffs.d, self.delta
        x = np.asarray(x, dtype=float)
        below = _smooth_step((x + 2.0 * h) / h)
        above = _smooth_step((d + 2.0 * h - x) / h)
        return np.where(x < -h, below, np.where(x > d + h, above, 1.0))

    def drift(self, x):
        c = self.coeffs
        out = (c.a - c.b * np.asarray(x, dtype=float)) * self.cutoff(x)
        return float(out) if np.ndim(out) == 0 else out

    def diffusion(self, x):
        c = self.coeffs
        x = np.asarray(x, dtype=float)
        if not self.noise:
            out = np.zeros_like(x)
        else:
            inside = (x >= 0) & (x <= c.d)
            out = np.where(inside, c.sigma * np.sqrt(np.maximum(0.0, x * (c.d - x))), 0.0)
        return float(out) if out.ndim == 0 else out

    def exits_at_0(self) -> bool:
        """Drift at 0 points out of [0, d] (beta < -1)."""
        return self.coeffs.a < 0

    def exits_at_d(self) -> bool:
        """Drift at d points out of [0, d] (alpha < -1)."""
        c = self.coeffs
        return c.a - c.b * c.d > 0


class BoundaryHit(str, Enum):
    NONE = "None"
    ZERO = "Zero"
    D = "D"


# -- random numbers -----------------------------------------------------------


def _check_seed(master: int, path_id: int) -> None:
    for v in (master, path_id):
        if int(v) != v or not 0 <= int(v) < 2**64:
            raise ConfigError(f"seed components must be integers in [0, 2**64), got {v}")


def normal_stream(master: int, path_id: int) -> np.random.Generator:
    """Gaussian source of one path; the counter is the step index."""
    _check_seed(master, path_id)
    key = np.array([int(master), int(path_id)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def brownian_normals(master: int, path_id: int, n_steps: int) -> np.ndarray:
    """The first n_steps standard normals of the path's stream."""
    return normal_stream(master, path_id).standard_normal(int(n_steps))


def coarsen_normals(z: np.ndarray) -> np.ndarray:
    """Standard normals of the step-2dt scheme driven by the same Brownian path."""
    z = np.asarray(z, dtype=float)
    m = len(z) // 2
    return (z[0 : 2 * m : 2] + z[1 : 2 * m : 2]) / math.sqrt(2.0)


def grid_steps(T: float, dt: float) -> int:
    if not (dt > 0 and math.isfinite(dt)):
        raise ConfigError(f"dt must be positive, got {dt}")
    if not (math.isfinite(T) and T >= dt * (1 - 1e-12)):
        raise ConfigError(f"horizon T={T} must be at least dt={dt}")
    return max(1, int(round(T / dt)))


def _check_start(coeffs: JacobiCoeffs, x0: float) -> float:
    x0 = float(x0)
    if not 0.0 < x0 < coeffs.d:
        raise ConfigError(f"x0 must lie in (0, {coeffs.d}), got {x0}")
    return x0


# -- single path --------------------------------------------------------------


@dataclass(frozen=True)
class PathRecord:
    """One simulated path on the uniform grid 0, dt, ..., n dt.

    ``zeta_min_index`` / ``zeta_max_index`` point at the first grid value
    after the first boundary hit / first exit; the matching ``*_time``
    fields hold the interpolated crossing times. ``tau_0`` and ``tau_d``
    are the first hitting times of each boundary.
    """

    times: np.ndarray
    values: np.ndarray
    dt: float
    zeta_min_index: int | None
    zeta_max_index: int | None
    zeta_min_time: float | None
    zeta_max_time: float | None
    tau_0: float | None
    tau_d: float | None
    boundary_hit: BoundaryHit
    seed_path_id: tuple[int, int]

    def summary(self) -> dict:
        return {
            "seed": list(self.seed_path_id),
            "dt": self.dt,
            "n_steps": len(self.times) - 1,
            "boundary_hit": self.boundary_hit.value,
            "minimal_lifetime": self.zeta_min_time,
            "maximal_lifetime": self.zeta_max_time,
            "tau_0": self.tau_0,
            "tau_d": self.tau_d,
        }

    def dump(self, stem: str | Path) -> tuple[Path, Path]:
        """Write ``<stem>.csv`` (columns t, z) and a ``<stem>.json`` sidecar."""
        stem = Path(stem)
        csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "z"])
            for t, z in zip(self.times, self.values):
                w.writerow([repr(float(t)), repr(float(z))])
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return csv_path, json_path


def simulate_path(
    field: SdeField,
    x0: float,
    T: float,
    dt: float,
    seed: tuple[int, int] = (42, 0),
    normals: np.ndarray | None = None,
) -> PathRecord:
    """Euler-Maruyama path from x0 on [0, T].

    ``normals`` overrides the seeded stream (used for coupled refinement
    runs). After an exit the path follows the Euler scheme of the drift
    ODE, since the diffusion vanishes outside [0, d].
    """
    c = field.coeffs
    d = c.d
    x0 = _check_start(c, x0)
    n = grid_steps(T, dt)
    master, pid = seed
    if normals is None:
        normals = brownian_normals(master, pid, n)
    else:
        _check_seed(master, pid)
        normals = np.asarray(normals, dtype=float)
        if len(normals) < n:
            raise ConfigError(f"need {n} normals, got {len(normals)}")
    sq = math.sqrt(dt)
    vals = np.empty(n + 1)
    vals[0] = x0
    z = x0
    out_0, out_d = field.exits_at_0(), field.exits_at_d()
    tau = {0: None, 1: None}
    zmin_i = zmax_i = None
    zmin_t = zmax_t = None
    hit = BoundaryHit.NONE
    exited = False
    drift, diff = field.drift, field.diffusion
    for k in range(n):
        if exited:
            z = z + drift(z) * dt
            vals[k + 1] = z
            continue
        zn = z + (c.a - c.b * z) * dt
        if field.noise:
            zn += c.sigma * math.sqrt(max(0.0, z * (d - z))) * sq * normals[k]
        if 0.0 <= zn <= d:
            vals[k + 1] = z = zn
            continue
        side = 0 if zn < 0 else 1
        edge = 0.0 if side == 0 else d
        frac = (z - edge) / (z - zn) if z != zn else 0.0
        t_cross = (k + min(max(frac, 0.0), 1.0)) * dt
        if tau[side] is None:
            tau[side] = t_cross
        if zmin_i is None:
            zmin_i, zmin_t = k + 1, t_cross
            hit = BoundaryHit.ZERO if side == 0 else BoundaryHit.D
        if (side == 0 and out_0) or (side == 1 and out_d):
            exited = True
            zmax_i, zmax_t = k + 1, t_cross
            vals[k + 1] = z = zn
        else:
            vals[k + 1] = z = edge
    times = np.arange(n + 1) * dt
    times.setflags(write=False)
    vals.setflags(write=False)
    return PathRecord(
        times, vals, float(dt), zmin_i, zmax_i, zmin_t, zmax_t, tau[0], tau[1], hit, (int(master), int(pid))
    )


def minimal_lifetime(path: PathRecord) -> float | None:
    """First hitting time of {0, d}, or None when there is none before T."""
    return path.zeta_min_time


def maximal_lifetime(path: PathRecord) -> float | None:
    """First exit time from [0, d], or None when there is none before T."""
    return path.zeta_max_time


# -- batches ------------------------------------------------------------------


@dataclass(frozen=True)
class BatchResult:
    """Per-path outcomes of :func:`simulate_batch`, ordered by path id.

    Times are NaN when the event did not happen before the horizon.
    ``integral`` is the trapezoid integral of ``g`` up to the exit time or
    T, and ``integral_mark`` the same up to ``mark_step``.
    """

    path_ids: np.ndarray
    tau_0: np.ndarray
    tau_d: np.ndarray
    tau_exit: np.ndarray
    final: np.ndarray
    integral: np.ndarray | None
    integral_mark: np.ndarray | None
    horizon: float
    dt: float


def simulate_batch(
    field: SdeField,
    x0: float,
    T: float,
    dt: float,
    master: int,
    path_ids: Sequence[int],
    g: Callable | None = None,
    stop_on: BoundaryHit = BoundaryHit.NONE,
    mark_step: int | None = None,
    substeps: int = 1,
) -> BatchResult:
    """Run many independent paths side by side and keep only event data.

    Paths are dropped once they exit [0, d], or once they hit ``stop_on``.
    Each path uses its own stream, so the result for one path id does not
    depend on the other ids in the batch. ``final`` is the position at T
    (NaN for dropped paths). With ``substeps`` = k every step consumes k
    normals of the stream and uses their normalized sum, so runs at dt and
    dt / k share one Brownian path.
    """
    c = field.coeffs
    d = c.d
    x0 = _check_start(c, x0)
    n = grid_steps(T, dt)
    if int(substeps) != substeps or substeps < 1:
        raise ConfigError("substeps must be a positive integer")
    substeps = int(substeps)
    ids = np.asarray(path_ids, dtype=np.int64)
    m = len(ids)
    gens = [normal_stream(master, int(p)) for p in ids]
    sq = math.sqrt(dt)
    tau0 = np.full(m, np.nan)
    taud = np.full(m, np.nan)
    texit = np.full(m, np.nan)
    final = np.full(m, np.nan)
    acc = np.zeros(m) if g is not None else None
    acc_mark = np.zeros(m) if g is not None else None
    out_0, out_d = field.exits_at_0(), field.exits_at_d()
    stop_0 = stop_on is BoundaryHit.ZERO
    stop_d = stop_on is BoundaryHit.D
    noise = field.noise

    live = np.arange(m)
    z = np.full(m, x0)
    gz = _finite_g(g, z) if g is not None else None
    k = 0
    while k < n and len(live):
        kb = min(_BLOCK, n - k)
        noise_blk = None
        if noise:
            raw = np.stack([gens[i].standard_normal(kb * substeps) for i in live])
            noise_blk = raw if substeps == 1 else raw.reshape(len(live), kb, substeps).sum(axis=2) / math.sqrt(substeps)
        keep = np.ones(len(live), dtype=bool)
        for j in range(kb):
            alive = keep.copy()
            zn = z + (c.a - c.b * z) * dt
            if noise:
                zn += c.sigma * np.sqrt(np.maximum(0.0, z * (d - z))) * sq * noise_blk[:, j]
            lo = zn < 0.0
            hi = zn > d
            step = k + j
            leave = None
            if lo.any() or hi.any():
                crossed = (lo | hi) & alive
                edge = np.where(lo, 0.0, d)
                with np.errstate(divide="ignore", invalid="ignore"):
                    frac = np.clip(np.where(crossed, (z - edge) / (z - zn), 0.0), 0.0, 1.0)
                tc = (step + frac) * dt
                for mask, taus in ((crossed & lo, tau0), (crossed & hi, taud)):
                    idx = live[mask]
                    first = np.isnan(taus[idx])
                    taus[idx[first]] = tc[mask][first]
                leave = crossed & ((lo & out_0) | (hi & out_d))
                if leave.any():
                    texit[live[leave]] = tc[leave]
                    keep &= ~leave
                else:
                    leave = None
                zn = np.where(lo & keep, 0.0, np.where(hi & keep, d, zn))
                keep &= ~(crossed & ((lo & stop_0) | (hi & stop_d)))
            if g is not None:
                gn = _finite_g(g, zn)
                piece = _trap_piece(gz, gn)
                if leave is not None:
                    # left-point rule up to the crossing for paths that leave
                    piece = np.where(leave, np.where(np.isfinite(gz), gz, 0.0) * frac, piece)
                inc = np.where(alive, piece, 0.0)
                acc[live] += inc
                if mark_step is not None and step < mark_step:
                    acc_mark[live] += inc
                gz = gn
            z = zn
            if not keep.all():
                # freeze dead paths in place; they are compacted after the block
                z = np.where(keep, z, np.nan)
        k += kb
        live_keep = keep & np.isfinite(z)
        if k >= n:
            final[live[live_keep]] = z[live_keep]
        live, z = live[live_keep], z[live_keep]
        if g is not None:
            gz = gz[live_keep]
    if acc is not None:
        acc *= dt
        acc_mark *= dt
    return BatchResult(ids, tau0, taud, texit, final, acc, acc_mark, n * dt, float(dt))


def _finite_g(g, z):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        v = np.asarray(g(z), dtype=float)
    return np.broadcast_to(v, np.shape(z)).astype(float, copy=True)


def _trap_piece(ga, gb):
    """Trapezoid weight in units of dt; a non-finite endpoint (a boundary
    point of a singular integrand) is replaced by the other endpoint."""
    fa, fb = np.isfinite(ga), np.isfinite(gb)
    both = 0.5 * (np.where(fa, ga, 0.0) + np.where(fb, gb, 0.0))
    return np.where(fa & fb, both, np.where(fa, ga, np.where(fb, gb, 0.0)))


# -- extension flows and the modified process -------------------------------


def extension_flow(field: SdeField, boundary: BoundaryHit, t):
    """Solution of u' = drift(u) started at d (boundary D) or 0 (boundary ZERO).

    Closed form while the flow stays in the zone where the drift is linear,
    numerical integration of the cut-off drift afterwards.
    """
    if boundary is BoundaryHit.NONE:
        raise ValueError("extension flows start at 0 or d")
    c = field.coeffs
    start = c.d if boundary is BoundaryHit.D else 0.0
    a, b, d, h = c.a, c.b, c.d, field.delta
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0):
        raise ValueError("t must be nonnegative")

    def linear(tt):
        if b == 0:
            return start + a * tt
        eq = a / b
        return eq + (start - eq) * np.exp(-b * tt)

    # time at which the linear flow leaves [-h, d + h], if ever
    t_leave = math.inf
    if b == 0:
        if a > 0:
            t_leave = (d + h - start) / a
        elif a < 0:
            t_leave = (start + h) / -a
    else:
        eq = a / b
        for wall in (-h, d + h):
            r = (wall - eq) / (start - eq) if start != eq else -1.0
            if r > 0 and r != 1.0:
                tl = -math.log(r) / b
                if tl > 0:
                    t_leave = min(t_leave, tl)
    out = linear(np.minimum(ts, t_leave))
    late = ts > t_leave
    if np.any(late):
        y0 = float(linear(t_leave))
        tl_sorted = np.unique(ts[late])
        sol = solve_ivp(
            lambda _s, y: [field.drift(y[0])],
            (t_leave, float(tl_sorted[-1])),
            [y0],
            t_eval=tl_sorted,
            rtol=1e-10,
            atol=1e-12,
        )
        out = np.where(late, np.interp(ts, sol.t, sol.y[0]), out)
    return float(out) if np.ndim(out) == 0 else out


def _outside_state_space(field: SdeField):
    """Boundaries not in the state space of the killed process."""
    s = field.coeffs.shape
    return s.beta <= -1, s.alpha <= -1


def _killing_time(path: PathRecord, field: SdeField) -> tuple[float | None, BoundaryHit]:
    kill_0, kill_d = _outside_state_space(field)
    cands = []
    if kill_0 and path.tau_0 is not None:
        cands.append((path.tau_0, BoundaryHit.ZERO))
    if kill_d and path.tau_d is not None:
        cands.append((path.tau_d, BoundaryHit.D))
    if not cands:
        return None, BoundaryHit.NONE
    return min(cands, key=lambda p: p[0])


def modified_lifetime(path: PathRecord, field: SdeField) -> float | None:
    """Lifetime of the modified process; inf when it sits on a boundary forever."""
    zeta, side = _killing_time(path, field)
    if zeta is None:
        return None
    s = field.coeffs.shape
    if (side is BoundaryHit.D and s.alpha == -1) or (side is BoundaryHit.ZERO and s.beta == -1):
        return math.inf
    return zeta


def modified_process(path: PathRecord, field: SdeField) -> Callable[[float], float | None]:
    """t -> Z_t: the path until it reaches a boundary outside the state
    space, then the extension flow from that boundary; None once the
    modified lifetime has passed or beyond the simulated horizon."""
    zeta, side = _killing_time(path, field)
    life = modified_lifetime(path, field)
    horizon = float(path.times[-1])

    def Z(t: float) -> float | None:
        t = float(t)
        if t < 0:
            raise ValueError("t must be nonnegative")
        if zeta is None or t < zeta:
            if t > horizon:
                return None
            return float(np.interp(t, path.times, path.values))
        if life is not None and t >= life:
            return None
        return extension_flow(field, side, t - zeta)

    return Z


# -- coupled refinement -------------------------------------------------------


def refinement_distances(
    field: SdeField,
    x0: float,
    T: float,
    dt: float,
    master: int,
    path_ids: Sequence[int],
    levels: int = 3,
) -> np.ndarray:
    """Sup-distance between the step-h and step-h/2 schemes on one Brownian path.

    Row i compares h = dt / 2**i with h / 2 for i < levels; the normals of
    the finest grid are summed pairwise for the coarser ones. Distances are
    taken on the coarse grid up to the earlier minimal lifetime (or T).
    """
    n_fine = grid_steps(T, dt) * 2**levels
    out = np.empty((levels, len(path_ids)))
    for j, pid in enumerate(path_ids):
        z = [brownian_normals(master, pid, n_fine)]
        for _ in range(levels):
            z.append(coarsen_normals(z[-1]))
        z = z[::-1]  # z[i] drives step dt / 2**i
        paths = [
            simulate_path(field, x0, T, dt / 2**i, (master, pid), normals=z[i]) for i in range(levels + 1)
        ]
        for i in range(levels):
            coarse, fine = paths[i], paths[i + 1]
            stop = min(t for t in (T, coarse.zeta_min_time, fine.zeta_min_time) if t is not None)
            mask = coarse.times <= stop
            diff = np.abs(coarse.values[mask] - fine.values[::2][mask])
            out[i, j] = float(diff.max())
    return out
