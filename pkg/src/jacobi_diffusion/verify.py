"""Named verification suites shared by the ``verify`` command and the tests.

Each suite returns a :class:`SuiteReport`; ``passed`` is the conjunction of
its checks. Suites are deterministic: random draws use fixed seeds.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .eigenfun import eta, eta_prime, xi, xi_prime
from .hitting import hit_prob_d
from .inequalities import hardy_constant
from .mc import calibrate_horizon, conservativity_check, ergodic_average, estimate_hit_prob
from .model import JacobiCoeffs, energy_form, generator_apply, quad_dm
from .sde import BoundaryHit, SdeField, refinement_distances
from .specfun import LimitKind, gauss_limit_regime, hyp2f1
from .spectral import expand, gauss_rule_dm, jacobi_Q_table, poincare_constant, semigroup_apply

__all__ = ["Check", "SuiteReport", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    bound: float | None = None
    detail: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed)}
        for key in ("value", "bound"):
            v = getattr(self, key)
            if v is not None:
                out[key] = float(v)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check]
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "checks": [c.to_dict() for c in self.checks],
        }


# -- eigenfunctions -----------------------------------------------------------

EIGEN_GRID = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0)
EIGEN_LAMBDAS = (0.3, 1.0, 3.0)


def eigen_residual(coeffs: JacobiCoeffs, lam: float, which: str, n_points: int = 50) -> float:
    """Worst relative residual of G f = lam f on an interior grid.

    f'' comes from central differences of the closed-form f' with step
    1e-5 times the distance to the nearer endpoint.
    """
    fn, fp = (xi, xi_prime) if which == "xi" else (eta, eta_prime)
    d = coeffs.d
    x = np.linspace(0.02, 0.98, n_points) * d
    h = 1e-5 * np.minimum(x, d - x)
    f = fn(coeffs, lam, x)
    p = fp(coeffs, lam, x)
    pp = (fp(coeffs, lam, x + h) - fp(coeffs, lam, x - h)) / (2.0 * h)
    res = np.abs(generator_apply(coeffs, f, p, pp, x) - lam * f)
    return float(np.max(res / np.maximum(1.0, np.abs(lam * f))))


def suite_eigen() -> list[Check]:
    checks = []
    for which in ("xi", "eta"):
        worst, where = 0.0, None
        for al, be in itertools.product(EIGEN_GRID, EIGEN_GRID):
            c = JacobiCoeffs.from_shape(al, be)
            for lam in EIGEN_LAMBDAS:
                r = eigen_residual(c, lam, which)
                if r > worst:
                    worst, where = r, {"alpha": al, "beta": be, "lambda": lam}
        checks.append(Check(f"eigen equation for {which}", worst <= 1e-6, worst, 1e-6, where or {}))
    return checks


# -- Gauss limits ---------------------------------------------------------------

GAUSS_X = 1.0 - 1e-6


def gauss_limit_samples(kind: LimitKind, n: int = 30, seed: int = 7) -> list[tuple[float, float, float]]:
    """Random (kappa, iota, upsilon) in the given regime.

    kappa, iota are drawn from (0.2, 3) on a 1/1024 grid, so that
    upsilon = kappa + iota is exact in the logarithmic regime. The gap
    |upsilon - kappa - iota| is drawn from [1, 2.5] in the finite and power
    regimes, since the next-order term is of relative size (1 - x)**gap.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        k, i = np.round(rng.uniform(0.2, 3.0, 2) * 1024.0) / 1024.0
        if kind is LimitKind.LOGARITHMIC:
            u = k + i
        else:
            gap = rng.uniform(1.0, 2.5)
            u = k + i + gap if kind is LimitKind.FINITE_GAUSS else k + i - gap
        if u <= 0.05 or abs(u - round(u)) < 1e-3 and round(u) <= 0:
            continue
        out.append((float(k), float(i), float(u)))
    return out


def gauss_limit_error(kappa: float, iota: float, upsilon: float, x: float = GAUSS_X) -> float:
    """Relative gap between 2F1 at x and its leading term as x -> 1."""
    reg = gauss_limit_regime(kappa, iota, upsilon)
    val = hyp2f1(kappa, iota, upsilon, x).value
    if reg.kind is LimitKind.FINITE_GAUSS:
        lead = reg.coefficient
    elif reg.kind is LimitKind.LOGARITHMIC:
        lead = reg.coefficient * -math.log(1.0 - x)
    else:
        lead = reg.coefficient * (1.0 - x) ** reg.exponent
    return abs(val - lead) / abs(lead)


def suite_gauss() -> list[Check]:
    checks = []
    for kind in (LimitKind.FINITE_GAUSS, LimitKind.LOGARITHMIC, LimitKind.POWER_BLOWUP):
        errs = [gauss_limit_error(*p) for p in gauss_limit_samples(kind)]
        worst = max(errs)
        checks.append(Check(f"Gauss limit, {kind.value}", worst <= 1e-3, worst, 1e-3, {"samples": len(errs)}))
    return checks


# -- spectral -------------------------------------------------------------------

SPECTRAL_SHAPES = ((0.0, 0.0), (1.0, 1.0), (0.5, -0.5), (2.0, 0.3))


def _random_poly(rng, degree: int = 5) -> Callable:
    coefs = rng.normal(size=degree + 1)
    return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coefs)


def suite_spectral() -> list[Check]:
    checks = []
    rng = np.random.default_rng(11)
    worst_orth = 0.0
    for al, be in SPECTRAL_SHAPES:
        c = JacobiCoeffs.from_shape(al, be)
        x, w = gauss_rule_dm(c, 200)
        tab = jacobi_Q_table(c, 12, x)
        gram = (tab * w) @ tab.T
        norms = np.sqrt(np.diag(gram))
        off = np.abs(gram - np.diag(np.diag(gram))) / np.outer(norms, norms)
        worst_orth = max(worst_orth, float(off.max()))
    checks.append(Check("orthogonality n < m <= 12", worst_orth <= 1e-8, worst_orth, 1e-8))

    worst_one = worst_sym = 0.0
    decay_ok, worst_ratio = True, 0.0
    for al, be in SPECTRAL_SHAPES:
        c = JacobiCoeffs.from_shape(al, be)
        x, w = gauss_rule_dm(c, 200)
        for t in (0.1, 1.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                one = semigroup_apply(c, t, lambda z: np.ones_like(z), np.linspace(0.01, 0.99, 25))
            worst_one = max(worst_one, float(np.max(np.abs(one - 1.0))))
            for _ in range(10):
                f, g = _random_poly(rng), _random_poly(rng)
                Tf = expand(c, f, 5).evolve(t)(x)
                Tg = expand(c, g, 5).evolve(t)(x)
                sym = abs(float(np.dot(w, Tf * g(x)) - np.dot(w, f(x) * Tg)))
                worst_sym = max(worst_sym, sym)
                ex = expand(c, f, 5)
                centred = ex.evolve(t)(x) - ex.coefficients[0]
                lhs = math.sqrt(float(np.dot(w, centred**2)))
                b = c.sigma**2 * (al + be + 2.0) / 2.0
                norm = math.sqrt(float(np.dot(w, (f(x) - ex.coefficients[0]) ** 2)))
                rhs = math.exp(-b * t) * norm
                worst_ratio = max(worst_ratio, lhs / rhs if rhs > 0 else 0.0)
                decay_ok &= lhs <= rhs * (1.0 + 1e-8)
    checks.append(Check("T_t 1 = 1", worst_one <= 1e-10, worst_one, 1e-10))
    checks.append(Check("semigroup symmetry", worst_sym <= 1e-8, worst_sym, 1e-8))
    checks.append(Check("spectral-gap decay", bool(decay_ok), worst_ratio, 1.0 + 1e-8))
    return checks


# -- Poincare and Hardy certificates -----------------------------------------

POINCARE_CASES = ((0.5, -1.0, 1.0, 1.0), (-1.0, 0.3, 1.0, 1.0), (0.5, -1.5, 1.0, 1.0), (-2.0, 1.0, 1.3, 2.0))
HARDY_CASES = (
    (0.0, -1.5, 0.0, 0.0, 1.0, 1.0),
    (0.5, -1.2, 0.3, -0.4, 1.3, 2.0),
    (-1.3, 0.4, -0.2, -0.1, 0.7, 1.5),
    (-1.2, -1.2, -0.3, -0.3, 1.0, 1.0),
    (-1.5, -2.5, 0.5, 0.6, 1.0, 1.0),
)


def bump(center: float, half_width: float, amp: float = 1.0):
    """Smooth bump supported on [center - half_width, center + half_width] and its derivative."""

    def f(x):
        u = (np.asarray(x, dtype=float) - center) / half_width
        inside = np.abs(u) < 1
        v = np.where(inside, 1.0 - u * u, 1.0)
        return np.where(inside, amp * np.exp(-1.0 / v), 0.0)

    def fp(x):
        u = (np.asarray(x, dtype=float) - center) / half_width
        inside = np.abs(u) < 1
        v = np.where(inside, 1.0 - u * u, 1.0)
        return np.where(inside, amp * np.exp(-1.0 / v) * (-2.0 * u / v**2) / half_width, 0.0)

    return f, fp


def random_bumps(d: float, n: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        lo, hi = np.sort(rng.uniform(0.01 * d, 0.99 * d, 2))
        if hi - lo < 0.02 * d:
            hi = min(lo + 0.02 * d, 0.995 * d)
        yield bump(0.5 * (lo + hi), 0.5 * (hi - lo), rng.uniform(0.5, 2.0))


def suite_hardy() -> list[Check]:
    checks = []
    for case_no, (al, be, sg, d) in enumerate(POINCARE_CASES):
        c = JacobiCoeffs.from_shape(al, be, sg, d)
        C = poincare_constant(c.shape, sg)
        worst = 0.0
        for f, fp in random_bumps(d, 20, seed=100 + case_no):
            lhs = quad_dm(c, lambda x: f(x) ** 2)
            rhs = C * energy_form(c, fp)
            worst = max(worst, lhs / rhs)
        checks.append(Check(f"Poincare alpha={al} beta={be}", worst <= 1.0 + 1e-8, worst, 1.0 + 1e-8, {"C": C}))
    for case_no, (al, be, r, s, sg, d) in enumerate(HARDY_CASES):
        c = JacobiCoeffs.from_shape(al, be, sg, d)
        spec = hardy_constant(c, r, s)
        worst = 0.0
        for f, fp in random_bumps(d, 20, seed=200 + case_no):
            lhs = quad_dm(c, lambda x: np.abs(f(x)) * x**r * (d - x) ** s)
            rhs = spec.constant * math.sqrt(energy_form(c, fp))
            worst = max(worst, lhs / rhs)
        checks.append(
            Check(
                f"Hardy alpha={al} beta={be} r={r} s={s}",
                worst <= 1.0 + 1e-8,
                worst,
                1.0 + 1e-8,
                {"case": spec.admissible_case.value, "C": spec.constant},
            )
        )
    return checks


# -- Monte Carlo suites -------------------------------------------------------

HIT_SHAPE = (-0.5, -1.5)
HIT_DTS = (4e-4, 2e-4, 1e-4)


def suite_hitting(n_paths: int = 20_000, dts=HIT_DTS, seed: int = 42, workers: int = 1) -> list[Check]:
    """MC hitting probability of d against the closed form.

    The step sizes share one Brownian path per id (the coarse increments
    are sums of the fine ones) and one pilot-calibrated horizon, so the
    change across dt reflects discretization rather than resampling. The
    discretization error is the part of |MC - exact| not covered by
    3 stderr; it must stay within 0.02 and not grow as dt shrinks.
    """
    c = JacobiCoeffs.from_shape(*HIT_SHAPE)
    field = SdeField(c)
    x0 = 0.5 * c.d
    exact = hit_prob_d(c, x0).probability
    fine = min(dts)
    T, info = calibrate_horizon(field, x0, fine, seed, max(100, n_paths // 10), BoundaryHit.D, workers=workers)
    excess, rows = [], []
    for dt in sorted(dts, reverse=True):
        k = int(round(dt / fine))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = estimate_hit_prob(field, x0, BoundaryHit.D, T=T, dt=dt, n_paths=n_paths, seed=seed,
                                    workers=workers, substeps=k)
        tail = est.diagnostics["censored_fraction"]
        err = est.mean - exact
        # the censored mass can only add hits, so it widens the upper side
        gap = max(0.0, -err - tail) if err < 0 else err
        ex = max(0.0, gap - 3.0 * est.stderr)
        excess.append(ex)
        rows.append({"dt": dt, "mean": est.mean, "stderr": est.stderr, "censored": tail, "excess": ex})
    final = rows[-1]
    ok_final = excess[-1] <= 0.02
    trend = all(b <= a + 1e-15 for a, b in zip(excess, excess[1:]))
    detail = {"exact": exact, "T": T, "calibration": _floats(info), "runs": rows}
    return [
        Check("MC brackets closed form at finest dt", ok_final, final["mean"], exact, detail),
        Check("discretization error nonincreasing in dt", trend, excess[-1], 0.02, {"excess": excess}),
    ]


def suite_conserve(n_paths: int = 1000, seed: int = 42, workers: int = 1) -> list[Check]:
    checks = []
    c = JacobiCoeffs.from_shape(1.0, 1.0)
    fr = []
    for dt in (1e-4, 5e-5):
        est = conservativity_check(SdeField(c), 0.5, T=1.0, dt=dt, n_paths=n_paths, seed=seed, workers=workers)
        fr.append(est.mean)
    ok = fr[0] < 0.01 and fr[1] <= fr[0]
    checks.append(Check("alpha=beta=1 exit fraction", ok, fr[0], 0.01, {"fractions": fr}))
    c2 = JacobiCoeffs.from_shape(-1.5, 1.0)
    field = SdeField(c2)
    T, info = calibrate_horizon(field, 0.9 * c2.d, 1e-4, seed, 200, None, workers=workers)
    est = conservativity_check(field, 0.9 * c2.d, T=T, dt=1e-4, n_paths=n_paths, seed=seed, workers=workers)
    checks.append(Check("alpha=-1.5, beta=1 exit fraction", est.mean > 0.2, est.mean, 0.2, {"T": T}))
    return checks


def suite_ergodic(seed: int = 42) -> list[Check]:
    c = JacobiCoeffs.from_shape(1.0, 1.0)
    avg = ergodic_average(SdeField(c), 0.3, lambda x: x, T=200.0, dt=1e-3, seed=seed)
    rel = abs(avg - 0.5) / 0.5
    return [Check("time average of x", rel <= 0.05, avg, 0.5, {"relative_error": rel})]


def suite_uniqueness(n_paths: int = 200, seed: int = 42) -> list[Check]:
    c = JacobiCoeffs.from_shape(0.5, 0.5)
    dist = refinement_distances(SdeField(c), 0.5, 1.0, 1e-2, seed, range(n_paths), levels=3)
    med = [float(np.median(row)) for row in dist]
    ok = all(b < a for a, b in zip(med, med[1:]))
    return [Check("median sup-distance decreases", ok, med[-1], med[0], {"medians": med})]


def suite_duality(seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        al, be = rng.uniform(-2.0, 1.5, 2)
        d, sg = rng.uniform(0.5, 2.0, 2)
        lam = rng.uniform(0.1, 3.0)
        c = JacobiCoeffs.from_shape(al, be, sg, d)
        x = rng.uniform(0.01, 0.99, 10) * d
        diff = np.abs(eta(c, lam, x) - xi(c.dual(), lam, d - x))
        worst = max(worst, float(diff.max()))
    field = SdeField(JacobiCoeffs.from_shape(*HIT_SHAPE))
    reps = []
    for workers in (1, 8):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = estimate_hit_prob(field, 0.5, BoundaryHit.D, T=2.0, dt=1e-3, n_paths=2000, seed=seed,
                                    workers=workers)
        reps.append(est.to_json("hit_prob", {"alpha": HIT_SHAPE[0], "beta": HIT_SHAPE[1]}, seed))
    return [
        Check("eta equals dual xi", worst <= 1e-14, worst, 1e-14),
        Check("MC report identical for 1 and 8 workers", reps[0] == reps[1]),
    ]


def _floats(d: dict) -> dict:
    return {k: (float(v) if isinstance(v, (int, float, np.floating)) and not isinstance(v, bool) else v)
            for k, v in d.items()}


SUITES: dict[str, Callable[[], list[Check]]] = {
    "eigen": suite_eigen,
    "gauss": suite_gauss,
    "spectral": suite_spectral,
    "hitting": suite_hitting,
    "conserve": suite_conserve,
    "ergodic": suite_ergodic,
    "hardy": suite_hardy,
    "uniqueness": suite_uniqueness,
    "duality": suite_duality,
}


def run_suite(name: str, **kwargs) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    checks = SUITES[name](**kwargs)
    return SuiteReport(name, checks, time.perf_counter() - t0)
