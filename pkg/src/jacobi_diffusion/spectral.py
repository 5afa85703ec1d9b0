"""Jacobi-polynomial expansion of the semigroup (alpha, beta > -1).

Mode ``n`` is the polynomial Q_n of degree n and decays at rate
sigma**2 n (n + alpha + beta + 1) / 2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import RegimeError, TruncationWarning
from .model import JacobiCoeffs, ShapeParams, _as_vectorized, _jacobi_rule

__all__ = [
    "SpectralExpansion",
    "decay_rate",
    "qnorm_sq",
    "jacobi_Q_table",
    "gauss_rule_dm",
    "expand",
    "truncation_order",
    "semigroup_apply",
    "gap_bound_check",
    "poincare_constant",
]

TAIL_TOL = 1e-14
N_CAP = 500
_T0_ORDER = 64
_RULE_MIN = 200


def _require_regular(coeffs: JacobiCoeffs) -> ShapeParams:
    s = coeffs.shape
    if s.alpha <= -1 or s.beta <= -1:
        raise RegimeError("the polynomial basis exists only for alpha, beta > -1")
    return s


def decay_rate(coeffs: JacobiCoeffs, n: int) -> float:
    s = _require_regular(coeffs)
    return coeffs.sigma**2 * n * (n + s.alpha + s.beta + 1.0) / 2.0


def gauss_rule_dm(coeffs: JacobiCoeffs, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights with sum(w * g(x)) = int g dm, exact for degree < 2n."""
    s = _require_regular(coeffs)
    y, w = _jacobi_rule(int(n), s.alpha, s.beta)
    return 0.5 * coeffs.d * (1.0 + y), w * 2.0 ** -(s.alpha + s.beta + 1.0)


def jacobi_Q_table(coeffs: JacobiCoeffs, N: int, x) -> np.ndarray:
    """Rows Q_0 .. Q_N at the points x, from the three-term recurrence.

    Stable for large N, unlike the terminating sum in ``specfun.jacobi_Q``.
    """
    s = _require_regular(coeffs)
    al, be = s.alpha, s.beta
    y = 2.0 * np.asarray(x, dtype=float) / coeffs.d - 1.0
    out = np.empty((N + 1,) + y.shape)
    # standard P_n^(al, be) first, rescaled to Q_n = P_n n! / (al + 1)_n
    p_prev = np.ones_like(y)
    out[0] = p_prev
    if N == 0:
        return out
    p = (al + 1.0) + (al + be + 2.0) * (y - 1.0) / 2.0
    scale = 1.0 / (al + 1.0)
    out[1] = p * scale
    for n in range(2, N + 1):
        k = 2 * n + al + be
        c1 = 2.0 * n * (n + al + be) * (k - 2.0)
        c2 = (k - 1.0) * (k * (k - 2.0) * y + al * al - be * be)
        c3 = 2.0 * (n + al - 1.0) * (n + be - 1.0) * k
        p_prev, p = p, (c2 * p - c3 * p_prev) / c1
        scale *= n / (al + n)
        out[n] = p * scale
    return out


def qnorm_sq(coeffs: JacobiCoeffs, n: int) -> float:
    """Squared L2(dm) norm of Q_n, by a Gauss rule exact for degree 2n."""
    x, w = gauss_rule_dm(coeffs, max(_RULE_MIN, n + 1))
    q = jacobi_Q_table(coeffs, n, x)[n]
    return float(np.dot(w, q * q))


@dataclass(frozen=True)
class SpectralExpansion:
    """Coefficients c_0..c_N of a function in the Q_n basis."""

    coeffs: JacobiCoeffs
    coefficients: np.ndarray
    norms_sq: np.ndarray

    @property
    def N(self) -> int:
        return len(self.coefficients) - 1

    @property
    def shape(self) -> ShapeParams:
        return self.coeffs.shape

    def __call__(self, x):
        table = jacobi_Q_table(self.coeffs, self.N, x)
        out = np.tensordot(self.coefficients, table, axes=1)
        return float(out) if np.ndim(out) == 0 else out

    def evolve(self, t: float) -> "SpectralExpansion":
        """Expansion of T_t f: mode n is damped by exp(-decay_rate(n) t)."""
        if t < 0:
            raise ValueError("time must be nonnegative")
        rates = np.array([decay_rate(self.coeffs, n) for n in range(self.N + 1)])
        return SpectralExpansion(self.coeffs, self.coefficients * np.exp(-rates * t), self.norms_sq)


def _project(coeffs: JacobiCoeffs, g, N: int, size: int) -> tuple[np.ndarray, np.ndarray, float]:
    x, w = gauss_rule_dm(coeffs, size)
    table = jacobi_Q_table(coeffs, N, x)
    vals = g(x)
    norms = (table * table) @ w
    inner = table @ (w * vals)
    return inner / norms, norms, float(np.dot(w, np.abs(vals)))


def expand(coeffs: JacobiCoeffs, f: Callable, N: int, tol: float = 1e-12) -> SpectralExpansion:
    """Project f onto Q_0..Q_N: c_n = (f, Q_n) / ||Q_n||**2 in L2(dm).

    The Gauss rule starts at max(200, N + 1) nodes and doubles until the
    coefficients settle, so polynomials are projected exactly.
    """
    _require_regular(coeffs)
    g = _as_vectorized(f)
    size = max(_RULE_MIN, N + 1)
    c, norms, scale = _project(coeffs, g, N, size)
    while size < 3200:
        c2, norms2, _ = _project(coeffs, g, N, 2 * size)
        size *= 2
        done = np.max(np.abs(c2 - c) * np.sqrt(norms2)) <= tol * max(scale, 1e-300)
        c, norms = c2, norms2
        if done:
            break
    c.setflags(write=False)
    norms.setflags(write=False)
    return SpectralExpansion(coeffs, c, norms)


def truncation_order(coeffs: JacobiCoeffs, t: float) -> int | None:
    """Smallest N with exp(-decay_rate(N) t) <= 1e-14, or None past the cap."""
    _require_regular(coeffs)
    if t <= 0:
        return None
    for n in range(1, N_CAP + 1):
        if math.exp(-decay_rate(coeffs, n) * t) <= TAIL_TOL:
            return n
    return None


def semigroup_apply(coeffs: JacobiCoeffs, t: float, f: Callable, x, N: int | None = None):
    """T_t f at x by the truncated eigen-expansion.

    With ``N`` omitted the order comes from :func:`truncation_order`. At
    t = 0 nothing is damped, so the result is just the truncated expansion
    of f and a TruncationWarning says so.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        N = _T0_ORDER if N is None else N
        warnings.warn("t = 0 returns the truncated expansion of f itself", TruncationWarning)
    elif N is None:
        N = truncation_order(coeffs, t)
        if N is None:
            N = N_CAP
            warnings.warn(f"semigroup series cut at N={N} before the tail bound was met", TruncationWarning)
    return expand(coeffs, f, N).evolve(t)(x)


def gap_bound_check(coeffs: JacobiCoeffs, f: Callable, t: float, N: int | None = None) -> tuple[float, float]:
    """(||T_t f - mean(f)||, exp(-b t) ||f||) in L2(dm); the first should not exceed the second."""
    _require_regular(coeffs)
    if N is None:
        N = truncation_order(coeffs, t) or N_CAP
    g = _as_vectorized(f)
    ex = expand(coeffs, g, N)
    mean = ex.coefficients[0]
    x, w = gauss_rule_dm(coeffs, max(_RULE_MIN, 2 * N + 2))
    centred = ex.evolve(t)(x) - mean
    lhs = math.sqrt(float(np.dot(w, centred * centred)))
    rhs = math.exp(-coeffs.b * t) * math.sqrt(float(np.dot(w, g(x) ** 2)))
    return lhs, rhs


def _log_sup(e: float) -> float:
    """sup over (0, 1) of x (1 - x) (1/e - log x)**2: grid scan, then golden section."""

    def h(x):
        return x * (1.0 - x) * (1.0 / e - np.log(x)) ** 2

    grid = np.linspace(0.0, 1.0, 10_001)[1:-1]
    vals = h(grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: -h(x), bracket=(lo, grid[i], hi), method="golden", tol=1e-12)
    return max(float(-res.fun), float(vals[i]))


def poincare_constant(shape: ShapeParams, sigma: float) -> float:
    """Constant C in  int f**2 dm <= C E(f)  over the form domain.

    Defined when exactly one of alpha, beta is <= -1, i.e. one boundary
    is absorbing and the other is not. The case alpha, beta <= -1 is
    not covered.
    """
    al, be = shape.alpha, shape.beta
    if not ((al <= -1 < be) or (be <= -1 < al)):
        raise RegimeError("needs exactly one of alpha, beta <= -1")
    s2 = sigma * sigma
    if be == -1:
        return 8.0 / s2 * _log_sup(al + 1.0)
    if al == -1:
        return 8.0 / s2 * _log_sup(be + 1.0)
    return 2.0 / (s2 * min(abs(al + 1.0), abs(be + 1.0)) ** 2)
