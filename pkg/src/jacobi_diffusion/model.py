"""Coefficients, shape parameters, densities, quadrature and classification.

The process solves ``dY = (a - b Y) dt + sigma sqrt(Y (d - Y)) dW`` on
``[0, d]``. Everything downstream is derived from the four numbers in
:class:`JacobiCoeffs`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import DivergenceError, DomainError, ParameterError

__all__ = [
    "JacobiCoeffs",
    "ShapeParams",
    "OrthoBasis",
    "Classification",
    "shape_from_coeffs",
    "density_m",
    "density_c",
    "density_cm",
    "generator_apply",
    "energy_form",
    "quad_dm",
    "total_mass",
    "classify",
]


@dataclass(frozen=True)
class ShapeParams:
    """Boundary exponents: the speed density behaves like x**beta near 0
    and like (d - x)**alpha near d."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class JacobiCoeffs:
    """Drift intercept ``a``, drift slope ``b``, noise scale ``sigma``, length ``d``."""

    a: float
    b: float
    sigma: float
    d: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "sigma", "d"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")
        if self.d <= 0:
            raise ParameterError("d must be positive")

    @classmethod
    def from_shape(cls, alpha: float, beta: float, sigma: float = 1.0, d: float = 1.0) -> "JacobiCoeffs":
        """Coefficients with the given boundary exponents.

        Exact round trips need representable inputs; dyadic alpha, beta
        with sigma = d = 1 always come back unchanged.
        """
        s2 = sigma * sigma
        a = (beta + 1.0) * s2 * d / 2.0
        b = s2 * (alpha + beta + 2.0) / 2.0
        return cls(a, b, sigma, d)

    @property
    def shape(self) -> ShapeParams:
        return shape_from_coeffs(self)

    @property
    def alpha(self) -> float:
        return self.shape.alpha

    @property
    def beta(self) -> float:
        return self.shape.beta

    def dual(self) -> "JacobiCoeffs":
        """Coefficients of the process ``d - Y``; swaps alpha and beta."""
        return JacobiCoeffs(self.b * self.d - self.a, self.b, self.sigma, self.d)


def shape_from_coeffs(coeffs: JacobiCoeffs) -> ShapeParams:
    s2 = coeffs.sigma**2
    alpha = 2 * coeffs.b / s2 - 2 * coeffs.a / (s2 * coeffs.d) - 1
    beta = 2 * coeffs.a / (s2 * coeffs.d) - 1
    return ShapeParams(alpha, beta)


# -- densities ----------------------------------------------------------------


def _interior(coeffs: JacobiCoeffs, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x >= coeffs.d):
        raise DomainError(f"points must lie in (0, {coeffs.d})")
    return x


def _scalar_or_array(v):
    return float(v) if np.ndim(v) == 0 else v


def _m(coeffs: JacobiCoeffs, x):
    s = coeffs.shape
    d = coeffs.d
    return x**s.beta * (d - x) ** s.alpha / d ** (s.alpha + s.beta + 1)


def _c(coeffs: JacobiCoeffs, x):
    return 0.5 * coeffs.sigma**2 * x * (coeffs.d - x)


def density_m(coeffs: JacobiCoeffs, x):
    """Speed density x**beta (d-x)**alpha / d**(alpha+beta+1)."""
    return _scalar_or_array(_m(coeffs, _interior(coeffs, x)))


def density_c(coeffs: JacobiCoeffs, x):
    """Half the squared diffusion coefficient, sigma**2 x (d-x) / 2."""
    return _scalar_or_array(_c(coeffs, _interior(coeffs, x)))


def density_cm(coeffs: JacobiCoeffs, x):
    x = _interior(coeffs, x)
    return _scalar_or_array(_c(coeffs, x) * _m(coeffs, x))


def generator_apply(coeffs: JacobiCoeffs, f, fp, fpp, x):
    """Apply the generator to pointwise values of f, f' and f'' at x.

    ``f`` is unused by the formula but kept so call sites read naturally.
    """
    x = _interior(coeffs, x)
    out = _c(coeffs, x) * np.asarray(fpp, float) + (coeffs.a - coeffs.b * x) * np.asarray(fp, float)
    return _scalar_or_array(out)


# -- quadrature ---------------------------------------------------------------

_GAUSS_START = 200
_GAUSS_MAX = 3200
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_MAX_LEVELS = 42


@lru_cache(maxsize=128)
def _jacobi_rule(n: int, pd: float, p0: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule for the weight (1 - y)**pd (1 + y)**p0 on [-1, 1].

    y = -1 maps to x = 0. Nodes and weights come from the eigen-decomposition
    of the Jacobi matrix (Golub-Welsch), which keeps sum(w * P_k(y)) at
    rounding level for large n.
    """
    a, b = float(pd), float(p0)
    k = np.arange(n, dtype=float)
    s = 2.0 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = np.where(s * (s + 2.0) != 0, (b * b - a * a) / (s * (s + 2.0)), (b - a) / (a + b + 2.0))
        k = k[1:]
        s = s[1:]
        # (k + a + b) / (s - 1) is 1 at k = 1 even when a + b = -1
        ratio = np.where(k == 1, 1.0, (k + a + b) / (s - 1.0))
        off = np.sqrt(4.0 * k * (k + a) * (k + b) * ratio / (s * s * (s + 1.0)))
    y, vec = eigh_tridiagonal(diag, off)
    log_mass = (a + b + 1.0) * math.log(2.0) + gammaln(a + 1.0) + gammaln(b + 1.0) - gammaln(a + b + 2.0)
    w = math.exp(log_mass) * vec[0] ** 2
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


def _as_vectorized(f: Callable) -> Callable:
    def g(x):
        out = np.asarray(f(x), dtype=float)
        if out.shape != np.shape(x):
            out = np.broadcast_to(out, np.shape(x)) if out.ndim == 0 else np.array([float(f(t)) for t in x])
        return out

    return g


def _gauss(g, d: float, p0: float, pd: float, n: int) -> tuple[float, float]:
    """Gauss-Jacobi estimate of int_0^d g(x) x**p0 (d-x)**pd dx and its L1 scale."""
    y, w = _jacobi_rule(n, pd, p0)
    x = 0.5 * d * (1.0 + y)
    vals = g(x)
    scale = (0.5 * d) ** (p0 + pd + 1.0)
    return scale * float(np.dot(w, vals)), scale * float(np.dot(w, np.abs(vals)))


def _panel(h, lo: float, hi: float, tol: float, depth: int = 0) -> float:
    """Adaptive Gauss-Legendre on [lo, hi] by bisection."""
    mid = 0.5 * (lo + hi)
    whole = _gl(h, lo, hi)
    left = _gl(h, lo, mid)
    right = _gl(h, mid, hi)
    if abs(left + right - whole) <= tol * max(abs(left) + abs(right), 1e-300) or depth >= 12:
        return left + right
    return _panel(h, lo, mid, tol, depth + 1) + _panel(h, mid, hi, tol, depth + 1)


def _gl(h, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    x = lo + half * (_GL_NODES + 1.0)
    return half * float(np.dot(_GL_WEIGHTS, h(x)))


def _graded_half(h, d: float, side: str, tol: float) -> float:
    """Integrate h(t), t = distance to the endpoint ``side``, over t in (0, d/2).

    Panels halve in width toward the endpoint. A geometric tail estimate
    closes the sum; panel integrals that stop shrinking mean divergence.
    """
    total = 0.0
    prev = None
    stalls = 0
    quiet = 0
    ratio = 0.0
    p = 0.0
    for k in range(_MAX_LEVELS):
        far = 0.5 * d * 2.0**-k
        p = _panel(h, 0.5 * far, far, tol)
        total += p
        if prev is not None and prev != 0.0:
            ratio = abs(p) / abs(prev)
            stalls = stalls + 1 if ratio >= 0.999 else 0
            if stalls >= 6:
                raise DivergenceError(f"integrand is not integrable at {side}")
        if k >= 3 and total != 0.0 and abs(p) <= tol * abs(total):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
        prev = p
    if ratio >= 0.98:
        raise DivergenceError(f"integrand decays too slowly at {side} to resolve")
    return total + p * ratio / (1.0 - ratio)


def _adaptive(g, d: float, p0: float, pd: float, tol: float) -> float:
    """int_0^d g(x) x**p0 (d-x)**pd dx with the weight evaluated from
    endpoint distances, so it stays accurate arbitrarily close to 0 and d."""

    def near_zero(t):
        return g(t) * t**p0 * (d - t) ** pd

    def near_d(t):
        return g(d - t) * (d - t) ** p0 * t**pd

    return _graded_half(near_zero, d, "0", tol) + _graded_half(near_d, d, "d", tol)


def _weighted_integral(g, d: float, p0: float, pd: float, tol: float, n: int | None) -> float:
    """int_0^d g(x) x**p0 (d-x)**pd dx."""
    g = _as_vectorized(g)
    if p0 > -1 and pd > -1:
        if n is not None:
            return _gauss(g, d, p0, pd, n)[0]
        size = _GAUSS_START
        est, scale = _gauss(g, d, p0, pd, size)
        while size < _GAUSS_MAX:
            size *= 2
            new, scale = _gauss(g, d, p0, pd, size)
            if abs(new - est) <= tol * max(abs(new), tol * scale, 1e-300):
                return new
            est = new
        # no agreement: the integrand is not smooth enough for Gauss rules
    return _adaptive(g, d, p0, pd, tol)


def quad_dm(coeffs: JacobiCoeffs, f: Callable, tol: float = 1e-10, n: int | None = None) -> float:
    """Integral of ``f`` against the speed measure m(x) dx on (0, d).

    Gauss-Jacobi rules when alpha, beta > -1 (``n`` fixes the node count,
    otherwise 200 nodes doubled until two estimates agree); endpoint-graded
    adaptive panels otherwise. ``f`` should accept numpy arrays.
    """
    s = coeffs.shape
    const = coeffs.d ** -(s.alpha + s.beta + 1.0)
    if s.alpha > -1 and s.beta > -1:
        return const * _weighted_integral(f, coeffs.d, s.beta, s.alpha, tol, n)
    return const * _adaptive(_as_vectorized(f), coeffs.d, s.beta, s.alpha, tol)


def energy_form(coeffs: JacobiCoeffs, fp: Callable, tol: float = 1e-10, n: int | None = None) -> float:
    """Energy  int fp(x)**2 c(x) m(x) dx  of a function with derivative ``fp``."""
    s = coeffs.shape
    fp = _as_vectorized(fp)
    const = 0.5 * coeffs.sigma**2 * coeffs.d ** -(s.alpha + s.beta + 1.0)

    def sq(x):
        return fp(x) ** 2

    if s.alpha > -1 and s.beta > -1:
        return const * _weighted_integral(sq, coeffs.d, s.beta + 1, s.alpha + 1, tol, n)
    return const * _adaptive(sq, coeffs.d, s.beta + 1, s.alpha + 1, tol)


def total_mass(coeffs: JacobiCoeffs) -> float:
    """m((0, d)); finite exactly when alpha, beta > -1."""
    s = coeffs.shape
    if s.alpha <= -1 or s.beta <= -1:
        raise DivergenceError("the speed measure has infinite mass when alpha or beta <= -1")
    return quad_dm(coeffs, lambda x: np.ones_like(x))


# -- classification -----------------------------------------------------------


class OrthoBasis(str, Enum):
    EMPTY = "Empty"
    XI_ONLY = "XiOnly"
    ETA_ONLY = "EtaOnly"
    XI_AND_ETA = "XiAndEta"


@dataclass(frozen=True)
class Classification:
    includes_0: bool
    includes_d: bool
    tilde_includes_0: bool
    tilde_includes_d: bool
    F_equals_DE: bool
    orthocomplement_basis: OrthoBasis
    conservative: bool
    recurrent: bool
    q_alpha: float
    q_beta: float
    q_star: float
    exceptional_points: frozenset

    @property
    def transient(self) -> bool:
        return not self.recurrent

    def to_dict(self) -> dict:
        out = asdict(self)
        out["orthocomplement_basis"] = self.orthocomplement_basis.value
        out["exceptional_points"] = sorted(self.exceptional_points)
        out["transient"] = self.transient
        for key in ("q_alpha", "q_beta", "q_star"):
            if math.isinf(out[key]):
                out[key] = "inf"
        return out


def _ortho_cell(alpha: float, beta: float) -> OrthoBasis:
    col = 0 if alpha <= -1 else (1 if alpha < 0 else 2)
    if -1 < beta < 0:
        return (OrthoBasis.ETA_ONLY, OrthoBasis.XI_AND_ETA, OrthoBasis.ETA_ONLY)[col]
    return (OrthoBasis.EMPTY, OrthoBasis.XI_ONLY, OrthoBasis.EMPTY)[col]


def _q(e: float) -> float:
    return 2.0 * (1.0 + 1.0 / e) if e > 0 else math.inf


def classify(shape: ShapeParams) -> Classification:
    """Boundary and regime classification, by exact comparisons against -1 and 0."""
    alpha, beta = shape.alpha, shape.beta
    basis = _ortho_cell(alpha, beta)
    conservative = alpha > -1 and beta > -1
    exceptional = set()
    if beta >= 0:
        exceptional.add("0")
    if alpha >= 0:
        exceptional.add("d")
    qa, qb = _q(alpha), _q(beta)
    return Classification(
        includes_0=beta > -1,
        includes_d=alpha > -1,
        tilde_includes_0=beta < 0,
        tilde_includes_d=alpha < 0,
        F_equals_DE=basis is OrthoBasis.EMPTY,
        orthocomplement_basis=basis,
        conservative=conservative,
        recurrent=conservative,
        q_alpha=qa,
        q_beta=qb,
        q_star=min(qa, qb),
        exceptional_points=frozenset(exceptional),
    )
