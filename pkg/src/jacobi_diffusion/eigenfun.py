"""Hypergeometric eigenfunctions of the generator.

``xi`` is the lambda-eigenfunction that is regular (or vanishes) at 0.
``eta`` is its mirror image regular at d, obtained by running ``xi`` on
the dual coefficients (a, b) -> (b d - a, b) at d - x. The eigenvalue
enters only through ``gamma_sq``, which may be negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, GuardError, ParameterError
from .model import JacobiCoeffs, ShapeParams
from .specfun import gamma_fn, hyp2f1_sym, rgamma_pair

__all__ = [
    "Branch",
    "EigenEval",
    "BoundaryKind",
    "BoundaryLimit",
    "gamma_sq_of",
    "eigen_eval",
    "monotone_guard",
    "xi",
    "eta",
    "xi_prime",
    "eta_prime",
    "xi_limit_0",
    "xi_limit_d",
    "xi_prime_cm_limit_0",
    "xi_prime_cm_limit_d",
    "eta_limit_0",
    "eta_limit_d",
    "eta_prime_cm_limit_0",
    "eta_prime_cm_limit_d",
]


class Branch(str, Enum):
    XI = "Xi"
    ETA = "Eta"


@dataclass(frozen=True)
class EigenEval:
    lam: float
    gamma_sq: float
    branch: Branch
    shape: ShapeParams


class BoundaryKind(str, Enum):
    FINITE = "Finite"
    PLUS_INFINITY = "PlusInfinity"
    MINUS_INFINITY = "MinusInfinity"


@dataclass(frozen=True)
class BoundaryLimit:
    kind: BoundaryKind
    value: float | None = None

    @classmethod
    def finite(cls, value: float) -> "BoundaryLimit":
        return cls(BoundaryKind.FINITE, float(value))

    def __neg__(self) -> "BoundaryLimit":
        if self.kind is BoundaryKind.FINITE:
            return BoundaryLimit.finite(-self.value)
        if self.kind is BoundaryKind.PLUS_INFINITY:
            return BoundaryLimit(BoundaryKind.MINUS_INFINITY)
        return BoundaryLimit(BoundaryKind.PLUS_INFINITY)

    def as_float(self) -> float:
        if self.kind is BoundaryKind.FINITE:
            return self.value
        return math.inf if self.kind is BoundaryKind.PLUS_INFINITY else -math.inf


_PLUS_INF = BoundaryLimit(BoundaryKind.PLUS_INFINITY)


def gamma_sq_of(coeffs: JacobiCoeffs, lam: float) -> float:
    """((alpha + beta + 1)/2)**2 - 2 lam / sigma**2."""
    if not lam > 0:
        raise ParameterError(f"eigenvalue must be positive, got {lam}")
    s = coeffs.shape
    h = (s.alpha + s.beta + 1.0) / 2.0
    return h * h - 2.0 * lam / coeffs.sigma**2


def eigen_eval(coeffs: JacobiCoeffs, lam: float, branch: Branch = Branch.XI) -> EigenEval:
    return EigenEval(lam, gamma_sq_of(coeffs, lam), Branch(branch), coeffs.shape)


def monotone_guard(coeffs: JacobiCoeffs, lam: float) -> bool:
    """True when xi is known to increase strictly (and eta to decrease).

    Automatic for alpha, beta > -1; otherwise lam must exceed
    sigma**2/2 * ((alpha + beta + 1)/2)**2, i.e. gamma_sq < 0.
    """
    s = coeffs.shape
    if s.alpha > -1 and s.beta > -1:
        gamma_sq_of(coeffs, lam)
        return True
    return gamma_sq_of(coeffs, lam) < 0


def _pointwise(fn, coeffs: JacobiCoeffs, x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(arr >= coeffs.d):
        raise DomainError(f"points must lie in (0, {coeffs.d})")
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def xi(coeffs: JacobiCoeffs, lam: float, x):
    """The eigenfunction regular at 0 (value 1 there when beta > -1, else 0)."""
    s = coeffs.shape
    g2 = gamma_sq_of(coeffs, lam)
    d = coeffs.d
    if s.beta > -1:
        A = (s.alpha + s.beta + 1.0) / 2.0
        return _pointwise(lambda v: hyp2f1_sym(A, g2, s.beta + 1.0, v / d).value, coeffs, x)
    A = (s.alpha - s.beta + 1.0) / 2.0

    def one(v):
        t = v / d
        return t ** (-s.beta) * hyp2f1_sym(A, g2, 1.0 - s.beta, t).value

    return _pointwise(one, coeffs, x)


def xi_prime(coeffs: JacobiCoeffs, lam: float, x):
    """Closed-form derivative of :func:`xi`."""
    s = coeffs.shape
    g2 = gamma_sq_of(coeffs, lam)
    d = coeffs.d
    s2 = coeffs.sigma**2
    al, be = s.alpha, s.beta
    if be > -1:
        pref = 2.0 * lam / (s2 * d * (be + 1.0))
        A = (al + be + 3.0) / 2.0
        return _pointwise(lambda v: pref * hyp2f1_sym(A, g2, be + 2.0, v / d).value, coeffs, x)
    p1 = (2.0 * lam / s2 - be * (al + 1.0)) / (d * (1.0 - be))
    p2 = -be / d
    A1 = (al - be + 3.0) / 2.0
    A2 = (al - be + 1.0) / 2.0

    def one(v):
        t = v / d
        f1 = hyp2f1_sym(A1, g2, 2.0 - be, t).value
        f2 = hyp2f1_sym(A2, g2, 1.0 - be, t).value
        return p1 * t ** (-be) * f1 + p2 * t ** (-be - 1.0) * f2

    return _pointwise(one, coeffs, x)


def eta(coeffs: JacobiCoeffs, lam: float, x):
    """The eigenfunction regular at d: xi of the dual process at d - x."""
    return xi(coeffs.dual(), lam, coeffs.d - np.asarray(x, dtype=float))


def eta_prime(coeffs: JacobiCoeffs, lam: float, x):
    return -xi_prime(coeffs.dual(), lam, coeffs.d - np.asarray(x, dtype=float))


# -- boundary limits ----------------------------------------------------------


def xi_limit_0(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    gamma_sq_of(coeffs, lam)
    return BoundaryLimit.finite(1.0 if coeffs.shape.beta > -1 else 0.0)


def xi_limit_d(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    s = coeffs.shape
    g2 = gamma_sq_of(coeffs, lam)
    al, be = s.alpha, s.beta
    if al >= 0:
        return _PLUS_INF
    if be > -1:
        u = (-al + be + 1.0) / 2.0
        return BoundaryLimit.finite(gamma_fn(be + 1.0) * gamma_fn(-al) * rgamma_pair(u, g2))
    u = (-al - be + 1.0) / 2.0
    return BoundaryLimit.finite(gamma_fn(1.0 - be) * gamma_fn(-al) * rgamma_pair(u, g2))


def xi_prime_cm_limit_0(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    """Limit of xi'(x) c(x) m(x) as x -> 0."""
    gamma_sq_of(coeffs, lam)
    be = coeffs.shape.beta
    return BoundaryLimit.finite(0.0 if be > -1 else -be * coeffs.sigma**2 / 2.0)


def xi_prime_cm_limit_d(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    """Limit of xi'(x) c(x) m(x) as x -> d.

    For alpha < -1 together with beta <= -1 the blow-up is only known when
    gamma_sq < 0; below that bound a GuardError is raised.
    """
    s = coeffs.shape
    g2 = gamma_sq_of(coeffs, lam)
    al, be = s.alpha, s.beta
    s2 = coeffs.sigma**2
    if al <= -1:
        if al < -1 and be <= -1 and not g2 < 0:
            bound = s2 / 2.0 * ((al + be + 1.0) / 2.0) ** 2
            raise GuardError(f"need lam > {bound} for alpha < -1, beta <= -1")
        return _PLUS_INF
    if be > -1:
        val = lam * gamma_fn(be + 1.0) * gamma_fn(al + 1.0) * rgamma_pair((al + be + 3.0) / 2.0, g2)
        return BoundaryLimit.finite(val)
    pref = (2.0 * lam / s2 - be * (al + 1.0)) * s2 * gamma_fn(1.0 - be) * gamma_fn(al + 1.0) / 2.0
    return BoundaryLimit.finite(pref * rgamma_pair((al - be + 3.0) / 2.0, g2))


def eta_limit_0(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    return xi_limit_d(coeffs.dual(), lam)


def eta_limit_d(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    return xi_limit_0(coeffs.dual(), lam)


def eta_prime_cm_limit_0(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    return -xi_prime_cm_limit_d(coeffs.dual(), lam)


def eta_prime_cm_limit_d(coeffs: JacobiCoeffs, lam: float) -> BoundaryLimit:
    return -xi_prime_cm_limit_0(coeffs.dual(), lam)
