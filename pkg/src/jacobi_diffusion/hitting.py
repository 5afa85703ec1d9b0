"""Boundary hitting probabilities and their lambda-order (Laplace) versions.

Only the band -1 < alpha < 0 gives a nontrivial answer for the boundary d:
for alpha <= -1 the point d is not part of the state space, and for
alpha >= 0 it is never reached. Those regimes return probability 0 with a
note instead of raising. Formulas are evaluated pointwise at every
x in (0, d).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .eigenfun import xi
from .errors import DomainError, ParameterError
from .model import JacobiCoeffs
from .specfun import gamma_fn, hyp2f1, rgamma, rgamma_pair

__all__ = [
    "Boundary",
    "RegimeNote",
    "HittingResult",
    "hit_prob_d",
    "hit_prob_0",
    "lambda_hitting_d",
    "lambda_hitting_0",
]


class Boundary(str, Enum):
    ZERO = "Zero"
    D = "D"


class RegimeNote(str, Enum):
    NONE = "none"
    NOT_IN_STATE_SPACE = "boundary not in state space"
    EXCEPTIONAL = "boundary is never hit (zero capacity)"


@dataclass(frozen=True)
class HittingResult:
    boundary: Boundary
    x: float
    probability: float
    note: RegimeNote = RegimeNote.NONE

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


def _check_x(coeffs: JacobiCoeffs, x: float) -> float:
    x = float(x)
    if not 0.0 < x <= coeffs.d:
        raise DomainError(f"x must lie in (0, {coeffs.d}]")
    return x


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


def hit_prob_d(coeffs: JacobiCoeffs, x: float) -> HittingResult:
    """P_x(the process ever reaches d)."""
    x = _check_x(coeffs, x)
    al, be = coeffs.alpha, coeffs.beta
    if al <= -1:
        return HittingResult(Boundary.D, x, 0.0, RegimeNote.NOT_IN_STATE_SPACE)
    if al >= 0:
        return HittingResult(Boundary.D, x, 0.0, RegimeNote.EXCEPTIONAL)
    if be > -1 or x == coeffs.d:
        return HittingResult(Boundary.D, x, 1.0)
    t = x / coeffs.d
    pref = gamma_fn(-al - be) * rgamma(1.0 - be) * rgamma(-al)
    p = pref * t ** (-be) * hyp2f1(al + 1.0, -be, 1.0 - be, t).value
    return HittingResult(Boundary.D, x, _clip(p))


def hit_prob_0(coeffs: JacobiCoeffs, x: float) -> HittingResult:
    """P_x(the process ever reaches 0), by duality with :func:`hit_prob_d`."""
    x = float(x)
    if not 0.0 <= x < coeffs.d:
        raise DomainError(f"x must lie in [0, {coeffs.d})")
    res = hit_prob_d(coeffs.dual(), coeffs.d - x)
    return HittingResult(Boundary.ZERO, x, res.probability, res.note)


def lambda_hitting_d(coeffs: JacobiCoeffs, lam: float, x) -> float | np.ndarray:
    """E_x exp(-lam * tau_d): xi_lam normalized to equal 1 at d.

    Defined for -1 < alpha < 0 and lam > 0. The Gamma-pair factor is
    evaluated in real arithmetic also when gamma_sq < 0.
    """
    al, be, d = coeffs.alpha, coeffs.beta, coeffs.d
    if not -1 < al < 0:
        raise ParameterError("lambda-order hitting of d needs -1 < alpha < 0")
    if not lam > 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    h = (al + be + 1.0) / 2.0
    g2 = h * h - 2.0 * lam / coeffs.sigma**2
    if be > -1:
        u = (-al + be + 1.0) / 2.0
        norm = rgamma(be + 1.0)
    else:
        u = (-al - be + 1.0) / 2.0
        norm = rgamma(1.0 - be)
    # Gamma(u + g) Gamma(u - g) = 1 / rgamma_pair
    scale = norm * rgamma(-al) / rgamma_pair(u, g2)
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(arr > d):
        raise DomainError(f"x must lie in (0, {d}]")
    inner = np.where(arr < d, arr, 0.5 * d)
    out = np.where(arr < d, np.clip(scale * xi(coeffs, lam, inner), 0.0, 1.0), 1.0)
    return float(out) if out.ndim == 0 else out


def lambda_hitting_0(coeffs: JacobiCoeffs, lam: float, x):
    """E_x exp(-lam * tau_0), the mirror image of :func:`lambda_hitting_d`."""
    return lambda_hitting_d(coeffs.dual(), lam, coeffs.d - np.asarray(x, dtype=float))
