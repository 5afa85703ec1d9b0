"""Hardy-type inequality constants, the tail mass M(y) and the reference
functions used to test conservativity."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import roots_jacobi

from .errors import DivergenceError, DomainError, ParameterError, RegimeError
from .model import JacobiCoeffs, ShapeParams
from .specfun import hyp2f1

__all__ = [
    "HardyCase",
    "HardySpec",
    "hardy_admissible",
    "hardy_constant",
    "M_function",
    "PsiFunction",
    "psi_reference",
]


class HardyCase(str, Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CASE_III = "CaseIII"
    INADMISSIBLE = "Inadmissible"


@dataclass(frozen=True)
class HardySpec:
    """Weight exponents r (at 0) and s (at d) with the admissible case.

    ``constant`` bounds  int |f| x**r (d-x)**s dm  by  constant * sqrt(E(f)).
    It is the Hoelder factor of the standard proof, an upper bound and
    not the optimal constant.
    """

    r: float
    s: float
    admissible_case: HardyCase
    constant: float | None = None

    @property
    def admissible(self) -> bool:
        return self.admissible_case is not HardyCase.INADMISSIBLE


def hardy_admissible(shape: ShapeParams, r: float, s: float) -> HardySpec:
    al, be = shape.alpha, shape.beta
    if be <= -1 and al > -1:
        ok = r > (-2 - be) / 2 and s > max(-1 - al, (-2 - al) / 2)
        case = HardyCase.CASE_I
    elif be > -1 and al <= -1:
        ok = r > max(-1 - be, (-2 - be) / 2) and s > (-2 - al) / 2
        case = HardyCase.CASE_II
    elif be <= -1 and al <= -1:
        ok = r > (-2 - be) / 2 and s > (-2 - al) / 2
        case = HardyCase.CASE_III
    else:
        ok = False
        case = HardyCase.INADMISSIBLE
    return HardySpec(r, s, case if ok else HardyCase.INADMISSIBLE)


# -- Hoelder factor -----------------------------------------------------------

_OUTER_GL = np.polynomial.legendre.leggauss(24)
_INNER_GL = np.polynomial.legendre.leggauss(10)
_LEVELS = 60


def _graded_nodes(length: float, levels: int):
    """Gauss-Legendre nodes/weights on (0, length) in panels halving toward 0."""
    u, w = _OUTER_GL
    pts, wts, lev = [], [], []
    for k in range(levels):
        hi = length * 2.0**-k
        lo = 0.5 * hi
        half = 0.5 * (hi - lo)
        pts.append(lo + half * (u + 1.0))
        wts.append(half * w)
        lev.append(np.full(len(u), k))
    return np.concatenate(pts), np.concatenate(wts), np.concatenate(lev)


def _level_sums(vals: np.ndarray, wts: np.ndarray, lev: np.ndarray, levels: int) -> float:
    """Sum per-level panel integrals and close with a geometric tail."""
    panels = np.bincount(lev, weights=vals * wts, minlength=levels)
    total = float(panels.sum())
    last, prev = panels[-1], panels[-2]
    if last == 0.0:
        return total
    ratio = last / prev if prev != 0.0 else 1.0
    if not 0.0 <= ratio < 0.98:
        raise DivergenceError("Hardy integral does not converge at an endpoint")
    return total + last * ratio / (1.0 - ratio)


def _holder_integral(al: float, be: float, r: float, s: float, sigma: float, d: float, half: bool) -> float:
    """int_0^U G(y)**2 w(y) dy with G(y) = int_y^U x**p (d-x)**q dx / D.

    U = d (``half`` false) or d/2. D = d**(al+be+1) and
    w(y) = 2 D / (sigma**2 y**(be+1) (d-y)**(al+1)).
    Points are carried as (x, d - x) pairs so nothing cancels near d.
    """
    p, q = be + r, al + s
    upper = 0.5 * d if half else d
    # outer nodes: graded toward 0 on (0, d/2), and toward d on (d/2, d),
    # ordered left to right by the exact endpoint distance
    y0, w0, l0 = _graded_nodes(0.5 * d, _LEVELS)
    o0 = np.argsort(y0)
    if half:
        xs, ts = y0[o0], d - y0[o0]
        ws, levs = w0[o0], l0[o0]
        groups = [np.arange(len(y0))]
    else:
        t1, w1, l1 = _graded_nodes(0.5 * d, _LEVELS)
        o1 = np.argsort(-t1)
        xs = np.concatenate([y0[o0], d - t1[o1]])
        ts = np.concatenate([d - y0[o0], t1[o1]])
        ws = np.concatenate([w0[o0], w1[o1]])
        levs = np.concatenate([l0[o0], l1[o1]])
        groups = [np.arange(len(y0)), len(y0) + np.arange(len(t1))]
    right = np.zeros(len(xs), dtype=bool)
    if not half:
        right[len(y0):] = True

    def f(x, t):
        return x**p * t**q

    # cumulative inner integral from the top node up to U
    u, w = _INNER_GL
    xa, xb = xs[:-1], xs[1:]
    ta, tb = ts[:-1], ts[1:]
    frac = 0.5 * (u[:, None] + 1.0)
    xm = xa + (xb - xa) * frac
    tm = ta - (ta - tb) * frac
    width = np.where(right[:-1], ta - tb, xb - xa)
    pieces = 0.5 * width * (w @ f(xm, tm))
    if half:
        top = 0.5 * (upper - xs[-1]) * float(w @ f(xs[-1] + (upper - xs[-1]) * 0.5 * (u + 1.0), d - xs[-1] - (upper - xs[-1]) * 0.5 * (u + 1.0)))
    else:
        # int_0^{t_top} (d - t)**p t**q dt with a Gauss-Jacobi weight t**q
        gy, gw = roots_jacobi(20, 0.0, q)
        t_top = ts[-1]
        tt = 0.5 * t_top * (1.0 + gy)
        top = (0.5 * t_top) ** (q + 1.0) * float(gw @ (d - tt) ** p)
    G = np.empty_like(xs)
    G[-1] = top
    G[:-1] = top + np.cumsum(pieces[::-1])[::-1]
    G /= d ** (al + be + 1.0)
    weight = 2.0 * d ** (al + be + 1.0) / (sigma**2 * xs ** (be + 1.0) * ts ** (al + 1.0))
    vals = G * G * weight
    total = 0.0
    for idx in groups:
        total += _level_sums(vals[idx], ws[idx], levs[idx], _LEVELS)
    if not math.isfinite(total):
        raise DivergenceError("Hardy integral is not finite")
    return total


def hardy_constant(coeffs: JacobiCoeffs, r: float, s: float) -> HardySpec:
    """Admissibility plus the Hoelder-factor constant for weights x**r (d-x)**s.

    Case I integrates from the absorbing end 0, case II is its mirror
    image, and case III splits the interval at d/2 and adds the two
    half-interval factors.
    """
    shape = coeffs.shape
    spec = hardy_admissible(shape, r, s)
    al, be, sg, d = shape.alpha, shape.beta, coeffs.sigma, coeffs.d
    if spec.admissible_case is HardyCase.CASE_I:
        c = math.sqrt(_holder_integral(al, be, r, s, sg, d, half=False))
    elif spec.admissible_case is HardyCase.CASE_II:
        c = math.sqrt(_holder_integral(be, al, s, r, sg, d, half=False))
    elif spec.admissible_case is HardyCase.CASE_III:
        left = _holder_integral(al, be, r, s, sg, d, half=True)
        right = _holder_integral(be, al, s, r, sg, d, half=True)
        c = math.sqrt(left) + math.sqrt(right)
    else:
        raise RegimeError("Hardy inequality needs alpha <= -1 or beta <= -1 and admissible r, s")
    return replace(spec, constant=c)


# -- tail mass ----------------------------------------------------------------


def M_function(coeffs: JacobiCoeffs, y):
    """Speed-measure mass of (y, d), via a hypergeometric closed form.

    Needs alpha > -1 so the mass near d is finite.
    """
    s = coeffs.shape
    if s.alpha <= -1:
        raise RegimeError("M(y) is finite only for alpha > -1")
    d = coeffs.d
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0) or np.any(arr > d):
        raise DomainError(f"y must lie in (0, {d}]")

    def one(v):
        z = 1.0 - v / d
        if z == 0.0:
            return 0.0
        return z ** (s.alpha + 1.0) / (s.alpha + 1.0) * hyp2f1(-s.beta, s.alpha + 1.0, s.alpha + 2.0, z).value

    if arr.ndim == 0:
        return one(float(arr))
    return np.array([one(float(v)) for v in arr.ravel()]).reshape(arr.shape)


# -- reference functions ------------------------------------------------------


@dataclass(frozen=True)
class PsiFunction:
    """Test function with finite energy that detects non-conservativity.

    case "i": alpha <= -1 < beta, psi = (d-x)**(-alpha) / alpha.
    case "ii": beta <= -1 < alpha, psi = x**(-beta) / beta.
    case "iii": both <= -1; glued at ``y_split`` from the two power laws,
    equal to 1 there.
    """

    coeffs: JacobiCoeffs
    case: str
    y_split: float | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        al, be, d = self.coeffs.alpha, self.coeffs.beta, self.coeffs.d
        with np.errstate(divide="ignore"):
            if self.case == "i":
                out = (d - x) ** (-al) / al
            elif self.case == "ii":
                out = x ** (-be) / be
            else:
                y = self.y_split
                out = np.where(x <= y, y**be * x ** (-be), (d - y) ** al * (d - x) ** (-al))
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        """Weak derivative (one-sided at the gluing point in case iii)."""
        x = np.asarray(x, dtype=float)
        al, be, d = self.coeffs.alpha, self.coeffs.beta, self.coeffs.d
        with np.errstate(divide="ignore"):
            if self.case == "i":
                out = (d - x) ** (-al - 1.0)
            elif self.case == "ii":
                out = -(x ** (-be - 1.0))
            else:
                y = self.y_split
                out = np.where(
                    x <= y,
                    -be * y**be * x ** (-be - 1.0),
                    al * (d - y) ** al * (d - x) ** (-al - 1.0),
                )
        return float(out) if out.ndim == 0 else out


def psi_reference(coeffs: JacobiCoeffs, y_split: float | None = None) -> PsiFunction:
    al, be, d = coeffs.alpha, coeffs.beta, coeffs.d
    if al > -1 and be > -1:
        raise RegimeError("reference functions exist only when alpha <= -1 or beta <= -1")
    if al <= -1 and be <= -1:
        y = 0.5 * d if y_split is None else float(y_split)
        if not 0 < y < d:
            raise DomainError(f"y_split must lie in (0, {d})")
        return PsiFunction(coeffs, "iii", y)
    if y_split is not None:
        raise ParameterError("y_split applies only when alpha, beta <= -1")
    return PsiFunction(coeffs, "i" if al <= -1 else "ii")
