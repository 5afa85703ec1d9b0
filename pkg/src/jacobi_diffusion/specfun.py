"""Real-arithmetic special functions.

Gamma and digamma, the Gauss hypergeometric series and the rescaled
Jacobi polynomials. The two upper parameters of a hypergeometric series
may form a complex-conjugate pair ``A +/- i v``. Every coefficient and
Gamma factor then depends only on ``A`` and ``v**2``, so all arithmetic
stays real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NonConvergence, ParameterError, PoleError

__all__ = [
    "SeriesEval",
    "LimitKind",
    "LimitRegime",
    "gamma_fn",
    "rgamma",
    "digamma",
    "gamma_pair",
    "rgamma_pair",
    "hyp2f1",
    "hyp2f1_sym",
    "gauss_limit_regime",
    "jacobi_Q",
    "SERIES_TOL",
    "MAX_TERMS",
    "X_SWITCH",
]

SERIES_TOL = 1e-15
MAX_TERMS = 100_000
X_SWITCH = 0.75
# threshold on truncation_estimate / max(1, |value|) for the converged flag;
# looser than SERIES_TOL because transformed sums multiply by prefactors
CONVERGENCE_TOL = 1e-13
# within this distance of an integer the two-term z -> 1-z formula cancels
_NEAR_INTEGER = 1e-3
# closer than this (relative) the integer formulas are used as they stand
_SNAP_INTEGER = 1e-13
_NEAR_INTEGER_DIRECT_MAX = 0.995

_EULER = 0.57721566490153286061
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# g = 7, n = 9 Lanczos coefficients
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# B_2k for the Stirling and digamma tails
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6)
_STIRLING_SHIFT = 15.0


@dataclass(frozen=True)
class SeriesEval:
    """Value of a (possibly transformed) hypergeometric series.

    ``truncation_estimate`` is the magnitude of the last added term,
    scaled by its prefactor when a linear transformation was used.
    """

    value: float
    terms_used: int
    converged: bool
    truncation_estimate: float

    def __float__(self) -> float:
        return self.value


class LimitKind(str, Enum):
    FINITE_GAUSS = "FiniteGauss"
    LOGARITHMIC = "Logarithmic"
    POWER_BLOWUP = "PowerBlowup"


@dataclass(frozen=True)
class LimitRegime:
    """Leading behaviour of 2F1(kappa, iota; upsilon; x) as x -> 1-.

    FiniteGauss: the series tends to ``coefficient``.
    Logarithmic: the series divided by ``-log(1-x)`` tends to it.
    PowerBlowup: the series divided by ``(1-x)**exponent`` tends to it.
    """

    kind: LimitKind
    coefficient: float
    exponent: float = 0.0


def _is_nonpositive_integer(z: float) -> bool:
    return z <= 0.0 and z == math.floor(z)


def _sinpi(x: float) -> float:
    r = x - 2.0 * round(0.5 * x)
    return math.sin(math.pi * r)


def gamma_fn(z: float) -> float:
    """Gamma function (Lanczos approximation, reflection for z < 1/2)."""
    z = float(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z}")
    if z < 0.5:
        return math.pi / (_sinpi(z) * gamma_fn(1.0 - z))
    z -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so large arguments overflow only when Gamma does
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def rgamma(z: float) -> float:
    """1/Gamma(z), equal to 0 at the poles."""
    if _is_nonpositive_integer(z):
        return 0.0
    return 1.0 / gamma_fn(z)


def _log_abs_gamma(x: float, y: float) -> float:
    """log|Gamma(x + iy)| using real arithmetic only."""
    acc = 0.0
    while x < _STIRLING_SHIFT:
        r2 = x * x + y * y
        if r2 == 0.0:
            raise PoleError("Gamma has a pole at 0")
        acc += 0.5 * math.log(r2)
        x += 1.0
    r2 = x * x + y * y
    log_r = 0.5 * math.log(r2)
    theta = math.atan2(y, x)
    r = math.sqrt(r2)
    val = (x - 0.5) * log_r - y * theta - x + _HALF_LOG_2PI
    for k, b in enumerate(_BERNOULLI, start=1):
        p = 2 * k - 1
        val += b / (2 * k * p) * math.cos(p * theta) / r**p
    return val - acc


def _re_digamma(x: float, y: float) -> float:
    """Real part of digamma(x + iy)."""
    acc = 0.0
    while x < _STIRLING_SHIFT:
        if y == 0.0:
            # 1/x directly: squaring a tiny x would underflow
            if x == 0.0:
                raise PoleError("digamma has a pole at 0")
            acc += 1.0 / x
        else:
            acc += x / (x * x + y * y)
        x += 1.0
    r2 = x * x + y * y
    r = math.sqrt(r2)
    theta = math.atan2(y, x)
    val = 0.5 * math.log(r2) - 0.5 * math.cos(theta) / r
    for k, b in enumerate(_BERNOULLI, start=1):
        val -= b / (2 * k) * math.cos(2 * k * theta) / r ** (2 * k)
    return val - acc


def digamma(z: float) -> float:
    """Digamma function for real arguments."""
    z = float(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"digamma has a pole at {z}")
    return _re_digamma(z, 0.0)


def gamma_pair(u: float, gamma_sq: float) -> float:
    """Gamma(u + g) * Gamma(u - g) with g**2 = gamma_sq, in real arithmetic.

    For negative ``gamma_sq`` this is |Gamma(u + i v)|**2 with v**2 = -gamma_sq.
    """
    if gamma_sq >= 0.0:
        g = math.sqrt(gamma_sq)
        return gamma_fn(u + g) * gamma_fn(u - g)
    return math.exp(2.0 * _log_abs_gamma(u, math.sqrt(-gamma_sq)))


def rgamma_pair(u: float, gamma_sq: float) -> float:
    """1 / gamma_pair(u, gamma_sq), with 0 at poles."""
    if gamma_sq >= 0.0:
        g = math.sqrt(gamma_sq)
        return rgamma(u + g) * rgamma(u - g)
    return math.exp(-2.0 * _log_abs_gamma(u, math.sqrt(-gamma_sq)))


# -- upper parameter pairs ----------------------------------------------------


class _RealPair:
    __slots__ = ("a", "b")

    def __init__(self, a: float, b: float):
        self.a = float(a)
        self.b = float(b)

    def coef(self, j: int) -> float:
        return (self.a + j) * (self.b + j)

    def total(self) -> float:
        return self.a + self.b

    def shift(self, m: float) -> "_RealPair":
        return _RealPair(self.a + m, self.b + m)

    def reflect(self, c: float) -> "_RealPair":
        return _RealPair(c - self.a, c - self.b)

    def rgamma_prod(self) -> float:
        return rgamma(self.a) * rgamma(self.b)

    def digamma_sum(self) -> float:
        return digamma(self.a) + digamma(self.b)

    def degree(self) -> int | None:
        degs = [int(-p) for p in (self.a, self.b) if _is_nonpositive_integer(p)]
        return min(degs) if degs else None


class _SymPair:
    """The pair A + g, A - g stored as (A, g**2)."""

    __slots__ = ("A", "g2")

    def __init__(self, A: float, g2: float):
        self.A = float(A)
        self.g2 = float(g2)

    def coef(self, j: int) -> float:
        t = self.A + j
        return t * t - self.g2

    def total(self) -> float:
        return 2.0 * self.A

    def shift(self, m: float) -> "_SymPair":
        return _SymPair(self.A + m, self.g2)

    def reflect(self, c: float) -> "_SymPair":
        return _SymPair(c - self.A, self.g2)

    def rgamma_prod(self) -> float:
        return rgamma_pair(self.A, self.g2)

    def digamma_sum(self) -> float:
        if self.g2 >= 0.0:
            g = math.sqrt(self.g2)
            return digamma(self.A + g) + digamma(self.A - g)
        return 2.0 * _re_digamma(self.A, math.sqrt(-self.g2))

    def degree(self) -> int | None:
        if self.g2 < 0.0:
            return None
        g = math.sqrt(self.g2)
        degs = []
        for p in (self.A + g, self.A - g):
            n = round(-p)
            if n >= 0 and abs(p + n) <= 1e-12 * max(1.0, n):
                degs.append(int(n))
        return min(degs) if degs else None


# -- summation ----------------------------------------------------------------


def _sum_series(pair, c: float, z: float) -> tuple[float, int, float, bool]:
    """Sum the 2F1 series directly. Returns (sum, terms, |last term|, ok)."""
    deg = pair.degree()
    total = 1.0
    term = 1.0
    if deg is not None:
        for k in range(deg):
            term *= pair.coef(k) / ((c + k) * (k + 1)) * z
            total += term
        return total, deg + 1, 0.0, True
    small = 0
    for k in range(MAX_TERMS - 1):
        term *= pair.coef(k) / ((c + k) * (k + 1)) * z
        total += term
        if abs(term) <= SERIES_TOL * max(1.0, abs(total)):
            small += 1
            if small == 2:
                return total, k + 2, abs(term), True
        else:
            small = 0
    return total, MAX_TERMS, abs(term), False


def _log_series(pair, m: int, w: float, psum: float) -> tuple[float, int, float, bool]:
    """Sum_n (a)_n (b)_n / (n! (n+m)!) w^n [ln w - psi(n+1) - psi(n+m+1) + psum_n].

    ``pair`` holds the already shifted parameters and ``psum`` is
    psi(a) + psi(b) for them.
    """
    lw = math.log(w)
    t = 1.0 / math.factorial(m)
    psi1 = -_EULER
    psim = -_EULER + sum(1.0 / k for k in range(1, m + 1))
    total = 0.0
    small = 0
    for n in range(MAX_TERMS):
        contrib = t * (lw - psi1 - psim + psum)
        total += contrib
        if abs(contrib) <= SERIES_TOL * max(1.0, abs(total)):
            small += 1
            if small == 2:
                return total, n + 1, abs(contrib), True
        else:
            small = 0
        cf = pair.coef(n)
        if cf == 0.0:
            return total, n + 1, 0.0, True
        psum += (pair.total() + 2 * n) / cf
        psi1 += 1.0 / (n + 1)
        psim += 1.0 / (n + m + 1)
        t *= cf / ((n + 1) * (n + m + 1)) * w
    return total, MAX_TERMS, abs(t), False


def _finite_sum(pair, m: int, w: float) -> float:
    """Sum_{n<m} (a)_n (b)_n / (n! (1-m)_n) w^n."""
    total = 0.0
    t = 1.0
    for n in range(m):
        if n:
            t *= pair.coef(n - 1) / (n * (n - m)) * w
        total += t
    return total


def _integer_case(pair, c: float, m: int, x: float) -> SeriesEval:
    # Abramowitz & Stegun 15.3.10 - 15.3.12
    w = 1.0 - x
    gc = gamma_fn(c)
    if m == 0:
        pref = gc * pair.rgamma_prod()
        s, n, last, ok = _log_series(pair, 0, w, pair.digamma_sum())
        return _pack(-pref * s, n, abs(pref) * last, ok)
    if m > 0:
        up = pair.shift(m)
        p1 = math.factorial(m - 1) * gc * up.rgamma_prod()
        f1 = _finite_sum(pair, m, w)
        p2 = -((-w) ** m) * gc * pair.rgamma_prod()
        s, n, last, ok = _log_series(up, m, w, up.digamma_sum())
        return _pack(p1 * f1 + p2 * s, n + m, abs(p2) * last, ok)
    k = -m
    down = pair.shift(-k)
    p1 = math.factorial(k - 1) * gc * pair.rgamma_prod() * w ** (-k)
    f1 = _finite_sum(down, k, w)
    p2 = -((-1.0) ** k) * gc * down.rgamma_prod()
    if p2 == 0.0:
        return _pack(p1 * f1, k, 0.0, True)
    s, n, last, ok = _log_series(pair, k, w, pair.digamma_sum())
    return _pack(p1 * f1 + p2 * s, n + k, abs(p2) * last, ok)


def _transformed(pair, c: float, s: float, x: float) -> SeriesEval:
    # z -> 1 - z connection formula for non-integer c - a - b
    w = 1.0 - x
    gc = gamma_fn(c)
    refl = pair.reflect(c)
    p1 = gc * gamma_fn(s) * refl.rgamma_prod()
    p2 = gc * gamma_fn(-s) * pair.rgamma_prod() * w**s
    value = 0.0
    terms = 0
    trunc = 0.0
    ok = True
    for pref, pr, lower in ((p1, pair, 1.0 - s), (p2, refl, 1.0 + s)):
        if pref == 0.0:
            continue
        f, n, last, conv = _sum_series(pr, lower, w)
        value += pref * f
        terms += n
        trunc += abs(pref) * last
        ok = ok and conv
    return _pack(value, max(terms, 1), trunc, ok)


def _pack(value: float, terms: int, trunc: float, ok: bool) -> SeriesEval:
    if not ok:
        raise NonConvergence(f"2F1 series did not converge within {MAX_TERMS} terms")
    converged = trunc <= CONVERGENCE_TOL * max(1.0, abs(value))
    return SeriesEval(float(value), int(terms), converged, float(trunc))


def _evaluate(pair, c: float, x: float) -> SeriesEval:
    c = float(c)
    x = float(x)
    if _is_nonpositive_integer(c):
        raise ParameterError(f"lower parameter {c} is a nonpositive integer")
    if not -1.0 < x < 1.0:
        raise ParameterError(f"argument {x} outside (-1, 1)")
    if pair.degree() is not None or x <= X_SWITCH:
        return _pack(*_sum_series(pair, c, x))
    s = c - pair.total()
    m = round(s)
    if abs(s - m) <= _SNAP_INTEGER * max(1.0, abs(m)):
        return _integer_case(pair, c, int(m), x)
    if abs(s - m) < _NEAR_INTEGER:
        if x <= _NEAR_INTEGER_DIRECT_MAX:
            return _pack(*_sum_series(pair, c, x))
        return _near_integer(pair, c, int(m), x)
    return _transformed(pair, c, s, x)


def _near_integer(pair, c: float, m: int, x: float) -> SeriesEval:
    # F / Gamma(c) is entire in c: interpolate it through the exact integer
    # point and well-separated neighbours where the connection formula is stable
    c0 = pair.total() + m
    h = 1e-3
    nodes = (-2.0, -1.0, 0.0, 1.0, 2.0)
    vals = []
    terms = 0
    trunc = 0.0
    for k in nodes:
        ck = c0 + k * h
        ev = _integer_case(pair, ck, m, x) if k == 0 else _transformed(pair, ck, m + k * h, x)
        vals.append(ev.value * rgamma(ck))
        terms += ev.terms_used
        trunc = max(trunc, ev.truncation_estimate)
    t = (c - c0) / h
    value = 0.0
    for i, ki in enumerate(nodes):
        w = 1.0
        for j, kj in enumerate(nodes):
            if j != i:
                w *= (t - kj) / (ki - kj)
        value += w * vals[i]
    return _pack(value * gamma_fn(c), terms, trunc, True)


def hyp2f1(kappa: float, iota: float, upsilon: float, x: float) -> SeriesEval:
    """Gauss hypergeometric function 2F1(kappa, iota; upsilon; x) for |x| < 1.

    Above ``X_SWITCH`` the z -> 1-z connection formulas are used, with the
    logarithmic variants when upsilon - kappa - iota is an integer.
    """
    return _evaluate(_RealPair(kappa, iota), upsilon, x)


def hyp2f1_sym(A: float, gamma_sq: float, upsilon: float, x: float) -> SeriesEval:
    """2F1(A + g, A - g; upsilon; x) with g**2 = gamma_sq of either sign.

    Coefficient ratios are ((A + j - 1)**2 - gamma_sq) / (j (upsilon + j - 1)),
    so a purely imaginary g never leaves real arithmetic.
    """
    return _evaluate(_SymPair(A, gamma_sq), upsilon, x)


def gauss_limit_regime(kappa: float, iota: float, upsilon: float) -> LimitRegime:
    """Leading term of 2F1(kappa, iota; upsilon; x) as x -> 1-."""
    if _is_nonpositive_integer(upsilon):
        raise ParameterError(f"lower parameter {upsilon} is a nonpositive integer")
    s = upsilon - kappa - iota
    g = gamma_fn(upsilon)
    if s > 0:
        coef = g * gamma_fn(s) * rgamma(upsilon - kappa) * rgamma(upsilon - iota)
        return LimitRegime(LimitKind.FINITE_GAUSS, coef, 0.0)
    if s == 0:
        return LimitRegime(LimitKind.LOGARITHMIC, g * rgamma(kappa) * rgamma(iota), 0.0)
    coef = g * gamma_fn(-s) * rgamma(kappa) * rgamma(iota)
    return LimitRegime(LimitKind.POWER_BLOWUP, coef, s)


def jacobi_Q(n: int, alpha: float, beta: float, x, d: float = 1.0):
    """Jacobi polynomial 2F1(-n, n + alpha + beta + 1; alpha + 1; 1 - x/d).

    Summed as the terminating series, which loses digits to cancellation
    once n exceeds roughly 15; ``spectral`` uses a recurrence for large n.
    Accepts scalar or array ``x``.
    """
    if alpha <= -1 or beta <= -1:
        raise ParameterError("Jacobi polynomials need alpha, beta > -1")
    if n < 0 or int(n) != n:
        raise ParameterError("degree must be a nonnegative integer")
    n = int(n)
    z = 1.0 - np.asarray(x, dtype=float) / d
    b = n + alpha + beta + 1.0
    c = alpha + 1.0
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(n):
        term = term * ((-n + k) * (b + k) / ((c + k) * (k + 1))) * z
        total = total + term
    if total.ndim == 0:
        return float(total)
    return total
