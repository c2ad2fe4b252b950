"""
Scale-safe scalar primitives.

Every quantity of size :math:`e^{\\varphi(z)}` is carried in natural-log
scale.  This module provides signed log-reals, log-complex numbers, their
sums, a quadrature for positive integrals of the form
:math:`\\int e^{g(t)}\\,dt` that returns the logarithm of the result, and a
bracketed root finder for increasing functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .exceptions import BracketError, QuadratureError

__all__ = [
    "LogReal",
    "LogComplex",
    "log_sum_exp",
    "complex_log_sum",
    "laplace_quadrature",
    "monotone_root",
    "CANCELLATION_RTOL",
    "OVERFLOW_LOG",
]

#: Relative size (w.r.t. the largest term) below which a sum is declared zero.
CANCELLATION_RTOL = 1e-13

#: Largest log-magnitude that is ever exponentiated directly.
OVERFLOW_LOG = 700.0

_TWO_PI = 2.0 * math.pi


def _wrap_phase(theta):
    """Map angles into (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, _TWO_PI) - np.pi
    wrapped = np.where(wrapped <= -np.pi, np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


# ==========
# Log scalars
# ==========

@dataclass(frozen=True)
class LogReal:
    """
    A signed real number stored as ``sign * exp(log_mag)``.

    Parameters
    ----------
    log_mag : float
        Natural logarithm of the magnitude; ``-inf`` encodes zero.
    sign : int
        One of ``+1``, ``-1`` or ``0``.
    cancelled : bool
        Set by :func:`log_sum_exp` when the value is zero only because of
        cancellation below :data:`CANCELLATION_RTOL`.
    """

    log_mag: float
    sign: int = 1
    cancelled: bool = False

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if math.isnan(self.log_mag):
            raise ValueError("log_mag is NaN")
        if (self.sign == 0) != (self.log_mag == -math.inf):
            # normalise both representations of zero
            object.__setattr__(self, "sign", 0)
            object.__setattr__(self, "log_mag", -math.inf)

    @classmethod
    def zero(cls, cancelled=False):
        return cls(-math.inf, 0, cancelled)

    @classmethod
    def from_float(cls, x):
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def is_zero(self):
        return self.sign == 0

    def to_float(self):
        """Ordinary float; ``inf`` when the magnitude overflows."""
        if self.sign == 0:
            return 0.0
        if self.log_mag > OVERFLOW_LOG:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_mag)

    def __neg__(self):
        return LogReal(self.log_mag, -self.sign)

    def __mul__(self, other):
        if not isinstance(other, LogReal):
            other = LogReal.from_float(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        return LogReal(self.log_mag + other.log_mag, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogReal):
            other = LogReal.from_float(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.sign == 0:
            return LogReal.zero()
        return LogReal(self.log_mag - other.log_mag, self.sign * other.sign)

    def __add__(self, other):
        if not isinstance(other, LogReal):
            other = LogReal.from_float(other)
        return log_sum_exp([self, other])

    __radd__ = __add__

    def __pow__(self, k):
        if self.sign < 0:
            raise ValueError("real power of a negative LogReal")
        if self.sign == 0:
            return LogReal.zero()
        return LogReal(self.log_mag * k, 1)


@dataclass(frozen=True)
class LogComplex:
    """
    A complex number stored as ``exp(log_mag + 1j * phase)``.

    ``log_mag = -inf`` encodes zero, in which case ``phase`` is 0.
    """

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_mag) or math.isnan(self.phase):
            raise ValueError("NaN in LogComplex")
        if self.log_mag == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", _wrap_phase(self.phase))

    @classmethod
    def zero(cls):
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @property
    def is_zero(self):
        return self.log_mag == -math.inf

    def to_complex(self):
        if self.is_zero:
            return 0j
        if self.log_mag > OVERFLOW_LOG:
            raise OverflowError("LogComplex magnitude exceeds float range")
        r = math.exp(self.log_mag)
        return complex(r * math.cos(self.phase), r * math.sin(self.phase))

    def conjugate(self):
        return LogComplex(self.log_mag, -self.phase)

    def __mul__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def __add__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return complex_log_sum([self, other])

    __radd__ = __add__


# =========
# Summation
# =========

def log_sum_exp(terms: Iterable[LogReal]) -> LogReal:
    """
    Sum signed log-reals without leaving log scale.

    The terms are rescaled by the largest magnitude and added with
    :func:`math.fsum`, so the result does not depend on the order of the
    terms beyond the final rounding.  A sum whose magnitude falls below
    ``CANCELLATION_RTOL`` times the largest term is returned as zero with
    ``cancelled=True``.

    Examples
    --------
    >>> log_sum_exp([LogReal(math.log(2)), LogReal(math.log(3))]).to_float()
    5.000000000000001
    """
    terms = [t for t in terms if t.sign != 0]
    if not terms:
        return LogReal.zero()
    top = max(t.log_mag for t in terms)
    if top == math.inf:
        signs = {t.sign for t in terms if t.log_mag == math.inf}
        if len(signs) > 1:
            raise ArithmeticError("inf - inf in log_sum_exp")
        return LogReal(math.inf, signs.pop())
    s = math.fsum(t.sign * math.exp(t.log_mag - top) for t in terms)
    if abs(s) < CANCELLATION_RTOL:
        return LogReal.zero(cancelled=True)
    return LogReal(top + math.log(abs(s)), 1 if s > 0 else -1)


def complex_log_sum(terms: Iterable[LogComplex]) -> LogComplex:
    """
    Sum log-complex numbers after rescaling by the largest magnitude.

    Sums cancelling below ``CANCELLATION_RTOL`` of the largest term are
    returned as exact zero.
    """
    terms = [t for t in terms if not t.is_zero]
    if not terms:
        return LogComplex.zero()
    log_mag = np.array([t.log_mag for t in terms])
    phase = np.array([t.phase for t in terms])
    top = float(log_mag.max())
    scaled = np.exp(log_mag - top)
    re = math.fsum(scaled * np.cos(phase))
    im = math.fsum(scaled * np.sin(phase))
    mag = math.hypot(re, im)
    if mag < CANCELLATION_RTOL:
        return LogComplex.zero()
    return LogComplex(top + math.log(mag), math.atan2(im, re))


def logsumexp_complex(log_mag, phase, axis=None):
    """
    Array version of :func:`complex_log_sum`.

    Returns ``(log_mag, phase)`` arrays reduced along ``axis``.  Zero sums
    (including cancellation) get ``log_mag = -inf``.
    """
    log_mag = np.asarray(log_mag, dtype=float)
    phase = np.asarray(phase, dtype=float)
    top = np.max(log_mag, axis=axis, keepdims=True)
    safe_top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(invalid="ignore", under="ignore"):
        scaled = np.exp(log_mag - safe_top)
    re = np.sum(scaled * np.cos(phase), axis=axis, keepdims=True)
    im = np.sum(scaled * np.sin(phase), axis=axis, keepdims=True)
    mag = np.hypot(re, im)
    with np.errstate(divide="ignore"):
        out_mag = np.where((mag < CANCELLATION_RTOL) | ~np.isfinite(top),
                           -np.inf, safe_top + np.log(mag))
    out_phase = np.where(np.isfinite(out_mag), np.arctan2(im, re), 0.0)
    if axis is None:
        return float(out_mag.ravel()[0]), float(out_phase.ravel()[0])
    return np.squeeze(out_mag, axis=axis), np.squeeze(out_phase, axis=axis)


# ==========
# Quadrature
# ==========

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
_LOG_GL_WEIGHTS = np.log(_GL_WEIGHTS)
_EPS = float(np.finfo(float).eps)


def _eval_log_integrand(g, x):
    try:
        vals = np.asarray(g(x), dtype=float)
        if vals.shape != x.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(g(xi)) for xi in x])
    if np.any(np.isnan(vals)) or np.any(vals == np.inf):
        raise QuadratureError("integrand exponent is NaN or +inf")
    return vals


def _panel_log(g, a, b, noise=None):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GL_NODES
    raw = _eval_log_integrand(g, x)
    if noise is not None:
        finite = raw[np.isfinite(raw)]
        if finite.size:
            noise[0] = max(noise[0], float(np.max(np.abs(finite))))
    vals = raw + _LOG_GL_WEIGHTS + math.log(half)
    top = vals.max()
    if top == -np.inf:
        return -math.inf
    return float(top + math.log(np.sum(np.exp(vals - top))))


def _log_abs_diff(a, b):
    """log|e^a - e^b| for log values a, b."""
    hi, lo = max(a, b), min(a, b)
    if hi == -math.inf or hi == lo:
        return -math.inf
    return hi + math.log(-math.expm1(lo - hi))


def laplace_quadrature(g: Callable, peak_hint: float, width_hint: float,
                       lower: float = -math.inf, upper: float = math.inf,
                       offset: float = 0.0, cutoff: float = 34.0,
                       rtol: float = 1e-13, max_panels: int = 20000,
                       g_scale: float = 0.0) -> LogReal:
    """
    Logarithm of a positive integral :math:`\\int_{lower}^{upper} e^{g(t)} dt`.

    Panels of width ``width_hint`` are laid out around ``peak_hint`` and
    added outwards on both sides until a panel (and its successor) falls
    ``cutoff`` log-units below the running total.  Each panel uses a 15-point
    Gauss-Legendre rule with dyadic refinement until the two-level estimates
    agree to ``rtol`` relative to the running total.

    Parameters
    ----------
    g : callable
        Exponent of the integrand.  Called with 1-D arrays when it supports
        them (falls back to scalar calls); may return ``-inf``.
    peak_hint, width_hint : float
        Approximate maximiser of ``g`` and the scale on which it decays,
        typically ``(psi''(peak))**-0.5``.
    lower, upper : float
        Integration limits (default: the whole real line).
    offset : float
        Constant added to the final log value.  Integrating ``g + c`` is
        done exactly by passing ``offset=c``.
    g_scale : float
        Size of the terms that cancel inside ``g`` (for example when a large
        constant has been subtracted).  Their rounding error sets a floor on
        the attainable relative accuracy; the size of ``g`` itself is
        accounted for automatically.

    Returns
    -------
    LogReal
        ``log_mag`` is the log of the integral (``sign=0`` if it is zero).

    Raises
    ------
    QuadratureError
        After ``max_panels`` Gauss panels without convergence.  The partial
        value is attached to the exception.
    """
    if not width_hint > 0:
        raise ValueError("width_hint must be positive")
    if not lower < upper:
        raise ValueError("empty integration range")
    peak = min(max(peak_hint, lower), upper)

    accepted = []
    count = [0]
    # largest |g| seen; its rounding error bounds the attainable accuracy
    gmax = [abs(float(g_scale))]

    def total():
        if not accepted:
            return -math.inf
        top = max(accepted)
        if top == -math.inf:
            return top
        return top + math.log(math.fsum(math.exp(v - top) for v in accepted))

    def integrate_panel(a, b):
        # explicit stack of (a, b, whole, depth)
        start = total()
        stack = [(a, b, _panel_log(g, a, b, gmax), 0)]
        count[0] += 1
        contrib = []
        while stack:
            lo, hi, whole, depth = stack.pop()
            mid = 0.5 * (lo + hi)
            if hi - lo <= 1e-12 * max(1.0, abs(mid)):
                # at float resolution in t: further splits only see rounding
                contrib.append(float(whole))
                continue
            left = _panel_log(g, lo, mid, gmax)
            right = _panel_log(g, mid, hi, gmax)
            count[0] += 2
            both = np.logaddexp(left, right)
            scale = max(start, both, max(contrib) if contrib else -math.inf)
            err = _log_abs_diff(whole, both)
            tol = max(rtol, 64.0 * _EPS * gmax[0])
            if err <= math.log(tol) + scale or depth >= 60:
                contrib.append(float(both))
            else:
                stack.append((lo, mid, left, depth + 1))
                stack.append((mid, hi, right, depth + 1))
            if count[0] > max_panels:
                # everything accepted so far, including this panel's pieces
                part = float(np.logaddexp.reduce([total(), *contrib, -math.inf]))
                raise QuadratureError(
                    "laplace_quadrature did not converge",
                    partial=LogReal(part + offset, 1) if part > -math.inf else None)
        value = -math.inf
        for c in contrib:
            value = float(np.logaddexp(value, c))
        return value

    half = 0.5 * width_hint
    a0, b0 = max(peak - half, lower), min(peak + half, upper)
    if a0 < b0:
        accepted.append(integrate_panel(a0, b0))

    for direction in (+1, -1):
        edge = b0 if direction > 0 else a0
        limit = upper if direction > 0 else lower
        k = 0
        quiet = 0
        while edge != limit:
            width = width_hint * min(2.0 ** (k // 8), 64.0)
            nxt = edge + direction * width
            nxt = min(nxt, limit) if direction > 0 else max(nxt, limit)
            lo, hi = (edge, nxt) if direction > 0 else (nxt, edge)
            val = integrate_panel(lo, hi)
            accepted.append(val)
            edge = nxt
            k += 1
            tot = total()
            quiet = quiet + 1 if val < tot - cutoff else 0
            if quiet >= 2:
                break

    result = total()
    if result == -math.inf:
        return LogReal.zero()
    return LogReal(result + offset, 1)


# ============
# Root finding
# ============

def monotone_root(f: Callable[[float], float], target: float,
                  bracket: Sequence[float]) -> float:
    """
    Solve ``f(t) = target`` for a strictly increasing ``f`` on ``bracket``.

    Uses Brent's method (bisection safeguarded secant/inverse-quadratic
    steps) driven to machine precision in ``t``.

    Raises
    ------
    BracketError
        If ``f(lo) > target`` or ``f(hi) < target``; the message names the
        failing endpoint.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if lo > hi:
        raise BracketError(f"bracket is reversed: lo={lo} > hi={hi}")
    tol = 1e-12 * max(1.0, abs(target))
    flo = f(lo)
    if flo > target + tol:
        raise BracketError(
            f"lower endpoint lo={lo} has f(lo)={flo} > target={target}")
    fhi = f(hi)
    if fhi < target - tol:
        raise BracketError(
            f"upper endpoint hi={hi} has f(hi)={fhi} < target={target}")
    if lo == hi or abs(flo - target) == 0.0:
        return lo
    if abs(fhi - target) == 0.0:
        return hi
    if flo >= target:
        return lo
    if fhi <= target:
        return hi
    return brentq(lambda x: f(x) - target, lo, hi, xtol=1e-300,
                  rtol=4 * np.finfo(float).eps, maxiter=500)
