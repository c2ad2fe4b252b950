"""
The reference sequence and the norms attached to it.

The reference radii are :math:`\\sigma_n = e^{y_n}` with
:math:`\\psi'(y_n) = pn + 2`.  Around them live the piecewise-affine
minorant :math:`\\ell`, the norms of the monomials and the norms of the
point-evaluation functionals :math:`L_z`.  All norms are returned in
natural-log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import EvaluationError, HorizonError, WeightError
from .numerics import LogReal, laplace_quadrature, log_sum_exp
from .weight import (RadialWeight, SpaceParams, eta, psi_calculus,
                     psi_prime_at_zero)

__all__ = [
    "ReferenceSequence",
    "NormTable",
    "build_reference",
    "reference_covering",
    "ell",
    "log_monomial_norm",
    "norm_table",
    "log_evaluation_norm",
    "partial_sum_y",
    "KERNEL_SERIES_DROP",
]

#: Terms of the kernel series this many log-units below the largest are dropped.
KERNEL_SERIES_DROP = 40.0


@dataclass(frozen=True, eq=False)
class ReferenceSequence:
    """
    Log-radii ``y[0..n_max]`` of the reference sequence.

    ``y[n]`` solves :math:`\\psi'(y) = p(n + offset) + 2`; ``offset`` is 0
    unless :math:`\\psi'(0^+) > 2` (see :func:`build_reference`).
    """

    weight: RadialWeight
    p: float
    y: np.ndarray
    offset: int = 0
    prefix: np.ndarray = field(init=False, repr=False)
    psi: np.ndarray = field(init=False, repr=False)
    dpsi: np.ndarray = field(init=False, repr=False)
    ddpsi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        prefix = np.cumsum(y)
        prefix.setflags(write=False)
        object.__setattr__(self, "prefix", prefix)
        psi, d1, d2, _ = psi_calculus(self.weight, SpaceParams(self.p), y)
        # psi'(y_n) is p(n+offset)+2 by construction; store the exact target
        d1 = self.p * (np.arange(y.size) + self.offset) + 2.0
        for name, arr in (("psi", psi), ("dpsi", d1), ("ddpsi", d2)):
            arr = np.asarray(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_max(self) -> int:
        return int(self.y.size - 1)

    @property
    def weight_tag(self) -> str:
        return self.weight.tag

    @property
    def space(self) -> SpaceParams:
        return SpaceParams(self.p)

    def __len__(self):
        return int(self.y.size)

    def bracket(self, t):
        """
        Index ``m`` with ``y[m] <= t < y[m+1]`` (left-closed).

        Values below ``y[0]`` give ``-1``; values at or above ``y[-1]``
        give ``n_max``.
        """
        return np.searchsorted(self.y, t, side="right") - 1


@lru_cache(maxsize=256)
def _build_cached(w: RadialWeight, sp: SpaceParams, n_max: int):
    s0 = psi_prime_at_zero(w, sp)
    # index origin: first n with pn + 2 >= psi'(0+)
    offset = max(0, math.ceil((s0 - 2.0) / sp.p - 1e-12))
    targets = sp.p * (np.arange(n_max + 1) + offset) + 2.0
    if w.family == "alpha":
        a = w.alpha
        y = (targets / (sp.p * a)) ** (1.0 / (a - 1.0))
    else:
        y = np.array([eta(w, sp, s) for s in targets])
    if np.any(np.diff(y) <= 0):
        raise WeightError("reference radii are not strictly increasing; "
                          "psi' is not strictly increasing")
    return ReferenceSequence(w, sp.p, y, offset)


def build_reference(w: RadialWeight, sp: SpaceParams, n_max: int) -> ReferenceSequence:
    """
    Solve :math:`\\psi'(y_n) = pn + 2` for ``0 <= n <= n_max``.

    For weights with :math:`\\psi'(0^+) > 2` the equation has no solution
    for small ``n``; indexing then starts at the smallest ``n`` for which
    it does, and that ``n`` is stored as ``offset``.

    Examples
    --------
    >>> build_reference(RadialWeight.alpha_model(2), SpaceParams(2), 4).y
    array([0.5, 1. , 1.5, 2. , 2.5])
    """
    if sp.is_infinite:
        raise WeightError("the reference sequence for p = inf is built with p = 2")
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return _build_cached(w, sp, n_max)


def reference_covering(w: RadialWeight, sp: SpaceParams, t: float,
                       extra: int = 2) -> ReferenceSequence:
    """A reference sequence whose last radius exceeds ``t`` by ``extra`` knots."""
    s = psi_calculus(w, sp, max(float(t), 0.0))[1]
    need = max(1, math.ceil((s - 2.0) / sp.p) + extra + 1)
    # round up so repeated calls share cached builds
    n_max = 16
    while n_max < need:
        n_max *= 2
    return build_reference(w, sp, n_max)


def ell(ref: ReferenceSequence, t, extrapolate: bool = False):
    """
    The piecewise-affine function
    :math:`\\ell(t) = (pm+2)t - p\\sum_{k=0}^m y_k` on :math:`[y_m, y_{m+1})`.

    ``t`` must lie in ``[y_0, y_{n_max}]`` unless ``extrapolate`` is set, in
    which case the first piece is continued below ``y_0`` and the last
    (``m = n_max``) above ``y_{n_max}``.
    """
    arr = np.asarray(t, dtype=float)
    if not extrapolate:
        lo, hi = ref.y[0], ref.y[-1]
        if np.any(arr < lo) or np.any(arr > hi):
            raise HorizonError(
                f"ell is defined on [{lo}, {hi}] for this reference sequence")
    m = np.clip(ref.bracket(arr), 0, ref.n_max)
    out = ref.dpsi[m] * arr - ref.p * ref.prefix[m]
    if np.ndim(out) == 0:
        return float(out)
    return out


@lru_cache(maxsize=8192)
def _log_norm_p(w: RadialWeight, sp: SpaceParams, n: int) -> float:
    """log of ||z^n||^p by quadrature (the p-th power, not the norm)."""
    p = sp.p
    slope = p * n + 2.0
    left = LogReal(-math.log(slope))    # integral over t <= 0
    s0 = psi_prime_at_zero(w, sp)
    peak = eta(w, sp, slope) if slope > s0 else 0.0
    d2 = psi_calculus(w, sp, max(peak, 1e-3))[2]
    width = 1.0 / math.sqrt(d2) if d2 > 0 else 1.0
    top = slope * peak - psi_calculus(w, sp, peak)[0]

    def g(t):
        return slope * t - psi_calculus(w, sp, t)[0] - top

    right = laplace_quadrature(g, peak, width, lower=0.0, offset=top,
                               g_scale=abs(top) + slope * peak)
    total = log_sum_exp([left, right])
    return math.log(2.0 * math.pi) + total.log_mag


def log_monomial_norm(w: RadialWeight, sp: SpaceParams, n: int,
                      method: str = "quadrature") -> LogReal:
    """
    :math:`\\|z^n\\|_{\\varphi,p}` in log scale.

    ``method="quadrature"`` integrates
    :math:`2\\pi\\int e^{(pn+2)t-\\psi(t)}dt` (the part ``t <= 0`` in closed
    form) and takes the ``p``-th root.  ``method="asymptotic"`` returns
    :math:`\\frac1p[-\\tfrac12\\log\\psi''(y_n) + (pn+2)y_n - \\psi(y_n)]`
    with no constant, so the two differ by a bounded amount.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    if sp.is_infinite:
        raise WeightError("monomial norms need finite p")
    if method == "quadrature":
        return LogReal(_log_norm_p(w, sp, n) / sp.p)
    if method == "asymptotic":
        slope = sp.p * n + 2.0
        y = eta(w, sp, slope)
        psi, _, d2, _ = psi_calculus(w, sp, y)
        return LogReal((-0.5 * math.log(d2) + slope * y - psi) / sp.p)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class NormTable:
    """``log_monomial_norm[n]`` is :math:`\\log\\|z^n\\|_{\\varphi,p}`."""

    log_monomial_norm: tuple
    method: str
    p: float
    weight_tag: str


def norm_table(w: RadialWeight, sp: SpaceParams, n_max: int,
               method: str = "quadrature") -> NormTable:
    values = tuple(log_monomial_norm(w, sp, n, method).log_mag
                   for n in range(int(n_max) + 1))
    return NormTable(values, method, sp.p, w.tag)


def _point_t(z) -> float:
    return float(getattr(z, "t", z))


def _series_terms_peak(term, start):
    """
    Largest value of a concave sequence ``term(m)``, ``m >= 0``, together
    with the index range holding everything within the truncation drop.
    """
    m = max(0, int(start))
    best = term(m)
    # climb to the peak
    if m > 0 and term(m - 1) > best:
        step = -1
    else:
        step = 1
    while True:
        nxt = m + step
        if nxt < 0:
            break
        val = term(nxt)
        if val <= best:
            break
        m, best = nxt, val
    lo = hi = m
    while lo > 0 and term(lo - 1) > best - KERNEL_SERIES_DROP:
        lo -= 1
    while term(hi + 1) > best - KERNEL_SERIES_DROP:
        hi += 1
    return m, lo, hi


def log_evaluation_norm(w: RadialWeight, sp: SpaceParams, z,
                        method: str = "theorem",
                        ref: ReferenceSequence | None = None,
                        n_max: int | None = None) -> LogReal:
    """
    Norm of the evaluation functional :math:`L_z` in log scale.

    Parameters
    ----------
    z : LogPoint or float
        The point, or just its log-modulus ``t``; the norm is radial.
    method : {"theorem", "series", "monomial_lower"}
        ``theorem``: the two-term asymptotic
        :math:`\\frac1p\\log[(\\psi''(t))^{1/2}e^{-2t}(e^{A_{n+1}(t)} + e^{A_n(t)})]`
        with :math:`A_k(t)=\\psi'(y_k)(t-y_k)+\\psi(y_k)` and ``n`` the
        bracketing index.  Below ``y_0`` only the ``y_0`` term is kept and
        :math:`\\psi''` is read at ``max(t, y_0)``.
        ``series`` (``p = 2`` only): :math:`\\tfrac12\\log\\sum_m
        e^{2mt}/\\|z^m\\|^2`, truncated :data:`KERNEL_SERIES_DROP` below
        the largest term.
        ``monomial_lower``: :math:`\\sup_m (mt - \\log\\|z^m\\|)`, a lower
        bound valid for every ``p``; ``n_max`` caps ``m``.
    ref : ReferenceSequence, optional
        Used by the theorem method; built on demand when omitted.
    """
    t = _point_t(z)
    p = sp.p
    if sp.is_infinite:
        raise WeightError("evaluation norms need finite p")
    if method == "theorem":
        if t == -math.inf:
            raise EvaluationError("the theorem formula is not defined at z = 0")
        if ref is None or ref.y[-1] <= t:
            ref = reference_covering(w, sp, t)
        n = int(ref.bracket(t))
        _, _, d2, _ = psi_calculus(w, sp, max(t, float(ref.y[0])))

        def affine(k):
            return ref.dpsi[k] * (t - ref.y[k]) + ref.psi[k]

        if n < 0:
            inner = affine(0)
        else:
            inner = float(np.logaddexp(affine(n + 1), affine(n)))
        return LogReal((0.5 * math.log(d2) - 2.0 * t + inner) / p)

    if method == "series":
        if p != 2.0:
            raise EvaluationError("the kernel series is available for p = 2 only")
        if t == -math.inf:
            return LogReal(-_log_norm_p(w, sp, 0) / 2.0)

        def term(m):
            return 2.0 * m * t - _log_norm_p(w, sp, m)

        start = max(0, (psi_calculus(w, sp, max(t, 0.0))[1] - 2.0) / 2.0)
        _, lo, hi = _series_terms_peak(term, start)
        total = log_sum_exp([LogReal(term(m)) for m in range(lo, hi + 1)])
        return LogReal(0.5 * total.log_mag)

    if method == "monomial_lower":
        if t == -math.inf:
            return LogReal(-_log_norm_p(w, sp, 0) / p)

        def term(m):
            return m * t - _log_norm_p(w, sp, m) / p

        if n_max is not None:
            return LogReal(max(term(m) for m in range(int(n_max) + 1)))
        start = max(0, (psi_calculus(w, sp, max(t, 0.0))[1] - 2.0) / p)
        m, _, _ = _series_terms_peak(term, start)
        return LogReal(term(m))

    raise ValueError(f"unknown method {method!r}")


def partial_sum_y(ref: ReferenceSequence, m: int):
    """
    ``(exact, asymptotic)`` for :math:`\\sum_{k=1}^m y_k`.

    The asymptotic value is
    :math:`[\\psi'(y_m)y_m - \\psi(y_m) + \\tfrac p2 y_m]/p`; the two differ
    by a bounded amount.
    """
    m = int(m)
    if not 0 <= m <= ref.n_max:
        raise HorizonError(f"m={m} outside 0..{ref.n_max}")
    exact = float(ref.prefix[m] - ref.y[0])
    y = ref.y[m]
    asym = float((ref.dpsi[m] * y - ref.psi[m] + 0.5 * ref.p * y) / ref.p)
    return exact, asym
