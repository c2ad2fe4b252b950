"""
Canonical products over point sequences and the interpolation series.

For a sequence :math:`\\Gamma` the canonical product is
:math:`G_\\Gamma(z) = \\prod_n (1 - z/\\gamma_n)`.  Values are carried in
log-polar form, since :math:`|G_\\Gamma|` grows like :math:`e^{\\varphi}`.
Only the nodes actually stored are multiplied.  Evaluating at ``z``
requires the last node to lie at least ``margin`` log-units beyond
``|z|``, which keeps the neglected factors within
:math:`2e^{-margin}/(1 - e^{-gap})` of 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import HorizonError, SequenceError
from .geometry import LogPoint, PointSequence, decompose, delta_N_estimate
from .numerics import (LogComplex, LogReal, _wrap_phase, laplace_quadrature,
                       logsumexp_complex)
from .reference import build_reference, log_evaluation_norm
from .weight import RadialWeight, SpaceParams, psi_calculus

__all__ = [
    "CanonicalProduct",
    "CoefficientVector",
    "EnvelopeCheck",
    "log_abs_G",
    "log_G",
    "log_abs_G_derivative",
    "log_G_derivative",
    "envelope_ratio",
    "interpolate",
    "interpolant_norm",
    "log_one_minus_exp",
]

def log_one_minus_exp(a, b):
    """
    ``(log|1 - e^{a+ib}|, arg(1 - e^{a+ib}))`` for real arrays ``a, b``.

    Three regimes keep full relative accuracy: a complex ``expm1`` for
    ``|a| <= 1`` (accurate next to the zero at ``a = b = 0``), ``log1p`` for
    ``a < -1``, and the reflection :math:`1 - e^u = -e^u(1 - e^{-u})` for
    ``a > 1``.  The value ``-inf`` marks an exact zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    logabs = np.empty(a.shape)
    arg = np.empty(a.shape)

    mid = np.abs(a) <= 1.0
    if np.any(mid):
        am, bm = a[mid], b[mid]
        s = np.sin(0.5 * bm)
        # expm1(a + ib) = (expm1(a) cos b - 2 sin^2(b/2)) + i e^a sin b
        re = np.expm1(am) * np.cos(bm) - 2.0 * s * s
        im = np.exp(am) * np.sin(bm)
        with np.errstate(divide="ignore"):
            logabs[mid] = np.log(np.hypot(re, im))
        arg[mid] = np.arctan2(-im, -re)

    low = a < -1.0
    if np.any(low):
        al, bl = a[low], b[low]
        e = np.exp(al)
        logabs[low] = 0.5 * np.log1p(e * (e - 2.0 * np.cos(bl)))
        arg[low] = np.arctan2(-e * np.sin(bl), 1.0 - e * np.cos(bl))

    high = a > 1.0
    if np.any(high):
        ah, bh = a[high], b[high]
        e = np.exp(-ah)
        logabs[high] = ah + 0.5 * np.log1p(e * (e - 2.0 * np.cos(bh)))
        inner = np.arctan2(e * np.sin(bh), 1.0 - e * np.cos(bh))
        arg[high] = np.pi + bh + inner
    return logabs, np.asarray(_wrap_phase(arg), dtype=float).reshape(a.shape)


@dataclass(eq=False)
class CanonicalProduct:
    """
    :math:`G_\\Gamma(z) = \\prod_n (1 - z/\\gamma_n)` over a finite sequence.

    Parameters
    ----------
    sequence : PointSequence
        Distinct nodes, none at the origin.
    margin : float or None
        Log-units by which the last node must exceed ``|z|``.  ``None``
        evaluates the finite product with no horizon check.
    """

    sequence: PointSequence
    margin: Optional[float] = 10.0
    _dcache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        seq = self.sequence
        if len(seq) == 0:
            raise SequenceError("a canonical product needs at least one node")
        if np.any(seq.t == -np.inf):
            raise SequenceError("a node at the origin cannot enter 1 - z/gamma")
        if seq.has_duplicates():
            raise SequenceError("repeated nodes: G' would vanish there")

    @property
    def t(self):
        return self.sequence.t

    @property
    def theta(self):
        return self.sequence.theta

    def check_horizon(self, t):
        if self.margin is None:
            return
        t = float(np.max(t))
        need = t + self.margin
        if self.t[-1] < need:
            raise HorizonError(
                f"last node at t={self.t[-1]:.6g}; evaluating at t={t:.6g} "
                f"needs t_last >= {need:.6g}")

    def node_index(self, z: LogPoint) -> Optional[int]:
        lo = int(np.searchsorted(self.t, z.t, side="left"))
        hi = int(np.searchsorted(self.t, z.t, side="right"))
        for k in range(lo, hi):
            if self.theta[k] == z.theta:
                return k
        return None

    def factor_logs(self, t, theta):
        """Per-node ``log(1 - z/gamma_n)`` for arrays of points, shape ``(len(t), len(nodes))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        a = t[:, None] - self.t[None, :]
        b = theta[:, None] - self.theta[None, :]
        return log_one_minus_exp(a, b)

    def log_values(self, t, theta):
        """``(log|G|, arg G)`` at arrays of points (``-inf`` at nodes)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        self.check_horizon(t)
        la, ph = self.factor_logs(t, theta)
        return la.sum(axis=1), np.asarray(_wrap_phase(ph.sum(axis=1)), dtype=float)


def log_abs_G(cp: CanonicalProduct, z: LogPoint) -> LogReal:
    """
    :math:`\\log|G_\\Gamma(z)|`, exactly zero (``sign = 0``) at a node.

    Examples
    --------
    >>> cp = CanonicalProduct(PointSequence([0.0], [0.0]), margin=None)
    >>> round(log_abs_G(cp, LogPoint(math.log(2), math.pi)).log_mag, 12) == round(math.log(3), 12)
    True
    """
    la, _ = cp.log_values([z.t], [z.theta])
    if la[0] == -np.inf:
        return LogReal.zero()
    return LogReal(float(la[0]))


def log_G(cp: CanonicalProduct, z: LogPoint) -> LogComplex:
    """:math:`G_\\Gamma(z)` as a log-complex number."""
    la, ph = cp.log_values([z.t], [z.theta])
    if la[0] == -np.inf:
        return LogComplex.zero()
    return LogComplex(float(la[0]), float(ph[0]))


def log_G_derivative(cp: CanonicalProduct, k: int) -> LogComplex:
    """
    :math:`G_\\Gamma'(\\gamma_k) = -\\gamma_k^{-1}\\prod_{n \\ne k}(1 - \\gamma_k/\\gamma_n)`.

    Cached per node after the first call.
    """
    k = int(k)
    if not 0 <= k < len(cp.sequence):
        raise IndexError(f"node index {k} out of range")
    hit = cp._dcache.get(k)
    if hit is not None:
        return hit
    tk, thk = float(cp.t[k]), float(cp.theta[k])
    cp.check_horizon(tk)
    la, ph = cp.factor_logs([tk], [thk])
    la, ph = la[0], ph[0]
    mask = np.ones(la.size, dtype=bool)
    mask[k] = False
    if np.any(la[mask] == -np.inf):
        raise SequenceError(f"node {k} is repeated")
    val = LogComplex(float(la[mask].sum()) - tk,
                     float(ph[mask].sum()) + math.pi - thk)
    cp._dcache[k] = val
    return val


def log_abs_G_derivative(cp: CanonicalProduct, k: int) -> LogReal:
    """:math:`\\log|G_\\Gamma'(\\gamma_k)|`."""
    return LogReal(log_G_derivative(cp, k).log_mag)


def _log_dist_to_nodes(cp, z: LogPoint):
    la, _ = cp.factor_logs([z.t], [z.theta])
    # log|z - gamma_n| = t_n + log|1 - z/gamma_n|
    return float(np.min(cp.t + la[0]))


@dataclass(frozen=True)
class EnvelopeCheck:
    """
    Two-sided growth check of :math:`|G_\\Gamma(z)|^p e^{-p\\varphi(z)}`.

    ``log_value`` is that quantity's log, ``log_low`` and ``log_high``
    the logs of :math:`\\mathrm{dist}(z,\\Gamma)^p (1+|z|)^{-(2 + p/2 \\pm
    (p\\Delta_N + \\varepsilon))}`.  ``low_ok`` means
    ``log_value >= log_low - log C`` and ``high_ok`` means
    ``log_value <= log_high + log C``.  ``log_ratio`` is ``log_value`` minus
    the mid-point of the two sides.
    """

    low_ok: bool
    high_ok: bool
    log_ratio: float
    log_value: float
    log_low: float
    log_high: float
    delta_N: float

    @property
    def ok(self):
        return self.low_ok and self.high_ok


def envelope_ratio(cp: CanonicalProduct, w: RadialWeight, sp: SpaceParams,
                   z: LogPoint, N: int = 1, eps: float = 0.1,
                   delta_N: Optional[float] = None, C: float = 1e3) -> EnvelopeCheck:
    """
    Compare :math:`|G_\\Gamma(z)|^p e^{-p\\varphi(z)}` with
    :math:`\\mathrm{dist}(z,\\Gamma)^p/(1+|z|)^{2 + p/2 \\mp (p\\Delta_N + \\varepsilon)}`.

    ``delta_N`` defaults to the finite-horizon estimate for the sequence
    held by ``cp``.  At a node all three logs are ``-inf`` and the check
    passes with ``log_ratio = 0``.
    """
    p = sp.p
    if delta_N is None:
        ref = build_reference(w, sp, len(cp.sequence) - 1)
        delta_N = delta_N_estimate(decompose(cp.sequence, ref), ref, N).value
    la = log_abs_G(cp, z)
    if la.is_zero:
        return EnvelopeCheck(True, True, 0.0, -math.inf, -math.inf, -math.inf, delta_N)
    psi = psi_calculus(w, sp, z.t)[0] if z.t > 0 else 0.0
    value = p * la.log_mag - psi
    log_dist = _log_dist_to_nodes(cp, z)
    log1pz = float(np.logaddexp(0.0, z.t))
    base = p * log_dist - (2.0 + 0.5 * p) * log1pz
    spread = (p * delta_N + eps) * log1pz
    low, high = base - spread, base + spread
    logC = math.log(C)
    return EnvelopeCheck(bool(value >= low - logC), bool(value <= high + logC),
                         float(value - base), float(value), float(low),
                         float(high), float(delta_N))


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """
    Interpolation data :math:`v_n` on node indices.

    ``index`` and ``values`` are parallel arrays; indices not listed are 0.
    """

    index: np.ndarray
    values: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        idx = np.atleast_1d(np.asarray(self.index, dtype=int))
        val = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if idx.shape != val.shape:
            raise ValueError("index and values must have the same length")
        if idx.size and idx.min() < 0:
            raise ValueError("negative node index")
        if np.unique(idx).size != idx.size:
            raise ValueError("repeated node index")
        order = np.argsort(idx)
        object.__setattr__(self, "index", idx[order])
        object.__setattr__(self, "values", val[order])

    @classmethod
    def dense(cls, values, p=2.0):
        values = np.asarray(values, dtype=complex)
        return cls(np.arange(values.size), values, p)

    @classmethod
    def unit(cls, k, p=2.0):
        return cls([k], [1.0], p)

    def norm(self) -> float:
        """The :math:`\\ell^p` norm."""
        a = np.abs(self.values)
        if self.p == math.inf:
            return float(a.max()) if a.size else 0.0
        return float(np.sum(a ** self.p) ** (1.0 / self.p))

    def nonzero(self):
        keep = self.values != 0
        return self.index[keep], self.values[keep]


def _node_norms(cp, w, sp, idx):
    """log||L_{gamma_n}|| (theorem form) for node indices ``idx``."""
    return np.array([log_evaluation_norm(w, sp, float(cp.t[n])).log_mag for n in idx])


def _interpolant_prepare(cp, w, sp, v: CoefficientVector):
    """Per-term constants ``v_n ||L_n|| / G'(gamma_n)`` in log-polar form."""
    idx, vals = v.nonzero()
    if idx.size == 0:
        return None
    if idx.max() >= len(cp.sequence):
        raise HorizonError(f"coefficient index {idx.max()} beyond the {len(cp.sequence)} nodes")
    cp.check_horizon(cp.t[idx])
    lnorm = _node_norms(cp, w, sp, idx)
    dG = [log_G_derivative(cp, k) for k in idx]
    c_mag = np.log(np.abs(vals)) + lnorm - np.array([d.log_mag for d in dG])
    c_ph = np.angle(vals) - np.array([d.phase for d in dG])
    return idx, vals, lnorm, c_mag, c_ph


def _interpolant_eval(cp, prep, t, theta):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out_mag = np.full(t.shape, -np.inf)
    out_ph = np.zeros(t.shape)
    if prep is None:
        return out_mag, out_ph
    idx, vals, lnorm, c_mag, c_ph = prep
    cp.check_horizon(t)
    la, ph = cp.factor_logs(t, theta)          # (npts, nodes)
    logG = la.sum(axis=1)
    argG = ph.sum(axis=1)
    at_node = np.isneginf(la)
    # z - gamma_n = -gamma_n (1 - z/gamma_n)
    diff_mag = cp.t[idx][None, :] + la[:, idx]
    diff_ph = cp.theta[idx][None, :] + ph[:, idx] + math.pi
    node_rows = np.any(at_node, axis=1)
    rows = ~node_rows
    if np.any(rows):
        term_mag = c_mag[None, :] + logG[rows, None] - diff_mag[rows]
        term_ph = c_ph[None, :] + argG[rows, None] - diff_ph[rows]
        m, a = logsumexp_complex(term_mag, term_ph, axis=1)
        out_mag[rows] = m
        out_ph[rows] = a
    for r in np.flatnonzero(node_rows):
        k = int(np.flatnonzero(at_node[r])[0])
        hit = np.flatnonzero(idx == k)
        if hit.size:
            j = int(hit[0])
            out_mag[r] = math.log(abs(vals[j])) + lnorm[j]
            out_ph[r] = float(np.angle(vals[j]))
    return out_mag, np.asarray(_wrap_phase(out_ph), dtype=float).reshape(t.shape)


def _interpolant_logs(cp, w, sp, v: CoefficientVector, t, theta):
    """
    ``(log|f_v|, arg f_v)`` at arrays of points.

    At a node ``gamma_k`` the value is exactly ``v_k ||L_{gamma_k}||``.
    """
    return _interpolant_eval(cp, _interpolant_prepare(cp, w, sp, v), t, theta)


def interpolate(cp: CanonicalProduct, w: RadialWeight, sp: SpaceParams,
                v: CoefficientVector, z: LogPoint) -> LogComplex:
    """
    :math:`f_v(z) = \\sum_n v_n \\|L_{\\gamma_n}\\|\\,
    G(z)/(G'(\\gamma_n)(z - \\gamma_n))`.

    Node norms :math:`\\|L_{\\gamma_n}\\|` use the theorem form of
    :func:`~fockcis.reference.log_evaluation_norm`.  At a node
    :math:`\\gamma_k` the value :math:`v_k\\|L_{\\gamma_k}\\|` is returned
    exactly, since every other term carries the factor
    :math:`G(\\gamma_k) = 0`.
    """
    m, a = _interpolant_logs(cp, w, sp, v, [z.t], [z.theta])
    if m[0] == -np.inf:
        return LogComplex.zero()
    return LogComplex(float(m[0]), float(a[0]))


def interpolant_norm(cp: CanonicalProduct, w: RadialWeight, sp: SpaceParams,
                     v: CoefficientVector, n_theta: int = 64,
                     rtol: float = 1e-10) -> LogReal:
    """
    :math:`\\|f_v\\|_{\\varphi,p}` by quadrature, in log scale.

    The area integral :math:`\\int|f_v|^p e^{-p\\varphi}dm` is written as
    :math:`\\int\\int |f_v(e^{t+i\\theta})|^p e^{2t-\\psi(t)}\\,dt\\,d\\theta`;
    the radial integral is done per angle with
    :func:`~fockcis.numerics.laplace_quadrature` (cut at the horizon of
    ``cp``) and the angular one with the trapezoid rule on ``n_theta``
    equally spaced angles, offset by half a step.  The angular sum is
    taken inside the radial integrand, so a single radial quadrature with
    relative tolerance ``rtol`` covers all angles.
    """
    p = sp.p
    prep = _interpolant_prepare(cp, w, sp, v)
    if prep is None:
        return LogReal.zero()
    idx = prep[0]
    upper = float(cp.t[-1]) - (cp.margin or 0.0)
    peak = float(np.clip(np.mean(cp.t[idx]), 0.0, upper - 1.0))
    angles = (np.arange(n_theta) + 0.5) * (2.0 * math.pi / n_theta)
    log_step = math.log(2.0 * math.pi / n_theta)

    def g(t):
        # trapezoid sum over the angles, done inside the radial integrand
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tt = np.repeat(t, n_theta)
        m, _ = _interpolant_eval(cp, prep, tt, np.tile(angles, t.size))
        m = m.reshape(t.size, n_theta)
        top = m.max(axis=1)
        safe = np.where(np.isfinite(top), top, 0.0)
        ang = p * safe + np.log(np.sum(np.exp(p * (m - safe[:, None])), axis=1))
        ang = np.where(np.isfinite(top), ang, -np.inf)
        psi = np.where(t > 0, psi_calculus(w, sp, np.maximum(t, 0.0))[0], 0.0)
        return ang + log_step - psi + 2.0 * t

    total = laplace_quadrature(g, peak, 0.5, upper=upper, rtol=rtol).log_mag
    return LogReal(total / p)

