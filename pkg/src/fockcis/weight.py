"""
Radial weights and the associated calculus in logarithmic coordinates.

For a radial weight :math:`\\varphi(r)` and an exponent ``p`` the package
works with :math:`\\psi_p(t) = p\\,\\varphi(e^t)`.  Weights follow the
:math:`\\log^+` convention: :math:`\\varphi(r) = 0` for :math:`r \\le 1`, so
:math:`\\psi` and all its derivatives vanish on :math:`t \\le 0`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .exceptions import WeightError
from .numerics import monotone_root

__all__ = [
    "RadialWeight",
    "SpaceParams",
    "RegularityReport",
    "psi_calculus",
    "psi_prime_at_zero",
    "eta",
    "laplacian",
    "audit_regularity",
]


@dataclass(frozen=True, eq=False)
class RadialWeight:
    """
    A radial weight :math:`\\varphi`.

    Use :meth:`alpha_model`, :meth:`custom` or :meth:`from_table` rather
    than the constructor.  Alpha models compare equal when their exponents
    do; custom weights compare by identity.
    """

    family: str
    alpha: Optional[float] = None
    phi_fn: Optional[Callable] = field(default=None, repr=False)
    dphi_fn: Optional[Callable] = field(default=None, repr=False)
    ddphi_fn: Optional[Callable] = field(default=None, repr=False)
    description: str = ""

    @classmethod
    def alpha_model(cls, alpha: float) -> "RadialWeight":
        """The weight :math:`(\\log^+ r)^\\alpha`, ``1 < alpha <= 2``."""
        alpha = float(alpha)
        if not 1.0 < alpha <= 2.0:
            raise WeightError(f"alpha must lie in (1, 2], got {alpha}")
        return cls("alpha", alpha=alpha,
                   description=f"phi(r) = (log+ r)^{alpha:g}")

    @classmethod
    def custom(cls, phi, dphi, ddphi, description="custom") -> "RadialWeight":
        """Weight given by callables for :math:`\\varphi, \\varphi', \\varphi''` on ``r >= 1``."""
        return cls("custom", phi_fn=phi, dphi_fn=dphi, ddphi_fn=ddphi,
                   description=description)

    @classmethod
    def from_table(cls, path) -> "RadialWeight":
        """
        Weight sampled in a CSV file with header ``r,phi,dphi,ddphi``.

        Each column is interpolated with a shape-preserving cubic (PCHIP).
        """
        path = Path(path)
        rows = []
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            need = {"r", "phi", "dphi", "ddphi"}
            if reader.fieldnames is None or not need <= set(reader.fieldnames):
                raise WeightError(f"{path}: header must contain r,phi,dphi,ddphi")
            for lineno, row in enumerate(reader, start=2):
                try:
                    rows.append([float(row[k]) for k in ("r", "phi", "dphi", "ddphi")])
                except (TypeError, ValueError):
                    raise WeightError(f"{path}:{lineno}: non-numeric row") from None
        if len(rows) < 4:
            raise WeightError(f"{path}: need at least 4 rows")
        data = np.array(sorted(rows))
        r = data[:, 0]
        if np.any(np.diff(r) <= 0):
            raise WeightError(f"{path}: duplicate r values")
        interps = [PchipInterpolator(r, data[:, j], extrapolate=False)
                   for j in (1, 2, 3)]

        def wrap(f):
            def g(x):
                y = f(x)
                return np.where(np.isnan(y), np.inf, y)
            return g

        return cls.custom(*(wrap(f) for f in interps),
                          description=f"table:{path.name}")

    @property
    def tag(self) -> str:
        if self.family == "alpha":
            return f"alpha:{self.alpha:g}"
        return self.description or "custom"

    def phi(self, r):
        """Evaluate :math:`\\varphi(r)` (0 for ``r <= 1``)."""
        r = np.asarray(r, dtype=float)
        t = np.log(np.maximum(r, 1e-300))
        return psi_calculus(self, SpaceParams(1.0), t)[0]

    def __eq__(self, other):
        if not isinstance(other, RadialWeight):
            return NotImplemented
        if self.family == "alpha" and other.family == "alpha":
            return self.alpha == other.alpha
        return self is other

    def __hash__(self):
        if self.family == "alpha":
            return hash(("alpha", self.alpha))
        return id(self)


@dataclass(frozen=True)
class SpaceParams:
    """Integrability exponent ``p`` of the space, ``0 < p <= inf``."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not p > 0:
            raise WeightError(f"p must be positive, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.p)


def _finite_p(sp):
    if sp.is_infinite:
        raise WeightError("psi is defined for finite p only; "
                          "p = inf is handled through the p = 2 space")
    return sp.p


def psi_calculus(w: RadialWeight, sp: SpaceParams, t):
    """
    Values of :math:`\\psi, \\psi', \\psi'', \\psi'''` at ``t``.

    Closed forms for alpha models.  For custom weights the chain rule is
    applied to the supplied :math:`\\varphi'` and :math:`\\varphi''`, and
    :math:`\\psi'''` is a central difference of :math:`\\psi''` with step
    ``max(1e-4, 1e-4 * t)``.

    ``t`` may be a scalar or an array; the four results have its shape.
    """
    p = _finite_p(sp)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pos = t > 0
    tp = np.where(pos, t, 1.0)
    if w.family == "alpha":
        a = w.alpha
        with np.errstate(over="ignore"):
            psi = p * tp ** a
            d1 = p * a * tp ** (a - 1)
            d2 = p * a * (a - 1) * tp ** (a - 2)
            d3 = p * a * (a - 1) * (a - 2) * tp ** (a - 3)
        out = [np.where(pos, x, 0.0) for x in (psi, d1, d2, d3)]
    else:
        psi, d1, d2 = _custom_psi012(w, p, tp)
        h = np.maximum(1e-4, 1e-4 * tp)
        d3 = (_custom_psi012(w, p, tp + h)[2] - _custom_psi012(w, p, tp - h)[2]) / (2 * h)
        out = [np.where(pos, x, 0.0) for x in (psi, d1, d2, d3)]
    if scalar:
        return tuple(float(x[0]) for x in out)
    return tuple(out)


def _custom_psi012(w, p, t):
    with np.errstate(over="ignore"):
        r = np.exp(t)
    vals = []
    for fn in (w.phi_fn, w.dphi_fn, w.ddphi_fn):
        v = None
        if r.size > 1:
            try:
                v = np.asarray(fn(r), dtype=float)
            except (TypeError, ValueError, ArithmeticError):
                # scalar-only callables
                v = None
        if v is None or v.shape != r.shape:
            v = np.empty(r.shape)
            for k, ri in enumerate(r):
                try:
                    v[k] = float(fn(float(ri)))
                except (ValueError, ArithmeticError) as exc:
                    raise WeightError(f"custom weight failed at t={float(t[k])!r}: {exc}") from None
        vals.append(v)
    phi, dphi, ddphi = vals
    bad = ~(np.isfinite(phi) & np.isfinite(dphi) & np.isfinite(ddphi))
    if np.any(bad):
        raise WeightError(f"custom weight is not finite at t={float(t[bad][0])!r}")
    psi = p * phi
    d1 = p * r * dphi
    d2 = p * (r * dphi + r * r * ddphi)
    return psi, d1, d2


def psi_prime_at_zero(w: RadialWeight, sp: SpaceParams) -> float:
    """Right limit :math:`\\psi'(0^+)`."""
    p = _finite_p(sp)
    if w.family == "alpha":
        return 0.0
    return float(p * np.asarray(w.dphi_fn(1.0), dtype=float).ravel()[0])


def _dpsi_scalar(w, sp, t):
    if t <= 0:
        return psi_prime_at_zero(w, sp)
    return psi_calculus(w, sp, t)[1]


def eta(w: RadialWeight, sp: SpaceParams, s: float) -> float:
    """
    Inverse of :math:`\\psi'`: the ``t >= 0`` with :math:`\\psi'(t) = s`.

    Raises
    ------
    WeightError
        If ``s`` is below :math:`\\psi'(0^+)`.
    """
    s0 = psi_prime_at_zero(w, sp)
    if s < s0:
        raise WeightError(f"eta({s}) undefined: below psi'(0+) = {s0}")
    if s == s0:
        return 0.0
    if w.family == "alpha":
        # psi'(t) = p a t^(a-1) inverts in closed form
        a = w.alpha
        return (s / (sp.p * a)) ** (1.0 / (a - 1.0))
    hi = 1.0
    while _dpsi_scalar(w, sp, hi) < s:
        hi *= 2.0
        if hi > 1e300:
            raise WeightError(f"eta({s}): psi' does not reach the target")
    return monotone_root(lambda t: _dpsi_scalar(w, sp, t), s, (0.0, hi))


def laplacian(w: RadialWeight, sp: SpaceParams, r: float) -> float:
    """
    Laplacian :math:`\\Delta\\varphi(r) = \\psi''(\\log r)\\, e^{-2\\log r} / p`.

    The result does not depend on ``p``; the density scale
    :math:`\\rho = (\\Delta\\varphi)^{-1/2}` is left to callers.
    """
    if not r > 0:
        raise WeightError(f"laplacian needs r > 0, got {r}")
    p = _finite_p(sp)
    t = math.log(r)
    return psi_calculus(w, sp, t)[2] * math.exp(-2.0 * t) / p


@dataclass
class RegularityReport:
    """Sampled check of the three growth conditions on :math:`\\psi`."""

    grid: list
    psi_prime_increasing_to_inf: bool
    psi_double_positive_nonincreasing: bool
    third_derivative_ratio: list
    ratio_constant: float
    verdict: str
    reason: Optional[str] = None
    description: str = ("sampled verdict on a finite grid; the conditions are "
                        "asymptotic and this is not a proof")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "grid": list(map(float, self.grid)),
            "psi_prime_increasing_to_inf": self.psi_prime_increasing_to_inf,
            "psi_double_positive_nonincreasing": self.psi_double_positive_nonincreasing,
            "third_derivative_ratio": list(map(float, self.third_derivative_ratio)),
            "ratio_constant": float(self.ratio_constant),
            "verdict": self.verdict,
            "reason": self.reason,
            "description": self.description,
        }


def audit_regularity(w: RadialWeight, sp: SpaceParams, t_range=(1.0, 1e4),
                     samples: int = 64) -> RegularityReport:
    """
    Check the growth conditions on a log-spaced grid of ``t``.

    Fails when :math:`\\psi'` is not increasing, when :math:`\\psi''` is
    non-positive or increases by more than ``1e-9`` relative between
    consecutive samples, or when :math:`|\\psi'''|/(\\psi'')^{5/3}` grows by
    more than 10% from the second-highest to the highest decile of the grid.
    """
    lo, hi = map(float, t_range)
    if not 0 < lo < hi:
        raise WeightError("t_range must satisfy 0 < lo < hi")
    if samples < 16:
        raise WeightError("at least 16 samples are required")
    grid = np.geomspace(lo, hi, samples)
    _, d1, d2, d3 = psi_calculus(w, sp, grid)

    increasing = bool(np.all(np.diff(d1) > 0))
    positive = bool(np.all(d2 > 0))
    nonincreasing = positive and bool(np.all(d2[1:] <= d2[:-1] * (1 + 1e-9)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d2 > 0, np.abs(d3) / np.abs(d2) ** (5.0 / 3.0), np.inf)

    dec = max(1, samples // 10)
    top = ratio[-dec:]
    second = ratio[-2 * dec:-dec]
    if np.max(second) > 0:
        ratio_grows = bool(np.max(top) > 1.1 * np.max(second))
    else:
        ratio_grows = bool(np.max(top) > 0)

    reason = None
    if not increasing:
        reason = "psi_prime_increasing_to_inf"
    elif not nonincreasing:
        reason = "psi_double_positive_nonincreasing"
    elif ratio_grows:
        reason = "third_derivative_ratio"
    finite = ratio[np.isfinite(ratio)]
    return RegularityReport(
        grid=grid.tolist(),
        psi_prime_increasing_to_inf=increasing,
        psi_double_positive_nonincreasing=nonincreasing,
        third_derivative_ratio=ratio.tolist(),
        ratio_constant=float(finite.max()) if finite.size else math.inf,
        verdict="pass" if reason is None else "fail",
        reason=reason,
    )
