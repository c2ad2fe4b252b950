"""
Point sequences in log-polar form and their comparison with the reference.

A point :math:`z = e^{t + i\\theta}` is a :class:`LogPoint`.  Sequences are
kept sorted by modulus, and the reference radii are paired with the
sequence by sorted index.  This module holds the logarithmic distance, the
block deviations :math:`\\Delta_N`, the classifier built on them, the
:math:`\\varphi`-densities and the constructions that complete a sparse
sequence or extract from a dense one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

import numpy as np

from .exceptions import HorizonError, SequenceError
from .numerics import _wrap_phase
from .reference import ReferenceSequence, build_reference
from .weight import RadialWeight, SpaceParams, psi_calculus, psi_prime_at_zero

__all__ = [
    "LogPoint",
    "PointSequence",
    "Decomposition",
    "DeltaN",
    "ClassifyOptions",
    "ClassificationReport",
    "DensityReport",
    "log_distance",
    "separation_constant",
    "decompose",
    "delta_N_estimate",
    "classify",
    "phi_density",
    "complete_to_cis",
    "extract_cis",
    "reference_points",
    "perturbed_reference",
]


# ======
# Points
# ======

@dataclass(frozen=True)
class LogPoint:
    """The point :math:`e^{t}e^{i\\theta}`; ``t = -inf`` is the origin."""

    t: float
    theta: float = 0.0

    def __post_init__(self):
        t = float(self.t)
        if math.isnan(t) or t == math.inf:
            raise SequenceError(f"invalid log-modulus {self.t!r}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "theta",
                           0.0 if t == -math.inf else _wrap_phase(float(self.theta)))

    @classmethod
    def from_complex(cls, z) -> "LogPoint":
        z = complex(z)
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    def to_complex(self) -> complex:
        if self.t == -math.inf:
            return 0j
        return complex(math.exp(self.t) * math.cos(self.theta),
                       math.exp(self.t) * math.sin(self.theta))


@dataclass(frozen=True, eq=False)
class PointSequence:
    """
    Points sorted by log-modulus (stable sort, so ties keep input order).

    Parameters
    ----------
    t, theta : array_like
        Log-moduli and arguments.  Arguments are wrapped into (-pi, pi].
    allows_duplicates : bool
        Recorded for reports; duplicates are always representable, but
        operations that need distinct nodes reject them.
    """

    t: np.ndarray
    theta: np.ndarray
    allows_duplicates: bool = True

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t, dtype=float)).ravel()
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float)).ravel()
        if theta.size == 1 and t.size != 1:
            theta = np.full(t.shape, float(theta[0]))
        if t.shape != theta.shape:
            raise SequenceError("t and theta must have the same length")
        if np.any(np.isnan(t)) or np.any(t == np.inf) or np.any(np.isnan(theta)):
            raise SequenceError("non-finite coordinates")
        order = np.argsort(t, kind="stable")
        t = t[order]
        theta = np.asarray(_wrap_phase(theta[order]), dtype=float).reshape(t.shape)
        theta[t == -np.inf] = 0.0
        t.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def empty(cls) -> "PointSequence":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def from_points(cls, points: Iterable[LogPoint]) -> "PointSequence":
        pts = list(points)
        return cls(np.array([p.t for p in pts], dtype=float),
                   np.array([p.theta for p in pts], dtype=float))

    @classmethod
    def from_complex(cls, z) -> "PointSequence":
        return cls.from_points(LogPoint.from_complex(v) for v in np.ravel(z))

    def __len__(self):
        return int(self.t.size)

    def __getitem__(self, k) -> LogPoint:
        return LogPoint(self.t[k], self.theta[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    @property
    def points(self):
        return list(self)

    def head(self, n: int) -> "PointSequence":
        return PointSequence(self.t[:n], self.theta[:n], self.allows_duplicates)

    def subset(self, index) -> "PointSequence":
        index = np.asarray(index, dtype=int)
        return PointSequence(self.t[index], self.theta[index], self.allows_duplicates)

    def union(self, other: "PointSequence") -> "PointSequence":
        return PointSequence(np.concatenate([self.t, other.t]),
                             np.concatenate([self.theta, other.theta]),
                             self.allows_duplicates or other.allows_duplicates)

    def rotated(self, phase: float) -> "PointSequence":
        return PointSequence(self.t, self.theta + phase, self.allows_duplicates)

    def has_duplicates(self) -> bool:
        if len(self) < 2:
            return False
        same_t = self.t[1:] == self.t[:-1]
        if not np.any(same_t):
            return False
        keys = set()
        for a, b in zip(self.t, self.theta):
            if (a, b) in keys:
                return True
            keys.add((a, b))
        return False

    def contains(self, z: LogPoint) -> bool:
        lo = np.searchsorted(self.t, z.t, side="left")
        hi = np.searchsorted(self.t, z.t, side="right")
        return bool(np.any(self.theta[lo:hi] == z.theta))

    def to_complex(self) -> np.ndarray:
        return np.exp(self.t + 1j * self.theta)


def reference_points(ref: ReferenceSequence, theta=0.0) -> PointSequence:
    """The reference sequence as points (all on the ray ``theta`` by default)."""
    return PointSequence(ref.y.copy(), theta)


def perturbed_reference(ref: ReferenceSequence, delta, theta=0.0) -> PointSequence:
    """Points :math:`e^{y_n + \\delta_n + i\\theta_n}` for ``n`` up to ``ref.n_max``."""
    delta = np.broadcast_to(np.asarray(delta, dtype=float), ref.y.shape)
    return PointSequence(ref.y + delta, theta)


# ========
# Distance
# ========

def _log_distance_arrays(t1, th1, t2, th2):
    """Vectorised distance for ``t1 <= t2`` elementwise, finite ``t1``."""
    dt = t2 - t1
    half = np.sin(0.5 * (th2 - th1))
    with np.errstate(over="ignore"):
        small = dt <= 1.0
        em1 = np.expm1(np.where(small, dt, 0.0))
        mag_small = np.sqrt(em1 * em1 + 4.0 * np.exp(np.where(small, dt, 0.0)) * half * half)
        # large gaps: factor e^{dt} out to avoid overflow
        edt = np.exp(-np.where(small, 1.0, dt))
        log_mag_large = np.where(small, 0.0, dt) + 0.5 * np.log(
            (1.0 - edt) ** 2 + 4.0 * edt * half * half)
        log_mag = np.where(small, np.log(np.where(mag_small > 0, mag_small, 1.0)),
                           log_mag_large)
        log_d = log_mag - np.log1p(np.exp(-t1))
        out = np.where(small & (mag_small == 0), 0.0, np.exp(log_d))
    return out


def _ordered(a: LogPoint, b: LogPoint):
    return (a, b) if (a.t, a.theta) <= (b.t, b.theta) else (b, a)


def log_distance(a: LogPoint, b: LogPoint) -> float:
    """
    :math:`d(z,w) = |z-w|/(1+\\min(|z|,|w|))`, evaluated without overflow.

    With :math:`t_1 \\le t_2`,
    :math:`|z - w| = e^{t_1}|e^{(t_2-t_1) + i(\\theta_2-\\theta_1)} - 1|`.
    The arguments are put in a canonical order first, so the result is
    exactly symmetric.

    Examples
    --------
    >>> round(log_distance(LogPoint(1.0), LogPoint(1.1)), 6)
    0.076886
    """
    a, b = _ordered(a, b)
    if a.t == -math.inf:
        return 0.0 if b.t == -math.inf else math.exp(min(b.t, 709.0)) if b.t < 709 else math.inf
    return float(_log_distance_arrays(np.array([a.t]), np.array([a.theta]),
                                      np.array([b.t]), np.array([b.theta]))[0])


def _pair_lower_bound(t_i, t_j):
    # |z - w| >= |w| - |z|, so d >= expm1(t_j - t_i) / (1 + e^{-t_i})
    with np.errstate(over="ignore"):
        return np.expm1(t_j - t_i) / (1.0 + np.exp(-t_i))


def separation_constant(g: PointSequence) -> float:
    """
    Infimum of the logarithmic distance over pairs of distinct indices.

    Pairs are scanned in modulus order; for each point the scan stops as soon
    as the radial lower bound ``expm1(t_j - t_i)/(1 + e^{-t_i})`` reaches
    the current minimum, which is exact because that bound increases with
    ``j``.  Repeated points give 0; fewer than two points give ``inf``.
    """
    n = len(g)
    if n < 2:
        return math.inf
    t, th = g.t, g.theta
    if np.any(t == -np.inf):
        # the origin: distance to w is |w|
        k0 = int(np.sum(t == -np.inf))
        if k0 > 1:
            return 0.0
        best = float(np.exp(t[1]))
        t, th = t[1:], th[1:]
        n -= 1
        if n < 2:
            return best
    else:
        best = math.inf
    chunk = 32
    for i in range(n - 1):
        j = i + 1
        while j < n:
            stop = min(n, j + chunk)
            tj = t[j:stop]
            d = _log_distance_arrays(np.full(tj.shape, t[i]), np.full(tj.shape, th[i]),
                                     tj, th[j:stop])
            best = min(best, float(d.min()))
            if best == 0.0:
                return 0.0
            if _pair_lower_bound(t[i], t[stop - 1]) >= best:
                break
            j = stop
    return best


# =====================
# Deviation from Sigma
# =====================

@dataclass(frozen=True, eq=False)
class Decomposition:
    """:math:`\\delta_n = t_n - y_n` and :math:`\\theta_n`, paired by sorted index."""

    delta: np.ndarray
    theta: np.ndarray
    y: np.ndarray

    def __len__(self):
        return int(self.delta.size)


def decompose(g: PointSequence, ref: ReferenceSequence) -> Decomposition:
    """Pair the ``n``-th smallest point with ``y_n``; no re-matching."""
    n = min(len(g), len(ref))
    return Decomposition(g.t[:n] - ref.y[:n], g.theta[:n].copy(), ref.y[:n].copy())


def _thirds_trend(values, rel=0.1, atol=1e-12):
    """'increasing', 'decreasing' or 'flat' from the maxima of the last two thirds."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return "flat"
    parts = np.array_split(values, 3)
    mid, last = float(np.max(parts[1])), float(np.max(parts[2]))
    if last > (1.0 + rel) * mid + atol:
        return "increasing"
    if last < mid / (1.0 + rel) - atol:
        return "decreasing"
    return "flat"


@dataclass(frozen=True)
class DeltaN:
    """Finite-horizon estimate of :math:`\\Delta_N` and its trend over the window range."""

    N: int
    value: float
    trend: str
    n_range: tuple


def delta_N_estimate(d: Decomposition, ref: ReferenceSequence, N: int,
                     horizon: Optional[int] = None) -> DeltaN:
    """
    :math:`\\max_n |\\sum_{k=n+1}^{n+N}\\delta_k| / (y_{n+N} - y_n)` over
    ``horizon/4 <= n <= horizon - 1 - N``.

    Skipping the first quarter suppresses transients.  ``trend`` compares
    the window values in the last third of that range with the middle
    third.

    Raises
    ------
    HorizonError
        If ``horizon < 4 N``.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be at least 1")
    H = len(d) if horizon is None else min(int(horizon), len(d))
    if H < 4 * N:
        raise HorizonError(f"horizon {H} too short for N={N}; need at least {4 * N}")
    delta = d.delta[:H]
    y = ref.y[:H]
    csum = np.concatenate([[0.0], np.cumsum(delta)])
    n = np.arange(H // 4, H - N)
    sums = csum[n + N + 1] - csum[n + 1]
    vals = np.abs(sums) / (y[n + N] - y[n])
    return DeltaN(N, float(vals.max()), _thirds_trend(vals), (int(n[0]), int(n[-1])))


# ==========
# Classifier
# ==========

@dataclass(frozen=True)
class ClassifyOptions:
    """Thresholds used by :func:`classify`."""

    N_max: int = 10
    sep_min: float = 1e-6
    bound_cap: float = 1e3
    margin: float = 0.02
    horizon: Optional[int] = None


@dataclass
class ClassificationReport:
    """
    Outcome of :func:`classify`.

    ``verdict`` is ``"cis"``, ``"not_cis"`` or ``"inconclusive"``; the
    latter two come with a ``reason``.  The numbers are finite-horizon
    estimates: the block deviations are maxima over the last three quarters
    of the horizon, and trends compare the last third of that range with the
    middle third.
    """

    separation: float
    sup_psi2_delta: float
    psi2_delta_trend: str
    delta_N_table: dict
    delta_N_trend: dict
    verdict: str
    reason: Optional[str]
    horizon: int
    margin: float
    best_N: Optional[int] = None
    notes: list = field(default_factory=list)

    @property
    def is_cis(self) -> bool:
        return self.verdict == "cis"

    def to_dict(self):
        out = asdict(self)
        out["delta_N_table"] = {str(k): v for k, v in self.delta_N_table.items()}
        out["delta_N_trend"] = {str(k): v for k, v in self.delta_N_trend.items()}
        for key in ("separation", "sup_psi2_delta"):
            if not math.isfinite(out[key]):
                out[key] = None if math.isnan(out[key]) else str(out[key])
        return out


def classify(g: PointSequence, w: RadialWeight, sp: SpaceParams,
             opts: ClassifyOptions = ClassifyOptions()) -> ClassificationReport:
    """
    Decide whether ``g`` looks like a complete interpolating sequence.

    The three conditions are checked in order: logarithmic separation at
    least ``sep_min``; bounded :math:`\\psi''(y_n)\\delta_n` (at most
    ``bound_cap`` and without an increasing trend); and some
    ``N <= N_max`` with block deviation below ``1/2 - margin`` and no
    increasing trend.  Block deviations within ``margin`` of 1/2, or below
    it but still increasing, give ``inconclusive``.
    """
    if sp.is_infinite:
        raise ValueError("p = inf is classified through frame.classify_infty")
    H = len(g) if opts.horizon is None else min(len(g), int(opts.horizon))
    g = g.head(H)
    notes = [f"finite-horizon estimate over {H} points"]
    if H < 4:
        return ClassificationReport(separation_constant(g), math.nan, "flat", {}, {},
                                    "inconclusive", "horizon_too_short", H,
                                    opts.margin, None, notes)
    ref = build_reference(w, sp, H - 1)
    sep = separation_constant(g)
    d = decompose(g, ref)
    psi2_delta = np.abs(ref.ddpsi[:H] * d.delta)
    sup_b = float(psi2_delta.max())
    b_trend = _thirds_trend(psi2_delta[H // 4:])

    table, trends = {}, {}
    for N in range(1, int(opts.N_max) + 1):
        if H < 4 * N:
            notes.append(f"N>={N} skipped: horizon shorter than 4N")
            break
        est = delta_N_estimate(d, ref, N)
        table[N] = est.value
        trends[N] = est.trend

    def report(verdict, reason, best=None):
        return ClassificationReport(sep, sup_b, b_trend, table, trends, verdict,
                                    reason, H, opts.margin, best, notes)

    if not sep >= opts.sep_min:
        return report("not_cis", "separation")
    if not sup_b <= opts.bound_cap:
        return report("not_cis", "unbounded_psi2_delta")
    if b_trend == "increasing":
        return report("inconclusive", "psi2_delta_trend")

    lo, hi = 0.5 - opts.margin, 0.5 + opts.margin
    good = [N for N, v in table.items() if v < lo and trends[N] != "increasing"]
    if good:
        return report("cis", None, min(good, key=lambda N: (table[N], N)))
    best = min(table, key=lambda N: (table[N], N))
    if table[best] < lo:
        return report("inconclusive", "delta_N_trend", best)
    if table[best] < hi:
        return report("inconclusive", "delta_N_near_critical", best)
    return report("not_cis", "delta_N", best)


# =======
# Density
# =======

@dataclass
class DensityReport:
    """Lower and upper annulus counts per unit width, in :math:`\\psi'` coordinates."""

    lower: float
    upper: float
    R_used: float
    r_grid: list
    counts: list

    def to_dict(self):
        return asdict(self)


def _dpsi_points(w, sp, t):
    t = np.asarray(t, dtype=float)
    s0 = psi_prime_at_zero(w, sp)
    if t.size == 0:
        return t.copy()
    tt = np.where(np.isfinite(t), np.maximum(t, 0.0), 0.0)
    s = np.asarray(psi_calculus(w, sp, tt)[1], dtype=float).reshape(t.shape)
    return np.where(t > 0, s, s0)


def phi_density(g: PointSequence, w: RadialWeight, sp: SpaceParams, R: float = 100.0,
                r_samples: int = 64, r_range=None) -> DensityReport:
    """
    Counts of ``g`` in the annuli :math:`r \\le \\psi'(\\log|z|) < r + R`,
    divided by ``R``, over a grid of ``r``.

    Since :math:`\\psi'` is increasing these are the annuli
    :math:`\\{e^{\\eta(r)} \\le |z| < e^{\\eta(r+R)}\\}`.  The grid spans
    ``[psi'(t_first), psi'(t_last) - R]`` unless ``r_range`` is given.

    Raises
    ------
    HorizonError
        If ``R`` exceeds the span of the data (and no ``r_range`` is given).
    """
    if not R > 0:
        raise ValueError("R must be positive")
    s = np.sort(_dpsi_points(w, sp, g.t))
    if r_range is None:
        if s.size == 0 or s[-1] - s[0] < R:
            span = 0.0 if s.size == 0 else float(s[-1] - s[0])
            raise HorizonError(f"R={R} exceeds the data span {span} in psi' units")
        r_lo, r_hi = float(s[0]), float(s[-1] - R)
    else:
        r_lo, r_hi = map(float, r_range)
        if r_hi < r_lo:
            raise ValueError("empty r_range")
    grid = np.linspace(r_lo, r_hi, int(r_samples))
    counts = (np.searchsorted(s, grid + R, side="left")
              - np.searchsorted(s, grid, side="left"))
    dens = counts / R
    return DensityReport(float(dens.min()), float(dens.max()), float(R),
                         grid.tolist(), counts.astype(int).tolist())


# =============
# Constructions
# =============

def _cell_index(w, sp, offset, t):
    """Index of the width-p cell (in psi' units) centred on p n + 2."""
    s = _dpsi_points(w, sp, t)
    idx = np.floor((s - 2.0 - sp.p * offset) / sp.p + 0.5).astype(int)
    return np.maximum(idx, 0)


def _best_phase(t_new, theta_candidates, t_pts, th_pts):
    if t_pts.size == 0:
        return float(theta_candidates[0])
    near = np.abs(t_pts - t_new) < 2.0
    if not np.any(near):
        return float(theta_candidates[0])
    tp, thp = t_pts[near], th_pts[near]
    best, best_d = float(theta_candidates[0]), -1.0
    for th in theta_candidates:
        lo_t = np.minimum(tp, t_new)
        hi_t = np.maximum(tp, t_new)
        lo_th = np.where(tp <= t_new, thp, th)
        hi_th = np.where(tp <= t_new, th, thp)
        d = float(_log_distance_arrays(lo_t, lo_th, hi_t, hi_th).min())
        if d > best_d + 1e-15:
            best, best_d = float(th), d
    return best


def _choose_subset(candidates, k, score, max_combos=5000):
    """Pick ``k`` of ``candidates`` minimising ``score(subset)``."""
    cand = list(candidates)
    if k <= 0:
        return []
    if math.comb(len(cand), k) <= max_combos:
        return list(min(itertools.combinations(cand, k), key=score))
    chosen = []
    for _ in range(k):
        rest = [c for c in cand if c not in chosen]
        chosen.append(min(rest, key=lambda c: score(tuple(chosen) + (c,))))
    return chosen


def complete_to_cis(g: PointSequence, w: RadialWeight, sp: SpaceParams,
                    horizon: Optional[int] = None, M: Optional[int] = None,
                    check_density: bool = True, phase_samples: int = 16,
                    max_M: int = 64) -> PointSequence:
    """
    Add points to a sparse separated sequence so that the result is a
    complete interpolating sequence.

    In :math:`\\psi'` coordinates the line is cut into cells of width ``p``
    centred on the reference values :math:`pn+2`, and the cells into
    groups of ``M`` consecutive cells.  ``M`` is the smallest group size for
    which every group holds fewer than ``M`` points of ``g``; each group is
    then filled up to exactly ``M`` points by placing new points at the
    reference radii of empty cells.  Which empty cells are used is chosen
    so that the running sum of radial deviations stays as close to zero as
    possible, and each new point gets the argument (from a grid of
    ``phase_samples`` angles) farthest from the points already present.

    Parameters
    ----------
    horizon : int, optional
        Number of cells to fill (default: at least 200 and enough to cover
        ``g``), rounded up to a multiple of ``M``.
    M : int, optional
        Force the group size instead of searching for it.
    check_density : bool
        Require upper density below ``1/p - 0.02`` (windows of width 100).
        When disabled and no group size works, only empty cells of width-1
        groups are filled (a sequence already matching the reference is
        returned unchanged).

    Raises
    ------
    SequenceError
        If ``g`` is not separated, or the density precondition fails.
    """
    if len(g) > 0 and g.has_duplicates():
        raise SequenceError("input has repeated points")
    if len(g) > 1 and not separation_constant(g) > 1e-6:
        raise SequenceError("input is not logarithmically separated")
    p = sp.p
    ref0 = build_reference(w, sp, 0)
    offset = ref0.offset
    cells = _cell_index(w, sp, offset, g.t) if len(g) else np.empty(0, dtype=int)
    cover = int(cells.max()) + 1 if cells.size else 0
    H = max(200 if horizon is None else int(horizon), cover)

    if check_density:
        top = p * (H + offset) + 2.0
        dens = phi_density(g, w, sp, 100.0, r_range=(0.0, max(0.0, top - 100.0)))
        if not dens.upper < 1.0 / p - 0.02:
            raise SequenceError(
                f"upper density {dens.upper:.4f} is not below 1/p - 0.02 = {1.0 / p - 0.02:.4f}")

    counts_per_cell = np.bincount(cells, minlength=H) if cells.size else np.zeros(H, dtype=int)

    def group_ok(m_size):
        n_groups = -(-H // m_size)
        padded = np.zeros(n_groups * m_size, dtype=int)
        padded[:counts_per_cell.size] = counts_per_cell
        return bool(np.all(padded.reshape(n_groups, m_size).sum(axis=1) < m_size))

    if M is None:
        M = next((m for m in range(1, max_M + 1) if group_ok(m)), None)
        if M is None:
            if check_density:
                raise SequenceError(f"no group size up to {max_M} leaves room in every group")
            M = 1
    M = int(M)
    H = -(-H // M) * M
    ref = build_reference(w, sp, H - 1)
    counts_per_cell = np.bincount(cells, minlength=H)

    t_all = list(g.t)
    th_all = list(g.theta)
    thetas = np.linspace(-math.pi, math.pi, phase_samples, endpoint=False) + math.pi / phase_samples
    running = 0.0
    for m in range(H // M):
        cell_ids = range(m * M, (m + 1) * M)
        in_group = (cells >= m * M) & (cells < (m + 1) * M)
        present = float(np.sum(g.t[in_group]))
        k = M - int(in_group.sum())
        if k < 0:
            # group size forced by caller and already overfull
            raise SequenceError(f"group {m} holds more than M={M} points")
        empty = [c for c in cell_ids if counts_per_cell[c] == 0]
        if len(empty) < k:
            raise AssertionError("a group with fewer than M points has too few empty cells")
        knots = float(np.sum(ref.y[m * M:(m + 1) * M]))

        def score(subset):
            return abs(running + present + sum(ref.y[c] for c in subset) - knots)

        chosen = _choose_subset(empty, k, score)
        running += present + sum(ref.y[c] for c in chosen) - knots
        for c in sorted(chosen):
            t_new = float(ref.y[c])
            th = _best_phase(t_new, thetas, np.array(t_all), np.array(th_all))
            t_all.append(t_new)
            th_all.append(th)
    return PointSequence(np.array(t_all), np.array(th_all), g.allows_duplicates)


def extract_cis(g: PointSequence, w: RadialWeight, sp: SpaceParams,
                M: Optional[int] = None, check_density: bool = True,
                max_M: int = 64) -> PointSequence:
    """
    Select a complete interpolating subsequence of a dense separated sequence.

    With the same cells and groups as :func:`complete_to_cis`, ``M`` is the
    smallest group size for which every complete group holds at least
    ``M`` points; from each group exactly ``M`` points are kept, chosen to
    keep the running sum of radial deviations closest to zero.

    Raises
    ------
    SequenceError
        If ``g`` is not separated, the lower density is not above
        ``1/p + 0.02`` (windows of width 100), or no group size works.
    """
    if len(g) < 2:
        raise SequenceError("need at least two points to extract from")
    if not separation_constant(g) > 1e-6:
        raise SequenceError("input is not logarithmically separated")
    p = sp.p
    if check_density:
        dens = phi_density(g, w, sp, 100.0)
        if not dens.lower > 1.0 / p + 0.02:
            raise SequenceError(
                f"lower density {dens.lower:.4f} is not above 1/p + 0.02 = {1.0 / p + 0.02:.4f}")
    offset = build_reference(w, sp, 0).offset
    cells = _cell_index(w, sp, offset, g.t)
    last = int(cells.max())
    counts_per_cell = np.bincount(cells, minlength=last + 1)

    def group_ok(m_size):
        n_groups = (last + 1) // m_size
        if n_groups == 0:
            return False
        sums = counts_per_cell[:n_groups * m_size].reshape(n_groups, m_size).sum(axis=1)
        return bool(np.all(sums >= m_size))

    if M is None:
        M = next((m for m in range(1, max_M + 1) if group_ok(m)), None)
        if M is None:
            raise SequenceError(f"no group size up to {max_M} has enough points in every group")
    M = int(M)
    n_groups = (last + 1) // M
    ref = build_reference(w, sp, n_groups * M - 1)
    keep = []
    running = 0.0
    for m in range(n_groups):
        idx = np.flatnonzero((cells >= m * M) & (cells < (m + 1) * M))
        if idx.size < M:
            raise SequenceError(f"group {m} holds fewer than M={M} points")
        knots = float(np.sum(ref.y[m * M:(m + 1) * M]))

        def score(subset):
            return abs(running + float(np.sum(g.t[list(subset)])) - knots)

        if math.comb(idx.size, M) <= 5000:
            chosen = list(min(itertools.combinations(idx.tolist(), M), key=score))
        else:
            # nearest point to each reference radius of the group
            chosen = []
            for y in ref.y[m * M:(m + 1) * M]:
                free = [i for i in idx.tolist() if i not in chosen]
                chosen.append(min(free, key=lambda i: abs(g.t[i] - y)))
        running += float(np.sum(g.t[chosen])) - knots
        keep.extend(chosen)
    return g.subset(sorted(keep))
