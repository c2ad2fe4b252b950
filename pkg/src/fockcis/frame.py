"""
Reproducing kernels, Gram matrices and the operator-level checks for p = 2
and p = inf.

For a radial weight the reproducing kernel of the Hilbert space is the
series :math:`K(w,z) = \\sum_n (w\\bar z)^n / \\|z^n\\|^2_{\\varphi,2}`.
Normalised kernels at the points of a sequence form a Riesz basis exactly
when the sequence is complete interpolating, and finite sections of their
Gram matrix give a computable (if slowly converging) picture of the Riesz
bounds.  The module also assembles the transfer matrices that compare the
interpolation series of a perturbed sequence with the reference one, and
evaluates the Bessel-type and Bernstein-type ratios used to check
separation and regularity numerically.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .exceptions import (EvaluationError, HorizonError, SequenceError,
                         SpectralError)
from .geometry import (ClassificationReport, ClassifyOptions, LogPoint,
                       PointSequence, classify, log_distance, reference_points)
from .numerics import LogComplex, _wrap_phase, logsumexp_complex
from .product import (CanonicalProduct, CoefficientVector, _interpolant_eval,
                      _interpolant_prepare, interpolant_norm, log_G_derivative)
from .reference import (KERNEL_SERIES_DROP, _log_norm_p, build_reference,
                        log_evaluation_norm, log_monomial_norm)
from .weight import RadialWeight, SpaceParams, psi_calculus

__all__ = [
    "KernelTable",
    "RieszReport",
    "TransferMatrix",
    "kernel_table",
    "kernel_table_for",
    "kernel",
    "gram",
    "riesz_bounds",
    "gram_trend",
    "transfer_matrix",
    "schur_norm_bound",
    "bessel_ratio",
    "bernstein_ratio",
    "classify_infty",
    "EIGEN_RESIDUAL_TOL",
    "PSD_TOL",
]

#: Largest accepted ``||G x - lambda x||`` over all eigenpairs.
EIGEN_RESIDUAL_TOL = 1e-8
#: Most negative eigenvalue accepted as rounding of a PSD Gram matrix.
PSD_TOL = -1e-10

_P2 = SpaceParams(2.0)
# entries of the (rows, cols, terms) block materialised at once
_BLOCK_ENTRIES = 2_000_000


# =======
# Kernels
# =======

@dataclass(frozen=True, eq=False)
class KernelTable:
    """
    Squared monomial norms :math:`\\log\\|z^n\\|^2_{\\varphi,2}`,
    ``n = 0..n_max``, for evaluating the kernel series.

    Terms more than ``truncation_drop`` log-units below the largest one are
    dropped.
    """

    weight: RadialWeight
    log_sq_norms: np.ndarray
    truncation_drop: float = KERNEL_SERIES_DROP

    def __post_init__(self):
        arr = np.array(self.log_sq_norms, dtype=float)
        if arr.ndim != 1 or arr.size < 3:
            raise ValueError("a kernel table needs at least three norms")
        arr.setflags(write=False)
        object.__setattr__(self, "log_sq_norms", arr)

    @property
    def weight_tag(self) -> str:
        return self.weight.tag

    @property
    def n_max(self) -> int:
        return self.log_sq_norms.size - 1


def kernel_table(w: RadialWeight, n_max: int,
                 truncation_drop: float = KERNEL_SERIES_DROP) -> KernelTable:
    """Table of :math:`\\log\\|z^n\\|^2_{\\varphi,2}` for ``n <= n_max``."""
    norms = [_log_norm_p(w, _P2, n) for n in range(int(n_max) + 1)]
    return KernelTable(w, np.array(norms), truncation_drop)


def _needed_index(w, t_sum, drop=KERNEL_SERIES_DROP):
    """
    Estimated last index of the kernel series at ``t_w + t_z = t_sum``.

    The terms peak where :math:`\\psi'(s) = 2m + 2`, ``s = t_sum/2``, and
    fall off quadratically with curvature about :math:`4/\\psi''(s)`.
    """
    s = max(0.5 * t_sum, 0.0)
    _, d1, d2, _ = psi_calculus(w, _P2, s)
    peak = max(0.0, 0.5 * (d1 - 2.0))
    return int(math.ceil(peak + math.sqrt(0.5 * drop * max(d2, 1.0)))) + 5


def kernel_table_for(w: RadialWeight, t_max: float,
                     truncation_drop: float = KERNEL_SERIES_DROP) -> KernelTable:
    """A table deep enough for kernels between points with ``|z| <= e^t_max``."""
    n = _needed_index(w, 2.0 * t_max, truncation_drop)
    return kernel_table(w, max(int(1.2 * n) + 10, 16), truncation_drop)


def _log_kernel_block(kt, t1, th1, t2, th2):
    """``(log|K|, arg K)`` for all pairs, shape ``(len(t1), len(t2))``."""
    L = kt.log_sq_norms
    n = np.arange(L.size, dtype=float)
    out_mag = np.empty((t1.size, t2.size))
    out_ph = np.empty((t1.size, t2.size))
    rows = max(1, _BLOCK_ENTRIES // max(1, t2.size * n.size))
    for a in range(0, t1.size, rows):
        b = min(a + rows, t1.size)
        ts = t1[a:b, None, None] + t2[None, :, None]
        with np.errstate(invalid="ignore"):
            mag = np.where(n == 0, 0.0, n * ts) - L
        phase = n * (th1[a:b, None, None] - th2[None, :, None])
        top = mag.max(axis=-1)
        keep = mag >= top[..., None] - kt.truncation_drop
        if np.any(keep[..., -1]):
            i, j = np.argwhere(keep[..., -1])[0]
            need = _needed_index(kt.weight, float(t1[a + i] + t2[j]), kt.truncation_drop)
            raise HorizonError(
                f"kernel series not converged within n_max={kt.n_max}; "
                f"needs n_max >= {max(need, kt.n_max + 1)}")
        mag = np.where(keep, mag, -np.inf)
        m, ph = logsumexp_complex(mag, phase, axis=-1)
        out_mag[a:b] = m
        out_ph[a:b] = ph
    return out_mag, out_ph


def kernel(kt: KernelTable, w_pt: LogPoint, z_pt: LogPoint) -> LogComplex:
    """
    :math:`K(w,z) = \\sum_n (w\\bar z)^n/\\|z^n\\|^2_{\\varphi,2}` in log-polar form.

    Raises
    ------
    HorizonError
        When the series has not dropped ``truncation_drop`` below its peak
        by ``n_max``; the message names the table size needed.

    Examples
    --------
    >>> kt = kernel_table(RadialWeight.alpha_model(2.0), 40)
    >>> k = kernel(kt, LogPoint(1.0, 0.3), LogPoint(0.5, -0.2))
    >>> kc = kernel(kt, LogPoint(0.5, -0.2), LogPoint(1.0, 0.3))
    >>> abs(k.log_mag - kc.log_mag) < 1e-12 and abs(k.phase + kc.phase) < 1e-12
    True
    """
    m, ph = _log_kernel_block(kt, np.array([w_pt.t]), np.array([w_pt.theta]),
                              np.array([z_pt.t]), np.array([z_pt.theta]))
    return LogComplex(float(m[0, 0]), float(_wrap_phase(ph[0, 0])))


def gram(kt: KernelTable, g: PointSequence, M: Optional[int] = None) -> np.ndarray:
    """
    Normalised Gram matrix
    :math:`K(\\gamma_j,\\gamma_k)/\\sqrt{K(\\gamma_j,\\gamma_j)K(\\gamma_k,\\gamma_k)}`
    of the first ``M`` points.

    The result is Hermitian with an exactly unit diagonal; the strict lower
    triangle is the conjugate of the upper one.
    """
    M = len(g) if M is None else int(M)
    if M > len(g):
        raise HorizonError(f"M={M} exceeds the {len(g)} available points")
    if M <= 0:
        return np.zeros((0, 0), dtype=complex)
    h = g.head(M)
    if h.has_duplicates():
        raise SequenceError("repeated points give a singular Gram matrix")
    t, th = np.asarray(h.t, dtype=float), np.asarray(h.theta, dtype=float)
    mag, ph = _log_kernel_block(kt, t, th, t, th)
    d = mag.diagonal().copy()
    G = np.exp(mag - 0.5 * d[:, None] - 0.5 * d[None, :]) * np.exp(1j * ph)
    G = np.triu(G, 1)
    return G + G.conj().T + np.eye(M)


# ============
# Riesz bounds
# ============

@dataclass
class RieszReport:
    """
    Extreme eigenvalues of finite Gram sections.

    ``condition_trend`` is ``"growing"`` when the last condition number
    exceeds the first by more than a factor 2 and the intermediate ones are
    nondecreasing, else ``"bounded"``.  ``growth`` is that ratio and
    ``slope`` the least-squares slope of log-condition against log-size.
    """

    sizes: list
    lower_bounds: list
    upper_bounds: list
    conditions: list
    max_residual: float
    condition_trend: str
    growth: float
    slope: float

    def to_dict(self):
        out = asdict(self)
        out["conditions"] = [c if math.isfinite(c) else "inf" for c in self.conditions]
        out["growth"] = self.growth if math.isfinite(self.growth) else "inf"
        out["slope"] = self.slope if math.isfinite(self.slope) else "inf"
        return out


def riesz_bounds(grams: Sequence[np.ndarray]) -> RieszReport:
    """
    Riesz-bound surrogates from Gram sections of increasing size.

    Raises
    ------
    ValueError
        Sizes not strictly increasing.
    SpectralError
        An eigenvalue below :data:`PSD_TOL` (usually a sign of kernel
        truncation) or an eigen-residual above :data:`EIGEN_RESIDUAL_TOL`.
    """
    sizes = [int(G.shape[0]) for G in grams]
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"Gram sizes must be strictly increasing, got {sizes}")
    lows, highs, conds = [], [], []
    worst = 0.0
    for G in grams:
        lam, V = np.linalg.eigh(G)
        res = np.linalg.norm(G @ V - V * lam, axis=0)
        worst = max(worst, float(res.max()))
        if worst > EIGEN_RESIDUAL_TOL:
            raise SpectralError(f"eigen-residual {worst:.3g} at size {G.shape[0]}")
        if lam[0] < PSD_TOL:
            raise SpectralError(
                f"Gram matrix of size {G.shape[0]} has eigenvalue {lam[0]:.3g}; "
                "the kernel truncation is too aggressive")
        lo, hi = max(float(lam[0]), 0.0), float(lam[-1])
        lows.append(lo)
        highs.append(hi)
        conds.append(hi / lo if lo > 0 else math.inf)
    growth = conds[-1] / conds[0]
    monotone = all(b >= a for a, b in zip(conds, conds[1:]))
    trend = "growing" if growth > 2.0 and monotone else "bounded"
    if len(sizes) > 1 and all(math.isfinite(c) for c in conds):
        slope = float(np.polyfit(np.log(sizes), np.log(conds), 1)[0])
    else:
        slope = 0.0 if len(sizes) == 1 else math.inf
    return RieszReport(sizes, lows, highs, conds, worst, trend, float(growth), slope)


def gram_trend(kt: Optional[KernelTable], g: PointSequence, w: RadialWeight,
               sizes=(10, 20, 40, 60)) -> RieszReport:
    """:func:`riesz_bounds` over the Gram sections of ``g`` at ``sizes``."""
    sizes = [int(s) for s in sizes]
    if sizes[-1] > len(g):
        raise HorizonError(f"size {sizes[-1]} exceeds the {len(g)} available points")
    if kt is None:
        kt = kernel_table_for(w, float(np.max(g.t[:sizes[-1]])))
    full = gram(kt, g, sizes[-1])
    return riesz_bounds([full[:M, :M] for M in sizes])


# ================
# Transfer matrices
# ================

@dataclass(frozen=True)
class TransferMatrix:
    """
    Entries :math:`A_{n,m}` (or :math:`B_{n,m}`) in log-polar form.

    Row ``n`` belongs to the point :math:`\\gamma_n`, column ``m`` to the
    reference point :math:`\\sigma_m`.  ``mode`` is ``"A"`` (``p`` finite)
    or ``"B"`` (the ``p = inf`` comparison, magnitudes weighted by
    :math:`e^{\\varphi(\\gamma_n)-\\varphi(\\sigma_m)}|\\sigma_m|/|\\gamma_n|`).
    """

    log_abs: np.ndarray
    phase: np.ndarray
    mode: str
    p: float
    gamma_t: np.ndarray
    sigma_t: np.ndarray

    @property
    def shape(self):
        return self.log_abs.shape

    @property
    def abs(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_abs)

    def to_complex(self) -> np.ndarray:
        return self.abs * np.exp(1j * self.phase)


def transfer_matrix(g: PointSequence, w: RadialWeight, sp: SpaceParams,
                    horizon: int, mode: str = "A",
                    margin: float = 10.0) -> TransferMatrix:
    """
    Square section of the matrix
    :math:`A_{n,m} = \\frac{\\|L_{\\gamma_n}\\|}{\\|L_{\\sigma_m}\\|}
    \\frac{G_\\Gamma(\\sigma_m)}{G'_\\Gamma(\\gamma_n)(\\sigma_m-\\gamma_n)}`,
    ``0 <= n, m < horizon``.

    All points of ``g`` enter the canonical product, so ``g`` must reach
    ``margin`` log-units beyond the last row and column.  A reference point
    that is also a node is handled exactly: its column is zero except at
    that node, where the entry is the limit
    :math:`\\|L_{\\gamma_n}\\|/\\|L_{\\sigma_m}\\|`.

    Mode ``"B"`` uses the ``p = 2`` reference points and the magnitudes
    :math:`e^{\\varphi(\\gamma_n)-\\varphi(\\sigma_m)}\\frac{|\\sigma_m|}{|\\gamma_n|}
    \\left|\\frac{G_\\Gamma(\\sigma_m)}{G'_\\Gamma(\\gamma_n)(\\sigma_m-\\gamma_n)}\\right|`,
    with the phases of ``A``.
    """
    if mode not in ("A", "B"):
        raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")
    H = int(horizon)
    if H < 1 or H > len(g):
        raise HorizonError(f"horizon {H} outside 1..{len(g)}")
    if mode == "A" and sp.is_infinite:
        raise ValueError("mode 'A' needs finite p; use mode 'B' for p = inf")
    rsp = sp if mode == "A" else _P2
    ref = build_reference(w, rsp, H - 1)
    sig_t = np.asarray(ref.y[:H], dtype=float)
    sig_th = np.zeros(H)
    cp = CanonicalProduct(g, margin=margin)
    gam_t = np.asarray(g.t[:H], dtype=float)
    gam_th = np.asarray(g.theta[:H], dtype=float)
    cp.check_horizon(np.concatenate([sig_t, gam_t]))

    la, ph = cp.factor_logs(sig_t, sig_th)        # (H columns, all nodes)
    logG = la.sum(axis=1)
    argG = ph.sum(axis=1)
    dG = [log_G_derivative(cp, n) for n in range(H)]
    dG_mag = np.array([d.log_mag for d in dG])
    dG_ph = np.array([d.phase for d in dG])
    norm_p = rsp
    lnL_g = np.array([log_evaluation_norm(w, norm_p, t).log_mag for t in gam_t])
    lnL_s = np.array([log_evaluation_norm(w, norm_p, t).log_mag for t in sig_t])

    # sigma_m - gamma_n = -gamma_n (1 - sigma_m/gamma_n)
    diff_mag = gam_t[:, None] + la[:, :H].T
    diff_ph = gam_th[:, None] + ph[:, :H].T + math.pi
    with np.errstate(invalid="ignore"):
        log_abs = (lnL_g[:, None] - lnL_s[None, :] + logG[None, :]
                   - dG_mag[:, None] - diff_mag)
    phase = argG[None, :] - dG_ph[:, None] - diff_ph

    hits = np.isneginf(la)
    for m in np.flatnonzero(hits.any(axis=1)):
        k = int(np.flatnonzero(hits[m])[0])
        log_abs[:, m] = -np.inf
        phase[:, m] = 0.0
        if k < H:
            log_abs[k, m] = lnL_g[k] - lnL_s[m]

    if mode == "B":
        phi_g = np.where(gam_t > 0, psi_calculus(w, SpaceParams(1.0), np.maximum(gam_t, 0.0))[0], 0.0)
        phi_s = np.where(sig_t > 0, psi_calculus(w, SpaceParams(1.0), np.maximum(sig_t, 0.0))[0], 0.0)
        # the ratio of evaluation norms is replaced by the weight factor
        log_abs = (log_abs - lnL_g[:, None] + lnL_s[None, :]
                   + phi_g[:, None] - phi_s[None, :] + sig_t[None, :] - gam_t[:, None])
    p = float(sp.p) if mode == "A" else math.inf
    return TransferMatrix(log_abs, np.asarray(_wrap_phase(phase), dtype=float),
                          mode, p, gam_t, sig_t)


def schur_norm_bound(tm, p: float = 2.0) -> float:
    """
    Larger of the maximal absolute row sum and column sum.

    Both sums bounded uniformly in the section size certify boundedness on
    every :math:`\\ell^p`, ``1 <= p <= inf``, by the Schur test and
    interpolation; the value also bounds the :math:`\\ell^2` norm.  ``tm``
    may be a :class:`TransferMatrix` or a plain array.

    Examples
    --------
    >>> schur_norm_bound(np.eye(4))
    1.0
    """
    if not p > 0:
        raise ValueError("p must be positive")
    a = tm.abs if isinstance(tm, TransferMatrix) else np.abs(np.asarray(tm))
    if a.size == 0:
        return 0.0
    return float(max(a.sum(axis=1).max(), a.sum(axis=0).max()))


# ================
# Bessel/Bernstein
# ================

def _reference_product(w, sp, t_max, margin=10.0):
    """Canonical product over the reference sequence reaching ``t_max + margin``."""
    n = 16
    while True:
        ref = build_reference(w, sp, n)
        if ref.y[-1] >= t_max + margin:
            break
        n *= 2
    k = int(np.searchsorted(ref.y, t_max + margin)) + 1
    return CanonicalProduct(reference_points(ref).head(min(k + 1, len(ref))), margin=margin)


@lru_cache(maxsize=256)
def _g_sigma_log_norm(w, p, k, n_theta):
    sp = SpaceParams(p)
    ref = build_reference(w, sp, k)
    cp = _reference_product(w, sp, float(ref.y[k]) + 15.0)
    return interpolant_norm(cp, w, sp, CoefficientVector.unit(k, p), n_theta=n_theta).log_mag


def bessel_ratio(g: PointSequence, w: RadialWeight, sp: SpaceParams,
                 trials: int = 10, family=("monomial", "g_sigma"),
                 n_theta: int = 32) -> float:
    """
    Largest :math:`\\sum_{\\gamma}|f(\\gamma)|^p/\\|L_\\gamma\\|^p` over a family
    of unit-norm test functions.

    The family holds the normalised monomials :math:`z^n/\\|z^n\\|`,
    ``n < trials``, and the reference interpolants
    :math:`g_{\\sigma_k} = \\|L_{\\sigma_k}\\|G(z)/(G'(\\sigma_k)(z-\\sigma_k))`,
    ``k < trials``, divided by their quadrature norms (see
    :func:`~fockcis.product.interpolant_norm`).  Repeated points count with
    multiplicity.  An empty sequence gives 0.
    """
    if len(g) == 0:
        return 0.0
    if np.any(g.t == -np.inf):
        raise EvaluationError("the evaluation norm at the origin is not used here")
    p = sp.p
    t = np.asarray(g.t, dtype=float)
    th = np.asarray(g.theta, dtype=float)
    lnL = np.array([log_evaluation_norm(w, sp, x).log_mag for x in t])
    logs = []
    if "monomial" in family:
        for n in range(int(trials)):
            ln = log_monomial_norm(w, sp, n).log_mag
            logs.append(float(np.logaddexp.reduce(p * (n * t - ln - lnL))))
    if "g_sigma" in family:
        cp = _reference_product(w, sp, float(t.max()))
        for k in range(min(int(trials), len(cp.sequence))):
            prep = _interpolant_prepare(cp, w, sp, CoefficientVector.unit(k, p))
            mag, _ = _interpolant_eval(cp, prep, t, th)
            nk = _g_sigma_log_norm(w, p, k, int(n_theta))
            logs.append(float(np.logaddexp.reduce(p * (mag - lnL - nk))))
    if not logs:
        raise ValueError(f"empty test family {family!r}")
    return float(math.exp(max(logs)))


def bernstein_ratio(cp_ref: CanonicalProduct, w: RadialWeight, sp: SpaceParams,
                    f: CoefficientVector, z: LogPoint, w_pt: LogPoint,
                    eps: float = 0.1) -> float:
    """
    :math:`|f/G(z) - f/G(w)|` divided by
    :math:`d(z,w)\\,\\|L_z\\|/|G(z)|\\,\\|f\\|`, with :math:`f = f_v` the
    interpolant of the data ``f`` on the nodes of ``cp_ref``.

    The difference is evaluated as
    :math:`\\sum_n c_n (w - z)/((z-\\sigma_n)(w-\\sigma_n))`, with
    :math:`c_n = v_n\\|L_{\\sigma_n}\\|/G'(\\sigma_n)`, so there is no
    cancellation; at ``w = z`` the value is the limit of the ratio, which
    involves :math:`(f/G)'(z)`.  ``||f||`` is the sampled norm
    :math:`(\\sum_n|f(\\sigma_n)|^p/\\|L_{\\sigma_n}\\|^p)^{1/p} = \\|v\\|_p`.

    Raises
    ------
    ValueError
        ``w`` outside the disc of radius ``eps |z|`` about ``z``.
    EvaluationError
        ``z`` or ``w`` is a node.
    """
    zc, wc = z.to_complex(), w_pt.to_complex()
    if abs(wc - zc) > eps * abs(zc) * (1 + 1e-12):
        raise ValueError(f"w must lie within {eps}|z| of z")
    if cp_ref.node_index(z) is not None or cp_ref.node_index(w_pt) is not None:
        raise EvaluationError("z and w must avoid the nodes")
    norm = f.norm()
    prep = _interpolant_prepare(cp_ref, w, sp, f)
    if prep is None or norm == 0:
        return 0.0
    idx, _, _, c_mag, c_ph = prep
    cp_ref.check_horizon(max(z.t, w_pt.t))
    la, ph = cp_ref.factor_logs([z.t, w_pt.t], [z.theta, w_pt.theta])
    if np.any(np.isneginf(la)):
        raise EvaluationError("z and w must avoid the nodes")
    # x - sigma_n = -sigma_n (1 - x/sigma_n)
    d_mag = cp_ref.t[idx][None, :] + la[:, idx]
    d_ph = cp_ref.theta[idx][None, :] + ph[:, idx] + math.pi
    if zc == wc:
        mag = c_mag - 2.0 * d_mag[0]
        phs = c_ph - 2.0 * d_ph[0]
    else:
        mag = c_mag - d_mag[0] - d_mag[1]
        phs = c_ph - d_ph[0] - d_ph[1]
    s_mag, _ = logsumexp_complex(mag, phs)
    # |w - z| / d(z, w) = 1 + min(|z|, |w|)
    log_scale = float(np.logaddexp(0.0, min(z.t, w_pt.t)))
    logG = float(la[0].sum())
    lnL = log_evaluation_norm(w, sp, z.t).log_mag
    return float(math.exp(float(s_mag) + log_scale + logG - lnL - math.log(norm)))


# ======
# p = inf
# ======

def classify_infty(g: PointSequence, star: LogPoint, w: RadialWeight,
                   opts: ClassifyOptions = ClassifyOptions(),
                   sizes=(10, 20, 40, 60),
                   kt: Optional[KernelTable] = None) -> ClassificationReport:
    """
    Classify :math:`\\Gamma\\cup\\{\\gamma^*\\}` for the space with ``p = inf``.

    The union is complete interpolating there exactly when the normalised
    kernels at :math:`\\Gamma` form a Riesz basis of the ``p = 2`` space, so
    the verdict is the ``p = 2`` classification of ``g``.  When ``g`` has
    at least ``max(sizes)`` points, the Gram condition trend is appended to
    ``notes`` together with whether it agrees with the verdict; the verdict
    itself is not changed.
    """
    if g.contains(star):
        raise SequenceError("the extra point must not belong to the sequence")
    report = classify(g, w, _P2, opts)
    report.notes.append(
        f"extra point at t={star.t:.6g}, theta={star.theta:.6g} completes the "
        "sequence for p=inf; verdict is the p=2 classification of the sequence")
    if sizes and len(g) >= max(sizes):
        rr = gram_trend(kt, g, w, sizes)
        expected = "bounded" if report.is_cis else "growing"
        agree = report.verdict == "inconclusive" or rr.condition_trend == expected
        report.notes.append(
            f"gram condition trend {rr.condition_trend} (growth {rr.growth:.3g} over "
            f"sizes {list(rr.sizes)}); {'agrees' if agree else 'disagrees'} with the verdict")
    return report
