import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erfc

from fockcis.exceptions import EvaluationError, HorizonError
from fockcis.geometry import LogPoint
from fockcis.numerics import laplace_quadrature
from fockcis.reference import (build_reference, ell, log_evaluation_norm,
                               log_monomial_norm, norm_table, partial_sum_y)
from fockcis.weight import RadialWeight, SpaceParams, psi_calculus


def erf_log_sq_norm(n):
    """log ||z^n||^2 for phi_2, p = 2: 2 pi (1/(2n+2) + int_0^inf e^{(2n+2)t - 2t^2} dt)."""
    c = (n + 1) / 2.0
    gauss = 2 * c * c + math.log(math.sqrt(math.pi / 2) / 2) + math.log(2 - erfc(c * math.sqrt(2)))
    return math.log(2 * math.pi) + float(np.logaddexp(-math.log(2 * n + 2), gauss))


class TestBuildReference:
    def test_alpha2_p2(self, w2, p2):
        assert build_reference(w2, p2, 4).y.tolist() == pytest.approx([0.5, 1.0, 1.5, 2.0, 2.5], abs=1e-15)

    def test_alpha15_p2(self, w15, p2):
        assert build_reference(w15, p2, 1).y.tolist() == pytest.approx([4 / 9, 16 / 9], rel=1e-14)

    def test_alpha2_p4_first_radius(self, w2):
        # psi'(y) = 8y for p = 4, so y_0 = 2/8
        assert build_reference(w2, SpaceParams(4.0), 0).y.tolist() == pytest.approx([0.25], rel=1e-15)

    @pytest.mark.parametrize("alpha", [1.5, 1.8, 2.0])
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 4.0])
    def test_defining_equation(self, alpha, p):
        w, sp = RadialWeight.alpha_model(alpha), SpaceParams(p)
        ref = build_reference(w, sp, 300)
        d1 = psi_calculus(w, sp, ref.y)[1]
        target = p * np.arange(301) + 2
        np.testing.assert_allclose(d1, target, rtol=1e-12)
        assert np.all(np.diff(ref.y) > 0)

    def test_custom_offset(self, p2):
        # psi'(0+) = 5 > 2: indexing starts at the first n with 2n + 2 >= 5
        w = RadialWeight.custom(lambda r: 2.5 * math.log(r) + math.log(r) ** 2,
                                lambda r: (2.5 + 2 * math.log(r)) / r,
                                lambda r: (2 - 2.5 - 2 * math.log(r)) / r ** 2)
        ref = build_reference(w, p2, 3)
        assert ref.offset == 2
        d1 = psi_calculus(w, p2, ref.y)[1]
        np.testing.assert_allclose(d1, 2 * (np.arange(4) + 2) + 2, rtol=1e-10)

    def test_bracket_left_closed(self, w2, p2):
        ref = build_reference(w2, p2, 10)
        assert ref.bracket(1.5) == 2
        assert ref.bracket(1.4999) == 1
        assert ref.bracket(0.1) == -1


class TestEll:
    def test_values(self, w2, p2):
        ref = build_reference(w2, p2, 10)
        assert ell(ref, 1.0) == pytest.approx(1.0, abs=1e-15)
        assert ell(ref, ref.y[0]) == pytest.approx(0.0, abs=1e-15)

    def test_continuity_at_knots(self, w15, p2):
        ref = build_reference(w15, p2, 50)
        for m in range(1, 50):
            y = ref.y[m]
            left = ref.dpsi[m - 1] * y - ref.p * ref.prefix[m - 1]
            assert left == pytest.approx(ell(ref, y), abs=1e-12 * max(1, abs(left)))

    def test_out_of_range(self, w2, p2):
        ref = build_reference(w2, p2, 10)
        with pytest.raises(HorizonError):
            ell(ref, 0.1)
        with pytest.raises(HorizonError):
            ell(ref, 100.0)
        assert ell(ref, 0.1, extrapolate=True) == pytest.approx(2 * 0.1 - 2 * 0.5)

    @pytest.mark.parametrize("alpha", [1.5, 2.0])
    @pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
    def test_psi_minus_ell_smallest_at_left_knot(self, alpha, p):
        w, sp = RadialWeight.alpha_model(alpha), SpaceParams(p)
        ref = build_reference(w, sp, 60)
        for m in range(59):
            ts = np.linspace(ref.y[m], ref.y[m + 1], 33)[:-1]
            gap = psi_calculus(w, sp, ts)[0] - ell(ref, ts)
            assert np.all(gap >= gap[0] - 1e-9 * max(1.0, abs(gap[0])))


class TestMonomialNorms:
    @pytest.mark.parametrize("n", [0, 1, 4, 10, 25, 50])
    def test_erf_oracle(self, w2, p2, n):
        assert 2 * log_monomial_norm(w2, p2, n).log_mag == pytest.approx(erf_log_sq_norm(n), abs=1e-10)

    def test_quoted_values(self, w2, p2):
        assert 2 * log_monomial_norm(w2, p2, 4).log_mag == pytest.approx(14.5637, abs=1e-4)
        assert log_monomial_norm(w2, p2, 4).log_mag == pytest.approx(7.2818, abs=1e-4)
        assert log_monomial_norm(w2, p2, 4, "asymptotic").log_mag == pytest.approx(
            0.5 * (12.5 - math.log(2)), abs=1e-14)

    def test_gap_to_asymptotic_is_constant(self, w2, p2):
        gaps = [log_monomial_norm(w2, p2, n).log_mag
                - log_monomial_norm(w2, p2, n, "asymptotic").log_mag for n in range(10, 51)]
        const = 0.5 * math.log(2 * math.pi * math.sqrt(2 * math.pi))
        assert max(abs(g - const) for g in gaps) < 0.02

    @pytest.mark.parametrize("alpha,p", [(1.5, 1.0), (1.5, 4.0), (2.0, 0.5)])
    def test_gap_bounded_other_spaces(self, alpha, p):
        w, sp = RadialWeight.alpha_model(alpha), SpaceParams(p)
        gaps = [log_monomial_norm(w, sp, n).log_mag - log_monomial_norm(w, sp, n, "asymptotic").log_mag
                for n in range(5, 200, 13)]
        assert max(gaps) - min(gaps) < 0.5

    def test_quadrature_against_direct_integration(self, w15):
        sp = SpaceParams(3.0)
        n = 7
        psi = lambda t: psi_calculus(w15, sp, t)[0]
        g = lambda t: (sp.p * n + 2) * t - psi(t)
        direct = laplace_quadrature(g, 10.0, 1.0, lower=-60.0, rtol=1e-12)
        expected = (math.log(2 * math.pi) + direct.log_mag) / sp.p
        assert log_monomial_norm(w15, sp, n).log_mag == pytest.approx(expected, abs=1e-9)

    def test_large_index(self, w2, p2):
        # exercises the cancellation floor of the shifted integrand
        assert 2 * log_monomial_norm(w2, p2, 520).log_mag == pytest.approx(erf_log_sq_norm(520), rel=1e-12)

    def test_norm_table(self, w2, p2):
        tab = norm_table(w2, p2, 5)
        assert len(tab.log_monomial_norm) == 6 and tab.method == "quadrature"
        assert np.all(np.diff(tab.log_monomial_norm[1:]) > 0)


class TestEvaluationNorms:
    def test_theorem_vs_series(self, w2, w15, p2):
        for w in (w2, w15):
            for t in np.geomspace(0.5, 10, 50):
                th = log_evaluation_norm(w, p2, t).log_mag
                se = log_evaluation_norm(w, p2, t, "series").log_mag
                assert abs(th - se) <= math.log(10)

    def test_monomial_lower_below_series(self, w2, w15, p2):
        for w in (w2, w15):
            for t in np.linspace(-2, 8, 41):
                lo = log_evaluation_norm(w, p2, t, "monomial_lower").log_mag
                se = log_evaluation_norm(w, p2, t, "series").log_mag
                assert lo <= se + 1e-12

    def test_theorem_at_knot(self, w2, p2):
        ref = build_reference(w2, p2, 40)
        n = 6
        y = ref.y[n]
        psi, _, d2, _ = psi_calculus(w2, p2, y)
        expected = (0.5 * math.log(d2) + psi - 2 * y + math.log1p(math.exp(
            ref.dpsi[n + 1] * (y - ref.y[n + 1]) + ref.psi[n + 1] - psi))) / 2
        assert log_evaluation_norm(w2, p2, LogPoint(y, 1.0)).log_mag == pytest.approx(expected, abs=1e-12)

    def test_radial(self, w2, p2):
        a = log_evaluation_norm(w2, p2, LogPoint(2.2, 0.0), "series")
        b = log_evaluation_norm(w2, p2, LogPoint(2.2, 2.0), "series")
        assert a.log_mag == b.log_mag

    def test_origin(self, w2, p2):
        with pytest.raises(EvaluationError):
            log_evaluation_norm(w2, p2, LogPoint(-math.inf))
        zero = log_evaluation_norm(w2, p2, LogPoint(-math.inf), "series").log_mag
        assert zero == pytest.approx(-0.5 * 2 * log_monomial_norm(w2, p2, 0).log_mag)

    def test_series_needs_p2(self, w2):
        with pytest.raises(EvaluationError):
            log_evaluation_norm(w2, SpaceParams(1.0), 1.0, "series")


class TestPartialSums:
    def test_values(self, w2, p2):
        ref = build_reference(w2, p2, 10)
        exact, asym = partial_sum_y(ref, 4)
        assert exact == pytest.approx(7.0, abs=1e-14)
        assert asym == pytest.approx(7.5, abs=1e-14)

    def test_difference_bounded(self, w2, p2):
        ref = build_reference(w2, p2, 200)
        diffs = [abs(np.subtract(*partial_sum_y(ref, m))) for m in range(1, 201)]
        assert max(diffs) <= 1.0

    def test_difference_linear_for_alpha_15(self, w15, p2):
        # y_k = 4(k+1)^2/9 here, and the gap is exactly 2(m+1)/27 - 4/9
        ref = build_reference(w15, p2, 200)
        for m in (1, 10, 200):
            exact, asym = partial_sum_y(ref, m)
            assert exact - asym == pytest.approx(2 * (m + 1) / 27 - 4 / 9, abs=1e-8)

    @pytest.mark.parametrize("alpha", [1.5, 1.8])
    def test_difference_small_relative_to_sum(self, alpha, p2):
        ref = build_reference(RadialWeight.alpha_model(alpha), p2, 400)
        exact, asym = partial_sum_y(ref, 400)
        assert abs(exact - asym) < 1e-3 * exact

    def test_range(self, w2, p2):
        with pytest.raises(HorizonError):
            partial_sum_y(build_reference(w2, p2, 5), 6)


# The integral and sum estimates around the reference radii, as two-sided
# ratios.  The window below y_n has width 0.05; 0.1 is already too wide at
# n=0 for alpha=1.5, p=4.
_DELTA = 0.05
_NS = [0, 1, 2, 3, 5, 10, 20, 35, 50, 75, 100]


def _window_ratios(alpha, p):
    w, sp = RadialWeight.alpha_model(alpha), SpaceParams(p)
    ref = build_reference(w, sp, 1500)
    psi = lambda t: psi_calculus(w, sp, t)[0]
    out = []
    for n in _NS:
        y, d2 = ref.y[n], ref.ddpsi[n]
        base = (ell(ref, y) - ref.psi[n]) / p - 0.5 * math.log(d2)
        g2 = lambda t: (ell(ref, t, extrapolate=True) - psi(t)) / p
        r2 = laplace_quadrature(g2, y, d2 ** -0.5, lower=y - _DELTA).log_mag - base
        r3 = None
        if y - _DELTA > 0:
            g3 = lambda t: (ell(ref, t, extrapolate=True) - psi(t)) / p + t
            r3 = laplace_quadrature(g3, y - _DELTA, d2 ** -0.5, lower=0.0,
                                    upper=y - _DELTA).log_mag - base - y
        k = np.arange(n + 1)
        s4 = (ref.psi[k] - ell(ref, ref.y[k])) / p + 0.5 * np.log(ref.ddpsi[k])
        r4 = np.logaddexp.reduce(s4) - s4[-1]
        k = np.arange(n, 1400)
        s5 = (ref.psi[k] - ell(ref, ref.y[k]) - p * ref.y[k]) / p + 0.5 * np.log(ref.ddpsi[k])
        r5 = np.logaddexp.reduce(s5) - s5[0]
        out.append((r2, r3, r4, r5))
    return out


@pytest.mark.parametrize("alpha", [1.5, 2.0])
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_window_estimates_two_sided(alpha, p):
    bound = math.log(20.0)
    for row in _window_ratios(alpha, p):
        for r in row:
            if r is not None:
                assert -bound <= r <= bound, row


def test_first_integral_finite(w2, p2):
    ref = build_reference(w2, p2, 400)
    g = lambda t: (ell(ref, np.clip(t, ref.y[0], ref.y[-1])) - psi_calculus(w2, p2, t)[0]) / 2
    out = laplace_quadrature(g, 1.0, 0.5, lower=ref.y[0], upper=ref.y[-1])
    assert math.isfinite(out.log_mag)


@given(st.floats(0.6, 30.0))
def test_theorem_norm_monotone_in_t(t):
    w, sp = RadialWeight.alpha_model(2.0), SpaceParams(2.0)
    a = log_evaluation_norm(w, sp, t).log_mag
    b = log_evaluation_norm(w, sp, t + 0.01).log_mag
    assert b > a
