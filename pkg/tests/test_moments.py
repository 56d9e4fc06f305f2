"""Moment route cross-checks: enumeration vs contour vs grid averages."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from zel.moments import (
    MomentResult,
    MultiplicativeWeights,
    bessel_product,
    contour_moment,
    empirical_moment,
    exact_moment,
    exp_moment_trimmed,
    f_value,
    _saddle_radius,
)
from zel.prime_poly import PolySpec, PrimeTable, TGrid
from zel.special_fn import g_constant

SPEC31 = PolySpec(m=1, sigma=0.5, theta=0.0, X=31.0)
PRIMES31 = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


@pytest.fixture(scope="module")
def table31():
    return PrimeTable.build(31)


@pytest.fixture(scope="module")
def grid1e5():
    return TGrid.for_span(1e5, 31.0)


class TestWeights:
    def test_f_prime_powers(self):
        w = MultiplicativeWeights(m=1, X=100.0)
        assert w.f_prime_power(0) == 1
        assert w.f_prime_power(1) == 0
        assert w.f_prime_power(2) == Fraction(1, 2)
        assert w.f_prime_power(4) == Fraction(3, 8)
        with pytest.raises(ValueError):
            w.f_prime_power(-1)

    def test_g_prime_power(self):
        w = MultiplicativeWeights(m=2, X=10.0)
        assert w.g_prime_power(3, 2) == pytest.approx(
            1.0 / (2 * math.log(3) ** 4), rel=1e-15)
        assert w.g_prime_power(11, 2) == 0.0     # past X
        assert w.g_prime_power(3, 0) == 1.0

    def test_f_value_examples(self):
        assert f_value(1) == 1
        assert f_value(4) == Fraction(1, 2)
        assert f_value(36) == Fraction(1, 4)
        assert f_value(16) == Fraction(3, 8)

    def test_f_value_odd_exponents_vanish(self):
        assert f_value(2) == 0
        assert f_value(12) == 0          # 2^2 * 3
        assert f_value(97) == 0          # big leftover prime
        assert f_value(8) == 0

    def test_f_value_multiplicative(self):
        assert f_value(4 * 9) == f_value(4) * f_value(9)
        assert f_value(4 * 25 * 49) == f_value(4) * f_value(25) * f_value(49)

    def test_f_value_validation(self):
        with pytest.raises(ValueError):
            f_value(0)

    def test_result_validation(self):
        with pytest.raises(ValueError):
            MomentResult(k=0, value=1.0, method="contour", err_estimate=0.0)
        with pytest.raises(ValueError):
            MomentResult(k=2, value=1.0, method="psychic", err_estimate=0.0)
        with pytest.raises(ValueError):
            MomentResult(k=2, value=1.0, method="contour", err_estimate=-1.0)


class TestExactMoment:
    def test_k2_closed_form(self):
        # only n = p^2 survive: 2! f(p^2) g(p^2) p^-2s = p^-2s (log p)^-2m / 2
        got = exact_moment(SPEC31, 2)
        want = 0.5 * math.fsum(
            p ** -1.0 * math.log(p) ** -2.0 for p in PRIMES31)
        assert got.method == "exact_multiplicative"
        assert got.err_estimate == 0.0
        assert got.value == pytest.approx(want, rel=1e-14)

    def test_odd_k_exactly_zero(self):
        for k in (1, 3, 5, 7):
            assert exact_moment(SPEC31, k).value == 0.0

    def test_k4_x10_brute_force(self):
        # every exponent vector on {2,3,5,7} summing to 4, odd ones included
        # (they must contribute nothing)
        spec = PolySpec(m=1, sigma=0.5, theta=0.0, X=10.0)
        ps = [2, 3, 5, 7]
        total = 0.0
        for exps in itertools.product(range(5), repeat=4):
            if sum(exps) != 4:
                continue
            term = 1.0
            for p, a in zip(ps, exps):
                if a % 2:
                    term = 0.0
                    break
                term *= (math.comb(a, a // 2) / 2 ** a
                         / (math.factorial(a) * math.log(p) ** a)
                         * p ** (-0.5 * a))
            total += term
        want = math.factorial(4) * total
        assert exact_moment(spec, 4).value == pytest.approx(want, rel=1e-14)

    def test_theta_free(self):
        a = exact_moment(SPEC31, 4).value
        b = exact_moment(PolySpec(m=1, sigma=0.5, theta=1.1, X=31.0), 4).value
        assert a == b

    def test_budget_errors(self):
        with pytest.raises(ValueError):
            exact_moment(SPEC31, 13)
        with pytest.raises(ValueError):
            exact_moment(SPEC31, 0)
        with pytest.raises(ValueError):
            exact_moment(PolySpec(m=1, sigma=0.5, theta=0.0, X=150.0), 2)


class TestContourMoment:
    def test_matches_exact_even_k(self, table31):
        for k in (2, 4, 6):
            want = exact_moment(SPEC31, k).value
            got = contour_moment(SPEC31, k, table31)
            assert got.method == "contour"
            assert got.flags == ()
            assert got.value == pytest.approx(want, rel=1e-10)
            assert got.err_estimate <= 1e-10 * abs(want)

    def test_odd_k_roundoff_scale(self, table31):
        scale = exact_moment(SPEC31, 2).value
        for k in (1, 3, 5):
            got = contour_moment(SPEC31, k, table31)
            assert abs(got.value) <= 1e-12 * scale

    def test_k8_node_doubling_stable(self):
        spec = PolySpec(m=1, sigma=0.5, theta=0.0, X=1e4)
        table = PrimeTable.build(10_000)
        got = contour_moment(spec, 8, table)
        assert math.isfinite(got.value) and got.value > 0
        assert got.err_estimate <= 1e-10 * got.value
        assert "node_limit" not in got.flags

    def test_theta_free(self, table31):
        rot = PolySpec(m=1, sigma=0.5, theta=0.9, X=31.0)
        assert (contour_moment(rot, 4, table31).value
                == contour_moment(SPEC31, 4, table31).value)

    def test_radius_fallback_flag(self):
        # vanishing weights push the saddle past the bracket: flagged R = k
        radius, fell_back = _saddle_radius(np.array([1e-9]), 5)
        assert fell_back and radius == 5.0

    def test_saddle_residual(self, table31):
        from scipy import special as sc
        c = table31.weights(1, 0.5, 31.0)
        for k in (2, 6, 12):
            r, fb = _saddle_radius(c, k)
            assert not fb
            x = r * c
            assert r * float(np.dot(c, sc.i1e(x) / sc.i0e(x))) == pytest.approx(
                k, rel=1e-12)


class TestEmpiricalMoment:
    def test_k1_near_zero(self, table31, grid1e5):
        got = empirical_moment(SPEC31, table31, grid1e5, 1)
        assert abs(got.value) <= 5 * 31.0 ** 2 / 1e5
        assert got.err_estimate >= 31.0 ** 2 / 1e5

    def test_k2_matches_exact(self, table31, grid1e5):
        want = exact_moment(SPEC31, 2).value
        got = empirical_moment(SPEC31, table31, grid1e5, 2)
        assert got.value == pytest.approx(want, rel=1e-4)

    def test_k4_k6_match_exact(self, table31, grid1e5):
        for k, rel in ((4, 1e-3), (6, 1e-3)):
            want = exact_moment(SPEC31, k).value
            got = empirical_moment(SPEC31, table31, grid1e5, k)
            assert got.value == pytest.approx(want, rel=rel)

    def test_theta_invariance(self, table31, grid1e5):
        vals = [empirical_moment(
            PolySpec(m=1, sigma=0.5, theta=th, X=31.0), table31, grid1e5,
            2).value for th in (0.0, 0.7, math.pi / 2)]
        for a, b in itertools.combinations(vals, 2):
            assert a == pytest.approx(b, rel=1e-3)

    def test_single_prime_cosine_square(self):
        # table holding only p=2: P(t) = w cos(t log 2 + theta), mean square
        # w^2/2 up to the O(4/T) boundary term
        table = PrimeTable(limit=3, primes=np.array([2], dtype=np.int64),
                           logs=np.log(np.array([2.0])))
        spec = PolySpec(m=1, sigma=0.5, theta=0.3, X=3.0)
        got = empirical_moment(spec, table, TGrid.for_span(1e4, 3.0), 2)
        want = 0.5 * 2.0 ** -1.0 * math.log(2.0) ** -2.0
        assert got.value == pytest.approx(want, abs=1e-3)

    def test_overflow_guard(self, table31, grid1e5):
        huge_x = PolySpec(m=1, sigma=0.5, theta=0.0, X=1e15)
        with pytest.raises(OverflowError):
            empirical_moment(huge_x, table31, grid1e5, 12)

    def test_validation(self, table31, grid1e5):
        with pytest.raises(ValueError):
            empirical_moment(SPEC31, table31, grid1e5, 0)


class TestBesselProduct:
    def test_x_zero(self, table31):
        assert bessel_product(SPEC31, table31, 0.0) == 0.0

    def test_exp_upper_bound(self, table31):
        w_sum = float(table31.weights(1, 0.5, 31.0).sum())
        for x in (0.5, 2.0, 10.0):
            assert bessel_product(SPEC31, table31, x) <= x * w_sum

    def test_against_mpmath(self, table31):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        x = 3.0
        want = float(math.fsum(
            float(mp.log(mp.besseli(0, x * p ** -0.5 / math.log(p))))
            for p in PRIMES31))
        assert bessel_product(SPEC31, table31, x) == pytest.approx(
            want, rel=1e-12)

    def test_density_tail_matches_sieved(self):
        # hybrid (small table + density integral) vs fully sieved product
        small = PrimeTable.build(10_000)
        full = PrimeTable.build(1_000_000)
        for m, sigma, x in ((1, 0.5, 3.0), (1, 0.5, 100.0), (0, 0.75, 50.0)):
            spec = PolySpec(m=m, sigma=sigma, theta=0.0, X=1e6)
            hybrid = bessel_product(spec, small, x)
            sieved = bessel_product(spec, full, x)
            assert hybrid == pytest.approx(sieved, rel=1e-3)

    def test_strip_window_constant(self):
        # relative deviation from G(sigma) x^{1/sigma}/(log x)^{m/sigma+1}
        # stays within C/log x, C <= 10, on the desk ladder
        table = PrimeTable.build(1_000_000)
        G = g_constant(0.75)
        for x in (1e3, 1e4, 1e5):
            spec = PolySpec(m=0, sigma=0.75, theta=0.0, X=x ** 3)
            dev = abs(bessel_product(spec, table, x)
                      / (G * x ** (4.0 / 3.0) / math.log(x)) - 1.0)
            assert dev <= 10.0 / math.log(x)

    def test_validation(self, table31):
        with pytest.raises(ValueError):
            bessel_product(SPEC31, table31, -1.0)


class TestExpMomentTrimmed:
    def test_x_zero_full_window_is_log_one(self, table31, grid1e5):
        w_sum = float(table31.weights(1, 0.5, 31.0).sum())
        assert exp_moment_trimmed(SPEC31, table31, grid1e5, 0.0,
                                  w_sum + 1.0) == 0.0

    def test_x_zero_is_log_measure_fraction(self, table31, grid1e5):
        val = exp_moment_trimmed(SPEC31, table31, grid1e5, 0.0, 2.0)
        # independent count of the trimmed fraction
        from zel.prime_poly import iter_poly_blocks
        kept = sum(int(np.count_nonzero(np.abs(z) <= 2.0))
                   for _, z in iter_poly_blocks(SPEC31, table31, grid1e5))
        assert 0 < kept < grid1e5.count
        assert val == pytest.approx(math.log(kept / grid1e5.count), abs=1e-14)

    def test_identity_with_bessel_product(self, table31, grid1e5):
        # W far above the polynomial's sup: nothing trimmed, the average
        # reproduces the I0 product at desk accuracy
        got = exp_moment_trimmed(SPEC31, table31, grid1e5, 2.0, 20.0)
        want = bessel_product(SPEC31, table31, 2.0)
        assert got == pytest.approx(want, rel=1e-4)

    def test_integral_monotone_in_w(self, table31, grid1e5):
        # same normalizer, so the logged value is monotone with the sum
        vals = [exp_moment_trimmed(SPEC31, table31, grid1e5, 2.0, W)
                for W in (1.0, 2.0, 3.0, 20.0)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_empty_trim_raises(self, table31, grid1e5):
        with pytest.raises(ValueError, match="empty"):
            exp_moment_trimmed(SPEC31, table31, grid1e5, 1.0, 1e-12)

    def test_validation(self, table31, grid1e5):
        with pytest.raises(ValueError):
            exp_moment_trimmed(SPEC31, table31, grid1e5, -1.0, 2.0)
        with pytest.raises(ValueError):
            exp_moment_trimmed(SPEC31, table31, grid1e5, 1.0, 0.0)
