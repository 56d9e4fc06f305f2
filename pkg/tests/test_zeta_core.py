"""Zeta backend, branch continuation, iterated integrals.

Frozen reference values live in oracle_values.py; the series oracles
here are recomputed live from truncated von Mangoldt sums with certified
tail bounds, so no expected value is taken on faith from the code under
test.
"""

import cmath
import math

import numpy as np
import pytest

from oracle_values import (
    B1,
    J1_HALF,
    J2_HALF,
    S0_VALUES,
    ZERO_ORDINATES_BELOW_55,
    ZETA_VALUES,
)
from zel.prime_poly import lambda_sum, von_mangoldt_table
from zel.zeta_core import (
    NearZeroOnPath,
    QuadratureConfig,
    ZetaPoleError,
    b_constant,
    c_constant,
    dump_zeta_cache,
    eta_tilde,
    log_zeta_branched,
    s_m,
    warm_zeta_cache,
    zeta,
    zeta_memo_size,
)

TIGHT = QuadratureConfig(alpha_split=6.0, tail_terms=2000)

# classical constants, printed in any table
APERY = 1.2020569031595942854
ZETA_HALF = -1.4603545088095868


class TestZeta:
    def test_frozen_grid(self):
        for (sg, t), (re, im) in ZETA_VALUES.items():
            got = zeta(complex(sg, t))
            assert abs(got - complex(re, im)) < 1e-13, (sg, t)

    def test_basel(self):
        assert abs(zeta(2 + 0j) - math.pi ** 2 / 6) < 1e-14

    def test_apery_with_bracket(self):
        """zeta(3) against the published constant, and against a direct
        partial sum with a two-sided integral tail bracket."""
        z3 = zeta(3 + 0j)
        assert z3.imag == 0.0
        assert abs(z3.real - APERY) < 1e-13
        N = 20000
        partial = float(np.sum(np.arange(1, N + 1, dtype=float) ** -3.0))
        lo = partial + 0.5 / (N + 1) ** 2
        hi = partial + 0.5 / N ** 2
        assert lo < z3.real < hi

    def test_real_axis_below_one(self):
        assert abs(zeta(0.5 + 0j).real - ZETA_HALF) < 1e-13

    def test_conjugate_symmetry(self):
        for (sg, t) in [(0.5, 37.6), (0.8, 123.4), (2.5, 9.1)]:
            a = zeta(complex(sg, t))
            b = zeta(complex(sg, -t))
            assert abs(a - b.conjugate()) < 1e-14 * abs(a)

    def test_pole(self):
        with pytest.raises(ZetaPoleError):
            zeta(1 + 0j)

    def test_near_first_zero(self):
        z = zeta(complex(0.5, 14.134725141734693))
        assert abs(z) < 1e-6

    def test_memo_and_cache_file(self, tmp_path):
        zeta(0.75 + 5.125j)
        assert zeta_memo_size() > 0
        path = tmp_path / "grid.bin"
        n = dump_zeta_cache(path)
        assert n == zeta_memo_size()
        assert warm_zeta_cache(path) == n
        # a planted record must short-circuit evaluation
        with open(path, "wb") as fh:
            fh.write(b"ZGRD1")
            import struct
            fh.write(struct.pack("<4d", 0.123456, 789.0123, 42.0, -7.0))
        warm_zeta_cache(path)
        assert zeta(complex(0.123456, 789.0123)) == complex(42.0, -7.0)

    def test_cache_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"XXXXX" + b"\0" * 64)
        with pytest.raises(ValueError):
            warm_zeta_cache(path)


class TestBranchedLog:
    def test_real_axis_sigma_three(self):
        bl = log_zeta_branched(3.0, 0.0)
        assert bl.value.imag == pytest.approx(0.0, abs=1e-14)
        assert bl.value.real == pytest.approx(
            math.log(zeta(3 + 0j).real), abs=1e-13)
        assert bl.unwind_count == 0
        assert bl.path_origin_sigma >= 10.0

    def test_exp_consistency_sample(self):
        """exp(branched log) reproduces zeta at random points; flagged
        near-zero paths are skipped and counted."""
        rng = np.random.default_rng(2024)
        checked = 0
        flagged = 0
        for _ in range(100):
            sg = rng.uniform(0.5, 3.0)
            t = rng.uniform(1.0, 200.0)
            try:
                bl = log_zeta_branched(sg, t)
            except NearZeroOnPath:
                flagged += 1
                continue
            z = zeta(complex(sg, t))
            assert abs(cmath.exp(bl.value) - z) <= 1e-10 * abs(z), (sg, t)
            checked += 1
        assert checked >= 90
        assert flagged < 10

    def test_sigma_two_lambda_series(self):
        """sigma=2, t=100 against the absolutely convergent series; the
        oracle's own truncation tail bounds the allowed gap."""
        bl = log_zeta_branched(2.0, 100.0)
        N = 10 ** 5
        vm = von_mangoldt_table(N)
        ns = np.flatnonzero(vm[2:]) + 2
        lg = np.log(ns.astype(float))
        series = complex(np.dot(vm[ns] / lg * ns ** -2.0,
                                np.exp(-1j * 100.0 * lg)))
        tail_bound = 1.0 / (N * math.log(N)) * 1.1
        assert abs(bl.value - series) <= tail_bound + 1e-10

    def test_s0_frozen(self):
        for t, want in S0_VALUES.items():
            bl = log_zeta_branched(0.5, float(t))
            assert bl.value.imag / math.pi == pytest.approx(want, abs=1e-12)

    def test_near_zero_flagged_at_ordinate(self):
        with pytest.raises(NearZeroOnPath):
            log_zeta_branched(0.5, ZERO_ORDINATES_BELOW_55[0])

    def test_t_zero_pole_path(self):
        with pytest.raises(NearZeroOnPath):
            log_zeta_branched(0.5, 0.0)


class TestEtaTilde:
    def test_m_zero_guarded(self):
        with pytest.raises(ValueError):
            eta_tilde(0, 0.5, 30.0)

    @pytest.mark.parametrize("m,t,tail_power", [(1, 0.0, 1), (1, 10.0, 1),
                                                (2, 0.0, 2), (2, 5.0, 2)])
    def test_sigma_two_series_oracle(self, m, t, tail_power):
        """sigma=2 against sum Lambda(n) n^{-2-it} (log n)^{-m-1} to 1e5;
        gap bounded by the oracle's certified truncation tail
        ~ 1/(N log^tail_power N)."""
        got = eta_tilde(m, 2.0, t, TIGHT)
        oracle = lambda_sum(m, 2.0, 1e5, t)
        tail_bound = 1.1 / (1e5 * math.log(1e5) ** tail_power)
        assert abs(got - oracle) <= tail_bound + 1e-10

    def test_tail_refinement_consistency(self):
        """Doubling tail_terms and alpha_split moves the value by less
        than the coarser configuration's certified remainder."""
        coarse = QuadratureConfig(alpha_split=4.0, tail_terms=500)
        fine = QuadratureConfig(alpha_split=6.0, tail_terms=2000)
        a = eta_tilde(1, 2.0, 3.0, coarse)
        b = eta_tilde(1, 2.0, 3.0, fine)
        assert abs(a - b) < 2.0 * 500 ** (1 - 4.0)

    def test_critical_line_finite(self):
        v = eta_tilde(1, 0.5, 30.0, TIGHT)
        assert np.isfinite(v.real) and np.isfinite(v.imag)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QuadratureConfig(alpha_split=1.5)
        with pytest.raises(ValueError):
            QuadratureConfig(tail_terms=8)


class TestRealAxisConstants:
    def test_c1_structure_and_value(self):
        c1 = c_constant(1, 0.5, TIGHT)
        assert c1.real == 0.0            # i^1 times a real
        assert c1.imag > 0               # the integral is positive
        assert c1.imag == pytest.approx(J1_HALF, abs=1e-12)

    def test_c2_structure_and_value(self):
        c2 = c_constant(2, 0.5, TIGHT)
        assert c2.imag == 0.0            # i^2 = -1 keeps it real
        assert -c2.real == pytest.approx(J2_HALF, abs=1e-12)

    def test_b1_frozen(self):
        assert b_constant(1, TIGHT) == pytest.approx(B1, abs=1e-12)

    def test_b2_exactly_zero(self):
        assert b_constant(2, TIGHT) == 0.0

    def test_b3_sign(self):
        # i^3 = -i flips the sign of the (positive) integral
        assert b_constant(3, TIGHT) < 0

    def test_m_validation(self):
        with pytest.raises(ValueError):
            c_constant(0, 0.5)
        with pytest.raises(ValueError):
            b_constant(0)


class TestSm:
    def test_s0_matches_frozen(self):
        for t, want in S0_VALUES.items():
            assert s_m(0, float(t)) == pytest.approx(want, abs=1e-12)

    def test_s1_at_zero_is_b1(self):
        assert s_m(1, 0.0, TIGHT) == b_constant(1, TIGHT)

    def test_t_zero_pole(self):
        with pytest.raises(NearZeroOnPath):
            s_m(0, 0.0)

    def test_negative_m(self):
        with pytest.raises(ValueError):
            s_m(-1, 10.0)

    @pytest.mark.parametrize("t", [20.0, 30.0, 50.0])
    def test_identity_suite(self, t):
        """pi s_1(t) = Re eta_tilde(1, 1/2, t), unconditionally."""
        lhs = math.pi * s_m(1, t, TIGHT)
        rhs = eta_tilde(1, 0.5, t, TIGHT).real
        assert abs(lhs - rhs) <= 1e-6

    @pytest.mark.slow
    def test_s2_consistency(self):
        """s_2(t) - b_2 should match a crude Simpson pass over s_1."""
        t = 1.5
        v = s_m(2, t, TIGHT)
        us = np.linspace(0.0, t, 9)
        s1 = [s_m(1, float(u), TIGHT) for u in us]
        h = us[1] - us[0]
        simpson = h / 3 * (s1[0] + 4 * sum(s1[1:-1:2]) + 2 * sum(s1[2:-2:2])
                           + s1[-1])
        assert v == pytest.approx(simpson + b_constant(2, TIGHT), abs=5e-4)
