"""Acceptance: the nine criteria at their stated tolerances.

One module-scoped run feeds nine per-criterion tests, so `pytest -v` reads
as one pass/fail line per criterion and a failure carries the full detail
block in its message.  Four criteria encode asymptotic statements that
their fixed desk-scale parameters cannot reach; they run unmodified and
fail honestly rather than passing with softened tolerances:

    criterion 4: at (m=1, t=0) the integral-vs-series difference IS the
        all-positive truncation tail of the n <= 1e5 sum, about 6.5e-8
        against the 1e-8 bar; the other three points pass.
    criterion 5: at x = 1e3..1e4 the critical-line log-product still sits
        in its small-prime linear regime, 7..15x above the main term; the
        window needs x beyond ~1e8.  The strip ladder passes the window
        but its deviation peaks at x=1e4, so strict decrease fails.
    criterion 7: over the fraction band [1e-5, 1e-1] the predicted
        exponent stays under 0.4 while |log fraction| exceeds 8, so the
        ratio cannot enter [0.3, 3]; monotonicity and theta invariance
        pass.
    criterion 8: the critical closed form replaces log x by log V, which
        costs a factor (log x/log V)^{2m} ~ 3..6 at V = 1e3..1e6 for any
        X; residuals and the strip windows pass.

The measured numbers behind those four are pinned in the criterion
functions' report lines; see also notes kept outside the package.
"""

import pytest

from zel import acceptance


@pytest.fixture(scope="module")
def report():
    return acceptance.run_all(quick=False)


def _check(report, number):
    res = report[number - 1]
    assert res.number == number
    text = "\n".join([res.headline(), *("    " + ln for ln in res.lines)])
    print(text)
    assert res.passed, "\n" + text


@pytest.mark.slow
def test_criterion_1_moment_triple_agreement(report):
    _check(report, 1)


@pytest.mark.slow
def test_criterion_2_odd_moment_vanishing(report):
    _check(report, 2)


@pytest.mark.slow
def test_criterion_3_s1_identity(report):
    _check(report, 3)


@pytest.mark.slow
def test_criterion_4_series_oracle(report):
    _check(report, 4)


@pytest.mark.slow
def test_criterion_5_bessel_product_asymptotics(report):
    _check(report, 5)


@pytest.mark.slow
def test_criterion_6_exp_moment_identity(report):
    _check(report, 6)


@pytest.mark.slow
def test_criterion_7_tail_trend(report):
    _check(report, 7)


@pytest.mark.slow
def test_criterion_8_saddle_consistency(report):
    _check(report, 8)


@pytest.mark.slow
def test_criterion_9_determinism(report):
    _check(report, 9)


class TestPlumbing:
    def test_tolerance_override_flips_criterion_4(self):
        res = acceptance.criterion_4(tolerances={"c4_abs": 1e-6})
        assert res.passed

    def test_skip_headline(self):
        res = acceptance.CriterionResult(7, "tail trend", None, "skipped")
        assert res.headline().startswith("SKIP criterion 7")

    def test_matrix_size(self):
        assert len(acceptance.SADDLE_MATRIX) == 50
