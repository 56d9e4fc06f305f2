"""The nine acceptance criteria behind `zel selfcheck`.

Each criterion runs at fixed parameters and tolerances and returns a
CriterionResult: a PASS/FAIL headline with the measured numbers plus
per-point detail lines.  Criteria whose windows are not reachable at
desk scale (they encode asymptotic statements) still run unmodified and
report the miss honestly; nothing here softens a tolerance to stay
green.

Tolerance overrides (CLI --tol NAME=VALUE) by criterion:

    c1_pair_rel c1_emp_low c1_emp_k6        triple agreement
    c2_scale c2_emp                         odd-moment vanishing
    c3_abs                                  S_1 identity
    c4_abs                                  sigma > 1 series oracle
    c5_window_mult                          Bessel-product asymptotics
    c6_rel                                  exp-moment identity
    c7_ratio_lo c7_ratio_hi                 tail trend
    c8_resid_mult c8_slack_mult             saddle consistency
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .moments import (
    bessel_product,
    contour_moment,
    empirical_moment,
    exact_moment,
    exp_moment_trimmed,
)
from .prime_poly import PolySpec, TGrid, cached_table, lambda_sum
from .special_fn import a_constant, g_constant
from .tails import measure_exceedance_poly_multi, solve_saddle_critical, \
    solve_saddle_strip
from .zeta_core import QuadratureConfig, eta_tilde, s_m

# alpha_split high enough that the Lambda tail is deep in its convergent
# range; matches the identity's measured 1e-9..1e-10 residuals
TIGHT_CFG = QuadratureConfig(alpha_split=6.0, tail_terms=2000)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool | None          # None marks a skipped criterion
    detail: str
    lines: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def __post_init__(self) -> None:
        # numpy comparisons produce np.bool_; keep the field a plain bool
        if self.passed is not None:
            self.passed = bool(self.passed)

    def headline(self) -> str:
        word = {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]
        return (f"{word} criterion {self.number} ({self.name}): "
                f"{self.detail} [{self.elapsed:.1f}s]")


def _tol(tolerances: dict | None, name: str, default: float) -> float:
    return float((tolerances or {}).get(name, default))


# ---------------------------------------------------------------------------
# criteria


def criterion_1(tolerances=None, cache_dir=None) -> CriterionResult:
    """Moment triple agreement at sigma=1/2, m=1, X=31, T=1e6."""
    t0 = time.perf_counter()
    pair_tol = _tol(tolerances, "c1_pair_rel", 1e-10)
    emp_low = _tol(tolerances, "c1_emp_low", 0.02)
    emp_k6 = _tol(tolerances, "c1_emp_k6", 0.05)
    table = cached_table(31, cache_dir)
    grid = TGrid.for_span(1e6, 31.0)
    lines, ok = [], True
    worst_pair = worst_emp = 0.0
    for theta in (0.0, 0.7):
        spec = PolySpec(m=1, sigma=0.5, theta=theta, X=31.0)
        for k in (2, 4, 6):
            ex = exact_moment(spec, k).value
            co = contour_moment(spec, k, table).value
            em = empirical_moment(spec, table, grid, k).value
            pair = abs(co - ex) / abs(ex)
            emp = abs(em - ex) / abs(ex)
            bound = emp_k6 if k == 6 else emp_low
            ok &= pair <= pair_tol and emp <= bound
            worst_pair = max(worst_pair, pair)
            worst_emp = max(worst_emp, emp)
            lines.append(f"theta={theta} k={k}: exact/contour rel {pair:.2e}"
                         f" (<= {pair_tol:.0e}), empirical rel {emp:.2e}"
                         f" (<= {bound})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 120.0
    return CriterionResult(1, "moment triple agreement", ok,
                           f"max exact/contour rel {worst_pair:.2e}, "
                           f"max empirical rel {worst_emp:.2e}",
                           lines, elapsed)


def criterion_2(tolerances=None, cache_dir=None) -> CriterionResult:
    """Odd moments vanish: analytic routes to 1e-12 scale, empirical k=1."""
    t0 = time.perf_counter()
    scale_tol = _tol(tolerances, "c2_scale", 1e-12)
    emp_tol = _tol(tolerances, "c2_emp", 1e-2)
    spec = PolySpec(m=1, sigma=0.5, theta=0.7, X=31.0)
    table = cached_table(31, cache_dir)
    scale = exact_moment(spec, 2).value
    lines, ok = [], True
    for k in (1, 3, 5):
        ex = exact_moment(spec, k).value
        co = contour_moment(spec, k, table).value
        ok &= abs(ex) <= scale_tol * scale and abs(co) <= scale_tol * scale
        lines.append(f"k={k}: exact {ex:.1e}, contour {abs(co):.2e}"
                     f" (<= {scale_tol * scale:.2e})")
    grid = TGrid.for_span(1e6, 31.0)
    em1 = empirical_moment(spec, table, grid, 1).value
    bound = emp_tol * math.sqrt(scale)
    ok &= abs(em1) <= bound
    lines.append(f"empirical k=1: {em1:.2e} (<= {bound:.2e})")
    return CriterionResult(2, "odd-moment vanishing", ok,
                           f"analytic odd moments <= {scale_tol * scale:.1e}, "
                           f"empirical k=1 {abs(em1):.1e}",
                           lines, time.perf_counter() - t0)


def criterion_3(tolerances=None, cache_dir=None) -> CriterionResult:
    """pi s_1(t) equals Re of the m=1 iterated integral on the half line."""
    t0 = time.perf_counter()
    tol = _tol(tolerances, "c3_abs", 1e-6)
    lines, ok = [], True
    worst = 0.0
    for t in (20.0, 30.0, 50.0):
        lhs = math.pi * s_m(1, t, cfg=TIGHT_CFG)
        rhs = eta_tilde(1, 0.5, t, cfg=TIGHT_CFG).real
        r = abs(lhs - rhs)
        worst = max(worst, r)
        ok &= r <= tol
        lines.append(f"t={t:g}: |pi s_1 - Re integral| = {r:.3e} (<= {tol:g})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 300.0
    return CriterionResult(3, "S_1 identity", ok,
                           f"max residual {worst:.3e}", lines, elapsed)


def criterion_4(tolerances=None, cache_dir=None) -> CriterionResult:
    """sigma=2 series oracle: integral route vs truncated Lambda sum."""
    t0 = time.perf_counter()
    tol = _tol(tolerances, "c4_abs", 1e-8)
    table = cached_table(100_000, cache_dir)
    lines, ok = [], True
    worst = 0.0
    for m in (1, 2):
        for t in (0.0, 10.0):
            # tight cfg keeps the integral side's own error well under the
            # 1e-8 bar, so the check sees the series truncation, not noise
            d = abs(eta_tilde(m, 2.0, t, cfg=TIGHT_CFG)
                    - lambda_sum(m, 2.0, 1e5, t, table=table))
            worst = max(worst, d)
            good = d <= tol
            ok &= good
            lines.append(f"m={m} t={t:g}: |diff| = {d:.3e} (<= {tol:g})"
                         + ("" if good else "  <-- over"))
    return CriterionResult(4, "series oracle at sigma=2", ok,
                           f"max |diff| {worst:.3e} vs {tol:g}",
                           lines, time.perf_counter() - t0)


def criterion_5(tolerances=None, cache_dir=None) -> CriterionResult:
    """Bessel-product vs main-term windows, X = x^3 ladder."""
    t0 = time.perf_counter()
    mult = _tol(tolerances, "c5_window_mult", 10.0)
    table = cached_table(1_000_000, cache_dir)
    lines, ok = [], True

    def ladder(label, mk_spec, main_of):
        nonlocal ok
        devs = []
        for x in (1e3, 1e4):
            X = x ** 3
            lp = bessel_product(mk_spec(X), table, x)
            dev = abs(lp / main_of(x, X) - 1.0)
            window = mult * math.log(math.log(x)) / math.log(x)
            devs.append(dev)
            good = dev <= window
            ok &= good
            lines.append(f"{label} x={x:g}: |ratio-1| = {dev:.3f}"
                         f" (window {window:.3f})"
                         + ("" if good else "  <-- over"))
        decreasing = devs[0] > devs[1]
        ok &= decreasing
        lines.append(f"{label} strictly decreasing: {decreasing}")
        return devs

    def crit_main(x, X):
        # m = 1 critical-line main term with its finite-X bracket
        return x * x / (8.0 * (2.0 * math.log(x)) ** 2) \
            * (1.0 - (math.log(x ** 2) / math.log(X)) ** 2)

    g075 = g_constant(0.75)

    def strip_main(x, X):
        return g075 * x ** (4.0 / 3.0) / math.log(x)

    d1 = ladder("critical m=1", lambda X: PolySpec(1, 0.5, 0.0, X), crit_main)
    d2 = ladder("strip sigma=0.75 m=0",
                lambda X: PolySpec(0, 0.75, 0.0, X), strip_main)
    return CriterionResult(5, "Bessel-product asymptotics", ok,
                           f"critical devs {d1[0]:.2f}/{d1[1]:.2f}, "
                           f"strip devs {d2[0]:.3f}/{d2[1]:.3f}",
                           lines, time.perf_counter() - t0)


def criterion_6(tolerances=None, cache_dir=None) -> CriterionResult:
    """Trimmed exp-moment matches the log Bessel product at x=2, W=20."""
    t0 = time.perf_counter()
    rel = _tol(tolerances, "c6_rel", 0.05)
    spec = PolySpec(m=1, sigma=0.5, theta=0.0, X=31.0)
    table = cached_table(31, cache_dir)
    grid = TGrid.for_span(1e6, 31.0)
    half = TGrid.for_span(1e6, 31.0, refine=2)
    etm = exp_moment_trimmed(spec, table, grid, 2.0, 20.0)
    etm_half = exp_moment_trimmed(spec, table, half, 2.0, 20.0)
    lbp = bessel_product(spec, table, 2.0)
    delta = abs(etm_half - etm)
    gap = abs(etm - lbp)
    bound = rel * abs(lbp) + delta
    ok = gap <= bound
    lines = [f"trimmed log-mean {etm:.6f}, log product {lbp:.6f}",
             f"|gap| = {gap:.2e} (<= {rel} * |log product| + {delta:.2e} "
             f"= {bound:.2e})"]
    return CriterionResult(6, "exp-moment identity", ok,
                           f"gap {gap:.2e} vs bound {bound:.2e}",
                           lines, time.perf_counter() - t0)


def criterion_7(tolerances=None, cache_dir=None) -> CriterionResult:
    """Tail trend at sigma=0.8, X=1e5, T=1e7: log-ratio band, monotonicity,
    theta invariance."""
    t0 = time.perf_counter()
    lo = _tol(tolerances, "c7_ratio_lo", 0.3)
    hi = _tol(tolerances, "c7_ratio_hi", 3.0)
    table = cached_table(100_000, cache_dir)
    grid = TGrid.for_span(1e7, 1e5)
    thetas = (0.0, math.pi / 4, math.pi / 2)
    specs = [PolySpec(m=0, sigma=0.8, theta=th, X=1e5) for th in thetas]
    v_grid = np.arange(1.2, 2.01, 0.2)
    curves = measure_exceedance_poly_multi(specs, table, grid, v_grid)
    a08 = a_constant(0, 0.8, g_value=g_constant(0.8))
    lines, ok = [], True

    base = curves[0]
    band = (base.measure_fraction >= 1e-5) & (base.measure_fraction <= 1e-1)
    ratio_ok = True
    for v, frac in zip(base.V_grid[band], base.measure_fraction[band]):
        exponent = a08 * v ** 5 * math.log(v) ** 4
        ratio = math.log(frac) / -exponent
        good = lo <= ratio <= hi
        ratio_ok &= good
        lines.append(f"V={v:.1f}: fraction {frac:.3e}, ratio {ratio:.1f}"
                     f" (band [{lo}, {hi}])" + ("" if good else "  <-- out"))
    ok &= ratio_ok and band.any()

    monotone = bool(np.all(np.diff(base.exceed_counts) <= 0))
    ok &= monotone
    lines.append(f"curve monotone nonincreasing: {monotone}")

    theta_ok = True
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            fi, fj = curves[i].measure_fraction, curves[j].measure_fraction
            mask = np.minimum(fi, fj) >= 1e-4
            gap = np.abs(fi - fj)[mask]
            tol = 3.0 * np.sqrt(np.maximum(fi, fj)[mask] / grid.count) + 1e-3
            theta_ok &= bool((gap <= tol).all())
    ok &= theta_ok
    lines.append(f"theta invariance over {{0, pi/4, pi/2}}: {theta_ok}")

    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 600.0
    return CriterionResult(7, "tail trend", ok,
                           f"ratio band {'ok' if ratio_ok else 'MISSED'}, "
                           f"monotone {monotone}, theta-invariant {theta_ok}",
                           lines, elapsed)


# 50-point saddle matrix: every point has its root inside the scan range
# (critical needs x < sqrt(X); strip needs the closed-form x under 1e12)
SADDLE_MATRIX = (
    [("critical", V, X, None, 1)
     for X in (1e26, 1e30)
     for V in (1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6)]
    + [("critical", 1e3, 1e30, None, 2), ("critical", 3e3, 1e30, None, 2)]
    + [("strip", V, None, 0.55, 0) for V in (1e3, 3e3, 1e4, 3e4, 1e5, 1e6)]
    + [("strip", V, None, 0.55, 1) for V in (1e3, 3e3, 1e4, 3e4, 1e5)]
    + [("strip", V, None, 0.6, 0) for V in (1e3, 3e3, 1e4, 1e5, 1e6)]
    + [("strip", V, None, 0.6, 1) for V in (100.0, 1e3, 1e4)]
    + [("strip", V, None, 0.65, 0) for V in (1e3, 1e4, 3e4, 1e5)]
    + [("strip", V, None, 0.65, 1) for V in (30.0, 100.0)]
    + [("strip", V, None, 0.7, 0) for V in (1e3, 3e3, 1e4)]
    + [("strip", V, None, 0.7, 1) for V in (3.0, 10.0)]
    + [("strip", V, None, 0.75, 0) for V in (100.0, 300.0, 1e3)]
    + [("strip", V, None, 0.75, 1) for V in (3.0,)]
)


def _critical_display(x, X, m):
    return 2.0 * x / (8.0 * m * (2.0 * math.log(x)) ** (2 * m)) \
        * (1.0 - (math.log(x ** 2) / math.log(X)) ** (2 * m))


def _strip_display(x, sigma, m):
    return sigma ** (m / sigma) * g_constant(sigma) \
        * x ** (1.0 / sigma - 1.0) / (sigma * math.log(x) ** (m / sigma + 1.0))


def criterion_8(tolerances=None, cache_dir=None) -> CriterionResult:
    """Saddle residual matrix plus the closed-form windows at V=1e3, 1e6."""
    t0 = time.perf_counter()
    resid_mult = _tol(tolerances, "c8_resid_mult", 1e-12)
    slack_mult = _tol(tolerances, "c8_slack_mult", 5.0)
    lines, ok = [], True

    assert len(SADDLE_MATRIX) == 50
    worst = 0.0
    for kind, V, X, sigma, m in SADDLE_MATRIX:
        if kind == "critical":
            x = solve_saddle_critical(V, X, m)
            resid = abs(_critical_display(x, X, m) - V)
        else:
            x = solve_saddle_strip(V, sigma, m)
            resid = abs(_strip_display(x, sigma, m) - V)
        worst = max(worst, resid / V)
        ok &= resid <= resid_mult * V
    lines.append(f"50-point residual matrix: worst |lhs-rhs|/V = {worst:.2e}"
                 f" (<= {resid_mult:.0e})")

    def window(v):
        return slack_mult * math.log(math.log(v)) / math.log(v)

    window_ok = True
    # critical closed form 4m 4^m V (log V)^{2m} / (1 - (log V^2/log X)^{2m})
    for V, X in ((1e3, 1e30), (1e6, 1e26)):
        x = solve_saddle_critical(V, X, 1)
        closed = 4.0 * 4.0 * V * math.log(V) ** 2 \
            / (1.0 - (math.log(V ** 2) / math.log(X)) ** 2)
        dev = abs(x / closed - 1.0)
        good = dev <= window(V)
        window_ok &= good
        lines.append(f"critical V={V:g} X={X:g}: |x/closed - 1| = {dev:.3f}"
                     f" (slack {window(V):.3f})" + ("" if good else "  <-- over"))
    # strip closed form (A_m(sigma)/(1-sigma)) V^{s/(1-s)} (log V)^{(m+s)/(1-s)}
    for V, sigma in ((1e3, 0.6), (1e6, 0.6), (1e3, 0.75)):
        m = 0
        x = solve_saddle_strip(V, sigma, m)
        a = a_constant(m, sigma, g_value=g_constant(sigma))
        closed = a / (1.0 - sigma) * V ** (sigma / (1.0 - sigma)) \
            * math.log(V) ** ((m + sigma) / (1.0 - sigma))
        dev = abs(x / closed - 1.0)
        good = dev <= window(V)
        window_ok &= good
        lines.append(f"strip V={V:g} sigma={sigma}: |x/closed - 1| = {dev:.3f}"
                     f" (slack {window(V):.3f})" + ("" if good else "  <-- over"))
    ok &= window_ok
    return CriterionResult(8, "saddle consistency", ok,
                           f"residuals worst {worst:.1e}, closed-form windows "
                           f"{'ok' if window_ok else 'MISSED'}",
                           lines, time.perf_counter() - t0)


def criterion_9(tolerances=None, cache_dir=None) -> CriterionResult:
    """Rerunning identical configs yields byte-identical CSV/JSON files."""
    from . import cli              # deferred: cli imports this module

    t0 = time.perf_counter()
    runs = [
        ["predict", "--family", "strip_eta", "--sigma", "0.75", "--m", "0",
         "--V", "50:200:10"],
        ["moments", "--sigma", "0.5", "--m", "1", "--theta", "0.7",
         "--X", "31", "--T", "1e4", "--k", "1,2,3,4", "--methods", "all"],
        ["tail", "--route", "poly", "--sigma", "0.8", "--m", "0",
         "--X", "31", "--T", "1e4", "--V", "0.5:2.0:0.5"],
    ]
    lines, ok = [], True
    with tempfile.TemporaryDirectory() as tmp:
        for i, args in enumerate(runs):
            for fmt in ("csv", "json"):
                pair = []
                for rep in ("a", "b"):
                    path = os.path.join(tmp, f"{i}{rep}.{fmt}")
                    code = cli.main(args + ["--format", fmt, "--out", path]
                                    + (["--cache-dir", cache_dir]
                                       if cache_dir else []))
                    if code != 0:
                        raise RuntimeError(f"cli exited {code} for {args}")
                    with open(path, "rb") as fh:
                        pair.append(fh.read())
                same = pair[0] == pair[1]
                ok &= same
                lines.append(f"{args[0]} {fmt}: rerun identical: {same}")
    return CriterionResult(9, "determinism", ok,
                           "all reruns byte-identical" if ok
                           else "BYTE MISMATCH on rerun",
                           lines, time.perf_counter() - t0)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)

# everything except the T=1e7 tail sweep finishes in seconds
QUICK_SKIP = {7}


def run_all(quick: bool = False, tolerances: dict | None = None,
            cache_dir: str | None = None) -> list[CriterionResult]:
    results = []
    for fn, number in zip(CRITERIA, range(1, 10)):
        if quick and number in QUICK_SKIP:
            results.append(CriterionResult(
                number, "tail trend", None,
                "skipped under --quick (T=1e7 sweep, ~75s)"))
            continue
        results.append(fn(tolerances=tolerances, cache_dir=cache_dir))
    return results
