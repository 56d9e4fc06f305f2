"""Exceedance measurement, saddle solvers, and predicted tail exponents.

The measured object is the fraction of grid points where the rotated value
Re e^{-i theta} F(sigma + it) exceeds V, with F either the prime polynomial
(streamed through the batch kernel) or the iterated integral itself (one
quadrature per grid point, desk-scale grids only).  Counting is a single
pass per block against a sorted V grid; block counts are integers, so the
reduction is deterministic in any order.

Predictions come in four families, one per asymptotic law:

    critical_poly   2m 4^m V^2 (log V)^{2m} / (1 - (log V^2/log X)^m)
    critical_eta    2m 4^m V^2 (log V)^{2m}
    strip_poly      A_m(sigma) V^{1/(1-sigma)} (log V)^{(m+sigma)/(1-sigma)}
    strip_eta       same exponent as strip_poly

each with its error window R evaluated with constant 1 and advisory
range flags against configurable ceilings a_1..a_6 (never branched on).
The critical_poly denominator carries the power m while the related
saddle equation carries 2m; the mismatch is intentional and neither
form is folded into the other.

The saddle solvers invert

    V = 2x/(8m (2 log x)^{2m}) (1 - (log x^2/log X)^{2m})      (critical)
    V = sigma^{m/sigma} G(sigma) x^{1/sigma-1}
        / (sigma (log x)^{m/sigma+1})                           (strip)

for x on [3, 1e12] by a geometric scan for the rising-branch sign change
followed by safeguarded Newton.  Both curves rise and fall (the critical
bracket dies at x = sqrt(X); the strip curve dips before its stationary
point), so the scan keeps the LAST upcrossing, which is the branch the
closed-form approximations describe.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .prime_poly import PolySpec, PrimeTable, TGrid, iter_poly_blocks, max_spacing
from .special_fn import a_constant, g_constant
from .zeta_core import NearZeroOnPath, QuadratureConfig, eta_tilde, log_zeta_branched

__all__ = [
    "AdvisoryConstants",
    "TailPrediction",
    "ExceedanceCurve",
    "FAMILIES",
    "measure_exceedance_poly",
    "measure_exceedance_poly_multi",
    "measure_exceedance_eta",
    "solve_saddle_critical",
    "solve_saddle_strip",
    "predict_tail",
    "trim_set_A",
    "default_trim_w",
]

FAMILIES = ("critical_poly", "critical_eta", "strip_poly", "strip_eta")

MAX_ETA_GRID = 100_000          # each eta point costs a quadrature
SADDLE_LO = 3.0
SADDLE_HI = 1e12


@dataclass(frozen=True)
class AdvisoryConstants:
    """Unnamed range constants; advisory flags only, never branched on."""

    a1: float = 0.01
    a2: float = 0.01
    a3: float = 0.01
    a4: float = 0.01
    a5: float = 0.01
    a6: float = 0.01
    b1: float = 0.01
    b2: float = 0.01
    b3: float = 0.01
    b4: float = 0.01
    b5: float = 0.01
    b6: float = 0.01


@dataclass(frozen=True)
class TailPrediction:
    """Predicted log-measure: fraction ~ exp(-exponent), window on (1+R)."""

    exponent: float
    family: str
    error_window: float
    validity: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.exponent > 0.0:
            raise ValueError(f"exponent must be positive, got {self.exponent}")
        if not self.error_window >= 0.0:
            raise ValueError("error_window must be >= 0")


@dataclass(frozen=True)
class ExceedanceCurve:
    """Per-V exceedance fractions on a fixed grid.

    below_resolution marks zero-count entries (estimate under 1/count);
    excluded_count reports grid points dropped by the eta route when the
    continuation path strayed too near a zero.
    """

    V_grid: np.ndarray
    measure_fraction: np.ndarray
    exceed_counts: np.ndarray
    grid: TGrid
    below_resolution: np.ndarray = field(default=None)
    flags: tuple = ()
    excluded_count: int = 0

    def __post_init__(self):
        v = self.V_grid
        if v.ndim != 1 or v.size == 0 or not np.all(np.diff(v) > 0):
            raise ValueError("V_grid must be strictly ascending")
        if self.measure_fraction.shape != v.shape \
                or self.exceed_counts.shape != v.shape:
            raise ValueError("curve arrays must match V_grid")
        if np.any(np.diff(self.exceed_counts) > 0):
            raise ValueError("exceedance must be nonincreasing in V")
        if np.any((self.measure_fraction < 0) | (self.measure_fraction > 1)):
            raise ValueError("fractions must lie in [0, 1]")
        if self.below_resolution is None:
            object.__setattr__(self, "below_resolution", self.exceed_counts == 0)


def _check_v_grid(V_grid) -> np.ndarray:
    v = np.asarray(V_grid, dtype=float)
    if v.ndim != 1 or v.size == 0 or not np.all(np.diff(v) > 0):
        raise ValueError("V_grid must be 1-d and strictly ascending")
    return v


def _exceed_counts(values: np.ndarray, v: np.ndarray) -> np.ndarray:
    # strict exceedance: side='left' puts ties at V_j on the non-exceeding side
    idx = np.searchsorted(v, values, side="left")
    hist = np.bincount(idx, minlength=v.size + 1)
    return np.cumsum(hist[::-1])[::-1][1:].astype(np.int64)


def measure_exceedance_poly_multi(specs, table: PrimeTable, grid: TGrid,
                                  V_grid) -> list[ExceedanceCurve]:
    """One streaming pass, one curve per spec; specs differ only in theta.

    The complex block values serve every rotation, so a theta sweep costs
    a single GEMM pass.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one spec")
    base = specs[0]
    for s in specs[1:]:
        if (s.m, s.sigma, s.X) != (base.m, base.sigma, base.X):
            raise ValueError("specs in one pass must share (m, sigma, X)")
    if grid.delta > max_spacing(base.X) * (1.0 + 1e-12):
        raise ValueError(
            f"grid spacing {grid.delta} violates the rule for X={base.X}")
    v = _check_v_grid(V_grid)
    cos_t = [math.cos(s.theta) for s in specs]
    sin_t = [math.sin(s.theta) for s in specs]
    counts = np.zeros((len(specs), v.size), dtype=np.int64)
    for _, z in iter_poly_blocks(base, table, grid):
        for i in range(len(specs)):
            counts[i] += _exceed_counts(cos_t[i] * z.real + sin_t[i] * z.imag, v)
    return [ExceedanceCurve(V_grid=v.copy(),
                            measure_fraction=counts[i] / grid.count,
                            exceed_counts=counts[i].copy(), grid=grid)
            for i in range(len(specs))]


def measure_exceedance_poly(spec: PolySpec, table: PrimeTable, grid: TGrid,
                            V_grid) -> ExceedanceCurve:
    """Fraction of grid points with P(t) > V, per V."""
    return measure_exceedance_poly_multi([spec], table, grid, V_grid)[0]


def measure_exceedance_eta(m: int, sigma: float, theta: float, grid: TGrid,
                           V_grid, cfg: QuadratureConfig | None = None
                           ) -> ExceedanceCurve:
    """Exceedance of Re e^{-i theta} eta_m(sigma + it) on a desk grid.

    m = 0 evaluates the branched log directly.  Points whose continuation
    path runs too close to a zero are excluded and counted; more than 1%
    of them flags the whole curve.  Fractions keep the full grid count as
    denominator so exclusions can only lower the curve.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if not sigma >= 0.5:
        raise ValueError(f"sigma must be >= 1/2, got {sigma}")
    if grid.count > MAX_ETA_GRID:
        raise ValueError(
            f"grid has {grid.count} points; eta exceedance caps at {MAX_ETA_GRID}")
    v = _check_v_grid(V_grid)
    ct, st = math.cos(theta), math.sin(theta)
    vals = []
    excluded = 0
    for j in range(grid.count):
        t = grid.t(j)
        try:
            if m == 0:
                e = log_zeta_branched(sigma, t, cfg=cfg).value
            else:
                e = eta_tilde(m, sigma, t, cfg=cfg)
        except NearZeroOnPath:
            excluded += 1
            continue
        vals.append(ct * e.real + st * e.imag)
    counts = _exceed_counts(np.asarray(vals), v)
    flags = ()
    if excluded > 0.01 * grid.count:
        flags = ("exclusions_above_1pct",)
    return ExceedanceCurve(V_grid=v.copy(), measure_fraction=counts / grid.count,
                           exceed_counts=counts, grid=grid, flags=flags,
                           excluded_count=excluded)


# ---------------------------------------------------------------------------
# saddle solvers


def _solve_rising(g, gp, v_scale: float, label: str) -> float:
    """Root of g on the rising branch inside [SADDLE_LO, SADDLE_HI].

    Geometric scan (ratio sqrt 2) keeps the last minus-to-plus crossing,
    then safeguarded Newton: every iterate tightens the bisection bracket,
    and a Newton step is taken only when it stays inside.
    """
    xs = [SADDLE_LO]
    while xs[-1] < SADDLE_HI:
        xs.append(min(xs[-1] * math.sqrt(2.0), SADDLE_HI))
    gvals = [g(x) for x in xs]
    bracket = None
    for a, b, ga, gb in zip(xs, xs[1:], gvals, gvals[1:]):
        if ga <= 0.0 < gb:
            bracket = (a, b)
    if bracket is None:
        raise ValueError(
            f"no sign change for {label} saddle in [{SADDLE_LO}, {SADDLE_HI:g}]")
    lo, hi = bracket
    x = 0.5 * (lo + hi)
    for _ in range(200):
        val = g(x)
        if abs(val) <= 1e-13 * v_scale:
            return x
        if val > 0.0:
            hi = x
        else:
            lo = x
        d = gp(x)
        if d != 0.0:
            step = x - val / d
            x = step if lo < step < hi else 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
    raise RuntimeError(f"{label} saddle iteration stalled near x={x}")


def solve_saddle_critical(V: float, X: float, m: int) -> float:
    """x solving V = 2x/(8m (2 log x)^{2m}) (1 - (log x^2/log X)^{2m}).

    The right side simplifies to (x (2 log x)^{-2m} - x (log X)^{-2m})/(4m),
    which rises, peaks, and dies at x = sqrt(X); the root returned is the
    rising-branch crossing.  Residual contract: |lhs - rhs| <= 1e-12 V.
    """
    if not V >= 3.0:
        raise ValueError(f"V must be >= 3, got {V}")
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if not X >= V ** 4:
        raise ValueError(f"X must be >= V^4 = {V ** 4:g}, got {X}")
    inv_l2m = math.log(X) ** (-2.0 * m)

    def g(x: float) -> float:
        u = math.log(x)
        return (x * (2.0 * u) ** (-2.0 * m) - x * inv_l2m) / (4.0 * m) - V

    def gp(x: float) -> float:
        u = math.log(x)
        return ((2.0 * u) ** (-2.0 * m) * (1.0 - 2.0 * m / u) - inv_l2m) \
            / (4.0 * m)

    return _solve_rising(g, gp, V, "critical")


@functools.lru_cache(maxsize=64)
def _g_cached(sigma: float) -> float:
    return g_constant(sigma)


def solve_saddle_strip(V: float, sigma: float, m: int) -> float:
    """x solving V = sigma^{m/sigma} G(sigma) x^{1/sigma-1}
    / (sigma (log x)^{m/sigma+1}).

    The curve dips until log x = (m + sigma)/(1 - sigma) and rises after;
    the root returned is on the rising branch.  Residual <= 1e-12 V.
    """
    if not V >= 3.0:
        raise ValueError(f"V must be >= 3, got {V}")
    if not 0.5 < sigma < 1.0:
        raise ValueError(f"sigma must be in (1/2, 1), got {sigma}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    coef = sigma ** (m / sigma) * _g_cached(sigma) / sigma
    growth = 1.0 / sigma - 1.0
    logpow = m / sigma + 1.0

    def g(x: float) -> float:
        return coef * x ** growth * math.log(x) ** (-logpow) - V

    def gp(x: float) -> float:
        u = math.log(x)
        return coef * x ** (growth - 1.0) * u ** (-logpow) * (growth - logpow / u)

    return _solve_rising(g, gp, V, "strip")


# ---------------------------------------------------------------------------
# predictions


@functools.lru_cache(maxsize=64)
def _a_cached(m: int, sigma: float) -> float:
    return a_constant(m, sigma, g_value=_g_cached(sigma))


def _require(params: dict, family: str, *names: str) -> list:
    got = []
    for name in names:
        if name not in params or params[name] is None:
            raise ValueError(f"family {family} requires parameter {name!r}")
        got.append(params[name])
    return got


def _loglog(v: float) -> float:
    return math.log(math.log(v))


def predict_tail(family: str, V: float, params: dict,
                 constants: AdvisoryConstants | None = None) -> TailPrediction:
    """Predicted exponent E (fraction ~ exp(-E)) with its error window.

    params carries m plus, per family: X (critical_poly), T (critical_eta;
    optional elsewhere, enabling the T-dependent range flags), sigma (strip
    families).  theta is accepted and ignored: every law here is free of
    the rotation angle.  Validity flags are advisory range checks against
    the a_i ceilings; values are always returned.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if not V >= 3.0:
        raise ValueError(f"V must be >= 3, got {V}")
    cst = constants or AdvisoryConstants()
    m = int(_require(params, family, "m")[0])
    T = params.get("T")
    lv, llv = math.log(V), _loglog(V)
    flags: list[str] = []

    if family in ("critical_poly", "critical_eta"):
        if m < 1:
            raise ValueError(f"family {family} requires m >= 1, got {m}")
        if params.get("sigma") not in (None, 0.5):
            raise ValueError(f"family {family} is pinned to sigma = 1/2")
        base = 2.0 * m * 4.0 ** m * V * V * lv ** (2 * m)
        if family == "critical_poly":
            X = float(_require(params, family, "X")[0])
            ratio = math.log(V ** 2) / math.log(X)
            denom = 1.0 - ratio ** m
            if denom <= 0.0:
                raise ValueError(f"X = {X:g} too small: denominator {denom:g}")
            exponent = base / denom
            window = math.sqrt(llv / lv)
            if X < V ** 4:
                flags.append("x_below_v4")
            if T is not None:
                lt, llt = math.log(T), _loglog(T)
                if V > cst.a2 * math.sqrt(lt) / llt ** (m + 0.5):
                    flags.append("v_above_a2")
                if math.log(X) > cst.a3 / (V * V * lv ** (2 * m)) * lt:
                    flags.append("x_above_a3")
        else:
            exponent = base
            (T,) = _require(params, family, "T")
            lt, llt = math.log(T), _loglog(T)
            window = (V ** (2 * m + 1) * lv ** (2 * m * (m + 1)) / lt ** m
                      + math.sqrt(llv / lv))
            if V > cst.a1 * (lt / llt ** (2 * m + 2)) ** (m / (2 * m + 1)):
                flags.append("v_above_a1")
    else:
        if m < 0:
            raise ValueError(f"m must be >= 0, got {m}")
        sigma = float(_require(params, family, "sigma")[0])
        if not 0.5 < sigma < 1.0:
            raise ValueError(f"strip families need sigma in (1/2, 1), got {sigma}")
        exponent = (_a_cached(m, sigma) * V ** (1.0 / (1.0 - sigma))
                    * lv ** ((m + sigma) / (1.0 - sigma)))
        window = math.sqrt((1.0 + m * llv) / lv)
        if family == "strip_poly":
            X = float(_require(params, family, "X")[0])
            if X < V ** (4.0 * sigma / (1.0 - sigma)):
                flags.append("x_below_strip_range")
            if T is not None:
                lt = math.log(T)
                # ceiling: log X <= a6 log T / (V^{1/(1-s)} (log V)^{(m+s)/(1-s)})
                v_term = exponent / _a_cached(m, sigma)
                if math.log(X) > cst.a6 * lt / v_term:
                    flags.append("x_above_a6")
                if V > cst.a5 * lt ** (1.0 - sigma) / _loglog(T) ** (m + 1):
                    flags.append("v_above_a5")
        elif T is not None:
            lt = math.log(T)
            if V > cst.a4 * lt ** (1.0 - sigma) / _loglog(T) ** (m + 1):
                flags.append("v_above_a4")

    return TailPrediction(exponent=exponent, family=family,
                          error_window=window, validity=tuple(flags))


def default_trim_w(m: int, V: float, k1: float = 1.0) -> float:
    """The critical-line proof choice W = 8m 4^m K1 V (K1 defaults to 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return 8.0 * m * 4.0 ** m * k1 * V


def trim_set_A(spec: PolySpec, table: PrimeTable, grid: TGrid,
               W: float) -> tuple[np.ndarray, float]:
    """Indices with |Z(t_j)| <= W plus the complement measure fraction.

    The modulus is the full unrotated polynomial's, so one trim serves
    every theta.  The complement fraction is what the exponential-decay
    bound exp(-b1 W^{1/(1-sigma)} (log W)^{(m+kappa)/(1-sigma)}) describes.
    """
    if (spec.m, spec.sigma) == (0, 0.5):
        raise ValueError("(m, sigma) = (0, 1/2) is outside the trimmed-set range")
    if not W >= 0.0:
        raise ValueError(f"W must be >= 0, got {W}")
    parts = []
    for j0, z in iter_poly_blocks(spec, table, grid):
        sel = np.nonzero(np.abs(z) <= W)[0]
        if sel.size:
            parts.append(sel.astype(np.int64) + j0)
    indices = (np.concatenate(parts) if parts
               else np.empty(0, dtype=np.int64))
    return indices, 1.0 - indices.size / grid.count
