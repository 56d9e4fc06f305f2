"""Moments of the prime polynomial by three independent routes.

For P(t) = Re e^{-i theta} sum_{p<=X} p^{-sigma-it} (log p)^{-m}, the k-th
moment (1/T) int_T^{2T} P(t)^k dt has a closed main term

    k! sum_{Omega(n)=k} f(n) g_X(n) n^{-sigma},

where f is the cosine-product mean (multiplicative, f(p^a) = 2^-a C(a, a/2),
zero on odd exponents) and g_X(p^a) = 1/(a! (log p)^{am}).  This module
computes that sum exactly by enumeration, re-derives it as a contour
integral of the Bessel generating product

    (k!/2 pi i) oint w^{-k-1} prod_{p<=X} I0(w p^-sigma (log p)^-m) dw,

and measures it empirically on a TGrid.  The three routes share no code
path past the prime table, so their agreement is a genuine cross-check.

Also here: the generating product itself in log form (with an analytic
prime-density tail for X past the sieve limit) and the trimmed exponential
moment that ties the product to a time average over {|Z(t)| <= W}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special as sc

from .prime_poly import PolySpec, PrimeTable, TGrid, _spec_arrays, iter_poly_blocks, sieve
from .quadrature import integrate_adaptive
from .special_fn import log_bessel_i0

__all__ = [
    "MultiplicativeWeights",
    "MomentResult",
    "f_value",
    "exact_moment",
    "contour_moment",
    "empirical_moment",
    "bessel_product",
    "exp_moment_trimmed",
]

# enumeration budget for exact_moment; contour relaxes the prime bound
MAX_EXACT_PRIMES = 30
MAX_EXACT_K = 12
MAX_CONTOUR_PRIMES = 100_000

METHOD_EMPIRICAL = "empirical"
METHOD_EXACT = "exact_multiplicative"
METHOD_CONTOUR = "contour"


@dataclass(frozen=True)
class MultiplicativeWeights:
    """The two prime-power weights behind the exact moment formula."""

    m: int
    X: float

    def f_prime_power(self, alpha: int) -> Fraction:
        """f(p^alpha) = 2^-alpha C(alpha, alpha/2), zero for odd alpha."""
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if alpha % 2:
            return Fraction(0)
        return Fraction(math.comb(alpha, alpha // 2), 2 ** alpha)

    def g_prime_power(self, p: int, alpha: int) -> float:
        """g_X(p^alpha) = 1/(alpha! (log p)^{alpha m}) for p <= X, else 0."""
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if p > self.X:
            return 0.0
        return 1.0 / (math.factorial(alpha) * math.log(p) ** (alpha * self.m))


def f_value(n: int) -> Fraction:
    """Multiplicative extension of f(p^alpha) = 2^-alpha C(alpha, alpha/2).

    Vanishes whenever any prime divides n to an odd power, so it is
    supported on the squarefull-with-even-exponents integers.
    """
    if n < 1:
        raise ValueError(f"f_value wants n >= 1, got {n}")
    out = Fraction(1)
    rest = n
    d = 2
    while d * d <= rest:
        if rest % d == 0:
            alpha = 0
            while rest % d == 0:
                rest //= d
                alpha += 1
            if alpha % 2:
                return Fraction(0)
            out *= Fraction(math.comb(alpha, alpha // 2), 2 ** alpha)
        d += 1 if d == 2 else 2
    if rest > 1:
        return Fraction(0)          # leftover prime appears to the first power
    return out


@dataclass(frozen=True)
class MomentResult:
    k: int
    value: float
    method: str
    err_estimate: float
    flags: tuple = ()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.method not in (METHOD_EMPIRICAL, METHOD_EXACT, METHOD_CONTOUR):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.err_estimate >= 0.0:
            raise ValueError("err_estimate must be >= 0")


# ---------------------------------------------------------------------------
# exact enumeration


def _even_exponent_terms(factors: list[dict[int, float]], i: int, budget: int,
                         prod: float, out: list[float]) -> None:
    # factors[i] maps even exponent a >= 2 to the full per-prime factor
    if budget == 0:
        out.append(prod)
        return
    if i == len(factors):
        return
    _even_exponent_terms(factors, i + 1, budget, prod, out)
    for a, fac in factors[i].items():
        if a <= budget:
            _even_exponent_terms(factors, i + 1, budget - a, prod * fac, out)


def exact_moment(spec: PolySpec, k: int) -> MomentResult:
    """k! sum_{Omega(n)=k} f(n) g_X(n) n^{-sigma} by even-exponent enumeration.

    Only exponent vectors with every entry even survive f, which cuts the
    search to compositions of k/2; odd k is exactly zero.  err_estimate is 0
    (the arithmetic is exact up to final float rounding).  Independent of
    spec.theta by construction.
    """
    if not 1 <= k <= MAX_EXACT_K:
        raise ValueError(f"k must be in [1, {MAX_EXACT_K}], got {k}")
    primes = sieve(int(spec.X))
    if primes.size > MAX_EXACT_PRIMES:
        raise ValueError(
            f"{primes.size} primes <= X exceeds the enumeration budget "
            f"{MAX_EXACT_PRIMES}")
    if k % 2:
        return MomentResult(k=k, value=0.0, method=METHOD_EXACT, err_estimate=0.0)

    wts = MultiplicativeWeights(m=spec.m, X=spec.X)
    factors: list[dict[int, float]] = []
    for p in primes.tolist():
        per_a = {}
        for a in range(2, k + 1, 2):
            per_a[a] = (float(wts.f_prime_power(a)) * wts.g_prime_power(p, a)
                        * p ** (-spec.sigma * a))
        factors.append(per_a)

    terms: list[float] = []
    _even_exponent_terms(factors, 0, k, 1.0, terms)
    value = math.factorial(k) * math.fsum(terms)
    return MomentResult(k=k, value=value, method=METHOD_EXACT, err_estimate=0.0)


# ---------------------------------------------------------------------------
# contour integration


def _log_i0_complex(z: np.ndarray) -> np.ndarray:
    """log I0(z) for complex z by the power series (I0 is entire).

    Desk-scale contours keep |z| small enough that the series is cheap and
    the alternating loss near the imaginary axis stays below ~e^{|z|} eps.
    """
    q = 0.25 * z * z
    acc = np.ones_like(q)
    term = np.ones_like(q)
    scale = max(1.0, float(np.max(np.abs(q))))
    for n in range(1, 400):
        term = term * q / (n * n)
        acc = acc + term
        if float(np.max(np.abs(term))) < 1e-18 * scale:
            break
    else:
        raise RuntimeError("I0 series did not converge; contour radius too large")
    return np.log(acc)


def _saddle_radius(c: np.ndarray, k: int) -> tuple[float, bool]:
    """Solve R L'(R) = k, L(R) = sum_p log I0(R c_p), by bisection.

    L' through the exponentially scaled ratio I1/I0 = i1e/i0e.  Returns
    (radius, fallback_flag); no sign change on [1e-3, 1e6] falls back to
    R = k.
    """
    def excess(r: float) -> float:
        x = r * c
        return r * float(np.dot(c, sc.i1e(x) / sc.i0e(x))) - k

    lo, hi = 1e-3, 1e6
    if excess(lo) > 0.0 or excess(hi) < 0.0:
        return float(k), True
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), False


def _contour_sum(c: np.ndarray, k: int, radius: float, n_nodes: int) -> complex:
    """Trapezoid value of (k!/2 pi i) oint w^{-k-1} prod I0(w c_p) dw."""
    phis = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    node_chunk = max(1, (1 << 22) // max(1, c.size))
    total = 0j
    for j0 in range(0, n_nodes, node_chunk):
        phi = phis[j0:j0 + node_chunk]
        z = (radius * np.exp(1j * phi))[:, None] * c[None, :]
        log_f = np.sum(_log_i0_complex(z), axis=1)
        total += complex(np.sum(np.exp(log_f - 1j * k * phi)))
    return math.factorial(k) * total / (n_nodes * radius ** k)


def contour_moment(spec: PolySpec, k: int, table: PrimeTable) -> MomentResult:
    """Moment via the circle integral of the I0 generating product.

    The radius solves the saddle condition R L'(R) = k (flagged fallback
    R = k when bracketing fails); periodic trapezoid nodes double from
    max(64, 8k) until successive values agree to 1e-12 relative.  Odd k
    comes out at roundoff scale because the integrand is even in w.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _, c = _spec_arrays(spec, table)
    if c.size > MAX_CONTOUR_PRIMES:
        raise ValueError(
            f"{c.size} primes <= X exceeds the contour budget {MAX_CONTOUR_PRIMES}")
    radius, fell_back = _saddle_radius(c, k)
    flags = ("radius_fallback",) if fell_back else ()

    # roundoff floor of the quadrature sum, for the odd-k cancellation case
    peak = math.factorial(k) * math.exp(
        float(np.sum(log_bessel_i0(radius * c))) - k * math.log(radius))
    floor = 1e-15 * peak

    n_nodes = max(64, 8 * k)
    prev = _contour_sum(c, k, radius, n_nodes)
    while True:
        n_nodes *= 2
        cur = _contour_sum(c, k, radius, n_nodes)
        delta = abs(cur - prev)
        if delta <= 1e-12 * abs(cur) or delta <= floor:
            break
        if n_nodes >= 1 << 17:
            flags = flags + ("node_limit",)
            break
        prev = cur
    return MomentResult(k=k, value=float(cur.real), method=METHOD_CONTOUR,
                        err_estimate=float(delta + abs(cur.imag)), flags=flags)


# ---------------------------------------------------------------------------
# empirical grid averages


def _grid_mean_power(spec: PolySpec, table: PrimeTable, grid: TGrid,
                     k: int) -> float:
    ct, st = math.cos(spec.theta), math.sin(spec.theta)
    block_sums = [float(np.sum((ct * z.real + st * z.imag) ** k))
                  for _, z in iter_poly_blocks(spec, table, grid)]
    return math.fsum(block_sums) / grid.count


def empirical_moment(spec: PolySpec, table: PrimeTable, grid: TGrid,
                     k: int) -> MomentResult:
    """Grid average of P(t)^k over the TGrid span.

    err_estimate = |half-spacing refinement delta| + X^{2k}/T.  The second
    term is the standard main-term error shape with constant 1; it is a
    reporting convention, not a certified bound.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    span = grid.count * grid.delta
    log_shape = 2 * k * math.log(spec.X) - math.log(span)
    if log_shape > 700.0:
        raise OverflowError(
            f"error shape X^(2k)/T overflows for k={k}, X={spec.X}")
    value = _grid_mean_power(spec, table, grid, k)
    half = TGrid(t0=grid.t0, count=2 * grid.count, delta=grid.delta / 2,
                 offset=grid.offset)
    refined = _grid_mean_power(spec, table, half, k)
    err = abs(refined - value) + math.exp(log_shape)
    return MomentResult(k=k, value=value, method=METHOD_EMPIRICAL,
                        err_estimate=err)


# ---------------------------------------------------------------------------
# Bessel generating product and the trimmed exponential moment


def _density_tail_log_i0(m: int, sigma: float, x: float, lo: float,
                         hi: float) -> float:
    """int_lo^hi log I0(x t^-sigma (log t)^-m) dt/log t, u = log t.

    Prime-density surrogate for sum over primes in (lo, hi]; the density
    dt/log t is accurate to well under a percent at desk scales, far inside
    the asymptotic windows this feeds.
    """
    def f(u: np.ndarray) -> np.ndarray:
        arg = x * np.exp(-sigma * u) * u ** (-float(m))
        return log_bessel_i0(arg) * np.exp(u) / u

    u_lo, u_hi = math.log(lo), math.log(hi)
    # crossover of the I0 argument past 1 marks the curvature change
    brk = []
    if sigma > 0 and x > 1:
        u_star = math.log(x) / sigma
        if u_lo < u_star < u_hi:
            brk.append(u_star)
    return integrate_adaptive(f, u_lo, u_hi, rel_tol=1e-9, nodes=24,
                              breakpoints=brk, max_panels=4000)


def bessel_product(spec: PolySpec, table: PrimeTable, x: float) -> float:
    """log prod_{p<=X} I0(x p^-sigma (log p)^-m).

    Exact (fsum of log I0 terms) over the sieved primes; for X past
    table.limit the remaining prime mass is integrated against dt/log t.
    """
    if not x >= 0.0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    head_x = min(spec.X, float(table.limit))
    w = table.weights(spec.m, spec.sigma, head_x)
    if w.size == 0:
        raise ValueError("no primes <= X in the table")
    head = math.fsum(log_bessel_i0(x * w).tolist())
    if spec.X > table.limit:
        head += _density_tail_log_i0(spec.m, spec.sigma, x,
                                     float(table.limit), spec.X)
    return head


def exp_moment_trimmed(spec: PolySpec, table: PrimeTable, grid: TGrid,
                       x: float, W: float) -> float:
    """log of (1/count) sum over {|Z(t_j)| <= W} of exp(x P(t_j)).

    The normalizer is the FULL grid count, mirroring the (1/T) integral
    over the trimmed set: at x = 0 this is exactly the log measure
    fraction of the trimmed set, and the un-logged quantity is monotone
    nondecreasing in W by set inclusion.  Streaming log-sum-exp, so large
    x W never overflows.
    """
    if not x >= 0.0:
        raise ValueError(f"x must be >= 0, got {x}")
    if not W > 0.0:
        raise ValueError(f"W must be positive, got {W}")
    ct, st = math.cos(spec.theta), math.sin(spec.theta)
    run_max = -math.inf
    run_sum = 0.0
    kept = 0
    for _, z in iter_poly_blocks(spec, table, grid):
        scaled = x * (ct * z.real + st * z.imag)[np.abs(z) <= W]
        if scaled.size == 0:
            continue
        block_max = float(scaled.max())
        if block_max > run_max:
            run_sum *= math.exp(run_max - block_max) if kept else 0.0
            run_max = block_max
        run_sum += float(np.sum(np.exp(scaled - run_max)))
        kept += scaled.size
    if kept == 0:
        raise ValueError(f"trimmed set is empty at W={W}")
    return run_max + math.log(run_sum) - math.log(grid.count)
