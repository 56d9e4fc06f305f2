"""Modified Bessel I0 and the constants G(sigma), A_m(sigma), kappa(sigma).

    I0(z)    = sum_{n>=0} (z/2)^{2n} / (n!)^2
    G(sigma) = int_0^inf log I0(u) * u^{-1-1/sigma} du        (1/2 < sigma < 1)
    A_m(sigma) = ( sigma^{2 sigma}
                   / ((1-sigma)^{2 sigma - 1 + m} * G(sigma)^sigma) )^{1/(1-sigma)}

G converges at u=0 because log I0(u) ~ u^2/4 and 2 - 1/sigma > 0, and at
infinity because log I0(u) ~ u and 1/sigma > 1.  Both margins collapse as
sigma -> 1/2 or 1, which is why everything here works with 1/sigma
explicitly instead of hoping a generic quadrature notices.

I0 evaluation switches from the power series to the large-x asymptotic
expansion at x = 20; the two branches overlap to ~1e-12 relative there
(checked in tests).  log_bessel_i0 never forms e^x, so it is safe far
beyond the overflow point of I0 itself.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import integrate_adaptive, integrate_fixed

I0_SWITCH = 20.0        # series below, asymptotic expansion above
_SERIES_TERMS = 60
# I0(x) ~ e^x/sqrt(2 pi x) * sum_k a_k x^-k.  10 terms truncate at ~1e-11
# relative at x=20, which misses the 1e-12 overlap target at the switch;
# 16 terms reach ~1e-14 there and are still decreasing (terms shrink
# until k ~ x/0.5 = 40).
_ASYMP_TERMS = 16

# a_k = ((2k-1)!!)^2 / (k! 8^k)
_ASYMP_COEF = np.empty(_ASYMP_TERMS)
_ASYMP_COEF[0] = 1.0
for _k in range(1, _ASYMP_TERMS):
    _ASYMP_COEF[_k] = _ASYMP_COEF[_k - 1] * (2 * _k - 1) ** 2 / (8.0 * _k)


def _i0_series(x: np.ndarray) -> np.ndarray:
    """Power series, accurate for 0 <= x <= ~25."""
    q = 0.25 * x * x          # (x/2)^2
    term = np.ones_like(q)
    acc = np.ones_like(q)
    for n in range(1, _SERIES_TERMS + 1):
        term = term * q / (n * n)
        acc += term
    return acc


def _i0_asymp_factor(x: np.ndarray) -> np.ndarray:
    """sum_k a_k x^-k for x >= 20 (Horner, 10 terms)."""
    inv = 1.0 / x
    acc = np.full_like(inv, _ASYMP_COEF[-1])
    for k in range(_ASYMP_TERMS - 2, -1, -1):
        acc = acc * inv + _ASYMP_COEF[k]
    return acc


def bessel_i0(x):
    """I0(x) for real x >= 0; scalar in, scalar out.  Overflows to inf past ~713."""
    scalar = np.isscalar(x)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or not np.all(np.isfinite(xa)):
        raise ValueError("bessel_i0 wants finite x >= 0")
    small = xa < I0_SWITCH
    out = np.empty_like(xa)
    if np.any(small):
        out[small] = _i0_series(xa[small])
    if np.any(~small):
        xl = xa[~small]
        with np.errstate(over="ignore"):
            out[~small] = np.exp(xl) / np.sqrt(2.0 * math.pi * xl) * _i0_asymp_factor(xl)
    return float(out) if scalar else out


def log_bessel_i0(x):
    """log I0(x), overflow-free; vectorized over ndarray input."""
    scalar = np.isscalar(x)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or not np.all(np.isfinite(xa)):
        raise ValueError("log_bessel_i0 wants finite x >= 0")
    small = xa < I0_SWITCH
    out = np.empty_like(xa)
    if np.any(small):
        out[small] = np.log(_i0_series(xa[small]))
    if np.any(~small):
        xl = xa[~small]
        out[~small] = xl - 0.5 * np.log(2.0 * math.pi * xl) + np.log(_i0_asymp_factor(xl))
    return float(out) if scalar else out


def _log_i0_taylor_coeffs(n_terms: int) -> np.ndarray:
    """c_k with log I0(u) = sum_{k>=1} c_k u^{2k} (radius |u| < j_0 ~ 2.405).

    From I0 = sum a_n z^n in z = u^2, a_n = 4^-n (n!)^-2, via the standard
    log-of-series recurrence n a_n = sum_{k<=n} k c_k a_{n-k}.
    """
    a = np.empty(n_terms + 1)
    a[0] = 1.0
    for n in range(1, n_terms + 1):
        a[n] = a[n - 1] / (4.0 * n * n)
    c = np.zeros(n_terms + 1)
    for n in range(1, n_terms + 1):
        s = n * a[n]
        for k in range(1, n):
            s -= k * c[k] * a[n - k]
        c[n] = s / n
    return c[1:]


def g_constant(sigma: float, *, rel_tol: float = 1e-10, nodes: int = 16) -> float:
    """G(sigma) for 1/2 < sigma < 1, relative accuracy ~1e-10 (contract: 1e-8).

    Split at u=1 and u=U=30:
      (0, 1]   termwise-exact integration of the log I0 Taylor series,
               sum_k c_k / (2k - 1/sigma); handles the u^{1-1/sigma}
               near-singularity exactly,
      [1, U]   adaptive GL panels on log_bessel_i0(u) u^{-1-1/sigma},
      [U, inf) closed form for (u - log(2 pi u)/2) u^{-1-1/sigma} plus a
               GL integral of the 1/(8u)-size remainder rho(u) mapped to
               (0, 1] by u = U/v.
    The crude tail bound int_U^inf u*u^{-1-1/sigma} du decays like
    U^{1-1/sigma} and is useless near sigma = 1; the closed form is not.
    """
    if not 0.5 < sigma < 1.0:
        raise ValueError(f"g_constant wants 1/2 < sigma < 1, got {sigma}")
    a = 1.0 / sigma

    coeffs = _log_i0_taylor_coeffs(48)
    ks = np.arange(1, coeffs.size + 1)
    head_terms = coeffs / (2.0 * ks - a)
    head = float(np.sum(head_terms))
    if abs(head_terms[-1]) > 1e-15 * abs(head):
        raise RuntimeError("log I0 Taylor tail not converged at u=1")

    big_u = 30.0
    mid = integrate_adaptive(lambda u: log_bessel_i0(u) * u ** (-1.0 - a),
                             1.0, big_u, rel_tol=0.01 * rel_tol, nodes=nodes)

    t1 = big_u ** (1.0 - a) / (a - 1.0)
    t2 = (math.log(2.0 * math.pi) / a + math.log(big_u) / a + 1.0 / (a * a)) \
        * big_u ** (-a)
    tail_main = t1 - 0.5 * t2

    def rho_part(v: np.ndarray) -> np.ndarray:
        u = big_u / v
        rho = np.log(_i0_asymp_factor(u))
        return rho * v ** (a - 1.0)

    tail_rho = big_u ** (-a) * integrate_fixed(rho_part, 0.0, 1.0, nodes=4 * nodes)

    return head + mid + tail_main + tail_rho


def a_constant(m: int, sigma: float, *, g_value: float | None = None) -> float:
    """A_m(sigma) for m >= 0, 1/2 < sigma < 1.

    g_value overrides G(sigma) (unit tests pin it to 1 to isolate the
    algebra).
    """
    if m < 0:
        raise ValueError(f"a_constant wants m >= 0, got {m}")
    if not 0.5 < sigma < 1.0:
        raise ValueError(f"a_constant wants 1/2 < sigma < 1, got {sigma}")
    g = g_constant(sigma) if g_value is None else float(g_value)
    if not g > 0.0:
        raise ValueError(f"G(sigma) must be positive, got {g}")
    base = sigma ** (2.0 * sigma) / ((1.0 - sigma) ** (2.0 * sigma - 1.0 + m) * g ** sigma)
    return base ** (1.0 / (1.0 - sigma))


def kappa(sigma: float) -> float:
    """0 on the critical line, sigma inside the strip.  Exact comparison on 0.5."""
    if not 0.5 <= sigma < 1.0:
        raise ValueError(f"kappa wants 1/2 <= sigma < 1, got {sigma}")
    return 0.0 if sigma == 0.5 else float(sigma)
