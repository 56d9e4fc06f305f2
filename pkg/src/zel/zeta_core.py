"""Branch-tracked log zeta and its iterated integrals.

zeta(s) is evaluated by Euler-Maclaurin summation.  log zeta carries the
branch fixed by horizontal continuation from the far right half-plane,
where the Dirichlet series pins log zeta near 0: the value at sigma + it
is reached by walking alpha from max(10, sigma) down to sigma at fixed t,
unwinding the imaginary part by continuity.  On top of that sit

    eta_tilde(m, sigma, t) = (1/(m-1)!) Int_sigma^inf (a-sigma)^{m-1}
                              log zeta(a+it) da,

the real-axis constants c_m(sigma) = i^m J_m(sigma) and b_m =
Im c_m(1/2)/pi, and the iterated argument integrals

    s_m(t) = Int_0^t s_{m-1}(u) du + b_m,    s_0 = arg zeta(1/2+it)/pi,

whose m=1 case obeys the unconditional identity pi s_1(t) =
Re eta_tilde(1, 1/2, t).

The horizontal integral splits at alpha_split: Gauss-Legendre panels on
the left (one zeta evaluation per node against a cached branch walk),
and termwise-integrated von Mangoldt series on the right, where
Int_S^inf (a-sigma)^{m-1} n^-a da has the closed form
e^{-S log n} sum_j (S-sigma)^{m-1-j} (m-1)! / ((m-1-j)! (log n)^{j+1}).
"""

from __future__ import annotations

import cmath
import math
import os
import struct
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from decimal import Decimal, localcontext

from .prime_poly import (phase_mod_two_pi, phase_mod_two_pi_dd, sieve,
                         von_mangoldt_table)
from .quadrature import integrate_adaptive

_TWO_PI = 2.0 * math.pi
_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)      # i^m, exact


class ZetaPoleError(ValueError):
    """zeta requested at (or a path crossing) the pole s = 1."""


class NearZeroOnPath(RuntimeError):
    """Branch continuation could not resolve a step: |zeta| collapsed or
    the argument moved too fast near alpha (a zero or the pole sits on or
    near the path)."""

    def __init__(self, alpha: float, t: float, detail: str = ""):
        self.alpha = alpha
        self.t = t
        super().__init__(
            f"branch walk unresolved near alpha={alpha:.6g} at t={t:.6g}"
            + (f": {detail}" if detail else ""))


class ZetaAccuracyWarning(UserWarning):
    """Certified Euler-Maclaurin remainder exceeded the working target."""


# ---------------------------------------------------------------------------
# Euler-Maclaurin zeta

def _bernoulli_over_factorial(count: int) -> list[float]:
    """B_{2k}/(2k)! for k = 1..count, exact rationals rounded once."""
    top = 2 * count + 1
    b = [Fraction(0)] * (top + 1)
    b[0] = Fraction(1)
    for n in range(1, top + 1):
        acc = Fraction(0)
        for j in range(n):
            acc += math.comb(n + 1, j) * b[j]
        b[n] = -acc / (n + 1)
    out = []
    fact = Fraction(2)              # (2k)! running
    for k in range(1, count + 1):
        out.append(float(b[2 * k] / fact))
        fact *= (2 * k + 1) * (2 * k + 2)
    return out


_B2K = _bernoulli_over_factorial(30)

_ZETA_FLOOR = 1e-12                 # |zeta| below this on a walk => flagged
_MEMO_CAP = 1 << 20

_spf_cache = np.array([0, 1], dtype=np.int64)
_spf_lock = threading.Lock()


def _spf_table(n: int) -> np.ndarray:
    """Smallest-prime-factor table up to n inclusive (grow-only cache)."""
    global _spf_cache
    with _spf_lock:
        if _spf_cache.size <= n:
            size = max(n + 1, 2 * _spf_cache.size)
            spf = np.arange(size, dtype=np.int64)
            for p in range(2, math.isqrt(size - 1) + 1):
                if spf[p] == p:
                    sl = spf[p * p:: p]
                    sl[sl == np.arange(p * p, size, p)] = p
            _spf_cache = spf
        return _spf_cache


@lru_cache(maxsize=1 << 16)
def _dd_log(n: int) -> tuple[float, float]:
    """log n as a double-double (hi + lo), 40 decimal digits upstream."""
    with localcontext() as ctx:
        ctx.prec = 40
        d = Decimal(n).ln()
        hi = float(d)
        lo = float(d - Decimal(hi))
    return hi, lo


@lru_cache(maxsize=64)
def _prime_dd_logs(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Primes < N with their double-double logs."""
    ps = sieve(N - 1)
    hi = np.empty(ps.size)
    lo = np.empty(ps.size)
    for i, p in enumerate(ps.tolist()):
        hi[i], lo[i] = _dd_log(p)
    return ps, hi, lo


def _unit_powers(N: int, t: float) -> np.ndarray:
    """u[n] = n^{-it} for n = 1..N-1, phase-exact at any t.

    Primes get reduced phases from double-double logs; composites are
    built by one complex multiply from their smallest-prime-factor
    split, so phase error stays at rounding level instead of growing
    like t * ulp(log n).
    """
    u = np.empty(N, dtype=complex)
    u[0] = 0.0
    u[1] = 1.0
    if N <= 2:
        return u
    spf = _spf_table(N - 1)
    primes, lhi, llo = _prime_dd_logs(N)
    u[primes] = np.exp(-1j * phase_mod_two_pi_dd(t, lhi, llo))
    ns = np.arange(2, N)
    for n in ns[spf[2:N] != ns]:
        p = spf[n]
        u[n] = u[n // p] * u[p]
    return u


def _em_zeta(sigma: float, t: float) -> complex:
    s = complex(sigma, t)
    N = int(0.57 * abs(t)) + 25
    ns = np.arange(1, N, dtype=float)
    amps = ns ** (-sigma)
    if t == 0.0:
        main = complex(math.fsum(amps.tolist()))
        unit_n = 1.0 + 0j
    else:
        main = complex(np.dot(amps, _unit_powers(N, t)[1:]))
        nhi, nlo = _dd_log(N)
        unit_n = cmath.exp(-1j * float(phase_mod_two_pi_dd(t, nhi, nlo)))
    npow = N ** (-sigma) * unit_n                   # N^{-s}
    acc = main + npow * N / (s - 1) + 0.5 * npow

    # correction terms B_{2k}/(2k)! (s)_{2k-1} N^{-s-2k+1}
    poch = s
    nfac = 1.0 / N
    prev = math.inf
    bound = math.inf
    for k, coef in enumerate(_B2K, start=1):
        term = coef * poch * npow * nfac
        mag = abs(term)
        if mag > prev:
            break                                   # asymptotic tail turned
        acc += term
        prev = mag
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        nfac /= N * N
        if k < len(_B2K):
            nxt = abs(_B2K[k] * poch * npow * nfac)
            bound = nxt * abs(s + 2 * k + 1) / (sigma + 2 * k + 1)
            if bound < 1e-17 * abs(acc):
                break
    if not bound <= 1e-10 * max(abs(acc), 1e-300):
        warnings.warn(
            f"certified remainder {bound:.2e} at s={s:.6g} exceeds target",
            ZetaAccuracyWarning, stacklevel=3)
    return acc


_memo: dict[tuple[float, float], complex] = {}
_memo_lock = threading.Lock()


def zeta(s: complex) -> complex:
    """zeta(s) by Euler-Maclaurin; 1e-12 relative for |Im s| <= 1e4.

    Accuracy degrades gracefully for larger |Im s| (the certified
    remainder is checked and warned about); the pole raises.
    """
    s = complex(s)
    if s == 1:
        raise ZetaPoleError("zeta pole at s = 1")
    key = (s.real, s.imag)
    with _memo_lock:
        hit = _memo.get(key)
    if hit is not None:
        return hit
    val = _em_zeta(s.real, s.imag)
    with _memo_lock:
        if len(_memo) < _MEMO_CAP:
            _memo[key] = val
    return val


def zeta_memo_size() -> int:
    with _memo_lock:
        return len(_memo)


# ZGRD1 cache: magic, then records of 4 little-endian f64 (sigma, t, Re, Im)
_ZGRD_MAGIC = b"ZGRD1"


def dump_zeta_cache(path: str | os.PathLike) -> int:
    with _memo_lock:
        items = sorted(_memo.items())
    with open(path, "wb") as fh:
        fh.write(_ZGRD_MAGIC)
        for (sg, t), z in items:
            fh.write(struct.pack("<4d", sg, t, z.real, z.imag))
    return len(items)


def warm_zeta_cache(path: str | os.PathLike) -> int:
    """Load a ZGRD1 file into the evaluation memo; returns records read."""
    with open(path, "rb") as fh:
        if fh.read(5) != _ZGRD_MAGIC:
            raise ValueError(f"{path}: not a ZGRD1 cache")
        blob = fh.read()
    n = len(blob) // 32
    count = 0
    with _memo_lock:
        for i in range(n):
            sg, t, re, im = struct.unpack_from("<4d", blob, 32 * i)
            if len(_memo) >= _MEMO_CAP:
                break
            _memo[(sg, t)] = complex(re, im)
            count += 1
    return count


# ---------------------------------------------------------------------------
# branch continuation


@dataclass(frozen=True)
class BranchedLog:
    value: complex
    path_origin_sigma: float
    unwind_count: int


@dataclass(frozen=True)
class QuadratureConfig:
    panel_rel_tol: float = 1e-10
    alpha_split: float = 3.0
    tail_terms: int = 100
    max_subdivisions: int = 40

    def __post_init__(self):
        if not self.alpha_split >= 2:
            raise ValueError("alpha_split must be >= 2")
        if not self.tail_terms >= 16:
            raise ValueError("tail_terms must be >= 16")


_DEFAULT_CFG = QuadratureConfig()


class BranchTracker:
    """One branch walk at fixed t, queryable at any alpha it has covered.

    The walk descends from origin = max(10, requested sigma), accepting a
    step only when the principal log-increment log(z_next/z_prev) has
    |Im| < pi/2 (halving otherwise), so no winding slips through.  Points
    where the path crosses the negative real axis of zeta are bisected to
    1e-11 and recorded; after that, the branch value at any covered alpha
    is principal log + 2 pi i * (crossings above alpha), one zeta
    evaluation per query.
    """

    def __init__(self, t: float, cfg: QuadratureConfig = _DEFAULT_CFG):
        self.t = t
        self.cfg = cfg
        self.origin = 10.0
        self._lock = threading.Lock()
        z = self._zeta_at(self.origin)
        self._low = self.origin
        self._z_low = z
        self._val_low = cmath.log(z)      # |log zeta(10+it)| < 2^-9: principal
        self._wraps: list[tuple[float, int]] = []   # (alpha, +-1), descending

    def _zeta_at(self, alpha: float) -> complex:
        try:
            z = zeta(complex(alpha, self.t))
        except ZetaPoleError:
            raise NearZeroOnPath(alpha, self.t, "pole on path") from None
        if abs(z) < _ZETA_FLOOR:
            raise NearZeroOnPath(alpha, self.t, f"|zeta| = {abs(z):.2e}")
        return z

    def _locate_wraps(self, a_hi, z_hi, a_lo, z_lo, winds, out):
        """Bisect (a_lo, a_hi) to 1e-11 around each axis crossing."""
        if a_hi - a_lo < 1e-11:
            sign = 1 if winds > 0 else -1
            out.extend((0.5 * (a_hi + a_lo), sign) for _ in range(abs(winds)))
            return
        a_mid = 0.5 * (a_hi + a_lo)
        z_mid = self._zeta_at(a_mid)
        for (ah, zh, al, zl) in ((a_hi, z_hi, a_mid, z_mid),
                                 (a_mid, z_mid, a_lo, z_lo)):
            inc = cmath.log(zl / zh)
            w = round((cmath.phase(zh) + inc.imag - cmath.phase(zl)) / _TWO_PI)
            if w:
                self._locate_wraps(ah, zh, al, zl, w, out)

    def extend(self, sigma: float) -> None:
        """Walk the continuation down to sigma (no-op if already there)."""
        with self._lock:
            self._extend_locked(sigma)

    def _extend_locked(self, sigma: float) -> None:
        step = 0.5
        while self._low > sigma + 1e-15:
            sub = min(step, self._low - sigma)
            depth = 0
            while True:
                a_next = self._low - sub
                z_next = self._zeta_at(a_next)
                inc = cmath.log(z_next / self._z_low)
                if abs(inc.imag) < 0.5 * math.pi:
                    break
                sub *= 0.5
                depth += 1
                if depth > self.cfg.max_subdivisions:
                    raise NearZeroOnPath(a_next, self.t, "step collapse")
            w = round((cmath.phase(self._z_low) + inc.imag
                       - cmath.phase(z_next)) / _TWO_PI)
            if w:
                found: list[tuple[float, int]] = []
                self._locate_wraps(self._low, self._z_low, a_next, z_next,
                                   w, found)
                self._wraps.extend(sorted(found, reverse=True))
            self._val_low += inc
            self._low, self._z_low = a_next, z_next
            step = sub * 2.0 if depth == 0 else sub

    def winding(self, alpha: float) -> int:
        return sum(w for (aw, w) in self._wraps if aw > alpha)

    def log_at(self, alpha: float) -> complex:
        """Branch value of log zeta(alpha + it); requires prior extend."""
        with self._lock:
            if alpha < self._low - 1e-12:
                self._extend_locked(alpha)
            z = self._zeta_at(alpha)
            val = cmath.log(z) + _TWO_PI * 1j * self.winding(alpha)
            if alpha <= self._low + 1e-12:
                drift = abs(self._val_low - val)
                if drift > 1e-8:
                    raise NearZeroOnPath(
                        alpha, self.t, f"walk/winding mismatch {drift:.2e}")
            return val

    def unwind_count(self, alpha: float) -> int:
        return self.winding(alpha)


@lru_cache(maxsize=64)
def _tracker(t: float, cfg: QuadratureConfig) -> BranchTracker:
    return BranchTracker(t, cfg)


def log_zeta_branched(sigma: float, t: float,
                      cfg: QuadratureConfig = _DEFAULT_CFG) -> BranchedLog:
    """log zeta(sigma + it) on the continuation branch from the right."""
    tr = _tracker(float(t), cfg)
    tr.extend(sigma)
    val = tr.log_at(sigma)
    return BranchedLog(value=val, path_origin_sigma=tr.origin,
                       unwind_count=tr.winding(sigma))


# ---------------------------------------------------------------------------
# iterated integrals


def _lambda_tail(m: int, sigma: float, t: float, split: float,
                 n_terms: int) -> complex:
    """Int_split^inf (a-sigma)^{m-1}/(m-1)! * log zeta(a+it) da, termwise.

    log zeta = sum Lambda(n)/(log n) n^{-a-it} converges absolutely for
    a >= split >= 2; each term integrates in closed form.  Truncation at
    n_terms carries the crude certificate 2 * n_terms^(1-split).
    """
    vm = von_mangoldt_table(n_terms)
    ns = np.flatnonzero(vm[2:]) + 2
    lg = np.log(ns.astype(float))
    d = split - sigma
    # sum_j d^{m-1-j} / ((m-1-j)! L^{j+2}),  j = 0..m-1
    inner = np.zeros_like(lg)
    for j in range(m):
        inner += d ** (m - 1 - j) / math.factorial(m - 1 - j) / lg ** (j + 2)
    amp = vm[ns] * np.exp(-split * lg) * inner
    if t == 0.0:
        return complex(float(amp.sum()), 0.0)
    return complex(np.dot(amp, np.exp(-1j * phase_mod_two_pi(t, lg))))


def eta_tilde(m: int, sigma: float, t: float,
              cfg: QuadratureConfig | None = None) -> complex:
    """(1/(m-1)!) Int_sigma^inf (a-sigma)^{m-1} log zeta(a+it) da, m >= 1.

    Branch-walked quadrature up to cfg.alpha_split, closed-form von
    Mangoldt tail beyond it.  For m = 0 the integral degenerates; use
    log_zeta_branched directly.
    """
    if m < 1:
        raise ValueError("m must be >= 1; m=0 is log_zeta_branched")
    cfg = cfg or _DEFAULT_CFG
    split = max(cfg.alpha_split, sigma)
    tail = _lambda_tail(m, sigma, t, split, cfg.tail_terms)
    if split <= sigma:
        return tail
    tr = _tracker(float(t), cfg)
    tr.extend(sigma)
    fac = 1.0 / math.factorial(m - 1)

    def integrand(alphas):
        return np.array([(a - sigma) ** (m - 1) * fac * tr.log_at(float(a))
                         for a in alphas])

    head = integrate_adaptive(
        integrand, sigma, split,
        rel_tol=cfg.panel_rel_tol, abs_tol=1e-14,
        max_panels=2000)
    return head + tail


def _power_log_integral(m: int, c: float, upper: float) -> float:
    """Int_0^upper u^{m-1} log|u - c| du, exact antiderivative.

    F(u) = ((u^m - c^m)/m) log|u-c| - (1/m) sum_j c^{m-1-j} u^{j+1}/(j+1);
    the (u^m - c^m) factor absorbs the log singularity at u = c.
    """
    def F(u):
        if u == c:
            poly_log = 0.0
        else:
            poly_log = (u ** m - c ** m) / m * math.log(abs(u - c))
        ser = sum(c ** (m - 1 - j) * u ** (j + 1) / (j + 1) for j in range(m))
        return poly_log - ser / m

    return F(upper) - F(0.0)


@lru_cache(maxsize=128)
def _j_constant(m: int, sigma: float, cfg: QuadratureConfig) -> float:
    """J_m(sigma) = (1/(m-1)!) Int_sigma^inf (a-sigma)^{m-1} log|zeta(a)| da.

    Real-axis route: on [sigma, split] integrate log|(a-1) zeta(a)|
    (smooth and positive through the pole since (a-1) zeta(a) -> 1) and
    subtract the closed-form integral of log|a-1|; beyond split use the
    von Mangoldt tail at t = 0.
    """
    split = max(cfg.alpha_split, sigma)
    tail = _lambda_tail(m, sigma, 0.0, split, cfg.tail_terms).real
    if split <= sigma:
        return tail
    fac = 1.0 / math.factorial(m - 1)

    def smooth_one(alpha):
        g = (alpha - 1.0) * zeta(complex(alpha, 0.0)).real if alpha != 1.0 \
            else 1.0
        return (alpha - sigma) ** (m - 1) * fac * math.log(abs(g))

    head = integrate_adaptive(
        lambda alphas: np.array([smooth_one(float(a)) for a in alphas]),
        sigma, split, rel_tol=cfg.panel_rel_tol, abs_tol=1e-14,
        breakpoints=(1.0,) if sigma < 1.0 < split else (),
        max_panels=2000)
    pole_part = fac * _power_log_integral(m, 1.0 - sigma, split - sigma)
    return head - pole_part + tail


def c_constant(m: int, sigma: float,
               cfg: QuadratureConfig | None = None) -> complex:
    """c_m(sigma) = i^m J_m(sigma), the real-axis iterated integral."""
    if m < 1:
        raise ValueError("m must be >= 1")
    cfg = cfg or _DEFAULT_CFG
    return _I_POW[m % 4] * _j_constant(m, float(sigma), cfg)


def b_constant(m: int, cfg: QuadratureConfig | None = None) -> float:
    """b_m = Im c_m(1/2) / pi; exactly 0 for even m by construction."""
    if m < 1:
        raise ValueError("m must be >= 1")
    im_factor = (0, 1, 0, -1)[m % 4]            # Im part of i^m
    if im_factor == 0:
        return 0.0
    cfg = cfg or _DEFAULT_CFG
    return im_factor * _j_constant(m, 0.5, cfg) / math.pi


# ---------------------------------------------------------------------------
# argument integrals s_m


def _s0(t: float, cfg: QuadratureConfig) -> float:
    return log_zeta_branched(0.5, t, cfg).value.imag / math.pi


_JUMP_SCAN_STEP = 0.02
_JUMP_THRESHOLD = 0.5
_JUMP_WIDTH = 1e-9


def _locate_jumps(t_hi: float, cfg: QuadratureConfig) -> list[tuple[float, float]]:
    """(lo, hi) brackets of width <= 1e-9 around each S_0 jump in (0, t_hi).

    Scan at step 0.02, flag |delta S_0| > 0.5 (a unit jump plus smooth
    drift always clears this; steep smooth spots may false-positive,
    which only adds a harmless extra breakpoint), bisect into the larger
    half until the bracket closes.
    """
    out = []
    n = int(t_hi / _JUMP_SCAN_STEP)
    if n < 1:
        return out
    us = [_JUMP_SCAN_STEP * k for k in range(1, n + 1)]
    if us[-1] < t_hi:
        us.append(t_hi)
    vals = [_s0(u, cfg) for u in us]
    for i in range(len(us) - 1):
        if abs(vals[i + 1] - vals[i]) <= _JUMP_THRESHOLD:
            continue
        a, fa, b, fb = us[i], vals[i], us[i + 1], vals[i + 1]
        while b - a > _JUMP_WIDTH:
            mmid = 0.5 * (a + b)
            fm = _s0(mmid, cfg)
            if abs(fm - fa) >= abs(fb - fm):
                b, fb = mmid, fm
            else:
                a, fa = mmid, fm
        out.append((a, b))
    return out


def s_m(m: int, t: float, cfg: QuadratureConfig | None = None) -> float:
    """Iterated argument integral; s_0 is arg zeta(1/2+it)/pi on the
    continuation branch, s_m = Int_0^t s_{m-1} + b_m for m >= 1.

    The m=1 integrand jumps by +-1 at zero ordinates; jumps are located
    and the quadrature panels split there, with each sub-1e-9 bracket
    contributing its midpoint-rule sliver.
    """
    cfg = cfg or _DEFAULT_CFG
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        if t == 0.0:
            raise NearZeroOnPath(1.0, 0.0, "pole on the t=0 path")
        return _s0(t, cfg)
    b = b_constant(m, cfg)
    if t == 0.0:
        return b
    if m == 1:
        brackets = _locate_jumps(t, cfg)
        total = 0.0
        edges = [0.0]
        for (a, bb) in brackets:
            total += (bb - a) * 0.5 * (_s0(a, cfg) + _s0(bb, cfg))
            edges.extend((a, bb))
        edges.append(t)
        for lo, hi in zip(edges[::2], edges[1::2]):
            if hi - lo <= 0:
                continue
            total += integrate_adaptive(
                lambda us: np.array([_s0(float(u), cfg) for u in us]), lo, hi,
                rel_tol=cfg.panel_rel_tol, abs_tol=1e-10, max_panels=2000)
        return total + b
    val = integrate_adaptive(
        lambda us: np.array([s_m(m - 1, float(u), cfg) for u in us]), 0.0, t,
        rel_tol=max(cfg.panel_rel_tol, 1e-8), abs_tol=1e-8, max_panels=200)
    return val + b
