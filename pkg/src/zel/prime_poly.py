"""Prime Dirichlet polynomials P(t) = Re e^{-i theta} sum_{p<=X} p^{-sigma-it} (log p)^{-m}.

Pointwise values, a streaming batch kernel for long uniform t-grids, and
the von Mangoldt partial sums sum_{2<=n<=X} Lambda(n) n^{-sigma-it} (log n)^{-m-1}
used as the short-interval approximation to the iterated integrals.

Phase discipline.  On a grid covering [T, 2T] with T = 1e7 the raw phase
t*log p reaches ~2e8 rad, where one double ULP is ~3e-8 rad; two routes
that round t*log p differently disagree by ~Sigma w_p * 3e-8, far above
the 1e-10 batch-vs-pointwise contract.  So (a) grid spacings are dyadic
rationals and grid start times are representable on the same dyadic
lattice, making every t_j = t0 + j*delta exact in double precision, and
(b) every phase is reduced mod 2 pi from the exact Dekker two-product of
t and log p with a three-part Cody-Waite 2 pi (residual ~1e-15 rad).
The batch kernel factors e^{-i t_j omega} = e^{-i (t0 + col*B*delta) omega}
* e^{-i row*delta*omega} over j = col*B + row and evaluates each block of
B columns as one complex GEMM; the chained per-column rotation is rebuilt
from exact phases every CHAIN_RENORM columns, so no chain applies more
than CHAIN_RENORM + B incremental multiplies (drift ~ 1e-13 rad, within
the 1e-12-per-window budget).
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

SIEVE_LIMIT = 100_000_000       # hard cap for prime enumeration
BLOCK_ROWS = 1024               # j0 range per GEMM block (renormalization window)
CHUNK_COLS = 256                # GEMM columns per yielded chunk
CHAIN_RENORM = 32               # exact phase rebuild cadence along the column chain

# three-part Cody-Waite split of 2 pi; k*C1 and k*C2 are exact for k < 2^29
_TWO_PI = 2.0 * math.pi
_CW_1 = float.fromhex("0x1.921fb40000000p+2")
_CW_2 = float.fromhex("0x1.4442d00000000p-22")
_CW_3 = float.fromhex("0x1.8469898cc5170p-46")
_SPLITTER = 134217729.0         # 2^27 + 1, Veltkamp


def _two_product(a, b):
    """(hi, lo) with hi + lo == a*b exactly (Dekker, FMA-free)."""
    p = a * b
    ah = a * _SPLITTER
    ah = ah - (ah - a)
    al = a - ah
    bh = b * _SPLITTER
    bh = bh - (bh - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def phase_mod_two_pi(t, omega):
    """t*omega reduced mod 2 pi to ~1e-15 rad, for |t*omega| < ~1e15.

    Broadcasts over ndarray inputs.  Both the pointwise evaluator and the
    batch kernel rebuilds come through here, which is what makes them
    agree to 1e-10 on long grids.
    """
    hi, lo = _two_product(np.asarray(t, dtype=float), np.asarray(omega, dtype=float))
    k = np.round(hi * (1.0 / _TWO_PI))
    # k * C1 is exact only while k fits in 28 bits (C1 carries 25)
    if np.max(np.abs(k), initial=0.0) >= 2 ** 28:
        raise ValueError("phase t*omega too large for exact reduction (>= 2^28 * 2 pi)")
    return ((hi - k * _CW_1) - k * _CW_2) + (lo - k * _CW_3)


def phase_mod_two_pi_dd(t, omega_hi, omega_lo):
    """Like phase_mod_two_pi but with omega given as a double-double.

    Removes the t * ulp(omega) floor of the single-double version; the
    zeta backend feeds extended-precision prime logs through this to hold
    its 1e-12 target at |t| ~ 1e4.
    """
    hi, lo = _two_product(np.asarray(t, dtype=float),
                          np.asarray(omega_hi, dtype=float))
    k = np.round(hi * (1.0 / _TWO_PI))
    if np.max(np.abs(k), initial=0.0) >= 2 ** 28:
        raise ValueError("phase t*omega too large for exact reduction (>= 2^28 * 2 pi)")
    tail = lo + np.asarray(t, dtype=float) * np.asarray(omega_lo, dtype=float)
    return ((hi - k * _CW_1) - k * _CW_2) + (tail - k * _CW_3)


# ---------------------------------------------------------------------------
# primes


def sieve(limit: int) -> np.ndarray:
    """Primes <= limit, ascending int64.  Odd-only boolean sieve."""
    limit = int(limit)
    if limit > SIEVE_LIMIT:
        raise ValueError(f"sieve limit {limit} exceeds cap {SIEVE_LIMIT}")
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    if limit == 2:
        return np.array([2], dtype=np.int64)
    # comp[i] marks 2i+3
    size = (limit - 1) // 2
    comp = np.zeros(size, dtype=bool)
    for p in range(3, math.isqrt(limit) + 1, 2):
        if not comp[(p - 3) // 2]:
            comp[(p * p - 3) // 2:: p] = True
    odds = 2 * np.flatnonzero(~comp).astype(np.int64) + 3
    return np.concatenate((np.array([2], dtype=np.int64), odds))


def von_mangoldt_table(limit: int) -> np.ndarray:
    """Lambda(n) for 0 <= n <= limit (entries 0 and 1 are 0)."""
    limit = int(limit)
    out = np.zeros(limit + 1)
    for p in sieve(limit):
        logp = math.log(p)
        q = p
        while q <= limit:
            out[q] = logp
            q *= p
    return out


@dataclass
class PrimeTable:
    """Sieved primes with cached logs and per-(m, sigma) weight vectors."""

    limit: int
    primes: np.ndarray
    logs: np.ndarray
    _weights: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, limit: int) -> "PrimeTable":
        if not 3 <= limit <= SIEVE_LIMIT:
            raise ValueError(f"prime table limit must be in [3, {SIEVE_LIMIT}]")
        ps = sieve(limit)
        return cls(limit=int(limit), primes=ps, logs=np.log(ps.astype(float)))

    def count(self) -> int:
        return int(self.primes.size)

    def upto(self, x: float) -> int:
        """Index bound: primes[:upto(x)] are the primes <= x."""
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def weights(self, m: int, sigma: float, x: float | None = None) -> np.ndarray:
        """p^-sigma (log p)^-m for p <= x (default: the whole table)."""
        n = self.count() if x is None else self.upto(x)
        key = (int(m), float(sigma), n)
        w = self._weights.get(key)
        if w is None:
            lg = self.logs[:n]
            w = np.exp(-float(sigma) * lg) * lg ** (-float(m))
            self._weights[key] = w
        return w


# PTAB1 prime cache: magic, limit, count, then the int64 prime list, all LE.
_PTAB_MAGIC = b"PTAB1"


def save_prime_cache(path: str | os.PathLike, table: PrimeTable) -> None:
    with open(path, "wb") as fh:
        fh.write(_PTAB_MAGIC)
        fh.write(struct.pack("<QQ", table.limit, table.count()))
        fh.write(table.primes.astype("<i8").tobytes())


def load_prime_cache(path: str | os.PathLike, limit: int) -> PrimeTable | None:
    """Load if the file matches `limit`; None means rebuild (and resave)."""
    try:
        with open(path, "rb") as fh:
            if fh.read(5) != _PTAB_MAGIC:
                return None
            cached_limit, count = struct.unpack("<QQ", fh.read(16))
            if cached_limit != limit:
                return None
            ps = np.frombuffer(fh.read(8 * count), dtype="<i8").astype(np.int64)
            if ps.size != count:
                return None
    except (OSError, struct.error):
        return None
    return PrimeTable(limit=int(limit), primes=ps, logs=np.log(ps.astype(float)))


def cached_table(limit: int, cache_dir: str | None = None) -> PrimeTable:
    """PrimeTable via the PTAB1 cache in cache_dir (or $ZEL_CACHE_DIR)."""
    cache_dir = cache_dir or os.environ.get("ZEL_CACHE_DIR")
    if not cache_dir:
        return PrimeTable.build(limit)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"ptab_{int(limit)}.bin")
    table = load_prime_cache(path, int(limit))
    if table is None:
        table = PrimeTable.build(limit)
        save_prime_cache(path, table)
    return table


# ---------------------------------------------------------------------------
# specs and grids


@dataclass(frozen=True)
class PolySpec:
    """Prime polynomial parameters: sum_{p<=X} p^-sigma (log p)^-m, angle theta."""

    m: int
    sigma: float
    theta: float
    X: float

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if not 0.5 <= self.sigma < 1.0:
            raise ValueError(f"sigma must be in [1/2, 1), got {self.sigma}")
        if not self.X >= 3:
            raise ValueError(f"X must be >= 3, got {self.X}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


def max_spacing(X: float) -> float:
    """Grid-resolution rule: delta <= 2 pi / (3 log X)."""
    return _TWO_PI / (3.0 * math.log(X))


@dataclass(frozen=True)
class TGrid:
    """Uniform grid t_j = t0 + (j + offset) * delta, j = 0..count-1.

    delta is a dyadic rational and t0 sits on the same dyadic lattice, so
    every t_j is exact in double precision (see module docstring).
    offset is 0 or 1/2 (midpoint sampling).
    """

    t0: float
    count: int
    delta: float
    offset: float = 0.0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.offset not in (0.0, 0.5):
            raise ValueError("offset must be 0 or 1/2")
        num, den = float(self.delta).as_integer_ratio()
        if num >= 2 ** 24 or den > 2 ** 24:
            raise ValueError(f"delta {self.delta} is not a short dyadic rational")
        scale = 2 * den      # the lattice including offset 1/2
        if self.t0 * scale != round(self.t0 * scale):
            raise ValueError(f"t0 {self.t0} not on the delta lattice")
        if (self.t0 + self.count * self.delta) * scale >= 2 ** 53:
            raise ValueError("grid exceeds exact-double dyadic range")

    @classmethod
    def for_span(cls, T: float, X: float, *, offset: float = 0.0,
                 refine: int = 1) -> "TGrid":
        """Cover [T, 2T] at the spacing rule for X (refine halves delta).

        delta is the largest dyadic n/2^k <= 2 pi/(3 log X) with a 12-bit
        numerator; count*delta - T < delta.
        """
        if not T > 0:
            raise ValueError("T must be positive")
        dmax = max_spacing(X) / refine
        k = 0
        while math.floor(dmax * 2.0 ** k) < 2 ** 11:
            k += 1
        delta = math.floor(dmax * 2.0 ** k) / 2.0 ** k
        count = math.ceil(T / delta)
        return cls(t0=float(T), count=count, delta=delta, offset=offset)

    def t(self, j: int) -> float:
        return self.t0 + (j + self.offset) * self.delta

    def t_array(self, j0: int = 0, j1: int | None = None) -> np.ndarray:
        j1 = self.count if j1 is None else j1
        return self.t0 + (np.arange(j0, j1, dtype=float) + self.offset) * self.delta


# ---------------------------------------------------------------------------
# evaluation


def _spec_arrays(spec: PolySpec, table: PrimeTable) -> tuple[np.ndarray, np.ndarray]:
    if table.limit < spec.X:
        raise ValueError(f"table limit {table.limit} below spec X {spec.X}")
    n = table.upto(spec.X)
    if n == 0:
        raise ValueError("no primes <= X")
    return table.logs[:n], table.weights(spec.m, spec.sigma, spec.X)


def poly_eval(spec: PolySpec, table: PrimeTable, t: float) -> float:
    """P(t) = sum_{p<=X} p^-sigma (log p)^-m cos(t log p + theta)."""
    omegas, w = _spec_arrays(spec, table)
    return float(np.dot(w, np.cos(phase_mod_two_pi(t, omegas) + spec.theta)))


def poly_eval_complex(spec: PolySpec, table: PrimeTable, t: float) -> complex:
    """Z(t) = sum_{p<=X} p^-sigma-it (log p)^-m (no theta rotation)."""
    omegas, w = _spec_arrays(spec, table)
    return complex(np.dot(w, np.exp(-1j * phase_mod_two_pi(t, omegas))))


def iter_poly_blocks(spec: PolySpec, table: PrimeTable, grid: TGrid, *,
                     chunk_cols: int = CHUNK_COLS) -> Iterator[tuple[int, np.ndarray]]:
    """Stream (j_start, Z) with Z[i] = sum_p w_p e^{-i t_{j_start+i} log p}.

    Blocks arrive in j order and partition the grid.  P(t) for any theta
    is cos(theta)*Z.real + sin(theta)*Z.imag; |Z| feeds the trimmed-set
    machinery.  Peak memory is O(primes * chunk_cols), never
    O(primes * count).
    """
    omegas, w = _spec_arrays(spec, table)
    # keep V and the column chunk near 128 MB each when the prime count is huge
    budget = max(64, (128 << 20) // (16 * omegas.size))
    rows = min(BLOCK_ROWS, grid.count, budget)
    chunk_cols = min(chunk_cols, budget)
    n_cols = -(-grid.count // rows)

    # V: (rows, P); row phases (j0 + offset)*delta*omega, weights folded in
    row_t = (np.arange(rows, dtype=float) + grid.offset) * grid.delta
    vmat = w[None, :] * np.exp(-1j * phase_mod_two_pi(row_t[:, None], omegas[None, :]))

    # chained per-column rotation over col*rows*delta, rebuilt exactly
    # every CHAIN_RENORM columns
    col_step = rows * grid.delta
    rot = np.exp(-1j * phase_mod_two_pi(col_step, omegas))
    ucol = np.empty_like(rot)
    uchunk = np.empty((omegas.size, min(chunk_cols, n_cols)), dtype=complex)

    emitted = 0
    col = 0
    while col < n_cols:
        cc = min(chunk_cols, n_cols - col)
        for i in range(cc):
            c = col + i
            if c % CHAIN_RENORM == 0:
                t_col = grid.t0 + (c * rows) * grid.delta
                ucol = np.exp(-1j * phase_mod_two_pi(t_col, omegas))
            else:
                ucol = ucol * rot
            uchunk[:, i] = ucol
        z = (vmat @ uchunk[:, :cc]).T.reshape(-1)
        take = min(z.size, grid.count - emitted)
        yield emitted, z[:take]
        emitted += take
        col += cc


def poly_eval_batch(spec: PolySpec, table: PrimeTable, grid: TGrid) -> np.ndarray:
    """P(t_j) for the whole grid (float64, length grid.count)."""
    out = np.empty(grid.count)
    ct, st = math.cos(spec.theta), math.sin(spec.theta)
    for j0, z in iter_poly_blocks(spec, table, grid):
        out[j0:j0 + z.size] = ct * z.real + st * z.imag
    return out


# ---------------------------------------------------------------------------
# von Mangoldt partial sums


def lambda_sum(m: int, sigma: float, X: float, t: float,
               table: PrimeTable | None = None) -> complex:
    """sum_{2<=n<=X} Lambda(n) n^{-sigma-it} (log n)^{-m-1}.

    Prime powers p^k contribute k^{-m-1} (log p)^{-m} p^{-k(sigma+it)}.
    sigma may exceed 1 here (unlike PolySpec); useful as the sigma>1
    Dirichlet-series side of the iterated-integral checks.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if X < 2:
        return 0j
    if table is None or table.limit < X:
        table = PrimeTable.build(int(X))
    acc = 0j
    k = 1
    while 2.0 ** k <= X:
        n = table.upto(X ** (1.0 / k))
        if n > 0:
            lg = table.logs[:n]
            amp = np.exp(-k * sigma * lg) * lg ** (-float(m)) / float(k) ** (m + 1)
            acc += complex(np.dot(amp, np.exp(-1j * phase_mod_two_pi(t, k * lg))))
        k += 1
    return acc


def approximation_defect(m: int, sigma: float, X: float, t: float,
                         cfg=None, table: PrimeTable | None = None) -> float:
    """|eta_tilde_m(sigma + it) - lambda_sum(m, sigma, X, t)|.

    The short-sum approximation error of the von Mangoldt partial sum
    against the true iterated integral.  No closed form off the sigma > 1
    half-plane; callers sample it over t and report quantiles.
    """
    from .zeta_core import eta_tilde  # deferred: zeta_core imports this module

    if m < 1:
        raise ValueError("m must be >= 1")
    exact = eta_tilde(m, sigma, t, cfg=cfg)
    return abs(exact - lambda_sum(m, sigma, X, t, table=table))
