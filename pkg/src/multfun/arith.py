"""Shared integer machinery: prime sieves, factorization, exact roots of unity.

All bulk tables live in a SieveContext, built once per bound N and cached,
so that several functions sieved at the same N share the smallest-prime-factor
array and the additive statistics (Omega, omega, squarefree mask, tau, radical).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError, ResourceError

__all__ = [
    "e",
    "RootOfUnity",
    "Zero",
    "ZERO",
    "ONE",
    "MINUS_ONE",
    "snap_root_of_unity",
    "SieveContext",
    "get_context",
    "primes_upto",
    "factorize",
    "is_prime",
    "totient",
    "mem_cap_bytes",
    "check_budget",
    "geometric_grid",
]


def e(x):
    """e(x) = exp(2*pi*i*x); accepts scalars or numpy arrays."""
    return np.exp(2j * np.pi * x)


def root_table(b: int) -> np.ndarray:
    """b-th roots of unity e(j/b), with exact 0 and +-1 components snapped.

    Snapping makes the order-1, -2 and -4 roots exact, so catalog values
    like lambda(n) and chi mod 4 compare exactly against +-1 and +-i.
    """
    tb = e(np.arange(b) / b)
    for part in (tb.real, tb.imag):
        part[np.abs(part) < 1e-14] = 0.0
        part[np.abs(part - 1.0) < 1e-14] = 1.0
        part[np.abs(part + 1.0) < 1e-14] = -1.0
    return tb


# --------------------------------------------------------------------------
# Exact value representations

@dataclass(frozen=True)
class Zero:
    """The exact complex value 0 (used as a level-set target)."""

    def __repr__(self):
        return "Zero()"

    @property
    def value(self) -> complex:
        return 0j


ZERO = Zero()


@dataclass(frozen=True)
class RootOfUnity:
    """The exact root of unity e(num/den), stored as a reduced fraction mod 1."""

    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise InputError(f"root of unity needs a positive denominator, got {self.den}")
        g = math.gcd(self.num % self.den, self.den)
        object.__setattr__(self, "num", (self.num % self.den) // g)
        object.__setattr__(self, "den", self.den // g)

    @property
    def value(self) -> complex:
        return complex(e(self.num / self.den))

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        d = self.den * other.den
        return RootOfUnity(self.num * other.den + other.num * self.den, d)

    def __pow__(self, k: int) -> "RootOfUnity":
        return RootOfUnity(self.num * k, self.den)

    def __repr__(self):
        if self.den == 1:
            return "RootOfUnity(1)"
        if (self.num, self.den) == (1, 2):
            return "RootOfUnity(-1)"
        return f"e({self.num}/{self.den})"


ONE = RootOfUnity(0, 1)
MINUS_ONE = RootOfUnity(1, 2)


def snap_root_of_unity(z: complex, max_den: int = 64, tol: float = 1e-9) -> RootOfUnity | None:
    """Snap a unimodular complex number to an exact root of unity.

    Returns None when |z| is not within tol of 1, or no e(a/q) with
    q <= max_den lies within tol of z.
    """
    if abs(abs(z) - 1.0) > tol:
        return None
    theta = math.atan2(z.imag, z.real) / (2 * math.pi) % 1.0
    cand = Fraction(theta).limit_denominator(max_den)
    r = RootOfUnity(cand.numerator, cand.denominator)
    if abs(r.value - z) <= tol:
        return r
    return None


# --------------------------------------------------------------------------
# Memory budget

DEFAULT_MEM_CAP_MB = 4096


def mem_cap_bytes() -> int:
    """Configured sieve memory cap (env MULTFUN_MEM_CAP_MB, default 4096)."""
    raw = os.environ.get("MULTFUN_MEM_CAP_MB", "").strip()
    mb = int(raw) if raw else DEFAULT_MEM_CAP_MB
    return mb * 1024 * 1024


def check_budget(nbytes: int, what: str) -> None:
    cap = mem_cap_bytes()
    if nbytes > cap:
        raise ResourceError(
            f"{what} needs ~{nbytes // (1024*1024)} MB, above the cap of "
            f"{cap // (1024*1024)} MB (MULTFUN_MEM_CAP_MB)"
        )


# --------------------------------------------------------------------------
# Sieve context

def _smallest_prime_factor(N: int) -> np.ndarray:
    spf = np.zeros(N + 1, dtype=np.int32)
    for p in range(2, math.isqrt(N) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    rest = np.flatnonzero(spf[2:] == 0) + 2
    spf[rest] = rest.astype(np.int32)
    if N >= 1:
        spf[1] = 1
    return spf


class SieveContext:
    """Factorization tables for [1, N]; additive statistics built lazily."""

    def __init__(self, N: int):
        if N < 1:
            raise InputError(f"sieve bound must be >= 1, got {N}")
        # spf (4 bytes) + room for one values array (16) and codes (4)
        check_budget(26 * (N + 1), f"sieve context for N={N}")
        self.N = N
        self.spf = _smallest_prime_factor(N)
        self.spf.flags.writeable = False
        pr = np.flatnonzero(self.spf == np.arange(N + 1, dtype=np.int32))
        self.primes = pr[pr >= 2].astype(np.int64)
        self.primes.flags.writeable = False
        self._prime_list: list[int] | None = None
        self._cache: dict[str, np.ndarray] = {}

    @property
    def prime_list(self) -> list[int]:
        if self._prime_list is None:
            self._prime_list = self.primes.tolist()
        return self._prime_list

    def _lazy(self, key, builder):
        if key not in self._cache:
            arr = builder()
            arr.flags.writeable = False
            self._cache[key] = arr
        return self._cache[key]

    @property
    def big_omega(self) -> np.ndarray:
        """Omega(n): prime factors counted with multiplicity (int8)."""

        def build():
            om = np.zeros(self.N + 1, dtype=np.int8)
            for p in self.prime_list:
                pk = p
                while pk <= self.N:
                    om[pk::pk] += 1
                    pk *= p
            return om

        return self._lazy("big_omega", build)

    @property
    def small_omega(self) -> np.ndarray:
        """omega(n): distinct prime divisors (int8)."""

        def build():
            w = np.zeros(self.N + 1, dtype=np.int8)
            for p in self.prime_list:
                w[p::p] += 1
            return w

        return self._lazy("small_omega", build)

    @property
    def squarefree(self) -> np.ndarray:
        """Boolean mask of squarefree n (index 0 is False)."""

        def build():
            m = np.ones(self.N + 1, dtype=bool)
            m[0] = False
            for p in self.prime_list:
                pp = p * p
                if pp > self.N:
                    break
                m[pp::pp] = False
            return m

        return self._lazy("squarefree", build)

    @property
    def tau(self) -> np.ndarray:
        """tau(n): number of divisors (int32)."""

        def build():
            t = np.ones(self.N + 1, dtype=np.int32)
            t[0] = 0
            for p in self.prime_list:
                t[p::p] *= 2
                pk, j = p * p, 2
                while pk <= self.N:
                    sl = t[pk::pk]
                    sl //= j
                    sl *= j + 1
                    pk *= p
                    j += 1
            return t

        return self._lazy("tau", build)

    @property
    def radical(self) -> np.ndarray:
        """rad(n): product of distinct primes dividing n (int64)."""

        def build():
            r = np.ones(self.N + 1, dtype=np.int64)
            r[0] = 0
            for p in self.prime_list:
                r[p::p] *= p
            return r

        return self._lazy("radical", build)


_CONTEXTS: dict[int, SieveContext] = {}
_MAX_CONTEXTS = 2


def get_context(N: int) -> SieveContext:
    """Cached SieveContext; at most a couple kept alive at once."""
    if N in _CONTEXTS:
        return _CONTEXTS[N]
    ctx = SieveContext(N)
    while len(_CONTEXTS) >= _MAX_CONTEXTS:
        _CONTEXTS.pop(next(iter(_CONTEXTS)))
    _CONTEXTS[N] = ctx
    return ctx


def primes_upto(P: int) -> np.ndarray:
    """Primes <= P as an int64 array."""
    return get_context(P).primes


def geometric_grid(lo: int, hi: int, per_decade: int = 8) -> np.ndarray:
    """Ascending integer grid, roughly geometric, ending exactly at hi."""
    if hi < lo:
        lo = hi
    npts = max(2, int(per_decade * math.log10(max(hi, 10) / lo + 1)) + 2)
    g = np.unique(np.geomspace(lo, hi, npts).astype(np.int64))
    if g[-1] != hi:
        g = np.append(g, hi)
    return g


# --------------------------------------------------------------------------
# Scalar factorization (64-bit), Miller-Rabin + Pollard's rho

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    seed = 1
    while True:
        x = y = 2 + seed
        c = 1 + seed
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        seed += 1


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as sorted (p, exponent) pairs."""
    if n < 1:
        raise InputError(f"cannot factor {n}; need n >= 1")
    if n >= 1 << 63:
        raise InputError(f"n = {n} exceeds the 64-bit input range")
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    # trial division by 6k+-1 up to a small bound, then rho
    f = 41
    while f * f <= n and f < 100_000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return sorted(out.items())


def totient(n: int) -> int:
    """Euler's phi via factorization."""
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result
