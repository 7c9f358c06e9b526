"""Negacyclic number-theoretic transforms over word-sized primes.

All polynomial arithmetic in the ring Z_p[X]/(X^n + 1) runs through the
transforms here.  Primes are chosen ≡ 1 (mod 2n) so a primitive 2n-th
root of unity exists; with p < 2^30 every butterfly product fits in
int64, and twiddle factors are stored in Montgomery form (w·2^32 mod p)
so the hot loops never divide.

The JIT-compiled kernels are used when numba is importable; otherwise a
vectorised numpy implementation of the identical butterfly schedule
takes over (slower, same outputs).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


_MASK32 = 0xFFFFFFFF
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for every n below 3.3e24."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def find_ntt_primes(count: int, *, bits: int = 30, multiple: int = 65536,
                    avoid=()) -> tuple:
    """The ``count`` largest primes p < 2^bits with p ≡ 1 (mod multiple).

    The congruence 1 mod 2^16 makes each prime NTT-friendly for every
    supported ring degree at once.  Deterministic descending scan, so
    parameter presets are stable across runs.
    """
    avoid = set(avoid)
    primes = []
    k = ((1 << bits) - 2) // multiple
    while len(primes) < count and k > 0:
        p = k * multiple + 1
        if p not in avoid and is_prime(p):
            primes.append(p)
        k -= 1
    if len(primes) < count:
        raise ValueError("prime scan exhausted")
    return tuple(primes)


def _bit_reverse(x: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@njit(cache=True)
def _ntt_forward_jit(a, psi_mont, p, p_neg_inv):  # pragma: no cover - jit
    n = a.shape[0]
    t = n
    m = 1
    while m < n:
        t >>= 1
        for i in range(m):
            w = psi_mont[m + i]
            j1 = 2 * i * t
            for j in range(j1, j1 + t):
                u = a[j]
                x = a[j + t] * w
                lo = ((x & _MASK32) * p_neg_inv) & _MASK32
                v = (x + lo * p) >> 32
                if v >= p:
                    v -= p
                y = u + v
                if y >= p:
                    y -= p
                a[j] = y
                y = u - v
                if y < 0:
                    y += p
                a[j + t] = y
        m <<= 1


@njit(cache=True)
def _ntt_inverse_jit(a, ipsi_mont, n_inv_mont, p, p_neg_inv):  # pragma: no cover
    n = a.shape[0]
    t = 1
    m = n
    while m > 1:
        h = m >> 1
        for i in range(h):
            w = ipsi_mont[h + i]
            j1 = 2 * i * t
            for j in range(j1, j1 + t):
                u = a[j]
                v = a[j + t]
                y = u + v
                if y >= p:
                    y -= p
                a[j] = y
                x = (u - v + p) * w
                lo = ((x & _MASK32) * p_neg_inv) & _MASK32
                y = (x + lo * p) >> 32
                if y >= p:
                    y -= p
                a[j + t] = y
        t <<= 1
        m = h
    for j in range(n):
        x = a[j] * n_inv_mont
        lo = ((x & _MASK32) * p_neg_inv) & _MASK32
        y = (x + lo * p) >> 32
        if y >= p:
            y -= p
        a[j] = y


def _ntt_forward_np(a, psi_plain, p):
    n = a.shape[0]
    t = n
    m = 1
    while m < n:
        t >>= 1
        view = a.reshape(m, 2, t)
        w = psi_plain[m : 2 * m, None]
        u = view[:, 0, :].copy()
        v = (view[:, 1, :] * w) % p
        view[:, 0, :] = (u + v) % p
        view[:, 1, :] = (u - v) % p
        m <<= 1


def _ntt_inverse_np(a, ipsi_plain, n_inv, p):
    n = a.shape[0]
    t = 1
    m = n
    while m > 1:
        h = m >> 1
        view = a.reshape(h, 2, t)
        w = ipsi_plain[h : 2 * h, None]
        u = view[:, 0, :].copy()
        v = view[:, 1, :].copy()
        view[:, 0, :] = (u + v) % p
        view[:, 1, :] = ((u - v) * w) % p
        t <<= 1
        m = h
    a[:] = (a * n_inv) % p


class NttContext:
    """Precomputed transform tables for one (ring degree, prime) pair."""

    def __init__(self, n: int, p: int):
        if n & (n - 1) or n < 8:
            raise ValueError("ring degree must be a power of two")
        if (p - 1) % (2 * n):
            raise ValueError(f"{p} admits no primitive 2n-th root for n={n}")
        self.n = n
        self.p = p
        # smallest quadratic non-residue generates the 2-part of Z_p*
        g = 2
        while pow(g, (p - 1) // 2, p) == 1:
            g += 1
        psi = pow(g, (p - 1) // (2 * n), p)
        assert pow(psi, n, p) == p - 1
        self.psi = psi
        bits = n.bit_length() - 1
        order = [_bit_reverse(i, bits) for i in range(n)]
        psis = [pow(psi, e, p) for e in order]
        ipsi = pow(psi, -1, p)
        ipsis = [pow(ipsi, e, p) for e in order]
        r = 1 << 32
        self.psi_plain = np.array(psis, dtype=np.int64)
        self.ipsi_plain = np.array(ipsis, dtype=np.int64)
        self.psi_mont = np.array([w * r % p for w in psis], dtype=np.int64)
        self.ipsi_mont = np.array([w * r % p for w in ipsis], dtype=np.int64)
        self.n_inv = pow(n, -1, p)
        self.n_inv_mont = self.n_inv * r % p
        self.p_neg_inv = pow(-p, -1, r)
        self._eval_exponents = None

    def forward(self, a: np.ndarray) -> np.ndarray:
        """Out-of-place forward transform (evaluation order is fixed
        but internal; use `eval_exponents` to interpret positions)."""
        out = np.ascontiguousarray(a, dtype=np.int64).copy()
        if HAVE_NUMBA:
            _ntt_forward_jit(out, self.psi_mont, self.p, self.p_neg_inv)
        else:
            _ntt_forward_np(out, self.psi_plain, self.p)
        return out

    def inverse(self, a: np.ndarray) -> np.ndarray:
        out = np.ascontiguousarray(a, dtype=np.int64).copy()
        if HAVE_NUMBA:
            _ntt_inverse_jit(out, self.ipsi_mont, self.n_inv_mont, self.p,
                             self.p_neg_inv)
        else:
            _ntt_inverse_np(out, self.ipsi_plain, self.n_inv, self.p)
        return out

    @property
    def eval_exponents(self) -> np.ndarray:
        """Exponent e(i) such that position i of a forward transform
        holds the evaluation at psi^e(i).  Derived from the transform
        itself so it stays correct for any butterfly schedule."""
        if self._eval_exponents is None:
            probe = np.zeros(self.n, dtype=np.int64)
            probe[1] = 1
            vals = self.forward(probe)
            dlog = {}
            acc = 1
            for e in range(2 * self.n):
                dlog[acc] = e
                acc = acc * self.psi % self.p
            self._eval_exponents = np.array(
                [dlog[int(v)] for v in vals], dtype=np.int64
            )
        return self._eval_exponents


_CTX_CACHE: dict = {}


def get_context(n: int, p: int) -> NttContext:
    key = (n, p)
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = _CTX_CACHE[key] = NttContext(n, p)
    return ctx


def galois_transform_maps(n: int, elt: int):
    """Coefficient permutation realising a(X) -> a(X^elt) in the ring.

    Returns (target_index, negate) arrays: coefficient i of the input
    lands at target_index[i], negated when X^(i*elt) reduces with a
    sign flip across X^n = -1.
    """
    if elt % 2 == 0:
        raise ValueError("galois element must be odd")
    idx = (np.arange(n, dtype=np.int64) * elt) % (2 * n)
    return idx % n, idx >= n


def apply_galois_poly(a: np.ndarray, maps, p: int) -> np.ndarray:
    tgt, neg = maps
    out = np.empty_like(a)
    vals = np.where(neg, (p - a) % p, a)
    out[tgt] = vals
    return out
