"""Exact arithmetic over the plaintext field Z_p with p = 2^16 + 1.

All protocol payloads (user data, keystream blocks, model inputs) are
vectors over this field.  Values are stored in the canonical unsigned
representation [0, p-1]; signedness exists only at the lift boundary
(`centered_lift`), which maps residues to [-2^15, 2^15] with the tie
32768 lifting positive.
"""

from __future__ import annotations

import numpy as np

#: The plaintext modulus. Prime, and ≡ 1 (mod 2N) for every supported
#: BFV ring degree N, which is what makes slot batching possible.
P = 65537

#: Largest positive centered representative (2^15; the tie lifts positive).
HALF = 32768


class LengthMismatch(ValueError):
    """Vector operands of different lengths."""


def reduce(n: int) -> int:
    """Reduce a signed integer to its canonical residue in [0, p-1]."""
    return int(n) % P


def centered_lift(e: int) -> int:
    """Map a residue in [0, p-1] to its signed representative.

    Residues up to 2^15 lift to themselves; larger residues lift
    negative, so the image is [-2^15, 2^15] and
    ``reduce(centered_lift(e)) == e`` always holds.
    """
    e = int(e)
    if not 0 <= e < P:
        raise ValueError(f"residue out of range: {e}")
    return e if e <= HALF else e - P


def as_field_vector(values, *, allow_signed: bool = False) -> np.ndarray:
    """Validate and convert a sequence to a field vector (int64 ndarray).

    With ``allow_signed`` the input is reduced mod p first; otherwise
    every element must already be a canonical residue.
    """
    a = np.asarray(values, dtype=np.int64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("field vector must be one-dimensional and non-empty")
    if allow_signed:
        return np.mod(a, P)
    if np.any(a < 0) or np.any(a >= P):
        raise ValueError("elements must lie in [0, p-1]")
    return a


def centered_lift_vector(a: np.ndarray) -> np.ndarray:
    """Vectorised `centered_lift`."""
    a = np.asarray(a, dtype=np.int64)
    return np.where(a <= HALF, a, a - P)


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise LengthMismatch(f"length {a.shape[0]} vs {b.shape[0]}")


def vec_add(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
    _check_lengths(a, b)
    return (a + b) % P


def vec_sub(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
    _check_lengths(a, b)
    return (a - b) % P


def vec_mul(a, b) -> np.ndarray:
    """Elementwise product mod p.  Operands < p so int64 products are exact."""
    a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
    _check_lengths(a, b)
    return (a * b) % P


def vec_dot(a, b) -> int:
    """Inner product mod p.

    Partial products are < 2^34 and the accumulated sum over any
    protocol-sized vector stays far below 2^63, so the int64 path is
    exact before the final reduction.
    """
    a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
    _check_lengths(a, b)
    return int(np.sum((a * b) % P) % P)


def vec_op(a, b, kind: str):
    """Dispatch on ``kind`` in {"add", "sub", "mul", "dot"}."""
    ops = {"add": vec_add, "sub": vec_sub, "mul": vec_mul, "dot": vec_dot}
    if kind not in ops:
        raise ValueError(f"unknown vector op {kind!r}")
    return ops[kind](a, b)


def random_vector(length: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform field vector of the given length."""
    if length < 1:
        raise ValueError("length must be positive")
    return rng.integers(0, P, size=length, dtype=np.int64)
