"""HE-friendly symmetric stream cipher over Z_p.

A PASTA-style construction: the state is two branches of ``t`` field
elements initialised from the 2t-element key.  Each round applies a
public affine layer (matrix and round constant derived from an XOF
seeded with nonce, block counter and round index), a fixed mixing step,
and a low-degree nonlinear layer (Feistel squares, with a final cube in
the last round).  The keystream block is the left branch after one last
affine layer.

Because the affine layers are public and the nonlinear layers have
multiplicative depth (rounds-1) + 2, one keystream block can be
re-evaluated as a shallow arithmetic circuit on a homomorphically
encrypted key -- which is exactly what the transciphering module does.
No cryptanalytic strength is claimed for these toy parameters.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import P, as_field_vector

_XOF_DOMAIN = b"guardml-ks-v1"
_REJECT = 0xFFFFFFFF  # 2^32 mod p == 1, so exactly this draw is rejected


class RngFailure(RuntimeError):
    """The OS random source failed to produce key material."""


class NonceReuse(ValueError):
    """A (key, nonce) pair was reused within one session."""


@dataclass(frozen=True)
class CipherConfig:
    """Branch width t (keystream block size) and round count."""

    branch_width: int = 32
    rounds: int = 3

    def __post_init__(self):
        if self.branch_width < 4:
            raise ValueError("branch width must be >= 4")
        if self.rounds < 2:
            raise ValueError("round count must be >= 2")

    @property
    def key_length(self) -> int:
        return 2 * self.branch_width


DEFAULT_CONFIG = CipherConfig()


@dataclass(frozen=True)
class SymmetricKey:
    """A uniformly random field vector of length 2t."""

    elems: np.ndarray
    config: CipherConfig = DEFAULT_CONFIG

    def __post_init__(self):
        object.__setattr__(self, "elems", as_field_vector(self.elems))
        if self.elems.shape[0] != self.config.key_length:
            raise ValueError(
                f"key must have exactly {self.config.key_length} elements"
            )

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricKey)
            and self.config == other.config
            and np.array_equal(self.elems, other.elems)
        )


@dataclass(frozen=True)
class SymCiphertext:
    """Nonce, starting block counter and the masked data vector.

    The body has exactly the plaintext's length; expansion over the
    plaintext is only the fixed nonce/counter header.
    """

    nonce: bytes
    start_counter: int
    body: np.ndarray
    config: CipherConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if len(self.nonce) != 16:
            raise ValueError("nonce must be 16 bytes")
        if not 0 <= self.start_counter < 2 ** 64:
            raise ValueError("counter must fit in 64 bits")
        object.__setattr__(self, "body", as_field_vector(self.body))

    def __len__(self) -> int:
        return int(self.body.shape[0])

    def block_count(self) -> int:
        t = self.config.branch_width
        return (len(self) + t - 1) // t


@dataclass(frozen=True)
class AffineLayer:
    """One public affine layer: x -> M x + c over Z_p."""

    matrix: np.ndarray  # (t, t)
    constant: np.ndarray  # (t,)


@dataclass(frozen=True)
class BlockLayers:
    """All public layers of one keystream block's round function.

    ``rounds[j]`` holds the (L, R) affine layers of round j; ``final``
    is the closing affine layer applied to the left branch.
    """

    rounds: tuple  # tuple of (AffineLayer, AffineLayer)
    final: AffineLayer


def _xof_field_elements(seed: bytes, count: int) -> np.ndarray:
    """Sample ``count`` uniform field elements from SHAKE-128(seed).

    Each element consumes 4 little-endian bytes; the single value
    2^32 - 1 is rejected (2^32 ≡ 1 mod p, so everything below reduces
    uniformly).  Rejected draws are replaced from the continuation of
    the same output stream, keeping the sampling deterministic.
    """
    shake = hashlib.shake_128(_XOF_DOMAIN + seed)
    need = count
    taken = 0
    out = np.empty(count, dtype=np.int64)
    filled = 0
    while need > 0:
        n_words = need + 8
        buf = np.frombuffer(
            shake.digest(4 * (taken + n_words)), dtype="<u4"
        )[taken:]
        taken += n_words
        good = buf[buf != _REJECT][:need]
        out[filled : filled + good.size] = good.astype(np.int64) % P
        filled += good.size
        need -= good.size
    return out


def _layer_seed(nonce: bytes, block_index: int, round_index: int, branch: int) -> bytes:
    return (
        nonce
        + block_index.to_bytes(8, "little")
        + round_index.to_bytes(4, "little")
        + bytes([branch])
    )


def block_layers(config: CipherConfig, nonce: bytes, block_index: int) -> BlockLayers:
    """Derive the public affine layers for one keystream block."""
    t = config.branch_width

    def layer(round_index: int, branch: int) -> AffineLayer:
        elems = _xof_field_elements(
            _layer_seed(nonce, block_index, round_index, branch), t * t + t
        )
        return AffineLayer(matrix=elems[: t * t].reshape(t, t), constant=elems[t * t :])

    rounds = tuple(
        (layer(j, 0), layer(j, 1)) for j in range(config.rounds)
    )
    return BlockLayers(rounds=rounds, final=layer(config.rounds, 0))


def _affine(layer: AffineLayer, v: np.ndarray) -> np.ndarray:
    # products < p^2 and row sums < t * p^2 < 2^63: exact in int64
    return (layer.matrix @ v + layer.constant) % P


def _feistel_square(v: np.ndarray) -> np.ndarray:
    out = v.copy()
    out[1:] = (v[1:] + v[:-1] * v[:-1]) % P
    return out


def keystream_block(
    key: SymmetricKey, nonce: bytes, block_index: int
) -> np.ndarray:
    """One keystream block: a pure function of (key, nonce, counter)."""
    config = key.config
    t = config.branch_width
    layers = block_layers(config, nonce, block_index)
    left = key.elems[:t].copy()
    right = key.elems[t:].copy()
    for j in range(config.rounds):
        lay_l, lay_r = layers.rounds[j]
        left = _affine(lay_l, left)
        right = _affine(lay_r, right)
        left, right = (2 * left + right) % P, (left + 2 * right) % P
        if j < config.rounds - 1:
            left = _feistel_square(left)
            right = _feistel_square(right)
        else:
            left = (left * left % P) * left % P
            right = (right * right % P) * right % P
    return _affine(layers.final, left)


def keystream(key: SymmetricKey, nonce: bytes, length: int, start_counter: int = 0) -> np.ndarray:
    """Concatenated keystream of the given length."""
    t = key.config.branch_width
    blocks = [
        keystream_block(key, nonce, start_counter + b)
        for b in range((length + t - 1) // t)
    ]
    return np.concatenate(blocks)[:length]


def multiplicative_depth(config: CipherConfig = DEFAULT_CONFIG) -> int:
    """Symbolic multiplicative depth of one keystream block.

    Runs the round structure on per-element depth counters instead of
    field values: affine and mixing layers take the max of their
    inputs, a Feistel square costs one level on the fed-forward
    element, the final cube costs two.
    """
    t = config.branch_width
    left = [0] * t
    right = [0] * t

    def affine_depth(v):
        return [max(v)] * t

    for j in range(config.rounds):
        left, right = affine_depth(left), affine_depth(right)
        mixed = [max(a, b) for a, b in zip(left, right)]
        left, right = list(mixed), list(mixed)
        if j < config.rounds - 1:
            for i in range(t - 1, 0, -1):
                left[i] = max(left[i], left[i - 1] + 1)
                right[i] = max(right[i], right[i - 1] + 1)
        else:
            left = [d + 2 for d in left]
            right = [d + 2 for d in right]
    return max(affine_depth(left))


def ske_gen(
    config: CipherConfig = DEFAULT_CONFIG, rng: np.random.Generator | None = None
) -> SymmetricKey:
    """Generate a uniformly random symmetric key.

    Without an explicit generator the key is drawn from the OS
    cryptographic source; the ``rng`` hook exists for deterministic
    protocol transcripts.
    """
    n = config.key_length
    if rng is not None:
        elems = rng.integers(0, P, size=n, dtype=np.int64)
    else:
        try:
            elems = np.array(
                [secrets.randbelow(P) for _ in range(n)], dtype=np.int64
            )
        except Exception as exc:  # pragma: no cover - OS entropy failure
            raise RngFailure("system random source unavailable") from exc
    return SymmetricKey(elems=elems, config=config)


def random_nonce(rng: np.random.Generator | None = None) -> bytes:
    if rng is not None:
        return rng.integers(0, 256, size=16, dtype=np.uint8).tobytes()
    return secrets.token_bytes(16)


def ske_enc(
    key: SymmetricKey, x, nonce: bytes, start_counter: int = 0
) -> SymCiphertext:
    """Mask ``x`` with the keystream.  The caller guarantees nonce freshness."""
    x = as_field_vector(x)
    ks = keystream(key, nonce, x.shape[0], start_counter)
    return SymCiphertext(
        nonce=nonce,
        start_counter=start_counter,
        body=(x + ks) % P,
        config=key.config,
    )


def ske_dec(key: SymmetricKey, ct: SymCiphertext) -> np.ndarray:
    """Invert `ske_enc`: subtract the keystream from the body."""
    if key.config != ct.config:
        raise ValueError("ciphertext was produced under a different cipher config")
    ks = keystream(key, ct.nonce, len(ct), ct.start_counter)
    return (ct.body - ks) % P


@dataclass
class CipherSession:
    """Per-key encryption session enforcing nonce freshness.

    Not thread-safe; confine one session to one logical sender, as the
    protocol's user role does.
    """

    key: SymmetricKey
    rng: np.random.Generator | None = None
    _seen: set = dc_field(default_factory=set)

    def encrypt(self, x, nonce: bytes | None = None) -> SymCiphertext:
        if nonce is None:
            nonce = random_nonce(self.rng)
            while nonce in self._seen:  # pragma: no cover - 2^-128 event
                nonce = random_nonce(self.rng)
        if nonce in self._seen:
            raise NonceReuse("nonce already used under this key")
        self._seen.add(nonce)
        return ske_enc(self.key, x, nonce)


# Wire format: version byte, 16-byte nonce, 8-byte LE counter,
# 4-byte LE element count, then 4 bytes LE per element.
_SYM_VERSION = 1


def serialize_sym_ciphertext(ct: SymCiphertext) -> bytes:
    head = (
        bytes([_SYM_VERSION])
        + ct.nonce
        + ct.start_counter.to_bytes(8, "little")
        + len(ct).to_bytes(4, "little")
    )
    return head + ct.body.astype("<u4").tobytes()


def deserialize_sym_ciphertext(
    data: bytes, config: CipherConfig = DEFAULT_CONFIG
) -> SymCiphertext:
    if len(data) < 29 or data[0] != _SYM_VERSION:
        raise ValueError("malformed symmetric ciphertext")
    nonce = data[1:17]
    counter = int.from_bytes(data[17:25], "little")
    length = int.from_bytes(data[25:29], "little")
    body = np.frombuffer(data[29:], dtype="<u4")
    if body.shape[0] != length:
        raise ValueError("truncated symmetric ciphertext body")
    return SymCiphertext(
        nonce=nonce,
        start_counter=counter,
        body=body.astype(np.int64),
        config=config,
    )
