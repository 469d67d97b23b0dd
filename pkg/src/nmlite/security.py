"""RSA keypairs, signature with message recovery, and value encryption.

This is deliberately the raw ("textbook") construction: requests are signed
by exponentiating the message itself with the private exponent, and the
verifier recovers the message bytes with the public exponent and compares
them to what was received.  Returned values travel as blocks encrypted with
the public exponent and are decrypted by the manager with the private one.
No digest, no OAEP/PSS padding: a 0x01 sentinel byte prefixes each
plaintext chunk so block integers stay below the modulus and tampering is
detectable.  That makes the scheme easy to verify end to end but INSECURE
BY MODERN STANDARDS; do not reuse it outside this framework.

A single keypair serves a deployment: the manager holds (n, e, d); agents
are provisioned with the public part (n, e) via their key file.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from typing import Optional

from nmlite import wire

__all__ = [
    "RsaKeyPair", "SecurityError", "MissingPrivateExponent",
    "BadBlockLength", "SentinelMismatch", "BadKeyFile",
    "generate_keypair", "sign", "verify_recover", "encrypt", "decrypt",
    "apply_block", "save_key_file", "load_key_file",
    "sign_message", "verify_signed_message",
]

SENTINEL = 0x01


class SecurityError(Exception):
    pass


class MissingPrivateExponent(SecurityError):
    """The operation needs d but the key only carries the public part."""


class BadBlockLength(SecurityError):
    """Cipher/signature byte length is not a multiple of the block size."""


class SentinelMismatch(SecurityError):
    """A recovered block does not start with the 0x01 sentinel: the data
    was tampered with or the wrong key was used."""


class BadKeyFile(SecurityError):
    pass


@dataclass(frozen=True)
class RsaKeyPair:
    """Modulus, public exponent, optional private exponent, and the modulus
    length in bytes (the cipher block size)."""

    n: int
    e: int
    d: Optional[int] = None
    k: int = 0

    def __post_init__(self):
        if self.k == 0:
            object.__setattr__(self, "k", (self.n.bit_length() + 7) // 8)

    @property
    def has_private(self) -> bool:
        return self.d is not None

    def public_only(self) -> "RsaKeyPair":
        return RsaKeyPair(n=self.n, e=self.e)

    @classmethod
    def from_primes(cls, p: int, q: int, e: int) -> "RsaKeyPair":
        """Assemble a keypair from chosen primes (test/demo hook)."""
        n = p * q
        phi = (p - 1) * (q - 1)
        return cls(n=n, e=e, d=pow(e, -1, phi))


# -- prime generation --------------------------------------------------------

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def _is_probable_prime(n: int, rng: _random.Random, rounds: int = 40) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def _random_prime(bits: int, rng: _random.Random) -> int:
    while True:
        candidate = rng.getrandbits(bits)
        candidate |= (1 << (bits - 1)) | (1 << (bits - 2)) | 1
        if _is_probable_prime(candidate, rng):
            return candidate


def generate_keypair(bits: int = 1024, seed: Optional[int] = None) -> RsaKeyPair:
    """Generate a keypair with an exactly ``bits``-bit modulus.

    With a seed the result is deterministic (same keypair every run); without
    one, system randomness is used.  The public exponent is 65537 unless it
    shares a factor with phi, in which case the next coprime odd candidate
    is taken.
    """
    if bits not in (512, 1024, 2048):
        raise ValueError("bits must be one of 512, 1024, 2048")
    rng = _random.Random(seed) if seed is not None else _random.SystemRandom()
    half = bits // 2
    while True:
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if p == q:
            continue
        n = p * q
        if n.bit_length() != bits:
            continue
        phi = (p - 1) * (q - 1)
        e = 65537
        while _gcd(e, phi) != 1:
            e += 2
        return RsaKeyPair(n=n, e=e, d=pow(e, -1, phi))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# -- block pipeline ----------------------------------------------------------

def apply_block(value: int, exponent: int, modulus: int) -> int:
    """The core per-block transform: value^exponent mod modulus."""
    return pow(value, exponent, modulus)


def _transform_out(data: bytes, exponent: int, key: RsaKeyPair) -> bytes:
    """Chunk ``data`` into sentinel-prefixed (k-1)-byte blocks, exponentiate
    each, and emit k-byte big-endian blocks."""
    k = key.k
    out = bytearray()
    for start in range(0, len(data), k - 1):
        chunk = data[start:start + k - 1]
        block = int.from_bytes(bytes([SENTINEL]) + chunk, "big")
        out += apply_block(block, exponent, key.n).to_bytes(k, "big")
    return bytes(out)


def _transform_in(blocks: bytes, exponent: int, key: RsaKeyPair) -> bytes:
    """Invert _transform_out: exponentiate each k-byte block, check and
    strip the sentinel, and concatenate the recovered chunks."""
    k = key.k
    if len(blocks) % k != 0:
        raise BadBlockLength(f"{len(blocks)} bytes is not a multiple of {k}")
    out = bytearray()
    for start in range(0, len(blocks), k):
        value = int.from_bytes(blocks[start:start + k], "big")
        recovered = apply_block(value, exponent, key.n)
        raw = recovered.to_bytes(max(1, (recovered.bit_length() + 7) // 8), "big")
        if raw[0] != SENTINEL:
            raise SentinelMismatch(f"block at offset {start} lost its sentinel")
        out += raw[1:]
    return bytes(out)


def sign(message: bytes, key: RsaKeyPair) -> bytes:
    """Signature with message recovery: the private-exponent transform of
    the message itself.  Empty messages sign to empty signatures."""
    if key.d is None:
        raise MissingPrivateExponent("signing needs the private exponent")
    return _transform_out(message, key.d, key)


def verify_recover(signature: bytes, key: RsaKeyPair) -> bytes:
    """Recover the signed message with the public exponent.  The caller
    compares the result against the bytes it received; a mismatch (or a
    SentinelMismatch) means tampering or the wrong key."""
    return _transform_in(signature, key.e, key)


def encrypt(plain: bytes, key: RsaKeyPair) -> bytes:
    """Encrypt return data with the public exponent (same chunking as
    signing, exponents swapped)."""
    return _transform_out(plain, key.e, key)


def decrypt(cipher: bytes, key: RsaKeyPair) -> bytes:
    if key.d is None:
        raise MissingPrivateExponent("decryption needs the private exponent")
    return _transform_in(cipher, key.d, key)


# -- key files ---------------------------------------------------------------

def save_key_file(key: RsaKeyPair, path: str, include_private: bool = True) -> None:
    """Write a decimal-text key file: lines n=..., e=..., and optionally d=..."""
    lines = [f"n={key.n}", f"e={key.e}"]
    if include_private and key.d is not None:
        lines.append(f"d={key.d}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_key_file(path: str) -> RsaKeyPair:
    values: dict[str, int] = {}
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                name, sep, value = line.partition("=")
                name = name.strip()
                if not sep or name not in ("n", "e", "d"):
                    raise BadKeyFile(f"{path}: unexpected line {line!r}")
                try:
                    values[name] = int(value.strip())
                except ValueError:
                    raise BadKeyFile(f"{path}: {name} is not a decimal integer")
    except OSError as exc:
        raise BadKeyFile(f"{path}: {exc}") from exc
    if "n" not in values or "e" not in values:
        raise BadKeyFile(f"{path}: needs at least n= and e= lines")
    return RsaKeyPair(n=values["n"], e=values["e"], d=values.get("d"))


# -- message-level helpers ---------------------------------------------------

def sign_message(message: wire.Message, key: RsaKeyPair) -> wire.Message:
    """Return a copy with the SIGNED flag set and the signature appended as
    the last field.  The signature covers the encoding of the message with
    the flag set but without the signature field."""
    import dataclasses

    unsigned = dataclasses.replace(
        message, flags=message.flags | wire.FLAG_SIGNED,
        fields=list(message.fields))
    signature = sign(wire.encode_message(unsigned), key)
    return dataclasses.replace(unsigned,
                               fields=list(unsigned.fields) + [signature])


def verify_signed_message(message: wire.Message, key: RsaKeyPair) -> bool:
    """Check a SIGNED message: recover the signature's content and compare
    it to the message's own encoding without the signature field."""
    if not message.signed or not message.fields:
        return False
    span = wire.encode_message(message.without_last_field())
    try:
        recovered = verify_recover(message.fields[-1], key)
    except (BadBlockLength, SentinelMismatch):
        return False
    return recovered == span
