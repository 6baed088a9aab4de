"""Canonical byte encoding, hashing, fixed-point arithmetic, and seeded randomness.

Every hash in the system is SHA-256 over a canonical binary encoding defined
here, so that identical values always produce identical digests. The encoding
rules are:

* ``u8`` / ``u32`` / ``u64``: fixed-width big-endian unsigned integers.
* ``lp(b)``: a ``u32`` byte length followed by the raw bytes.
* ``uv(n)``: arbitrary-size unsigned integer as ``lp`` of its minimal
  big-endian representation (zero encodes as a zero-length field).
* Strings are UTF-8 bytes wrapped in ``lp``.
* Addresses are 20 raw bytes; digests are 32 raw bytes (no prefix).
* Each composite structure starts with a short ASCII domain tag ("TX1",
  "BH1", ...) so digests from different structures can never collide.

Money and simulation metrics use fixed-point integers at scale 10^4 with
round-half-up division; no floats touch any committed value.
"""

from __future__ import annotations

import hashlib

ADDRESS_LEN = 20
HASH_LEN = 32
HASH_FUNCTION = "sha256"

FP_SCALE = 10_000
FP_DIGITS = 4


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


# -- primitive encoders -------------------------------------------------------

def u8(n: int) -> bytes:
    return n.to_bytes(1, "big")


def u32(n: int) -> bytes:
    return n.to_bytes(4, "big")


def u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def lp(data: bytes) -> bytes:
    return u32(len(data)) + data


def lps(text: str) -> bytes:
    return lp(text.encode("utf-8"))


def uv(n: int) -> bytes:
    if n < 0:
        raise ValueError("uv encodes unsigned integers only")
    if n == 0:
        return lp(b"")
    return lp(n.to_bytes((n.bit_length() + 7) // 8, "big"))


# -- hex forms ----------------------------------------------------------------

def to_hex(data: bytes) -> str:
    return "0x" + data.hex()


def from_hex(text: str, expected_len: int | None = None) -> bytes:
    """Parse canonical 0x-hex: lowercase digits only, no whitespace.

    Strictness matters: the chain-file integrity guarantee relies on every
    stored byte sequence having exactly one accepted spelling.
    """
    if not text.startswith("0x"):
        raise ValueError(f"hex field must start with 0x: {text!r}")
    digits = text[2:]
    if len(digits) % 2 != 0 or any(c not in "0123456789abcdef" for c in digits):
        raise ValueError(f"non-canonical hex field: {text!r}")
    data = bytes.fromhex(digits)
    if expected_len is not None and len(data) != expected_len:
        raise ValueError(f"expected {expected_len} bytes, got {len(data)}")
    return data


# -- fixed point (scale 10^4, round half up) ----------------------------------

def div_round_half_up(num: int, den: int) -> int:
    """Divide non-negative num by positive den, rounding halves upward."""
    if num < 0 or den <= 0:
        raise ValueError("div_round_half_up requires num >= 0 and den > 0")
    return (2 * num + den) // (2 * den)


def fp_mul(a: int, b: int) -> int:
    """Multiply two scale-10^4 fixed-point values."""
    return div_round_half_up(a * b, FP_SCALE)


def fp_from_str(text: str) -> int:
    """Parse a decimal string like "10000.0000" into a fixed-point integer.

    At most four fractional digits are allowed; fewer are right-padded.
    Negative values are rejected: nothing in the system carries one.
    """
    text = text.strip()
    if text.startswith("-"):
        raise ValueError(f"negative fixed-point value not allowed: {text!r}")
    if "." in text:
        whole, frac = text.split(".", 1)
    else:
        whole, frac = text, ""
    if len(frac) > FP_DIGITS:
        raise ValueError(f"more than {FP_DIGITS} fractional digits: {text!r}")
    if not (whole or frac):
        raise ValueError(f"fixed-point value needs at least one digit: {text!r}")
    whole = whole or "0"
    if not whole.isdigit() or (frac and not frac.isdigit()):
        raise ValueError(f"malformed fixed-point value: {text!r}")
    return int(whole) * FP_SCALE + int(frac.ljust(FP_DIGITS, "0"))


def fp_to_str(value: int) -> str:
    """Format a fixed-point integer as a decimal string with 4 digits."""
    if value < 0:
        raise ValueError("negative fixed-point value not allowed")
    whole, frac = divmod(value, FP_SCALE)
    return f"{whole}.{frac:0{FP_DIGITS}d}"


# -- deterministic randomness --------------------------------------------------

class DetRng:
    """Counter-mode SHA-256 stream: identical seeds give identical draws.

    Used wherever reproducibility across runs and platforms matters (agent
    decisions, test fuzzing). Draws use rejection sampling, so ``below(n)``
    is uniform for any n.
    """

    def __init__(self, seed: bytes):
        self._seed = seed
        self._counter = 0
        self._buffer = b""

    def _refill(self) -> None:
        self._buffer += sha256(self._seed + u64(self._counter))
        self._counter += 1

    def bytes(self, n: int) -> bytes:
        while len(self._buffer) < n:
            self._refill()
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def u64(self) -> int:
        return int.from_bytes(self.bytes(8), "big")

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() requires n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            draw = self.u64()
            if draw < limit:
                return draw % n

    def choice(self, items: list):
        return items[self.below(len(items))]


def named_address(name: str) -> bytes:
    """Derive a stable 20-byte account address from a human-readable name."""
    return sha256(b"AC1" + lps(name))[-ADDRESS_LEN:]
