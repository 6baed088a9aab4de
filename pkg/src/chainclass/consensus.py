"""Pluggable block-sealing engines: proof-of-work and proof-of-stake.

PoW difficulty counts leading zero bits of the 256-bit block hash; the
nonce search runs ascending from zero so the found nonce is always the
smallest qualifying one. PoS selection is stake-weighted: the 256-bit
selection seed, read as a big-endian integer modulo total stake, picks a
point on the cumulative stake line walked in ascending address order.
Block rewards are transaction fees only; there is no subsidy, so total
supply never changes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

from .codec import ADDRESS_LEN, HASH_LEN, from_hex, sha256, to_hex, u8, u64

MAX_DIFFICULTY_BITS = 255
DESK_DIFFICULTY_CEILING = 32
MAX_POW_NONCE = 2**64 - 1


class ConsensusError(Exception):
    pass


class NoStakers(ConsensusError):
    """No account holds positive stake; a PoS block cannot be sealed."""


class SealFailure(ConsensusError):
    pass


class NonceExhausted(ConsensusError):
    """The 64-bit nonce space ran out (unreachable at desk difficulties)."""


class UnknownProducer(ConsensusError):
    pass


@dataclass(frozen=True)
class PowSeal:
    pow_nonce: int
    difficulty_bits: int


@dataclass(frozen=True)
class PosSeal:
    validator: bytes
    selection_seed: bytes


ConsensusSeal = PowSeal | PosSeal


def seal_bytes(seal: ConsensusSeal) -> bytes:
    if isinstance(seal, PowSeal):
        return b"\x01" + u64(seal.pow_nonce) + u8(seal.difficulty_bits)
    return b"\x02" + seal.validator + seal.selection_seed


def seal_to_json(seal: ConsensusSeal) -> dict:
    if isinstance(seal, PowSeal):
        return {
            "type": "pow",
            "pow_nonce": seal.pow_nonce,
            "difficulty_bits": seal.difficulty_bits,
        }
    return {
        "type": "pos",
        "validator": to_hex(seal.validator),
        "selection_seed": to_hex(seal.selection_seed),
    }


def seal_from_json(obj: dict) -> ConsensusSeal:
    if obj["type"] == "pow":
        return PowSeal(pow_nonce=int(obj["pow_nonce"]), difficulty_bits=int(obj["difficulty_bits"]))
    if obj["type"] == "pos":
        return PosSeal(
            validator=from_hex(obj["validator"], ADDRESS_LEN),
            selection_seed=from_hex(obj["selection_seed"], HASH_LEN),
        )
    raise ValueError(f"unknown seal type {obj.get('type')!r}")


def meets_difficulty(digest: bytes, difficulty_bits: int) -> bool:
    """True iff the digest, read big-endian, has >= difficulty_bits leading zero bits."""
    if difficulty_bits == 0:
        return True
    return int.from_bytes(digest, "big") < (1 << (256 - difficulty_bits))


def mine_pow(
    header_prefix: bytes,
    header_suffix: bytes,
    difficulty_bits: int,
    max_nonce: int = MAX_POW_NONCE,
) -> tuple[int, bytes, int]:
    """Search nonces 0,1,2,... until sha256(prefix + u64(nonce) + suffix) qualifies.

    Returns (nonce, block_hash, attempts). Ascending order guarantees the
    smallest qualifying nonce and makes mining reproducible.
    """
    if not 0 <= difficulty_bits <= MAX_DIFFICULTY_BITS:
        raise ConsensusError(f"difficulty_bits out of range: {difficulty_bits}")
    bound = 1 << (256 - difficulty_bits)
    base = hashlib.sha256(header_prefix)
    nonce = 0
    while nonce <= max_nonce:
        hasher = base.copy()
        hasher.update(nonce.to_bytes(8, "big") + header_suffix)
        digest = hasher.digest()
        if int.from_bytes(digest, "big") < bound:
            return nonce, digest, nonce + 1
        nonce += 1
    raise NonceExhausted(f"no qualifying nonce below {max_nonce}")


def verify_pow(block) -> bool:
    """Recompute the block hash and check the seal's difficulty condition.

    Total: returns False on any failure, including a non-PoW seal.
    """
    seal = block.seal
    if not isinstance(seal, PowSeal):
        return False
    recomputed = sha256(block.header_bytes())
    if recomputed != block.block_hash:
        return False
    return meets_difficulty(recomputed, seal.difficulty_bits)


def select_validator(stake_table: Mapping[bytes, int], seed: bytes) -> bytes:
    """Stake-weighted deterministic pick.

    Draws r = seed (as a 256-bit big-endian integer) mod total_stake, then
    walks accounts in ascending address order accumulating stakes and
    returns the one whose cumulative interval contains r. Zero-stake
    accounts can never win.
    """
    total = sum(s for s in stake_table.values() if s > 0)
    if total <= 0:
        raise NoStakers("all stakes are zero")
    r = int.from_bytes(seed, "big") % total
    cumulative = 0
    for address in sorted(a for a, s in stake_table.items() if s > 0):
        cumulative += stake_table[address]
        if r < cumulative:
            return address
    raise AssertionError("unreachable: r < total by construction")


def reward_producer(accounts, producer: bytes, total_fees: int) -> None:
    """Credit the block's summed fees to the producer. Fees only, no subsidy."""
    if producer not in accounts:
        raise UnknownProducer(to_hex(producer))
    if total_fees < 0:
        raise ValueError("total_fees must be non-negative")
    accounts[producer].balance += total_fees


@dataclass(frozen=True)
class ConsensusConfig:
    mode: str = "pow"
    difficulty_bits: int = 12
    # PoW seals carry no producer identity, so fees in pow mode go to this
    # configured miner account; in pos mode they go to the selected validator.
    miner: bytes = b"\x00" * ADDRESS_LEN

    def __post_init__(self):
        if self.mode not in ("pow", "pos"):
            raise ValueError(f"unknown consensus mode {self.mode!r}")
        if not 0 <= self.difficulty_bits <= DESK_DIFFICULTY_CEILING:
            raise ValueError(
                f"difficulty_bits must be within [0, {DESK_DIFFICULTY_CEILING}]"
            )


class Engine:
    """Seals and verifies blocks for one consensus mode."""

    def __init__(self, config: ConsensusConfig):
        self.config = config

    @property
    def mode(self) -> str:
        return self.config.mode

    def genesis_seal(self) -> ConsensusSeal:
        if self.mode == "pow":
            return PowSeal(pow_nonce=0, difficulty_bits=0)
        return PosSeal(validator=b"\x00" * ADDRESS_LEN, selection_seed=b"\x00" * HASH_LEN)

    def pick_producer(self, parent_hash: bytes, stake_table: Mapping[bytes, int]) -> bytes:
        """Account that earns the next block's fees.

        Chosen before the block's transactions execute: PoS weighs stakes as
        of the parent state, seeded by the parent block hash; PoW seals carry
        no identity, so the configured miner collects.
        """
        if self.mode == "pow":
            return self.config.miner
        try:
            return select_validator(stake_table, parent_hash)
        except NoStakers as exc:
            raise SealFailure(str(exc)) from exc

    def seal(
        self,
        header_prefix: bytes,
        header_suffix: bytes,
        producer: bytes,
        parent_hash: bytes,
    ) -> tuple[ConsensusSeal, bytes, int]:
        """Produce (seal, block_hash, work_attempts) for a header.

        header_prefix is the canonical header encoding up to the seal;
        header_suffix is everything after it.
        """
        if self.mode == "pow":
            bits = self.config.difficulty_bits
            nonce, digest, attempts = mine_pow(
                header_prefix + b"\x01", u8(bits) + header_suffix, bits
            )
            return PowSeal(nonce, bits), digest, attempts
        seal = PosSeal(validator=producer, selection_seed=parent_hash)
        digest = sha256(header_prefix + seal_bytes(seal) + header_suffix)
        return seal, digest, 0

    def check_seal(
        self,
        block,
        parent_hash: bytes,
        stake_table: Mapping[bytes, int],
    ) -> str | None:
        """Return a violation description, or None if the seal verifies.

        Genesis (height 0) is the trust anchor; its seal carries the mode's
        variant but is not proof-checked.
        """
        seal = block.seal
        if self.mode == "pow":
            if not isinstance(seal, PowSeal):
                return "seal variant is not pow"
            if block.height == 0:
                return None
            if not meets_difficulty(block.block_hash, seal.difficulty_bits):
                return (
                    f"hash does not meet difficulty {seal.difficulty_bits}"
                )
            return None
        if not isinstance(seal, PosSeal):
            return "seal variant is not pos"
        if block.height == 0:
            return None
        if seal.selection_seed != parent_hash:
            return "selection seed is not the parent block hash"
        try:
            expected = select_validator(stake_table, seal.selection_seed)
        except NoStakers:
            return "no stakers in parent state"
        if seal.validator != expected:
            return "validator does not match stake-weighted selection"
        return None

    def producer_of(self, block) -> bytes:
        if self.mode == "pow":
            return self.config.miner
        return block.seal.validator
