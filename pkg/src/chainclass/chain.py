"""Append-only block ledger with account state, mempool, and persistence.

One process holds one chain; every block fully commits before it becomes
visible, and all mutation funnels through a single writer lock. There are
no forks: each block's parent is simply the previous head.

Canonical binary encodings (all integers big-endian):

    transaction  b"TX1" + sender(20) + u64(nonce) + kind + u64(gas_limit)
                 + u64(gas_price), where kind is
                 b"\\x01" + lps(handler_id) + lp(init_payload)  for creates
                 b"\\x02" + target(20) + lps(method) + lp(args) for calls
                 tx_id = sha256 of the above
    tx list      b"TL1" + u32(count) + concatenated tx_ids
    header       b"BH1" + u64(height) + parent_hash(32) + u64(timestamp_ms)
                 + tx_list_digest(32) + seal_bytes + state_digest(32)
                 block_hash = sha256 of the above
    state        b"ST1" + u32(n) + per account sorted by address:
                 address(20) + uv(balance) + u64(nonce) + uv(stake),
                 then u32(m) + per contract sorted by address:
                 address(20) + lps(handler_id) + u32(keys)
                 + per key sorted: lp(key) + lp(value)

The chain file is line-oriented JSON: each line holds {"record": ...,
"record_digest": sha256 of the record's canonical JSON bytes}. The first
record is genesis and additionally carries the starting allocation and the
chain config (consensus mode, miner, gas schedule) so that a file is
self-contained: loading replays every transaction from genesis and refuses
the file if any stored digest fails to reproduce.
"""

from __future__ import annotations

import json
import logging
import threading
from collections import deque
from dataclasses import dataclass, field

from .clock import WallClock
from .codec import (
    ADDRESS_LEN,
    HASH_LEN,
    from_hex,
    lp,
    lps,
    sha256,
    to_hex,
    u32,
    u64,
    uv,
)
from .consensus import (
    ConsensusConfig,
    Engine,
    reward_producer,
    seal_bytes,
    seal_from_json,
    seal_to_json,
)
from .contracts import (
    Contract,
    ContractFailure,
    GasSchedule,
    HandlerRegistry,
    call_contract,
    default_registry,
    deploy_contract,
)

log = logging.getLogger(__name__)

GENESIS_PARENT = b"\x00" * HASH_LEN
DEFAULT_GAS_PRICE_WEI = 10


class ChainError(Exception):
    pass


class TxValidationError(ChainError):
    """The transaction cannot enter a block at all; it is dropped uncharged."""


class UnknownSender(TxValidationError):
    pass


class BadNonce(TxValidationError):
    pass


class InsufficientBalance(TxValidationError):
    pass


class InvalidTransaction(ChainError):
    pass


class EmptyMempool(ChainError):
    pass


class GenesisError(ChainError):
    pass


class CorruptRecord(ChainError):
    def __init__(self, record_index: int, rule: str):
        super().__init__(f"record {record_index}: {rule}")
        self.record_index = record_index
        self.rule = rule


class IoFailure(ChainError):
    pass


@dataclass
class Account:
    address: bytes
    balance: int = 0
    nonce: int = 0
    stake: int = 0

    def copy(self) -> "Account":
        return Account(self.address, self.balance, self.nonce, self.stake)

    def to_json(self) -> dict:
        return {
            "address": to_hex(self.address),
            "balance": self.balance,
            "nonce": self.nonce,
            "stake": self.stake,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Account":
        return cls(
            address=from_hex(obj["address"], ADDRESS_LEN),
            balance=int(obj["balance"]),
            nonce=int(obj["nonce"]),
            stake=int(obj["stake"]),
        )


@dataclass(frozen=True)
class ContractCreate:
    handler_id: str
    init_payload: bytes


@dataclass(frozen=True)
class ContractCall:
    target: bytes
    method: str
    args: bytes


TxKind = ContractCreate | ContractCall


def tx_bytes(sender: bytes, nonce: int, kind: TxKind, gas_limit: int, gas_price: int) -> bytes:
    if isinstance(kind, ContractCreate):
        kind_bytes = b"\x01" + lps(kind.handler_id) + lp(kind.init_payload)
    else:
        kind_bytes = b"\x02" + kind.target + lps(kind.method) + lp(kind.args)
    return b"TX1" + sender + u64(nonce) + kind_bytes + u64(gas_limit) + u64(gas_price)


@dataclass(frozen=True)
class Transaction:
    sender: bytes
    nonce: int
    kind: TxKind
    gas_limit: int
    gas_price: int
    tx_id: bytes

    def canonical_bytes(self) -> bytes:
        return tx_bytes(self.sender, self.nonce, self.kind, self.gas_limit, self.gas_price)

    def to_json(self) -> dict:
        if isinstance(self.kind, ContractCreate):
            kind = {
                "type": "create",
                "handler_id": self.kind.handler_id,
                "init_payload": to_hex(self.kind.init_payload),
            }
        else:
            kind = {
                "type": "call",
                "target": to_hex(self.kind.target),
                "method": self.kind.method,
                "args": to_hex(self.kind.args),
            }
        return {
            "sender": to_hex(self.sender),
            "nonce": self.nonce,
            "kind": kind,
            "gas_limit": self.gas_limit,
            "gas_price": self.gas_price,
            "tx_id": to_hex(self.tx_id),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Transaction":
        kind_obj = obj["kind"]
        kind: TxKind
        if kind_obj["type"] == "create":
            kind = ContractCreate(
                handler_id=kind_obj["handler_id"],
                init_payload=from_hex(kind_obj["init_payload"]),
            )
        elif kind_obj["type"] == "call":
            kind = ContractCall(
                target=from_hex(kind_obj["target"], ADDRESS_LEN),
                method=kind_obj["method"],
                args=from_hex(kind_obj["args"]),
            )
        else:
            raise ValueError(f"unknown transaction kind {kind_obj.get('type')!r}")
        return cls(
            sender=from_hex(obj["sender"], ADDRESS_LEN),
            nonce=int(obj["nonce"]),
            kind=kind,
            gas_limit=int(obj["gas_limit"]),
            gas_price=int(obj["gas_price"]),
            tx_id=from_hex(obj["tx_id"], HASH_LEN),
        )


def make_transaction(sender: bytes, nonce: int, kind: TxKind,
                     gas_limit: int, gas_price: int = DEFAULT_GAS_PRICE_WEI) -> Transaction:
    """Build a transaction, computing tx_id from the canonical serialization."""
    if len(sender) != ADDRESS_LEN:
        raise InvalidTransaction("sender must be a 20-byte address")
    if gas_limit <= 0:
        raise InvalidTransaction("gas_limit must be > 0")
    if gas_price < 0 or nonce < 0:
        raise InvalidTransaction("gas_price and nonce must be >= 0")
    tx_id = sha256(tx_bytes(sender, nonce, kind, gas_limit, gas_price))
    return Transaction(sender=sender, nonce=nonce, kind=kind,
                       gas_limit=gas_limit, gas_price=gas_price, tx_id=tx_id)


@dataclass(frozen=True)
class Receipt:
    tx_id: bytes
    status: str  # "success" | "failure"
    gas_used: int
    reason: str | None = None
    created_address: bytes | None = None
    output: bytes = b""

    @property
    def ok(self) -> bool:
        return self.status == "success"

    @property
    def failure_code(self) -> str | None:
        if self.reason is None:
            return None
        return self.reason.split(":", 1)[0]

    def to_json(self) -> dict:
        return {
            "tx_id": to_hex(self.tx_id),
            "status": self.status,
            "gas_used": self.gas_used,
            "reason": self.reason,
            "created_address": to_hex(self.created_address) if self.created_address else None,
            "output": to_hex(self.output),
        }


def tx_list_digest(transactions) -> bytes:
    return sha256(b"TL1" + u32(len(transactions)) + b"".join(tx.tx_id for tx in transactions))


@dataclass(frozen=True)
class Block:
    height: int
    parent_hash: bytes
    timestamp: int
    transactions: tuple[Transaction, ...]
    seal: object
    state_digest: bytes
    block_hash: bytes

    def header_prefix(self) -> bytes:
        """Canonical header bytes up to (excluding) the seal."""
        return (b"BH1" + u64(self.height) + self.parent_hash + u64(self.timestamp)
                + tx_list_digest(self.transactions))

    def header_bytes(self) -> bytes:
        return self.header_prefix() + seal_bytes(self.seal) + self.state_digest

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "parent_hash": to_hex(self.parent_hash),
            "timestamp": self.timestamp,
            "transactions": [tx.to_json() for tx in self.transactions],
            "seal": seal_to_json(self.seal),
            "state_digest": to_hex(self.state_digest),
            "block_hash": to_hex(self.block_hash),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Block":
        return cls(
            height=int(obj["height"]),
            parent_hash=from_hex(obj["parent_hash"], HASH_LEN),
            timestamp=int(obj["timestamp"]),
            transactions=tuple(Transaction.from_json(t) for t in obj["transactions"]),
            seal=seal_from_json(obj["seal"]),
            state_digest=from_hex(obj["state_digest"], HASH_LEN),
            block_hash=from_hex(obj["block_hash"], HASH_LEN),
        )


def hash_block(header_prefix: bytes, seal, state_digest: bytes) -> bytes:
    """Digest of the canonical header serialization."""
    return sha256(header_prefix + seal_bytes(seal) + state_digest)


class State:
    """Accounts plus contracts, hashable into a canonical state digest."""

    def __init__(self, gas_schedule: GasSchedule | None = None,
                 registry: HandlerRegistry | None = None):
        self.accounts: dict[bytes, Account] = {}
        self.contracts: dict[bytes, Contract] = {}
        self.gas_schedule = gas_schedule or GasSchedule()
        self.registry = registry or default_registry()

    def copy(self) -> "State":
        twin = State(self.gas_schedule, self.registry)
        twin.accounts = {addr: acct.copy() for addr, acct in self.accounts.items()}
        twin.contracts = {addr: c.copy() for addr, c in self.contracts.items()}
        return twin

    def canonical_bytes(self) -> bytes:
        out = [b"ST1", u32(len(self.accounts))]
        for address in sorted(self.accounts):
            acct = self.accounts[address]
            out.append(address + uv(acct.balance) + u64(acct.nonce) + uv(acct.stake))
        out.append(u32(len(self.contracts)))
        for address in sorted(self.contracts):
            contract = self.contracts[address]
            out.append(address + lps(contract.handler_id) + u32(len(contract.storage)))
            for key in sorted(contract.storage):
                out.append(lp(key) + lp(contract.storage[key]))
        return b"".join(out)

    def digest(self) -> bytes:
        return sha256(self.canonical_bytes())

    def stake_table(self) -> dict[bytes, int]:
        return {a.address: a.stake for a in self.accounts.values() if a.stake > 0}


def apply_transaction(state: State, tx: Transaction) -> Receipt:
    """Validate, execute, and charge one transaction against ``state``.

    Validation failures (unknown sender, wrong nonce, balance below the
    gas_limit ceiling) raise and leave state untouched — such transactions
    never enter a block. Contract-level failures are *included* outcomes:
    the nonce bumps, the consumed gas is charged, and a failure receipt is
    returned.
    """
    account = state.accounts.get(tx.sender)
    if account is None:
        raise UnknownSender(f"sender {to_hex(tx.sender)} has no account")
    if tx.nonce != account.nonce:
        raise BadNonce(f"tx nonce {tx.nonce}, account nonce {account.nonce}")
    if account.balance < tx.gas_limit * tx.gas_price:
        raise InsufficientBalance(
            f"balance {account.balance} cannot cover gas_limit {tx.gas_limit}"
            f" at {tx.gas_price} wei/gas"
        )
    creation_nonce = account.nonce
    account.nonce += 1
    try:
        if isinstance(tx.kind, ContractCreate):
            created = deploy_contract(state, tx.sender, creation_nonce,
                                      tx.kind.handler_id, tx.kind.init_payload, tx.gas_limit)
            receipt = Receipt(tx_id=tx.tx_id, status="success", gas_used=created.gas_used,
                              created_address=created.created_address, output=created.output)
        else:
            result = call_contract(state, tx.kind.target, tx.kind.method,
                                   tx.kind.args, tx.gas_limit)
            receipt = Receipt(tx_id=tx.tx_id, status="success", gas_used=result.gas_used,
                              output=result.output)
    except ContractFailure as exc:
        receipt = Receipt(tx_id=tx.tx_id, status="failure", gas_used=exc.gas_used,
                          reason=f"{exc.code}: {exc.detail}")
    account.balance -= receipt.gas_used * tx.gas_price
    return receipt


@dataclass(frozen=True)
class Violation:
    height: int
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"block {self.height}: {self.rule}"
        return f"{text} ({self.detail})" if self.detail else text


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class Ledger:
    """The single-writer chain: blocks, committed state, mempool, receipts.

    All mutation (genesis creation, submission, block production) holds one
    reentrant lock; readers see fully committed snapshots only. When a path
    is configured, every committed block is appended to the chain file
    immediately.
    """

    def __init__(self, engine: Engine, clock=None,
                 gas_schedule: GasSchedule | None = None,
                 registry: HandlerRegistry | None = None,
                 path: str | None = None):
        self.engine = engine
        self.clock = clock if clock is not None else WallClock()
        self.blocks: list[Block] = []
        self.state = State(gas_schedule, registry)
        self.genesis_alloc: list[Account] = []
        self.receipts: dict[bytes, tuple[int, Receipt]] = {}
        self._mempool: deque[Transaction] = deque()
        self._path = path
        self._lock = threading.RLock()

    # ----- read side -------------------------------------------------

    @property
    def height(self) -> int:
        return len(self.blocks) - 1

    @property
    def head(self) -> Block:
        if not self.blocks:
            raise GenesisError("chain has no genesis block")
        return self.blocks[-1]

    def block_at(self, height: int) -> Block | None:
        if 0 <= height < len(self.blocks):
            return self.blocks[height]
        return None

    def receipt_of(self, tx_id: bytes) -> tuple[int, Receipt] | None:
        return self.receipts.get(tx_id)

    def mempool_size(self) -> int:
        return len(self._mempool)

    # ----- write side ------------------------------------------------

    def create_genesis(self, alloc: list[Account]) -> Block:
        """Seal height 0 from the starting allocation (no transactions).

        The configured PoW miner is added to the allocation automatically so
        fee crediting always has a destination account.
        """
        with self._lock:
            if self.blocks:
                raise GenesisError("genesis already exists")
            alloc = [a.copy() for a in alloc]
            if self.engine.mode == "pow":
                miner = self.engine.config.miner
                if all(a.address != miner for a in alloc):
                    alloc.append(Account(address=miner))
            seen: set[bytes] = set()
            for account in alloc:
                if account.address in seen:
                    raise GenesisError(f"duplicate allocation for {to_hex(account.address)}")
                seen.add(account.address)
                self.state.accounts[account.address] = account.copy()
            self.genesis_alloc = sorted(alloc, key=lambda a: a.address)
            timestamp = self.clock.now_ms()
            state_digest = self.state.digest()
            prefix = (b"BH1" + u64(0) + GENESIS_PARENT + u64(timestamp)
                      + tx_list_digest(()))
            seal = self.engine.genesis_seal()
            block_hash = hash_block(prefix, seal, state_digest)
            block = Block(height=0, parent_hash=GENESIS_PARENT, timestamp=timestamp,
                          transactions=(), seal=seal, state_digest=state_digest,
                          block_hash=block_hash)
            self.blocks.append(block)
            if self._path is not None:
                self._write_file(self._path, mode="w")
            return block

    def submit(self, tx: Transaction) -> None:
        """Queue a transaction; FIFO order is preserved into the next block."""
        if sha256(tx.canonical_bytes()) != tx.tx_id:
            raise InvalidTransaction("tx_id does not match canonical serialization")
        with self._lock:
            self._mempool.append(tx)

    def produce_block(self) -> Block:
        """Drain the mempool into the next sealed block.

        Transactions failing validation are dropped with a logged reason;
        contract-level failures are included with failure receipts. Fees are
        credited to the producer before the state digest is taken, so the
        digest covers the complete transition.
        """
        with self._lock:
            if not self.blocks:
                raise GenesisError("create genesis before producing blocks")
            if not self._mempool:
                raise EmptyMempool("mempool is empty")
            drained = list(self._mempool)
            self._mempool.clear()
            parent = self.head
            work = self.state.copy()
            included: list[Transaction] = []
            block_receipts: list[Receipt] = []
            for tx in drained:
                try:
                    receipt = apply_transaction(work, tx)
                except TxValidationError as exc:
                    log.warning("dropping tx %s: %s", to_hex(tx.tx_id), exc)
                    continue
                included.append(tx)
                block_receipts.append(receipt)
            if not included:
                raise EmptyMempool("no includable transactions after validation")
            total_fees = sum(r.gas_used * tx.gas_price
                             for r, tx in zip(block_receipts, included))
            producer = self.engine.pick_producer(parent.block_hash, self.state.stake_table())
            reward_producer(work.accounts, producer, total_fees)
            timestamp = self.clock.now_ms()
            state_digest = work.digest()
            height = parent.height + 1
            prefix = (b"BH1" + u64(height) + parent.block_hash + u64(timestamp)
                      + tx_list_digest(included))
            seal, block_hash, attempts = self.engine.seal(
                prefix, state_digest, producer, parent.block_hash)
            self.clock.on_work(attempts)
            block = Block(height=height, parent_hash=parent.block_hash,
                          timestamp=timestamp, transactions=tuple(included),
                          seal=seal, state_digest=state_digest, block_hash=block_hash)
            self.blocks.append(block)
            self.state = work
            for receipt in block_receipts:
                self.receipts[receipt.tx_id] = (height, receipt)
            if self._path is not None:
                self._append_record(self._path, block)
            return block

    # ----- persistence -----------------------------------------------

    def chain_config_json(self) -> dict:
        return {
            "consensus": {
                "mode": self.engine.config.mode,
                "difficulty_bits": self.engine.config.difficulty_bits,
                "miner": to_hex(self.engine.config.miner),
            },
            "gas_schedule": self.state.gas_schedule.as_dict(),
        }

    def _record_json(self, block: Block) -> dict:
        record = block.to_json()
        if block.height == 0:
            record["alloc"] = [a.to_json() for a in self.genesis_alloc]
            record["chain_config"] = self.chain_config_json()
        return record

    def _record_line(self, block: Block) -> str:
        record = self._record_json(block)
        digest = sha256(_canonical_json(record).encode("utf-8"))
        return _canonical_json({"record": record, "record_digest": to_hex(digest)})

    def _append_record(self, path: str, block: Block) -> None:
        try:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(self._record_line(block) + "\n")
        except OSError as exc:
            raise IoFailure(str(exc)) from exc

    def _write_file(self, path: str, mode: str = "w") -> None:
        try:
            with open(path, mode, encoding="utf-8") as fh:
                for block in self.blocks:
                    fh.write(self._record_line(block) + "\n")
        except OSError as exc:
            raise IoFailure(str(exc)) from exc


def persist(ledger: Ledger, path: str) -> None:
    """Write the whole ledger to ``path``, one canonical record per line."""
    ledger._write_file(path, mode="w")


def verify_chain(ledger: Ledger) -> Violation | None:
    """Replay the ledger from genesis and check every stored commitment.

    Returns None when the chain verifies, else the first violation found:
    parent linkage, recomputed tx and block hashes, consensus seals, and
    every state digest reproduced by replaying the transactions.
    """
    if not ledger.blocks:
        return Violation(height=-1, rule="empty chain", detail="no genesis block")
    replay = State(ledger.state.gas_schedule, ledger.state.registry)
    for account in ledger.genesis_alloc:
        replay.accounts[account.address] = account.copy()
    parent: Block | None = None
    for block in ledger.blocks:
        expected_height = 0 if parent is None else parent.height + 1
        if block.height != expected_height:
            return Violation(block.height, "height", f"expected {expected_height}")
        expected_parent = GENESIS_PARENT if parent is None else parent.block_hash
        if block.parent_hash != expected_parent:
            return Violation(block.height, "parent_hash", "does not link to predecessor")
        for tx in block.transactions:
            if sha256(tx.canonical_bytes()) != tx.tx_id:
                return Violation(block.height, "tx_id", f"mismatch for {to_hex(tx.tx_id)}")
        if sha256(block.header_bytes()) != block.block_hash:
            return Violation(block.height, "block_hash", "header does not recompute")
        stake_table = replay.stake_table()
        seal_problem = ledger.engine.check_seal(
            block, GENESIS_PARENT if parent is None else parent.block_hash, stake_table)
        if seal_problem is not None:
            return Violation(block.height, "seal", seal_problem)
        if parent is not None:
            total_fees = 0
            for tx in block.transactions:
                try:
                    receipt = apply_transaction(replay, tx)
                except TxValidationError as exc:
                    return Violation(block.height, "replay", str(exc))
                total_fees += receipt.gas_used * tx.gas_price
            producer = ledger.engine.producer_of(block)
            if producer not in replay.accounts:
                return Violation(block.height, "replay", "producer account missing")
            reward_producer(replay.accounts, producer, total_fees)
        if replay.digest() != block.state_digest:
            return Violation(block.height, "state_digest", "replay does not reproduce digest")
        parent = block
    return None


def load(path: str, clock=None, registry: HandlerRegistry | None = None) -> Ledger:
    """Reconstruct a ledger from a chain file, replaying to rebuild state.

    Every record line must be byte-for-byte the canonical serialization of
    its content (so each stored record has exactly one accepted spelling),
    carry a matching record digest, and replay to the stored state digest;
    the first offender raises CorruptRecord with its record index.
    """
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    try:
        raw_lines = blob.decode("utf-8").split("\n")
    except UnicodeDecodeError as exc:
        raise CorruptRecord(blob[:exc.start].count(b"\n"),
                            "chain file is not valid UTF-8") from None
    if raw_lines[-1] != "":
        raise CorruptRecord(len(raw_lines) - 1, "record line is not newline-terminated")
    raw_lines.pop()

    blocks: list[Block] = []
    genesis_alloc: list[Account] = []
    chain_config: dict | None = None
    for index, line in enumerate(raw_lines):
        try:
            wrapper = json.loads(line)
        except ValueError as exc:
            raise CorruptRecord(index, f"unparseable record: {exc}") from None
        if _canonical_json(wrapper) != line:
            raise CorruptRecord(index, "record line is not in canonical form")
        try:
            record = wrapper["record"]
            stored_digest = from_hex(wrapper["record_digest"], HASH_LEN)
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptRecord(index, f"unparseable record: {exc}") from None
        recomputed = sha256(_canonical_json(record).encode("utf-8"))
        if recomputed != stored_digest:
            raise CorruptRecord(index, "record digest mismatch")
        try:
            block = Block.from_json(record)
            if block.height == 0:
                genesis_alloc = [Account.from_json(a) for a in record["alloc"]]
                chain_config = record["chain_config"]
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptRecord(index, f"malformed block record: {exc}") from None
        blocks.append(block)

    if clock is None:
        clock = WallClock()
    if not blocks:
        engine = Engine(ConsensusConfig())
        return Ledger(engine, clock, registry=registry)
    if chain_config is None:
        raise CorruptRecord(0, "first record is not a genesis record")

    consensus_obj = chain_config["consensus"]
    engine = Engine(ConsensusConfig(
        mode=consensus_obj["mode"],
        difficulty_bits=int(consensus_obj["difficulty_bits"]),
        miner=from_hex(consensus_obj["miner"], ADDRESS_LEN),
    ))
    gas_schedule = GasSchedule.from_dict(chain_config["gas_schedule"])
    ledger = Ledger(engine, clock, gas_schedule=gas_schedule, registry=registry, path=None)
    ledger.genesis_alloc = sorted((a.copy() for a in genesis_alloc), key=lambda a: a.address)
    ledger.blocks = blocks
    for account in ledger.genesis_alloc:
        ledger.state.accounts[account.address] = account.copy()

    # Replay forward, rebuilding state and receipts while checking every
    # stored commitment at the record where it fails.
    replay = ledger.state
    parent: Block | None = None
    for index, block in enumerate(blocks):
        expected_height = 0 if parent is None else parent.height + 1
        expected_parent = GENESIS_PARENT if parent is None else parent.block_hash
        if block.height != expected_height or block.parent_hash != expected_parent:
            raise CorruptRecord(index, "broken parent linkage")
        for tx in block.transactions:
            if sha256(tx.canonical_bytes()) != tx.tx_id:
                raise CorruptRecord(index, "transaction id mismatch")
        if sha256(block.header_bytes()) != block.block_hash:
            raise CorruptRecord(index, "block hash mismatch")
        stake_table = replay.stake_table()
        seal_problem = engine.check_seal(block, expected_parent, stake_table)
        if seal_problem is not None:
            raise CorruptRecord(index, f"seal: {seal_problem}")
        if parent is not None:
            total_fees = 0
            for tx in block.transactions:
                try:
                    receipt = apply_transaction(replay, tx)
                except TxValidationError as exc:
                    raise CorruptRecord(index, f"replay: {exc}") from None
                ledger.receipts[tx.tx_id] = (block.height, receipt)
                total_fees += receipt.gas_used * tx.gas_price
            producer = engine.producer_of(block)
            if producer not in replay.accounts:
                raise CorruptRecord(index, "producer account missing")
            reward_producer(replay.accounts, producer, total_fees)
        if replay.digest() != block.state_digest:
            raise CorruptRecord(index, "state digest mismatch")
        parent = block
    return ledger
