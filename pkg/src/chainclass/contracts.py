"""Deterministic, gas-metered contract runtime with native handlers.

Contracts are instances of handlers registered at node start (there is no
bytecode): a handler is a Python object with ``init`` and ``call`` methods
operating through a metered storage context. Storage is write-once — a key,
once set, can never be overwritten — which is what makes committed activity
reports immutable.

Gas accrues per operation against a hard ``gas_limit``:

    contract call   tx_base            (default 21,000)
    contract create create_base        (default 32,000)
    storage write   storage_write_per_key per key (default 5,000)
    storage read    storage_read_per_key per key  (default 200)

A failing call or create rolls storage back to its exact pre-transaction
bytes and reports the gas accrued up to the failing operation; running out
of gas charges the full gas_limit.

Contract addresses derive from the creating transaction: the last 20 bytes
of sha256(b"CA1" + creator_address + u64(creator_nonce)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import lp, lps, sha256, u32, u64
from . import records

REPORT_HANDLER_ID = "report_v1"

# Storage key prefixes used by the report contract.
BENCHMARK_PREFIX = b"B"
REPORT_PREFIX = b"R"
DIGEST_PREFIX = b"D"


@dataclass
class GasSchedule:
    tx_base: int = 21_000
    storage_write_per_key: int = 5_000
    storage_read_per_key: int = 200
    create_base: int = 32_000

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value <= 0:
                raise ValueError(f"gas schedule entry {name} must be > 0")

    def as_dict(self) -> dict[str, int]:
        return {
            "tx_base": self.tx_base,
            "storage_write_per_key": self.storage_write_per_key,
            "storage_read_per_key": self.storage_read_per_key,
            "create_base": self.create_base,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GasSchedule":
        return cls(**{k: int(v) for k, v in obj.items()})


@dataclass
class Contract:
    address: bytes
    handler_id: str
    storage: dict[bytes, bytes] = field(default_factory=dict)

    def copy(self) -> "Contract":
        return Contract(self.address, self.handler_id, dict(self.storage))


class ContractFailure(Exception):
    """A contract-level failure: charged to the sender, recorded in a receipt.

    ``code`` is the stable failure discriminator (e.g. "ImmutableOverwrite");
    ``gas_used`` is what the failed transaction consumed.
    """

    def __init__(self, code: str, detail: str, gas_used: int):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
        self.gas_used = gas_used


def failure(code: str, detail: str, gas_used: int) -> ContractFailure:
    return ContractFailure(code, detail, gas_used)


def derive_contract_address(creator: bytes, nonce: int) -> bytes:
    """Last 20 bytes of sha256(b"CA1" + creator + u64(nonce))."""
    return sha256(b"CA1" + creator + u64(nonce))[-20:]


class StorageContext:
    """Metered, staged view over a contract's storage.

    Writes go to a stage and only commit if the whole call succeeds within
    its gas limit; reads see the stage first, then the committed base.
    Every key is write-once across both layers.
    """

    def __init__(self, base: dict[bytes, bytes], gas_limit: int, schedule: GasSchedule, initial_gas: int):
        self._base = base
        self._stage: dict[bytes, bytes] = {}
        self._schedule = schedule
        self._limit = gas_limit
        self.gas_used = 0
        self.charge(initial_gas)

    def charge(self, amount: int) -> None:
        if self.gas_used + amount > self._limit:
            raise failure("OutOfGas", f"needs more than the {self._limit} gas limit", self._limit)
        self.gas_used += amount

    def read(self, key: bytes) -> bytes | None:
        self.charge(self._schedule.storage_read_per_key)
        if key in self._stage:
            return self._stage[key]
        return self._base.get(key)

    def write(self, key: bytes, value: bytes) -> None:
        if key in self._stage or key in self._base:
            raise failure(
                "ImmutableOverwrite",
                f"storage key 0x{key.hex()} is already written",
                self.gas_used,
            )
        self.charge(self._schedule.storage_write_per_key)
        self._stage[key] = value

    def commit(self) -> None:
        self._base.update(self._stage)

    def fail(self, code: str, detail: str) -> ContractFailure:
        return failure(code, detail, self.gas_used)


class ReportHandler:
    """The activity-report contract.

    init_payload carries the benchmark metrics (admin-entered baseline data)
    and writes one ``B`` + lp(metric) key per metric. Methods:

    - commit_report(team, round, metrics): one ``R`` + lp(team) + u64(round)
      + lp(metric) key per metric, each holding the fixed-point value as
      u64 big-endian. Write-once storage makes every report immutable.
    - get_report(team, round): reads the metric keys back; fails with
      ReportMissing if the round was never committed.
    - commit_digest(round, digest32): one ``D`` + u64(round) key binding the
      round's batch digest.
    """

    def init(self, ctx: StorageContext, init_payload: bytes) -> bytes:
        try:
            benchmarks = records.decode_metrics(init_payload)
        except ValueError as exc:
            raise ctx.fail("BadCallData", f"malformed benchmark payload: {exc}")
        for name, value in benchmarks:
            ctx.write(BENCHMARK_PREFIX + lps(name), u64(value))
        return b""

    def call(self, ctx: StorageContext, method: str, args: bytes) -> bytes:
        if method == "commit_report":
            return self._commit_report(ctx, args)
        if method == "get_report":
            return self._get_report(ctx, args)
        if method == "commit_digest":
            return self._commit_digest(ctx, args)
        raise ctx.fail("UnknownMethod", f"report_v1 has no method {method!r}")

    @staticmethod
    def report_key(team: str, round_no: int, metric: str) -> bytes:
        return REPORT_PREFIX + lps(team) + u64(round_no) + lps(metric)

    @staticmethod
    def digest_key(round_no: int) -> bytes:
        return DIGEST_PREFIX + u64(round_no)

    @staticmethod
    def benchmark_key(metric: str) -> bytes:
        return BENCHMARK_PREFIX + lps(metric)

    def _commit_report(self, ctx: StorageContext, args: bytes) -> bytes:
        try:
            team, round_no, metrics = records.decode_report_args(args)
        except ValueError as exc:
            raise ctx.fail("BadCallData", f"malformed commit_report args: {exc}")
        for name, value in metrics:
            ctx.write(self.report_key(team, round_no, name), u64(value))
        return b""

    def _get_report(self, ctx: StorageContext, args: bytes) -> bytes:
        try:
            team, round_no = records.decode_report_query(args)
        except ValueError as exc:
            raise ctx.fail("BadCallData", f"malformed get_report args: {exc}")
        metrics: list[tuple[str, int]] = []
        for name in records.METRICS:
            raw = ctx.read(self.report_key(team, round_no, name))
            if raw is None:
                raise ctx.fail("ReportMissing", f"no report for ({team!r}, round {round_no})")
            metrics.append((name, int.from_bytes(raw, "big")))
        return records.encode_metrics(metrics)

    def _commit_digest(self, ctx: StorageContext, args: bytes) -> bytes:
        if len(args) != 8 + 32:
            raise ctx.fail("BadCallData", "commit_digest args must be u64(round) + digest32")
        round_no = int.from_bytes(args[:8], "big")
        ctx.write(self.digest_key(round_no), args[8:])
        return b""


class HandlerRegistry:
    """Fixed mapping handler_id -> handler object, set up at node start."""

    def __init__(self):
        self._handlers: dict[str, object] = {}

    def register(self, handler_id: str, handler) -> None:
        if handler_id in self._handlers:
            raise ValueError(f"handler {handler_id!r} already registered")
        self._handlers[handler_id] = handler

    def get(self, handler_id: str):
        return self._handlers.get(handler_id)

    def handler_ids(self) -> list[str]:
        return sorted(self._handlers)


def default_registry() -> HandlerRegistry:
    registry = HandlerRegistry()
    registry.register(REPORT_HANDLER_ID, ReportHandler())
    return registry


@dataclass(frozen=True)
class CreateOutcome:
    gas_used: int
    created_address: bytes
    output: bytes


@dataclass(frozen=True)
class CallOutcome:
    gas_used: int
    output: bytes


def deploy_contract(state, sender: bytes, nonce: int, handler_id: str,
                    init_payload: bytes, gas_limit: int) -> CreateOutcome:
    """Install a contract at the address derived from (sender, nonce).

    Charges create_base plus the init routine's storage operations. Fails
    with UnknownHandler, AddressCollision, or anything the handler raises;
    failures leave state untouched.
    """
    handler = state.registry.get(handler_id)
    if handler is None:
        raise failure("UnknownHandler", f"no handler registered as {handler_id!r}",
                      min(state.gas_schedule.create_base, gas_limit))
    address = derive_contract_address(sender, nonce)
    if address in state.contracts:
        raise failure("AddressCollision", f"contract already at 0x{address.hex()}",
                      min(state.gas_schedule.create_base, gas_limit))
    contract = Contract(address=address, handler_id=handler_id)
    ctx = StorageContext(contract.storage, gas_limit, state.gas_schedule,
                         initial_gas=state.gas_schedule.create_base)
    output = handler.init(ctx, init_payload)
    ctx.commit()
    state.contracts[address] = contract
    return CreateOutcome(gas_used=ctx.gas_used, created_address=address, output=output)


def call_contract(state, target: bytes, method: str, args: bytes, gas_limit: int) -> CallOutcome:
    """Dispatch a metered method call to the contract at ``target``.

    Charges tx_base plus per-access costs; a failure (unknown target or
    method, immutable overwrite, out of gas, bad call data) rolls storage
    back to its pre-call bytes.
    """
    contract = state.contracts.get(target)
    if contract is None:
        raise failure("UnknownContract", f"no contract at 0x{target.hex()}",
                      min(state.gas_schedule.tx_base, gas_limit))
    handler = state.registry.get(contract.handler_id)
    if handler is None:
        raise failure("UnknownHandler", f"handler {contract.handler_id!r} not registered",
                      min(state.gas_schedule.tx_base, gas_limit))
    ctx = StorageContext(contract.storage, gas_limit, state.gas_schedule,
                         initial_gas=state.gas_schedule.tx_base)
    output = handler.call(ctx, method, args)
    ctx.commit()
    return CallOutcome(gas_used=ctx.gas_used, output=output)
