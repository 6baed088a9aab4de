"""Round batching in the rollup style, plus shard partitioning.

A round's decisions execute entirely off-chain; only the lightweight
activity reports and one binding digest of them are committed on-chain
(three report calls plus one digest call per round, all landing in a
single block). Raw decisions never touch the chain.

Sharding partitions accounts by address: shard_of(address) = address as a
big-endian integer modulo the shard count. The throughput benchmark
executes disjoint-sender transactions per shard and merges the per-shard
states in ascending shard order; because senders (and the addresses their
creates occupy) are disjoint, the merged state is byte-identical to
sequential application.

    batch digest  sha256(b"RB1" + u32(count) + concatenated canonical
                  activity-report bytes, reports ordered by team)
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .chain import (
    Account,
    ContractCall,
    ContractCreate,
    Ledger,
    Receipt,
    State,
    Transaction,
    apply_transaction,
    make_transaction,
)
from .codec import ADDRESS_LEN, DetRng, sha256, u32, u64
from .contracts import REPORT_HANDLER_ID
from .records import ActivityReport, RoundDecision, encode_metrics, encode_report_args

ROLLUP_CALL_GAS_LIMIT = 100_000


class RollupError(Exception):
    pass


class MixedRounds(RollupError):
    pass


class DuplicateTeam(RollupError):
    pass


class ZeroShards(RollupError):
    pass


class CrossShardTx(RollupError):
    pass


class RollupCommitFailed(RollupError):
    """A committed batch produced a failure receipt (e.g. ImmutableOverwrite)."""

    def __init__(self, reason: str, receipts: list[Receipt]):
        super().__init__(reason)
        self.receipts = receipts


@dataclass(frozen=True)
class RollupBatch:
    round: int
    decisions: tuple[RoundDecision, ...]
    reports: tuple[ActivityReport, ...]
    batch_digest: bytes


def batch_digest(reports) -> bytes:
    return sha256(b"RB1" + u32(len(reports))
                  + b"".join(r.canonical_bytes() for r in reports))


def execute_batch_offchain(simulation_state, decisions) -> RollupBatch:
    """Run the response model for every team off-chain and digest the results.

    ``simulation_state`` supplies ``compute_for(decision) -> ActivityReport``;
    chain state is never touched. Reports are ordered by team so identical
    inputs always produce byte-identical batches.
    """
    decisions = tuple(decisions)
    if decisions:
        rounds = {d.round for d in decisions}
        if len(rounds) > 1:
            raise MixedRounds(f"decisions span rounds {sorted(rounds)}")
        teams = [d.team for d in decisions]
        if len(set(teams)) != len(teams):
            raise DuplicateTeam("more than one decision for the same team")
        round_no = decisions[0].round
    else:
        round_no = 0
    ordered = tuple(sorted(decisions, key=lambda d: d.team))
    reports = tuple(simulation_state.compute_for(decision) for decision in ordered)
    return RollupBatch(round=round_no, decisions=decisions, reports=reports,
                       batch_digest=batch_digest(reports))


def commit_rollup(ledger: Ledger, batch: RollupBatch, committer: bytes,
                  contract: bytes, gas_price: int | None = None) -> tuple[object, list[Receipt]]:
    """Put a batch on-chain: one commit_report call per team plus the digest.

    All calls land in one produced block. Returns (block, receipts); raises
    RollupCommitFailed if any call failed (the failing transactions stay in
    the chain with failure receipts — write-once storage cannot be retried).
    """
    sender = ledger.state.accounts.get(committer)
    if sender is None:
        raise RollupError("committer account does not exist")
    nonce = sender.nonce
    txs: list[Transaction] = []
    for report in batch.reports:
        args = encode_report_args(report.team, report.round, report.metric_pairs())
        kwargs = {} if gas_price is None else {"gas_price": gas_price}
        txs.append(make_transaction(committer, nonce, ContractCall(contract, "commit_report", args),
                                    ROLLUP_CALL_GAS_LIMIT, **kwargs))
        nonce += 1
    digest_args = u64(batch.round) + batch.batch_digest
    kwargs = {} if gas_price is None else {"gas_price": gas_price}
    txs.append(make_transaction(committer, nonce, ContractCall(contract, "commit_digest", digest_args),
                                ROLLUP_CALL_GAS_LIMIT, **kwargs))
    for tx in txs:
        ledger.submit(tx)
    block = ledger.produce_block()
    receipts = [ledger.receipt_of(tx.tx_id)[1] for tx in txs]
    failed = [r for r in receipts if not r.ok]
    if failed:
        raise RollupCommitFailed(failed[0].reason or "contract failure", receipts)
    return block, receipts


def shard_of(address: bytes, shard_count: int) -> int:
    """Deterministic shard assignment: address (big-endian) mod shard_count."""
    if shard_count < 1:
        raise ZeroShards(f"shard_count must be >= 1, got {shard_count}")
    return int.from_bytes(address, "big") % shard_count


@dataclass(frozen=True)
class ShardBenchResult:
    shard_count: int
    tx_count: int
    elapsed_ms: float
    tps: float
    state_digest: bytes
    occupancy: tuple[int, ...]


def build_shard_workload(tx_count: int, seed: int = 0) -> tuple[State, list[Transaction]]:
    """Deterministic disjoint-sender workload: one contract-create per sender.

    Senders are drawn from a seeded generator, so occupancy counts and the
    final state digest are reproducible for a fixed (tx_count, seed).
    """
    rng = DetRng(b"SH1" + u64(seed))
    state = State()
    txs: list[Transaction] = []
    empty_metrics = encode_metrics([])
    while len(txs) < tx_count:
        sender = rng.bytes(ADDRESS_LEN)
        if sender in state.accounts:
            continue
        state.accounts[sender] = Account(address=sender, balance=10**12)
        txs.append(make_transaction(sender, 0,
                                    ContractCreate(REPORT_HANDLER_ID, empty_metrics),
                                    gas_limit=50_000))
    return state, txs


def sharded_throughput_bench(tx_count: int, shard_count: int, seed: int = 0) -> ShardBenchResult:
    """Apply a disjoint-sender workload shard-by-shard and measure throughput.

    Each shard executes its senders' transactions against only its own slice
    of the accounts; the per-shard states are then merged in ascending shard
    order. Producer fee crediting is out of scope here (fees are simply
    deducted from senders), so shard executions never write the same key and
    the merge is an exact union. Contract calls whose target lives on a
    different shard than the sender are rejected (cross-shard messaging is
    out of scope); the creates used by this workload carry no target.
    """
    if shard_count < 1:
        raise ZeroShards(f"shard_count must be >= 1, got {shard_count}")
    base_state, txs = build_shard_workload(tx_count, seed)
    shards_txs: list[list[Transaction]] = [[] for _ in range(shard_count)]
    for tx in txs:
        shard = shard_of(tx.sender, shard_count)
        if isinstance(tx.kind, ContractCall) and shard_of(tx.kind.target, shard_count) != shard:
            raise CrossShardTx(
                f"tx from shard {shard} targets shard {shard_of(tx.kind.target, shard_count)}")
        shards_txs[shard].append(tx)

    shard_states: list[State] = []
    for shard in range(shard_count):
        shard_state = State(base_state.gas_schedule, base_state.registry)
        shard_state.accounts = {
            addr: acct.copy() for addr, acct in base_state.accounts.items()
            if shard_of(addr, shard_count) == shard
        }
        shard_states.append(shard_state)

    started = time.perf_counter()
    for shard in range(shard_count):
        shard_state = shard_states[shard]
        for tx in shards_txs[shard]:
            apply_transaction(shard_state, tx)
    elapsed = time.perf_counter() - started

    merged = State(base_state.gas_schedule, base_state.registry)
    for shard_state in shard_states:
        merged.accounts.update(shard_state.accounts)
        merged.contracts.update(shard_state.contracts)

    elapsed_ms = elapsed * 1000.0
    tps = tx_count / elapsed if elapsed > 0 else float("inf")
    return ShardBenchResult(
        shard_count=shard_count,
        tx_count=tx_count,
        elapsed_ms=elapsed_ms,
        tps=tps,
        state_digest=merged.digest(),
        occupancy=tuple(len(bucket) for bucket in shards_txs),
    )
