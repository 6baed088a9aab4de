"""Finality timing, per-network transaction-cost accounting, and TPS context.

Costs are modeled per target network profile. Ethereum carries the quoted
gas price of 15.80 Gwei; the Polkadot and Cardano profiles are predictions
at one third of Ethereum's fee level, expressed as exact rationals so cost
ratios stay exact under fixed-point output:

    fee_wei        = gas × gas_price_gwei × 10^9 × fee_factor
    normalized_gas = gas × fee_factor / 100,000

The divisor 100,000 calibrates the dimensionless "normalized gas" scale so
a standard 70,000-gas round record under the Ethereum profile reads 0.7000.
Per-round averages in the cost table cover the round's successful report
commits (the record-keeping transactions themselves, one per team).

Time to finality is depth-1: the span from submission of a round's rollup
transactions to their inclusion in a sealed block. With no forks, one block
is final.
"""

from __future__ import annotations

import csv
import threading
import time
from dataclasses import dataclass

from .chain import Account, ContractCall, ContractCreate, Ledger, make_transaction
from .clock import SimClock
from .codec import FP_SCALE, div_round_half_up, fp_to_str, named_address
from .consensus import ConsensusConfig, Engine
from .contracts import REPORT_HANDLER_ID
from .records import decode_report_args, encode_metrics

NORMALIZATION_DIVISOR_GAS = 100_000
STANDARD_ROUND_RECORD_GAS = 70_000
REFERENCE_TPS = {"bitcoin": 4.6, "visa": 1700.0}
GWEI_WEI = 10**9


class MetricsError(Exception):
    pass


class NegativeDuration(MetricsError):
    pass


@dataclass(frozen=True)
class NetworkProfile:
    name: str
    gas_price_gwei: int  # fixed-point scale 10^4
    fee_num: int  # fee factor numerator (exact rational vs ethereum)
    fee_den: int
    basis: str  # "quoted" | "predicted"

    def __post_init__(self):
        if self.fee_num <= 0 or self.fee_den <= 0:
            raise ValueError("fee factor must be > 0")

    def fee_factor_str(self) -> str:
        return fp_to_str(div_round_half_up(self.fee_num * FP_SCALE, self.fee_den))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "gas_price_gwei": fp_to_str(self.gas_price_gwei),
            "fee_factor": self.fee_factor_str(),
            "basis": self.basis,
        }


def default_profiles() -> tuple[NetworkProfile, ...]:
    quoted_price = 15_8000  # 15.8000 Gwei, fixed-point scale 10^4
    return (
        NetworkProfile("ethereum", quoted_price, 1, 1, "quoted"),
        NetworkProfile("polkadot", quoted_price, 1, 3, "predicted"),
        NetworkProfile("cardano", quoted_price, 1, 3, "predicted"),
    )


@dataclass(frozen=True)
class CostQuote:
    fee_wei: int
    normalized_gas: int  # fixed-point scale 10^4


def tx_cost(gas_used: int, profile: NetworkProfile) -> CostQuote:
    """Cost of ``gas_used`` gas under a network profile.

    Exact integer arithmetic with one round-half-up at the end of each
    quantity; for the default profiles and round-record gas amounts both
    results are exact.
    """
    if gas_used < 0:
        raise MetricsError("gas_used must be >= 0")
    fee_wei = div_round_half_up(
        gas_used * profile.gas_price_gwei * GWEI_WEI * profile.fee_num,
        FP_SCALE * profile.fee_den,
    )
    normalized = div_round_half_up(
        gas_used * profile.fee_num * FP_SCALE,
        profile.fee_den * NORMALIZATION_DIVISOR_GAS,
    )
    return CostQuote(fee_wei=fee_wei, normalized_gas=normalized)


@dataclass(frozen=True)
class FinalitySample:
    round: int
    submitted_at: int
    finalized_at: int

    @property
    def finality_ms(self) -> int:
        return self.finalized_at - self.submitted_at

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "submitted_at": self.submitted_at,
            "finalized_at": self.finalized_at,
            "finality_ms": self.finality_ms,
        }


class MetricsLog:
    """Append-only store of finality samples, safe behind the round writer."""

    def __init__(self):
        self._samples: list[FinalitySample] = []
        self._lock = threading.Lock()

    def record_finality(self, round_no: int, submitted_at: int, finalized_at: int) -> FinalitySample:
        if finalized_at < submitted_at:
            raise NegativeDuration(
                f"finalized_at {finalized_at} precedes submitted_at {submitted_at}")
        sample = FinalitySample(round=round_no, submitted_at=submitted_at,
                                finalized_at=finalized_at)
        with self._lock:
            self._samples.append(sample)
        return sample

    def finality_samples(self) -> list[FinalitySample]:
        with self._lock:
            return list(self._samples)


@dataclass(frozen=True)
class CostRow:
    round: int
    profile: str
    basis: str
    avg_normalized_gas: int  # fixed-point scale 10^4
    avg_fee_wei: int

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "profile": self.profile,
            "basis": self.basis,
            "avg_normalized_gas": fp_to_str(self.avg_normalized_gas),
            "avg_fee_wei": str(self.avg_fee_wei),
        }


def cost_report(ledger: Ledger, profiles) -> list[CostRow]:
    """Per-round, per-profile average cost of the committed report records.

    Scans the chain for successful commit_report calls (a round's record
    transactions, one per team), groups their gas by the round encoded in
    the call, and averages each profile's cost with round-half-up.
    """
    gas_by_round: dict[int, list[int]] = {}
    for block in ledger.blocks:
        for tx in block.transactions:
            if not isinstance(tx.kind, ContractCall) or tx.kind.method != "commit_report":
                continue
            located = ledger.receipt_of(tx.tx_id)
            if located is None or not located[1].ok:
                continue
            try:
                _, round_no, _ = decode_report_args(tx.kind.args)
            except ValueError:
                continue
            gas_by_round.setdefault(round_no, []).append(located[1].gas_used)

    rows: list[CostRow] = []
    for round_no in sorted(gas_by_round):
        gas_list = gas_by_round[round_no]
        for profile in profiles:
            quotes = [tx_cost(gas, profile) for gas in gas_list]
            rows.append(CostRow(
                round=round_no,
                profile=profile.name,
                basis=profile.basis,
                avg_normalized_gas=div_round_half_up(
                    sum(q.normalized_gas for q in quotes), len(quotes)),
                avg_fee_wei=div_round_half_up(
                    sum(q.fee_wei for q in quotes), len(quotes)),
            ))
    return rows


@dataclass(frozen=True)
class TpsResult:
    tx_count: int
    block_count: int
    elapsed_ms: float
    tps: float
    references: dict[str, float]

    def to_json(self) -> dict:
        return {
            "tx_count": self.tx_count,
            "block_count": self.block_count,
            "elapsed_ms": round(self.elapsed_ms, 3),
            "tps": round(self.tps, 2),
            "references": dict(self.references),
        }


def tps_benchmark(tx_count: int, consensus: ConsensusConfig | None = None,
                  block_size: int = 500) -> TpsResult:
    """Measure block-production throughput in transactions per wall second.

    Builds a fresh single-sender chain, fills blocks of ``block_size``
    contract-creates, and times the production loop; the result always
    carries the Bitcoin (4.6) and Visa (1,700) reference constants.
    """
    if tx_count < 1:
        raise MetricsError("tx_count must be >= 1")
    if consensus is None:
        consensus = ConsensusConfig(mode="pow", difficulty_bits=0,
                                    miner=named_address("bench:miner"))
    engine = Engine(consensus)
    ledger = Ledger(engine, SimClock())
    sender = named_address("bench:sender")
    ledger.create_genesis([Account(address=sender, balance=10**18)])
    payload = encode_metrics([])
    txs = [make_transaction(sender, nonce, ContractCreate(REPORT_HANDLER_ID, payload),
                            gas_limit=50_000)
           for nonce in range(tx_count)]
    started = time.perf_counter()
    block_count = 0
    for offset in range(0, tx_count, block_size):
        for tx in txs[offset:offset + block_size]:
            ledger.submit(tx)
        ledger.produce_block()
        block_count += 1
    elapsed = time.perf_counter() - started
    tps = tx_count / elapsed if elapsed > 0 else float("inf")
    return TpsResult(tx_count=tx_count, block_count=block_count,
                     elapsed_ms=elapsed * 1000.0, tps=tps,
                     references=dict(REFERENCE_TPS))


# ----- CSV exports ----------------------------------------------------


def write_finality_csv(samples, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "finality_ms"])
        for sample in samples:
            writer.writerow([sample.round, sample.finality_ms])


def write_costs_csv(rows, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "profile", "avg_normalized_gas", "avg_fee_wei"])
        for row in rows:
            writer.writerow([row.round, row.profile,
                             fp_to_str(row.avg_normalized_gas), row.avg_fee_wei])


def write_tps_csv(result: TpsResult, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tx_count", "elapsed_ms", "tps",
                         "bitcoin_reference_tps", "visa_reference_tps"])
        writer.writerow([result.tx_count, f"{result.elapsed_ms:.3f}", f"{result.tps:.2f}",
                         result.references["bitcoin"], result.references["visa"]])


def write_shards_csv(results, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["shard_count", "tx_count", "elapsed_ms", "tps"])
        for result in results:
            writer.writerow([result.shard_count, result.tx_count,
                             f"{result.elapsed_ms:.3f}", f"{result.tps:.2f}"])
