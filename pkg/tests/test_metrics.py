"""Cost modeling, finality tracking, and throughput benchmark tests.

Fee and normalized-gas golden values were derived independently with
decimal arithmetic and frozen below.
"""

from __future__ import annotations

import pytest

from chainclass.clock import SimClock
from chainclass.chain import Ledger
from chainclass.codec import fp_to_str, named_address
from chainclass.consensus import ConsensusConfig, Engine
from chainclass.metrics import (
    NORMALIZATION_DIVISOR_GAS,
    REFERENCE_TPS,
    STANDARD_ROUND_RECORD_GAS,
    MetricsError,
    MetricsLog,
    NegativeDuration,
    NetworkProfile,
    cost_report,
    default_profiles,
    tps_benchmark,
    tx_cost,
    write_costs_csv,
    write_finality_csv,
    write_shards_csv,
    write_tps_csv,
)
from chainclass.rollup import (
    RollupBatch,
    RollupCommitFailed,
    ShardBenchResult,
    batch_digest,
    commit_rollup,
)
from chainclass.simulation import Simulation, SimulationConfig, admin_address

ETHEREUM, POLKADOT, CARDANO = default_profiles()


def test_default_profiles_shape():
    assert ETHEREUM.name == "ethereum" and ETHEREUM.basis == "quoted"
    assert POLKADOT.name == "polkadot" and POLKADOT.basis == "predicted"
    assert CARDANO.name == "cardano" and CARDANO.basis == "predicted"
    assert ETHEREUM.gas_price_gwei == 15_8000  # 15.8000 Gwei
    assert (ETHEREUM.fee_num, ETHEREUM.fee_den) == (1, 1)
    assert (POLKADOT.fee_num, POLKADOT.fee_den) == (1, 3)
    assert ETHEREUM.fee_factor_str() == "1.0000"
    assert POLKADOT.fee_factor_str() == "0.3333"
    with pytest.raises(ValueError):
        NetworkProfile("bad", 1, 0, 1, "quoted")


def test_standard_round_record_costs_seventy_percent_normalized():
    quote = tx_cost(STANDARD_ROUND_RECORD_GAS, ETHEREUM)
    assert STANDARD_ROUND_RECORD_GAS == 70_000
    assert NORMALIZATION_DIVISOR_GAS == 100_000
    assert quote.normalized_gas == 7_000  # exactly 0.7000
    assert fp_to_str(quote.normalized_gas) == "0.7000"
    assert quote.fee_wei == 1_106_000_000_000_000  # 70,000 x 15.8 Gwei


def test_one_third_profiles_cost_one_third():
    quote = tx_cost(STANDARD_ROUND_RECORD_GAS, POLKADOT)
    assert fp_to_str(quote.normalized_gas) == "0.2333"  # 0.7 / 3 rounded
    assert quote.fee_wei == 368_666_666_666_667
    assert tx_cost(STANDARD_ROUND_RECORD_GAS, CARDANO) == quote


def test_report_commit_costs_are_exact_for_every_profile():
    eth = tx_cost(36_000, ETHEREUM)
    assert eth.normalized_gas == 3_600  # 0.3600
    assert eth.fee_wei == 568_800_000_000_000
    third = tx_cost(36_000, POLKADOT)
    assert third.normalized_gas == 1_200  # 0.1200, exactly a third
    assert third.fee_wei == 189_600_000_000_000
    assert eth.normalized_gas == 3 * third.normalized_gas
    assert eth.fee_wei == 3 * third.fee_wei


def test_tx_cost_rejects_negative_gas():
    with pytest.raises(MetricsError):
        tx_cost(-1, ETHEREUM)
    assert tx_cost(0, ETHEREUM).fee_wei == 0


def test_metrics_log_rejects_time_running_backwards():
    log = MetricsLog()
    sample = log.record_finality(1, 1_000, 3_500)
    assert sample.finality_ms == 2_500
    with pytest.raises(NegativeDuration):
        log.record_finality(2, 3_500, 3_400)
    assert [s.round for s in log.finality_samples()] == [1]
    # The returned list is a snapshot, not the internal store.
    log.finality_samples().append("junk")
    assert len(log.finality_samples()) == 1


def run_simulation(total_rounds: int = 3) -> Simulation:
    engine = Engine(ConsensusConfig(mode="pow", difficulty_bits=0,
                                    miner=named_address("miner")))
    sim = Simulation(SimulationConfig(total_rounds=total_rounds),
                     Ledger(engine, SimClock()))
    sim.run_scripted()
    return sim


def test_cost_report_averages_report_commits_per_round():
    sim = run_simulation(total_rounds=3)
    rows = cost_report(sim.ledger, default_profiles())
    assert len(rows) == 2 * 3  # two closed rounds x three profiles
    by_key = {(r.round, r.profile): r for r in rows}
    for round_no in (1, 2):
        eth = by_key[(round_no, "ethereum")]
        dot = by_key[(round_no, "polkadot")]
        ada = by_key[(round_no, "cardano")]
        assert eth.avg_normalized_gas == 3_600  # commit_report is 36,000 gas
        assert eth.avg_fee_wei == 568_800_000_000_000
        assert eth.avg_normalized_gas == 3 * dot.avg_normalized_gas
        assert eth.avg_fee_wei == 3 * dot.avg_fee_wei == 3 * ada.avg_fee_wei
        assert eth.basis == "quoted" and dot.basis == "predicted"


def test_cost_report_ignores_failed_commits():
    sim = run_simulation(total_rounds=3)
    baseline = cost_report(sim.ledger, default_profiles())
    # Re-committing round 1 mines a block of ImmutableOverwrite failures.
    round_one = next(s for s in sim.summaries if s.round == 1)
    batch = RollupBatch(round=1, decisions=(), reports=round_one.reports,
                        batch_digest=batch_digest(round_one.reports))
    with pytest.raises(RollupCommitFailed):
        commit_rollup(sim.ledger, batch, admin_address(), sim.contract_address)
    assert cost_report(sim.ledger, default_profiles()) == baseline


def test_tps_benchmark_counts_and_references():
    result = tps_benchmark(200, block_size=100)
    assert result.tx_count == 200
    assert result.block_count == 2
    assert result.tps > 0
    assert result.references == REFERENCE_TPS == {"bitcoin": 4.6, "visa": 1700.0}
    with pytest.raises(MetricsError):
        tps_benchmark(0)


def test_mining_difficulty_lowers_throughput():
    free = tps_benchmark(100, ConsensusConfig(
        mode="pow", difficulty_bits=0, miner=named_address("bench:miner")),
        block_size=20)
    costly = tps_benchmark(100, ConsensusConfig(
        mode="pow", difficulty_bits=12, miner=named_address("bench:miner")),
        block_size=20)
    assert costly.tps < free.tps


def test_csv_exports(tmp_path):
    log = MetricsLog()
    log.record_finality(1, 0, 700)
    log.record_finality(2, 1_000, 1_900)
    finality_path = str(tmp_path / "finality.csv")
    write_finality_csv(log.finality_samples(), finality_path)
    with open(finality_path, encoding="utf-8") as fh:
        assert fh.read().splitlines() == ["round,finality_ms", "1,700", "2,900"]

    sim = run_simulation(total_rounds=2)
    rows = cost_report(sim.ledger, default_profiles())
    costs_path = str(tmp_path / "costs.csv")
    write_costs_csv(rows, costs_path)
    with open(costs_path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "round,profile,avg_normalized_gas,avg_fee_wei"
    assert lines[1] == "1,ethereum,0.3600,568800000000000"
    assert lines[2] == "1,polkadot,0.1200,189600000000000"
    assert lines[3] == "1,cardano,0.1200,189600000000000"

    tps_path = str(tmp_path / "tps.csv")
    write_tps_csv(tps_benchmark(50, block_size=50), tps_path)
    with open(tps_path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "tx_count,elapsed_ms,tps,bitcoin_reference_tps,visa_reference_tps"
    assert lines[1].startswith("50,") and lines[1].endswith(",4.6,1700.0")

    shards_path = str(tmp_path / "shards.csv")
    write_shards_csv([ShardBenchResult(shard_count=1, tx_count=10, elapsed_ms=2.0,
                                       tps=5_000.0, state_digest=b"\x00" * 32,
                                       occupancy=(10,))], shards_path)
    with open(shards_path, encoding="utf-8") as fh:
        assert fh.read().splitlines() == ["shard_count,tx_count,elapsed_ms,tps",
                                          "1,10,2.000,5000.00"]
