"""Command-line runner.

    chainclass serve    --port 8000 --config cfg.json --chain-file chain.jsonl
                        --consensus pow --difficulty 12 --profile ethereum
    chainclass simulate --rounds 16 --teams 3 --seed 42 --agents scripted
                        --export-dir out [--consensus pow --difficulty 12]
    chainclass bench    --mode tps|shards --txs 2000 --shards 4
                        --difficulty 0 --export-dir out
    chainclass verify   --chain-file chain.jsonl

``simulate`` runs the whole protocol headless on a virtual clock (mining
work advances simulated time), so identical seeds and configs produce
byte-identical chain files and CSV exports. ``serve`` runs on the wall
clock. ``verify`` exits 0 when the chain file replays cleanly, 1 otherwise.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

from . import chain as chain_mod
from .chain import CorruptRecord, IoFailure, Ledger, verify_chain
from .clock import SimClock
from .codec import named_address, to_hex
from .config import AppConfig, ConfigError, load_config
from .consensus import ConsensusConfig, Engine
from .metrics import (
    cost_report,
    tps_benchmark,
    write_costs_csv,
    write_finality_csv,
    write_shards_csv,
    write_tps_csv,
)
from .rollup import sharded_throughput_bench
from .simulation import Simulation, write_reports_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainclass",
        description="Embedded-blockchain marketing simulation: service, headless runs, benches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--config", help="JSON config file")
    serve.add_argument("--chain-file", help="persist blocks to this file")
    serve.add_argument("--consensus", choices=["pow", "pos"])
    serve.add_argument("--difficulty", type=int, help="PoW difficulty in leading zero bits")
    serve.add_argument("--profile", choices=["ethereum", "polkadot", "cardano"],
                       help="simulation cost profile")
    serve.add_argument("--static-dir", default="frontend/dist",
                       help="web client directory to mount at /")

    simulate = sub.add_parser("simulate", help="run the protocol headless with scripted agents")
    simulate.add_argument("--rounds", type=int, default=16,
                          help="total iterations including the setup iteration")
    simulate.add_argument("--teams", type=int, default=3)
    simulate.add_argument("--seed", type=int, default=42)
    simulate.add_argument("--agents", choices=["scripted"], default="scripted")
    simulate.add_argument("--export-dir", default="export")
    simulate.add_argument("--consensus", choices=["pow", "pos"], default="pow")
    simulate.add_argument("--difficulty", type=int, default=12)
    simulate.add_argument("--config", help="JSON config file (flags override it)")

    bench = sub.add_parser("bench", help="throughput benchmarks")
    bench.add_argument("--mode", choices=["tps", "shards"], required=True)
    bench.add_argument("--txs", type=int, default=2_000)
    bench.add_argument("--shards", type=int, default=4)
    bench.add_argument("--difficulty", type=int, default=0)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--export-dir", default="export")

    verify = sub.add_parser("verify", help="replay and check a chain file")
    verify.add_argument("--chain-file", required=True)

    return parser


def _load_app_config(path: str | None) -> AppConfig:
    if path is None:
        return AppConfig()
    return load_config(path)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_app_config(args.config)
    simulation_cfg = config.simulation
    if args.profile:
        simulation_cfg = dataclasses.replace(simulation_cfg, network_profile=args.profile)
    consensus = config.consensus
    if args.consensus or args.difficulty is not None:
        consensus = ConsensusConfig(
            mode=args.consensus or consensus.mode,
            difficulty_bits=args.difficulty if args.difficulty is not None
            else consensus.difficulty_bits,
            miner=consensus.miner,
        )
    config = dataclasses.replace(config, simulation=simulation_cfg, consensus=consensus,
                                 chain_file=args.chain_file or config.chain_file)
    app = create_app(config, static_dir=args.static_dir)
    print(f"tokens: instructor={config.tokens.instructor} "
          + " ".join(f"{team}={tok}" for team, tok in sorted(config.tokens.teams.items())))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_simulate(args) -> int:
    started = time.perf_counter()
    config = _load_app_config(args.config)
    sim_cfg = dataclasses.replace(config.simulation, team_count=args.teams,
                                  total_rounds=args.rounds, seed=args.seed)
    consensus = ConsensusConfig(mode=args.consensus, difficulty_bits=args.difficulty,
                                miner=config.consensus.miner)
    os.makedirs(args.export_dir, exist_ok=True)
    chain_path = os.path.join(args.export_dir, "chain.jsonl")
    clock = SimClock()
    virtual_start = clock.now_ms()
    ledger = Ledger(Engine(consensus), clock, gas_schedule=config.gas_schedule,
                    path=chain_path)
    simulation = Simulation(sim_cfg, ledger)
    simulation.init()
    summaries = simulation.run_scripted()

    samples = simulation.metrics.finality_samples()
    rows = cost_report(ledger, config.profiles)
    write_finality_csv(samples, os.path.join(args.export_dir, "finality.csv"))
    write_costs_csv(rows, os.path.join(args.export_dir, "costs.csv"))
    write_reports_csv(summaries, os.path.join(args.export_dir, "reports.csv"))

    elapsed = time.perf_counter() - started
    virtual_elapsed = (clock.now_ms() - virtual_start) / 1000.0
    report_count = sum(len(s.reports) for s in summaries)
    print(f"closed {len(summaries)} rounds with {report_count} on-chain reports "
          f"for {sim_cfg.team_count} teams")
    print(f"chain: {chain_path} height={ledger.height} head={to_hex(ledger.head.block_hash)}")
    print(f"finality samples: {len(samples)}; cost rows: {len(rows)}")
    print(f"elapsed: {elapsed:.2f}s wall, {virtual_elapsed:.2f}s simulated")
    return 0


def _cmd_bench(args) -> int:
    os.makedirs(args.export_dir, exist_ok=True)
    if args.mode == "tps":
        consensus = ConsensusConfig(mode="pow", difficulty_bits=args.difficulty,
                                    miner=named_address("bench:miner"))
        result = tps_benchmark(args.txs, consensus)
        write_tps_csv(result, os.path.join(args.export_dir, "tps.csv"))
        refs = ", ".join(f"{name} {value:g}" for name, value in result.references.items())
        print(f"{result.tx_count} txs in {result.elapsed_ms:.1f} ms -> {result.tps:.1f} tps "
              f"(reference: {refs})")
        return 0
    results = [sharded_throughput_bench(args.txs, 1, seed=args.seed)]
    if args.shards != 1:
        results.append(sharded_throughput_bench(args.txs, args.shards, seed=args.seed))
    write_shards_csv(results, os.path.join(args.export_dir, "shards.csv"))
    for result in results:
        print(f"shards={result.shard_count}: {result.tx_count} txs in "
              f"{result.elapsed_ms:.1f} ms -> {result.tps:.1f} tps; "
              f"occupancy={list(result.occupancy)}")
    digests = {r.state_digest for r in results}
    print(f"merged state digest {'identical' if len(digests) == 1 else 'MISMATCH'} "
          f"across shard counts: {to_hex(results[0].state_digest)}")
    return 0 if len(digests) == 1 else 1


def _cmd_verify(args) -> int:
    try:
        ledger = chain_mod.load(args.chain_file)
    except (CorruptRecord, IoFailure) as exc:
        print(f"corrupt chain file: {exc}")
        return 1
    violation = verify_chain(ledger)
    if violation is not None:
        print(f"violation: {violation}")
        return 1
    print(f"ok: {ledger.height + 1} blocks, head {to_hex(ledger.head.block_hash)}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
