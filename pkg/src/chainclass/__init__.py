"""Embedded mini-blockchain with a round-based marketing simulation on top.

The package is layered bottom-up:

- ``codec``      canonical byte encodings, fixed-point arithmetic, seeded RNG
- ``clock``      injected time sources (wall clock / deterministic sim clock)
- ``consensus``  PoW mining and PoS stake-weighted selection engines
- ``contracts``  gas-metered native-handler contract VM with write-once storage
- ``chain``      ledger, account state, mempool, block production, persistence
- ``records``    round decisions / activity reports and their encodings
- ``rollup``     off-chain round execution with on-chain report batching; shards
- ``simulation`` the 16-iteration marketing simulation protocol
- ``metrics``    finality series, per-network cost comparison, TPS benchmark
- ``service``    HTTP/JSON API with bearer-token principals
- ``cli``        serve / simulate / bench / verify commands
"""

from .chain import (
    Account,
    Block,
    ContractCall,
    ContractCreate,
    Ledger,
    Receipt,
    State,
    Transaction,
    apply_transaction,
    load,
    make_transaction,
    persist,
    verify_chain,
)
from .clock import SimClock, WallClock
from .codec import DetRng, named_address
from .config import AppConfig, Tokens, load_config
from .consensus import ConsensusConfig, Engine, PosSeal, PowSeal
from .contracts import Contract, GasSchedule, HandlerRegistry, default_registry
from .metrics import MetricsLog, NetworkProfile, cost_report, default_profiles, tx_cost
from .records import ActivityReport, DeviceSpec, RoundDecision
from .rollup import RollupBatch, commit_rollup, execute_batch_offchain, shard_of
from .simulation import Simulation, SimulationConfig, compute_report, scripted_agent_decide

__version__ = "0.1.0"

__all__ = [
    "Account",
    "ActivityReport",
    "AppConfig",
    "Block",
    "ConsensusConfig",
    "Contract",
    "ContractCall",
    "ContractCreate",
    "DetRng",
    "DeviceSpec",
    "Engine",
    "GasSchedule",
    "HandlerRegistry",
    "Ledger",
    "MetricsLog",
    "NetworkProfile",
    "PosSeal",
    "PowSeal",
    "Receipt",
    "RollupBatch",
    "RoundDecision",
    "SimClock",
    "Simulation",
    "SimulationConfig",
    "State",
    "Tokens",
    "Transaction",
    "WallClock",
    "apply_transaction",
    "commit_rollup",
    "compute_report",
    "cost_report",
    "default_profiles",
    "default_registry",
    "execute_batch_offchain",
    "load",
    "load_config",
    "make_transaction",
    "named_address",
    "persist",
    "scripted_agent_decide",
    "shard_of",
    "tx_cost",
    "verify_chain",
    "__version__",
]
