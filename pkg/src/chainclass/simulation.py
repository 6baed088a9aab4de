"""Round-based digital-marketing simulation over the embedded chain.

The protocol runs a configurable number of iterations (default 16).
Iteration 0 is instructional setup: the admin's benchmark data is loaded
on-chain by deploying the report contract, and every team starts from the
same benchmark baseline. Iterations 1 through 15 are play rounds: each team
submits one budget/device/keyword decision, the round closes by executing
all decisions off-chain, and only the resulting activity reports plus a
batch digest are committed on-chain.

Response model (all arithmetic fixed-point scale 10^4, round-half-up,
applied left to right exactly as written):

    new_m = prev_m + benchmark_m × (Σ_p eff(m, p) × budget_p / round_budget)
                      × fit × (1 + kb)

with fit = 1.2 when the chosen device's target market equals the round's
demand tag (derived from sha256(b"DM1" + u64(seed) + u64(round)) over the
catalog's sorted markets) and 1.0 otherwise, and kb = 0.1 when the decision
shares a keyword with the chosen device's target keywords, else 0. The
effectiveness table is a fixed model constant:

    likes           social 1.0   video 0.5   search 0.1   display 0.2
    post_engagement social 0.8   video 0.8   search 0.2   display 0.2
    page_views      search 1.0   display 0.6 social 0.3   video 0.3

Every metric can only grow, so reports are non-decreasing round over round.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .chain import Account, ContractCreate, Ledger, make_transaction
from .codec import (
    DetRng,
    fp_from_str,
    fp_mul,
    fp_to_str,
    div_round_half_up,
    FP_SCALE,
    lps,
    named_address,
    sha256,
    to_hex,
    u64,
)
from .contracts import REPORT_HANDLER_ID, ReportHandler
from .metrics import MetricsLog
from .records import (
    METRICS,
    PLATFORMS,
    ActivityReport,
    DeviceSpec,
    RoundDecision,
    encode_metrics,
)
from .rollup import commit_rollup, execute_batch_offchain

EFFECTIVENESS: dict[str, dict[str, int]] = {
    "likes": {"social": 10000, "video": 5000, "search": 1000, "display": 2000},
    "post_engagement": {"social": 8000, "video": 8000, "search": 2000, "display": 2000},
    "page_views": {"search": 10000, "display": 6000, "social": 3000, "video": 3000},
}

FIT_MATCH = 12000  # 1.2: device targets the round's demand segment
FIT_OTHER = 10000  # 1.0
KEYWORD_HIT = 11000  # 1 + 0.1 keyword-strategy bonus
KEYWORD_MISS = 10000

DEFAULT_BENCHMARKS = {
    "likes": 100_0000,  # 100.0000
    "post_engagement": 80_0000,  # 80.0000
    "page_views": 150_0000,  # 150.0000
}

DEFAULT_DEVICES = (
    DeviceSpec("dev-basic", "low", "budget", frozenset({"value", "battery", "cheap"})),
    DeviceSpec("dev-core", "mid", "mainstream", frozenset({"camera", "social", "music"})),
    DeviceSpec("dev-prime", "high", "premium", frozenset({"performance", "design", "pro"})),
)

TEAM_START_BALANCE_WEI = 10**18
TEAM_START_STAKE = 1_000
DEPLOY_GAS_LIMIT = 80_000


class SimulationError(Exception):
    pass


class AlreadyInitialized(SimulationError):
    pass


class NotInitialized(SimulationError):
    pass


class SimulationComplete(SimulationError):
    pass


class WrongRound(SimulationError):
    pass


class UnknownTeam(SimulationError):
    pass


class UnknownDevice(SimulationError):
    pass


class DuplicateDecision(SimulationError):
    pass


class BudgetMismatch(SimulationError):
    pass


class MissingDecisions(SimulationError):
    def __init__(self, teams: list[str]):
        super().__init__(f"teams yet to submit: {', '.join(teams)}")
        self.teams = teams


@dataclass(frozen=True)
class SimulationConfig:
    team_count: int = 3
    total_rounds: int = 16  # iteration 0 is setup; 1..total_rounds-1 are play
    round_budget: int = 10_000_0000  # 10,000.0000 fixed-point currency
    seed: int = 42
    benchmarks: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_BENCHMARKS))
    device_catalog: tuple[DeviceSpec, ...] = DEFAULT_DEVICES
    network_profile: str = "ethereum"

    def __post_init__(self):
        if self.team_count < 1:
            raise ValueError("team_count must be >= 1")
        if self.total_rounds < 2:
            raise ValueError("total_rounds must be >= 2 (setup plus at least one play round)")
        if self.round_budget <= 0:
            raise ValueError("round_budget must be > 0")
        if set(self.benchmarks) != set(METRICS):
            raise ValueError(f"benchmarks must cover exactly the metrics {METRICS}")
        if any(v < 0 for v in self.benchmarks.values()):
            raise ValueError("benchmark values must be >= 0")
        if len(self.device_catalog) != 3:
            raise ValueError("device catalog must hold exactly 3 devices")
        ids = [d.device_id for d in self.device_catalog]
        if len(set(ids)) != len(ids):
            raise ValueError("device ids must be unique")

    @property
    def teams(self) -> tuple[str, ...]:
        return tuple(f"team-{i}" for i in range(1, self.team_count + 1))

    @property
    def play_rounds(self) -> int:
        return self.total_rounds - 1

    def device(self, device_id: str) -> DeviceSpec | None:
        for spec in self.device_catalog:
            if spec.device_id == device_id:
                return spec
        return None

    def to_json(self) -> dict:
        return {
            "team_count": self.team_count,
            "total_rounds": self.total_rounds,
            "round_budget": fp_to_str(self.round_budget),
            "seed": self.seed,
            "benchmarks": {m: fp_to_str(self.benchmarks[m]) for m in METRICS},
            "device_catalog": [d.to_json() for d in self.device_catalog],
            "network_profile": self.network_profile,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimulationConfig":
        kwargs: dict = {}
        if "team_count" in obj:
            kwargs["team_count"] = int(obj["team_count"])
        if "total_rounds" in obj:
            kwargs["total_rounds"] = int(obj["total_rounds"])
        if "round_budget" in obj:
            kwargs["round_budget"] = fp_from_str(str(obj["round_budget"]))
        if "seed" in obj:
            kwargs["seed"] = int(obj["seed"])
        if "benchmarks" in obj:
            kwargs["benchmarks"] = {m: fp_from_str(str(v)) for m, v in obj["benchmarks"].items()}
        if "device_catalog" in obj:
            kwargs["device_catalog"] = tuple(DeviceSpec.from_json(d) for d in obj["device_catalog"])
        if "network_profile" in obj:
            kwargs["network_profile"] = str(obj["network_profile"])
        return cls(**kwargs)


def demand_tag(seed: int, round_no: int, catalog) -> str:
    """The market segment in demand this round, reproducible from the seed."""
    markets = sorted({d.target_market for d in catalog})
    draw = int.from_bytes(sha256(b"DM1" + u64(seed) + u64(round_no)), "big")
    return markets[draw % len(markets)]


def compute_report(prev: ActivityReport, decision: RoundDecision,
                   config: SimulationConfig) -> ActivityReport:
    """Apply the response model to one decision (see module docstring)."""
    device = config.device(decision.chosen_device)
    if device is None:
        raise UnknownDevice(f"no device {decision.chosen_device!r} in the catalog")
    fit = FIT_MATCH if device.target_market == demand_tag(
        config.seed, decision.round, config.device_catalog) else FIT_OTHER
    keyword_mult = KEYWORD_HIT if decision.keywords & device.target_keywords else KEYWORD_MISS
    values: dict[str, int] = {}
    for metric in METRICS:
        contribution = sum(
            fp_mul(EFFECTIVENESS[metric][platform], decision.budgets[platform])
            for platform in PLATFORMS
        )
        ratio = div_round_half_up(contribution * FP_SCALE, config.round_budget)
        delta = fp_mul(fp_mul(fp_mul(config.benchmarks[metric], ratio), fit), keyword_mult)
        values[metric] = prev.metric(metric) + delta
    return ActivityReport(team=decision.team, round=decision.round, **values)


def scripted_agent_decide(team: str, round_no: int, seed: int,
                          config: SimulationConfig) -> RoundDecision:
    """A deterministic stand-in for a student: valid, seeded pseudo-random.

    Budgets are drawn as integer weights and spread over the platforms by
    largest-remainder allocation, so they always sum exactly to the round
    budget.
    """
    rng = DetRng(b"AG1" + lps(team) + u64(round_no) + u64(seed))
    weights = [rng.below(1000) + 1 for _ in PLATFORMS]
    total_weight = sum(weights)
    raw = [config.round_budget * w for w in weights]
    amounts = [r // total_weight for r in raw]
    remainder = config.round_budget - sum(amounts)
    by_remainder = sorted(range(len(PLATFORMS)),
                          key=lambda i: (-(raw[i] % total_weight), i))
    for i in by_remainder[:remainder]:
        amounts[i] += 1
    device = config.device_catalog[rng.below(len(config.device_catalog))]
    keywords = {f"kw-{rng.below(5)}"}
    if rng.below(10) < 7:
        targeted = sorted(device.target_keywords)
        keywords.add(targeted[rng.below(len(targeted))])
    return RoundDecision(
        team=team,
        round=round_no,
        chosen_device=device.device_id,
        budgets=dict(zip(PLATFORMS, amounts)),
        keywords=frozenset(keywords),
    )


def admin_address() -> bytes:
    return named_address("admin")


def team_address(team: str) -> bytes:
    return named_address(f"team:{team}")


def default_alloc(config: SimulationConfig) -> list[Account]:
    accounts = [Account(address=admin_address(), balance=TEAM_START_BALANCE_WEI,
                        stake=TEAM_START_STAKE)]
    for team in config.teams:
        accounts.append(Account(address=team_address(team), balance=TEAM_START_BALANCE_WEI,
                                stake=TEAM_START_STAKE))
    return accounts


@dataclass(frozen=True)
class RoundSummary:
    round: int
    block_height: int
    block_hash: bytes
    finality_ms: int
    reports: tuple[ActivityReport, ...]
    gas_by_team: dict[str, int]
    fee_by_team: dict[str, int]

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "block_height": self.block_height,
            "block_hash": to_hex(self.block_hash),
            "finality_ms": self.finality_ms,
            "reports": [r.to_json() for r in self.reports],
            "gas_by_team": dict(sorted(self.gas_by_team.items())),
            "fee_by_team": {t: str(f) for t, f in sorted(self.fee_by_team.items())},
        }


class Simulation:
    """Protocol driver: setup, decision intake, round closing.

    Holds the off-chain side (pending decisions, latest reports); all
    on-chain effects go through the ledger's single writer. Decision
    submission and round closing are serialized by the ledger lock's outer
    sibling here.
    """

    def __init__(self, config: SimulationConfig, ledger: Ledger,
                 metrics_log: MetricsLog | None = None):
        self.config = config
        self.ledger = ledger
        self.metrics = metrics_log if metrics_log is not None else MetricsLog()
        self.contract_address: bytes | None = None
        self.current_round = 0
        self.complete = False
        self.pending: dict[str, RoundDecision] = {}
        self.latest: dict[str, ActivityReport] = {}
        self.summaries: list[RoundSummary] = []

    @property
    def initialized(self) -> bool:
        return self.contract_address is not None

    # ----- iteration 0: setup ------------------------------------------

    def init(self) -> dict:
        """Iteration 0: genesis (if needed), benchmark load, team baselines.

        Deploys the report contract with the admin's benchmark data as the
        init payload; afterwards every team's baseline report equals the
        benchmarks and round 1 is open.
        """
        if self.initialized:
            raise AlreadyInitialized("simulation is already initialized")
        if not self.ledger.blocks:
            self.ledger.create_genesis(default_alloc(self.config))
        admin = admin_address()
        admin_account = self.ledger.state.accounts.get(admin)
        if admin_account is None:
            raise SimulationError("admin account missing from the chain allocation")
        payload = encode_metrics([(m, self.config.benchmarks[m]) for m in METRICS])
        tx = make_transaction(admin, admin_account.nonce,
                              ContractCreate(REPORT_HANDLER_ID, payload),
                              gas_limit=DEPLOY_GAS_LIMIT)
        self.ledger.submit(tx)
        block = self.ledger.produce_block()
        receipt = self.ledger.receipt_of(tx.tx_id)[1]
        if not receipt.ok:
            raise SimulationError(f"benchmark deployment failed: {receipt.reason}")
        self.contract_address = receipt.created_address
        for team in self.config.teams:
            self.latest[team] = ActivityReport(
                team=team, round=0,
                **{m: self.config.benchmarks[m] for m in METRICS})
        self.current_round = 1
        return {
            "contract_address": to_hex(self.contract_address),
            "genesis_hash": to_hex(self.ledger.blocks[0].block_hash),
            "deploy_block": block.height,
            "deploy_gas_used": receipt.gas_used,
        }

    # ----- play rounds ---------------------------------------------------

    def submit_decision(self, decision: RoundDecision) -> None:
        if not self.initialized:
            raise NotInitialized("run init before submitting decisions")
        if self.complete:
            raise SimulationComplete("all play rounds are closed")
        if decision.team not in self.config.teams:
            raise UnknownTeam(f"no team {decision.team!r}")
        if decision.round != self.current_round:
            raise WrongRound(
                f"decision is for round {decision.round}, current round is {self.current_round}")
        if decision.team in self.pending:
            raise DuplicateDecision(f"{decision.team} already decided round {decision.round}")
        if self.config.device(decision.chosen_device) is None:
            raise UnknownDevice(f"no device {decision.chosen_device!r} in the catalog")
        total = sum(decision.budgets.values())
        if total != self.config.round_budget:
            raise BudgetMismatch(
                f"budgets sum to {fp_to_str(total)}, round budget is "
                f"{fp_to_str(self.config.round_budget)}")
        self.pending[decision.team] = decision

    def compute_for(self, decision: RoundDecision) -> ActivityReport:
        """Response model over the team's latest report (rollup execution hook)."""
        return compute_report(self.latest[decision.team], decision, self.config)

    def close_round(self) -> RoundSummary:
        """Execute the round off-chain, commit reports + digest, advance.

        Finality is measured from submission of the round's rollup
        transactions to their inclusion in the sealed block.
        """
        if not self.initialized:
            raise NotInitialized("run init before closing rounds")
        if self.complete:
            raise SimulationComplete("all play rounds are closed")
        missing = [t for t in self.config.teams if t not in self.pending]
        if missing:
            raise MissingDecisions(missing)
        decisions = [self.pending[t] for t in self.config.teams]
        submitted_at = self.ledger.clock.now_ms()
        batch = execute_batch_offchain(self, decisions)
        block, receipts = commit_rollup(self.ledger, batch, admin_address(),
                                        self.contract_address)
        finalized_at = self.ledger.clock.now_ms()
        sample = self.metrics.record_finality(self.current_round, submitted_at, finalized_at)
        gas_by_team: dict[str, int] = {}
        fee_by_team: dict[str, int] = {}
        for report, receipt in zip(batch.reports, receipts):
            gas_by_team[report.team] = receipt.gas_used
            fee_by_team[report.team] = receipt.gas_used * block.transactions[0].gas_price
            self.latest[report.team] = report
        summary = RoundSummary(
            round=self.current_round,
            block_height=block.height,
            block_hash=block.block_hash,
            finality_ms=sample.finality_ms,
            reports=batch.reports,
            gas_by_team=gas_by_team,
            fee_by_team=fee_by_team,
        )
        self.summaries.append(summary)
        self.pending.clear()
        self.current_round += 1
        if self.current_round > self.config.play_rounds:
            self.complete = True
        return summary

    def run_scripted(self) -> list[RoundSummary]:
        """Drive every remaining round with scripted agents (headless mode)."""
        if not self.initialized:
            self.init()
        while not self.complete:
            for team in self.config.teams:
                self.submit_decision(scripted_agent_decide(
                    team, self.current_round, self.config.seed, self.config))
            self.close_round()
        return list(self.summaries)

    # ----- chain read-backs ----------------------------------------------

    def _contract_storage(self) -> dict[bytes, bytes] | None:
        if self.contract_address is None:
            return None
        contract = self.ledger.state.contracts.get(self.contract_address)
        return None if contract is None else contract.storage

    def report_from_chain(self, team: str, round_no: int) -> ActivityReport | None:
        """Decode a committed report straight from contract storage bytes."""
        storage = self._contract_storage()
        if storage is None:
            return None
        values: dict[str, int] = {}
        for metric in METRICS:
            raw = storage.get(ReportHandler.report_key(team, round_no, metric))
            if raw is None:
                return None
            values[metric] = int.from_bytes(raw, "big")
        return ActivityReport(team=team, round=round_no, **values)

    def digest_from_chain(self, round_no: int) -> bytes | None:
        storage = self._contract_storage()
        if storage is None:
            return None
        return storage.get(ReportHandler.digest_key(round_no))

    def state_json(self) -> dict:
        return {
            "initialized": self.initialized,
            "complete": self.complete,
            "current_round": self.current_round,
            "total_rounds": self.config.total_rounds,
            "play_rounds": self.config.play_rounds,
            "teams": list(self.config.teams),
            "submitted": {team: team in self.pending for team in self.config.teams},
            "round_budget": fp_to_str(self.config.round_budget),
            "platforms": list(PLATFORMS),
            "metrics": list(METRICS),
            "benchmarks": {m: fp_to_str(self.config.benchmarks[m]) for m in METRICS},
            "devices": [d.to_json() for d in self.config.device_catalog],
            "network_profile": self.config.network_profile,
            "contract_address": to_hex(self.contract_address) if self.contract_address else None,
            "consensus_mode": self.ledger.engine.mode,
            "chain_height": self.ledger.height if self.ledger.blocks else -1,
            "closed_rounds": len(self.summaries),
        }


def write_reports_csv(summaries, path: str) -> None:
    """reports.csv: one row per (team, round) with metrics and actual chain cost."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["team", "round", "likes", "post_engagement", "page_views",
                         "gas_used", "fee_wei"])
        for summary in summaries:
            for report in summary.reports:
                writer.writerow([
                    report.team, report.round,
                    fp_to_str(report.likes),
                    fp_to_str(report.post_engagement),
                    fp_to_str(report.page_views),
                    summary.gas_by_team[report.team],
                    summary.fee_by_team[report.team],
                ])
