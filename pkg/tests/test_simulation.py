"""Response model and round-protocol tests.

The expected metric values below were hand-derived with decimal arithmetic
(ROUND_HALF_UP at every multiplication/division step, mirroring the
documented evaluation order) and frozen. An inline decimal oracle
cross-checks the integer implementation over randomized decisions.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal

import pytest

from chainclass.chain import Ledger
from chainclass.clock import SimClock
from chainclass.codec import named_address
from chainclass.consensus import ConsensusConfig, Engine
from chainclass.records import METRICS, PLATFORMS, ActivityReport, RoundDecision
from chainclass.rollup import batch_digest
from chainclass.simulation import (
    DEFAULT_BENCHMARKS,
    EFFECTIVENESS,
    AlreadyInitialized,
    BudgetMismatch,
    DuplicateDecision,
    MissingDecisions,
    NotInitialized,
    Simulation,
    SimulationComplete,
    SimulationConfig,
    UnknownDevice,
    UnknownTeam,
    WrongRound,
    compute_report,
    demand_tag,
    scripted_agent_decide,
    team_address,
)

CONFIG = SimulationConfig()  # 3 teams, 16 iterations, budget 10,000.0000, seed 42
BASELINE = ActivityReport(team="team-1", round=0, **DEFAULT_BENCHMARKS)
ROUND_BUDGET = CONFIG.round_budget


def all_social_budgets() -> dict[str, int]:
    return {"search": 0, "social": ROUND_BUDGET, "display": 0, "video": 0}


def decision(round_no: int, device: str, keywords: set[str],
             budgets: dict[str, int] | None = None,
             team: str = "team-1") -> RoundDecision:
    return RoundDecision(team=team, round=round_no, chosen_device=device,
                         budgets=budgets if budgets is not None else all_social_budgets(),
                         keywords=frozenset(keywords))


def test_demand_tag_for_seed_42_round_1_is_budget():
    catalog = CONFIG.device_catalog
    assert demand_tag(42, 1, catalog) == "budget"
    assert demand_tag(42, 2, catalog) == "mainstream"
    # Deterministic: the same draw twice is identical.
    assert demand_tag(42, 1, catalog) == demand_tag(42, 1, catalog)


def test_demand_tag_eventually_covers_every_market():
    tags = {demand_tag(42, r, CONFIG.device_catalog) for r in range(1, 61)}
    assert tags == {"budget", "mainstream", "premium"}


# ----- hand-derived golden vectors ----------------------------------------------
# Round 1 under seed 42 demands "budget": dev-core (mainstream) gives fit 1.0,
# dev-basic (budget) gives fit 1.2.

def test_all_social_spend_no_bonuses():
    report = compute_report(BASELINE, decision(1, "dev-core", {"zz"}), CONFIG)
    # effectiveness(social) is 1.0 / 0.8 / 0.3 -> deltas are benchmark * eff.
    assert report.likes == 200_0000
    assert report.post_engagement == 144_0000
    assert report.page_views == 195_0000


def test_keyword_bonus_multiplies_by_one_point_one():
    # "camera" is one of dev-core's target keywords.
    report = compute_report(BASELINE, decision(1, "dev-core", {"camera"}), CONFIG)
    assert report.likes == 210_0000
    assert report.post_engagement == 150_4000
    assert report.page_views == 199_5000


def test_market_fit_multiplies_by_one_point_two():
    report = compute_report(BASELINE, decision(1, "dev-basic", {"zz"}), CONFIG)
    assert report.likes == 220_0000
    assert report.post_engagement == 156_8000
    assert report.page_views == 204_0000


def test_even_split_with_both_bonuses():
    budgets = {p: 2_500_0000 for p in PLATFORMS}
    report = compute_report(BASELINE, decision(1, "dev-basic", {"value"}, budgets),
                            CONFIG)
    assert report.likes == 159_4000
    assert report.post_engagement == 132_8000
    assert report.page_views == 258_9000


def test_uneven_split_rounding():
    budgets = {"search": 3_333_0000, "social": 3_333_0000,
               "display": 3_334_0000, "video": 0}
    report = compute_report(BASELINE, decision(1, "dev-core", {"zz"}, budgets), CONFIG)
    assert report.likes == 143_3300
    assert report.post_engagement == 112_0000
    assert report.page_views == 244_9950


def test_zero_budgets_leave_metrics_unchanged():
    budgets = {p: 0 for p in PLATFORMS}
    report = compute_report(BASELINE, decision(1, "dev-core", {"zz"}, budgets), CONFIG)
    assert report.metric_pairs() == [(m, BASELINE.metric(m)) for m in METRICS]


def test_metrics_never_decrease():
    rng_decisions = [scripted_agent_decide("team-1", r, seed, CONFIG)
                     for seed in range(5) for r in range(1, 6)]
    prev = BASELINE
    for dec in rng_decisions:
        prev_values = [prev.metric(m) for m in METRICS]
        prev = compute_report(prev, dec, CONFIG)
        assert all(prev.metric(m) >= v for m, v in zip(METRICS, prev_values))


def test_compute_report_rejects_unknown_device():
    with pytest.raises(UnknownDevice):
        compute_report(BASELINE, decision(1, "dev-unknown", set()), CONFIG)


def decimal_oracle(prev: ActivityReport, dec: RoundDecision,
                   config: SimulationConfig) -> ActivityReport:
    """Independent reimplementation with decimal ROUND_HALF_UP quantization."""
    def q(x) -> int:
        return int(Decimal(x).quantize(Decimal(1), rounding=ROUND_HALF_UP))

    def mul(a: int, b: int) -> int:
        return q(Decimal(a) * Decimal(b) / Decimal(10_000))

    device = config.device(dec.chosen_device)
    tag = demand_tag(config.seed, dec.round, config.device_catalog)
    fit = 12_000 if device.target_market == tag else 10_000
    kb = 11_000 if dec.keywords & device.target_keywords else 10_000
    values: dict[str, int] = {}
    for metric in METRICS:
        contribution = sum(mul(EFFECTIVENESS[metric][p], dec.budgets[p])
                           for p in PLATFORMS)
        ratio = q(Decimal(contribution * 10_000) / Decimal(config.round_budget))
        values[metric] = prev.metric(metric) + mul(mul(mul(
            config.benchmarks[metric], ratio), fit), kb)
    return ActivityReport(team=dec.team, round=dec.round, **values)


def test_compute_report_matches_decimal_oracle_over_random_decisions():
    prev = BASELINE
    for seed in range(20):
        for round_no in range(1, 6):
            dec = scripted_agent_decide("team-1", round_no, seed, CONFIG)
            expected = decimal_oracle(prev, dec, CONFIG)
            actual = compute_report(prev, dec, CONFIG)
            assert actual == expected
            prev = actual


# ----- scripted agents ------------------------------------------------------------

def test_scripted_agent_budgets_always_sum_to_the_round_budget():
    for seed in (0, 1, 42):
        for team in CONFIG.teams:
            for round_no in range(1, 16):
                dec = scripted_agent_decide(team, round_no, seed, CONFIG)
                assert sum(dec.budgets.values()) == ROUND_BUDGET
                assert dec.team == team and dec.round == round_no
                assert CONFIG.device(dec.chosen_device) is not None
                assert dec.keywords


def test_scripted_agent_is_deterministic_and_seed_sensitive():
    a = scripted_agent_decide("team-1", 3, 42, CONFIG)
    b = scripted_agent_decide("team-1", 3, 42, CONFIG)
    assert a == b
    assert scripted_agent_decide("team-1", 3, 43, CONFIG) != a
    assert scripted_agent_decide("team-2", 3, 42, CONFIG) != a


# ----- simulation protocol ----------------------------------------------------------

def make_simulation(config: SimulationConfig | None = None) -> Simulation:
    config = config or SimulationConfig(total_rounds=4)
    engine = Engine(ConsensusConfig(mode="pow", difficulty_bits=0,
                                    miner=named_address("miner")))
    return Simulation(config, Ledger(engine, SimClock()))


def submit_round(sim: Simulation, round_no: int) -> None:
    for team in sim.config.teams:
        sim.submit_decision(scripted_agent_decide(team, round_no, sim.config.seed,
                                                  sim.config))


def test_init_deploys_benchmarks_and_sets_baselines():
    sim = make_simulation()
    result = sim.init()
    assert set(result) == {"contract_address", "genesis_hash", "deploy_block",
                           "deploy_gas_used"}
    assert result["deploy_block"] == 1
    assert result["deploy_gas_used"] == 32_000 + 3 * 5_000
    assert sim.current_round == 1
    for team in sim.config.teams:
        baseline = sim.latest[team]
        assert baseline.metric_pairs() == [(m, sim.config.benchmarks[m])
                                           for m in METRICS]
    # Every team starts from the identical benchmark baseline.
    values = {tuple(v for _, v in sim.latest[t].metric_pairs())
              for t in sim.config.teams}
    assert len(values) == 1
    with pytest.raises(AlreadyInitialized):
        sim.init()


def test_team_accounts_are_funded_at_genesis():
    sim = make_simulation()
    sim.init()
    for team in sim.config.teams:
        account = sim.ledger.state.accounts[team_address(team)]
        assert account.balance == 10**18
        assert account.stake == 1_000


def test_decision_validation_chain():
    sim = make_simulation()
    with pytest.raises(NotInitialized):
        sim.submit_decision(scripted_agent_decide("team-1", 1, 42, sim.config))
    with pytest.raises(NotInitialized):
        sim.close_round()
    sim.init()

    ok = scripted_agent_decide("team-1", 1, 42, sim.config)
    with pytest.raises(WrongRound):
        sim.submit_decision(scripted_agent_decide("team-1", 2, 42, sim.config))
    with pytest.raises(UnknownTeam):
        sim.submit_decision(decision(1, "dev-core", {"x"}, team="team-9"))
    with pytest.raises(UnknownDevice):
        sim.submit_decision(decision(1, "dev-missing", {"x"}))
    off_by_one = dict(all_social_budgets())
    off_by_one["video"] = 1  # sums to round_budget + 0.0001
    with pytest.raises(BudgetMismatch):
        sim.submit_decision(decision(1, "dev-core", {"x"}, off_by_one))
    under = dict(all_social_budgets())
    under["social"] -= 1
    with pytest.raises(BudgetMismatch):
        sim.submit_decision(decision(1, "dev-core", {"x"}, under))

    sim.submit_decision(ok)
    with pytest.raises(DuplicateDecision):
        sim.submit_decision(ok)
    with pytest.raises(MissingDecisions) as caught:
        sim.close_round()
    assert caught.value.teams == ["team-2", "team-3"]


def test_close_round_commits_reports_and_advances():
    sim = make_simulation()
    sim.init()
    submit_round(sim, 1)
    summary = sim.close_round()
    assert summary.round == 1
    assert summary.block_height == 2  # genesis, deploy, round block
    assert len(summary.reports) == 3
    assert sim.current_round == 2
    assert sim.pending == {}
    # Committed bytes equal computed reports, and the digest binds them.
    for report in summary.reports:
        assert sim.report_from_chain(report.team, 1) == report
        assert sim.latest[report.team] == report
    assert sim.digest_from_chain(1) == batch_digest(summary.reports)
    # Gas and fees per team: tx_base + 3 writes at the default gas price.
    assert summary.gas_by_team == {t: 36_000 for t in sim.config.teams}
    assert summary.fee_by_team == {t: 360_000 for t in sim.config.teams}
    assert summary.finality_ms >= 0
    samples = sim.metrics.finality_samples()
    assert len(samples) == 1 and samples[0].round == 1


def test_full_run_completes_and_then_refuses_more():
    sim = make_simulation(SimulationConfig(total_rounds=4, team_count=2))
    summaries = sim.run_scripted()
    assert len(summaries) == 3  # iterations 1..3; iteration 0 was setup
    assert sim.complete
    assert [s.round for s in summaries] == [1, 2, 3]
    with pytest.raises(SimulationComplete):
        sim.submit_decision(scripted_agent_decide("team-1", 4, 42, sim.config))
    with pytest.raises(SimulationComplete):
        sim.close_round()
    # 1 genesis + 1 deploy + 3 round blocks.
    assert sim.ledger.height == 4
    for summary in summaries:
        # Each round block carries team_count reports + 1 digest commit.
        block = sim.ledger.block_at(summary.block_height)
        assert len(block.transactions) == 3


def test_reports_grow_monotonically_across_rounds():
    sim = make_simulation(SimulationConfig(total_rounds=6))
    sim.run_scripted()
    for team in sim.config.teams:
        previous = {m: sim.config.benchmarks[m] for m in METRICS}
        for round_no in range(1, 6):
            report = sim.report_from_chain(team, round_no)
            for metric in METRICS:
                assert report.metric(metric) >= previous[metric]
                previous[metric] = report.metric(metric)


def test_state_json_shape():
    sim = make_simulation()
    state = sim.state_json()
    assert state["initialized"] is False
    sim.init()
    submit_round(sim, 1)
    state = sim.state_json()
    assert state["initialized"] is True
    assert state["current_round"] == 1
    assert state["submitted"] == {t: True for t in sim.config.teams}
    assert state["round_budget"] == "10000.0000"
    assert state["benchmarks"]["likes"] == "100.0000"
    assert state["consensus_mode"] == "pow"


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        SimulationConfig(team_count=0)
    with pytest.raises(ValueError):
        SimulationConfig(total_rounds=1)
    with pytest.raises(ValueError):
        SimulationConfig(benchmarks={"likes": 1})
    config = SimulationConfig(team_count=2, total_rounds=8, seed=7)
    assert SimulationConfig.from_json(config.to_json()) == config
    assert config.teams == ("team-1", "team-2")
    assert config.play_rounds == 7
