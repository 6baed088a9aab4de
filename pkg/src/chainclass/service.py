"""HTTP/JSON service: admin, team, chain-explorer, and metrics endpoints.

Authentication is a static bearer token per principal (the instructor and
one per team). Admin routes require the instructor; team routes require
the matching team's token — a team can never read or write another team's
resources. All numbers that may exceed 2^53 (wei amounts) travel as
decimal strings; fixed-point values travel as scale-10^4 decimal strings
such as "10000.0000"; byte fields travel as 0x-hex.

Error responses are JSON: {"error": <code>, "detail": <human text>} with
status 400 for malformed bodies, 401 for unknown tokens, 403 for wrong
principals, 404 for missing resources, 409 for state conflicts
(AlreadyInitialized, WrongRound, DuplicateDecision, MissingDecisions), and
422 for decision-validation failures (BudgetMismatch, UnknownDevice).

All chain/simulation mutation serializes through one writer lock; reads
serve committed state without locking.
"""

from __future__ import annotations

import contextlib
import os
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .chain import Ledger
from .clock import WallClock
from .codec import HASH_LEN, from_hex, fp_from_str, to_hex
from .consensus import Engine
from .config import AppConfig
from .metrics import cost_report
from .records import PLATFORMS, RoundDecision
from .simulation import (
    AlreadyInitialized,
    BudgetMismatch,
    DuplicateDecision,
    MissingDecisions,
    NotInitialized,
    Simulation,
    SimulationComplete,
    UnknownDevice,
    UnknownTeam,
    WrongRound,
)


def _error(status: int, code: str, detail: str, **extra) -> JSONResponse:
    body = {"error": code, "detail": detail}
    body.update(extra)
    return JSONResponse(status_code=status, content=body)


def _conflict(exc: Exception) -> JSONResponse:
    code = type(exc).__name__
    extra = {"teams": exc.teams} if isinstance(exc, MissingDecisions) else {}
    return _error(409, code, str(exc), **extra)


def create_app(config: AppConfig | None = None, clock=None,
               ledger: Ledger | None = None, simulation: Simulation | None = None,
               static_dir: str | None = None) -> FastAPI:
    """Build the service around one simulation instance.

    A ledger/simulation pair can be injected (tests, resumed chains);
    otherwise fresh ones are built from the config. When ``static_dir``
    exists, it is mounted at / so the service doubles as the web host.
    """
    config = config or AppConfig()
    clock = clock if clock is not None else WallClock()
    if ledger is None:
        ledger = Ledger(Engine(config.consensus), clock,
                        gas_schedule=config.gas_schedule, path=config.chain_file)
    if simulation is None:
        simulation = Simulation(config.simulation, ledger)

    write_lock = threading.Lock()

    @contextlib.asynccontextmanager
    async def lifespan(_app):
        yield
        # Graceful shutdown rewrites the chain file from committed blocks.
        if config.chain_file and ledger.blocks:
            with contextlib.suppress(Exception):
                ledger._write_file(config.chain_file, mode="w")

    app = FastAPI(title="chainclass", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.config = config
    app.state.ledger = ledger
    app.state.simulation = simulation

    # ----- authentication ------------------------------------------------

    def principal_of(request: Request) -> tuple[str, str | None] | None:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            return None
        return config.tokens.principal_of(header[len("Bearer "):].strip())

    def require_instructor(request: Request) -> JSONResponse | None:
        principal = principal_of(request)
        if principal is None:
            return _error(401, "UnknownToken", "missing or unknown bearer token")
        if principal[0] != "instructor":
            return _error(403, "WrongPrincipal", "instructor token required")
        return None

    def require_team(request: Request, team_id: str) -> JSONResponse | None:
        principal = principal_of(request)
        if principal is None:
            return _error(401, "UnknownToken", "missing or unknown bearer token")
        if principal[0] != "team" or principal[1] != team_id:
            return _error(403, "WrongPrincipal", f"token does not grant access to {team_id}")
        return None

    def require_any(request: Request) -> JSONResponse | None:
        if principal_of(request) is None:
            return _error(401, "UnknownToken", "missing or unknown bearer token")
        return None

    @app.get("/api/auth/whoami")
    async def whoami(request: Request):
        principal = principal_of(request)
        if principal is None:
            return _error(401, "UnknownToken", "missing or unknown bearer token")
        role, team = principal
        body: dict = {"role": role}
        if team is not None:
            body["team"] = team
        return JSONResponse(content=body)

    # ----- admin routes ---------------------------------------------------

    @app.post("/api/admin/simulation")
    async def admin_init(request: Request):
        denied = require_instructor(request)
        if denied:
            return denied
        try:
            with write_lock:
                result = simulation.init()
        except AlreadyInitialized as exc:
            return _conflict(exc)
        return JSONResponse(status_code=201, content=result)

    @app.post("/api/admin/rounds/close")
    async def admin_close_round(request: Request):
        denied = require_instructor(request)
        if denied:
            return denied
        try:
            with write_lock:
                summary = simulation.close_round()
        except (MissingDecisions, SimulationComplete, NotInitialized) as exc:
            return _conflict(exc)
        return JSONResponse(status_code=200, content=summary.to_json())

    @app.get("/api/admin/reports")
    async def admin_reports(request: Request):
        denied = require_instructor(request)
        if denied:
            return denied
        rounds = [summary.to_json() for summary in simulation.summaries]
        latest = {team: report.to_json() for team, report in sorted(simulation.latest.items())}
        return JSONResponse(content={"rounds": rounds, "latest": latest})

    # ----- team routes ----------------------------------------------------

    def parse_decision(team_id: str, body) -> RoundDecision:
        if not isinstance(body, dict):
            raise ValueError("body must be a JSON object")
        for field in ("round", "device", "budgets", "keywords"):
            if field not in body:
                raise ValueError(f"missing field {field!r}")
        if not isinstance(body["budgets"], dict):
            raise ValueError("budgets must be an object of platform -> amount string")
        if set(body["budgets"]) != set(PLATFORMS):
            raise ValueError(f"budgets must cover exactly the platforms {list(PLATFORMS)}")
        if not isinstance(body["keywords"], list):
            raise ValueError("keywords must be an array of strings")
        budgets = {p: fp_from_str(str(body["budgets"][p])) for p in PLATFORMS}
        return RoundDecision(
            team=team_id,
            round=int(body["round"]),
            chosen_device=str(body["device"]),
            budgets=budgets,
            keywords=frozenset(str(k) for k in body["keywords"]),
        )

    @app.post("/api/teams/{team_id}/decisions")
    async def team_decide(team_id: str, request: Request):
        denied = require_team(request, team_id)
        if denied:
            return denied
        try:
            body = await request.json()
        except Exception:
            return _error(400, "MalformedBody", "request body is not valid JSON")
        try:
            decision = parse_decision(team_id, body)
        except (ValueError, TypeError) as exc:
            return _error(400, "MalformedBody", str(exc))
        try:
            with write_lock:
                simulation.submit_decision(decision)
        except (WrongRound, DuplicateDecision, SimulationComplete, NotInitialized) as exc:
            return _conflict(exc)
        except (BudgetMismatch, UnknownDevice) as exc:
            return _error(422, type(exc).__name__, str(exc))
        except UnknownTeam as exc:
            return _error(404, "UnknownTeam", str(exc))
        return JSONResponse(status_code=202, content={
            "status": "accepted", "team": team_id, "round": decision.round})

    @app.get("/api/teams/{team_id}/reports/{round_no}")
    async def team_report(team_id: str, round_no: int, request: Request):
        denied = require_team(request, team_id)
        if denied:
            return denied
        report = simulation.report_from_chain(team_id, round_no)
        if report is None:
            return _error(404, "ReportMissing",
                          f"no committed report for {team_id} round {round_no}")
        body = report.to_json()
        for summary in simulation.summaries:
            if summary.round == round_no:
                body["gas_used"] = summary.gas_by_team.get(team_id)
                fee = summary.fee_by_team.get(team_id)
                body["fee_wei"] = str(fee) if fee is not None else None
                body["block_height"] = summary.block_height
        return JSONResponse(content=body)

    # ----- explorer and metrics (any authenticated principal) -------------

    @app.get("/api/chain/blocks/{height}")
    async def chain_block(height: int, request: Request):
        denied = require_any(request)
        if denied:
            return denied
        block = ledger.block_at(height)
        if block is None:
            return _error(404, "UnknownBlock", f"no block at height {height}")
        return JSONResponse(content=block.to_json())

    @app.get("/api/chain/receipts/{tx_id}")
    async def chain_receipt(tx_id: str, request: Request):
        denied = require_any(request)
        if denied:
            return denied
        try:
            key = from_hex(tx_id, HASH_LEN)
        except ValueError:
            return _error(404, "UnknownTransaction", "malformed transaction id")
        located = ledger.receipt_of(key)
        if located is None:
            return _error(404, "UnknownTransaction", f"no receipt for {tx_id}")
        height, receipt = located
        return JSONResponse(content={"block_height": height, "receipt": receipt.to_json()})

    @app.get("/api/chain/contracts/{address}/storage")
    async def contract_storage(address: str, request: Request):
        denied = require_any(request)
        if denied:
            return denied
        try:
            key = from_hex(address, 20)
        except ValueError:
            return _error(404, "UnknownContract", "malformed contract address")
        contract = ledger.state.contracts.get(key)
        if contract is None:
            return _error(404, "UnknownContract", f"no contract at {address}")
        entries = {to_hex(k): to_hex(v) for k, v in sorted(contract.storage.items())}
        return JSONResponse(content={
            "address": to_hex(contract.address),
            "handler_id": contract.handler_id,
            "entries": entries,
        })

    @app.get("/api/metrics/finality")
    async def metrics_finality(request: Request):
        denied = require_any(request)
        if denied:
            return denied
        samples = simulation.metrics.finality_samples()
        return JSONResponse(content={"samples": [s.to_json() for s in samples]})

    @app.get("/api/metrics/costs")
    async def metrics_costs(request: Request):
        denied = require_any(request)
        if denied:
            return denied
        rows = cost_report(ledger, config.profiles)
        return JSONResponse(content={
            "rows": [row.to_json() for row in rows],
            "profiles": [p.to_json() for p in config.profiles],
        })

    @app.get("/api/simulation/state")
    async def simulation_state(request: Request):
        denied = require_any(request)
        if denied:
            return denied
        return JSONResponse(content=simulation.state_json())

    # ----- static web client ----------------------------------------------

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")

    return app
