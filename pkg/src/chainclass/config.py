"""Service/CLI configuration: one JSON file covering the whole node.

Shape (every section optional; omitted sections take the defaults below):

    {
      "simulation":  { "team_count": 3, "total_rounds": 16,
                       "round_budget": "10000.0000", "seed": 42,
                       "benchmarks": {"likes": "100.0000", ...},
                       "device_catalog": [...], "network_profile": "ethereum" },
      "tokens":      { "instructor": "instructor-token",
                       "teams": {"team-1": "team-1-token", ...} },
      "gas_schedule": { "tx_base": 21000, "storage_write_per_key": 5000,
                        "storage_read_per_key": 200, "create_base": 32000 },
      "consensus":   { "mode": "pow", "difficulty_bits": 12,
                       "miner": "0x..." },
      "network_profiles": [ { "name": "ethereum", "gas_price_gwei": "15.8000",
                              "fee_num": 1, "fee_den": 1, "basis": "quoted" }, ... ],
      "chain_file":  "chain.jsonl"
    }

Tokens are static bearer credentials: the instructor token and one token
per team, mapped to principals at startup.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .codec import ADDRESS_LEN, from_hex, fp_from_str, fp_to_str, named_address, to_hex
from .consensus import ConsensusConfig
from .contracts import GasSchedule
from .metrics import NetworkProfile, default_profiles
from .simulation import SimulationConfig

DEFAULT_MINER_NAME = "miner"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Tokens:
    instructor: str
    teams: dict[str, str]

    def principal_of(self, token: str) -> tuple[str, str | None] | None:
        """("instructor", None), ("team", team_id), or None for unknown tokens."""
        if token == self.instructor:
            return ("instructor", None)
        for team, team_token in self.teams.items():
            if token == team_token:
                return ("team", team)
        return None

    def to_json(self) -> dict:
        return {"instructor": self.instructor, "teams": dict(sorted(self.teams.items()))}


def default_tokens(simulation: SimulationConfig) -> Tokens:
    return Tokens(instructor="instructor-token",
                  teams={team: f"{team}-token" for team in simulation.teams})


def _profile_to_json(profile: NetworkProfile) -> dict:
    return {
        "name": profile.name,
        "gas_price_gwei": fp_to_str(profile.gas_price_gwei),
        "fee_num": profile.fee_num,
        "fee_den": profile.fee_den,
        "basis": profile.basis,
    }


def _profile_from_json(obj: dict) -> NetworkProfile:
    return NetworkProfile(
        name=str(obj["name"]),
        gas_price_gwei=fp_from_str(str(obj["gas_price_gwei"])),
        fee_num=int(obj["fee_num"]),
        fee_den=int(obj["fee_den"]),
        basis=str(obj.get("basis", "quoted")),
    )


@dataclass(frozen=True)
class AppConfig:
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    tokens: Tokens | None = None
    gas_schedule: GasSchedule = field(default_factory=GasSchedule)
    consensus: ConsensusConfig | None = None
    profiles: tuple[NetworkProfile, ...] = field(default_factory=default_profiles)
    chain_file: str | None = None

    def __post_init__(self):
        if self.tokens is None:
            object.__setattr__(self, "tokens", default_tokens(self.simulation))
        if self.consensus is None:
            object.__setattr__(self, "consensus", ConsensusConfig(
                mode="pow", difficulty_bits=12, miner=named_address(DEFAULT_MINER_NAME)))

    def to_json(self) -> dict:
        return {
            "simulation": self.simulation.to_json(),
            "tokens": self.tokens.to_json(),
            "gas_schedule": self.gas_schedule.as_dict(),
            "consensus": {
                "mode": self.consensus.mode,
                "difficulty_bits": self.consensus.difficulty_bits,
                "miner": to_hex(self.consensus.miner),
            },
            "network_profiles": [_profile_to_json(p) for p in self.profiles],
            "chain_file": self.chain_file,
        }


def config_from_json(obj: dict) -> AppConfig:
    try:
        simulation = SimulationConfig.from_json(obj.get("simulation", {}))
        tokens = None
        if "tokens" in obj:
            tokens = Tokens(instructor=str(obj["tokens"]["instructor"]),
                            teams={str(k): str(v) for k, v in obj["tokens"]["teams"].items()})
        gas_schedule = GasSchedule.from_dict(obj.get("gas_schedule", GasSchedule().as_dict()))
        consensus = None
        if "consensus" in obj:
            raw = obj["consensus"]
            miner = (from_hex(raw["miner"], ADDRESS_LEN) if "miner" in raw
                     else named_address(DEFAULT_MINER_NAME))
            consensus = ConsensusConfig(mode=str(raw.get("mode", "pow")),
                                        difficulty_bits=int(raw.get("difficulty_bits", 12)),
                                        miner=miner)
        profiles = tuple(_profile_from_json(p) for p in obj["network_profiles"]) \
            if "network_profiles" in obj else default_profiles()
        return AppConfig(simulation=simulation, tokens=tokens, gas_schedule=gas_schedule,
                         consensus=consensus, profiles=profiles,
                         chain_file=obj.get("chain_file"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path: str) -> AppConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_json(obj)
