"""Round-record data types and their canonical byte encodings.

The three activity metrics and four ad platforms are fixed, ordered
vocabularies; every encoding below walks them in this canonical order so
identical records always serialize to identical bytes.

Wire formats (all integers big-endian, fixed-point values scale 10^4):

    metrics payload   u32(count) then per metric lps(name) + u64(value)
    report args       lps(team) + u64(round) + metrics payload
    report query      lps(team) + u64(round)
    activity report   b"AR1" + lps(team) + u64(round) + u64 per metric
    round decision    b"RD1" + lps(team) + u64(round) + lps(device)
                      + u32(4) + per platform lps(name) + u64(budget)
                      + u32(k) + lps(keyword) sorted ascending
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .codec import fp_from_str, fp_to_str, lps, u32, u64

METRICS = ("likes", "post_engagement", "page_views")
PLATFORMS = ("search", "social", "display", "video")


class _Reader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ValueError("truncated record")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self.take(8), "big")

    def lp(self) -> bytes:
        return self.take(self.u32())

    def lps(self) -> str:
        return self.lp().decode("utf-8")

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise ValueError("trailing bytes after record")


def encode_metrics(pairs: Iterable[tuple[str, int]]) -> bytes:
    pairs = list(pairs)
    out = [u32(len(pairs))]
    for name, value in pairs:
        out.append(lps(name))
        out.append(u64(value))
    return b"".join(out)


def decode_metrics(data: bytes) -> list[tuple[str, int]]:
    reader = _Reader(data)
    count = reader.u32()
    pairs = [(reader.lps(), reader.u64()) for _ in range(count)]
    reader.expect_end()
    return pairs


def encode_report_args(team: str, round_no: int, pairs: Iterable[tuple[str, int]]) -> bytes:
    return lps(team) + u64(round_no) + encode_metrics(pairs)


def decode_report_args(data: bytes) -> tuple[str, int, list[tuple[str, int]]]:
    reader = _Reader(data)
    team = reader.lps()
    round_no = reader.u64()
    count = reader.u32()
    pairs = [(reader.lps(), reader.u64()) for _ in range(count)]
    reader.expect_end()
    return team, round_no, pairs


def encode_report_query(team: str, round_no: int) -> bytes:
    return lps(team) + u64(round_no)


def decode_report_query(data: bytes) -> tuple[str, int]:
    reader = _Reader(data)
    team = reader.lps()
    round_no = reader.u64()
    reader.expect_end()
    return team, round_no


@dataclass(frozen=True)
class DeviceSpec:
    device_id: str
    spec_tier: str  # low | mid | high
    target_market: str
    target_keywords: frozenset[str]

    def __post_init__(self):
        if self.spec_tier not in ("low", "mid", "high"):
            raise ValueError(f"unknown spec tier {self.spec_tier!r}")

    def to_json(self) -> dict:
        return {
            "device_id": self.device_id,
            "spec_tier": self.spec_tier,
            "target_market": self.target_market,
            "target_keywords": sorted(self.target_keywords),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DeviceSpec":
        return cls(
            device_id=obj["device_id"],
            spec_tier=obj["spec_tier"],
            target_market=obj["target_market"],
            target_keywords=frozenset(obj["target_keywords"]),
        )


@dataclass(frozen=True)
class RoundDecision:
    team: str
    round: int
    chosen_device: str
    budgets: dict[str, int]  # platform -> fixed-point amount
    keywords: frozenset[str]

    def __post_init__(self):
        if set(self.budgets) != set(PLATFORMS):
            raise ValueError(f"budgets must cover exactly the platforms {PLATFORMS}")
        if any(amount < 0 for amount in self.budgets.values()):
            raise ValueError("budget amounts must be >= 0")

    def canonical_bytes(self) -> bytes:
        out = [b"RD1", lps(self.team), u64(self.round), lps(self.chosen_device), u32(len(PLATFORMS))]
        for platform in PLATFORMS:
            out.append(lps(platform))
            out.append(u64(self.budgets[platform]))
        keywords = sorted(self.keywords)
        out.append(u32(len(keywords)))
        out.extend(lps(k) for k in keywords)
        return b"".join(out)

    def to_json(self) -> dict:
        return {
            "team": self.team,
            "round": self.round,
            "device": self.chosen_device,
            "budgets": {p: fp_to_str(self.budgets[p]) for p in PLATFORMS},
            "keywords": sorted(self.keywords),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RoundDecision":
        return cls(
            team=obj["team"],
            round=int(obj["round"]),
            chosen_device=obj["device"],
            budgets={p: fp_from_str(str(v)) for p, v in obj["budgets"].items()},
            keywords=frozenset(obj["keywords"]),
        )


@dataclass(frozen=True)
class ActivityReport:
    team: str
    round: int
    likes: int
    post_engagement: int
    page_views: int

    def __post_init__(self):
        if min(self.likes, self.post_engagement, self.page_views) < 0:
            raise ValueError("metrics must be >= 0")

    def metric(self, name: str) -> int:
        if name not in METRICS:
            raise KeyError(name)
        return getattr(self, name)

    def metric_pairs(self) -> list[tuple[str, int]]:
        return [(name, self.metric(name)) for name in METRICS]

    def canonical_bytes(self) -> bytes:
        out = [b"AR1", lps(self.team), u64(self.round)]
        out.extend(u64(self.metric(name)) for name in METRICS)
        return b"".join(out)

    def to_json(self) -> dict:
        obj: dict = {"team": self.team, "round": self.round}
        obj.update({name: fp_to_str(self.metric(name)) for name in METRICS})
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "ActivityReport":
        return cls(
            team=obj["team"],
            round=int(obj["round"]),
            **{name: fp_from_str(str(obj[name])) for name in METRICS},
        )

    @classmethod
    def from_metric_pairs(cls, team: str, round_no: int,
                          pairs: Iterable[tuple[str, int]]) -> "ActivityReport":
        values = dict(pairs)
        if set(values) != set(METRICS):
            raise ValueError(f"metric pairs must cover exactly {METRICS}")
        return cls(team=team, round=round_no, **values)
