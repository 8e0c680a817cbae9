"""Scenario construction: populations, endowments, and scheduled news shocks.

A scenario fixes everything about an experiment except the transport: how
many agents of each strategy exist and with what capital, which fraction of
that capital becomes shares before day 1, what news lands on which days, and
the policy configuration (modes and numeric knobs).  Presets cover the
standard setups; any preset can be exported to a JSON file, edited, and fed
back in.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .agents import PolicyConfig
from .core import (
    AgentAccount,
    CompanyRegistry,
    MarketError,
    Money,
    Strategy,
    money,
)


class EmptyPopulation(MarketError):
    pass


class UnknownScenario(MarketError):
    pass


# population mix and per-strategy starting capital for the default market
STRATEGY_RATIO: dict[Strategy, int] = {
    Strategy.VALUE: 2,
    Strategy.INSTITUTIONAL: 1,
    Strategy.CONTRARIAN: 1,
    Strategy.AGGRESSIVE: 1,
}

DEFAULT_CAPITALS: dict[Strategy, Money] = {
    Strategy.VALUE: money("20000.00"),
    Strategy.INSTITUTIONAL: money("15000.00"),
    Strategy.CONTRARIAN: money("400.00"),
    Strategy.AGGRESSIVE: money("6000.00"),
}

RATE_CUT_HEADLINE = "Federal Reserve cuts interest rates by 50 basis points."
RATE_CUT_BODY = (
    "According to the latest minutes of the Federal Open Market Committee "
    "(FOMC) monetary policy meeting, the Federal Reserve has decided to cut "
    "interest rates by 50 basis points, continuing to maintain the target "
    "range for the federal funds rate."
)

INFLATION_HEADLINE = "National inflation rate reaches {rate}%."
INFLATION_BODY = (
    "In recent months, the national inflation rate has risen to a high point "
    "in the past decade, attracting widespread attention from the market and "
    "residents. According to data from the National Bureau of Statistics, "
    "the inflation rate has now reached {rate}%."
)

# liquidity knobs enabled for every preset; bare PolicyConfig defaults keep
# them off so the documented trigger rules stand alone
PRESET_PARAMS: dict[str, float] = {
    "noise.base_prob": 0.35,
    "requote.band": 0.03,
}


@dataclass(frozen=True)
class NewsEvent:
    """One broadcast news item; visible from `day` for `persist_days` days."""

    day: int
    headline: str
    body: str
    persist_days: int = 1

    def __post_init__(self) -> None:
        if self.day < 1:
            raise ValueError("news day starts at 1")
        if self.persist_days < 1:
            raise ValueError("persist_days must be >= 1")

    def active_on(self, day: int) -> bool:
        return self.day <= day < self.day + self.persist_days

    @property
    def text(self) -> str:
        return f"{self.headline} {self.body}"

    def to_dict(self) -> dict:
        return {
            "day": self.day,
            "headline": self.headline,
            "body": self.body,
            "persist_days": self.persist_days,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NewsEvent":
        return cls(
            day=int(data["day"]),
            headline=data["headline"],
            body=data["body"],
            persist_days=int(data.get("persist_days", 1)),
        )


@dataclass
class PopulationSpec:
    counts: dict[Strategy, int]
    initial_capital: dict[Strategy, Money] = field(
        default_factory=lambda: dict(DEFAULT_CAPITALS)
    )
    capital_overrides: dict[str, Money] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(count < 0 for count in self.counts.values()):
            raise ValueError("strategy counts must be >= 0")
        if self.total == 0:
            raise EmptyPopulation("population needs at least one agent")

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {
            "counts": {s.value: c for s, c in self.counts.items() if c},
            "initial_capital": {s.value: str(m) for s, m in self.initial_capital.items()},
            "capital_overrides": {a: str(m) for a, m in self.capital_overrides.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PopulationSpec":
        return cls(
            counts={Strategy(k): int(v) for k, v in data["counts"].items()},
            initial_capital={
                Strategy(k): money(v)
                for k, v in data.get(
                    "initial_capital", {s.value: str(m) for s, m in DEFAULT_CAPITALS.items()}
                ).items()
            },
            capital_overrides={
                a: money(v) for a, v in data.get("capital_overrides", {}).items()
            },
        )


@dataclass
class ScenarioSpec:
    name: str
    days: int
    population: PopulationSpec
    news_schedule: list[NewsEvent] = field(default_factory=list)
    policy_config: PolicyConfig = field(default_factory=PolicyConfig)
    endowment_fraction: float = 0.5
    seed: int = 7

    def __post_init__(self) -> None:
        if self.days < 1:
            raise ValueError("scenario must run at least one day")
        if not 0 <= self.endowment_fraction < 1:
            raise ValueError("endowment_fraction must lie in [0, 1)")

    def news_for_day(self, day: int) -> list[NewsEvent]:
        return [event for event in self.news_schedule if event.active_on(day)]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "days": self.days,
            "population": self.population.to_dict(),
            "news_schedule": [event.to_dict() for event in self.news_schedule],
            "policy_config": self.policy_config.to_dict(),
            "endowment_fraction": self.endowment_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioSpec":
        return cls(
            name=data["name"],
            days=int(data["days"]),
            population=PopulationSpec.from_dict(data["population"]),
            news_schedule=[
                NewsEvent.from_dict(event) for event in data.get("news_schedule", [])
            ],
            policy_config=PolicyConfig.from_dict(data.get("policy_config", {})),
            endowment_fraction=float(data.get("endowment_fraction", 0.5)),
            seed=int(data.get("seed", 7)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def ratio_counts(total: int, ratio: Mapping[Strategy, int] = None) -> dict[Strategy, int]:
    """Apportion `total` agents to strategies by largest remainder."""
    if total < 1:
        raise EmptyPopulation("population needs at least one agent")
    if ratio is None:
        ratio = STRATEGY_RATIO
    weight_sum = sum(ratio.values())
    quotas = {s: total * w / weight_sum for s, w in ratio.items()}
    counts = {s: int(q) for s, q in quotas.items()}
    shortfall = total - sum(counts.values())
    by_remainder = sorted(
        ratio, key=lambda s: quotas[s] - counts[s], reverse=True
    )  # ties keep strategy declaration order (sorted is stable)
    for strategy in by_remainder[:shortfall]:
        counts[strategy] += 1
    return counts


def build_population(spec: PopulationSpec) -> list[AgentAccount]:
    """Accounts agent1..agentN, grouped in strategy declaration order."""
    accounts: list[AgentAccount] = []
    index = 1
    for strategy in Strategy:
        for _ in range(spec.counts.get(strategy, 0)):
            agent_id = f"agent{index}"
            capital = spec.capital_overrides.get(
                agent_id, spec.initial_capital[strategy]
            )
            accounts.append(
                AgentAccount(
                    agent_id=agent_id,
                    strategy=strategy,
                    cash=capital,
                    initial_capital=capital,
                )
            )
            index += 1
    if not accounts:
        raise EmptyPopulation("population needs at least one agent")
    return accounts


def initial_endowment(
    accounts: Sequence[AgentAccount], registry: CompanyRegistry, fraction: float
) -> None:
    """Convert a fraction of each agent's cash into shares before day 1.

    The per-agent budget splits equally by value across all stocks at the
    last seeded close, rounds down to whole shares, and leaves the remainder
    in cash.  Each stock's shares_outstanding becomes exactly the total
    endowed, so holdings always sum back to it.
    """
    if not 0 <= fraction < 1:
        raise ValueError("endowment fraction must lie in [0, 1)")
    ratio = Decimal(str(fraction))
    totals = {company.code: 0 for company in registry}
    for account in accounts:
        budget = money(account.initial_capital * ratio / len(registry))
        for company in registry:
            shares = int(budget / company.last_close)
            if shares <= 0:
                continue
            cost = company.last_close * shares
            account.cash -= cost
            account.holdings[company.code] = (
                account.holdings.get(company.code, 0) + shares
            )
            totals[company.code] += shares
    for company in registry:
        company.shares_outstanding = totals[company.code]


_PRESET_NAME = re.compile(r"([a-z_]+)(?:\((.*)\))?$")


def preset_scenario(name: str) -> ScenarioSpec:
    """Build one of the embedded experiment setups by name.

    Names: baseline, rate_cut, inflation(x), all_value, all_aggressive,
    large_trader(m1,m2,...), no_profile, no_observation.
    """
    match = _PRESET_NAME.match(name.strip())
    if not match:
        raise UnknownScenario(f"unknown scenario {name!r}")
    key, raw_args = match.group(1), match.group(2)
    days = 30
    population = PopulationSpec(counts=ratio_counts(10))
    policy = PolicyConfig(params=dict(PRESET_PARAMS))
    news: list[NewsEvent] = []

    if key == "baseline":
        pass
    elif key == "rate_cut":
        news = [
            NewsEvent(day=10, headline=RATE_CUT_HEADLINE, body=RATE_CUT_BODY)
        ]
    elif key == "inflation":
        try:
            rate = float(raw_args)
        except (TypeError, ValueError):
            raise UnknownScenario(
                f"inflation needs a rate, e.g. inflation(8.5); got {name!r}"
            ) from None
        rate_text = f"{rate:g}"
        news = [
            NewsEvent(
                day=1,
                headline=INFLATION_HEADLINE.format(rate=rate_text),
                body=INFLATION_BODY.format(rate=rate_text),
                persist_days=days,  # a standing rate, visible all run
            )
        ]
    elif key == "all_value":
        population = PopulationSpec(counts={Strategy.VALUE: 10})
    elif key == "all_aggressive":
        population = PopulationSpec(counts={Strategy.AGGRESSIVE: 10})
    elif key == "large_trader":
        try:
            multipliers = [
                Decimal(part.strip())
                for part in (raw_args or "").split(",")
                if part.strip()
            ]
        except ArithmeticError:
            multipliers = []
        if not multipliers:
            raise UnknownScenario(
                f"large_trader needs capital multipliers, e.g. large_trader(2,5); got {name!r}"
            )
        accounts = build_population(population)
        overrides = {}
        for i, mult in enumerate(multipliers[: len(accounts)]):
            account = accounts[i]
            overrides[account.agent_id] = money(account.initial_capital * mult)
        population.capital_overrides = overrides
    elif key == "no_profile":
        policy = PolicyConfig(profile_mode="uniform", params=dict(PRESET_PARAMS))
    elif key == "no_observation":
        policy = PolicyConfig(observation_mode="price_only", params=dict(PRESET_PARAMS))
    else:
        raise UnknownScenario(f"unknown scenario {name!r}")

    return ScenarioSpec(
        name=name.strip(),
        days=days,
        population=population,
        news_schedule=news,
        policy_config=policy,
    )


PRESET_NAMES = (
    "baseline",
    "rate_cut",
    "inflation(8.5)",
    "all_value",
    "all_aggressive",
    "large_trader(10)",
    "no_profile",
    "no_observation",
)
