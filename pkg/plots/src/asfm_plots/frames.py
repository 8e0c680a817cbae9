"""Tabular views over a finished simulation run directory.

The simulator documents a fixed artifact set per run. This module loads
the files the plot layer needs and validates their schemas up front, so
a renamed column or a missing file fails loudly instead of silently
mislabeling a figure. Run directories are only ever read.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class MissingArtifact(Exception):
    """A required run artifact file is absent."""


class SchemaMismatch(Exception):
    """An artifact file does not match the documented schema."""


METRIC_COLUMNS = (
    "day",
    "order_number",
    "order_execution_rate",
    "turnover_rate",
    "volatility",
    "average_stock_return",
)

SUMMARY_KEYS = (
    "run_id",
    "days",
    "order_number",
    "order_execution_rate",
    "turnover_rate",
    "volatility",
    "average_stock_return",
    "agent_returns",
)


@dataclass(frozen=True)
class RunFrame:
    """Everything the figures need, parsed and schema-checked."""

    run_dir: Path
    run_id: str
    days: int
    summary: dict
    agent_ids: tuple[str, ...]
    # column name -> per-day series, day 1 first; OER entries may be None
    metrics: dict[str, list]
    # agent id -> return-to-date series, day 1 first
    agent_curves: dict[str, list[float]]
    # stock code -> close series, day 0 (seeded base) first
    closes: dict[str, list[float]]
    sectors: dict[str, str]
    initial_capital: dict[str, float]

    def final_returns(self) -> dict[str, float]:
        return {agent: self.summary["agent_returns"][agent] for agent in self.agent_ids}


def _read_text(run_dir: Path, name: str) -> str:
    path = run_dir / name
    if not path.exists():
        raise MissingArtifact(f"{name} not found in {run_dir}")
    return path.read_text(encoding="utf-8")


def _load_summary(run_dir: Path) -> dict:
    try:
        summary = json.loads(_read_text(run_dir, "summary.json"))
    except ValueError as exc:
        raise SchemaMismatch(f"summary.json is not valid JSON: {exc}") from exc
    missing = [key for key in SUMMARY_KEYS if key not in summary]
    if missing:
        raise SchemaMismatch(f"summary.json lacks keys {missing}")
    return summary


def _load_metrics(run_dir: Path):
    rows = list(csv.reader(_read_text(run_dir, "metrics.csv").splitlines()))
    if not rows:
        raise SchemaMismatch("metrics.csv is empty")
    header = tuple(rows[0])
    if header[: len(METRIC_COLUMNS)] != METRIC_COLUMNS:
        raise SchemaMismatch(
            f"metrics.csv columns open with {header[:len(METRIC_COLUMNS)]}, "
            f"expected {METRIC_COLUMNS}"
        )
    agent_ids = header[len(METRIC_COLUMNS):]
    if not agent_ids:
        raise SchemaMismatch("metrics.csv carries no agent return columns")

    metrics: dict[str, list] = {name: [] for name in METRIC_COLUMNS}
    curves: dict[str, list[float]] = {agent: [] for agent in agent_ids}
    for expected_day, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise SchemaMismatch(f"metrics.csv row {expected_day} is ragged")
        if int(row[0]) != expected_day:
            raise SchemaMismatch("metrics.csv must list consecutive days from 1")
        metrics["day"].append(expected_day)
        metrics["order_number"].append(int(row[1]))
        for name, cell in zip(METRIC_COLUMNS[2:], row[2:]):
            metrics[name].append(float(cell) if cell else None)
        for agent, cell in zip(agent_ids, row[len(METRIC_COLUMNS):]):
            curves[agent].append(float(cell))
    if not metrics["day"]:
        raise SchemaMismatch("metrics.csv holds no data rows")
    return agent_ids, metrics, curves


def _load_closes(run_dir: Path) -> dict[str, list[float]]:
    rows = list(csv.reader(_read_text(run_dir, "closes.csv").splitlines()))
    if not rows or rows[0][:1] != ["day"]:
        raise SchemaMismatch("closes.csv must start with a 'day' column")
    codes = rows[0][1:]
    if not codes:
        raise SchemaMismatch("closes.csv carries no stock columns")
    series: dict[str, list[float]] = {code: [] for code in codes}
    for expected_day, row in enumerate(rows[1:]):
        if len(row) != len(rows[0]):
            raise SchemaMismatch(f"closes.csv row {expected_day} is ragged")
        if int(row[0]) != expected_day:
            raise SchemaMismatch("closes.csv must list consecutive days from 0")
        for code, cell in zip(codes, row[1:]):
            series[code].append(float(cell))
    if any(len(s) < 2 for s in series.values()):
        raise SchemaMismatch("closes.csv needs the base row plus at least one day")
    return series


def _load_sectors(run_dir: Path, codes) -> dict[str, str]:
    try:
        companies = json.loads(_read_text(run_dir, "companies.json"))
    except ValueError as exc:
        raise SchemaMismatch(f"companies.json is not valid JSON: {exc}") from exc
    try:
        sectors = {company["code"]: company["sector"] for company in companies}
    except (TypeError, KeyError) as exc:
        raise SchemaMismatch("companies.json rows need code and sector") from exc
    if set(sectors) != set(codes):
        raise SchemaMismatch("companies.json and closes.csv list different stocks")
    return sectors


def _load_capitals(run_dir: Path, agent_ids) -> dict[str, float]:
    """Per-agent starting capital from the configuration snapshot.

    Agents are numbered agent1..agentN strategy by strategy in the order
    the population block lists them, with explicit per-agent overrides
    applied last; that is the documented numbering the other artifacts
    (metrics columns, summary keys) already use.
    """
    try:
        config = json.loads(_read_text(run_dir, "config.json"))
        population = config["scenario"]["population"]
        counts = population["counts"]
        per_strategy = population["initial_capital"]
        overrides = population.get("capital_overrides", {})
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaMismatch(f"config.json lacks the population block: {exc}") from exc

    capitals: dict[str, float] = {}
    number = 1
    for strategy, count in counts.items():
        for _ in range(int(count)):
            capitals[f"agent{number}"] = float(per_strategy[strategy])
            number += 1
    for agent, capital in overrides.items():
        capitals[agent] = float(capital)
    if set(capitals) != set(agent_ids):
        raise SchemaMismatch(
            "config.json population does not produce the metrics.csv agent columns"
        )
    return capitals


def load_run(run_dir) -> RunFrame:
    """Load and schema-check one run directory."""
    run_dir = Path(run_dir)
    summary = _load_summary(run_dir)
    agent_ids, metrics, curves = _load_metrics(run_dir)
    if set(agent_ids) != set(summary["agent_returns"]):
        raise SchemaMismatch("metrics.csv and summary.json disagree on agents")
    closes = _load_closes(run_dir)
    sectors = _load_sectors(run_dir, closes.keys())
    capitals = _load_capitals(run_dir, agent_ids)
    return RunFrame(
        run_dir=run_dir,
        run_id=str(summary["run_id"]),
        days=int(summary["days"]),
        summary=summary,
        agent_ids=agent_ids,
        metrics=metrics,
        agent_curves=curves,
        closes=closes,
        sectors=sectors,
        initial_capital=capitals,
    )
