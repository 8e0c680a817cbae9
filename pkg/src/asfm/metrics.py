"""The four market metrics plus return series, over live objects or run logs.

Every function accepts either the in-memory domain objects or the plain dict
records parsed back from a run directory, so the values computed online
during a run can be re-derived independently from the persisted artifacts.

Definitions: ON counts accepted buy/sell orders.  OER is executed share
volume over placed share volume (an alternate order-count reading is also
provided).  TR is traded shares over shares outstanding and may exceed 1.
VO is the population standard deviation of daily simple returns, averaged
unweighted across stocks for the market figure.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import MarketError, Money


class NoOrders(MarketError):
    """OER is undefined when nothing was placed in the range."""


class InsufficientData(MarketError):
    """Volatility needs at least two closes."""


def _get(record, name):
    if isinstance(record, Mapping):
        return record[name]
    return getattr(record, name)


def _in_range(record, day_range: tuple[int, int] | None) -> bool:
    if day_range is None:
        return True
    first, last = day_range
    return first <= _get(record, "day") <= last


def order_number(orders: Iterable, day_range: tuple[int, int] | None = None) -> int:
    """Count of accepted Buy/Sell orders (Hold never reaches the log)."""
    return sum(1 for order in orders if _in_range(order, day_range))


def placed_volume(orders: Iterable, day_range: tuple[int, int] | None = None) -> int:
    return sum(
        int(_get(order, "quantity")) for order in orders if _in_range(order, day_range)
    )


def executed_volume(trades: Iterable, day_range: tuple[int, int] | None = None) -> int:
    return sum(
        int(_get(trade, "quantity")) for trade in trades if _in_range(trade, day_range)
    )


def order_execution_rate(
    orders: Iterable, trades: Iterable, day_range: tuple[int, int] | None = None
) -> float:
    """Executed share volume over placed share volume, in [0, 1].

    Each trade's quantity counts once against the placed quantities of both
    participating orders, so a fully crossed pair yields 0.5 with no other
    flow present.
    """
    placed = placed_volume(orders, day_range)
    if placed == 0:
        raise NoOrders("no placed volume in range")
    return executed_volume(trades, day_range) / placed


def order_count_execution_rate(
    orders: Iterable, trades: Iterable, day_range: tuple[int, int] | None = None
) -> float:
    """Alternate reading: fraction of orders that got at least one fill."""
    order_ids = {
        _get(order, "id") for order in orders if _in_range(order, day_range)
    }
    if not order_ids:
        raise NoOrders("no orders in range")
    touched = set()
    for trade in trades:
        if _in_range(trade, day_range):
            touched.add(_get(trade, "buy_order_id"))
            touched.add(_get(trade, "sell_order_id"))
    return len(order_ids & touched) / len(order_ids)


def turnover_rate(
    trades: Iterable,
    shares_outstanding: Mapping[str, int],
    day_range: tuple[int, int] | None = None,
    stock: str | None = None,
) -> float:
    """Traded shares over shares outstanding; above 1 means full churn."""
    if stock is None:
        outstanding = sum(shares_outstanding.values())
    else:
        outstanding = shares_outstanding[stock]
    if outstanding <= 0:
        raise ValueError("shares outstanding must be positive for turnover")
    volume = sum(
        int(_get(trade, "quantity"))
        for trade in trades
        if _in_range(trade, day_range)
        and (stock is None or _get(trade, "stock_code") == stock)
    )
    return volume / outstanding


def volatility(closes: Sequence) -> float:
    """Population standard deviation of the series' daily simple returns."""
    if len(closes) < 2:
        raise InsufficientData("volatility needs at least two closes")
    values = np.array([float(c) for c in closes], dtype=float)
    returns = values[1:] / values[:-1] - 1.0
    return float(np.std(returns))


def market_volatility(
    close_series: Mapping[str, Sequence], weights: Mapping[str, float] | None = None
) -> float:
    """Mean per-stock volatility; optional weights for a weighted mean."""
    if not close_series:
        raise InsufficientData("no close series given")
    vols = {code: volatility(series) for code, series in close_series.items()}
    if weights is None:
        return float(np.mean(list(vols.values())))
    total = sum(weights.get(code, 0.0) for code in vols)
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    return sum(vols[code] * weights.get(code, 0.0) for code in vols) / total


def average_stock_return(
    close_series: Mapping[str, Sequence], base_index: int = 0, index: int = -1
) -> float:
    """Mean over stocks of close[index] / close[base_index] - 1."""
    if not close_series:
        raise InsufficientData("no close series given")
    returns = [
        float(series[index]) / float(series[base_index]) - 1.0
        for series in close_series.values()
    ]
    return float(np.mean(returns))


@dataclass
class DayReport:
    """Everything the daily metrics row and the day's audit need."""

    day: int
    closes: dict[str, Money]
    stock_volume: dict[str, int]
    order_count: int
    placed: int
    executed: int
    turnover: float
    vol: float
    avg_return: float
    agent_assets: dict[str, Money] = field(default_factory=dict)
    agent_returns: dict[str, float] = field(default_factory=dict)

    @property
    def oer(self) -> float | None:
        return self.executed / self.placed if self.placed else None


# --- run-directory readers (the documented artifact schemas) ---------------


def load_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def load_closes(path: str | Path) -> dict[str, list[Decimal]]:
    """closes.csv -> code -> [close day 0, close day 1, ...] (day 0 = base)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:1] != ["day"]:
            raise ValueError("closes file must start with a 'day' column")
        codes = header[1:]
        series: dict[str, list[Decimal]] = {code: [] for code in codes}
        expected = 0
        for row in reader:
            if int(row[0]) != expected:
                raise ValueError("closes file must list consecutive days from 0")
            expected += 1
            for code, cell in zip(codes, row[1:]):
                series[code].append(Decimal(cell))
    return series


def summarize(
    orders: Iterable[Mapping],
    trades: Iterable[Mapping],
    close_series: Mapping[str, Sequence],
    shares_outstanding: Mapping[str, int],
    day_range: tuple[int, int] | None = None,
) -> dict:
    """Whole-run (or range) headline metrics from the raw logs."""
    orders = list(orders)
    trades = list(trades)
    if day_range is None:
        sliced = {code: list(series) for code, series in close_series.items()}
    else:
        first, last = day_range
        # closes index d is day d's close; include day first-1 as the base
        sliced = {
            code: list(series[max(first - 1, 0) : last + 1])
            for code, series in close_series.items()
        }
    try:
        oer = order_execution_rate(orders, trades, day_range)
    except NoOrders:
        oer = None
    return {
        "order_number": order_number(orders, day_range),
        "order_execution_rate": oer,
        "turnover_rate": turnover_rate(trades, shares_outstanding, day_range),
        "volatility": market_volatility(sliced),
        "average_stock_return": average_stock_return(sliced),
    }
