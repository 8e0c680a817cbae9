"""Market metric definitions pinned against hand-computed fixtures."""

import math

import pytest

from asfm.core import Side, Trade, money
from asfm.metrics import (
    DayReport,
    InsufficientData,
    NoOrders,
    average_stock_return,
    executed_volume,
    load_closes,
    load_jsonl,
    market_volatility,
    order_count_execution_rate,
    order_execution_rate,
    order_number,
    placed_volume,
    summarize,
    turnover_rate,
    volatility,
)


def _order_row(day, oid, side, qty, stock="EN001"):
    return {
        "day": day,
        "id": oid,
        "agent_id": f"a{oid}",
        "stock_code": stock,
        "side": side,
        "quantity": qty,
        "limit_price": "10.00",
    }


def _trade(day, seq, qty, buy_id, sell_id, stock="EN001", price="10.00"):
    return Trade(
        seq=seq,
        day=day,
        stock_code=stock,
        price=money(price),
        quantity=qty,
        buy_order_id=buy_id,
        sell_order_id=sell_id,
        buyer_id=f"a{buy_id}",
        seller_id=f"a{sell_id}",
    )


# one crossed 50-share pair plus one untouched 100-share order
ORDERS = [
    _order_row(1, 1, "Buy", 50),
    _order_row(1, 2, "Sell", 50),
    _order_row(1, 3, "Buy", 100),
]
TRADES = [_trade(1, 1, 50, buy_id=1, sell_id=2)]


class TestOrderCounts:
    def test_order_number_counts_accepted_orders(self):
        assert order_number(ORDERS) == 3

    def test_volumes(self):
        assert placed_volume(ORDERS) == 200
        assert executed_volume(TRADES) == 50

    def test_execution_rate_by_shares(self):
        assert order_execution_rate(ORDERS, TRADES) == pytest.approx(0.25)

    def test_execution_rate_by_orders(self):
        # the trade touches 2 of the 3 orders
        assert order_count_execution_rate(ORDERS, TRADES) == pytest.approx(2 / 3)

    def test_fully_crossed_pair_rates(self):
        orders = ORDERS[:2]
        assert order_execution_rate(orders, TRADES) == pytest.approx(0.5)
        assert order_count_execution_rate(orders, TRADES) == pytest.approx(1.0)

    def test_no_orders_raises(self):
        with pytest.raises(NoOrders):
            order_execution_rate([], [])

    def test_day_range_is_inclusive(self):
        orders = [_order_row(d, d, "Buy", 10) for d in (1, 2, 3, 4)]
        assert order_number(orders, (2, 3)) == 2
        assert placed_volume(orders, (2, 3)) == 20
        trades = [_trade(d, d, 5, buy_id=d, sell_id=d + 10) for d in (1, 2, 3, 4)]
        assert executed_volume(trades, (2, 3)) == 10

    def test_works_on_objects_and_dicts(self):
        # artifact rows are dicts, engine output is dataclasses; both count
        assert executed_volume(TRADES) == executed_volume(
            [{"day": 1, "quantity": 50, "stock_code": "EN001"}]
        )


class TestTurnover:
    def test_market_wide(self):
        trades = [
            _trade(1, 1, 150, 1, 2, stock="EN001"),
            _trade(1, 2, 100, 3, 4, stock="MA002"),
        ]
        outstanding = {"EN001": 50, "MA002": 50}
        assert turnover_rate(trades, outstanding) == pytest.approx(2.5)

    def test_single_stock(self):
        trades = [_trade(1, 1, 150, 1, 2, stock="EN001")]
        outstanding = {"EN001": 50, "MA002": 50}
        assert turnover_rate(trades, outstanding, stock="EN001") == pytest.approx(3.0)

    def test_range_filter(self):
        trades = [_trade(d, d, 10, 1, 2) for d in (1, 2, 3)]
        assert turnover_rate(trades, {"EN001": 100}, (2, 3)) == pytest.approx(0.2)

    def test_zero_outstanding_rejected(self):
        with pytest.raises(ValueError):
            turnover_rate([], {"EN001": 0})


class TestVolatility:
    def test_exact_two_sided_swing(self):
        # returns +20% then -20%: mean 0, population std exactly 0.2
        assert volatility(["10.00", "12.00", "9.60"]) == pytest.approx(0.2, abs=1e-12)

    def test_single_return_has_zero_spread(self):
        assert volatility(["10.00", "11.00"]) == pytest.approx(0.0, abs=1e-12)

    def test_matches_the_definition(self):
        closes = [money(p) for p in ("10.00", "10.20", "10.50", "10.35", "10.60")]
        values = [float(c) for c in closes]
        returns = [b / a - 1.0 for a, b in zip(values, values[1:])]
        mean = sum(returns) / len(returns)
        expected = math.sqrt(sum((r - mean) ** 2 for r in returns) / len(returns))
        assert volatility(closes) == pytest.approx(expected, abs=1e-15)

    def test_needs_two_closes(self):
        with pytest.raises(InsufficientData):
            volatility(["10.00"])

    def test_market_mean_is_unweighted(self):
        series = {
            "EN001": ["10.00", "12.00", "9.60"],  # vol 0.2
            "MA002": ["10.00", "10.00", "10.00"],  # vol 0.0
        }
        assert market_volatility(series) == pytest.approx(0.1, abs=1e-12)

    def test_market_weights(self):
        series = {
            "EN001": ["10.00", "12.00", "9.60"],
            "MA002": ["10.00", "10.00", "10.00"],
        }
        weighted = market_volatility(series, weights={"EN001": 3, "MA002": 1})
        assert weighted == pytest.approx(0.15, abs=1e-12)


class TestAverageReturn:
    def test_mean_over_stocks(self):
        series = {"EN001": ["10.00", "11.00"], "MA002": ["10.00", "9.00"]}
        assert average_stock_return(series) == pytest.approx(0.0, abs=1e-12)

    def test_base_and_end_indexes(self):
        series = {"EN001": ["10.00", "10.50", "12.00"]}
        assert average_stock_return(series, 1, 2) == pytest.approx(
            12.0 / 10.5 - 1.0, abs=1e-12
        )


class TestDayReport:
    def _report(self, placed, executed):
        return DayReport(
            day=1,
            closes={},
            stock_volume={},
            order_count=2,
            placed=placed,
            executed=executed,
            turnover=0.0,
            vol=0.0,
            avg_return=0.0,
        )

    def test_oer(self):
        assert self._report(200, 50).oer == pytest.approx(0.25)

    def test_quiet_day_has_no_rate(self):
        assert self._report(0, 0).oer is None


class TestRunReaders:
    def test_load_jsonl_skips_blanks(self, tmp_path):
        path = tmp_path / "rows.jsonl"
        path.write_text('{"a": 1}\n\n{"a": 2}\n', encoding="utf-8")
        assert load_jsonl(path) == [{"a": 1}, {"a": 2}]

    def test_load_closes(self, tmp_path):
        path = tmp_path / "closes.csv"
        path.write_text(
            "day,EN001,MA002\n0,10.60,20.00\n1,10.70,19.90\n", encoding="utf-8"
        )
        series = load_closes(path)
        assert series["EN001"] == [money("10.60"), money("10.70")]
        assert series["MA002"][1] == money("19.90")

    def test_load_closes_rejects_gaps(self, tmp_path):
        path = tmp_path / "closes.csv"
        path.write_text("day,EN001\n0,10.60\n2,10.70\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_closes(path)

    def test_load_closes_needs_day_header(self, tmp_path):
        path = tmp_path / "closes.csv"
        path.write_text("date,EN001\n0,10.60\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_closes(path)


class TestSummarize:
    SERIES = {
        "EN001": ["10.00", "12.00", "9.60"],
        "MA002": ["10.00", "10.00", "10.00"],
    }

    def test_whole_run(self):
        values = summarize(ORDERS, TRADES, self.SERIES, {"EN001": 100, "MA002": 100})
        assert values["order_number"] == 3
        assert values["order_execution_rate"] == pytest.approx(0.25)
        assert values["turnover_rate"] == pytest.approx(50 / 200)
        assert values["volatility"] == pytest.approx(0.1, abs=1e-12)
        assert values["average_stock_return"] == pytest.approx(-0.02, abs=1e-12)

    def test_range_slices_the_close_series(self):
        orders = [_order_row(2, 9, "Buy", 40)]
        values = summarize(
            orders, [], self.SERIES, {"EN001": 100, "MA002": 100}, day_range=(2, 2)
        )
        # day 2 return: 9.60 / 12.00 - 1 = -20% for EN001, flat for MA002
        assert values["average_stock_return"] == pytest.approx(-0.1, abs=1e-12)
        assert values["order_number"] == 1
        assert values["order_execution_rate"] == pytest.approx(0.0)
