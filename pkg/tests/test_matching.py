"""Auction and continuous matching: worked examples plus oracle spot checks.

The full 1000-case oracle equivalence runs live in test_acceptance.py; here a
smaller seeded sample guards the same properties during development.
"""

import random
from decimal import Decimal

import pytest

from asfm.core import OrderBook, Side, money
from asfm.matching import (
    call_auction,
    closing_price,
    continuous_match,
    indicative_snapshot,
    midpoint_price,
)

from helpers import book_from, make_order, order_spec, random_auction_orders
from reference import reference_call_auction


class TestMidpoint:
    def test_half_cent_rounds_up(self):
        assert midpoint_price(money("10.15"), money("10.20")) == money("10.18")

    def test_plain_mean(self):
        assert midpoint_price(money("10.00"), money("10.40")) == money("10.20")

    def test_equal_limits(self):
        assert midpoint_price(money("10.50"), money("10.50")) == money("10.50")


class TestCallAuction:
    def test_partial_fill_leaves_residual_ask(self):
        sell = make_order(1, "Sell", 100, "10.00", agent="a2")
        buy = make_order(2, "Buy", 50, "10.40", agent="a1")
        result = call_auction(book_from([sell, buy]), day=1)
        assert [(t.price, t.quantity) for t in result.trades] == [(money("10.20"), 50)]
        assert result.trades[0].buy_order_id == 2
        assert result.trades[0].sell_order_id == 1
        assert sell.remaining == 50
        assert [o.id for o in result.book.asks] == [1]
        assert not result.book.bids

    def test_non_crossing_book_stops(self):
        result = call_auction(
            book_from(
                [
                    make_order(1, "Sell", 100, "10.50", agent="a2"),
                    make_order(2, "Buy", 100, "10.40", agent="a1"),
                ]
            ),
            day=1,
        )
        assert result.trades == []
        assert len(result.book) == 2

    def test_sequential_pairing_and_priority(self):
        a = make_order(1, "Sell", 30, "10.00", agent="a2")
        b = make_order(2, "Sell", 30, "10.10", agent="a3")
        c = make_order(3, "Buy", 50, "10.30", agent="a1")
        result = call_auction(book_from([a, b, c]), day=1)
        assert [(t.price, t.quantity) for t in result.trades] == [
            (money("10.15"), 30),
            (money("10.20"), 20),
        ]
        assert b.remaining == 10
        assert [o.id for o in result.book.asks] == [2]
        assert not result.book.bids

    def test_equal_limits_cross(self):
        result = call_auction(
            book_from(
                [
                    make_order(1, "Sell", 10, "10.50", agent="a2"),
                    make_order(2, "Buy", 10, "10.50", agent="a1"),
                ]
            ),
            day=1,
        )
        assert [(t.price, t.quantity) for t in result.trades] == [(money("10.50"), 10)]

    def test_same_agent_best_pair_cancels_later(self):
        sell = make_order(1, "Sell", 10, "10.00", agent="a1")
        buy = make_order(2, "Buy", 10, "10.40", agent="a1")
        other = make_order(3, "Buy", 10, "10.20", agent="a2")
        result = call_auction(book_from([sell, buy, other]), day=1)
        assert [o.id for o in result.cancelled] == [2]
        assert [(t.buy_order_id, t.sell_order_id) for t in result.trades] == [(3, 1)]
        assert result.trades[0].price == money("10.10")

    def test_empty_book(self):
        result = call_auction(OrderBook("EN001"), day=1)
        assert result.trades == [] and result.cancelled == []

    def test_trade_seq_increments(self):
        orders = [
            make_order(1, "Sell", 10, "10.00", agent="a2"),
            make_order(2, "Sell", 10, "10.00", agent="a3"),
            make_order(3, "Buy", 20, "10.20", agent="a1"),
        ]
        result = call_auction(book_from(orders), day=3, first_trade_seq=7)
        assert [t.seq for t in result.trades] == [7, 8]
        assert all(t.day == 3 for t in result.trades)


class TestContinuousMatch:
    def test_fills_at_resting_price_then_rests(self):
        book = book_from([make_order(1, "Sell", 50, "10.00", agent="a2")])
        incoming = make_order(2, "Buy", 80, "10.10", agent="a1")
        result = continuous_match(book, incoming, day=1)
        assert [(t.price, t.quantity) for t in result.trades] == [(money("10.00"), 50)]
        assert incoming.remaining == 30
        assert book.best_bid() == money("10.10")
        assert not book.asks
        assert result.rejected_remainder is None

    def test_empty_book_rests(self):
        book = OrderBook("EN001")
        incoming = make_order(1, "Sell", 10, "9.90", agent="a1")
        result = continuous_match(book, incoming, day=1)
        assert result.trades == []
        assert book.best_ask() == money("9.90")

    def test_time_priority_at_same_price(self):
        book = book_from(
            [
                make_order(1, "Buy", 40, "10.00", agent="a2"),
                make_order(2, "Buy", 40, "10.00", agent="a3"),
            ]
        )
        incoming = make_order(3, "Sell", 60, "9.95", agent="a1")
        result = continuous_match(book, incoming, day=1)
        assert [(t.buy_order_id, t.price, t.quantity) for t in result.trades] == [
            (1, money("10.00"), 40),
            (2, money("10.00"), 20),
        ]
        assert book.bids[0].id == 2 and book.bids[0].remaining == 20

    def test_skips_own_resting_order(self):
        own = make_order(1, "Sell", 10, "10.00", agent="a1")
        other = make_order(2, "Sell", 10, "10.05", agent="a2")
        book = book_from([own, other])
        incoming = make_order(3, "Buy", 10, "10.10", agent="a1")
        result = continuous_match(book, incoming, day=1)
        assert [(t.sell_order_id, t.price) for t in result.trades] == [
            (2, money("10.05"))
        ]
        assert own.remaining == 10

    def test_remainder_crossing_own_order_is_rejected(self):
        own = make_order(1, "Sell", 10, "10.00", agent="a1")
        book = book_from([own])
        incoming = make_order(2, "Buy", 10, "10.10", agent="a1")
        result = continuous_match(book, incoming, day=1)
        assert result.trades == []
        assert result.rejected_remainder is incoming
        assert not book.bids  # never rests crossed against own ask
        assert not book.is_crossed()

    def test_midpoint_price_rule(self):
        book = book_from([make_order(1, "Sell", 50, "10.00", agent="a2")])
        incoming = make_order(2, "Buy", 50, "10.05", agent="a1")
        result = continuous_match(book, incoming, day=1, price_rule="midpoint")
        assert [t.price for t in result.trades] == [money("10.03")]  # 10.025 half up

    def test_unknown_price_rule(self):
        with pytest.raises(ValueError):
            continuous_match(
                OrderBook("EN001"),
                make_order(1, "Buy", 1, "10.00"),
                day=1,
                price_rule="vwap",
            )


class TestIndicativeSnapshot:
    def test_aggregates_equal_prices(self):
        book = book_from(
            [
                make_order(1, "Buy", 40, "10.00", agent="a1"),
                make_order(2, "Buy", 40, "10.00", agent="a2"),
                make_order(3, "Buy", 10, "9.90", agent="a3"),
            ]
        )
        quote = indicative_snapshot(book, depth=2)
        assert quote.bid_levels == ((money("10.00"), 80), (money("9.90"), 10))
        assert quote.ask_levels == ()

    def test_empty_book(self):
        quote = indicative_snapshot(OrderBook("EN001"), depth=5)
        assert quote.bid_levels == () and quote.ask_levels == ()
        assert quote.best_bid is None and quote.best_ask is None

    def test_depth_truncates(self):
        book = book_from([make_order(1, "Sell", 5, "10.05", agent="a1")])
        quote = indicative_snapshot(book, depth=3)
        assert quote.ask_levels == ((money("10.05"), 5),)

    def test_bad_depth(self):
        with pytest.raises(ValueError):
            indicative_snapshot(OrderBook("EN001"), depth=0)


class TestClosingPrice:
    def _trades(self, *price_qty):
        out = []
        for i, (price, qty) in enumerate(price_qty):
            book = OrderBook("EN001")
            book.insert(make_order(100 + i * 2, "Sell", qty, price, agent="a2"))
            buy = make_order(101 + i * 2, "Buy", qty, "999.00", agent="a1")
            result = continuous_match(book, buy, day=1, first_trade_seq=i)
            out.extend(result.trades)
        return out

    def test_volume_weighted(self):
        trades = self._trades(("10.20", 50), ("10.15", 30))
        assert closing_price(trades, money("10.00")) == money("10.18")

    def test_carry_forward(self):
        assert closing_price([], money("10.60")) == money("10.60")

    def test_single_trade(self):
        trades = self._trades(("102.00", 10))
        assert closing_price(trades, money("1.00")) == money("102.00")

    def test_simple_average_variant(self):
        trades = self._trades(("10.20", 50), ("10.15", 30))
        assert closing_price(trades, money("10.00"), method="simple") == money("10.18")
        trades = self._trades(("10.00", 1), ("10.05", 99))
        assert closing_price(trades, money("10.00"), method="simple") == money("10.03")
        assert closing_price(trades, money("10.00"), method="vwap") == money("10.05")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            closing_price([], money("10.00"), method="mean")


class TestOracleSample:
    """Seeded 100-case sample of the acceptance oracle loop."""

    def test_auction_matches_reference(self):
        rng = random.Random(20260814)
        for _ in range(100):
            orders = random_auction_orders(rng)
            specs = [order_spec(o) for o in orders]
            result = call_auction(book_from(orders), day=1)
            ref_trades, ref_remaining, ref_cancelled = reference_call_auction(specs)
            assert [
                (t.buy_order_id, t.sell_order_id, t.price, t.quantity)
                for t in result.trades
            ] == ref_trades
            assert {o.id: o.remaining for o in result.book.live_orders()} == {
                oid: rem
                for oid, rem in ref_remaining.items()
                if rem > 0 and oid not in ref_cancelled
            }
            assert [o.id for o in result.cancelled] == ref_cancelled
            assert not result.book.is_crossed()
