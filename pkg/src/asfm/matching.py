"""Opening call auction and continuous matching over single-stock books.

Both matchers consume the book they are given: order `remaining` counts are
decremented in place and filled orders are removed, so the caller settles
escrow from the returned trades and keeps using the same book afterwards.

Call auction: repeatedly pair the lowest ask with the highest bid, trade the
smaller remaining quantity at the half-up-rounded midpoint of the two limits,
and stop when either side is empty or the lowest ask is strictly above the
highest bid (equal limits do cross).  Ties at a price break by submission seq.

Continuous matching: an incoming order fills against crossing resting orders
in price-time priority at the *resting* order's limit; any remainder rests in
the book under its own seq.

Neither matcher will leave a book crossed, even against the same trader's own
orders: the auction cancels the later of a same-owner best pair (reported in
`cancelled`), and continuous matching skips the owner's resting orders and
refuses to rest a remainder that would cross one (reported as
`rejected_remainder`).  Callers release escrow for both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Money, Order, OrderBook, Side, Trade, money


def midpoint_price(ask_price: Money, bid_price: Money) -> Money:
    """Trade price for an auction pair: mean of the two limits, half up."""
    return money((ask_price + bid_price) / 2)


@dataclass
class AuctionResult:
    trades: list[Trade]
    book: OrderBook  # residual orders after the auction
    cancelled: list[Order] = field(default_factory=list)


@dataclass
class MatchResult:
    trades: list[Trade]
    rejected_remainder: Order | None = None


def call_auction(book: OrderBook, *, day: int, first_trade_seq: int = 0) -> AuctionResult:
    """Run the opening auction on a book, pairing best ask with best bid."""
    trades: list[Trade] = []
    cancelled: list[Order] = []
    seq = first_trade_seq
    while book.bids and book.asks:
        bid, ask = book.bids[0], book.asks[0]
        if ask.limit_price > bid.limit_price:
            break
        if bid.agent_id == ask.agent_id:
            # the owner would trade with themselves; drop the later order
            later = bid if bid.seq > ask.seq else ask
            if later is bid:
                book.bids.pop(0)
            else:
                book.asks.pop(0)
            cancelled.append(later)
            continue
        quantity = min(bid.remaining, ask.remaining)
        price = midpoint_price(ask.limit_price, bid.limit_price)
        bid.remaining -= quantity
        ask.remaining -= quantity
        trades.append(
            Trade(
                seq=seq,
                day=day,
                stock_code=book.stock_code,
                price=price,
                quantity=quantity,
                buy_order_id=bid.id,
                sell_order_id=ask.id,
                buyer_id=bid.agent_id,
                seller_id=ask.agent_id,
            )
        )
        seq += 1
        if bid.remaining == 0:
            book.bids.pop(0)
        if ask.remaining == 0:
            book.asks.pop(0)
    return AuctionResult(trades=trades, book=book, cancelled=cancelled)


def _crosses(incoming: Order, resting: Order) -> bool:
    if incoming.side is Side.BUY:
        return resting.limit_price <= incoming.limit_price
    return resting.limit_price >= incoming.limit_price


def continuous_match(
    book: OrderBook,
    incoming: Order,
    *,
    day: int,
    first_trade_seq: int = 0,
    price_rule: str = "resting",
) -> MatchResult:
    """Match one incoming order against the book, resting any remainder.

    price_rule "resting" (default) fills at the resting order's limit;
    "midpoint" fills at the half-up midpoint of the two limits, for
    sensitivity runs.
    """
    if incoming.stock_code != book.stock_code:
        raise ValueError(
            f"order for {incoming.stock_code} routed to book {book.stock_code}"
        )
    if price_rule not in ("resting", "midpoint"):
        raise ValueError(f"unknown price rule {price_rule!r}")
    trades: list[Trade] = []
    seq = first_trade_seq
    opposite = book.asks if incoming.side is Side.BUY else book.bids
    i = 0
    while incoming.remaining > 0 and i < len(opposite):
        resting = opposite[i]
        if not _crosses(incoming, resting):
            break
        if resting.agent_id == incoming.agent_id:
            i += 1
            continue
        quantity = min(incoming.remaining, resting.remaining)
        incoming.remaining -= quantity
        resting.remaining -= quantity
        if incoming.side is Side.BUY:
            buy, sell = incoming, resting
        else:
            buy, sell = resting, incoming
        if price_rule == "resting":
            price = resting.limit_price
        else:
            price = midpoint_price(sell.limit_price, buy.limit_price)
        trades.append(
            Trade(
                seq=seq,
                day=day,
                stock_code=book.stock_code,
                price=price,
                quantity=quantity,
                buy_order_id=buy.id,
                sell_order_id=sell.id,
                buyer_id=buy.agent_id,
                seller_id=sell.agent_id,
            )
        )
        seq += 1
        if resting.remaining == 0:
            opposite.pop(i)
    rejected: Order | None = None
    if incoming.remaining > 0:
        own_cross = any(
            o.agent_id == incoming.agent_id and _crosses(incoming, o)
            for o in opposite
        )
        if own_cross:
            rejected = incoming
        else:
            book.insert(incoming)
    return MatchResult(trades=trades, rejected_remainder=rejected)


@dataclass(frozen=True)
class IndicativeQuote:
    """Aggregated unmatched interest on one stock, best levels first."""

    stock_code: str
    bid_levels: tuple[tuple[Money, int], ...]
    ask_levels: tuple[tuple[Money, int], ...]

    @property
    def best_bid(self) -> Money | None:
        return self.bid_levels[0][0] if self.bid_levels else None

    @property
    def best_ask(self) -> Money | None:
        return self.ask_levels[0][0] if self.ask_levels else None


def _aggregate_levels(orders: list[Order], depth: int) -> tuple[tuple[Money, int], ...]:
    levels: list[tuple[Money, int]] = []
    for order in orders:  # already in priority order, equal prices adjacent
        if levels and levels[-1][0] == order.limit_price:
            levels[-1] = (order.limit_price, levels[-1][1] + order.remaining)
        elif len(levels) < depth:
            levels.append((order.limit_price, order.remaining))
        else:
            break
    return tuple(levels)


def indicative_snapshot(book: OrderBook, depth: int = 5) -> IndicativeQuote:
    """Visible quote levels for the unmatched orders in a book."""
    if depth <= 0:
        raise ValueError("depth must be positive")
    return IndicativeQuote(
        stock_code=book.stock_code,
        bid_levels=_aggregate_levels(book.bids, depth),
        ask_levels=_aggregate_levels(book.asks, depth),
    )


def closing_price(trades: list[Trade], prev_close: Money, method: str = "vwap") -> Money:
    """Close for the day: mean of the day's trade prices, else carry forward.

    "vwap" weights each trade by its quantity; "simple" averages the trade
    prices unweighted.  With no trades the previous close carries forward.
    """
    if method not in ("vwap", "simple"):
        raise ValueError(f"unknown closing method {method!r}")
    if not trades:
        return prev_close
    if method == "vwap":
        volume = sum(t.quantity for t in trades)
        notional = sum((t.price * t.quantity for t in trades), Money(0))
        return money(notional / volume)
    return money(sum((t.price for t in trades), Money(0)) / len(trades))
