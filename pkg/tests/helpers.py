"""Shared builders and random case generators for the test suite."""

from decimal import Decimal
import random

from asfm.core import Order, OrderBook, Side, money

TICK = Decimal("0.05")
GRID_BASE = Decimal("10.00")
GRID_LEVELS = 20  # prices 10.00, 10.05, ... 10.95
AGENT_POOL = ("a1", "a2", "a3", "a4")


def make_order(
    oid: int,
    side: str,
    qty: int,
    limit,
    *,
    agent: str = "a1",
    stock: str = "EN001",
    seq: int | None = None,
    day: int = 1,
) -> Order:
    return Order(
        id=oid,
        seq=oid if seq is None else seq,
        day=day,
        agent_id=agent,
        stock_code=stock,
        side=Side(side),
        quantity=qty,
        limit_price=money(limit),
    )


def book_from(orders) -> OrderBook:
    book = OrderBook(orders[0].stock_code if orders else "EN001")
    for order in orders:
        book.insert(order)
    return book


def order_spec(order: Order) -> dict:
    """Plain-dict view of an order for the naive reference matcher."""
    return {
        "id": order.id,
        "seq": order.seq,
        "agent": order.agent_id,
        "side": order.side.value,
        "qty": order.quantity,
        "limit": order.limit_price,
    }


def grid_price(rng: random.Random, lo: int = 0, hi: int = GRID_LEVELS - 1) -> Decimal:
    return GRID_BASE + TICK * rng.randint(lo, hi)


def random_auction_orders(rng: random.Random, max_orders: int = 8) -> list[Order]:
    """A random opening book: any mix of sides, prices on the tick grid."""
    n = rng.randint(0, max_orders)
    orders = []
    for i in range(1, n + 1):
        orders.append(
            make_order(
                i,
                rng.choice(("Buy", "Sell")),
                rng.randint(1, 100),
                grid_price(rng),
                agent=rng.choice(AGENT_POOL),
            )
        )
    return orders


def random_continuous_case(rng: random.Random, max_resting: int = 8):
    """A non-crossed resting book plus one incoming order.

    Bids sit at or below a pivot level and asks strictly above it, so the
    generated book is never crossed; the incoming order may cross either side
    including the same agent's own orders.
    """
    pivot = rng.randint(0, GRID_LEVELS - 2)
    n = rng.randint(0, max_resting)
    resting = []
    for i in range(1, n + 1):
        side = rng.choice(("Buy", "Sell"))
        if side == "Buy":
            price = grid_price(rng, 0, pivot)
        else:
            price = grid_price(rng, pivot + 1, GRID_LEVELS - 1)
        resting.append(
            make_order(i, side, rng.randint(1, 100), price, agent=rng.choice(AGENT_POOL))
        )
    incoming = make_order(
        n + 1,
        rng.choice(("Buy", "Sell")),
        rng.randint(1, 100),
        grid_price(rng),
        agent=rng.choice(AGENT_POOL),
    )
    return resting, incoming
