"""Domain types and exact-decimal accounting for the simulated exchange.

Money is fixed-point decimal with two places, rounded half up; quantities are
whole shares.  Escrow is tracked per order so settlement can never fail:
submitting a buy locks quantity x limit cash, submitting a sell locks the
shares, and fills release escrow at the trade price with the difference
refunded to free cash.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, ROUND_HALF_UP
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

Money = Decimal
Quantity = int

CENT = Decimal("0.01")
ZERO = Decimal("0.00")

SECTORS = (
    "energy",
    "materials",
    "industrial",
    "consumer discretionary",
    "consumer staples",
    "healthcare",
    "financial",
    "information technology",
    "telecommunication services",
    "utilities",
    "real estate",
)


class MarketError(Exception):
    """Base class for domain errors raised by the exchange."""


class InsufficientCash(MarketError):
    pass


class InsufficientShares(MarketError):
    pass


class MissingClose(MarketError):
    """A valuation asked for a stock with no close on record."""


def money(value: object) -> Money:
    """Coerce to an exact two-decimal amount, rounding half up.

    Accepts Decimal, int, str, or float; floats go through str() so that
    literal-looking values (10.25) land on the obvious cent.
    """
    if isinstance(value, Decimal):
        d = value
    elif isinstance(value, (int, str)):
        d = Decimal(value)
    else:
        d = Decimal(str(value))
    return d.quantize(CENT, rounding=ROUND_HALF_UP)


def is_price(value: Decimal) -> bool:
    """True when value is a positive amount expressible in whole cents."""
    if not isinstance(value, Decimal) or not value.is_finite() or value <= 0:
        return False
    try:
        return value == value.quantize(CENT)
    except InvalidOperation:
        return False


class Side(str, Enum):
    BUY = "Buy"
    SELL = "Sell"

    @property
    def opposite(self) -> "Side":
        return Side.SELL if self is Side.BUY else Side.BUY


class Strategy(str, Enum):
    VALUE = "value"
    INSTITUTIONAL = "institutional"
    CONTRARIAN = "contrarian"
    AGGRESSIVE = "aggressive"


@dataclass
class ListedCompany:
    """One tradable stock: identity, sector blurb, and its close series.

    price_history holds the seeded closes followed by every simulated close;
    shares_outstanding is zero until the scenario endowment mints holdings.
    """

    code: str
    sector: str
    description: str
    price_history: list[Money]
    shares_outstanding: Quantity = 0

    def __post_init__(self) -> None:
        if not self.code:
            raise ValueError("company code must be non-empty")
        if self.sector not in SECTORS:
            raise ValueError(f"unknown sector {self.sector!r}")
        if not self.price_history:
            raise ValueError(f"{self.code}: price history must be non-empty")
        self.price_history = [money(p) for p in self.price_history]
        if any(p <= 0 for p in self.price_history):
            raise ValueError(f"{self.code}: prices must be positive")
        if self.shares_outstanding < 0:
            raise ValueError(f"{self.code}: shares outstanding must be >= 0")

    @property
    def last_close(self) -> Money:
        return self.price_history[-1]

    def window(self, length: int = 15) -> list[Money]:
        """Most recent closes, oldest first, at most `length` of them."""
        if length <= 0:
            raise ValueError("window length must be positive")
        return self.price_history[-length:]


class CompanyRegistry:
    """Ordered collection of listed companies, addressable by code."""

    def __init__(self, companies: Iterable[ListedCompany]):
        self._by_code: dict[str, ListedCompany] = {}
        for company in companies:
            if company.code in self._by_code:
                raise ValueError(f"duplicate company code {company.code}")
            self._by_code[company.code] = company
        if not self._by_code:
            raise ValueError("registry must list at least one company")

    def __iter__(self) -> Iterator[ListedCompany]:
        return iter(self._by_code.values())

    def __len__(self) -> int:
        return len(self._by_code)

    def __contains__(self, code: str) -> bool:
        return code in self._by_code

    @property
    def codes(self) -> list[str]:
        return list(self._by_code)

    def get(self, code: str) -> ListedCompany:
        try:
            return self._by_code[code]
        except KeyError:
            raise KeyError(f"unknown stock code {code!r}") from None

    def last_closes(self) -> dict[str, Money]:
        return {c.code: c.last_close for c in self}

    def to_dict(self) -> list[dict]:
        return [
            {
                "code": c.code,
                "sector": c.sector,
                "description": c.description,
                "price_history": [str(p) for p in c.price_history],
                "shares_outstanding": c.shares_outstanding,
            }
            for c in self
        ]

    @classmethod
    def from_dict(cls, rows: Iterable[Mapping]) -> "CompanyRegistry":
        return cls(
            ListedCompany(
                code=row["code"],
                sector=row["sector"],
                description=row["description"],
                price_history=[money(p) for p in row["price_history"]],
                shares_outstanding=int(row.get("shares_outstanding", 0)),
            )
            for row in rows
        )

    @classmethod
    def load(cls, path: str | Path) -> "CompanyRegistry":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )


def default_companies() -> CompanyRegistry:
    """The packaged eleven-sector listing with five seeded closes each."""
    text = resources.files("asfm.data").joinpath("companies.json").read_text("utf-8")
    return CompanyRegistry.from_dict(json.loads(text))


@dataclass
class Order:
    """A resting or incoming limit order.

    `seq` is the global submission counter and the time-priority key; partial
    fills decrement `remaining` and keep the original seq.
    """

    id: int
    seq: int
    day: int
    agent_id: str
    stock_code: str
    side: Side
    quantity: Quantity
    limit_price: Money
    remaining: Quantity = -1  # -1 sentinel: starts equal to quantity

    def __post_init__(self) -> None:
        if self.remaining == -1:
            self.remaining = self.quantity
        if self.quantity <= 0:
            raise ValueError("order quantity must be positive")
        if not 0 <= self.remaining <= self.quantity:
            raise ValueError("remaining must lie in [0, quantity]")
        if not is_price(self.limit_price):
            raise ValueError(f"limit price {self.limit_price} is not a valid price")

    @property
    def filled(self) -> Quantity:
        return self.quantity - self.remaining


@dataclass(frozen=True)
class Trade:
    """An executed fill between one buy order and one sell order."""

    seq: int
    day: int
    stock_code: str
    price: Money
    quantity: Quantity
    buy_order_id: int
    sell_order_id: int
    buyer_id: str
    seller_id: str

    def __post_init__(self) -> None:
        if self.quantity <= 0:
            raise ValueError("trade quantity must be positive")
        if not is_price(self.price):
            raise ValueError(f"trade price {self.price} is not a valid price")


class OrderBook:
    """Price-time ordered bids and asks for a single stock.

    Bids sort by price descending then seq ascending; asks by price ascending
    then seq ascending, so index 0 is always the best order on each side.
    """

    def __init__(self, stock_code: str):
        self.stock_code = stock_code
        self.bids: list[Order] = []
        self.asks: list[Order] = []

    def insert(self, order: Order) -> None:
        if order.stock_code != self.stock_code:
            raise ValueError(
                f"order for {order.stock_code} routed to book {self.stock_code}"
            )
        if order.remaining <= 0:
            raise ValueError("cannot rest a fully filled order")
        if order.side is Side.BUY:
            bisect.insort(self.bids, order, key=lambda o: (-o.limit_price, o.seq))
        else:
            bisect.insort(self.asks, order, key=lambda o: (o.limit_price, o.seq))

    def best_bid(self) -> Money | None:
        return self.bids[0].limit_price if self.bids else None

    def best_ask(self) -> Money | None:
        return self.asks[0].limit_price if self.asks else None

    def is_crossed(self) -> bool:
        bid, ask = self.best_bid(), self.best_ask()
        return bid is not None and ask is not None and bid >= ask

    def live_orders(self) -> list[Order]:
        return sorted(self.bids + self.asks, key=lambda o: o.seq)

    def __len__(self) -> int:
        return len(self.bids) + len(self.asks)


@dataclass
class AgentAccount:
    """A trader's wallet: free cash/holdings plus per-order escrow.

    Free cash never goes negative; a buy locks quantity x limit up front and a
    sell locks the shares, keyed by order id so cancels and partial fills
    release exactly what remains locked.
    """

    agent_id: str
    strategy: Strategy
    cash: Money
    initial_capital: Money
    holdings: dict[str, Quantity] = field(default_factory=dict)
    reserved_cash: dict[int, Money] = field(default_factory=dict)
    reserved_shares: dict[int, tuple[str, Quantity]] = field(default_factory=dict)
    ops_today: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.cash = money(self.cash)
        self.initial_capital = money(self.initial_capital)
        if self.cash < 0 or self.initial_capital <= 0:
            raise ValueError("capital must be positive and cash non-negative")

    @property
    def total_cash(self) -> Money:
        """Free cash plus everything locked behind live buy orders."""
        return self.cash + sum(self.reserved_cash.values(), ZERO)

    def position(self, stock_code: str) -> Quantity:
        """Total shares owned, free plus escrowed behind live sell orders."""
        total = self.holdings.get(stock_code, 0)
        for code, qty in self.reserved_shares.values():
            if code == stock_code:
                total += qty
        return total

    def all_positions(self) -> dict[str, Quantity]:
        out: dict[str, Quantity] = dict(self.holdings)
        for code, qty in self.reserved_shares.values():
            out[code] = out.get(code, 0) + qty
        return {code: qty for code, qty in out.items() if qty > 0}


def reserve_for_order(account: AgentAccount, order: Order) -> None:
    """Lock the cash or shares an order needs before it may enter a book."""
    if order.agent_id != account.agent_id:
        raise ValueError("order does not belong to this account")
    if order.id in account.reserved_cash or order.id in account.reserved_shares:
        raise ValueError(f"order {order.id} already has escrow")
    if order.side is Side.BUY:
        needed = order.limit_price * order.quantity
        if account.cash < needed:
            raise InsufficientCash(
                f"{account.agent_id}: need {needed} for {order.quantity} x "
                f"{order.stock_code} at {order.limit_price}, have {account.cash}"
            )
        account.cash -= needed
        account.reserved_cash[order.id] = needed
    else:
        held = account.holdings.get(order.stock_code, 0)
        if held < order.quantity:
            raise InsufficientShares(
                f"{account.agent_id}: need {order.quantity} {order.stock_code}, "
                f"have {held} free"
            )
        account.holdings[order.stock_code] = held - order.quantity
        account.reserved_shares[order.id] = (order.stock_code, order.quantity)


def release_order(account: AgentAccount, order: Order) -> None:
    """Return whatever escrow an order still holds (cancel / end of day)."""
    if order.side is Side.BUY:
        refund = account.reserved_cash.pop(order.id, None)
        if refund is None:
            raise ValueError(f"order {order.id} holds no cash escrow")
        account.cash += refund
    else:
        entry = account.reserved_shares.pop(order.id, None)
        if entry is None:
            raise ValueError(f"order {order.id} holds no share escrow")
        code, qty = entry
        account.holdings[code] = account.holdings.get(code, 0) + qty


def settle_trade(
    buyer: AgentAccount,
    seller: AgentAccount,
    buy_order: Order,
    sell_order: Order,
    trade: Trade,
) -> None:
    """Move cash and shares for one fill, refunding the buyer's limit slack.

    The buy escrowed quantity x limit; the fill costs quantity x price with
    price <= limit, so the difference goes back to the buyer's free cash.
    """
    cost = trade.price * trade.quantity
    locked = buy_order.limit_price * trade.quantity
    escrow = buyer.reserved_cash.get(buy_order.id)
    if escrow is None or escrow < locked:
        raise MarketError(f"buy order {buy_order.id} escrow underrun")
    # the ledger, not order.remaining, decides when the escrow is drained:
    # matching may decrement remaining for several fills before any settles
    rest = escrow - locked
    if rest == ZERO:
        del buyer.reserved_cash[buy_order.id]
    else:
        buyer.reserved_cash[buy_order.id] = rest
    buyer.cash += locked - cost
    buyer.holdings[trade.stock_code] = (
        buyer.holdings.get(trade.stock_code, 0) + trade.quantity
    )

    entry = seller.reserved_shares.get(sell_order.id)
    if entry is None or entry[1] < trade.quantity:
        raise MarketError(f"sell order {sell_order.id} escrow underrun")
    code, qty = entry
    if code != trade.stock_code:
        raise MarketError(f"sell order {sell_order.id} escrowed {code}, traded "
                          f"{trade.stock_code}")
    if qty == trade.quantity:
        del seller.reserved_shares[sell_order.id]
    else:
        seller.reserved_shares[sell_order.id] = (code, qty - trade.quantity)
    seller.cash += cost


def total_assets(account: AgentAccount, closes: Mapping[str, Money]) -> Money:
    """Mark the account to market: all cash plus all shares at the closes."""
    total = account.total_cash
    for code, qty in account.all_positions().items():
        if code not in closes:
            raise MissingClose(f"no close for {code}")
        total += closes[code] * qty
    return money(total)


def return_rate(account: AgentAccount, closes: Mapping[str, Money]) -> Decimal:
    """Mark-to-market return on initial capital, as a plain Decimal ratio."""
    assets = total_assets(account, closes)
    return (assets - account.initial_capital) / account.initial_capital
