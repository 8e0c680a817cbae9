"""Trader agents: prompt construction, tool-call parsing, the per-stock
operation cap, and deterministic rule policies for each investor strategy.

Every agent decision flows through the same contract whether a language model
or a rule policy produces it: profile prompt + observation prompt + tool
document in, a list of tool calls out.  Prompts are rendered from the text
templates packaged under asfm/templates and are byte-deterministic for a
given account, observation, and mode.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .core import (
    AgentAccount,
    CompanyRegistry,
    MarketError,
    Money,
    Order,
    Quantity,
    Side,
    Strategy,
    is_price,
    money,
)
from .matching import IndicativeQuote

STRATEGY_DESCRIPTIONS: dict[Strategy, str] = {
    Strategy.VALUE: (
        "You are a value investor focused on identifying stocks whose market "
        "prices are below their intrinsic values. Your investment decisions "
        "are based on thorough financial analysis, seeking long-term stable "
        "returns rather than short-term price fluctuations. By examining the "
        "fundamentals of companies, such as profitability, financial health, "
        "and industry position, you can identify and invest in high-quality "
        "companies undervalued by the market. As a value investor, you "
        "patiently wait for the market to reassess the true value of these "
        "stocks, realizing the appreciation of your investments."
    ),
    Strategy.INSTITUTIONAL: (
        "You are an institutional investor, typically representing a large "
        "investment company. You possess substantial capital and expertise, "
        "engaging in the purchase and sale of stocks, bonds, and other "
        "financial assets. Your investment decisions are based on in-depth "
        "market analysis, long-term financial planning, and sophisticated "
        "risk management strategies. Your primary goal is to secure stable "
        "and reliable returns for the institution or its beneficiaries you "
        "represent."
    ),
    Strategy.CONTRARIAN: (
        "You are a contrarian investor, specializing in finding stocks that "
        "are generally overlooked or undervalued by the market. You believe "
        "in buying when market sentiment is low and selling when it's high, "
        "aiming to profit from this approach.  Your strategy requires a high "
        "level of patience and steadfast determination, as well as a deep "
        "understanding of market psychology and fundamental analysis, to be "
        "greedy when others are fearful and thus achieve capital "
        "appreciation."
    ),
    Strategy.AGGRESSIVE: (
        "You are an Aggressive investor, focusing on profiting from "
        "short-term market fluctuations. You prefer quick trades, using "
        "technical analysis and market trends to predict immediate price "
        "movements. Your investment strategy often involves higher risks, "
        "but it can also yield quicker returns. You need to constantly stay "
        "sensitive to market dynamics and be ready to enter and exit the "
        "market at any time to respond to rapidly changing market "
        "conditions."
    ),
}

# ablation profile: every agent gets the same neutral instruction
UNIFORM_INSTRUCTION = (
    "you are a market participant. Decide whether to buy, sell, or hold "
    "stocks strictly according to your observation results, using the "
    "trading tools provided."
)

PROFILE_MODES = ("full", "uniform")
OBSERVATION_MODES = ("full", "price_only")
POLICY_BACKENDS = ("rule_based", "llm")


class ParseError(MarketError):
    """A model reply could not be turned into valid tool calls."""


class OpCapExceeded(MarketError):
    """Third buy/sell operation on one stock in one day."""


@dataclass(frozen=True)
class StrategyProfile:
    kind: Strategy
    description: str

    def __post_init__(self) -> None:
        if not self.description:
            raise ValueError("strategy description must be non-empty")

    @classmethod
    def for_strategy(cls, kind: Strategy) -> "StrategyProfile":
        return cls(kind=kind, description=STRATEGY_DESCRIPTIONS[kind])


@dataclass
class Observation:
    """Everything one agent may see before acting on one day.

    price_windows maps stock code to the last closes, oldest first, at most
    15 entries (shorter during warm-up).  order_history carries the indicative
    quote snapshots published so far today and day_trades the prices/sizes
    already executed today; both are empty at the opening round.
    """

    day: int
    price_windows: dict[str, list[Money]]
    order_history: dict[str, list[IndicativeQuote]] = field(default_factory=dict)
    day_trades: dict[str, list[tuple[Money, Quantity]]] = field(default_factory=dict)
    news: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.day < 1:
            raise ValueError("day starts at 1")
        for code, window in self.price_windows.items():
            if not window:
                raise ValueError(f"{code}: empty price window")
            if len(window) > 15:
                raise ValueError(f"{code}: price window longer than 15 days")


@dataclass(frozen=True)
class TraderAction:
    """One parsed tool call: Buy/Sell carry all three parameters, Hold none."""

    tool: str
    stock_code: str | None = None
    quantity: Quantity | None = None
    price: Money | None = None

    def __post_init__(self) -> None:
        if self.tool not in ("Buy", "Sell", "Hold"):
            raise ValueError(f"unknown tool {self.tool!r}")
        if self.tool == "Hold":
            if self.stock_code or self.quantity or self.price:
                raise ValueError("Hold takes no parameters")
        else:
            if not self.stock_code:
                raise ValueError(f"{self.tool} requires stock_code")
            if not isinstance(self.quantity, int) or self.quantity <= 0:
                raise ValueError(f"{self.tool} requires a positive quantity")
            if self.price is None or not is_price(self.price):
                raise ValueError(f"{self.tool} requires a positive 2-decimal price")

    @property
    def side(self) -> Side | None:
        if self.tool == "Hold":
            return None
        return Side.BUY if self.tool == "Buy" else Side.SELL


HOLD = TraderAction(tool="Hold")


DEFAULT_PARAMS: dict[str, float] = {
    # value: buy below a discount of the window mean, sell above a premium
    "value.buy_discount": 0.97,
    "value.sell_premium": 1.05,
    "value.cash_fraction": 0.10,
    "value.position_fraction": 0.50,
    # institutional: rebalance toward equal value weights across stocks
    "institutional.band": 0.05,
    # contrarian: fade the biggest recent mover
    "contrarian.decline_trigger": 0.03,
    "contrarian.gain_trigger": 0.05,
    "contrarian.cash_fraction": 0.25,
    "contrarian.position_fraction": 0.50,
    # aggressive: momentum chasing with limits through the last close
    "aggressive.return_trigger": 0.01,
    "aggressive.buy_markup": 1.01,
    "aggressive.sell_markdown": 0.99,
    "aggressive.cash_fraction": 0.25,
    # news sensitivity: how far thresholds shift when news points one way
    "news.buy_delta": 0.02,
    "news.sell_delta": 0.02,
    "news.aggressive_delta": 0.005,
    "news.noise_buy_bias": 0.15,
    # liquidity noise: seeded off-rule orders, disabled unless a scenario
    # turns them on (base probability is scaled per strategy)
    "noise.base_prob": 0.0,
    "noise.band": 0.02,
    "noise.cash_fraction": 0.10,
    "noise.position_fraction": 0.25,
    "noise.factor.value": 0.5,
    "noise.factor.institutional": 0.75,
    "noise.factor.contrarian": 1.0,
    "noise.factor.aggressive": 2.0,
    # continuous rounds: cross the spread with an unfilled remainder when the
    # opposite quote is within this fraction of the order's limit (0 = off)
    "requote.band": 0.0,
}


@dataclass(frozen=True)
class PolicyConfig:
    profile_mode: str = "full"
    observation_mode: str = "full"
    policy_backend: str = "rule_based"
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.profile_mode not in PROFILE_MODES:
            raise ValueError(f"profile_mode must be one of {PROFILE_MODES}")
        if self.observation_mode not in OBSERVATION_MODES:
            raise ValueError(f"observation_mode must be one of {OBSERVATION_MODES}")
        if self.policy_backend not in POLICY_BACKENDS:
            raise ValueError(f"policy_backend must be one of {POLICY_BACKENDS}")
        unknown = set(self.params) - set(DEFAULT_PARAMS)
        if unknown:
            raise ValueError(f"unknown policy params: {sorted(unknown)}")

    def param(self, key: str) -> float:
        return self.params.get(key, DEFAULT_PARAMS[key])

    def to_dict(self) -> dict:
        return {
            "profile_mode": self.profile_mode,
            "observation_mode": self.observation_mode,
            "policy_backend": self.policy_backend,
            "params": dict(sorted(self.params.items())),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolicyConfig":
        return cls(
            profile_mode=data.get("profile_mode", "full"),
            observation_mode=data.get("observation_mode", "full"),
            policy_backend=data.get("policy_backend", "rule_based"),
            params={k: float(v) for k, v in data.get("params", {}).items()},
        )


@lru_cache(maxsize=None)
def _template(name: str) -> str:
    return resources.files("asfm.templates").joinpath(name).read_text("utf-8")


def _format_window(window: Sequence[Money]) -> str:
    return "[" + ", ".join(str(p) for p in window) + "]"


def build_profile_prompt(
    account: AgentAccount, profile: StrategyProfile, mode: str = "full"
) -> str:
    """Render the trader's system prompt: who they are plus what they own."""
    if mode not in PROFILE_MODES:
        raise ValueError(f"profile mode must be one of {PROFILE_MODES}")
    description = profile.description if mode == "full" else UNIFORM_INSTRUCTION
    positions = account.all_positions()
    if positions:
        stocks = ", ".join(f"{code}: {qty}" for code, qty in sorted(positions.items()))
    else:
        stocks = "none"
    return _template("profile.txt").format(
        strategy_description=description,
        wallet_cash=str(account.total_cash),
        stocks_hold=stocks,
    )


def _format_levels(levels: Iterable[tuple[Money, Quantity]]) -> str:
    parts = [f"{price} x {qty}" for price, qty in levels]
    return ", ".join(parts) if parts else "none"


def _orders_block(obs: Observation) -> str:
    lines = []
    for code in obs.price_windows:
        quotes = obs.order_history.get(code, [])
        trades = obs.day_trades.get(code, [])
        if not quotes and not trades:
            lines.append(f"{code}: no order information")
            continue
        parts = []
        if quotes:
            latest = quotes[-1]
            parts.append(f"bids {_format_levels(latest.bid_levels)}")
            parts.append(f"asks {_format_levels(latest.ask_levels)}")
        if trades:
            executed = ", ".join(f"{qty} @ {price}" for price, qty in trades)
            parts.append(f"trades today {executed}")
        lines.append(f"{code}: " + "; ".join(parts))
    return "\n".join(lines) if lines else "none"


def build_observation_prompt(
    obs: Observation, mode: str = "full", registry: CompanyRegistry | None = None
) -> str:
    """Render what the agent sees this turn.

    Full mode shows the market situation (company blurbs + recent closes),
    the order information published so far today, and the day's news.  The
    price_only ablation shows nothing but the close windows.
    """
    if mode not in OBSERVATION_MODES:
        raise ValueError(f"observation mode must be one of {OBSERVATION_MODES}")
    if mode == "price_only":
        windows = "\n".join(
            f"{code}: {_format_window(window)}"
            for code, window in obs.price_windows.items()
        )
        return _template("observation_price_only.txt").format(
            day=obs.day, price_windows=windows
        )
    situation_lines = []
    for code, window in obs.price_windows.items():
        if registry is not None and code in registry:
            company = registry.get(code)
            intro = f"{code} ({company.sector}): {company.description}"
        else:
            intro = f"{code}:"
        situation_lines.append(f"{intro} Recent closes: {_format_window(window)}")
    news = "\n".join(obs.news) if obs.news else "none"
    return _template("observation_full.txt").format(
        day=obs.day,
        stock_market_situation="\n".join(situation_lines),
        orders_history=_orders_block(obs),
        news=news,
    )


def tool_prompt() -> str:
    """The fixed tool document and demonstration shown with every request."""
    return _template("tools.txt")


def serialize_action(action: TraderAction) -> str:
    """Wire format: one single-line JSON object per action."""
    if action.tool == "Hold":
        return '{"tool": "Hold"}'
    payload = {
        "tool": action.tool,
        "stock_code": action.stock_code,
        "quantity": action.quantity,
        "price": float(action.price),
    }
    return json.dumps(payload, separators=(", ", ": "))


def _validate_tool_object(obj: Mapping, universe: CompanyRegistry) -> TraderAction:
    tool = obj.get("tool")
    if not isinstance(tool, str):
        raise ParseError("tool name must be a string")
    name = tool.strip().capitalize()
    if name not in ("Buy", "Sell", "Hold"):
        raise ParseError(f"unknown tool {tool!r}")
    if name == "Hold":
        return HOLD
    stock = obj.get("stock_code")
    if not isinstance(stock, str) or stock not in universe:
        raise ParseError(f"unknown ticker {stock!r}")
    quantity = obj.get("quantity")
    if isinstance(quantity, bool):
        raise ParseError("quantity must be a positive integer")
    if isinstance(quantity, Decimal) and quantity == int(quantity):
        quantity = int(quantity)
    if not isinstance(quantity, int) or quantity <= 0:
        raise ParseError("quantity must be a positive integer")
    price = obj.get("price")
    if isinstance(price, bool):
        raise ParseError("price must be a positive number with at most 2 decimals")
    if isinstance(price, int):
        price = Decimal(price)
    if not isinstance(price, Decimal) or not is_price(price):
        raise ParseError("price must be a positive number with at most 2 decimals")
    return TraderAction(tool=name, stock_code=stock, quantity=quantity, price=money(price))


def parse_tool_calls(model_output: str, universe: CompanyRegistry) -> list[TraderAction]:
    """Extract tool calls from free-form model output.

    Scans for JSON objects anywhere in the text (prose and code fences are
    fine), parsing numbers as Decimal so price precision is checked exactly.
    JSON objects without a "tool" key are ignored; an output with no valid
    tool object at all, or with an invalid one, raises ParseError.
    """
    decoder = json.JSONDecoder(parse_float=Decimal)
    actions: list[TraderAction] = []
    index = 0
    while True:
        start = model_output.find("{", index)
        if start == -1:
            break
        try:
            obj, end = decoder.raw_decode(model_output, start)
        except json.JSONDecodeError:
            index = start + 1
            continue
        index = end
        candidates = obj if isinstance(obj, list) else [obj]
        for candidate in candidates:
            if isinstance(candidate, Mapping) and "tool" in candidate:
                actions.append(_validate_tool_object(candidate, universe))
    if not actions:
        raise ParseError("no tool call found in model output")
    return actions


def enforce_op_cap(account: AgentAccount, action: TraderAction) -> None:
    """Count an accepted Buy/Sell against the per-stock daily cap of two."""
    if action.tool == "Hold":
        return
    count = account.ops_today.get(action.stock_code, 0)
    if count >= 2:
        raise OpCapExceeded(
            f"{account.agent_id} already placed 2 operations on "
            f"{action.stock_code} today"
        )
    account.ops_today[action.stock_code] = count + 1


def reset_daily_ops(account: AgentAccount) -> None:
    account.ops_today.clear()


_PERCENT = re.compile(r"(\d+(?:\.\d+)?)\s*%")


def news_bias(news_texts: Sequence[str], high: float = 5.0, low: float = 1.0):
    """Classify the day's news into threshold shifts.

    Returns (buy_easier, sell_easier): interest-rate cuts make buying easier;
    an inflation rate above `high` or below `low` percent makes selling
    easier.  In-between inflation readings shift nothing.
    """
    buy_easier = False
    sell_easier = False
    for text in news_texts:
        lowered = text.lower()
        if "cut interest rates" in lowered or "rate cut" in lowered:
            buy_easier = True
        if "inflation" in lowered:
            match = _PERCENT.search(text)
            if match:
                rate = float(match.group(1))
                if rate > high or rate < low:
                    sell_easier = True
    return buy_easier, sell_easier


def _lookback_return(window: Sequence[Money], points: int) -> float:
    """Return over the last `points` closes (w[-1] / w[-points] - 1)."""
    base = window[-points] if len(window) >= points else window[0]
    return float(window[-1]) / float(base) - 1.0


class _Budget:
    """Tracks uncommitted cash across the actions of one decision."""

    def __init__(self, cash: Money):
        self.free = float(cash)

    def size_buy(self, fraction: float, limit: Money) -> Quantity:
        qty = int(self.free * fraction / float(limit))
        if qty > 0:
            self.free -= qty * float(limit)
        return max(qty, 0)


def _value_actions(obs, account, config, bias, budget) -> list[TraderAction]:
    buy_easier, sell_easier = bias
    discount = config.param("value.buy_discount")
    premium = config.param("value.sell_premium")
    if buy_easier:
        discount += config.param("news.buy_delta")
    if sell_easier:
        premium -= config.param("news.sell_delta")
    actions = []
    for code, window in obs.price_windows.items():
        mean = sum(float(p) for p in window) / len(window)
        last = window[-1]
        if float(last) < discount * mean:
            qty = budget.size_buy(config.param("value.cash_fraction"), last)
            if qty > 0:
                actions.append(TraderAction("Buy", code, qty, last))
        elif float(last) > premium * mean:
            qty = int(account.holdings.get(code, 0) * config.param("value.position_fraction"))
            if qty > 0:
                actions.append(TraderAction("Sell", code, qty, last))
    return actions


def _institutional_actions(obs, account, config, bias, budget) -> list[TraderAction]:
    band = config.param("institutional.band")
    if bias[0] or bias[1]:
        band = max(band - config.param("news.sell_delta"), 0.005)
    lasts = {code: window[-1] for code, window in obs.price_windows.items()}
    values = {
        code: account.holdings.get(code, 0) * float(last)
        for code, last in lasts.items()
    }
    total = sum(values.values())
    if total <= 0:
        return []
    target = total / len(values)
    # relative deviation from the equal-weight target
    if not any(abs(v - target) / target > band for v in values.values()):
        return []
    actions = []
    for code, value in values.items():
        diff = value - target
        limit = lasts[code]
        if diff > 0:
            qty = min(int(diff / float(limit)), account.holdings.get(code, 0))
            if qty > 0:
                actions.append(TraderAction("Sell", code, qty, limit))
        elif diff < 0:
            qty = int(-diff / float(limit))
            affordable = int(budget.free / float(limit))
            qty = min(qty, affordable)
            if qty > 0:
                budget.free -= qty * float(limit)
                actions.append(TraderAction("Buy", code, qty, limit))
    return actions


def _contrarian_actions(obs, account, config, bias, budget) -> list[TraderAction]:
    buy_easier, sell_easier = bias
    decline = config.param("contrarian.decline_trigger")
    gain = config.param("contrarian.gain_trigger")
    if buy_easier:
        decline = max(decline - config.param("news.buy_delta"), 0.0)
    if sell_easier:
        gain = max(gain - config.param("news.sell_delta"), 0.0)
    changes = {
        code: _lookback_return(window, 5)
        for code, window in obs.price_windows.items()
    }
    worst = min(changes, key=changes.get)
    best = max(changes, key=changes.get)
    actions = []
    if changes[worst] < -decline:
        limit = obs.price_windows[worst][-1]
        qty = budget.size_buy(config.param("contrarian.cash_fraction"), limit)
        if qty > 0:
            actions.append(TraderAction("Buy", worst, qty, limit))
    if best != worst and changes[best] > gain:
        qty = int(
            account.holdings.get(best, 0) * config.param("contrarian.position_fraction")
        )
        if qty > 0:
            actions.append(TraderAction("Sell", best, qty, obs.price_windows[best][-1]))
    return actions


def _aggressive_actions(obs, account, config, bias, budget) -> list[TraderAction]:
    buy_easier, sell_easier = bias
    trigger = config.param("aggressive.return_trigger")
    delta = config.param("news.aggressive_delta")
    buy_trigger = trigger - delta if buy_easier else trigger
    sell_trigger = trigger - delta if sell_easier else trigger
    markup = Decimal(str(config.param("aggressive.buy_markup")))
    markdown = Decimal(str(config.param("aggressive.sell_markdown")))
    actions = []
    for code, window in obs.price_windows.items():
        momentum = _lookback_return(window, 3)
        last = window[-1]
        if momentum > buy_trigger:
            limit = money(last * markup)
            qty = budget.size_buy(config.param("aggressive.cash_fraction"), limit)
            if qty > 0:
                actions.append(TraderAction("Buy", code, qty, limit))
        elif momentum < -sell_trigger:
            qty = account.holdings.get(code, 0)  # full position
            if qty > 0:
                limit = money(last * markdown)
                actions.append(TraderAction("Sell", code, qty, limit))
    return actions


def _noise_action(
    obs, account, config, bias, budget, rng, taken: set
) -> TraderAction | None:
    base = config.param("noise.base_prob") * config.param(
        f"noise.factor.{account.strategy.value}"
    )
    if base <= 0:
        return None
    if rng.random() >= min(base, 1.0):
        return None
    candidates = [code for code in obs.price_windows if code not in taken]
    if not candidates:
        return None
    code = rng.choice(candidates)
    last = obs.price_windows[code][-1]
    position = account.holdings.get(code, 0)
    buy_prob = 0.5
    if bias[0]:
        buy_prob += config.param("news.noise_buy_bias")
    if bias[1]:
        buy_prob -= config.param("news.noise_buy_bias")
    go_buy = position == 0 or rng.random() < buy_prob
    offset = rng.uniform(-config.param("noise.band"), config.param("noise.band"))
    limit = max(money(float(last) * (1.0 + offset)), money("0.01"))
    if go_buy:
        qty = budget.size_buy(config.param("noise.cash_fraction"), limit)
        if qty <= 0:
            return None
        return TraderAction("Buy", code, qty, limit)
    qty = max(1, int(position * config.param("noise.position_fraction")))
    return TraderAction("Sell", code, qty, limit)


_STRATEGY_RULES = {
    Strategy.VALUE: _value_actions,
    Strategy.INSTITUTIONAL: _institutional_actions,
    Strategy.CONTRARIAN: _contrarian_actions,
    Strategy.AGGRESSIVE: _aggressive_actions,
}


def rule_policy_decide(
    profile: StrategyProfile,
    obs: Observation,
    account: AgentAccount,
    rng,
    config: PolicyConfig,
) -> list[TraderAction]:
    """Deterministic offline stand-in for the model-driven action step.

    Applies the strategy's trigger rules over the observation, then (when a
    scenario enables it) one seeded liquidity-noise order on a stock the
    rules left untouched.  Cash commitments are tracked across the emitted
    actions so a single decision never over-commits the wallet.
    """
    bias = news_bias(obs.news)
    budget = _Budget(account.cash)
    actions = _STRATEGY_RULES[profile.kind](obs, account, config, bias, budget)
    taken = {a.stock_code for a in actions}
    noise = _noise_action(obs, account, config, bias, budget, rng, taken)
    if noise is not None:
        actions.append(noise)
    return actions


def rule_policy_revise(
    account: AgentAccount,
    obs: Observation,
    config: PolicyConfig,
    live_orders: Sequence[Order],
) -> list[TraderAction]:
    """Between continuous rounds: chase the touch with unfilled remainders.

    For each of the agent's live orders, if the best opposite quote sits
    within `requote.band` of the order's limit and the stock still has cap
    budget, emit a crossing order for the remaining quantity.
    """
    band = config.param("requote.band")
    if band <= 0:
        return []
    actions: list[TraderAction] = []
    revised: set[str] = set()
    for order in sorted(live_orders, key=lambda o: o.seq):
        code = order.stock_code
        if order.remaining <= 0 or code in revised:
            continue
        if account.ops_today.get(code, 0) >= 2:
            continue
        quotes = obs.order_history.get(code)
        if not quotes:
            continue
        latest = quotes[-1]
        target = latest.best_ask if order.side is Side.BUY else latest.best_bid
        if target is None:
            continue
        if abs(float(target) - float(order.limit_price)) > band * float(order.limit_price):
            continue
        revised.add(code)
        actions.append(
            TraderAction(order.side.value, code, order.remaining, target)
        )
    return actions
