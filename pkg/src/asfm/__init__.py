"""Agent-based simulated stock market.

A call-auction plus continuous-matching exchange, a population of
strategy-profiled trader agents driven by prompts (served by a rule-based
mirror, a mock model, or a live endpoint), scenario-scheduled economic news,
and a deterministic, replay-verifiable run harness with market metrics.
"""

from .agents import (
    Observation,
    OpCapExceeded,
    ParseError,
    PolicyConfig,
    StrategyProfile,
    TraderAction,
    build_observation_prompt,
    build_profile_prompt,
    news_bias,
    parse_tool_calls,
    rule_policy_decide,
    serialize_action,
    tool_prompt,
)
from .core import (
    AgentAccount,
    CompanyRegistry,
    ListedCompany,
    MarketError,
    Money,
    Order,
    OrderBook,
    Side,
    Strategy,
    Trade,
    default_companies,
    money,
    release_order,
    reserve_for_order,
    return_rate,
    settle_trade,
    total_assets,
)
from .gateway import (
    CompletionRequest,
    DriftDetected,
    LiveTransport,
    MockTransport,
    ReplayMiss,
    ReplayTransport,
    RequestTag,
    Transcript,
    TranscriptRecord,
    action_with_retry,
)
from .harness import (
    DriftReport,
    ReplayOk,
    RunConfig,
    RunLog,
    SeedFabric,
    Simulation,
    run_simulation,
    verify_replay,
)
from .matching import (
    AuctionResult,
    IndicativeQuote,
    MatchResult,
    call_auction,
    closing_price,
    continuous_match,
    indicative_snapshot,
    midpoint_price,
)
from .metrics import (
    DayReport,
    average_stock_return,
    load_closes,
    load_jsonl,
    market_volatility,
    order_execution_rate,
    order_number,
    summarize,
    turnover_rate,
    volatility,
)
from .scenario import (
    NewsEvent,
    PopulationSpec,
    ScenarioSpec,
    PRESET_NAMES,
    build_population,
    initial_endowment,
    preset_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AgentAccount",
    "AuctionResult",
    "CompanyRegistry",
    "CompletionRequest",
    "DayReport",
    "DriftDetected",
    "DriftReport",
    "IndicativeQuote",
    "ListedCompany",
    "LiveTransport",
    "MarketError",
    "MatchResult",
    "MockTransport",
    "Money",
    "NewsEvent",
    "Observation",
    "OpCapExceeded",
    "Order",
    "OrderBook",
    "ParseError",
    "PolicyConfig",
    "PopulationSpec",
    "PRESET_NAMES",
    "ReplayMiss",
    "ReplayOk",
    "ReplayTransport",
    "RequestTag",
    "RunConfig",
    "RunLog",
    "ScenarioSpec",
    "SeedFabric",
    "Side",
    "Simulation",
    "Strategy",
    "StrategyProfile",
    "Trade",
    "TraderAction",
    "Transcript",
    "TranscriptRecord",
    "action_with_retry",
    "average_stock_return",
    "build_observation_prompt",
    "build_population",
    "build_profile_prompt",
    "call_auction",
    "closing_price",
    "continuous_match",
    "default_companies",
    "indicative_snapshot",
    "initial_endowment",
    "load_closes",
    "load_jsonl",
    "market_volatility",
    "midpoint_price",
    "money",
    "news_bias",
    "order_execution_rate",
    "order_number",
    "parse_tool_calls",
    "preset_scenario",
    "release_order",
    "reserve_for_order",
    "return_rate",
    "rule_policy_decide",
    "run_simulation",
    "serialize_action",
    "settle_trade",
    "summarize",
    "tool_prompt",
    "total_assets",
    "turnover_rate",
    "verify_replay",
    "volatility",
]
