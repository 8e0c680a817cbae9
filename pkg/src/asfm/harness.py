"""The daily run loop: news, prompts, decisions, matching, settlement, logs.

A run is a pure function of (config, seed, transcript): all randomness flows
from one master seed through named substreams, money never leaves the closed
system, and every artifact is written deterministically so identical runs
are byte-identical.  verify_replay re-executes a recorded run directory and
reports the first divergence it can find.
"""

from __future__ import annotations

import hashlib
import json
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .agents import (
    HOLD,
    Observation,
    OpCapExceeded,
    PolicyConfig,
    StrategyProfile,
    TraderAction,
    build_observation_prompt,
    build_profile_prompt,
    enforce_op_cap,
    reset_daily_ops,
    rule_policy_decide,
    rule_policy_revise,
    serialize_action,
    tool_prompt,
)
from .core import (
    AgentAccount,
    InsufficientCash,
    InsufficientShares,
    MarketError,
    Money,
    Order,
    OrderBook,
    Side,
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
    action_with_retry,
)
from .matching import call_auction, closing_price, continuous_match, indicative_snapshot
from .metrics import (
    DayReport,
    average_stock_return,
    market_volatility,
    turnover_rate,
)
from .scenario import ScenarioSpec, build_population, initial_endowment

TRANSPORTS = ("mock", "live", "replay")


class ConfigError(MarketError):
    pass


class ConservationError(MarketError):
    """The closed-system audit failed; indicates an engine bug."""


class SeedFabric:
    """Named substreams off one master seed.

    Each (label, ...) tuple gets an independent generator derived by hashing,
    so adding a new stream never perturbs the draws of existing ones.
    """

    def __init__(self, master_seed: int):
        self.master_seed = master_seed

    def rng(self, *labels) -> random.Random:
        key = "|".join(str(label) for label in labels)
        digest = hashlib.sha256(f"{self.master_seed}|{key}".encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class RunConfig:
    scenario: ScenarioSpec
    output_dir: Path
    seed: int | None = None  # None: use the scenario's seed
    transport: str = "mock"
    continuous_rounds: int = 3
    indicative_depth: int = 5
    close_method: str = "vwap"
    price_rule: str = "resting"
    run_id: str = ""

    def __post_init__(self) -> None:
        self.output_dir = Path(self.output_dir)
        if self.transport not in TRANSPORTS:
            raise ConfigError(f"transport must be one of {TRANSPORTS}")
        if self.continuous_rounds < 0:
            raise ConfigError("continuous_rounds must be >= 0")
        if self.indicative_depth < 1:
            raise ConfigError("indicative_depth must be >= 1")
        if self.close_method not in ("vwap", "simple"):
            raise ConfigError("close_method must be vwap or simple")
        if self.price_rule not in ("resting", "midpoint"):
            raise ConfigError("price_rule must be resting or midpoint")
        if not self.run_id:
            self.run_id = f"{self.scenario.name}-seed{self.resolved_seed}"

    @property
    def resolved_seed(self) -> int:
        return self.scenario.seed if self.seed is None else self.seed

    def to_dict(self) -> dict:
        # the output directory is a property of the invocation, not the run
        return {
            "run_id": self.run_id,
            "seed": self.resolved_seed,
            "transport": self.transport,
            "continuous_rounds": self.continuous_rounds,
            "indicative_depth": self.indicative_depth,
            "close_method": self.close_method,
            "price_rule": self.price_rule,
            "scenario": self.scenario.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping, output_dir: Path) -> "RunConfig":
        return cls(
            scenario=ScenarioSpec.from_dict(data["scenario"]),
            output_dir=output_dir,
            seed=int(data["seed"]),
            transport=data.get("transport", "mock"),
            continuous_rounds=int(data.get("continuous_rounds", 3)),
            indicative_depth=int(data.get("indicative_depth", 5)),
            close_method=data.get("close_method", "vwap"),
            price_rule=data.get("price_rule", "resting"),
            run_id=data.get("run_id", ""),
        )


@dataclass
class RunLog:
    run_dir: Path
    manifest: dict
    summary: dict
    reports: list[DayReport]

    def path(self, name: str) -> Path:
        return self.run_dir / name


@dataclass
class ReplayOk:
    run_id: str

    def __str__(self) -> str:
        return f"Ok: {self.run_id} reproduced byte-identically"


@dataclass
class DriftReport:
    stage: str  # config | transcript | artifact
    detail: str
    tag: str | None = None
    artifact: str | None = None

    def __str__(self) -> str:
        parts = [f"Drift at {self.stage} stage"]
        if self.artifact:
            parts.append(f"artifact {self.artifact}")
        if self.tag:
            parts.append(f"tag {self.tag}")
        parts.append(self.detail)
        return ": ".join(parts)


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.12g}"


def _json_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Simulation:
    """One configured run over its scenario's trading days."""

    def __init__(
        self,
        config: RunConfig,
        transcript: Transcript | None = None,
        responder=None,
        transport_override=None,
    ):
        self.config = config
        self.scenario = config.scenario
        self.policy = self.scenario.policy_config
        self.seed = config.resolved_seed
        self.run_id = config.run_id
        self.fabric = SeedFabric(self.seed)
        self.registry = default_companies()
        self.accounts = build_population(self.scenario.population)
        initial_endowment(
            self.accounts, self.registry, self.scenario.endowment_fraction
        )
        self.by_id = {account.agent_id: account for account in self.accounts}
        self.profiles = {
            account.agent_id: StrategyProfile.for_strategy(account.strategy)
            for account in self.accounts
        }
        self.initial_cash_total = sum(
            (account.cash for account in self.accounts), money("0")
        )

        uses_gateway = self.policy.policy_backend == "llm"
        if transport_override is not None:
            # re-execution against a recorded transcript: the config snapshot
            # keeps the transport the recording was made with
            self.transport = transport_override
            self.transcript = transcript
            self.recording = False
        elif config.transport == "replay":
            if transcript is None:
                raise ConfigError("replay transport needs a transcript")
            self.transport = ReplayTransport(transcript)
            self.transcript = transcript
            self.recording = False
        elif config.transport == "live":
            self.transport = LiveTransport()
            self.transcript = Transcript() if uses_gateway else None
            self.recording = uses_gateway
        else:
            self.transport = MockTransport(responder or self._mirror_responder)
            self.transcript = Transcript() if uses_gateway else None
            self.recording = uses_gateway
        self._pending_reply = serialize_action(HOLD)

        self._next_order = 1
        self._next_trade = 1
        self._orders_by_id: dict[int, Order] = {}
        self.order_rows: list[dict] = []
        self.trade_rows: list[dict] = []
        self.prompt_rows: list[dict] = []
        self.event_rows: list[dict] = []
        self.reports: list[DayReport] = []
        self.close_series: dict[str, list[Money]] = {
            company.code: [company.last_close] for company in self.registry
        }
        self.books: dict[str, OrderBook] = {}
        self.day_trades: dict[str, list[Trade]] = {}
        self._day_order_count = 0
        self._day_placed = 0

    # -- responders ---------------------------------------------------------

    def _mirror_responder(self, req: CompletionRequest) -> str:
        """Default mock model: echoes the rule policy's decision in the wire
        format, so mock runs exercise the full prompt/parse path."""
        return self._pending_reply

    # -- observations and decisions ------------------------------------------

    def _observation(self, day: int, news: list[str], snapshots=None) -> Observation:
        windows = {
            company.code: company.window(15) for company in self.registry
        }
        order_history = {}
        trade_view = {}
        if snapshots is not None:
            order_history = {code: [quote] for code, quote in snapshots.items()}
            trade_view = {
                code: [(t.price, t.quantity) for t in trades]
                for code, trades in self.day_trades.items()
                if trades
            }
        return Observation(
            day=day,
            price_windows=windows,
            order_history=order_history,
            day_trades=trade_view,
            news=list(news),
        )

    def _rule_actions(
        self, account: AgentAccount, obs: Observation, day: int, opening: bool
    ) -> list[TraderAction]:
        if opening:
            rng = self.fabric.rng("policy", account.agent_id, day)
            return rule_policy_decide(
                self.profiles[account.agent_id], obs, account, rng, self.policy
            )
        live = [
            order
            for book in self.books.values()
            for order in book.live_orders()
            if order.agent_id == account.agent_id
        ]
        return rule_policy_revise(account, obs, self.policy, live)

    def _decide(
        self, account: AgentAccount, obs: Observation, day: int, phase: str
    ) -> list[TraderAction]:
        system_text = build_profile_prompt(
            account, self.profiles[account.agent_id], self.policy.profile_mode
        )
        user_text = (
            build_observation_prompt(obs, self.policy.observation_mode, self.registry)
            + "\n"
            + tool_prompt()
        )
        self.prompt_rows.append(
            {
                "day": day,
                "phase": phase,
                "agent_id": account.agent_id,
                "system": system_text,
                "user": user_text,
            }
        )
        opening = phase == "open"
        if self.policy.policy_backend == "rule_based":
            return self._rule_actions(account, obs, day, opening)

        mirrored = self._rule_actions(account, obs, day, opening)
        self._pending_reply = (
            "\n".join(serialize_action(action) for action in mirrored)
            if mirrored
            else serialize_action(HOLD)
        )
        outcome = action_with_retry(
            system_text,
            user_text,
            self.registry,
            self.transport,
            tag_factory=lambda attempt: RequestTag(
                self.run_id, day, account.agent_id, f"{phase}.{attempt}"
            ),
            transcript=self.transcript,
        )
        for failure in outcome.failures:
            self._event(day, phase, account.agent_id, "GatewayFailure", failure)
        return outcome.actions

    # -- order intake ---------------------------------------------------------

    def _event(
        self, day: int, phase: str, agent_id: str, kind: str, detail: str, stock: str = ""
    ) -> None:
        self.event_rows.append(
            {
                "day": day,
                "phase": phase,
                "agent_id": agent_id,
                "kind": kind,
                "stock_code": stock,
                "detail": detail,
            }
        )

    def _has_live_opposite(self, account: AgentAccount, stock: str, side: Side) -> bool:
        book = self.books[stock]
        opposite = book.asks if side is Side.BUY else book.bids
        return any(order.agent_id == account.agent_id for order in opposite)

    def _submit(
        self,
        account: AgentAccount,
        action: TraderAction,
        day: int,
        phase: str,
        continuous: bool,
    ) -> None:
        if action.tool == "Hold":
            return
        stock = action.stock_code
        side = action.side
        if stock not in self.registry:
            self._event(day, phase, account.agent_id, "UnknownStock", stock, stock)
            return
        if self._has_live_opposite(account, stock, side):
            self._event(
                day,
                phase,
                account.agent_id,
                "SelfCross",
                "an opposite-side order is still live on this stock",
                stock,
            )
            return
        order = Order(
            id=self._next_order,
            seq=self._next_order,
            day=day,
            agent_id=account.agent_id,
            stock_code=stock,
            side=side,
            quantity=action.quantity,
            limit_price=action.price,
        )
        try:
            reserve_for_order(account, order)
        except InsufficientCash as exc:
            self._event(day, phase, account.agent_id, "InsufficientCash", str(exc), stock)
            return
        except InsufficientShares as exc:
            self._event(day, phase, account.agent_id, "InsufficientShares", str(exc), stock)
            return
        try:
            enforce_op_cap(account, action)
        except OpCapExceeded as exc:
            release_order(account, order)
            self._event(day, phase, account.agent_id, "OpCapExceeded", str(exc), stock)
            return
        self._next_order += 1
        self._orders_by_id[order.id] = order
        self._day_order_count += 1
        self._day_placed += order.quantity
        self.order_rows.append(
            {
                "day": day,
                "seq": order.seq,
                "id": order.id,
                "agent_id": order.agent_id,
                "stock_code": order.stock_code,
                "side": order.side.value,
                "quantity": order.quantity,
                "limit_price": str(order.limit_price),
                "phase": phase,
            }
        )
        if not continuous:
            self.books[stock].insert(order)
            return
        result = continuous_match(
            self.books[stock],
            order,
            day=day,
            first_trade_seq=self._next_trade,
            price_rule=self.config.price_rule,
        )
        for trade in result.trades:
            self._settle(trade, phase="continuous")
        if result.rejected_remainder is not None:
            release_order(account, order)
            self._event(
                day,
                phase,
                account.agent_id,
                "SelfCross",
                "remainder would cross this agent's own resting order",
                stock,
            )

    def _settle(self, trade: Trade, phase: str) -> None:
        buy_order = self._orders_by_id[trade.buy_order_id]
        sell_order = self._orders_by_id[trade.sell_order_id]
        settle_trade(
            self.by_id[trade.buyer_id],
            self.by_id[trade.seller_id],
            buy_order,
            sell_order,
            trade,
        )
        self._next_trade = max(self._next_trade, trade.seq + 1)
        self.day_trades[trade.stock_code].append(trade)
        self.trade_rows.append(
            {
                "day": trade.day,
                "seq": trade.seq,
                "stock_code": trade.stock_code,
                "price": str(trade.price),
                "quantity": trade.quantity,
                "buy_order_id": trade.buy_order_id,
                "sell_order_id": trade.sell_order_id,
                "buyer_id": trade.buyer_id,
                "seller_id": trade.seller_id,
                "phase": phase,
            }
        )

    # -- the day cycle --------------------------------------------------------

    def run_trading_day(self, day: int) -> DayReport:
        news = [event.text for event in self.scenario.news_for_day(day)]
        self.books = {company.code: OrderBook(company.code) for company in self.registry}
        self.day_trades = {company.code: [] for company in self.registry}
        self._day_order_count = 0
        self._day_placed = 0
        for account in self.accounts:
            reset_daily_ops(account)

        # opening round: everyone quotes into empty books, then the auction
        turn = list(self.accounts)
        self.fabric.rng("turn", day).shuffle(turn)
        for account in turn:
            obs = self._observation(day, news)
            for action in self._decide(account, obs, day, "open"):
                self._submit(account, action, day, "open", continuous=False)
        for company in self.registry:
            result = call_auction(
                self.books[company.code], day=day, first_trade_seq=self._next_trade
            )
            for trade in result.trades:
                self._settle(trade, phase="auction")
            for order in result.cancelled:
                release_order(self.by_id[order.agent_id], order)
                self._event(
                    day,
                    "auction",
                    order.agent_id,
                    "SelfCross",
                    "own orders met at the top of the book; later order cancelled",
                    order.stock_code,
                )

        # continuous rounds: publish indicative quotes, take revisions
        for round_no in range(1, self.config.continuous_rounds + 1):
            snapshots = {
                code: indicative_snapshot(book, self.config.indicative_depth)
                for code, book in self.books.items()
            }
            turn = list(self.accounts)
            self.fabric.rng("turn", day, round_no).shuffle(turn)
            phase = f"round{round_no}"
            for account in turn:
                obs = self._observation(day, news, snapshots=snapshots)
                for action in self._decide(account, obs, day, phase):
                    self._submit(account, action, day, phase, continuous=True)

        # expire residual orders, release escrow
        for book in self.books.values():
            for order in book.live_orders():
                release_order(self.by_id[order.agent_id], order)
            book.bids.clear()
            book.asks.clear()

        # closes, mark to market, audits
        closes: dict[str, Money] = {}
        executed = 0
        stock_volume: dict[str, int] = {}
        for company in self.registry:
            trades = self.day_trades[company.code]
            close = closing_price(trades, company.last_close, self.config.close_method)
            closes[company.code] = close
            volume = sum(t.quantity for t in trades)
            stock_volume[company.code] = volume
            executed += volume
            self.close_series[company.code].append(close)
        self._audit(day, closes)

        outstanding = {
            company.code: company.shares_outstanding for company in self.registry
        }
        report = DayReport(
            day=day,
            closes=closes,
            stock_volume=stock_volume,
            order_count=self._day_order_count,
            placed=self._day_placed,
            executed=executed,
            turnover=turnover_rate(
                [t for trades in self.day_trades.values() for t in trades],
                outstanding,
            )
            if sum(outstanding.values())
            else 0.0,
            vol=market_volatility(self.close_series),
            avg_return=average_stock_return(self.close_series),
            agent_assets={
                account.agent_id: total_assets(account, closes)
                for account in self.accounts
            },
            agent_returns={
                account.agent_id: float(return_rate(account, closes))
                for account in self.accounts
            },
        )
        self.reports.append(report)

        # advance price histories for tomorrow's windows
        for company in self.registry:
            company.price_history.append(closes[company.code])
        return report

    def _audit(self, day: int, closes: Mapping[str, Money]) -> None:
        cash_total = sum((account.total_cash for account in self.accounts), money("0"))
        if cash_total != self.initial_cash_total:
            raise ConservationError(
                f"day {day}: cash total {cash_total} != initial {self.initial_cash_total}"
            )
        for company in self.registry:
            held = sum(
                account.position(company.code) for account in self.accounts
            )
            if held != company.shares_outstanding:
                raise ConservationError(
                    f"day {day}: {company.code} holdings {held} != "
                    f"outstanding {company.shares_outstanding}"
                )

    # -- artifacts -------------------------------------------------------------

    def run(self) -> RunLog:
        for day in range(1, self.scenario.days + 1):
            self.run_trading_day(day)
        return self._write_artifacts()

    def _summary(self) -> dict:
        final_closes = {
            code: series[-1] for code, series in self.close_series.items()
        }
        outstanding = {
            company.code: company.shares_outstanding for company in self.registry
        }
        placed = sum(r.placed for r in self.reports)
        executed = sum(r.executed for r in self.reports)
        return {
            "run_id": self.run_id,
            "scenario": self.scenario.name,
            "days": self.scenario.days,
            "seed": self.seed,
            "transport": self.config.transport,
            "order_number": sum(r.order_count for r in self.reports),
            "order_execution_rate": (executed / placed) if placed else None,
            "turnover_rate": (
                executed / sum(outstanding.values())
                if sum(outstanding.values())
                else 0.0
            ),
            "volatility": market_volatility(self.close_series),
            "average_stock_return": average_stock_return(self.close_series),
            "agent_returns": {
                account.agent_id: float(return_rate(account, final_closes))
                for account in self.accounts
            },
            "agent_assets": {
                account.agent_id: str(total_assets(account, final_closes))
                for account in self.accounts
            },
            "initial_cash_total": str(self.initial_cash_total),
            "final_cash_total": str(
                sum((account.total_cash for account in self.accounts), money("0"))
            ),
            "shares_outstanding": outstanding,
        }

    def _artifact_texts(self) -> dict[str, str]:
        texts: dict[str, str] = {}
        texts["config.json"] = json.dumps(self.config.to_dict(), indent=2) + "\n"
        texts["companies.json"] = (
            json.dumps(self.registry.to_dict(), indent=2) + "\n"
        )
        texts["orders.jsonl"] = "".join(
            _json_line(row) + "\n" for row in self.order_rows
        )
        texts["trades.jsonl"] = "".join(
            _json_line(row) + "\n" for row in self.trade_rows
        )
        texts["prompts.jsonl"] = "".join(
            _json_line(row) + "\n" for row in self.prompt_rows
        )
        texts["events.jsonl"] = "".join(
            _json_line(row) + "\n" for row in self.event_rows
        )

        codes = self.registry.codes
        closes_lines = ["day," + ",".join(codes)]
        run_days = len(self.close_series[codes[0]])
        for index in range(run_days):
            closes_lines.append(
                f"{index},"
                + ",".join(str(self.close_series[code][index]) for code in codes)
            )
        texts["closes.csv"] = "\n".join(closes_lines) + "\n"

        agent_ids = [account.agent_id for account in self.accounts]
        metric_lines = [
            "day,order_number,order_execution_rate,turnover_rate,volatility,"
            "average_stock_return," + ",".join(agent_ids)
        ]
        for report in self.reports:
            metric_lines.append(
                ",".join(
                    [
                        str(report.day),
                        str(report.order_count),
                        _fmt(report.oer),
                        _fmt(report.turnover),
                        _fmt(report.vol),
                        _fmt(report.avg_return),
                    ]
                    + [_fmt(report.agent_returns[agent]) for agent in agent_ids]
                )
            )
        texts["metrics.csv"] = "\n".join(metric_lines) + "\n"

        texts["summary.json"] = json.dumps(self._summary(), indent=2) + "\n"
        if self.transcript is not None and self.policy.policy_backend == "llm":
            texts["transcript.jsonl"] = "".join(
                record.to_json() + "\n" for record in self.transcript
            )
        return texts

    def _write_artifacts(self) -> RunLog:
        out = self.config.output_dir
        out.mkdir(parents=True, exist_ok=True)
        texts = self._artifact_texts()
        digests = {}
        for name, text in texts.items():
            data = text.encode("utf-8")
            (out / name).write_bytes(data)
            digests[name] = _sha256(data)
        manifest = {"run_id": self.run_id, "artifacts": digests}
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        return RunLog(
            run_dir=out,
            manifest=manifest,
            summary=self._summary(),
            reports=self.reports,
        )


def run_simulation(
    config: RunConfig,
    transcript: Transcript | None = None,
    responder=None,
    transport_override=None,
) -> RunLog:
    sim = Simulation(
        config,
        transcript=transcript,
        responder=responder,
        transport_override=transport_override,
    )
    return sim.run()


def _first_divergence(old: str, new: str) -> str:
    old_lines = old.splitlines()
    new_lines = new.splitlines()
    for index, (a, b) in enumerate(zip(old_lines, new_lines)):
        if a != b:
            context = ""
            try:
                record = json.loads(a)
                where = []
                if isinstance(record, dict):
                    if "day" in record:
                        where.append(f"day {record['day']}")
                    if "stock_code" in record:
                        where.append(f"stock {record['stock_code']}")
                if where:
                    context = f" ({', '.join(where)})"
            except ValueError:
                pass
            return f"first divergence at line {index + 1}{context}"
    return (
        f"line counts differ: recorded {len(old_lines)}, replayed {len(new_lines)}"
    )


def verify_replay(run_dir: str | Path, work_dir: str | Path | None = None):
    """Re-execute a recorded run and compare digests.

    Returns ReplayOk or a DriftReport naming the stage: config (snapshot was
    edited), transcript (a record was tampered with or no longer matches the
    prompts), or artifact (re-execution diverged, with the first line named).
    """
    run_dir = Path(run_dir)
    try:
        manifest = json.loads((run_dir / "manifest.json").read_text("utf-8"))
    except (OSError, ValueError) as exc:
        return DriftReport(stage="config", detail=f"unreadable manifest: {exc}")
    artifacts: dict[str, str] = manifest.get("artifacts", {})

    config_path = run_dir / "config.json"
    if "config.json" not in artifacts or not config_path.exists():
        return DriftReport(stage="config", detail="config snapshot missing")
    config_bytes = config_path.read_bytes()
    if _sha256(config_bytes) != artifacts["config.json"]:
        return DriftReport(stage="config", detail="config snapshot digest mismatch")

    transcript = None
    if "transcript.jsonl" in artifacts:
        try:
            transcript = Transcript.load(run_dir / "transcript.jsonl")
        except (OSError, ValueError, KeyError) as exc:
            return DriftReport(stage="transcript", detail=f"unreadable transcript: {exc}")
        tampered = transcript.tampered_tags()
        if tampered:
            return DriftReport(
                stage="transcript",
                tag=tampered[0].key(),
                detail="record digest mismatch (transcript edited)",
            )
        transcript_bytes = (run_dir / "transcript.jsonl").read_bytes()
        if _sha256(transcript_bytes) != artifacts["transcript.jsonl"]:
            return DriftReport(
                stage="transcript",
                detail="transcript digest mismatch (records valid but file altered)",
            )

    # the stored files must still be the ones the manifest describes;
    # otherwise a clean re-execution would mask an edited or missing artifact
    for name, digest in sorted(artifacts.items()):
        stored = run_dir / name
        if not stored.exists():
            return DriftReport(stage="artifact", artifact=name, detail="artifact missing")
        if _sha256(stored.read_bytes()) != digest:
            return DriftReport(
                stage="artifact",
                artifact=name,
                detail="stored file digest mismatch (edited after the run)",
            )

    if work_dir is None:
        scratch = tempfile.TemporaryDirectory(prefix="asfm-replay-")
        target = Path(scratch.name) / "replay"
    else:
        scratch = None
        target = Path(work_dir)
    try:
        config = RunConfig.from_dict(json.loads(config_bytes), output_dir=target)
        override = ReplayTransport(transcript) if transcript is not None else None
        try:
            run_simulation(config, transcript=transcript, transport_override=override)
        except (ReplayMiss, DriftDetected) as exc:
            tag = None
            text = str(exc)
            if "tag " in text:
                tag = text.rsplit("tag ", 1)[1]
            return DriftReport(stage="transcript", tag=tag, detail=text)
        for name, digest in sorted(artifacts.items()):
            replayed = target / name
            if not replayed.exists():
                return DriftReport(
                    stage="artifact", artifact=name, detail="artifact not reproduced"
                )
            new_bytes = replayed.read_bytes()
            if _sha256(new_bytes) != digest:
                detail = _first_divergence(
                    (run_dir / name).read_text("utf-8"),
                    new_bytes.decode("utf-8"),
                )
                return DriftReport(stage="artifact", artifact=name, detail=detail)
        return ReplayOk(run_id=manifest.get("run_id", config.run_id))
    finally:
        if scratch is not None:
            scratch.cleanup()
