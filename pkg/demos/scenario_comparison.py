"""
Strategy mix drives market activity
===================================

Runs three 30-day sessions that differ only in who is trading: the mixed
baseline population, a market of pure value investors, and a market of
pure aggressive traders.  With the seed held fixed, the activity metrics
line up with temperament: aggressive markets place more orders and churn
more shares, value markets sit on their hands until prices drift from
the long mean.
"""

from pathlib import Path

from asfm import RunConfig, preset_scenario, run_simulation

base = Path(__file__).resolve().parent.parent / "demo_runs"

rows = []
for name in ("baseline", "all_value", "all_aggressive"):
    config = RunConfig(scenario=preset_scenario(name), output_dir=base / name)
    log = run_simulation(config)
    s = log.summary
    rows.append(
        (
            name,
            s["order_number"],
            s["order_execution_rate"],
            s["turnover_rate"],
            s["volatility"],
        )
    )

print(f"{'scenario':<16} {'orders':>6} {'exec':>8} {'turnover':>8} {'vol':>8}")
for name, on, oer, tr, vo in rows:
    oer_text = f"{oer:.4f}" if oer is not None else "n/a"
    print(f"{name:<16} {on:>6} {oer_text:>8} {tr:>8.4f} {vo:>8.4f}")
