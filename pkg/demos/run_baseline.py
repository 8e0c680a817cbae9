"""
A first market session
======================

Runs the 30-day baseline scenario end to end with the built-in rule
policies, then walks through what the run directory contains.  The same
session is available from the command line as:

    asfm simulate --scenario baseline --out demo_runs/baseline
"""

from pathlib import Path

from asfm import RunConfig, preset_scenario, run_simulation

out = Path(__file__).resolve().parent.parent / "demo_runs" / "baseline"

# a RunConfig pins everything that shapes the tape: scenario, seed,
# transport, rounds per day; identical configs produce identical bytes
config = RunConfig(scenario=preset_scenario("baseline"), output_dir=out)
log = run_simulation(config)

summary = log.summary
print(f"run id        {summary['run_id']}")
print(f"days          {summary['days']}  (seed {summary['seed']})")
print(f"orders placed {summary['order_number']}")
print(f"execution     {summary['order_execution_rate']:.4f}")
print(f"turnover      {summary['turnover_rate']:.4f}")
print(f"volatility    {summary['volatility']:.4f}")
print(f"avg return    {summary['average_stock_return']:+.4f}")
print()

# every agent starts from its strategy's capital; returns compare end-of-run
# total assets (cash plus holdings at final closes) against that start
print("agent returns")
for agent_id, ret in summary["agent_returns"].items():
    print(f"  {agent_id:<8} {ret:+.4f}")
print()

# the run directory is the complete, replayable record of the session
print(f"artifacts in {log.run_dir}")
for name in sorted(log.manifest["artifacts"]):
    print(f"  {name}")
