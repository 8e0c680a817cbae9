"""
Recording a session and proving it back
=======================================

With the llm policy backend every prompt and reply crosses the gateway
and lands in transcript.jsonl.  verify_replay re-executes the run from
its config, feeds the recorded replies back through a replay transport,
and compares every artifact byte for byte.  The demo records a short
session, verifies it, then corrupts a copy to show what a drift report
looks like.
"""

import dataclasses
import json
import shutil
from pathlib import Path

from asfm import RunConfig, preset_scenario, run_simulation, verify_replay

base = Path(__file__).resolve().parent.parent / "demo_runs"
out = base / "recorded"

scenario = dataclasses.replace(preset_scenario("baseline"), days=5)
policy = dataclasses.replace(scenario.policy_config, policy_backend="llm")
scenario = dataclasses.replace(scenario, policy_config=policy)

# the mock transport mirrors the rule policies through the prompt/parse
# path, so the recorded tape matches a rule run while exercising the
# same machinery a live model would
log = run_simulation(RunConfig(scenario=scenario, output_dir=out))
print(f"recorded {log.run_dir}")
print(f"verify (intact):   {verify_replay(log.run_dir)}")

# now corrupt one traded quantity in a copy of the run
tampered = base / "recorded_tampered"
if tampered.exists():
    shutil.rmtree(tampered)
shutil.copytree(log.run_dir, tampered)
trades = tampered / "trades.jsonl"
first, rest = trades.read_text().split("\n", 1)
row = json.loads(first)
row["quantity"] += 1
trades.write_text(json.dumps(row, separators=(",", ":")) + "\n" + rest)

print(f"verify (tampered): {verify_replay(tampered)}")
