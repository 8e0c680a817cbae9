"""
A scheduled news shock moves the tape
=====================================

The rate_cut scenario injects a central-bank announcement into every
agent's observation prompt on day 10.  Value investors read lower rates
as a higher fair multiple and lift their bids, so the market-wide close
path bends upward right at the announcement.  The demo runs eleven days
and prints the average close per day with the news day marked.
"""

import dataclasses
from pathlib import Path

from asfm import RunConfig, load_closes, preset_scenario, run_simulation

out = Path(__file__).resolve().parent.parent / "demo_runs" / "rate_cut"

scenario = dataclasses.replace(preset_scenario("rate_cut"), days=11)
log = run_simulation(RunConfig(scenario=scenario, output_dir=out))

news_days = {event.day for event in scenario.news_schedule}
series = load_closes(log.path("closes.csv"))

print("day  avg close")
for day in range(scenario.days + 1):
    avg = sum(series[code][day] for code in series) / len(series)
    marker = "  <- rate cut announced" if day in news_days else ""
    print(f"{day:>3}  {avg:>9.2f}{marker}")
