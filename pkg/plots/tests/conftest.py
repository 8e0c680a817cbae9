"""Shared fixtures: short simulator runs to render from.

The simulator is exercised strictly through its public API here; the
package under test never touches it and reads only the artifact files.
"""

import dataclasses

import pytest

from asfm import RunConfig, preset_scenario, run_simulation


def make_run(path, name="baseline", days=6, seed=None):
    scenario = dataclasses.replace(preset_scenario(name), days=days)
    if seed is not None:
        scenario = dataclasses.replace(scenario, seed=seed)
    return run_simulation(RunConfig(scenario=scenario, output_dir=path))


@pytest.fixture(scope="session")
def baseline_run(tmp_path_factory):
    return make_run(tmp_path_factory.mktemp("runs") / "baseline")


@pytest.fixture(scope="session")
def other_run(tmp_path_factory):
    return make_run(tmp_path_factory.mktemp("runs") / "other", seed=11)
