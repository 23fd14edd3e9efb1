"""Shared fixtures.

The published-table runs are expensive (minutes at 500 replications), so
each table is run at most once per session and shared between the harness
tests and the acceptance suite. Set ``STANDARDNESS_CI=1`` to use the
reduced 100-replication budget with doubled tolerances.
"""

import os
import time

import pytest

from standardness.experiments import CI_REPLICATIONS, FULL_REPLICATIONS, run_experiment, table_spec
from standardness.sampling import DEFAULT_SEED

CI_MODE = os.environ.get("STANDARDNESS_CI", "") not in ("", "0")
TABLE_REPLICATIONS = CI_REPLICATIONS if CI_MODE else FULL_REPLICATIONS

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def table_reports():
    cache = {}

    def get(table: int):
        if table not in cache:
            t0 = time.perf_counter()
            report = run_experiment(table_spec(table, TABLE_REPLICATIONS, DEFAULT_SEED, parallelism=1))
            cache[table] = (report, time.perf_counter() - t0)
        return cache[table]

    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        mode = f"CI mode, R={TABLE_REPLICATIONS}" if CI_MODE else f"R={TABLE_REPLICATIONS}"
        terminalreporter.section(f"acceptance criteria ({mode})")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
