import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmblocal.graph import Dag, as_mag, latent_project, read_graph  # noqa: E402
from mmblocal.experiment import resolve_network  # noqa: E402

FIG1_LATENTS = ("V1", "V6")


@pytest.fixture(scope="session")
def fig1_dag():
    return Dag.of(read_graph(resolve_network("fig1")))


@pytest.fixture(scope="session")
def fig1_mag(fig1_dag):
    return latent_project(fig1_dag, FIG1_LATENTS)


@pytest.fixture(scope="session")
def fig3_mag():
    return as_mag(read_graph(resolve_network("fig3")))


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
