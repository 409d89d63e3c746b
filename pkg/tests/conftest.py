# conflict-sim - traffic-conflict game simulation toolkit

import pytest

from conflict_sim import ConflictSimulator
from tests.features.object_manager import ObjectManager
from tests.test_data.data import TestData


def pytest_addoption(parser):
    """
    Add a custom command-line option '--fixture_scope'.

    Usage:
    Run pytest with '--fixture_scope=function' to build a fresh simulator for every test.
    """
    parser.addoption("--fixture_scope", action="store", default="class")


def determine_scope(fixture_name, config):
    """Scope of the `setup` fixture, taken from --fixture_scope."""
    return config.getoption("--fixture_scope")


@pytest.fixture(scope=determine_scope)
def setup(request):
    """
    Load the built-in pedestrian-vehicle experiment reduced to a two-stage, four-game sweep and attach it to
    the test class.

    Args:
        request (FixtureRequest): The fixture request object.

    Yields:
        (ConflictSimulator): A simulator with the reduced experiment loaded.
    """
    overrides = TestData().get_experiment_data()["small_overrides"]
    simulator = ConflictSimulator("ped_veh", overrides=overrides)

    request.cls.simulator = simulator
    yield simulator


@pytest.fixture(scope="module")
def data_for_test():
    """Module-wide scratch dictionary for solved games or batch records shared between test cases."""
    yield {}


@pytest.fixture(scope="function")
def objects():
    """Fixture returning the manager of hand-built games and records."""
    return ObjectManager()


@pytest.fixture(scope="function")
def small_records(setup):
    """Four played games on the reduced sweep, solved in-process."""
    return setup.run_batch(worker_count=1, progress=False)


@pytest.fixture(scope="function")
def quiet_output(monkeypatch, tmp_path):
    """Route default run outputs into a temporary directory."""
    monkeypatch.setattr("conflict_sim.config.CONFLICT_SIM_OUTPUT", str(tmp_path / "runs"))
    yield tmp_path / "runs"
