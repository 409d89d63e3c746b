# conflict-sim - traffic-conflict game simulation toolkit

import json
from pathlib import Path


def load_data(file_path):
    """Loads and returns JSON data from the specified file path, returning `None` if the file does not exist."""
    try:
        with open(file_path) as file:
            return json.load(file)
    except FileNotFoundError:
        print(f"File {file_path} not found.")
        return None


class TestData:
    """Fixed inputs and expected values shared by the functional tests."""

    _data = load_data(Path(__file__).parent / "data.json")

    @classmethod
    def get_experiment_data(cls):
        """Returns the reduced-sweep overrides and the expected sizes of the built-in experiments."""
        return cls._data["experiment_data"]

    @classmethod
    def get_taxonomy_data(cls):
        """Returns symbol sequences with their expected categories and the collapse map."""
        return cls._data["taxonomy_data"]

    @classmethod
    def get_utility_data(cls):
        """Returns penalty and lexicographic combination cases."""
        return cls._data["utility_data"]

    @classmethod
    def get_solver_data(cls):
        """Returns stage games as (agent-1 action, agent-2 action, agent) payoff tables."""
        return cls._data["solver_data"]
