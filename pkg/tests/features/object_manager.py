# conflict-sim - traffic-conflict game simulation toolkit

from tests.features.games import Games
from tests.features.records import Records


class ObjectManager:
    """Manages instantiation and retrieval of the hand-built game and record factories."""

    def get_games(self):
        """Instantiates and returns the synthetic game tree factory."""
        return Games()

    def get_records(self):
        """Instantiates and returns the batch record factory."""
        return Records()
