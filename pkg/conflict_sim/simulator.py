# conflict-sim - traffic-conflict game simulation toolkit

from functools import wraps
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

from conflict_sim.base.errors import ExperimentNotLoadedError
from conflict_sim.helpers.logger import logger
from conflict_sim.modules.game import GameTree, StrategyProfile
from conflict_sim.modules.harness import (
    DistributionTable,
    GameRecord,
    aggregate_distribution,
    emit_report,
    run_batch,
    solve_game,
)
from conflict_sim.modules.scenario import (
    ExperimentConfig,
    GameSetup,
    Scenario,
    apply_overrides,
    expand_sweep,
    load_config,
    read_config,
)
from conflict_sim.modules.solvers import DeviationReport, SolverResult, verify_epsilon_equilibrium
from conflict_sim.modules.taxonomy import OutcomeRecord


def require_experiment(func) -> callable:
    """
    A decorator ensuring that the wrapped method only runs once an experiment is loaded.

    Args:
        func (callable): The method to be wrapped.

    Returns:
        (callable): The wrapped method.
    """

    @wraps(func)
    def wrapper(self, *args, **kwargs):
        """Raise ExperimentNotLoadedError when no experiment is loaded."""
        if self.experiment is None:
            raise ExperimentNotLoadedError(f"{func.__name__}() needs an experiment; call load() first")
        return func(self, *args, **kwargs)

    return wrapper


class ConflictSimulator:
    """
    Entry point bundling the scenario, solver and reporting modules around one experiment.

    Attributes:
        experiment (ExperimentConfig, None): The loaded experiment.

    Examples:
        >>> sim = ConflictSimulator("ped_veh", overrides=["solver.concept=qlk"])
        >>> records = sim.run_batch(worker_count=4)
        >>> sim.report(records, "runs/ped_veh-qlk")
    """

    def __init__(self, config: Union[str, Path, Mapping, None] = None, overrides: Sequence[str] = ()):
        """
        Initialize the simulator, loading an experiment when one is given.

        Args:
            config (str | Path | Mapping, optional): Config file, built-in name or parsed document.
            overrides (Sequence[str]): Dotted-path `key=value` overrides.
        """
        self.experiment: Optional[ExperimentConfig] = None
        self._setups: Optional[List[GameSetup]] = None
        if config is not None:
            self.load(config, overrides)

    def load(self, config: Union[str, Path, Mapping], overrides: Sequence[str] = ()) -> ExperimentConfig:
        """
        Load and validate an experiment.

        Args:
            config (str | Path | Mapping): Config file, built-in name or parsed document.
            overrides (Sequence[str]): Dotted-path `key=value` overrides.

        Returns:
            (ExperimentConfig): The loaded experiment.
        """
        experiment = load_config(config) if isinstance(config, Mapping) else read_config(config)
        self.experiment = apply_overrides(experiment, list(overrides))
        self._setups = None
        logger.debug(f"loaded {self.experiment.scenario.scenario_id}, fingerprint {self.experiment.fingerprint}")
        return self.experiment

    @property
    @require_experiment
    def scenario(self) -> Scenario:
        """The loaded scenario."""
        return self.experiment.scenario

    @require_experiment
    def setups(self) -> List[GameSetup]:
        """All games of the sweep, in sweep order."""
        if self._setups is None:
            self._setups = expand_sweep(self.experiment.scenario, self.experiment.sweep)
        return self._setups

    @require_experiment
    def solve(self, index: int = 0) -> Dict[str, Union[SolverResult, StrategyProfile, OutcomeRecord, GameTree]]:
        """
        Build, solve and classify one game of the sweep.

        Args:
            index (int): Position of the game in the sweep.

        Returns:
            (dict): "result", "profile" (the played pure profile), "outcome" and "tree".
        """
        result, played, outcome, tree = solve_game(self.setups()[index], self.experiment)
        return {"result": result, "profile": played, "outcome": outcome, "tree": tree}

    @require_experiment
    def verify(self, index: int = 0) -> DeviationReport:
        """Solve one game and check its played profile against the configured epsilon."""
        solved = self.solve(index)
        return verify_epsilon_equilibrium(solved["tree"], solved["profile"], self.experiment.game.epsilon)

    @require_experiment
    def run_batch(self, concept: Optional[str] = None, worker_count: Optional[int] = None, progress: bool = True):
        """
        Play every game of the sweep.

        Args:
            concept (str, optional): Overrides the configured solution concept.
            worker_count (int, optional): Worker processes.
            progress (bool): Show a progress bar.

        Returns:
            (List[GameRecord]): One record per game.
        """
        return run_batch(self.experiment, concept=concept, worker_count=worker_count, progress=progress)

    @staticmethod
    def classify(records: Sequence[GameRecord], collapsed: bool = False) -> DistributionTable:
        """Joint (holder, non-holder) category distribution of a batch."""
        return aggregate_distribution(records, collapsed=collapsed)

    def report(self, records: Sequence[GameRecord], output_dir: Union[str, Path], fmt: str = "yaml"):
        """Write games.csv, the summary and the plot table; returns the written paths."""
        return emit_report(records, aggregate_distribution(records), output_dir, fmt=fmt, cfg=self.experiment)
