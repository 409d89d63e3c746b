# conflict-sim - traffic-conflict game simulation toolkit

import copy
import itertools
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from shapely.geometry import Polygon

from conflict_sim.base.errors import ConfigError, ScenarioValidationError
from conflict_sim.base.geometry import Path, default_conflict_zone, is_convex, zone_interval
from conflict_sim.base.params import (
    PEDESTRIAN_SPEED_RANGE,
    VEHICLE_SPEED_RANGE,
    GameParams,
    SolverParams,
    TrajectoryParams,
    UtilityParams,
    from_mapping,
    to_mapping,
)
from conflict_sim.helpers.utils import derive_seed, fingerprint
from conflict_sim.modules.trajectory import AgentState

CFG_DIR = FilePath(__file__).resolve().parents[1] / "cfg"

SCENARIO_KINDS = ("pedestrian_vehicle", "vehicle_vehicle")
AGENT_KINDS = ("pedestrian", "vehicle")
DEFAULT_GAMMA_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)

_TOP_KEYS = ("scenario_id", "kind", "agents", "conflict_zone", "sweep", "game", "utility", "trajectory", "solver")
_AGENT_KEYS = ("agent_id", "kind", "path", "row_holder", "initial_state", "type_gamma")
_SWEEP_KEYS = ("pedestrian_speeds", "vehicle_speeds", "gamma_grid", "seed")
_STATE_KEYS = ("x", "y", "v_x", "v_y", "a_x", "a_y", "theta")


@dataclass(frozen=True, eq=False)
class AgentSpec:
    """
    One road user of a conflict scenario.

    Attributes:
        agent_id (str): Identifier used in records and reports.
        kind (str): "pedestrian" or "vehicle".
        path (Path): Polyline from start to goal.
        row_holder (bool): Whether this agent holds the right-of-way.
        initial_state (AgentState): State at t = 0; its speed is replaced by the sweep speed.
        type_gamma (float): Risk tolerance in [-1, 1].
    """

    agent_id: str
    kind: str
    path: Path
    row_holder: bool
    initial_state: AgentState
    type_gamma: float = 0.0


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    A two-agent conflict: paths, conflict zone and right-of-way assignment.

    Attributes:
        scenario_id (str): Identifier.
        agents (Tuple[AgentSpec, AgentSpec]): Exactly two agents, exactly one holding the ROW.
        conflict_zone (Polygon): Convex region both paths cross (m).
        kind (str): "pedestrian_vehicle" or "vehicle_vehicle".
        zone_arcs (Tuple[Tuple[float, float], ...]): Per-agent (entry, exit) arc lengths of the conflict zone.
    """

    scenario_id: str
    agents: Tuple[AgentSpec, AgentSpec]
    conflict_zone: Polygon
    kind: str
    zone_arcs: Tuple[Tuple[float, float], Tuple[float, float]] = field(default=((0.0, 0.0), (0.0, 0.0)))

    @property
    def holder_index(self) -> int:
        """Index (0 or 1) of the ROW-holding agent."""
        return 0 if self.agents[0].row_holder else 1

    def exit_arc(self, agent: int) -> float:
        """Arc length past which `agent` has cleared the conflict zone."""
        return self.zone_arcs[agent][1]


@dataclass(frozen=True)
class SweepConfig:
    """
    Initial-condition grid of an experiment.

    Attributes:
        pedestrian_speeds (Tuple[float, ...]): Initial pedestrian speeds (m/s).
        vehicle_speeds (Tuple[float, ...]): Initial vehicle speeds (m/s).
        gamma_grid (Tuple[float, ...]): Agent types swept for both agents.
        seed (int): Master seed from which per-game seeds are derived.
    """

    pedestrian_speeds: Tuple[float, ...] = tuple(np.linspace(1.3, 1.8, 5).round(9).tolist())
    vehicle_speeds: Tuple[float, ...] = tuple(np.linspace(1.0, 12.0, 10).round(9).tolist())
    gamma_grid: Tuple[float, ...] = DEFAULT_GAMMA_GRID
    seed: int = 0

    def speeds_for(self, kind: str) -> Tuple[float, ...]:
        """Initial speeds swept for an agent kind."""
        return self.pedestrian_speeds if kind == "pedestrian" else self.vehicle_speeds


@dataclass(frozen=True, eq=False)
class GameSetup:
    """
    One game of a sweep: a scenario with concrete initial speeds and agent types.

    Attributes:
        index (int): Position in the expanded sweep.
        scenario (Scenario): The conflict scenario.
        speeds (Tuple[float, float]): Initial speed of each agent (m/s).
        gammas (Tuple[float, float]): Type of each agent.
        seed (int): Per-game seed derived from the master seed and the index.
    """

    index: int
    scenario: Scenario
    speeds: Tuple[float, float]
    gammas: Tuple[float, float]
    seed: int = 0

    @property
    def game_id(self) -> str:
        """Identifier used in records, e.g. "ped_veh-0042"."""
        return f"{self.scenario.scenario_id}-{self.index:04d}"

    def initial_arc(self, agent: int) -> float:
        """Arc position of an agent at t = 0 (its configured position projected onto its path)."""
        spec = self.scenario.agents[agent]
        return spec.path.project(spec.initial_state.x, spec.initial_state.y)

    def initial_state(self, agent: int) -> AgentState:
        """State of an agent at t = 0: on its path, heading along it, moving at the swept speed."""
        path = self.scenario.agents[agent].path
        arc = self.initial_arc(agent)
        x, y = path.position(arc)
        return AgentState(x=float(x), y=float(y), v_y=float(self.speeds[agent]), theta=float(path.heading(arc)))


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    Everything one experiment document defines.

    Attributes:
        scenario (Scenario): The conflict scenario.
        sweep (SweepConfig): Initial-condition grid.
        game (GameParams): Game and solver constants.
        utility (UtilityParams): Utility constants.
        trajectory (TrajectoryParams): Action generation settings.
        solver (SolverParams): Solution concept selection.
        document (dict): The fully-defaulted document, echoed in reports.
    """

    scenario: Scenario
    sweep: SweepConfig
    game: GameParams
    utility: UtilityParams
    trajectory: TrajectoryParams
    solver: SolverParams
    document: Dict[str, Any]

    @property
    def fingerprint(self) -> str:
        """Hash of all configuration values."""
        return fingerprint(self.document)


def _reject_unknown(mapping: Mapping, allowed: Sequence[str], path: str) -> None:
    """Raise ConfigError for the first key of `mapping` outside `allowed`."""
    if not isinstance(mapping, Mapping):
        raise ConfigError(f"section '{path}' must be a mapping")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key '{path}.{unknown[0]}'" if path else f"unknown key '{unknown[0]}'")


def _require(mapping: Mapping, key: str, path: str) -> Any:
    """Fetch a required key, naming it when missing."""
    if key not in mapping:
        raise ConfigError(f"missing required field '{path}{key}'")
    return mapping[key]


def _numbers(value: Any, path: str) -> Tuple[float, ...]:
    """A list of finite numbers as a float tuple."""
    if not isinstance(value, (list, tuple)) or any(
        isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
    ):
        raise ConfigError(f"field '{path}' must be a list of numbers")
    return tuple(float(v) for v in value)


def _parse_agent(raw: Mapping, index: int) -> AgentSpec:
    """Parse one entry of `agents`."""
    where = f"agents[{index}]"
    _reject_unknown(raw, _AGENT_KEYS, where)
    kind = _require(raw, "kind", f"{where}.")
    if kind not in AGENT_KINDS:
        raise ConfigError(f"field '{where}.kind' must be one of {AGENT_KINDS}, got {kind!r}")

    try:
        path = Path(_require(raw, "path", f"{where}."))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"field '{where}.path': {e}") from e

    row_holder = _require(raw, "row_holder", f"{where}.")
    if not isinstance(row_holder, bool):
        raise ConfigError(f"field '{where}.row_holder' must be true or false")

    state_raw = _require(raw, "initial_state", f"{where}.")
    _reject_unknown(state_raw, _STATE_KEYS, f"{where}.initial_state")
    try:
        state = AgentState(**{k: float(v) for k, v in state_raw.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"field '{where}.initial_state': {e}") from e

    gamma = raw.get("type_gamma", 0.0)
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)) or not -1.0 <= gamma <= 1.0:
        raise ConfigError(f"field '{where}.type_gamma' must be a number in [-1, 1], got {gamma!r}")

    return AgentSpec(
        agent_id=str(raw.get("agent_id", f"agent{index + 1}")),
        kind=kind,
        path=path,
        row_holder=row_holder,
        initial_state=state,
        type_gamma=float(gamma),
    )


def _parse_sweep(raw: Optional[Mapping]) -> SweepConfig:
    """Parse the `sweep` section and check the speed ranges."""
    raw = raw or {}
    _reject_unknown(raw, _SWEEP_KEYS, "sweep")
    defaults = SweepConfig()
    seed = raw.get("seed", defaults.seed)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"field 'sweep.seed' must be an integer, got {seed!r}")
    sweep = SweepConfig(
        pedestrian_speeds=_numbers(raw.get("pedestrian_speeds", defaults.pedestrian_speeds), "sweep.pedestrian_speeds"),
        vehicle_speeds=_numbers(raw.get("vehicle_speeds", defaults.vehicle_speeds), "sweep.vehicle_speeds"),
        gamma_grid=_numbers(raw.get("gamma_grid", defaults.gamma_grid), "sweep.gamma_grid"),
        seed=seed,
    )
    validate_sweep(sweep)
    return sweep


def validate_sweep(sweep: SweepConfig) -> None:
    """
    Check sweep values against the admissible ranges.

    Raises:
        (ScenarioValidationError): If a speed or type lies outside its range.
    """
    for name, speeds, (lo, hi) in (
        ("pedestrian_speeds", sweep.pedestrian_speeds, PEDESTRIAN_SPEED_RANGE),
        ("vehicle_speeds", sweep.vehicle_speeds, VEHICLE_SPEED_RANGE),
    ):
        bad = [v for v in speeds if not lo - 1e-9 <= v <= hi + 1e-9]
        if bad:
            raise ScenarioValidationError(f"sweep.{name} value {bad[0]} outside [{lo}, {hi}] m/s")
    bad = [g for g in sweep.gamma_grid if not -1.0 <= g <= 1.0]
    if bad:
        raise ScenarioValidationError(f"sweep.gamma_grid value {bad[0]} outside [-1, 1]")


def _parse_scenario(doc: Mapping) -> Scenario:
    """Parse and validate the scenario part of a document."""
    scenario_id = str(_require(doc, "scenario_id", ""))
    kind = _require(doc, "kind", "")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"field 'kind' must be one of {SCENARIO_KINDS}, got {kind!r}")

    raw_agents = _require(doc, "agents", "")
    if not isinstance(raw_agents, list) or len(raw_agents) != 2:
        raise ConfigError("field 'agents' must list exactly 2 agents")
    agents = tuple(_parse_agent(raw, i) for i, raw in enumerate(raw_agents))

    holders = sum(a.row_holder for a in agents)
    if holders != 1:
        raise ScenarioValidationError(f"exactly one agent must hold the right-of-way, found {holders}")
    expected = ["pedestrian", "vehicle"] if kind == "pedestrian_vehicle" else ["vehicle", "vehicle"]
    if sorted(a.kind for a in agents) != expected:
        raise ScenarioValidationError(f"scenario kind {kind} requires agents {expected}")
    if agents[0].agent_id == agents[1].agent_id:
        raise ScenarioValidationError(f"agent ids must differ, both are {agents[0].agent_id!r}")

    raw_zone = doc.get("conflict_zone")
    try:
        if raw_zone is None:
            zone = default_conflict_zone(agents[0].path, agents[1].path)
        else:
            zone = Polygon(raw_zone)
    except (TypeError, ValueError) as e:
        raise ScenarioValidationError(f"field 'conflict_zone': {e}") from e
    if not is_convex(zone):
        raise ScenarioValidationError("field 'conflict_zone' must be a convex polygon")

    try:
        zone_arcs = tuple(zone_interval(a.path, zone) for a in agents)
    except ValueError as e:
        raise ScenarioValidationError(f"both agent paths must intersect the conflict zone: {e}") from e

    return Scenario(scenario_id=scenario_id, agents=agents, conflict_zone=zone, kind=kind, zone_arcs=zone_arcs)


def _scenario_document(scenario: Scenario) -> Dict[str, Any]:
    """Scenario part of the fully-defaulted document."""
    agents = []
    for a in scenario.agents:
        s = a.initial_state
        agents.append(
            {
                "agent_id": a.agent_id,
                "kind": a.kind,
                "path": a.path.points.tolist(),
                "row_holder": a.row_holder,
                "initial_state": {k: getattr(s, k) for k in _STATE_KEYS},
                "type_gamma": a.type_gamma,
            }
        )
    zone = [list(c) for c in scenario.conflict_zone.exterior.coords[:-1]]
    return {"scenario_id": scenario.scenario_id, "kind": scenario.kind, "agents": agents, "conflict_zone": zone}


def load_config(config_document: Union[str, Mapping[str, Any]]) -> ExperimentConfig:
    """
    Parse and validate an experiment document.

    Args:
        config_document (str | Mapping): YAML text or an already-parsed mapping.

    Returns:
        (ExperimentConfig): The validated experiment with its fully-defaulted document.

    Raises:
        (ConfigError): If the document does not conform to the schema; the message names the field.
        (ScenarioValidationError): If a scenario or sweep invariant is violated.
    """
    if isinstance(config_document, str):
        try:
            doc = yaml.safe_load(config_document)
        except yaml.YAMLError as e:
            raise ConfigError(f"document is not valid YAML: {e}") from e
    else:
        doc = config_document
    if not isinstance(doc, Mapping):
        raise ConfigError("document must be a mapping at the top level")
    _reject_unknown(doc, _TOP_KEYS, "")

    scenario = _parse_scenario(doc)
    sweep = _parse_sweep(doc.get("sweep"))
    game = from_mapping(GameParams, doc.get("game"), "game")
    utility = from_mapping(UtilityParams, doc.get("utility"), "utility")
    trajectory = from_mapping(TrajectoryParams, doc.get("trajectory"), "trajectory")
    solver = from_mapping(SolverParams, doc.get("solver"), "solver")

    document = _scenario_document(scenario)
    document["sweep"] = {
        "pedestrian_speeds": list(sweep.pedestrian_speeds),
        "vehicle_speeds": list(sweep.vehicle_speeds),
        "gamma_grid": list(sweep.gamma_grid),
        "seed": sweep.seed,
    }
    for key, section in (("game", game), ("utility", utility), ("trajectory", trajectory), ("solver", solver)):
        document[key] = to_mapping(section)

    return ExperimentConfig(
        scenario=scenario,
        sweep=sweep,
        game=game,
        utility=utility,
        trajectory=trajectory,
        solver=solver,
        document=document,
    )


def load_scenario(config_document: Union[str, Mapping[str, Any]]) -> Scenario:
    """
    Parse a document and return its validated scenario.

    Args:
        config_document (str | Mapping): YAML text or an already-parsed mapping.

    Returns:
        (Scenario): The scenario with all invariants checked.
    """
    return load_config(config_document).scenario


def apply_overrides(config: ExperimentConfig, overrides: Sequence[str]) -> ExperimentConfig:
    """
    Apply dotted-path `key=value` overrides to a loaded experiment.

    Values are parsed as YAML scalars or lists, so `game.epsilon=0.2` and `sweep.gamma_grid=[0, 1]` both work.

    Args:
        config (ExperimentConfig): The experiment to modify.
        overrides (Sequence[str]): Strings of the form "section.key=value".

    Returns:
        (ExperimentConfig): A re-validated experiment.

    Raises:
        (ConfigError): If an override is malformed or names a key absent from the document.
    """
    if not overrides:
        return config
    doc = copy.deepcopy(config.document)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} must have the form key=value")
        parts = key.split(".")
        node = doc
        for i, part in enumerate(parts):
            if isinstance(node, list) and part.isdigit() and int(part) < len(node):
                part = int(part)
            elif not isinstance(node, dict) or part not in node:
                raise ConfigError(f"unknown override key '{key}'")
            if i == len(parts) - 1:
                try:
                    node[part] = yaml.safe_load(raw)
                except yaml.YAMLError as e:
                    raise ConfigError(f"override {item!r} has an unparsable value") from e
            else:
                node = node[part]
    return load_config(doc)


def read_config(path: Union[str, FilePath]) -> ExperimentConfig:
    """
    Load an experiment document from disk, or a built-in one by name ("ped_veh", "veh_veh").

    Args:
        path (str | Path): File path or built-in name.

    Returns:
        (ExperimentConfig): The validated experiment.
    """
    file = FilePath(path)
    if not file.is_file() and (CFG_DIR / f"{path}.yaml").is_file():
        file = CFG_DIR / f"{path}.yaml"
    try:
        text = file.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return load_config(text)


def expand_sweep(scenario: Scenario, sweep: SweepConfig) -> List[GameSetup]:
    """
    Expand a sweep into individual games.

    The order is the Cartesian product (agent-1 speeds) × (agent-2 speeds) × (agent-1 γ) × (agent-2 γ), with the
    last factor varying fastest.

    Args:
        scenario (Scenario): The conflict scenario.
        sweep (SweepConfig): Initial-condition grid.

    Returns:
        (List[GameSetup]): |S1|·|S2|·|Γ|² setups, each with a seed derived from the master seed and its index.

    Raises:
        (ScenarioValidationError): If the product is empty or a value is out of range.
    """
    validate_sweep(sweep)
    s1 = sweep.speeds_for(scenario.agents[0].kind)
    s2 = sweep.speeds_for(scenario.agents[1].kind)
    grid = sweep.gamma_grid
    if not (s1 and s2 and grid):
        raise ScenarioValidationError("sweep expands to no games (empty speed or gamma list)")

    return [
        GameSetup(index=i, scenario=scenario, speeds=(v1, v2), gammas=(g1, g2), seed=derive_seed(sweep.seed, i))
        for i, (v1, v2, g1, g2) in enumerate(itertools.product(s1, s2, grid, grid))
    ]
