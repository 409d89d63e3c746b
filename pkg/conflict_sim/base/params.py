# conflict-sim - traffic-conflict game simulation toolkit

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple, Type, TypeVar

from conflict_sim.base.errors import ConfigError

T = TypeVar("T")

# Field metadata keys: "key" renames the document key, "kind" selects the coercion
_FLOAT, _OPT_FLOAT, _INT, _STR, _FLOATS = "float", "optional_float", "int", "str", "floats"


def _param(default: Any, kind: str, key: Optional[str] = None, **kwargs) -> Any:
    """Declare a document-backed dataclass field."""
    metadata = {"kind": kind, "key": key}
    if isinstance(default, (tuple, KinematicLimits)):
        return field(default_factory=lambda: default, metadata=metadata, **kwargs)
    return field(default=default, metadata=metadata, **kwargs)


def _coerce(value: Any, kind: str, path: str) -> Any:
    """Convert one document value to the field's Python type, naming the field on failure."""
    if kind == _OPT_FLOAT and value is None:
        return None
    if kind in (_FLOAT, _OPT_FLOAT):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"field '{path}' must be a finite number, got {value!r}")
        return float(value)
    if kind == _INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field '{path}' must be an integer, got {value!r}")
        return value
    if kind == _STR:
        if not isinstance(value, str):
            raise ConfigError(f"field '{path}' must be a string, got {value!r}")
        return value
    if kind == _FLOATS:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"field '{path}' must be a list of numbers, got {value!r}")
        return tuple(_coerce(v, _FLOAT, f"{path}[{i}]") for i, v in enumerate(value))
    raise ConfigError(f"field '{path}' has unsupported kind {kind}")


def from_mapping(cls: Type[T], mapping: Optional[Mapping[str, Any]], path: str) -> T:
    """
    Build a parameter dataclass from a document section, rejecting unknown keys.

    Args:
        cls (type): A dataclass declared with `_param` fields.
        mapping (Mapping, optional): The document section; None yields all defaults.
        path (str): Dotted path of the section, used in error messages.

    Returns:
        (T): The validated instance.

    Raises:
        (ConfigError): If a key is unknown or a value has the wrong type.
    """
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, Mapping):
        raise ConfigError(f"section '{path}' must be a mapping, got {type(mapping).__name__}")

    fields = {f.metadata.get("key") or f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(mapping) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key '{path}.{unknown[0]}'")

    kwargs = {}
    for key, f in fields.items():
        if key not in mapping:
            continue
        if f.metadata["kind"] == "limits":
            kwargs[f.name] = from_mapping(KinematicLimits, mapping[key], f"{path}.{key}")
        else:
            kwargs[f.name] = _coerce(mapping[key], f.metadata["kind"], f"{path}.{key}")
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(f"section '{path}': {e}") from e


def to_mapping(obj: Any) -> Dict[str, Any]:
    """Inverse of `from_mapping`: a plain document section with every value filled in."""
    out = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if dataclasses.is_dataclass(value):
            value = to_mapping(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[f.metadata.get("key") or f.name] = value
    return out


@dataclass(frozen=True)
class KinematicLimits:
    """Bounds on speed, longitudinal and lateral acceleration, and jerk for one agent kind."""

    v_max: float = field(default=12.0, metadata={"kind": _FLOAT, "key": None})
    a_long_max: float = field(default=4.0, metadata={"kind": _FLOAT, "key": None})
    a_lat_max: float = field(default=3.0, metadata={"kind": _FLOAT, "key": None})
    jerk_max: float = field(default=10.0, metadata={"kind": _FLOAT, "key": None})

    def __post_init__(self):
        """Validate that every bound is strictly positive."""
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be strictly positive")


VEHICLE_LIMITS = KinematicLimits(v_max=12.0, a_long_max=4.0, a_lat_max=3.0, jerk_max=10.0)
PEDESTRIAN_LIMITS = KinematicLimits(v_max=1.8, a_long_max=2.0, a_lat_max=2.0, jerk_max=5.0)

# Admissible walking speeds for pedestrian proceed maneuvers (m/s)
PEDESTRIAN_SPEED_RANGE = (1.3, 1.8)
VEHICLE_SPEED_RANGE = (1.0, 12.0)


@dataclass(frozen=True)
class TrajectoryParams:
    """
    Settings for action generation at every game node.

    Attributes:
        dt (float): Nominal sample step in seconds.
        aggressive_threshold (float): Peak longitudinal acceleration above which a proceed is aggressive (m/s²).
        progress_epsilon (float): Arc progress below which a stopped trajectory counts as waiting (m).
        stop_speed (float): Speed below which an agent counts as stopped (m/s).
        max_actions (int): Cap on the number of trajectories per agent per node.
        speed_step (float): Offset of the slower/faster proceed targets around the current speed (m/s).
        pedestrian_speed_options (tuple): Walking speeds offered as pedestrian proceeds (m/s).
        vehicle_limits (KinematicLimits): Bounds applied to vehicle trajectories.
        pedestrian_limits (KinematicLimits): Bounds applied to pedestrian trajectories.
    """

    dt: float = _param(0.1, _FLOAT)
    aggressive_threshold: float = _param(2.5, _FLOAT)
    progress_epsilon: float = _param(0.05, _FLOAT)
    stop_speed: float = _param(0.1, _FLOAT)
    max_actions: int = _param(6, _INT)
    speed_step: float = _param(2.0, _FLOAT)
    pedestrian_speed_options: Tuple[float, ...] = _param((1.3, 1.55, 1.8), _FLOATS)
    vehicle_limits: KinematicLimits = _param(VEHICLE_LIMITS, "limits")
    pedestrian_limits: KinematicLimits = _param(PEDESTRIAN_LIMITS, "limits")

    def __post_init__(self):
        """Validate step sizes and the action cap."""
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.max_actions < 2:
            raise ValueError("max_actions must allow at least one wait and one proceed")

    def limits_for(self, kind: str) -> KinematicLimits:
        """Return the kinematic limits of an agent kind ("pedestrian" or "vehicle")."""
        return self.pedestrian_limits if kind == "pedestrian" else self.vehicle_limits


@dataclass(frozen=True)
class GameParams:
    """
    Parameters of the dynamic game and of both solution concepts.

    Attributes:
        delta_t_p (float): Planning period between simultaneous-move stages (s).
        delta_t_h (float): Game horizon (s).
        delta (float): Discount factor in (0, 1].
        tau (float): Safety penalty for playing against the right-of-way rule.
        epsilon (float): Tolerance of the subgame-perfect epsilon-Nash equilibrium.
        lambda_ (float): Precision of the quantal (logit) response; document key "lambda".
        terminal_norm (float, None): Weight of the terminal continuation utility; None means delta**(K+1).
    """

    delta_t_p: float = _param(1.3, _FLOAT)
    delta_t_h: float = _param(4.0, _FLOAT)
    delta: float = _param(0.5, _FLOAT)
    tau: float = _param(0.25, _FLOAT)
    epsilon: float = _param(0.1, _FLOAT)
    lambda_: float = _param(1.0, _FLOAT, key="lambda")
    terminal_norm: Optional[float] = _param(None, _OPT_FLOAT)

    def __post_init__(self):
        """Validate ranges and the stage count."""
        if self.delta_t_p <= 0 or self.delta_t_h <= 0:
            raise ValueError("delta_t_p and delta_t_h must be positive")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.tau < 0 or self.epsilon < 0:
            raise ValueError("tau and epsilon must be non-negative")
        if self.lambda_ <= 0:
            raise ValueError("lambda must be positive")
        if self.terminal_norm is not None and self.terminal_norm <= 0:
            raise ValueError("terminal_norm must be positive")
        if self.stages < 1:
            raise ValueError("delta_t_h must cover at least one planning period")

    @property
    def stages(self) -> int:
        """Number of decision stages K = floor(delta_t_h / delta_t_p)."""
        return math.floor(self.delta_t_h / self.delta_t_p + 1e-9)

    @property
    def norm(self) -> float:
        """Effective terminal normalization constant N."""
        return self.terminal_norm if self.terminal_norm is not None else self.delta ** (self.stages + 1)


@dataclass(frozen=True)
class SigmoidParams:
    """Midpoint d0 (m) and steepness a (1/m) of the safety sigmoid."""

    midpoint: float = 2.0
    steepness: float = 2.0

    def __post_init__(self):
        """Validate a > 0 and d0 >= 0."""
        if self.steepness <= 0 or self.midpoint < 0:
            raise ValueError("sigmoid steepness must be positive and midpoint non-negative")


@dataclass(frozen=True)
class ProgressParams:
    """Arc length L_max (m) mapped to full progress utility."""

    full_scale: float

    def __post_init__(self):
        """Validate L_max > 0."""
        if self.full_scale <= 0:
            raise ValueError("progress full scale must be positive")


@dataclass(frozen=True)
class UtilityParams:
    """
    Utility constants of the experiment document.

    Attributes:
        sigmoid_midpoint (float): Gap (m) at which safety utility is zero.
        sigmoid_steepness (float): Slope parameter of the safety sigmoid (1/m).
        progress_full_scale (float, None): Per-stage L_max; None means each agent's v_max * delta_t_p.
        terminal_full_scale (float, None): Continuation L_max; None means each agent's v_max * delta_t_h.
    """

    sigmoid_midpoint: float = _param(2.0, _FLOAT)
    sigmoid_steepness: float = _param(2.0, _FLOAT)
    progress_full_scale: Optional[float] = _param(None, _OPT_FLOAT)
    terminal_full_scale: Optional[float] = _param(None, _OPT_FLOAT)

    def __post_init__(self):
        """Validate through the component dataclasses."""
        SigmoidParams(self.sigmoid_midpoint, self.sigmoid_steepness)
        for scale in (self.progress_full_scale, self.terminal_full_scale):
            if scale is not None:
                ProgressParams(scale)

    @property
    def sigmoid(self) -> SigmoidParams:
        """The safety sigmoid parameters."""
        return SigmoidParams(self.sigmoid_midpoint, self.sigmoid_steepness)

    def stage_progress(self, limits: KinematicLimits, game: GameParams) -> ProgressParams:
        """Per-stage progress scale for an agent with the given limits."""
        return ProgressParams(self.progress_full_scale or limits.v_max * game.delta_t_p)

    def terminal_progress(self, limits: KinematicLimits, game: GameParams) -> ProgressParams:
        """Continuation progress scale for an agent with the given limits."""
        return ProgressParams(self.terminal_full_scale or limits.v_max * game.delta_t_h)


CONCEPTS = ("spene", "qlk")
QLK_PLAY = ("mode", "sample")


@dataclass(frozen=True)
class SolverParams:
    """Choice of solution concept and of how quantal play is resolved to a pure path."""

    concept: str = _param("spene", _STR)
    qlk_play: str = _param("mode", _STR)

    def __post_init__(self):
        """Validate enum values."""
        if self.concept not in CONCEPTS:
            raise ValueError(f"concept must be one of {CONCEPTS}, got {self.concept!r}")
        if self.qlk_play not in QLK_PLAY:
            raise ValueError(f"qlk_play must be one of {QLK_PLAY}, got {self.qlk_play!r}")
