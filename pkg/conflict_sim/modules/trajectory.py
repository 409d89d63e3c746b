# conflict-sim - traffic-conflict game simulation toolkit

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from conflict_sim.base.errors import EmptyActionSetError, SamplingGridError, SpeedRangeError
from conflict_sim.base.geometry import Path
from conflict_sim.base.params import PEDESTRIAN_SPEED_RANGE, KinematicLimits, TrajectoryParams
from conflict_sim.helpers.logger import logger

_TOL = 1e-9


@dataclass(frozen=True)
class AgentState:
    """
    Kinematic state of one agent at one time.

    Attributes:
        x (float): Position east (m).
        y (float): Position north (m).
        v_x (float): Lateral velocity in the body frame (m/s).
        v_y (float): Longitudinal velocity in the body frame (m/s).
        a_x (float): Lateral acceleration (m/s²).
        a_y (float): Longitudinal acceleration (m/s²).
        theta (float): Yaw (rad).
    """

    x: float = 0.0
    y: float = 0.0
    v_x: float = 0.0
    v_y: float = 0.0
    a_x: float = 0.0
    a_y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        """Reject non-finite components."""
        if not all(math.isfinite(v) for v in (self.x, self.y, self.v_x, self.v_y, self.a_x, self.a_y, self.theta)):
            raise ValueError("agent state components must be finite")

    @property
    def speed(self) -> float:
        """Speed magnitude sqrt(v_x² + v_y²)."""
        return math.hypot(self.v_x, self.v_y)


class Maneuver(str, Enum):
    """High-level maneuver symbol attached to a trajectory."""

    WAIT = "w"
    PROCEED = "p"
    AGGRESSIVE = "p_a"

    @property
    def is_proceed(self) -> bool:
        """Whether the symbol belongs to the proceed class (p or p_a)."""
        return self is not Maneuver.WAIT

    @property
    def rank(self) -> int:
        """Position in the action ordering: wait, proceeds, aggressive proceeds."""
        return ("w", "p", "p_a").index(self.value)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Motion of one agent over one planning period, sampled on a fixed time grid.

    Attributes:
        t (np.ndarray): Sample times relative to the period start (s).
        arc (np.ndarray): Absolute arc position along the agent path at each sample (m).
        x (np.ndarray): Plane x at each sample (m).
        y (np.ndarray): Plane y at each sample (m).
        v (np.ndarray): Longitudinal speed (m/s).
        a (np.ndarray): Longitudinal acceleration (m/s²).
        a_lat (np.ndarray): Lateral acceleration v·dθ/dt (m/s²).
        theta (np.ndarray): Yaw (rad).
        maneuver (Maneuver): Symbol assigned by `classify_maneuver_symbol`.
        target_speed (float): Speed the segment was generated to reach (m/s).
    """

    t: np.ndarray
    arc: np.ndarray
    x: np.ndarray
    y: np.ndarray
    v: np.ndarray
    a: np.ndarray
    a_lat: np.ndarray
    theta: np.ndarray
    maneuver: Maneuver
    target_speed: float

    @property
    def dt(self) -> float:
        """Sample step (s)."""
        return float(self.t[1] - self.t[0])

    @property
    def period(self) -> float:
        """Duration spanned by the samples (s)."""
        return float(self.t[-1] - self.t[0])

    @property
    def path_arc_progress(self) -> float:
        """Arc length advanced along the path (m)."""
        return float(self.arc[-1] - self.arc[0])

    @property
    def positions(self) -> np.ndarray:
        """Sampled positions, shape (n, 2)."""
        return np.stack([self.x, self.y], axis=-1)

    @property
    def final_arc(self) -> float:
        """Arc position at the end of the period (m)."""
        return float(self.arc[-1])

    @property
    def final_speed(self) -> float:
        """Speed at the end of the period (m/s)."""
        return float(self.v[-1])

    @property
    def jerk(self) -> np.ndarray:
        """Finite-difference longitudinal jerk between consecutive samples (m/s³)."""
        return np.diff(self.a) / np.diff(self.t)

    def state_at(self, i: int) -> AgentState:
        """The full AgentState of sample `i`."""
        return AgentState(
            x=float(self.x[i]),
            y=float(self.y[i]),
            v_x=0.0,
            v_y=float(self.v[i]),
            a_x=float(self.a_lat[i]),
            a_y=float(self.a[i]),
            theta=float(self.theta[i]),
        )

    @property
    def samples(self) -> List[Tuple[float, AgentState]]:
        """Ordered (t, AgentState) pairs."""
        return [(float(t), self.state_at(i)) for i, t in enumerate(self.t)]

    @property
    def final_state(self) -> AgentState:
        """State at the end of the period, the initial state of child-node actions."""
        return self.state_at(len(self.t) - 1)

    def __repr__(self) -> str:
        """Short description with symbol, speeds and progress."""
        return (
            f"Trajectory({self.maneuver.value}, v {self.v[0]:.2f}->{self.v[-1]:.2f} m/s, "
            f"+{self.path_arc_progress:.2f} m)"
        )


def sample_times(period: float, dt: float) -> np.ndarray:
    """
    Sample grid covering one period: ceil(period/dt) equal steps, both ends included.

    Args:
        period (float): Duration (s).
        dt (float): Nominal step (s); shortened slightly when it does not divide the period.

    Returns:
        (np.ndarray): Strictly increasing times from 0 to `period`.
    """
    if period <= 0:
        raise ValueError("period must be positive")
    steps = max(1, math.ceil(period / dt - 1e-9))
    return np.linspace(0.0, period, steps + 1)


def _segment(
    path: Path, arc0: float, v0: float, v1: float, t: np.ndarray, maneuver: Maneuver = Maneuver.PROCEED
) -> Trajectory:
    """Cubic Hermite segment of arc length vs. time from speed v0 to v1 over the grid `t`."""
    period = float(t[-1])
    spline = CubicHermiteSpline([0.0, period], [0.0, 0.5 * (v0 + v1) * period], [v0, v1])
    arc = arc0 + spline(t)
    v = np.maximum(spline(t, 1), 0.0)
    a = spline(t, 2)
    x, y = path.position(arc)
    theta = path.heading(arc)
    a_lat = v * np.gradient(np.unwrap(theta), t)
    return Trajectory(t=t, arc=arc, x=x, y=y, v=v, a=a, a_lat=a_lat, theta=theta, maneuver=maneuver, target_speed=v1)


def within_limits(traj: Trajectory, limits: KinematicLimits, jerk_tolerance: float = 0.05) -> bool:
    """
    Whether every sample respects the kinematic limits.

    Args:
        traj (Trajectory): The trajectory to check.
        limits (KinematicLimits): Bounds for the agent kind.
        jerk_tolerance (float): Relative slack on the finite-difference jerk.

    Returns:
        (bool): True if speed and accelerations are within bounds and jerk within the tolerance.
    """
    return bool(
        np.max(np.abs(traj.v)) <= limits.v_max + _TOL
        and np.max(np.abs(traj.a)) <= limits.a_long_max + _TOL
        and np.max(np.abs(traj.a_lat)) <= limits.a_lat_max + _TOL
        and (len(traj.t) < 2 or np.max(np.abs(traj.jerk)) <= limits.jerk_max * (1 + jerk_tolerance))
    )


def classify_maneuver_symbol(
    traj: Trajectory, aggressive_threshold: float, progress_epsilon: float = 0.05, stop_speed: float = 0.1
) -> Maneuver:
    """
    Assign the high-level maneuver symbol of a trajectory.

    A trajectory is a wait if it ends stopped and either barely moved or decelerated into the stop. Otherwise it is a
    proceed, aggressive when its peak longitudinal acceleration exceeds the threshold.

    Args:
        traj (Trajectory): The trajectory to classify.
        aggressive_threshold (float): Peak acceleration separating p from p_a (m/s²).
        progress_epsilon (float): Arc progress below which a stopped trajectory counts as stationary (m).
        stop_speed (float): Speed below which the agent counts as stopped (m/s).

    Returns:
        (Maneuver): One of w, p, p_a.
    """
    stopped = traj.final_speed < stop_speed
    if stopped and (traj.path_arc_progress < progress_epsilon or traj.v[0] > traj.final_speed):
        return Maneuver.WAIT
    if float(np.max(traj.a)) > aggressive_threshold:
        return Maneuver.AGGRESSIVE
    return Maneuver.PROCEED


def _classified(traj: Trajectory, params: TrajectoryParams) -> Trajectory:
    """Copy of a trajectory carrying its classified symbol."""
    symbol = classify_maneuver_symbol(traj, params.aggressive_threshold, params.progress_epsilon, params.stop_speed)
    return replace(traj, maneuver=symbol)


def _wait(
    path: Path, arc0: float, v0: float, t: np.ndarray, limits: KinematicLimits, params: TrajectoryParams
) -> Optional[Trajectory]:
    """Stop within the period, or brake as hard as allowed; None if the agent cannot get below stop speed."""
    period = float(t[-1])
    v1 = max(0.0, v0 - limits.a_long_max * period)
    if v1 >= params.stop_speed:
        logger.debug(f"wait excluded: {v0:.2f} m/s cannot stop within {period:.2f} s")
        return None
    traj = _classified(_segment(path, arc0, v0, v1, t, Maneuver.WAIT), params)
    if traj.maneuver is not Maneuver.WAIT or not within_limits(traj, limits):
        return None
    return traj


def _order_and_cap(actions: List[Trajectory], v0: float, max_actions: int) -> List[Trajectory]:
    """Wait first, proceeds by ascending target speed, aggressive last; keep at most `max_actions`."""
    waits = [a for a in actions if a.maneuver is Maneuver.WAIT][:1]
    aggressive = sorted((a for a in actions if a.maneuver is Maneuver.AGGRESSIVE), key=lambda a: a.target_speed)[:1]
    proceeds = [a for a in actions if a.maneuver is Maneuver.PROCEED]
    room = max(0, max_actions - len(waits) - len(aggressive))
    proceeds = sorted(proceeds, key=lambda a: (abs(a.target_speed - v0), a.target_speed))[:room]
    return waits + sorted(proceeds, key=lambda a: a.target_speed) + aggressive


def _dedupe(targets: Sequence[float]) -> List[float]:
    """Sorted unique target speeds."""
    return sorted({round(v, 9) for v in targets})


def generate_vehicle_actions(
    state: AgentState,
    path: Path,
    limits: KinematicLimits,
    period: float,
    params: Optional[TrajectoryParams] = None,
    arc: Optional[float] = None,
) -> List[Trajectory]:
    """
    Generate the vehicle's trajectory choices at one game node.

    The wait maneuver decelerates to a stop within the period. Proceed maneuvers keep the current speed or change
    to the targets {v, v ± speed_step, v_max/2, v_max} plus an aggressive target v + a_long_max·period; every target
    outside [0, v_max] or violating the kinematic limits is dropped. Once the vehicle has passed the end of its path
    only the wait maneuver is offered.

    Args:
        state (AgentState): Vehicle state at the node.
        path (Path): The vehicle path.
        limits (KinematicLimits): Vehicle kinematic limits.
        period (float): Planning period (s).
        params (TrajectoryParams, optional): Sampling and classification settings.
        arc (float, optional): Arc position of the vehicle; projected from (x, y) when omitted.

    Returns:
        (List[Trajectory]): Ordered actions, wait first and aggressive last.

    Raises:
        (EmptyActionSetError): If no maneuver class has a feasible trajectory.
    """
    params = params or TrajectoryParams(vehicle_limits=limits)
    arc = path.project(state.x, state.y) if arc is None else arc
    t = sample_times(period, params.dt)
    v0 = state.speed

    actions = []
    wait = _wait(path, arc, v0, t, limits, params)
    if wait is not None:
        actions.append(wait)

    if arc < path.length:
        step = params.speed_step
        candidates = [v0, v0 - step, v0 + step, limits.v_max / 2, limits.v_max, v0 + limits.a_long_max * period]
        for v1 in _dedupe(min(max(v, 0.0), limits.v_max) for v in candidates):
            if v1 < params.stop_speed or abs(v1 - v0) > limits.a_long_max * period + _TOL:
                continue
            traj = _classified(_segment(path, arc, v0, v1, t), params)
            if traj.maneuver.is_proceed and within_limits(traj, limits):
                actions.append(traj)
    else:
        logger.debug(f"proceeds excluded: vehicle at arc {arc:.2f} m is past its path end")

    if not actions:
        raise EmptyActionSetError(f"no feasible vehicle trajectory from speed {v0:.2f} m/s at arc {arc:.2f} m")
    return _order_and_cap(actions, v0, params.max_actions)


def generate_pedestrian_actions(
    state: AgentState,
    path: Path,
    speed_options: Sequence[float],
    period: float,
    params: Optional[TrajectoryParams] = None,
    arc: Optional[float] = None,
) -> List[Trajectory]:
    """
    Generate the pedestrian's trajectory choices at one game node.

    One wait trajectory decelerates to a stop within the period. One proceed is offered per walking speed option; it
    starts at the current speed and changes linearly to the option, so it is constant-velocity when the two match.
    A pedestrian past the end of the path can only wait.

    Args:
        state (AgentState): Pedestrian state at the node.
        path (Path): The pedestrian path.
        speed_options (Sequence[float]): Walking speeds within [1.3, 1.8] m/s.
        period (float): Planning period (s).
        params (TrajectoryParams, optional): Sampling and classification settings.
        arc (float, optional): Arc position of the pedestrian; projected from (x, y) when omitted.

    Returns:
        (List[Trajectory]): Ordered actions, wait first.

    Raises:
        (SpeedRangeError): If a speed option lies outside the walking range.
        (EmptyActionSetError): If no trajectory is feasible.
    """
    lo, hi = PEDESTRIAN_SPEED_RANGE
    for v in speed_options:
        if not lo - _TOL <= v <= hi + _TOL:
            raise SpeedRangeError(f"pedestrian speed option {v} m/s outside [{lo}, {hi}]")

    params = params or TrajectoryParams()
    limits = params.pedestrian_limits
    arc = path.project(state.x, state.y) if arc is None else arc
    t = sample_times(period, params.dt)
    v0 = state.speed

    actions = []
    wait = _wait(path, arc, v0, t, limits, params)
    if wait is not None:
        actions.append(wait)

    if arc < path.length:
        reach = limits.a_long_max * float(t[-1])
        # walking speeds are reached linearly from the current speed, as far as the period allows
        for v1 in _dedupe(min(max(v, v0 - reach), v0 + reach) for v in speed_options):
            if v1 < params.stop_speed:
                continue
            traj = _segment(path, arc, v0, v1, t)
            actions.append(replace(traj, maneuver=Maneuver.PROCEED))
    else:
        logger.debug(f"proceeds excluded: pedestrian at arc {arc:.2f} m is past its path end")

    if not actions:
        raise EmptyActionSetError(f"no feasible pedestrian trajectory from speed {v0:.2f} m/s")
    return _order_and_cap(actions, v0, params.max_actions)


def extrapolate(traj: Trajectory, path: Path, duration: float, dt: float) -> Trajectory:
    """
    Continue a trajectory at its terminal speed along its path.

    Args:
        traj (Trajectory): The trajectory chosen at the last decision stage.
        path (Path): The agent path.
        duration (float): Continuation length (s).
        dt (float): Nominal sample step (s).

    Returns:
        (Trajectory): Constant-speed trajectory starting at the final sample of `traj`.
    """
    t = sample_times(duration, dt)
    return _segment(path, traj.final_arc, traj.final_speed, traj.final_speed, t, traj.maneuver)


def _check_grid(a: Trajectory, b: Trajectory) -> None:
    """Raise unless both trajectories share one sampling grid."""
    if len(a.t) != len(b.t) or not np.allclose(a.t, b.t, atol=1e-9):
        raise SamplingGridError(f"sampling grids differ ({len(a.t)} vs {len(b.t)} samples)")


def min_gap(a: Trajectory, b: Trajectory) -> float:
    """
    Minimum distance between two agents over a shared sampling grid.

    Args:
        a (Trajectory): First agent trajectory.
        b (Trajectory): Second agent trajectory.

    Returns:
        (float): min over sample times of the Euclidean distance (m).

    Raises:
        (SamplingGridError): If the grids differ.
    """
    _check_grid(a, b)
    return float(np.min(np.hypot(a.x - b.x, a.y - b.y)))


def pairwise_min_gaps(first: Sequence[Trajectory], second: Sequence[Trajectory]) -> np.ndarray:
    """
    `min_gap` for every pair drawn from two action sets.

    Args:
        first (Sequence[Trajectory]): Actions of agent 1.
        second (Sequence[Trajectory]): Actions of agent 2, on the same grid.

    Returns:
        (np.ndarray): Gaps of shape (len(first), len(second)).
    """
    for b in second[:1]:
        for a in first[:1]:
            _check_grid(a, b)
    p1 = np.stack([tr.positions for tr in first])  # (n1, T, 2)
    p2 = np.stack([tr.positions for tr in second])  # (n2, T, 2)
    diff = p1[:, None, :, :] - p2[None, :, :, :]
    return np.min(np.hypot(diff[..., 0], diff[..., 1]), axis=-1)
