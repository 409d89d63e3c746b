# conflict-sim - traffic-conflict game simulation toolkit

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from conflict_sim.base.errors import EmptyActionSetError, GameConstructionError, ProfileError
from conflict_sim.base.geometry import Path
from conflict_sim.base.params import GameParams, TrajectoryParams
from conflict_sim.helpers.logger import logger
from conflict_sim.modules.scenario import GameSetup
from conflict_sim.modules.trajectory import (
    AgentState,
    Trajectory,
    generate_pedestrian_actions,
    generate_vehicle_actions,
)

__all__ = ["GameParams", "GameNode", "GameTree", "StrategyProfile", "build_tree", "realized_path", "is_leaf_time"]

JointAction = Tuple[int, int]

# Slack on the leaf test so that stage times built from repeated additions land on the right side
TIME_EPS = 1e-9


def is_leaf_time(t: float, params: GameParams) -> bool:
    """Whether a node starting at time `t` has no full planning period left before the horizon."""
    return t + params.delta_t_p > params.delta_t_h + TIME_EPS


@dataclass(eq=False)
class GameNode:
    """
    One decision point X_t of the dynamic game, or a leaf past the last decision stage.

    Attributes:
        node_id (str): "root", then the joint choices leading here, e.g. "0-1/2-0".
        stage (int): Number of stages played before this node.
        t (float): Stage start time (s).
        arcs (Tuple[float, float]): Arc position of each agent along its path (m).
        parent (GameNode, optional): The node one stage up; None at the root.
        incoming (Tuple[int, int], optional): Joint action index pair chosen at the parent.
        actions (Tuple[list, list]): Per-agent trajectory choices; empty at leaves.
        children (Dict[Tuple[int, int], GameNode]): One child per joint choice.
        safety (np.ndarray, optional): Penalized safety utility of every joint choice, shape (n1, n2, 2).
        progress (np.ndarray, optional): Progress utility of every joint choice, shape (n1, n2, 2).
        payoffs (np.ndarray, optional): Combined stage utility of every joint choice, shape (n1, n2, 2).
        leaf_safety (np.ndarray, optional): Continuation safety utility of each child leaf (last stage only).
        leaf_progress (np.ndarray, optional): Continuation progress utility of each child leaf (last stage only).
        leaf_payoffs (np.ndarray, optional): Combined continuation utility of each child leaf (last stage only).
    """

    node_id: str
    stage: int
    t: float
    arcs: Tuple[float, float] = (0.0, 0.0)
    parent: Optional["GameNode"] = None
    incoming: Optional[JointAction] = None
    actions: Tuple[list, list] = field(default_factory=lambda: ([], []))
    children: Dict[JointAction, "GameNode"] = field(default_factory=dict)
    root_state: Optional[Tuple[AgentState, AgentState]] = None
    safety: Optional[np.ndarray] = None
    progress: Optional[np.ndarray] = None
    payoffs: Optional[np.ndarray] = None
    leaf_safety: Optional[np.ndarray] = None
    leaf_progress: Optional[np.ndarray] = None
    leaf_payoffs: Optional[np.ndarray] = None

    @property
    def is_leaf(self) -> bool:
        """Whether the node has no decisions below it."""
        return not self.children

    @property
    def shape(self) -> Tuple[int, int]:
        """Number of actions of each agent."""
        return len(self.actions[0]), len(self.actions[1])

    @property
    def joint_state(self) -> Tuple[AgentState, AgentState]:
        """X_t: the terminal states of the trajectory pair chosen at the parent, or the initial states at the root."""
        if self.parent is None:
            if self.root_state is None:
                raise GameConstructionError(f"node {self.node_id} has no recorded state")
            return self.root_state
        i, j = self.incoming
        return self.parent.actions[0][i].final_state, self.parent.actions[1][j].final_state

    @property
    def last_trajectories(self) -> Tuple[Trajectory, Trajectory]:
        """The trajectory pair that led to this node."""
        if self.parent is None:
            raise GameConstructionError("the root has no incoming trajectories")
        i, j = self.incoming
        return self.parent.actions[0][i], self.parent.actions[1][j]

    @property
    def history(self) -> List[Tuple[Trajectory, Trajectory]]:
        """h_t: the joint trajectory choices from the root to this node, in order."""
        out = []
        node = self
        while node.parent is not None:
            out.append(node.last_trajectories)
            node = node.parent
        return out[::-1]

    @property
    def terminal(self) -> np.ndarray:
        """Combined continuation utility of both agents at a leaf, shape (2,)."""
        return self._leaf_entry("leaf_payoffs")

    def _leaf_entry(self, name: str) -> np.ndarray:
        """Row of the parent's per-leaf table that belongs to this leaf."""
        table = None if self.parent is None else getattr(self.parent, name)
        if table is None:
            raise GameConstructionError(f"leaf {self.node_id} has no {name.replace('_', ' ')}; annotate the tree first")
        return table[self.incoming]

    def child(self, i: int, j: int) -> "GameNode":
        """The node reached by joint choice (i, j)."""
        try:
            return self.children[(i, j)]
        except KeyError:
            raise GameConstructionError(f"node {self.node_id} has no child for joint action ({i}, {j})") from None

    def __repr__(self) -> str:
        """Short description with id, stage and branching."""
        return f"GameNode({self.node_id!r}, stage={self.stage}, shape={self.shape})"


@dataclass(eq=False)
class GameTree:
    """
    The full game tree of one game together with the context utilities need.

    Attributes:
        root (GameNode): The node at t = 0.
        params (GameParams): Game parameters.
        nodes (Dict[str, GameNode]): Every node by id, in breadth-first order.
        setup (GameSetup, optional): The game the tree was built for; None for synthetic trees.
        trajectory (TrajectoryParams): Action generation settings.
        gammas (Tuple[float, float]): Agent types used for combined payoffs.
    """

    root: GameNode
    params: GameParams
    nodes: Dict[str, GameNode]
    setup: Optional[GameSetup] = None
    trajectory: TrajectoryParams = field(default_factory=TrajectoryParams)
    gammas: Tuple[float, float] = (0.0, 0.0)

    @property
    def stages(self) -> int:
        """Decision stage count K."""
        return self.params.stages

    @property
    def paths(self) -> Tuple[Path, Path]:
        """The agents' paths."""
        return tuple(a.path for a in self.setup.scenario.agents)

    @property
    def holder(self) -> int:
        """Index of the ROW-holding agent."""
        return self.setup.scenario.holder_index

    @property
    def exit_arcs(self) -> Tuple[float, float]:
        """Per-agent arc past which the conflict zone is cleared."""
        return self.setup.scenario.exit_arc(0), self.setup.scenario.exit_arc(1)

    def node(self, node_id: str) -> GameNode:
        """Look up a node by id."""
        try:
            return self.nodes[node_id]
        except KeyError:
            raise GameConstructionError(f"unknown node {node_id!r}") from None

    def decision_nodes(self) -> List[GameNode]:
        """Non-leaf nodes, root first."""
        return [n for n in self.nodes.values() if not n.is_leaf]

    def leaves(self) -> Iterator[GameNode]:
        """Leaf nodes in breadth-first order."""
        return (n for n in self.nodes.values() if n.is_leaf)

    def __len__(self) -> int:
        """Total node count."""
        return len(self.nodes)


@dataclass
class StrategyProfile:
    """
    Behavior-form strategies of both agents: one probability vector over action indices per agent per node.

    Pure strategies are stored as one-hot vectors.

    Attributes:
        choices (Tuple[dict, dict]): For each agent, node_id -> probability vector.
    """

    choices: Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]] = field(default_factory=lambda: ({}, {}))

    def set_pure(self, agent: int, node_id: str, index: int, size: int) -> None:
        """Choose action `index` out of `size` for `agent` at a node."""
        if not 0 <= index < size:
            raise ProfileError(f"choice {index} out of range for {size} actions at node {node_id}")
        probs = np.zeros(size)
        probs[index] = 1.0
        self.choices[agent][node_id] = probs

    def set_distribution(self, agent: int, node_id: str, probs: Sequence[float]) -> None:
        """Record a quantal distribution for `agent` at a node."""
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or len(probs) == 0 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ProfileError(f"invalid probability vector at node {node_id}: {probs}")
        self.choices[agent][node_id] = probs

    def distribution(self, agent: int, node_id: str) -> np.ndarray:
        """Probability vector of `agent` at a node."""
        try:
            return self.choices[agent][node_id]
        except KeyError:
            raise ProfileError(f"no choice for agent {agent + 1} at node {node_id}") from None

    def choice(self, agent: int, node_id: str) -> int:
        """Pure choice at a node: the mode, ties resolved to the lowest index."""
        return int(np.argmax(self.distribution(agent, node_id)))

    def joint_choice(self, node_id: str) -> JointAction:
        """Both agents' pure choices at a node."""
        return self.choice(0, node_id), self.choice(1, node_id)

    @property
    def is_pure(self) -> bool:
        """Whether every recorded vector is one-hot."""
        return all(np.count_nonzero(p) == 1 for agent in self.choices for p in agent.values())

    def resolve(self, rng: Optional[np.random.Generator] = None) -> "StrategyProfile":
        """
        Turn a quantal profile into a pure one.

        Args:
            rng (np.random.Generator, optional): When given, every node's action is drawn from its distribution in
                node order; otherwise the mode is taken.

        Returns:
            (StrategyProfile): A pure profile over the same nodes.
        """
        pure = StrategyProfile()
        for agent in (0, 1):
            for node_id, probs in self.choices[agent].items():
                index = int(rng.choice(len(probs), p=probs)) if rng is not None else int(np.argmax(probs))
                pure.set_pure(agent, node_id, index, len(probs))
        return pure


def _generate(
    kind: str, state: AgentState, path: Path, arc: float, params: GameParams, trajectory: TrajectoryParams
) -> List[Trajectory]:
    """Dispatch to the action generator of an agent kind."""
    if kind == "pedestrian":
        return generate_pedestrian_actions(
            state, path, trajectory.pedestrian_speed_options, params.delta_t_p, trajectory, arc=arc
        )
    return generate_vehicle_actions(state, path, trajectory.vehicle_limits, params.delta_t_p, trajectory, arc=arc)


def build_tree(setup: GameSetup, params: GameParams, trajectory: Optional[TrajectoryParams] = None) -> GameTree:
    """
    Build the complete game tree of one game.

    Action sets are generated per node from each agent's own state. Since an agent's state depends only on its own
    past choices, the sets are generated once per (agent, own history) and shared between nodes.

    Args:
        setup (GameSetup): The game to build.
        params (GameParams): Planning period, horizon and the other game constants.
        trajectory (TrajectoryParams, optional): Action generation settings.

    Returns:
        (GameTree): Tree of depth K with every node's actions and children filled in.

    Raises:
        (GameConstructionError): If either agent has no feasible action at some node.
    """
    trajectory = trajectory or TrajectoryParams()
    scenario = setup.scenario
    kinds = tuple(a.kind for a in scenario.agents)
    paths = tuple(a.path for a in scenario.agents)

    root = GameNode(
        node_id="root",
        stage=0,
        t=0.0,
        arcs=(setup.initial_arc(0), setup.initial_arc(1)),
        root_state=(setup.initial_state(0), setup.initial_state(1)),
    )
    nodes = {root.node_id: root}
    cache: Dict[Tuple[int, Tuple[int, ...]], List[Trajectory]] = {}
    queue = deque([(root, ((), ()))])

    while queue:
        node, own = queue.popleft()
        if is_leaf_time(node.t, params):
            continue

        states = node.joint_state
        actions = []
        for k in (0, 1):
            key = (k, own[k])
            if key not in cache:
                try:
                    cache[key] = _generate(kinds[k], states[k], paths[k], node.arcs[k], params, trajectory)
                except EmptyActionSetError as e:
                    raise GameConstructionError(f"node {node.node_id}, agent {k + 1}: {e}") from e
            actions.append(cache[key])
        node.actions = (actions[0], actions[1])

        prefix = "" if node.parent is None else f"{node.node_id}/"
        for i, a in enumerate(actions[0]):
            for j, b in enumerate(actions[1]):
                child = GameNode(
                    node_id=f"{prefix}{i}-{j}",
                    stage=node.stage + 1,
                    t=(node.stage + 1) * params.delta_t_p,
                    arcs=(a.final_arc, b.final_arc),
                    parent=node,
                    incoming=(i, j),
                )
                node.children[(i, j)] = child
                nodes[child.node_id] = child
                queue.append((child, (own[0] + (i,), own[1] + (j,))))

    logger.debug(f"game {setup.game_id}: {len(nodes)} nodes, {len(cache)} distinct action sets")
    return GameTree(root=root, params=params, nodes=nodes, setup=setup, trajectory=trajectory, gammas=setup.gammas)


def realized_path(tree: GameTree, profile: StrategyProfile) -> List[Tuple[GameNode, JointAction]]:
    """
    Follow a profile from the root to a leaf.

    Quantal profiles are followed along their modes.

    Args:
        tree (GameTree): The game tree.
        profile (StrategyProfile): Strategies defined at every reachable decision node.

    Returns:
        (List[Tuple[GameNode, Tuple[int, int]]]): One (node, joint action) entry per stage.

    Raises:
        (ProfileError): If the profile has no choice at a reachable node.
    """
    path = []
    node = tree.root
    while not node.is_leaf:
        i, j = profile.joint_choice(node.node_id)
        if (i, j) not in node.children:
            raise ProfileError(f"choice ({i}, {j}) at node {node.node_id} is not an available joint action")
        path.append((node, (i, j)))
        node = node.children[(i, j)]
    return path
