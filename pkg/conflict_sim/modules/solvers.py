# conflict-sim - traffic-conflict game simulation toolkit

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import softmax

from conflict_sim.base.errors import ProfileError
from conflict_sim.base.params import GameParams
from conflict_sim.helpers.logger import LOGGER
from conflict_sim.modules.game import GameNode, GameTree, StrategyProfile
from conflict_sim.modules.utility import continuation, joint_values, stage_table

logger = LOGGER.get_logger("solvers")

# Slack on float comparisons of equal payoff sums and of epsilon checks
_TIE = 1e-12


@dataclass
class SolverResult:
    """
    Outcome of solving one game tree.

    Attributes:
        profile (StrategyProfile): Strategies of both agents at every decision node.
        concept (str): "spene" or "qlk".
        values (Dict[str, np.ndarray]): Value of every decision node to both agents under the profile.
        equilibrium_counts (Dict[str, int]): Number of pure epsilon-equilibria found per node (spene).
        fallback_nodes (List[str]): Nodes without a pure epsilon-equilibrium, resolved by minimal regret (spene).
        level0 (Tuple[dict, dict], optional): Maxmax choices each agent is believed to make (qlk).
        expected_values (Tuple[dict, dict], optional): Level-1 expected value of every own action per node (qlk).
    """

    profile: StrategyProfile
    concept: str
    values: Dict[str, np.ndarray] = field(default_factory=dict)
    equilibrium_counts: Dict[str, int] = field(default_factory=dict)
    fallback_nodes: List[str] = field(default_factory=list)
    level0: Optional[Tuple[Dict[str, int], Dict[str, int]]] = None
    expected_values: Optional[Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]] = None

    @property
    def fallback_used(self) -> bool:
        """Whether any node fell back to minimal regret."""
        return bool(self.fallback_nodes)


@dataclass(frozen=True)
class DeviationReport:
    """
    Largest unilateral gain found by `verify_epsilon_equilibrium`.

    Attributes:
        ok (bool): Whether the gain stays within epsilon.
        worst_gain (float): Largest gain over all subgames and both agents.
        epsilon (float): Tolerance checked against.
        node_id (str, optional): Subgame root where the largest gain occurs.
        agent (int, optional): Deviating agent (0 or 1).
        deviation (int, optional): Action the deviating agent switches to at that node.
    """

    ok: bool
    worst_gain: float
    epsilon: float
    node_id: Optional[str] = None
    agent: Optional[int] = None
    deviation: Optional[int] = None

    def __str__(self) -> str:
        """One-line summary naming the node and deviation."""
        status = "ok" if self.ok else "FAILED"
        where = ""
        if self.node_id is not None:
            where = f" at node {self.node_id}, agent {self.agent + 1} -> action {self.deviation}"
        return f"epsilon check {status}: worst gain {self.worst_gain:.6f} (epsilon {self.epsilon}){where}"


def _pick(table: np.ndarray, own: int, other: int) -> np.ndarray:
    """Slice of a (n1, n2, ...) table where agent `own` varies and the other agent plays `other`."""
    return table[:, other] if own == 0 else table[other, :]


class _BestResponse:
    """
    Value of an agent's best behavior-strategy deviation in a subgame against the opponent's fixed profile.

    best(node, agent, d) = max over own actions a of [delta**(d+1) u(a, opp) + best(child, agent, d+1)], with
    N times the continuation utility at leaves; d is the depth of `node` below the subgame root.
    """

    def __init__(self, profile: StrategyProfile, params: GameParams):
        self.profile = profile
        self.params = params
        self.memo: Dict[Tuple[str, int, int], float] = {}

    def best(self, node: GameNode, agent: int, d: int) -> float:
        """Best deviation value from `node`, `d` stages below the subgame root."""
        if node.is_leaf:
            return self.params.norm * float(node.terminal[agent])
        key = (node.node_id, agent, d)
        if key not in self.memo:
            self.memo[key] = float(np.max(self.options(node, agent, d)))
        return self.memo[key]

    def options(self, node: GameNode, agent: int, d: int = 0, other: Optional[int] = None) -> np.ndarray:
        """Deviation value of every own action at `node`; the opponent plays its profile choice or `other`."""
        delta = self.params.delta
        other = self.profile.choice(1 - agent, node.node_id) if other is None else other
        stage = _pick(stage_table(node, agent, None), agent, other)
        n_own = node.shape[agent]
        cont = np.empty(n_own)
        for a in range(n_own):
            child = node.child(a, other) if agent == 0 else node.child(other, a)
            cont[a] = self.best(child, agent, d + 1)
        return delta ** (d + 1) * stage + cont


def _first(mask: np.ndarray) -> Tuple[int, int]:
    """Lexicographically first True cell of a 2-D mask."""
    i, j = np.argwhere(mask)[0]
    return int(i), int(j)


def solve_spene(tree: GameTree, params: Optional[GameParams] = None) -> SolverResult:
    """
    Subgame-perfect epsilon-Nash equilibrium in pure behavior strategies by backward induction.

    At every decision node, deepest first, each joint action is checked against every unilateral deviation of either
    agent, including deviations further down the subgame. Joint actions where neither agent gains more than epsilon
    are equilibria; the one with the highest sum of both agents' values is selected, ties going to the
    lexicographically first (agent-1 index, agent-2 index). A node with no pure equilibrium takes the joint action of
    minimal maximal regret and is flagged.

    Args:
        tree (GameTree): An annotated game tree.
        params (GameParams, optional): Discount, epsilon and normalization; the tree's own when omitted.

    Returns:
        (SolverResult): Pure profile, node values, equilibrium counts and fallback nodes.
    """
    params = params or tree.params
    profile = StrategyProfile()
    best_response = _BestResponse(profile, params)
    memo: Dict = {}
    counts: Dict[str, int] = {}
    fallbacks: List[str] = []

    for node in reversed(tree.decision_nodes()):
        q = joint_values(node, profile, params, memo)
        n1, n2 = node.shape
        dev1 = np.array([np.max(best_response.options(node, 0, other=j)) for j in range(n2)])
        dev2 = np.array([np.max(best_response.options(node, 1, other=i)) for i in range(n1)])
        gain1 = dev1[None, :] - q[..., 0]
        gain2 = dev2[:, None] - q[..., 1]

        stable = (gain1 <= params.epsilon + _TIE) & (gain2 <= params.epsilon + _TIE)
        counts[node.node_id] = int(stable.sum())
        if stable.any():
            welfare = np.where(stable, q.sum(axis=-1), -np.inf)
            i, j = _first(stable & (welfare >= welfare.max() - _TIE))
        else:
            regret = np.maximum(gain1, gain2)
            i, j = _first(regret <= regret.min() + _TIE)
            fallbacks.append(node.node_id)
            logger.debug(f"no pure epsilon-equilibrium at node {node.node_id}; minimal regret {regret.min():.4f}")

        profile.set_pure(0, node.node_id, i, n1)
        profile.set_pure(1, node.node_id, j, n2)

    if fallbacks:
        logger.warning(f"{len(fallbacks)} node(s) without a pure epsilon-equilibrium, shallowest at {fallbacks[-1]}")

    values = _values(tree, profile, params, memo)
    return SolverResult(
        profile=profile, concept="spene", values=values, equilibrium_counts=counts, fallback_nodes=fallbacks[::-1]
    )


def _values(tree: GameTree, profile: StrategyProfile, params: GameParams, memo: Optional[Dict] = None) -> Dict:
    """Value W + N T of every decision node under a profile."""
    memo = {} if memo is None else memo
    out = {}
    for node in tree.decision_nodes():
        w, t = continuation(node, profile, params, memo=memo)
        out[node.node_id] = w + params.norm * t
    return out


def solve_level0_maxmax(tree: GameTree, agent: int, params: Optional[GameParams] = None) -> Dict[str, int]:
    """
    Optimistic non-strategic play of one agent at every decision node.

    At each node the agent picks the own action whose best joint outcome is highest, assuming the most favorable
    opponent choice here and at every later stage. Only the agent's own utilities are used.

    Args:
        tree (GameTree): An annotated game tree.
        agent (int): 0 or 1.
        params (GameParams, optional): Discount and normalization; the tree's own when omitted.

    Returns:
        (Dict[str, int]): Chosen action index per node id; ties go to the lowest index.
    """
    params = params or tree.params
    memo: Dict[Tuple[str, int], float] = {}

    def table(node: GameNode, d: int) -> np.ndarray:
        """Optimistic value of every joint action at `node`, `d` stages below the subgame root."""
        stage = stage_table(node, agent, None)
        if node.leaf_payoffs is not None:
            cont = params.norm * node.leaf_payoffs[..., agent]
        else:
            cont = np.empty(node.shape)
            for (i, j), child in node.children.items():
                cont[i, j] = optimistic(child, d + 1)
        return params.delta ** (d + 1) * stage + cont

    def optimistic(node: GameNode, d: int) -> float:
        if node.is_leaf:
            return params.norm * float(node.terminal[agent])
        key = (node.node_id, d)
        if key not in memo:
            memo[key] = float(np.max(table(node, d)))
        return memo[key]

    choices = {}
    for node in tree.decision_nodes():
        best = np.max(table(node, 0), axis=1 - agent)
        choices[node.node_id] = int(np.argmax(best))
    return choices


def solve_qlk_level1(tree: GameTree, params: Optional[GameParams] = None) -> SolverResult:
    """
    Quantal level-1 play of both agents against level-0 maxmax opponents.

    Each agent believes the other plays `solve_level0_maxmax`. At every node, deepest first, the expected value of
    each own action is the stage utility against the believed opponent choice plus the continuation in which the
    agent itself follows the mode of its own quantal response below. The agent's behavior at the node is the logit
    distribution softmax(lambda * EV).

    Args:
        tree (GameTree): An annotated game tree.
        params (GameParams, optional): Discount, precision lambda and normalization; the tree's own when omitted.

    Returns:
        (SolverResult): Quantal profile, node values under it, level-0 beliefs and expected values.
    """
    params = params or tree.params
    profile = StrategyProfile()
    level0 = (solve_level0_maxmax(tree, 0, params), solve_level0_maxmax(tree, 1, params))
    expected: Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]] = ({}, {})

    for agent in (0, 1):
        believed = level0[1 - agent]
        cont: Dict[str, Tuple[float, float]] = {}
        for node in reversed(tree.decision_nodes()):
            other = believed[node.node_id]
            stage = _pick(stage_table(node, agent, None), agent, other)
            n_own = node.shape[agent]
            w = np.empty(n_own)
            t = np.empty(n_own)
            for a in range(n_own):
                child = node.child(a, other) if agent == 0 else node.child(other, a)
                if child.is_leaf:
                    w[a], t[a] = 0.0, float(child.terminal[agent])
                else:
                    w[a], t[a] = cont[child.node_id]
            ev = params.delta * (stage + w) + params.norm * t
            probs = softmax(params.lambda_ * ev)
            profile.set_distribution(agent, node.node_id, probs / probs.sum())
            mode = int(np.argmax(ev))
            cont[node.node_id] = (params.delta * (stage[mode] + w[mode]), t[mode])
            expected[agent][node.node_id] = ev

    return SolverResult(
        profile=profile, concept="qlk", values=_values(tree, profile, params), level0=level0, expected_values=expected
    )


def _deviations(tree: GameTree, profile: StrategyProfile, params: GameParams) -> Iterator[Tuple[str, int, float, int]]:
    """(node id, agent, gain, best deviation) for every decision node and agent of a pure profile."""
    if not profile.is_pure:
        raise ProfileError("epsilon-equilibrium verification needs a pure profile")
    best_response = _BestResponse(profile, params)
    memo: Dict = {}
    for node in tree.decision_nodes():
        w, t = continuation(node, profile, params, memo=memo)
        current = w + params.norm * t
        for agent in (0, 1):
            options = best_response.options(node, agent)
            yield node.node_id, agent, float(np.max(options) - current[agent]), int(np.argmax(options))


def subgame_gains(
    tree: GameTree, profile: StrategyProfile, params: Optional[GameParams] = None
) -> Dict[str, np.ndarray]:
    """
    Best unilateral deviation gain of both agents in the subgame rooted at every decision node.

    Args:
        tree (GameTree): An annotated game tree.
        profile (StrategyProfile): A pure profile defined at every decision node.
        params (GameParams, optional): Discount and normalization; the tree's own when omitted.

    Returns:
        (Dict[str, np.ndarray]): Gains of shape (2,) per node id; zero when the agent already plays a best response.

    Raises:
        (ProfileError): If the profile mixes somewhere or is undefined at a decision node.
    """
    gains: Dict[str, np.ndarray] = {}
    for node_id, agent, gain, _ in _deviations(tree, profile, params or tree.params):
        gains.setdefault(node_id, np.zeros(2))[agent] = max(gain, 0.0)
    return gains


def verify_epsilon_equilibrium(
    tree: GameTree, profile: StrategyProfile, epsilon: float, params: Optional[GameParams] = None
) -> DeviationReport:
    """
    Check a pure profile for profitable unilateral deviations in every subgame.

    For every decision node and each agent, the best behavior-strategy deviation in the subgame rooted there is
    computed against the opponent's fixed strategy and compared with the agent's value under the profile.

    Args:
        tree (GameTree): An annotated game tree.
        profile (StrategyProfile): A pure profile defined at every decision node.
        epsilon (float): Allowed gain.
        params (GameParams, optional): Discount and normalization; the tree's own when omitted.

    Returns:
        (DeviationReport): ok iff the largest gain is at most epsilon + 1e-9, with the node and deviation where the
            largest gain occurs.

    Raises:
        (ProfileError): If the profile mixes somewhere or is undefined at a decision node.
    """
    worst = DeviationReport(ok=True, worst_gain=-np.inf, epsilon=epsilon)
    for node_id, agent, gain, deviation in _deviations(tree, profile, params or tree.params):
        if gain > worst.worst_gain:
            worst = DeviationReport(
                ok=True, worst_gain=gain, epsilon=epsilon, node_id=node_id, agent=agent, deviation=deviation
            )
    return DeviationReport(
        ok=worst.worst_gain <= epsilon + 1e-9,
        worst_gain=max(worst.worst_gain, 0.0),
        epsilon=epsilon,
        node_id=worst.node_id,
        agent=worst.agent,
        deviation=worst.deviation,
    )
