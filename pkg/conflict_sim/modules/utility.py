# conflict-sim - traffic-conflict game simulation toolkit

from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from conflict_sim.base.errors import GameConstructionError
from conflict_sim.base.params import GameParams, ProgressParams, SigmoidParams, UtilityParams
from conflict_sim.modules.game import GameNode, GameTree, StrategyProfile
from conflict_sim.modules.trajectory import Trajectory, extrapolate, pairwise_min_gaps

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class UtilityComponents:
    """Safety u_s in [-1, 1] and progress u_p in [0, 1] of one agent for one outcome."""

    u_s: float
    u_p: float

    def __post_init__(self):
        """Check the component ranges."""
        if not -1.0 - 1e-12 <= self.u_s <= 1.0 + 1e-12 or not -1e-12 <= self.u_p <= 1.0 + 1e-12:
            raise ValueError(f"utility components out of range: u_s={self.u_s}, u_p={self.u_p}")


def _scalar(value: np.ndarray) -> ArrayLike:
    """Unwrap 0-d results so scalar calls return plain floats."""
    return float(value) if np.ndim(value) == 0 else value


def safety_utility(gap: ArrayLike, sp: Optional[SigmoidParams] = None) -> ArrayLike:
    """
    Map a minimum distance gap to a safety utility in [-1, 1].

    Args:
        gap (float | np.ndarray): Minimum gap between the agents (m).
        sp (SigmoidParams, optional): Midpoint d0 and steepness a.

    Returns:
        (float | np.ndarray): 2 / (1 + exp(-a (gap - d0))) - 1.
    """
    sp = sp or SigmoidParams()
    return _scalar(2.0 * expit(sp.steepness * (np.asarray(gap, dtype=float) - sp.midpoint)) - 1.0)


def progress_utility(arc_length: ArrayLike, pp: ProgressParams) -> ArrayLike:
    """
    Map the arc length covered to a progress utility in [0, 1].

    Args:
        arc_length (float | np.ndarray): Distance advanced along the path (m).
        pp (ProgressParams): Full-scale length L_max.

    Returns:
        (float | np.ndarray): min(1, arc_length / L_max).
    """
    return _scalar(np.clip(np.asarray(arc_length, dtype=float) / pp.full_scale, 0.0, 1.0))


def apply_row_penalty(u_s: ArrayLike, violated, tau: float) -> ArrayLike:
    """
    Penalize the safety utility of an agent acting against the right-of-way rule.

    Args:
        u_s (float | np.ndarray): Safety utility.
        violated (bool | np.ndarray): Violation flag(s), broadcast against `u_s`.
        tau (float): Penalty.

    Returns:
        (float | np.ndarray): max(-1, u_s - tau) where violated, u_s elsewhere.
    """
    u_s = np.asarray(u_s, dtype=float)
    return _scalar(np.where(violated, np.maximum(-1.0, u_s - tau), u_s))


def combine(u_s: ArrayLike, u_p: ArrayLike, gamma: ArrayLike) -> ArrayLike:
    """Vectorized lexicographic threshold: u_s where u_s <= -gamma, u_p elsewhere."""
    u_s = np.asarray(u_s, dtype=float)
    return _scalar(np.where(u_s <= -np.asarray(gamma, dtype=float), u_s, np.asarray(u_p, dtype=float)))


def combine_lexicographic(c: UtilityComponents, gamma: float) -> float:
    """
    Combine safety and progress for an agent of type gamma.

    Args:
        c (UtilityComponents): The two objectives.
        gamma (float): Risk tolerance in [-1, 1].

    Returns:
        (float): u_s if u_s <= -gamma, otherwise u_p.
    """
    return c.u_s if c.u_s <= -gamma else c.u_p


def _violations(node: GameNode, tree: GameTree, proceeds: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """
    ROW violation flags of every joint choice at a node, shape (n1, n2, 2).

    The non-holder is flagged when it proceeds while the holder has not cleared the conflict zone and neither has
    the non-holder itself. The holder is never flagged.
    """
    h = tree.holder
    o = 1 - h
    exits = tree.exit_arcs
    flags = np.zeros(node.shape + (2,), dtype=bool)
    if node.arcs[h] > exits[h] or node.arcs[o] > exits[o]:
        return flags
    if o == 0:
        flags[:, :, 0] = proceeds[0][:, None]
    else:
        flags[:, :, 1] = proceeds[1][None, :]
    return flags


def _proceed_mask(actions) -> np.ndarray:
    """Which trajectories of an action list carry a proceed-class symbol."""
    return np.array([tr.maneuver.is_proceed for tr in actions])


def _stage_components(node: GameNode, tree: GameTree, params: UtilityParams) -> Tuple[np.ndarray, np.ndarray]:
    """Penalized safety and progress utility of every joint choice at a decision node."""
    first, second = node.actions
    gaps = pairwise_min_gaps(first, second)
    safety = np.repeat(np.asarray(safety_utility(gaps, params.sigmoid))[..., None], 2, axis=-1)
    flags = _violations(node, tree, (_proceed_mask(first), _proceed_mask(second)))
    safety = apply_row_penalty(safety, flags, tree.params.tau)

    progress = np.empty(node.shape + (2,))
    for k, actions in enumerate(node.actions):
        scale = params.stage_progress(tree.trajectory.limits_for(tree.setup.scenario.agents[k].kind), tree.params)
        own = np.asarray(progress_utility(np.array([tr.path_arc_progress for tr in actions]), scale))
        progress[..., k] = own[:, None] if k == 0 else own[None, :]
    return safety, progress


def _terminal_components(
    node: GameNode, tree: GameTree, params: UtilityParams, cache: Dict[int, Trajectory]
) -> Tuple[np.ndarray, np.ndarray]:
    """Continuation safety and progress for every leaf below a last-stage node, shape (n1, n2, 2)."""
    game = tree.params
    dt = tree.trajectory.dt
    extended = []
    for k, actions in enumerate(node.actions):
        path = tree.paths[k]
        out = []
        for tr in actions:
            if id(tr) not in cache:
                cache[id(tr)] = extrapolate(tr, path, game.delta_t_h, dt)
            out.append(cache[id(tr)])
        extended.append(out)

    gaps = pairwise_min_gaps(extended[0], extended[1])
    safety = np.repeat(np.asarray(safety_utility(gaps, params.sigmoid))[..., None], 2, axis=-1)

    # A leaf sits one stage below: check clearance against the arcs the agents reach there.
    h = tree.holder
    o = 1 - h
    exits = tree.exit_arcs
    flags = np.zeros(node.shape + (2,), dtype=bool)
    moving = [np.array([tr.final_speed >= tree.trajectory.stop_speed for tr in acts]) for acts in node.actions]
    holder_end = np.array([tr.final_arc for tr in node.actions[h]])
    other_end = np.array([tr.final_arc for tr in node.actions[o]])
    if o == 0:
        flags[:, :, 0] = moving[0][:, None] & (holder_end[None, :] <= exits[h]) & (other_end[:, None] <= exits[o])
    else:
        flags[:, :, 1] = moving[1][None, :] & (holder_end[:, None] <= exits[h]) & (other_end[None, :] <= exits[o])
    safety = apply_row_penalty(safety, flags, game.tau)

    progress = np.empty(node.shape + (2,))
    for k, acts in enumerate(extended):
        scale = params.terminal_progress(tree.trajectory.limits_for(tree.setup.scenario.agents[k].kind), game)
        own = np.asarray(progress_utility(np.array([tr.path_arc_progress for tr in acts]), scale))
        progress[..., k] = own[:, None] if k == 0 else own[None, :]
    return safety, progress


def annotate_tree(tree: GameTree, params: Optional[UtilityParams] = None) -> GameTree:
    """
    Compute stage and continuation utilities at every node of a built tree.

    Every decision node gets `safety`, `progress` and `payoffs` tables over its joint choices; nodes of the last
    stage also get the continuation tables of their leaves, obtained by extending both chosen trajectories at their
    final speed for delta_t_h seconds.

    Args:
        tree (GameTree): A tree from `build_tree`.
        params (UtilityParams, optional): Sigmoid and progress constants.

    Returns:
        (GameTree): The same tree, annotated in place.
    """
    params = params or UtilityParams()
    gammas = np.asarray(tree.gammas, dtype=float)
    cache: Dict[int, Trajectory] = {}
    for node in tree.decision_nodes():
        node.safety, node.progress = _stage_components(node, tree, params)
        node.payoffs = combine(node.safety, node.progress, gammas)
        if all(child.is_leaf for child in node.children.values()):
            node.leaf_safety, node.leaf_progress = _terminal_components(node, tree, params, cache)
            node.leaf_payoffs = combine(node.leaf_safety, node.leaf_progress, gammas)
    return tree


def stage_table(node: GameNode, agent: int, gamma: Optional[float]) -> np.ndarray:
    """Agent's combined stage utilities at a node, recombined for `gamma` when given."""
    if gamma is None:
        if node.payoffs is None:
            raise GameConstructionError(f"node {node.node_id} has no payoffs; annotate the tree first")
        return node.payoffs[..., agent]
    if node.safety is None or node.progress is None:
        raise GameConstructionError(f"node {node.node_id} has no utility components")
    return combine(node.safety[..., agent], node.progress[..., agent], gamma)


def leaf_table(node: GameNode, agent: int, gamma: Optional[float]) -> np.ndarray:
    """Agent's continuation utilities of all leaves below a last-stage node, recombined for `gamma` when given."""
    if gamma is None:
        return node.leaf_payoffs[..., agent]
    return combine(node.leaf_safety[..., agent], node.leaf_progress[..., agent], gamma)


def terminal_utility(
    leaf: GameNode,
    profile: Optional[StrategyProfile] = None,
    agent: int = 0,
    gamma: Optional[float] = None,
    params: Optional[GameParams] = None,
) -> float:
    """
    Continuation utility u_C of an agent at a leaf.

    Both agents are assumed to keep the trajectory chosen at the last decision stage, at its final speed, for another
    delta_t_h seconds; the safety term is penalized for ROW violations before the lexicographic combination.

    Args:
        leaf (GameNode): A leaf of an annotated tree.
        profile (StrategyProfile, optional): Unused at leaves; accepted so leaves and inner nodes share a signature.
        agent (int): 0 or 1.
        gamma (float, optional): Type to combine with; the tree's own type when omitted.
        params (GameParams, optional): Unused at leaves.

    Returns:
        (float): The combined continuation utility.
    """
    if not leaf.is_leaf:
        raise GameConstructionError(f"node {leaf.node_id} is not a leaf")
    if gamma is None:
        return float(leaf.terminal[agent])
    u_s = float(leaf._leaf_entry("leaf_safety")[agent])
    u_p = float(leaf._leaf_entry("leaf_progress")[agent])
    return combine_lexicographic(UtilityComponents(u_s, u_p), gamma)


def continuation(
    node: GameNode,
    profile: StrategyProfile,
    params: GameParams,
    gammas: Tuple[Optional[float], Optional[float]] = (None, None),
    memo: Optional[Dict[str, Tuple[np.ndarray, np.ndarray]]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Expected discounted stage sum W and reached terminal utility T of both agents below a node.

    W(node) = delta * (u(a) + W(child(a))) and T(node) = T(child(a)), in expectation over the profile's mixing;
    at a leaf W = 0 and T is the continuation utility.

    Args:
        node (GameNode): Subgame root.
        profile (StrategyProfile): Strategies on the subtree.
        params (GameParams): Discount factor.
        gammas (tuple): Per-agent types to recombine with; None keeps the stored payoffs.
        memo (dict, optional): Cache shared across calls on the same profile.

    Returns:
        (Tuple[np.ndarray, np.ndarray]): W and T, each of shape (2,).
    """
    memo = {} if memo is None else memo
    if node.node_id in memo:
        return memo[node.node_id]
    if node.is_leaf:
        return np.zeros(2), np.array([terminal_utility(node, agent=k, gamma=gammas[k]) for k in (0, 1)])

    p1 = profile.distribution(0, node.node_id)
    p2 = profile.distribution(1, node.node_id)
    stage = np.stack([stage_table(node, k, gammas[k]) for k in (0, 1)], axis=-1)
    wc = np.zeros(node.shape + (2,))
    if node.leaf_payoffs is not None:
        tc = np.stack([leaf_table(node, k, gammas[k]) for k in (0, 1)], axis=-1)
    else:
        tc = np.zeros(node.shape + (2,))
        for i in np.flatnonzero(p1):
            for j in np.flatnonzero(p2):
                wc[i, j], tc[i, j] = continuation(node.child(int(i), int(j)), profile, params, gammas, memo)

    weights = np.outer(p1, p2)
    w = params.delta * np.einsum("ij,ijk->k", weights, stage + wc)
    t = np.einsum("ij,ijk->k", weights, tc)
    memo[node.node_id] = (w, t)
    return w, t


def node_value(
    node: GameNode,
    profile: StrategyProfile,
    agent: int,
    gamma: Optional[float] = None,
    params: Optional[GameParams] = None,
) -> float:
    """
    Value of a subgame to one agent under a profile.

    Sum over the remaining stages k = 1..R of delta**k times the combined stage utility, plus N times the
    continuation utility of the reached leaf, in expectation when the profile mixes.

    Args:
        node (GameNode): Subgame root.
        profile (StrategyProfile): Strategies on the subtree.
        agent (int): 0 or 1.
        gamma (float, optional): Type to evaluate with; the stored payoffs when omitted.
        params (GameParams, optional): Discount factor and terminal normalization.

    Returns:
        (float): The agent's value.

    Raises:
        (ProfileError): If the profile is undefined somewhere below the node.
    """
    params = params or GameParams()
    gammas = (gamma, None) if agent == 0 else (None, gamma)
    w, t = continuation(node, profile, params, gammas)
    return float(w[agent] + params.norm * t[agent])


def child_continuations(
    node: GameNode, profile: StrategyProfile, params: GameParams, memo: Optional[Dict] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    W and T of every child of a decision node under a profile, each of shape (n1, n2, 2).

    Children that are leaves contribute W = 0 and their continuation utility, read from the node's leaf table.
    """
    memo = {} if memo is None else memo
    if node.leaf_payoffs is not None:
        return np.zeros(node.shape + (2,)), node.leaf_payoffs
    w = np.empty(node.shape + (2,))
    t = np.empty(node.shape + (2,))
    for (i, j), child in node.children.items():
        w[i, j], t[i, j] = continuation(child, profile, params, memo=memo)
    return w, t


def joint_values(
    node: GameNode, profile: StrategyProfile, params: GameParams, memo: Optional[Dict] = None
) -> np.ndarray:
    """
    Value of every joint choice at a node to both agents when play below follows the profile.

    Returns:
        (np.ndarray): delta * (u(a) + W(child(a))) + N * T(child(a)), shape (n1, n2, 2).
    """
    w, t = child_continuations(node, profile, params, memo)
    payoffs = np.stack([stage_table(node, k, None) for k in (0, 1)], axis=-1)
    return params.delta * (payoffs + w) + params.norm * t
