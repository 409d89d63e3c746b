# conflict-sim - traffic-conflict game simulation toolkit

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from conflict_sim.base.params import TrajectoryParams
from conflict_sim.modules.game import GameTree, StrategyProfile, realized_path
from conflict_sim.modules.scenario import Scenario
from conflict_sim.modules.trajectory import Maneuver, classify_maneuver_symbol


class Category(str, Enum):
    """Strategy categories along the initial-response and responsiveness dimensions."""

    UA = "UA"  # unresponsive adherence
    RA = "RA"  # responsive adherence
    UAA = "UAA"  # unresponsive assertive adherence
    RAA = "RAA"  # responsive assertive adherence
    UR = "UR"  # unresponsive relinquishment
    RR = "RR"  # responsive relinquishment
    UV = "UV"  # unresponsive violation
    RV = "RV"  # responsive violation
    UAV = "UAV"  # unresponsive aggressive violation
    RAV = "RAV"  # responsive aggressive violation
    FP = "FP"  # flexible path execution


class RowStatus(str, Enum):
    """Whether an agent holds the right-of-way."""

    HOLDER = "holder"
    NON_HOLDER = "non_holder"


# (initial class, responsive, row status) -> category
_TABLE: Dict[Tuple[str, bool, RowStatus], Category] = {
    ("w", False, RowStatus.HOLDER): Category.UR,
    ("w", True, RowStatus.HOLDER): Category.RR,
    ("p", False, RowStatus.HOLDER): Category.UA,
    ("p", True, RowStatus.HOLDER): Category.RA,
    ("a", False, RowStatus.HOLDER): Category.UAA,
    ("a", True, RowStatus.HOLDER): Category.RAA,
    ("w", False, RowStatus.NON_HOLDER): Category.UA,
    ("w", True, RowStatus.NON_HOLDER): Category.RA,
    ("p", False, RowStatus.NON_HOLDER): Category.UV,
    ("p", True, RowStatus.NON_HOLDER): Category.RV,
    ("a", False, RowStatus.NON_HOLDER): Category.UAV,
    ("a", True, RowStatus.NON_HOLDER): Category.RAV,
}

VALID_CATEGORIES = {
    RowStatus.HOLDER: {c for (_, _, s), c in _TABLE.items() if s is RowStatus.HOLDER} | {Category.FP},
    RowStatus.NON_HOLDER: {c for (_, _, s), c in _TABLE.items() if s is RowStatus.NON_HOLDER} | {Category.FP},
}

COLLAPSED = {Category.UAA: Category.UA, Category.RAA: Category.RA, Category.UAV: Category.UV, Category.RAV: Category.RV}

# Sequences are matched as strings over w (wait), p (proceed) and a (aggressive proceed); the first group is the
# initial run of one maneuver class, the second whatever follows the first class change.
_CODE = {Maneuver.WAIT: "w", Maneuver.PROCEED: "p", Maneuver.AGGRESSIVE: "a"}
_RUNS = re.compile(r"^(w+|[pa]+)(.*)$")

TOKENS = {"w": Maneuver.WAIT, "p": Maneuver.PROCEED, "pa": Maneuver.AGGRESSIVE}


@dataclass(frozen=True)
class SymbolSequence:
    """Maneuver symbols of one agent, one per decision stage, starting at t = 0."""

    symbols: Tuple[Maneuver, ...]

    def __post_init__(self):
        """Reject empty sequences and symbols outside the alphabet."""
        if not self.symbols:
            raise ValueError("a symbol sequence must not be empty")
        if not all(isinstance(s, Maneuver) for s in self.symbols):
            raise ValueError(f"symbols must be maneuvers, got {self.symbols}")

    @classmethod
    def of(cls, *symbols: str) -> "SymbolSequence":
        """Build from maneuver values, e.g. SymbolSequence.of("p", "p_a", "w"); text input goes through parse_tokens."""
        return cls(tuple(Maneuver(s) for s in symbols))

    @property
    def code(self) -> str:
        """The sequence as a string over w, p and a."""
        return "".join(_CODE[s] for s in self.symbols)

    @property
    def tokens(self) -> str:
        """The sequence as space-separated tokens over w, p and pa."""
        return " ".join("pa" if s is Maneuver.AGGRESSIVE else s.value for s in self.symbols)

    def __len__(self) -> int:
        """Number of stages."""
        return len(self.symbols)


@dataclass(frozen=True)
class TaxonomyLabel:
    """A strategy category together with the ROW status it was assigned under."""

    category: Category
    row_status: RowStatus

    def __post_init__(self):
        """Reject categories that do not exist for the ROW status."""
        if self.category not in VALID_CATEGORIES[self.row_status]:
            raise ValueError(f"{self.category.value} is not a category for a {self.row_status.value}")


@dataclass(frozen=True)
class OutcomeRecord:
    """
    Classified outcome of one solved game.

    Attributes:
        labels (Tuple[TaxonomyLabel, TaxonomyLabel]): Per-agent labels.
        symbols (Tuple[SymbolSequence, SymbolSequence]): Per-agent realized symbol sequences.
        holder (int): Index of the ROW holder.
        deadlock (bool): Whether both agents stood still short of the zone at some stage.
        deadlock_stage (int, optional): First stage (0-based) at which a deadlock holds.
        cleared (Tuple[bool, bool]): Whether each agent exits the conflict zone within horizon and continuation.
    """

    labels: Tuple[TaxonomyLabel, TaxonomyLabel]
    symbols: Tuple[SymbolSequence, SymbolSequence]
    holder: int
    deadlock: bool = False
    deadlock_stage: Optional[int] = None
    cleared: Tuple[bool, bool] = (False, False)

    def pair(self, collapsed: bool = False) -> Tuple[Category, Category]:
        """Joint (holder, non-holder) categories, optionally without the aggressive and assertive modifiers."""
        holder, other = self.labels[self.holder].category, self.labels[1 - self.holder].category
        if collapsed:
            return collapse_category(holder), collapse_category(other)
        return holder, other


def parse_tokens(text: str) -> SymbolSequence:
    """
    Parse space-separated maneuver tokens.

    Args:
        text (str): Tokens from {w, p, pa}, e.g. "w p pa".

    Returns:
        (SymbolSequence): The parsed sequence.

    Raises:
        (ValueError): If a token is outside the alphabet or the text is empty.
    """
    tokens = text.split()
    unknown = [t for t in tokens if t not in TOKENS]
    if unknown:
        raise ValueError(f"unknown maneuver token {unknown[0]!r}; expected w, p or pa")
    return SymbolSequence(tuple(TOKENS[t] for t in tokens))


def classify_strategy(seq: SymbolSequence, row_status: RowStatus, alternate_path: bool = False) -> TaxonomyLabel:
    """
    Map a symbol sequence to its strategy category.

    The initial run of one maneuver class (wait, or proceed in either form) fixes the initial response; the run is
    aggressive if it contains an aggressive proceed. The strategy is responsive if the class changes afterwards.

    Args:
        seq (SymbolSequence): The agent's realized maneuvers.
        row_status (RowStatus): Whether the agent holds the right-of-way.
        alternate_path (bool): Whether the agent left its path for another one, which always gives FP.

    Returns:
        (TaxonomyLabel): The category under `row_status`.
    """
    row_status = RowStatus(row_status)
    if alternate_path:
        return TaxonomyLabel(Category.FP, row_status)
    run, rest = _RUNS.match(seq.code).groups()
    initial = "w" if run[0] == "w" else ("a" if "a" in run else "p")
    return TaxonomyLabel(_TABLE[(initial, bool(rest), row_status)], row_status)


def collapse_category(category: Category) -> Category:
    """Drop the aggressive and assertive modifiers: UAA→UA, RAA→RA, UAV→UV, RAV→RV."""
    return COLLAPSED.get(Category(category), Category(category))


def extract_symbols(
    tree: GameTree, profile: StrategyProfile, agent: int, aggressive_threshold: Optional[float] = None
) -> SymbolSequence:
    """
    Maneuver symbols of one agent along the realized path of a profile.

    Args:
        tree (GameTree): The game tree.
        profile (StrategyProfile): Pure or mode-resolved profile.
        agent (int): 0 or 1.
        aggressive_threshold (float, optional): Reclassify with this threshold; the symbols assigned at generation
            are used when omitted.

    Returns:
        (SymbolSequence): One symbol per stage.
    """
    settings = tree.trajectory
    symbols = []
    for node, joint in realized_path(tree, profile):
        traj = node.actions[agent][joint[agent]]
        if aggressive_threshold is None:
            symbols.append(traj.maneuver)
        else:
            symbols.append(
                classify_maneuver_symbol(traj, aggressive_threshold, settings.progress_epsilon, settings.stop_speed)
            )
    return SymbolSequence(tuple(symbols))


def deadlock_stages(
    tree: GameTree, profile: StrategyProfile, params: Optional[TrajectoryParams] = None
) -> List[int]:
    """
    Stages at which both agents wait, stand still at the stage end and neither has cleared the conflict zone.

    Args:
        tree (GameTree): The game tree.
        profile (StrategyProfile): Pure or mode-resolved profile.
        params (TrajectoryParams, optional): Supplies the stop speed; the tree's settings when omitted.

    Returns:
        (List[int]): 0-based stage indices, ascending.
    """
    stop_speed = (params or tree.trajectory).stop_speed
    exits = tree.exit_arcs
    stages = []
    for node, (i, j) in realized_path(tree, profile):
        chosen = (node.actions[0][i], node.actions[1][j])
        if all(
            tr.maneuver is Maneuver.WAIT and tr.final_speed < stop_speed and tr.final_arc <= exits[k]
            for k, tr in enumerate(chosen)
        ):
            stages.append(node.stage)
    return stages


def detect_deadlock(tree: GameTree, profile: StrategyProfile, params: Optional[TrajectoryParams] = None) -> bool:
    """Whether a deadlock holds at any decision stage; see `deadlock_stages`."""
    return bool(deadlock_stages(tree, profile, params))


def _cleared(tree: GameTree, profile: StrategyProfile) -> Tuple[bool, bool]:
    """Whether each agent passes its zone exit by the end of the continuation at its final speed."""
    path = realized_path(tree, profile)
    node, (i, j) = path[-1]
    chosen = (node.actions[0][i], node.actions[1][j])
    horizon = tree.params.delta_t_h
    return tuple(tr.final_arc + tr.final_speed * horizon > tree.exit_arcs[k] for k, tr in enumerate(chosen))


def classify_outcome(
    tree: GameTree,
    profile: StrategyProfile,
    scenario: Optional[Scenario] = None,
    params: Optional[TrajectoryParams] = None,
    alternate_path: Sequence[bool] = (False, False),
) -> OutcomeRecord:
    """
    Label both agents of a solved game and flag deadlocks.

    Args:
        tree (GameTree): The game tree.
        profile (StrategyProfile): Pure or mode-resolved profile.
        scenario (Scenario, optional): Supplies the ROW holder; the tree's scenario when omitted.
        params (TrajectoryParams, optional): Supplies the stop speed; the tree's settings when omitted.
        alternate_path (Sequence[bool]): Per-agent alternate-path annotation.

    Returns:
        (OutcomeRecord): Labels, symbol sequences, deadlock and clearance flags.
    """
    scenario = scenario or tree.setup.scenario
    holder = scenario.holder_index
    symbols = tuple(extract_symbols(tree, profile, k) for k in (0, 1))
    labels = tuple(
        classify_strategy(
            symbols[k], RowStatus.HOLDER if k == holder else RowStatus.NON_HOLDER, alternate_path=alternate_path[k]
        )
        for k in (0, 1)
    )
    stages = deadlock_stages(tree, profile, params)
    return OutcomeRecord(
        labels=labels,
        symbols=symbols,
        holder=holder,
        deadlock=bool(stages),
        deadlock_stage=stages[0] if stages else None,
        cleared=_cleared(tree, profile),
    )
