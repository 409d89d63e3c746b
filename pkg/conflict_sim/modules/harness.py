# conflict-sim - traffic-conflict game simulation toolkit

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from tqdm import tqdm

from conflict_sim import __version__, config
from conflict_sim.base.errors import AggregationError, ConflictSimError, ReportIOError
from conflict_sim.helpers.exceptions import suppress_exceptions
from conflict_sim.helpers.logger import LOGGER
from conflict_sim.modules.game import GameTree, StrategyProfile, build_tree
from conflict_sim.modules.scenario import ExperimentConfig, GameSetup, apply_overrides, expand_sweep
from conflict_sim.modules.solvers import SolverResult, solve_qlk_level1, solve_spene
from conflict_sim.modules.taxonomy import Category, OutcomeRecord, classify_outcome, collapse_category
from conflict_sim.modules.utility import annotate_tree

logger = LOGGER.get_logger("harness")

CSV_COLUMNS = (
    "game_id",
    "scenario_id",
    "concept",
    "v1_init",
    "v2_init",
    "gamma1",
    "gamma2",
    "row_holder_id",
    "symbols_agent1",
    "symbols_agent2",
    "category_agent1",
    "category_agent2",
    "deadlock",
    "fallback_used",
    "param_fingerprint",
)
ROLES = ("holder", "non_holder")


@dataclass(frozen=True)
class GameRecord:
    """
    Result of one game of a batch, one row of the per-game CSV.

    Attributes:
        game_id (str): Scenario id and sweep index.
        scenario_id (str): Scenario identifier.
        concept (str): Solution concept used.
        v1_init (float): Initial speed of agent 1 (m/s).
        v2_init (float): Initial speed of agent 2 (m/s).
        gamma1 (float): Type of agent 1.
        gamma2 (float): Type of agent 2.
        row_holder_id (int): Which agent holds the right-of-way, 1 or 2.
        symbols_agent1 (str): Agent 1 maneuver tokens, e.g. "p p w"; empty if the game failed.
        symbols_agent2 (str): Agent 2 maneuver tokens.
        category_agent1 (str): Agent 1 strategy category; empty if the game failed.
        category_agent2 (str): Agent 2 strategy category.
        deadlock (bool): Whether a deadlock occurred.
        fallback_used (bool): Whether any node lacked a pure epsilon-equilibrium.
        param_fingerprint (str): Hash of every configuration value of the batch.
        deadlock_stage (int, optional): First deadlock stage; not written to the CSV.
        error (str): Failure message of a game that could not be played; not written to the CSV.
    """

    game_id: str
    scenario_id: str
    concept: str
    v1_init: float
    v2_init: float
    gamma1: float
    gamma2: float
    row_holder_id: int
    symbols_agent1: str = ""
    symbols_agent2: str = ""
    category_agent1: str = ""
    category_agent2: str = ""
    deadlock: bool = False
    fallback_used: bool = False
    param_fingerprint: str = ""
    deadlock_stage: Optional[int] = field(default=None, compare=False)
    error: str = field(default="", compare=False)

    @property
    def ok(self) -> bool:
        """Whether the game was played and classified."""
        return bool(self.category_agent1 and self.category_agent2)

    @property
    def holder(self) -> int:
        """0-based index of the ROW holder."""
        return self.row_holder_id - 1

    def pair(self, collapsed: bool = False) -> Tuple[str, str]:
        """Joint (holder, non-holder) category pair."""
        cats = (self.category_agent1, self.category_agent2)
        pair = cats[self.holder], cats[1 - self.holder]
        if collapsed:
            pair = tuple(collapse_category(Category(c)).value for c in pair)
        return pair

    def category(self, role: str, collapsed: bool = False) -> str:
        """Category of the agent with the given role ("holder" or "non_holder")."""
        return self.pair(collapsed)[ROLES.index(role)]

    def gamma(self, role: str) -> float:
        """Type of the agent with the given role."""
        gammas = (self.gamma1, self.gamma2)
        return gammas[self.holder] if role == "holder" else gammas[1 - self.holder]

    def row(self) -> Dict[str, Any]:
        """CSV row, columns in `CSV_COLUMNS` order."""
        row = {c: getattr(self, c) for c in CSV_COLUMNS}
        row["deadlock"] = str(self.deadlock).lower()
        row["fallback_used"] = str(self.fallback_used).lower()
        return row


@dataclass(frozen=True)
class DistributionTable:
    """
    Joint (holder category, non-holder category) counts over the classified games of a batch.

    Attributes:
        counts (Dict[Tuple[str, str], int]): Count per joint category, most frequent first.
        collapsed (bool): Whether aggressive and assertive modifiers were dropped.
        failed (int): Games excluded because they could not be played.
    """

    counts: Dict[Tuple[str, str], int]
    collapsed: bool = False
    failed: int = 0

    @property
    def total(self) -> int:
        """Number of classified games."""
        return sum(self.counts.values())

    @property
    def fractions(self) -> Dict[Tuple[str, str], float]:
        """Fraction per joint category; sums to 1."""
        total = self.total
        return {pair: count / total for pair, count in self.counts.items()}

    def fraction(self, holder: str, non_holder: str) -> float:
        """Fraction of one joint category, 0 when absent."""
        return self.counts.get((holder, non_holder), 0) / self.total

    def most_common(self, n: Optional[int] = None) -> List[Tuple[Tuple[str, str], int]]:
        """The n most frequent joint categories with their counts."""
        return list(self.counts.items())[:n]

    def as_frame(self) -> pd.DataFrame:
        """Long-format table with columns holder, non_holder, count, fraction."""
        fractions = self.fractions
        return pd.DataFrame(
            [(h, o, c, fractions[(h, o)]) for (h, o), c in self.counts.items()],
            columns=["holder", "non_holder", "count", "fraction"],
        )


def _config_for(cfg: ExperimentConfig, concept: Optional[str]) -> ExperimentConfig:
    """The experiment with its solution concept replaced when `concept` differs."""
    if concept is None or concept == cfg.solver.concept:
        return cfg
    return apply_overrides(cfg, [f"solver.concept={concept}"])


def _solve(tree, cfg: ExperimentConfig) -> SolverResult:
    """Solve an annotated tree with the configured concept."""
    if cfg.solver.concept == "qlk":
        return solve_qlk_level1(tree, cfg.game)
    return solve_spene(tree, cfg.game)


def _played_profile(result: SolverResult, setup: GameSetup, cfg: ExperimentConfig) -> StrategyProfile:
    """The pure profile that is actually played: sampled from quantal play in sample mode, otherwise the modes."""
    if result.concept == "qlk" and cfg.solver.qlk_play == "sample":
        return result.profile.resolve(np.random.default_rng(setup.seed))
    return result.profile.resolve()


def solve_game(
    setup: GameSetup, cfg: ExperimentConfig
) -> Tuple[SolverResult, StrategyProfile, OutcomeRecord, GameTree]:
    """
    Build, annotate, solve and classify one game.

    Args:
        setup (GameSetup): The game.
        cfg (ExperimentConfig): The experiment it belongs to.

    Returns:
        (tuple): Solver result, played pure profile, classified outcome and the annotated tree.
    """
    tree = annotate_tree(build_tree(setup, cfg.game, cfg.trajectory), cfg.utility)
    result = _solve(tree, cfg)
    played = _played_profile(result, setup, cfg)
    return result, played, classify_outcome(tree, played, setup.scenario, cfg.trajectory), tree


def _base_record(setup: GameSetup, cfg: ExperimentConfig) -> Dict[str, Any]:
    """Record fields known before the game is played."""
    return dict(
        game_id=setup.game_id,
        scenario_id=setup.scenario.scenario_id,
        concept=cfg.solver.concept,
        v1_init=float(setup.speeds[0]),
        v2_init=float(setup.speeds[1]),
        gamma1=float(setup.gammas[0]),
        gamma2=float(setup.gammas[1]),
        row_holder_id=setup.scenario.holder_index + 1,
        param_fingerprint=cfg.fingerprint,
    )


def play_game(setup: GameSetup, cfg: ExperimentConfig) -> GameRecord:
    """
    Play one game and summarize it as a record.

    Args:
        setup (GameSetup): The game.
        cfg (ExperimentConfig): The experiment it belongs to.

    Returns:
        (GameRecord): The classified game.
    """
    result, _, outcome, _ = solve_game(setup, cfg)
    return GameRecord(
        **_base_record(setup, cfg),
        symbols_agent1=outcome.symbols[0].tokens,
        symbols_agent2=outcome.symbols[1].tokens,
        category_agent1=outcome.labels[0].category.value,
        category_agent2=outcome.labels[1].category.value,
        deadlock=outcome.deadlock,
        fallback_used=result.fallback_used,
        deadlock_stage=outcome.deadlock_stage,
    )


def _play_safely(setup: GameSetup, cfg: ExperimentConfig) -> GameRecord:
    """`play_game` with failures captured in the record."""
    try:
        return play_game(setup, cfg)
    except (ConflictSimError, ValueError, FloatingPointError) as e:
        suppress_exceptions()
        logger.error(f"game {setup.game_id} failed: {e}")
        return GameRecord(**_base_record(setup, cfg), error=str(e))


def run_batch(
    cfg: ExperimentConfig,
    concept: Optional[str] = None,
    worker_count: Optional[int] = None,
    progress: bool = True,
    setups: Optional[Sequence[GameSetup]] = None,
) -> List[GameRecord]:
    """
    Play every game of an experiment's sweep.

    Args:
        cfg (ExperimentConfig): Scenario, sweep and all parameters.
        concept (str, optional): "spene" or "qlk"; the configured concept when omitted.
        worker_count (int, optional): Worker processes; CONFLICT_SIM_WORKERS when omitted, 1 runs in-process.
        progress (bool): Show a progress bar.
        setups (Sequence[GameSetup], optional): A subset of the sweep to play instead of all of it.

    Returns:
        (List[GameRecord]): One record per game, in sweep order regardless of scheduling.
    """
    cfg = _config_for(cfg, concept)
    setups = list(setups) if setups is not None else expand_sweep(cfg.scenario, cfg.sweep)
    workers = max(1, worker_count or config.CONFLICT_SIM_WORKERS)
    logger.info(
        f"running {len(setups)} {cfg.solver.concept} games of {cfg.scenario.scenario_id} on {workers} worker(s), "
        f"fingerprint {cfg.fingerprint}"
    )

    play = partial(_play_safely, cfg=cfg)
    bar = partial(tqdm, total=len(setups), desc=cfg.scenario.scenario_id, unit="game", disable=not progress)
    if workers == 1:
        records = [play(s) for s in bar(setups)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(setups) // (workers * 8))
            records = list(bar(pool.map(play, setups, chunksize=chunk)))

    failed = sum(not r.ok for r in records)
    if failed:
        logger.warning(f"{failed} of {len(records)} games failed and are excluded from aggregation")
    logger.info(f"finished {len(records)} games, fallback rate {fallback_rate(records):.3f}")
    return records


def fallback_rate(records: Sequence[GameRecord]) -> float:
    """Share of played games where some node had no pure epsilon-equilibrium."""
    played = [r for r in records if r.ok]
    return sum(r.fallback_used for r in played) / len(played) if played else 0.0


def aggregate_distribution(records: Sequence[GameRecord], collapsed: bool = False) -> DistributionTable:
    """
    Count joint (holder, non-holder) categories.

    Args:
        records (Sequence[GameRecord]): Batch records; failed games are skipped.
        collapsed (bool): Drop the aggressive and assertive modifiers first.

    Returns:
        (DistributionTable): Counts ordered by decreasing frequency, ties by category names.

    Raises:
        (AggregationError): If no record was classified.
    """
    played = [r for r in records if r.ok]
    if not played:
        raise AggregationError("cannot aggregate an empty set of records")
    counts = Counter(r.pair(collapsed) for r in played)
    ordered = dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return DistributionTable(counts=ordered, collapsed=collapsed, failed=len(records) - len(played))


CategoryFilter = Union[str, Tuple[str, str], Callable[[GameRecord], bool]]


def _matcher(category_filter: CategoryFilter, agent_role: str, collapsed: bool) -> Callable[[GameRecord], bool]:
    """Predicate behind a category filter: a category of the selected agent, a joint pair, or a callable."""
    if callable(category_filter):
        return category_filter
    if isinstance(category_filter, tuple):
        return lambda r: r.pair(collapsed) == tuple(category_filter)
    return lambda r: r.category(agent_role, collapsed) == Category(category_filter).value


def type_conditional(
    records: Sequence[GameRecord], category_filter: CategoryFilter, agent_role: str = "holder", collapsed: bool = False
) -> Dict[float, float]:
    """
    Fraction of games matching a filter for each type of the agent with a given role.

    Args:
        records (Sequence[GameRecord]): Batch records; failed games are skipped.
        category_filter (str | tuple | callable): A category of the selected agent, a (holder, non-holder) pair,
            or a predicate on records.
        agent_role (str): "holder" or "non_holder"; whose type to condition on.
        collapsed (bool): Compare categories without modifiers.

    Returns:
        (Dict[float, float]): gamma -> fraction, ascending in gamma; gammas without any played game are absent.

    Raises:
        (AggregationError): If no record was classified.
    """
    if agent_role not in ROLES:
        raise ValueError(f"agent_role must be one of {ROLES}, got {agent_role!r}")
    played = [r for r in records if r.ok]
    if not played:
        raise AggregationError("cannot condition an empty set of records")
    matches = _matcher(category_filter, agent_role, collapsed)
    frame = pd.DataFrame({"gamma": [r.gamma(agent_role) for r in played], "hit": [bool(matches(r)) for r in played]})
    shares = frame.groupby("gamma", sort=True)["hit"].mean()

    absent = sorted({r.gamma(agent_role) for r in records if not r.ok} - set(shares.index))
    if absent:
        logger.warning(f"no played games at {agent_role} gamma {absent}; fractions reported as absent")
    return {float(g): float(v) for g, v in shares.items()}


def _type_tables(records: Sequence[GameRecord]) -> Dict[str, Dict[str, Dict[float, float]]]:
    """Collapsed-category type-conditional tables for both roles."""
    tables = {}
    for role in ROLES:
        categories = sorted({r.category(role, collapsed=True) for r in records if r.ok})
        tables[role] = {c: type_conditional(records, c, role, collapsed=True) for c in categories}
    return tables


def _distribution_rows(table: DistributionTable) -> List[Dict[str, Any]]:
    """Distribution table as a list of plain mappings."""
    fractions = table.fractions
    return [
        {"holder": h, "non_holder": o, "count": c, "fraction": fractions[(h, o)]} for (h, o), c in table.counts.items()
    ]


def summarize(
    records: Sequence[GameRecord], table: DistributionTable, cfg: Optional[ExperimentConfig] = None
) -> Dict[str, Any]:
    """
    Summary document of a batch: both distribution views, type-conditional tables and the parameter echo.

    Args:
        records (Sequence[GameRecord]): Batch records.
        table (DistributionTable): Distribution to report as the primary view.
        cfg (ExperimentConfig, optional): Experiment whose fully-defaulted document is echoed.

    Returns:
        (Dict[str, Any]): The summary, ready for YAML or JSON serialization.
    """
    full = table if not table.collapsed else aggregate_distribution(records, collapsed=False)
    collapsed = table if table.collapsed else aggregate_distribution(records, collapsed=True)
    fingerprints = sorted({r.param_fingerprint for r in records})
    played = [r for r in records if r.ok]
    summary = {
        "version": __version__,
        "schema": config.RESULTS_SCHEMA_VERSION,
        "param_fingerprint": fingerprints[0] if len(fingerprints) == 1 else fingerprints,
        "games": len(records),
        "failed": len(records) - len(played),
        "fallback_rate": fallback_rate(records),
        "deadlock_rate": sum(r.deadlock for r in played) / len(played),
        "distribution": _distribution_rows(full),
        "distribution_collapsed": _distribution_rows(collapsed),
        "type_conditional": {
            role: {c: {float(g): f for g, f in shares.items()} for c, shares in cats.items()}
            for role, cats in _type_tables(records).items()
        },
    }
    if cfg is not None:
        summary["config"] = cfg.document
    return summary


def _plot_frame(summary: Dict[str, Any]) -> pd.DataFrame:
    """Long-format rows for distribution and type-conditional bar charts."""
    rows = []
    for view in ("distribution", "distribution_collapsed"):
        for item in summary[view]:
            rows.append(
                {
                    "table": view,
                    "role": "",
                    "holder": item["holder"],
                    "non_holder": item["non_holder"],
                    "category": "",
                    "gamma": "",
                    "value": item["fraction"],
                }
            )
    for role, cats in summary["type_conditional"].items():
        for category, shares in cats.items():
            for gamma, share in shares.items():
                rows.append(
                    {
                        "table": "type_conditional",
                        "role": role,
                        "holder": "",
                        "non_holder": "",
                        "category": category,
                        "gamma": gamma,
                        "value": share,
                    }
                )
    return pd.DataFrame(rows, columns=["table", "role", "holder", "non_holder", "category", "gamma", "value"])


def emit_report(
    records: Sequence[GameRecord],
    table: DistributionTable,
    output_dir: Union[str, Path],
    fmt: str = "yaml",
    cfg: Optional[ExperimentConfig] = None,
) -> Dict[str, Path]:
    """
    Write the per-game CSV, the summary document and the plot-ready table.

    Args:
        records (Sequence[GameRecord]): Batch records.
        table (DistributionTable): Distribution from `aggregate_distribution`.
        output_dir (str | Path): Destination directory, created if missing.
        fmt (str): Summary format, "yaml" or "json".
        cfg (ExperimentConfig, optional): Experiment whose document is echoed in the summary.

    Returns:
        (Dict[str, Path]): Paths of the "games", "summary" and "plot" files.

    Raises:
        (ReportIOError): If the destination cannot be written.
    """
    if fmt not in ("yaml", "json"):
        raise ValueError(f"summary format must be 'yaml' or 'json', got {fmt!r}")
    out = Path(output_dir)
    files = {"games": out / "games.csv", "summary": out / f"summary.{fmt}", "plot": out / "plot.csv"}
    summary = summarize(records, table, cfg)
    frame = pd.DataFrame([r.row() for r in records], columns=list(CSV_COLUMNS))

    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(files["games"], "w", newline="") as f:
            f.write(f"# conflict-sim games v{config.RESULTS_SCHEMA_VERSION}: {','.join(CSV_COLUMNS)}\n")
            frame.to_csv(f, index=False, lineterminator="\n")
        with open(files["summary"], "w") as f:
            if fmt == "yaml":
                yaml.safe_dump(summary, f, sort_keys=False, default_flow_style=False)
            else:
                json.dump(summary, f, indent=2, default=str)
                f.write("\n")
        _plot_frame(summary).to_csv(files["plot"], index=False, lineterminator="\n")
    except OSError as e:
        raise ReportIOError(f"cannot write report to {out}: {e}") from e

    logger.info(f"report written to {out}")
    return files


def load_records(path: Union[str, Path]) -> List[GameRecord]:
    """
    Read records back from a per-game CSV written by `emit_report`.

    Args:
        path (str | Path): The CSV file.

    Returns:
        (List[GameRecord]): Records in file order; failure messages are not part of the CSV.

    Raises:
        (ReportIOError): If the file is missing, has another schema version or lacks columns.
    """
    try:
        with open(path) as f:
            header = f.readline()
            frame = pd.read_csv(f, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ReportIOError(f"cannot read records from {path}: {e}") from e

    expected = f"# conflict-sim games v{config.RESULTS_SCHEMA_VERSION}:"
    if not header.startswith(expected):
        raise ReportIOError(f"{path} is not a v{config.RESULTS_SCHEMA_VERSION} games file")
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise ReportIOError(f"{path} lacks column(s) {missing}")

    records = []
    for row in frame.to_dict("records"):
        records.append(
            GameRecord(
                game_id=row["game_id"],
                scenario_id=row["scenario_id"],
                concept=row["concept"],
                v1_init=float(row["v1_init"]),
                v2_init=float(row["v2_init"]),
                gamma1=float(row["gamma1"]),
                gamma2=float(row["gamma2"]),
                row_holder_id=int(row["row_holder_id"]),
                symbols_agent1=row["symbols_agent1"],
                symbols_agent2=row["symbols_agent2"],
                category_agent1=row["category_agent1"],
                category_agent2=row["category_agent2"],
                deadlock=row["deadlock"] == "true",
                fallback_used=row["fallback_used"] == "true",
                param_fingerprint=row["param_fingerprint"],
            )
        )
    return records


# Safety sigmoid midpoints (m) over which missed trend checks are repeated
SIGMOID_MIDPOINTS = (1.0, 2.0, 3.0)
# Accepted frequency of (UA, UA) in the pedestrian-vehicle quantal batch
UA_UA_BAND = (0.15, 0.45)
# Holder types at which responsive adherence in the vehicle-vehicle batch may peak
RA_PEAK_GAMMAS = (-0.5, 0.0)


@dataclass(frozen=True)
class TrendCheck:
    """
    One qualitative property of the built-in batches.

    Attributes:
        name (str): Short identifier, e.g. "ped_qlk_ua_ua_band".
        passed (bool): Whether the batches show the property.
        observed (Dict[str, Any]): The numbers behind the verdict.
        fingerprints (Tuple[str, ...]): Parameter fingerprints of the batches involved.
        sigmoid_midpoint (float, optional): Safety sigmoid midpoint the batches were played with.
    """

    name: str
    passed: bool
    observed: Dict[str, Any]
    fingerprints: Tuple[str, ...]
    sigmoid_midpoint: Optional[float] = None

    def __str__(self) -> str:
        """One-line verdict with the fingerprints of a miss."""
        status = "ok" if self.passed else f"MISSED (fingerprints {', '.join(self.fingerprints)})"
        return f"{self.name} at sigmoid midpoint {self.sigmoid_midpoint}: {status}; {self.observed}"


@dataclass(frozen=True)
class TrendReport:
    """
    Trend checks at the configured sigmoid midpoint and, after a miss, at the other midpoints of the grid.

    Attributes:
        checks (Tuple[TrendCheck, ...]): Checks on the batches as configured.
        reruns (Dict[float, Tuple[TrendCheck, ...]]): Checks per repeated sigmoid midpoint; empty when nothing missed.
    """

    checks: Tuple[TrendCheck, ...]
    reruns: Dict[float, Tuple[TrendCheck, ...]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Whether every check passed at the configured midpoint."""
        return all(c.passed for c in self.checks)

    @property
    def misses(self) -> List[TrendCheck]:
        """Missed checks, configured midpoint first."""
        return [c for group in (self.checks, *self.reruns.values()) for c in group if not c.passed]


def _batch_fingerprints(*batches: Sequence[GameRecord]) -> Tuple[str, ...]:
    """Distinct fingerprints of some batches, in first-seen order."""
    return tuple(dict.fromkeys(r.param_fingerprint for batch in batches for r in batch))


def _inversions(shares: Dict[float, float], rising: bool) -> int:
    """Adjacent steps of a gamma-ordered series that go against the expected direction."""
    values = list(shares.values())
    steps = np.diff(values) if rising else -np.diff(values)
    return int(np.sum(steps < -1e-12))


def trend_checks(
    ped_spene: Sequence[GameRecord],
    ped_qlk: Sequence[GameRecord],
    veh_spene: Sequence[GameRecord],
    veh_qlk: Sequence[GameRecord],
    sigmoid_midpoint: Optional[float] = None,
) -> Tuple[TrendCheck, ...]:
    """
    Qualitative distribution and type-trend checks on the four built-in batches.

    Distribution checks use collapsed categories: (UA, UA) is among the two most frequent pedestrian-vehicle pairs
    under quantal level-k with a frequency inside `UA_UA_BAND` and rarer under the epsilon equilibrium, while
    (RA, UV) is more frequent under the epsilon equilibrium in the vehicle-vehicle batches. Type checks use the
    quantal batches: the holder's UA share rises and its UR share falls with the holder type, each with at most one
    adjacent inversion, and the vehicle-vehicle holder's RA share peaks at a type in `RA_PEAK_GAMMAS`.

    Args:
        ped_spene (Sequence[GameRecord]): Pedestrian-vehicle batch under the epsilon equilibrium.
        ped_qlk (Sequence[GameRecord]): Pedestrian-vehicle batch under quantal level-k.
        veh_spene (Sequence[GameRecord]): Vehicle-vehicle batch under the epsilon equilibrium.
        veh_qlk (Sequence[GameRecord]): Vehicle-vehicle batch under quantal level-k.
        sigmoid_midpoint (float, optional): Midpoint the batches were played with, for the record.

    Returns:
        (Tuple[TrendCheck, ...]): One check per property.

    Raises:
        (AggregationError): If a batch has no classified game.
    """
    ped = {c: aggregate_distribution(b, collapsed=True) for c, b in (("spene", ped_spene), ("qlk", ped_qlk))}
    veh = {c: aggregate_distribution(b, collapsed=True) for c, b in (("spene", veh_spene), ("qlk", veh_qlk))}
    ua_ua = {c: table.fraction("UA", "UA") for c, table in ped.items()}
    ra_uv = {c: table.fraction("RA", "UV") for c, table in veh.items()}
    top_two = [pair for pair, _ in ped["qlk"].most_common(2)]
    lo, hi = UA_UA_BAND

    holder_ua = type_conditional(ped_qlk, "UA", "holder", collapsed=True)
    holder_ur = type_conditional(ped_qlk, "UR", "holder", collapsed=True)
    holder_ra = type_conditional(veh_qlk, "RA", "holder", collapsed=True)
    peak = max(holder_ra, key=holder_ra.get)

    def check(name: str, passed: bool, observed: Dict[str, Any], *batches: Sequence[GameRecord]) -> TrendCheck:
        return TrendCheck(name, bool(passed), observed, _batch_fingerprints(*batches), sigmoid_midpoint)

    return (
        check(
            "ped_qlk_ua_ua_band",
            ("UA", "UA") in top_two and lo <= ua_ua["qlk"] <= hi,
            {"fraction": ua_ua["qlk"], "band": list(UA_UA_BAND), "top_two": top_two},
            ped_qlk,
        ),
        check("ped_ua_ua_qlk_above_spene", ua_ua["spene"] < ua_ua["qlk"], ua_ua, ped_spene, ped_qlk),
        check("veh_ra_uv_spene_above_qlk", ra_uv["spene"] > ra_uv["qlk"], ra_uv, veh_spene, veh_qlk),
        check(
            "ped_holder_ua_rises_with_gamma",
            _inversions(holder_ua, rising=True) <= 1,
            {"shares": holder_ua, "inversions": _inversions(holder_ua, rising=True)},
            ped_qlk,
        ),
        check(
            "ped_holder_ur_falls_with_gamma",
            _inversions(holder_ur, rising=False) <= 1,
            {"shares": holder_ur, "inversions": _inversions(holder_ur, rising=False)},
            ped_qlk,
        ),
        check(
            "veh_holder_ra_peaks_inside",
            peak in RA_PEAK_GAMMAS,
            {"shares": holder_ra, "peak_gamma": peak},
            veh_qlk,
        ),
    )


def reproduce_trends(
    ped_cfg: ExperimentConfig,
    veh_cfg: ExperimentConfig,
    worker_count: Optional[int] = None,
    progress: bool = False,
    midpoints: Sequence[float] = SIGMOID_MIDPOINTS,
) -> TrendReport:
    """
    Play both built-in experiments under both concepts and check the qualitative trends.

    Every miss is logged with the fingerprints of the batches involved. After any miss the whole set of checks is
    repeated once for each other safety sigmoid midpoint in `midpoints`.

    Args:
        ped_cfg (ExperimentConfig): The pedestrian-vehicle experiment.
        veh_cfg (ExperimentConfig): The vehicle-vehicle experiment.
        worker_count (int, optional): Worker processes per batch.
        progress (bool): Show progress bars.
        midpoints (Sequence[float]): Sigmoid midpoint grid (m) for the repeat.

    Returns:
        (TrendReport): Checks as configured and, after a miss, per repeated midpoint.
    """

    def run(overrides: List[str]) -> Tuple[TrendCheck, ...]:
        ped, veh = (apply_overrides(cfg, overrides) for cfg in (ped_cfg, veh_cfg))
        batches = [
            run_batch(cfg, concept=concept, worker_count=worker_count, progress=progress)
            for cfg in (ped, veh)
            for concept in ("spene", "qlk")
        ]
        checks = trend_checks(*batches, sigmoid_midpoint=ped.utility.sigmoid_midpoint)
        for c in checks:
            if not c.passed:
                logger.warning(f"trend check {c}")
        return checks

    base = ped_cfg.utility.sigmoid_midpoint
    checks = run([])
    reruns = {}
    if not all(c.passed for c in checks):
        for midpoint in midpoints:
            if not np.isclose(midpoint, base):
                logger.info(f"repeating trend checks at sigmoid midpoint {midpoint} m")
                reruns[float(midpoint)] = run([f"utility.sigmoid_midpoint={midpoint}"])
    report = TrendReport(checks=checks, reruns=reruns)
    logger.info(f"trend checks: {len(report.misses)} miss(es) over {1 + len(reruns)} sigmoid midpoint(s)")
    return report
