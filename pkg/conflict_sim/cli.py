# conflict-sim - traffic-conflict game simulation toolkit

import argparse
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import pandas as pd

from conflict_sim import __version__, config
from conflict_sim.base.errors import ConfigError, ConflictSimError, ReportIOError, VerificationError
from conflict_sim.base.params import CONCEPTS
from conflict_sim.helpers.error_handler import EXIT_OK, EXIT_USAGE, ErrorHandler
from conflict_sim.helpers.logger import logger
from conflict_sim.modules.game import GameTree, StrategyProfile
from conflict_sim.modules.harness import aggregate_distribution, emit_report, load_records, run_batch, solve_game
from conflict_sim.modules.scenario import ExperimentConfig, apply_overrides, expand_sweep, read_config
from conflict_sim.modules.solvers import verify_epsilon_equilibrium
from conflict_sim.modules.taxonomy import RowStatus, classify_strategy, parse_tokens

# Test hook: replaces the solved profile before `verify` checks it
PROFILE_HOOK: Optional[Callable[[StrategyProfile, GameTree], StrategyProfile]] = None


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    """Load the --config document and apply --concept, --seed and --set overrides."""
    overrides = list(args.set or [])
    if getattr(args, "concept", None):
        overrides.append(f"solver.concept={args.concept}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"sweep.seed={args.seed}")
    return apply_overrides(read_config(args.config), overrides)


def cmd_run(args: argparse.Namespace) -> int:
    """Play a batch, aggregate it and write the report."""
    cfg = _experiment(args)
    default = Path(config.CONFLICT_SIM_OUTPUT) / f"{cfg.scenario.scenario_id}-{cfg.solver.concept}"
    output = Path(args.output or default)
    records = run_batch(cfg, worker_count=args.workers, progress=not args.quiet)
    files = emit_report(records, aggregate_distribution(records), output, fmt=args.format, cfg=cfg)
    missing = [str(p) for p in files.values() if not p.is_file()]
    if missing:
        raise ReportIOError(f"report files missing after write: {missing}")
    print(f"{config.PREFIX} {len(records)} games written to {output}")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    """Label symbol sequences read from a CSV and print the labels as CSV."""
    try:
        frame = pd.read_csv(args.input, header=None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame()
    except pd.errors.ParserError as e:
        # raised for a row wider than the first one; the message names the line
        raise ConfigError(f"malformed input {args.input}: {e}") from e
    except OSError as e:
        raise ReportIOError(f"cannot read {args.input}: {e}") from e

    rows = []
    for n, row in enumerate(frame.fillna("").itertuples(index=False), start=1):
        fields = [str(v).strip() for v in row]
        while len(fields) > 4 and not fields[-1]:
            fields.pop()
        if n == 1 and fields and fields[0] == "game_id":
            continue
        if len(fields) > 5:
            raise ConfigError(f"row {n}: expected at most 5 fields, got {len(fields)}")
        game_id, agent_id, status, tokens, alternate = (fields + [""] * 5)[:5]
        if not (game_id and agent_id and status and tokens):
            raise ConfigError(f"row {n}: expected game_id, agent_id, row_status, symbols[, alternate_path]")
        try:
            row_status = RowStatus(status)
            sequence = parse_tokens(tokens)
        except ValueError as e:
            raise ConfigError(f"row {n}: {e}") from e
        if alternate.lower() not in ("", "true", "false"):
            raise ConfigError(f"row {n}: alternate_path must be true or false, got {alternate!r}")
        label = classify_strategy(sequence, row_status, alternate_path=alternate.lower() == "true")
        rows.append((game_id, agent_id, label.category.value))

    out = pd.DataFrame(rows, columns=["game_id", "agent_id", "category"])
    out.to_csv(sys.stdout, index=False, lineterminator="\n")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Solve one game of the sweep and check the equilibrium in every subgame."""
    cfg = _experiment(args)
    if cfg.solver.concept != "spene":
        raise ConfigError(f"verify needs solver.concept=spene, got {cfg.solver.concept}")
    setups = expand_sweep(cfg.scenario, cfg.sweep)
    if not 0 <= args.game_index < len(setups):
        raise ConfigError(f"game index {args.game_index} outside [0, {len(setups) - 1}]")

    result, played, _, tree = solve_game(setups[args.game_index], cfg)
    if PROFILE_HOOK is not None:
        played = PROFILE_HOOK(played, tree)
    report = verify_epsilon_equilibrium(tree, played, cfg.game.epsilon)
    print(f"{config.PREFIX} {setups[args.game_index].game_id}: {report}")
    if result.fallback_used:
        print(f"{config.PREFIX} no pure epsilon-equilibrium at {len(result.fallback_nodes)} node(s)")
    if not report.ok:
        raise VerificationError(str(report))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Re-aggregate a per-game CSV and write the summary and plot tables."""
    records = load_records(args.input)
    cfg = _experiment(args) if args.config else None
    output = Path(args.output or Path(args.input).parent)
    emit_report(records, aggregate_distribution(records), output, fmt=args.format, cfg=cfg)
    print(f"{config.PREFIX} report for {len(records)} games written to {output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Command-line parser with the run, classify, verify and report subcommands."""
    parser = argparse.ArgumentParser(prog="conflict-sim", description="Two-agent traffic-conflict game simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--config", required=required, help="experiment YAML file or built-in name (ped_veh, veh_veh)")
        p.add_argument("--concept", choices=CONCEPTS, help="solution concept, overrides solver.concept")
        p.add_argument("--seed", type=int, help="master seed, overrides sweep.seed")
        p.add_argument(
            "--set", action="append", metavar="KEY=VALUE", help="dotted-path override, e.g. game.epsilon=0.2"
        )

    run = sub.add_parser("run", help="play a batch and write the report")
    experiment_flags(run)
    run.add_argument("--output", help="output directory")
    run.add_argument("--workers", type=int, help="worker processes (default CONFLICT_SIM_WORKERS)")
    run.add_argument("--format", choices=("yaml", "json"), default="yaml", help="summary format")
    run.add_argument("--quiet", action="store_true", help="hide the progress bar")
    run.set_defaults(func=cmd_run)

    classify = sub.add_parser("classify", help="label symbol sequences from a CSV")
    classify.add_argument("input", help="CSV of game_id, agent_id, row_status, symbols[, alternate_path]")
    classify.set_defaults(func=cmd_classify)

    verify = sub.add_parser("verify", help="check the equilibrium of one solved game")
    experiment_flags(verify)
    verify.add_argument("--game-index", type=int, default=0, help="position of the game in the sweep")
    verify.set_defaults(func=cmd_verify)

    report = sub.add_parser("report", help="re-aggregate a per-game CSV")
    report.add_argument("input", help="games.csv from a previous run")
    experiment_flags(report, required=False)
    report.add_argument("--output", help="output directory (default: next to the input)")
    report.add_argument("--format", choices=("yaml", "json"), default="yaml", help="summary format")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv (Sequence[str], optional): Arguments without the program name; sys.argv when omitted.

    Returns:
        (int): 0 on success, 1 on a failed verification, 2 on invalid input, 3 on I/O failure.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        return args.func(args)
    except ConflictSimError as e:
        logger.error(f"{config.PREFIX} {ErrorHandler(e.exit_code, e.message).handle()}")
        return e.exit_code


def _entry(argv: Optional[List[str]] = None) -> None:
    """Console-script entry point."""
    sys.exit(main(argv))


if __name__ == "__main__":
    _entry()
