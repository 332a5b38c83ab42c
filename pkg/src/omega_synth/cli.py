#!/usr/bin/env python3
"""
Command-line front end.

    omega-synth synth SPEC [--solver NAME] [--realizability] [--output FILE]
    omega-synth verify --spec FILE --controller FILE [--format ehoa|aag]
    omega-synth solve GAME [--solver NAME]
    omega-synth arena --family random|ladder|clique [--seed N] [--size N] [--max-priority D]
    omega-synth bench run --suite DIR --track safety|parity --mode real|synth ...
    omega-synth bench generate --out DIR [--seed N] [--safety N] [--parity N]
"""

import argparse
import logging
import sys
from pathlib import Path

from .aiger import SafetySpec, parse_aag, print_aag
from .arena import Player, parse_pgsolver, print_pgsolver
from .bench import (
    PROFILES, BenchConfig, emit_report, generate_arena, rank, run_suite, seed_from_environment
)
from .errors import OmegaSynthError
from .pipeline import load_specification, solve_arena, synthesize
from .solver import SOLVERS
from .suite import write_desk_suite
from .verify import verify_controller

logger = logging.getLogger(__name__)

EXIT_REALIZABLE = 10
EXIT_UNREALIZABLE = 20
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _write_or_print(text, output):
    if output:
        Path(output).write_text(text)
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    spec = load_specification(args.spec)
    if args.realizability:
        arena, solution = solve_arena(spec, args.solver)
        realizable = solution.winner(arena.initial) is Player.EVE
        print("REALIZABLE" if realizable else "UNREALIZABLE")
        return EXIT_REALIZABLE if realizable else EXIT_UNREALIZABLE
    result = synthesize(spec, args.solver)
    if not result.realizable:
        print("UNREALIZABLE")
        return EXIT_UNREALIZABLE
    print("REALIZABLE")
    logger.info("Controller: %d AND gates, %d memory states", result.gates, result.memory)
    _write_or_print(print_aag(result.controller), args.output)
    return EXIT_REALIZABLE


def _describe_valuation(valuation, names):
    return " ".join(f"{name}={valuation >> k & 1}" for k, name in enumerate(names)) or "-"


def cmd_verify(args):
    kind = {"ehoa": "parity", "aag": "safety", None: None}[args.format]
    spec = load_specification(args.spec, kind)
    with open(args.controller, "r", encoding="utf-8") as handle:
        controller = parse_aag(handle.read())
    result = verify_controller(spec, controller)
    print(result.verdict)
    if result.passed:
        logger.info("%s", result.message)
        return EXIT_PASS
    print(result.message)
    if isinstance(spec, SafetySpec):
        names = spec.uncontrollable_names
        for step, valuation in enumerate(result.witness):
            print(f"step {step}: {_describe_valuation(valuation, names)}")
    else:
        names = spec.input_names
        prefix, cycle = result.witness
        for valuation in prefix:
            print(f"prefix: {_describe_valuation(valuation, names)}")
        for valuation in cycle:
            print(f"cycle: {_describe_valuation(valuation, names)}")
    return EXIT_FAIL


def cmd_solve(args):
    with open(args.game, "r", encoding="utf-8") as handle:
        arena = parse_pgsolver(handle.read())
    _, solution = solve_arena(arena, args.solver)
    winner = solution.winner(arena.initial)
    print(f"{winner.name} wins the initial vertex")
    print(f"EVE region: {' '.join(str(v) for v in sorted(solution.region(Player.EVE)))}")
    print(f"ADAM region: {' '.join(str(v) for v in sorted(solution.region(Player.ADAM)))}")
    return EXIT_REALIZABLE if winner is Player.EVE else EXIT_UNREALIZABLE


def cmd_arena(args):
    seed = args.seed if args.seed is not None else seed_from_environment()
    arena = generate_arena(args.family, seed, args.size, args.max_priority)
    _write_or_print(print_pgsolver(arena), args.output)
    return EXIT_PASS


def cmd_bench_run(args):
    config = BenchConfig.from_profile(
        args.profile, args.suite,
        track=args.track, mode=args.mode, wall_limit=args.timeout, cpu_limit=args.cpu_limit,
        workers=args.workers, solvers=tuple(s.strip() for s in args.solvers.split(",")),
        out=args.out, seed=args.seed if args.seed is not None else seed_from_environment(),
    )
    for solver in config.solvers:
        if solver not in SOLVERS:
            raise ValueError(f"unknown solver {solver!r}")
    board = run_suite(config)
    emit_report(board, config.out)
    by_solved, by_quality = rank(board)
    for position, name in enumerate(by_solved, 1):
        print(f"{position}. {name}: solved {board.solved_count(name)}, "
              f"quality {board.total_quality(name):.2f}")
    return EXIT_PASS


def cmd_bench_generate(args):
    seed = args.seed if args.seed is not None else seed_from_environment()
    written = write_desk_suite(args.out, seed=seed, safety=args.safety, parity=args.parity)
    print(f"wrote {len(written)} instances to {args.out}")
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(prog="omega-synth",
                                     description="Reactive synthesis for parity and safety specifications")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Decide realizability and synthesize an AIGER controller")
    synth.add_argument("spec", help="Specification (.ehoa/.hoa parity automaton or .aag safety spec)")
    synth.add_argument("--solver", default="zielonka", choices=sorted(SOLVERS))
    synth.add_argument("--realizability", action="store_true",
                       help="Only decide realizability")
    synth.add_argument("--output", "-o", help="Write the controller here instead of stdout")
    synth.set_defaults(func=cmd_synth)

    verify = sub.add_parser("verify", help="Model-check a controller against its specification")
    verify.add_argument("--spec", required=True)
    verify.add_argument("--controller", required=True)
    verify.add_argument("--format", choices=["ehoa", "aag"],
                        help="Specification format (default: by extension)")
    verify.set_defaults(func=cmd_verify)

    game = sub.add_parser("solve", help="Solve a PGSolver game (min-even priorities)")
    game.add_argument("game")
    game.add_argument("--solver", default="zielonka", choices=sorted(SOLVERS))
    game.set_defaults(func=cmd_solve)

    arena = sub.add_parser("arena", help="Generate a seeded game in PGSolver format")
    arena.add_argument("--family", choices=["random", "ladder", "clique"], default="random")
    arena.add_argument("--seed", type=int)
    arena.add_argument("--size", type=int, default=8)
    arena.add_argument("--max-priority", type=int, default=4)
    arena.add_argument("--output", "-o")
    arena.set_defaults(func=cmd_arena)

    bench = sub.add_parser("bench", help="Benchmark runner")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    run = bench_sub.add_parser("run", help="Run a suite and write scoreboard and reports")
    run.add_argument("--suite", required=True)
    run.add_argument("--track", choices=["safety", "parity"], required=True)
    run.add_argument("--mode", choices=["real", "synth"], default="real")
    run.add_argument("--profile", choices=sorted(PROFILES), default="syntcomp")
    run.add_argument("--timeout", type=float, help="Wall-clock limit per instance (seconds)")
    run.add_argument("--cpu-limit", type=float, help="CPU limit per instance (seconds)")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--solvers", default="zielonka",
                     help="Comma-separated solver configurations")
    run.add_argument("--out", default="bench-out")
    run.add_argument("--seed", type=int)
    run.set_defaults(func=cmd_bench_run)

    generate = bench_sub.add_parser("generate", help="Write a seeded desk suite")
    generate.add_argument("--out", required=True)
    generate.add_argument("--seed", type=int)
    generate.add_argument("--safety", type=int, default=50)
    generate.add_argument("--parity", type=int, default=50)
    generate.set_defaults(func=cmd_bench_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        return args.func(args)
    except (OmegaSynthError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        logger.debug("Command failed", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
