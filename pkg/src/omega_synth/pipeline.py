#!/usr/bin/env python3
"""
Specification loading and the solve/synthesize facade.

Shared by the command line and the benchmark workers: a specification is
read by file extension, turned into an arena, solved with a named solver
and, on request, turned into an AIGER controller.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Optional, Union

from .aiger import AigCircuit, SafetySpec, classify_safety_spec, parse_aag
from .arena import (
    GameArena, Player, arena_from_parity_automaton, arena_from_safety_spec, parse_pgsolver
)
from .errors import SpecificationError
from .hoa import ParityAutomaton, normalize_acceptance, parse_ehoa
from .solver import Solution, get_solver
from .synthesis import mealy_to_aiger, strategy_to_mealy

logger = logging.getLogger(__name__)

Specification = Union[SafetySpec, ParityAutomaton, GameArena]

PARITY_SUFFIXES = (".ehoa", ".hoa")
SAFETY_SUFFIXES = (".aag",)
GAME_SUFFIXES = (".pg", ".gm")


@dataclass(frozen=True)
class SynthesisResult:
    """Answer of one synthesis run; ``controller`` is None when unrealizable."""

    realizable: bool
    controller: Optional[AigCircuit] = None
    gates: Optional[int] = None
    memory: Optional[int] = None


def parse_specification(text: str, kind: str) -> Specification:
    """
    Parse specification text of the given kind.

    Args:
        text (str): file contents
        kind (str): ``"parity"``, ``"safety"`` or ``"game"``
    """
    if kind == "parity":
        return parse_ehoa(text)
    if kind == "safety":
        return classify_safety_spec(parse_aag(text))
    if kind == "game":
        return parse_pgsolver(text)
    raise ValueError(f"unknown specification kind {kind!r}")


def specification_kind(path: str) -> str:
    """Pick the specification kind from a file extension."""
    suffix = os.path.splitext(path)[1].lower()
    if suffix in PARITY_SUFFIXES:
        return "parity"
    if suffix in SAFETY_SUFFIXES:
        return "safety"
    if suffix in GAME_SUFFIXES:
        return "game"
    raise SpecificationError(f"cannot tell the format of {path!r} from its extension "
                             f"(expected .ehoa, .hoa, .aag, .pg or .gm)")


def load_specification(path: str, kind: Optional[str] = None) -> Specification:
    """
    Read a specification file.

    Args:
        path (str): file path
        kind (str, optional): force a kind instead of using the extension
    """
    kind = kind or specification_kind(path)
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    spec = parse_specification(text, kind)
    logger.info("Loaded %s specification %s", kind, os.path.basename(path))
    return spec


def build_arena(spec: Specification) -> GameArena:
    if isinstance(spec, GameArena):
        return spec
    if isinstance(spec, SafetySpec):
        return arena_from_safety_spec(spec)
    return arena_from_parity_automaton(normalize_acceptance(spec))


def solve_arena(spec: Specification, solver: str = "zielonka"):
    """Build and solve the arena of a specification; returns ``(arena, solution)``."""
    arena = build_arena(spec)
    solution: Solution = get_solver(solver)(arena)
    realizable = solution.winner(arena.initial) is Player.EVE
    logger.info("Solver %s: %s (%d vertices, Eve wins %d)", solver,
                "REALIZABLE" if realizable else "UNREALIZABLE",
                arena.num_vertices, len(solution.region(Player.EVE)))
    return arena, solution


def solve(spec: Specification, solver: str = "zielonka") -> bool:
    """Decide realizability: True if Eve wins the initial vertex."""
    arena, solution = solve_arena(spec, solver)
    return solution.winner(arena.initial) is Player.EVE


def synthesize(spec: Specification, solver: str = "zielonka") -> SynthesisResult:
    """
    Decide realizability and build a controller when one exists.

    Raises:
        SpecificationError: for explicit games, which have no signals to
            synthesize a circuit over
    """
    if isinstance(spec, GameArena):
        raise SpecificationError("explicit games can be solved but not synthesized")
    arena, solution = solve_arena(spec, solver)
    if solution.winner(arena.initial) is Player.ADAM:
        return SynthesisResult(False)
    machine = strategy_to_mealy(arena, solution)
    controller = mealy_to_aiger(machine)
    return SynthesisResult(True, controller, controller.gate_count, machine.num_states)
