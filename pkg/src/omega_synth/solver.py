#!/usr/bin/env python3
"""
Game solvers.

Zielonka's recursive algorithm, distraction fixpoint iteration (DFI), the
attractor-based safety fixpoint and a brute-force oracle over positional
strategy pairs. All solvers use min-even priorities and return positional
strategies for both winning regions.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Optional, Tuple

from .arena import GameArena, Player, unsafe_vertices
from .errors import CapacityError, SolverError, SpecificationError, StrategyError

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_VERTICES = 12
MAX_BRUTE_FORCE_DEGREE = 4


@dataclass(frozen=True)
class Solution:
    """Winner of every vertex plus positional strategies on the winning regions."""

    winners: Tuple[Player, ...]
    eve_strategy: Dict[int, int] = field(default_factory=dict)
    adam_strategy: Dict[int, int] = field(default_factory=dict)

    def winner(self, vertex: int) -> Player:
        return self.winners[vertex]

    def region(self, player: Player) -> FrozenSet[int]:
        return frozenset(v for v, w in enumerate(self.winners) if w is player)

    def strategy(self, player: Player) -> Dict[int, int]:
        return self.eve_strategy if player is Player.EVE else self.adam_strategy

    def check(self, arena: GameArena):
        """
        Self-check determinacy and region closure.

        Raises:
            SolverError: if a winning region is not closed under the
                winner's strategy and the loser's moves
        """
        if len(self.winners) != arena.num_vertices:
            raise SolverError(f"winner map covers {len(self.winners)} of "
                              f"{arena.num_vertices} vertices")
        for v in arena.vertices:
            winner = self.winners[v]
            succ = arena.successors[v]
            if arena.owners[v] is winner:
                choice = self.strategy(winner).get(v)
                if choice is None:
                    raise SolverError(f"{winner.name} wins vertex {v} without a strategy entry")
                if choice not in succ:
                    raise SolverError(f"strategy moves {v} -> {choice}, which is not an edge")
                if self.winners[choice] is not winner:
                    raise SolverError(f"strategy of {winner.name} leaves its region at {v}")
            elif any(self.winners[w] is not winner for w in succ):
                raise SolverError(f"{winner.name} region "
                                  f"is not closed at vertex {v}")


def _attract(arena: GameArena, player: Player, target: Iterable[int],
             region: Optional[set] = None):
    """Attractor with the strategy that moves each attracted vertex closer to ``target``."""
    if region is None:
        region = set(arena.vertices)
    attr = set(v for v in target if v in region)
    strategy = {}
    pending = {}
    queue = deque(sorted(attr))
    while queue:
        w = queue.popleft()
        for v in arena.predecessors[w]:
            if v not in region or v in attr:
                continue
            if arena.owners[v] is player:
                attr.add(v)
                strategy[v] = w
                queue.append(v)
            else:
                if v not in pending:
                    pending[v] = sum(1 for u in arena.successors[v] if u in region)
                pending[v] -= 1
                if pending[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def attractor(arena: GameArena, player: Player, target: Iterable[int]) -> FrozenSet[int]:
    """
    The set of vertices from which ``player`` can force a visit to ``target``.

    Args:
        arena (GameArena): the arena
        player (Player): the attracting player
        target: vertex ids

    Returns:
        frozenset: least superset of ``target`` closed under attraction
    """
    attr, _ = _attract(arena, player, target)
    return frozenset(attr)


def _lowest_in(arena, vertex, region):
    for w in arena.successors[vertex]:
        if w in region:
            return w
    raise SolverError(f"vertex {vertex} has no successor inside its region")


def _split_strategy(arena, strategy):
    eve = {v: w for v, w in strategy.items() if arena.owners[v] is Player.EVE}
    adam = {v: w for v, w in strategy.items() if arena.owners[v] is Player.ADAM}
    return eve, adam


def _solution(arena, winners, strategy):
    eve, adam = _split_strategy(arena, strategy)
    solution = Solution(tuple(winners[v] for v in arena.vertices), eve, adam)
    solution.check(arena)
    return solution


def solve_safety(arena: GameArena, unsafe: Iterable[int]) -> Solution:
    """
    Solve a safety game: Adam wins exactly his attractor to ``unsafe``.

    Eve moves to the lowest successor outside Adam's region; Adam follows
    the attractor towards ``unsafe``.
    """
    unsafe = set(unsafe)
    losing, attract_strategy = _attract(arena, Player.ADAM, unsafe)
    winners = {}
    eve, adam = {}, {}
    for v in arena.vertices:
        if v in losing:
            winners[v] = Player.ADAM
            if arena.owners[v] is Player.ADAM:
                adam[v] = attract_strategy.get(v, next(
                    (w for w in arena.successors[v] if w in losing), arena.successors[v][0]))
        else:
            winners[v] = Player.EVE
            if arena.owners[v] is Player.EVE:
                eve[v] = next(w for w in arena.successors[v] if w not in losing)
    logger.debug("Safety fixpoint: Adam attracts %d of %d vertices", len(losing), arena.num_vertices)
    return Solution(tuple(winners[v] for v in arena.vertices), eve, adam)


def _zielonka(arena, region):
    won = {Player.EVE: set(), Player.ADAM: set()}
    strategy = {}
    region = set(region)
    while region:
        low = min(arena.priorities[v] for v in region)
        player = Player.of_priority(low)
        opponent = player.opponent
        targets = {v for v in region if arena.priorities[v] == low}
        attracted, attract_strategy = _attract(arena, player, targets, region)
        sub_won, sub_strategy = _zielonka(arena, region - attracted)
        if not sub_won[opponent]:
            won[player] |= region
            strategy.update(sub_strategy)
            strategy.update(attract_strategy)
            for v in targets:
                if arena.owners[v] is player:
                    strategy[v] = _lowest_in(arena, v, region)
            break
        escaped, escape_strategy = _attract(arena, opponent, sub_won[opponent], region)
        won[opponent] |= escaped
        strategy.update({v: w for v, w in sub_strategy.items() if v in sub_won[opponent]})
        strategy.update(escape_strategy)
        region -= escaped
    return won, strategy


def solve_parity_zielonka(arena: GameArena) -> Solution:
    """
    Solve a min-even parity game with Zielonka's recursive algorithm.

    Returns:
        Solution: winners and positional strategies, self-checked
    """
    won, strategy = _zielonka(arena, arena.vertices)
    winners = {v: Player.EVE for v in won[Player.EVE]}
    winners.update({v: Player.ADAM for v in won[Player.ADAM]})
    logger.debug("Zielonka: Eve wins %d of %d vertices", len(won[Player.EVE]), arena.num_vertices)
    return _solution(arena, winners, strategy)


def _dfi_winners(arena, region):
    """
    Distraction fixpoint iteration restricted to ``region``.

    A vertex is distracted when the one-step winner disagrees with the
    player its own priority favours; levels are visited from the least
    significant (highest) priority upwards and every new distraction resets
    the less significant levels.
    """
    levels = {}
    for v in sorted(region):
        levels.setdefault(arena.priorities[v], []).append(v)
    order = sorted(levels, reverse=True)
    distracted = set()

    def winner(v):
        liked = Player.of_priority(arena.priorities[v])
        return liked.opponent if v in distracted else liked

    def onestep(v):
        owner = arena.owners[v]
        for w in arena.successors[v]:
            if w in region and winner(w) is owner:
                return owner
        return owner.opponent

    k = 0
    sweeps = 0
    while k < len(order):
        level = order[k]
        liked = Player.of_priority(level)
        fresh = [v for v in levels[level] if v not in distracted and onestep(v) is not liked]
        sweeps += 1
        if fresh:
            distracted.update(fresh)
            for lower in order[:k]:
                distracted.difference_update(levels[lower])
            k = 0
        else:
            k += 1
    logger.debug("DFI: %d level sweeps over %d vertices", sweeps, len(region))
    return {v: winner(v) for v in region}


def _dominion_strategy(arena, dominion, player):
    """Positional strategy for ``player`` on a set it wins from everywhere."""
    strategy = {}
    remaining = set(dominion)
    while remaining:
        low = min(arena.priorities[v] for v in remaining)
        targets = {v for v in remaining if arena.priorities[v] == low}
        if Player.of_priority(low) is player:
            attracted, attract_strategy = _attract(arena, player, targets, remaining)
            strategy.update(attract_strategy)
            for v in targets:
                if arena.owners[v] is player:
                    strategy[v] = _lowest_in(arena, v, remaining)
            remaining -= attracted
            continue
        blocked, _ = _attract(arena, player.opponent, targets, remaining)
        rest = remaining - blocked
        winners = _dfi_winners(arena, rest) if rest else {}
        core = {v for v, w in winners.items() if w is player}
        if not core:
            raise SolverError(f"{player.name} region of {len(remaining)} vertices has no "
                              f"sub-dominion avoiding priority {low}")
        strategy.update(_dominion_strategy(arena, core, player))
        attracted, attract_strategy = _attract(arena, player, core, remaining)
        strategy.update(attract_strategy)
        remaining -= attracted
    return strategy


def solve_parity_dfi(arena: GameArena) -> Solution:
    """
    Solve a min-even parity game by distraction fixpoint iteration.

    Winning regions come from the fixpoint; strategies are then extracted
    region by region, with sub-games solved by the same iteration.
    """
    winners = _dfi_winners(arena, set(arena.vertices))
    strategy = {}
    for player in Player:
        region = {v for v, w in winners.items() if w is player}
        strategy.update(_dominion_strategy(arena, region, player))
    return _solution(arena, winners, strategy)


def _cycle_outcomes(arena, move):
    """Eve wins vertex v under the functional graph ``move`` iff the reached cycle is even-min."""
    n = arena.num_vertices
    outcome = [None] * n
    for start in range(n):
        if outcome[start] is not None:
            continue
        path = []
        position = {}
        v = start
        while outcome[v] is None and v not in position:
            position[v] = len(path)
            path.append(v)
            v = move[v]
        if outcome[v] is None:
            low = min(arena.priorities[u] for u in path[position[v]:])
            result = low % 2 == 0
        else:
            result = outcome[v]
        for u in path:
            outcome[u] = result
    return outcome


def brute_force_solve(arena: GameArena) -> Tuple[Player, ...]:
    """
    Winner map by enumerating all pairs of positional strategies.

    Eve wins ``v`` iff some Eve strategy wins ``v`` against every Adam
    strategy. Intended as a test oracle.

    Raises:
        CapacityError: beyond 12 vertices or out-degree 4
    """
    if arena.num_vertices > MAX_BRUTE_FORCE_VERTICES:
        raise CapacityError(f"brute force is capped at {MAX_BRUTE_FORCE_VERTICES} vertices, "
                            f"arena has {arena.num_vertices}")
    if any(len(s) > MAX_BRUTE_FORCE_DEGREE for s in arena.successors):
        raise CapacityError(f"brute force is capped at out-degree {MAX_BRUTE_FORCE_DEGREE}")

    eve_vertices = [v for v in arena.vertices if arena.owners[v] is Player.EVE]
    adam_vertices = [v for v in arena.vertices if arena.owners[v] is Player.ADAM]
    won = [False] * arena.num_vertices
    for eve_choice in itertools.product(*(arena.successors[v] for v in eve_vertices)):
        alive = [not w for w in won]
        if not any(alive):
            break
        move = [0] * arena.num_vertices
        for v, w in zip(eve_vertices, eve_choice):
            move[v] = w
        for adam_choice in itertools.product(*(arena.successors[v] for v in adam_vertices)):
            for v, w in zip(adam_vertices, adam_choice):
                move[v] = w
            outcome = _cycle_outcomes(arena, move)
            alive = [a and o for a, o in zip(alive, outcome)]
            if not any(alive):
                break
        won = [w or a for w, a in zip(won, alive)]
    return tuple(Player.EVE if w else Player.ADAM for w in won)


def default_strategy(arena: GameArena, player: Player) -> Dict[int, int]:
    """Lowest successor for every vertex ``player`` owns."""
    return {v: arena.successors[v][0] for v in arena.vertices if arena.owners[v] is player}


def play(arena: GameArena, eve_strategy: Dict[int, int], adam_strategy: Dict[int, int],
         start: int):
    """
    The lasso induced by two positional strategies.

    Returns:
        tuple: ``(prefix, cycle)`` vertex lists; the play is
            ``prefix + cycle + cycle + ...``

    Raises:
        StrategyError: if a visited vertex has no strategy entry or the entry
            is not an edge
    """
    position = {}
    path = []
    v = start
    while v not in position:
        position[v] = len(path)
        path.append(v)
        strategy = eve_strategy if arena.owners[v] is Player.EVE else adam_strategy
        if v not in strategy:
            raise StrategyError(f"no {arena.owners[v].name} strategy entry for vertex {v}")
        w = strategy[v]
        if w not in arena.successors[v]:
            raise StrategyError(f"strategy moves {v} -> {w}, which is not an edge")
        v = w
    return path[:position[v]], path[position[v]:]


def _solve_fixpoint(arena: GameArena) -> Solution:
    unsafe = unsafe_vertices(arena)
    if any(arena.priorities[v] != 0 for v in arena.vertices if v not in unsafe):
        raise SpecificationError("the fixpoint solver only applies to safety arenas")
    return solve_safety(arena, unsafe)


SOLVERS: Dict[str, Callable[[GameArena], Solution]] = {
    "zielonka": solve_parity_zielonka,
    "dfi": solve_parity_dfi,
    "fixpoint": _solve_fixpoint,
}


def get_solver(name: str) -> Callable[[GameArena], Solution]:
    """Look up a solver configuration by name."""
    try:
        return SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(sorted(SOLVERS))}")
