#!/usr/bin/env python3
"""
Benchmark runner.

Runs every instance of a suite under every solver configuration in its own
worker process with wall-clock and CPU limits, verifies synthesized
controllers, and produces the scoreboard, the solved-count and quality
rankings and cactus-plot series.
"""

from __future__ import annotations

import csv
import logging
import math
import multiprocessing
import os
import random
import resource
import signal
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, auto
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from PIL import Image, ImageDraw

from .aiger import parse_aag, print_aag
from .arena import GameArena, Player
from .errors import OmegaSynthError
from .pipeline import (
    PARITY_SUFFIXES, SAFETY_SUFFIXES, load_specification, solve, synthesize
)
from .synthesis import quality_score
from .verify import verify_controller

logger = logging.getLogger(__name__)

PROFILES = {
    "syntcomp": (3600.0, 3600.0),
    "2022": (10000.0, 40000.0),
}
POLL_INTERVAL = 0.05
REFERENCE_FILE = "reference_sizes.csv"


class Verdict(Enum):
    """Outcome of one run."""
    REALIZABLE = "REALIZABLE"
    UNREALIZABLE = "UNREALIZABLE"
    TIMEOUT = "TIMEOUT"
    ERROR = "ERROR"


class Verified(Enum):
    """Model-checking result of a synthesized controller (N/A when none was produced)."""
    PASS = "PASS"
    FAIL = "FAIL"
    N_A = "N/A"


class JobState(Enum):
    """Lifecycle of one worker process."""
    PENDING = auto()
    RUNNING = auto()
    FINISHED = auto()
    TIMED_OUT = auto()
    CRASHED = auto()


@dataclass(frozen=True)
class RunRecord:
    """One (instance, solver configuration) result as it appears in the scoreboard."""

    instance: str
    configuration: str
    track: str
    mode: str
    verdict: Verdict
    wall: float
    cpu: float
    gate_count: Optional[int] = None
    verified: Verified = Verified.N_A
    quality: Optional[float] = None

    @property
    def solved(self) -> bool:
        if self.verdict not in (Verdict.REALIZABLE, Verdict.UNREALIZABLE):
            return False
        return self.mode == "real" or self.verified is Verified.PASS


@dataclass
class Scoreboard:
    """All run records of a benchmark run, aggregated per configuration."""

    records: List[RunRecord] = field(default_factory=list)
    seed: Optional[int] = None

    def configurations(self) -> List[str]:
        seen = []
        for record in self.records:
            if record.configuration not in seen:
                seen.append(record.configuration)
        return seen

    def records_for(self, configuration: str) -> List[RunRecord]:
        return [r for r in self.records if r.configuration == configuration]

    def solved_count(self, configuration: str) -> int:
        return sum(1 for r in self.records_for(configuration) if r.solved)

    def total_quality(self, configuration: str) -> float:
        return sum(r.quality for r in self.records_for(configuration)
                   if r.solved and r.quality is not None)

    def total_wall(self, configuration: str) -> float:
        return sum(r.wall for r in self.records_for(configuration))


@dataclass
class BenchConfig:
    """
    Settings of one benchmark run.

    ``solvers`` lists the solver configurations to compare; limits default to
    the ``syntcomp`` profile.
    """

    suite: Path
    track: str = "parity"
    mode: str = "real"
    wall_limit: float = PROFILES["syntcomp"][0]
    cpu_limit: float = PROFILES["syntcomp"][1]
    workers: int = 1
    solvers: Tuple[str, ...] = ("zielonka",)
    out: Optional[Path] = None
    seed: Optional[int] = None

    def __post_init__(self):
        self.suite = Path(self.suite)
        if self.out is not None:
            self.out = Path(self.out)
        if self.track not in ("safety", "parity"):
            raise ValueError(f"unknown track {self.track!r}")
        if self.mode not in ("real", "synth"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.wall_limit <= 0 or self.cpu_limit <= 0:
            raise ValueError("time limits must be positive")
        if self.workers < 1:
            raise ValueError("at least one worker is needed")

    @classmethod
    def from_profile(cls, profile: str, suite, **overrides) -> "BenchConfig":
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
        wall, cpu = PROFILES[profile]
        settings = {"wall_limit": wall, "cpu_limit": cpu}
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(suite=suite, **settings)


def suite_instances(config: BenchConfig) -> List[Path]:
    """Instance files of the configured track, sorted by name."""
    if not config.suite.is_dir():
        raise OmegaSynthError(f"cannot read suite directory {config.suite}")
    suffixes = SAFETY_SUFFIXES if config.track == "safety" else PARITY_SUFFIXES
    return sorted(p for p in config.suite.iterdir() if p.suffix.lower() in suffixes)


def load_reference_sizes(suite: Path) -> Dict[str, int]:
    """Read ``instance,ref_gates`` rows; instances are identified by file stem."""
    path = Path(suite) / REFERENCE_FILE
    if not path.exists():
        return {}
    sizes = {}
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            try:
                sizes[row["instance"]] = int(row["ref_gates"])
            except (KeyError, TypeError, ValueError):
                logger.warning("Skipping malformed reference row %s", row)
    return sizes


def pipeline_runner(path: str, mode: str, solver: str):
    """Default worker body: returns ``(realizable, controller aag text or None)``."""
    spec = load_specification(path)
    if mode == "real":
        return solve(spec, solver), None
    result = synthesize(spec, solver)
    return result.realizable, print_aag(result.controller) if result.realizable else None


def _worker(runner, path, mode, solver, cpu_limit, conn):
    started = time.monotonic()
    seconds = max(1, math.ceil(cpu_limit))
    try:
        resource.setrlimit(resource.RLIMIT_CPU, (seconds, seconds + 1))
    except (ValueError, OSError):
        pass
    try:
        realizable, aag = runner(path, mode, solver)
        usage = resource.getrusage(resource.RUSAGE_SELF)
        conn.send(("ok", realizable, aag, usage.ru_utime, time.monotonic() - started))
    except Exception as e:
        usage = resource.getrusage(resource.RUSAGE_SELF)
        conn.send(("error", f"{type(e).__name__}: {e}", None, usage.ru_utime,
                   time.monotonic() - started))
    finally:
        conn.close()


@dataclass
class _Job:
    instance: Path
    configuration: str
    state: JobState = JobState.PENDING
    process: Optional[multiprocessing.Process] = None
    conn: Optional[object] = None
    started: float = 0.0
    message: Optional[tuple] = None

    def transition(self, state: JobState):
        logger.debug("Job %s/%s: %s -> %s", self.configuration, self.instance.name,
                     self.state.name, state.name)
        self.state = state


def _finish(config, job, wall, references, verify_spec):
    """Turn a finished job into a RunRecord, verifying controllers in synthesis mode."""
    track, mode = config.track, config.mode
    instance = job.instance.stem
    base = dict(instance=instance, configuration=job.configuration, track=track, mode=mode)

    if job.state is JobState.TIMED_OUT:
        # killed by RLIMIT_CPU below the wall limit, otherwise terminated at the wall limit
        cpu = config.cpu_limit if wall < config.wall_limit else wall
        return RunRecord(verdict=Verdict.TIMEOUT, wall=wall, cpu=cpu, **base)
    if job.state is JobState.CRASHED or job.message is None:
        return RunRecord(verdict=Verdict.ERROR, wall=wall, cpu=wall, **base)

    # the worker's own clock; the parent may have seen the result late
    status, realizable, aag, cpu, wall = job.message
    if status == "error":
        logger.warning("Instance %s failed under %s: %s", instance, job.configuration, realizable)
        return RunRecord(verdict=Verdict.ERROR, wall=wall, cpu=cpu, **base)
    if wall >= config.wall_limit or cpu >= config.cpu_limit:
        return RunRecord(verdict=Verdict.TIMEOUT, wall=wall, cpu=cpu, **base)
    verdict = Verdict.REALIZABLE if realizable else Verdict.UNREALIZABLE
    if mode == "real" or not realizable:
        return RunRecord(verdict=verdict, wall=wall, cpu=cpu, **base)

    try:
        controller = parse_aag(aag)
        result = verify_controller(verify_spec(job.instance), controller)
        verified = Verified.PASS if result.passed else Verified.FAIL
        if not result.passed:
            logger.warning("Controller for %s under %s FAILED verification: %s",
                           instance, job.configuration, result.message)
    except Exception as e:
        logger.warning("Could not verify controller for %s: %s", instance, e)
        return RunRecord(verdict=verdict, wall=wall, cpu=cpu, verified=Verified.FAIL, **base)

    gates = controller.gate_count
    if config.out is not None:
        folder = config.out / "controllers" / job.configuration
        folder.mkdir(parents=True, exist_ok=True)
        (folder / f"{instance}.aag").write_text(aag)
    quality = None
    if verified is Verified.PASS:
        quality = quality_score(gates, references.get(instance, gates))
    return RunRecord(verdict=verdict, wall=wall, cpu=cpu, gate_count=gates,
                     verified=verified, quality=quality, **base)


def run_suite(config: BenchConfig, runner: Optional[Callable] = None,
              verify_spec: Optional[Callable] = None) -> Scoreboard:
    """
    Run a suite under every configured solver.

    Each (instance, solver) pair runs in a separate forked process limited by
    ``RLIMIT_CPU`` and terminated once the wall limit passes; at most
    ``workers`` processes run at a time. Wall time is measured inside the
    worker. Synthesized controllers are verified in the parent once every
    job has been collected, so verification never delays the watchdog.

    Args:
        config (BenchConfig): run settings
        runner (callable, optional): worker body ``(path, mode, solver) ->
            (realizable, aag text)``; defaults to the synthesis pipeline
        verify_spec (callable, optional): maps an instance path to the
            specification used for verification; defaults to loading the file

    Returns:
        Scoreboard: one record per (instance, solver) pair

    Raises:
        OmegaSynthError: if the suite directory cannot be read
    """
    runner = runner or pipeline_runner
    verify_spec = verify_spec or (lambda path: load_specification(str(path)))
    instances = suite_instances(config)
    references = load_reference_sizes(config.suite)
    context = multiprocessing.get_context("fork")
    pending = deque(_Job(path, solver) for solver in config.solvers for path in instances)
    running: List[_Job] = []
    collected: List[Tuple[_Job, float]] = []
    board = Scoreboard(seed=config.seed)
    logger.info("Running %d instances x %d configurations (%s, %s), wall %.0fs, cpu %.0fs",
                len(instances), len(config.solvers), config.track, config.mode,
                config.wall_limit, config.cpu_limit)

    while pending or running:
        while pending and len(running) < config.workers:
            job = pending.popleft()
            receiver, sender = context.Pipe(duplex=False)
            job.process = context.Process(
                target=_worker,
                args=(runner, str(job.instance), config.mode, job.configuration,
                      config.cpu_limit, sender),
                daemon=True,
            )
            job.conn = receiver
            job.started = time.monotonic()
            job.process.start()
            sender.close()
            job.transition(JobState.RUNNING)
            running.append(job)

        for job in list(running):
            wall = time.monotonic() - job.started
            if job.conn.poll():
                try:
                    job.message = job.conn.recv()
                except EOFError:
                    job.message = None
                job.process.join()
                job.transition(JobState.FINISHED if job.message else JobState.CRASHED)
            elif not job.process.is_alive():
                job.process.join()
                killed = job.process.exitcode in (-signal.SIGXCPU, -signal.SIGKILL)
                job.transition(JobState.TIMED_OUT if killed else JobState.CRASHED)
            elif wall >= config.wall_limit:
                job.process.terminate()
                job.process.join()
                job.transition(JobState.TIMED_OUT)
            else:
                continue
            job.conn.close()
            running.remove(job)
            collected.append((job, wall))
        if running:
            time.sleep(POLL_INTERVAL)

    for job, wall in collected:
        record = _finish(config, job, wall, references, verify_spec)
        board.records.append(record)
        logger.info("%s/%s: %s in %.2fs", job.configuration, job.instance.name,
                    record.verdict.value, record.wall)

    order = {(p.stem, s): k for k, (s, p) in
             enumerate((s, p) for s in config.solvers for p in instances)}
    board.records.sort(key=lambda r: order.get((r.instance, r.configuration), 0))
    return board


def rank(board: Scoreboard) -> Tuple[List[str], List[str]]:
    """
    Order configurations by solved count and by quality points.

    Both rankings break ties by total wall time, fastest first.

    Returns:
        tuple: ``(solved ranking, quality ranking)``
    """
    configs = board.configurations()
    by_solved = sorted(configs, key=lambda c: (-board.solved_count(c), board.total_wall(c)))
    by_quality = sorted(configs, key=lambda c: (-board.total_quality(c), board.total_wall(c)))
    return by_solved, by_quality


def cactus_series(board: Scoreboard, measure: str = "time") -> Dict[str, List[Tuple[int, float]]]:
    """
    Cumulative cactus series per configuration.

    Args:
        measure (str): ``"time"`` (wall seconds of solved runs) or ``"size"``
            (gate counts of verified controllers)

    Returns:
        dict: configuration -> ``[(instances solved, cumulative cost), ...]``
    """
    series = {}
    for config in board.configurations():
        solved = [r for r in board.records_for(config) if r.solved]
        if measure == "time":
            costs = sorted(r.wall for r in solved)
        else:
            costs = sorted(r.gate_count for r in solved if r.gate_count is not None)
        total = 0.0
        points = []
        for k, cost in enumerate(costs, 1):
            total += cost
            points.append((k, total))
        series[config] = points
    return series


def _write_cactus_csv(path, series, column):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["configuration", "solved", column])
        for config, points in series.items():
            for solved, total in points:
                writer.writerow([config, solved, f"{total:.6g}"])


_PALETTE = [(31, 119, 180), (214, 39, 40), (44, 160, 44), (148, 103, 189),
            (255, 127, 14), (23, 190, 207)]


def render_cactus_png(series: Dict[str, List[Tuple[int, float]]], path, width=640, height=480):
    """Draw a cactus plot (instances solved vs cumulative time) with Pillow."""
    image = Image.new("RGB", (width, height), (255, 255, 255))
    draw = ImageDraw.Draw(image)
    left, bottom, top, right = 60, height - 40, 20, width - 20
    draw.line([(left, top), (left, bottom), (right, bottom)], fill=(0, 0, 0))
    max_x = max((p[-1][0] for p in series.values() if p), default=1)
    max_y = max((p[-1][1] for p in series.values() if p), default=1.0) or 1.0

    def scale(x, y):
        return (left + (right - left) * x / max_x, bottom - (bottom - top) * y / max_y)

    draw.text((left, bottom + 10), "instances solved", fill=(0, 0, 0))
    draw.text((5, top), f"{max_y:.3g}s", fill=(0, 0, 0))
    for k, (config, points) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        if points:
            coords = [scale(0, 0)] + [scale(x, y) for x, y in points]
            draw.line(coords, fill=color, width=2)
        draw.text((right - 150, top + 15 * k), config, fill=color)
    image.save(path)


def emit_report(board: Scoreboard, out_dir, formats: Sequence[str] = ("csv", "markdown")) -> List[Path]:
    """
    Write the scoreboard, cactus series and rankings.

    ``csv`` writes ``scoreboard.csv``, ``cactus_time.csv``, ``cactus_size.csv``
    and ``cactus_time.png``; ``markdown`` writes ``ranking.md``.

    Returns:
        list: paths written
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out / "scoreboard.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["instance", "configuration", "track", "mode", "verdict", "wall",
                             "cpu", "gate_count", "verified", "quality"])
            for r in board.records:
                writer.writerow([r.instance, r.configuration, r.track, r.mode, r.verdict.value,
                                 f"{r.wall:.3f}", f"{r.cpu:.3f}",
                                 "" if r.gate_count is None else r.gate_count,
                                 r.verified.value,
                                 "" if r.quality is None else f"{r.quality:.4f}"])
        written.append(path)
        time_series = cactus_series(board, "time")
        _write_cactus_csv(out / "cactus_time.csv", time_series, "cumulative_time")
        _write_cactus_csv(out / "cactus_size.csv", cactus_series(board, "size"), "cumulative_gates")
        render_cactus_png(time_series, out / "cactus_time.png")
        written += [out / "cactus_time.csv", out / "cactus_size.csv", out / "cactus_time.png"]
    if "markdown" in formats:
        by_solved, by_quality = rank(board)
        lines = ["# Ranking", ""]
        if board.seed is not None:
            lines += [f"Seed: {board.seed}", ""]
        lines += ["## Solved instances", "",
                  "| rank | configuration | solved | total wall (s) |",
                  "|---|---|---|---|"]
        for k, config in enumerate(by_solved, 1):
            lines.append(f"| {k} | {config} | {board.solved_count(config)} | "
                         f"{board.total_wall(config):.2f} |")
        lines += ["", "## Quality", "",
                  "| rank | configuration | points | total wall (s) |",
                  "|---|---|---|---|"]
        for k, config in enumerate(by_quality, 1):
            lines.append(f"| {k} | {config} | {board.total_quality(config):.2f} | "
                         f"{board.total_wall(config):.2f} |")
        path = out / "ranking.md"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def generate_arena(family: str, seed: int, size: int, max_priority: int) -> GameArena:
    """
    Seeded arena generator.

    ``random``: uniform owners and priorities, out-degree uniform in 1..3.
    ``clique``: every vertex moves to every other one (a lone vertex loops
    on itself).

    ``ladder``: a recursive ladder of ``size`` levels, three vertices
    ``t, u, v`` per level ``l`` with ids ``3l, 3l+1, 3l+2`` and priorities
    ``3l, 3l+1, 3l+2``. The player favoured by ``3l`` owns ``u`` and ``v``,
    its opponent owns ``t``, so owners swap from one level to the next.
    Edges: ``t -> u`` and down to the next level's ``t``; ``u -> t, v``;
    ``v -> u`` and up to the previous level's ``t``. Below the top level the
    ladder is the dual of the ladder one level shorter, so each level adds
    a recursion level to Zielonka's algorithm. Ladders are fixed by
    ``size``; ``seed`` and ``max_priority`` do not change them.

    Raises:
        ValueError: for unknown families or ``size``/``max_priority`` below 1
    """
    if size < 1 or max_priority < 1:
        raise ValueError("size and max priority must be at least 1")
    rng = random.Random(seed)
    owners, priorities, successors = [], [], []
    if family == "random":
        for _ in range(size):
            owners.append(rng.choice((Player.EVE, Player.ADAM)))
            priorities.append(rng.randint(0, max_priority))
            degree = min(rng.randint(1, 3), size)
            successors.append(tuple(sorted(rng.sample(range(size), degree))))
    elif family == "ladder":
        for level in range(size):
            favoured = Player.EVE if level % 2 == 0 else Player.ADAM
            t, u, v = 3 * level, 3 * level + 1, 3 * level + 2
            owners += [favoured.opponent, favoured, favoured]
            priorities += [t, u, v]
            successors.append((u, t + 3) if level + 1 < size else (u,))
            successors.append((t, v))
            successors.append((t - 3, u) if level > 0 else (u,))
    elif family == "clique":
        for j in range(size):
            owners.append(Player.EVE if j % 2 == 0 else Player.ADAM)
            priorities.append(rng.randint(0, max_priority))
            others = tuple(w for w in range(size) if w != j)
            successors.append(others or (j,))
    else:
        raise ValueError(f"unknown arena family {family!r}; choose random, ladder or clique")
    return GameArena(tuple(owners), tuple(priorities), tuple(successors), initial=0)


def seed_from_environment(default: int = 0) -> int:
    """The ``OMEGA_SYNTH_SEED`` environment variable, or ``default``."""
    value = os.environ.get("OMEGA_SYNTH_SEED")
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        logger.warning("Ignoring non-integer OMEGA_SYNTH_SEED=%r", value)
        return default
