#!/usr/bin/env python3
"""
Tests for the benchmark runner, rankings, reports and arena generators.
"""

import csv
import os
import random
import sys
import tempfile
import time
import unittest
from pathlib import Path
from unittest import mock

# Add the src directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from omega_synth import solver
from omega_synth.arena import Player
from omega_synth.bench import (
    BenchConfig, JobState, RunRecord, Scoreboard, Verdict, Verified, cactus_series, emit_report,
    generate_arena, rank, run_suite, seed_from_environment
)
from omega_synth.errors import OmegaSynthError
from omega_synth.pipeline import load_specification
from omega_synth.solver import brute_force_solve, solve_parity_zielonka

TRIVIAL = """HOA: v1
States: 1
Start: 0
AP: 2 "i" "o"
controllable-AP: 1
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[1] 0 {0}
[!1] 0
--END--
"""


def sleeping_runner(path, mode, solver_name):
    time.sleep(5)
    return True, None


def failing_runner(path, mode, solver_name):
    raise RuntimeError("solver crashed")


def slow_specification(path):
    """Loads the instance after a pause longer than the wall limit of the run."""
    time.sleep(2)
    return load_specification(str(path))


def zielonka_calls(arena):
    calls = []
    original = solver._zielonka

    def counted(arena, region):
        calls.append(len(region))
        return original(arena, region)

    with mock.patch.object(solver, "_zielonka", counted):
        solve_parity_zielonka(arena)
    return len(calls)


def record(config, instance, verdict=Verdict.REALIZABLE, wall=1.0, gates=None, quality=None,
           mode="real"):
    return RunRecord(instance=instance, configuration=config, track="parity", mode=mode,
                     verdict=verdict, wall=wall, cpu=wall, gate_count=gates,
                     verified=Verified.PASS if mode == "synth" else Verified.N_A,
                     quality=quality)


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


class TestRunSuite(unittest.TestCase):
    """Worker processes, limits and verdicts."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.suite = Path(self.tmp.name) / "suite"
        self.suite.mkdir()

    def tearDown(self):
        self.tmp.cleanup()

    def config(self, **overrides):
        settings = dict(suite=self.suite, track="parity", wall_limit=60, cpu_limit=60)
        settings.update(overrides)
        return BenchConfig(**settings)

    def test_empty_suite(self):
        self.assertEqual(run_suite(self.config()).records, [])

    def test_missing_suite(self):
        with self.assertRaises(OmegaSynthError):
            run_suite(self.config(suite=self.suite / "nowhere"))

    def test_trivial_instance_real(self):
        (self.suite / "trivial.ehoa").write_text(TRIVIAL)
        board = run_suite(self.config(solvers=("zielonka", "dfi")))
        self.assertEqual(len(board.records), 2)
        for config in ("zielonka", "dfi"):
            self.assertEqual(board.solved_count(config), 1)
        self.assertIs(board.records[0].verdict, Verdict.REALIZABLE)
        self.assertIs(board.records[0].verified, Verified.N_A)

    def test_trivial_instance_synth(self):
        (self.suite / "trivial.ehoa").write_text(TRIVIAL)
        (self.suite / "reference_sizes.csv").write_text("instance,ref_gates\ntrivial,9\n")
        out = Path(self.tmp.name) / "out"
        board = run_suite(self.config(mode="synth", out=out))
        (result,) = board.records
        self.assertIs(result.verified, Verified.PASS)
        self.assertEqual(result.gate_count, 0)
        self.assertAlmostEqual(result.quality, 3.0)
        self.assertTrue((out / "controllers" / "zielonka" / "trivial.aag").exists())

    def test_timeout(self):
        (self.suite / "trivial.ehoa").write_text(TRIVIAL)
        board = run_suite(self.config(wall_limit=1, cpu_limit=1), runner=sleeping_runner)
        (result,) = board.records
        self.assertIs(result.verdict, Verdict.TIMEOUT)
        self.assertGreaterEqual(result.wall, 1.0)
        self.assertFalse(result.solved)

    def test_verification_time_not_charged_to_other_jobs(self):
        for name in ("a", "b"):
            (self.suite / f"{name}.ehoa").write_text(TRIVIAL)
        board = run_suite(self.config(mode="synth", workers=2, wall_limit=1.5, cpu_limit=1.5),
                          verify_spec=slow_specification)
        self.assertEqual([r.instance for r in board.records], ["a", "b"])
        for result in board.records:
            self.assertIs(result.verdict, Verdict.REALIZABLE)
            self.assertIs(result.verified, Verified.PASS)
            self.assertLess(result.wall, 1.5)
            self.assertTrue(result.solved)

    def test_seed_recorded_in_report(self):
        (self.suite / "trivial.ehoa").write_text(TRIVIAL)
        board = run_suite(self.config(seed=7))
        self.assertEqual(board.seed, 7)
        out = Path(self.tmp.name) / "report"
        emit_report(board, out, formats=("markdown",))
        self.assertIn("Seed: 7", (out / "ranking.md").read_text())
        self.assertIsNone(run_suite(self.config()).seed)

    def test_errors_do_not_stop_the_run(self):
        (self.suite / "a.ehoa").write_text(TRIVIAL)
        (self.suite / "b.ehoa").write_text("HOA: v1\nnot an automaton\n")
        board = run_suite(self.config())
        verdicts = {r.instance: r.verdict for r in board.records}
        self.assertEqual(verdicts, {"a": Verdict.REALIZABLE, "b": Verdict.ERROR})
        crashed = run_suite(self.config(), runner=failing_runner)
        self.assertTrue(all(r.verdict is Verdict.ERROR for r in crashed.records))

    def test_parallel_workers_keep_order(self):
        for k in range(4):
            (self.suite / f"t{k}.ehoa").write_text(TRIVIAL)
        board = run_suite(self.config(workers=3))
        self.assertEqual([r.instance for r in board.records], ["t0", "t1", "t2", "t3"])


class TestConfig(unittest.TestCase):
    """Profiles and validation."""

    def test_profiles(self):
        config = BenchConfig.from_profile("2022", "suite")
        self.assertEqual((config.wall_limit, config.cpu_limit), (10000.0, 40000.0))
        config = BenchConfig.from_profile("syntcomp", "suite", wall_limit=5, workers=None)
        self.assertEqual((config.wall_limit, config.cpu_limit, config.workers), (5, 3600.0, 1))
        with self.assertRaises(ValueError):
            BenchConfig.from_profile("2030", "suite")

    def test_validation(self):
        for overrides in ({"track": "ltl"}, {"mode": "fast"}, {"wall_limit": 0}, {"workers": 0}):
            with self.subTest(**overrides), self.assertRaises(ValueError):
                BenchConfig(suite="suite", **overrides)

    def test_seed_from_environment(self):
        with mock.patch.dict(os.environ, {"OMEGA_SYNTH_SEED": "42"}):
            self.assertEqual(seed_from_environment(), 42)
        with mock.patch.dict(os.environ, {"OMEGA_SYNTH_SEED": "abc"}):
            self.assertEqual(seed_from_environment(7), 7)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(seed_from_environment(3), 3)

    def test_job_states(self):
        self.assertEqual([s.name for s in JobState],
                         ["PENDING", "RUNNING", "FINISHED", "TIMED_OUT", "CRASHED"])


class TestRanking(unittest.TestCase):
    """Solved-count and quality rankings."""

    def test_single_configuration(self):
        board = Scoreboard([record("only", "x")])
        self.assertEqual(rank(board), (["only"], ["only"]))

    def test_tie_broken_by_time(self):
        board = Scoreboard([record("slow", "x", wall=5.0), record("fast", "x", wall=2.0)])
        self.assertEqual(rank(board)[0], ["fast", "slow"])

    def test_quality_can_flip_order(self):
        board = Scoreboard(
            [record("many", f"x{k}", gates=100, quality=0.5, mode="synth") for k in range(3)]
            + [record("small", f"x{k}", gates=1, quality=3.0, mode="synth") for k in range(2)]
            + [record("small", "x2", verdict=Verdict.TIMEOUT, mode="synth")])
        by_solved, by_quality = rank(board)
        self.assertEqual(by_solved, ["many", "small"])
        self.assertEqual(by_quality, ["small", "many"])

    def test_unverified_synthesis_not_solved(self):
        failed = RunRecord("x", "c", "safety", "synth", Verdict.REALIZABLE, 1.0, 1.0, 3,
                           Verified.FAIL)
        self.assertFalse(failed.solved)
        self.assertEqual(Scoreboard([failed]).solved_count("c"), 0)


class TestReports(unittest.TestCase):
    """CSV, markdown and cactus output."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_empty_board_headers_only(self):
        emit_report(Scoreboard(), self.out)
        self.assertEqual(len(read_rows(self.out / "scoreboard.csv")), 1)
        self.assertEqual(read_rows(self.out / "cactus_time.csv"),
                         [["configuration", "solved", "cumulative_time"]])
        self.assertEqual(len(read_rows(self.out / "cactus_size.csv")), 1)
        self.assertTrue((self.out / "ranking.md").exists())
        self.assertTrue((self.out / "cactus_time.png").exists())

    def test_three_records(self):
        board = Scoreboard([record("c", "a", wall=3.0), record("c", "b", wall=1.0),
                            record("c", "d", wall=2.0)])
        emit_report(board, self.out, formats=("csv",))
        rows = read_rows(self.out / "cactus_time.csv")[1:]
        self.assertEqual([int(r[1]) for r in rows], [1, 2, 3])
        self.assertEqual([float(r[2]) for r in rows], [1.0, 3.0, 6.0])
        self.assertFalse((self.out / "ranking.md").exists())

    def test_series_monotone(self):
        rng = random.Random(3)
        for _ in range(50):
            records = []
            for k in range(rng.randint(0, 12)):
                verdict = rng.choice(list(Verdict))
                records.append(record(rng.choice("pq"), f"i{k}", verdict=verdict,
                                      wall=rng.uniform(0, 10), gates=rng.randint(0, 50),
                                      quality=2.0, mode="synth"))
            board = Scoreboard(records)
            for measure in ("time", "size"):
                for points in cactus_series(board, measure).values():
                    for (n1, c1), (n2, c2) in zip(points, points[1:]):
                        self.assertEqual(n2, n1 + 1)
                        self.assertLessEqual(c1, c2)


class TestGenerateArena(unittest.TestCase):
    """Seeded arena families."""

    def test_single_vertex(self):
        arena = generate_arena("random", seed=1, size=1, max_priority=3)
        self.assertEqual(arena.successors, ((0,),))

    def test_deterministic(self):
        for family in ("random", "ladder", "clique"):
            self.assertEqual(generate_arena(family, 9, 10, 4), generate_arena(family, 9, 10, 4))

    def test_ladder_against_brute_force(self):
        for size in range(1, 5):
            arena = generate_arena("ladder", 0, size, 3)
            self.assertEqual(solve_parity_zielonka(arena).winners, brute_force_solve(arena))

    def test_ladder_layout_is_fixed(self):
        arena = generate_arena("ladder", 0, 2, 5)
        self.assertEqual(arena.priorities, (0, 1, 2, 3, 4, 5))
        self.assertEqual(arena.owners, (Player.ADAM, Player.EVE, Player.EVE,
                                        Player.EVE, Player.ADAM, Player.ADAM))
        self.assertEqual(arena.successors, ((1, 3), (0, 2), (1,), (4,), (3, 5), (0, 4)))
        for seed in range(5):
            self.assertEqual(generate_arena("ladder", seed, 6, 2), generate_arena("ladder", 0, 6, 9))

    def test_ladder_deepens_zielonka_recursion(self):
        calls = [zielonka_calls(generate_arena("ladder", 0, size, 1)) for size in range(1, 9)]
        self.assertEqual(calls[:2], [2, 4])
        for fewer, more in zip(calls, calls[1:]):
            self.assertGreater(more, fewer)

    def test_clique_shape(self):
        arena = generate_arena("clique", 0, 4, 2)
        self.assertEqual(arena.successors[0], (1, 2, 3))

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            generate_arena("torus", 0, 4, 2)
        with self.assertRaises(ValueError):
            generate_arena("random", 0, 0, 2)


if __name__ == '__main__':
    unittest.main()
