from src.legs import build_leg_matrix
from src.objectives import (Norms, TaskStatus, WaitPolicy, Weights,
                            check_windows, evaluate_trajectory,
                            scalar_objective)
from src.tour import TourEvaluator
from src.world import Scenario, Task, generate_map, generate_scenario, \
    load_map
import numpy as np
import pytest


@pytest.fixture
def line_scenario():
    '''Start at column 0 of a 10 m corridor; task 10 at 2 m opens at 5 s,
    task 20 at 6 m closes at 7 s.'''
    grid = load_map("map 10 1 1.0\n..........\n")
    return Scenario(grid, (0, 0), 1.0, [Task(10, (2, 0), 5, 10),
                                        Task(20, (6, 0), 0, 7)])


@pytest.fixture
def line_evaluator(line_scenario):
    return TourEvaluator(line_scenario, build_leg_matrix(line_scenario))


def test_leg_lengths_on_corridor(line_evaluator):
    assert 2.0 == line_evaluator.leg_length(0, 1)
    assert 6.0 == line_evaluator.leg_length(0, 2)
    assert 4.0 == line_evaluator.leg_length(1, 2)
    assert 10 == line_evaluator.task_id(1)
    assert 7.0 == line_evaluator.window_end(2)


def test_evaluate_waits_then_misses(line_evaluator):
    '''This tests a wait at task 10 that makes task 20 late.'''
    solution = line_evaluator.evaluate([1, 2])
    assert (10, 20) == solution.visit_order
    assert 6.0 == solution.objectives.f1_length
    assert 9.0 == solution.objectives.f2_makespan
    assert TaskStatus.MET == solution.feasibility.status_of(10)
    assert TaskStatus.MISSED_LATE == solution.feasibility.status_of(20)
    assert 0.5 == solution.completion_fraction
    assert not solution.complete


def test_evaluate_scalar_objective(line_scenario, line_evaluator):
    solution = line_evaluator.evaluate([2, 1])
    expected = scalar_objective(solution.objectives, Weights(),
                                Norms.for_scenario(line_scenario))
    assert expected == solution.F
    assert solution.complete
    assert 10.0 == solution.objectives.f1_length
    assert 10.0 == solution.objectives.f2_makespan


def test_evaluate_is_memoised(line_evaluator):
    assert line_evaluator.evaluate([2, 1]) is \
        line_evaluator.evaluate((2, 1))


def test_decode_stops_when_nothing_is_allowed(line_evaluator):
    solution = line_evaluator.decode([1, 2])
    assert (10,) == solution.visit_order
    assert TaskStatus.UNVISITED == solution.feasibility.status_of(20)
    assert 2.0 == solution.objectives.f1_length


def test_decode_skips_to_first_allowed(line_scenario):
    '''This tests that forbidding waits moves task 20 to the front.'''
    evaluator = TourEvaluator(line_scenario, build_leg_matrix(line_scenario),
                              wait_policy=WaitPolicy.FORBID)
    solution = evaluator.decode([1, 2])
    assert (20, 10) == solution.visit_order
    assert solution.complete


def test_allowed_boundaries(line_evaluator):
    '''This tests arrival exactly at window_end is still allowed.'''
    assert [1, 2] == line_evaluator.allowed(0, 0.0, {1, 2})
    assert [1, 2] == line_evaluator.allowed(0, 1.0, {2, 1})
    assert [1] == line_evaluator.allowed(0, 1.5, {1, 2})
    assert [] == line_evaluator.allowed(0, 8.5, {1, 2})
    assert [1, 2] == line_evaluator.allowed(0, 8.5, {1, 2},
                                            filter_windows=False)


def test_departure_waits_only_when_allowed(line_scenario):
    allow = TourEvaluator(line_scenario, build_leg_matrix(line_scenario))
    forbid = TourEvaluator(line_scenario, build_leg_matrix(line_scenario),
                           wait_policy="forbid")
    assert 5.0 == allow.departure(1, 2.0)
    assert 2.0 == forbid.departure(1, 2.0)
    assert 6.0 == allow.departure(1, 6.0)


def test_better_than(line_evaluator):
    complete = line_evaluator.decode([2, 1])
    partial = line_evaluator.decode([1, 2])
    assert complete.better_than(partial)
    assert not partial.better_than(complete)
    assert not complete.better_than(complete)
    assert complete.better_than(None)


def test_route_cells_and_nodes_of(line_evaluator):
    cells = line_evaluator.route_cells([2, 1])
    assert 11 == len(cells)
    assert (0, 0) == cells[0]
    assert (6, 0) == cells[6]
    assert (2, 0) == cells[-1]
    assert [2, 1] == line_evaluator.nodes_of([20, 10])


def test_solution_to_dict(line_evaluator):
    data = line_evaluator.evaluate([1, 2]).to_dict()
    assert [10, 20] == data["visit_order"]
    assert 5.0 == data["trajectory"]["arrival_times_s"][3]
    assert [[10, 3], [20, 7]] == data["trajectory"]["task_visits"]
    assert "missed_late" == data["feasibility"]["tasks"][1]["status"]


def test_leg_matrix_must_match(line_scenario):
    other = Scenario(line_scenario.map, (0, 0), 1.0, [Task(1, (3, 0), 0, 9)])
    with pytest.raises(ValueError):
        TourEvaluator(line_scenario, build_leg_matrix(other))


@pytest.mark.parametrize("wait_policy", [WaitPolicy.ALLOW,
                                         WaitPolicy.FORBID])
def test_replay_matches_evaluation(wait_policy):
    '''This tests that re-timing the cell route gives the same objectives
    and window statuses as the leg arithmetic.'''
    rng = np.random.default_rng(31)
    for seed in range(8):
        grid = generate_map(seed, 40, 40, 0.1, 0.15)
        scenario = generate_scenario(seed, grid, 5, 0.5, 4.0)
        evaluator = TourEvaluator(scenario, build_leg_matrix(scenario),
                                  wait_policy=wait_policy)
        for _ in range(10):
            order = [int(n) + 1 for n in rng.permutation(5)]
            order = order[:int(rng.integers(1, 6))]
            solution = evaluator.evaluate(order)
            trajectory = solution.trajectory
            assert solution.visit_order == tuple(
                trajectory.visited_task_ids)
            assert solution.feasibility == check_windows(trajectory,
                                                         scenario.tasks)
            assert solution.objectives == evaluate_trajectory(
                trajectory, grid.resolution)
            decoded = evaluator.decode(order)
            assert all(e.status in (TaskStatus.MET, TaskStatus.UNVISITED)
                       for e in decoded.feasibility.entries)
