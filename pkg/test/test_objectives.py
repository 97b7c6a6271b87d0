from src.errors import DegeneratePath, Disconnected, InvalidWeights, NonPositiveNorm
from src.objectives import (FeasibilityReport, Norms, ObjectiveVector,
                            TaskReport, TaskStatus, Trajectory, WaitPolicy,
                            Weights, check_windows, curvature_std,
                            evaluate_trajectory, heading_changes, makespan,
                            path_length, scalar_objective, simulate_times,
                            smoothness, turning_count)
from src.world import Cell, GridMap, Scenario, Task
import math
import numpy as np
import pytest


def traj(*cells):
    return Trajectory.from_cells(cells)


def random_walk(rng, grid, start, steps):
    '''A grid-connected walk of random neighbor moves.'''
    cells = [Cell(*start)]
    for _ in range(steps):
        options = [c for c, _ in grid.neighbors(cells[-1])]
        cells.append(options[int(rng.integers(len(options)))])
    return cells


def naive_length(cells, resolution):
    total = 0.0
    for a, b in zip(cells, cells[1:]):
        total += math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2) * \
            resolution
    return total


def naive_thetas(cells):
    distinct = [cells[0]]
    for cell in cells[1:]:
        if cell != distinct[-1]:
            distinct.append(cell)
    thetas = []
    for a, b, c in zip(distinct, distinct[1:], distinct[2:]):
        u = (b[0] - a[0], b[1] - a[1])
        v = (c[0] - b[0], c[1] - b[1])
        cross = u[0] * v[1] - u[1] * v[0]
        dot = u[0] * v[0] + u[1] * v[1]
        thetas.append(math.atan2(abs(cross), dot))
    return distinct, thetas


@pytest.fixture
def line_scenario():
    '''A 10x1 corridor at 1 m per cell: start at 0, task 1 at column 2 with
    window [5, 10], task 2 at column 6 with window [0, 7].'''
    grid = GridMap(10, 1, 1.0)
    return Scenario(grid, (0, 0), 1.0, [Task(1, (2, 0), 5, 10),
                                        Task(2, (6, 0), 0, 7)])


def test_path_length_single_point():
    assert 0.0 == path_length(traj((0, 0)), 0.1)


def test_path_length_pythagoras():
    '''This tests one 3-4-5 hop at resolution 1.'''
    assert 5.0 == path_length(traj((0, 0), (3, 4)), 1.0)


def test_path_length_waiting_is_free():
    assert 0.2 == path_length(traj((0, 0), (1, 0), (1, 0), (2, 0)), 0.1)


def test_path_length_matches_naive_sum():
    rng = np.random.default_rng(1)
    grid = GridMap(15, 15, 0.1)
    for _ in range(50):
        cells = random_walk(rng, grid, (7, 7), 40)
        expected = naive_length(cells, 0.1)
        assert expected == pytest.approx(path_length(Trajectory.from_cells(
            cells), 0.1), rel=1e-12)


def test_heading_changes_collinear():
    assert [0.0, 0.0] == heading_changes(traj((0, 0), (1, 1), (2, 2), (3, 3)))


def test_heading_changes_right_angle():
    assert [math.pi / 2] == heading_changes(traj((0, 0), (1, 0), (1, 1)))


def test_heading_changes_diagonal_kink():
    assert [pytest.approx(math.pi / 4)] == heading_changes(
        traj((0, 0), (1, 0), (2, 1)))


def test_heading_changes_skip_waiting():
    '''This tests that a waiting step does not break the angle.'''
    assert [math.pi / 2] == heading_changes(
        traj((0, 0), (1, 0), (1, 0), (1, 1)))


def test_heading_changes_too_short():
    assert [] == heading_changes(traj((0, 0), (1, 0)))


def test_heading_changes_match_naive():
    rng = np.random.default_rng(2)
    grid = GridMap(12, 12, 0.1)
    for _ in range(50):
        cells = random_walk(rng, grid, (6, 6), 25)
        _, expected = naive_thetas(cells)
        actual = heading_changes(Trajectory.from_cells(cells))
        assert expected == pytest.approx(actual, abs=1e-9)


def test_turning_count_straight():
    assert 0 == turning_count(traj((0, 0), (1, 0), (2, 0)), 0.0)


def test_turning_count_l_path():
    assert 1 == turning_count(traj((0, 0), (1, 0), (1, 1)), math.pi / 12)


def test_turning_count_staircase():
    '''This tests k alternating 45 degree kinks counted by hand.'''
    for k in range(1, 12):
        cells = [(0, 0)]
        for step in range(k + 1):
            c, r = cells[-1]
            cells.append((c + 1, r) if step % 2 == 0 else (c + 1, r + 1))
        assert k == turning_count(Trajectory.from_cells(cells), math.pi / 12)


def test_turning_count_threshold_monotone():
    rng = np.random.default_rng(4)
    grid = GridMap(12, 12, 1.0)
    thresholds = [0.0, math.pi / 12, math.pi / 4, math.pi / 2, 3.0]
    for _ in range(30):
        trajectory = Trajectory.from_cells(random_walk(rng, grid, (5, 5), 20))
        counts = [turning_count(trajectory, t) for t in thresholds]
        assert counts == sorted(counts, reverse=True)


def test_smoothness_straight():
    assert 0.0 == smoothness(traj((0, 0), (1, 0), (2, 0), (3, 0)))


def test_smoothness_constant_turning():
    '''This tests two equal pi/4 kinks.'''
    assert 0.0 == pytest.approx(smoothness(traj((0, 0), (1, 0), (2, 1),
                                                (2, 2))), abs=1e-15)


def test_smoothness_alternating():
    '''This tests kinks [pi/2, 0, pi/2].'''
    trajectory = traj((0, 0), (1, 0), (1, 1), (1, 2), (2, 2))
    assert [math.pi / 2, 0.0, math.pi / 2] == heading_changes(trajectory)
    assert math.pi == smoothness(trajectory)


def test_curvature_std_straight():
    assert 0.0 == curvature_std(traj((0, 0), (1, 0), (2, 0), (3, 0)), 0.1)


def test_curvature_std_constant_staircase():
    cells = [(0, 0)]
    for step in range(10):
        c, r = cells[-1]
        cells.append((c + 1, r) if step % 2 == 0 else (c + 1, r + 1))
    assert 0.0 == pytest.approx(curvature_std(Trajectory.from_cells(cells),
                                              0.1), abs=1e-9)


def test_curvature_std_two_pass_oracle():
    rng = np.random.default_rng(6)
    grid = GridMap(12, 12, 0.1)
    for _ in range(40):
        cells = random_walk(rng, grid, (6, 6), 20)
        distinct, thetas = naive_thetas(cells)
        if len(distinct) < 3:
            continue
        curvatures = []
        for i, theta in enumerate(thetas):
            a, b, c = distinct[i], distinct[i + 1], distinct[i + 2]
            mean = (math.dist(a, b) + math.dist(b, c)) * 0.1 / 2.0
            curvatures.append(theta / mean)
        mu = sum(curvatures) / len(curvatures)
        variance = sum((k - mu) ** 2 for k in curvatures) / len(curvatures)
        actual = curvature_std(Trajectory.from_cells(cells), 0.1)
        assert math.sqrt(variance) == pytest.approx(actual, rel=1e-9,
                                                    abs=1e-9)


def test_curvature_std_degenerate():
    with pytest.raises(Exception) as exc_info:
        curvature_std(traj((0, 0), (1, 0), (1, 0)), 0.1)
    exception_raised = exc_info.value
    assert type(DegeneratePath()) == type(exception_raised)
    assert "at least three distinct points" in str(exception_raised)


def test_rotation_preserves_geometry():
    '''This tests a rigid 90 degree rotation of random walks.'''
    rng = np.random.default_rng(8)
    grid = GridMap(15, 15, 0.1)
    for _ in range(30):
        cells = random_walk(rng, grid, (7, 7), 30)
        rotated = [(20 - r, c) for c, r in cells]
        a = evaluate_trajectory(Trajectory.from_cells(cells), 0.1)
        b = evaluate_trajectory(Trajectory.from_cells(rotated), 0.1)
        assert a.f1_length == b.f1_length
        assert a.f3_turns == b.f3_turns
        assert a.f4_smoothness == b.f4_smoothness
        assert a.curvature_std == b.curvature_std


def test_appending_a_step_never_shortens():
    rng = np.random.default_rng(9)
    grid = GridMap(12, 12, 0.1)
    cells = random_walk(rng, grid, (6, 6), 30)
    lengths = [path_length(Trajectory.from_cells(cells[:n]), 0.1)
               for n in range(1, len(cells) + 1)]
    assert lengths == sorted(lengths)


def test_trajectory_rejects_decreasing_times():
    with pytest.raises(DegeneratePath):
        Trajectory((Cell(0, 0), Cell(1, 0)), (0.0, -1.0))


def test_simulate_times_two_cells():
    grid = GridMap(10, 2, 0.1)
    scenario = Scenario(grid, (0, 0), 1.0, [Task(1, (5, 1), 0, 10)])
    trajectory = simulate_times([(0, 0), (1, 0)], scenario)
    assert (0.0, 0.1) == trajectory.arrival_times
    assert () == trajectory.task_visits


def test_simulate_times_wait_allowed(line_scenario):
    '''This tests arriving 3 s early and waiting for the window.'''
    trajectory = simulate_times([(0, 0), (1, 0), (2, 0)], line_scenario)
    assert (Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(2, 0)) == \
        trajectory.points
    assert (0.0, 1.0, 2.0, 5.0) == trajectory.arrival_times
    assert ((1, 3),) == trajectory.task_visits
    assert 5.0 == trajectory.visit_time(1)
    assert 5.0 == makespan(trajectory)


def test_simulate_times_wait_forbidden(line_scenario):
    '''This tests that an early arrival is missed when waiting is
    forbidden.'''
    trajectory = simulate_times([(0, 0), (1, 0), (2, 0)], line_scenario,
                                WaitPolicy.FORBID)
    assert (0.0, 1.0, 2.0) == trajectory.arrival_times
    report = check_windows(trajectory, line_scenario.tasks)
    assert TaskStatus.MISSED_EARLY == report.status_of(1)
    assert TaskStatus.UNVISITED == report.status_of(2)
    assert 0.0 == report.completion_fraction


def test_simulate_times_timeline_continues_after_wait(line_scenario):
    cells = [(c, 0) for c in range(7)]
    trajectory = simulate_times(cells, line_scenario)
    assert 9.0 == trajectory.visit_time(2)
    report = check_windows(trajectory, line_scenario.tasks)
    assert TaskStatus.MET == report.status_of(1)
    assert TaskStatus.MISSED_LATE == report.status_of(2)
    assert 0.5 == report.completion_fraction


def test_simulate_times_route_order(line_scenario):
    '''This tests that passing over a task out of order is not a visit.'''
    cells = [(c, 0) for c in range(7)]
    trajectory = simulate_times(cells, line_scenario, route_order=[2])
    assert [2] == trajectory.visited_task_ids
    assert 6.0 == trajectory.visit_time(2)


def test_simulate_times_disconnected(line_scenario):
    with pytest.raises(Exception) as exc_info:
        simulate_times([(0, 0), (2, 0)], line_scenario)
    exception_raised = exc_info.value
    assert type(Disconnected()) == type(exception_raised)
    assert "not grid neighbors" in str(exception_raised)


def test_simulate_times_wrong_start(line_scenario):
    with pytest.raises(Disconnected):
        simulate_times([(1, 0), (2, 0)], line_scenario)


def test_wait_never_misses_early():
    rng = np.random.default_rng(12)
    grid = GridMap(10, 10, 1.0)
    for _ in range(20):
        cells = random_walk(rng, grid, (0, 0), 40)
        on_route = [c for c in dict.fromkeys(cells) if c != Cell(0, 0)][:3]
        tasks = [Task(k + 1, cell, float(rng.uniform(0, 50)), 100.0)
                 for k, cell in enumerate(on_route)]
        scenario = Scenario(grid, (0, 0), 1.0, tasks)
        report = check_windows(simulate_times(cells, scenario), tasks)
        for entry in report.entries:
            assert TaskStatus.MISSED_EARLY != entry.status


def test_check_windows_all_met():
    trajectory = Trajectory((Cell(0, 0), Cell(1, 0), Cell(2, 0)),
                            (0.0, 1.0, 2.0), ((1, 1), (2, 2)))
    tasks = [Task(1, (1, 0), 0, 5), Task(2, (2, 0), 1, 5)]
    report = check_windows(trajectory, tasks)
    assert 1.0 == report.completion_fraction
    assert report.all_met


def test_check_windows_one_unvisited():
    trajectory = Trajectory((Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(3, 0)),
                            (0.0, 1.0, 2.0, 3.0), ((1, 1), (2, 2), (3, 3)))
    tasks = [Task(k, (k, 0), 0, 5) for k in (1, 2, 3)] + \
        [Task(4, (4, 0), 0, 5)]
    report = check_windows(trajectory, tasks)
    assert 0.75 == report.completion_fraction
    assert TaskStatus.UNVISITED == report.status_of(4)
    assert 3 == report.n_met


def test_feasibility_report_to_dict():
    report = FeasibilityReport((TaskReport(1, TaskStatus.MET, 2.0),
                                TaskReport(2, TaskStatus.UNVISITED)))
    data = report.to_dict()
    assert 0.5 == data["completion_fraction"]
    assert {"id": 2, "status": "unvisited", "arrival_time_s": None} == \
        data["tasks"][1]


def test_scalar_objective_convex_combination():
    norms = Norms(2.0, 4.0, 20.0, math.pi)
    vector = ObjectiveVector(1.0, 2.0, 10, math.pi / 2)
    assert 0.5 == pytest.approx(scalar_objective(vector, Weights(), norms))


def test_scalar_objective_projection():
    norms = Norms(7.0, 4.0)
    vector = ObjectiveVector(3.5, 2.0, 3, 1.0)
    assert 3.5 / 7.0 == scalar_objective(vector, Weights(1, 0, 0, 0), norms)


def test_scalar_objective_dominance():
    rng = np.random.default_rng(13)
    norms = Norms(3.0, 5.0)
    for _ in range(500):
        raw = rng.random(4) * 10
        a = ObjectiveVector(raw[0], raw[1], int(raw[2]), raw[3])
        extra = rng.random(4) * 3
        b = ObjectiveVector(raw[0] + extra[0], raw[1] + extra[1],
                            int(raw[2]) + int(extra[2]), raw[3] + extra[3])
        w = rng.random(4)
        weights = Weights.from_sequence(w / w.sum())
        assert scalar_objective(a, weights, norms) <= \
            scalar_objective(b, weights, norms) + 1e-12


def test_scalar_objective_bad_norm():
    with pytest.raises(Exception) as exc_info:
        scalar_objective(ObjectiveVector(1, 1, 1, 1), Weights(), (1, 1, 0, 1))
    exception_raised = exc_info.value
    assert type(NonPositiveNorm()) == type(exception_raised)
    assert "must be positive" in str(exception_raised)


def test_norms_reject_zero():
    with pytest.raises(NonPositiveNorm):
        Norms(0.0, 1.0)


def test_norms_for_scenario(line_scenario):
    norms = Norms.for_scenario(line_scenario)
    assert math.hypot(10.0, 1.0) == norms.f1
    assert math.hypot(10.0, 1.0) == norms.f2
    assert (20.0, math.pi) == (norms.f3, norms.f4)
    assert 2.0 == Norms.for_scenario(line_scenario, f3=2.0).f3


def test_weights_must_sum_to_one():
    with pytest.raises(Exception) as exc_info:
        Weights(0.5, 0.5, 0.5, 0.0)
    exception_raised = exc_info.value
    assert type(InvalidWeights()) == type(exception_raised)
    assert "must sum to 1" in str(exception_raised)


def test_weights_in_unit_interval():
    with pytest.raises(InvalidWeights):
        Weights(1.5, -0.5, 0.0, 0.0)


def test_objective_vector_non_negative():
    with pytest.raises(ValueError):
        ObjectiveVector(-1.0, 0.0, 0, 0.0)
