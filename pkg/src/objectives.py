'''
The four objectives a route is judged on, the weighted scalar that ranks
routes, and the time-window bookkeeping.

    f1  path length: sum of Euclidean step lengths (meters)
    f2  makespan: completion time of the last visited task (seconds)
    f3  turning count: heading changes above a threshold
    f4  smoothness: sum of |theta_i - theta_(i-1)| over heading changes

plus the curvature standard deviation reported alongside them.

Geometry is computed from "moves", the integer (dcol, drow) vectors
between successive distinct positions of a trajectory. Waiting steps repeat
a position and so vanish from the move list, which is what makes them
transparent to every geometric metric. Planners that concatenate
precomputed legs build the same move array and get bit-identical numbers.
'''
import enum
import logging
import math
import typing
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegeneratePath, Disconnected, InvalidWeights,
                     NonPositiveNorm)
from .world import Cell, Scenario

logger = logging.getLogger(__name__)

DEFAULT_TURN_THRESHOLD = math.pi / 12
DEFAULT_WEIGHTS = (0.4, 0.3, 0.2, 0.1)
TURN_NORM = 20.0
WEIGHT_TOLERANCE = 1e-9


class WaitPolicy(str, enum.Enum):
    '''Whether a robot that reaches a task before its window opens may wait
    there until the window opens.'''
    ALLOW = "allow"
    FORBID = "forbid"


class TaskStatus(str, enum.Enum):
    MET = "met"
    MISSED_EARLY = "missed_early"
    MISSED_LATE = "missed_late"
    UNVISITED = "unvisited"


@dataclass(frozen=True)
class Trajectory:
    '''A timestamped walk over grid cells. task_visits pairs a task id with
    the index into points at which the task counts as visited.'''
    points: typing.Tuple[Cell, ...]
    arrival_times: typing.Tuple[float, ...]
    task_visits: typing.Tuple[typing.Tuple[int, int], ...] = ()

    def __post_init__(self):
        if len(self.points) == 0:
            raise DegeneratePath("A trajectory needs at least one point.")
        if len(self.points) != len(self.arrival_times):
            raise DegeneratePath(f"A trajectory has {len(self.points)} points \
but {len(self.arrival_times)} arrival times.")
        if self.arrival_times[0] != 0.0:
            raise DegeneratePath("A trajectory must start at time 0.")
        if any(b < a for a, b in zip(self.arrival_times,
                                     self.arrival_times[1:])):
            raise DegeneratePath("The arrival times of a trajectory must not \
decrease.")

    @classmethod
    def from_cells(cls, cells, resolution: float = 1.0, speed: float = 1.0):
        '''A trajectory with no tasks whose times are cumulative distance
        over speed. Consecutive cells need not be adjacent.'''
        points = tuple(Cell(int(c), int(r)) for c, r in cells)
        moves = moves_of(points)
        lengths = segment_lengths(moves, resolution)
        times = [0.0]
        distance = 0.0
        move = 0
        for a, b in zip(points, points[1:]):
            if a != b:
                distance += float(lengths[move])
                move += 1
            times.append(distance / speed)
        return cls(points, tuple(times))

    @property
    def moves(self) -> np.ndarray:
        return moves_of(self.points)

    @property
    def visited_task_ids(self) -> typing.List[int]:
        return [task_id for task_id, _ in self.task_visits]

    def visit_time(self, task_id: int):
        for visited, index in self.task_visits:
            if visited == task_id:
                return self.arrival_times[index]
        return None


@dataclass(frozen=True)
class ObjectiveVector:
    f1_length: float
    f2_makespan: float
    f3_turns: int
    f4_smoothness: float
    curvature_std: float = 0.0

    def __post_init__(self):
        for name in ("f1_length", "f2_makespan", "f3_turns", "f4_smoothness",
                     "curvature_std"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"The objective {name} must be non-negative, \
got {getattr(self, name)!r}.")

    def as_tuple(self) -> typing.Tuple[float, float, float, float]:
        return (self.f1_length, self.f2_makespan, float(self.f3_turns),
                self.f4_smoothness)

    def to_dict(self) -> dict:
        return {"f1_length_m": self.f1_length,
                "f2_makespan_s": self.f2_makespan,
                "f3_turns": self.f3_turns,
                "f4_smoothness_rad": self.f4_smoothness,
                "curvature_std": self.curvature_std}


@dataclass(frozen=True)
class Weights:
    '''Weights of the scalar objective; each in [0, 1], summing to 1.'''
    w1: float = DEFAULT_WEIGHTS[0]
    w2: float = DEFAULT_WEIGHTS[1]
    w3: float = DEFAULT_WEIGHTS[2]
    w4: float = DEFAULT_WEIGHTS[3]

    def __post_init__(self):
        values = self.as_tuple()
        if any(not (0.0 <= w <= 1.0) for w in values):
            raise InvalidWeights(f"Every weight must lie in [0, 1], got \
{values}.")
        if abs(math.fsum(values) - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidWeights(f"The weights must sum to 1, got {values} \
(sum {math.fsum(values)}).")

    @classmethod
    def from_sequence(cls, values):
        values = list(values)
        if len(values) != 4:
            raise InvalidWeights(f"Four weights are needed, got {values}.")
        return cls(*(float(v) for v in values))

    def as_tuple(self) -> typing.Tuple[float, float, float, float]:
        return (self.w1, self.w2, self.w3, self.w4)


@dataclass(frozen=True)
class Norms:
    '''Per-objective divisors that bring meters, seconds, counts and
    radians to a comparable scale before weighting.'''
    f1: float
    f2: float
    f3: float = TURN_NORM
    f4: float = math.pi

    def __post_init__(self):
        for name, value in zip(("f1", "f2", "f3", "f4"), self.as_tuple()):
            if not (value > 0 and math.isfinite(value)):
                raise NonPositiveNorm(f"The normalisation constant {name} \
must be a positive finite number, got {value!r}.")

    @classmethod
    def for_scenario(cls, scenario: Scenario, **overrides):
        '''Map diagonal for length, diagonal over speed for makespan, 20
        turns and pi radians; any of f1..f4 may be overridden.'''
        diagonal = scenario.map.diagonal_m
        values = {"f1": diagonal, "f2": diagonal / scenario.speed,
                  "f3": TURN_NORM, "f4": math.pi}
        values.update({k: float(v) for k, v in overrides.items()
                       if v is not None})
        return cls(**values)

    def as_tuple(self) -> typing.Tuple[float, float, float, float]:
        return (self.f1, self.f2, self.f3, self.f4)


@dataclass(frozen=True)
class TaskReport:
    task_id: int
    status: TaskStatus
    arrival_time: typing.Optional[float] = None


@dataclass(frozen=True)
class FeasibilityReport:
    entries: typing.Tuple[TaskReport, ...]
    completion_fraction: float = field(init=False)

    def __post_init__(self):
        total = len(self.entries)
        met = sum(1 for e in self.entries if e.status == TaskStatus.MET)
        object.__setattr__(self, "completion_fraction",
                           met / total if total else 1.0)

    @property
    def n_met(self) -> int:
        return sum(1 for e in self.entries if e.status == TaskStatus.MET)

    @property
    def all_met(self) -> bool:
        return self.n_met == len(self.entries)

    def status_of(self, task_id: int) -> TaskStatus:
        for entry in self.entries:
            if entry.task_id == task_id:
                return entry.status
        raise KeyError(task_id)

    def to_dict(self) -> dict:
        return {"completion_fraction": self.completion_fraction,
                "tasks": [{"id": e.task_id, "status": e.status.value,
                           "arrival_time_s": e.arrival_time}
                          for e in self.entries]}


# ------- geometry on move arrays -------
def moves_of(points) -> np.ndarray:
    '''Integer displacement vectors between successive distinct points.'''
    if len(points) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    diffs = np.diff(np.asarray(points, dtype=np.int64), axis=0)
    return diffs[np.any(diffs != 0, axis=1)]


def segment_lengths(moves: np.ndarray, resolution: float) -> np.ndarray:
    return np.hypot(moves[:, 0], moves[:, 1]) * resolution


def move_headings(moves: np.ndarray) -> np.ndarray:
    '''Absolute angle (radians, [0, pi]) between each pair of consecutive
    moves.'''
    if len(moves) < 2:
        return np.zeros(0)
    a, b = moves[:-1], moves[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    return np.abs(np.arctan2(cross, dot).astype(np.float64))


def length_of_moves(moves: np.ndarray, resolution: float) -> float:
    return math.fsum(segment_lengths(moves, resolution))


def count_turns(thetas: np.ndarray, threshold: float) -> int:
    return int(np.count_nonzero(thetas > threshold))


def smoothness_of(thetas: np.ndarray) -> float:
    if len(thetas) < 2:
        return 0.0
    return math.fsum(np.abs(np.diff(thetas)))


def curvature_std_of(moves: np.ndarray, resolution: float) -> float:
    if len(moves) < 2:
        raise DegeneratePath("Curvature needs at least three distinct \
points.")
    thetas = move_headings(moves)
    lengths = segment_lengths(moves, resolution)
    mean_adjacent = (lengths[:-1] + lengths[1:]) / 2.0
    return float(np.std(thetas / mean_adjacent))


def objectives_of_moves(moves: np.ndarray, resolution: float,
                        makespan: float,
                        threshold: float = DEFAULT_TURN_THRESHOLD
                        ) -> ObjectiveVector:
    '''The full objective vector of a move sequence. Curvature std is 0 for
    paths with fewer than three distinct points.'''
    thetas = move_headings(moves)
    curvature = curvature_std_of(moves, resolution) if len(moves) >= 2 \
        else 0.0
    return ObjectiveVector(length_of_moves(moves, resolution), makespan,
                           count_turns(thetas, threshold),
                           smoothness_of(thetas), curvature)


# ------- operations on trajectories -------
def path_length(trajectory: Trajectory, resolution: float) -> float:
    return length_of_moves(trajectory.moves, resolution)


def heading_changes(trajectory: Trajectory) -> typing.List[float]:
    '''Turning angle at each interior distinct position; waiting steps are
    skipped. Fewer than three distinct positions gives [].'''
    return [float(theta) for theta in move_headings(trajectory.moves)]


def turning_count(trajectory: Trajectory,
                  threshold: float = DEFAULT_TURN_THRESHOLD) -> int:
    return count_turns(move_headings(trajectory.moves), threshold)


def smoothness(trajectory: Trajectory) -> float:
    return smoothness_of(move_headings(trajectory.moves))


def curvature_std(trajectory: Trajectory, resolution: float) -> float:
    '''Population std of theta_i over the mean of the two adjacent segment
    lengths. Raises DegeneratePath below three distinct points.'''
    return curvature_std_of(trajectory.moves, resolution)


def makespan(trajectory: Trajectory) -> float:
    if not trajectory.task_visits:
        return 0.0
    return max(trajectory.arrival_times[index]
               for _, index in trajectory.task_visits)


def evaluate_trajectory(trajectory: Trajectory, resolution: float,
                        threshold: float = DEFAULT_TURN_THRESHOLD
                        ) -> ObjectiveVector:
    return objectives_of_moves(trajectory.moves, resolution,
                               makespan(trajectory), threshold)


def simulate_times(points, scenario: Scenario,
                   wait_policy: WaitPolicy = WaitPolicy.ALLOW,
                   route_order=None) -> Trajectory:
    '''Times a grid walk that starts at scenario.start.

    The walk is cut into runs at task visits. Inside a run the time at a
    point is run start + distance so far / speed; the visit at the end of
    a run is stamped run start + fsum(run segments) / speed, the same
    arithmetic the planners use when they filter tasks. If wait_policy is
    ALLOW and the robot is early, a waiting step is appended at the task
    cell, stamped window_start, and the visit points at it.

    With route_order (task ids), visits are matched in that order only;
    without it, the first arrival at any task cell is a visit. Repeated
    consecutive input points are collapsed.'''
    wait_policy = WaitPolicy(wait_policy)
    grid = scenario.map
    cells = [Cell(int(p[0]), int(p[1])) for p in points]
    if not cells or cells[0] != scenario.start:
        raise Disconnected("A route must begin at the scenario start cell.")
    walk = [cells[0]]
    for cell in cells[1:]:
        if cell == walk[-1]:
            continue
        if cell not in {n for n, _ in grid.neighbors(walk[-1])}:
            raise Disconnected(f"The route jumps from {tuple(walk[-1])} to \
{tuple(cell)}, which are not grid neighbors.")
        walk.append(cell)

    task_at = {task.cell: task for task in scenario.tasks}
    pending = list(route_order) if route_order is not None else None
    visited = set()
    out_points = [walk[0]]
    out_times = [0.0]
    visits = []
    run_start = 0.0
    run_segments = []
    distance = 0.0
    steps = segment_lengths(moves_of(walk), grid.resolution).tolist()
    for cell, step in zip(walk[1:], steps):
        run_segments.append(step)
        distance += step
        task = task_at.get(cell)
        is_visit = False
        if task is not None and task.id not in visited:
            if pending is None:
                is_visit = True
            elif pending and pending[0] == task.id:
                is_visit = True
                pending.pop(0)
        if not is_visit:
            out_points.append(cell)
            out_times.append(run_start + distance / scenario.speed)
            continue
        arrival = run_start + math.fsum(run_segments) / scenario.speed
        out_points.append(cell)
        out_times.append(arrival)
        if wait_policy == WaitPolicy.ALLOW and arrival < task.window_start:
            arrival = task.window_start
            out_points.append(cell)
            out_times.append(arrival)
        visits.append((task.id, len(out_points) - 1))
        visited.add(task.id)
        run_start = arrival
        run_segments = []
        distance = 0.0
    return Trajectory(tuple(out_points), tuple(out_times), tuple(visits))


def window_status(task, arrival: typing.Optional[float]) -> TaskStatus:
    if arrival is None:
        return TaskStatus.UNVISITED
    if arrival < task.window_start:
        return TaskStatus.MISSED_EARLY
    if arrival > task.window_end:
        return TaskStatus.MISSED_LATE
    return TaskStatus.MET


def check_windows(trajectory: Trajectory, tasks) -> FeasibilityReport:
    '''A task is met iff it is visited with window_start <= visit time <=
    window_end.'''
    entries = []
    for task in tasks:
        arrival = trajectory.visit_time(task.id)
        entries.append(TaskReport(task.id, window_status(task, arrival),
                                  arrival))
    return FeasibilityReport(tuple(entries))


def scalar_objective(vector: ObjectiveVector, weights: Weights,
                     norms: Norms) -> float:
    '''F = sum of w_k * f_k / norm_k.'''
    n1, n2, n3, n4 = norms.as_tuple() if isinstance(norms, Norms) \
        else tuple(norms)
    for value in (n1, n2, n3, n4):
        if not value > 0:
            raise NonPositiveNorm(f"Every normalisation constant must be \
positive, got {value!r}.")
    f1, f2, f3, f4 = vector.as_tuple()
    return weights.w1 * f1 / n1 + weights.w2 * f2 / n2 + \
        weights.w3 * f3 / n3 + weights.w4 * f4 / n4
