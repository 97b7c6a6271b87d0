'''
Turning a visiting order into a scored route.

Every planner (the colony, the greedy stitcher, the genetic algorithm and
the exhaustive oracle) hands task-node orders to a TourEvaluator and gets
AntSolution records back, so they all share one geometry and one clock:

    arrival at j = time at i + leg(i, j).length / speed

with an optional wait until the window opens. That same expression decides
which tasks are still allowed, so the filter and the timeline can never
disagree. The cell-level Trajectory is only assembled when someone asks
for it; its numbers are identical because the geometry comes from the same
move arrays.
'''
import functools
import logging
import typing
from dataclasses import dataclass, field

import numpy as np

from .legs import LegMatrix
from .objectives import (DEFAULT_TURN_THRESHOLD, FeasibilityReport, Norms,
                         ObjectiveVector, TaskReport, Trajectory,
                         WaitPolicy, Weights, objectives_of_moves,
                         scalar_objective, simulate_times, window_status)
from .world import Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AntSolution:
    '''One constructed route. visit_order holds task ids in visiting
    order; it may stop short of all tasks when none was still reachable in
    time.'''
    visit_order: typing.Tuple[int, ...]
    objectives: ObjectiveVector
    F: float
    feasibility: FeasibilityReport
    complete: bool
    nodes: typing.Tuple[int, ...] = field(compare=False, repr=False)
    evaluator: "TourEvaluator" = field(compare=False, repr=False)

    @property
    def completion_fraction(self) -> float:
        return self.feasibility.completion_fraction

    @property
    def rank_key(self) -> typing.Tuple[float, float]:
        '''Lower is better: more tasks met first, then lower F.'''
        return (-self.feasibility.completion_fraction, self.F)

    def better_than(self, other) -> bool:
        return other is None or self.rank_key < other.rank_key

    @property
    def route_cells(self):
        return self.evaluator.route_cells(self.nodes)

    @functools.cached_property
    def trajectory(self) -> Trajectory:
        return simulate_times(self.route_cells, self.evaluator.scenario,
                              self.evaluator.wait_policy, self.visit_order)

    def to_dict(self) -> dict:
        return {
            "visit_order": list(self.visit_order),
            "complete": self.complete,
            "F": self.F,
            "objectives": self.objectives.to_dict(),
            "feasibility": self.feasibility.to_dict(),
            "trajectory": {
                "cells": [[c.col, c.row] for c in self.trajectory.points],
                "arrival_times_s": list(self.trajectory.arrival_times),
                "task_visits": [[task_id, index] for task_id, index in
                                self.trajectory.task_visits],
            },
        }


class TourEvaluator:
    '''Scores task-node orders for one scenario, leg matrix, weighting and
    wait policy. Results are memoised per order; the memo is safe to share
    between threads because a given order always maps to the same value.'''

    def __init__(self, scenario: Scenario, legs: LegMatrix,
                 weights: typing.Optional[Weights] = None,
                 norms: typing.Optional[Norms] = None,
                 threshold: float = DEFAULT_TURN_THRESHOLD,
                 wait_policy=WaitPolicy.ALLOW):
        if legs.n_nodes != scenario.n_nodes:
            raise ValueError(f"The leg matrix covers {legs.n_nodes} nodes but \
the scenario has {scenario.n_nodes}.")
        self.scenario = scenario
        self.legs = legs
        self.weights = weights if weights is not None else Weights()
        self.norms = norms if norms is not None else \
            Norms.for_scenario(scenario)
        self.threshold = threshold
        self.wait_policy = WaitPolicy(wait_policy)
        self._speed = scenario.speed
        self._lengths = legs.lengths.tolist()
        self._window_start = [0.0] + [t.window_start for t in scenario.tasks]
        self._window_end = [0.0] + [t.window_end for t in scenario.tasks]
        self._ids = [None] + [t.id for t in scenario.tasks]
        self._memo = {}

    @property
    def n_nodes(self) -> int:
        return self.legs.n_nodes

    def task_id(self, node: int) -> int:
        return self._ids[node]

    def leg_length(self, i: int, j: int) -> float:
        return self._lengths[i][j]

    def window_end(self, node: int) -> float:
        return self._window_end[node]

    def arrival(self, time: float, i: int, j: int) -> float:
        return time + self._lengths[i][j] / self._speed

    def departure(self, node: int, arrival: float) -> float:
        '''Time the robot leaves a task it reached at arrival.'''
        if self.wait_policy == WaitPolicy.ALLOW and \
                arrival < self._window_start[node]:
            return self._window_start[node]
        return arrival

    def is_allowed(self, current: int, time: float, j: int) -> bool:
        arrival = self.arrival(time, current, j)
        if arrival > self._window_end[j]:
            return False
        if self.wait_policy == WaitPolicy.FORBID and \
                arrival < self._window_start[j]:
            return False
        return True

    def allowed(self, current: int, time: float, unvisited,
                filter_windows: bool = True) -> typing.List[int]:
        '''Unvisited task nodes, ascending, that can still be met when
        leaving current at time. filter_windows=False returns them all.'''
        nodes = sorted(unvisited)
        if not filter_windows:
            return nodes
        return [j for j in nodes if self.is_allowed(current, time, j)]

    def route_cells(self, nodes) -> list:
        cells = [self.scenario.start]
        previous = 0
        for node in nodes:
            cells.extend(self.legs.leg(previous, node).cells[1:])
            previous = node
        return cells

    def evaluate(self, nodes) -> AntSolution:
        '''Scores the route that visits every node of nodes in order, late
        or not.'''
        key = tuple(nodes)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        time = 0.0
        previous = 0
        visit_times = {}
        move_blocks = []
        for node in key:
            move_blocks.append(self.legs.leg(previous, node).moves)
            time = self.departure(node, self.arrival(time, previous, node))
            visit_times[node] = time
            previous = node
        moves = np.concatenate(move_blocks) if move_blocks else \
            np.zeros((0, 2), dtype=np.int64)
        vector = objectives_of_moves(moves, self.scenario.map.resolution,
                                     time if key else 0.0, self.threshold)
        entries = []
        for node, task in enumerate(self.scenario.tasks, start=1):
            arrival = visit_times.get(node)
            entries.append(TaskReport(task.id, window_status(task, arrival),
                                      arrival))
        report = FeasibilityReport(tuple(entries))
        solution = AntSolution(
            visit_order=tuple(self._ids[node] for node in key),
            objectives=vector,
            F=scalar_objective(vector, self.weights, self.norms),
            feasibility=report,
            complete=report.all_met,
            nodes=key,
            evaluator=self)
        self._memo[key] = solution
        return solution

    def decode(self, permutation) -> AntSolution:
        '''Repeatedly visits the first task of permutation that is still
        allowed, until none is. The routes this yields are exactly the
        routes a window-filtering ant can build.'''
        remaining = list(permutation)
        chosen = []
        current, time = 0, 0.0
        while remaining:
            for index, node in enumerate(remaining):
                if self.is_allowed(current, time, node):
                    break
            else:
                break
            remaining.pop(index)
            chosen.append(node)
            time = self.departure(node, self.arrival(time, current, node))
            current = node
        return self.evaluate(chosen)

    def nodes_of(self, visit_order) -> typing.List[int]:
        return [self.scenario.node_of(task_id) for task_id in visit_order]

