'''
The leg library: one collision-free grid path (a Leg) for every ordered
pair of task-graph nodes, node 0 being the start and node k the k-th task.

Planners never touch the grid directly. They choose a visiting order over
task nodes and the route is the concatenation of the legs along it, so the
expensive geometry is solved once per scenario here with a turn-aware A*.
'''
import hashlib
import heapq
import json
import logging
import math
import os
import typing
from dataclasses import dataclass, field

import numpy as np

from .errors import NoPath
from .objectives import (DEFAULT_TURN_THRESHOLD, count_turns,
                         length_of_moves, move_headings, moves_of,
                         smoothness_of)
from .runtime import parallel_map
from .world import Cell, GridMap, Scenario, save_scenario

logger = logging.getLogger(__name__)

# turn penalty per heading change, in cells; multiplied by the resolution
DEFAULT_TURN_WEIGHT_CELLS = 0.3
CACHE_VERSION = 1

_DIRECTIONS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1),
               (1, -1))
_DIRECTION_INDEX = {d: i for i, d in enumerate(_DIRECTIONS)}


def default_turn_weight(resolution: float) -> float:
    return DEFAULT_TURN_WEIGHT_CELLS * resolution


def _turn_table(threshold: float):
    '''turn_table[a][b] is True when going from direction a to b is a turn
    above threshold; angles come from the same code the objectives use.'''
    table = []
    for a in _DIRECTIONS:
        row = []
        for b in _DIRECTIONS:
            theta = move_headings(np.array([a, b], dtype=np.int64))[0]
            row.append(bool(theta > threshold))
        table.append(row)
    return table


def astar(map: GridMap, start, goal, turn_weight: float = 0.0,
          threshold: float = DEFAULT_TURN_THRESHOLD) -> typing.List[Cell]:
    '''Minimum-cost 8-connected path from start to goal, where cost is
    the Euclidean length plus turn_weight per heading change above
    threshold. The heuristic is the straight-line distance, admissible
    because turn costs are never negative. With turn_weight > 0 the search
    state is (cell, incoming heading).

    Ties in the open list go to lower f, then lower h, then the smaller
    (col, row), so equal inputs always give the same path.'''
    start, goal = Cell(*start), Cell(*goal)
    if not map.is_free(start) or not map.is_free(goal):
        raise NoPath(f"There is no path from {tuple(start)} to \
{tuple(goal)}: an endpoint is blocked or off the map.")
    if start == goal:
        return [start]
    if turn_weight < 0:
        raise ValueError(f"The turn weight must be non-negative, got \
{turn_weight}.")
    resolution = map.resolution
    turn_aware = turn_weight > 0
    turns = _turn_table(threshold) if turn_aware else None
    gc, gr = goal

    def h(cell):
        return math.hypot(cell[0] - gc, cell[1] - gr) * resolution

    origin = (start, -1)
    g_score = {origin: 0.0}
    parent = {origin: None}
    closed = set()
    h0 = h(start)
    open_list = [(h0, h0, start[0], start[1], -1)]
    while open_list:
        _, _, col, row, heading = heapq.heappop(open_list)
        cell = Cell(col, row)
        state = (cell, heading)
        if state in closed:
            continue
        closed.add(state)
        if cell == goal:
            return _reconstruct(parent, state)
        g = g_score[state]
        for neighbor, step in map.neighbors(cell):
            if turn_aware:
                direction = _DIRECTION_INDEX[(neighbor[0] - col,
                                              neighbor[1] - row)]
                cost = step + turn_weight if heading >= 0 and \
                    turns[heading][direction] else step
            else:
                direction = -1
                cost = step
            next_state = (neighbor, direction)
            if next_state in closed:
                continue
            tentative = g + cost
            if tentative < g_score.get(next_state, math.inf):
                g_score[next_state] = tentative
                parent[next_state] = state
                nh = h(neighbor)
                heapq.heappush(open_list, (tentative + nh, nh, neighbor[0],
                                           neighbor[1], direction))
    raise NoPath(f"There is no path from {tuple(start)} to {tuple(goal)}.")


def _reconstruct(parent, state) -> typing.List[Cell]:
    path = []
    while state is not None:
        path.append(state[0])
        state = parent[state]
    return path[::-1]


@dataclass(frozen=True)
class Leg:
    '''A grid path between two task-graph nodes and its aggregates.'''
    from_node: int
    to_node: int
    cells: typing.Tuple[Cell, ...]
    length: float
    turns: int
    smooth: float
    moves: np.ndarray = field(compare=False, repr=False)

    @classmethod
    def from_cells(cls, from_node: int, to_node: int, cells,
                   resolution: float,
                   threshold: float = DEFAULT_TURN_THRESHOLD):
        cells = tuple(Cell(*c) for c in cells)
        moves = moves_of(cells)
        moves.setflags(write=False)
        thetas = move_headings(moves)
        return cls(from_node, to_node, cells,
                   length_of_moves(moves, resolution),
                   count_turns(thetas, threshold), smoothness_of(thetas),
                   moves)


class LegMatrix:
    '''Dense table of legs over n_nodes task-graph nodes; the diagonal is
    empty. lengths and turns are the same data as n x n arrays.'''

    def __init__(self, n_nodes: int, legs: dict, turn_weight: float,
                 threshold: float):
        self._n_nodes = n_nodes
        self._legs = dict(legs)
        self._turn_weight = turn_weight
        self._threshold = threshold
        expected = n_nodes * n_nodes - n_nodes
        if len(self._legs) != expected:
            raise ValueError(f"A leg matrix over {n_nodes} nodes needs \
{expected} legs, got {len(self._legs)}.")
        self._lengths = np.zeros((n_nodes, n_nodes))
        self._turns = np.zeros((n_nodes, n_nodes), dtype=np.int64)
        for (i, j), leg in self._legs.items():
            self._lengths[i, j] = leg.length
            self._turns[i, j] = leg.turns
        self._lengths.setflags(write=False)
        self._turns.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self._n_nodes

    @property
    def n_legs(self) -> int:
        return len(self._legs)

    @property
    def turn_weight(self) -> float:
        return self._turn_weight

    @property
    def threshold(self) -> float:
        return self._threshold

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def turns(self) -> np.ndarray:
        return self._turns

    def leg(self, i: int, j: int) -> Leg:
        return self._legs[(i, j)]

    def legs(self) -> typing.List[Leg]:
        return [self._legs[key] for key in sorted(self._legs)]

    def __eq__(self, other):
        if not isinstance(other, LegMatrix):
            return NotImplemented
        return self._n_nodes == other._n_nodes and \
            self._legs == other._legs


def build_leg_matrix(scenario: Scenario, turn_weight=None,
                     threshold: float = DEFAULT_TURN_THRESHOLD,
                     threads=None) -> LegMatrix:
    '''Runs A* once per unordered node pair; the reverse leg is the same
    cells reversed, which has the same length and the same turns.'''
    grid = scenario.map
    if turn_weight is None:
        turn_weight = default_turn_weight(grid.resolution)
    cells = scenario.node_cells
    pairs = [(i, j) for i in range(len(cells)) for j in range(i + 1,
                                                               len(cells))]

    def solve(pair):
        i, j = pair
        try:
            return astar(grid, cells[i], cells[j], turn_weight, threshold)
        except NoPath as exc:
            raise RuntimeError(f"Leg {i}->{j} has no path although the \
scenario passed its reachability check: {exc}") from exc

    paths = parallel_map(solve, pairs, threads)
    legs = {}
    for (i, j), path in zip(pairs, paths):
        if any(not grid.is_free(c) for c in path):
            raise RuntimeError(f"Leg {i}->{j} crosses an obstacle.")
        legs[(i, j)] = Leg.from_cells(i, j, path, grid.resolution, threshold)
        legs[(j, i)] = Leg.from_cells(j, i, path[::-1], grid.resolution,
                                      threshold)
    logger.debug("built %d legs over %d nodes", len(legs), len(cells))
    return LegMatrix(len(cells), legs, turn_weight, threshold)


# ------- cache -------
def scenario_key(scenario: Scenario, turn_weight: float,
                 threshold: float) -> str:
    '''Content hash of everything a leg matrix depends on.'''
    digest = hashlib.sha256()
    digest.update(save_scenario(scenario).encode("utf-8"))
    digest.update(f"|{turn_weight!r}|{threshold!r}|{CACHE_VERSION}".encode(
        "utf-8"))
    return digest.hexdigest()


def save_leg_cache(path, matrix: LegMatrix, key: str):
    payload = {
        "key": key,
        "turn_weight": matrix.turn_weight,
        "threshold": matrix.threshold,
        "legs": [{"from": leg.from_node, "to": leg.to_node,
                  "cells": [[c.col, c.row] for c in leg.cells]}
                 for leg in matrix.legs() if leg.from_node < leg.to_node],
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh)


def read_leg_cache(path, scenario: Scenario, key: str):
    '''The cached matrix for key, or None when the file is for another
    scenario. Aggregates are recomputed from the cached cells, so a hit is
    identical to a fresh build.'''
    with open(path, "r") as fh:
        payload = json.load(fh)
    if payload.get("key") != key:
        logger.warning("leg cache %s belongs to another scenario, ignoring",
                       path)
        return None
    resolution = scenario.map.resolution
    threshold = payload["threshold"]
    legs = {}
    for entry in payload["legs"]:
        i, j, path_cells = entry["from"], entry["to"], entry["cells"]
        legs[(i, j)] = Leg.from_cells(i, j, path_cells, resolution, threshold)
        legs[(j, i)] = Leg.from_cells(j, i, path_cells[::-1], resolution,
                                      threshold)
    return LegMatrix(scenario.n_nodes, legs, payload["turn_weight"],
                     threshold)


def load_leg_matrix(scenario: Scenario, turn_weight=None,
                    threshold: float = DEFAULT_TURN_THRESHOLD,
                    cache_dir=None, threads=None) -> LegMatrix:
    '''build_leg_matrix with an optional on-disk cache keyed by scenario
    content.'''
    if turn_weight is None:
        turn_weight = default_turn_weight(scenario.map.resolution)
    if cache_dir is None:
        return build_leg_matrix(scenario, turn_weight, threshold, threads)
    key = scenario_key(scenario, turn_weight, threshold)
    path = os.path.join(cache_dir, f"legs-{key[:20]}.json")
    if os.path.exists(path):
        matrix = read_leg_cache(path, scenario, key)
        if matrix is not None:
            logger.info("leg cache hit %s", path)
            return matrix
    matrix = build_leg_matrix(scenario, turn_weight, threshold, threads)
    os.makedirs(cache_dir, exist_ok=True)
    save_leg_cache(path, matrix, key)
    logger.info("leg cache written %s", path)
    return matrix
