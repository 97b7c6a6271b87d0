'''
This module holds the world a logistics robot plans in: the occupancy grid
(GridMap), the grid Cell, the Task with its time window, and the Scenario
that ties a map, a start cell, a robot speed and a list of tasks together.

It also owns the on-disk formats:
(1) the map text format, a header line `map <width> <height> <resolution>`
followed by one line per row, `#` blocked and `.` free, row 0 on top;
(2) the scenario JSON object with keys `map`, `start`, `speed_mps`, `tasks`;
and the seeded generators for warehouse-like maps and task sets.

Every type here is immutable after construction.
'''
import json
import logging
import math
import os
import typing

import numpy as np
from scipy import ndimage

from .errors import (BlockedCell, DimensionMismatch, DuplicateId,
                     InsufficientFreeCells, InvalidWindow, MalformedHeader,
                     MalformedScenario, UnknownCell, Unreachable)

logger = logging.getLogger(__name__)

DEFAULT_WIDTH = 200
DEFAULT_HEIGHT = 200
DEFAULT_RESOLUTION = 0.1
DEFAULT_DENSITY = 0.15
DEFAULT_SPEED = 1.0
DEFAULT_WINDOW_LO = 5.0
DEFAULT_WINDOW_HI = 30.0

BLOCKED = "#"
FREE = "."
SQRT2 = math.sqrt(2.0)

# orthogonal moves first, then diagonals; the order fixes neighbor listing
_OFFSETS = ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1),
            (1, -1))


class Cell(typing.NamedTuple):
    '''A grid cell addressed by column and row (row 0 is the top row).'''
    col: int
    row: int


class GridMap:
    '''An occupancy grid with a physical resolution. occupancy is a dense
    boolean array indexed [col, row]; True means blocked. The array is
    copied and frozen on construction.'''

    def __init__(self, width_cells: int, height_cells: int, resolution: float,
                 occupancy=None):
        self._width_cells = self.validate_dimension(width_cells, "width")
        self._height_cells = self.validate_dimension(height_cells, "height")
        self._resolution = self.validate_resolution(resolution)
        if occupancy is None:
            grid = np.zeros((self._width_cells, self._height_cells), dtype=bool)
        else:
            grid = np.array(occupancy, dtype=bool)
        if grid.shape != (self._width_cells, self._height_cells):
            raise DimensionMismatch(f"The occupancy grid has shape \
{grid.shape} but the map is {self._width_cells}x{self._height_cells} cells.")
        grid.setflags(write=False)
        self._occupancy = grid
        self._free = (~grid).tolist()
        self._adjacency = {}
        self._labels = None

    @staticmethod
    def validate_dimension(value, name: str) -> int:
        if type(value) == int and value > 0:
            return value
        raise DimensionMismatch(f"The map {name} must be a positive whole \
number of cells, got {value!r}.")

    @staticmethod
    def validate_resolution(value) -> float:
        try:
            resolution = float(value)
        except (TypeError, ValueError):
            resolution = float("nan")
        if math.isfinite(resolution) and resolution > 0:
            return resolution
        raise MalformedHeader(f"The resolution must be a positive number of \
meters per cell, got {value!r}.")

    @property
    def width_cells(self) -> int:
        return self._width_cells

    @property
    def height_cells(self) -> int:
        return self._height_cells

    @property
    def resolution(self) -> float:
        return self._resolution

    @property
    def occupancy(self) -> np.ndarray:
        '''The read-only [col, row] boolean grid.'''
        return self._occupancy

    @property
    def width_m(self) -> float:
        return self._width_cells * self._resolution

    @property
    def height_m(self) -> float:
        return self._height_cells * self._resolution

    @property
    def diagonal_m(self) -> float:
        return math.hypot(self.width_m, self.height_m)

    @property
    def density(self) -> float:
        '''The blocked fraction of the map.'''
        return float(np.count_nonzero(self._occupancy)) / self._occupancy.size

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self._width_cells and \
            0 <= cell[1] < self._height_cells

    def is_free(self, cell) -> bool:
        '''True if the cell is inside the map and not blocked.'''
        return self.in_bounds(cell) and self._free[cell[0]][cell[1]]

    def free_cells(self) -> typing.List[Cell]:
        '''All free cells ordered by (col, row).'''
        return [Cell(int(c), int(r)) for c, r in np.argwhere(~self._occupancy)]

    def neighbors(self, cell) -> typing.Tuple[typing.Tuple[Cell, float], ...]:
        '''The 8-connected free neighbors of a free cell with their step
        lengths in meters. A diagonal move is only listed when both
        orthogonal cells it passes between are free (no corner cutting).
        A blocked or out-of-bounds cell has no neighbors.'''
        cached = self._adjacency.get(cell)
        if cached is not None:
            return cached
        result = []
        if self.is_free(cell):
            col, row = cell
            for dc, dr in _OFFSETS:
                target = (col + dc, row + dr)
                if not self.is_free(target):
                    continue
                if dc != 0 and dr != 0:
                    if not (self._free[col + dc][row] and
                            self._free[col][row + dr]):
                        continue
                    step = self._resolution * SQRT2
                else:
                    step = self._resolution
                result.append((Cell(*target), step))
        neighbors = tuple(result)
        self._adjacency[Cell(*cell)] = neighbors
        return neighbors

    @property
    def component_labels(self) -> np.ndarray:
        '''Connected-component labels of the free cells (0 on obstacles).
        Without corner cutting, 8-connected reachability is exactly
        4-connected reachability, which is ndimage.label's default.'''
        if self._labels is None:
            labels, _ = ndimage.label(~self._occupancy)
            labels.setflags(write=False)
            self._labels = labels
        return self._labels

    def reachable(self, a, b) -> bool:
        '''True if free cells a and b lie in the same component.'''
        if not (self.is_free(a) and self.is_free(b)):
            return False
        labels = self.component_labels
        return labels[a[0], a[1]] == labels[b[0], b[1]]

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return self._width_cells == other._width_cells and \
            self._height_cells == other._height_cells and \
            self._resolution == other._resolution and \
            np.array_equal(self._occupancy, other._occupancy)

    def __hash__(self):
        return hash((self._width_cells, self._height_cells, self._resolution,
                     self._occupancy.tobytes()))

    def __repr__(self):
        return f"GridMap({self._width_cells}x{self._height_cells} @ \
{self._resolution} m, density {self.density:.3f})"


class Task:
    '''A delivery or pick-up point: an id, a cell, and the time window
    [window_start, window_end] (seconds) within which the robot must
    arrive. window_end may be infinite.'''

    def __init__(self, id: int, cell, window_start: float, window_end: float):
        if type(id) != int or id < 0:
            raise MalformedScenario(f"A task id must be a non-negative whole \
number, got {id!r}.")
        self._id = id
        self._cell = Cell(int(cell[0]), int(cell[1]))
        self._window_start, self._window_end = self.validate_window(
            window_start, window_end)

    def validate_window(self, window_start, window_end):
        '''The window must start at or after 0 s and end strictly after it
        starts.'''
        start, end = float(window_start), float(window_end)
        if math.isnan(start) or math.isnan(end) or start < 0 or \
                math.isinf(start) or start >= end:
            raise InvalidWindow(f"Task {self._id} has an invalid time window \
[{window_start}, {window_end}]. It should start at 0 s or later and end \
after it starts.")
        return start, end

    @property
    def id(self) -> int:
        return self._id

    @property
    def cell(self) -> Cell:
        return self._cell

    @property
    def window_start(self) -> float:
        return self._window_start

    @property
    def window_end(self) -> float:
        return self._window_end

    def __eq__(self, other):
        if not isinstance(other, Task):
            return NotImplemented
        return (self._id, self._cell, self._window_start, self._window_end) \
            == (other._id, other._cell, other._window_start, other._window_end)

    def __hash__(self):
        return hash((self._id, self._cell, self._window_start,
                     self._window_end))

    def __repr__(self):
        return f"Task({self._id}, {tuple(self._cell)}, \
[{self._window_start}, {self._window_end}])"


class Scenario:
    '''One planning problem: a map, a free start cell, the robot speed in
    m/s and an ordered list of tasks. Construction validates everything a
    planner relies on, including that each task is reachable from start.

    Node ids used by the planners: 0 is the start, k is the k-th task of
    the list (1-based).'''

    def __init__(self, map: GridMap, start, speed: float, tasks):
        if not isinstance(map, GridMap):
            raise MalformedScenario("A scenario needs a GridMap.")
        self._map = map
        self._start = Cell(int(start[0]), int(start[1]))
        self._speed = self.validate_speed(speed)
        self._tasks = tuple(tasks)
        self.validate_tasks()

    @staticmethod
    def validate_speed(speed) -> float:
        value = float(speed)
        if math.isfinite(value) and value > 0:
            return value
        raise MalformedScenario(f"The robot speed must be a positive number \
of meters per second, got {speed!r}.")

    def validate_tasks(self):
        '''Checks, in order: start on the map and free; at least one task;
        distinct ids; every task cell on the map and free; task cells
        distinct from each other and from start; every task reachable.'''
        if not self._map.in_bounds(self._start):
            raise MalformedScenario(f"The start cell {tuple(self._start)} is \
outside the map.")
        if not self._map.is_free(self._start):
            raise BlockedCell(f"The start cell {tuple(self._start)} is on an \
obstacle.")
        if len(self._tasks) == 0:
            raise MalformedScenario("A scenario needs at least one task.")
        seen_ids = set()
        seen_cells = {self._start}
        for task in self._tasks:
            if not isinstance(task, Task):
                raise MalformedScenario("Only Task objects may be added to a \
scenario.")
            if task.id in seen_ids:
                raise DuplicateId(f"The task id {task.id} is used more than \
once.")
            seen_ids.add(task.id)
            if not self._map.in_bounds(task.cell):
                raise MalformedScenario(f"Task {task.id} at \
{tuple(task.cell)} is outside the map.")
            if not self._map.is_free(task.cell):
                raise BlockedCell(f"Task {task.id} at {tuple(task.cell)} is \
on an obstacle.")
            if task.cell in seen_cells:
                raise MalformedScenario(f"Task {task.id} shares its cell \
{tuple(task.cell)} with the start or another task.")
            seen_cells.add(task.cell)
        for task in self._tasks:
            if not self._map.reachable(self._start, task.cell):
                raise Unreachable(task.id)

    @property
    def map(self) -> GridMap:
        return self._map

    @property
    def start(self) -> Cell:
        return self._start

    @property
    def speed(self) -> float:
        return self._speed

    @property
    def tasks(self) -> typing.Tuple[Task, ...]:
        return self._tasks

    @property
    def n_tasks(self) -> int:
        return len(self._tasks)

    @property
    def n_nodes(self) -> int:
        return len(self._tasks) + 1

    def node_cell(self, node: int) -> Cell:
        return self._start if node == 0 else self._tasks[node - 1].cell

    @property
    def node_cells(self) -> typing.List[Cell]:
        return [self._start] + [task.cell for task in self._tasks]

    def node_of(self, task_id: int) -> int:
        for index, task in enumerate(self._tasks):
            if task.id == task_id:
                return index + 1
        raise KeyError(task_id)

    def task_of(self, node: int) -> Task:
        return self._tasks[node - 1]

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self._map == other._map and self._start == other._start and \
            self._speed == other._speed and self._tasks == other._tasks

    def __hash__(self):
        return hash((self._map, self._start, self._speed, self._tasks))

    def __repr__(self):
        return f"Scenario({self._map!r}, start={tuple(self._start)}, \
speed={self._speed}, tasks={len(self._tasks)})"


# ------- map text format -------
def load_map(text) -> GridMap:
    '''Parses the map text format. Accepts a string or anything with a
    read() method.'''
    if hasattr(text, "read"):
        text = text.read()
    lines = text.split("\n")
    if len(lines) > 1 and lines[-1] == "":
        lines = lines[:-1]
    width, height, resolution = _parse_header(lines[0])
    rows = lines[1:]
    for row_index, line in enumerate(rows):
        for col_index, char in enumerate(line):
            if char not in (BLOCKED, FREE):
                raise UnknownCell(f"Unknown map character {char!r} at column \
{col_index}, row {row_index}. Only '#' and '.' are allowed.")
    if len(rows) != height:
        raise DimensionMismatch(f"The header promises {height} rows but the \
map has {len(rows)}.")
    occupancy = np.zeros((width, height), dtype=bool)
    for row_index, line in enumerate(rows):
        if len(line) != width:
            raise DimensionMismatch(f"Row {row_index} has {len(line)} cells \
but the header promises {width}.")
        occupancy[:, row_index] = [char == BLOCKED for char in line]
    return GridMap(width, height, resolution, occupancy)


def _parse_header(line: str):
    parts = line.split()
    if len(parts) != 4 or parts[0] != "map":
        raise MalformedHeader(f"The first line should read 'map <width> \
<height> <resolution>', got {line!r}.")
    try:
        width, height = int(parts[1]), int(parts[2])
    except ValueError:
        raise MalformedHeader(f"The map width and height must be whole \
numbers, got {parts[1]!r} and {parts[2]!r}.") from None
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"The map width and height must be positive, \
got {width} and {height}.")
    resolution = GridMap.validate_resolution(parts[3])
    return width, height, resolution


def save_map(map: GridMap) -> str:
    '''Writes the map text format; load_map(save_map(m)) == m.'''
    lines = [f"map {map.width_cells} {map.height_cells} {map.resolution!r}"]
    occupancy = map.occupancy
    for row in range(map.height_cells):
        lines.append("".join(BLOCKED if blocked else FREE
                             for blocked in occupancy[:, row]))
    return "\n".join(lines) + "\n"


def read_map_file(path) -> GridMap:
    with open(path, "r") as fh:
        return load_map(fh)


def write_map_file(path, map: GridMap):
    with open(path, "w", newline="\n") as fh:
        fh.write(save_map(map))


# ------- scenario JSON -------
def load_scenario(text, base_dir=None) -> Scenario:
    '''Parses the scenario JSON. The `map` key holds either inline map
    text (starting with "map ") or a path to a map file, resolved against
    base_dir when relative.'''
    if hasattr(text, "read"):
        text = text.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedScenario(f"The scenario is not valid JSON: {exc}.") \
            from None
    if not isinstance(data, dict):
        raise MalformedScenario("The scenario must be a JSON object.")
    try:
        map_ref = data["map"]
        if not isinstance(map_ref, str):
            raise MalformedScenario("The scenario 'map' must be map text or \
a file path.")
        if map_ref.lstrip().startswith("map "):
            grid = load_map(map_ref)
        else:
            path = map_ref
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            grid = read_map_file(path)
        start = _parse_cell(data["start"], "start")
        speed = data.get("speed_mps", DEFAULT_SPEED)
        if type(speed) not in (int, float):
            raise MalformedScenario("The scenario 'speed_mps' must be a \
number.")
        raw_tasks = data["tasks"]
        if not isinstance(raw_tasks, list):
            raise MalformedScenario("The scenario 'tasks' must be a list.")
        tasks = []
        for raw in raw_tasks:
            window = raw["window"]
            if isinstance(window, list) and len(window) == 2 and \
                    window[1] is None:
                window = [window[0], math.inf]
            if not isinstance(window, list) or len(window) != 2 or \
                    any(type(value) not in (int, float) for value in window):
                raise MalformedScenario(f"Task {raw.get('id')!r} needs a \
window [start_s, end_s].")
            tasks.append(Task(raw["id"], _parse_cell(raw["cell"], "cell"),
                              window[0], window[1]))
    except KeyError as exc:
        raise MalformedScenario(f"The scenario is missing the key \
{exc.args[0]!r}.") from None
    except (TypeError, AttributeError) as exc:
        raise MalformedScenario(f"The scenario has a value of the wrong \
type: {exc}.") from None
    return Scenario(grid, start, speed, tasks)


def _parse_cell(value, name: str) -> Cell:
    if not isinstance(value, list) or len(value) != 2 or \
            any(type(v) != int for v in value):
        raise MalformedScenario(f"The {name} must be a [col, row] pair of \
whole numbers, got {value!r}.")
    return Cell(value[0], value[1])


def scenario_to_dict(scenario: Scenario, map_ref=None) -> dict:
    return {
        "map": save_map(scenario.map) if map_ref is None else str(map_ref),
        "start": [scenario.start.col, scenario.start.row],
        "speed_mps": scenario.speed,
        "tasks": [{"id": task.id, "cell": [task.cell.col, task.cell.row],
                   "window": [task.window_start, None if
                              math.isinf(task.window_end) else
                              task.window_end]}
                  for task in scenario.tasks],
    }


def save_scenario(scenario: Scenario, map_ref=None) -> str:
    '''Writes the scenario JSON with the map inline, or as map_ref when one
    is given. An open-ended window is written with a null end.
    load_scenario(save_scenario(s)) == s.'''
    return json.dumps(scenario_to_dict(scenario, map_ref), indent=2,
                      allow_nan=False) + "\n"


def read_scenario_file(path) -> Scenario:
    with open(path, "r") as fh:
        return load_scenario(fh, base_dir=os.path.dirname(os.path.abspath(
            path)))


def write_scenario_file(path, scenario: Scenario, map_ref=None):
    with open(path, "w", newline="\n") as fh:
        fh.write(save_scenario(scenario, map_ref))


# ------- generators -------
def generate_map(seed: int, width: int = DEFAULT_WIDTH,
                 height: int = DEFAULT_HEIGHT,
                 resolution: float = DEFAULT_RESOLUTION,
                 density: float = DEFAULT_DENSITY, min_side: int = 2,
                 max_side: int = 10) -> GridMap:
    '''A warehouse-like map: seeded axis-aligned rectangular "shelves" of
    min_side..max_side cells per side are dropped until the blocked
    fraction reaches density.'''
    if not 0.0 <= density < 1.0:
        raise InsufficientFreeCells(f"The obstacle density must be in \
[0, 1), got {density}.")
    if min_side < 1 or max_side < min_side:
        raise DimensionMismatch(f"The shelf sides must satisfy \
1 <= min_side <= max_side, got {min_side} and {max_side}.")
    grid = GridMap(width, height, resolution)
    occupancy = np.zeros((width, height), dtype=bool)
    target = int(math.ceil(density * width * height))
    rng = np.random.default_rng(seed)
    side_limit = min(width, height)
    if target > 0 and min_side > side_limit:
        raise DimensionMismatch(f"A {width}x{height} map cannot hold shelves \
of {min_side} cells per side.")
    hi_side = min(max_side, side_limit)
    blocked = 0
    while blocked < target:
        w = int(rng.integers(min_side, hi_side + 1))
        h = int(rng.integers(min_side, hi_side + 1))
        c0 = int(rng.integers(0, width - w + 1))
        r0 = int(rng.integers(0, height - h + 1))
        occupancy[c0:c0 + w, r0:r0 + h] = True
        blocked = int(np.count_nonzero(occupancy))
    logger.debug("generated %dx%d map, seed %d, density %.3f", width, height,
                 seed, blocked / occupancy.size)
    return GridMap(grid.width_cells, grid.height_cells, grid.resolution,
                   occupancy)


def generate_scenario(seed: int, map: GridMap, n_tasks: int,
                      window_lo: float = DEFAULT_WINDOW_LO,
                      window_hi: float = DEFAULT_WINDOW_HI,
                      speed: float = DEFAULT_SPEED) -> Scenario:
    '''Draws a start cell and n_tasks distinct task cells from the largest
    connected free region, then one window per task: t_start uniform in
    [window_lo, window_hi - 1], t_end uniform in (t_start, window_hi].
    A pure function of its arguments.'''
    if type(n_tasks) != int or n_tasks < 1:
        raise InsufficientFreeCells(f"The number of tasks must be a positive \
whole number, got {n_tasks!r}.")
    if not window_hi - 1.0 >= window_lo >= 0.0:
        raise InvalidWindow(f"The window range [{window_lo}, {window_hi}] \
must start at 0 s or later and span at least one second.")
    labels = map.component_labels
    counts = np.bincount(labels.ravel())
    counts[0] = 0
    largest = int(np.argmax(counts))
    if largest == 0 or counts[largest] < n_tasks + 1:
        raise InsufficientFreeCells(f"The map has no connected free region \
with {n_tasks + 1} cells for a start and {n_tasks} tasks.")
    candidates = np.argwhere(labels == largest)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(candidates), size=n_tasks + 1, replace=False)
    cells = [Cell(int(candidates[i][0]), int(candidates[i][1]))
             for i in picks]
    tasks = []
    for task_id, cell in enumerate(cells[1:], start=1):
        t_start = float(rng.uniform(window_lo, window_hi - 1.0))
        t_end = min(t_start + (window_hi - t_start) * (1.0 - rng.random()),
                    window_hi)
        if t_end <= t_start:
            t_end = window_hi
        tasks.append(Task(task_id, cell, t_start, t_end))
    return Scenario(map, cells[0], speed, tasks)


def neighbors(map: GridMap, cell) -> typing.List[typing.Tuple[Cell, float]]:
    '''8-connected free neighbors of cell with step lengths in meters.'''
    return list(map.neighbors(cell))
