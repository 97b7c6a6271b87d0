'''
Command line entry point and benchmark harness.

Subcommands:

    plan          run one planner on one scenario file
    gen-map       write a seeded warehouse-like map
    gen-scenario  write a seeded scenario over a map file
    bench         run comparative suites, one per obstacle density tier

Exit codes: 0 success, 2 bad input (missing file, malformed JSON, unknown
algorithm, out-of-range parameter), 3 internal error.
'''
import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
import time
import typing
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import aco, baselines
from .aco import AcoParams, ConvergenceTrace
from .baselines import GaParams
from .errors import InvalidConfig, InvalidParameter, UnknownAlgorithm
from .legs import LegMatrix, load_leg_matrix
from .objectives import DEFAULT_TURN_THRESHOLD, Norms, WaitPolicy, Weights
from .runtime import configure_logging
from .tour import AntSolution
from .world import (DEFAULT_DENSITY, DEFAULT_HEIGHT, DEFAULT_RESOLUTION,
                    DEFAULT_SPEED, DEFAULT_WIDTH, DEFAULT_WINDOW_HI,
                    DEFAULT_WINDOW_LO, Scenario, Task, generate_map,
                    generate_scenario, read_map_file, read_scenario_file,
                    write_map_file, write_scenario_file)

logger = logging.getLogger(__name__)

ALGORITHMS = ("aco", "aco_classic", "astar_greedy", "ga", "exhaustive")
DETERMINISTIC = ("astar_greedy", "exhaustive")
TRACED = ("aco", "aco_classic", "ga")
DEFAULT_ALGORITHMS = ("aco", "astar_greedy", "ga")
DEFAULT_DENSITIES = (0.05, 0.15, 0.30)
DEFAULT_TRIALS = 50
GEN_MIN_TASKS = 5
GEN_MAX_TASKS = 20

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3

METRICS = ("length_m", "travel_time_s", "compute_time_s", "turning_count",
           "smoothness_rad", "curvature_std", "completion_pct")
RAW_HEADER = ("scenario", "algorithm", "trial", "seed", "status") + \
    METRICS + ("F", "visit_order", "error")
CONVERGENCE_HEADER = ("iteration", "mean_best_F", "mean_best_length_m",
                      "mean_best_completion", "runs")


def derive_seed(*parts) -> int:
    '''A 63-bit seed from the given parts, stable across runs and
    platforms.'''
    text = "|".join(str(part) for part in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


def check_algorithm(name: str) -> str:
    if name not in ALGORITHMS:
        raise UnknownAlgorithm(f"Unknown algorithm {name!r}; expected one of \
{', '.join(ALGORITHMS)}.")
    return name


# ------- running one planner -------
@dataclass
class RunResult:
    solution: AntSolution
    trace: typing.Optional[ConvergenceTrace]
    compute_time_s: float


def run_planner(algorithm: str, scenario: Scenario, legs: LegMatrix,
                aco_params: AcoParams, ga_params: GaParams,
                norms: typing.Optional[Norms] = None,
                threads=None) -> RunResult:
    '''Runs one planner over a prebuilt leg matrix; only the planner call
    is timed.'''
    check_algorithm(algorithm)
    started = time.perf_counter()
    trace = None
    if algorithm == "aco":
        solution, trace = aco.plan(scenario, aco_params, legs, norms,
                                   threads)
    elif algorithm == "aco_classic":
        solution, trace = aco.plan(scenario, aco_params.as_classic(), legs,
                                   norms, threads)
    elif algorithm == "ga":
        solution, trace = baselines.ga_plan(scenario, legs, ga_params,
                                            norms=norms)
    elif algorithm == "astar_greedy":
        solution = baselines.astar_greedy_plan(
            scenario, legs, aco_params.weights, norms, aco_params.wait_policy,
            aco_params.turn_threshold)
    else:
        solution = baselines.exhaustive_plan(
            scenario, legs, aco_params.weights, norms, aco_params.wait_policy,
            aco_params.turn_threshold)
    return RunResult(solution, trace, time.perf_counter() - started)


def metrics_of(run: RunResult) -> typing.Dict[str, float]:
    vector = run.solution.objectives
    return {"length_m": vector.f1_length,
            "travel_time_s": vector.f2_makespan,
            "compute_time_s": run.compute_time_s,
            "turning_count": float(vector.f3_turns),
            "smoothness_rad": vector.f4_smoothness,
            "curvature_std": vector.curvature_std,
            "completion_pct": 100.0 * run.solution.completion_fraction}


# ------- configuration -------
@dataclass(frozen=True)
class ScenarioSpec:
    '''One benchmark scenario: a map file, or a generated map when map is
    None, plus the seeded task draw over it. shared_window gives every
    task the window [window_lo, window_hi] instead of a random one.'''
    seed: int = 0
    n_tasks: int = 8
    map: typing.Optional[str] = None
    map_seed: typing.Optional[int] = None
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    resolution: float = DEFAULT_RESOLUTION
    density: float = DEFAULT_DENSITY
    window_lo: float = DEFAULT_WINDOW_LO
    window_hi: float = DEFAULT_WINDOW_HI
    speed: float = DEFAULT_SPEED
    shared_window: bool = False

    @classmethod
    def from_dict(cls, data: dict):
        return cls(**_config_fields(cls, data))

    def to_dict(self) -> dict:
        return asdict(self)

    def build(self, base_dir=None) -> Scenario:
        if self.map is not None:
            path = self.map
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            grid = read_map_file(path)
        else:
            map_seed = self.map_seed if self.map_seed is not None else \
                self.seed
            grid = generate_map(map_seed, self.width, self.height,
                                self.resolution, self.density)
        scenario = generate_scenario(self.seed, grid, self.n_tasks,
                                     self.window_lo, self.window_hi,
                                     self.speed)
        if not self.shared_window:
            return scenario
        return Scenario(grid, scenario.start, scenario.speed,
                        [Task(t.id, t.cell, self.window_lo, self.window_hi)
                         for t in scenario.tasks])


@dataclass(frozen=True)
class BenchConfig:
    '''A suite: scenarios x algorithms x trials. weights, wait_policy and
    the turn settings apply to every algorithm; norms holds optional
    overrides of f1..f4.'''
    scenarios: typing.Tuple[ScenarioSpec, ...] = ()
    algorithms: typing.Tuple[str, ...] = DEFAULT_ALGORITHMS
    trials_per_cell: int = DEFAULT_TRIALS
    aco: AcoParams = field(default_factory=AcoParams)
    ga: GaParams = field(default_factory=GaParams)
    weights: Weights = field(default_factory=Weights)
    norms: typing.Optional[typing.Dict[str, float]] = None
    wait_policy: WaitPolicy = WaitPolicy.ALLOW
    turn_threshold: float = DEFAULT_TURN_THRESHOLD
    turn_weight: typing.Optional[float] = None
    output_dir: str = "bench_out"
    cache_dir: typing.Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.scenarios:
            raise InvalidConfig("A benchmark needs at least one scenario.")
        if not self.algorithms:
            raise InvalidConfig("A benchmark needs at least one algorithm.")
        for name in self.algorithms:
            check_algorithm(name)
        if type(self.trials_per_cell) != int or self.trials_per_cell < 1:
            raise InvalidConfig(f"trials_per_cell must be at least 1, got \
{self.trials_per_cell!r}.")
        if self.norms is not None:
            unknown = sorted(set(self.norms) - {"f1", "f2", "f3", "f4"})
            if unknown:
                raise InvalidConfig(f"Unknown norm keys: \
{', '.join(unknown)}.")
        object.__setattr__(self, "wait_policy", aco.wait_policy_from(
            self.wait_policy))

    @classmethod
    def from_dict(cls, data: dict):
        values = _config_fields(cls, data)
        if "scenarios" in values:
            values["scenarios"] = [ScenarioSpec.from_dict(s)
                                   for s in values["scenarios"]]
        if "aco" in values:
            values["aco"] = AcoParams.from_dict(values["aco"])
        if "ga" in values:
            values["ga"] = GaParams.from_dict(values["ga"])
        if "weights" in values:
            values["weights"] = aco.weights_from(values["weights"])
        try:
            return cls(**values)
        except TypeError as exc:
            raise InvalidConfig(f"Bad benchmark configuration: {exc}") \
                from exc

    @classmethod
    def load(cls, path):
        with open(path, "r") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"scenarios": [s.to_dict() for s in self.scenarios],
                "algorithms": list(self.algorithms),
                "trials_per_cell": self.trials_per_cell,
                "aco": self.aco.to_dict(), "ga": self.ga.to_dict(),
                "weights": list(self.weights.as_tuple()),
                "norms": self.norms, "wait_policy": self.wait_policy.value,
                "turn_threshold": self.turn_threshold,
                "turn_weight": self.turn_weight,
                "output_dir": self.output_dir, "cache_dir": self.cache_dir,
                "seed": self.seed}

    def aco_params(self, seed: int) -> AcoParams:
        return replace(self.aco, seed=seed, weights=self.weights,
                       wait_policy=self.wait_policy,
                       turn_threshold=self.turn_threshold,
                       turn_weight=self.turn_weight)

    def ga_params(self, seed: int) -> GaParams:
        return replace(self.ga, seed=seed, weights=self.weights,
                       wait_policy=self.wait_policy,
                       turn_threshold=self.turn_threshold,
                       turn_weight=self.turn_weight)


def _config_fields(cls, data: dict) -> dict:
    if not isinstance(data, dict):
        raise InvalidConfig(f"{cls.__name__} must be a JSON object.")
    known = set(cls.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidConfig(f"Unknown {cls.__name__} keys: \
{', '.join(unknown)}.")
    return dict(data)


# ------- the suite -------
@dataclass
class BenchRow:
    '''Aggregate over every successful run of one method. std is the
    population standard deviation.'''
    method: str
    n_runs: int
    n_failed: int
    means: typing.Dict[str, float]
    stds: typing.Dict[str, float]

    def to_row(self) -> list:
        row = [self.method, self.n_runs, self.n_failed]
        for metric in METRICS:
            row.extend([self.means[metric], self.stds[metric]])
        return row


def aggregate_header() -> list:
    header = ["method", "n_runs", "n_failed"]
    for metric in METRICS:
        header.extend([f"{metric}_mean", f"{metric}_std"])
    return header


def aggregate(method: str, raw_rows: typing.List[dict]) -> BenchRow:
    ok = [row for row in raw_rows if row["status"] == "ok"]
    means, stds = {}, {}
    for metric in METRICS:
        values = np.array([row[metric] for row in ok], dtype=float)
        means[metric] = float(np.mean(values)) if len(values) else math.nan
        stds[metric] = float(np.std(values)) if len(values) else math.nan
    return BenchRow(method, len(ok), len(raw_rows) - len(ok), means, stds)


def mean_trace(traces: typing.List[ConvergenceTrace]) -> typing.List[list]:
    '''Iteration-wise mean of equally long traces.'''
    if not traces:
        return []
    f = np.mean([t.best_F for t in traces], axis=0)
    length = np.mean([t.best_length for t in traces], axis=0)
    completion = np.mean([t.best_completion for t in traces], axis=0)
    return [[iteration, float(f[k]), float(length[k]), float(completion[k]),
             len(traces)] for k, iteration in enumerate(traces[0].iterations)]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _raw_row(index, algorithm, trial, seed, run=None, error=None) -> dict:
    row = {"scenario": index, "algorithm": algorithm, "trial": trial,
           "seed": seed}
    if run is None:
        row.update({"status": "failed", "F": "", "visit_order": "",
                    "error": error})
        row.update({metric: "" for metric in METRICS})
        return row
    row.update(metrics_of(run))
    row.update({"status": "ok", "F": run.solution.F,
                "visit_order": " ".join(str(i) for i in
                                        run.solution.visit_order),
                "error": ""})
    return row


def run_suite(config: BenchConfig, threads=None,
              base_dir=None) -> typing.List[BenchRow]:
    '''Runs every (scenario, algorithm, trial) cell and writes
    raw_runs.csv, aggregate.csv and convergence_<algorithm>.csv into
    config.output_dir. Deterministic planners run once per scenario and
    their result fills every trial row. A failing run becomes a failed row.'''
    os.makedirs(config.output_dir, exist_ok=True)
    raw = {algorithm: [] for algorithm in config.algorithms}
    traces = {algorithm: [] for algorithm in config.algorithms}
    for index, spec in enumerate(config.scenarios):
        scenario = spec.build(base_dir)
        legs = load_leg_matrix(scenario, config.turn_weight,
                               config.turn_threshold, config.cache_dir,
                               threads)
        norms = Norms.for_scenario(scenario, **(config.norms or {}))
        logger.info("scenario %d: %d tasks on %dx%d", index, scenario.n_tasks,
                    scenario.map.width_cells, scenario.map.height_cells)
        for algorithm in config.algorithms:
            cached = None
            for trial in range(config.trials_per_cell):
                seed = derive_seed(config.seed, index, algorithm, trial)
                try:
                    if algorithm in DETERMINISTIC and cached is not None:
                        run = cached
                    else:
                        run = run_planner(algorithm, scenario, legs,
                                          config.aco_params(seed),
                                          config.ga_params(seed), norms,
                                          threads)
                        cached = run
                except Exception as exc:
                    logger.warning("scenario %d %s trial %d failed: %s",
                                   index, algorithm, trial, exc)
                    raw[algorithm].append(_raw_row(index, algorithm, trial,
                                                   seed, error=str(exc)))
                    continue
                raw[algorithm].append(_raw_row(index, algorithm, trial, seed,
                                               run))
                if run.trace is not None:
                    traces[algorithm].append(run.trace)
    rows = [aggregate(algorithm, raw[algorithm])
            for algorithm in config.algorithms]
    out = config.output_dir
    order = {algorithm: i for i, algorithm in enumerate(config.algorithms)}
    ordered = sorted((row for algorithm in config.algorithms
                      for row in raw[algorithm]),
                     key=lambda r: (r["scenario"], order[r["algorithm"]],
                                    r["trial"]))
    _write_csv(os.path.join(out, "raw_runs.csv"), RAW_HEADER,
               [[row[column] for column in RAW_HEADER] for row in ordered])
    _write_csv(os.path.join(out, "aggregate.csv"), aggregate_header(),
               [row.to_row() for row in rows])
    for algorithm in config.algorithms:
        if algorithm in TRACED:
            _write_csv(os.path.join(out, f"convergence_{algorithm}.csv"),
                       CONVERGENCE_HEADER, mean_trace(traces[algorithm]))
    logger.info("suite written to %s", out)
    return rows


def read_raw_runs(path) -> typing.List[dict]:
    '''raw_runs.csv back as dicts, metrics as floats for successful rows.'''
    with open(path, "r", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        if row["status"] == "ok":
            for metric in METRICS:
                row[metric] = float(row[metric])
    return rows


# ------- command line -------
def _load_plan_params(algorithm: str, path, seed: int):
    data = {}
    if path is not None:
        with open(path, "r") as fh:
            data = json.load(fh)
    if algorithm == "ga":
        return AcoParams(seed=seed), replace(GaParams.from_dict(data),
                                             seed=seed)
    return replace(AcoParams.from_dict(data), seed=seed), GaParams(seed=seed)


def cli_plan(args) -> int:
    algorithm = check_algorithm(args.algo)
    if args.trace is not None and algorithm not in TRACED:
        raise InvalidParameter(f"The {algorithm} planner has no convergence \
trace.")
    scenario = read_scenario_file(args.scenario)
    aco_params, ga_params = _load_plan_params(algorithm, args.params,
                                              args.seed)
    settings = ga_params if algorithm == "ga" else aco_params
    legs = load_leg_matrix(scenario, settings.turn_weight,
                           settings.turn_threshold, args.cache_dir,
                           args.threads)
    run = run_planner(algorithm, scenario, legs, aco_params, ga_params,
                      threads=args.threads)
    solution = run.solution
    if args.out is not None:
        result = {"algorithm": algorithm, "seed": args.seed}
        result.update(solution.to_dict())
        with open(args.out, "w", newline="\n") as fh:
            fh.write(json.dumps(result, indent=2) + "\n")
    if args.trace is not None:
        with open(args.trace, "w", newline="") as fh:
            fh.write(run.trace.to_csv())
    vector = solution.objectives
    print(f"{algorithm} seed={args.seed} met={solution.feasibility.n_met}/"
          f"{scenario.n_tasks} F={solution.F:.6f} "
          f"length_m={vector.f1_length:.3f} "
          f"makespan_s={vector.f2_makespan:.3f} turns={vector.f3_turns} "
          f"compute_s={run.compute_time_s:.3f}")
    return EXIT_OK


def cli_gen_map(args) -> int:
    grid = generate_map(args.seed, args.width, args.height, args.resolution,
                        args.density)
    write_map_file(args.out, grid)
    print(f"map {grid.width_m:g} m x {grid.height_m:g} m "
          f"({grid.width_cells}x{grid.height_cells} cells, density "
          f"{grid.density:.3f}) -> {args.out}")
    return EXIT_OK


def cli_gen_scenario(args) -> int:
    if not GEN_MIN_TASKS <= args.tasks <= GEN_MAX_TASKS:
        raise InvalidParameter(f"--tasks must be between {GEN_MIN_TASKS} \
and {GEN_MAX_TASKS}, got {args.tasks}.")
    grid = read_map_file(args.map)
    scenario = generate_scenario(args.seed, grid, args.tasks, args.window_lo,
                                 args.window_hi, args.speed)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    map_ref = os.path.relpath(os.path.abspath(args.map), out_dir)
    write_scenario_file(args.out, scenario, map_ref)
    print(f"scenario {scenario.n_tasks} tasks, start "
          f"{tuple(scenario.start)} -> {args.out}")
    return EXIT_OK


def suite_configs(args) -> typing.List[typing.Tuple[BenchConfig, str]]:
    '''One config per density tier from the bench flags, or the single
    config file.'''
    if args.config is not None:
        config = BenchConfig.load(args.config)
        if args.out is not None:
            config = replace(config, output_dir=args.out)
        return [(config, os.path.dirname(os.path.abspath(args.config)))]
    algorithms = tuple(check_algorithm(a) for a in args.algos)
    aco_params = AcoParams(n_ants=args.ants, n_iterations=args.iterations)
    ga_params = GaParams(population=args.population,
                         generations=args.generations)
    configs = []
    for density in args.densities:
        scenarios = [ScenarioSpec(seed=derive_seed(args.seed, "scenario", k),
                                  n_tasks=args.tasks, width=args.width,
                                  height=args.height,
                                  resolution=args.resolution,
                                  density=density,
                                  window_lo=args.window_lo,
                                  window_hi=args.window_hi, speed=args.speed,
                                  shared_window=args.shared_window)
                     for k in range(args.scenarios)]
        out = os.path.join(args.out or "bench_out", f"density_{density:.2f}")
        configs.append((BenchConfig(
            scenarios=scenarios, algorithms=algorithms,
            trials_per_cell=args.trials, aco=aco_params, ga=ga_params,
            wait_policy=args.wait_policy, output_dir=out,
            cache_dir=args.cache_dir, seed=args.seed), None))
    return configs


def cli_bench(args) -> int:
    n_runs = n_failed = 0
    configs = suite_configs(args)
    for config, base_dir in configs:
        for row in run_suite(config, args.threads, base_dir):
            n_runs += row.n_runs + row.n_failed
            n_failed += row.n_failed
    print(f"bench {len(configs)} suite(s), {n_runs} runs, {n_failed} failed "
          f"-> {args.out or configs[0][0].output_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="more logging (repeatable)")
    common.add_argument("-q", "--quiet", action="store_true",
                        help="errors only")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default COLONYROUTE_THREADS "
                        "or every core)")

    parser = argparse.ArgumentParser(
        prog="colonyroute",
        description="Time-window aware ant colony route planning on "
        "occupancy grids.")
    commands = parser.add_subparsers(dest="command", required=True)

    plan = commands.add_parser("plan", parents=[common],
                               help="plan one scenario")
    plan.add_argument("--scenario", required=True)
    plan.add_argument("--algo", default="aco",
                      help=f"one of {', '.join(ALGORITHMS)}")
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--params", default=None,
                      help="AcoParams or GaParams JSON file")
    plan.add_argument("--out", default=None, help="result JSON file")
    plan.add_argument("--trace", default=None, help="convergence CSV file")
    plan.add_argument("--cache-dir", default=None, help="leg cache directory")
    plan.set_defaults(handler=cli_plan)

    gen_map = commands.add_parser("gen-map", parents=[common],
                                  help="generate a map file")
    gen_map.add_argument("--seed", type=int, default=0)
    gen_map.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    gen_map.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    gen_map.add_argument("--resolution", type=float,
                         default=DEFAULT_RESOLUTION)
    gen_map.add_argument("--density", type=float, default=DEFAULT_DENSITY)
    gen_map.add_argument("--out", required=True)
    gen_map.set_defaults(handler=cli_gen_map)

    gen_scenario = commands.add_parser("gen-scenario", parents=[common],
                                       help="generate a scenario file")
    gen_scenario.add_argument("--seed", type=int, default=0)
    gen_scenario.add_argument("--map", required=True)
    gen_scenario.add_argument("--tasks", type=int, default=GEN_MIN_TASKS)
    gen_scenario.add_argument("--window-lo", type=float,
                              default=DEFAULT_WINDOW_LO)
    gen_scenario.add_argument("--window-hi", type=float,
                              default=DEFAULT_WINDOW_HI)
    gen_scenario.add_argument("--speed", type=float, default=DEFAULT_SPEED)
    gen_scenario.add_argument("--out", required=True)
    gen_scenario.set_defaults(handler=cli_gen_scenario)

    bench = commands.add_parser("bench", parents=[common],
                                help="run comparative suites")
    bench.add_argument("--config", default=None,
                       help="BenchConfig JSON; replaces the suite flags")
    bench.add_argument("--out", default=None)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--algos", nargs="+", default=list(DEFAULT_ALGORITHMS))
    bench.add_argument("--densities", nargs="+", type=float,
                       default=list(DEFAULT_DENSITIES))
    bench.add_argument("--scenarios", type=int, default=10)
    bench.add_argument("--tasks", type=int, default=8)
    bench.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    bench.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    bench.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    bench.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)
    bench.add_argument("--window-lo", type=float, default=DEFAULT_WINDOW_LO)
    bench.add_argument("--window-hi", type=float, default=DEFAULT_WINDOW_HI)
    bench.add_argument("--shared-window", action="store_true",
                       help="give every task the window [lo, hi]")
    bench.add_argument("--speed", type=float, default=DEFAULT_SPEED)
    bench.add_argument("--wait-policy", default=WaitPolicy.ALLOW.value,
                       choices=[p.value for p in WaitPolicy])
    bench.add_argument("--ants", type=int, default=30)
    bench.add_argument("--iterations", type=int, default=1000)
    bench.add_argument("--population", type=int, default=100)
    bench.add_argument("--generations", type=int, default=300)
    bench.add_argument("--cache-dir", default=None)
    bench.set_defaults(handler=cli_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(-1 if args.quiet else args.verbose)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"colonyroute: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        logger.exception("internal error")
        print(f"colonyroute: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
