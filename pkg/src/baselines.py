'''
Reference planners that share the colony's leg library and scoring:

    astar_greedy_plan  nearest reachable task next, legs from A*
    ga_plan            permutation genetic algorithm
    exhaustive_plan    every window-feasible route, for small scenarios

All three return AntSolution records from the same TourEvaluator as the
colony, so their numbers are directly comparable.
'''
import json
import logging
import typing
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .aco import (SEED_MASK, ConvergenceTrace, checked_fields, iteration_best,
                  make_evaluator, require, wait_policy_from, weights_from)
from .errors import InvalidParameter, TooManyTasks
from .legs import LegMatrix, build_leg_matrix
from .objectives import DEFAULT_TURN_THRESHOLD, Norms, WaitPolicy, Weights
from .tour import AntSolution, TourEvaluator
from .world import Scenario

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_TASKS = 8


@dataclass(frozen=True)
class GaParams:
    population: int = 100
    generations: int = 300
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    tournament_size: int = 3
    seed: int = 0
    weights: Weights = field(default_factory=Weights)
    turn_threshold: float = DEFAULT_TURN_THRESHOLD
    turn_weight: typing.Optional[float] = None
    wait_policy: WaitPolicy = WaitPolicy.ALLOW

    def __post_init__(self):
        if not isinstance(self.weights, Weights):
            object.__setattr__(self, "weights", weights_from(self.weights))
        object.__setattr__(self, "wait_policy", wait_policy_from(
            self.wait_policy))
        require(type(self.population) == int and self.population > 0,
                f"population must be a positive whole number, got \
{self.population!r}.")
        require(type(self.generations) == int and self.generations > 0,
                f"generations must be a positive whole number, got \
{self.generations!r}.")
        for name in ("crossover_rate", "mutation_rate"):
            value = getattr(self, name)
            require(0.0 <= value <= 1.0,
                    f"{name} must lie in [0, 1], got {value!r}.")
        require(type(self.tournament_size) == int and
                self.tournament_size >= 2,
                f"tournament_size must be at least 2, got \
{self.tournament_size!r}.")
        require(self.population >= self.tournament_size,
                f"The population ({self.population}) must be at least the \
tournament size ({self.tournament_size}).")
        require(type(self.seed) == int,
                f"seed must be a whole number, got {self.seed!r}.")

    @classmethod
    def from_dict(cls, data: dict):
        try:
            return cls(**checked_fields(cls, data))
        except TypeError as exc:
            raise InvalidParameter(f"Bad GaParams value: {exc}") from exc

    @classmethod
    def load(cls, path):
        with open(path, "r") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["weights"] = list(self.weights.as_tuple())
        data["wait_policy"] = self.wait_policy.value
        return data


def _evaluator(scenario, legs, weights, norms, wait_policy, threshold):
    if legs is None:
        legs = build_leg_matrix(scenario, threshold=threshold)
    return TourEvaluator(scenario, legs, weights, norms, threshold,
                         wait_policy)


# ------- greedy -------
def greedy_order(evaluator: TourEvaluator) -> typing.List[int]:
    current, time = 0, 0.0
    unvisited = set(range(1, evaluator.n_nodes))
    order = []
    while True:
        allowed = evaluator.allowed(current, time, unvisited)
        if not allowed:
            return order
        chosen = min(allowed, key=lambda j: (
            evaluator.leg_length(current, j), evaluator.window_end(j),
            evaluator.task_id(j)))
        order.append(chosen)
        unvisited.discard(chosen)
        time = evaluator.departure(chosen,
                                   evaluator.arrival(time, current, chosen))
        current = chosen


def astar_greedy_plan(scenario: Scenario,
                      legs: typing.Optional[LegMatrix] = None,
                      weights: typing.Optional[Weights] = None,
                      norms: typing.Optional[Norms] = None,
                      wait_policy=WaitPolicy.ALLOW,
                      threshold: float = DEFAULT_TURN_THRESHOLD
                      ) -> AntSolution:
    '''Moves to the nearest (by leg length) unvisited task that can still
    be reached before its window closes; ties go to the earlier
    window_end, then the smaller id.'''
    evaluator = _evaluator(scenario, legs, weights, norms, wait_policy,
                           threshold)
    solution = evaluator.evaluate(greedy_order(evaluator))
    logger.info("greedy: order %s, F %.6f, completion %.3f",
                list(solution.visit_order), solution.F,
                solution.completion_fraction)
    return solution


# ------- genetic algorithm -------
def order_crossover(first, second, rng: np.random.Generator) -> list:
    '''OX1: keep a random slice of first, fill the other positions with the
    remaining genes in the order they follow the slice in second.'''
    n = len(first)
    if n < 2:
        return list(first)
    a, b = sorted(rng.choice(n, size=2, replace=False).tolist())
    child = [None] * n
    child[a:b + 1] = first[a:b + 1]
    kept = set(first[a:b + 1])
    rest = [g for g in list(second[b + 1:]) + list(second[:b + 1])
            if g not in kept]
    for position, gene in zip(list(range(b + 1, n)) + list(range(a)), rest):
        child[position] = gene
    return child


def swap_mutation(permutation, rate: float,
                  rng: np.random.Generator) -> list:
    child = list(permutation)
    if len(child) >= 2 and rng.random() < rate:
        i, j = rng.choice(len(child), size=2, replace=False).tolist()
        child[i], child[j] = child[j], child[i]
    return child


def tournament(fitness: typing.List[AntSolution], size: int,
               rng: np.random.Generator) -> int:
    winner = None
    for index in rng.choice(len(fitness), size=size, replace=False).tolist():
        if winner is None or fitness[index].better_than(fitness[winner]):
            winner = index
    return winner


def _best_index(fitness: typing.List[AntSolution]) -> int:
    best = 0
    for index, solution in enumerate(fitness):
        if solution.better_than(fitness[best]):
            best = index
    return best


def ga_plan(scenario: Scenario, legs: typing.Optional[LegMatrix] = None,
            ga: typing.Optional[GaParams] = None,
            weights: typing.Optional[Weights] = None,
            norms: typing.Optional[Norms] = None,
            initial_population=None
            ) -> typing.Tuple[AntSolution, ConvergenceTrace]:
    '''Evolves visiting permutations of the task ids. Each permutation is
    decoded by visiting its first still-allowed task until none is, and
    ranked like colony solutions (completion first, then F). The best
    individual survives every generation unchanged.

    initial_population, if given, is a list of task-id permutations that
    replaces the random first generation.'''
    ga = ga if ga is not None else GaParams()
    if weights is not None:
        ga = replace(ga, weights=weights)
    evaluator = make_evaluator(scenario, ga, legs, norms)
    rng = np.random.default_rng(ga.seed & SEED_MASK)
    task_nodes = np.arange(1, evaluator.n_nodes)
    if initial_population is None:
        population = [rng.permutation(task_nodes).tolist()
                      for _ in range(ga.population)]
    else:
        population = [evaluator.nodes_of(p) for p in initial_population]
    fitness = [evaluator.decode(p) for p in population]
    best = iteration_best(fitness)
    trace = ConvergenceTrace()
    for generation in range(1, ga.generations + 1):
        offspring = [list(population[_best_index(fitness)])]
        while len(offspring) < ga.population:
            first = population[tournament(fitness, ga.tournament_size, rng)]
            second = population[tournament(fitness, ga.tournament_size, rng)]
            if rng.random() < ga.crossover_rate:
                children = [order_crossover(first, second, rng),
                            order_crossover(second, first, rng)]
            else:
                children = [list(first), list(second)]
            for child in children:
                if len(offspring) < ga.population:
                    offspring.append(swap_mutation(child, ga.mutation_rate,
                                                   rng))
        population = offspring
        fitness = [evaluator.decode(p) for p in population]
        candidate = iteration_best(fitness)
        if candidate.better_than(best):
            best = candidate
        trace.append(generation, best)
        logger.debug("generation %d best F %.6f completion %.3f", generation,
                     best.F, best.completion_fraction)
    logger.info("ga: F %.6f, completion %.3f after %d generations", best.F,
                best.completion_fraction, ga.generations)
    return best, trace


# ------- exhaustive oracle -------
def feasible_routes(evaluator: TourEvaluator):
    '''Every route a window-filtering planner can end with: walks that
    only step to allowed tasks and stop when nothing is allowed. Routes come
    out in lexicographic order of their task ids.'''
    def walk(current, time, unvisited, prefix):
        allowed = evaluator.allowed(current, time, unvisited)
        if not allowed:
            yield list(prefix)
            return
        for node in sorted(allowed, key=evaluator.task_id):
            prefix.append(node)
            unvisited.discard(node)
            yield from walk(node, evaluator.departure(
                node, evaluator.arrival(time, current, node)), unvisited,
                prefix)
            unvisited.add(node)
            prefix.pop()

    yield from walk(0, 0.0, set(range(1, evaluator.n_nodes)), [])


def exhaustive_plan(scenario: Scenario,
                    legs: typing.Optional[LegMatrix] = None,
                    weights: typing.Optional[Weights] = None,
                    norms: typing.Optional[Norms] = None,
                    wait_policy=WaitPolicy.ALLOW,
                    threshold: float = DEFAULT_TURN_THRESHOLD
                    ) -> AntSolution:
    '''The best route over every task order, with the colony's ranking.
    Of equally good routes the lexicographically smallest id order wins.'''
    if scenario.n_tasks > EXHAUSTIVE_MAX_TASKS:
        raise TooManyTasks(f"Exhaustive search handles at most \
{EXHAUSTIVE_MAX_TASKS} tasks, the scenario has {scenario.n_tasks}.")
    evaluator = _evaluator(scenario, legs, weights, norms, wait_policy,
                           threshold)
    best = None
    n_routes = 0
    for route in feasible_routes(evaluator):
        n_routes += 1
        solution = evaluator.evaluate(route)
        if solution.better_than(best):
            best = solution
    logger.info("exhaustive: %d routes, F %.6f, completion %.3f", n_routes,
                best.F, best.completion_fraction)
    return best
