'''
Ant colony planner over the task graph.

The colony runs as a small state machine, one state per step of the
algorithm:

    StartState         pheromone and heuristic initialisation
    ConstructionState  every ant builds a route (time-window filtered)
    UpdateState        evaporation, deposits, elitist deposit, clamping,
                       global-best and trace bookkeeping; loops back to
                       ConstructionState until the iteration budget is spent
    FinishedState      holds the result

The states pass a ColonyContext around; each state only reads and writes
what it owns.

alpha weights the turn penalty in the heuristic, beta is the pheromone
exponent and gamma the heuristic exponent (classic ant systems call the
last two alpha and beta).
'''
import csv
import io
import json
import logging
import math
import typing
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import EmptyAllowedSet, InvalidParameter, InvalidWeights
from .legs import LegMatrix, build_leg_matrix
from .objectives import DEFAULT_TURN_THRESHOLD, Norms, WaitPolicy, Weights
from .runtime import parallel_map
from .tour import AntSolution, TourEvaluator
from .world import Scenario

logger = logging.getLogger(__name__)

COMPLETION_FLOOR = 0.05
MIN_F = 1e-9
SEED_MASK = (1 << 64) - 1
TRACE_HEADER = ("iteration", "best_F", "best_length_m", "best_completion")


@dataclass(frozen=True)
class AcoParams:
    '''Every colony knob. tau_min and tau_max default to 0.01 and 100
    times tau0. filter_windows=False and elitist=False give the classic
    colony used as a reference.'''
    n_ants: int = 30
    n_iterations: int = 1000
    tau0: float = 1.0
    rho: float = 0.1
    alpha: float = 0.5
    beta: float = 1.0
    gamma: float = 2.0
    q_deposit: float = 1.0
    weights: Weights = field(default_factory=Weights)
    seed: int = 0
    tau_min: typing.Optional[float] = None
    tau_max: typing.Optional[float] = None
    elitist: bool = True
    filter_windows: bool = True
    turn_threshold: float = DEFAULT_TURN_THRESHOLD
    turn_weight: typing.Optional[float] = None
    wait_policy: WaitPolicy = WaitPolicy.ALLOW

    def __post_init__(self):
        if self.tau_min is None:
            object.__setattr__(self, "tau_min", 0.01 * self.tau0)
        if self.tau_max is None:
            object.__setattr__(self, "tau_max", 100.0 * self.tau0)
        if not isinstance(self.weights, Weights):
            object.__setattr__(self, "weights",
                               weights_from(self.weights))
        object.__setattr__(self, "wait_policy", wait_policy_from(
            self.wait_policy))
        require(type(self.n_ants) == int and self.n_ants > 0,
                 f"n_ants must be a positive whole number, got {self.n_ants!r}.")
        require(type(self.n_iterations) == int and self.n_iterations > 0,
                 f"n_iterations must be a positive whole number, got \
{self.n_iterations!r}.")
        require(0.0 < self.rho < 1.0,
                 f"rho must lie strictly between 0 and 1, got {self.rho!r}.")
        require(self.tau0 > 0, f"tau0 must be positive, got {self.tau0!r}.")
        require(0.0 < self.tau_min <= self.tau0 <= self.tau_max,
                 f"The pheromone bounds must satisfy 0 < tau_min <= tau0 <= \
tau_max, got {self.tau_min}, {self.tau0}, {self.tau_max}.")
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            require(value >= 0 and math.isfinite(value),
                     f"{name} must be a non-negative number, got {value!r}.")
        require(self.q_deposit > 0,
                 f"q_deposit must be positive, got {self.q_deposit!r}.")
        require(type(self.seed) == int,
                 f"seed must be a whole number, got {self.seed!r}.")
        require(self.turn_weight is None or self.turn_weight >= 0,
                 f"turn_weight must be non-negative, got \
{self.turn_weight!r}.")

    @classmethod
    def classic(cls, **overrides):
        '''The traditional colony: no turn penalty, length-only weights, no
        elitist deposit and no window filtering. These four settings win
        over overrides.'''
        return cls(**overrides).as_classic()

    def as_classic(self):
        return replace(self, alpha=0.0, weights=Weights(1.0, 0.0, 0.0, 0.0),
                       elitist=False, filter_windows=False)

    @classmethod
    def from_dict(cls, data: dict):
        try:
            return cls(**checked_fields(cls, data))
        except TypeError as exc:
            raise InvalidParameter(f"Bad AcoParams value: {exc}") from exc

    @classmethod
    def load(cls, path):
        with open(path, "r") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["weights"] = list(self.weights.as_tuple())
        data["wait_policy"] = self.wait_policy.value
        return data


def require(condition: bool, message: str):
    if not condition:
        raise InvalidParameter(message)


def weights_from(value) -> Weights:
    if isinstance(value, dict):
        try:
            return Weights(**{k: float(v) for k, v in value.items()})
        except TypeError as exc:
            raise InvalidWeights(f"Bad weights {value!r}: {exc}") from exc
    return Weights.from_sequence(value)


def wait_policy_from(value) -> WaitPolicy:
    try:
        return WaitPolicy(value)
    except ValueError:
        raise InvalidParameter(f"wait_policy must be 'allow' or 'forbid', \
got {value!r}.") from None


def checked_fields(cls, data: dict) -> dict:
    '''Keyword arguments for a parameter dataclass from JSON data; unknown
    keys are an error.'''
    if not isinstance(data, dict):
        raise InvalidParameter(f"{cls.__name__} must be a JSON object.")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidParameter(f"Unknown {cls.__name__} keys: \
{', '.join(unknown)}.")
    return dict(data)


class PheromoneMatrix:
    '''n x n pheromone levels, every entry kept within [tau_min, tau_max].
    The diagonal is never read.'''

    def __init__(self, values, tau_min: float, tau_max: float):
        array = np.clip(np.array(values, dtype=np.float64), tau_min, tau_max)
        array.setflags(write=False)
        self._values = array
        self._tau_min = tau_min
        self._tau_max = tau_max

    @classmethod
    def filled(cls, n_nodes: int, tau0: float, tau_min: float,
               tau_max: float):
        return cls(np.full((n_nodes, n_nodes), tau0), tau_min, tau_max)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def tau_min(self) -> float:
        return self._tau_min

    @property
    def tau_max(self) -> float:
        return self._tau_max

    @property
    def n_nodes(self) -> int:
        return self._values.shape[0]


@dataclass
class ConvergenceTrace:
    '''Per-iteration record of the global best (1-based iterations).

    best_F and best_length are running minima, so they never increase even
    when the global best moves to more tasks met at a higher F.
    best_completion is the global best's own and never decreases.'''
    iterations: typing.List[int] = field(default_factory=list)
    best_F: typing.List[float] = field(default_factory=list)
    best_length: typing.List[float] = field(default_factory=list)
    best_completion: typing.List[float] = field(default_factory=list)

    def append(self, iteration: int, best: AntSolution):
        f, length = best.F, best.objectives.f1_length
        if self.iterations:
            f = min(f, self.best_F[-1])
            length = min(length, self.best_length[-1])
        self.iterations.append(iteration)
        self.best_F.append(f)
        self.best_length.append(length)
        self.best_completion.append(best.completion_fraction)

    def __len__(self):
        return len(self.iterations)

    def rows(self):
        return list(zip(self.iterations, self.best_F, self.best_length,
                        self.best_completion))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for row in self.rows():
            writer.writerow(row)
        return buffer.getvalue()


@dataclass(frozen=True)
class AntState:
    '''Where an ant stands: current node, clock and visited task nodes.'''
    node: int = 0
    time: float = 0.0
    visited: typing.FrozenSet[int] = frozenset()


# ------- the colony's building blocks -------
def heuristic(legs: LegMatrix, i: int, j: int, alpha: float) -> float:
    '''eta_ij = (1 / d_ij) * 1 / (1 + alpha * turns_ij).'''
    leg = legs.leg(i, j)
    return (1.0 / leg.length) * (1.0 / (1.0 + alpha * leg.turns))


def heuristic_matrix(legs: LegMatrix, alpha: float) -> np.ndarray:
    lengths = legs.lengths
    eta = np.zeros_like(lengths)
    mask = ~np.eye(legs.n_nodes, dtype=bool)
    eta[mask] = (1.0 / lengths[mask]) * (1.0 / (1.0 + alpha *
                                                legs.turns[mask]))
    return eta


def allowed_set(state: AntState, scenario: Scenario, legs: LegMatrix,
                wait_policy=WaitPolicy.ALLOW,
                evaluator: typing.Optional[TourEvaluator] = None
                ) -> typing.Set[int]:
    '''Unvisited task nodes j the ant can still reach by window_end(j),
    arriving at state.time + leg(state.node, j).length / speed. Early
    arrival is fine when waiting is allowed. The rule itself lives in
    TourEvaluator.allowed.'''
    if evaluator is None:
        evaluator = TourEvaluator(scenario, legs,
                                  wait_policy=WaitPolicy(wait_policy))
    unvisited = set(range(1, scenario.n_nodes)) - state.visited
    return set(evaluator.allowed(state.node, state.time, unvisited))


def _probabilities(tau: np.ndarray, eta: np.ndarray, beta: float,
                   gamma: float) -> np.ndarray:
    # tau^beta * eta^gamma, rescaled by its maximum in log space
    log_weights = beta * np.log(tau) + gamma * np.log(eta)
    weights = np.exp(log_weights - np.max(log_weights))
    return weights / np.sum(weights)


def transition_probabilities(tau, eta, allowed, beta: float,
                             gamma: float) -> typing.Dict[int, float]:
    '''Selection probability of each allowed node, proportional to
    tau[j]^beta * eta[j]^gamma. tau and eta are indexable by node id.'''
    nodes = sorted(allowed)
    if not nodes:
        raise EmptyAllowedSet("The ant has no allowed node to move to.")
    probs = _probabilities(np.array([tau[j] for j in nodes], dtype=float),
                           np.array([eta[j] for j in nodes], dtype=float),
                           beta, gamma)
    return dict(zip(nodes, probs.tolist()))


def ant_rng(seed: int, iteration: int, ant: int) -> np.random.Generator:
    '''PCG64 stream for one ant, derived from (seed, iteration, ant) by
    SeedSequence hashing; never from execution order.'''
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(
        [seed & SEED_MASK, iteration, ant])))


def _sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    index = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return min(index, len(probs) - 1)


def construct_solution(evaluator: TourEvaluator, tau: PheromoneMatrix,
                       eta: np.ndarray, params: AcoParams,
                       rng: np.random.Generator) -> AntSolution:
    '''One ant walks from the start, sampling the next task among the
    allowed ones until none is left.'''
    current, time = 0, 0.0
    unvisited = set(range(1, evaluator.n_nodes))
    order = []
    while unvisited:
        allowed = evaluator.allowed(current, time, unvisited,
                                    params.filter_windows)
        if not allowed:
            break
        probs = _probabilities(tau.values[current, allowed],
                               eta[current, allowed], params.beta,
                               params.gamma)
        chosen = allowed[_sample(probs, rng)]
        order.append(chosen)
        unvisited.discard(chosen)
        time = evaluator.departure(chosen,
                                   evaluator.arrival(time, current, chosen))
        current = chosen
    return evaluator.evaluate(order)


def deposit_amount(solution: AntSolution, params: AcoParams) -> float:
    '''q * max(completion, 0.05) / F: better routes leave more pheromone.'''
    return params.q_deposit * max(solution.completion_fraction,
                                  COMPLETION_FLOOR) / max(solution.F, MIN_F)


def _edges(nodes) -> typing.List[typing.Tuple[int, int]]:
    route = (0,) + tuple(nodes)
    return list(zip(route, route[1:]))


def iteration_best(solutions) -> typing.Optional[AntSolution]:
    best = None
    for solution in solutions:
        if solution.better_than(best):
            best = solution
    return best


def update_pheromone(tau: PheromoneMatrix, solutions,
                     params: AcoParams) -> PheromoneMatrix:
    '''tau <- (1 - rho) * tau + deposits, then clamp. Every solution
    deposits on its directed edges; with params.elitist the iteration best
    deposits a second time.'''
    values = tau.values * (1.0 - params.rho)
    for solution in solutions:
        amount = deposit_amount(solution, params)
        for i, j in _edges(solution.nodes):
            values[i, j] += amount
    if params.elitist:
        best = iteration_best(solutions)
        if best is not None:
            amount = deposit_amount(best, params)
            for i, j in _edges(best.nodes):
                values[i, j] += amount
    return PheromoneMatrix(values, tau.tau_min, tau.tau_max)


# ------- the state machine -------
class ColonyContext:
    '''What the colony states share: the problem, the parameters, the
    pheromone, and the running best and trace.'''

    def __init__(self, evaluator: TourEvaluator, params: AcoParams,
                 threads=None):
        self.evaluator = evaluator
        self.params = params
        self.threads = threads
        self.tau = None
        self.eta = None
        self.iteration = 0
        self.solutions = []
        self.best = None
        self.best_iteration = None
        self.trace = ConvergenceTrace()


class State:
    '''Base state of the colony machine. on_event does the state's work on
    the context and returns the next state.'''

    def on_event(self, context: ColonyContext):
        pass

    def __repr__(self):
        return self.__str__()

    def __str__(self):
        return self.__class__.__name__


class StartState(State):
    '''Initialisation: uniform pheromone tau0 and the static heuristic.'''
    def on_event(self, context):
        params = context.params
        n_nodes = context.evaluator.n_nodes
        context.tau = PheromoneMatrix.filled(n_nodes, params.tau0,
                                             params.tau_min, params.tau_max)
        context.eta = heuristic_matrix(context.evaluator.legs, params.alpha)
        context.iteration = 1
        return ConstructionState()


class ConstructionState(State):
    '''Every ant builds a route from its own (seed, iteration, ant)
    stream, so running them in parallel changes nothing.'''
    def on_event(self, context):
        params = context.params
        iteration = context.iteration

        def build(ant):
            return construct_solution(context.evaluator, context.tau,
                                      context.eta, params,
                                      ant_rng(params.seed, iteration, ant))

        context.solutions = parallel_map(build, range(params.n_ants),
                                         context.threads)
        return UpdateState()


class UpdateState(State):
    '''Pheromone update, then global best (strict improvement only, so an
    earlier iteration wins ties) and the trace row.'''
    def on_event(self, context):
        context.tau = update_pheromone(context.tau, context.solutions,
                                       context.params)
        candidate = iteration_best(context.solutions)
        if candidate.better_than(context.best):
            context.best = candidate
            context.best_iteration = context.iteration
        context.trace.append(context.iteration, context.best)
        logger.debug("iteration %d best F %.6f completion %.3f",
                     context.iteration, context.best.F,
                     context.best.completion_fraction)
        if context.iteration >= context.params.n_iterations:
            return FinishedState()
        context.iteration += 1
        return ConstructionState()


class FinishedState(State):
    def on_event(self, context):
        return self


class ColonyMachine:
    '''Drives the colony states until FinishedState.'''
    def __init__(self):
        self.state = StartState()

    def on_event(self, context: ColonyContext):
        while not isinstance(self.state, FinishedState):
            self.state = self.state.on_event(context)
        return self.state


def make_evaluator(scenario: Scenario, params: AcoParams,
                   legs: typing.Optional[LegMatrix] = None,
                   norms: typing.Optional[Norms] = None,
                   threads=None) -> TourEvaluator:
    if legs is None:
        legs = build_leg_matrix(scenario, params.turn_weight,
                                params.turn_threshold, threads)
    return TourEvaluator(scenario, legs, params.weights, norms,
                         params.turn_threshold, params.wait_policy)


def plan(scenario: Scenario, params: typing.Optional[AcoParams] = None,
         legs: typing.Optional[LegMatrix] = None,
         norms: typing.Optional[Norms] = None, threads=None
         ) -> typing.Tuple[AntSolution, ConvergenceTrace]:
    '''Runs the colony for params.n_iterations and returns the global best
    (most tasks met, then lowest F) with its convergence trace.'''
    params = params if params is not None else AcoParams()
    evaluator = make_evaluator(scenario, params, legs, norms, threads)
    context = ColonyContext(evaluator, params, threads)
    logger.info("colony start: %d tasks, %d ants x %d iterations, seed %d",
                scenario.n_tasks, params.n_ants, params.n_iterations,
                params.seed)
    ColonyMachine().on_event(context)
    logger.info("colony done: F %.6f, completion %.3f, found in iteration \
%d", context.best.F, context.best.completion_fraction,
                context.best_iteration)
    return context.best, context.trace
