'''
Exceptions raised across the planner. Every class derives from ValueError
so callers that catch bad input the usual way keep working.
'''


class ColonyRouteError(ValueError):
    '''Base class for every input or domain error the planner raises.'''


# ------- world -------
class MalformedHeader(ColonyRouteError):
    pass


class DimensionMismatch(ColonyRouteError):
    pass


class UnknownCell(ColonyRouteError):
    pass


class MalformedScenario(ColonyRouteError):
    pass


class InvalidWindow(ColonyRouteError):
    pass


class BlockedCell(ColonyRouteError):
    pass


class DuplicateId(ColonyRouteError):
    pass


class Unreachable(ColonyRouteError):
    '''A task cell cannot be reached from the start cell.'''
    def __init__(self, task_id: int):
        self.task_id = task_id
        super().__init__(f"Task {task_id} cannot be reached from the start \
cell.")


class InsufficientFreeCells(ColonyRouteError):
    pass


# ------- objectives -------
class DegeneratePath(ColonyRouteError):
    pass


class Disconnected(ColonyRouteError):
    pass


class NonPositiveNorm(ColonyRouteError):
    pass


class InvalidWeights(ColonyRouteError):
    pass


# ------- legs -------
class NoPath(ColonyRouteError):
    pass


# ------- planners -------
class EmptyAllowedSet(ColonyRouteError):
    pass


class InvalidParameter(ColonyRouteError):
    pass


class TooManyTasks(ColonyRouteError):
    pass


# ------- bench -------
class UnknownAlgorithm(ColonyRouteError):
    pass


class InvalidConfig(ColonyRouteError):
    pass
