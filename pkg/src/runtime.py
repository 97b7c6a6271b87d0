'''
Process-level plumbing shared by the planners and the CLI: how many worker
threads to use, an order-preserving parallel map, and logging setup.
'''
import logging
import os
import typing
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "COLONYROUTE_THREADS"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

logger = logging.getLogger(__name__)


def resolve_threads(threads: typing.Optional[int] = None) -> int:
    '''An explicit positive count wins; otherwise COLONYROUTE_THREADS; 0,
    absent or unparsable means every core.'''
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "").strip()
        try:
            threads = int(raw) if raw else 0
        except ValueError:
            logger.warning("ignoring %s=%r, expected a whole number",
                           ENV_THREADS, raw)
            threads = 0
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def parallel_map(fn, items, threads: typing.Optional[int] = None) -> list:
    '''[fn(x) for x in items], possibly on a thread pool. Results come back
    in input order whatever order the workers finish in.'''
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def configure_logging(verbosity: int = 0):
    '''-1 quiet (ERROR), 0 WARNING, 1 INFO, 2+ DEBUG, on stderr.'''
    if verbosity < 0:
        level = logging.ERROR
    elif verbosity == 0:
        level = logging.WARNING
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
