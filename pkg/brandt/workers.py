import logging
from concurrent.futures import ProcessPoolExecutor

from django.conf import settings

logger = logging.getLogger(__name__)


def resolve_jobs(jobs=None):
    """Worker count from the --jobs flag, else BRANDT_JOBS; at least 1."""
    if jobs is None:
        jobs = settings.BRANDT_JOBS
    return max(1, int(jobs))


def parallel_map(func, items, jobs=None):
    """
    Apply a picklable module-level function to each item, in input order.

    Results are collected in the order of items whatever the worker count,
    so output assembled from them is identical for every --jobs value.
    """
    items = list(items)
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(items) < 2:
        return [func(item) for item in items]
    logger.debug(f"Dispatching {len(items)} tasks to {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(func, items))
