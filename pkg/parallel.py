"""
Independent jobs (folds, weeks, thresholds) on a joblib worker pool.
"""

import os
from typing import Any, Callable, List, Optional, Sequence

from joblib import Parallel, delayed

from config.config import get_config
from log.logger import get_logger
from numeric.tensor import get_precision, set_precision

logger = get_logger("Parallel")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else GRITNET_WORKERS, where 0 means every available core."""
    if workers is None:
        workers = get_config().workers
    if workers == 0:
        workers = os.cpu_count() or 1
    return max(1, workers)


def _call_with_precision(fn: Callable, job: Any, precision: str):
    # worker processes start with the default precision
    set_precision(precision)
    return fn(job)


def run_jobs(fn: Callable[[Any], Any], jobs: Sequence[Any], workers: Optional[int] = None) -> List[Any]:
    """
    Apply ``fn`` to every job and return the results in job order.

    Each job must own all the state it mutates; results are therefore the
    same for any worker count. ``workers=1`` runs inline.
    """
    jobs = list(jobs)
    n = min(resolve_workers(workers), len(jobs)) if jobs else 1
    if n <= 1:
        return [fn(job) for job in jobs]
    logger.debug(f"Running {len(jobs)} job(s) on {n} workers")
    precision = get_precision()
    return Parallel(n_jobs=n)(delayed(_call_with_precision)(fn, job, precision) for job in jobs)
