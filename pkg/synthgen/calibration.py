"""
Tune a course's global difficulty to hit a graduation rate.
"""

from typing import Optional, Tuple

from errors import CalibrationError
from log.logger import get_logger
from .course import SyntheticCourseSpec
from .simulator import simulate

logger = get_logger("Calibration")

DEFAULT_BOUNDS = (0.0, 4.0)


def graduation_rate(spec: SyntheticCourseSpec, n_students: int, seed: int, workers: Optional[int] = 1) -> float:
    return simulate(spec, n_students, seed, record=False, workers=workers).graduation_rate


def calibrate(
    spec: SyntheticCourseSpec,
    target_rate: Optional[float] = None,
    n_probe: int = 1000,
    seed: int = 0,
    tolerance: float = 0.01,
    max_iter: int = 30,
    bounds: Tuple[float, float] = DEFAULT_BOUNDS,
    workers: Optional[int] = 1,
) -> SyntheticCourseSpec:
    """
    Bisect the difficulty multiplier until the probe graduation rate is within
    ``tolerance`` of ``target_rate`` (default: the course spec's own target_rate).

    The probe population is the same at every step, so the rate only moves
    with difficulty.

    Raises:
        CalibrationError: Target outside (0, 1), outside the rates reachable
            within ``bounds``, or not met within ``max_iter`` steps
    """
    target = spec.target_rate if target_rate is None else target_rate
    if target is None or not 0.0 < target < 1.0:
        raise CalibrationError(f"Graduation rate target {target} must lie strictly between 0 and 1")

    lo, hi = bounds

    def rate_at(difficulty: float) -> float:
        return graduation_rate(spec.model_copy(update={"difficulty": difficulty}), n_probe, seed, workers)

    rate_lo, rate_hi = rate_at(lo), rate_at(hi)
    if target > rate_lo + tolerance:
        raise CalibrationError(f"{spec.name}: easiest setting graduates {rate_lo:.3f}, target {target:.3f} unreachable")
    if target < rate_hi - tolerance:
        raise CalibrationError(f"{spec.name}: hardest setting still graduates {rate_hi:.3f}, target {target:.3f} unreachable")

    for step in range(max_iter):
        mid = 0.5 * (lo + hi)
        rate = rate_at(mid)
        logger.debug(f"{spec.name}: step {step} difficulty={mid:.4f} rate={rate:.4f}")
        if abs(rate - target) <= tolerance:
            logger.info(f"Calibrated {spec.name}: difficulty={mid:.4f}, graduation rate {rate:.3f} (target {target:.3f})")
            return spec.model_copy(update={"difficulty": mid, "target_rate": target})
        if rate > target:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"{spec.name}: no difficulty within {max_iter} steps meets rate {target:.3f} ± {tolerance}")
