"""CUSUM change detection and threshold anomaly detection on a scalar stream.

The monitored statistic ``e_t`` is a distance from the nominal mean, so
changes show up as an increase.  ``S_t = max(0, S_{t-1} + e_t - q)`` with
``S_0 = 0``; an alarm is raised when ``S_t > h`` and the statistic is then
reset to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: bootstrap resamples used for calibration and confidence intervals
N_BOOT = 2000


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class CusumConfig:
    q: float
    h: float
    alpha: float = 0.99

    def __post_init__(self):
        if not self.h > 0:
            raise CalibrationError(f"threshold must be positive, got {self.h}")
        if not 0 < self.alpha < 1:
            raise CalibrationError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class CusumState:
    S: float = 0.0
    t: int = 0


def cusum_update(state: CusumState, e: float, q: float) -> CusumState:
    return CusumState(S=max(0.0, state.S + (e - q)), t=state.t + 1)


def cusum_path(e_stream, q: float) -> np.ndarray:
    """Trajectory ``S_1, ..., S_T`` without resets."""
    S = 0.0
    out = np.empty(len(e_stream))
    for i, e in enumerate(e_stream):
        S = max(0.0, S + (e - q))
        out[i] = S
    return out


def detect_change(e_stream, config: CusumConfig) -> list:
    """Alarm times (1-based) of the CUSUM with reset after every alarm."""
    alarms = []
    S = 0.0
    q, h = config.q, config.h
    for t, e in enumerate(e_stream, start=1):
        S = max(0.0, S + (e - q))
        if S > h:
            alarms.append(t)
            S = 0.0
    return alarms


def detect_anomaly(e: float, h: float) -> bool:
    return e > h


def anomaly_threshold(e_train, alpha: float) -> float:
    """Critical value with ``P(e > h) = 1 - alpha`` under the nominal sample."""
    return float(np.quantile(np.asarray(e_train, dtype=float), alpha))


def _first_passage_times(paths_max, h):
    """First time the running maximum exceeds ``h`` (censored at the length)."""
    T = paths_max.shape[1]
    over = paths_max > h
    hit = over.any(axis=1)
    return np.where(hit, over.argmax(axis=1) + 1, T)


def calibrate(e_train, alpha: float = 0.99, n_boot: int = N_BOOT, seed: int = 0,
              conditioning: str = "renewal") -> CusumConfig:
    """Sensitivity ``q`` and threshold ``h`` from nominal statistics.

    ``q`` is the third quartile of ``e_train``.  The threshold is chosen so
    that an alarm at any step, given no alarm since the last reset, has
    probability ``1 - alpha``; equivalently the nominal average run length
    is ``1 / (1 - alpha)``.  It is estimated on ``n_boot`` bootstrap streams
    resampled from ``e_train``.

    ``conditioning="reset"`` instead takes the ``alpha`` quantile of ``S_t``
    over steps that start from ``S_{t-1} = 0``, i.e. of ``max(0, e - q)``.
    """
    e_train = np.asarray(e_train, dtype=float)
    if e_train.size < 20:
        raise CalibrationError("need at least 20 nominal statistics")
    if not 0 < alpha < 1:
        raise CalibrationError(f"alpha must be in (0, 1), got {alpha}")
    q = float(np.quantile(e_train, 0.75))
    rng = np.random.default_rng(seed)

    if conditioning == "reset":
        draws = rng.choice(e_train, size=(n_boot, e_train.size))
        h = float(np.quantile(np.maximum(draws - q, 0.0), alpha))
    elif conditioning == "renewal":
        target = 1.0 / (1.0 - alpha)
        T = int(math.ceil(20 * target))
        steps = rng.choice(e_train, size=(n_boot, T)) - q
        paths = np.empty_like(steps)
        S = np.zeros(n_boot)
        for t in range(T):
            S = np.maximum(0.0, S + steps[:, t])
            paths[:, t] = S
        running = np.maximum.accumulate(paths, axis=1)
        lo, hi = 0.0, float(running[:, -1].max())
        if hi <= 0:
            raise CalibrationError("degenerate nominal statistics (no spread)")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _first_passage_times(running, mid).mean() < target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
        h = hi
    else:
        raise ValueError(f"unknown conditioning {conditioning!r}")
    if not h > 0:
        raise CalibrationError("degenerate nominal statistics give h = 0")
    return CusumConfig(q=q, h=h, alpha=alpha)


@dataclass(frozen=True)
class RunOutcome:
    """Run lengths of one monitored sequence with a change at ``change_time``."""

    arl0: float
    arl1: float
    censored0: bool = False
    censored1: bool = False

    @property
    def detected(self) -> bool:
        return self.arl0 > self.arl1


def segment_arl(alarms, start: int, end: int):
    """Mean gap between consecutive alarms in ``(start, end]``.

    The first gap is measured from ``start``; the trailing gap after the last
    alarm is censored and excluded.  Without alarms the segment length is
    returned and the result is flagged as censored.
    """
    times = [a for a in alarms if start < a <= end]
    if not times:
        return float(end - start), True
    gaps = np.diff([start] + times)
    return float(np.mean(gaps)), False


def run_outcome(alarms, change_time: int, length: int) -> RunOutcome:
    arl0, c0 = segment_arl(alarms, 0, change_time)
    arl1, c1 = segment_arl(alarms, change_time, length)
    return RunOutcome(arl0=arl0, arl1=arl1, censored0=c0, censored1=c1)


def bootstrap_ci(values, n_boot: int = N_BOOT, seed: int = 0, level: float = 0.95):
    """Percentile bootstrap interval of the mean."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return (math.nan, math.nan)
    rng = np.random.default_rng(seed)
    idx = rng.integers(values.size, size=(n_boot, values.size))
    means = values[idx].mean(axis=1)
    tail = 0.5 * (1.0 - level)
    lo, hi = np.quantile(means, [tail, 1.0 - tail])
    return (float(lo), float(hi))


@dataclass
class RunMetrics:
    arl0: float
    arl1: float
    dcr: float
    arl0_ci: tuple
    arl1_ci: tuple
    dcr_ci: tuple
    n_runs: int
    n_censored0: int = 0
    n_censored1: int = 0
    runs: list = field(default_factory=list, repr=False)


def compute_run_metrics(outcomes, n_boot: int = N_BOOT, seed: int = 0) -> RunMetrics:
    """Aggregate per-run outcomes into ARL0, ARL1 and the detected change rate."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("no runs to aggregate")
    a0 = np.array([o.arl0 for o in outcomes])
    a1 = np.array([o.arl1 for o in outcomes])
    det = np.array([o.detected for o in outcomes], dtype=float)
    return RunMetrics(
        arl0=float(a0.mean()), arl1=float(a1.mean()), dcr=float(det.mean()),
        arl0_ci=bootstrap_ci(a0, n_boot, seed),
        arl1_ci=bootstrap_ci(a1, n_boot, seed),
        dcr_ci=bootstrap_ci(det, n_boot, seed),
        n_runs=len(outcomes),
        n_censored0=sum(o.censored0 for o in outcomes),
        n_censored1=sum(o.censored1 for o in outcomes),
        runs=outcomes,
    )
