from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class DriftExcursion:
    position: int
    level: float
    threshold: float
    iteration: int


def excursion_threshold(level: float, r: int) -> float:
    return level - 1.0 / (2 * r)


class ExcursionMonitor:
    """Records, per position and level, the first drop below ``level - 1/(2r)``
    that happens after the frequency has reached ``level``."""

    def __init__(self, levels: Sequence[float], r: int, positions: int) -> None:
        self.levels = tuple(float(v) for v in levels)
        self.thresholds = tuple(excursion_threshold(v, r) for v in self.levels)
        self._reached = np.zeros((len(self.levels), positions), dtype=bool)
        self._recorded = np.zeros_like(self._reached)
        self.excursions: List[DriftExcursion] = []

    def observe(self, iteration: int, frequencies: np.ndarray) -> None:
        for k, (level, threshold) in enumerate(zip(self.levels, self.thresholds)):
            reached = self._reached[k]
            crossed = np.flatnonzero(reached & ~self._recorded[k] & (frequencies < threshold))
            for pos in crossed:
                self.excursions.append(DriftExcursion(int(pos), level, threshold, iteration))
            self._recorded[k, crossed] = True
            reached |= frequencies >= level


def monitor_excursions(
    iterations: Iterable[int],
    frequencies: np.ndarray,
    levels: Sequence[float],
    r: int,
    positions: Optional[Sequence[int]] = None,
) -> List[DriftExcursion]:
    """Offline excursion scan over a recorded trace.

    ``frequencies`` has one row per recorded iteration and one column per
    traced position; ``positions`` relabels the columns.
    """
    freqs = np.atleast_2d(np.asarray(frequencies, dtype=np.float64))
    monitor = ExcursionMonitor(levels, r, freqs.shape[1])
    for t, row in zip(iterations, freqs):
        monitor.observe(int(t), row)
    if positions is None:
        return monitor.excursions
    return [
        DriftExcursion(int(positions[e.position]), e.level, e.threshold, e.iteration)
        for e in monitor.excursions
    ]
