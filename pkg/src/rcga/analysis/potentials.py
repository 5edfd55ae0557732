from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from rcga.model import FrequencyMatrix

logger = logging.getLogger(__name__)

PLAIN_DRIFT_DIVISOR = 30.0
BORDERED_DRIFT_DIVISOR = 66.0


class PotentialVariant(str, enum.Enum):
    PLAIN = "plain"
    BORDERED = "bordered"


@dataclass(frozen=True)
class Potential:
    value: float
    variant: PotentialVariant
    n: int
    K: Optional[float] = None

    @property
    def upper_bound(self) -> float:
        if self.variant is PotentialVariant.PLAIN:
            return float(self.n)
        return self.n * (1.0 - 1.0 / self.n - 1.0 / self.K)


def bordered_target(n: int, K: float) -> float:
    """Frequency above which a position no longer counts towards the bordered potential."""
    return 1.0 - 1.0 / n - 1.0 / K


def phi_values(top: np.ndarray, variant: PotentialVariant, n: int, K: float) -> np.ndarray:
    """Potential for each row of an array of p_{., r-1} vectors."""
    top = np.asarray(top, dtype=np.float64)
    if variant is PotentialVariant.PLAIN:
        return np.sum(1.0 - top, axis=-1)
    return np.sum(np.clip(bordered_target(n, K) - top, 0.0, None), axis=-1)


def potential_phi(m: FrequencyMatrix) -> Potential:
    value = float(phi_values(m.column(m.r - 1), PotentialVariant.PLAIN, m.n, m.K))
    return Potential(max(value, 0.0), PotentialVariant.PLAIN, m.n)


def potential_phi_bordered(
    m: FrequencyMatrix, n: Optional[int] = None, K: Optional[float] = None
) -> Potential:
    n = m.n if n is None else n
    K = m.K if K is None else K
    value = float(phi_values(m.column(m.r - 1), PotentialVariant.BORDERED, n, K))
    return Potential(value, PotentialVariant.BORDERED, n, K)


def phi_bound_flags(
    phi: float, variant: PotentialVariant, min_frequency: Optional[float] = None
) -> Tuple[str, ...]:
    """Lemma preconditions that do not hold: all p_{i,r-1} >= 1/4 and a floor on phi."""
    flags = []
    if min_frequency is not None and min_frequency < 0.25:
        flags.append("min-frequency")
    floor = 0.5 if PotentialVariant(variant) is PotentialVariant.PLAIN else 10000.0
    if phi < floor:
        flags.append("phi-floor")
    return tuple(flags)


def phi_drift_bound(
    phi: float,
    K: float,
    variant: PotentialVariant = PotentialVariant.PLAIN,
    min_frequency: Optional[float] = None,
) -> float:
    """sqrt(phi)/(30K) for the plain potential, sqrt(phi)/(66K) for the bordered one.

    The value is returned even when the preconditions fail; those are only logged.
    """
    variant = PotentialVariant(variant)
    if phi <= 0.0:
        return 0.0
    flags = phi_bound_flags(phi, variant, min_frequency)
    if flags:
        logger.debug(f"phi drift bound outside lemma preconditions: {','.join(flags)}")
    divisor = PLAIN_DRIFT_DIVISOR if variant is PotentialVariant.PLAIN else BORDERED_DRIFT_DIVISOR
    return math.sqrt(phi) / (divisor * K)
