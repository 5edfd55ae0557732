from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from rcga.model import FrequencyMatrix

MGF_RELATIVE_TOL = 1e-12


@dataclass(frozen=True)
class MgfCheck:
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + MGF_RELATIVE_TOL)


def increment_probabilities(p: float, epsilon: float, K: float) -> tuple:
    """Probabilities of +1/K, -1/K and 0 for a frequency increment with mean ``epsilon``.

    The moving mass 2z (z = p(1-p)) is split as z(1 + a) up and z(1 - a) down
    with a = K*epsilon/(2z).
    """
    z = p * (1.0 - p)
    if z <= 0.0:
        if epsilon != 0.0:
            raise ValueError("a frozen frequency (p in {0, 1}) cannot have nonzero drift")
        return 0.0, 0.0, 1.0
    a = K * epsilon / (2.0 * z)
    if abs(a) > 1.0:
        raise ValueError(f"|K*eps/(2z)| = {abs(a):.4g} > 1 is not a probability model")
    return z * (1.0 + a), z * (1.0 - a), 1.0 - 2.0 * z


def mgf_subgaussian_check(p: float, epsilon: float, K: float, lam: float) -> MgfCheck:
    """Compare E[exp(lam (delta - eps))] with exp(lam^2/2 (4z/K^2 + 2 eps/K)) for 0 <= lam <= K."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 0.0 <= lam <= K:
        raise ValueError(f"lambda must lie in [0, K], got {lam}")
    up, down, stay = increment_probabilities(p, epsilon, K)
    z = p * (1.0 - p)
    lhs = math.exp(-lam * epsilon) * (
        up * math.exp(lam / K) + down * math.exp(-lam / K) + stay
    )
    rhs = math.exp(0.5 * lam * lam * (4.0 * z / K**2 + 2.0 * epsilon / K))
    return MgfCheck(lhs, rhs)


def aggregate_subgaussian_check(
    m: FrequencyMatrix,
    K: Optional[float] = None,
    epsilons: Optional[Sequence[float]] = None,
) -> MgfCheck:
    """Check sum(4 z_i/K^2 + 2 eps_i/K) <= 8 phi/K^2 for the potential's increment.

    Without explicit drifts each eps_i is the largest biased-step drift 2 z_i/K.
    """
    K = m.K if K is None else K
    top = m.column(m.r - 1)
    z = top * (1.0 - top)
    eps = 2.0 * z / K if epsilons is None else np.asarray(epsilons, dtype=np.float64)
    lhs = float(np.sum(4.0 * z / K**2 + 2.0 * eps / K))
    phi = float(np.sum(1.0 - top))
    return MgfCheck(lhs, 8.0 * phi / K**2)
