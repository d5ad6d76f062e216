"""Ideal noiseless amplifier ``c * g**n`` and its truncated physical version.

The ideal operator maps ``|alpha> -> |g alpha>`` up to a scale, so its
squared norm on ``|alpha>`` is ``|c|**2 exp(+(g**2 - 1) |alpha|**2)``.
Note the positive exponent: that is the norm of ``c g**n |alpha>``,
and the same factor appears in the homodyne outcome density
``exp(-p**2 + (g**2 - 1) beta**2) / sqrt(pi)``.

For ``g > 1`` the Kraus condition ``|c|**2 g**(2n) <= 1`` cannot hold
for every ``n`` unless ``c = 0``; truncating at ``N`` photons allows
``|c_N|**2 = g**(-2N)``, so the success probability falls by ``g**-2``
per extra level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import GainOverflow
from .fock import FockVector

_MAX_LOG = math.log(np.finfo(float).max) - 1.0


@dataclass(frozen=True)
class GainOperator:
    """``c * sum_{n<=N} g**n |n><n|``; ``N=None`` means untruncated."""

    g: float
    c: complex = 1.0
    N: Optional[int] = None

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"gain must be positive, got {self.g}")
        if self.N is not None and self.N < 0:
            raise ValueError("truncation must be non-negative")

    def apply(self, state: FockVector) -> FockVector:
        """Unnormalized ``Gamma |state>``; levels above ``N`` are annihilated."""
        out, _ = apply_gain(state, self.g)
        a = self.c * out.amplitudes
        if self.N is not None and self.N < a.size - 1:
            a = a.copy()
            a[self.N + 1 :] = 0.0
        return FockVector(a)

    def success_probability(self, state: FockVector) -> float:
        return float(self.apply(state).norm() ** 2)


class KrausCheck(NamedTuple):
    valid: bool
    max_violation: float


def _gain_factors(g: float, N: int) -> np.ndarray:
    n = np.arange(N + 1)
    if N * abs(math.log(g)) > _MAX_LOG:
        raise GainOverflow(f"g**N overflows for g={g}, N={N}; reduce truncation or gain")
    return g ** n


def apply_gain(state: FockVector, g: float) -> tuple[FockVector, float]:
    """Multiply amplitude ``n`` by ``g**n``; return the new state and its norm squared."""
    if not g > 0:
        raise ValueError(f"gain must be positive, got {g}")
    a = state.amplitudes * _gain_factors(g, state.truncation)
    out = FockVector(a)
    return out, float(np.sum(np.abs(a) ** 2))


def truncated_amplifier(N: int, g: float) -> GainOperator:
    """Largest-scale physical amplifier on ``0..N``: ``c_N = g**-N``."""
    if not g > 1:
        raise ValueError(f"truncated amplifier needs g > 1, got {g}")
    if N < 0:
        raise ValueError("truncation must be non-negative")
    return GainOperator(g=g, c=g ** (-N), N=N)


def kraus_validity(op: GainOperator, N_check: int) -> KrausCheck:
    """Check ``|c|**2 g**(2n) <= 1`` for ``n <= N_check`` (and ``n <= op.N``)."""
    top = N_check if op.N is None else min(N_check, op.N)
    c = abs(op.c)
    if c == 0.0:
        return KrausCheck(True, 0.0)
    # logs keep tiny |c| (|c|**2 underflows) and huge g**(2n) representable;
    # the sup sits at an endpoint since g**(2n) is monotone in n
    log_sup = 2 * math.log(c) + max(0.0, 2 * top * math.log(op.g))
    sup = math.exp(log_sup) if log_sup < _MAX_LOG else math.inf
    return KrausCheck(sup <= 1.0 + 1e-12, sup)


def exact_success_probability(g: float, alpha: float, c: complex = 1.0) -> float:
    """``|| c g**n |alpha> ||**2 = |c|**2 exp((g**2 - 1) |alpha|**2)``."""
    if not g > 0:
        raise ValueError(f"gain must be positive, got {g}")
    return abs(c) ** 2 * math.exp((g * g - 1.0) * abs(alpha) ** 2)
