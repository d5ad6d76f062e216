"""Pre/post-selected weak measurements with a coupling ``kappa_T * O (x) n``.

The ancilla starts in ``|Phi>``, couples to the probe photon number through
``exp(-i kappa_T O n)``, and is post-selected onto ``|omega>``.  The probe
is left in

    exact:  sum_n <omega| exp(-i kappa_T n O) |Phi> psi_n |n>
    weak:   <omega|Phi> sum_n exp(-i kappa_T O_W n) psi_n |n>

with ``O_W = <omega|O|Phi> / <omega|Phi>``.  A positive ``Im(O_W)`` gives
the noiseless-amplifier gain ``g = exp(kappa_T Im(O_W))``.

All evolved states are returned unnormalized together with their weights;
normalization happens only inside fidelities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, GainOverflow, IncompletePOM, VanishingOverlap, ZeroVector
from .fock import FockVector, fidelity

#: Smallest ``|<omega|Phi>|`` for which a weak value is defined.
MIN_OVERLAP = 1e-14

_MAX_LOG = math.log(np.finfo(float).max) - 1.0


@dataclass(frozen=True)
class WeakValue:
    value: complex

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag

    def gain(self, kappa_T: float) -> float:
        return float(np.exp(kappa_T * self.im))


@dataclass(frozen=True)
class PrePostSelection:
    """Ancilla pre-selection, post-selection, observable and coupling strength."""

    pre: FockVector
    post: FockVector
    observable: np.ndarray
    kappa_T: float
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        obs = np.array(self.observable, dtype=complex)
        d = len(self.pre)
        if len(self.post) != d or obs.shape != (d, d):
            raise DimensionMismatch(
                f"ancilla dimensions disagree: pre {d}, post {len(self.post)}, observable {obs.shape}"
            )
        if not np.allclose(obs, obs.conj().T, rtol=0.0, atol=1e-12):
            raise ValueError("observable is not Hermitian")
        obs.setflags(write=False)
        object.__setattr__(self, "observable", obs)
        if np.count_nonzero(obs - np.diag(np.diag(obs))) == 0:
            evals, evecs = np.diag(obs).real.copy(), None
        else:
            evals, evecs = np.linalg.eigh(obs)
        object.__setattr__(self, "_eig", (evals, evecs))

    @property
    def overlap(self) -> complex:
        """``<omega|Phi>``."""
        return complex(np.vdot(self.post.amplitudes, self.pre.amplitudes))

    def transfer_amplitudes(self, N: int) -> np.ndarray:
        """``<omega| exp(-i kappa_T n O) |Phi>`` for probe photon numbers ``n = 0..N``.

        One diagonalization of ``O`` serves every ``n``.
        """
        evals, evecs = self._eig
        pre, post = self.pre.amplitudes, self.post.amplitudes
        if evecs is None:
            left, right = post.conj(), pre
        else:
            left, right = post.conj() @ evecs, evecs.conj().T @ pre
        n = np.arange(N + 1)[:, None]
        return np.exp(-1j * self.kappa_T * n * evals[None, :]) @ (left * right)


def _weak_overlap(sel: PrePostSelection) -> complex:
    ov = sel.overlap
    if abs(ov) <= MIN_OVERLAP:
        raise VanishingOverlap(f"|<omega|Phi>| = {abs(ov):.3g} is below {MIN_OVERLAP}")
    return ov


def weak_value(sel: PrePostSelection) -> WeakValue:
    ov = _weak_overlap(sel)
    num = np.vdot(sel.post.amplitudes, sel.observable @ sel.pre.amplitudes)
    return WeakValue(complex(num / ov))


def weak_factors(w: WeakValue, kappa_T: float, N: int) -> np.ndarray:
    """``exp(-i kappa_T O_W n)`` for ``n = 0..N``."""
    if N * kappa_T * w.im > _MAX_LOG:
        raise GainOverflow(f"weak gain exp({kappa_T * w.im:.3g})**{N} overflows")
    n = np.arange(N + 1)
    return np.exp((-1j * w.re + w.im) * kappa_T * n)


def weak_evolve(probe: FockVector, w: WeakValue, kappa_T: float) -> FockVector:
    """Apply the weak-approximation map (phase ramp times gain ``g**n``)."""
    return FockVector(probe.amplitudes * weak_factors(w, kappa_T, probe.truncation))


def exact_postselected_evolve(probe: FockVector, sel: PrePostSelection) -> tuple[FockVector, float]:
    """Project ``exp(-i kappa_T O n)|Phi>|psi>`` onto ``<omega|``; return state and its weight."""
    a = sel.transfer_amplitudes(probe.truncation) * probe.amplitudes
    out = FockVector(a)
    return out, float(np.sum(np.abs(a) ** 2))


class Residuals(NamedTuple):
    values: np.ndarray
    max: float


def weakness_residuals(probe: FockVector, sel: PrePostSelection) -> Residuals:
    """Per-photon-number gap between the exact and weak transfer factors.

    ``r_n = |(T_n / <omega|Phi> - exp(-i kappa_T O_W n)) psi_n|``.
    """
    ov = _weak_overlap(sel)
    N = probe.truncation
    exact = sel.transfer_amplitudes(N) / ov
    weak = weak_factors(weak_value(sel), sel.kappa_T, N)
    r = np.abs((exact - weak) * probe.amplitudes)
    r[0] = 0.0  # both factors are exactly 1 at n = 0
    return Residuals(r, float(r.max()))


class Decomposition(NamedTuple):
    lhs: float
    rhs: complex
    im_sum: float


def decomposition_check(
    pre: FockVector,
    observable: np.ndarray,
    posts,
    weights,
    tol: float = 1e-10,
) -> Decomposition:
    """Check ``<Phi|O|Phi> = sum_w a_w |<w|Phi>|**2 O_W(w)``.

    ``posts`` holds one post-selection per row (or a sequence of
    ``FockVector``), ``weights`` the POM weights ``a_w`` (quadrature
    weights ``dp`` for a sampled continuous POM).  Completeness is checked
    on the vectors the identity actually uses, ``|Phi>`` and ``O|Phi>``.
    Outcomes with ``<w|Phi> = 0`` carry zero weight and are skipped.

    Raises
    ------
    IncompletePOM
        If ``sum a_w |w><w|`` differs from the identity on that span by more than ``tol``.
    """
    posts = np.array(
        [q.amplitudes if isinstance(q, FockVector) else q for q in posts], dtype=complex
    )
    weights = np.asarray(weights, dtype=float)
    obs = np.asarray(observable, dtype=complex)
    phi = pre.amplitudes
    if posts.ndim != 2 or posts.shape[1] != phi.size or weights.shape != (posts.shape[0],):
        raise DimensionMismatch("posts must be (outcomes, dim) with one weight per outcome")
    o_phi = obs @ phi
    ov = posts.conj() @ phi
    num = posts.conj() @ o_phi
    for vec, what in ((phi, "|Phi>"), (o_phi, "O|Phi>")):
        resolved = posts.T @ (weights * (posts.conj() @ vec))
        gap = float(np.linalg.norm(resolved - vec))
        if gap > tol:
            raise IncompletePOM(f"POM does not resolve {what}: residual {gap:.3g} > {tol:.3g}")
    keep = ov != 0
    prob = weights[keep] * np.abs(ov[keep]) ** 2
    o_w = num[keep] / ov[keep]
    rhs = complex(np.sum(prob * o_w))
    lhs = float(np.vdot(phi, o_phi).real)
    return Decomposition(lhs, rhs, float(np.sum(prob * o_w.imag)))


class OutcomeProbability(NamedTuple):
    exact: float
    weak_approx: float


def outcome_probability(probe: FockVector, sel: PrePostSelection, a_omega: float = 1.0) -> OutcomeProbability:
    """Probability of the post-selection outcome, exactly and in the weak approximation."""
    _, weight = exact_postselected_evolve(probe, sel)
    w = weak_value(sel)
    n = np.arange(len(probe))
    if probe.truncation * 2 * sel.kappa_T * w.im > _MAX_LOG:
        raise GainOverflow("weak-approximation probability overflows")
    moment = float(np.sum(np.abs(probe.amplitudes) ** 2 * np.exp(2 * sel.kappa_T * w.im * n)))
    return OutcomeProbability(a_omega * weight, a_omega * abs(sel.overlap) ** 2 * moment)


def approximation_fidelity(probe: FockVector, sel: PrePostSelection) -> float:
    """Fidelity between the weak-approximation and exact post-selected probe states."""
    exact, _ = exact_postselected_evolve(probe, sel)
    weak = weak_evolve(probe, weak_value(sel), sel.kappa_T)
    if exact.norm() == 0.0 or weak.norm() == 0.0:
        raise ZeroVector("post-selected probe state vanishes")
    return fidelity(weak, exact)
