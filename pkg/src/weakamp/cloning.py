"""Two clones of ``|beta>`` from an amplified probe ``~|g beta>``, ``g >= sqrt(2)``.

Schedule: a beam splitter with ``t = 1/g`` sends ``beta`` to output 1 and
``sqrt(g**2 - 1) beta`` to output 2; output 2 is then attenuated with
``t' = 1/sqrt(g**2 - 1)`` against vacuum and the tapped-off mode is
discarded.  Both steps are exact for coherent inputs.  Attenuation is
applied through its Kraus operators ``A_k[n - k, n] = <n-k, k|U(t')|n, 0>``,
read straight from the beam-splitter sector unitaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GainTooSmall, OutsideWindow
from .fock import (
    FockVector,
    TwoModeVector,
    beam_splitter,
    beam_splitter_sector,
    coherent,
    density_fidelity,
    partial_trace,
)
from . import kerr

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CloneReport:
    gain_used: float
    transmissivity_schedule: tuple[float, ...]
    clone_fidelities: tuple[float, float]
    joint_state_purity: float


def attenuation_kraus(t: float, N: int) -> list[np.ndarray]:
    """Kraus operators of mixing with vacuum at transmissivity ``t``; ``k`` photons lost."""
    ops = [np.zeros((N + 1, N + 1), dtype=complex) for _ in range(N + 1)]
    for n in range(N + 1):
        u = beam_splitter_sector(n, t)
        for k in range(n + 1):
            ops[k][n - k, n] = u[n - k, n]
    return ops


def extract_clones(amplified: FockVector, beta: float, g: float) -> CloneReport:
    """Split ``amplified`` into two approximate copies of ``coherent(beta)``.

    ``joint_state_purity`` is ``Tr(rho_12**2)`` for the two clones after
    the tapped mode is discarded.

    Raises
    ------
    GainTooSmall
        If ``g < sqrt(2)`` (beyond a 1e-9 slack).
    """
    if g < SQRT2 - 1e-9:
        raise GainTooSmall(f"gain {g:.6g} is below sqrt(2)")
    g = max(g, SQRT2)
    N = amplified.truncation
    t1 = 1.0 / g
    t2 = min(1.0, 1.0 / math.sqrt(g * g - 1.0))
    joint = beam_splitter(TwoModeVector.product(amplified.normalized(), FockVector.basis(0, N)), t1)
    branches = [joint.amplitudes @ a.T for a in attenuation_kraus(t2, N)]
    branches = [b for b in branches if np.any(b)]

    target = coherent(beta, N)
    rho1 = partial_trace(joint, keep=0)
    rho2 = sum(partial_trace(TwoModeVector(b), keep=1) for b in branches)
    flat = np.array([b.ravel() for b in branches])
    gram = flat.conj() @ flat.T
    purity = float(np.sum(np.abs(gram) ** 2))
    return CloneReport(
        gain_used=g,
        transmissivity_schedule=(t1, t2),
        clone_fidelities=(density_fidelity(rho1, target), density_fidelity(rho2, target)),
        joint_state_purity=purity,
    )


def pipeline_clone_fidelity(cfg: kerr.ProtocolConfig, p: float) -> CloneReport:
    """Exact protocol output at outcome ``p``, normalized and split into clones.

    The known phase ramp ``exp(-i kappa_T Re(n_W) n)`` is undone first,
    as a path-length adjustment would do.

    Raises
    ------
    GainTooSmall
        If the gain at ``p`` is below sqrt(2).
    OutsideWindow
        If ``p`` lies outside the configured success window.
    """
    g = float(kerr.gain(cfg, p))
    if g < SQRT2 - 1e-9:
        raise GainTooSmall(f"gain {g:.6g} at p={p:.6g} is below sqrt(2)")
    lo, hi = cfg.window
    if not lo <= p <= hi:
        raise OutsideWindow(f"p={p:.6g} outside success window [{lo:.6g}, {hi:.6g}]")
    state = kerr.exact_probe_state(cfg, p).normalized()
    n = np.arange(len(state))
    phase_fix = np.exp(1j * cfg.kappa_T * kerr.number_weak_value(cfg.alpha, p).re * n)
    state = FockVector(state.amplitudes * phase_fix)
    return extract_clones(state, cfg.beta, g)
