"""Probabilistic noiseless linear amplification through weak measurements.

Modules
-------
fock       truncated Fock-basis states, quadrature overlaps, beam splitter
amplifier  ideal and truncated noiseless amplifiers, Kraus audit
weak       generic pre/post-selected weak measurement with an O (x) n coupling
kerr       cross-Kerr + homodyne protocol at large ancilla amplitude
cloning    two-clone extraction from the amplified probe
cli        command-line driver
"""

from .fock import (
    FockVector,
    TwoModeVector,
    beam_splitter,
    coherent,
    fidelity,
    inner,
    norm,
    partial_trace,
    quadrature_overlap_coherent,
    quadrature_overlap_fock,
    quadrature_state,
    squeezed_vacuum,
)
from .kerr import ProtocolConfig

__version__ = "0.1.0"
