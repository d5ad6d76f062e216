"""Truncated Fock-basis numerics for one and two bosonic modes.

Quadrature convention
---------------------
Quadrature eigenstates use

    <n|p> = i**n * pi**(-1/4) * (2**n n!)**(-1/2) * H_n(p) * exp(-p**2 / 2)

with H_n the physicists' Hermite polynomial.  With this phase rule the
coherent-state overlap has the closed form

    <p|gamma> = pi**(-1/4) exp(-p**2/2 - |gamma|**2/2 + gamma**2/2 - i sqrt(2) gamma p)

and the weak value of the photon number for a real coherent ancilla is
``alpha**2 - 1j*sqrt(2)*alpha*p``, whose imaginary part produces the
gain ``exp(-sqrt(2) alpha p kappa_T)``.

Beam-splitter convention
------------------------
``beam_splitter(state, t)`` applies U with

    U a^dag U^dag = t a^dag + r b^dag,    U b^dag U^dag = -r a^dag + t b^dag,

r = sqrt(1 - t**2).  So ``|gamma, 0> -> |t gamma, r gamma>`` and
``|1, 0> -> t|1, 0> + r|0, 1>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import gammainc

from .errors import DimensionMismatch, TailMassTooLarge, TruncationLoss, ZeroVector

#: Largest truncated-away probability accepted by the state constructors.
TAIL_TOLERANCE = 1e-10

#: Highest photon number served by the Hermite-function recurrence.
MAX_QUADRATURE_N = 500

_PI_QUARTER = math.pi ** -0.25


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockVector:
    """Single-mode state amplitudes for photon numbers ``0..N``.

    ``tail_mass`` records the probability discarded when a constructor
    truncated an infinite series (zero when nothing was cut).
    """

    amplitudes: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        a = _frozen(self.amplitudes)
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch(f"amplitudes must be a non-empty 1-D array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes contain NaN or Inf")
        object.__setattr__(self, "amplitudes", a)

    @property
    def truncation(self) -> int:
        return self.amplitudes.size - 1

    def __len__(self):
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> FockVector:
        nrm = self.norm()
        if nrm == 0.0:
            raise ZeroVector("cannot normalize the zero vector")
        return FockVector(self.amplitudes / nrm, self.tail_mass)

    @classmethod
    def basis(cls, n: int, N: int) -> FockVector:
        """Number state ``|n>`` in a truncation of size ``N``."""
        if not 0 <= n <= N:
            raise ValueError(f"photon number {n} outside 0..{N}")
        a = np.zeros(N + 1, dtype=complex)
        a[n] = 1.0
        return cls(a)


@dataclass(frozen=True)
class TwoModeVector:
    """Amplitude grid ``amplitudes[n1, n2]`` for modes truncated at ``(N1, N2)``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes)
        if a.ndim != 2 or 0 in a.shape:
            raise DimensionMismatch(f"amplitudes must be a non-empty 2-D array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes contain NaN or Inf")
        object.__setattr__(self, "amplitudes", a)

    @property
    def truncations(self) -> tuple[int, int]:
        return self.amplitudes.shape[0] - 1, self.amplitudes.shape[1] - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def product(cls, u: FockVector, v: FockVector) -> TwoModeVector:
        return cls(np.outer(u.amplitudes, v.amplitudes))


# ---------------------------------------------------------------------------
# state constructors


def coherent(gamma: complex, N: int) -> FockVector:
    """Coherent state ``|gamma>`` truncated to ``0..N`` and renormalized.

    Raises
    ------
    TailMassTooLarge
        If the Poisson weight beyond ``N`` exceeds ``TAIL_TOLERANCE``.
    """
    if N < 0:
        raise ValueError("truncation must be non-negative")
    gamma = complex(gamma)
    mean = abs(gamma) ** 2
    tail = float(gammainc(N + 1, mean)) if mean > 0 else 0.0
    if tail > TAIL_TOLERANCE:
        raise TailMassTooLarge(
            f"coherent amplitude {abs(gamma):.4g} leaves tail mass {tail:.3g} beyond N={N}"
        )
    a = np.empty(N + 1, dtype=complex)
    a[0] = 1.0
    for n in range(1, N + 1):
        a[n] = a[n - 1] * gamma / math.sqrt(n)
    return FockVector(a / np.linalg.norm(a), tail)


def squeezed_vacuum(r: float, N: int) -> FockVector:
    """Squeezed vacuum with real squeezing parameter ``r`` (even photon numbers only)."""
    if N < 0:
        raise ValueError("truncation must be non-negative")
    a = np.zeros(N + 1, dtype=complex)
    a[0] = 1.0 / math.sqrt(math.cosh(r))
    ratio = -math.tanh(r)
    for n in range(2, N + 1, 2):
        a[n] = a[n - 2] * ratio * math.sqrt(n * (n - 1)) / n
    tail = max(0.0, 1.0 - float(np.sum(np.abs(a) ** 2)))
    if tail > TAIL_TOLERANCE:
        raise TailMassTooLarge(f"squeezing r={r:.4g} leaves tail mass {tail:.3g} beyond N={N}")
    return FockVector(a / np.linalg.norm(a), tail)


# ---------------------------------------------------------------------------
# quadrature eigenstates


def quadrature_wavefunctions(N: int, p) -> np.ndarray:
    """``<n|p>`` for ``n = 0..N``; shape ``(N + 1,) + np.shape(p)``.

    Uses the three-term recurrence on normalized Hermite functions,
    so no H_n or n! is ever formed.
    """
    if not 0 <= N <= MAX_QUADRATURE_N:
        raise ValueError(f"N must lie in 0..{MAX_QUADRATURE_N}")
    p = np.asarray(p, dtype=float)
    psi = np.empty((N + 1,) + p.shape)
    psi[0] = _PI_QUARTER * np.exp(-0.5 * p * p)
    if N >= 1:
        psi[1] = math.sqrt(2.0) * p * psi[0]
    for n in range(1, N):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * p * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    phases = (1j) ** np.arange(N + 1)
    return psi * phases.reshape((-1,) + (1,) * p.ndim)


def quadrature_overlap_fock(n: int, p: float) -> complex:
    """``<n|p>`` under the module's phase convention."""
    if n < 0:
        raise ValueError("photon number must be non-negative")
    return complex(quadrature_wavefunctions(n, p)[n])


def quadrature_state(p: float, N: int) -> FockVector:
    """The (improper, unnormalized) eigenstate ``|p>`` projected onto ``0..N``."""
    return FockVector(quadrature_wavefunctions(N, p))


def log_quadrature_overlap_polar(modulus, phase, p):
    """``log <p|gamma>`` for ``gamma = modulus * exp(1j * phase)``.

    ``(gamma**2 - |gamma|**2) / 2`` is evaluated as
    ``modulus**2 * expm1(2j * phase) / 2``, which stays accurate when
    ``modulus**2`` is ~1e8 and ``phase`` is tiny.
    """
    modulus = np.asarray(modulus, dtype=float)
    phase = np.asarray(phase, dtype=float)
    p = np.asarray(p, dtype=float)
    gamma = modulus * np.exp(1j * phase)
    return (
        math.log(_PI_QUARTER)
        - 0.5 * p * p
        + 0.5 * modulus**2 * np.expm1(2j * phase)
        - 1j * math.sqrt(2.0) * gamma * p
    )


def quadrature_overlap_coherent(gamma, p):
    """``<p|gamma>`` in closed form; valid for arbitrarily large ``|gamma|``."""
    gamma = np.asarray(gamma, dtype=complex)
    out = np.exp(log_quadrature_overlap_polar(np.abs(gamma), np.angle(gamma), p))
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# overlaps


def _check_same(u: FockVector, v: FockVector):
    if len(u) != len(v):
        raise DimensionMismatch(f"truncations differ: {u.truncation} vs {v.truncation}")


def inner(u: FockVector, v: FockVector) -> complex:
    """``<u|v>``."""
    _check_same(u, v)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def norm(u: FockVector) -> float:
    return u.norm()


def fidelity(u: FockVector, v: FockVector) -> float:
    """``|<u|v>|**2`` after normalizing both vectors."""
    _check_same(u, v)
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("fidelity is undefined for a zero vector")
    f = abs(np.vdot(u.amplitudes, v.amplitudes)) ** 2 / (nu * nu * nv * nv)
    return float(min(f, 1.0))


def density_fidelity(rho: np.ndarray, v: FockVector) -> float:
    """``<v|rho|v>`` for a normalized pure target ``v``."""
    rho = np.asarray(rho)
    if rho.shape != (len(v), len(v)):
        raise DimensionMismatch(f"density matrix shape {rho.shape} does not match N={v.truncation}")
    vn = v.normalized().amplitudes
    return float(np.real(np.vdot(vn, rho @ vn)))


# ---------------------------------------------------------------------------
# two-mode operations


@lru_cache(maxsize=1024)
def beam_splitter_sector(total: int, t: float) -> np.ndarray:
    """Beam-splitter unitary on the fixed-total-photon sector ``total``.

    Basis index ``k`` labels ``|k, total - k>``.  The sector is closed
    under the beam splitter, so the exponential is exact.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {t}")
    theta = math.acos(t)
    k = np.arange(total + 1, dtype=float)
    # generator b^dag a - a^dag b; b^dag a: |k, s-k> -> sqrt(k (s-k+1)) |k-1, s-k+1>
    off = np.sqrt(k[1:] * (total - k[1:] + 1))
    gen = np.zeros((total + 1, total + 1))
    gen[k[:-1].astype(int), k[1:].astype(int)] = off
    gen -= gen.T
    u = scipy.linalg.expm(theta * gen)
    u.setflags(write=False)
    return u


def beam_splitter(state: TwoModeVector, t: float, tol: float = 1e-12) -> TwoModeVector:
    """Mix the two modes on a beam splitter of amplitude transmissivity ``t``.

    The output keeps the input truncations.  Photon number is conserved,
    so nothing is lost as long as every populated sector fits; amplitude
    pushed past either truncation is counted and reported.

    Raises
    ------
    TruncationLoss
        If the discarded probability exceeds ``tol``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {t}")
    a = state.amplitudes
    N1, N2 = state.truncations
    out = np.zeros_like(a)
    lost = 0.0
    for s in range(N1 + N2 + 1):
        k = np.arange(s + 1)
        ok = (k <= N1) & (s - k <= N2)
        vec = np.zeros(s + 1, dtype=complex)
        vec[ok] = a[k[ok], s - k[ok]]
        if not np.any(vec):
            continue
        res = beam_splitter_sector(s, float(t)) @ vec
        out[k[ok], s - k[ok]] = res[ok]
        lost += float(np.sum(np.abs(res[~ok]) ** 2))
    if lost > tol:
        raise TruncationLoss(f"beam splitter lost probability {lost:.3g} beyond truncations {(N1, N2)}")
    return TwoModeVector(out)


def partial_trace(state: TwoModeVector, keep: int) -> np.ndarray:
    """Reduced density matrix of mode ``keep`` (0 or 1); the other mode is traced out."""
    a = state.amplitudes
    if keep == 0:
        return a @ a.conj().T
    if keep == 1:
        return a.T @ a.conj()
    raise ValueError(f"mode selector must be 0 or 1, got {keep!r}")
