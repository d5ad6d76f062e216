"""Cross-Kerr coupling to a coherent ancilla with homodyne post-selection.

The ancilla ``|alpha>`` (alpha real, ~1e4) couples to the probe through
``exp(-i kappa_T n_A n_B)`` and is post-selected onto the quadrature
eigenstate ``|p>``.  Photon number ``n`` in the probe rotates the ancilla
to ``|alpha exp(-i kappa_T n)>``, so the exact post-selected probe is

    sum_n psi_n <p| alpha exp(-i kappa_T n) > |n>,

evaluated through the closed-form overlap in :mod:`weakamp.fock`.  The
ancilla is never written in a Fock basis (mean photon number 1e8).

The weak value of the ancilla photon number is
``n_W = alpha**2 - 1j*sqrt(2)*alpha*p``.  The gain depends only on the
imaginary part; the real part is a known phase ramp that drops out of
every fidelity and probability computed here.  (The sign printed for the
real part in some references, ``-alpha**2``, corresponds to a different
quadrature phase convention.)
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import ConfigError, TailMassTooLarge, WindowOutsideGrid
from .fock import FockVector, coherent, log_quadrature_overlap_polar
from .weak import WeakValue, weak_evolve

SQRT2 = math.sqrt(2.0)

CSV_COLUMNS = ("p", "gain", "density_weak", "density_exact", "fidelity")


@dataclass(frozen=True)
class ProtocolConfig:
    """Physical and numerical parameters; defaults reproduce the 1e4 / 0.2 / 4e-5 point.

    ``window_hi=None`` puts the upper window edge at the cloning threshold
    (gain exactly sqrt(2)).
    """

    alpha: float = 1e4
    beta: float = 0.2
    kappa_T: float = 4e-5
    N: int = 40
    p_min: float = -6.0
    p_max: float = 2.0
    p_step: float = 0.005
    window_lo: float = -1.6
    window_hi: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.beta >= 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if not self.kappa_T >= 0:
            raise ConfigError(f"kappa_T must be non-negative, got {self.kappa_T}")
        if self.N < 0:
            raise ConfigError("truncation must be non-negative")
        if not (self.p_step > 0 and self.p_max > self.p_min):
            raise ConfigError("p grid needs p_max > p_min and a positive step")

    @property
    def window(self) -> tuple[float, float]:
        if self.window_hi is not None:
            return self.window_lo, self.window_hi
        if self.kappa_T == 0:
            return self.window_lo, -math.inf
        return self.window_lo, success_threshold(self.alpha, self.kappa_T)

    def validate_window(self):
        lo, hi = self.window
        if hi < lo:
            raise WindowOutsideGrid(f"window [{lo:.6g}, {hi:.6g}] is empty")
        if lo < self.p_min or hi > self.p_max:
            raise WindowOutsideGrid(
                f"window [{lo:.6g}, {hi:.6g}] not inside grid [{self.p_min:.6g}, {self.p_max:.6g}]"
            )

    def grid(self) -> np.ndarray:
        n = int(round((self.p_max - self.p_min) / self.p_step))
        p = np.linspace(self.p_min, self.p_min + n * self.p_step, n + 1)
        return np.round(p, 10) + 0.0


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    p: float
    n_w: WeakValue
    gain: float
    density_weak: float
    density_exact: float
    fidelity: float
    weak_state: FockVector = field(repr=False)
    exact_state: FockVector = field(repr=False)


def _im_number_weak_value(alpha, p):
    return -SQRT2 * alpha * p


def number_weak_value(alpha: float, p: float) -> WeakValue:
    """``<p|n|alpha> / <p|alpha> = alpha**2 - 1j*sqrt(2)*alpha*p``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return WeakValue(complex(alpha * alpha, _im_number_weak_value(alpha, float(p))))


def gain(cfg: ProtocolConfig, p):
    """``exp(kappa_T * Im n_W) = exp(-sqrt(2) alpha p kappa_T)``."""
    return np.exp(cfg.kappa_T * _im_number_weak_value(cfg.alpha, np.asarray(p, dtype=float)))[()]


def success_threshold(alpha: float, kappa_T: float) -> float:
    """Largest ``p`` with gain >= sqrt(2)."""
    if not (alpha > 0 and kappa_T > 0):
        raise ValueError("alpha and kappa_T must be positive")
    return -math.log(2.0) / (2.0 * SQRT2 * alpha * kappa_T)


def density_weak(cfg: ProtocolConfig, p):
    """Weak-approximation outcome density ``exp(-p**2 + (g**2 - 1) beta**2) / sqrt(pi)``."""
    p = np.asarray(p, dtype=float)
    g = gain(cfg, p)
    return (np.exp(-p * p + (g * g - 1.0) * cfg.beta**2) / math.sqrt(math.pi))[()]


def probe_state(cfg: ProtocolConfig) -> FockVector:
    return coherent(cfg.beta, cfg.N)


def _check_amplified_tail(cfg: ProtocolConfig):
    amp = gain(cfg, cfg.window[0]) * cfg.beta
    try:
        coherent(amp, cfg.N)
    except TailMassTooLarge as exc:
        raise TailMassTooLarge(
            f"truncation N={cfg.N} too small for the amplified amplitude {amp:.4g} at the window edge"
        ) from exc


def _exact_amplitudes(cfg: ProtocolConfig, p: np.ndarray) -> np.ndarray:
    """Rows: outcomes ``p``; columns: probe photon number."""
    psi = probe_state(cfg).amplitudes
    n = np.arange(cfg.N + 1)
    log_ov = log_quadrature_overlap_polar(cfg.alpha, -cfg.kappa_T * n[None, :], p[:, None])
    return np.exp(log_ov) * psi[None, :]


def exact_probe_state(cfg: ProtocolConfig, p: float) -> FockVector:
    """Unnormalized exact post-selected probe; its squared norm is the outcome density."""
    _check_amplified_tail(cfg)
    return FockVector(_exact_amplitudes(cfg, np.array([float(p)]))[0])


def exact_density(cfg: ProtocolConfig, p):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    d = np.sum(np.abs(_exact_amplitudes(cfg, p)) ** 2, axis=1)
    return d if d.size > 1 else float(d[0])


def weak_probe_state(cfg: ProtocolConfig, p: float) -> FockVector:
    """Unnormalized weak-approximation probe, ``<p|alpha> exp(-i kappa_T n_W n) |beta>``."""
    w = number_weak_value(cfg.alpha, p)
    overlap = np.exp(log_quadrature_overlap_polar(cfg.alpha, 0.0, p))
    return FockVector(overlap * weak_evolve(probe_state(cfg), w, cfg.kappa_T).amplitudes)


def weakness_residuals(cfg: ProtocolConfig, p: float) -> np.ndarray:
    """Weakness residuals ``r_n`` at outcome ``p`` for the coherent probe.

    The exact transfer ratio ``<p|alpha e^{-i k n}> / <p|alpha>`` is formed
    as one exponential of a difference evaluated with ``expm1``.
    """
    n = np.arange(cfg.N + 1)
    k, a = cfg.kappa_T, cfg.alpha
    log_ratio = 0.5 * a * a * np.expm1(-2j * k * n) - 1j * SQRT2 * a * p * np.expm1(-1j * k * n)
    w = number_weak_value(a, p)
    weak_log = (-1j * w.re + w.im) * k * n
    r = np.abs(np.exp(weak_log) * np.expm1(log_ratio - weak_log) * probe_state(cfg).amplitudes)
    r[0] = 0.0
    return r


def sweep(cfg: ProtocolConfig, ps: Optional[Sequence[float]] = None) -> list[OutcomeRecord]:
    """One record per outcome on the configured grid (or on ``ps``), in grid order.

    Outside the success window the weak state may be poorly represented at
    truncation ``N`` (the gain grows without bound as ``p`` decreases); the
    records there are computed on the truncated vectors as they stand.
    """
    cfg.validate_window()
    _check_amplified_tail(cfg)
    ps = cfg.grid() if ps is None else np.asarray(ps, dtype=float)
    exact = _exact_amplitudes(cfg, ps)
    psi = probe_state(cfg)
    n = np.arange(cfg.N + 1)
    records = []
    for p, ex in zip(ps, exact):
        w = number_weak_value(cfg.alpha, float(p))
        log_weak = log_quadrature_overlap_polar(cfg.alpha, 0.0, p) + (-1j * w.re + w.im) * cfg.kappa_T * n
        weak = np.exp(log_weak) * psi.amplitudes
        nw, ne = np.linalg.norm(weak), np.linalg.norm(ex)
        fid = abs(np.vdot(weak, ex)) ** 2 / (nw * nw * ne * ne) if nw > 0 and ne > 0 else 0.0
        records.append(
            OutcomeRecord(
                p=float(p),
                n_w=w,
                gain=float(gain(cfg, p)),
                density_weak=float(density_weak(cfg, p)),
                density_exact=float(ne * ne),
                fidelity=float(min(fid, 1.0)),
                weak_state=FockVector(weak),
                exact_state=FockVector(ex),
            )
        )
    return records


def window_grid(cfg: ProtocolConfig) -> np.ndarray:
    """Odd-length uniform grid spanning the success window, step <= ``p_step``."""
    lo, hi = cfg.window
    intervals = max(2, math.ceil((hi - lo) / cfg.p_step))
    intervals += intervals % 2
    return np.linspace(lo, hi, intervals + 1)


class SuccessProbability(NamedTuple):
    weak: float
    exact: float


def success_probability(cfg: ProtocolConfig) -> SuccessProbability:
    """Integrate the weak and exact outcome densities over the success window (Simpson)."""
    cfg.validate_window()
    lo, hi = cfg.window
    if hi == lo:
        return SuccessProbability(0.0, 0.0)
    p = window_grid(cfg)
    weak = float(simpson(density_weak(cfg, p), x=p))
    exact = float(simpson(exact_density(cfg, p), x=p))
    return SuccessProbability(weak, exact)


def min_window_fidelity(cfg: ProtocolConfig) -> float:
    return min(r.fidelity for r in sweep(cfg, window_grid(cfg)))


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def write_csv(records: Iterable[OutcomeRecord], stream) -> None:
    """Write ``p, gain, density_weak, density_exact, fidelity`` with 6 significant digits."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(r.p), _fmt(r.gain), _fmt(r.density_weak), _fmt(r.density_exact), _fmt(r.fidelity)])


def to_csv(records: Iterable[OutcomeRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()
