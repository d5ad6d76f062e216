import io
import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

from weakamp import kerr
from weakamp.errors import ConfigError, TailMassTooLarge, WindowOutsideGrid
from weakamp.fock import coherent, quadrature_state
from weakamp.kerr import ProtocolConfig
from weakamp.weak import PrePostSelection, exact_postselected_evolve, weak_value

BASE = ProtocolConfig()
SQRT2 = math.sqrt(2)


def exact_density_oracle(cfg, p):
    """Each probe photon number n shifts the homodyne Gaussian by sqrt(2) alpha sin(kappa n)."""
    n = np.arange(cfg.N + 1)
    w = np.abs(coherent(cfg.beta, cfg.N).amplitudes) ** 2
    shift = SQRT2 * cfg.alpha * np.sin(cfg.kappa_T * n)
    return float(np.sum(w * np.exp(-((p + shift) ** 2))) / math.sqrt(math.pi))


def mp_states(cfg, p, nmax=12):
    """Exact and weak probe amplitudes in 40-digit arithmetic."""
    mpmath.mp.dps = 40
    a, k, b, pm = (mpmath.mpf(x) for x in (cfg.alpha, cfg.kappa_T, cfg.beta, p))
    exact, weak = [], []
    for n in range(nmax + 1):
        c = mpmath.pi ** mpmath.mpf(-0.25) * mpmath.exp(-b * b / 2) * b**n / mpmath.sqrt(mpmath.factorial(n))
        g = a * mpmath.expj(-k * n)
        exact.append(c * mpmath.exp(-pm**2 / 2 - a * a / 2 + g * g / 2 - 1j * mpmath.sqrt(2) * g * pm))
        nw = a * a - 1j * mpmath.sqrt(2) * a * pm
        weak.append(c * mpmath.exp(-pm**2 / 2 - 1j * mpmath.sqrt(2) * a * pm) * mpmath.exp(-1j * k * nw * n))
    return exact, weak


def mp_fidelity(u, v):
    num = abs(mpmath.fsum(mpmath.conj(x) * y for x, y in zip(u, v))) ** 2
    return float(num / (mpmath.fsum(abs(x) ** 2 for x in u) * mpmath.fsum(abs(y) ** 2 for y in v)))


# --- closed forms ----------------------------------------------------------------


def test_number_weak_value():
    w = kerr.number_weak_value(1e4, 0.0)
    assert w.im == 0.0
    assert w.gain(4e-5) == 1.0
    w = kerr.number_weak_value(2.0, -1.0)
    assert w.im == pytest.approx(2 * SQRT2)
    assert w.re == 4.0


def test_number_weak_value_matches_matrix_ratio():
    N = 60
    sel = PrePostSelection(coherent(2.0, N), quadrature_state(-1.0, N), np.diag(np.arange(N + 1.0)), 0.05)
    assert weak_value(sel).im == pytest.approx(kerr.number_weak_value(2.0, -1.0).im, abs=1e-8)


def test_success_threshold_values():
    # -ln2 / (2 sqrt2 alpha kappa): 0.693147 / 1.131371 and 0.693147 / 0.565685
    assert kerr.success_threshold(1e4, 4e-5) == pytest.approx(-0.612661, abs=5e-7)
    assert kerr.success_threshold(1e4, 2e-5) == pytest.approx(-1.225323, abs=5e-7)
    assert kerr.success_threshold(1e4, 8e-5) == pytest.approx(kerr.success_threshold(1e4, 4e-5) / 2, rel=1e-15)


def test_gain_values():
    assert kerr.gain(BASE, 0.0) == 1.0
    assert kerr.gain(BASE, -1.6) == pytest.approx(math.exp(0.905097), rel=1e-6)
    assert kerr.gain(BASE, -1.6) == pytest.approx(2.472, abs=5e-4)
    assert kerr.gain(BASE, kerr.success_threshold(1e4, 4e-5)) == pytest.approx(SQRT2, abs=1e-12)


@pytest.mark.parametrize("p", [-1.6, -1.0, -0.3, 0.0, 1.2])
def test_gain_is_exp_of_weak_value(p):
    assert kerr.gain(BASE, p) == kerr.number_weak_value(BASE.alpha, p).gain(BASE.kappa_T)


def test_density_weak_examples():
    assert kerr.density_weak(BASE, 0.0) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-15)
    cfg0 = replace(BASE, beta=0.0)
    for p in (-2.0, -0.5, 1.0):
        assert kerr.density_weak(cfg0, p) == pytest.approx(math.exp(-p * p) / math.sqrt(math.pi), rel=1e-14)
    g = kerr.gain(BASE, -1.0)
    assert kerr.density_weak(BASE, -1.0) == pytest.approx(
        math.exp(-1 + (g * g - 1) * 0.04) / math.sqrt(math.pi), rel=1e-14
    )


# --- exact probe state ------------------------------------------------------------


def test_exact_state_without_coupling():
    cfg = replace(BASE, kappa_T=0.0)
    st = kerr.exact_probe_state(cfg, -0.7)
    ov = np.exp(-0.49 / 2) * math.pi**-0.25 * np.exp(-1j * SQRT2 * 1e4 * -0.7)
    np.testing.assert_allclose(st.amplitudes, ov * coherent(0.2, 40).amplitudes, atol=1e-12)


def test_exact_state_with_vacuum_probe():
    cfg = replace(BASE, beta=0.0)
    st = kerr.exact_probe_state(cfg, -1.0)
    assert np.count_nonzero(st.amplitudes) == 1
    assert abs(st.amplitudes[0]) ** 2 == pytest.approx(math.exp(-1) / math.sqrt(math.pi))


def test_exact_state_matches_weak_engine_at_small_alpha():
    cfg = ProtocolConfig(alpha=2.0, beta=0.2, kappa_T=0.05, N=20, window_lo=-3.0)
    for p in (-1.0, 0.0, 1.0):
        sel = PrePostSelection(coherent(2.0, 60), quadrature_state(p, 60), np.diag(np.arange(61.0)), 0.05)
        engine, _ = exact_postselected_evolve(coherent(0.2, 20), sel)
        np.testing.assert_allclose(kerr.exact_probe_state(cfg, p).amplitudes, engine.amplitudes, atol=1e-12)


@pytest.mark.parametrize("p", [-1.6, -1.0, -0.6126, 0.0, 0.8])
def test_exact_density_matches_shifted_gaussian_oracle(p):
    assert kerr.exact_density(BASE, p) == pytest.approx(exact_density_oracle(BASE, p), rel=1e-10)


def test_exact_state_against_high_precision():
    p = -1.6
    ex, _ = mp_states(BASE, p)
    got = kerr.exact_probe_state(BASE, p).amplitudes[:13]
    np.testing.assert_allclose(got, np.array([complex(x) for x in ex]), atol=1e-9)


def test_truncation_too_small_for_amplified_state():
    with pytest.raises(TailMassTooLarge):
        kerr.exact_probe_state(replace(BASE, N=3), -1.0)


def test_weak_probe_state_is_amplified_coherent_state():
    st = kerr.weak_probe_state(BASE, -1.6).normalized()
    g = kerr.gain(BASE, -1.6)
    phase = np.exp(-1j * BASE.kappa_T * BASE.alpha**2 * np.arange(41))
    ref = coherent(g * 0.2, 40).amplitudes * phase
    assert abs(np.vdot(ref, st.amplitudes)) == pytest.approx(1.0, abs=1e-12)


# --- sweep ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def fig2_records():
    return kerr.sweep(BASE)


def test_sweep_covers_grid_in_order(fig2_records):
    ps = [r.p for r in fig2_records]
    assert len(ps) == 1601
    assert ps[0] == -6.0 and ps[-1] == 2.0
    assert all(b > a for a, b in zip(ps, ps[1:]))


def test_sweep_record_invariants(fig2_records):
    for r in fig2_records:
        assert 0.0 <= r.fidelity <= 1.0
        assert r.density_weak >= 0 and r.density_exact >= 0
        assert r.gain == r.n_w.gain(BASE.kappa_T)
        assert r.density_exact == pytest.approx(r.exact_state.norm() ** 2, rel=1e-12)


def test_fidelity_falls_as_gain_rises_in_window():
    recs = kerr.sweep(BASE, kerr.window_grid(BASE))
    fids = np.array([r.fidelity for r in recs])
    gains = np.array([r.gain for r in recs])
    assert np.all(np.diff(gains) < 0)
    assert np.all(np.diff(fids) > 0)


@pytest.mark.parametrize("p", [-1.6, -0.6126])
def test_sweep_fidelity_against_high_precision(p):
    rec = kerr.sweep(BASE, [p])[0]
    ex, wk = mp_states(BASE, p, nmax=14)
    assert rec.fidelity == pytest.approx(mp_fidelity(ex, wk), abs=1e-10)


def test_min_window_fidelity_fig2():
    assert kerr.min_window_fidelity(BASE) > 0.99


def test_sweep_rejects_window_outside_grid():
    with pytest.raises(WindowOutsideGrid):
        kerr.sweep(replace(BASE, window_lo=-7.0))


# --- success probability -----------------------------------------------------------


@pytest.mark.parametrize(
    "kappa,beta,expected",
    [(4e-5, 0.2, 0.20), (2e-5, 0.2, 0.04), (2e-5, 0.5, 0.04)],
)
def test_success_probability_near_reported(kappa, beta, expected):
    ps = kerr.success_probability(replace(BASE, kappa_T=kappa, beta=beta))
    assert ps.weak == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("kappa,beta", [(4e-5, 0.2), (2e-5, 0.2), (2e-5, 0.5)])
def test_success_probability_matches_adaptive_quadrature(kappa, beta):
    cfg = replace(BASE, kappa_T=kappa, beta=beta)
    lo, hi = cfg.window
    ps = kerr.success_probability(cfg)
    weak_ref, _ = quad(lambda p: kerr.density_weak(cfg, p), lo, hi, epsabs=1e-13)
    exact_ref, _ = quad(lambda p: exact_density_oracle(cfg, p), lo, hi, epsabs=1e-13)
    assert ps.weak == pytest.approx(weak_ref, abs=1e-9)
    assert ps.exact == pytest.approx(exact_ref, abs=1e-9)


def test_success_probability_zero_width_window():
    cfg = replace(BASE, window_lo=-1.0, window_hi=-1.0)
    assert kerr.success_probability(cfg) == (0.0, 0.0)


def test_total_exact_probability_over_wide_grid():
    cfg = replace(BASE, p_min=-10.0, p_max=8.0, window_lo=-1.6)
    p = cfg.grid()
    from scipy.integrate import simpson

    assert simpson(kerr.exact_density(cfg, p), x=p) == pytest.approx(1.0, abs=1e-10)


def test_total_exact_probability_over_default_grid():
    # [-6, 2] misses the Gaussian tail above p = 2 (mass erfc(2)/2 ~ 2.3e-3 for n = 0)
    from scipy.integrate import simpson

    p = BASE.grid()
    got = simpson(kerr.exact_density(BASE, p), x=p)
    n = np.arange(41)
    w = np.abs(coherent(0.2, 40).amplitudes) ** 2
    s = SQRT2 * 1e4 * np.sin(4e-5 * n)
    ref = float(np.sum(w * (erf(2 + s) - erf(-6 + s)) / 2))
    assert got == pytest.approx(ref, abs=1e-10)


def test_exact_to_weak_density_ratio_is_second_order_gaussian_factor():
    """exact/weak = <exp(-c^2 n^2)> over the amplified Poisson weights, c = sqrt2 alpha kappa."""
    for p in (-1.6, -1.0, -0.6126):
        g = kerr.gain(BASE, p)
        n = np.arange(41)
        w = np.abs(coherent(g * 0.2, 40).amplitudes) ** 2
        c = SQRT2 * 1e4 * 4e-5
        ratio = kerr.exact_density(BASE, p) / kerr.density_weak(BASE, p)
        assert ratio == pytest.approx(np.sum(w * np.exp(-(c * n) ** 2)), rel=1e-6)


# --- weakness residuals -------------------------------------------------------------


def test_protocol_weakness_residuals():
    r = kerr.weakness_residuals(BASE, -1.6)
    assert r[0] == 0.0
    assert r.max() == pytest.approx(0.0800956, rel=1e-5)
    assert np.all(kerr.weakness_residuals(replace(BASE, kappa_T=0.0), -1.6) == 0.0)


def test_protocol_weakness_residuals_against_high_precision():
    p = -1.6
    ex, wk = mp_states(BASE, p, nmax=10)
    ov = complex(ex[0] / mpmath.exp(-mpmath.mpf('0.02')))  # <p|alpha>
    ref = np.array([abs(complex(x - y)) for x, y in zip(ex, wk)]) / abs(ov)
    np.testing.assert_allclose(kerr.weakness_residuals(BASE, p)[:11], ref, atol=1e-10)


# --- config and CSV -------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigError):
        ProtocolConfig(alpha=-1)
    with pytest.raises(ConfigError):
        ProtocolConfig(p_step=0)
    assert BASE.window == (-1.6, kerr.success_threshold(1e4, 4e-5))


def test_csv_format(fig2_records):
    text = kerr.to_csv(fig2_records)
    lines = text.splitlines()
    assert lines[0] == "p,gain,density_weak,density_exact,fidelity"
    row0 = dict(zip(lines[0].split(","), next(l for l in lines[1:] if l.startswith("0,")).split(",")))
    assert float(row0["gain"]) == 1.0
    assert row0["density_weak"] == "0.56419"
    assert text == kerr.to_csv(kerr.sweep(BASE))
