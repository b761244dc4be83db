import math

import numpy as np
import pytest

from mechamp.analytics import (
    MechanicalResponse,
    beta_covariances,
    chi_matrix,
    greens_keldysh,
    greens_keldysh_large_r,
    greens_retarded,
    heating_rate,
    interaction_kernels,
)
from mechamp.errors import ConfigError
from mechamp.models import r_from_db


def _response(e2r, e_beta=1.0, gamma=1e-3, n_th=0.0):
    r = 0.5 * math.log(e2r) if e2r > 1 else 0.0
    delta = e_beta * math.cosh(2 * r)
    return MechanicalResponse(Delta=delta, lam=delta * math.tanh(2 * r),
                              gamma=gamma, n_th=n_th)


def test_response_validates_stability():
    with pytest.raises(ConfigError):
        MechanicalResponse(Delta=1.0, lam=1.2, gamma=0.1)


def test_chi_matrix_no_drive():
    m = MechanicalResponse(Delta=2.0, lam=0.0, gamma=0.4, n_th=0.0)
    chi = chi_matrix(2.0, m)  # omega = Delta
    assert chi[0, 0] == pytest.approx(2.0 / 0.4, rel=1e-12)
    assert chi[0, 1] == 0.0


def test_chi_matrix_inverse_consistency():
    m = MechanicalResponse(Delta=2.0, lam=1.1, gamma=0.3, n_th=0.2)
    rng = np.random.default_rng(5)
    for omega in rng.uniform(-4, 4, 5):
        chi = chi_matrix(omega, m)
        inv = np.array(
            [
                [1j * (m.Delta - omega) + m.gamma / 2, -1j * m.lam],
                [1j * m.lam, -1j * (m.Delta + omega) + m.gamma / 2],
            ]
        )
        assert np.max(np.abs(chi @ inv - np.eye(2))) < 1e-12


def test_beta_covariances_values():
    m0 = MechanicalResponse(Delta=1.0, lam=0.0, gamma=1e-3, n_th=0.7)
    n, bb = beta_covariances(m0)
    assert n == pytest.approx(0.7, rel=1e-12)
    assert bb == 0.0
    m = _response(10.0, gamma=1e-3, n_th=0.5)
    n, bb = beta_covariances(m)
    assert n == pytest.approx(4.55, abs=1e-6)
    # gamma -> 0 limit
    m_small = _response(10.0, gamma=1e-9, n_th=0.5)
    _, bb_small = beta_covariances(m_small)
    assert abs(bb_small) < 1e-8


def test_greens_retarded_limits():
    m0 = MechanicalResponse(Delta=1.7, lam=0.0, gamma=0.2, n_th=0.0)
    gr, grt = greens_retarded(0.4, m0)
    assert grt == 0.0
    assert gr == pytest.approx(1.0 / (0.4 - 1.7 + 0.1j), rel=1e-12)


def test_greens_retarded_equal_at_large_r():
    # |G - Gtilde|/|G| is O(1) * e^{-2r}; the prefactor peaks at ~6 near the
    # grid edge where the two pole contributions nearly cancel
    m = _response(100.0, gamma=1e-3)
    w = np.linspace(-3, 3, 301)
    gr, grt = greens_retarded(w, m)
    rel = np.max(np.abs(gr - grt) / np.abs(gr))
    assert rel < 10.0 * math.exp(-2 * m.r)
    assert rel > 0.1 * math.exp(-2 * m.r)


def test_greens_chi_identity_exact():
    m = MechanicalResponse(Delta=2.0, lam=1.2, gamma=0.3, n_th=0.0)
    for w in (-1.7, 0.0, 0.9, 3.1):
        gr, grt = greens_retarded(w, m)
        chi = chi_matrix(w, m)
        assert gr == pytest.approx(-1j * chi[0, 0], abs=1e-13)
        assert grt == pytest.approx(1j * chi[0, 1], abs=1e-13)


def test_keldysh_no_drive_value():
    gamma, n_th = 0.35, 0.8
    m = MechanicalResponse(Delta=2.0, lam=0.0, gamma=gamma, n_th=n_th)
    gk, gkt = greens_keldysh(2.0, m)  # omega = Delta
    assert gk == pytest.approx(-1j * (2 * n_th + 1) * 4.0 / gamma, rel=1e-12)
    assert abs(gkt) < 1e-15


def test_keldysh_purely_imaginary_negative():
    m = _response(50.0, gamma=0.05, n_th=0.4)
    gk, _ = greens_keldysh(np.linspace(-5, 5, 41), m)
    assert np.max(np.abs(gk.real)) < 1e-12
    assert np.all(gk.imag < 0)


def test_keldysh_large_r_closed_form():
    # the closed form agrees within 5% wherever G^K carries weight (>= 1% of
    # its peak); only the negligible far tails deviate in relative terms
    m = _response(1000.0, gamma=1e-3, n_th=0.3)
    w = np.linspace(-3, 3, 6001)
    gk, gkt = greens_keldysh(w, m)
    gk_lr = greens_keldysh_large_r(w, m)
    mask = np.abs(gk) > 0.01 * np.max(np.abs(gk))
    assert mask.sum() > 4
    assert np.max(np.abs(gk[mask] - gk_lr[mask]) / np.abs(gk[mask])) < 0.05
    assert np.max(np.abs(gkt[mask] - gk_lr[mask]) / np.abs(gkt[mask])) < 0.05


def test_heating_rate_values():
    # r = 0 analog
    assert heating_rate(0.01, 0.3, 2.0, 0.0, 0.5, 1.5) == pytest.approx(
        0.01 * (0.3 / 2.0) ** 2 * 1.5 * 2.0, rel=1e-12
    )
    # Fig. 4 parameters with n_j = 1 give 0.2 kappa
    r30 = r_from_db(30.0)
    e_beta = 2.0 * 0.15 * math.exp(r30)
    assert heating_rate(1e-4, 0.3, e_beta, r30, 0.5, 1.0) == pytest.approx(0.2, abs=1e-3)
    # doubling the amplification in dB multiplies by e^{4 dr} = 1e4
    r20, r40 = r_from_db(20.0), r_from_db(40.0)
    ratio = heating_rate(1e-4, 0.3, e_beta, r40, 0.5, 1.0) / heating_rate(
        1e-4, 0.3, e_beta, r20, 0.5, 1.0
    )
    assert ratio == pytest.approx(1e4, rel=1e-9)


def test_interaction_kernels_limits():
    # r = 0, omega = 0, gamma -> 0: Lambda[0] = -g^2/(2 Delta)
    m0 = MechanicalResponse(Delta=3.0, lam=0.0, gamma=1e-9, n_th=0.0)
    lam_k, lam_kt = interaction_kernels(0.0, 0.2, m0)
    assert lam_k == pytest.approx(-0.2**2 / (2 * 3.0), rel=1e-6)
    assert lam_kt == 0.0
    # large r: |Lambda[0]| -> g_tilde^2 / E_beta
    m = _response(1000.0, gamma=1e-4)
    g = 0.1
    lam_k, _ = interaction_kernels(0.0, g, m)
    g_t = 0.5 * g * math.exp(m.r)
    assert abs(lam_k) == pytest.approx(g_t**2 / m.e_beta, rel=5e-3)


def test_retarded_causality():
    # inverse FT of G^R vanishes for t < 0 within spectral-leakage tolerance;
    # a Hann taper suppresses the hard-cutoff ringing of the 1/omega tail
    m = _response(10.0, gamma=0.3)
    n = 2**15
    w = np.linspace(-200, 200, n, endpoint=False)
    gr, _ = greens_retarded(w, m)
    taper = 0.5 * (1.0 + np.cos(math.pi * w / 200.0))
    dw = w[1] - w[0]
    # g(t_k) = (1/2pi) int dw G[w] e^{-i w t_k}
    gt = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(gr * taper))) * dw / (2 * math.pi)
    t = np.fft.fftshift(np.fft.fftfreq(n, d=dw / (2 * math.pi)))
    peak = np.max(np.abs(gt))
    neg = np.abs(gt[t < -0.5])
    assert np.max(neg) < 1e-3 * peak


def test_kramers_sign_spot_check():
    rng = np.random.default_rng(9)
    for _ in range(6):
        e2r = rng.uniform(2, 200)
        m = _response(e2r, gamma=10 ** rng.uniform(-4, -1))
        gr, _ = greens_retarded(m.e_beta, m)  # on the upper resonance
        assert gr.imag < 0
