import math

import numpy as np
import pytest

from mechamp.errors import ConfigError, InvariantError, TruncationError
from mechamp.fock import (
    DensityMatrix,
    basis_state,
    coherent_dm_single,
    displace,
    dm_from_state,
    make_space,
    mode_operator,
    squeeze_operator,
    thermal_dm_single,
    vacuum_state,
)
from mechamp.observables import (
    GaussianMoments,
    beta_population,
    fidelity,
    g2_gaussian,
    g2_zero,
    quadrature_density,
    wigner,
    wigner_displaced_parity_reference,
)

S14 = make_space([14], ["m"])
A14 = mode_operator(S14, "m", "annihilate")


def _coherent(alpha, dim=14):
    return DensityMatrix(make_space([dim], ["m"]), coherent_dm_single(dim, alpha))


def test_g2_coherent_fock_thermal():
    assert g2_zero(_coherent(1.0), A14) == pytest.approx(1.0, abs=1e-6)
    rho1 = dm_from_state(S14, basis_state(S14, [1]))
    assert g2_zero(rho1, A14) == pytest.approx(0.0, abs=1e-12)
    s30 = make_space([30], ["m"])
    rho_th = DensityMatrix(s30, thermal_dm_single(30, 1.0))
    assert g2_zero(rho_th, mode_operator(s30, "m", "annihilate")) == pytest.approx(2.0, abs=1e-4)


def test_g2_vacuum_raises():
    rho0 = dm_from_state(S14, vacuum_state(S14))
    with pytest.raises(InvariantError):
        g2_zero(rho0, A14)


def test_g2_gaussian_closed_forms():
    # coherent
    m = GaussianMoments(mean=0.7 + 0.2j, occupation=abs(0.7 + 0.2j) ** 2,
                        anomalous=(0.7 + 0.2j) ** 2)
    assert g2_gaussian(m) == pytest.approx(1.0, rel=1e-12)
    # zero-mean thermal
    m = GaussianMoments(mean=0.0, occupation=1.3, anomalous=0.0)
    assert g2_gaussian(m) == pytest.approx(2.0, rel=1e-12)
    # zero-mean squeezed vacuum: 3 + 1/N
    n = math.sinh(1.0) ** 2
    m = GaussianMoments(mean=0.0, occupation=n, anomalous=-0.5 * math.sinh(2.0))
    assert g2_gaussian(m) == pytest.approx(3.0 + 1.0 / n, rel=1e-12)
    assert g2_gaussian(m) == pytest.approx(3.724061660966311, abs=1e-9)


def test_g2_gaussian_matches_bruteforce_on_squeezed_vacuum():
    # oracle: direct Fock-basis evaluation of <a'a'aa> on S(r)|0>
    s = make_space([120], ["m"])
    a = mode_operator(s, "m", "annihilate")
    rho = dm_from_state(s, squeeze_operator(s, "m", 1.0).entries @ vacuum_state(s))
    brute = g2_zero(rho, a)
    wick = g2_gaussian(GaussianMoments.from_state(rho, a))
    assert brute == pytest.approx(wick, abs=1e-9)
    assert brute == pytest.approx(3.724061660966311, abs=1e-7)


def test_g2_gaussian_rejects_unphysical():
    with pytest.raises(InvariantError):
        g2_gaussian(GaussianMoments(mean=0.0, occupation=-0.5, anomalous=0.0))
    with pytest.raises(InvariantError):
        g2_gaussian(GaussianMoments(mean=0.0, occupation=0.1, anomalous=3.0))


def test_wick_consistency_on_gaussian_states():
    s = make_space([50], ["m"])
    a = mode_operator(s, "m", "annihilate")
    states = [
        dm_from_state(s, displace(s, "m", 0.9).entries @ vacuum_state(s)),
        DensityMatrix(s, thermal_dm_single(50, 0.8)),
        dm_from_state(s, squeeze_operator(s, "m", 0.6).entries @ vacuum_state(s)),
    ]
    for rho in states:
        assert g2_zero(rho, a) == pytest.approx(
            g2_gaussian(GaussianMoments.from_state(rho, a)), abs=1e-9
        )


def test_wigner_vacuum_and_fock1():
    x = np.linspace(-4, 4, 81)
    rho0 = dm_from_state(S14, vacuum_state(S14))
    w = wigner(rho0, x, x)
    assert w.values[40, 40] == pytest.approx(1.0 / math.pi, rel=1e-10)
    assert w.norm() == pytest.approx(1.0, abs=1e-3)
    rho1 = dm_from_state(S14, basis_state(S14, [1]))
    w1 = wigner(rho1, x, x)
    assert w1.values[40, 40] == pytest.approx(-1.0 / math.pi, rel=1e-10)


def test_wigner_coherent_peak_position():
    x = np.linspace(-4, 4, 161)
    w = wigner(_coherent(1.0), x, x)
    i, j = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert x[i] == pytest.approx(math.sqrt(2.0), abs=0.06)
    assert x[j] == pytest.approx(0.0, abs=0.06)


def test_wigner_matches_displaced_parity_reference():
    # independent oracle: matrix-exponential displacement operators
    s = make_space([12], ["m"])
    psi = (displace(s, "m", 1.1).entries @ vacuum_state(s)
           + 0.6 * basis_state(s, [2]))
    rho = dm_from_state(s, psi)
    xs = np.linspace(-2.5, 2.5, 11)
    ps = np.linspace(-2.0, 2.0, 9)
    fast = wigner(rho, xs, ps)
    ref = wigner_displaced_parity_reference(rho, xs, ps)
    assert np.max(np.abs(fast.values - ref.values)) < 1e-6


def test_wigner_marginal_matches_quadrature_density():
    x = np.linspace(-5, 5, 121)
    rho = _coherent(0.8, dim=16)
    w = wigner(rho, x, x)
    dens = quadrature_density(rho, x)
    assert np.max(np.abs(w.marginal_x() - dens)) < 1e-3


def test_wigner_guards():
    s = make_space([3], ["m"])
    rho = dm_from_state(s, basis_state(s, [2]))  # all population at the top level
    with pytest.raises(TruncationError):
        wigner(rho, np.linspace(-3, 3, 7), np.linspace(-3, 3, 7))
    s2 = make_space([2, 2], ["a", "b"])
    with pytest.raises(ConfigError):
        wigner(dm_from_state(s2, vacuum_state(s2)), np.linspace(-1, 1, 3), np.linspace(-1, 1, 3))


def test_wigner_threaded_matches_serial():
    rho = _coherent(0.9)
    x = np.linspace(-3, 3, 41)
    serial = wigner(rho, x, x, threads=1)
    threaded = wigner(rho, x, x, threads=3)
    assert np.array_equal(serial.values, threaded.values)


def test_wigner_rows_row_major():
    rho = dm_from_state(make_space([4], ["m"]), vacuum_state(make_space([4], ["m"])))
    x = np.array([-1.0, 0.0, 1.0])
    p = np.array([-0.5, 0.5])
    w = wigner(rho, x, p)
    rows = list(w.rows())
    assert [r[:2] for r in rows] == [
        (-1.0, -0.5), (-1.0, 0.5), (0.0, -0.5), (0.0, 0.5), (1.0, -0.5), (1.0, 0.5)
    ]


def test_fidelity_basic_values():
    rho = _coherent(0.6)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)
    s = make_space([30], ["m"])
    r0 = dm_from_state(s, basis_state(s, [0]))
    r1 = dm_from_state(s, basis_state(s, [1]))
    assert fidelity(r0, r1) == pytest.approx(0.0, abs=1e-12)
    # pure |0> vs thermal nbar = 1: F = <0|rho_th|0> = 1/(1+nbar)
    rho_th = DensityMatrix(s, thermal_dm_single(30, 1.0))
    assert fidelity(r0, rho_th) == pytest.approx(1.0 / 2.0, abs=1e-6)


def test_fidelity_symmetry_and_unitary_invariance():
    s = make_space([36], ["m"])
    rho = DensityMatrix(s, thermal_dm_single(36, 0.25))
    sig = dm_from_state(s, displace(s, "m", 0.5).entries @ vacuum_state(s))
    assert fidelity(rho, sig) == pytest.approx(fidelity(sig, rho), abs=1e-9)
    u = displace(s, "m", 0.3).entries
    rho_u = DensityMatrix(s, u @ rho.entries @ u.conj().T)
    sig_u = DensityMatrix(s, u @ sig.entries @ u.conj().T)
    assert fidelity(rho_u, sig_u) == pytest.approx(fidelity(rho, sig), abs=1e-9)


def test_beta_population_values():
    s = make_space([40], ["m"])
    rho0 = dm_from_state(s, vacuum_state(s))
    assert beta_population(rho0, "m", 0.0) == pytest.approx(0.0, abs=1e-12)
    from mechamp.models import r_from_db

    r20 = r_from_db(20.0)
    s_big = make_space([60], ["m"])
    rho_vac = dm_from_state(s_big, vacuum_state(s_big))
    assert beta_population(rho_vac, "m", r20) == pytest.approx(24.5025, abs=1e-3)
    # defining property: the matching squeezed vacuum holds no beta quanta
    from mechamp.fock import squeezed_vacuum_state

    r = 0.8
    rho_sq = dm_from_state(s_big, squeezed_vacuum_state(s_big, "m", r))
    assert beta_population(rho_sq, "m", r) < 1e-6
