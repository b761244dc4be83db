import math

import numpy as np
import pytest

from mechamp.dynamics import (
    Dissipator,
    Liouvillian,
    build_liouvillian,
    evolve,
    frame_transformed_mech_dissipators,
    steady_state,
)
from mechamp.errors import (
    ConfigError,
    ConvergenceError,
    DegenerateSteadyStateError,
)
from mechamp.fock import (
    DensityMatrix,
    basis_state,
    dm_from_state,
    expectation,
    make_space,
    mode_operator,
    squeeze_operator,
    thermal_dm_single,
    vacuum_state,
)
from mechamp.models import ModelParams, build_h_polaron


def test_dissipator_rejects_negative_rate():
    s = make_space([3], ["m"])
    a = mode_operator(s, "m", "annihilate")
    with pytest.raises(ConfigError):
        Dissipator(a, -1.0)


def test_unitary_evolution_preserves_purity():
    s = make_space([6], ["m"])
    a = mode_operator(s, "m", "annihilate")
    h = 0.9 * (a + a.dag())
    rho0 = dm_from_state(s, basis_state(s, [1]))
    traj = evolve(rho0, build_liouvillian(h, []), np.linspace(0, 1.0, 5))
    final = traj.final_state.entries
    purity = np.trace(final @ final).real
    assert purity == pytest.approx(1.0, abs=1e-8)


def test_trace_preservation_random_state():
    rng = np.random.default_rng(11)
    s = make_space([4, 3], ["a", "b"])
    m = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    rho = (m @ m.conj().T)
    rho /= np.trace(rho)
    a = mode_operator(s, "a", "annihilate")
    b = mode_operator(s, "b", "annihilate")
    liou = build_liouvillian(0.7 * (a.dag() @ b + b.dag() @ a),
                             [Dissipator(a, 1.0), Dissipator(b.dag(), 0.2)])
    assert abs(np.trace(liou.apply(rho))) < 1e-10
    # hermitian fast path agrees with the generic one
    full = liou.apply(rho)
    fast = liou.apply(rho, hermitian=True)
    assert np.allclose(full, fast, atol=1e-12)


def test_photon_decay_law():
    s = make_space([5], ["m"])
    a = mode_operator(s, "m", "annihilate")
    liou = build_liouvillian(None, [Dissipator(a, 1.0)])
    rho0 = dm_from_state(s, basis_state(s, [1]))
    grid = np.linspace(0, 3, 25)
    traj = evolve(rho0, liou, grid, observables={"n": a.dag() @ a})
    assert np.max(np.abs(traj.real("n") - np.exp(-grid))) < 1e-6


def test_gamma_only_decay_from_fock1():
    gamma = 0.37
    s = make_space([4], ["m"])
    b = mode_operator(s, "m", "annihilate")
    liou = build_liouvillian(None, [Dissipator(b, gamma)])
    grid = np.linspace(0, 5, 11)
    traj = evolve(dm_from_state(s, basis_state(s, [1])), liou, grid,
                  observables={"n": b.dag() @ b})
    assert np.max(np.abs(traj.real("n") - np.exp(-gamma * grid))) < 1e-6


def test_thermal_steady_state():
    s = make_space([16], ["m"])
    b = mode_operator(s, "m", "annihilate")
    nbar = 0.5
    liou = build_liouvillian(None, [Dissipator(b, 1.0 * (1 + nbar)), Dissipator(b.dag(), 1.0 * nbar)])
    rho = steady_state(liou)
    assert expectation(rho, b.dag() @ b).real == pytest.approx(nbar, abs=1e-6)


def test_driven_cavity_steady_state():
    s = make_space([12], ["m"])
    a = mode_operator(s, "m", "annihilate")
    eps = 0.05
    rho = steady_state(build_liouvillian(eps * (a + a.dag()), [Dissipator(a, 1.0)]))
    assert expectation(rho, a) == pytest.approx(-2j * eps, abs=1e-8)


def test_frame_dissipators_reduce_at_r0():
    s = make_space([5], ["m"])
    ds = frame_transformed_mech_dissipators(s, "m", 0.3, 0.4, 0.0)
    b = mode_operator(s, "m", "annihilate")
    assert len(ds) == 2
    assert np.allclose(ds[0].jump.toarray(), b.toarray())
    assert ds[0].rate == pytest.approx(0.3 * 1.4)
    assert ds[1].rate == pytest.approx(0.3 * 0.4)


def test_beta_frame_thermometry_oracle():
    # steady state of E_beta n with the exactly transformed thermal dissipators
    # reproduces n_th cosh 2r + sinh^2 r and the closed-form <beta beta>
    e2r = 10.0
    r = 0.5 * math.log(e2r)
    e_beta = 1.0
    gamma = 1e-3 * e_beta
    n_th = 0.5
    s = make_space([60], ["mech"])
    b = mode_operator(s, "mech", "annihilate")
    liou = build_liouvillian(
        e_beta * (b.dag() @ b),
        frame_transformed_mech_dissipators(s, "mech", gamma, n_th, r),
    )
    rho = steady_state(liou)
    n_num = expectation(rho, b.dag() @ b).real
    n_pred = n_th * math.cosh(2 * r) + math.sinh(r) ** 2
    assert n_pred == pytest.approx(4.55, abs=1e-6)
    assert n_num == pytest.approx(n_pred, rel=0.05)
    bb_num = expectation(rho, b @ b)
    bb_pred = 1j * gamma * (n_th + 0.5) * math.sinh(2 * r) / (2 * e_beta - 1j * gamma)
    assert abs(bb_num - bb_pred) / abs(bb_pred) < 0.10


def test_polaron_beat_frequency():
    # (|1,0,0> + |2,0,0>)/sqrt(2): the coherence rotates at 3 Lambda
    r = 1.0
    g = 1.0 * math.exp(-r)  # g_tilde = 0.5
    e_beta = 1.0
    delta_m = e_beta * math.cosh(2 * r)
    space = make_space([3, 2, 2], ["s", "a", "mech"])
    params = ModelParams(g=g, Delta=delta_m, lam=delta_m * math.tanh(2 * r))
    h = build_h_polaron(space, params, r)
    kerr = 0.25
    psi = (basis_state(space, [1, 0, 0]) + basis_state(space, [2, 0, 0])) / math.sqrt(2)
    rho0 = dm_from_state(space, psi)
    i1 = space.basis_index([1, 0, 0])
    i2 = space.basis_index([2, 0, 0])

    def coherence(rho, t):
        return rho.entries[i1, i2]

    grid = np.linspace(0.0, 2.0 * math.pi / (3 * kerr), 25)
    traj = evolve(rho0, build_liouvillian(h, []), grid, observables={"c": coherence})
    phases = np.unwrap(np.angle(traj.records["c"]))
    rate = (phases[-1] - phases[0]) / (grid[-1] - grid[0])
    # E1 - E2 = -Lambda + 4 Lambda = 3 Lambda
    assert abs(abs(rate) - 3 * kerr) < 1e-6
    assert abs(traj.records["c"][0]) == pytest.approx(abs(traj.records["c"][-1]), abs=1e-6)


def test_steady_state_matches_long_time_on_driven_kerr():
    s = make_space([10], ["m"])
    a = mode_operator(s, "m", "annihilate")
    n = a.dag() @ a
    h = 0.3 * (n @ n) + 0.25 * (a + a.dag())
    liou = build_liouvillian(h, [Dissipator(a, 1.0)])
    rho_ss = steady_state(liou)
    traj = evolve(dm_from_state(s, vacuum_state(s)), liou, np.linspace(0, 50, 11))
    rho_t = traj.final_state
    from mechamp.observables import g2_zero

    assert expectation(rho_ss, n).real == pytest.approx(expectation(rho_t, n).real, abs=1e-4)
    assert g2_zero(rho_ss, a) == pytest.approx(g2_zero(rho_t, a), abs=1e-4)


def test_frame_exactness_lab_vs_beta():
    # same physical quench evolved in the lab frame and in the beta frame
    # agrees on <beta'beta> within 1%; lab truncation enlarged because the
    # quenched state breathes out to ~2r squeezing
    r = 0.405  # e^{2r} = 2.25
    delta_m = math.cosh(2 * r)
    lam0 = delta_m * math.tanh(2 * r)
    gamma, n_th = 0.05, 0.5
    t_grid = np.linspace(0.0, 3.0, 7)

    from mechamp.fock import Operator

    s_lab = make_space([80], ["mech"])
    b = mode_operator(s_lab, "mech", "annihilate")
    h_lab = Operator(
        s_lab,
        (delta_m * (b.dag() @ b).entries
         - 0.5 * lam0 * ((b @ b).entries + (b.dag() @ b.dag()).entries)).tocsr(),
    )
    diss_lab = [Dissipator(b, gamma * (1 + n_th)), Dissipator(b.dag(), gamma * n_th)]
    rho0_lab = DensityMatrix(s_lab, thermal_dm_single(80, 0.3))
    lab = evolve(rho0_lab, build_liouvillian(h_lab, diss_lab), t_grid,
                 check_positivity=False)
    beta_op = math.cosh(r) * b - math.sinh(r) * b.dag()
    n_lab = expectation(lab.final_state, beta_op.dag() @ beta_op).real

    s_f = make_space([60], ["mech"])
    bf = mode_operator(s_f, "mech", "annihilate")
    e_beta = delta_m / math.cosh(2 * r)
    liou_f = build_liouvillian(
        e_beta * (bf.dag() @ bf),
        frame_transformed_mech_dissipators(s_f, "mech", gamma, n_th, r),
    )
    sq = squeeze_operator(s_f, "mech", r).entries
    rho0_f = DensityMatrix(s_f, sq @ thermal_dm_single(60, 0.3) @ sq.conjugate().T)
    frame = evolve(rho0_f, liou_f, t_grid, check_positivity=False)
    n_frame = expectation(frame.final_state, bf.dag() @ bf).real
    assert n_lab == pytest.approx(n_frame, rel=0.01)


def test_degenerate_steady_state_raises():
    # pure dephasing: every diagonal state is steady -> singular problem
    s = make_space([4], ["m"])
    n = mode_operator(s, "m", "number")
    liou = build_liouvillian(None, [Dissipator(n, 1.0)])
    with pytest.raises((DegenerateSteadyStateError, ConvergenceError)):
        steady_state(liou)


def test_evolve_grid_validation():
    s = make_space([3], ["m"])
    a = mode_operator(s, "m", "annihilate")
    liou = build_liouvillian(None, [Dissipator(a, 1.0)])
    rho0 = dm_from_state(s, vacuum_state(s))
    with pytest.raises(ConfigError):
        evolve(rho0, liou, [0.0])
    with pytest.raises(ConfigError):
        evolve(rho0, liou, [0.0, 0.0, 1.0])
    with pytest.raises(ConfigError):
        evolve(rho0, liou, [0.0, 1.0], snapshot_times=[0.5])


def test_space_mismatch_in_generator():
    s1 = make_space([3], ["m"])
    s2 = make_space([4], ["m"])
    with pytest.raises(ConfigError):
        build_liouvillian(
            mode_operator(s1, "m", "number"),
            [Dissipator(mode_operator(s2, "m", "annihilate"), 1.0)],
        )


def test_final_positivity_check():
    s = make_space([8], ["m"])
    a = mode_operator(s, "m", "annihilate")
    liou = build_liouvillian(0.4 * (a + a.dag()), [Dissipator(a, 1.0)])
    traj = evolve(dm_from_state(s, vacuum_state(s)), liou, np.linspace(0, 2, 5),
                  check_positivity=True)
    assert traj.final_state.min_eigenvalue() > -1e-6
