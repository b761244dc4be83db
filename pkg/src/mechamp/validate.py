"""Fast invariant suite behind the `validate` CLI subcommand.

Each check is a small, self-contained physics assertion that runs in well
under a second; together they cover the commutator/hermiticity identities,
trace preservation, detailed balance, the transitionless-driving law, the
Green's-function limits and the Wick-expansion consistency.
"""

from __future__ import annotations

import math

import numpy as np

from .analytics import (
    MechanicalResponse,
    beta_covariances,
    chi_matrix,
    greens_keldysh,
    greens_retarded,
    heating_rate,
    interaction_kernels,
)
from .dynamics import Dissipator, build_liouvillian, evolve, steady_state
from .fock import (
    DensityMatrix,
    bogoliubov_operator,
    dm_from_state,
    displace,
    expectation,
    make_space,
    mode_operator,
    squeeze_operator,
    squeezed_vacuum_state,
    thermal_dm_single,
    vacuum_state,
)
from .models import bogoliubov_params
from .observables import GaussianMoments, g2_gaussian, g2_zero, wigner
from .pulses import td_schedule


def _check_commutator():
    s = make_space([9], ["m"])
    a = mode_operator(s, "m", "annihilate")
    comm = (a @ a.dag() - a.dag() @ a).toarray()
    err = np.max(np.abs(np.diag(comm)[:-1] - 1.0))
    return err < 1e-12, f"[a,a'] defect {err:.1e}"

def _check_parity_hermitian():
    s = make_space([6], ["m"])
    ok = all(mode_operator(s, "m", k).is_hermitian() for k in ("number", "position", "parity"))
    return ok, "number/position/parity hermitian"

def _check_bogoliubov_vacuum():
    s = make_space([60], ["m"])
    r = 0.5 * math.atanh(0.6)
    res = np.linalg.norm(bogoliubov_operator(s, "m", r).entries @ squeezed_vacuum_state(s, "m", r))
    return res < 1e-8, f"beta on its vacuum: {res:.1e}"

def _check_displacement_unitary():
    s = make_space([18], ["m"])
    d = displace(s, "m", 1.0)
    err = np.max(np.abs((d.dag() @ d).toarray() - np.eye(18)))
    return err < 1e-8, f"D'D - I: {err:.1e}"

def _check_trace_preservation():
    s = make_space([4, 5], ["c", "m"])
    rng = np.random.default_rng(7)
    m = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    a = mode_operator(s, "c", "annihilate")
    b = mode_operator(s, "m", "annihilate")
    h = 0.3 * (a.dag() @ b + b.dag() @ a) + 1.1 * (b.dag() @ b)
    liou = build_liouvillian(h, [Dissipator(a, 1.0), Dissipator(b.dag(), 0.4)])
    drift = abs(np.trace(liou.apply(rho)))
    return drift < 1e-10, f"|Tr L[rho]| = {drift:.1e}"

def _check_thermal_fixed_point():
    s = make_space([16], ["m"])
    b = mode_operator(s, "m", "annihilate")
    liou = build_liouvillian(None, [Dissipator(b, 1.5), Dissipator(b.dag(), 0.5)])
    rho = steady_state(liou)
    n = expectation(rho, b.dag() @ b).real
    return abs(n - 0.5) < 1e-6, f"thermal <n> = {n:.8f}"

def _check_driven_cavity():
    s = make_space([12], ["c"])
    a = mode_operator(s, "c", "annihilate")
    eps = 0.05
    rho = steady_state(build_liouvillian(eps * (a + a.dag()), [Dissipator(a, 1.0)]))
    amp = expectation(rho, a)
    return abs(amp - (-2j * eps)) < 1e-6, f"<a> = {amp:.6f}"

def _check_td_closed_exactness():
    from .observables import beta_population
    r_t = 0.5 * math.atanh(0.8)
    delta = math.cosh(2 * r_t)
    sched = td_schedule(r_t, 0.08, "gaussian", delta, "on")
    s = make_space([50], ["mech"])
    b = mode_operator(s, "mech", "annihilate")
    nb = (b.dag() @ b).entries
    b2 = (b @ b).entries
    from .fock import Operator
    def gen(t):
        lam = sched.lam_of(t)
        mat = delta * nb - 0.5 * (np.conjugate(lam) * b2 + lam * b2.conjugate().T)
        return build_liouvillian(Operator(s, mat.tocsr()), [])
    traj = evolve(dm_from_state(s, vacuum_state(s)), gen, np.linspace(0, 0.08, 9),
                  check_positivity=False)
    pop = beta_population(traj.final_state, "mech", r_t)
    return abs(pop) < 1e-4, f"closed TD residual pop {pop:.1e}"

def _check_beta_thermometry():
    r = 0.5 * math.log(10.0)
    e_beta = 1.0
    m = MechanicalResponse(Delta=e_beta * math.cosh(2 * r), lam=e_beta * math.sinh(2 * r),
                           gamma=1e-3, n_th=0.5)
    n_pred, bb_pred = beta_covariances(m)
    from .dynamics import frame_transformed_mech_dissipators
    s = make_space([60], ["mech"])
    b = mode_operator(s, "mech", "annihilate")
    liou = build_liouvillian(e_beta * (b.dag() @ b),
                             frame_transformed_mech_dissipators(s, "mech", 1e-3, 0.5, r))
    rho = steady_state(liou)
    n_num = expectation(rho, b.dag() @ b).real
    bb_num = expectation(rho, b @ b)
    ok = abs(n_num - n_pred) / n_pred < 0.05 and abs(bb_num - bb_pred) / abs(bb_pred) < 0.1
    return ok, f"<b'b> {n_num:.4f} vs {n_pred:.4f}; <bb> {bb_num:.2e} vs {bb_pred:.2e}"

def _check_chi_identity():
    m = MechanicalResponse(Delta=2.0, lam=1.2, gamma=0.3, n_th=0.0)
    for w in (-1.7, 0.0, 0.9, 3.1):
        gr, grt = greens_retarded(w, m)
        chi = chi_matrix(w, m)
        if abs(gr - (-1j) * chi[0, 0]) > 1e-12 or abs(grt - 1j * chi[0, 1]) > 1e-12:
            return False, f"G^R vs chi identity fails at omega={w}"
    return True, "G^R = -i chi11, Gtilde^R = i chi12"

def _check_greens_limits():
    m0 = MechanicalResponse(Delta=2.0, lam=0.0, gamma=0.1, n_th=0.0)
    _, grt = greens_retarded(0.7, m0)
    if abs(grt) > 1e-14:
        return False, "Gtilde^R nonzero at r=0"
    r = 0.5 * math.log(100.0)
    e_beta = 1.0
    m = MechanicalResponse(Delta=e_beta * math.cosh(2 * r), lam=e_beta * math.sinh(2 * r),
                           gamma=1e-4, n_th=0.0)
    lam_k, _ = interaction_kernels(0.0, 0.1, m)
    g_t = 0.05 * math.exp(r)
    kerr = g_t**2 / e_beta
    ok = abs(abs(lam_k) - kerr) / kerr < 0.02
    return ok, f"|Lambda[0]| = {abs(lam_k):.4f} vs Kerr {kerr:.4f}"

def _check_keldysh_sign():
    m = MechanicalResponse(Delta=3.0, lam=2.0, gamma=0.2, n_th=0.3)
    gk, _ = greens_keldysh(np.linspace(-5, 5, 21), m)
    ok = np.all(np.abs(gk.real) < 1e-12) and np.all(gk.imag < 0)
    return ok, "G^K purely imaginary, negative"

def _check_heating_rate():
    # Fig. 4 parameters with n_j = 1 evaluate to 0.2 kappa
    r = 1.5 * math.log(10.0)  # 30 dB
    e_beta = 2.0 * (0.15 * math.exp(r))
    g = heating_rate(1e-4, 0.3, e_beta, r, 0.5, 1.0)
    return abs(g - 0.2) < 0.01, f"Gamma = {g:.4f} (expect 0.2)"

def _check_wick_consistency():
    # dims sized so the Gaussian test states are truncation-exact to < 1e-10
    s = make_space([50], ["m"])
    a = mode_operator(s, "m", "annihilate")
    states = {
        "coherent": dm_from_state(s, displace(s, "m", 0.9).entries @ vacuum_state(s)),
        "thermal": DensityMatrix(s, thermal_dm_single(50, 0.8)),
        "squeezed": dm_from_state(s, squeeze_operator(s, "m", 0.6).entries @ vacuum_state(s)),
    }
    for name, rho in states.items():
        full = g2_zero(rho, a)
        wick = g2_gaussian(GaussianMoments.from_state(rho, a))
        if abs(full - wick) > 1e-9:
            return False, f"Wick mismatch on {name}: {full} vs {wick}"
    return True, "g2 Wick expansion exact on Gaussian states"

def _check_wigner_norm():
    s = make_space([12], ["m"])
    rho = dm_from_state(s, displace(s, "m", 0.8).entries @ vacuum_state(s))
    xs = np.linspace(-4.5, 4.5, 61)
    grid = wigner(rho, xs, xs)
    return abs(grid.norm() - 1.0) < 1e-3, f"int W = {grid.norm():.6f}"

def _check_stability_error():
    try:
        bogoliubov_params(1.0, 1.0)
        return False, "instability not raised"
    except Exception:
        return True, "lambda >= Delta raises"


CHECKS = [
    ("commutator_truncation_identity", _check_commutator),
    ("hermitian_mode_operators", _check_parity_hermitian),
    ("bogoliubov_annihilates_squeezed_vacuum", _check_bogoliubov_vacuum),
    ("displacement_unitary", _check_displacement_unitary),
    ("liouvillian_trace_preserving", _check_trace_preservation),
    ("thermal_detailed_balance", _check_thermal_fixed_point),
    ("driven_cavity_linear_response", _check_driven_cavity),
    ("td_closed_system_exactness", _check_td_closed_exactness),
    ("beta_mode_thermometry", _check_beta_thermometry),
    ("greens_chi_identity", _check_chi_identity),
    ("greens_limits_kerr_scale", _check_greens_limits),
    ("keldysh_negative_imaginary", _check_keldysh_sign),
    ("heating_rate_formula", _check_heating_rate),
    ("wick_gaussian_consistency", _check_wick_consistency),
    ("wigner_normalization", _check_wigner_norm),
    ("parametric_stability_guard", _check_stability_error),
]


def run_invariant_suite():
    """[(name, passed, detail)] for the fast physics checks."""
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
