"""Hamiltonian builders for the two-cavity optomechanical system.

Every builder works on a HilbertSpace whose modes are, by convention,
(cav1, cav2, mech) unless stated otherwise; `mech` is reinterpreted as the
Bogoliubov mode by the squeezed-frame builders.  Units: kappa = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvariantError
from .fock import HilbertSpace, Operator, mode_operator

LN10 = math.log(10.0)


def r_from_db(amplification_db: float) -> float:
    """Squeezing parameter from the amplification factor in dB: e^{2r} = 10^{dB/10}."""
    return amplification_db * LN10 / 20.0


def db_from_r(r: float) -> float:
    return 20.0 * r / LN10


class InstabilityError(ConfigError):
    """Parametric drive at or beyond the lambda = Delta stability boundary."""


@dataclass(frozen=True)
class BogoliubovFrame:
    """Squeezed-frame parameters: tanh(2r) = lambda0/Delta, E_beta = Delta/cosh(2r),
    enhanced coupling g_tilde = g e^r / 2 and Kerr scale Lambda = g_tilde^2 / E_beta."""

    r: float
    e_beta: float
    g_tilde: float | None = None
    kerr: float | None = None

    @property
    def tau_int(self) -> float:
        if self.kerr is None:
            raise ConfigError("frame carries no coupling; pass g to bogoliubov_params")
        return 2.0 * math.pi / self.kerr

    @property
    def delta(self) -> float:
        """Parametric detuning consistent with (r, E_beta)."""
        return self.e_beta * math.cosh(2.0 * self.r)

    @property
    def lam0(self) -> float:
        return self.delta * math.tanh(2.0 * self.r)


def bogoliubov_params(lam0: float, delta: float, g: float | None = None) -> BogoliubovFrame:
    """Frame from the drive strength and detuning; errors at the instability boundary."""
    if lam0 < 0:
        raise ConfigError("lambda0 must be nonnegative")
    if lam0 >= delta:
        raise InstabilityError(f"lambda0 = {lam0} >= Delta = {delta}: parametric instability")
    r = 0.5 * math.atanh(lam0 / delta)
    e_beta = delta / math.cosh(2.0 * r)
    if g is None:
        return BogoliubovFrame(r, e_beta)
    gt = 0.5 * g * math.exp(r)
    return BogoliubovFrame(r, e_beta, gt, gt * gt / e_beta)


def frame_from_r(r: float, e_beta: float, g: float | None = None) -> BogoliubovFrame:
    """Frame pinned by (r, E_beta) instead of (lambda0, Delta)."""
    if g is None:
        return BogoliubovFrame(r, e_beta)
    gt = 0.5 * g * math.exp(r)
    return BogoliubovFrame(r, e_beta, gt, gt * gt / e_beta)


@dataclass
class ModelParams:
    """Physical constants of the two-cavity model, all rates in units of kappa.

    g: bare optomechanical coupling; gamma / n_th: mechanical damping and bath
    occupancy; Delta: parametric detuning omega_M - omega_p; lam: parametric
    strength (complex when time dependent); delta: pump/splitting detuning
    omega_p - omega_21; eps / omega_d: probe amplitude and detuning;
    gamma_beta: dissipative-squeezing rate; dims: per-mode truncations.
    """

    g: float = 0.0
    kappa: float = 1.0
    gamma: float = 0.0
    n_th: float = 0.0
    Delta: float = 0.0
    lam: complex = 0.0
    delta: float = 0.0
    eps: float = 0.0
    omega_d: float = 0.0
    gamma_beta: float = 0.0
    amplification_db: float | None = None
    dims: dict = field(default_factory=dict)

    def __post_init__(self):
        lam0 = float(np.real(self.lam))
        if self.Delta > 0 and lam0 >= self.Delta:
            raise InstabilityError(
                f"|lambda0| = {lam0} must stay below Delta = {self.Delta}"
            )
        if self.amplification_db is not None and self.Delta > 0 and lam0 > 0:
            r_db = r_from_db(self.amplification_db)
            r_drive = 0.5 * math.atanh(lam0 / self.Delta)
            if abs(r_db - r_drive) > 1e-9 * max(1.0, abs(r_db)):
                raise ConfigError(
                    f"amplification_db implies r = {r_db:.6g} but lambda0/Delta implies "
                    f"r = {r_drive:.6g}"
                )

    @property
    def r(self) -> float:
        if self.amplification_db is not None:
            return r_from_db(self.amplification_db)
        return bogoliubov_params(float(np.real(self.lam)), self.Delta).r


def _two_cavity_ops(space: HilbertSpace):
    a1 = mode_operator(space, "cav1", "annihilate")
    a2 = mode_operator(space, "cav2", "annihilate")
    b = mode_operator(space, "mech", "annihilate")
    return a1, a2, b


def build_h_initial(
    space: HilbertSpace,
    params: ModelParams,
    include_counter_rotating: bool = False,
    omega_fast: float | None = None,
    lam_of_t=None,
):
    """Lab-frame Hamiltonian H(t) = Delta b'b - (lam* b^2 + lam b'^2)/2
    + g (a2' a1 b e^{-i delta t} + h.c.), in the interaction picture of the
    free cavities and the mechanical pump.

    The complex drive multiplies b'^2; this is the placement for which the
    transitionless law lambda1 = -dr/dt cancels the frame term exactly (for
    real lam the two placements coincide).  With the counter-rotating flag the
    RWA-dropped term g (a2' a1 b' e^{+i omega_fast t} + h.c.) is added,
    omega_fast standing for omega_p + omega_21.  Returns a callable
    t -> Operator.
    """
    a1, a2, b = _two_cavity_ops(space)
    if include_counter_rotating and omega_fast is None:
        raise ConfigError("omega_fast is required when include_counter_rotating is set")
    n_b = (b.dag() @ b).entries
    b2 = (b @ b).entries
    bdag2 = b2.conjugate().T
    hop = (a2.dag() @ a1 @ b).entries          # a2' a1 b
    hop_cr = (a2.dag() @ a1 @ b.dag()).entries  # a2' a1 b'
    delta = params.delta
    g = params.g
    Delta = params.Delta

    def h_of_t(t: float) -> Operator:
        lam = complex(lam_of_t(t)) if lam_of_t is not None else complex(params.lam)
        mat = Delta * n_b - 0.5 * (np.conjugate(lam) * b2 + lam * bdag2)
        phase = np.exp(-1j * delta * t)
        term = g * phase * hop
        mat = mat + term + term.conjugate().T
        if include_counter_rotating:
            term = g * np.exp(1j * omega_fast * t) * hop_cr
            mat = mat + term + term.conjugate().T
        return Operator(space, mat.tocsr())

    return h_of_t


def build_h_srp(
    space: HilbertSpace,
    params: ModelParams,
    frame_r: float,
    drop_h_prime: bool = False,
    e_beta: float | None = None,
) -> Operator:
    """Bogoliubov-frame Hamiltonian at delta = 0, mech mode read as beta.

    Default keeps the exact transformed coupling
    g [a2' a1 (cosh r beta + sinh r beta') + h.c.], identically equal to the
    enhanced-coupling form plus its e^{-r} correction term; `drop_h_prime`
    keeps only the g_tilde (a2' a1 + a1' a2)(beta + beta') part.
    """
    a1, a2, beta = _two_cavity_ops(space)
    if e_beta is None:
        e_beta = params.Delta / math.cosh(2.0 * frame_r)
    g = params.g
    c, s = math.cosh(frame_r), math.sinh(frame_r)
    h = e_beta * (beta.dag() @ beta)
    hop = a2.dag() @ a1
    if drop_h_prime:
        gt = 0.5 * g * math.exp(frame_r)
        h = h + gt * ((hop + hop.dag()) @ (beta + beta.dag()))
    else:
        term = g * (hop @ (c * beta + s * beta.dag()))
        h = h + term + term.dag()
    return h


def build_h_pat(
    space: HilbertSpace,
    params: ModelParams,
    frame_r: float,
    delta: float,
    e_beta: float | None = None,
) -> Operator:
    """Phonon-assisted photon tunneling: (E_beta - delta) beta'beta
    + g_tilde (a2' a1 beta + a1' a2 beta').  Valid for e^{2r} >> 1; the
    regime check is the caller's responsibility."""
    a1, a2, beta = _two_cavity_ops(space)
    if e_beta is None:
        e_beta = params.Delta / math.cosh(2.0 * frame_r)
    gt = 0.5 * params.g * math.exp(frame_r)
    term = gt * (a2.dag() @ a1 @ beta)
    return (e_beta - delta) * (beta.dag() @ beta) + term + term.dag()


def build_h_polaron(
    space: HilbertSpace,
    params: ModelParams,
    frame_r: float,
    e_beta: float | None = None,
) -> Operator:
    """Polaron-frame spectrum E_beta n_beta - Lambda (n_s - n_a)^2, diagonal in
    the (n_s, n_a, n_beta) number basis.  The space's first two modes are the
    symmetric/antisymmetric photon modes."""
    if e_beta is None:
        e_beta = params.Delta / math.cosh(2.0 * frame_r)
    gt = 0.5 * params.g * math.exp(frame_r)
    kerr = gt * gt / e_beta
    ds, da, db = space.mode_dims
    ns, na, nb = np.meshgrid(np.arange(ds), np.arange(da), np.arange(db), indexing="ij")
    diag = e_beta * nb - kerr * (ns - na) ** 2
    import scipy.sparse as sp

    return Operator(space, sp.diags(diag.reshape(-1).astype(np.complex128), 0).tocsr())


@dataclass(frozen=True)
class SqueezedCavityParams:
    """Single parametrically driven cavity coupled to a mechanical mode.

    omega_d is the probe detuning from the alpha-mode resonance (the Kerr
    resonance sits at omega_d = -g^2 cosh^2(2 r_c)/omega_M).
    """

    g: float
    omega_m: float
    omega_d: float
    eps: float
    gamma: float
    r_c: float
    kappa: float = 1.0

    @property
    def kerr(self) -> float:
        return self.g**2 * math.cosh(2.0 * self.r_c) ** 2 / self.omega_m


def build_squeezed_cavity_model(space: HilbertSpace, p: SqueezedCavityParams):
    """Squeezed-cavity counterexample model on modes (alpha, mech).

    Returns (H, dissipators, a_real) with
    H = delta_alpha n_alpha + omega_M n_b + g cosh(2 r_c) n_alpha (b + b')
        + eps cosh(r_c) (alpha + alpha'),
    delta_alpha = -omega_d, zero-temperature dissipators kappa D[alpha],
    gamma D[b], and the real-photon operator a = cosh(r_c) alpha + sinh(r_c) alpha'.
    """
    from .dynamics import Dissipator

    alpha = mode_operator(space, "alpha", "annihilate")
    b = mode_operator(space, "mech", "annihilate")
    delta_alpha = -p.omega_d
    h = (
        delta_alpha * (alpha.dag() @ alpha)
        + p.omega_m * (b.dag() @ b)
        + p.g * math.cosh(2.0 * p.r_c) * (alpha.dag() @ alpha @ (b + b.dag()))
        + p.eps * math.cosh(p.r_c) * (alpha + alpha.dag())
    )
    dissipators = [Dissipator(alpha, p.kappa), Dissipator(b, p.gamma)]
    a_real = math.cosh(p.r_c) * alpha + math.sinh(p.r_c) * alpha.dag()
    return h, dissipators, a_real


def to_rotating_frame(
    h: Operator,
    space: HilbertSpace,
    eps: float,
    omega_d: float,
    omega_d2: float | None = None,
) -> Operator:
    """Add the symmetric-probe terms in the frame rotating at the drive:
    omega_d (n1 + n2) + eps (a1 + a2 + h.c.).  Equal drive frequencies only."""
    if omega_d2 is not None and omega_d2 != omega_d:
        raise ConfigError("unequal probe frequencies on the two cavities are unsupported")
    a1 = mode_operator(space, "cav1", "annihilate")
    a2 = mode_operator(space, "cav2", "annihilate")
    out = h + omega_d * (a1.dag() @ a1 + a2.dag() @ a2) + eps * (a1 + a2 + a1.dag() + a2.dag())
    if not out.is_hermitian(1e-10):
        raise InvariantError("rotating-frame Hamiltonian lost hermiticity")
    return out
