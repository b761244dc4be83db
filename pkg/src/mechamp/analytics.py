"""Closed-form Langevin / Green's-function layer for the parametrically driven
mechanical mode, used standalone and as oracles for the master-equation
numerics.

Fourier convention: f[w] = integral dt f(t) e^{i w t}.  With that convention
the exact steady anomalous moment is
<beta beta> = +i gamma (n_th + 1/2) sinh(2r) / (2 E_beta - i gamma),
which equals the exact Lindblad steady state of the transformed thermal
dissipators (verified against the master equation to machine precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .models import bogoliubov_params


@dataclass(frozen=True)
class MechanicalResponse:
    """Drive and bath parameters of the mechanical mode (lambda < Delta)."""

    Delta: float
    lam: float
    gamma: float
    n_th: float = 0.0

    def __post_init__(self):
        bogoliubov_params(self.lam, self.Delta)  # validates stability

    @property
    def r(self) -> float:
        return bogoliubov_params(self.lam, self.Delta).r

    @property
    def e_beta(self) -> float:
        return bogoliubov_params(self.lam, self.Delta).e_beta


def chi_matrix(omega: float, m: MechanicalResponse) -> np.ndarray:
    """Inverse of [[i(Delta-w)+g/2, -i lam], [i lam, -i(Delta+w)+g/2]]."""
    g2 = 0.5 * m.gamma
    mat = np.array(
        [
            [1j * (m.Delta - omega) + g2, -1j * m.lam],
            [1j * m.lam, -1j * (m.Delta + omega) + g2],
        ],
        dtype=np.complex128,
    )
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if det == 0:
        raise ConfigError("response matrix is singular at this frequency")
    return np.array([[mat[1, 1], -mat[0, 1]], [-mat[1, 0], mat[0, 0]]]) / det


def beta_covariances(m: MechanicalResponse) -> tuple[float, complex]:
    """Steady (<beta'beta>, <beta beta>) of the transformed thermal bath.

    Valid as a Markov steady state for gamma < E_beta (documented domain);
    the expressions themselves are the exact Lindblad fixed-point moments.
    """
    r = m.r
    e_beta = m.e_beta
    nbar = m.n_th * math.cosh(2 * r) + math.sinh(r) ** 2
    bb = 1j * m.gamma * (m.n_th + 0.5) * math.sinh(2 * r) / (2 * e_beta - 1j * m.gamma)
    return nbar, bb


def greens_retarded(omega, m: MechanicalResponse):
    """(G^R, Gtilde^R): diagonal and anomalous retarded Green's functions,
    G^R = cosh^2 r/(w - E + i g/2) - sinh^2 r/(w + E + i g/2),
    Gtilde^R = sinh(2r)/2 [1/(w - E + i g/2) - 1/(w + E + i g/2)]."""
    w = np.asarray(omega, dtype=np.complex128)
    r, e, g2 = m.r, m.e_beta, 0.5j * m.gamma
    lower = 1.0 / (w - e + g2)
    upper = 1.0 / (w + e + g2)
    gr = math.cosh(r) ** 2 * lower - math.sinh(r) ** 2 * upper
    gr_t = 0.5 * math.sinh(2 * r) * (lower - upper)
    return gr, gr_t


def greens_keldysh(omega, m: MechanicalResponse):
    """(G^K, Gtilde^K) from the exact response matrix:
    G^K = -i gamma (2 n_th + 1)(|chi11|^2 + |chi12|^2),
    Gtilde^K = -i gamma (2 n_th + 1)(chi11 chi21* + chi12 chi22*)."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    gk = np.empty(len(w), dtype=np.complex128)
    gkt = np.empty(len(w), dtype=np.complex128)
    pref = -1j * m.gamma * (2.0 * m.n_th + 1.0)
    for i, wv in enumerate(w):
        chi = chi_matrix(wv, m)
        gk[i] = pref * (abs(chi[0, 0]) ** 2 + abs(chi[0, 1]) ** 2)
        gkt[i] = pref * (
            chi[0, 0] * np.conjugate(chi[1, 0]) + chi[0, 1] * np.conjugate(chi[1, 1])
        )
    if np.isscalar(omega):
        return gk[0], gkt[0]
    return gk, gkt


def greens_keldysh_large_r(omega, m: MechanicalResponse):
    """Closed-form large-amplification limit (e^{2r} >> 1, gamma << E_beta):
    G^K = Gtilde^K = (1 + 2 n_th) e^{4r}/8 [sum of four resonance terms]."""
    w = np.asarray(omega, dtype=np.complex128)
    e, g2 = m.e_beta, 0.5j * m.gamma
    pref = (1.0 + 2.0 * m.n_th) * math.exp(4.0 * m.r) / 8.0
    val = pref * (
        1.0 / (w - e + g2) + 1.0 / (w + e + g2) - 1.0 / (w - e - g2) - 1.0 / (w + e - g2)
    )
    return val


def heating_rate(
    gamma: float, g: float, e_beta: float, r: float, n_th: float, n_j: float
) -> float:
    """Rate at which amplified mechanical noise heats a cavity holding n_j
    photons in its partner: Gamma = gamma (g/E_beta)^2 n_j (2 n_th + 1) e^{4r}.
    Order-of-magnitude estimate, valid for e^{2r} >> 1."""
    return gamma * (g / e_beta) ** 2 * n_j * (2.0 * n_th + 1.0) * math.exp(4.0 * r)


def interaction_kernels(omega_grid, g: float, m: MechanicalResponse):
    """Effective photon-photon kernels (Lambda[w], Lambdatilde[w]) = g^2/2 * G^R."""
    gr, gr_t = greens_retarded(omega_grid, m)
    return 0.5 * g**2 * gr, 0.5 * g**2 * gr_t
