"""Physical read-outs: intensity correlations, Gaussian (Wick) correlations,
Wigner functions, Uhlmann fidelity and Bogoliubov-mode populations.

Wigner convention: x = (a + a')/sqrt(2), [x, p] = i, normalized so that
integral W dx dp = 1; the value is computed by displaced parity,
W(x, p) = Tr[rho D(alpha) P D'(alpha)] / pi with alpha = (x + i p)/sqrt(2),
exact at the given truncation.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, InvariantError, TruncationError
from .fock import (
    DensityMatrix,
    Operator,
    bogoliubov_operator,
    coherent_norm_deficit,
    expectation,
    mode_operator,
)

VACUUM_FLOOR = 1e-12


@dataclass
class WignerGrid:
    """W(x, p) on a rectangular grid; values[i, j] = W(x[i], p[j])."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def norm(self) -> float:
        dx = self.x[1] - self.x[0]
        dp = self.p[1] - self.p[0]
        return float(self.values.sum() * dx * dp)

    def min(self) -> float:
        return float(self.values.min())

    def marginal_x(self) -> np.ndarray:
        dp = self.p[1] - self.p[0]
        return self.values.sum(axis=1) * dp

    def rows(self):
        """(x, p, W) triples in row-major order, for CSV emission."""
        for i, xv in enumerate(self.x):
            for j, pv in enumerate(self.p):
                yield xv, pv, self.values[i, j]


@dataclass(frozen=True)
class GaussianMoments:
    """First and second moments of a single mode: <a>, <a'a>, <a^2>."""

    mean: complex
    occupation: float
    anomalous: complex

    @classmethod
    def from_state(cls, rho: DensityMatrix, a: Operator) -> "GaussianMoments":
        return cls(
            mean=expectation(rho, a),
            occupation=float(np.real(expectation(rho, a.dag() @ a))),
            anomalous=expectation(rho, a @ a),
        )


def g2_zero(rho: DensityMatrix, a: Operator) -> float:
    """Equal-time intensity correlation <a'a'aa> / <a'a>^2."""
    n = np.real(expectation(rho, a.dag() @ a))
    if n <= VACUUM_FLOOR:
        raise InvariantError(f"g2(0) undefined: occupation {n:.3e} at the numeric floor")
    numer = np.real(expectation(rho, a.dag() @ a.dag() @ a @ a))
    return float(numer / n**2)


def g2_gaussian(m: GaussianMoments) -> float:
    """g2(0) of the Gaussian state with the given moments (Wick expansion).

    With fluctuations d = a - <a>, N = <d'd>, M = <d^2>:
    <a'a'aa> = |alpha|^4 + 4|alpha|^2 N + 2 Re(alpha*^2 M) + 2 N^2 + |M|^2.
    """
    alpha = m.mean
    n_f = m.occupation - abs(alpha) ** 2
    m_f = m.anomalous - alpha**2
    if n_f < -1e-10:
        raise InvariantError(f"unphysical moments: fluctuation occupation {n_f:.3e} < 0")
    n_f = max(n_f, 0.0)
    if abs(m_f) ** 2 > n_f * (n_f + 1.0) + 1e-10:
        raise InvariantError(
            f"unphysical moments: |<d^2>|^2 = {abs(m_f)**2:.3e} exceeds N(N+1) = "
            f"{n_f * (n_f + 1.0):.3e}"
        )
    denom = m.occupation
    if denom <= VACUUM_FLOOR:
        raise InvariantError("g2(0) undefined at vacuum occupation")
    numer = (
        abs(alpha) ** 4
        + 4.0 * abs(alpha) ** 2 * n_f
        + 2.0 * np.real(np.conjugate(alpha) ** 2 * m_f)
        + 2.0 * n_f**2
        + abs(m_f) ** 2
    )
    return float(numer / denom**2)


def _parity_vector(dim: int) -> np.ndarray:
    return (-1.0) ** np.arange(dim)


def wigner(
    rho: DensityMatrix,
    x: np.ndarray,
    p: np.ndarray,
    threads: int = 1,
) -> WignerGrid:
    """Wigner function of a single-mode state by displaced parity.

    The displaced-parity kernel <m| D(alpha) P D'(alpha) |n> is evaluated in
    closed form (associated Laguerre recurrence), which is exact for the
    truncated state at every grid point.  Raises TruncationError when the
    state itself carries weight at the top Fock level, i.e. when the state,
    not the grid, is under-resolved.
    """
    if rho.space.n_modes != 1:
        raise ConfigError("wigner expects a single-mode reduced state")
    dim = rho.space.dim
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    top = float(np.real(rho.entries[dim - 1, dim - 1]))
    if top > 3e-4:
        raise TruncationError(
            f"state holds population {top:.2e} at the top Fock level {dim - 1}; "
            "the grid extends beyond representable amplitudes"
        )
    if top > 1e-5:
        warnings.warn(
            f"top Fock level holds population {top:.2e}; Wigner values carry "
            "a comparable truncation error",
            stacklevel=2,
        )
    alpha = (x[:, None] + 1j * p[None, :]) / math.sqrt(2.0)
    if threads > 1 and len(x) >= 2 * threads:
        chunks = np.array_split(np.arange(len(x)), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda ix: _wigner_laguerre(rho.entries, alpha[ix]), chunks)
            )
        values = np.vstack(parts)
    else:
        values = _wigner_laguerre(rho.entries, alpha)
    return WignerGrid(x=x, p=p, values=values)


def _wigner_laguerre(rho: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """W = (1/pi) sum_{mn} rho_mn <n|D P D'|m> with
    <n|D P D'|n+k> = (-1)^n e^{-2|a|^2} sqrt(n!/(n+k)!) (2a)^k L_n^{(k)}(4|a|^2)."""
    dim = rho.shape[0]
    b = 4.0 * np.abs(alpha) ** 2
    total = np.zeros(alpha.shape, dtype=np.complex128)
    for k in range(dim):
        # coefficients c_n = rho[n+k, n] (-1)^n sqrt(n!/(n+k)!)
        n = np.arange(dim - k)
        ratio = np.exp(
            0.5 * (_lgamma_cache(n + 1) - _lgamma_cache(n + k + 1))
        )
        c = np.diagonal(rho, -k).copy() * (-1.0) ** n * ratio
        if not np.any(c):
            continue
        # sum_n c_n L_n^{(k)}(b) by the three-term recurrence
        acc = np.zeros_like(b, dtype=np.complex128)
        lm2 = np.ones_like(b)
        acc += c[0] * lm2
        if len(c) > 1:
            lm1 = 1.0 + k - b
            acc += c[1] * lm1
            for m in range(2, len(c)):
                lm = ((2.0 * m - 1.0 + k - b) * lm1 - (m - 1.0 + k) * lm2) / m
                acc += c[m] * lm
                lm2, lm1 = lm1, lm
        term = (2.0 * alpha) ** k * acc
        total += term if k == 0 else term + np.conjugate(term)
    return np.real(total) * np.exp(-2.0 * np.abs(alpha) ** 2) / math.pi


_LGAMMA = {}


def _lgamma_cache(n: np.ndarray) -> np.ndarray:
    key = (int(n[0]), int(n[-1]), len(n))
    if key not in _LGAMMA:
        _LGAMMA[key] = np.array([math.lgamma(v) for v in n])
    return _LGAMMA[key]


def wigner_displaced_parity_reference(
    rho: DensityMatrix, x: np.ndarray, p: np.ndarray, pad_to: int | None = None
) -> WignerGrid:
    """Slow reference: W = Tr[rho D(alpha) P D'(alpha)]/pi with matrix-exponential
    displacement operators on a zero-padded space.  Test oracle for `wigner`."""
    dim = rho.space.dim
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    amax = math.sqrt(np.max(np.abs(x)) ** 2 + np.max(np.abs(p)) ** 2) / math.sqrt(2.0)
    if pad_to is None:
        pad_to = dim
        while coherent_norm_deficit(amax, pad_to) > 1e-10 and pad_to < dim + 300:
            pad_to += 4
    rho_m = np.zeros((pad_to, pad_to), dtype=np.complex128)
    rho_m[:dim, :dim] = rho.entries
    a = np.zeros((pad_to, pad_to), dtype=np.complex128)
    idx = np.arange(1, pad_to)
    a[idx - 1, idx] = np.sqrt(idx)
    parity = _parity_vector(pad_to)
    values = np.empty((len(x), len(p)))
    for i, xv in enumerate(x):
        for j, pv in enumerate(p):
            al = (xv + 1j * pv) / math.sqrt(2.0)
            d = expm(al * a.conj().T - np.conjugate(al) * a)
            values[i, j] = (
                np.real(np.dot(parity, np.diag(d.conj().T @ rho_m @ d))) / math.pi
            )
    return WignerGrid(x=x, p=p, values=values)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1],
    evaluated as the squared trace norm of sqrt(sigma) sqrt(rho): the singular
    values equal the square roots of the eigenvalues of sqrt(rho) sigma
    sqrt(rho) but do not amplify the eigensolver noise floor."""
    if rho.space != sigma.space:
        raise ConfigError("fidelity needs states on the same space")
    f = float(np.linalg.svd(_psd_sqrt(sigma.entries) @ _psd_sqrt(rho.entries),
                            compute_uv=False).sum() ** 2)
    return min(f, 1.0)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    h = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(h)
    vals = np.where(vals < -1e-12, -1e-12, vals)  # clamp, then zero negatives
    # the eigensolver noise floor (~eps * max) would be amplified by the
    # square root; zero it instead of taking sqrt of noise
    vals = np.where(vals < 1e-13 * max(vals[-1], 0.0), 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def beta_population(rho: DensityMatrix, mode, r: float) -> float:
    """<beta' beta> for the Bogoliubov mode of squeezing r on `mode`."""
    beta = bogoliubov_operator(rho.space, mode, r)
    return float(np.real(expectation(rho, beta.dag() @ beta)))


def quadrature_density(rho: DensityMatrix, x: np.ndarray) -> np.ndarray:
    """Probability density of the x = (a + a')/sqrt(2) quadrature, from the
    harmonic-oscillator position wavefunctions (oracle for Wigner marginals)."""
    if rho.space.n_modes != 1:
        raise ConfigError("expects a single-mode state")
    dim = rho.space.dim
    x = np.asarray(x, dtype=float)
    psi = np.zeros((dim, len(x)))
    psi[0] = np.exp(-0.5 * x**2) / math.pi**0.25
    if dim > 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(2, dim):
        psi[n] = math.sqrt(2.0 / n) * x * psi[n - 1] - math.sqrt((n - 1) / n) * psi[n - 2]
    return np.real(np.einsum("mx,mn,nx->x", psi, rho.entries, psi))
