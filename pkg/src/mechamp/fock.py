"""Truncated multimode Fock-space linear algebra.

Spaces are immutable tensor products of single-mode Fock spaces (the listed
mode order defines the tensor order).  Operators are sparse complex matrices
tied to a space; density matrices are dense complex matrices tied to a space.
All rates and energies elsewhere in the package are in units of the cavity
linewidth kappa = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import ConfigError, InvariantError

HERMITICITY_TOL = 1e-12
COHERENT_DEFICIT_TOL = 1e-6


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor product of truncated single-mode Fock spaces."""

    mode_dims: tuple[int, ...]
    mode_labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.mode_dims) != len(self.mode_labels):
            raise ConfigError("mode_dims and mode_labels must have equal length")
        if len(set(self.mode_labels)) != len(self.mode_labels):
            raise ConfigError("mode labels must be unique")
        for d in self.mode_dims:
            if int(d) != d or d < 2:
                raise ConfigError(f"every mode dimension must be an integer >= 2, got {d}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    def mode_index(self, mode: str | int) -> int:
        if isinstance(mode, int):
            if not 0 <= mode < self.n_modes:
                raise ConfigError(f"mode index {mode} out of range")
            return mode
        try:
            return self.mode_labels.index(mode)
        except ValueError:
            raise ConfigError(f"unknown mode {mode!r}; have {self.mode_labels}") from None

    def bumped(self, extra: int = 2) -> "HilbertSpace":
        """Same space with every truncation enlarged (truncation-adequacy runs)."""
        return HilbertSpace(tuple(d + extra for d in self.mode_dims), self.mode_labels)

    def basis_index(self, occupations) -> int:
        """Flat index of the Fock basis state |n_0, n_1, ...>."""
        if len(occupations) != self.n_modes:
            raise ConfigError("need one occupation per mode")
        idx = 0
        for n, d in zip(occupations, self.mode_dims):
            if not 0 <= n < d:
                raise ConfigError(f"occupation {n} outside mode dimension {d}")
            idx = idx * d + n
        return idx


def make_space(mode_dims, labels=None) -> HilbertSpace:
    """Build a HilbertSpace; labels default to mode0, mode1, ..."""
    dims = tuple(int(d) for d in mode_dims)
    if labels is None:
        labels = tuple(f"mode{i}" for i in range(len(dims)))
    return HilbertSpace(dims, tuple(labels))


@dataclass(frozen=True)
class Operator:
    """Sparse complex operator on a HilbertSpace.

    When `hermitian=True` is passed the matrix is verified to be Hermitian
    within 1e-12 (max-norm) and an InvariantError is raised otherwise.
    """

    space: HilbertSpace
    entries: sp.csr_matrix = field(repr=False)
    hermitian: bool | None = None

    def __post_init__(self):
        mat = sp.csr_matrix(self.entries, dtype=np.complex128)
        mat.sort_indices()
        object.__setattr__(self, "entries", mat)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ConfigError(f"operator shape {mat.shape} does not match space dim {self.space.dim}")
        if self.hermitian:
            defect = _max_abs(mat - mat.conjugate().T)
            if defect >= HERMITICITY_TOL:
                raise InvariantError(f"operator marked hermitian has defect {defect:.3e}")

    def dag(self) -> "Operator":
        return Operator(self.space, self.entries.conjugate().T.tocsr())

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return _max_abs(self.entries - self.entries.conjugate().T) < tol

    def norm_max(self) -> float:
        return _max_abs(self.entries)

    def toarray(self) -> np.ndarray:
        return self.entries.toarray()

    def __add__(self, other):
        self._check(other)
        return Operator(self.space, (self.entries + other.entries).tocsr())

    def __sub__(self, other):
        self._check(other)
        return Operator(self.space, (self.entries - other.entries).tocsr())

    def __mul__(self, scalar):
        return Operator(self.space, (self.entries * complex(scalar)).tocsr())

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.space, (self.entries @ other.entries).tocsr())

    def _check(self, other):
        if not isinstance(other, Operator):
            raise TypeError("expected Operator")
        if other.space is not self.space and other.space != self.space:
            raise ConfigError("operators live on different spaces")


@dataclass
class DensityMatrix:
    """System state: trace one, Hermitian, positive within tolerance."""

    space: HilbertSpace
    entries: np.ndarray

    TRACE_TOL = 1e-9
    HERM_TOL = 1e-9
    EIG_TOL = -1e-8

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.complex128)
        if self.entries.shape != (self.space.dim, self.space.dim):
            raise ConfigError("density matrix shape does not match space")

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def validate(self, check_positivity: bool = False, eig_tol: float | None = None):
        """Raise InvariantError when trace/hermiticity (and optionally
        positivity, which costs an eigendecomposition) are violated."""
        tr = self.trace()
        if abs(tr - 1.0) >= self.TRACE_TOL:
            raise InvariantError(f"trace deviates from one: {tr}")
        herm = np.max(np.abs(self.entries - self.entries.conj().T))
        if herm >= self.HERM_TOL:
            raise InvariantError(f"hermiticity defect {herm:.3e}")
        if check_positivity:
            lo = self.min_eigenvalue()
            if lo <= (self.EIG_TOL if eig_tol is None else eig_tol):
                raise InvariantError(f"negative eigenvalue {lo:.3e}")
        return self

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def expect(self, op: Operator) -> complex:
        return expectation(self, op)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.space, self.entries.copy())


def _max_abs(mat: sp.spmatrix) -> float:
    return float(np.max(np.abs(mat.data))) if mat.nnz else 0.0


# ---------------------------------------------------------------------------
# mode operators


def _single_mode_matrix(dim: int, kind: str) -> sp.csr_matrix:
    n = np.arange(dim)
    if kind == "annihilate":
        return sp.diags(np.sqrt(n[1:]), 1, shape=(dim, dim), dtype=np.complex128).tocsr()
    if kind == "create":
        return sp.diags(np.sqrt(n[1:]), -1, shape=(dim, dim), dtype=np.complex128).tocsr()
    if kind == "number":
        return sp.diags(n.astype(np.complex128), 0).tocsr()
    if kind == "parity":
        return sp.diags((-1.0 + 0j) ** n, 0).tocsr()
    if kind == "identity":
        return sp.identity(dim, dtype=np.complex128, format="csr")
    if kind == "position":
        # x = (a + a^dag)/sqrt(2), the [x, p] = i convention used by the
        # Wigner-function layer
        a = _single_mode_matrix(dim, "annihilate")
        return ((a + a.conjugate().T) / math.sqrt(2.0)).tocsr()
    raise ConfigError(f"unknown operator kind {kind!r}")


def embed(space: HilbertSpace, mode, mat: sp.spmatrix) -> Operator:
    """Single-mode matrix, identity on every other mode."""
    k = space.mode_index(mode)
    out = None
    for i, d in enumerate(space.mode_dims):
        factor = mat if i == k else sp.identity(d, dtype=np.complex128, format="csr")
        out = factor if out is None else sp.kron(out, factor, format="csr")
    return Operator(space, out.tocsr())


def mode_operator(space: HilbertSpace, mode, kind: str) -> Operator:
    k = space.mode_index(mode)
    return embed(space, k, _single_mode_matrix(space.mode_dims[k], kind))


def bogoliubov_operator(space: HilbertSpace, mode, r: float) -> Operator:
    """beta = a cosh(r) - a^dag sinh(r) on the given mode."""
    if not np.isfinite(r):
        raise ConfigError("squeezing parameter must be finite")
    a = mode_operator(space, mode, "annihilate")
    adag = mode_operator(space, mode, "create")
    return math.cosh(r) * a - math.sinh(r) * adag


def coherent_norm_deficit(alpha: complex, dim: int) -> float:
    """Probability weight of the coherent state lying above the truncation."""
    n = np.arange(dim)
    # log-domain accumulation avoids overflow for large |alpha|
    logterms = 2 * n * np.log(max(abs(alpha), 1e-300)) - [math.lgamma(k + 1) for k in n]
    kept = np.exp(logterms - abs(alpha) ** 2).sum()
    return max(0.0, 1.0 - float(kept))


def displace(space: HilbertSpace, mode, alpha: complex) -> Operator:
    """Displacement operator exp(alpha a^dag - alpha* a) on one mode.

    Built with the scaling-and-squaring matrix exponential of the truncated
    generator, hence exactly unitary on the retained subspace.  Warns when the
    coherent state D(alpha)|0> is not representable within 1e-6.
    """
    k = space.mode_index(mode)
    d = space.mode_dims[k]
    deficit = coherent_norm_deficit(alpha, d)
    if deficit > COHERENT_DEFICIT_TOL:
        warnings.warn(
            f"displacement alpha={alpha} has coherent-state norm deficit "
            f"{deficit:.2e} at dim {d}; enlarge the truncation",
            stacklevel=2,
        )
    a = _single_mode_matrix(d, "annihilate").toarray()
    gen = alpha * a.conj().T - np.conjugate(alpha) * a
    return embed(space, k, sp.csr_matrix(expm(gen)))


def squeeze_operator(space: HilbertSpace, mode, r: float) -> Operator:
    """Squeeze S(r) = exp(r (a^2 - a^dag^2)/2); S(r)^dag a S(r) = a cosh r - a^dag sinh r."""
    k = space.mode_index(mode)
    a = _single_mode_matrix(space.mode_dims[k], "annihilate").toarray()
    gen = 0.5 * r * (a @ a - a.conj().T @ a.conj().T)
    return embed(space, k, sp.csr_matrix(expm(gen)))


# ---------------------------------------------------------------------------
# states


def basis_state(space: HilbertSpace, occupations) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=np.complex128)
    psi[space.basis_index(occupations)] = 1.0
    return psi


def vacuum_state(space: HilbertSpace) -> np.ndarray:
    return basis_state(space, (0,) * space.n_modes)


def dm_from_state(space: HilbertSpace, psi: np.ndarray) -> DensityMatrix:
    psi = np.asarray(psi, dtype=np.complex128)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ConfigError("cannot normalize the zero vector")
    psi = psi / nrm
    return DensityMatrix(space, np.outer(psi, psi.conj()))


def thermal_weights(n_th: float, dim: int) -> np.ndarray:
    if n_th <= 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w
    ratio = n_th / (1.0 + n_th)
    w = ratio ** np.arange(dim)
    return w / w.sum()


def product_dm(space: HilbertSpace, single_mode_dms) -> DensityMatrix:
    """Tensor product of per-mode density matrices (dense ndarrays)."""
    if len(single_mode_dms) != space.n_modes:
        raise ConfigError("need one factor per mode")
    out = np.array([[1.0 + 0j]])
    for d, rho in zip(space.mode_dims, single_mode_dms):
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape != (d, d):
            raise ConfigError("factor shape does not match its mode dimension")
        out = np.kron(out, rho)
    return DensityMatrix(space, out)


def thermal_dm_single(dim: int, n_th: float) -> np.ndarray:
    return np.diag(thermal_weights(n_th, dim)).astype(np.complex128)


def coherent_dm_single(dim: int, alpha: complex) -> np.ndarray:
    sub = make_space([dim], ["m"])
    psi = displace(sub, "m", alpha).entries @ vacuum_state(sub)
    return np.outer(psi, psi.conj())


def squeezed_vacuum_state(space: HilbertSpace, mode, r: float) -> np.ndarray:
    """The state annihilated by bogoliubov_operator(space, mode, r):
    S(-r)|0> in the convention of squeeze_operator."""
    return squeeze_operator(space, mode, -r).entries @ vacuum_state(space)


# ---------------------------------------------------------------------------
# partial trace / expectations


def partial_trace(rho: DensityMatrix, keep_modes) -> DensityMatrix:
    """Reduced state on `keep_modes` (labels or indices, order preserved)."""
    space = rho.space
    keep = [space.mode_index(m) for m in keep_modes]
    if not keep:
        raise ConfigError("keep_modes must be a nonempty subset")
    if len(set(keep)) != len(keep):
        raise ConfigError("keep_modes contains duplicates")
    dims = space.mode_dims
    n = space.n_modes
    tensor = rho.entries.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    for i in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=i, axis2=i + (tensor.ndim // 2))
    # surviving axes keep their original relative order
    order = sorted(keep)
    reduced_space = make_space(
        [dims[i] for i in order], [space.mode_labels[i] for i in order]
    )
    d = reduced_space.dim
    out = tensor.reshape(d, d)
    if order != keep:
        perm = [order.index(k) for k in keep]
        m = len(keep)
        t = out.reshape([dims[i] for i in order] * 2)
        t = np.transpose(t, perm + [m + p for p in perm])
        reduced_space = make_space([dims[i] for i in keep], [space.mode_labels[i] for i in keep])
        out = t.reshape(d, d)
    return DensityMatrix(reduced_space, np.ascontiguousarray(out))


def expectation(rho: DensityMatrix, op: Operator) -> complex:
    if op.space != rho.space:
        raise ConfigError("state and operator live on different spaces")
    # Tr(rho O) = sum_ij rho_ij O_ji, evaluated over the sparse entries of O
    return complex(op.entries.multiply(rho.entries.T).sum())
