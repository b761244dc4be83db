"""Lindblad master-equation engine.

Generators act on dense density matrices through sparse operator products;
time integration is adaptive embedded Runge-Kutta (Dormand-Prince 4(5)) with
per-step error control, and steady states come from a sparse direct solve of
the vectorized generator with the trace constraint replacing one row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import DOP853, RK45

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateSteadyStateError,
    InvariantError,
    StiffnessError,
)
from .fock import DensityMatrix, HilbertSpace, Operator, mode_operator

DIRECT_SOLVE_DIM_CAP = 250  # total Hilbert dimension; beyond it, integrate
STEADY_RESIDUAL_TOL = 1e-10
TRACE_DRIFT_TOL = 1e-7
FINAL_EIG_TOL = -1e-6


@dataclass(frozen=True)
class Dissipator:
    """Lindblad channel D[J] rho = J rho J' - {J'J, rho}/2 at a given rate."""

    jump: Operator
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ConfigError(f"dissipator rate must be nonnegative, got {self.rate}")


class Liouvillian:
    """Generator L[rho] = -i[H, rho] + sum_k rate_k D[J_k] rho.

    H may be None (pure dissipation).  The action is computed with the
    effective-Hamiltonian split H_eff = H - (i/2) sum rate J'J so each
    application costs 2 + 2*n_jumps sparse-dense products.
    """

    def __init__(self, h: Operator | None, dissipators: list[Dissipator]):
        if h is None and not dissipators:
            raise ConfigError("empty generator")
        spaces = ([h.space] if h is not None else []) + [d.jump.space for d in dissipators]
        self.space: HilbertSpace = spaces[0]
        for s in spaces[1:]:
            if s != self.space:
                raise ConfigError("generator mixes operators from different spaces")
        self.h = h
        self.dissipators = list(dissipators)
        dim = self.space.dim
        h_eff = h.entries.astype(np.complex128) if h is not None else sp.csr_matrix((dim, dim), dtype=np.complex128)
        self._jumps = []
        for d in dissipators:
            if d.rate == 0.0:
                continue
            j = (math.sqrt(d.rate) * d.jump).entries
            self._jumps.append((j.tocsr(), j.conjugate().T.tocsr()))
            h_eff = h_eff - 0.5j * (j.conjugate().T @ j)
        self._h_eff = h_eff.tocsr()
        self._h_eff_dag = h_eff.conjugate().T.tocsr()

    def apply(self, rho: np.ndarray, hermitian: bool = False) -> np.ndarray:
        """L[rho].  With `hermitian=True` (valid whenever rho is Hermitian,
        which the Lindblad flow preserves) the right products are obtained
        from conjugate transposes of the left ones, halving the work."""
        if hermitian:
            hr = self._h_eff @ rho
            out = -1j * (hr - hr.conj().T)
            for j, _ in self._jumps:
                jr = j @ rho
                out += j @ jr.conj().T
            return out
        out = -1j * (self._h_eff @ rho - rho @ self._h_eff_dag)
        for j, jdag in self._jumps:
            out += j @ (rho @ jdag)
        return out

    def superoperator(self) -> sp.csr_matrix:
        """Row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho)."""
        dim = self.space.dim
        eye = sp.identity(dim, dtype=np.complex128, format="csr")
        heff = self._h_eff
        sup = -1j * (sp.kron(heff, eye, format="csr") - sp.kron(eye, self._h_eff_dag.T, format="csr"))
        for j, jdag in self._jumps:
            sup = sup + sp.kron(j, jdag.T, format="csr")
        return sup.tocsr()


def build_liouvillian(h: Operator | None, dissipators) -> Liouvillian:
    return Liouvillian(h, list(dissipators))


def frame_transformed_mech_dissipators(
    space: HilbertSpace, mode, gamma: float, n_th: float, r: float
) -> list[Dissipator]:
    """Lab-frame thermal mechanical dissipators written in the beta basis.

    The lab jump b maps exactly (no secular approximation) to
    cosh(r) beta + sinh(r) beta', so the channels are
    gamma(1+n_th) D[cosh r beta + sinh r beta'] and gamma n_th D[h.c.].
    """
    if not np.isfinite(r):
        raise ConfigError("squeezing parameter must be finite")
    beta = mode_operator(space, mode, "annihilate")
    c, s = math.cosh(r), math.sinh(r)
    j_down = c * beta + s * beta.dag()
    out = [Dissipator(j_down, gamma * (1.0 + n_th))]
    if n_th > 0:
        out.append(Dissipator(j_down.dag(), gamma * n_th))
    return out


@dataclass
class Trajectory:
    """Time series of observables plus optional state snapshots."""

    times: np.ndarray
    records: dict = field(default_factory=dict)
    snapshots: dict = field(default_factory=dict)  # time -> DensityMatrix
    max_trace_drift: float = 0.0

    def real(self, name: str) -> np.ndarray:
        return np.real(self.records[name])


def _record(space, rho_mat, observables, t):
    vals = {}
    rho = DensityMatrix(space, rho_mat)
    for name, ob in (observables or {}).items():
        vals[name] = ob(rho, t) if callable(ob) else rho.expect(ob)
    return vals


def evolve(
    rho0: DensityMatrix,
    generator,
    t_grid,
    observables: dict | None = None,
    snapshot_times=(),
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
    check_positivity: bool = True,
    method: str = "rk45",
) -> Trajectory:
    """Integrate rho through t_grid, recording observables at every grid point.

    `generator` is a Liouvillian or a callable t -> Liouvillian.  Snapshot
    times must lie on the grid.  Trace drift beyond 1e-7 raises InvariantError;
    integrator failure raises StiffnessError with diagnostics.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("t_grid must be strictly increasing with >= 2 points")
    space = rho0.space
    dim = space.dim
    static = isinstance(generator, Liouvillian)
    gen = (lambda t: generator) if static else generator

    def rhs(t, y):
        rho = y.view(np.complex128).reshape(dim, dim)
        return gen(t).apply(rho, hermitian=True).reshape(-1).view(np.float64)

    y0 = rho0.entries.astype(np.complex128).reshape(-1).view(np.float64).copy()
    snapshot_times = sorted(float(t) for t in snapshot_times)
    for t_s in snapshot_times:
        if not np.any(np.isclose(t_grid, t_s, rtol=0, atol=1e-12 + 1e-9 * abs(t_s))):
            raise ConfigError(f"snapshot time {t_s} is not on the integration grid")

    records = {name: [] for name in (observables or {})}
    snapshots = {}
    max_drift = 0.0

    def collect(t, y):
        nonlocal max_drift
        rho = y.view(np.complex128).reshape(dim, dim)
        tr = np.trace(rho)
        max_drift = max(max_drift, abs(tr - 1.0))
        if abs(tr - 1.0) >= TRACE_DRIFT_TOL:
            raise InvariantError(f"trace drifted to {tr} at t = {t}")
        for name, val in _record(space, rho, observables, t).items():
            records[name].append(val)
        for t_s in snapshot_times:
            if np.isclose(t, t_s, rtol=0, atol=1e-12 + 1e-9 * abs(t_s)):
                snapshots[t_s] = DensityMatrix(space, rho.copy())

    collect(t_grid[0], y0)
    cls = {"rk45": RK45, "dop853": DOP853}.get(method.lower())
    if cls is None:
        raise ConfigError(f"unknown integrator {method!r}")
    solver = cls(
        rhs, t_grid[0], y0, t_bound=t_grid[-1], rtol=rtol, atol=atol, max_step=max_step
    )
    next_idx = 1
    while next_idx < len(t_grid):
        if solver.status == "finished":
            break
        msg = solver.step()
        if solver.status == "failed":
            raise StiffnessError(
                f"integrator failed at t = {solver.t:.6g} (step {solver.step_size}): {msg}"
            )
        while next_idx < len(t_grid) and t_grid[next_idx] <= solver.t + 1e-14:
            interp = solver.dense_output()
            collect(t_grid[next_idx], np.ascontiguousarray(interp(t_grid[next_idx])))
            next_idx += 1
    if next_idx < len(t_grid):
        raise StiffnessError("integration ended before reaching the final grid point")

    final = solver.y.view(np.complex128).reshape(dim, dim)
    if check_positivity:
        lo = DensityMatrix(space, 0.5 * (final + final.conj().T)).min_eigenvalue()
        if lo <= FINAL_EIG_TOL:
            raise InvariantError(f"final state has eigenvalue {lo:.3e}")

    traj = Trajectory(
        times=t_grid,
        records={k: np.array(v) for k, v in records.items()},
        snapshots=snapshots,
        max_trace_drift=max_drift,
    )
    traj.final_state = DensityMatrix(space, final.copy())
    return traj


def steady_state(
    liouvillian: Liouvillian,
    residual_tol: float = STEADY_RESIDUAL_TOL,
    dim_cap: int = DIRECT_SOLVE_DIM_CAP,
    t_fallback: float = 400.0,
) -> DensityMatrix:
    """Solve L[rho] = 0 with Tr rho = 1.

    Sparse direct solve on the vectorized generator (trace row replaces the
    first row) up to `dim_cap` total Hilbert dimension, long-time integration
    beyond.  The residual ||L[rho]||_max must meet `residual_tol`.
    """
    space = liouvillian.space
    dim = space.dim
    if dim <= dim_cap:
        sup = liouvillian.superoperator().tolil()
        trace_row = np.zeros(dim * dim, dtype=np.complex128)
        trace_row[:: dim + 1] = 1.0
        sup[0, :] = trace_row
        rhs = np.zeros(dim * dim, dtype=np.complex128)
        rhs[0] = 1.0
        try:
            x = spla.spsolve(sup.tocsc(), rhs)
        except RuntimeError as exc:  # SuperLU singularity
            raise DegenerateSteadyStateError(f"vectorized generator is singular: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise DegenerateSteadyStateError("direct solve returned non-finite entries")
        rho = x.reshape(dim, dim)
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.trace(rho).real
    else:
        rho = _steady_by_integration(liouvillian, t_fallback)
    res = np.max(np.abs(liouvillian.apply(rho)))
    if res >= residual_tol:
        raise ConvergenceError(
            f"steady-state residual {res:.3e} exceeds {residual_tol:.1e} "
            f"(dim {dim}); possibly degenerate or ill-conditioned"
        )
    return DensityMatrix(space, rho)


def _steady_by_integration(liouvillian: Liouvillian, t_final: float) -> np.ndarray:
    dim = liouvillian.space.dim
    rho = np.eye(dim, dtype=np.complex128) / dim
    t = 0.0
    span = 10.0
    state = DensityMatrix(liouvillian.space, rho)
    while t < t_final:
        traj = evolve(
            state, liouvillian, np.linspace(t, t + span, 3), check_positivity=False
        )
        state = traj.final_state
        t += span
        if np.max(np.abs(liouvillian.apply(state.entries))) < STEADY_RESIDUAL_TOL:
            return state.entries
    return state.entries
