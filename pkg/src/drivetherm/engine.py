"""Driven-probe sensitivity engine.

Computes the information current J_V(s) = -i J^-1_pi0([V_H(s), pi0]), the
two-time current correlation kernel K(s, u) = Tr[pi0 J_V(s) J_V(u)], and
the non-equilibrium Fisher-information increment

    I_t = Tr[pi0 (dL_t)^2]
        = integral_0^t integral_0^t w(s) w(u) K_S(s, u) ds du,

with w = dlambda/dbeta and dL_t the accumulated current.  The total
F_total = F_eq + I_t is cross-checked against the spectral Fisher
information of the evolved state, computed along an independent route.

The O(n) dL accumulation is the primary path; the O(n^2) kernel double
integral is retained as a verification mode (identical algebra, identical
quadrature) and for kernel visualization.
"""

from dataclasses import dataclass

import numpy as np

from .bures import spectral_qfi_batch
from .drive import DriveProfile, dlambda_dbeta
from .exceptions import FullRankViolation
from .operators import hermitize
from .propagation import (DRIFT_TOL, EvolutionTrace, TimeGrid,
                          _weighted_v_integral, propagate)
from .thermal import GibbsModel, dpi_dbeta, equilibrium_qfi, equilibrium_sld

#: Test-harness hook: -1 is the physical commutator in the current; +1
#: mutates it into an anticommutator (injected sign error for mutation tests).
_COMMUTATOR_SIGN = -1.0

#: Floor in the relative-disagreement denominator (avoids 0/0 at t=0, no drive).
REL_DISAGREEMENT_FLOOR = 1e-30

#: Row-chunk size for the blocked kernel double sum.
_KERNEL_CHUNK = 256


def _current_ratio(model: GibbsModel) -> np.ndarray:
    """(p_j + sign*p_i)/(p_i + p_j) in the thermal eigenbasis (zero diagonal
    for the physical sign)."""
    p = model.probabilities
    num = p[None, :] + _COMMUTATOR_SIGN * p[:, None]
    return num / (p[:, None] + p[None, :])


def _require_full_rank(model: GibbsModel) -> None:
    if not model.full_rank:
        raise FullRankViolation(
            f"information current needs a full-rank thermal state; smallest "
            f"population {model.probabilities.min():.3e} <= rank floor "
            f"{model.rank_floor:.1e}"
        )


def information_current(model: GibbsModel, v_heisenberg: np.ndarray) -> np.ndarray:
    """Information current -i J^-1_pi0([V_H, pi0]) for one Heisenberg operator.

    Hermitian; identically zero iff V_H commutes with the thermal state; its
    diagonal in the thermal eigenbasis is exactly zero, i.e. the current
    lives entirely in the coherence sector.
    """
    _require_full_rank(model)
    q = model.basis
    vt = q.conj().T @ v_heisenberg @ q
    jt = -2j * _current_ratio(model) * vt
    return q @ jt @ q.conj().T


@dataclass(frozen=True)
class CurrentTrace:
    """Information currents and drive-sensitivity weights on a time grid."""

    grid: TimeGrid
    model: GibbsModel
    currents: np.ndarray          # (n_nodes, d, d) Hermitian
    weights: np.ndarray           # (n_nodes,)  w_k = dlambda/dbeta(t_k)

    @property
    def trapezoid_weights(self) -> np.ndarray:
        """Composite-trapezoid node coefficients on the grid."""
        n = self.grid.n_steps
        if n == 0:
            return np.zeros(1)
        c = np.full(n + 1, self.grid.dt)
        c[0] = c[-1] = 0.5 * self.grid.dt
        return c


def build_current_trace(trace: EvolutionTrace) -> CurrentTrace:
    """Currents at every node plus the weights they enter with.

    Weights vanish identically for temperature-insensitive envelopes; the
    currents may still be nonzero but then carry no Fisher information.
    """
    model = trace.model
    _require_full_rank(model)
    q = model.basis
    vt = np.einsum("ji,kjl,lm->kim", q.conj(), trace.heisenberg_v, q)
    jt = -2j * _current_ratio(model)[None, :, :] * vt
    currents = np.einsum("ij,kjl,ml->kim", q, jt, q.conj())
    weights = np.atleast_1d(
        dlambda_dbeta(trace.drive, trace.grid.nodes, trace.beta)
    ).astype(float)
    return CurrentTrace(grid=trace.grid, model=model, currents=currents,
                        weights=weights)


def kernel(model: GibbsModel, j_s: np.ndarray, j_u: np.ndarray) -> complex:
    """Two-time current correlation K(s, u) = Tr[pi0 J_V(s) J_V(u)].

    Satisfies K(u, s) = conj(K(s, u)); real and nonnegative at coincident
    arguments.
    """
    if j_s.shape != j_u.shape:
        raise ValueError(f"dimension mismatch: {j_s.shape} vs {j_u.shape}")
    return complex(np.trace(model.state @ j_s @ j_u))


def kernel_matrix(ct: CurrentTrace) -> np.ndarray:
    """Full complex kernel K(t_a, t_b) on the grid (O(n^2 d^2) memory)."""
    q = ct.model.basis
    p = ct.model.probabilities
    jt = np.einsum("ji,kjl,lm->kim", q.conj(), ct.currents, q)
    return np.einsum("i,aij,bji->ab", p, jt, jt)


def increment_via_kernel(ct: CurrentTrace, *, return_diagnostics: bool = False):
    """Fisher increment by the double trapezoid of w(s) w(u) K_S(s, u).

    The symmetrized kernel K_S = Re K is used; the antisymmetric part drops
    out of the symmetric double sum, and its residual contribution is
    computed as a diagnostic.  Evaluated in row chunks so large grids never
    materialize the full n^2 kernel.
    """
    q = ct.model.basis
    p = ct.model.probabilities
    jt = np.einsum("ji,kjl,lm->kim", q.conj(), ct.currents, q)
    cw = ct.trapezoid_weights * ct.weights
    total = 0.0
    asym = 0.0
    n = jt.shape[0]
    for a0 in range(0, n, _KERNEL_CHUNK):
        a1 = min(a0 + _KERNEL_CHUNK, n)
        k_chunk = np.einsum("i,aij,bji->ab", p, jt[a0:a1], jt)
        row = cw[a0:a1]
        total += float(row @ k_chunk.real @ cw)
        asym += float(row @ k_chunk.imag @ cw)
    if return_diagnostics:
        return total, abs(asym)
    return total


def _trapezoid_upto(ct: CurrentTrace, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros(1)
    c = np.full(k + 1, ct.grid.dt)
    c[0] = c[-1] = 0.5 * ct.grid.dt
    return c * ct.weights[: k + 1]


def delta_sld(ct: CurrentTrace, k: int | None = None) -> np.ndarray:
    """Accumulated current dL(t_k) = trapezoid of w(s) J_V(s) up to node k."""
    if k is None:
        k = ct.grid.n_steps
    cw = _trapezoid_upto(ct, k)
    return np.einsum("k,kij->ij", cw, ct.currents[: k + 1])


def increment_via_deltaL(ct: CurrentTrace, k: int | None = None) -> float:
    """Fisher increment as Tr[pi0 dL^2]; algebraically identical to the
    kernel double integral under the shared trapezoid quadrature."""
    dl = delta_sld(ct, k)
    return float(np.real(np.trace(ct.model.state @ dl @ dl)))


def increment_series(ct: CurrentTrace) -> np.ndarray:
    """I_t at every grid node, via the running dL accumulation."""
    dl = _delta_sld_stack(ct)
    return np.real(np.einsum("ij,kjl,kli->k", ct.model.state, dl, dl))


@dataclass(frozen=True)
class RunDiagnostics:
    n_steps: int
    dt: float
    unitarity_drift: float
    mixed_term_residual: float


@dataclass(frozen=True)
class QfiResult:
    """Sensitivity of the driven probe at one evolution time.

    ``f_total = f_eq + i_t`` exactly by construction; ``f_spectral`` is the
    independent spectral evaluation on the evolved state and
    ``rel_disagreement`` their relative mismatch.  ``crb_sigma`` is the
    Cramer-Rao standard-deviation bound 1/sqrt(n * F) for the configured
    number of measurements.
    """

    t: float
    f_eq: float
    i_t: float
    f_total: float
    f_spectral: float
    rel_disagreement: float
    crb_sigma: float
    diagnostics: RunDiagnostics


def _crb_sigma(f_total: float, n_measurements: int) -> float:
    if f_total <= 0.0:
        return float("inf")
    return 1.0 / np.sqrt(n_measurements * f_total)


def _delta_sld_stack(ct: CurrentTrace) -> np.ndarray:
    """dL(t_k) for every node via the running trapezoid."""
    n = ct.grid.n_steps
    d = ct.model.dim
    out = np.zeros((n + 1, d, d), dtype=complex)
    if n == 0:
        return out
    wj = ct.weights[:, None, None] * ct.currents
    increments = 0.5 * ct.grid.dt * (wj[:-1] + wj[1:])
    np.cumsum(increments, axis=0, out=out[1:])
    return out


def qfi_time_series(model: GibbsModel, v, drive: DriveProfile, grid: TimeGrid,
                    *, n_measurements: int = 1,
                    drift_tol: float = DRIFT_TOL) -> list[QfiResult]:
    """Full decomposition and spectral cross-check at every grid node."""
    v = hermitize(v)
    trace = propagate(model, v, drive, grid, drift_tol=drift_tol)
    ct = build_current_trace(trace)
    pi0 = model.state
    f_eq = equilibrium_qfi(model)
    l_eq = equilibrium_sld(model)

    dl = _delta_sld_stack(ct)
    i_t = np.real(np.einsum("ij,kjl,kli->k", pi0, dl, dl))
    mixed = np.abs(np.einsum("ij,jl,kli->k", pi0, l_eq, dl))

    m_stack = _weighted_v_integral(trace)
    a_stack = -1j * m_stack
    u = trace.propagators
    rho = np.einsum("kij,jl,kml->kim", u, pi0, u.conj())
    inner = dpi_dbeta(model)[None, :, :] + (a_stack @ pi0 - pi0 @ a_stack)
    drho = np.einsum("kij,kjl,kml->kim", u, inner, u.conj())
    f_spectral = spectral_qfi_batch(rho, drho)

    f_total = f_eq + i_t
    rel = np.abs(f_total - f_spectral) / np.maximum(f_spectral, REL_DISAGREEMENT_FLOOR)

    results = []
    for k, t in enumerate(grid.nodes):
        results.append(
            QfiResult(
                t=float(t),
                f_eq=f_eq,
                i_t=float(i_t[k]),
                f_total=float(f_total[k]),
                f_spectral=float(f_spectral[k]),
                rel_disagreement=float(rel[k]),
                crb_sigma=_crb_sigma(float(f_total[k]), n_measurements),
                diagnostics=RunDiagnostics(
                    n_steps=grid.n_steps,
                    dt=grid.dt,
                    unitarity_drift=trace.unitarity_drift,
                    mixed_term_residual=float(mixed[k]),
                ),
            )
        )
    return results


def qfi_driven(model: GibbsModel, v, drive: DriveProfile, grid: TimeGrid,
               at: int | None = None, *, n_measurements: int = 1,
               drift_tol: float = DRIFT_TOL) -> QfiResult:
    """Decomposed QFI at a single node (default: the final one)."""
    v = hermitize(v)
    if at is None:
        at = grid.n_steps
    if not 0 <= at <= grid.n_steps:
        raise ValueError(f"node index {at} outside grid with {grid.n_steps} steps")
    trace = propagate(model, v, drive, grid, drift_tol=drift_tol)
    ct = build_current_trace(trace)
    pi0 = model.state
    f_eq = equilibrium_qfi(model)

    dl = delta_sld(ct, at)
    i_t = float(np.real(np.trace(pi0 @ dl @ dl)))
    mixed = float(abs(np.trace(pi0 @ equilibrium_sld(model) @ dl)))

    m_k = _weighted_v_integral(trace)[at]
    a_k = -1j * m_k
    u_k = trace.propagators[at]
    rho = u_k @ pi0 @ u_k.conj().T
    inner = dpi_dbeta(model) + (a_k @ pi0 - pi0 @ a_k)
    drho = u_k @ inner @ u_k.conj().T
    f_spectral = float(spectral_qfi_batch(rho[None], drho[None])[0])

    f_total = f_eq + i_t
    rel = abs(f_total - f_spectral) / max(f_spectral, REL_DISAGREEMENT_FLOOR)
    return QfiResult(
        t=float(grid.nodes[at]),
        f_eq=f_eq,
        i_t=i_t,
        f_total=f_total,
        f_spectral=f_spectral,
        rel_disagreement=rel,
        crb_sigma=_crb_sigma(f_total, n_measurements),
        diagnostics=RunDiagnostics(
            n_steps=grid.n_steps,
            dt=grid.dt,
            unitarity_drift=trace.unitarity_drift,
            mixed_term_residual=mixed,
        ),
    )
