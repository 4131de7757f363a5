"""
Closed-form uniform product-state eigenstates of the U/V/W Hamiltonian.

A uniform product state with local amplitudes f_i is an exact eigenstate when

* the squared amplitudes f_i^2 form an eigenvector of
  ``M_ij = (2 eps_i - U_ii) delta_ij - V_ij`` with eigenvalue E2 (the pair
  energy), and
* ``U_ij + W_ij = eps_i + eps_j - E2`` for every pair i != j with f_i f_j != 0.

Taking the lowest eigenvalue of M and W_ij >= 0 makes it a ground state.  The
conditions do not depend on the coupling graph or on N; the total energy is
``E2 / 2 * sum_p r_p``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from math import comb

import numpy as np

from .errors import ConfigError, FactorizationError
from .hamiltonian import HamiltonianMatrix
from .model import CouplingGraph, ModelSpec

CONTINUOUS_SET_RTOL = 1e-9
ZERO_AMPLITUDE = 1e-12


@dataclass(frozen=True)
class FactorizationSolution:
    E2: float
    f_squared: np.ndarray
    f: np.ndarray
    T_required: np.ndarray
    is_gs: bool
    sufficiency: bool
    continuous_set: bool
    degeneracy: int | None
    total_energy: float | None
    W_split: np.ndarray
    U_split: np.ndarray

    def to_dict(self) -> dict:
        return {
            "E2": self.E2,
            "f_squared": self.f_squared.tolist(),
            "f_real": self.f.real.tolist(),
            "f_imag": self.f.imag.tolist(),
            "T_required": self.T_required.tolist(),
            "is_gs": self.is_gs,
            "sufficiency": self.sufficiency,
            "continuous_set": self.continuous_set,
            "degeneracy": self.degeneracy,
            "total_energy": self.total_energy,
        }


def build_M(epsilon, U_diag, V) -> np.ndarray:
    eps = np.asarray(epsilon, dtype=float)
    ud = np.asarray(U_diag, dtype=float)
    V = np.asarray(V, dtype=float)
    n = eps.size
    if eps.ndim != 1 or ud.shape != (n,) or V.shape != (n, n):
        raise ConfigError(f"inconsistent shapes: epsilon {eps.shape}, U_diag {ud.shape}, V {V.shape}")
    Voff = V - np.diag(np.diag(V))
    return np.diag(2 * eps - ud) - Voff


def amplitudes_from_squares(f_squared) -> np.ndarray:
    """Principal square roots; negative squares give imaginary amplitudes."""
    f2 = np.asarray(f_squared, dtype=float)
    return np.where(f2 >= 0, np.sqrt(np.abs(f2)) + 0j, 1j * np.sqrt(np.abs(f2)))


def check_gs_conditions(W, U) -> tuple[bool, bool]:
    """(W_ij >= 0 for all i != j, U_ij <= (U_ii + U_jj)/2 for all i != j)."""
    W = np.asarray(W, dtype=float)
    U = np.asarray(U, dtype=float)
    off = ~np.eye(W.shape[0], dtype=bool)
    is_gs = bool(np.all(W[off] >= 0))
    d = np.diag(U)
    sufficiency = bool(np.all(U[off] <= ((d[:, None] + d[None, :]) / 2)[off]))
    return is_gs, sufficiency


def degeneracy_count(n: int, N: int, v_zero: bool) -> int:
    """Ground-state degeneracy at a factorization point.

    With level-changing V couplings the degeneracy counts the linearly
    independent sign-flipped product states; with V = 0 it counts the
    occupation vectors (N_1, ..., N_n).
    """
    if n < 2 or N < 1:
        raise ConfigError(f"need n >= 2 and N >= 1, got n={n}, N={N}")
    if v_zero:
        return comb(N + n - 1, n - 1)
    if N >= n - 1:
        return 2 ** (n - 1)
    return sum(comb(n - 1, k) for k in range(N + 1))


def solve_uniform(epsilon, U_diag, V, *, U_offdiag=None, graph: CouplingGraph | None = None) -> FactorizationSolution:
    """Solve the uniform factorization conditions for given eps, U_ii and V.

    The couplings U_ij + W_ij needed off the diagonal are returned in
    ``T_required``.  They are split with U_ij from ``U_offdiag`` (zero by
    default) and W_ij = T_required - U_ij.  Passing ``graph`` fills in the
    degeneracy and total energy.
    """
    eps = np.asarray(epsilon, dtype=float)
    n = eps.size
    M = build_M(eps, U_diag, V)
    w, vecs = np.linalg.eigh(M)
    E2 = float(w[0])
    scale = max(1.0, float(np.abs(w).max()))
    continuous = n > 1 and (w[1] - w[0]) < CONTINUOUS_SET_RTOL * scale

    vec = vecs[:, 0]
    norm1 = np.abs(vec).sum()
    if norm1 == 0:
        raise FactorizationError("lowest eigenvector of M vanished")
    f2 = vec / norm1
    if f2[np.argmax(np.abs(f2))] < 0:
        f2 = -f2
    f2[np.abs(f2) < ZERO_AMPLITUDE] = 0.0
    f2 = f2 / np.abs(f2).sum()
    resid = np.abs(M @ f2 - E2 * f2).max()
    if resid > 1e-10 * scale:
        raise FactorizationError(f"eigen-residual {resid:.3e} of M too large")
    f = amplitudes_from_squares(f2)

    T = eps[:, None] + eps[None, :] - E2
    np.fill_diagonal(T, 0.0)
    U_full = np.diag(np.asarray(U_diag, dtype=float))
    if U_offdiag is not None:
        Uo = np.asarray(U_offdiag, dtype=float).copy()
        np.fill_diagonal(Uo, 0.0)
        U_full = U_full + Uo
    W = T - (U_full - np.diag(np.diag(U_full)))
    is_gs, sufficiency = check_gs_conditions(W, U_full)

    degeneracy = total = None
    if graph is not None:
        N = graph.N
        v_zero = not np.any(np.asarray(V) - np.diag(np.diag(V)))
        if continuous:
            # only the fully degenerate M = E2 * I case (V = 0 point) has a closed count
            if v_zero and np.allclose(M, E2 * np.eye(n), atol=CONTINUOUS_SET_RTOL * scale):
                degeneracy = degeneracy_count(n, N, True)
        else:
            rank = int(np.count_nonzero(f2))
            degeneracy = 1 if rank == 1 else degeneracy_count(rank, N, False)
        total = 0.5 * E2 * graph.r_total

    for a in (f2, T, W, U_full):
        a.setflags(write=False)
    return FactorizationSolution(E2, f2, f, T, is_gs, sufficiency, bool(continuous),
                                 degeneracy, total, W, U_full)


def factorized_model(epsilon, U_diag, V, graph: CouplingGraph, *, U_offdiag=None,
                     edge_scaling: bool = True) -> tuple[ModelSpec, FactorizationSolution]:
    """Model whose W couplings satisfy the factorization constraint."""
    sol = solve_uniform(epsilon, U_diag, V, U_offdiag=U_offdiag, graph=graph)
    n = len(sol.f_squared)
    Vm = np.asarray(V, dtype=float).copy()
    np.fill_diagonal(Vm, 0.0)
    spec = ModelSpec(n, graph.N, epsilon, sol.U_split, Vm, sol.W_split, graph, edge_scaling)
    return spec, sol


def solve_spec(spec: ModelSpec) -> FactorizationSolution:
    """Factorization solution for the eps, U_ii and V of an existing spec."""
    return solve_uniform(spec.epsilon, np.diag(spec.U), spec.V, U_offdiag=spec.U, graph=spec.graph)


def coupling_residual(spec: ModelSpec, sol: FactorizationSolution) -> float:
    """max |U_ij + W_ij - T_ij| over pairs with f_i f_j != 0."""
    nz = np.abs(sol.f_squared) > 0
    mask = np.outer(nz, nz) & ~np.eye(spec.n, dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.abs((spec.U + spec.W - sol.T_required)[mask]).max())


def solve_onsite_energies_n3(T, E2: float) -> np.ndarray:
    """One-site energies making a 3-level model factorize for given T = U + W.

    ``eps_i = (T_ij + T_ik - T_jk + E2) / 2``.  Matching the original E2 may
    further require a constant shift U_ii -> U_ii + U_0, which is left to the
    caller.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (3, 3):
        raise ConfigError(f"expected a 3x3 matrix, got shape {T.shape}")
    eps = np.empty(3)
    for i in range(3):
        j, k = [x for x in range(3) if x != i]
        eps[i] = 0.5 * (T[i, j] + T[i, k] - T[j, k] + E2)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        if abs(eps[i] + eps[j] - E2 - T[i, j]) > 1e-12 * max(1.0, abs(T[i, j])):
            raise FactorizationError("round-trip of onsite energies failed")
    return eps


def factorization_v0(epsilon, E2: float) -> tuple[np.ndarray, np.ndarray]:
    """Couplings for which every uniform product state is an eigenstate (V = 0).

    Returns ``U_diag = 2 eps - E2`` and ``T_required`` with
    ``T_ij = eps_i + eps_j - E2 = (U_ii + U_jj) / 2``.
    """
    eps = np.asarray(epsilon, dtype=float)
    ud = 2 * eps - E2
    T = eps[:, None] + eps[None, :] - E2
    np.fill_diagonal(T, 0.0)
    return ud, T


def v0_model(epsilon, E2: float, graph: CouplingGraph, *, U_offdiag=None,
             edge_scaling: bool = True) -> ModelSpec:
    ud, T = factorization_v0(epsilon, E2)
    n = len(ud)
    Uo = np.zeros((n, n)) if U_offdiag is None else np.asarray(U_offdiag, dtype=float).copy()
    np.fill_diagonal(Uo, 0.0)
    return ModelSpec(n, graph.N, epsilon, np.diag(ud) + Uo, np.zeros((n, n)), T - Uo,
                     graph, edge_scaling)


def xyz_factorizing_field(Jx: float, Jy: float, Jz: float) -> tuple[float, float]:
    """Factorizing transverse field |b| and product-state cos(theta) of the
    XYZ chain; requires Jz < Jy <= Jx."""
    if not (Jz < Jy <= Jx):
        raise ConfigError(f"need Jz < Jy <= Jx, got Jx={Jx}, Jy={Jy}, Jz={Jz}")
    b = np.sqrt((Jy - Jz) * (Jx - Jz))
    cos_theta = np.sqrt((Jy - Jz) / (Jx - Jz))
    return float(b), float(cos_theta)


def xyz_parameters(b: float, Jx: float, Jy: float, Jz: float):
    """Two-level (epsilon, U, V, W) equivalent to an XYZ coupling in field b."""
    eps = np.array([-b / 2, b / 2])
    U = np.array([[Jz / 2, -Jz / 2], [-Jz / 2, Jz / 2]])
    V = np.array([[0.0, (Jx - Jy) / 2], [(Jx - Jy) / 2, 0.0]])
    W = np.array([[0.0, (Jx + Jy) / 2], [(Jx + Jy) / 2, 0.0]])
    return eps, U, V, W


def product_state(f, N: int) -> np.ndarray:
    """Uniform product state with amplitude prod_p f_{l_p} on configuration l."""
    f = np.asarray(f, dtype=complex)
    nrm = np.sum(np.abs(f) ** 2)
    if abs(nrm - 1) > 1e-12:
        raise ConfigError(f"local amplitudes not normalized (sum |f|^2 = {float(nrm):.15g})")
    psi = reduce(np.kron, [f] * N)
    if np.all(f.imag == 0):
        psi = psi.real.copy()
    return psi


def verify_eigenstate(H: HamiltonianMatrix | np.ndarray, psi) -> tuple[float, float]:
    """(<psi|H|psi>, ||H psi - E psi||) for a unit-norm state."""
    data = H.data if isinstance(H, HamiltonianMatrix) else np.asarray(H)
    psi = np.asarray(psi)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-10:
        raise ConfigError(f"state not normalized (norm {float(nrm):.15g})")
    hpsi = data @ psi
    energy = float(np.real(np.vdot(psi, hpsi)))
    return energy, float(np.linalg.norm(hpsi - energy * psi))


def parity_flip_family(f) -> list[np.ndarray]:
    """All distinct sign-flipped copies of ``f`` modulo a global sign."""
    f = np.asarray(f, dtype=complex)
    out, seen = [], set()
    for signs in itertools.product((1, -1), repeat=f.size):
        g = f * np.array(signs)
        nz = np.flatnonzero(np.abs(g) > 0)
        if nz.size:
            lead = g[nz[0]]
            if (lead.real if lead.real != 0 else lead.imag) < 0:
                g = -g
        key = tuple(np.round(np.concatenate([g.real, g.imag]), 12))
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out
