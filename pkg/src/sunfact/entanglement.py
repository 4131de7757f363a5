"""
Reduced density matrices and entanglement measures of product-basis states.

States are vectors of length n**N in the little-endian product basis.  A
reduced matrix over ``sites = (s_0, s_1, ...)`` is indexed little-endian in
the listed order: row = l_{s_0} + n * l_{s_1} + ...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceededError, ConfigError, InvariantError
from .hamiltonian import DEFAULT_CAP

CLIP_TOL = 1e-10
ENTROPY_CUTOFF = 1e-12


def _num_sites(state: np.ndarray, n: int) -> int:
    N = int(round(np.log(state.size) / np.log(n)))
    if n**N != state.size:
        raise ConfigError(f"state length {state.size} is not a power of n={n}")
    return N


@dataclass(frozen=True)
class DensityMatrix:
    sites: tuple
    n: int
    data: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.data
        if abs(np.trace(d).real - 1) > 1e-10:
            raise InvariantError(f"reduced density matrix trace {np.trace(d):.15g} != 1")
        if np.abs(d - d.conj().T).max() > 1e-12:
            raise InvariantError("reduced density matrix not Hermitian")
        ev = np.linalg.eigvalsh(d)
        if ev[0] < -CLIP_TOL:
            raise InvariantError(f"reduced density matrix has eigenvalue {ev[0]:.3e} < 0")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))


def reduce(state, sites, n: int, cap: int | None = None) -> DensityMatrix:
    """Partial trace of |state><state| over all sites not in ``sites``."""
    psi = np.asarray(state)
    N = _num_sites(psi, n)
    sites = tuple(int(s) for s in sites)
    if not sites:
        raise ConfigError("empty site subset")
    if len(set(sites)) != len(sites) or any(not 0 <= s < N for s in sites):
        raise ConfigError(f"invalid site subset {sites} for N={N}")
    if n ** (2 * len(sites)) > (cap or DEFAULT_CAP) ** 2:
        raise CapExceededError(f"reduced matrix over {len(sites)} sites exceeds the cap")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-10:
        raise ConfigError(f"state not normalized (norm {float(nrm):.15g})")
    # C-order reshape puts site N-1 on axis 0
    t = psi.reshape([n] * N)
    keep = [N - 1 - s for s in reversed(sites)]
    rest = [a for a in range(N) if a not in keep]
    m = np.transpose(t, keep + rest).reshape(n ** len(sites), -1)
    rho = m @ m.conj().T
    if np.isrealobj(rho):
        rho = 0.5 * (rho + rho.T)
    else:
        rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(sites, n, rho)


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    ev = np.where(rho.eigenvalues < 0, 0.0, rho.eigenvalues)
    ev = ev[ev > ENTROPY_CUTOFF]
    return float(-(ev * np.log2(ev)).sum()) + 0.0


def partial_transpose(rho: DensityMatrix) -> np.ndarray:
    """Transpose the first listed site of a two-site density matrix."""
    if len(rho.sites) != 2:
        raise ConfigError(f"partial transpose needs a two-site matrix, got sites {rho.sites}")
    n = rho.n
    # axes: (l_s1, l_s0, l'_s1, l'_s0)
    t = rho.data.reshape(n, n, n, n).transpose(0, 3, 2, 1)
    return t.reshape(n * n, n * n)


def negativity(rho_pq: DensityMatrix, n: int | None = None) -> float:
    """Sum of the negative eigenvalues' magnitudes of the partial transpose."""
    if n is not None and n != rho_pq.n:
        raise ConfigError(f"density matrix has n={rho_pq.n}, not {n}")
    pt = partial_transpose(rho_pq)
    ev = np.linalg.eigvalsh(pt)
    neg = float(np.clip(-ev, 0, None).sum())
    trace_norm = float(np.abs(ev).sum())
    if abs(neg - 0.5 * (trace_norm - 1)) > 1e-10:
        raise InvariantError("negativity forms disagree")
    return neg


def pair_negativity(state, p: int, q: int, n: int) -> float:
    return negativity(reduce(state, (p, q), n))


def mutual_information(state, p: int, q: int, n: int) -> float:
    if p == q:
        raise ConfigError("mutual information needs two distinct sites")
    return (entropy(reduce(state, (p,), n)) + entropy(reduce(state, (q,), n))
            - entropy(reduce(state, (p, q), n)))


def block_entropy(state, sites, n: int) -> float:
    """Entropy of a site block; the smaller of block and complement is reduced."""
    N = _num_sites(np.asarray(state), n)
    sites = tuple(sites)
    rest = tuple(p for p in range(N) if p not in sites)
    if not rest:
        reduce(state, sites[:1], n)  # validates the state
        return 0.0
    return entropy(reduce(state, sites if len(sites) <= len(rest) else rest, n))


def pair_spectrum(state, p: int, q: int, n: int) -> np.ndarray:
    """All n**2 eigenvalues of the pair reduced state, descending."""
    return reduce(state, (p, q), n).eigenvalues[::-1].copy()


def occupations(state, n: int, uniform: bool = False) -> np.ndarray:
    """Average level occupations <n_i> per site, shape (N, n).

    With ``uniform`` the site-averaged vector of length n is returned.  For a
    state of definite level-number parities the single-site matrices must be
    diagonal; this is checked.
    """
    psi = np.asarray(state)
    N = _num_sites(psi, n)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > 1e-10:
        raise ConfigError(f"state not normalized (norm {float(nrm):.15g})")
    prob = np.abs(psi) ** 2
    if _definite_parity(prob, n, N):
        for p in range(N):
            d = reduce(psi, (p,), n).data
            off = np.abs(d - np.diag(np.diag(d))).max()
            if off > 1e-10:
                raise InvariantError(f"definite-parity state has coherence {off:.3e} at site {p}")
    t = prob.reshape([n] * N)
    out = np.empty((N, n))
    for p in range(N):
        ax = tuple(a for a in range(N) if a != N - 1 - p)
        out[p] = t.sum(axis=ax)
    return out.mean(axis=0) if uniform else out


def _definite_parity(prob: np.ndarray, n: int, N: int) -> bool:
    from .model import level_counts

    odd = level_counts(n, N)[prob > 1e-14] % 2
    return bool(odd.size) and bool(np.all(odd == odd[0]))


def site_entropy(state, n: int, site: int = 0) -> float:
    return entropy(reduce(state, (site,), n))


def state_observables(state, n: int, distances=(1, 2, 3), site: int = 0) -> dict:
    """Single-site entropy, occupations, and pair measures at the given distances from ``site``.

    Pair spectra are reported for the nearest-neighbor pair.
    """
    psi = np.asarray(state)
    N = _num_sites(psi, n)
    out = {"S_site": site_entropy(psi, n, site),
           "occupations": occupations(psi, n, uniform=True)}
    for d in distances:
        if not 1 <= d < N:
            raise ConfigError(f"pair distance {d} outside [1, {N - 1}]")
        q = (site + d) % N
        out[f"negativity_d{d}"] = pair_negativity(psi, site, q, n)
        out[f"mutual_info_d{d}"] = mutual_information(psi, site, q, n)
    out["pair_spectrum"] = pair_spectrum(psi, site, (site + 1) % N, n)
    return out
