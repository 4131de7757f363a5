"""
Symmetry-projected uniform product states.

Projections are done by masking amplitudes of the product state in the
product basis; the projectors are diagonal there, so this is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, prod

import mpmath
import numpy as np

from .errors import ConfigError, EmptySectorError, InvariantError
from .factorization import product_state
from .hamiltonian import parity_diagonal, sector_basis
from .model import SectorLabel, enumerate_sectors, level_counts, parity_label

EMPTY_WEIGHT = 1e-14


@dataclass(frozen=True)
class ProjectedState:
    vector: np.ndarray
    label: SectorLabel
    source_f: np.ndarray | None = None
    weight: float = 1.0  # squared norm of the unnormalized projection

    @property
    def n(self) -> int:
        return len(self.label.values)

    def check(self) -> "ProjectedState":
        n = self.n
        N = int(sum(self.label.values)) if self.label.kind == "occupation" else \
            int(round(np.log(self.vector.size) / np.log(n)))
        if self.label.kind == "parity":
            for i, s in enumerate(self.label.values):
                dev = np.abs(parity_diagonal(n, N, i) * self.vector - s * self.vector).max()
                if dev > 1e-10:
                    raise InvariantError(f"projected state violates P_{i + 1} = {s:+d}")
        else:
            counts = level_counts(n, N)
            ok = (counts == np.array(self.label.values)).all(axis=1)
            if np.any(self.vector[~ok] != 0):
                raise InvariantError("number-projected state leaks outside its sector")
        return self


def _product_amplitudes(f, N: int) -> np.ndarray:
    return product_state(np.asarray(f, dtype=complex), N)


def _masked(psi: np.ndarray, idx: np.ndarray, label: SectorLabel, f) -> ProjectedState:
    out = np.zeros_like(psi)
    out[idx] = psi[idx]
    w = float(np.vdot(out, out).real)
    if w < EMPTY_WEIGHT:
        raise EmptySectorError(f"projection onto sector {label} is empty (weight {w:.3e})")
    out = out / np.sqrt(w)
    out.setflags(write=False)
    return ProjectedState(out, label, np.asarray(f), w)


def parity_project(f, N: int, sigma) -> ProjectedState:
    """Definite-parity component of ``product_state(f, N)``, renormalized.

    ``sigma`` may be a parity SectorLabel, n signs, or the n-1 signs
    sigma_2..sigma_n (sigma_1 then follows from prod sigma = (-1)^N).
    """
    f = np.asarray(f)
    n = f.size
    label = parity_label(sigma, n, N)
    psi = _product_amplitudes(f, N)
    return _masked(psi, sector_basis(n, N, label), label, f).check()


def parity_weights(f, N: int) -> dict[SectorLabel, float]:
    """Squared norms of every parity component of the product state; they sum to 1."""
    f = np.asarray(f)
    prob = np.abs(_product_amplitudes(f, N)) ** 2
    return {lab: float(prob[idx].sum()) for lab, idx in enumerate_sectors(f.size, N, "parity").items()}


def projected_occupations_n3(f, N: int, sigma) -> np.ndarray:
    """Per-site level occupations of a parity-projected three-level product state.

    With ``u_j = 1 - 2|f_j|^2``::

        <n_i> = |f_i|^2 (1 + sum_j s_ij sigma_j u_j^(N-1)) / (1 + sum_j sigma_j u_j^N)

    where ``s_ij = -1`` for j = i and +1 otherwise.  The sums cancel badly
    when the sector weight is small, so they are evaluated with 40 digits.
    """
    f = np.asarray(f)
    if f.size != 3:
        raise ConfigError(f"closed form needs n = 3, got n = {f.size}")
    s = np.array(parity_label(sigma, 3, N).values, dtype=float)
    a = np.abs(f) ** 2
    if abs(a.sum() - 1) > 1e-12:
        raise ConfigError(f"local amplitudes not normalized (sum |f|^2 = {a.sum():.15g})")
    with mpmath.workdps(40):
        am = [mpmath.mpf(float(x)) for x in a]
        am = [x / sum(am) for x in am]
        u = [1 - 2 * x for x in am]
        den = 1 + sum(int(sj) * uj**N for sj, uj in zip(s, u))
        # den / 4 is the sector weight
        if den / 4 < EMPTY_WEIGHT:
            raise EmptySectorError(f"projection onto sector {SectorLabel('parity', s)} is empty")
        out = []
        for i in range(3):
            num = 1 + sum((-1 if j == i else 1) * int(s[j]) * u[j] ** (N - 1) for j in range(3))
            out.append(float(am[i] * num / den))
    out = np.array(out)
    if abs(out.sum() - 1) > 1e-12:
        raise InvariantError(f"projected occupations sum to {out.sum():.15g}")
    return out


def projected_occupations(f, N: int, sigma) -> np.ndarray:
    """Brute-force per-site occupations of the parity projection (any n)."""
    st = parity_project(f, N, sigma)
    n = np.asarray(f).size
    prob = np.abs(st.vector) ** 2
    return (level_counts(n, N) * prob[:, None]).sum(axis=0) / N


def symmetric_state(occupations, N: int | None = None) -> ProjectedState:
    """Equal-amplitude superposition of all configurations with the given level counts."""
    occ = tuple(int(x) for x in occupations)
    if any(x < 0 for x in occ):
        raise ConfigError(f"negative occupation in {occ}")
    total = sum(occ)
    if N is not None and total != N:
        raise ConfigError(f"occupations {occ} sum to {total}, not N={N}")
    n = len(occ)
    label = SectorLabel("occupation", occ).validate(n, total)
    idx = sector_basis(n, total, label)
    expected = factorial(total) // prod(factorial(x) for x in occ)
    if idx.size != expected:
        raise InvariantError(f"sector {label} has {idx.size} configurations, expected {expected}")
    v = np.zeros(n**total)
    v[idx] = 1 / np.sqrt(idx.size)
    v.setflags(write=False)
    return ProjectedState(v, label, None, 1.0)


def number_projected_family(f, N: int) -> list[ProjectedState]:
    """Occupation-number projections of ``product_state(f, N)`` over all nonempty sectors.

    Within a sector every amplitude equals prod_i f_i^{N_i}, so each member
    is the symmetric state of its sector up to a phase; the phase is removed.
    """
    f = np.asarray(f)
    n = f.size
    psi = _product_amplitudes(f, N)
    out = []
    for label, idx in enumerate_sectors(n, N, "occupation").items():
        try:
            st = _masked(psi, idx, label, f)
        except EmptySectorError:
            continue
        v = st.vector
        phase = v[idx[0]] / abs(v[idx[0]])
        v = v / phase
        if np.all(np.abs(v.imag) < 1e-15):
            v = v.real.copy()
        v.setflags(write=False)
        out.append(ProjectedState(v, label, f, st.weight).check())
    return out


def perturbative_splitting(f, N: int, sigma, delta_eps, site_weight: float | None = None) -> float:
    """First-order energy shift of a parity-projected state under eps -> eps + delta_eps.

    ``delta_E = W * sum_i delta_eps_i <n_i>`` with ``<n_i>`` the per-site
    occupation and W the summed site weight (N by default, the ring value
    with edge scaling).  Constant shifts from rescaling the couplings are
    not included.
    """
    f = np.asarray(f)
    d = np.asarray(delta_eps, dtype=float)
    if d.shape != (f.size,):
        raise ConfigError(f"delta_eps has shape {d.shape}, expected ({f.size},)")
    occ = projected_occupations_n3(f, N, sigma) if f.size == 3 else projected_occupations(f, N, sigma)
    w = float(N if site_weight is None else site_weight)
    return w * float(d @ occ)


@dataclass(frozen=True)
class SideLimit:
    param: float
    label: SectorLabel
    state: ProjectedState
    exact_energy: float
    overlap_defect: float  # 1 - |<exact GS | projected>|^2


def side_limits(family, x_c: float, f, rel: float = 1e-6, kind: str = "parity",
                cap: int | None = None) -> tuple[SideLimit, SideLimit]:
    """Projected states approached by the exact ground state on both sides of ``x_c``.

    The ground-state sector is read off the exact sector spectra at
    ``x_c (1 -+ rel)``; the state is the projection of ``product_state(f)``
    onto that sector (symmetric state for occupation sectors).
    """
    from .spectra import sector_spectrum

    out = []
    for x in (x_c * (1 - rel), x_c * (1 + rel)):
        spec = family(x)
        sr = sector_spectrum(spec, kind, want_vectors=True, k=1, cap=cap)
        label = sr.sectors[0]
        if kind == "parity":
            st = parity_project(f, spec.N, label)
        else:
            st = symmetric_state(label.values)
        ov = abs(np.vdot(sr.eigenvectors[:, 0], st.vector)) ** 2
        out.append(SideLimit(float(x), label, st, sr.ground_energy, float(1 - ov)))
    return out[0], out[1]
