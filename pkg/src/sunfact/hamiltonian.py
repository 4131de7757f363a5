"""
Dense Hamiltonian matrices in the product basis.

    H = sum_{p,i} eps^p_i g_p^{ii}
        - sum_{p<q} r_pq sum_{i,j} ( U_ij g_p^{ii} g_q^{jj}
                                    + V_ij g_p^{ij} g_q^{ij}
                                    + W_ij g_p^{ij} g_q^{ji} )

with g_p^{ij} = |i_p><j_p|.  Every unordered pair p < q enters once with
weight r_pq.  V moves both particles of a pair between equal levels,
(j, j) -> (i, i); W swaps the levels of the two sites, (j, i) -> (i, j).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from .errors import CapExceededError, ConfigError, InvariantError
from .model import (
    ModelSpec,
    SectorLabel,
    enumerate_sectors,
    level_counts,
    level_table,
)

DEFAULT_CAP = 65536
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianMatrix:
    data: np.ndarray
    sector: SectorLabel | None = None
    basis_map: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.data.shape[0]


def check_cap(dim: int, cap: int | None) -> None:
    cap = DEFAULT_CAP if cap is None else cap
    if dim > cap:
        raise CapExceededError(f"dimension {dim} exceeds cap {cap}")


def _elements(spec: ModelSpec, src: np.ndarray):
    """Diagonal values and off-diagonal (target, source, value) triplets for
    the basis states ``src`` (global indices)."""
    n, N = spec.n, spec.N
    lv = (src[:, None] // (n ** np.arange(N))[None, :]) % n
    w = spec.site_weights
    diag = (w[None, :] * spec.epsilon[lv]).sum(axis=1)
    rows, cols, vals = [], [], []
    U, V, W = spec.U, spec.V, spec.W
    has_v, has_w = bool(np.any(V)), bool(np.any(W))
    for p, q, r in spec.graph.pairs():
        a, b = lv[:, p], lv[:, q]
        diag = diag - r * U[a, b]
        stride = n**p + n**q
        if has_v:
            same = a == b
            for i in range(n):
                sel = same & (a != i)
                coeff = V[i, a[sel]]
                nz = coeff != 0
                s = src[sel][nz]
                rows.append(s + (i - a[sel][nz]) * stride)
                cols.append(s)
                vals.append(-r * coeff[nz])
        if has_w:
            sel = a != b
            coeff = W[a[sel], b[sel]]
            nz = coeff != 0
            s, aa, bb = src[sel][nz], a[sel][nz], b[sel][nz]
            rows.append(s + (bb - aa) * n**p + (aa - bb) * n**q)
            cols.append(s)
            vals.append(-r * coeff[nz])
    if rows:
        return diag, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    empty = np.zeros(0, dtype=int)
    return diag, empty, empty, np.zeros(0)


def _assemble(spec: ModelSpec, src: np.ndarray) -> np.ndarray:
    diag, rows, cols, vals = _elements(spec, src)
    dim = src.size
    if dim == spec.dim:
        loc_r, loc_c = rows, cols
    else:
        lookup = np.full(spec.dim, -1, dtype=np.int64)
        lookup[src] = np.arange(dim)
        loc_r, loc_c = lookup[rows], lookup[cols]
        if np.any(loc_r < 0):
            raise InvariantError("Hamiltonian connects the sector to states outside it")
    H = np.zeros((dim, dim))
    H[np.arange(dim), np.arange(dim)] = diag
    np.add.at(H, (loc_r, loc_c), vals)
    asym = np.abs(H - H.T).max() if dim else 0.0
    if asym > SYMMETRY_TOL:
        raise InvariantError(f"assembled Hamiltonian not symmetric (max deviation {asym:.3e})")
    if not np.all(np.isfinite(H)):
        raise InvariantError("assembled Hamiltonian has non-finite entries")
    H.setflags(write=False)
    return H


def build_full(spec: ModelSpec, cap: int | None = None) -> HamiltonianMatrix:
    """Dense n**N x n**N Hamiltonian of ``spec``."""
    check_cap(spec.dim, cap)
    return HamiltonianMatrix(_assemble(spec, np.arange(spec.dim)))


def build_sector(spec: ModelSpec, sector: SectorLabel, cap: int | None = None) -> HamiltonianMatrix:
    """Restriction of the Hamiltonian to one parity or occupation sector.

    Occupation sectors are only invariant when V vanishes.
    """
    check_cap(spec.dim, cap)
    sector.validate(spec.n, spec.N)
    if sector.kind == "occupation" and not spec.v_zero:
        raise ConfigError("occupation sectors require V = 0 (V breaks level-number conservation)")
    idx = sector_basis(spec.n, spec.N, sector)
    return HamiltonianMatrix(_assemble(spec, idx), sector, idx)


def build_all_sectors(spec: ModelSpec, kind: str, cap: int | None = None) -> list[HamiltonianMatrix]:
    check_cap(spec.dim, cap)
    if kind == "occupation" and not spec.v_zero:
        raise ConfigError("occupation sectors require V = 0 (V breaks level-number conservation)")
    return [HamiltonianMatrix(_assemble(spec, idx), lab, idx)
            for lab, idx in enumerate_sectors(spec.n, spec.N, kind).items()]


def sector_basis(n: int, N: int, sector: SectorLabel) -> np.ndarray:
    counts = level_counts(n, N)
    target = np.array(sector.values)
    vals = 1 - 2 * (counts % 2) if sector.kind == "parity" else counts
    return np.flatnonzero((vals == target[None, :]).all(axis=1))


def parity_diagonal(n: int, N: int, level: int) -> np.ndarray:
    """Diagonal of P_level = (-1)^{N_level} in the product basis."""
    return 1 - 2 * (level_counts(n, N)[:, level] % 2)


def occupation_diagonal(n: int, N: int, level: int) -> np.ndarray:
    return level_counts(n, N)[:, level].astype(float)


def is_bipartite(spec: ModelSpec) -> tuple[bool, dict]:
    g = nx.Graph()
    g.add_nodes_from(range(spec.N))
    g.add_edges_from((p, q) for p, q, _ in spec.graph.pairs())
    if not nx.is_bipartite(g):
        return False, {}
    return True, nx.bipartite.color(g)


def alternating_gauge(spec: ModelSpec, level: int) -> ModelSpec:
    """Spec obtained by flipping the sign of ``level`` on one sublattice.

    On a bipartite graph the transformation c_{p,level} -> -c_{p,level} at odd
    sites is unitary and maps V_ij, W_ij -> -V_ij, -W_ij for the rows and
    columns of ``level``; the spectrum is unchanged.
    """
    if not 0 <= level < spec.n:
        raise ConfigError(f"level {level} outside [0, {spec.n})")
    ok, _ = is_bipartite(spec)
    if not ok:
        raise ConfigError("alternating gauge needs a bipartite coupling graph (odd cycle found)")
    sign = np.ones(spec.n)
    sign[level] = -1.0
    flip = np.outer(sign, sign)
    # flip is -1 exactly on row/column `level` off the diagonal
    return spec.replace(V=spec.V * flip, W=spec.W * flip)


def gauge_unitary_diagonal(spec: ModelSpec, level: int) -> np.ndarray:
    """Diagonal of the sign transformation implementing :func:`alternating_gauge`."""
    _, color = is_bipartite(spec)
    lv = level_table(spec.n, spec.N)
    odd = np.array([color.get(p, 0) for p in range(spec.N)], dtype=bool)
    flips = (lv[:, odd] == level).sum(axis=1)
    return 1.0 - 2.0 * (flips % 2)


def apply(H: HamiltonianMatrix, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (H.dim,):
        raise ConfigError(f"vector of length {v.shape} does not match dimension {H.dim}")
    return H.data @ v


def dump_matrix(H: HamiltonianMatrix, path: str | Path) -> None:
    """Write ``dim`` then ``row col value`` lines for every nonzero element."""
    rows, cols = np.nonzero(H.data)
    lines = [str(H.dim)]
    lines += [f"{r} {c} {H.data[r, c]:.12g}" for r, c in zip(rows, cols)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix_dump(path: str | Path) -> np.ndarray:
    text = Path(path).read_text().split("\n")
    dim = int(text[0])
    H = np.zeros((dim, dim))
    for line in text[1:]:
        if line.strip():
            r, c, v = line.split()
            H[int(r), int(c)] = float(v)
    return H
