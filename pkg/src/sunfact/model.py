"""
Model definition for interacting n-level lattice systems.

Each of the N sites holds one particle that can occupy one of n local levels,
so the Hilbert space is spanned by product configurations (l_0, ..., l_{N-1})
with l_p in [0, n).  Configurations are indexed little-endian::

    index = sum_p l_p * n**p

(site 0 is the least significant digit).  The couplings U, V, W are real
symmetric n x n matrices and the interaction range is carried by a symmetric
weight matrix r_pq (a :class:`CouplingGraph`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

GRAPH_KINDS = ("ring_first_neighbor", "open_chain", "all_to_all", "custom")
_GRAPH_ALIASES = {"ring": "ring_first_neighbor", "chain": "open_chain", "full": "all_to_all"}


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# Coupling graph
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingGraph:
    """Symmetric nonnegative pair weights r_pq with zero diagonal."""

    kind: str
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ConfigError(f"coupling matrix must be square, got shape {r.shape}")
        if r.shape[0] < 2:
            raise ConfigError("coupling graph needs N >= 2 sites")
        if not np.all(np.isfinite(r)):
            raise ConfigError("coupling matrix has non-finite entries")
        bad = np.argwhere(r != r.T)
        if bad.size:
            p, q = bad[0]
            raise ConfigError(f"coupling matrix not symmetric at ({p + 1},{q + 1})")
        if np.any(np.diag(r) != 0):
            raise ConfigError("coupling matrix must have zero diagonal")
        neg = np.argwhere(r < 0)
        if neg.size:
            p, q = neg[0]
            raise ConfigError(f"negative coupling weight at ({p + 1},{q + 1})")
        object.__setattr__(self, "r", _frozen(r))

    @property
    def N(self) -> int:
        return self.r.shape[0]

    @property
    def r_row(self) -> np.ndarray:
        """Effective coordination numbers r_p = sum_q r_pq."""
        return self.r.sum(axis=1)

    @property
    def r_total(self) -> float:
        return float(self.r.sum())

    def pairs(self):
        """Yield (p, q, r_pq) for unordered pairs p < q with nonzero weight."""
        for p in range(self.N):
            for q in range(p + 1, self.N):
                if self.r[p, q] != 0.0:
                    yield p, q, float(self.r[p, q])

    def to_dict(self) -> dict:
        if self.kind == "custom":
            return {"kind": "custom", "custom": self.r.tolist()}
        return {"kind": self.kind}


def make_graph(kind: str, N: int, custom=None) -> CouplingGraph:
    """Build a coupling graph.

    ``ring_first_neighbor`` gives r_pq = 1/2 for cyclic neighbours (r_p = 1);
    for N = 2 the two directed bonds coincide and r_12 = 1.  ``open_chain``
    drops the wrap-around bond so border sites have r_p = 1/2.
    ``all_to_all`` gives r_pq = 1/(N-1).
    """
    kind = _GRAPH_ALIASES.get(kind, kind)
    if kind not in GRAPH_KINDS:
        raise ConfigError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")
    if int(N) != N or N < 2:
        raise ConfigError(f"graph needs integer N >= 2, got {N!r}")
    N = int(N)
    if kind == "custom":
        if custom is None:
            raise ConfigError("custom graph requires an explicit matrix")
        r = np.asarray(custom, dtype=float)
        if r.shape != (N, N):
            raise ConfigError(f"custom matrix shape {r.shape} does not match N={N}")
        return CouplingGraph("custom", r)
    if custom is not None:
        raise ConfigError(f"graph kind {kind!r} does not take a custom matrix")

    r = np.zeros((N, N))
    if kind == "all_to_all":
        r[:] = 1.0 / (N - 1)
        np.fill_diagonal(r, 0.0)
    else:
        last = N if kind == "ring_first_neighbor" else N - 1
        for p in range(last):
            q = (p + 1) % N
            r[p, q] += 0.5
            r[q, p] += 0.5
    return CouplingGraph(kind, r)


# --------------------------------------------------------------------------
# Basis indexing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisConfig:
    levels: tuple
    index: int


def index_to_config(index: int, n: int, N: int) -> BasisConfig:
    if not 0 <= index < n**N:
        raise ConfigError(f"basis index {index} outside [0, {n ** N})")
    levels = tuple((index // n**p) % n for p in range(N))
    return BasisConfig(levels, int(index))


def config_to_index(levels: Sequence[int], n: int) -> int:
    idx = 0
    for p, lv in enumerate(levels):
        if not 0 <= lv < n:
            raise ConfigError(f"level {lv} at site {p} outside [0, {n})")
        idx += int(lv) * n**p
    return idx


def config_roundtrip(index: int, n: int, N: int) -> BasisConfig:
    cfg = index_to_config(index, n, N)
    assert config_to_index(cfg.levels, n) == index
    return cfg


def level_table(n: int, N: int) -> np.ndarray:
    """All configurations as an (n**N, N) integer array, row = basis index."""
    idx = np.arange(n**N)
    powers = n ** np.arange(N)
    return (idx[:, None] // powers[None, :]) % n


def level_counts(n: int, N: int) -> np.ndarray:
    """Occupation counts N_i of every configuration, shape (n**N, n)."""
    lv = level_table(n, N)
    return np.stack([(lv == i).sum(axis=1) for i in range(n)], axis=1)


# --------------------------------------------------------------------------
# Symmetry sector labels
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class SectorLabel:
    """Level-number parity vector (sigma_i = +-1) or occupation vector (N_i)."""

    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in ("parity", "occupation"):
            raise ConfigError(f"unknown sector kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.kind == "parity" and any(v not in (1, -1) for v in self.values):
            raise ConfigError(f"parity values must be +-1, got {self.values}")
        if self.kind == "occupation" and any(v < 0 for v in self.values):
            raise ConfigError(f"occupations must be nonnegative, got {self.values}")

    @property
    def parity(self) -> tuple | None:
        return self.values if self.kind == "parity" else None

    @property
    def occupation(self) -> tuple | None:
        return self.values if self.kind == "occupation" else None

    def validate(self, n: int, N: int) -> "SectorLabel":
        if len(self.values) != n:
            raise ConfigError(f"sector label {self} has length {len(self.values)}, expected n={n}")
        if self.kind == "parity" and int(np.prod(self.values)) != (-1) ** N:
            raise ConfigError(f"parity label {self} violates prod(sigma) = (-1)^N for N={N}")
        if self.kind == "occupation" and sum(self.values) != N:
            raise ConfigError(f"occupation label {self} does not sum to N={N}")
        return self

    def __str__(self) -> str:
        if self.kind == "parity":
            return "".join("+" if v > 0 else "-" for v in self.values)
        return "/".join(str(v) for v in self.values)

    @classmethod
    def parse(cls, text: str, kind: str | None = None) -> "SectorLabel":
        """Parse ``"+-+"``, ``"+,-,+"`` (parity) or ``"2/1/1"``, ``"2,1,1"`` (occupation)."""
        t = text.strip().replace(" ", "")
        toks = [x for x in t.replace("/", ",").split(",") if x] if ("," in t or "/" in t) else list(t)
        if kind is None:
            kind = "parity" if all(x in "+-" for x in toks) else "occupation"
        if kind == "parity":
            vals = [1 if x in ("+", "+1", "1") else -1 if x in ("-", "-1") else None for x in toks]
            if None in vals:
                raise ConfigError(f"cannot parse parity label {text!r}")
            return cls("parity", tuple(vals))
        try:
            return cls("occupation", tuple(int(x) for x in toks))
        except ValueError as exc:
            raise ConfigError(f"cannot parse occupation label {text!r}") from exc


def parity_label(sigma: Sequence[int], n: int, N: int) -> SectorLabel:
    """Normalize a parity label given as n values or as the n-1 values sigma_2..sigma_n."""
    if isinstance(sigma, SectorLabel):
        if sigma.kind != "parity":
            raise ConfigError("expected a parity label")
        return sigma.validate(n, N)
    sigma = tuple(int(s) for s in sigma)
    if len(sigma) == n - 1:
        first = (-1) ** N * int(np.prod(sigma))
        sigma = (first,) + sigma
    return SectorLabel("parity", sigma).validate(n, N)


def sector_of(config: BasisConfig, kind: str, n: int) -> SectorLabel:
    counts = [sum(1 for lv in config.levels if lv == i) for i in range(n)]
    if kind == "parity":
        return SectorLabel("parity", tuple((-1) ** c for c in counts))
    if kind == "occupation":
        return SectorLabel("occupation", tuple(counts))
    raise ConfigError(f"unknown sector kind {kind!r}")


def sector_labels_array(n: int, N: int, kind: str) -> np.ndarray:
    """Per-configuration label values, shape (n**N, n)."""
    counts = level_counts(n, N)
    if kind == "parity":
        return 1 - 2 * (counts % 2)
    if kind == "occupation":
        return counts
    raise ConfigError(f"unknown sector kind {kind!r}")


def enumerate_sectors(n: int, N: int, kind: str) -> dict[SectorLabel, np.ndarray]:
    """Map each nonempty sector to the sorted global indices it contains.

    Sectors are ordered deterministically: parity labels with '+' first,
    occupation labels with the largest weight on low levels first.
    """
    vals = sector_labels_array(n, N, kind)
    uniq, inverse = np.unique(vals, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    out = {}
    for k, row in enumerate(uniq):
        out[SectorLabel(kind, tuple(row))] = np.flatnonzero(inverse == k)
    return dict(sorted(out.items(), key=lambda kv: tuple(-v for v in kv[0].values)))


def n_occupation_sectors(n: int, N: int) -> int:
    return comb(N + n - 1, n - 1)


# --------------------------------------------------------------------------
# Model specification
# --------------------------------------------------------------------------


def _symmetric(name: str, M, n: int, zero_diag: bool) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (n, n):
        raise ConfigError(f"{name} must be {n}x{n}, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError(f"{name} has non-finite entries")
    bad = np.argwhere(M != M.T)
    if bad.size:
        i, j = bad[0]
        raise ConfigError(f"{name} is not symmetric: {name}[{i + 1},{j + 1}]={M[i, j]:g} "
                          f"but {name}[{j + 1},{i + 1}]={M[j, i]:g}")
    if zero_diag and np.any(np.diag(M) != 0):
        i = int(np.flatnonzero(np.diag(M))[0])
        raise ConfigError(f"{name} must have zero diagonal, got {name}[{i + 1},{i + 1}]={M[i, i]:g}")
    return _frozen(M)


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of the U/V/W n-level Hamiltonian on a coupling graph.

    Site energies are ``r_p * epsilon_i`` when ``edge_scaling`` is true and
    ``epsilon_i`` otherwise.
    """

    n: int
    N: int
    epsilon: np.ndarray
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    graph: CouplingGraph
    edge_scaling: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"N must be an integer >= 2, got {self.N!r}")
        n = int(self.n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "N", int(self.N))
        eps = np.asarray(self.epsilon, dtype=float)
        if eps.shape != (n,) or not np.all(np.isfinite(eps)):
            raise ConfigError(f"epsilon must be {n} finite numbers, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", _frozen(eps))
        object.__setattr__(self, "U", _symmetric("U", self.U, n, zero_diag=False))
        object.__setattr__(self, "V", _symmetric("V", self.V, n, zero_diag=True))
        object.__setattr__(self, "W", _symmetric("W", self.W, n, zero_diag=True))
        if not isinstance(self.graph, CouplingGraph):
            raise ConfigError("graph must be a CouplingGraph")
        if self.graph.N != self.N:
            raise ConfigError(f"graph has {self.graph.N} sites but N={self.N}")
        object.__setattr__(self, "edge_scaling", bool(self.edge_scaling))

    @property
    def dim(self) -> int:
        return self.n**self.N

    @property
    def site_weights(self) -> np.ndarray:
        """Per-site multipliers of epsilon."""
        return self.graph.r_row if self.edge_scaling else np.ones(self.N)

    @property
    def site_energies(self) -> np.ndarray:
        """Array eps[p, i] of one-body energies."""
        return np.outer(self.site_weights, self.epsilon)

    @property
    def v_zero(self) -> bool:
        return not np.any(self.V)

    def replace(self, **changes) -> "ModelSpec":
        kw = dict(n=self.n, N=self.N, epsilon=self.epsilon, U=self.U, V=self.V, W=self.W,
                  graph=self.graph, edge_scaling=self.edge_scaling, meta=dict(self.meta))
        kw.update(changes)
        return ModelSpec(**kw)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "epsilon": self.epsilon.tolist(),
            "U": self.U.tolist(),
            "V": self.V.tolist(),
            "W": self.W.tolist(),
            "graph": self.graph.to_dict(),
            "edge_scaling": self.edge_scaling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return model_from_dict(d)


def _load_matrix(name: str, raw, n: int) -> np.ndarray:
    if raw is None:
        return np.zeros((n, n))
    try:
        M = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key '{name}': not a numeric matrix") from exc
    if M.shape != (n, n):
        raise ConfigError(f"key '{name}': expected {n}x{n} matrix, got shape {M.shape}")
    lower = np.tril(M, -1)
    if not np.any(lower) and np.any(np.triu(M, 1)):
        # upper-triangular input: mirror it
        M = M + np.triu(M, 1).T
    return M


def model_from_dict(d: dict) -> ModelSpec:
    """Build a ModelSpec from the JSON config layout.

    Symmetric matrices may be given upper-triangular; they are mirrored.
    Errors name the offending key.
    """
    unknown = set(d) - {"n", "N", "epsilon", "U", "V", "W", "graph", "edge_scaling", "meta"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("n", "N", "epsilon"):
        if key not in d:
            raise ConfigError(f"missing required key '{key}'")
    n, N = d["n"], d["N"]
    if not isinstance(n, int) or not isinstance(N, int):
        raise ConfigError("keys 'n' and 'N' must be integers")
    if n < 2 or N < 2:
        raise ConfigError(f"n and N must be >= 2, got n={n}, N={N}")
    try:
        eps = np.array(d["epsilon"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError("key 'epsilon': not a numeric vector") from exc
    if eps.shape != (n,):
        raise ConfigError(f"key 'epsilon': expected {n} values, got shape {eps.shape}")
    gdef = d.get("graph", {"kind": "ring_first_neighbor"})
    if isinstance(gdef, str):
        gdef = {"kind": gdef}
    if not isinstance(gdef, dict) or "kind" not in gdef:
        raise ConfigError("key 'graph': expected an object with a 'kind' entry")
    graph = make_graph(gdef["kind"], N, gdef.get("custom"))
    mats = {}
    for name in ("U", "V", "W"):
        mats[name] = _load_matrix(name, d.get(name), n)
    return ModelSpec(n, N, eps, mats["U"], mats["V"], mats["W"], graph,
                     bool(d.get("edge_scaling", True)), dict(d.get("meta", {})))


def load_model(path: str | Path) -> ModelSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return model_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_model(spec: ModelSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


def offdiag(values: float | np.ndarray, n: int) -> np.ndarray:
    """n x n matrix with ``values`` off the diagonal and zeros on it."""
    M = np.broadcast_to(np.asarray(values, dtype=float), (n, n)).copy()
    np.fill_diagonal(M, 0.0)
    return M


def iter_pairs(n: int) -> Iterable[tuple[int, int]]:
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j
