"""
Dense symmetric eigensolution, symmetry-resolved spectra and level-crossing
detection along one-parameter model families.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, InvariantError
from .hamiltonian import HamiltonianMatrix, build_all_sectors, check_cap
from .model import ModelSpec, SectorLabel

DEGENERACY_RTOL = 1e-7
DEFAULT_STEPS = 201
BISECTION_DEPTH = 40


def energy_tol(E0: float) -> float:
    return DEGENERACY_RTOL * max(1.0, abs(E0))


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    sectors: list | None = None
    eigenvectors: np.ndarray | None = None
    gs_band: np.ndarray | None = None

    @property
    def gap(self) -> float:
        ev = self.eigenvalues
        return float(ev[1] - ev[0]) if ev.size > 1 else float("nan")

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def ground_multiplicity(self, rtol: float = DEGENERACY_RTOL) -> int:
        E0 = self.eigenvalues[0]
        return int(np.count_nonzero(self.eigenvalues - E0 <= rtol * max(1.0, abs(E0))))

    def ground_state(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ConfigError("spectrum computed without eigenvectors")
        return self.eigenvectors[:, 0]


def _band(ev: np.ndarray, band_size: int | None):
    if band_size is None:
        return None
    return np.arange(min(band_size, ev.size))


def eigensolve(H: HamiltonianMatrix | np.ndarray, want_vectors: bool = False, k: int | None = None,
               band_size: int | None = None) -> SpectrumResult:
    """Full dense symmetric eigendecomposition (LAPACK ``syevd`` via numpy).

    With ``want_vectors`` the decomposition is self-checked: reconstruction
    error below 1e-9 * max|H| and orthonormality below 1e-10.
    """
    data = H.data if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=float)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ConfigError(f"Hamiltonian must be square, got {data.shape}")
    if data.size and np.abs(data - data.T).max() > 1e-12:
        raise ConfigError("Hamiltonian is not symmetric")
    if want_vectors:
        w, v = np.linalg.eigh(data)
        hmax = max(np.abs(data).max(), 1e-300)
        recon = np.abs((v * w) @ v.T - data).max()
        if recon > 1e-9 * max(hmax, 1.0):
            raise InvariantError(f"eigendecomposition reconstruction error {recon:.3e}")
        ortho = np.abs(v.T @ v - np.eye(v.shape[1])).max()
        if ortho > 1e-10:
            raise InvariantError(f"eigenvectors not orthonormal ({ortho:.3e})")
    else:
        w, v = np.linalg.eigvalsh(data), None
    if k is not None:
        w = w[:k]
        v = None if v is None else v[:, :k]
    sec = None
    if isinstance(H, HamiltonianMatrix) and H.sector is not None:
        sec = [H.sector] * w.size
    return SpectrumResult(w, sec, v, _band(w, band_size))


def _embed_vectors(v: np.ndarray, basis_map: np.ndarray, dim: int) -> np.ndarray:
    full = np.zeros((dim, v.shape[1]), dtype=v.dtype)
    full[basis_map] = v
    return full


def _lowest(data: np.ndarray, k: int | None, want_vectors: bool):
    dim = data.shape[0]
    if k is None or k >= dim:
        if want_vectors:
            return np.linalg.eigh(data)
        return np.linalg.eigvalsh(data), None
    if want_vectors:
        return sla.eigh(data, subset_by_index=[0, k - 1])
    return sla.eigh(data, subset_by_index=[0, k - 1], eigvals_only=True), None


def sector_spectrum(spec: ModelSpec, kind: str = "parity", want_vectors: bool = False,
                    k: int | None = None, cap: int | None = None,
                    band_size: int | None = None) -> SpectrumResult:
    """Diagonalize every symmetry sector and merge by energy.

    Labels come from the sector of origin.  Eigenvectors, when requested, are
    embedded in the full product basis.  ``k`` keeps the lowest k levels of
    the merged spectrum.
    """
    if kind not in ("parity", "occupation"):
        raise ConfigError(f"unknown sector kind {kind!r}")
    vals, labels, vecs = [], [], []
    for Hs in build_all_sectors(spec, kind, cap):
        w, v = _lowest(Hs.data, k, want_vectors)
        vals.append(w)
        labels += [Hs.sector] * w.size
        if want_vectors:
            vecs.append(_embed_vectors(v, Hs.basis_map, spec.dim))
    ev = np.concatenate(vals)
    order = np.argsort(ev, kind="stable")
    ev = ev[order]
    labels = [labels[i] for i in order]
    V = np.concatenate(vecs, axis=1)[:, order] if want_vectors else None
    if k is not None:
        ev, labels = ev[:k], labels[:k]
        V = None if V is None else V[:, :k]
    return SpectrumResult(ev, labels, V, _band(ev, band_size))


def full_spectrum(spec: ModelSpec, want_vectors: bool = False, k: int | None = None,
                  cap: int | None = None) -> SpectrumResult:
    from .hamiltonian import build_full

    return eigensolve(build_full(spec, cap), want_vectors, k)


def spectrum(spec: ModelSpec, sectors: str = "parity", **kw) -> SpectrumResult:
    """Sector-first spectrum; ``sectors="none"`` solves the full space."""
    if sectors == "none":
        kw.pop("band_size", None)
        return full_spectrum(spec, **kw)
    return sector_spectrum(spec, sectors, **kw)


def excitation_energies(spec_result: SpectrumResult, count: int) -> np.ndarray:
    ev = spec_result.eigenvalues
    if count >= ev.size:
        raise ConfigError(f"requested {count} excitations from {ev.size} levels")
    return ev[1:count + 1] - ev[0]


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Ordered map, threaded when ``threads > 1``."""
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# Sweeps and crossings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingEvent:
    param: float
    kind: str
    multiplicity: int
    left: SectorLabel
    right: SectorLabel
    energy: float

    def to_dict(self) -> dict:
        return {"param": self.param, "kind": self.kind, "multiplicity": self.multiplicity,
                "left": str(self.left), "right": str(self.right), "energy": self.energy}


@dataclass(frozen=True)
class SweepPoint:
    param: float
    energies: np.ndarray
    sectors: list

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0]) if self.energies.size > 1 else float("nan")


@dataclass(frozen=True)
class SweepResult:
    name: str
    grid: np.ndarray
    points: list
    events: list = field(default_factory=list)


def _gs_label(spec: ModelSpec, kind: str, cap) -> tuple[SectorLabel, float]:
    best = None
    for Hs in build_all_sectors(spec, kind, cap):
        e = float(_lowest(Hs.data, 1, False)[0][0])
        if best is None or e < best[1]:
            best = (Hs.sector, e)
    return best


def _summarize(spec: ModelSpec, t: float, kind: str, levels: int, cap) -> SweepPoint:
    if kind == "none":
        sr = full_spectrum(spec, k=levels, cap=cap)
        return SweepPoint(t, sr.eigenvalues, [None] * sr.eigenvalues.size)
    sr = sector_spectrum(spec, kind, k=levels, cap=cap)
    return SweepPoint(t, sr.eigenvalues, sr.sectors)


def sweep(family: Callable[[float], ModelSpec], grid: Sequence[float], levels: int = 4,
          kind: str = "parity", threads: int = 1, cap: int | None = None,
          name: str = "param") -> SweepResult:
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigError("sweep grid must have at least two strictly increasing points")
    check_cap(family(float(grid[0])).dim, cap)
    pts = parallel_map(lambda t: _summarize(family(float(t)), float(t), kind, levels, cap),
                       list(grid), threads)
    return SweepResult(name, grid, pts)


def find_crossings(family: Callable[[float], ModelSpec], lo: float, hi: float, band_size: int,
                   steps: int = DEFAULT_STEPS, kind: str = "parity", depth: int = BISECTION_DEPTH,
                   levels: int | None = None, threads: int = 1, cap: int | None = None,
                   name: str = "param") -> SweepResult:
    """Locate ground-state symmetry changes along a one-parameter family.

    A coarse grid is scanned for changes of the ground-state sector; each
    change is refined by bisection on the ground-state label.  At the refined
    point the number of levels (all sectors) within 1e-7 * max(1, |E0|) of the
    ground energy is the crossing multiplicity.  Events whose multiplicity
    reaches ``band_size`` are ``factorization_crossing``, the rest
    ``parity_transition``.  Events closer than 1e-6 (relative to the range)
    are merged.
    """
    if not hi > lo:
        raise ConfigError("empty parameter range")
    if kind not in ("parity", "occupation"):
        raise ConfigError("crossing detection needs a symmetry sector kind")
    grid = np.linspace(lo, hi, steps)
    levels = levels or max(band_size, 4)
    res = sweep(family, grid, levels=levels, kind=kind, threads=threads, cap=cap, name=name)
    gs = [pt.sectors[0] for pt in res.points]

    def refine(a, b, la):
        for _ in range(depth):
            m = 0.5 * (a + b)
            lm, _ = _gs_label(family(m), kind, cap)
            if lm == la:
                a = m
            else:
                b = m
        return a, b

    raw = []
    for k in range(steps - 1):
        if gs[k] == gs[k + 1]:
            continue
        a, b = refine(grid[k], grid[k + 1], gs[k])
        x = 0.5 * (a + b)
        sr = sector_spectrum(family(x), kind, k=max(band_size, levels) + 4, cap=cap)
        mult = sr.ground_multiplicity()
        raw.append((x, mult, gs[k], gs[k + 1], sr.ground_energy))

    merge_tol = 1e-6 * (hi - lo)
    events: list[CrossingEvent] = []
    for x, mult, la, lb, e0 in raw:
        if events and abs(x - events[-1].param) < merge_tol:
            prev = events[-1]
            keep_x = x if mult > prev.multiplicity else prev.param
            m = max(mult, prev.multiplicity)
            events[-1] = CrossingEvent(keep_x, _kind(m, band_size), m, prev.left, lb,
                                       e0 if mult > prev.multiplicity else prev.energy)
            continue
        events.append(CrossingEvent(x, _kind(mult, band_size), mult, la, lb, e0))
    return SweepResult(name, grid, res.points, events)


def _kind(mult: int, band_size: int) -> str:
    return "factorization_crossing" if mult >= band_size else "parity_transition"
