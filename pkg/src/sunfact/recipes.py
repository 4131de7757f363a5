"""
Named one-parameter model families and parameter paths for sweeps.

A family maps a scalar ``x`` to a ModelSpec.  The named families are
dimensionless in units of the level spacing scale:

``level_ladder``
    Equally spaced levels eps_i = (i - (n+1)/2) / 2, U = 0, V_ij = x v_c and
    W_ij = x (eps_i + eps_j - E2c), so that x = 1 is a factorization point.
``v0_scaled``
    V = 0 with U_ii = x (2 eps_i - E2) and W_ij = x (eps_i + eps_j - E2); x = 1
    is the fully degenerate V = 0 factorization point.
``heisenberg_spacing``
    V = 0, U_ii = W_ij = J = 1 and level energies x * (-1, 0, 0.8, 2.2); x = 0 is
    the SU(n) Heisenberg point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from .errors import ConfigError
from .factorization import build_M
from .model import ModelSpec, make_graph, offdiag

LADDER_VC = 0.4
UNEVEN_LEVELS = (-1.0, 0.0, 0.8, 2.2)
V0_E2 = -5.0


def ladder_levels(n: int) -> np.ndarray:
    return 0.5 * (np.arange(1, n + 1) - (n + 1) / 2)


def ladder_pair_energy(n: int = 3, v_c: float = LADDER_VC) -> float:
    """Lowest eigenvalue of M for the ladder levels with U = 0 and V_ij = v_c."""
    return float(np.linalg.eigvalsh(build_M(ladder_levels(n), np.zeros(n), offdiag(v_c, n)))[0])


def level_ladder(x: float, n: int = 3, N: int = 4, graph: str = "ring",
                 v_c: float = LADDER_VC) -> ModelSpec:
    eps = ladder_levels(n)
    E2c = ladder_pair_energy(n, v_c)
    W = x * (eps[:, None] + eps[None, :] - E2c)
    np.fill_diagonal(W, 0.0)
    return ModelSpec(n, N, eps, np.zeros((n, n)), offdiag(x * v_c, n), W, make_graph(graph, N))


def v0_scaled(x: float, n: int = 3, N: int = 4, graph: str = "ring",
              E2: float = V0_E2) -> ModelSpec:
    if n > len(UNEVEN_LEVELS):
        raise ConfigError(f"uneven level preset defined up to n={len(UNEVEN_LEVELS)}")
    eps = np.array(UNEVEN_LEVELS[:n])
    U = np.diag(x * (2 * eps - E2))
    W = x * (eps[:, None] + eps[None, :] - E2)
    np.fill_diagonal(W, 0.0)
    return ModelSpec(n, N, eps, U, np.zeros((n, n)), W, make_graph(graph, N))


def heisenberg_spacing(x: float, n: int = 4, N: int = 4, graph: str = "ring",
                       J: float = 1.0) -> ModelSpec:
    if n > len(UNEVEN_LEVELS):
        raise ConfigError(f"uneven level preset defined up to n={len(UNEVEN_LEVELS)}")
    eps = x * np.array(UNEVEN_LEVELS[:n])
    return ModelSpec(n, N, eps, J * np.eye(n), np.zeros((n, n)), offdiag(J, n),
                     make_graph(graph, N))


RECIPES: dict[str, Callable[..., ModelSpec]] = {
    "level_ladder": level_ladder,
    "v0_scaled": v0_scaled,
    "heisenberg_spacing": heisenberg_spacing,
}


@dataclass(frozen=True)
class Figure:
    """Parameter family, sizes and sweep window behind one reproduced dataset."""

    recipe: str
    n: int
    sizes: tuple
    lo: float
    hi: float
    kind: str
    band: int
    param: str


FIGURES = {
    "fig2": Figure("level_ladder", 3, (2, 4), 0.0, 2.0, "parity", 4, "v/v_c"),
    "fig3": Figure("level_ladder", 3, (4,), 0.0, 2.0, "parity", 4, "v/v_c"),
    "fig4": Figure("level_ladder", 3, (6,), 0.0, 2.0, "parity", 4, "v/v_c"),
    "fig5": Figure("level_ladder", 3, (6,), 0.0, 2.0, "parity", 4, "v/v_c"),
    "fig6_n3": Figure("v0_scaled", 3, (4,), 0.0, 2.0, "occupation", 15, "w/w_c"),
    "fig6_n4": Figure("v0_scaled", 4, (4,), 0.0, 2.0, "occupation", 35, "w/w_c"),
    "fig7": Figure("heisenberg_spacing", 4, (4,), 0.0, 1.0, "occupation", 35, "eps/J"),
}


def recipe_family(name: str, n: int, N: int, graph: str = "ring") -> Callable[[float], ModelSpec]:
    name = FIGURES[name].recipe if name in FIGURES else name
    if name not in RECIPES:
        raise ConfigError(f"unknown recipe {name!r}; known: {sorted(RECIPES)}")
    return partial(RECIPES[name], n=n, N=N, graph=graph)


SCALE_TARGETS = ("V", "W", "U", "epsilon", "couplings")


def parameter_family(path: str, base: ModelSpec | None = None, *, n: int | None = None,
                     N: int | None = None, graph: str = "ring") -> Callable[[float], ModelSpec]:
    """Resolve a parameter path to a family x -> ModelSpec.

    ``scale:<V|W|U|epsilon|couplings>`` multiplies that part of ``base`` by x;
    ``lerp:<recipe>`` selects a named family, with n, N and graph taken from
    the keyword arguments or from ``base``.
    """
    kind, _, target = path.partition(":")
    if kind == "scale":
        if base is None:
            raise ConfigError("scale paths need a base model")
        if target not in SCALE_TARGETS:
            raise ConfigError(f"unknown scale target {target!r}; known: {SCALE_TARGETS}")
        if target == "couplings":
            return lambda x: base.replace(U=x * base.U, V=x * base.V, W=x * base.W)
        return lambda x: base.replace(**{target: x * getattr(base, target)})
    if kind == "lerp":
        n = n if n is not None else (base.n if base is not None else None)
        N = N if N is not None else (base.N if base is not None else None)
        if base is not None:
            graph = base.graph.kind if base.graph.kind != "custom" else graph
        if n is None or N is None:
            raise ConfigError(f"lerp path {path!r} needs n and N")
        return recipe_family(target, n, N, graph)
    raise ConfigError(f"unknown parameter path {path!r}; use scale:<part> or lerp:<recipe>")
