"""
Uniform mean-field (product state) solution.

For real uniform amplitudes the energy depends only on x_i = f_i^2:

    <H> = r * (sum_i eps_i x_i - 1/2 sum_ij J_ij x_i x_j)
        = r/2 * x^T Mt x,          Mt_ij = eps_i + eps_j - J_ij,

with J = U + V + W and r = sum_p r_p.  On a set of occupied levels the
stationary point is ``x = Mt^-1 v / (v^T Mt^-1 v)``.  Levels whose x_i turns
negative are dropped one at a time and the closed form is re-solved.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, InvariantError
from .model import ModelSpec

log = logging.getLogger(__name__)

NEG_TOL = 1e-13
OUTSIDE_ATTRACTIVE = "outside attractive regime"


@dataclass(frozen=True)
class MeanFieldSolution:
    f_squared: np.ndarray
    occupied: tuple
    energy: float
    lam: float
    M_tilde: np.ndarray
    dropped: tuple = ()
    method: str = "closed_form"
    warning: str | None = None

    def to_dict(self) -> dict:
        return {
            "f_squared": self.f_squared.tolist(),
            "occupied": [i + 1 for i in self.occupied],
            "energy": self.energy,
            "lambda": self.lam,
            "method": self.method,
            "warning": self.warning,
        }


def _effective_epsilon(spec: ModelSpec) -> np.ndarray:
    # one-body weight sum_p w_p relative to r = sum_p r_p
    return spec.epsilon * (spec.site_weights.sum() / spec.graph.r_total)


def m_tilde(spec: ModelSpec) -> np.ndarray:
    eps = _effective_epsilon(spec)
    J = spec.U + spec.V + spec.W
    return eps[:, None] + eps[None, :] - J


def mf_energy(f_squared, spec: ModelSpec) -> float:
    """Mean-field energy for squared amplitudes, evaluated in both algebraic forms."""
    x = np.asarray(f_squared, dtype=float)
    if x.shape != (spec.n,) or np.any(x < -NEG_TOL) or abs(x.sum() - 1) > 1e-10:
        raise ConfigError(f"invalid squared amplitudes {x!r}")
    r = spec.graph.r_total
    J = spec.U + spec.V + spec.W
    one_body = spec.site_weights.sum() * float(spec.epsilon @ x)
    e1 = one_body - 0.5 * r * float(x @ J @ x)
    e2 = 0.5 * r * float(x @ m_tilde(spec) @ x)
    if abs(e1 - e2) > 1e-12 * max(1.0, abs(e1)):
        raise InvariantError(f"mean-field energy forms disagree: {e1:.15g} vs {e2:.15g}")
    return e1


def mf_energies(xs: np.ndarray, spec: ModelSpec) -> np.ndarray:
    """Vectorized energy for a batch of squared-amplitude rows."""
    Mt = m_tilde(spec)
    return 0.5 * spec.graph.r_total * np.einsum("ki,ij,kj->k", xs, Mt, xs)


def _stationary(Mt: np.ndarray, active: Sequence[int]):
    """Stationary point of x^T Mt x on the face spanned by ``active``.

    Solves the bordered system [[Mt_S, -1], [1^T, 0]] [x; lam] = [0; 1].
    Returns None when the system is singular.
    """
    S = list(active)
    k = len(S)
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = Mt[np.ix_(S, S)]
    A[:k, k] = -1.0
    A[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    if np.linalg.cond(A) > 1e12:
        return None
    sol = np.linalg.solve(A, rhs)
    return sol[:k], float(sol[k])


def _embed(n, active, xs):
    x = np.zeros(n)
    x[list(active)] = xs
    return x


def _subset_search(Mt: np.ndarray):
    """Global minimum of x^T Mt x on the simplex by enumerating faces."""
    n = Mt.shape[0]
    best = None
    for k in range(n, 0, -1):
        for S in itertools.combinations(range(n), k):
            res = _stationary(Mt, S)
            if res is None:
                continue
            xs, lam = res
            if np.any(xs < -NEG_TOL):
                continue
            x = _embed(n, S, np.clip(xs, 0, None))
            x /= x.sum()
            e = float(x @ Mt @ x)
            # ties: larger active set first (outer loop order), then lexicographic
            if best is None or e < best[0] - 1e-12 * max(1.0, abs(e)):
                best = (e, S, x, lam)
    return best


def mf_solve(spec: ModelSpec) -> MeanFieldSolution:
    """Minimize the uniform mean-field energy.

    Starts from all levels occupied and drops the most negative x_i until the
    closed form is feasible.  The result is then compared against an
    enumeration of all faces of the simplex; if a lower stationary point
    exists (possible for non-convex Mt, or when a closed form is singular)
    that one is returned and ``method`` is ``"subset_search"``.
    """
    n = spec.n
    J = spec.U + spec.V + spec.W
    warn = OUTSIDE_ATTRACTIVE if np.any(J < 0) or np.any(spec.U < 0) else None
    if warn:
        warnings.warn(f"mean field: {warn}; global minimum not guaranteed", stacklevel=2)
    Mt = m_tilde(spec)
    r = spec.graph.r_total

    active = list(range(n))
    dropped = []
    closed = None
    while active:
        res = _stationary(Mt, active)
        if res is None:
            log.debug("singular closed form on levels %s, falling back to subset search", active)
            break
        xs, lam = res
        worst = int(np.argmin(xs))
        if xs[worst] < -NEG_TOL:
            dropped.append(active.pop(worst))
            continue
        x = _embed(n, active, np.clip(xs, 0, None))
        x /= x.sum()
        closed = (float(x @ Mt @ x), tuple(active), x, lam)
        break

    best = _subset_search(Mt)
    method = "closed_form"
    if closed is None or best[0] < closed[0] - 1e-12 * max(1.0, abs(best[0])):
        method = "subset_search"
        chosen = best
    else:
        chosen = closed
    e, S, x, lam = chosen
    occupied = tuple(i for i in S if x[i] > 0)
    energy = 0.5 * r * e
    grad = Mt @ x
    if occupied and np.abs(grad[list(occupied)] - lam).max() > 1e-10 * max(1.0, abs(lam)):
        raise InvariantError("mean-field stationarity violated on occupied levels")
    x.setflags(write=False)
    return MeanFieldSolution(x, occupied, energy, lam, Mt, tuple(dropped), method, warn)


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def mf_bruteforce(spec: ModelSpec, restarts: int = 64, seed: int = 0,
                  max_iter: int = 20000) -> tuple[float, np.ndarray]:
    """Projected-gradient minimization of the mean-field energy over the simplex.

    Independent of the closed form: starts from every vertex, the barycenter
    and ``restarts`` random points.
    """
    Mt = m_tilde(spec)
    n = spec.n
    H = Mt + Mt.T
    step = 1.0 / max(np.abs(np.linalg.eigvalsh(H)).max(), 1e-12)
    rng = np.random.default_rng(seed)
    starts = [np.eye(n)[i] for i in range(n)] + [np.full(n, 1.0 / n)]
    starts += list(rng.dirichlet(np.ones(n), size=restarts))
    best_e, best_x = np.inf, None
    for x in starts:
        x = x.copy()
        e = x @ Mt @ x
        for _ in range(max_iter):
            xn = project_simplex(x - step * (H @ x))
            en = xn @ Mt @ xn
            if abs(en - e) < 1e-16 and np.abs(xn - x).max() < 1e-13:
                x, e = xn, en
                break
            x, e = xn, en
        if e < best_e:
            best_e, best_x = e, x
    return 0.5 * spec.graph.r_total * float(best_e), best_x


@dataclass(frozen=True)
class Onset:
    param: float
    level: int


def mf_transition_points(family: Callable[[float], ModelSpec], lo: float, hi: float,
                         steps: int = 201, tol: float = 1e-6) -> list[Onset]:
    """Parameter values where a new level starts to be occupied in mean field."""
    if not hi > lo:
        raise ConfigError("empty parameter range")
    grid = np.linspace(lo, hi, steps)
    occ = [frozenset(mf_solve(family(t)).occupied) for t in grid]
    onsets = []
    for k in range(steps - 1):
        if occ[k + 1] == occ[k]:
            continue
        a, b = grid[k], grid[k + 1]
        left = occ[k]
        while b - a > tol:
            m = 0.5 * (a + b)
            if frozenset(mf_solve(family(m)).occupied) == left:
                a = m
            else:
                b = m
        right = frozenset(mf_solve(family(b)).occupied)
        for lvl in sorted(right - left):
            onsets.append(Onset(0.5 * (a + b), lvl))
    return onsets
