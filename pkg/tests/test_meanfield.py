import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LADDER_E2C, random_symmetric
from sunfact.errors import ConfigError
from sunfact.factorization import build_M, solve_spec
from sunfact.meanfield import (
    OUTSIDE_ATTRACTIVE,
    m_tilde,
    mf_bruteforce,
    mf_energy,
    mf_solve,
    mf_transition_points,
    project_simplex,
)
from sunfact.model import ModelSpec, make_graph
from sunfact.recipes import level_ladder, v0_scaled


def attractive_spec(rng, n, N=4, graph="ring"):
    U = random_symmetric(rng, n, nonneg=True)
    V = random_symmetric(rng, n, zero_diag=True, nonneg=True)
    W = random_symmetric(rng, n, zero_diag=True, nonneg=True)
    return ModelSpec(n, N, rng.normal(size=n), U, V, W, make_graph(graph, N))


def two_level(J, b=1.0):
    # eps = (0, b), only U_12 = J couples the levels
    U = np.array([[0.0, J], [J, 0.0]])
    z = np.zeros((2, 2))
    return ModelSpec(2, 2, [0.0, b], U, z, z, make_graph("ring", 2))


class TestExamples:
    def test_two_level_interior(self):
        sol = mf_solve(two_level(2.0))
        # Mt = [[0, -1], [-1, 2]] gives x = (3/4, 1/4)
        assert np.allclose(sol.f_squared, [0.75, 0.25], atol=1e-12)
        assert sol.energy == pytest.approx(-0.25, abs=1e-12)
        assert sol.occupied == (0, 1)

    def test_two_level_below_onset(self):
        sol = mf_solve(two_level(0.5))
        assert np.allclose(sol.f_squared, [1, 0]) and sol.occupied == (0,)
        assert sol.dropped == (1,) and sol.energy == 0.0

    def test_two_level_onset(self):
        onsets = mf_transition_points(lambda J: two_level(J), 0.1, 3.0, steps=30, tol=1e-10)
        assert len(onsets) == 1 and onsets[0].level == 1
        assert onsets[0].param == pytest.approx(1.0, abs=1e-9)

    def test_exact_at_ladder_factorization(self, ladder):
        spec = ladder(4)(1.0)
        sol = mf_solve(spec)
        assert sol.energy == pytest.approx(2 * LADDER_E2C, abs=1e-12)
        assert sol.lam == pytest.approx(LADDER_E2C, abs=1e-12)
        assert np.allclose(sol.f_squared, solve_spec(spec).f_squared, atol=1e-12)

    def test_v0_family_energy(self):
        for N in (3, 4, 5):
            assert mf_solve(v0_scaled(1.0, N=N)).energy == pytest.approx(-2.5 * N, abs=1e-12)

    def test_to_dict(self):
        d = mf_solve(two_level(2.0)).to_dict()
        assert d["occupied"] == [1, 2] and d["method"] == "closed_form"

    def test_bad_amplitudes(self):
        with pytest.raises(ConfigError):
            mf_energy([0.5, 0.6], two_level(1.0))

    def test_repulsive_warns(self):
        spec = two_level(-1.0)
        with pytest.warns(UserWarning, match=OUTSIDE_ATTRACTIVE):
            sol = mf_solve(spec)
        assert sol.warning == OUTSIDE_ATTRACTIVE
        assert sol.energy == pytest.approx(mf_bruteforce(spec)[0], abs=1e-10)


def test_m_tilde_at_factorization(ladder):
    spec = ladder(4)(1.0)
    E2 = solve_spec(spec).E2
    M = build_M(spec.epsilon, np.diag(spec.U), spec.V)
    off = 1 - np.eye(3)
    assert np.abs(m_tilde(spec) - (M + E2 * off)).max() < 1e-14


@pytest.mark.parametrize("seed", range(50))
def test_matches_projected_gradient(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    spec = attractive_spec(rng, n, N=int(rng.integers(2, 7)), graph=rng.choice(["ring", "chain"]))
    sol = mf_solve(spec)
    e_bf, _ = mf_bruteforce(spec)
    assert abs(sol.energy - e_bf) < 1e-8
    assert sol.energy <= e_bf + 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_minimum_over_random_amplitudes(seed):
    rng = np.random.default_rng(seed)
    spec = attractive_spec(rng, int(rng.integers(2, 5)))
    sol = mf_solve(spec)
    xs = rng.dirichlet(np.ones(spec.n), size=200)
    for x in xs[:20]:
        assert sol.energy <= mf_energy(x, spec) + 1e-12
    assert abs(sol.f_squared.sum() - 1) < 1e-12 and np.all(sol.f_squared >= 0)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6))
def test_project_simplex(y):
    x = project_simplex(np.array(y))
    assert abs(x.sum() - 1) < 1e-9 and np.all(x >= 0)


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_ladder_onsets_independent_of_N(N):
    fam = lambda x: level_ladder(x, N=N)
    onsets = mf_transition_points(fam, 0.0, 2.0, steps=81, tol=1e-8)
    assert [o.level for o in onsets] == [1, 2]
    assert onsets[0].param == pytest.approx(0.43190, abs=1e-4)
    assert onsets[1].param == pytest.approx(0.64566, abs=1e-4)


def test_no_couplings_no_onsets():
    z = np.zeros((3, 3))
    fam = lambda x: ModelSpec(3, 3, [0, 1, 2], z, z, z, make_graph("ring", 3))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert mf_transition_points(fam, 0, 1, steps=5) == []
