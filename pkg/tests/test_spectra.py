import numpy as np
import pytest
from hypothesis import given, settings

from conftest import LADDER_E2C, specs
from sunfact.errors import ConfigError
from sunfact.hamiltonian import build_full
from sunfact.model import SectorLabel, sector_of, index_to_config
from sunfact.recipes import level_ladder, v0_scaled
from sunfact.spectra import (
    eigensolve,
    excitation_energies,
    find_crossings,
    full_spectrum,
    parallel_map,
    sector_spectrum,
    spectrum,
    sweep,
)


class TestEigensolve:
    def test_two_by_two(self):
        sr = eigensolve(np.array([[0.0, 1.0], [1.0, 0.0]]), want_vectors=True)
        assert np.allclose(sr.eigenvalues, [-1, 1])
        assert sr.gap == pytest.approx(2.0)
        assert abs(sr.ground_state() @ [1, 1]) < 1e-12

    def test_rejects_asymmetric(self):
        with pytest.raises(ConfigError):
            eigensolve(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_no_vectors(self):
        sr = eigensolve(np.eye(3))
        with pytest.raises(ConfigError):
            sr.ground_state()
        assert sr.ground_multiplicity() == 3

    def test_k_truncates(self, rng):
        A = rng.normal(size=(6, 6))
        sr = eigensolve(A + A.T, want_vectors=True, k=2)
        assert sr.eigenvalues.size == 2 and sr.eigenvectors.shape == (6, 2)

    def test_excitations(self):
        sr = eigensolve(np.diag([3.0, 1.0, 2.0, 5.0]))
        assert np.allclose(excitation_energies(sr, 2), [1, 2])
        with pytest.raises(ConfigError):
            excitation_energies(sr, 4)


@settings(max_examples=20, deadline=None)
@given(specs(max_n=3, max_N=4))
def test_sector_merge_matches_full(spec):
    a = full_spectrum(spec).eigenvalues
    b = sector_spectrum(spec, "parity").eigenvalues
    assert np.abs(a - b).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(specs(max_n=3, max_N=4))
def test_sector_vectors_carry_their_label(spec):
    sr = sector_spectrum(spec, "parity", want_vectors=True)
    H = build_full(spec).data
    for j in range(0, sr.eigenvalues.size, max(1, sr.eigenvalues.size // 5)):
        v = sr.eigenvectors[:, j]
        assert np.abs(H @ v - sr.eigenvalues[j] * v).max() < 1e-9
        i = int(np.argmax(np.abs(v)))
        assert sector_of(index_to_config(i, spec.n, spec.N), "parity", spec.n) == sr.sectors[j]


def test_spectrum_dispatch(ladder):
    spec = ladder(2)(0.5)
    assert spectrum(spec, "none").sectors is None
    assert np.allclose(spectrum(spec, "none").eigenvalues, spectrum(spec).eigenvalues)
    with pytest.raises(ConfigError):
        sector_spectrum(spec, "spin")


def test_pair_band_at_factorization(ladder):
    sr = sector_spectrum(ladder(2)(1.0), band_size=4)
    assert sr.ground_multiplicity() == 4
    assert sr.ground_energy == pytest.approx(LADDER_E2C, abs=1e-12)
    assert len(set(sr.sectors[:4])) == 4


def test_ground_sector_changes_across_factorization(ladder):
    fam = ladder(4)
    below = sector_spectrum(fam(0.9), k=1).sectors[0]
    above = sector_spectrum(fam(1.1), k=1).sectors[0]
    assert below == SectorLabel("parity", (1, 1, 1))
    assert above != below


@pytest.mark.parametrize("N", [2, 4])
def test_ladder_crossing(ladder, N):
    res = find_crossings(ladder(N), 0.0, 2.0, band_size=4)
    fac = [e for e in res.events if e.kind == "factorization_crossing"]
    assert len(fac) == 1
    assert abs(fac[0].param - 1.0) < 1e-6 and fac[0].multiplicity == 4
    assert fac[0].energy == pytest.approx(0.5 * LADDER_E2C * ladder(N)(1.0).graph.r_total, abs=1e-8)


def test_v0_crossing_multiplicity():
    fam = lambda x: v0_scaled(x, n=4, N=4)
    res = find_crossings(fam, 0.0, 2.0, band_size=35, kind="occupation", steps=41)
    fac = [e for e in res.events if e.kind == "factorization_crossing"]
    assert len(fac) == 1 and abs(fac[0].param - 1) < 1e-6
    assert fac[0].multiplicity == 35 and fac[0].energy == pytest.approx(-10.0, abs=1e-8)


def test_grid_halving_stable(ladder):
    a = find_crossings(ladder(4), 0.0, 2.0, band_size=4, steps=201).events
    b = find_crossings(ladder(4), 0.0, 2.0, band_size=4, steps=101).events
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert abs(x.param - y.param) < 1e-8 and x.multiplicity == y.multiplicity
        assert (x.left, x.right) == (y.left, y.right)


def test_crossing_argument_checks(ladder):
    with pytest.raises(ConfigError):
        find_crossings(ladder(2), 1.0, 1.0, band_size=4)
    with pytest.raises(ConfigError):
        find_crossings(ladder(2), 0.0, 1.0, band_size=4, kind="none")


def test_sweep(ladder):
    res = sweep(ladder(2), np.linspace(0, 2, 5), levels=3)
    assert len(res.points) == 5 and res.points[0].energies.size == 3
    with pytest.raises(ConfigError):
        sweep(ladder(2), [1.0, 0.5])


def test_threads_preserve_order():
    assert parallel_map(lambda x: x * x, list(range(10)), threads=4) == [x * x for x in range(10)]


def test_threaded_sweep_identical(ladder):
    grid = np.linspace(0, 2, 9)
    a = sweep(ladder(4), grid, threads=1)
    b = sweep(ladder(4), grid, threads=3)
    for p, q in zip(a.points, b.points):
        assert np.array_equal(p.energies, q.energies) and p.sectors == q.sectors
