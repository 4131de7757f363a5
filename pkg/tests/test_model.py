import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sunfact.errors import ConfigError
from sunfact.model import (
    BasisConfig,
    ModelSpec,
    SectorLabel,
    config_roundtrip,
    config_to_index,
    enumerate_sectors,
    index_to_config,
    load_model,
    make_graph,
    model_from_dict,
    parity_label,
    save_model,
    sector_of,
)


class TestGraphs:
    def test_ring_four_sites(self):
        g = make_graph("ring_first_neighbor", 4)
        assert np.allclose(g.r_row, 1.0)
        assert g.r_total == pytest.approx(4.0)
        assert g.r[0, 1] == 0.5 and g.r[0, 3] == 0.5 and g.r[0, 2] == 0.0

    def test_pair_has_unit_bond(self):
        assert make_graph("ring", 2).r[0, 1] == 1.0
        assert np.array_equal(make_graph("ring", 2).r, make_graph("all_to_all", 2).r)

    def test_open_chain_borders(self):
        assert np.allclose(make_graph("open_chain", 3).r_row, [0.5, 1.0, 0.5])

    def test_all_to_all(self):
        g = make_graph("all_to_all", 5)
        assert np.allclose(g.r[~np.eye(5, dtype=bool)], 0.25)
        assert np.allclose(g.r_row, 1.0)

    def test_custom(self):
        r = [[0, 2, 0], [2, 0, 1], [0, 1, 0]]
        g = make_graph("custom", 3, r)
        assert np.allclose(g.r_row, [2, 3, 1])

    @pytest.mark.parametrize("bad", [
        [[0, 1], [2, 0]],
        [[0, -1], [-1, 0]],
        [[1, 1], [1, 0]],
    ])
    def test_custom_rejects(self, bad):
        with pytest.raises(ConfigError):
            make_graph("custom", 2, bad)

    def test_rejects_small_N(self):
        with pytest.raises(ConfigError):
            make_graph("ring", 1)

    def test_custom_required(self):
        with pytest.raises(ConfigError):
            make_graph("custom", 3)

    @given(st.sampled_from(["ring", "chain", "all_to_all"]), st.integers(2, 9))
    def test_constructors_valid(self, kind, N):
        g = make_graph(kind, N)
        assert np.array_equal(g.r, g.r.T)
        assert np.all(np.diag(g.r) == 0) and np.all(g.r >= 0)
        assert np.allclose(g.r_row, g.r.sum(axis=1), atol=1e-12)


class TestBasis:
    def test_examples(self):
        assert config_roundtrip(0, 3, 4).levels == (0, 0, 0, 0)
        assert config_roundtrip(80, 3, 4).levels == (2, 2, 2, 2)
        assert config_roundtrip(5, 3, 2).levels == (2, 1)

    def test_out_of_range(self):
        with pytest.raises(ConfigError):
            index_to_config(9, 3, 2)

    @given(st.integers(2, 4), st.integers(1, 5), st.data())
    def test_bijection(self, n, N, data):
        i = data.draw(st.integers(0, n**N - 1))
        c = index_to_config(i, n, N)
        assert config_to_index(c.levels, n) == i == c.index
        assert sum(l * n**p for p, l in enumerate(c.levels)) == i


class TestSectors:
    def test_sector_examples(self):
        assert sector_of(BasisConfig((0, 0, 0, 0), 0), "parity", 3).values == (1, 1, 1)
        assert sector_of(BasisConfig((0, 1, 1, 2), 0), "occupation", 3).values == (1, 2, 1)
        assert sector_of(BasisConfig((0, 1), 0), "parity", 3).values == (-1, -1, 1)

    @pytest.mark.parametrize("n,N", [(2, 3), (3, 4), (4, 3), (3, 5)])
    def test_partition(self, n, N):
        par = enumerate_sectors(n, N, "parity")
        idx = np.concatenate(list(par.values()))
        assert idx.size == n**N and np.unique(idx).size == n**N
        for lab in par:
            assert np.prod(lab.values) == (-1) ** N
        occ = enumerate_sectors(n, N, "occupation")
        assert len(occ) == comb(N + n - 1, n - 1)
        assert sum(v.size for v in occ.values()) == n**N

    def test_parity_sector_sizes_n3_N4(self):
        # bucket all 81 configurations by hand
        sizes = {}
        for i in range(81):
            lv = [(i // 3**p) % 3 for p in range(4)]
            key = tuple((-1) ** lv.count(k) for k in range(3))
            sizes[key] = sizes.get(key, 0) + 1
        got = {lab.values: v.size for lab, v in enumerate_sectors(3, 4, "parity").items()}
        assert got == sizes and sum(got.values()) == 81

    @given(st.integers(2, 4), st.integers(1, 5), st.data())
    def test_parity_product(self, n, N, data):
        i = data.draw(st.integers(0, n**N - 1))
        lab = sector_of(index_to_config(i, n, N), "parity", n)
        assert np.prod(lab.values) == (-1) ** N

    def test_parity_label_short_form(self):
        assert parity_label((-1, -1), 3, 4).values == (1, -1, -1)
        assert parity_label((1, -1), 3, 5).values == (1, 1, -1)
        with pytest.raises(ConfigError):
            parity_label((1, 1, -1), 3, 4)

    def test_label_parse_and_str(self):
        lab = SectorLabel.parse("+--")
        assert lab.values == (1, -1, -1) and str(lab) == "+--"
        occ = SectorLabel.parse("2/1/1")
        assert occ.kind == "occupation" and str(occ) == "2/1/1"


class TestModelSpec:
    def _spec(self, **kw):
        n = 3
        base = dict(n=n, N=3, epsilon=[0, 1, 2], U=np.eye(n), V=np.zeros((n, n)),
                    W=np.ones((n, n)) - np.eye(n), graph=make_graph("ring", 3))
        base.update(kw)
        return ModelSpec(**base)

    def test_valid(self):
        s = self._spec()
        assert s.dim == 27 and not s.V.flags.writeable

    def test_asymmetric_named(self):
        V = np.zeros((3, 3))
        V[0, 1] = 0.2
        with pytest.raises(ConfigError, match=r"V\[1,2\]"):
            self._spec(V=V)

    def test_diag_rejected(self):
        with pytest.raises(ConfigError, match="zero diagonal"):
            self._spec(W=np.ones((3, 3)))

    def test_nonfinite(self):
        with pytest.raises(ConfigError):
            self._spec(epsilon=[0, np.nan, 1])

    def test_graph_size_mismatch(self):
        with pytest.raises(ConfigError):
            self._spec(graph=make_graph("ring", 4))

    def test_json_roundtrip(self, tmp_path):
        s = self._spec(graph=make_graph("open_chain", 3), edge_scaling=False)
        p = tmp_path / "m.json"
        save_model(s, p)
        t = load_model(p)
        assert t.to_dict() == s.to_dict()

    def test_upper_triangular_input(self):
        d = {"n": 2, "N": 2, "epsilon": [0, 1], "U": [[1, 0.5], [0, 1]], "V": [[0, 0.3], [0, 0]],
             "W": [[0, 1], [0, 0]], "graph": {"kind": "ring"}}
        s = model_from_dict(d)
        assert s.V[1, 0] == 0.3 and s.U[1, 0] == 0.5 and s.edge_scaling

    def test_unknown_key(self):
        d = {"n": 2, "N": 2, "epsilon": [0, 1], "U": [[0, 0], [0, 0]], "V": [[0, 0], [0, 0]],
             "W": [[0, 0], [0, 0]], "colour": 3}
        with pytest.raises(ConfigError, match="colour"):
            model_from_dict(d)

    def test_load_error_names_file(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text(json.dumps({"n": 2}))
        with pytest.raises(ConfigError, match="broken.json"):
            load_model(p)
