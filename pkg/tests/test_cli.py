import csv
import json

import numpy as np
import pytest

from sunfact.cli import Sweep, fmt, main, write_csv
from sunfact.errors import ConfigError
from sunfact.model import save_model
from sunfact.recipes import level_ladder


@pytest.fixture
def ladder_config(tmp_path):
    p = tmp_path / "ladder.json"
    save_model(level_ladder(1.0, N=4), p)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_fmt():
    assert fmt(0.1 + 0.2) == "0.3" and fmt(None) == "" and fmt("+--") == "+--"


def test_sweep_validation():
    with pytest.raises(ConfigError):
        Sweep("scale:V", 0, 1, 1)
    with pytest.raises(ConfigError):
        Sweep("scale:V", 1, 0, 5)


def test_write_csv_leaves_no_temp_files(tmp_path):
    write_csv(tmp_path / "x.csv", ["a"], [[1.0]])
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


def test_factorize_verify(ladder_config, tmp_path):
    out = tmp_path / "fac.json"
    assert main(["factorize", "--config", str(ladder_config), "--verify", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["residual"] < 1e-9 and abs(d["E2"] + 1.2576860524) < 1e-9
    assert d["energy"] == pytest.approx(2 * d["E2"], abs=1e-9)


def test_factorize_to_stdout(ladder_config, capsys):
    assert main(["factorize", "--config", str(ladder_config)]) == 0
    assert "f_squared" in json.loads(capsys.readouterr().out)


def test_config_error_exit(tmp_path, capsys):
    d = json.loads(json.dumps(level_ladder(1.0, N=2).to_dict()))
    d["V"][0][1] = 0.1
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    assert main(["factorize", "--config", str(p)]) == 2
    assert "V[1,2]" in capsys.readouterr().err


def test_cap_exit_either_flag_position(tmp_path):
    sweep = ["--param", "lerp:level_ladder", "--from", "0", "--to", "2", "--steps", "3",
             "--n", "3", "--N", "4", "--out-dir", str(tmp_path)]
    assert main(["--cap", "10", "spectrum", *sweep]) == 3
    assert main(["spectrum", "--cap", "10", *sweep]) == 3
    assert not list(tmp_path.iterdir())


def test_missing_sweep_args(ladder_config):
    assert main(["entangle", "--config", str(ladder_config)]) == 2
    assert main(["spectrum", "--param", "scale:V", "--from", "0"]) == 2


def test_spectrum_sweep_csv(ladder_config, tmp_path):
    out = tmp_path / "s.csv"
    args = ["spectrum", "--config", str(ladder_config), "--param", "scale:couplings",
            "--from", "0", "--to", "2", "--steps", "21", "--out", str(out)]
    assert main(args) == 0
    header, rows = read_csv(out)
    assert header == ["param", "E0", "E1", "E2", "E3", "sector0", "sector1", "sector2",
                      "sector3", "gap"]
    assert len(rows) == 21
    events = json.loads((tmp_path / "s.csv.events.json").read_text())
    fac = [e for e in events if e["kind"] == "factorization_crossing"]
    assert len(fac) == 1 and abs(fac[0]["param"] - 1) < 1e-6 and fac[0]["multiplicity"] == 4
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first


def test_spectrum_two_steps(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--param", "lerp:level_ladder", "--from", "0.5", "--to", "1.5",
                 "--steps", "2", "--n", "3", "--N", "2", "--sectors", "none",
                 "--out", str(out)]) == 0
    assert len(read_csv(out)[1]) == 2


def test_meanfield_sweep(tmp_path):
    out = tmp_path / "mf.csv"
    assert main(["meanfield", "--param", "lerp:level_ladder", "--from", "0", "--to", "1",
                 "--steps", "51", "--n", "3", "--N", "6", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["param", "f2_1", "f2_2", "f2_3", "energy"]
    onsets = json.loads((tmp_path / "mf.csv.events.json").read_text())
    assert [o["level"] for o in onsets] == [2, 3]
    assert abs(onsets[0]["param"] - 0.4319) < 1e-3


def test_entangle_columns(ladder_config, tmp_path):
    out = tmp_path / "e.csv"
    assert main(["entangle", "--config", str(ladder_config), "--param", "scale:couplings",
                 "--from", "0.5", "--to", "1.5", "--steps", "5", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header[:6] == ["param", "S_site", "negativity_d1", "negativity_d2",
                          "mutual_info_d1", "mutual_info_d2"]
    assert header[6:9] == ["occ_1", "occ_2", "occ_3"]
    assert header[9:] == [f"pair_spectrum_{k}" for k in range(1, 10)]
    assert len(rows) == 5
    assert np.allclose([sum(float(x) for x in r[6:9]) for r in rows], 1)


def test_project_roundtrip(ladder_config, tmp_path):
    fac = tmp_path / "fac.json"
    main(["factorize", "--config", str(ladder_config), "--out", str(fac)])
    out = tmp_path / "p.json"
    assert main(["project", "--factorization", str(fac), "--N", "4", "--sector", "+--",
                 "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["sector"] == "+--"
    assert np.allclose(d["occupations"], d["occupations_closed_form"], atol=1e-12)


def test_project_symmetric_and_empty(tmp_path, capsys):
    assert main(["project", "--f", "1,0,0", "--N", "3", "--sector", "2/1/0"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert np.allclose(d["occupations"], [2 / 3, 1 / 3, 0])
    assert main(["project", "--f", "1,0,0", "--N", "4", "--sector=-+-"]) == 2
    assert main(["project", "--N", "4"]) == 2


def test_reproduce_fig2(tmp_path, capsys):
    assert main(["reproduce", "fig2", "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig2" / "checks.json").read_text())
    assert summary["all_pass"], summary
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(l.startswith("PASS") for l in lines)
    assert any(p.suffix == ".csv" for p in (tmp_path / "fig2").iterdir())


@pytest.mark.parametrize("fig", ["fig3", "fig4", "fig5", "fig6_n3", "fig6_n4", "fig7"])
def test_reproduce_targets(tmp_path, fig):
    assert main(["reproduce", fig, "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / fig / "checks.json").read_text())
    failed = [c["name"] for c in summary["checks"] if not c["pass"]]
    assert summary["all_pass"], failed
