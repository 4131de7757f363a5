"""
Command-line front end.

    sunfact factorize --config model.json
    sunfact spectrum --config model.json --param scale:V --from 0 --to 2 --steps 201 --out spec.csv
    sunfact reproduce fig2 --out-dir out/

Exit codes: 0 success, 2 configuration error, 3 dimension cap exceeded,
4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entanglement as ent
from .errors import CapExceededError, ConfigError, EmptySectorError, FactorizationError, InvariantError
from .factorization import degeneracy_count, product_state, solve_spec, verify_eigenstate
from .hamiltonian import DEFAULT_CAP, build_full
from .meanfield import mf_solve, mf_transition_points
from .model import ModelSpec, SectorLabel, load_model
from .projection import (
    parity_project,
    projected_occupations_n3,
    side_limits,
    symmetric_state,
)
from .recipes import FIGURES, ladder_pair_energy, parameter_family, recipe_family
from .spectra import SweepResult, find_crossings, sector_spectrum, spectrum, sweep

log = logging.getLogger("sunfact")

EXIT_CONFIG, EXIT_CAP, EXIT_INVARIANT = 2, 3, 4
OUTPUT_FORMATS = ("csv", "json")


def fmt(x) -> str:
    """Locale-independent float text with 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return "0" if v == 0 else f"{v:.12g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, SectorLabel):
        return str(obj)
    return obj


def write_atomic(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header: list[str], rows: list[list]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return write_atomic(path, buf.getvalue())


def write_json(path, obj) -> Path:
    return write_atomic(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# Run configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Sweep:
    path: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ConfigError(f"sweep needs steps >= 2, got {self.steps}")
        if not self.hi > self.lo:
            raise ConfigError(f"sweep range must increase, got [{self.lo}, {self.hi}]")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: ModelSpec | None = None
    sweep: Sweep | None = None
    observables: tuple = ()
    output: Path | None = None
    fmt: str = "json"
    cap: int = DEFAULT_CAP
    seed: int = 0
    threads: int = 1
    out_dir: Path = Path(".")
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fmt not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if self.cap < 1:
            raise ConfigError("cap must be positive")

    def out_path(self, default: str) -> Path:
        p = self.output if self.output is not None else Path(default)
        return p if p.is_absolute() else self.out_dir / p

    def family(self):
        if self.sweep is None:
            raise ConfigError(f"{self.command} sweep needs --param, --from, --to, --steps")
        return parameter_family(self.sweep.path, self.model)


def _sector_kind(cfg: RunConfig) -> str:
    kind = cfg.options.get("sectors", "parity")
    if kind not in ("parity", "occupation", "none"):
        raise ConfigError(f"unknown sector mode {kind!r}")
    return kind


# --------------------------------------------------------------------------
# Subcommand pipelines
# --------------------------------------------------------------------------


def run_factorize(cfg: RunConfig) -> dict:
    spec = _need_model(cfg)
    sol = solve_spec(spec)
    out = sol.to_dict()
    if cfg.options.get("verify"):
        H = build_full(spec, cfg.cap)
        energy, resid = verify_eigenstate(H, product_state(sol.f, spec.N))
        out.update(energy=energy, residual=resid)
    if cfg.output is not None:
        write_json(cfg.out_path("factorize.json"), out)
    else:
        print(json.dumps(_jsonable(out), indent=2, sort_keys=True))
    return out


def run_meanfield(cfg: RunConfig):
    if cfg.sweep is None:
        sol = mf_solve(_need_model(cfg))
        out = sol.to_dict()
        if cfg.output is not None:
            write_json(cfg.out_path("meanfield.json"), out)
        else:
            print(json.dumps(_jsonable(out), indent=2, sort_keys=True))
        return out
    fam = cfg.family()
    n = fam(cfg.sweep.lo).n
    rows = []
    for t in cfg.sweep.grid:
        sol = mf_solve(fam(float(t)))
        rows.append([t, *sol.f_squared, sol.energy])
    header = ["param"] + [f"f2_{i + 1}" for i in range(n)] + ["energy"]
    path = write_csv(cfg.out_path("meanfield.csv"), header, rows)
    onsets = mf_transition_points(fam, cfg.sweep.lo, cfg.sweep.hi, steps=cfg.sweep.steps)
    write_json(str(path) + ".events.json",
               [{"param": o.param, "kind": "level_onset", "level": o.level + 1} for o in onsets])
    return rows


def _spectrum_rows(res: SweepResult, levels: int):
    rows = []
    for pt in res.points:
        E = list(pt.energies[:levels]) + [None] * (levels - pt.energies.size)
        S = [str(s) if s is not None else "" for s in pt.sectors[:levels]]
        S += [""] * (levels - len(S))
        rows.append([pt.param, *E, *S, pt.gap])
    header = (["param"] + [f"E{k}" for k in range(levels)]
              + [f"sector{k}" for k in range(levels)] + ["gap"])
    return header, rows


def spectrum_sweep(fam, sw: Sweep, levels: int, kind: str, band: int | None, cfg: RunConfig,
                   name: str = "param") -> SweepResult:
    if kind == "none":
        return sweep(fam, sw.grid, levels=levels, kind="none", threads=cfg.threads, cap=cfg.cap,
                     name=name)
    if band is None:
        probe = fam(sw.lo)
        band = degeneracy_count(probe.n, probe.N, kind == "occupation")
    return find_crossings(fam, sw.lo, sw.hi, band, steps=sw.steps, kind=kind, levels=levels,
                          threads=cfg.threads, cap=cfg.cap, name=name)


def run_spectrum(cfg: RunConfig):
    kind = _sector_kind(cfg)
    levels = int(cfg.options.get("levels", 4))
    if levels < 1:
        raise ConfigError("--levels must be >= 1")
    if cfg.sweep is None:
        spec = _need_model(cfg)
        sr = spectrum(spec, kind, k=levels, cap=cfg.cap)
        out = {"eigenvalues": sr.eigenvalues,
               "sectors": [str(s) for s in sr.sectors] if sr.sectors else None}
        if cfg.output is not None:
            write_json(cfg.out_path("spectrum.json"), out)
        else:
            print(json.dumps(_jsonable(out), indent=2))
        return out
    res = spectrum_sweep(cfg.family(), cfg.sweep, levels, kind, cfg.options.get("band"), cfg)
    header, rows = _spectrum_rows(res, levels)
    path = write_csv(cfg.out_path("spectrum.csv"), header, rows)
    write_json(str(path) + ".events.json", [e.to_dict() for e in res.events])
    return res


def _ground_state(spec: ModelSpec, kind: str, cap) -> np.ndarray:
    if kind == "none":
        return spectrum(spec, "none", want_vectors=True, k=1, cap=cap).ground_state()
    return sector_spectrum(spec, kind, want_vectors=True, k=1, cap=cap).ground_state()


def _observable_header(n: int, distances) -> list[str]:
    return (["param", "S_site"] + [f"negativity_d{d}" for d in distances]
            + [f"mutual_info_d{d}" for d in distances] + [f"occ_{i + 1}" for i in range(n)]
            + [f"pair_spectrum_{k + 1}" for k in range(n * n)])


def _observable_row(t, obs: dict, distances) -> list:
    return ([t, obs["S_site"]] + [obs[f"negativity_d{d}"] for d in distances]
            + [obs[f"mutual_info_d{d}"] for d in distances] + list(obs["occupations"])
            + list(obs["pair_spectrum"]))


def run_entangle(cfg: RunConfig):
    fam = cfg.family()
    distances = tuple(cfg.options.get("pairs") or (1, 2, 3))
    kind = _sector_kind(cfg)
    probe = fam(cfg.sweep.lo)
    n, N = probe.n, probe.N
    distances = tuple(d for d in distances if d <= N // 2) or (1,)

    def point(t):
        psi = _ground_state(fam(float(t)), kind, cfg.cap)
        return _observable_row(float(t), ent.state_observables(psi, n, distances), distances)

    from .spectra import parallel_map

    rows = parallel_map(point, list(cfg.sweep.grid), cfg.threads)
    return write_csv(cfg.out_path("entangle.csv"), _observable_header(n, distances), rows)


def run_project(cfg: RunConfig) -> dict:
    o = cfg.options
    if o.get("f") is not None:
        f = np.asarray(o["f"], dtype=complex)
    elif o.get("factorization") is not None:
        d = json.loads(Path(o["factorization"]).read_text())
        try:
            f = np.asarray(d["f_real"]) + 1j * np.asarray(d["f_imag"])
        except KeyError as exc:
            raise ConfigError(f"{o['factorization']}: missing key {exc.args[0]!r}") from exc
    elif cfg.model is not None:
        f = solve_spec(cfg.model).f
    else:
        raise ConfigError("project needs --f, --factorization or --config")
    if np.all(f.imag == 0):
        f = f.real
    N = o.get("N") or (cfg.model.N if cfg.model is not None else None)
    if N is None:
        raise ConfigError("project needs --N (or a --config providing N)")
    label = SectorLabel.parse(o.get("sector") or "+" * f.size)
    if label.kind == "parity":
        st = parity_project(f, N, label)
    else:
        st = symmetric_state(label.values, N)
    n = f.size
    dists = tuple(range(1, N // 2 + 1))
    obs = ent.state_observables(st.vector, n, dists)
    out = {"sector": str(st.label), "N": N, "weight": st.weight,
           "occupations": obs["occupations"], "entropy_site": obs["S_site"],
           "negativity": {d: obs[f"negativity_d{d}"] for d in dists},
           "mutual_information": {d: obs[f"mutual_info_d{d}"] for d in dists},
           "pair_spectrum": obs["pair_spectrum"]}
    if n == 3 and label.kind == "parity":
        out["occupations_closed_form"] = projected_occupations_n3(f, N, label)
    if cfg.output is not None:
        write_json(cfg.out_path("project.json"), out)
    else:
        print(json.dumps(_jsonable(out), indent=2, sort_keys=True))
    return out


def _need_model(cfg: RunConfig) -> ModelSpec:
    if cfg.model is None:
        raise ConfigError(f"{cfg.command} needs --config")
    return cfg.model


# --------------------------------------------------------------------------
# Reproduction targets
# --------------------------------------------------------------------------


def _check(name: str, ok: bool, **detail) -> dict:
    return {"name": name, "pass": bool(ok), **detail}


def _events_near(res: SweepResult, x: float, tol: float):
    return [e for e in res.events if abs(e.param - x) <= tol]


def _reproduce_spectra(fig: str, cfg: RunConfig, out: Path, levels: int) -> tuple[list, dict]:
    F = FIGURES[fig]
    checks, results = [], {}
    for N in F.sizes:
        fam = recipe_family(F.recipe, F.n, N)
        sw = Sweep(F.param, F.lo, F.hi, 201)
        res = spectrum_sweep(fam, sw, levels, F.kind, F.band, cfg, name=F.param)
        header, rows = _spectrum_rows(res, levels)
        header[0] = F.param
        csv_path = write_csv(out / f"spectrum_N{N}.csv", header, rows)
        write_json(str(csv_path) + ".events.json", [e.to_dict() for e in res.events])
        results[N] = res
        ev = [e for e in res.events if e.kind == "factorization_crossing"]
        if F.recipe != "heisenberg_spacing":
            hit = _events_near(res, 1.0, 1e-6)
            checks.append(_check(f"N={N}: factorization crossing at 1 +- 1e-6 with multiplicity {F.band}",
                                 any(e.multiplicity == F.band and e.kind == "factorization_crossing"
                                     for e in hit),
                                 events=[e.to_dict() for e in ev]))
    return checks, results


def _observable_sweep(fam, n: int, N: int, grid, cfg: RunConfig, distances):
    from .spectra import parallel_map

    def point(t):
        spec = fam(float(t))
        sr = sector_spectrum(spec, "parity", want_vectors=True, k=4, cap=cfg.cap)
        psi = sr.ground_state()
        obs = ent.state_observables(psi, n, distances)
        mf = mf_solve(spec)
        dE = sr.eigenvalues[1:4] - sr.eigenvalues[0]
        return ([float(t), *dE, mf.energy - sr.ground_energy, str(sr.sectors[0])]
                + _observable_row(float(t), obs, distances)[1:] + list(mf.f_squared))

    rows = parallel_map(point, list(grid), cfg.threads)
    header = ([FIGURES["fig3"].param, "dE10", "dE20", "dE30", "E_HF_minus_E0", "gs_sector"]
              + _observable_header(n, distances)[1:] + [f"occ_hf_{i + 1}" for i in range(n)])
    return header, rows


def _side_limit_checks(fam, N: int, n: int, distances) -> tuple[list, dict]:
    sol = solve_spec(fam(1.0))
    left, right = side_limits(fam, 1.0, sol.f.real)
    checks, data = [], {}
    for side, sl in (("left", left), ("right", right)):
        psi = sl.state.vector
        obs = ent.state_observables(psi, n, distances)
        negs = [obs[f"negativity_d{d}"] for d in distances]
        mis = [obs[f"mutual_info_d{d}"] for d in distances]
        blocks = [ent.block_entropy(psi, range(M), n) for M in range(2, N)]
        occ_cf = projected_occupations_n3(sol.f.real, N, sl.label)
        data[side] = {"param": sl.param, "sector": str(sl.label), "negativity": negs,
                      "mutual_information": mis, "block_entropies": blocks,
                      "occupations": obs["occupations"], "occupations_closed_form": occ_cf,
                      "overlap_defect": sl.overlap_defect}
        checks.append(_check(f"{side} side-limit: negativities agree within 1e-9",
                             np.ptp(negs) < 1e-9, values=negs))
        checks.append(_check(f"{side} side-limit: mutual informations agree within 1e-9",
                             np.ptp(mis) < 1e-9, values=mis))
        checks.append(_check(f"{side} side-limit: block entropies <= n-1 bits",
                             max(blocks) <= n - 1 + 1e-10, values=blocks))
        checks.append(_check(f"{side} side-limit: projected state matches exact ground state",
                             sl.overlap_defect < 1e-8, defect=sl.overlap_defect))
        checks.append(_check(f"{side} side-limit: occupations match closed form within 1e-10",
                             np.abs(obs["occupations"] - occ_cf).max() < 1e-10))
    return checks, data


def reproduce(fig: str, cfg: RunConfig) -> dict:
    """Write the data behind one figure plus ``checks.json``; returns the checks summary."""
    if fig not in FIGURES:
        raise ConfigError(f"unknown figure {fig!r}; known: {sorted(FIGURES)}")
    F = FIGURES[fig]
    out = cfg.out_dir / fig
    t0 = time.perf_counter()
    checks: list = []
    extra: dict = {}

    if fig == "fig2":
        E2c = ladder_pair_energy(F.n)
        checks.append(_check("pair energy E2c = -1.26 +- 0.005", abs(E2c + 1.26) < 0.005, E2c=E2c))
        c, _ = _reproduce_spectra(fig, cfg, out, levels=8)
        checks += c
    elif fig in ("fig3", "fig4", "fig5"):
        N = F.sizes[0]
        fam = recipe_family(F.recipe, F.n, N)
        distances = tuple(range(1, N // 2 + 1))
        grid = np.linspace(F.lo, F.hi, 201)
        if fig in ("fig3", "fig4"):
            header, rows = _observable_sweep(fam, F.n, N, grid, cfg, distances)
            write_csv(out / f"observables_N{N}.csv", header, rows)
            at_c = [r for r in rows if abs(r[0] - 1.0) < 1e-12][0]
            checks.append(_check("excitations dE10..dE30 vanish at factorization",
                                 max(at_c[1:4]) < 1e-9, values=at_c[1:4]))
            checks.append(_check("E_HF - E0 vanishes at factorization", abs(at_c[4]) < 1e-9,
                                 value=at_c[4]))
            onsets = mf_transition_points(fam, 0.0, 1.0, steps=201)
            vals = [o.param for o in onsets]
            checks.append(_check("mean-field onsets at 0.44 and 0.65 (+- 0.01)",
                                 len(vals) == 2 and abs(vals[0] - 0.44) <= 0.01
                                 and abs(vals[1] - 0.65) <= 0.01, values=vals))
            res = spectrum_sweep(fam, Sweep(F.param, F.lo, F.hi, 201), 8, "parity", F.band, cfg,
                                 name=F.param)
            write_json(out / f"observables_N{N}.csv.events.json", [e.to_dict() for e in res.events])
            hit = _events_near(res, 1.0, 1e-6)
            checks.append(_check("factorization crossing at 1 +- 1e-6", any(
                e.kind == "factorization_crossing" and e.multiplicity == F.band for e in hit)))
            if N == 6:
                pt = sorted(e.param for e in res.events if e.kind == "parity_transition")
                checks.append(_check("parity transitions at 1.52 and 1.74 (+- 0.01)",
                                     len(pt) == 2 and abs(pt[0] - 1.52) <= 0.01
                                     and abs(pt[1] - 1.74) <= 0.01, values=pt))
        else:
            from .spectra import parallel_map

            def point(t):
                psi = _ground_state(fam(float(t)), "parity", cfg.cap)
                o = ent.state_observables(psi, F.n, distances)
                return [float(t), *o["pair_spectrum"], *[o[f"mutual_info_d{d}"] for d in distances]]

            rows = parallel_map(point, list(grid), cfg.threads)
            header = ([F.param] + [f"pair_spectrum_{k + 1}" for k in range(F.n**2)]
                      + [f"mutual_info_d{d}" for d in distances])
            write_csv(out / f"pair_N{N}.csv", header, rows)
        c, data = _side_limit_checks(fam, N, F.n, distances)
        checks += c
        extra["side_limits"] = data
        write_json(out / "side_limits.json", data)
    elif fig in ("fig6_n3", "fig6_n4"):
        c, results = _reproduce_spectra(fig, cfg, out, levels=F.band + 5)
        checks += c
        res = results[F.sizes[0]]
        hit = [e for e in _events_near(res, 1.0, 1e-6) if e.kind == "factorization_crossing"]
        target = -2.5 * F.sizes[0]
        checks.append(_check(f"ground energy {target:g} at the crossing",
                             bool(hit) and abs(hit[0].energy - target) < 1e-9,
                             energy=hit[0].energy if hit else None))
    elif fig == "fig7":
        _reproduce_spectra(fig, cfg, out, levels=40)
        fam = recipe_family(F.recipe, F.n, F.sizes[0])
        ev = spectrum(fam(0.0), "occupation", cap=cfg.cap).eigenvalues
        levels = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        nearest = np.abs(ev[:, None] - levels[None, :]).argmin(axis=1)
        mult = np.bincount(nearest, minlength=5)
        err = float(np.abs(ev - levels[nearest]).max())
        checks.append(_check("SU(4) point: levels -2,-1,0,1,2 with multiplicities (35,110,60,50,1)",
                             mult.tolist() == [35, 110, 60, 50, 1] and err < 1e-10,
                             multiplicities=mult.tolist(), max_error=err))
        write_csv(out / "endpoint_spectrum.csv", ["eps/J", "E"], [[0.0, e] for e in ev])

    runtime = time.perf_counter() - t0
    budget = 5.0 if fig == "fig2" else 60.0
    checks.append(_check(f"runtime under {budget:g} s", runtime < budget, seconds=runtime))
    summary = {"figure": fig, "all_pass": all(c["pass"] for c in checks), "checks": checks}
    write_json(out / "checks.json", summary)
    return summary


def run_reproduce(cfg: RunConfig) -> dict:
    summary = reproduce(cfg.options["figure"], cfg)
    for c in summary["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {summary['figure']}: {c['name']}")
    return summary


COMMANDS = {
    "factorize": run_factorize,
    "meanfield": run_meanfield,
    "spectrum": run_spectrum,
    "entangle": run_entangle,
    "project": run_project,
    "reproduce": run_reproduce,
}


def run(cfg: RunConfig):
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    np.random.seed(cfg.seed)
    return COMMANDS[cfg.command](cfg)


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; their defaults are suppressed so a
    # value given before the subcommand is not overwritten
    def d(value):
        return argparse.SUPPRESS if suppress else value

    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--cap", type=int, default=d(DEFAULT_CAP), help="Hilbert dimension cap")
    g.add_argument("--threads", type=int, default=d(1))
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--out-dir", type=Path, default=d(Path(".")))
    g.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--param", help="scale:<V|W|U|epsilon|couplings> or lerp:<recipe>")
    sweep.add_argument("--from", dest="lo", type=float)
    sweep.add_argument("--to", dest="hi", type=float)
    sweep.add_argument("--steps", type=int, default=201)
    sweep.add_argument("--n", type=int, help="levels for lerp recipes without --config")
    sweep.add_argument("--N", type=int, help="sites for lerp recipes without --config")
    sweep.add_argument("--graph", default="ring")

    p = argparse.ArgumentParser(prog="sunfact", description=__doc__.split("\n")[1],
                                parents=[_global_flags(suppress=False)])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("factorize", parents=[common], help="solve the uniform factorization conditions")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--verify", action="store_true", help="also report the product-state residual on the full Hamiltonian")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("meanfield", parents=[common, sweep], help="uniform mean-field solution")
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path)

    s = sub.add_parser("spectrum", parents=[common, sweep], help="sector-resolved spectra and crossings")
    s.add_argument("--config", type=Path)
    s.add_argument("--levels", type=int, default=4)
    s.add_argument("--sectors", choices=("parity", "occupation", "none"), default="parity")
    s.add_argument("--band", type=int, help="ground band size for crossing classification")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("entangle", parents=[common, sweep], help="ground-state entanglement sweep")
    s.add_argument("--config", type=Path)
    s.add_argument("--pairs", type=_int_list, default=[1, 2, 3], help="pair distances, e.g. 1,2,3")
    s.add_argument("--sectors", choices=("parity", "occupation", "none"), default="parity")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("project", parents=[common], help="observables of a projected product state")
    s.add_argument("--config", type=Path)
    s.add_argument("--f", type=_float_list, help="real local amplitudes, comma-separated")
    s.add_argument("--factorization", type=Path, help="JSON written by `factorize --out`")
    s.add_argument("--N", type=int)
    s.add_argument("--sector", help="parity signs like +-- or occupations like 2/1/1")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("reproduce", parents=[common], help="regenerate a figure dataset")
    s.add_argument("figure", choices=sorted(FIGURES))
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    model = load_model(args.config) if getattr(args, "config", None) else None
    sw = None
    if getattr(args, "param", None):
        if args.lo is None or args.hi is None:
            raise ConfigError("--param needs --from and --to")
        sw = Sweep(args.param, args.lo, args.hi, args.steps)
        if model is None and args.param.startswith("lerp:"):
            if args.n is None or args.N is None:
                raise ConfigError("lerp sweeps without --config need --n and --N")
            model = recipe_family(args.param.split(":", 1)[1], args.n, args.N, args.graph)(args.lo)
    out = getattr(args, "out", None)
    options = {k: getattr(args, k) for k in ("levels", "sectors", "band", "pairs", "f",
                                             "factorization", "N", "sector", "verify", "figure")
               if hasattr(args, k)}
    fmt_ = "csv" if out is not None and str(out).endswith(".csv") else "json"
    return RunConfig(args.command, model, sw, tuple(getattr(args, "pairs", None) or ()), out, fmt_,
                     args.cap, args.seed, args.threads, args.out_dir, options)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        result = run(cfg)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, EmptySectorError, FactorizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if cfg.command == "reproduce" and not result["all_pass"]:
        log.warning("some checks failed; see %s", cfg.out_dir / cfg.options["figure"] / "checks.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
