"""Command-line entry point.

Subcommands
-----------
tune         two-body well-depth tuning, emits (V0, a, r_e, E_bound, n_bound)
solve        stochastic variational solve, writes checkpoint + spectrum CSV
spectrum     (index, energy, is_negative, is_bec) rows from a checkpoint
observables  per-state condensate-fraction / central-density scan
repro        scripted reproduction of the published tables and figure data

Every output file carries a metadata header with the fully resolved
configuration, so two runs with identical headers produce identical
numbers.  All files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import importlib.metadata
import importlib.resources
import io
import json
import math
import os
import sys
import tempfile

import numpy as np
import yaml

from . import obdm, svm, twobody, units
from .matelem import ContactPairModel, GaussianPairModel, PotentialModel

try:
    VERSION = importlib.metadata.version("bosetrap")
except importlib.metadata.PackageNotFoundError:   # uninstalled source tree
    VERSION = "0+unknown"


class ConfigError(ValueError):
    """Invalid or unknown configuration key/value."""


def reference_values() -> dict:
    with importlib.resources.files("bosetrap").joinpath(
            "reference_values.json").open() as f:
        return json.load(f)


# configuration ---------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class RunConfig:
    system: units.PhysicalSystem
    potential: dict            # resolved model description (echoed verbatim)
    n_particles: int
    svm: svm.SvmConfig
    output_dir: str
    observables: dict          # lmax, n_shells, below, above
    tune: dict                 # optional tuning sweep parameters
    repro: dict                # optional repro parameters (which, budgets)


_OBS_DEFAULTS = {"lmax": 4, "n_shells": 20, "below": 3, "above": 3}


def _take(mapping: dict, context: str, known: dict) -> dict:
    """Merge user mapping over defaults; unknown keys are errors."""
    out = dict(known)
    for key, val in mapping.items():
        if key not in known:
            raise ConfigError(f"unknown key {context}.{key!r}; "
                              f"expected one of {sorted(known)}")
        out[key] = val
    return out


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a mapping")
    top_known = {"system": {}, "potential": {}, "n_particles": 2,
                 "svm": {}, "output": {}, "observables": {}, "tune": {},
                 "repro": {}}
    top = _take(raw, "config", top_known)

    sysmap = _take(top["system"] or {}, "system",
                   {"mass_amu": 86.909, "freq_hz": 77.87})
    system = units.make_system(sysmap["mass_amu"], sysmap["freq_hz"])

    pot = top["potential"] or {"model": "none"}
    model = pot.get("model")
    if model == "gaussian":
        pot = _take(pot, "potential",
                    {"model": "gaussian", "b_au": None, "V0_au": None,
                     "target_a_au": None})
        if pot["b_au"] is None:
            raise ConfigError("potential.b_au is required for gaussian")
        if (pot["V0_au"] is None) == (pot["target_a_au"] is None):
            raise ConfigError("give exactly one of potential.V0_au / "
                              "potential.target_a_au")
    elif model == "zero_range":
        pot = _take(pot, "potential", {"model": "zero_range", "a_au": None})
        if pot["a_au"] is None:
            raise ConfigError("potential.a_au is required for zero_range")
    elif model in ("none", None):
        pot = {"model": "none"}
    else:
        raise ConfigError(f"unknown potential.model {model!r}")

    svm_known = {f.name: f.default for f in dataclasses.fields(svm.SvmConfig)}
    svm_cfg = svm.SvmConfig(**_take(top["svm"] or {}, "svm", svm_known))
    if pot["model"] == "zero_range" and svm_cfg.basis_family != "hyperradial":
        raise ConfigError("zero_range requires svm.basis_family: hyperradial")

    out = _take(top["output"] or {}, "output", {"directory": "out"})
    obs = _take(top["observables"] or {}, "observables", _OBS_DEFAULTS)
    tune = _take(top["tune"] or {}, "tune",
                 {"target_a_au": None, "V0_au": None, "b_au": None})
    repro = _take(top["repro"] or {}, "repro",
                  {"which": None, "n4_rows": 6, "zr_sizes": [3, 5, 10, 20],
                   "attractive_sizes": [3, 5]})

    n = int(top["n_particles"])
    if n < 2:
        raise ConfigError("n_particles must be >= 2")
    return RunConfig(system=system, potential=pot, n_particles=n,
                     svm=svm_cfg, output_dir=out["directory"],
                     observables=obs, tune=tune, repro=repro)


def load_config(path: str) -> RunConfig:
    with open(path) as f:
        raw = yaml.safe_load(f)
    return parse_config(raw or {})


def resolve_potential(cfg: RunConfig) -> tuple[PotentialModel, dict]:
    """Oscillator-unit interaction model plus its fully resolved echo."""
    pot = cfg.potential
    sysm = cfg.system
    if pot["model"] == "none":
        return None, {"model": "none"}
    if pot["model"] == "zero_range":
        strength = 4.0 * math.pi * pot["a_au"] / sysm.trap_length_au
        return ContactPairModel(strength), {
            "model": "zero_range", "a_au": pot["a_au"], "strength": strength}
    mu = sysm.mass_au / 2.0
    if pot["V0_au"] is not None:
        well = twobody.GaussianPotential(pot["V0_au"], pot["b_au"])
    else:
        well = twobody.tune_strength(pot["b_au"], pot["target_a_au"], mu)
    a = twobody.scattering_length(well, mu)
    model = GaussianPairModel(
        v0=well.V0 / sysm.energy_quantum_au,
        c=(sysm.trap_length_au / well.b) ** 2)
    return model, {"model": "gaussian", "V0_au": well.V0, "b_au": well.b,
                   "a_au": a, "v0_osc": model.v0, "c_osc": model.c}


# output ----------------------------------------------------------------------

def _echo_lines(cfg: RunConfig, extra: dict | None = None) -> list[str]:
    echo = {
        "version": VERSION,
        "system": dataclasses.asdict(cfg.system),
        "potential": cfg.potential,
        "n_particles": cfg.n_particles,
        "svm": dataclasses.asdict(cfg.svm),
        "observables": cfg.observables,
    }
    if extra:
        echo.update(extra)
    return [f"# {line}" for line in
            json.dumps(echo, sort_keys=True, indent=None).splitlines()]


def write_csv(path: str, header: list[str], rows: list[list],
              cfg: RunConfig, extra: dict | None = None) -> None:
    """Atomic CSV write with a config-echo comment header."""
    buf = io.StringIO()
    for line in _echo_lines(cfg, extra):
        buf.write(line + "\r\n")
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    writer.writerows(rows)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=".tmp-", suffix=".csv")
    with os.fdopen(fd, "w", newline="") as f:
        f.write(buf.getvalue())
    os.replace(tmp, path)


# subcommands -----------------------------------------------------------------

def cmd_tune(cfg: RunConfig) -> int:
    sysm = cfg.system
    mu = sysm.mass_au / 2.0
    b = cfg.tune["b_au"] or cfg.potential.get("b_au")
    if b is None:
        raise ConfigError("tune requires potential.b_au or tune.b_au")

    def as_list(v):
        if v is None:
            return []
        return list(v) if isinstance(v, (list, tuple)) else [v]

    depths = as_list(cfg.tune["V0_au"]) or as_list(cfg.potential.get("V0_au"))
    targets = (as_list(cfg.tune["target_a_au"])
               or as_list(cfg.potential.get("target_a_au")))
    wells = [twobody.GaussianPotential(v, b) for v in depths]
    wells += [twobody.tune_strength(b, a, mu) for a in targets]
    if not wells:
        raise ConfigError("tune needs V0_au or target_a_au values")
    rows = []
    for well in wells:
        summary = twobody.summarize(well, mu)
        e0 = summary.bound_energies[0] if summary.bound_energies else math.nan
        rows.append([well.V0, summary.scattering_length,
                     summary.effective_range, e0, summary.n_bound])
    path = os.path.join(cfg.output_dir, "tune.csv")
    write_csv(path, ["V0_au", "a_au", "r_e_au", "E_bound_au", "n_bound"],
              rows, cfg)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _spectrum_rows(spectrum) -> list[list]:
    return [[i, float(e), int(e < 0.0), int(i == spectrum.bec_index)]
            for i, e in enumerate(spectrum.energies)]


SPECTRUM_HEADER = ["index", "energy_hw", "is_negative", "is_bec"]


def cmd_solve(cfg: RunConfig) -> int:
    model, pot_echo = resolve_potential(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    ckpt = os.path.join(cfg.output_dir, "checkpoint.json")
    result = svm.run(cfg.svm, cfg.n_particles, model, checkpoint_path=ckpt)
    write_csv(os.path.join(cfg.output_dir, "spectrum.csv"), SPECTRUM_HEADER,
              _spectrum_rows(result.spectrum), cfg,
              {"resolved_potential": pot_echo,
               "converged": result.converged,
               "basis_size": result.state.size})
    status = "converged" if result.converged else "UNCONVERGED"
    print(f"{status}: K={result.state.size} "
          f"n_negative={result.spectrum.n_negative} "
          f"E_bec={result.spectrum.bec_energy:.6f} hbar*omega")
    return 0 if result.converged else 3


def _load_state(cfg: RunConfig) -> svm.SvmState:
    ckpt = os.path.join(cfg.output_dir, "checkpoint.json")
    if not os.path.exists(ckpt):
        raise FileNotFoundError(
            f"no checkpoint at {ckpt}; run the solve subcommand first")
    return svm.load_checkpoint(ckpt)


def cmd_spectrum(cfg: RunConfig) -> int:
    state = _load_state(cfg)
    _, pot_echo = resolve_potential(cfg)
    path = os.path.join(cfg.output_dir, "spectrum.csv")
    write_csv(path, SPECTRUM_HEADER, _spectrum_rows(state.spectrum), cfg,
              {"resolved_potential": pot_echo,
               "converged": svm._converged(state),
               "basis_size": state.size})
    print(f"wrote {path} ({len(state.spectrum.energies)} states)")
    return 0


def cmd_observables(cfg: RunConfig) -> int:
    state = _load_state(cfg)
    obs = cfg.observables
    rows = obdm.state_scan(state.orbits, state.spectrum, state.frame,
                           below=obs["below"], above=obs["above"],
                           lmax=obs["lmax"], n_shells=obs["n_shells"])
    path = os.path.join(cfg.output_dir, "observables.csv")
    write_csv(
        path,
        ["state", "energy_hw", "is_bec", "condensate_fraction",
         "inverse_scaled_central_density", "trace_check"],
        [[r["state"], r["energy"], int(r["is_bec"]),
          r["condensate_fraction"], r["inverse_scaled_central_density"],
          r["trace_check"]] for r in rows],
        cfg,
        {"scale_convention": "density relative to the ideal condensate: "
                             "1/(n(0,0) pi^{3/2}) in oscillator units"})
    print(f"wrote {path} ({len(rows)} states)")
    return 0


# repro -----------------------------------------------------------------------

def _solve_once(cfg: RunConfig, n: int, model: PotentialModel,
                family: str, **svm_overrides) -> svm.SvmResult:
    base = dataclasses.asdict(cfg.svm)
    base.update(basis_family=family, **svm_overrides)
    return svm.run(svm.SvmConfig(**base), n, model)


def _repro_table1(cfg: RunConfig) -> tuple[list[str], list[list], list[str]]:
    ref = reference_values()["zero_range_energies"]
    a_au = ref["a_au"]
    strength = 4.0 * math.pi * a_au / cfg.system.trap_length_au
    model = ContactPairModel(strength)
    sizes = list(cfg.repro["zr_sizes"])
    targets = {r["n"]: r["energy"] for r in ref["rows"]}
    rows, report = [], []
    for n in sizes:
        try:
            res = _solve_once(cfg, n, model, "hyperradial")
            e = res.spectrum.bec_energy
            ref_e = targets.get(n)
            dev = abs(e - ref_e) if ref_e is not None else math.nan
            ok = dev <= ref["atol"] if ref_e is not None else None
            rows.append([n, e, ref_e, dev, int(bool(res.converged))])
            report.append(f"N={n}: E={e:.5f} ref={ref_e} |dev|={dev:.2e} "
                          f"{'PASS' if ok else 'FAIL'}")
        except Exception as exc:   # isolate per-row failures
            rows.append([n, math.nan, targets.get(n), math.nan, 0])
            report.append(f"N={n}: FAILED ({exc})")
    return (["n", "energy_hw", "reference_hw", "abs_dev", "converged"],
            rows, report)


def _repro_table2(cfg: RunConfig) -> tuple[list[str], list[list], list[str]]:
    ref = reference_values()["n4_energies"]
    mu = cfg.system.mass_au / 2.0
    rows, report = [], []
    for row in ref["rows"][: cfg.repro["n4_rows"]]:
        well = twobody.GaussianPotential(row["V0_au"], ref["b_au"])
        model = GaussianPairModel(
            v0=well.V0 / cfg.system.energy_quantum_au,
            c=(cfg.system.trap_length_au / well.b) ** 2)
        try:
            a = twobody.scattering_length(well, mu)
            res = _solve_once(cfg, 4, model, "pair")
            e = res.spectrum.bec_energy
            dev = abs(e - row["e_pair"]) / row["e_pair"]
            ok = dev <= ref["rtol"]
            rows.append([row["V0_au"], a, e, row["e_pair"], dev,
                         int(bool(res.converged))])
            report.append(f"V0={row['V0_au']:.4g}: E(2b)={e:.4f} "
                          f"ref={row['e_pair']} rel={dev:.2e} "
                          f"{'PASS' if ok else 'FAIL'}")
        except Exception as exc:
            rows.append([row["V0_au"], math.nan, math.nan, row["e_pair"],
                         math.nan, 0])
            report.append(f"V0={row['V0_au']:.4g}: FAILED ({exc})")
    return (["V0_au", "a_au", "energy_hw", "reference_hw", "rel_dev",
             "converged"], rows, report)


def _repro_fig_e(cfg: RunConfig) -> tuple[list[str], list[list], list[str]]:
    """BEC energy per particle against a, with the rescaled abscissa
    (N-1) (a/b_t)^{1/2} on which the curves collapse."""
    ref = reference_values()["n4_energies"]
    mu = cfg.system.mass_au / 2.0
    n = 4
    rows, report = [], []
    for row in ref["rows"][: cfg.repro["n4_rows"]]:
        well = twobody.GaussianPotential(row["V0_au"], ref["b_au"])
        model = GaussianPairModel(
            v0=well.V0 / cfg.system.energy_quantum_au,
            c=(cfg.system.trap_length_au / well.b) ** 2)
        try:
            a = twobody.scattering_length(well, mu)
            res = _solve_once(cfg, n, model, "pair")
            e = res.spectrum.bec_energy
            x = (n - 1) * math.sqrt(a / cfg.system.trap_length_au)
            rows.append([a, x, e / n, int(bool(res.converged))])
            report.append(f"a={a:.1f} au: E/N={e / n:.4f}")
        except Exception as exc:
            rows.append([math.nan, math.nan, math.nan, 0])
            report.append(f"V0={row['V0_au']:.4g}: FAILED ({exc})")
    return (["a_au", "rescaled_abscissa", "energy_per_particle_hw",
             "converged"], rows, report)


def _repro_fig_cf(cfg: RunConfig) -> tuple[list[str], list[list], list[str]]:
    """Condensate fraction of the BEC state against a (desk scale: N=4)."""
    ref = reference_values()["n4_energies"]
    mu = cfg.system.mass_au / 2.0
    obs = cfg.observables
    rows, report = [], []
    for row in ref["rows"][: cfg.repro["n4_rows"]]:
        well = twobody.GaussianPotential(row["V0_au"], ref["b_au"])
        model = GaussianPairModel(
            v0=well.V0 / cfg.system.energy_quantum_au,
            c=(cfg.system.trap_length_au / well.b) ** 2)
        try:
            a = twobody.scattering_length(well, mu)
            res = _solve_once(cfg, 4, model, "pair")
            st = res.state
            kern = obdm.obdm_kernel(
                st.orbits,
                st.spectrum.coefficients[:, st.spectrum.bec_index], st.frame)
            cond = obdm.obdm_eigen(kern, lmax=obs["lmax"],
                                   n_shells=obs["n_shells"])
            rows.append([a, res.spectrum.bec_energy,
                         cond.condensate_fraction, int(bool(res.converged))])
            report.append(f"a={a:.1f} au: lambda0={cond.condensate_fraction:.4f}")
        except Exception as exc:
            rows.append([math.nan, math.nan, math.nan, 0])
            report.append(f"V0={row['V0_au']:.4g}: FAILED ({exc})")
    return (["a_au", "energy_hw", "condensate_fraction", "converged"],
            rows, report)


def _repro_fig_states(cfg: RunConfig) -> tuple[list[str], list[list], list[str]]:
    """Per-state scan for N=5 attractive, a ~ 500 au: the jump in the
    condensate fraction and the volume per particle at the BEC state."""
    mu = cfg.system.mass_au / 2.0
    well = twobody.tune_strength(11.65, 500.0, mu)
    model = GaussianPairModel(
        v0=well.V0 / cfg.system.energy_quantum_au,
        c=(cfg.system.trap_length_au / well.b) ** 2)
    obs = cfg.observables
    res = _solve_once(cfg, 5, model, "pair")
    st = res.state
    scan = obdm.state_scan(st.orbits, st.spectrum, st.frame,
                           below=obs["below"], above=obs["above"],
                           lmax=obs["lmax"], n_shells=obs["n_shells"])
    rows = [[r["state"], r["energy"], int(r["is_bec"]),
             r["condensate_fraction"], r["inverse_scaled_central_density"]]
            for r in scan]
    report = [f"state {r['state']}: E={r['energy']:.4f} "
              f"lambda0={r['condensate_fraction']:.4f} "
              f"1/n0={r['inverse_scaled_central_density']:.4f}"
              + ("  <-- BEC" if r["is_bec"] else "")
              for r in scan]
    return (["state", "energy_hw", "is_bec", "condensate_fraction",
             "inverse_scaled_central_density"], rows, report)


_REPRO = {"table1": _repro_table1, "table2": _repro_table2,
          "fig_e": _repro_fig_e, "fig_cf": _repro_fig_cf,
          "fig_states": _repro_fig_states}


def cmd_repro(cfg: RunConfig, which: str | None) -> int:
    which = which or cfg.repro["which"]
    if which not in _REPRO:
        raise ConfigError(f"repro target must be one of {sorted(_REPRO)}, "
                          f"got {which!r}")
    header, rows, report = _REPRO[which](cfg)
    path = os.path.join(cfg.output_dir, f"{which}.csv")
    write_csv(path, header, rows, cfg, {"repro": which})
    for line in report:
        print(line)
    print(f"wrote {path}")
    return 0 if not any("FAIL" in line for line in report) else 4


# entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosetrap",
        description="Trapped-boson spectra and condensate fractions by "
                    "stochastic variational diagonalisation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("tune", "solve", "spectrum", "observables", "repro"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        if name == "repro":
            p.add_argument("--which", choices=sorted(_REPRO), default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.jobs is not None or args.seed is not None:
            overrides = dataclasses.asdict(cfg.svm)
            if args.jobs is not None:
                overrides["jobs"] = args.jobs
            if args.seed is not None:
                overrides["seed"] = args.seed
            cfg = dataclasses.replace(cfg, svm=svm.SvmConfig(**overrides))
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=args.out)
        if args.command == "tune":
            return cmd_tune(cfg)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "observables":
            return cmd_observables(cfg)
        return cmd_repro(cfg, args.which)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
