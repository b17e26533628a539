"""Batch command-line front end.

    doublewell <command> --config run.json [--out DIR] [--workers K]

Every command writes its CSV/JSON outputs plus a PNG figure into the output
directory.  Files are staged in a temporary directory and only moved into
place once the whole run succeeded.  Exit codes: 0 ok, 2 bad config,
3 solver failure, 4 I/O failure; failures print a JSON error to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfg
from . import plotting
from .core import DoubleBox, sample_potential
from .dynamics import (kinetic_operator, left_population, period_from_population,
                       propagate)
from .eigensolver import (assemble_hamiltonian, localized_pair, orbital_pair, solve_lowest,
                          tunneling_rate, write_eigenstate_csv)
from .errors import DoubleWellError
from .gatesim import (GapModel, GateSystem, accumulate_phase, adiabatic_template, apply_gate,
                      calibrate_ramp, instantaneous_levels, level_diagram, simulate_gate)
from .spinstat import QubitState
from .twobody import (ANTISYMMETRIC, build_two_body_hamiltonian, degenerate_pt, ground_shift,
                      onsite_energy, solve_two_body_lowest, swap_permutation)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else repr(float(v)) for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- commands -----------------------------------------------------------------

def cmd_spectrum(rc: cfg.RunConfig, out: Path) -> None:
    samples = sample_potential(rc.potential, rc.grid)
    k = min(rc.options.get("k", 6), rc.grid.n)
    states = solve_lowest(assemble_hamiltonian(samples), k)
    e1 = states[0].energy
    _write_csv(out / "spectrum.csv", ["index", "energy", "parity", "ratio_to_ground"],
               [[str(j + 1), s.energy, s.parity, s.energy / e1] for j, s in enumerate(states)])
    if rc.options.get("export_states", True):
        for j, s in enumerate(states):
            write_eigenstate_csv(out / f"state_{j + 1}.csv", s, rc.grid)
    if rc.figures:
        plotting.plot_spectrum(out / "spectrum.png", rc.grid.points, samples.values, states[: min(k, 6)])


def cmd_tunnel(rc: cfg.RunConfig, out: Path) -> None:
    samples = sample_potential(rc.potential, rc.grid)
    pair = orbital_pair(samples)
    omega = tunneling_rate(pair)
    loc = localized_pair(pair)
    dt = rc.options.get("dt", 2e-3)
    if omega > 0:
        default_t = rc.options.get("periods", 3.0) * 2 * math.pi / omega
    else:
        default_t = 1.0
    t_final = rc.options.get("t_final", default_t)
    t_final = max(1, round(t_final / dt)) * dt
    mid = 0.5 * (pair.even.energy + pair.odd.energy)
    traj = propagate(loc.left, kinetic_operator(rc.grid), lambda t: samples.values, t_final, dt,
                     store_every=rc.options.get("store_every", 5), energy_shift=lambda t: mid,
                     weight=rc.grid.dx)
    pops = [left_population(psi, rc.grid) for psi in traj.states]
    _write_csv(out / "tunnel.csv", ["t", "norm", "left_population"],
               zip(traj.times, traj.norms, pops))
    summary = {"E_even": pair.even.energy, "E_odd": pair.odd.energy, "omega": omega,
               "period_static": 2 * math.pi / omega if omega > 0 else None,
               "left_probability_L": left_population(loc.left, rc.grid)}
    try:
        period = period_from_population(np.array(traj.times), np.array(pops))
        summary["period_dynamic"] = period
        summary["period_relative_error"] = abs(period - summary["period_static"]) / summary["period_static"]
    except DoubleWellError:
        summary["period_dynamic"] = None
    _write_json(out / "tunnel.json", summary)
    if rc.figures:
        plotting.plot_tunneling(out / "tunnel.png", traj.times, pops, omega)


def cmd_twobody(rc: cfg.RunConfig, out: Path) -> None:
    samples = sample_potential(rc.potential, rc.grid)
    ham = build_two_body_hamiltonian(samples, rc.interaction)
    k = rc.options.get("k", 4)
    levels = solve_two_body_lowest(ham, k)
    labels = _level_labels(levels)
    rows = [{"energy": e, "symmetry": s.exchange_symmetry, "parity": s.parity, "label": lab}
            for (e, s), lab in zip(levels, labels)]
    _write_json(out / "twobody.json", rows)

    single = solve_lowest(assemble_hamiltonian(samples), 2)
    g, e = single
    pt = degenerate_pt(g, e, rc.interaction)
    loc = localized_pair(orbital_pair(samples))
    rng = np.random.default_rng(rc.seed)
    swap = swap_permutation(rc.grid.n)
    comm = 0.0
    for _ in range(5):
        v = rng.standard_normal(rc.grid.n**2)
        comm = max(comm, float(np.linalg.norm(swap @ (ham.matrix @ v) - ham.matrix @ (swap @ v))
                               / np.linalg.norm(ham.matrix @ v)))
    _write_json(out / "integrals.json", {
        "E_g": g.energy, "E_e": e.energy,
        "J": pt.J, "K": pt.K,
        "ground_shift": ground_shift(g, rc.interaction),
        "onsite_energy": onsite_energy(loc.left, rc.interaction, rc.grid),
        "pt_E_low": pt.E_low, "pt_E_high": pt.E_high,
        "swap_commutator_residual": comm,
    })
    if rc.figures:
        plotting.plot_two_body_densities(out / "twobody.png", rc.grid, levels[: min(k, 4)], labels)


def _level_labels(levels):
    """Label a, b, c, d where the (symmetry, parity) pattern identifies them."""
    labels = [None] * len(levels)
    seen_even = 0
    have_b = have_d = False
    for j, (_, s) in enumerate(levels):
        if s.exchange_symmetry == ANTISYMMETRIC:
            if not have_b and s.parity == "odd":
                labels[j], have_b = "b", True
        elif s.parity == "even" and seen_even < 2:
            labels[j] = "ac"[seen_even]
            seen_even += 1
        elif s.parity == "odd" and not have_d:
            labels[j], have_d = "d", True
    return labels


def _system(rc: cfg.RunConfig) -> GateSystem:
    box = DoubleBox(rc.potential.L, rc.potential.barrier_width, 0.0)
    return GateSystem(box, rc.grid, rc.interaction)


def cmd_leveldiagram(rc: cfg.RunConfig, out: Path) -> None:
    o = rc.options
    start = o.get("barrier_start", 0.0)
    stop = o.get("barrier_stop", rc.potential.barrier_height)
    barriers = np.linspace(start, stop, o.get("count", 26))
    diag = level_diagram(_system(rc), barriers)
    diag.write_csv(out / "leveldiagram.csv")
    if rc.figures and len(barriers):
        plotting.plot_level_diagram(out / "leveldiagram.png", diag.barriers, diag.energies)


def cmd_gate(rc: cfg.RunConfig, out: Path) -> None:
    o = rc.options
    system = _system(rc)
    target = o.get("target_phase", math.pi)
    template = rc.ramp or adiabatic_template(system, rc.potential.barrier_height or 500.0,
                                             0.0, o.get("adiabaticity", 20.0))
    model = GapModel(system, template.V_low, template.V_high, o.get("nodes", 33))
    ramp = template
    if o.get("calibrate", True):
        ramp = calibrate_ramp(target, template, model, allow_wrap=o.get("allow_wrap", True))
    report = simulate_gate(ramp, system, dt=o.get("dt", 0.01), target_phase=target, model=model,
                           store_every=o.get("store_every", 50), workers=rc.workers)
    data = report.to_dict()
    rng = np.random.default_rng(rc.seed)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    q = QubitState(z / np.linalg.norm(z))
    ideal_out = apply_gate(report.ideal_unitary, q).amplitudes
    real_out = apply_gate(report.realized_unitary, q).amplitudes
    data["random_state_fidelity"] = float(abs(np.vdot(ideal_out, real_out)) ** 2)
    data["unitary_error"] = float(np.max(np.abs(
        report.realized_unitary.conj().T @ report.realized_unitary - np.eye(4))))
    _write_json(out / "gate_report.json", data)
    report.write_trajectory_csv(out / "gate_trajectory.csv")
    model.diagram.write_csv(out / "gate_levels.csv")
    if rc.figures:
        t = np.linspace(0, ramp.duration, 400)
        vb = ramp.barrier_at(t)
        ea = model.energy_a(vb)
        plotting.plot_gate(out / "gate.png", t, vb, np.column_stack([ea, ea + model.gap(vb)]),
                           report.trajectory)


def _swept(rc: cfg.RunConfig, value: float):
    param, pot, inter = rc.options["param"], rc.potential, rc.interaction
    if param == "barrier_height":
        pot = replace(pot, barrier_height=value)
    elif param == "barrier_width":
        pot = replace(pot, barrier_width=value)
    elif param == "a":
        inter = replace(inter, a=value)
    return pot, inter


def _sweep_point(rc: cfg.RunConfig, value: float) -> list:
    quantity = rc.options.get("quantity", "levels")
    pot, inter = _swept(rc, value)
    if quantity == "tunneling":
        pair = orbital_pair(sample_potential(pot, rc.grid))
        return [value, pair.even.energy, pair.odd.energy, tunneling_rate(pair)]
    system = GateSystem(DoubleBox(pot.L, pot.barrier_width, 0.0), rc.grid, inter)
    if quantity == "phase":
        model = GapModel(system, rc.ramp.V_low, rc.ramp.V_high, rc.options.get("nodes", 33))
        return [value, accumulate_phase(rc.ramp, model)]
    lv = instantaneous_levels(system, pot.barrier_height)
    return [value, *lv.energies, system.onsite_energy(pot.barrier_height)]


def cmd_sweep(rc: cfg.RunConfig, out: Path) -> None:
    o = rc.options
    quantity = o.get("quantity", "levels")
    values = [float(v) for v in np.linspace(o["start"], o["stop"], o["count"])] if o["count"] else []
    param = o["param"]
    header = {"phase": [param, "delta_phi"],
              "tunneling": [param, "E_even", "E_odd", "omega"],
              "levels": [param, "E_a", "E_b", "E_c", "E_d", "U"]}[quantity]
    if param in ("t_hold", "t_ramp"):
        # one level diagram serves every point; only the schedule changes
        model = GapModel(_system(rc), rc.ramp.V_low, rc.ramp.V_high, o.get("nodes", 33)) if values else None
        rows = [[v, accumulate_phase(replace(rc.ramp, **{param: v}), model)] for v in values]
    elif rc.workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=rc.workers) as pool:
            rows = list(pool.map(_sweep_point, [rc] * len(values), values))
    else:
        rows = [_sweep_point(rc, v) for v in values]
    _write_csv(out / "sweep.csv", header, rows)
    if rc.figures:
        plotting.plot_sweep(out / "sweep.png", header, rows)


COMMAND_FUNCS = {
    "spectrum": cmd_spectrum,
    "tunnel": cmd_tunnel,
    "twobody": cmd_twobody,
    "leveldiagram": cmd_leveldiagram,
    "gate": cmd_gate,
    "sweep": cmd_sweep,
}


# -- driver -------------------------------------------------------------------

def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def run(config_path, command=None, out=None, workers=None, figures=None) -> int:
    """Validate, compute into a staging directory, then publish the outputs."""
    try:
        rc = cfg.load(config_path, command,
                      {"output_dir": None if out is None else str(out), "workers": workers,
                       "figures": figures})
    except cfg.ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))

    target = Path(rc.output_dir)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=target.parent))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    try:
        try:
            COMMAND_FUNCS[rc.command](rc, stage)
        except DoubleWellError as exc:
            return _fail(EXIT_SOLVER, type(exc).__name__, str(exc))
        except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
            return _fail(EXIT_SOLVER, type(exc).__name__, str(exc))
        except OSError as exc:
            return _fail(EXIT_IO, "io", str(exc))
        try:
            target.mkdir(parents=True, exist_ok=True)
            for f in sorted(stage.iterdir()):
                os.replace(f, target / f.name)
        except OSError as exc:
            return _fail(EXIT_IO, "io", str(exc))
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doublewell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in cfg.COMMANDS + ("run",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--workers", type=int, help="parallel workers (overrides workers)")
        p.add_argument("--no-figures", dest="figures", action="store_false", default=None,
                       help="skip PNG figures")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = None if args.command == "run" else args.command
    return run(args.config, command, args.out, args.workers, args.figures)


if __name__ == "__main__":
    sys.exit(main())
