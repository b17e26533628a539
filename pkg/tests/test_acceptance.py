"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line with the measured quantity and the
threshold.  Run ``pytest tests/test_acceptance.py -v`` or execute this file
directly to see the summary.
"""
import hashlib
import json
import math
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from doublewell.core import DoubleBox, InfiniteBox, grid_for, sample_potential
from doublewell.dynamics import kinetic_operator, left_population, period_from_population, propagate
from doublewell.eigensolver import assemble_hamiltonian, localized_pair, orbital_pair, solve_lowest, tunneling_rate
from doublewell.gatesim import (PLANCK, U_SWAP, GapModel, GateSystem, adiabatic_template,
                                apply_gate, calibrate_ramp, concurrence, ideal_gate,
                                instantaneous_levels, simulate_gate)
from doublewell.spinstat import QubitState
from doublewell.twobody import (ContactInteraction, build_two_body_hamiltonian, degenerate_pt,
                                direct_integral, exchange_integral, sector_states)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}")
        return ok
    return emit


def _box_energies(L, n, k):
    box = InfiniteBox(L)
    return [s.energy for s in solve_lowest(assemble_hamiltonian(sample_potential(box, grid_for(box, n))), k)]


def test_c1_box_spectrum(report):
    t0 = time.perf_counter()
    e = _box_energies(1.0, 2000, 3)
    elapsed = time.perf_counter() - t0
    r2, r3 = e[1] / e[0], e[2] / e[0]
    err = max(abs(r2 / 4 - 1), abs(r3 / 9 - 1), abs(e[0] / (math.pi**2 / 2) - 1))
    ok = err <= 1e-3 and elapsed < 5
    report(1, "box spectrum", ok,
           f"E2/E1={r2:.6f} E3/E1={r3:.6f} E1={e[0]:.6f} max rel err={err:.2e} (<=1e-3) time={elapsed:.2f}s (<5s)")
    assert ok


def test_c2_barrier_removal(report):
    t0 = time.perf_counter()
    narrow = _box_energies(1.0, 2000, 1)[0]
    wide = _box_energies(2.0, 2000, 1)[0]
    elapsed = time.perf_counter() - t0
    err = abs(wide / (0.25 * narrow) - 1)
    ok = err <= 1e-3 and elapsed < 5
    report(2, "width-2L ground energy is a quarter", ok,
           f"E(2L)/E(L)={wide / narrow:.8f} rel err={err:.2e} (<=1e-3) time={elapsed:.2f}s (<5s)")
    assert ok


def test_c3_contact_identities(report):
    t0 = time.perf_counter()
    box = InfiniteBox(1.0)
    g, e = solve_lowest(assemble_hamiltonian(sample_potential(box, grid_for(box, 1000))), 2)
    a = 0.37
    c = ContactInteraction(a)
    J, K = direct_integral(g, e, c), exchange_integral(g, e, c)
    pt = degenerate_pt(g, e, c)
    e_ge = g.energy + e.energy
    low_err = abs(pt.E_low - e_ge)
    elapsed = time.perf_counter() - t0
    err = max(abs(J / a - 1), abs(K / a - 1))
    ok = err <= 1e-6 and low_err <= 1e-12 * e_ge and elapsed < 2
    report(3, "contact J = K = a, PT low level = E_g + E_e", ok,
           f"J/a-1={J / a - 1:.1e} K/a-1={K / a - 1:.1e} (<=1e-6) |E_low-E_ge|={low_err:.1e} time={elapsed:.2f}s (<2s)")
    assert ok


def test_c4_pt_vs_exact(report):
    t0 = time.perf_counter()
    samples = sample_potential(InfiniteBox(1.0), grid_for(InfiniteBox(1.0), 64))
    g, e = solve_lowest(assemble_hamiltonian(samples), 2)
    errs = []
    for a in (0.02, 0.01, 0.005):
        c = ContactInteraction(a)
        exact = sector_states(build_two_body_hamiltonian(samples, c).sector(1), 2)[1][0]
        errs.append(abs(degenerate_pt(g, e, c).E_high - exact))
    elapsed = time.perf_counter() - t0
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(abs(r - 4) <= 0.5 for r in ratios) and elapsed < 60
    report(4, "PT error shrinks 4x per halving of a", ok,
           f"errors={[f'{x:.3e}' for x in errs]} ratios={[f'{r:.3f}' for r in ratios]} (4+-0.5) time={elapsed:.1f}s (<60s)")
    assert ok


def test_c5_tunneling_period(report):
    t0 = time.perf_counter()
    box = DoubleBox(1.0, 0.1, 200.0)
    # n + 1 divisible by 10 puts both barrier edges on cell boundaries
    samples = sample_potential(box, grid_for(box, 2009))
    g = samples.grid
    pair = orbital_pair(samples)
    omega = tunneling_rate(pair)
    loc = localized_pair(pair)
    period = 2 * math.pi / omega
    dt = period / 2000
    mid = 0.5 * (pair.even.energy + pair.odd.energy)
    traj = propagate(loc.left, kinetic_operator(g), lambda t: samples.values, 3 * 2000 * dt, dt,
                     store_every=4, energy_shift=lambda t: mid, weight=g.dx)
    t = np.array(traj.times)
    pops = np.array([left_population(psi, g) for psi in traj.states])
    measured = period_from_population(t, pops)
    pl = left_population(loc.left, g)
    c2 = np.cos(0.5 * omega * t) ** 2
    shape_err = float(np.max(np.abs(pops - (pl * c2 + (1 - pl) * (1 - c2)))))
    elapsed = time.perf_counter() - t0
    rel = abs(measured / period - 1)
    ok = rel <= 1e-3 and shape_err <= 1e-3 and elapsed < 30
    report(5, "tunneling period matches 2 pi / Omega", ok,
           f"Omega={omega:.6f} period static={period:.6f} dynamic={measured:.6f} rel err={rel:.1e} (<=1e-3) "
           f"max |P_L - cos^2 law|={shape_err:.1e} time={elapsed:.1f}s (<30s)")
    assert ok


def test_c6_table_structure(report):
    t0 = time.perf_counter()
    system = GateSystem.default(n=96, barrier_width=0.2, a=0.5)
    lv = instantaneous_levels(system, 500.0)
    u = system.onsite_energy(500.0)
    doubled = GateSystem.default(n=96, barrier_width=0.2, a=1.0)
    anti = []
    for s in (system, doubled):
        sec = s.sectors()[1]
        raised = replace(sec, potential=sec.potential + 500.0 * sec.barrier_mask)
        anti.append([e for e, _ in sector_states(raised, 4)])
    anti_change = float(np.max(np.abs(np.subtract(anti[1], anti[0])) / np.abs(anti[0])))
    elapsed = time.perf_counter() - t0
    ba, ca = lv["b"] - lv["a"], lv["c"] - lv["a"]
    ok = ba <= 0.01 * u and abs(ca / u - 1) <= 0.1 and anti_change < 1e-8 and elapsed < 60
    report(6, "four lowest two-body levels at V_high=500", ok,
           f"U={u:.4f} (E_b-E_a)/U={ba / u:.2e} (<=0.01) (E_c-E_a)/U={ca / u:.4f} (1+-0.1) "
           f"antisymmetric change on doubling a={anti_change:.1e} (<1e-8) time={elapsed:.1f}s (<60s)")
    assert ok


def test_c7_gate_algebra(report):
    t0 = time.perf_counter()
    swap_err = float(np.max(np.abs(ideal_gate(math.pi) - U_SWAP)))
    half = ideal_gate(math.pi / 2)
    sq_err = float(np.max(np.abs(half @ half - ideal_gate(math.pi))))
    out = apply_gate(half, QubitState.basis("01")).amplitudes
    expected = 0.5 * np.array([0, 1, 1, 0]) + 0.5j * np.array([0, 1, -1, 0])
    state_err = float(np.max(np.abs(out - expected)))
    conc = concurrence(QubitState(out))
    elapsed = time.perf_counter() - t0
    ok = swap_err <= 1e-12 and sq_err <= 1e-12 and state_err <= 1e-15 and abs(conc - 1) <= 1e-9 and elapsed < 1
    report(7, "gate algebra", ok,
           f"|U(pi)-U_SWAP|={swap_err:.1e} |U(pi/2)^2-U(pi)|={sq_err:.1e} (<=1e-12) "
           f"sqrt-SWAP|01> err={state_err:.1e} concurrence={conc:.12f} time={elapsed:.3f}s (<1s)")
    assert ok


def test_c8_end_to_end_gate(report):
    t0 = time.perf_counter()
    system = GateSystem.default(n=96)
    template = adiabatic_template(system, V_high=500.0, V_low=0.0, ratio=20.0)
    model = GapModel(system, 0.0, 500.0)
    ramp = calibrate_ramp(math.pi, template, model, allow_wrap=True)
    slow = simulate_gate(ramp, system, dt=0.01, target_phase=math.pi, model=model)
    fast_ramp = ramp.scaled(1 / 200)
    fast = simulate_gate(fast_ramp, system, dt=fast_ramp.duration / 1000, target_phase=math.pi, model=model)
    elapsed = time.perf_counter() - t0
    t_ratio = ramp.duration * slow.onsite_energy / PLANCK
    leak_ratio = fast.leakage / max(slow.leakage, 1e-300)
    ok = (t_ratio >= 20 and slow.fidelity >= 0.99 and slow.leakage <= 1e-2
          and fast.leakage >= 10 * slow.leakage and elapsed < 600)
    report(8, "calibrated adiabatic SWAP and fast-ramp leakage", ok,
           f"T={ramp.duration:.2f} ({t_ratio:.1f} h/U, >=20) fidelity={slow.fidelity:.6f} (>=0.99) "
           f"leakage={slow.leakage:.2e} (<=1e-2) fast leakage={fast.leakage:.3e} ratio={leak_ratio:.2e} (>=10) "
           f"time={elapsed:.0f}s (<600s)")
    assert ok


CLI_CONFIGS = {
    "spectrum": {"potential": {"variant": "infinite_box", "L": 1.0}, "grid": {"n": 500}},
    "tunnel": {"potential": {"variant": "double_box", "L": 1.0, "barrier_width": 0.1, "barrier_height": 200.0},
               "grid": {"n": 399}, "options": {"periods": 2}},
    "twobody": {"grid": {"n": 48}},
    "leveldiagram": {"grid": {"n": 40}, "options": {"count": 6}},
    "gate": {"grid": {"n": 32}, "options": {"nodes": 17}},
    "sweep": {"grid": {"n": 32}, "workers": 2,
              "options": {"param": "barrier_height", "start": 0, "stop": 500, "count": 4}},
}


def _run_cli(command, config, out):
    return subprocess.run([sys.executable, "-m", "doublewell.cli", command, "--config", str(config),
                           "--out", str(out)], capture_output=True, text=True)


def _digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(Path(directory).iterdir())}


def test_c9_cli_determinism(report, tmp_path):
    t0 = time.perf_counter()
    mismatched, failed, files = [], [], 0
    for command, body in CLI_CONFIGS.items():
        config = tmp_path / f"{command}.json"
        config.write_text(json.dumps({"command": command, "output_dir": str(tmp_path / command), **body}))
        digests = []
        for k in range(2):
            res = _run_cli(command, config, tmp_path / f"{command}_{k}")
            if res.returncode != 0:
                failed.append(f"{command}: {res.stderr.strip()}")
                break
            digests.append(_digest(tmp_path / f"{command}_{k}"))
        if len(digests) == 2:
            files += len(digests[0])
            if digests[0] != digests[1]:
                mismatched.append(command)
    elapsed = time.perf_counter() - t0
    ok = not mismatched and not failed
    report(9, "CLI reruns are hash-identical", ok,
           f"commands={len(CLI_CONFIGS)} files compared={files} mismatched={mismatched or 'none'} "
           f"failed={failed or 'none'} time={elapsed:.0f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
