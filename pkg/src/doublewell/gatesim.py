"""Adiabatic barrier-ramp gate for two fermions in a double well.

The spatial Hamiltonian is spin independent, so the gate is simulated by
evolving two spatial states: the symmetric-sector level ``a`` (which carries
the spin singlet) and the antisymmetric-sector level ``b`` (which carries the
triplets).  Their relative phase after the ramp fixes the two-qubit gate.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import DoubleBox, Grid, PotentialSamples, grid_for, sample_potential
from .dynamics import propagate
from .eigensolver import EVEN, ODD, localized_pair, orbital_pair
from .errors import BracketError, ConvergenceError, DomainError, LabelingError
from .spinstat import QubitState, computational_basis, decode_to_computational, CompositeState
from .twobody import (ContactInteraction, Sector, build_two_body_hamiltonian,
                      onsite_energy, sector_states)

PLANCK = 2 * math.pi  # h in units with hbar = 1
LABELS = ("a", "b", "c", "d")

U_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
U_SQRT_SWAP = np.array([
    [1, 0, 0, 0],
    [0, 0.5 * (1 + 1j), 0.5 * (1 - 1j), 0],
    [0, 0.5 * (1 - 1j), 0.5 * (1 + 1j), 0],
    [0, 0, 0, 1],
], dtype=complex)


# -- ramp ---------------------------------------------------------------------

def _smoothstep(u):
    return u * u * (3 - 2 * u)


def _cosine(u):
    return 0.5 * (1 - np.cos(np.pi * u))


SHAPES = {"smoothstep": _smoothstep, "linear": lambda u: u, "cosine": _cosine}


@dataclass(frozen=True)
class RampProfile:
    """Barrier lowered from V_high to V_low over t_ramp, held for t_hold, then raised."""

    V_high: float
    V_low: float
    t_ramp: float
    t_hold: float = 0.0
    shape: str = "smoothstep"

    def __post_init__(self):
        if not self.V_high > self.V_low >= 0:
            raise DomainError("need V_high > V_low >= 0")
        if self.t_ramp < 0 or self.t_hold < 0:
            raise DomainError("ramp durations must be non-negative")
        if self.shape not in SHAPES:
            raise DomainError(f"unknown ramp shape {self.shape!r}")

    @property
    def duration(self) -> float:
        return 2 * self.t_ramp + self.t_hold

    @property
    def breakpoints(self) -> tuple[float, float, float, float]:
        return 0.0, self.t_ramp, self.t_ramp + self.t_hold, self.duration

    def barrier_at(self, t):
        t = np.asarray(t, dtype=float)
        s = SHAPES[self.shape]
        dv = self.V_high - self.V_low
        _, t1, t2, t3 = self.breakpoints
        if self.t_ramp > 0:
            down = self.V_high - dv * s(np.clip(t / self.t_ramp, 0, 1))
            up = self.V_low + dv * s(np.clip((t - t2) / self.t_ramp, 0, 1))
        else:
            down = np.full_like(t, self.V_low)
            up = np.full_like(t, self.V_low)
        out = np.where(t < t1, down, np.where(t <= t2, self.V_low, up))
        out = np.where((t <= 0) | (t >= t3), self.V_high, out)
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "RampProfile":
        return replace(self, t_ramp=self.t_ramp * factor, t_hold=self.t_hold * factor)

    def to_dict(self) -> dict:
        return asdict(self)


# -- the double-well system ---------------------------------------------------

@dataclass(frozen=True)
class GateSystem:
    """Double-box geometry and contact interaction on a fixed grid."""

    box: DoubleBox
    grid: Grid
    interaction: ContactInteraction

    @classmethod
    def default(cls, n: int = 96, barrier_width: float = 0.2, a: float = 0.5,
                L: float = 1.0) -> "GateSystem":
        box = DoubleBox(L, barrier_width, 0.0)
        return cls(box, grid_for(box, n), ContactInteraction(a))

    def samples(self, barrier_height: float) -> PotentialSamples:
        return sample_potential(self.box.with_barrier(barrier_height), self.grid)

    @property
    def barrier_profile(self) -> np.ndarray:
        """Single-particle potential of a unit-height barrier."""
        return self.samples(1.0).values

    def sectors(self) -> tuple[Sector, Sector]:
        """(symmetric, antisymmetric) sectors at zero barrier, with barrier masks."""
        ham = build_two_body_hamiltonian(self.samples(0.0), self.interaction)
        prof = self.barrier_profile
        return ham.sector(1, prof), ham.sector(-1, prof)

    def onsite_energy(self, barrier_height: float) -> float:
        pair = orbital_pair(self.samples(barrier_height))
        loc = localized_pair(pair)
        return onsite_energy(loc.left, self.interaction, self.grid)


def _at_barrier(sector: Sector, height: float) -> Sector:
    return replace(sector, potential=sector.potential + height * sector.barrier_mask)


@dataclass(frozen=True)
class Levels:
    barrier_height: float
    energies: tuple  # E_a, E_b, E_c, E_d
    states: Optional[dict] = field(default=None, repr=False)

    def __getitem__(self, label: str) -> float:
        return self.energies[LABELS.index(label)]


def instantaneous_levels(system: GateSystem, barrier_height: float, *,
                         sectors: Optional[tuple[Sector, Sector]] = None,
                         keep_states: bool = False) -> Levels:
    """Energies of the labeled two-body states a, b, c, d at one barrier height.

    a: lowest symmetric even, b: lowest antisymmetric, c: second symmetric
    even, d: lowest symmetric odd.
    """
    sym0, anti0 = sectors if sectors is not None else system.sectors()
    sym, anti = _at_barrier(sym0, barrier_height), _at_barrier(anti0, barrier_height)
    b_e, b_state = sector_states(anti, 1)[0]
    for k in (4, 6, 8):
        found = sector_states(sym, k)
        even = [(e, s) for e, s in found if s.parity == EVEN]
        odd = [(e, s) for e, s in found if s.parity == ODD]
        if len(even) >= 2 and odd:
            break
    else:
        raise LabelingError(f"could not identify states a, c, d at V_b={barrier_height}")
    if b_state.parity != ODD:
        raise LabelingError(f"lowest antisymmetric state is not odd at V_b={barrier_height}")
    (a_e, a_s), (c_e, c_s) = even[0], even[1]
    d_e, d_s = odd[0]
    states = {"a": a_s, "b": b_state, "c": c_s, "d": d_s} if keep_states else None
    return Levels(float(barrier_height), (a_e, b_e, c_e, d_e), states)


@dataclass(frozen=True)
class LevelDiagram:
    barriers: np.ndarray
    energies: np.ndarray  # shape (m, 4), columns a, b, c, d
    onsite: float = float("nan")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["V_b", "E_a", "E_b", "E_c", "E_d"])
            for vb, row in zip(self.barriers, self.energies):
                w.writerow([repr(float(vb))] + [repr(float(e)) for e in row])


def level_diagram(system: GateSystem, barriers: Sequence[float]) -> LevelDiagram:
    sectors = system.sectors()
    rows = [instantaneous_levels(system, vb, sectors=sectors).energies for vb in barriers]
    vh = max(barriers) if len(barriers) else 0.0
    u = system.onsite_energy(vh) if len(barriers) else float("nan")
    return LevelDiagram(np.asarray(barriers, dtype=float), np.asarray(rows, dtype=float).reshape(-1, 4), u)


class _ChebyshevInterpolant:
    """Barycentric interpolation on Chebyshev-Lobatto nodes with the closed-form weights.

    Evaluated with elementwise products and np.sum so repeated runs agree bit for bit.
    """

    def __init__(self, nodes: np.ndarray, values: np.ndarray):
        m = len(nodes)
        w = (-1.0) ** np.arange(m)
        w[0] *= 0.5
        w[-1] *= 0.5
        self.nodes, self.values, self.weights = nodes, np.asarray(values, dtype=float), w

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 1)
        diff = flat - self.nodes[None, :]
        exact = diff == 0
        diff[exact] = 1.0
        c = self.weights / diff
        out = np.sum(c * self.values, axis=1) / np.sum(c, axis=1)
        hit = exact.any(axis=1)
        out[hit] = self.values[np.argmax(exact[hit], axis=1)]
        out = out.reshape(x.shape)
        return out if out.ndim else float(out)


class GapModel:
    """Chebyshev interpolants of E_a and log(E_b - E_a) over [V_low, V_high]."""

    def __init__(self, system: GateSystem, V_low: float, V_high: float, nodes: int = 33):
        self.V_low, self.V_high = float(V_low), float(V_high)
        k = np.arange(nodes)
        x = np.cos(np.pi * k / (nodes - 1))[::-1]
        self.barriers = self.V_low + 0.5 * (self.V_high - self.V_low) * (x + 1)
        diag = level_diagram(system, self.barriers)
        self.diagram = diag
        e = diag.energies
        gap = e[:, 1] - e[:, 0]
        if np.any(gap <= 0):
            raise LabelingError("state b is not above state a along the ramp")
        self._ea = _ChebyshevInterpolant(self.barriers, e[:, 0])
        self._loggap = _ChebyshevInterpolant(self.barriers, np.log(gap))
        self.min_gap = float(np.min(e[:, 2] - e[:, 0]))

    def _clip(self, vb):
        return np.clip(vb, self.V_low, self.V_high)

    def gap(self, vb):
        return np.exp(self._loggap(self._clip(vb)))

    def energy_a(self, vb):
        return self._ea(self._clip(vb))

    def midpoint_energy(self, vb):
        vb = self._clip(vb)
        return self._ea(vb) + 0.5 * np.exp(self._loggap(vb))


def _phase_once(ramp: RampProfile, gap: Callable, n_quad: int, t0: float, t1: float) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    total = 0.0
    cuts = sorted({t0, t1, *[b for b in ramp.breakpoints if t0 < b < t1]})
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        t = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * float(np.sum(weights * gap(ramp.barrier_at(t))))
    return total


def accumulate_phase(ramp: RampProfile, model, n_quad: int = 64, *,
                     t_start: float = 0.0, t_end: Optional[float] = None,
                     hbar: float = 1.0, tol: float = 1e-4) -> float:
    """Integral of E_b - E_a along the ramp, divided by hbar.

    The quadrature is repeated with doubled order; a change larger than
    ``tol`` radians is reported as non-convergence.
    """
    gap = model.gap if hasattr(model, "gap") else model
    t_end = ramp.duration if t_end is None else t_end
    coarse = _phase_once(ramp, gap, n_quad, t_start, t_end)
    fine = _phase_once(ramp, gap, 2 * n_quad, t_start, t_end)
    if abs(fine - coarse) > tol:
        raise ConvergenceError("phase quadrature not converged", abs(fine - coarse))
    return fine / hbar


def calibrate_ramp(target_phase: float, template: RampProfile, model, *,
                   max_hold: float = 1e4, allow_wrap: bool = False, tol: float = 1e-3,
                   n_quad: int = 64) -> RampProfile:
    """Adjust t_hold so the accumulated phase equals ``target_phase``.

    With ``allow_wrap`` the target may be raised by whole turns (2 pi k) when
    the ramp edges alone already accumulate more than the target; the gate is
    unchanged by such a shift.
    """
    def phase(hold):
        return accumulate_phase(replace(template, t_hold=hold), model, n_quad)

    edges = phase(0.0)
    target = target_phase
    if edges > target:
        if not allow_wrap:
            raise BracketError(f"ramp edges alone accumulate {edges:.6f} rad > target {target:.6f}")
        target += 2 * math.pi * math.ceil((edges - target) / (2 * math.pi))
    if math.isclose(edges, target, abs_tol=tol / 10):
        return replace(template, t_hold=0.0)
    if phase(max_hold) < target:
        raise BracketError(f"target {target:.6f} rad unreachable within t_hold <= {max_hold}")
    hold = brentq(lambda h: phase(h) - target, 0.0, max_hold, xtol=1e-12, rtol=1e-14, maxiter=200)
    result = replace(template, t_hold=hold)
    if abs(phase(hold) - target) > tol:
        raise BracketError("calibration did not reach the requested tolerance")
    return result


# -- gate algebra -------------------------------------------------------------

def ideal_gate(delta_phi: float) -> np.ndarray:
    """|00>, |11> fixed; |01>, |10> mixed by the relative phase delta_phi."""
    e = np.exp(1j * delta_phi)
    u = np.eye(4, dtype=complex)
    u[1, 1] = u[2, 2] = 0.5 * (1 + e)
    u[1, 2] = u[2, 1] = 0.5 * (1 - e)
    return u


def verify_sqrt_swap(tol: float = 1e-12) -> bool:
    half = ideal_gate(math.pi / 2)
    return bool(np.max(np.abs(half @ half - U_SWAP)) <= tol)


def apply_gate(u: np.ndarray, q: QubitState) -> QubitState:
    out = np.asarray(u) @ q.amplitudes
    return QubitState(out / np.linalg.norm(out))


def concurrence(q: QubitState) -> float:
    a, b, c, d = q.amplitudes
    return float(2 * abs(a * d - b * c))


def gate_fidelity(ideal: np.ndarray, realized: np.ndarray) -> float:
    """|tr(U_ideal^dagger U_real)| / 4, blind to a global phase."""
    return float(abs(np.trace(ideal.conj().T @ realized)) / 4)


def realized_gate(u_sym: complex, u_anti: complex) -> np.ndarray:
    """Gate on the computational basis when Psi+ picks up u_sym and Psi- picks up u_anti."""
    cols = []
    for b in computational_basis():
        c = b.coeffs.copy()
        c[1] *= u_sym   # Psi+ row
        c[3] *= u_anti  # Psi- row
        amps, _ = decode_to_computational(CompositeState(c))
        cols.append(amps)
    return np.array(cols).T


def _nearest_unitary(m: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(m)
    return w @ vh


# -- full simulation ----------------------------------------------------------

@dataclass
class GateReport:
    delta_phi: float
    delta_phi_static: float
    phase_discrepancy: float
    target_phase: float
    ideal_unitary: np.ndarray
    realized_unitary: np.ndarray
    fidelity: float
    leakage: float
    leakage_sym: float
    leakage_anti: float
    min_gap: float
    onsite_energy: float
    adiabaticity_ratio: float
    duration: float
    dt: float
    diabatic_failure: bool
    ramp: RampProfile
    trajectory: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]
        return {
            "delta_phi": self.delta_phi,
            "delta_phi_static": self.delta_phi_static,
            "phase_discrepancy": self.phase_discrepancy,
            "target_phase": self.target_phase,
            "ideal_unitary": mat(self.ideal_unitary),
            "realized_unitary": mat(self.realized_unitary),
            "fidelity": self.fidelity,
            "leakage": self.leakage,
            "leakage_symmetric_sector": self.leakage_sym,
            "leakage_antisymmetric_sector": self.leakage_anti,
            "min_gap": self.min_gap,
            "onsite_energy": self.onsite_energy,
            "adiabaticity_ratio": self.adiabaticity_ratio,
            "duration": self.duration,
            "dt": self.dt,
            "diabatic_failure": self.diabatic_failure,
            "ramp": self.ramp.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write_trajectory_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "V_b", "norm", "re_00", "im_00", "re_01", "im_01",
                        "re_10", "im_10", "re_11", "im_11", "residual"])
            for row in self.trajectory:
                w.writerow([repr(float(v)) for v in row])


def _overlap(u: np.ndarray, v: np.ndarray) -> complex:
    return complex(np.sum(np.conj(u) * v))


def _wrap(phi: float) -> float:
    return float((phi + math.pi) % (2 * math.pi) - math.pi)


def simulate_gate(ramp: RampProfile, system: GateSystem, *, dt: float = 0.01,
                  target_phase: Optional[float] = None, model: Optional[GapModel] = None,
                  store_every: int = 50, workers: int = 2) -> GateReport:
    """Evolve the spatial states a and b through the ramp and read out the gate.

    ``target_phase`` selects the ideal gate used for the fidelity; by default
    it is the phase predicted by the level diagram.
    """
    sym0, anti0 = system.sectors()
    initial = instantaneous_levels(system, ramp.V_high, sectors=(sym0, anti0), keep_states=True)
    a0 = sym0.from_field(initial.states["a"].amplitudes)
    b0 = anti0.from_field(initial.states["b"].amplitudes)
    if model is None:
        model = GapModel(system, ramp.V_low, ramp.V_high)
    static = accumulate_phase(ramp, model) if ramp.duration > 0 else 0.0
    target = static if target_phase is None else target_phase
    u_onsite = system.onsite_energy(ramp.V_high)

    T = ramp.duration
    steps = max(1, math.ceil(T / dt - 1e-9)) if T > 0 else 0
    dt_eff = T / steps if steps else dt

    def run(sector: Sector, v0: np.ndarray):
        overlaps = []

        def observe(t, psi):
            overlaps.append((t, _overlap(v0, psi), _overlap(psi, psi).real))

        traj = propagate(
            v0.astype(complex), sector.kinetic,
            lambda t: sector.potential + ramp.barrier_at(t) * sector.barrier_mask,
            T, dt_eff, store_every=store_every,
            energy_shift=lambda t: float(model.midpoint_energy(ramp.barrier_at(t))),
            weight=1.0, keep_states=False, observer=observe)
        return _overlap(v0, traj.final), overlaps

    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fa = pool.submit(run, sym0, a0)
            fb = pool.submit(run, anti0, b0)
            (u_a, ov_a), (u_b, ov_b) = fa.result(), fb.result()
    else:
        u_a, ov_a = run(sym0, a0)
        u_b, ov_b = run(anti0, b0)

    raw = realized_gate(u_a, u_b)
    leak_a = max(0.0, 1 - abs(u_a) ** 2)
    leak_b = max(0.0, 1 - abs(u_b) ** 2)
    leakage = max(0.0, 1 - float(np.sum(np.abs(raw) ** 2)) / 4)
    unitary = realized_gate(u_a / abs(u_a), u_b / abs(u_b)) if abs(u_a) > 0 and abs(u_b) > 0 \
        else _nearest_unitary(raw)
    dyn = float(np.angle(u_a / u_b)) % (2 * math.pi) if steps else 0.0

    trajectory = []
    q01 = computational_basis()[1].coeffs
    for (t, oa, na), (_, ob, nb) in zip(ov_a, ov_b):
        c = q01.copy()
        c[1] *= oa
        c[3] *= ob
        amps, res = decode_to_computational(CompositeState(c))
        row = [t, ramp.barrier_at(t), 0.5 * (na + nb)]
        for z in amps:
            row += [z.real, z.imag]
        trajectory.append(row + [res])

    return GateReport(
        delta_phi=dyn,
        delta_phi_static=static,
        phase_discrepancy=_wrap(dyn - static),
        target_phase=target,
        ideal_unitary=ideal_gate(target),
        realized_unitary=unitary,
        fidelity=gate_fidelity(ideal_gate(target), unitary),
        leakage=leakage,
        leakage_sym=leak_a,
        leakage_anti=leak_b,
        min_gap=model.min_gap,
        onsite_energy=u_onsite,
        adiabaticity_ratio=T * u_onsite / PLANCK,
        duration=T,
        dt=dt_eff,
        diabatic_failure=leakage > 0.5,
        ramp=ramp,
        trajectory=trajectory,
    )


def adiabatic_template(system: GateSystem, V_high: float = 500.0, V_low: float = 0.0,
                       ratio: float = 20.0, shape: str = "smoothstep") -> RampProfile:
    """Ramp whose two edges together last ``ratio`` * h/U."""
    u = system.onsite_energy(V_high)
    return RampProfile(V_high, V_low, 0.5 * ratio * PLANCK / u, 0.0, shape)
