"""Time evolution of wavefunctions.

Static problems can be evolved exactly in an eigenbasis.  Time-dependent
problems use the Crank-Nicolson (implicit trapezoidal) propagator

    (1 + i dt/2 H(t + dt/2)) psi(t + dt) = (1 - i dt/2 H(t + dt/2)) psi(t)

with H = K + diag(v(t)).  Each step is solved against a cached sparse LU
factorization at a reference potential; the remaining diagonal difference is
removed by defect-correction sweeps, and the factorization is refreshed once
that difference grows beyond ``refactor_tol`` (in units of dt/2).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .core import Grid, PotentialSamples
from .eigensolver import Eigenstate, left_probability
from .errors import DomainError, SpanError, StepSizeError

NORM_TOL = 1e-6


@dataclass
class WavefunctionTrajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list, repr=False)
    norms: list = field(default_factory=list)

    final_state: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.final_state

    def append(self, t: float, psi: np.ndarray, norm: float, keep: bool = True) -> None:
        self.times.append(float(t))
        if keep:
            self.states.append(psi.copy())
        self.norms.append(float(norm))
        self.final_state = psi.copy()


def evolve_spectral(initial: np.ndarray, spectrum: Sequence[Eigenstate], t: float,
                    dx: float, hbar: float = 1.0, span_tol: float = 1e-8) -> np.ndarray:
    """Expand in the given eigenstates and attach phases exp(-i E t / hbar)."""
    basis = np.array([s.amplitudes for s in spectrum])
    energies = np.array([s.energy for s in spectrum])
    coeffs = basis.conj() @ initial * dx
    total = np.sum(np.abs(initial) ** 2) * dx
    captured = np.sum(np.abs(coeffs) ** 2)
    if captured < (1 - span_tol) * total:
        raise SpanError(f"eigenbasis captures only {captured / total:.10f} of the norm")
    return (coeffs * np.exp(-1j * energies * t / hbar)) @ basis


def left_population(state: np.ndarray, grid: Grid) -> float:
    return left_probability(state, grid)


def kinetic_operator(grid: Grid) -> sp.csc_matrix:
    n, dx = grid.n, grid.dx
    off = np.full(n - 1, -0.5 / dx**2)
    return sp.diags([off, np.full(n, 1.0 / dx**2), off], [-1, 0, 1], format="csc")


def _norm(x: np.ndarray) -> float:
    # pairwise np.sum instead of BLAS: the result must not depend on array alignment
    return math.sqrt(float(np.sum(x.real**2 + x.imag**2)))


class CrankNicolson:
    """Propagator for H(t) = K + diag(v(t)) with a cached reference factorization."""

    def __init__(self, kinetic: sp.spmatrix, dt: float, refactor_tol: float = 0.03,
                 sweep_tol: float = 1e-14, max_sweeps: int = 60):
        self.kinetic = sp.csc_matrix(kinetic, dtype=complex)
        self.dt = dt
        self.refactor_tol = refactor_tol
        self.sweep_tol = sweep_tol
        self.max_sweeps = max_sweeps
        self._eye = sp.identity(self.kinetic.shape[0], dtype=complex, format="csc")
        self._v_ref = None
        self._lu = None
        self.factorizations = 0

    def _factor(self, v: np.ndarray) -> None:
        a = self._eye + 0.5j * self.dt * (self.kinetic + sp.diags(v, format="csc"))
        self._lu = sla.splu(sp.csc_matrix(a))
        self._v_ref = v.copy()
        self.factorizations += 1

    def step(self, psi: np.ndarray, v: np.ndarray) -> np.ndarray:
        half = 0.5j * self.dt
        rhs = psi - half * (self.kinetic @ psi + v * psi)
        if self._lu is None or 0.5 * self.dt * np.max(np.abs(v - self._v_ref)) > self.refactor_tol:
            self._factor(v)
        delta = half * (v - self._v_ref)
        x = self._lu.solve(rhs)
        if not np.any(delta):
            return x
        scale = _norm(x)
        for _ in range(self.max_sweeps):
            x_new = self._lu.solve(rhs - delta * x)
            change = _norm(x_new - x)
            x = x_new
            if change <= self.sweep_tol * scale:
                return x
        # contraction too weak for this step: refactor at the exact potential
        self._factor(v)
        return self._lu.solve(rhs)


def propagate(initial: np.ndarray, kinetic: sp.spmatrix, potential_at: Callable[[float], np.ndarray],
              t_final: float, dt: float, *, store_every: int = 10,
              energy_shift: Optional[Callable[[float], float]] = None,
              weight: float = 1.0, norm_tol: float = NORM_TOL,
              refactor_tol: float = 0.03, observer: Optional[Callable] = None,
              keep_states: bool = True) -> WavefunctionTrajectory:
    """Crank-Nicolson evolution with the potential evaluated at step midpoints.

    ``weight`` is the quadrature weight of one grid cell (dx, or dx^2 on the
    product grid) so that stored norms are physical.  ``energy_shift(t)``
    subtracts a scalar reference energy; this only changes the global phase
    of the exact evolution but reduces the propagator's phase error.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if t_final < 0:
        raise DomainError("t_final must be non-negative")
    steps = int(round(t_final / dt))
    if abs(steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise DomainError(f"dt={dt} does not divide t_final={t_final}")
    psi = np.asarray(initial, dtype=complex).copy()
    norm0 = math.sqrt(np.sum(np.abs(psi) ** 2) * weight)
    traj = WavefunctionTrajectory()
    traj.append(0.0, psi, norm0**2, keep_states)
    if observer is not None:
        observer(0.0, psi)
    if steps == 0:
        return traj
    cn = CrankNicolson(kinetic, dt, refactor_tol=refactor_tol)
    for s in range(steps):
        t_mid = (s + 0.5) * dt
        v = np.asarray(potential_at(t_mid), dtype=float)
        if energy_shift is not None:
            v = v - energy_shift(t_mid)
        psi = cn.step(psi, v)
        t = (s + 1) * dt
        if (s + 1) % store_every == 0 or s + 1 == steps:
            norm = np.sum(np.abs(psi) ** 2) * weight
            if abs(math.sqrt(norm) - norm0) > norm_tol * norm0:
                raise StepSizeError(f"norm drift {abs(math.sqrt(norm) - norm0):.3e} at t={t}")
            traj.append(t, psi, norm, keep_states)
            if observer is not None:
                observer(t, psi)
    return traj


def evolve_timedep(initial: np.ndarray, potential_path: Callable[[float], PotentialSamples],
                   t_final: float, dt: float, *, store_every: int = 10,
                   energy_shift: Optional[float] = None) -> WavefunctionTrajectory:
    """Single-particle evolution through a time-dependent potential."""
    grid = potential_path(0.0).grid
    kin = kinetic_operator(grid)
    shift = None if energy_shift is None else (lambda t: energy_shift)
    return propagate(initial, kin, lambda t: potential_path(t).values, t_final, dt,
                     store_every=store_every, energy_shift=shift, weight=grid.dx)


def static_path(samples: PotentialSamples) -> Callable[[float], PotentialSamples]:
    return lambda t: samples


def reversed_path(path: Callable[[float], PotentialSamples], t_final: float):
    return lambda t: path(t_final - t)


def crossing_times(times: np.ndarray, values: np.ndarray, level: float) -> np.ndarray:
    """Linearly interpolated times at which ``values`` crosses ``level``."""
    times = np.asarray(times)
    f = np.asarray(values) - level
    idx = np.nonzero(np.signbit(f[:-1]) != np.signbit(f[1:]))[0]
    t0, t1 = times[idx], times[idx + 1]
    f0, f1 = f[idx], f[idx + 1]
    return t0 - f0 * (t1 - t0) / (f1 - f0)


def period_from_population(times: np.ndarray, populations: np.ndarray) -> float:
    """Oscillation period from the spacing of successive half-population crossings."""
    mid = 0.5 * (np.max(populations) + np.min(populations))
    ts = crossing_times(times, populations, mid)
    if len(ts) < 2:
        raise DomainError("need at least two crossings to extract a period")
    return 2.0 * float(np.mean(np.diff(ts)))


def write_trajectory_csv(path, trajectory: WavefunctionTrajectory, grid: Grid) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "norm", "left_population"])
        for t, psi, norm in zip(trajectory.times, trajectory.states, trajectory.norms):
            w.writerow([repr(float(t)), repr(float(norm)), repr(left_population(psi, grid))])
