"""Single-particle eigenstates on a Dirichlet grid.

The Hamiltonian -1/2 d^2/dx^2 + V(x) is discretized with the three-point
stencil, giving a symmetric tridiagonal matrix whose lowest eigenpairs are
extracted with LAPACK's tridiagonal routines.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .core import Grid, PotentialSamples
from .errors import ConvergenceError, DomainError

EVEN, ODD, NONE = "even", "odd", "none"
PARITY_TOL = 1e-6
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    grid: Grid
    diagonal: np.ndarray = field(repr=False)
    off_diagonal: np.ndarray = field(repr=False)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out

    def to_sparse(self):
        import scipy.sparse as sp
        return sp.diags([self.off_diagonal, self.diagonal, self.off_diagonal],
                        [-1, 0, 1], format="csr")

    @property
    def potential(self) -> np.ndarray:
        return self.diagonal - 1.0 / self.grid.dx**2


@dataclass(frozen=True)
class Eigenstate:
    energy: float
    amplitudes: np.ndarray = field(repr=False)
    parity: str = NONE
    grid: Optional[Grid] = None

    def norm(self, dx: Optional[float] = None) -> float:
        dx = self.grid.dx if dx is None else dx
        return float(np.sum(np.abs(self.amplitudes) ** 2) * dx)


@dataclass(frozen=True)
class OrbitalPair:
    even: Eigenstate
    odd: Eigenstate
    grid: Grid

    @property
    def splitting(self) -> float:
        return self.odd.energy - self.even.energy


@dataclass(frozen=True)
class LocalizedPair:
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    grid: Grid


def assemble_hamiltonian(samples: PotentialSamples) -> TridiagonalHamiltonian:
    dx = samples.grid.dx
    n = samples.grid.n
    diag = 1.0 / dx**2 + samples.values
    off = np.full(n - 1, -0.5 / dx**2)
    return TridiagonalHamiltonian(samples.grid, diag, off)


def inner(u: np.ndarray, v: np.ndarray, dx: float) -> complex:
    """Trapezoid inner product <u|v>; the Dirichlet endpoints contribute nothing."""
    return np.vdot(u, v) * dx


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component positive."""
    mags = np.abs(v)
    idx = int(np.argmax(mags > 1e-8 * mags.max()))
    phase = v[idx] / mags[idx]
    return v / phase


def classify_parity(amplitudes: np.ndarray, tol: float = PARITY_TOL) -> str:
    """Label a state even/odd by comparing it with its mirror image."""
    psi = np.asarray(amplitudes)
    scale = np.max(np.abs(psi))
    if scale == 0:
        return NONE
    mirror = psi[::-1]
    if np.max(np.abs(psi - mirror)) <= tol * scale:
        return EVEN
    if np.max(np.abs(psi + mirror)) <= tol * scale:
        return ODD
    return NONE


def _parity_cleanup(vectors: np.ndarray, energies: np.ndarray) -> np.ndarray:
    """Replace near-degenerate pairs by their even and odd projections."""
    vectors = vectors.copy()
    k = len(energies)
    i = 0
    while i < k - 1:
        gap = energies[i + 1] - energies[i]
        if gap < DEGENERACY_TOL * max(1.0, abs(energies[i + 1])):
            block = vectors[:, i:i + 2]
            even = block + block[::-1]
            odd = block - block[::-1]
            ce = np.argmax(np.linalg.norm(even, axis=0))
            co = np.argmax(np.linalg.norm(odd, axis=0))
            e = even[:, ce] / np.linalg.norm(even[:, ce])
            o = odd[:, co] / np.linalg.norm(odd[:, co])
            vectors[:, i], vectors[:, i + 1] = e, o
            i += 2
        else:
            i += 1
    return vectors


def solve_lowest(hamiltonian: TridiagonalHamiltonian, k: int) -> list[Eigenstate]:
    """Lowest ``k`` eigenpairs, normalized with sum |psi|^2 dx = 1, sign fixed."""
    n = hamiltonian.grid.n
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    dx = hamiltonian.grid.dx
    try:
        energies, vectors = eigh_tridiagonal(
            hamiltonian.diagonal, hamiltonian.off_diagonal,
            select="i", select_range=(0, k - 1), lapack_driver="stemr")
    except LinAlgError as exc:
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    residual = max(
        float(np.linalg.norm(hamiltonian.matvec(vectors[:, j]) - energies[j] * vectors[:, j]))
        for j in range(k))
    if not np.isfinite(residual) or residual > 1e-6 * max(1.0, float(np.max(np.abs(energies)))):
        raise ConvergenceError("eigenpairs did not converge", residual)

    symmetric = np.allclose(hamiltonian.diagonal, hamiltonian.diagonal[::-1], rtol=1e-12, atol=0)
    if symmetric:
        vectors = _parity_cleanup(vectors, energies)
    states = []
    for j in range(k):
        psi = fix_sign(vectors[:, j]) / math.sqrt(dx)
        parity = classify_parity(psi) if symmetric else NONE
        states.append(Eigenstate(float(energies[j]), psi, parity, hamiltonian.grid))
    return states


def orbital_pair(samples: PotentialSamples) -> OrbitalPair:
    """Lowest even state and lowest odd state of a symmetric well."""
    states = solve_lowest(assemble_hamiltonian(samples), min(4, samples.grid.n))
    even = next((s for s in states if s.parity == EVEN), None)
    odd = next((s for s in states if s.parity == ODD), None)
    if even is None or odd is None:
        raise ConvergenceError("could not identify an even/odd pair in the lowest states")
    return OrbitalPair(even, odd, samples.grid)


def left_probability(psi: np.ndarray, grid: Grid) -> float:
    """Probability in the half-domain left of the center; the central point is split evenly."""
    dens = np.abs(psi) ** 2
    d = grid.offsets
    weight = np.where(d < 0, 1.0, np.where(d == 0, 0.5, 0.0))
    return float(np.sum(weight * dens) * grid.dx)


def localized_pair(pair: OrbitalPair) -> LocalizedPair:
    """|L> = (phi + phi~)/sqrt 2 and |R> = (phi - phi~)/sqrt 2, labeled by left-half weight."""
    phi, phit = pair.even.amplitudes, pair.odd.amplitudes
    left = (phi + phit) / math.sqrt(2)
    right = (phi - phit) / math.sqrt(2)
    if left_probability(left, pair.grid) < 0.5:
        left, right = right, left
    return LocalizedPair(left, right, pair.grid)


def tunneling_rate(pair: OrbitalPair, hbar: float = 1.0) -> float:
    return max(pair.splitting, 0.0) / hbar


def write_eigenstate_csv(path, state: Eigenstate, grid: Grid) -> None:
    """Columns x, psi; a leading comment row carries the energy and parity."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"# energy={state.energy!r}", f"parity={state.parity}"])
        w.writerow(["x", "psi"])
        for x, v in zip(grid.points, state.amplitudes):
            w.writerow([repr(float(x)), repr(float(v))])


def read_eigenstate_csv(path) -> tuple[np.ndarray, Eigenstate]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    energy = float(rows[0][0].split("=", 1)[1])
    parity = rows[0][1].split("=", 1)[1]
    data = np.array([[float(v) for v in r] for r in rows[2:]])
    return data[:, 0], Eigenstate(energy, data[:, 1], parity)
