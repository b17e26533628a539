"""Two interacting particles on the (x1, x2) product grid.

The two-body Hamiltonian is the Kronecker sum of two single-particle
operators plus a contact term a * delta(x1 - x2), discretized as a/dx on the
coincident points.  Because the operator commutes with particle exchange it
is diagonalized separately in the symmetric and antisymmetric sectors, which
gives every eigenstate a definite exchange symmetry by construction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .core import Grid, PotentialSamples
from .dynamics import kinetic_operator
from .eigensolver import EVEN, NONE, ODD, Eigenstate, assemble_hamiltonian
from .errors import (ConvergenceError, DomainError, GridMismatchError, SizeCapError,
                     ZeroNormError)

SYMMETRIC, ANTISYMMETRIC = "symmetric", "antisymmetric"
MAX_POINTS = 128
DENSE_MAX_POINTS = 64
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class ContactInteraction:
    """a * delta(x1 - x2); a > 0 is repulsive."""

    a: float

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise DomainError("interaction strength must be finite")


@dataclass(frozen=True)
class GaussianInteraction:
    """Finite-range a * exp(-(x1-x2)^2 / 2 sigma^2) / (sigma sqrt(2 pi)); tends to contact as sigma -> 0."""

    a: float
    sigma: float

    def kernel(self, grid: Grid) -> np.ndarray:
        x = grid.points
        r = x[:, None] - x[None, :]
        return self.a * np.exp(-0.5 * (r / self.sigma) ** 2) / (self.sigma * math.sqrt(2 * math.pi))


Interaction = Union[ContactInteraction, GaussianInteraction]


@dataclass(frozen=True)
class TwoBodyState:
    amplitudes: np.ndarray = field(repr=False)
    grid: Grid
    exchange_symmetry: str = NONE
    parity: str = NONE
    energy: Optional[float] = None

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx**2)

    def overlap(self, other: "TwoBodyState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.dx**2)


@dataclass(frozen=True)
class PerturbationResult:
    E_low: float
    E_high: float
    J: float
    K: float
    eigvec_low: np.ndarray = field(repr=False)
    eigvec_high: np.ndarray = field(repr=False)
    E_unperturbed: float = 0.0


# -- orbital integrals --------------------------------------------------------

def _orbital(state, grid: Optional[Grid] = None) -> tuple[np.ndarray, Grid]:
    if isinstance(state, Eigenstate):
        if state.grid is None and grid is None:
            raise DomainError("eigenstate carries no grid")
        if grid is not None and state.grid is not None and state.grid != grid:
            raise GridMismatchError("orbital lives on a different grid")
        return state.amplitudes, state.grid if state.grid is not None else grid
    if grid is None:
        raise DomainError("a grid is required for bare amplitude arrays")
    return np.asarray(state), grid


def _pair(psi_a, psi_b, grid=None):
    a, ga = _orbital(psi_a, grid)
    b, gb = _orbital(psi_b, grid)
    if ga != gb or a.shape != b.shape:
        raise GridMismatchError("orbitals live on different grids")
    return a, b, ga


def direct_integral(psi_a, psi_b, interaction: Interaction, grid: Optional[Grid] = None) -> float:
    """J = <ab|V|ab>: interaction averaged over the product density |psi_a|^2 |psi_b|^2."""
    a, b, g = _pair(psi_a, psi_b, grid)
    if isinstance(interaction, ContactInteraction):
        return float(interaction.a * np.sum(np.abs(a) ** 2 * np.abs(b) ** 2) * g.dx)
    w = interaction.kernel(g)
    return float(np.real(np.abs(a) ** 2 @ w @ np.abs(b) ** 2) * g.dx**2)


def exchange_integral(psi_a, psi_b, interaction: Interaction, grid: Optional[Grid] = None) -> float:
    """K = <ab|V|ba>, real for a Hermitian interaction."""
    a, b, g = _pair(psi_a, psi_b, grid)
    if isinstance(interaction, ContactInteraction):
        return float(np.real(interaction.a * np.sum(np.conj(a) * np.conj(b) * b * a) * g.dx))
    w = interaction.kernel(g)
    return float(np.real((np.conj(a) * b) @ w @ (np.conj(b) * a)) * g.dx**2)


def ground_shift(psi_g, interaction: Interaction, grid: Optional[Grid] = None) -> float:
    """First-order shift of the doubly occupied ground orbital."""
    return direct_integral(psi_g, psi_g, interaction, grid)


def onsite_energy(localized, interaction: Interaction, grid: Optional[Grid] = None) -> float:
    """U = a * integral |psi|^4 for a well-localized orbital."""
    return direct_integral(localized, localized, interaction, grid)


def degenerate_pt(psi_g: Eigenstate, psi_e: Eigenstate, interaction: Interaction) -> PerturbationResult:
    """First-order perturbation of the pair energy E_g + E_e in the {|ge>, |eg>} subspace."""
    J = direct_integral(psi_g, psi_e, interaction)
    K = exchange_integral(psi_g, psi_e, interaction)
    e0 = psi_g.energy + psi_e.energy
    anti = np.array([1.0, -1.0]) / math.sqrt(2)
    sym = np.array([1.0, 1.0]) / math.sqrt(2)
    if K >= 0:
        return PerturbationResult(e0 + J - K, e0 + J + K, J, K, anti, sym, e0)
    return PerturbationResult(e0 + J + K, e0 + J - K, J, K, sym, anti, e0)


# -- product-grid operators ---------------------------------------------------

def product_state(u: np.ndarray, v: np.ndarray, grid: Grid) -> TwoBodyState:
    """|uv>: particle 1 in u, particle 2 in v."""
    return TwoBodyState(np.outer(u, v).astype(complex), grid)


def swap_permutation(n: int) -> sp.csr_matrix:
    idx = np.arange(n * n)
    i, j = divmod(idx, n)
    return sp.csr_matrix((np.ones(n * n), (j * n + i, idx)), shape=(n * n, n * n))


def sector_basis(n: int, sign: int) -> sp.csr_matrix:
    """Orthonormal columns spanning the exchange-symmetric (+1) or antisymmetric (-1) subspace."""
    i, j = np.triu_indices(n, k=0 if sign > 0 else 1)
    m = len(i)
    cols = np.arange(m)
    off = i != j
    r = math.sqrt(0.5)
    rows = np.concatenate([i * n + j, (j * n + i)[off]])
    cc = np.concatenate([cols, cols[off]])
    vals = np.concatenate([np.where(off, r, 1.0), np.full(off.sum(), sign * r)])
    return sp.csr_matrix((vals, (rows, cc)), shape=(n * n, m))


def _sector_pairs(n: int, sign: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=0 if sign > 0 else 1)


@dataclass(frozen=True)
class Sector:
    """The two-body problem restricted to one exchange sector."""

    sign: int
    grid: Grid
    basis: sp.csr_matrix = field(repr=False)
    kinetic: sp.csr_matrix = field(repr=False)
    potential: np.ndarray = field(repr=False)
    barrier_mask: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> sp.csr_matrix:
        return (self.kinetic + sp.diags(self.potential)).tocsr()

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def to_field(self, v: np.ndarray) -> np.ndarray:
        n = self.grid.n
        return (self.basis @ v).reshape(n, n) / self.grid.dx

    def from_field(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.basis.T @ np.asarray(amplitudes).ravel() * self.grid.dx


@dataclass(frozen=True)
class TwoBodyHamiltonian:
    samples: PotentialSamples
    interaction: ContactInteraction
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def grid(self) -> Grid:
        return self.samples.grid

    @cached_property
    def _kinetic_1d(self) -> sp.csr_matrix:
        return kinetic_operator(self.grid).tocsr()

    def sector(self, sign: int, barrier: Optional[np.ndarray] = None) -> Sector:
        """Restriction to one exchange sector.

        ``barrier`` is an optional single-particle profile whose two-body
        diagonal (b_i + b_j) is returned as ``barrier_mask`` for ramps.
        """
        n = self.grid.n
        p = sector_basis(n, sign)
        t1 = self._kinetic_1d
        eye = sp.identity(n, format="csr")
        kin = (p.T @ (sp.kron(t1, eye) + sp.kron(eye, t1)) @ p).tocsr()
        i, j = _sector_pairs(n, sign)
        v = self.samples.values
        pot = v[i] + v[j] + np.where(i == j, self.interaction.a / self.grid.dx, 0.0)
        mask = np.zeros_like(pot) if barrier is None else barrier[i] + barrier[j]
        return Sector(sign, self.grid, p, kin, pot, mask)


def build_two_body_hamiltonian(samples: PotentialSamples, interaction: ContactInteraction,
                               max_points: int = MAX_POINTS) -> TwoBodyHamiltonian:
    n = samples.grid.n
    if n > max_points:
        raise SizeCapError(f"product grid with n={n} exceeds the cap n <= {max_points}")
    h1 = assemble_hamiltonian(samples).to_sparse()
    eye = sp.identity(n, format="csr")
    contact = interaction.a / samples.grid.dx * np.eye(n).ravel()
    h = sp.kron(h1, eye) + sp.kron(eye, h1) + sp.diags(contact)
    return TwoBodyHamiltonian(samples, interaction, h.tocsr())


def _parity_field(f: np.ndarray) -> np.ndarray:
    return f[::-1, ::-1]


def classify_two_body_parity(amplitudes: np.ndarray, tol: float = 1e-6) -> str:
    scale = np.max(np.abs(amplitudes))
    mirror = _parity_field(amplitudes)
    if np.max(np.abs(amplitudes - mirror)) <= tol * scale:
        return EVEN
    if np.max(np.abs(amplitudes + mirror)) <= tol * scale:
        return ODD
    return NONE


def _fix_sign(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    idx = int(np.argmax(mags > 1e-3 * mags.max()))
    return v * np.sign(v[idx])


def solve_sector(sector: Sector, k: int, dense_max_points: int = DENSE_MAX_POINTS
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs (energies, sector vectors) of one exchange sector."""
    h = sector.matrix
    k = min(k, sector.dim)
    if sector.grid.n <= dense_max_points:
        try:
            e, v = la.eigh(h.toarray(), subset_by_index=[0, k - 1])
        except la.LinAlgError as exc:
            raise ConvergenceError(f"dense two-body solve failed: {exc}") from exc
    else:
        # every eigenvalue exceeds the smallest diagonal potential entry
        sigma = float(np.min(sector.potential)) - 1.0
        try:
            e, v = sla.eigsh(h.tocsc(), k=k, sigma=sigma, which="LM", tol=0)
        except sla.ArpackError as exc:
            raise ConvergenceError(f"sparse two-body solve failed: {exc}") from exc
        order = np.argsort(e)
        e, v = e[order], v[:, order]
    residual = float(np.max(np.linalg.norm(h @ v - v * e, axis=0)))
    if residual > 1e-7 * max(1.0, float(np.max(np.abs(e)))):
        raise ConvergenceError("two-body eigenpairs did not converge", residual)
    return e, v


def _cluster_parity_projection(sector: Sector, e: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Within near-degenerate clusters, rotate eigenvectors onto definite parity."""
    v = v.copy()
    i = 0
    while i < len(e):
        j = i + 1
        while j < len(e) and e[j] - e[i] < DEGENERACY_TOL * max(1.0, abs(e[i])):
            j += 1
        if j - i > 1:
            fields = [sector.to_field(v[:, c]) for c in range(i, j)]
            projected = []
            for f in fields:
                for s in (1, -1):
                    p = f + s * _parity_field(f)
                    projected.append(sector.from_field(p))
            q, r = np.linalg.qr(np.array(projected).T)
            keep = np.abs(np.diag(r)) > 1e-8
            basis = q[:, keep][:, : j - i]
            v[:, i:j] = basis
        i = j
    return v


def solve_two_body_lowest(hamiltonian: TwoBodyHamiltonian, k: int,
                          dense_max_points: int = DENSE_MAX_POINTS) -> list[tuple[float, TwoBodyState]]:
    """Lowest ``k`` two-body levels with exchange-symmetry and parity labels."""
    if not 1 <= k <= 12:
        raise DomainError("k must lie in [1, 12]")
    out = []
    for sign, label in ((1, SYMMETRIC), (-1, ANTISYMMETRIC)):
        out.extend(sector_states(hamiltonian.sector(sign), k, label, dense_max_points))
    out.sort(key=lambda pair: pair[0])
    return out[:k]


def sector_states(sector: Sector, k: int, label: Optional[str] = None,
                  dense_max_points: int = DENSE_MAX_POINTS) -> list[tuple[float, TwoBodyState]]:
    label = label or (SYMMETRIC if sector.sign > 0 else ANTISYMMETRIC)
    e, v = solve_sector(sector, k, dense_max_points)
    v = _cluster_parity_projection(sector, e, v)
    states = []
    for c in range(len(e)):
        vec = _fix_sign(v[:, c])
        amps = sector.to_field(vec)
        states.append((float(e[c]), TwoBodyState(
            amps.astype(complex), sector.grid, label, classify_two_body_parity(amps), float(e[c]))))
    return states


def symmetry_project(state: TwoBodyState, sign: int) -> TwoBodyState:
    """(Psi(x1,x2) +- Psi(x2,x1)), renormalized."""
    f = state.amplitudes
    p = f + sign * f.T
    nrm = math.sqrt(np.sum(np.abs(p) ** 2) * state.grid.dx**2)
    ref = math.sqrt(max(state.norm(), 1e-300))
    if nrm <= 1e-10 * ref:
        raise ZeroNormError("projection annihilates the state")
    return TwoBodyState(p / nrm, state.grid, SYMMETRIC if sign > 0 else ANTISYMMETRIC,
                        state.parity, state.energy)


def exchange_symmetry(amplitudes: np.ndarray, tol: float = 1e-8) -> str:
    scale = np.max(np.abs(amplitudes))
    if np.max(np.abs(amplitudes - amplitudes.T)) <= tol * scale:
        return SYMMETRIC
    if np.max(np.abs(amplitudes + amplitudes.T)) <= tol * scale:
        return ANTISYMMETRIC
    return NONE


def spectrum_to_json(levels: list[tuple[float, TwoBodyState]], labels: Optional[list] = None) -> str:
    labels = labels or [None] * len(levels)
    rows = [{"energy": e, "symmetry": s.exchange_symmetry, "parity": s.parity, "label": lab}
            for (e, s), lab in zip(levels, labels)]
    return json.dumps(rows, indent=2)
