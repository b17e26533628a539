"""Spin x space composite states of two spin-1/2 particles in a double well.

A composite is stored as a 4x4 complex coefficient matrix: rows index the
spatial functions (LL, Psi+, RR, Psi-) built from the localized orbitals,
columns index the spin product basis (uu, ud, du, dd).  Both row and column
bases are orthonormal, so inner products are Frobenius products of the
coefficient matrices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError
from .twobody import TwoBodyState

SPATIAL_LABELS = ("LL", "Psi+", "RR", "Psi-")
SPATIAL_SYMMETRY = np.array([1, 1, 1, -1])
SPIN_PRODUCT_LABELS = ("uu", "ud", "du", "dd")
QUBIT_LABELS = ("00", "01", "10", "11")

_R = 1 / math.sqrt(2)

# spatial label swap is diagonal in the (LL, Psi+, RR, Psi-) basis
_SPACE_SWAP = np.diag(SPATIAL_SYMMETRY).astype(complex)
_SPIN_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class SpinWavefunction:
    amplitudes: np.ndarray = field(repr=False)  # over uu, ud, du, dd
    label: str = ""

    @property
    def exchange_symmetry(self) -> str:
        swapped = _SPIN_SWAP @ self.amplitudes
        if np.allclose(swapped, self.amplitudes, atol=1e-12):
            return "symmetric"
        if np.allclose(swapped, -self.amplitudes, atol=1e-12):
            return "antisymmetric"
        return "none"


UP_UP = SpinWavefunction(np.array([1, 0, 0, 0], dtype=complex), "uu")
DOWN_DOWN = SpinWavefunction(np.array([0, 0, 0, 1], dtype=complex), "dd")
CHI_PLUS = SpinWavefunction(np.array([0, _R, _R, 0], dtype=complex), "chi+")
CHI_MINUS = SpinWavefunction(np.array([0, _R, -_R, 0], dtype=complex), "chi-")
SYMMETRIC_SPINS = (UP_UP, CHI_PLUS, DOWN_DOWN)
ANTISYMMETRIC_SPINS = (CHI_MINUS,)
SPIN_BY_LABEL = {s.label: s for s in (UP_UP, CHI_PLUS, DOWN_DOWN, CHI_MINUS)}


@dataclass(frozen=True)
class QubitState:
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise DomainError("qubit state must be normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, label: str) -> "QubitState":
        v = np.zeros(4, dtype=complex)
        v[QUBIT_LABELS.index(label)] = 1
        return cls(v)

    def to_json(self) -> str:
        return json.dumps({"amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes]})

    @classmethod
    def from_json(cls, text: str) -> "QubitState":
        data = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in data["amplitudes"]]))


@dataclass(frozen=True)
class CompositeState:
    """sum over (spatial label, spin product) of coeffs[row, col]."""

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).reshape(4, 4))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[str, SpinWavefunction, complex]]) -> "CompositeState":
        c = np.zeros((4, 4), dtype=complex)
        for space, spin, coef in terms:
            c[SPATIAL_LABELS.index(space)] += coef * spin.amplitudes
        return cls(c)

    @property
    def terms(self) -> list[tuple[str, SpinWavefunction, complex]]:
        """Expansion over spatial label x {uu, chi+, dd, chi-}."""
        out = []
        for r, space in enumerate(SPATIAL_LABELS):
            for spin in (UP_UP, CHI_PLUS, DOWN_DOWN, CHI_MINUS):
                amp = np.vdot(spin.amplitudes, self.coeffs[r])
                if abs(amp) > 1e-14:
                    out.append((space, spin, complex(amp)))
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "CompositeState") -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))

    def swapped(self) -> "CompositeState":
        """Exchange particle labels in both space and spin."""
        return CompositeState(_SPACE_SWAP @ self.coeffs @ _SPIN_SWAP.T)

    def __add__(self, other):
        return CompositeState(self.coeffs + other.coeffs)

    def __mul__(self, scalar):
        return CompositeState(self.coeffs * scalar)

    __rmul__ = __mul__

    def __str__(self):
        parts = []
        for space, spin, amp in self.terms:
            parts.append(f"({amp.real:+.6g}{amp.imag:+.6g}j) {space}|{spin.label}>")
        return " ".join(parts) if parts else "0"

    def realize(self, fields: dict) -> np.ndarray:
        """Grid amplitudes of shape (n, n, 4) given concrete spatial fields per label."""
        out = 0
        for r, label in enumerate(SPATIAL_LABELS):
            if np.any(self.coeffs[r]):
                f = fields[label].amplitudes if isinstance(fields[label], TwoBodyState) else fields[label]
                out = out + f[:, :, None] * self.coeffs[r][None, None, :]
        return out


def _is_fermionic(c: CompositeState) -> bool:
    return np.allclose(c.swapped().coeffs, -c.coeffs, atol=1e-12)


def fermion_basis() -> list[CompositeState]:
    """The six overall-antisymmetric states: Psi- x symmetric spin, symmetric space x chi-."""
    states = [CompositeState.from_terms([("Psi-", s, 1)]) for s in SYMMETRIC_SPINS]
    states += [CompositeState.from_terms([(sp, CHI_MINUS, 1)]) for sp in ("LL", "Psi+", "RR")]
    return states


def boson_basis() -> list[CompositeState]:
    """The ten overall-symmetric states: (S,S) nine and (A,A) one."""
    states = [CompositeState.from_terms([(sp, s, 1)])
              for sp in ("LL", "Psi+", "RR") for s in SYMMETRIC_SPINS]
    states.append(CompositeState.from_terms([("Psi-", CHI_MINUS, 1)]))
    return states


def computational_basis() -> list[CompositeState]:
    """|00>, |01>, |10>, |11> as fermionic composites."""
    return [
        CompositeState.from_terms([("Psi-", UP_UP, 1)]),
        CompositeState.from_terms([("Psi-", CHI_PLUS, _R), ("Psi+", CHI_MINUS, _R)]),
        CompositeState.from_terms([("Psi-", CHI_PLUS, _R), ("Psi+", CHI_MINUS, -_R)]),
        CompositeState.from_terms([("Psi-", DOWN_DOWN, 1)]),
    ]


_COMPUTATIONAL = computational_basis()


def encode_computational(q: QubitState) -> CompositeState:
    c = np.zeros((4, 4), dtype=complex)
    for amp, b in zip(q.amplitudes, _COMPUTATIONAL):
        c += amp * b.coeffs
    return CompositeState(c)


def decode_to_computational(c: CompositeState) -> tuple[np.ndarray, float]:
    """Qubit amplitudes and the norm of the part outside the computational subspace.

    The amplitudes are returned unnormalized so that leakage stays visible.
    """
    amps = np.array([b.inner(c) for b in _COMPUTATIONAL])
    rest = c.coeffs - sum(a * b.coeffs for a, b in zip(amps, _COMPUTATIONAL))
    return amps, float(np.linalg.norm(rest))


def encoding_matrix() -> np.ndarray:
    """16 x 4 isometry taking qubit amplitudes to flattened composite coefficients."""
    return np.array([b.coeffs.ravel() for b in _COMPUTATIONAL]).T


def spatial_fields(left: np.ndarray, right: np.ndarray, grid) -> dict:
    """Concrete (LL, Psi+, RR, Psi-) fields from the localized orbitals."""
    ll = np.outer(left, left)
    rr = np.outer(right, right)
    lr = np.outer(left, right)
    rl = np.outer(right, left)
    return {
        "LL": TwoBodyState(ll.astype(complex), grid, "symmetric"),
        "Psi+": TwoBodyState(((lr + rl) * _R).astype(complex), grid, "symmetric"),
        "RR": TwoBodyState(rr.astype(complex), grid, "symmetric"),
        "Psi-": TwoBodyState(((lr - rl) * _R).astype(complex), grid, "antisymmetric"),
    }


def decompose(amplitudes: np.ndarray, fields: dict, grid) -> tuple[CompositeState, float]:
    """Project grid amplitudes of shape (n, n, 4) onto the symbolic basis.

    Returns the composite and the norm of the remainder on the grid.
    """
    w = grid.dx**2
    c = np.zeros((4, 4), dtype=complex)
    for r, label in enumerate(SPATIAL_LABELS):
        f = fields[label].amplitudes
        c[r] = np.einsum("ij,ijs->s", f.conj(), amplitudes) * w
    comp = CompositeState(c)
    rest = amplitudes - comp.realize(fields)
    return comp, float(math.sqrt(np.sum(np.abs(rest) ** 2) * w))
