"""Exact-diagonalization reference values."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum, PauliWord, SizeGuardError, basis_full, pauli_sum_to_dense, word_to_dense
from .simulator import EXACT_FLOW_MAX_QUBITS, StateVector

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class GroundTruth:
    eigenvalues: np.ndarray
    ground_energy: float
    degeneracy: int
    ground_basis: np.ndarray  # columns are orthonormal ground states
    spectral_norm: float

    @property
    def gap(self) -> float:
        """Distance from the ground level to the next distinct level (0 if none)."""
        rest = self.eigenvalues[self.degeneracy:]
        return float(rest[0] - self.ground_energy) if rest.size else 0.0


def ground_truth(h: PauliSum) -> GroundTruth:
    dense = pauli_sum_to_dense(h)
    lam, vecs = np.linalg.eigh(dense)
    e0 = float(lam[0])
    degeneracy = int(np.count_nonzero(lam <= e0 + DEGENERACY_TOL))
    return GroundTruth(
        eigenvalues=lam,
        ground_energy=e0,
        degeneracy=degeneracy,
        ground_basis=vecs[:, :degeneracy],
        spectral_norm=float(max(abs(lam[0]), abs(lam[-1]))),
    )


def residual(energy: float, gt: GroundTruth) -> float:
    """Energy above the ground level, ``energy - E0``."""
    return float(energy - gt.ground_energy)


def ground_space_fidelity(state: StateVector, gt: GroundTruth) -> float:
    if state.amplitudes.size != gt.ground_basis.shape[0]:
        raise ValueError("state dimension does not match the Hamiltonian")
    overlaps = gt.ground_basis.conj().T @ state.amplitudes
    return float(min(np.sum(np.abs(overlaps) ** 2), 1.0))


def dense_commutator(state: StateVector, h: PauliSum) -> np.ndarray:
    """``[rho, H]`` for ``rho = |psi><psi|`` as a dense matrix."""
    psi = state.amplitudes
    rho = np.outer(psi, psi.conj())
    dense = pauli_sum_to_dense(h)
    return rho @ dense - dense @ rho


def gradient_spectrum(state: StateVector, h: PauliSum) -> dict[int, list[tuple[PauliWord, float]]]:
    """Magnitudes of every Pauli component of the Riemannian gradient, keyed by weight.

    The component along ``P`` is ``-i Tr([rho, H] P)``, computed from the
    dense commutator so that it is independent of the Pauli-algebra route.
    """
    n = state.n_qubits
    if n > EXACT_FLOW_MAX_QUBITS:
        raise SizeGuardError(f"{n} qubits exceeds the dense limit of {EXACT_FLOW_MAX_QUBITS}")
    omega = dense_commutator(state, h)
    out: dict[int, list[tuple[PauliWord, float]]] = defaultdict(list)
    for word in basis_full(n):
        # Tr(omega P) = sum_ij omega_ij P_ji
        c = -1j * np.sum(omega * word_to_dense(word).T)
        out[word.weight].append((word, float(abs(c))))
    return {w: out[w] for w in range(1, n + 1)}
