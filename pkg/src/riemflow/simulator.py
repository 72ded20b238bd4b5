"""Dense statevector simulation.

Pauli words act through their bitmasks; no dense matrices are formed on
the gate path.  Dense matrices are used only for the exact flow and for
perturbations, through :func:`expm_skew_hermitian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .pauli import DENSE_MAX_QUBITS, PauliSum, PauliWord, SizeGuardError

NORM_TOL = 1e-10
_PHASES = (1, 1j, -1, -1j)
EXACT_FLOW_MAX_QUBITS = 8


class StateVector:
    """Normalized pure state on ``n_qubits`` qubits (qubit 0 = most significant bit)."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes, n_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        n = dim.bit_length() - 1
        if dim < 2 or (1 << n) != dim:
            raise ValueError("state length must be a power of two >= 2")
        if n_qubits is not None and n_qubits != n:
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {dim}")
        self.amplitudes = amps
        self.n_qubits = n

    @classmethod
    def normalized(cls, amplitudes) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(amps / np.linalg.norm(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy())

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits}, amplitudes={self.amplitudes!r})"


# --- gates -----------------------------------------------------------------

@dataclass(frozen=True)
class Hadamard:
    wire: int


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


@dataclass(frozen=True)
class RX:
    wire: int
    angle: float


@dataclass(frozen=True)
class RY:
    wire: int
    angle: float


@dataclass(frozen=True)
class RZ:
    wire: int
    angle: float


@dataclass(frozen=True)
class PauliRotation:
    """``exp(-i * angle * word / 2)``."""

    word: PauliWord
    angle: float


Gate = Union[Hadamard, CNOT, RX, RY, RZ, PauliRotation]
_AXIS_GATES = {RX: "X", RY: "Y", RZ: "Z"}


def init_zero_state(n_qubits: int) -> StateVector:
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if n_qubits > DENSE_MAX_QUBITS:
        raise SizeGuardError(f"{n_qubits} qubits exceeds the statevector limit of {DENSE_MAX_QUBITS}")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps)


@lru_cache(maxsize=4096)
def _pauli_action(word: PauliWord) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << word.n_qubits, dtype=np.int64)
    src = idx ^ word.x_mask
    # P|i> = i^y (-1)^{|i & z|} |i ^ x>, so (P psi)[j] = i^y (-1)^{|(j^x) & z|} psi[j^x]
    signs = 1 - 2 * (np.bitwise_count(src & word.z_mask).astype(np.int64) & 1)
    factors = _PHASES[word.y_count % 4] * signs.astype(complex)
    src.setflags(write=False)
    factors.setflags(write=False)
    return src, factors


def apply_pauli(word: PauliWord, amplitudes: np.ndarray) -> np.ndarray:
    """Return ``word @ amplitudes`` using the bitmask action."""
    src, factors = _pauli_action(word)
    return factors * amplitudes[src]


def _check_wire(wire: int, n_qubits: int) -> None:
    if not 0 <= wire < n_qubits:
        raise ValueError(f"wire {wire} out of range for {n_qubits} qubits")


def _rotate(amplitudes: np.ndarray, word: PauliWord, angle: float) -> np.ndarray:
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    half = 0.5 * angle
    return math.cos(half) * amplitudes - 1j * math.sin(half) * apply_pauli(word, amplitudes)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    n = state.n_qubits
    amps = state.amplitudes
    if isinstance(gate, PauliRotation):
        if gate.word.n_qubits != n:
            raise ValueError("rotation word has the wrong qubit count")
        return StateVector(_rotate(amps, gate.word, gate.angle))
    if type(gate) in _AXIS_GATES:
        _check_wire(gate.wire, n)
        word = PauliWord.from_letters(n, {gate.wire: _AXIS_GATES[type(gate)]})
        return StateVector(_rotate(amps, word, gate.angle))
    tensor = amps.reshape((2,) * n)
    if isinstance(gate, Hadamard):
        _check_wire(gate.wire, n)
        t = np.moveaxis(tensor, gate.wire, 0)
        out = np.stack([t[0] + t[1], t[0] - t[1]]) / math.sqrt(2)
        return StateVector(np.moveaxis(out, 0, gate.wire).reshape(-1))
    if isinstance(gate, CNOT):
        _check_wire(gate.control, n)
        _check_wire(gate.target, n)
        if gate.control == gate.target:
            raise ValueError("CNOT control and target must differ")
        out = tensor.copy()
        sel = [slice(None)] * n
        sel[gate.control] = 1
        sel = tuple(sel)
        target_axis = gate.target - (gate.target > gate.control)
        out[sel] = np.flip(tensor[sel], axis=target_axis)
        return StateVector(out.reshape(-1))
    raise TypeError(f"unsupported gate {gate!r}")


def apply_gates(state: StateVector, gates) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


# --- expectation values ----------------------------------------------------

def _check_match(state: StateVector, h: PauliSum) -> None:
    if state.n_qubits != h.n_qubits:
        raise ValueError(f"qubit count mismatch: state {state.n_qubits}, operator {h.n_qubits}")


def word_expectation(amplitudes: np.ndarray, word: PauliWord) -> float:
    return float(np.vdot(amplitudes, apply_pauli(word, amplitudes)).real)


def apply_pauli_sum(h: PauliSum, amplitudes: np.ndarray) -> np.ndarray:
    out = np.zeros_like(amplitudes)
    for t in h.terms:
        out += t.coefficient * apply_pauli(t.word, amplitudes)
    return out


def expectation(state: StateVector, h: PauliSum) -> float:
    _check_match(state, h)
    amps = state.amplitudes
    return float(sum(t.coefficient * word_expectation(amps, t.word) for t in h.terms))


def expectation_sampled(state: StateVector, h: PauliSum, shots: int, rng_seed=None) -> float:
    """Shot-noise estimate of ``<h>``.

    Each term is measured in its own eigenbasis with ``shots`` repetitions;
    the number of +1 outcomes is binomial with ``p = (1 + <P>) / 2``.
    """
    _check_match(state, h)
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    amps = state.amplitudes
    total = 0.0
    for t in h.terms:
        if t.word.is_identity:
            total += t.coefficient
            continue
        p_plus = min(max(0.5 * (1.0 + word_expectation(amps, t.word)), 0.0), 1.0)
        n_plus = rng.binomial(shots, p_plus)
        total += t.coefficient * (2.0 * n_plus - shots) / shots
    return float(total)


# --- dense unitaries -------------------------------------------------------

def expm_skew_hermitian(omega: np.ndarray) -> np.ndarray:
    """``exp(omega)`` for skew-Hermitian ``omega`` via the eigenbasis of ``-i omega``."""
    omega = np.asarray(omega, dtype=complex)
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise ValueError("expected a square matrix")
    dim = omega.shape[0]
    if dim > 1 << DENSE_MAX_QUBITS:
        raise SizeGuardError("matrix exceeds the dense size guard")
    if np.max(np.abs(omega + omega.conj().T), initial=0.0) >= NORM_TOL:
        raise ValueError("matrix is not skew-Hermitian")
    a = -1j * omega
    a = 0.5 * (a + a.conj().T)
    lam, v = np.linalg.eigh(a)
    return (v * np.exp(1j * lam)) @ v.conj().T


def apply_dense_unitary(state: StateVector, u: np.ndarray) -> StateVector:
    u = np.asarray(u)
    if u.shape != (state.amplitudes.size,) * 2:
        raise ValueError(f"unitary of shape {u.shape} does not match {state.n_qubits} qubits")
    out = u @ state.amplitudes
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"unitarity drift: output norm {norm!r}")
    return StateVector(out / norm)
