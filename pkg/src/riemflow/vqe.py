"""Parameter-shift gradient descent baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .oracle import GroundTruth, residual
from .pauli import PauliSum, PauliWord
from .simulator import (
    CNOT,
    RX,
    RY,
    RZ,
    Gate,
    Hadamard,
    PauliRotation,
    StateVector,
    apply_gate,
    expectation,
    init_zero_state,
)

GRAD_STOP = 1e-8
_PARAM_KINDS = ("RX", "RY", "RZ", "PauliRotation")


@dataclass(frozen=True)
class ParamGate:
    """Rotation whose angle is ``params[index]``; ``target`` is a wire or a Pauli word."""

    kind: str
    target: int | PauliWord
    index: int

    def __post_init__(self):
        if self.kind not in _PARAM_KINDS:
            # every generator must square to the identity for the shift rule
            raise ValueError(f"parameterized gate kind must be one of {_PARAM_KINDS}, got {self.kind!r}")
        if (self.kind == "PauliRotation") != isinstance(self.target, PauliWord):
            raise ValueError("PauliRotation takes a word; RX/RY/RZ take a wire")

    def bind(self, angle: float) -> Gate:
        if self.kind == "PauliRotation":
            return PauliRotation(self.target, angle)
        return {"RX": RX, "RY": RY, "RZ": RZ}[self.kind](self.target, angle)


CircuitOp = Union[Gate, ParamGate]


@dataclass(frozen=True)
class ParamCircuit:
    n_qubits: int
    ops: tuple[CircuitOp, ...]
    n_params: int

    def __post_init__(self):
        used = {op.index for op in self.ops if isinstance(op, ParamGate)}
        if any(not 0 <= i < self.n_params for i in used):
            raise ValueError("parameter index out of range")
        if used != set(range(self.n_params)):
            raise ValueError("every parameter must be used by at least one gate")

    def bound_gates(self, params: Sequence[float], shift: tuple[int, float] | None = None) -> list[Gate]:
        """Concrete gates; ``shift=(k, delta)`` offsets only the ``k``-th op's angle."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {params.shape}")
        gates = []
        for pos, op in enumerate(self.ops):
            if isinstance(op, ParamGate):
                angle = float(params[op.index])
                if shift is not None and shift[0] == pos:
                    angle += shift[1]
                gates.append(op.bind(angle))
            else:
                gates.append(op)
        return gates

    def state(self, params: Sequence[float], shift: tuple[int, float] | None = None) -> StateVector:
        state = init_zero_state(self.n_qubits)
        for g in self.bound_gates(params, shift):
            state = apply_gate(state, g)
        return state

    def energy(self, params: Sequence[float], h: PauliSum) -> float:
        return expectation(self.state(params), h)


def template_fig3() -> ParamCircuit:
    """Two-qubit circuit H⊗H, RZ(a)⊗RZ(a), CNOT(0→1), RZ(b)⊗RZ(b) with shared a, b."""
    ops = (
        Hadamard(0), Hadamard(1),
        ParamGate("RZ", 0, 0), ParamGate("RZ", 1, 0),
        CNOT(0, 1),
        ParamGate("RZ", 0, 1), ParamGate("RZ", 1, 1),
    )
    return ParamCircuit(2, ops, 2)


def template_hva_tfim(n_qubits: int, n_layers: int, prepare: bool = False) -> ParamCircuit:
    """Hamiltonian variational ansatz for the periodic Ising ring.

    Each layer is a shared ``ZZ`` rotation over all ring edges followed by a
    shared ``RX`` on every wire.  ``prepare`` prefixes the Hadamard layer
    that maps ``|0...0>`` to ``|+...+>``.
    """
    if n_qubits < 2 or n_qubits % 2:
        raise ValueError("the HVA template needs an even number of qubits >= 2")
    if n_layers < 1:
        raise ValueError("n_layers must be positive")
    ops: list[CircuitOp] = [Hadamard(q) for q in range(n_qubits)] if prepare else []
    edges = sorted({tuple(sorted((i, (i + 1) % n_qubits))) for i in range(n_qubits)})
    for layer in range(n_layers):
        for i, j in edges:
            ops.append(ParamGate("PauliRotation", PauliWord.from_letters(n_qubits, {i: "Z", j: "Z"}), 2 * layer))
        for q in range(n_qubits):
            ops.append(ParamGate("RX", q, 2 * layer + 1))
    return ParamCircuit(n_qubits, tuple(ops), 2 * n_layers)


def parameter_shift_gradient(circuit: ParamCircuit, params: Sequence[float], h: PauliSum) -> np.ndarray:
    """Exact gradient of ``<H>`` by the two-term shift rule, summed over shared parameters."""
    gates = circuit.bound_gates(params)
    grad = np.zeros(circuit.n_params)
    prefix = init_zero_state(circuit.n_qubits)
    for pos, (op, gate) in enumerate(zip(circuit.ops, gates)):
        if isinstance(op, ParamGate):
            angle = float(params[op.index])
            shifted = []
            for delta in (math.pi / 2, -math.pi / 2):
                state = apply_gate(prefix, op.bind(angle + delta))
                for g in gates[pos + 1:]:
                    state = apply_gate(state, g)
                shifted.append(expectation(state, h))
            grad[op.index] += 0.5 * (shifted[0] - shifted[1])
        prefix = apply_gate(prefix, gate)
    return grad


@dataclass
class VqeTrace:
    energies: list[float] = field(default_factory=list)
    params: list[np.ndarray] = field(default_factory=list)
    gradient_norms: list[float] = field(default_factory=list)
    residuals: list[float | None] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.energies)


def vqe_run(
    circuit: ParamCircuit,
    params0: Sequence[float],
    h: PauliSum,
    eps: float,
    max_iters: int,
    oracle: GroundTruth | None = None,
) -> VqeTrace:
    """Plain gradient descent ``theta <- theta - eps * grad``.

    Entry ``k`` of the trace holds the parameters after ``k`` updates and the
    gradient evaluated there.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if circuit.n_qubits != h.n_qubits:
        raise ValueError("circuit and Hamiltonian have different qubit counts")
    theta = np.array(params0, dtype=float)
    trace = VqeTrace()
    for k in range(max_iters + 1):
        energy = circuit.energy(theta, h)
        grad = parameter_shift_gradient(circuit, theta, h)
        gnorm = float(np.linalg.norm(grad))
        trace.energies.append(energy)
        trace.params.append(theta.copy())
        trace.gradient_norms.append(gnorm)
        trace.residuals.append(residual(energy, oracle) if oracle is not None else None)
        if k == max_iters or gnorm < GRAD_STOP:
            break
        theta = theta - eps * grad
    return trace
