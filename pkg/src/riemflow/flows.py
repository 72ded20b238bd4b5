"""Riemannian gradient flows on the special unitary group.

Conventions used throughout:

* the coefficient of a Pauli word ``K`` is ``c = -i <[H, K]>``, a real number;
* the Lie-algebra direction is ``Omega = [rho, H] = 2**-N * sum_j c_j (i P_j)``;
* one step applies ``exp(eps * Omega)``, which lowers the energy at rate
  ``||Omega||_F**2`` for small ``eps``;
* a Trotterized step appends ``exp(i * eta * c_j * K_j)`` for every basis
  word, i.e. ``PauliRotation(K_j, -2 * eta * c_j)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .oracle import GroundTruth, residual
from .pauli import PauliSum, PauliWord, SizeGuardError, SubspaceBasis, basis_full, word_multiply, words_commute
from .simulator import (
    EXACT_FLOW_MAX_QUBITS,
    PauliRotation,
    StateVector,
    apply_dense_unitary,
    apply_gate,
    apply_pauli_sum,
    expectation,
    expectation_sampled,
    expm_skew_hermitian,
    word_expectation,
)

log = logging.getLogger(__name__)

Mode = Literal["exact_dense", "trotter_full", "trotter_restricted", "adaptive"]
CoefficientMethod = Literal["exact_commutator", "parameter_shift"]
StepStrategy = Literal["fixed", "rotosolve"]

MODES = ("exact_dense", "trotter_full", "trotter_restricted", "adaptive")
SHIFT = math.pi / 2


@dataclass(frozen=True)
class Perturbation:
    sigma: float = 0.1
    max_attempts: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


@dataclass(frozen=True)
class FlowConfig:
    mode: Mode
    step_size: float
    max_steps: int = 100
    subspace: SubspaceBasis | None = None
    coefficient_method: CoefficientMethod = "exact_commutator"
    shots: int = 0
    grad_tolerance: float = 1e-6
    # residual above which a vanishing gradient counts as a stall
    energy_tolerance: float = 1e-3
    perturbation: Perturbation | None = None
    step_strategy: StepStrategy = "fixed"
    shot_seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown flow mode {self.mode!r}")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.mode in ("trotter_restricted", "adaptive") and self.subspace is None:
            raise ValueError(f"mode {self.mode!r} requires a subspace")
        if self.step_strategy == "rotosolve" and self.mode != "adaptive":
            raise ValueError("the rotosolve step strategy requires adaptive mode")
        if self.coefficient_method not in ("exact_commutator", "parameter_shift"):
            raise ValueError(f"unknown coefficient method {self.coefficient_method!r}")
        if self.shots < 0:
            raise ValueError("shots must be nonnegative")
        if self.shots and self.coefficient_method != "parameter_shift":
            raise ValueError("shot sampling requires the parameter_shift coefficient method")
        if not self.grad_tolerance > 0:
            raise ValueError("grad_tolerance must be positive")


@dataclass(frozen=True)
class FlowStepRecord:
    step: int
    energy: float
    residual: float | None
    gradient_norm: float
    coefficients: dict[PauliWord, float] = field(default_factory=dict)
    appended_gates: tuple[tuple[PauliWord, float], ...] = ()
    perturbations_used: int = 0
    # every operation applied since the previous record, in order:
    # PauliRotation gates or dense unitaries (exact steps, perturbations)
    operations: tuple = field(default=(), repr=False, compare=False)

    @property
    def selected_word(self) -> PauliWord | None:
        return self.appended_gates[0][0] if len(self.appended_gates) == 1 else None


@dataclass(frozen=True)
class FlowTrace:
    config: FlowConfig
    records: tuple[FlowStepRecord, ...]
    final_state: StateVector
    termination: Literal["converged", "max_steps", "stalled"]

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([np.nan if r.residual is None else r.residual for r in self.records])

    @property
    def n_gates(self) -> int:
        return sum(len(r.appended_gates) for r in self.records)


# --- coefficients ----------------------------------------------------------

def _energy(state: StateVector, h: PauliSum, shots: int, rng) -> float:
    if shots:
        return expectation_sampled(state, h, shots, rng)
    return expectation(state, h)


def riemannian_coefficient(
    state: StateVector,
    h: PauliSum,
    word: PauliWord,
    method: CoefficientMethod = "exact_commutator",
    shots: int = 0,
    rng=None,
) -> float:
    """Real coefficient ``-i <[H, word]>`` of the gradient along ``word``."""
    if state.n_qubits != h.n_qubits or word.n_qubits != h.n_qubits:
        raise ValueError("qubit count mismatch")
    if method == "exact_commutator":
        # [P, K] = 2 P K when the two anticommute, 0 otherwise
        amps = state.amplitudes
        total = 0j
        for t in h.terms:
            if words_commute(t.word, word):
                continue
            phase, product = word_multiply(t.word, word)
            total += 2 * t.coefficient * phase * word_expectation(amps, product)
        return float((-1j * total).real)
    if method == "parameter_shift":
        plus = _energy(apply_gate(state, PauliRotation(word, SHIFT)), h, shots, rng)
        minus = _energy(apply_gate(state, PauliRotation(word, -SHIFT)), h, shots, rng)
        return plus - minus
    raise ValueError(f"unknown coefficient method {method!r}")


def coefficients(
    state: StateVector,
    h: PauliSum,
    basis: SubspaceBasis | Sequence[PauliWord],
    method: CoefficientMethod = "exact_commutator",
    shots: int = 0,
    rng=None,
) -> dict[PauliWord, float]:
    return {w: riemannian_coefficient(state, h, w, method, shots, rng) for w in basis}


def projected_norm(coeffs: dict[PauliWord, float], n_qubits: int) -> float:
    """Frobenius norm of ``2**-N * sum_j c_j (i P_j)``."""
    return math.sqrt(sum(c * c for c in coeffs.values()) / (1 << n_qubits))


# --- steps -----------------------------------------------------------------

def _check_exact_size(n_qubits: int) -> None:
    if n_qubits > EXACT_FLOW_MAX_QUBITS:
        raise SizeGuardError(f"{n_qubits} qubits exceeds the exact-flow limit of {EXACT_FLOW_MAX_QUBITS}")


def flow_generator(state: StateVector, h: PauliSum) -> np.ndarray:
    """Dense ``Omega = rho H - H rho`` with ``rho = |psi><psi|``."""
    _check_exact_size(state.n_qubits)
    psi = state.amplitudes
    h_psi = apply_pauli_sum(h, psi)
    a = np.outer(psi, h_psi.conj())
    return a - a.conj().T


def exact_flow_step(state: StateVector, h: PauliSum, eps: float) -> tuple[StateVector, float]:
    if state.n_qubits != h.n_qubits:
        raise ValueError("qubit count mismatch")
    omega = flow_generator(state, h)
    norm = float(np.linalg.norm(omega))
    return apply_dense_unitary(state, expm_skew_hermitian(eps * omega)), norm


def _exact_step_with_unitary(state, h, eps):
    omega = flow_generator(state, h)
    u = expm_skew_hermitian(eps * omega)
    return apply_dense_unitary(state, u), u, float(np.linalg.norm(omega))


def trotter_flow_step(
    state: StateVector,
    h: PauliSum,
    basis: SubspaceBasis | Sequence[PauliWord],
    eta: float,
    method: CoefficientMethod = "exact_commutator",
    shots: int = 0,
    rng=None,
    coeffs: dict[PauliWord, float] | None = None,
) -> tuple[StateVector, list[PauliRotation], dict[PauliWord, float]]:
    """Append ``exp(i eta c_j K_j)`` for every basis word, in basis order.

    All coefficients are evaluated on the incoming state before any gate is
    appended.
    """
    if coeffs is None:
        coeffs = coefficients(state, h, basis, method, shots, rng)
    gates = [PauliRotation(w, -2.0 * eta * coeffs[w]) for w in basis]
    for g in gates:
        state = apply_gate(state, g)
    return state, gates, coeffs


def rotosolve_angle(e_zero: float, e_plus: float, e_minus: float) -> float:
    """Minimizer in ``(-pi, pi]`` of ``E(theta) = a + b cos(theta) + c sin(theta)``.

    The inputs are ``E(0)``, ``E(pi/2)`` and ``E(-pi/2)``.
    """
    a = 0.5 * (e_plus + e_minus)
    b = e_zero - a
    c = 0.5 * (e_plus - e_minus)
    if b == 0.0 and c == 0.0:
        return 0.0
    theta = math.atan2(-c, -b)
    return math.pi if theta == -math.pi else theta


class AdaptiveStep(NamedTuple):
    state: StateVector
    word: PauliWord | None
    angle: float
    coefficients: dict[PauliWord, float]

    @property
    def stalled(self) -> bool:
        return self.word is None


def adaptive_flow_step(
    state: StateVector,
    h: PauliSum,
    pool: SubspaceBasis | Sequence[PauliWord],
    method: CoefficientMethod = "exact_commutator",
    grad_tolerance: float = 1e-6,
    strategy: StepStrategy = "rotosolve",
    eta: float = 0.1,
    shots: int = 0,
    rng=None,
    coeffs: dict[PauliWord, float] | None = None,
) -> AdaptiveStep:
    """Append one rotation along the pool word with the largest ``|c|``.

    Returns a step with ``word=None`` (and the state untouched) when every
    coefficient is below ``grad_tolerance``.
    """
    if len(pool) == 0:
        raise ValueError("the operator pool is empty")
    if coeffs is None:
        coeffs = coefficients(state, h, pool, method, shots, rng)
    best = None
    for w in pool:  # strict '>' keeps the first word on ties
        if best is None or abs(coeffs[w]) > abs(coeffs[best]):
            best = w
    if abs(coeffs[best]) < grad_tolerance:
        return AdaptiveStep(state, None, 0.0, coeffs)
    if strategy == "rotosolve":
        e0 = _energy(state, h, shots, rng)
        ep = _energy(apply_gate(state, PauliRotation(best, SHIFT)), h, shots, rng)
        em = _energy(apply_gate(state, PauliRotation(best, -SHIFT)), h, shots, rng)
        theta = rotosolve_angle(e0, ep, em)
    else:
        theta = -2.0 * eta * coeffs[best]
    return AdaptiveStep(apply_gate(state, PauliRotation(best, theta)), best, theta, coeffs)


def random_lie_direction(n_qubits: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Skew-Hermitian generator ``(X - X^T) / 2`` for real ``X ~ N(0, sigma)``.

    This is ``-i K`` for the Hermitian ``K = (i/2)(X - X^T)``.
    """
    dim = 1 << n_qubits
    x = rng.normal(0.0, sigma, size=(dim, dim))
    return 0.5 * (x - x.T).astype(complex)


def perturb(state: StateVector, sigma: float, rng: np.random.Generator) -> StateVector:
    state, _ = _perturb_with_unitary(state, sigma, rng)
    return state


def _perturb_with_unitary(state, sigma, rng):
    _check_exact_size(state.n_qubits)
    u = expm_skew_hermitian(random_lie_direction(state.n_qubits, sigma, rng))
    return apply_dense_unitary(state, u), u


# --- driver ----------------------------------------------------------------

class _Evaluation(NamedTuple):
    energy: float
    residual: float | None
    gradient_norm: float
    coefficients: dict[PauliWord, float]


def _step_basis(config: FlowConfig, n_qubits: int) -> SubspaceBasis | None:
    if config.mode == "trotter_full":
        return basis_full(n_qubits)
    return config.subspace


def run_flow(
    initial: StateVector,
    h: PauliSum,
    config: FlowConfig,
    oracle: GroundTruth | None = None,
) -> FlowTrace:
    """Iterate the configured flow from ``initial``.

    Record ``k`` describes the state after ``k`` updates: its energy, its
    gradient, and the operations that produced it from record ``k - 1``.
    """
    if initial.n_qubits != h.n_qubits:
        raise ValueError("initial state and Hamiltonian have different qubit counts")
    n = h.n_qubits
    if config.mode == "exact_dense" or config.perturbation is not None:
        _check_exact_size(n)
    basis = _step_basis(config, n)
    if basis is not None and basis.n_qubits != n:
        raise ValueError("subspace qubit count does not match the Hamiltonian")
    shot_rng = np.random.default_rng(config.shot_seed) if config.shots else None
    pert_rng = np.random.default_rng(config.perturbation.rng_seed) if config.perturbation else None
    eta = config.step_size / (1 << n) if config.mode == "trotter_full" else config.step_size

    def evaluate(state: StateVector) -> _Evaluation:
        energy = expectation(state, h)
        res = residual(energy, oracle) if oracle is not None else None
        if config.mode == "exact_dense":
            return _Evaluation(energy, res, float(np.linalg.norm(flow_generator(state, h))), {})
        coeffs = coefficients(state, h, basis, config.coefficient_method, config.shots, shot_rng)
        return _Evaluation(energy, res, projected_norm(coeffs, n), coeffs)

    state = initial
    ev = evaluate(state)
    records = [FlowStepRecord(0, ev.energy, ev.residual, ev.gradient_norm, ev.coefficients)]
    attempts = 0
    termination = "max_steps"

    def stalled_now(ev: _Evaluation) -> bool:
        if config.mode == "adaptive":
            return max(abs(c) for c in ev.coefficients.values()) < config.grad_tolerance
        return ev.gradient_norm < config.grad_tolerance

    for k in range(1, config.max_steps + 1):
        ops: list = []
        used = 0
        if stalled_now(ev):
            if ev.residual is None or ev.residual <= config.energy_tolerance:
                termination = "converged"
                break
            if config.perturbation is None:
                termination = "stalled"
                break
            while stalled_now(ev) and attempts < config.perturbation.max_attempts:
                state, u = _perturb_with_unitary(state, config.perturbation.sigma, pert_rng)
                ops.append(u)
                attempts += 1
                used += 1
                ev = evaluate(state)
            log.debug("step %d: %d perturbation(s), gradient %.3g", k, used, ev.gradient_norm)
            if stalled_now(ev):
                termination = "stalled"
                break

        gates: list[PauliRotation] = []
        if config.mode == "exact_dense":
            state, u, _ = _exact_step_with_unitary(state, h, config.step_size)
            ops.append(u)
        elif config.mode == "adaptive":
            step = adaptive_flow_step(
                state, h, basis, config.coefficient_method, config.grad_tolerance,
                config.step_strategy, eta, config.shots, shot_rng, coeffs=ev.coefficients,
            )
            state = step.state
            gates.append(PauliRotation(step.word, step.angle))
        else:
            state, gates, _ = trotter_flow_step(state, h, basis, eta, coeffs=ev.coefficients)
        ops.extend(gates)
        ev = evaluate(state)
        records.append(
            FlowStepRecord(
                k, ev.energy, ev.residual, ev.gradient_norm, ev.coefficients,
                tuple((g.word, g.angle) for g in gates), used, tuple(ops),
            )
        )
    else:
        if stalled_now(ev) and (ev.residual is None or ev.residual <= config.energy_tolerance):
            termination = "converged"

    return FlowTrace(config, tuple(records), state, termination)


def replay(initial: StateVector, records: Sequence[FlowStepRecord]) -> list[StateVector]:
    """Re-apply each record's operations; returns the state after every record."""
    states = []
    state = initial
    for r in records:
        for op in r.operations:
            state = apply_gate(state, op) if isinstance(op, PauliRotation) else apply_dense_unitary(state, op)
        states.append(state)
    return states
