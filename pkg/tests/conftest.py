import numpy as np
import pytest

from riemflow.pauli import PauliWord
from riemflow.simulator import Hadamard, StateVector, apply_gates, init_zero_state

PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_word(letters: str) -> np.ndarray:
    """Dense matrix of a compact word like ``"XIZ"`` (qubit 0 leftmost)."""
    out = np.ones((1, 1), dtype=complex)
    for a in letters:
        out = np.kron(out, PAULIS[a])
    return out


def all_words(n: int) -> list[PauliWord]:
    dim = 1 << n
    return [PauliWord(n, x, z) for x in range(dim) for z in range(dim)]


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(v / np.linalg.norm(v))


def plus_state(n: int) -> StateVector:
    return apply_gates(init_zero_state(n), [Hadamard(q) for q in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
