"""Pauli words, Pauli sums and Lie-algebra subspace bases.

A word on ``n`` qubits is stored as two bitmasks.  Qubit ``q`` lives in bit
``n - 1 - q`` so that qubit 0 is the most significant bit of a basis-state
index, matching the Kronecker order used by :func:`word_to_dense`.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DENSE_MAX_QUBITS = 12
MERGE_THRESHOLD = 1e-14

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_MATRICES = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}
_LETTER_ORDER = {"X": 0, "Y": 1, "Z": 2}

# phase i**k for k mod 4
_PHASES = (1, 1j, -1, -1j)


class SizeGuardError(ValueError):
    """Raised when a dense representation would exceed the qubit guard."""


class PauliParseError(ValueError):
    """Syntax error in a Pauli-sum expression."""

    def __init__(self, message: str, position: int, token: str | None = None):
        self.position = position
        self.token = token
        where = f"at position {position}"
        if token is not None:
            where += f" (token {token!r})"
        super().__init__(f"{message} {where}")


def _check_dense(n_qubits: int, limit: int = DENSE_MAX_QUBITS) -> None:
    if n_qubits > limit:
        raise SizeGuardError(f"{n_qubits} qubits exceeds the dense limit of {limit}")


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, order=False)
class PauliWord:
    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError("masks do not fit in n_qubits bits")

    @classmethod
    def identity(cls, n_qubits: int) -> PauliWord:
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_letters(cls, n_qubits: int, letters: dict[int, str]) -> PauliWord:
        """Build a word from ``{wire: letter}``, e.g. ``{0: "X", 2: "Z"}``."""
        x = z = 0
        for wire, letter in letters.items():
            if not 0 <= wire < n_qubits:
                raise ValueError(f"wire {wire} out of range for {n_qubits} qubits")
            bit = 1 << (n_qubits - 1 - wire)
            if letter in ("X", "Y"):
                x |= bit
            if letter in ("Z", "Y"):
                z |= bit
            if letter not in ("X", "Y", "Z", "I"):
                raise ValueError(f"unknown Pauli letter {letter!r}")
        return cls(n_qubits, x, z)

    @classmethod
    def from_label(cls, label: str, n_qubits: int | None = None) -> PauliWord:
        """Parse ``"X0 Z1"``-style labels (a bare ``"I"`` is the identity)."""
        factors = re.findall(r"([XYZ])\s*(\d+)", label)
        stripped = re.sub(r"[XYZ]\s*\d+|\s+", "", label)
        if stripped not in ("", "I"):
            raise ValueError(f"malformed Pauli word label {label!r}")
        letters: dict[int, str] = {}
        for letter, wire in factors:
            w = int(wire)
            if w in letters:
                raise ValueError(f"wire {w} appears twice in {label!r}")
            letters[w] = letter
        if n_qubits is None:
            if not letters:
                raise ValueError("n_qubits is required for the identity word")
            n_qubits = max(letters) + 1
        return cls.from_letters(n_qubits, letters)

    def letter(self, wire: int) -> str:
        bit = 1 << (self.n_qubits - 1 - wire)
        x, z = bool(self.x_mask & bit), bool(self.z_mask & bit)
        return "IZXY"[2 * x + z]

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n_qubits) if m >> (self.n_qubits - 1 - q) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def y_count(self) -> int:
        return _popcount(self.x_mask & self.z_mask)

    def sort_key(self) -> tuple:
        qubits = self.support
        return (self.weight, qubits, tuple(_LETTER_ORDER[self.letter(q)] for q in qubits))

    def label(self) -> str:
        if self.is_identity:
            return "I"
        return " ".join(f"{self.letter(q)}{q}" for q in self.support)

    def compact(self) -> str:
        """Dense string form, e.g. ``XIZY``."""
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def __str__(self) -> str:
        return self.label()


def _check_same_size(p: PauliWord, q: PauliWord) -> None:
    if p.n_qubits != q.n_qubits:
        raise ValueError(f"qubit count mismatch: {p.n_qubits} vs {q.n_qubits}")


def word_multiply(p: PauliWord, q: PauliWord) -> tuple[complex, PauliWord]:
    """Return ``(phase, word)`` with ``phase * word == p @ q``."""
    _check_same_size(p, q)
    x = p.x_mask ^ q.x_mask
    z = p.z_mask ^ q.z_mask
    # P = i^{y_P} X^{x_P} Z^{z_P}; moving Z^{z_P} past X^{x_Q} costs (-1)^{|z_P & x_Q|}
    k = p.y_count + q.y_count - _popcount(x & z) + 2 * _popcount(p.z_mask & q.x_mask)
    return _PHASES[k % 4], PauliWord(p.n_qubits, x, z)


def words_commute(p: PauliWord, q: PauliWord) -> bool:
    _check_same_size(p, q)
    return (_popcount(p.x_mask & q.z_mask) + _popcount(p.z_mask & q.x_mask)) % 2 == 0


def word_to_dense(p: PauliWord) -> np.ndarray:
    _check_dense(p.n_qubits)
    out = np.ones((1, 1), dtype=complex)
    for q in range(p.n_qubits):
        out = np.kron(out, _MATRICES[p.letter(q)])
    return out


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    word: PauliWord

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli words in canonical form.

    Use :meth:`from_terms` to build one; it merges duplicates, drops
    vanishing coefficients and sorts terms by word.
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...] = ()

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[float, PauliWord] | PauliTerm]) -> PauliSum:
        acc: dict[PauliWord, float] = {}
        for t in terms:
            c, w = (t.coefficient, t.word) if isinstance(t, PauliTerm) else t
            if w.n_qubits != n_qubits:
                raise ValueError("all words must share n_qubits")
            acc[w] = acc.get(w, 0.0) + float(c)
        kept = [PauliTerm(c, w) for w, c in acc.items() if abs(c) >= MERGE_THRESHOLD]
        kept.sort(key=lambda t: t.word.sort_key())
        return cls(n_qubits, tuple(kept))

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum.from_terms(self.n_qubits, [*self.terms, *other.terms])

    def shifted(self, constant: float) -> PauliSum:
        """Return ``self + constant * I``."""
        return PauliSum.from_terms(
            self.n_qubits, [*self.terms, (constant, PauliWord.identity(self.n_qubits))]
        )

    def coefficient_of(self, word: PauliWord) -> float:
        for t in self.terms:
            if t.word == word:
                return t.coefficient
        return 0.0

    def one_norm(self) -> float:
        return sum(abs(t.coefficient) for t in self.terms)

    def __str__(self) -> str:
        return format_pauli_sum(self)


def pauli_sum_to_dense(h: PauliSum) -> np.ndarray:
    _check_dense(h.n_qubits)
    return _dense_cached(h).copy()


@lru_cache(maxsize=64)
def _dense_cached(h: PauliSum) -> np.ndarray:
    dim = 1 << h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        out += t.coefficient * word_to_dense(t.word)
    out.setflags(write=False)
    return out


def tfim(n_qubits: int, g: float = 1.0, periodic: bool = True) -> PauliSum:
    """Transverse-field Ising chain ``-sum_i (Z_i Z_{i+1} + g X_i)``."""
    if n_qubits < 2:
        raise ValueError("the Ising chain needs at least two sites")
    terms = []
    n_bonds = n_qubits if periodic else n_qubits - 1
    for i in range(n_bonds):
        j = (i + 1) % n_qubits
        terms.append((-1.0, PauliWord.from_letters(n_qubits, {i: "Z", j: "Z"})))
    for i in range(n_qubits):
        terms.append((-float(g), PauliWord.from_letters(n_qubits, {i: "X"})))
    return PauliSum.from_terms(n_qubits, terms)


# --- subspace bases --------------------------------------------------------

SUBSPACE_LABELS = ("single_qubit", "two_local_nn", "two_local_all", "full", "custom")


@dataclass(frozen=True)
class SubspaceBasis:
    n_qubits: int
    words: tuple[PauliWord, ...]
    label: str = "custom"

    def __post_init__(self):
        if self.label not in SUBSPACE_LABELS:
            raise ValueError(f"unknown subspace label {self.label!r}")
        if len(set(self.words)) != len(self.words):
            raise ValueError("subspace words must be distinct")
        for w in self.words:
            if w.n_qubits != self.n_qubits:
                raise ValueError("subspace word has the wrong qubit count")
            if w.is_identity:
                raise ValueError("the identity is not a Lie-algebra direction")

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def _sorted_basis(n_qubits: int, words: Iterable[PauliWord], label: str) -> SubspaceBasis:
    return SubspaceBasis(n_qubits, tuple(sorted(set(words), key=PauliWord.sort_key)), label)


def basis_single_qubit(n_qubits: int) -> SubspaceBasis:
    words = (
        PauliWord.from_letters(n_qubits, {q: a}) for q in range(n_qubits) for a in "XYZ"
    )
    return _sorted_basis(n_qubits, words, "single_qubit")


def _pairs(n_qubits: int, nearest_neighbor: bool, periodic: bool) -> list[tuple[int, int]]:
    if not nearest_neighbor:
        return list(itertools.combinations(range(n_qubits), 2))
    pairs = {(i, i + 1) for i in range(n_qubits - 1)}
    if periodic and n_qubits > 2:
        pairs.add((0, n_qubits - 1))
    return sorted(pairs)


def basis_two_local(
    n_qubits: int,
    nearest_neighbor: bool = True,
    periodic: bool = True,
    include_singles: bool = False,
) -> SubspaceBasis:
    """Weight-2 words over the selected qubit pairs (9 per unordered pair)."""
    if n_qubits < 2:
        raise ValueError("two-local bases need at least two qubits")
    words = [
        PauliWord.from_letters(n_qubits, {i: a, j: b})
        for i, j in _pairs(n_qubits, nearest_neighbor, periodic)
        for a in "XYZ"
        for b in "XYZ"
    ]
    if include_singles:
        words += basis_single_qubit(n_qubits).words
    return _sorted_basis(n_qubits, words, "two_local_nn" if nearest_neighbor else "two_local_all")


def basis_full(n_qubits: int) -> SubspaceBasis:
    """All ``4**n - 1`` non-identity words."""
    dim = 1 << n_qubits
    words = (PauliWord(n_qubits, x, z) for x in range(dim) for z in range(dim) if x or z)
    return _sorted_basis(n_qubits, words, "full")


def basis_custom(words: Sequence[PauliWord]) -> SubspaceBasis:
    if not words:
        raise ValueError("a custom basis needs at least one word")
    return _sorted_basis(words[0].n_qubits, words, "custom")


# --- expression parsing ----------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<factor>[XYZ])"
    r"|(?P<op>[+\-*])"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PauliParseError("unexpected character", pos, text[pos])
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


def parse_pauli_sum(text: str, n_qubits: int | None = None) -> PauliSum:
    """Parse expressions such as ``"X0 + X1 + Y1"`` or ``"-1.5 * Z0 Z1"``.

    A term with a coefficient but no factors is a multiple of the identity.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise PauliParseError("empty expression", 0)
    i = 0
    raw_terms: list[tuple[float, dict[int, str]]] = []

    def peek():
        return tokens[i] if i < len(tokens) else None

    sign = 1.0
    if peek()[0] == "op" and peek()[1] in "+-":
        sign = -1.0 if peek()[1] == "-" else 1.0
        i += 1
    while True:
        tok = peek()
        if tok is None:
            last = tokens[-1]
            raise PauliParseError("expected a term", last[2] + len(last[1]), last[1])
        coefficient = 1.0
        has_coefficient = False
        if tok[0] == "num":
            coefficient = float(tok[1])
            has_coefficient = True
            i += 1
            tok = peek()
            if tok is not None and tok[1] == "*":
                i += 1
                tok = peek()
                if tok is None or tok[0] != "factor":
                    pos = tok[2] if tok else len(text)
                    raise PauliParseError("expected a Pauli factor after '*'", pos, tok[1] if tok else "*")
        letters: dict[int, str] = {}
        while tok is not None and tok[0] == "factor":
            letter, pos = tok[1], tok[2]
            i += 1
            wire_tok = peek()
            if wire_tok is None or wire_tok[0] != "num" or not wire_tok[1].isdigit():
                raise PauliParseError(f"expected a wire index after {letter!r}", pos, letter)
            wire = int(wire_tok[1])
            if wire in letters:
                raise PauliParseError(f"wire {wire} appears twice in one term", wire_tok[2], wire_tok[1])
            letters[wire] = letter
            i += 1
            tok = peek()
        if not letters and not has_coefficient:
            raise PauliParseError("expected a term", tok[2], tok[1])
        raw_terms.append((sign * coefficient, letters))
        if tok is None:
            break
        if tok[0] != "op" or tok[1] not in "+-":
            raise PauliParseError("expected '+' or '-'", tok[2], tok[1])
        sign = -1.0 if tok[1] == "-" else 1.0
        i += 1

    wires = [w for _, letters in raw_terms for w in letters]
    inferred = max(wires) + 1 if wires else None
    if n_qubits is None:
        if inferred is None:
            raise ValueError("n_qubits is required for an expression without wires")
        n_qubits = inferred
    elif inferred is not None and inferred > n_qubits:
        raise ValueError(f"wire {inferred - 1} out of range for {n_qubits} qubits")
    return PauliSum.from_terms(
        n_qubits, [(c, PauliWord.from_letters(n_qubits, letters)) for c, letters in raw_terms]
    )


def format_pauli_sum(h: PauliSum) -> str:
    """Inverse of :func:`parse_pauli_sum` on canonical sums."""
    if not h.terms:
        return "0"
    parts = []
    for k, t in enumerate(h.terms):
        c = t.coefficient
        body = repr(abs(c)) if t.word.is_identity else f"{abs(c)!r} {t.word.label()}"
        if k == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)
