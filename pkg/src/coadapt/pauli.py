"""Pauli-string algebra on bit-packed words.

A Pauli word on ``n`` qubits is stored as two ``n``-bit integers ``x`` and
``z``; qubit ``q`` carries ``I, X, Z, Y`` for ``(x_q, z_q) = (0,0), (1,0),
(0,1), (1,1)``.  The word itself is Hermitian: ``Y`` is not ``XZ`` but
``i XZ``, so the operator behind ``(x, z)`` is ``i**popcount(x & z) X^x Z^z``.

String form: ``word[q]`` is the symbol on qubit ``q``.  Dense matrices and
statevectors are little-endian, i.e. qubit 0 is the rightmost tensor factor
and the least significant bit of a basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np
import scipy.sparse as sp

DEDUP_TOL = 1e-14

_SYMBOLS = "IXZY"
_PHASES = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _word_to_masks(word: str) -> tuple[int, int]:
    x = z = 0
    for q, s in enumerate(word):
        if s not in "IXYZ":
            raise ValueError(f"invalid Pauli symbol {s!r} in {word!r}")
        if s in "XY":
            x |= 1 << q
        if s in "ZY":
            z |= 1 << q
    return x, z


def _masks_to_word(x: int, z: int, n: int) -> str:
    return "".join(_SYMBOLS[((x >> q) & 1) | (((z >> q) & 1) << 1)] for q in range(n))


def _mul_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, int]:
    """Multiply two Hermitian words; returns (x, z, k) with product = i**k * word."""
    k = _popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2)
    x, z = x1 ^ x2, z1 ^ z2
    k -= _popcount(x & z)
    return x, z, k % 4


@dataclass(frozen=True)
class PauliTerm:
    """A single weighted Pauli word."""

    n: int
    x: int
    z: int
    coeff: complex = 1.0

    @classmethod
    def from_word(cls, word: str, coeff: complex = 1.0) -> "PauliTerm":
        x, z = _word_to_masks(word)
        return cls(len(word), x, z, complex(coeff))

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliTerm":
        return cls(n, 0, 0, complex(coeff))

    @property
    def word(self) -> str:
        return _masks_to_word(self.x, self.z, self.n)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(q for q in range(self.n) if (m >> q) & 1)

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return pauli_mul(self, other)
        return PauliTerm(self.n, self.x, self.z, self.coeff * other)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"PauliTerm({self.word!r}, {self.coeff})"


def _check_sizes(a: int, b: int) -> None:
    if a != b:
        raise ValueError(f"qubit-count mismatch: {a} vs {b}")


def pauli_mul(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product ``a * b`` with the Pauli-group phase folded into the coefficient."""
    _check_sizes(a.n, b.n)
    x, z, k = _mul_masks(a.x, a.z, b.x, b.z)
    return PauliTerm(a.n, x, z, a.coeff * b.coeff * _PHASES[k])


def commutes(a: PauliTerm, b: PauliTerm) -> bool:
    """True iff the two words commute (coefficients are ignored)."""
    _check_sizes(a.n, b.n)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


class PauliSum:
    """Complex-weighted sum of Pauli words on a fixed number of qubits.

    Terms are kept in a dict keyed by ``(x, z)``; coefficients with magnitude
    below ``DEDUP_TOL`` are dropped on construction.  Instances are treated as
    immutable: every operation returns a new sum.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n = int(n)
        clean = {}
        if terms:
            full = (1 << self.n) - 1
            for (x, z), c in terms.items():
                if (x | z) & ~full:
                    raise ValueError("word exceeds the declared qubit count")
                if abs(c) >= DEDUP_TOL:
                    clean[(x, z)] = complex(c)
        self._terms = clean

    # construction -----------------------------------------------------------
    @classmethod
    def from_terms(cls, n: int, terms: Iterable[PauliTerm]) -> "PauliSum":
        acc: dict[tuple[int, int], complex] = {}
        for t in terms:
            _check_sizes(n, t.n)
            acc[t.key] = acc.get(t.key, 0) + t.coeff
        return cls(n, acc)

    @classmethod
    def from_words(cls, words: Mapping[str, complex] | Iterable[tuple[str, complex]]) -> "PauliSum":
        items = list(words.items()) if isinstance(words, Mapping) else list(words)
        if not items:
            raise ValueError("cannot infer qubit count from an empty word list")
        n = len(items[0][0])
        return cls.from_terms(n, (PauliTerm.from_word(w, c) for w, c in items))

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, {(0, 0): coeff})

    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls(n)

    # container protocol -----------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator[PauliTerm]:
        for (x, z), c in self._terms.items():
            yield PauliTerm(self.n, x, z, c)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coeff(self, word: str) -> complex:
        return self._terms.get(_word_to_masks(word), 0j)

    def words(self) -> dict[str, complex]:
        return {_masks_to_word(x, z, self.n): c for (x, z), c in self._terms.items()}

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g}) {w}" for w, c in sorted(self.words().items()))
        return f"PauliSum(n={self.n}: {body or '0'})"

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: "PauliSum") -> "PauliSum":
        _check_sizes(self.n, other.n)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return PauliSum(self.n, acc)

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            _check_sizes(self.n, other.n)
            acc: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in self._terms.items():
                for (x2, z2), c2 in other._terms.items():
                    x, z, k = _mul_masks(x1, z1, x2, z2)
                    acc[(x, z)] = acc.get((x, z), 0) + c1 * c2 * _PHASES[k]
            return PauliSum(self.n, acc)
        if isinstance(other, PauliTerm):
            return self * PauliSum.from_terms(self.n, [other])
        return PauliSum(self.n, {k: c * other for k, c in self._terms.items()})

    def __rmul__(self, other):
        return PauliSum(self.n, {k: c * other for k, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        if self.n != other.n:
            return False
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n, {k: c.conjugate() for k, c in self._terms.items()})

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_antihermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.real) <= tol for c in self._terms.values())

    def pairwise_commuting(self) -> bool:
        ts = list(self)
        return all(commutes(a, b) for i, a in enumerate(ts) for b in ts[i + 1:])

    def chop(self, tol: float) -> "PauliSum":
        return PauliSum(self.n, {k: c for k, c in self._terms.items() if abs(c) > tol})

    # dense / sparse ---------------------------------------------------------
    def to_sparse(self) -> sp.csr_matrix:
        """CSR matrix in the little-endian computational basis."""
        dim = 1 << self.n
        basis = np.arange(dim, dtype=np.int64)
        by_x: dict[int, np.ndarray] = {}
        for (x, z), c in self._terms.items():
            phase = c * _PHASES[_popcount(x & z) % 4]
            vals = phase * parity_signs(basis, z)
            if x in by_x:
                by_x[x] = by_x[x] + vals
            else:
                by_x[x] = vals.astype(complex)
        if not by_x:
            return sp.csr_matrix((dim, dim), dtype=complex)
        rows = np.concatenate([basis ^ x for x in by_x])
        cols = np.tile(basis, len(by_x))
        data = np.concatenate(list(by_x.values()))
        return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


_BYTE_PARITY = np.array([bin(i).count("1") & 1 for i in range(256)], dtype=np.int8)


def parity_signs(basis: np.ndarray, mask: int) -> np.ndarray:
    """(-1)**popcount(basis & mask) as a float array."""
    v = basis & mask
    par = np.zeros(v.shape, dtype=np.int8)
    while mask:
        par ^= _BYTE_PARITY[v & 0xFF]
        v = v >> 8
        mask >>= 8
    return 1.0 - 2.0 * par


def commutator(h: PauliSum, a: PauliSum) -> PauliSum:
    """``h a - a h``, computed term-by-term (anticommuting pairs contribute 2ha)."""
    _check_sizes(h.n, a.n)
    acc: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in h.items():
        for (x2, z2), c2 in a.items():
            if (_popcount(x1 & z2) + _popcount(z1 & x2)) % 2 == 0:
                continue
            x, z, k = _mul_masks(x1, z1, x2, z2)
            acc[(x, z)] = acc.get((x, z), 0) + 2 * c1 * c2 * _PHASES[k]
    return PauliSum(h.n, acc)


def _permute_mask(mask: int, perm) -> int:
    out = 0
    q = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[q]
        mask >>= 1
        q += 1
    return out


def validate_permutation(perm, n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm}")
    return perm


def remap_qubit_indices(s: PauliSum, perm) -> PauliSum:
    """Move the symbol on qubit ``q`` to qubit ``perm[q]``."""
    perm = validate_permutation(perm, s.n)
    return PauliSum(s.n, {(_permute_mask(x, perm), _permute_mask(z, perm)): c for (x, z), c in s.items()})


def inverse_permutation(perm) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)
