"""Fermionic operators, the Jordan-Wigner map and excitation generators.

Modes are spin-orbitals in interleaved order (mode ``2k`` is spatial orbital
``k`` spin-up, ``2k + 1`` spin-down) and qubit ``i`` carries mode ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .pauli import PauliSum, PauliTerm, validate_permutation

SYMMETRY_TOL = 1e-10

Ladder = tuple[int, bool]  # (mode, is_creation)


class ValidationError(ValueError):
    """Input data violates a structural requirement."""


# ---------------------------------------------------------------------------
# ladder operators
# ---------------------------------------------------------------------------

def jw_ladder(mode: int, dagger: bool, n: int) -> PauliSum:
    """Jordan-Wigner image of a creation (``dagger``) or annihilation operator.

    ``a_j = Z_0 ... Z_{j-1} (X_j + i Y_j) / 2`` and its adjoint.
    """
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n} qubits")
    zmask = (1 << mode) - 1
    bit = 1 << mode
    sign = -1j if dagger else 1j
    return PauliSum(n, {(bit, zmask): 0.5, (bit, zmask | bit): 0.5 * sign})


def qubit_ladder(mode: int, dagger: bool, n: int) -> PauliSum:
    """Qubit (hard-core boson) ladder operator: the JW image without its Z string."""
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n} qubits")
    bit = 1 << mode
    sign = -1j if dagger else 1j
    return PauliSum(n, {(bit, 0): 0.5, (bit, bit): 0.5 * sign})


def _ladder_product(ops: Iterable[Ladder], n: int, qubit: bool = False) -> PauliSum:
    make = qubit_ladder if qubit else jw_ladder
    return reduce(lambda acc, o: acc * make(o[0], o[1], n), ops, PauliSum.identity(n))


# ---------------------------------------------------------------------------
# second-quantized operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FermionTerm:
    ladder_ops: tuple[Ladder, ...]
    coeff: complex = 1.0


def _normal_order_term(ops: tuple[Ladder, ...], coeff: complex) -> list[tuple[tuple[Ladder, ...], complex]]:
    """Rewrite one product in canonical normal order.

    Canonical order puts creators left of annihilators, each group sorted by
    descending mode.  Returns the (possibly several) resulting terms.
    """
    out = []
    stack = [(list(ops), coeff)]
    while stack:
        seq, c = stack.pop()
        i = 0
        dead = False
        while i < len(seq) - 1:
            (m1, d1), (m2, d2) = seq[i], seq[i + 1]
            # creators before annihilators, descending modes within a group
            if (not d1 and d2) or (d1 == d2 and m1 < m2):
                if m1 == m2:  # a_m a_m^dag = 1 - a_m^dag a_m
                    stack.append((seq[:i] + seq[i + 2:], c))
                seq[i], seq[i + 1] = seq[i + 1], seq[i]
                c = -c
                i = max(i - 1, 0)
            elif d1 == d2 and m1 == m2:
                dead = True
                break
            else:
                i += 1
        if not dead:
            out.append((tuple(seq), c))
    return out


class FermionOperator:
    """Sum of products of ladder operators on ``n_modes`` modes, kept normal-ordered."""

    __slots__ = ("n_modes", "_terms")

    def __init__(self, n_modes: int, terms: Mapping[tuple[Ladder, ...], complex] | None = None,
                 normal_order: bool = True):
        self.n_modes = int(n_modes)
        acc: dict[tuple[Ladder, ...], complex] = {}
        for ops, c in (terms or {}).items():
            ops = tuple((int(m), bool(d)) for m, d in ops)
            for m, _ in ops:
                if not 0 <= m < self.n_modes:
                    raise IndexError(f"mode {m} out of range for {self.n_modes} modes")
            pieces = _normal_order_term(ops, complex(c)) if normal_order else [(ops, complex(c))]
            for o, cc in pieces:
                acc[o] = acc.get(o, 0) + cc
        self._terms = {k: v for k, v in acc.items() if abs(v) >= 1e-14}

    @property
    def terms(self) -> dict[tuple[Ladder, ...], complex]:
        return dict(self._terms)

    def __iter__(self):
        for ops, c in self._terms.items():
            yield FermionTerm(ops, c)

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        if other.n_modes != self.n_modes:
            raise ValueError("mode-count mismatch")
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return FermionOperator(self.n_modes, acc, normal_order=False)

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "FermionOperator":
        return FermionOperator(self.n_modes, {k: scalar * c for k, c in self._terms.items()}, normal_order=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FermionOperator):
            return NotImplemented
        return self.n_modes == other.n_modes and self._terms == other._terms

    def allclose(self, other: "FermionOperator", atol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    @property
    def constant(self) -> complex:
        return self._terms.get((), 0j)

    def jordan_wigner(self) -> PauliSum:
        n = self.n_modes
        acc: dict[tuple[int, int], complex] = {}
        for ops, c in self._terms.items():
            for (x, z), v in _ladder_product(ops, n).items():
                acc[(x, z)] = acc.get((x, z), 0) + c * v
        return PauliSum(n, acc)

    def __repr__(self) -> str:
        return f"FermionOperator(n_modes={self.n_modes}, {len(self)} terms)"


def jordan_wigner(op: FermionOperator) -> PauliSum:
    return op.jordan_wigner()


def hamiltonian_from_integrals(one_body, two_body, constant: float = 0.0,
                               n_modes: int | None = None) -> FermionOperator:
    """Build ``c + sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s``.

    Args:
        one_body: ``(n, n)`` array or mapping ``(p, q) -> value``.
        two_body: ``(n, n, n, n)`` array or mapping ``(p, q, r, s) -> value``.
        constant: scalar energy offset (nuclear repulsion).
        n_modes: required when both tables are given as mappings.

    Raises:
        ValidationError: when either table is not Hermitian within 1e-10.
    """
    h1 = _as_table(one_body, 2)
    h2 = _as_table(two_body, 4)
    if n_modes is None:
        sizes = [max(k) + 1 for k in list(h1) + list(h2)]
        if not sizes:
            raise ValidationError("n_modes is required for empty integral tables")
        n_modes = max(sizes)
    for (p, q), v in h1.items():
        if abs(v - np.conj(h1.get((q, p), 0))) > SYMMETRY_TOL:
            raise ValidationError(f"one-body table not Hermitian at ({p},{q})")
    for (p, q, r, s), v in h2.items():
        if abs(v - np.conj(h2.get((s, r, q, p), 0))) > SYMMETRY_TOL:
            raise ValidationError(f"two-body table not Hermitian at ({p},{q},{r},{s})")
    terms: dict[tuple[Ladder, ...], complex] = {}
    if constant:
        terms[()] = complex(constant)
    for (p, q), v in h1.items():
        key = ((p, True), (q, False))
        terms[key] = terms.get(key, 0) + v
    for (p, q, r, s), v in h2.items():
        if p == q or r == s:
            continue
        key = ((p, True), (q, True), (r, False), (s, False))
        terms[key] = terms.get(key, 0) + 0.5 * v
    return FermionOperator(n_modes, terms)


def _as_table(table, rank: int) -> dict[tuple[int, ...], complex]:
    if table is None:
        return {}
    if isinstance(table, Mapping):
        out = {tuple(int(i) for i in k): complex(v) for k, v in table.items()}
    else:
        arr = np.asarray(table)
        if arr.size == 0:
            return {}
        if arr.ndim != rank:
            raise ValidationError(f"expected a rank-{rank} table, got shape {arr.shape}")
        out = {tuple(int(i) for i in idx): complex(arr[idx]) for idx in zip(*np.nonzero(arr))}
    for k in out:
        if len(k) != rank:
            raise ValidationError(f"bad index tuple {k} for a rank-{rank} table")
    return {k: v for k, v in out.items() if v != 0}


def permute_modes(h: FermionOperator, perm) -> FermionOperator:
    """Relabel every mode ``i`` as ``perm[i]`` and renormal-order."""
    perm = validate_permutation(perm, h.n_modes)
    return FermionOperator(h.n_modes, {tuple((perm[m], d) for m, d in ops): c for ops, c in h._terms.items()})


def number_operator(n: int) -> PauliSum:
    """Total particle number ``sum (I - Z_i) / 2``."""
    terms = {(0, 0): n / 2}
    for i in range(n):
        terms[(0, 1 << i)] = -0.5
    return PauliSum(n, terms)


# ---------------------------------------------------------------------------
# excitations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FermionExcitation:
    """Anti-Hermitian excitation generator ``T_{occ -> virt}``.

    Singles: ``c+_a2 c_a1 - c+_a1 c_a2``.  Doubles:
    ``c+_a2 c+_b2 c_a1 c_b1 - c+_b1 c+_a1 c_b2 c_a2`` with
    ``occupied = (a1, b1)`` and ``virtual = (a2, b2)``.  ``c`` is the fermionic
    ladder for flavor ``"fermionic"`` and the qubit ladder for ``"qubit"``.
    """

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]
    flavor: str = "fermionic"

    def __post_init__(self):
        object.__setattr__(self, "occupied", tuple(int(i) for i in self.occupied))
        object.__setattr__(self, "virtual", tuple(int(i) for i in self.virtual))
        if len(self.occupied) != len(self.virtual) or len(self.occupied) not in (1, 2):
            raise ValidationError("excitations need 1 or 2 occupied and as many virtual indices")
        idx = self.occupied + self.virtual
        if len(set(idx)) != len(idx) or min(idx) < 0:
            raise ValidationError(f"excitation indices must be distinct and non-negative: {idx}")
        if self.flavor not in ("fermionic", "qubit"):
            raise ValidationError(f"unknown flavor {self.flavor!r}")

    @property
    def kind(self) -> str:
        return "single" if len(self.occupied) == 1 else "double"

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.occupied + self.virtual))

    def z_string(self) -> frozenset[int]:
        """Qubits carrying the anticommutation string under JW."""
        s = self.support
        if len(s) == 2:
            return frozenset(range(s[0] + 1, s[1]))
        return frozenset(range(s[0] + 1, s[1])) | frozenset(range(s[2] + 1, s[3]))

    def ladder_products(self) -> list[tuple[tuple[Ladder, ...], int]]:
        if self.kind == "single":
            (a1,), (a2,) = self.occupied, self.virtual
            return [(((a2, True), (a1, False)), 1), (((a1, True), (a2, False)), -1)]
        (a1, b1), (a2, b2) = self.occupied, self.virtual
        return [
            (((a2, True), (b2, True), (a1, False), (b1, False)), 1),
            (((b1, True), (a1, True), (b2, False), (a2, False)), -1),
        ]

    def fermion_operator(self, n: int) -> FermionOperator:
        if self.flavor != "fermionic":
            raise ValidationError("only fermionic-flavor excitations have a FermionOperator form")
        return FermionOperator(n, {ops: s for ops, s in self.ladder_products()})

    def with_flavor(self, flavor: str) -> "FermionExcitation":
        return FermionExcitation(self.occupied, self.virtual, flavor)

    def reversed(self) -> "FermionExcitation":
        """``T_{virt -> occ} = -T_{occ -> virt}``."""
        return FermionExcitation(self.virtual, self.occupied, self.flavor)

    def canonical(self) -> tuple["FermionExcitation", int]:
        """Canonical representative and the sign relating it to ``self``.

        Both index pairs are sorted ascending and the pair holding the lowest
        index is the occupied one.  Each within-pair swap and the reversal
        flip the sign.
        """
        occ, vir, sign = list(self.occupied), list(self.virtual), 1
        if len(occ) == 2:
            if occ[0] > occ[1]:
                occ.reverse()
                sign = -sign
            if vir[0] > vir[1]:
                vir.reverse()
                sign = -sign
        if min(vir) < min(occ):
            occ, vir, sign = vir, occ, -sign
        return FermionExcitation(tuple(occ), tuple(vir), self.flavor), sign

    def label(self) -> str:
        occ = ",".join(map(str, self.occupied))
        vir = ",".join(map(str, self.virtual))
        tag = "f" if self.flavor == "fermionic" else "q"
        return f"{tag}({occ}->{vir})"


def excitation_to_pauli(e: FermionExcitation, n: int) -> PauliSum:
    """JW image of an excitation generator (qubit flavor drops the Z strings)."""
    if max(e.support) >= n:
        raise IndexError(f"excitation {e.label()} does not fit on {n} qubits")
    acc = PauliSum.zero(n)
    for ops, sign in e.ladder_products():
        acc = acc + sign * _ladder_product(ops, n, qubit=e.flavor == "qubit")
    return acc


def strip_z(s: PauliSum, qubits: Iterable[int]) -> PauliSum:
    """Delete ``Z`` symbols on ``qubits`` from every word (coefficients unchanged)."""
    mask = reduce(lambda m, q: m | (1 << q), qubits, 0)
    acc: dict[tuple[int, int], complex] = {}
    for (x, z), c in s.items():
        if z & mask & ~x:
            z &= ~(mask & ~x)
        acc[(x, z)] = acc.get((x, z), 0) + c
    return PauliSum(s.n, acc)


__all__ = [
    "FermionExcitation", "FermionOperator", "FermionTerm", "PauliTerm", "ValidationError",
    "excitation_to_pauli", "hamiltonian_from_integrals", "jordan_wigner", "jw_ladder",
    "number_operator", "permute_modes", "qubit_ladder", "strip_z",
]
