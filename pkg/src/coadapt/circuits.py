"""Gate-level constructions and a small dense simulator for checking them.

Gates act on wire indices.  ``Rz(a) = exp(-i a Z / 2)`` and likewise for
``Rx``/``Ry``.  Core blocks implement exponentials of pool generators that
live on 2 or 4 adjacent wires; SWAP and FSWAP are kept as macros until
export.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliSum, PauliTerm

TWO_QUBIT = {"cx": 1, "swap": 3, "fswap": 2}
ONE_QUBIT = ("h", "s", "sdg", "x", "rx", "ry", "rz")


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    @property
    def cnots(self) -> int:
        return TWO_QUBIT.get(self.name, 0)


def G(name: str, *qubits: int, angle: float = 0.0) -> Gate:
    return Gate(name, tuple(int(q) for q in qubits), float(angle))


def cnot_count(gates: Iterable[Gate]) -> int:
    return sum(g.cnots for g in gates)


def inverse(gates: Sequence[Gate]) -> list[Gate]:
    inv = {"s": "sdg", "sdg": "s"}
    out = []
    for g in reversed(gates):
        if g.name in ("rx", "ry", "rz"):
            out.append(Gate(g.name, g.qubits, -g.angle))
        elif g.name == "fswap":
            out.append(g)  # self-inverse
        else:
            out.append(Gate(inv.get(g.name, g.name), g.qubits, g.angle))
    return out


def relabel(gates: Iterable[Gate], wires: Sequence[int]) -> list[Gate]:
    """Map local wire ``i`` to ``wires[i]``."""
    return [Gate(g.name, tuple(wires[q] for q in g.qubits), g.angle) for g in gates]


# ---------------------------------------------------------------------------
# macro decompositions
# ---------------------------------------------------------------------------

def swap_decomposition(a: int, b: int) -> list[Gate]:
    return [G("cx", a, b), G("cx", b, a), G("cx", a, b)]


def fswap_decomposition(a: int, b: int) -> list[Gate]:
    """Fermionic swap from 2 CNOTs: swaps the wires and negates ``|11>``."""
    return [G("s", a), G("s", b), G("h", a), G("cx", a, b), G("cx", b, a), G("h", b), G("sdg", a), G("sdg", b)]


def expand_macros(gates: Iterable[Gate]) -> list[Gate]:
    out = []
    for g in gates:
        if g.name == "swap":
            out.extend(swap_decomposition(*g.qubits))
        elif g.name == "fswap":
            out.extend(fswap_decomposition(*g.qubits))
        else:
            out.append(g)
    return out


SWAP_MATRIX = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
FSWAP_MATRIX = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)


# ---------------------------------------------------------------------------
# dense simulation
# ---------------------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_FIXED = {
    "h": _H,
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
}
_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1.0 + 0j, -1.0]),
}


def single_qubit_matrix(g: Gate) -> np.ndarray:
    if g.name in _FIXED:
        return _FIXED[g.name]
    axis = _PAULI[g.name[1]]
    return np.cos(g.angle / 2) * np.eye(2) - 1j * np.sin(g.angle / 2) * axis


def apply_gates(states: np.ndarray, gates: Iterable[Gate], n: int) -> np.ndarray:
    """Apply gates to the columns of ``states`` (shape ``(2**n, m)`` or ``(2**n,)``)."""
    vec = states.ndim == 1
    psi = states.reshape(1 << n, -1).astype(complex, copy=True)
    idx = np.arange(1 << n)
    for g in gates:
        if g.name == "cx":
            c, t = g.qubits
            perm = idx ^ (((idx >> c) & 1) << t)
            psi = psi[perm]
        elif g.name in ("swap", "fswap"):
            a, b = g.qubits
            ba, bb = (idx >> a) & 1, (idx >> b) & 1
            perm = idx ^ ((ba ^ bb) << a) ^ ((ba ^ bb) << b)
            psi = psi[perm]
            if g.name == "fswap":
                psi = psi * np.where(ba & bb, -1.0, 1.0)[:, None]
        else:
            (q,) = g.qubits
            m = single_qubit_matrix(g)
            view = psi.reshape(1 << (n - q - 1), 2, 1 << q, -1)
            psi = np.einsum("ij,ajbk->aibk", m, view).reshape(1 << n, -1)
    return psi[:, 0] if vec else psi


def circuit_unitary(gates: Iterable[Gate], n: int) -> np.ndarray:
    return apply_gates(np.eye(1 << n, dtype=complex), list(gates), n)


# ---------------------------------------------------------------------------
# core blocks
# ---------------------------------------------------------------------------

class BlockError(ValueError):
    """Generator does not have the structure a core block expects."""


def _local_words(gen: PauliSum, wires: Sequence[int]) -> dict[str, complex]:
    """Words of ``gen`` restricted to ``wires`` (symbol on ``wires[i]`` at index i)."""
    out = {}
    wires = list(wires)
    mask = sum(1 << w for w in wires)
    for t in gen:
        if (t.x | t.z) & ~mask:
            raise BlockError("generator acts outside the block wires")
        w = t.word
        out["".join(w[q] for q in wires)] = t.coeff
    return out


def qe_single_block(theta: float) -> list[Gate]:
    """``exp(i theta/2 (X_1 Y_0 - Y_1 X_0))`` on local wires (0, 1); 2 CNOTs."""
    return [
        G("rx", 0, angle=np.pi / 2), G("h", 1), G("s", 1),
        G("cx", 0, 1),
        G("rx", 0, angle=theta), G("rz", 1, angle=-theta),
        G("cx", 0, 1),
        G("rx", 0, angle=-np.pi / 2), G("sdg", 1), G("h", 1),
    ]


def single_block(gen: PauliSum, wires: Sequence[int], theta: float) -> list[Gate]:
    """Exponential ``exp(theta * gen)`` of a single-excitation generator on two wires."""
    a, b = wires
    words = _local_words(gen, (a, b))
    c1, c2 = words.get("YX", 0), words.get("XY", 0)
    if set(words) - {"YX", "XY"} or abs(c1 + c2) > 1e-12 or abs(c1.real) > 1e-12:
        raise BlockError(f"not a single-excitation generator: {words}")
    return relabel(qe_single_block(2 * c1.imag * theta), (a, b))


DOUBLE_WORDS = ("YXXX", "XYXX", "YYXY", "XXXY", "YXYY", "XYYY", "YYYX", "XXYX")
_DOUBLE_SIGNS = (-1, -1, 1, -1, 1, 1, 1, -1)
_DOUBLE_CTRL = (1, 3, 1, 2, 1, 3, 1)


def double_block_angles(angles: Sequence[float]) -> list[Gate]:
    """13-CNOT circuit for ``prod_j exp(i angles[j]/2 P_j)`` over ``DOUBLE_WORDS``."""
    gates = [G("sdg", 0), G("cx", 0, 3), G("cx", 0, 2), G("cx", 0, 1), G("h", 0), G("sdg", 2)]
    for j in range(8):
        gates.append(G("rz", 0, angle=_DOUBLE_SIGNS[j] * angles[j]))
        if j < 7:
            gates.append(G("cx", _DOUBLE_CTRL[j], 0))
    gates += [G("h", 0), G("cx", 0, 1), G("cx", 0, 2), G("cx", 0, 3), G("s", 2)]
    return gates


def double_block(gen: PauliSum, wires: Sequence[int], theta: float = 1.0) -> list[Gate]:
    """Exponential of any combination of the eight odd-Y X/Y words on four wires."""
    words = _local_words(gen, wires)
    extra = set(words) - set(DOUBLE_WORDS)
    if extra:
        raise BlockError(f"unexpected words for a double block: {sorted(extra)}")
    angles = []
    for w in DOUBLE_WORDS:
        c = words.get(w, 0)
        if abs(c.real) > 1e-12:
            raise BlockError("generator is not anti-Hermitian")
        angles.append(2 * c.imag * theta)
    return relabel(double_block_angles(angles), wires)


# OVP frame: after CX(0,1) CX(2,3) Rx(pi/2)_0 H_2, the four generator words are
# diagonal; the parity network visits 0^2, 0^1^2, 0^1^2^3, 0^2^3 on wire 2.
_OVP_PARITIES = (0b0101, 0b0111, 0b1111, 0b1101)


def _ovp_frame() -> list[Gate]:
    return [G("cx", 0, 1), G("cx", 2, 3), G("rx", 0, angle=np.pi / 2), G("h", 2)]


def ovp_block_angles(angles: Sequence[float]) -> list[Gate]:
    """9-CNOT circuit for ``prod_v exp(-i angles[v]/2 Z_v)`` conjugated by the OVP frame."""
    a1, a2, a3, a4 = angles
    return _ovp_frame() + [
        G("cx", 0, 2), G("rz", 2, angle=a1),
        G("cx", 1, 2), G("rz", 2, angle=a2),
        G("cx", 3, 2), G("rz", 2, angle=a3),
        G("cx", 1, 2), G("rz", 2, angle=a4),
        G("cx", 0, 2),
        # CX(3,2) H_2 CX(2,3) fused into one controlled-Y
        G("h", 2), G("sdg", 3), G("cx", 2, 3), G("s", 3), G("sdg", 2),
        G("rx", 0, angle=-np.pi / 2), G("cx", 0, 1),
    ]


def _frame_diagonal(words: dict[str, complex]) -> dict[int, complex]:
    """Coefficients ``d_v`` of ``C G C^dagger = sum_v d_v Z_v`` for the OVP frame ``C``."""
    frame = circuit_unitary(_ovp_frame(), 4)
    gen = PauliSum.from_words(words).to_dense()
    diag = frame @ gen @ frame.conj().T
    if np.abs(diag - np.diag(np.diag(diag))).max() > 1e-10:
        raise BlockError("generator is not diagonalized by the OVP frame")
    d = np.diag(diag)
    out = {}
    idx = np.arange(16)
    for v in _OVP_PARITIES:
        signs = 1 - 2 * (np.array([bin(b & v).count("1") for b in idx]) % 2)
        out[v] = np.dot(signs, d) / 16
    recon = sum(out[v] * (1 - 2 * (np.array([bin(b & v).count("1") for b in idx]) % 2)) for v in _OVP_PARITIES)
    if np.abs(recon - d).max() > 1e-10:
        raise BlockError("generator has diagonal components outside the OVP parity set")
    return out


def ovp_wire_order(gen: PauliSum, support: Sequence[int]) -> list[int]:
    """Order the four support wires so the OVP frame applies.

    The two wire pairs on which the words commute up to ``Z Z`` are placed at
    (0, 1) and (2, 3); the pair where the letters differ goes first.
    """
    words = _local_words(gen, support)
    ws = sorted(words)
    if len(ws) != 4:
        raise BlockError(f"OVP generators have exactly four words, got {len(ws)}")
    base = ws[0]
    pairs = []
    for w in ws[1:]:
        diff = tuple(i for i in range(4) if w[i] != base[i])
        if len(diff) == 2:
            pairs.append(diff)
    if len(pairs) != 2 or set(pairs[0]) & set(pairs[1]):
        raise BlockError("words do not have the OVP pair structure")
    p, q = pairs
    if base[p[0]] == base[p[1]]:
        p, q = q, p
    return [support[i] for i in (*p, *q)]


def ovp_block(gen: PauliSum, support: Sequence[int], theta: float = 1.0) -> list[Gate]:
    wires = ovp_wire_order(gen, support)
    d = _frame_diagonal(_local_words(gen, wires))
    angles = []
    for v in _OVP_PARITIES:
        if abs(d[v].real) > 1e-10:
            raise BlockError("generator is not anti-Hermitian")
        angles.append(2 * (1j * d[v]).real * theta)
    return relabel(ovp_block_angles(angles), wires)


# ---------------------------------------------------------------------------
# generic Pauli-string rotations
# ---------------------------------------------------------------------------

def pauli_rotation_gates(term: PauliTerm, wires_order: Sequence[int] | None = None) -> list[Gate]:
    """``exp(i phi P)`` (``phi = term.coeff``) via basis change and a CNOT staircase."""
    phi = complex(term.coeff).real
    support = list(wires_order) if wires_order is not None else list(term.support)
    word = term.word
    pre = []
    for q in support:
        if word[q] == "X":
            pre.append(G("h", q))
        elif word[q] == "Y":
            pre.append(G("rx", q, angle=np.pi / 2))
    ladder = [G("cx", support[i], support[i + 1]) for i in range(len(support) - 1)]
    core = [G("rz", support[-1], angle=-2 * phi)]
    return pre + ladder + core + inverse(ladder) + inverse(pre)


def pauli_product_gates(gen: PauliSum, theta: float = 1.0) -> list[Gate]:
    """``exp(theta * gen)`` for commuting terms, one staircase per word."""
    gates = []
    for t in sorted(gen, key=lambda t: t.key):
        c = complex(t.coeff) * theta
        gates += pauli_rotation_gates(PauliTerm(t.n, t.x, t.z, c.imag))
    return gates


def parity_conjugation(z_string: Sequence[int], anchor: int) -> list[Gate]:
    """Gates ``W`` with ``W^dagger X_anchor W = Z_string X_anchor`` (and same for ``Y``).

    A CNOT ladder gathers the parity of ``z_string`` onto its last qubit,
    followed by a CZ (as H-CX-H) onto ``anchor``.
    """
    zs = sorted(z_string)
    if not zs:
        return []
    ladder = [G("cx", zs[i], zs[i + 1]) for i in range(len(zs) - 1)]
    return ladder + [G("h", anchor), G("cx", zs[-1], anchor), G("h", anchor)]


def block_cnots(kind: str, weight: int = 0) -> int:
    """Core CNOT counts of the blocks above."""
    table = {"single": 2, "double": 13, "ovp": 9, "mvp": 13}
    if kind == "pauli":
        return 2 * (weight - 1)
    if kind not in table:
        raise KeyError(kind)
    return table[kind]
