"""Exact statevector simulation in the logical frame.

Amplitudes are indexed little-endian: bit ``q`` of the basis index is qubit
``q``.  Pool-operator exponentials are products of commuting Pauli rotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .pauli import PauliSum, PauliTerm, commutes, parity_signs
from .pools import PoolOperator

MAX_EIG_QUBITS = 16
EIG_TOL = 1e-10
EIG_SEED = 1234

_NEG_IPOW = (1, -1j, -1, 1j)


class CapabilityError(RuntimeError):
    """Problem size outside what the simulator supports."""


class InvariantError(RuntimeError):
    """Internal invariant violated (e.g. non-commuting generator terms)."""


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(n: int, bits: int) -> StateVector:
    amp = np.zeros(1 << n, dtype=complex)
    amp[bits] = 1.0
    return StateVector(n, amp)


def hf_reference(n: int, n_electrons: int) -> StateVector:
    """Hartree-Fock determinant: modes ``0 .. n_electrons - 1`` occupied."""
    if not 0 <= n_electrons <= n:
        raise ValueError(f"cannot place {n_electrons} electrons in {n} modes")
    return basis_state(n, (1 << n_electrons) - 1)


# ---------------------------------------------------------------------------
# Pauli action
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _index(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


@lru_cache(maxsize=4096)
def _z_signs(n: int, z: int) -> np.ndarray:
    return parity_signs(_index(n), z)


def pauli_apply(amp: np.ndarray, n: int, x: int, z: int) -> np.ndarray:
    """Return ``P |amp>`` for the Hermitian word ``(x, z)``.

    ``(P psi)[c] = i^{|x & z|} (-1)^{|(c ^ x) & z|} psi[c ^ x]``.
    """
    src = amp[_index(n) ^ x] if x else amp
    # (-1)^{|(c^x)&z|} = (-1)^{|c&z|} (-1)^{|x&z|}, folded into the i^{|x&z|} prefactor
    phase = _NEG_IPOW[bin(x & z).count("1") % 4]
    return phase * _z_signs(n, z) * src if z else phase * src


def apply_pauli_rotation(s: StateVector, p: PauliTerm) -> StateVector:
    """``s <- cos(phi) s + i sin(phi) P s`` with ``phi = p.coeff`` (real)."""
    phi = complex(p.coeff)
    if abs(phi.imag) > 1e-12:
        raise ValueError("rotation angle must be real")
    phi = phi.real
    s.amplitudes = _rotate(s.amplitudes, s.n, p.x, p.z, phi)
    return s


def _rotate(amp: np.ndarray, n: int, x: int, z: int, phi: float) -> np.ndarray:
    if phi == 0.0:
        return amp
    return np.cos(phi) * amp + 1j * np.sin(phi) * pauli_apply(amp, n, x, z)


def _rotation_list(gen: PauliSum) -> list[tuple[int, int, float]]:
    """Terms ``c P`` of an anti-Hermitian generator as ``(x, z, phi)`` with ``c = i phi``."""
    out = []
    for (x, z), c in sorted(gen.items()):
        if abs(c.real) > 1e-12:
            raise InvariantError("generator is not anti-Hermitian")
        out.append((x, z, c.imag))
    return out


@lru_cache(maxsize=None)
def _checked_rotations(op: PoolOperator) -> tuple[tuple[tuple[int, int, float], ...], ...]:
    terms = [t for g in op.generators for t in g]
    for i, a in enumerate(terms):
        for b in terms[i + 1:]:
            if not commutes(a, b):
                raise InvariantError(f"generator terms of {op.label or op.id} do not commute")
    return tuple(tuple(_rotation_list(g)) for g in op.generators)


def _params(op: PoolOperator, theta) -> np.ndarray:
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.size == 1 and op.n_params > 1:
        th = np.full(op.n_params, th[0])
    if th.size != op.n_params:
        raise ValueError(f"operator {op.id} takes {op.n_params} parameters, got {th.size}")
    return th


@dataclass(frozen=True)
class FlipTable:
    """Action of a single-flip-mask generator restricted to the states it touches.

    ``(G_j psi)[c] = coeffs[j][i] * psi[partner[i]]`` for ``c = rows[i]``, and
    zero on every other basis state.
    """

    mask: int
    rows: np.ndarray
    partner: np.ndarray
    coeffs: tuple[np.ndarray, ...]
    mags: np.ndarray
    units: np.ndarray


@lru_cache(maxsize=4096)
def _flip_table(op: PoolOperator) -> FlipTable | None:
    """Compressed table when every term flips the same qubits, else None.

    Excitation generators pair ``c`` with ``c ^ mask``, so the exponential is a
    2x2 rotation on each pair.
    """
    rots = _checked_rotations(op)
    masks = {x for r in rots for x, _, _ in r}
    if len(masks) != 1:
        return None
    (x,) = masks
    n = op.n
    full = []
    for r in rots:
        w = np.zeros(1 << n, dtype=complex)
        for _, z, phi in r:
            w += (1j * phi * _NEG_IPOW[bin(x & z).count("1") % 4]) * (_z_signs(n, z) if z else 1.0)
        full.append(w)
    rows = np.flatnonzero(np.any(np.abs(np.array(full)) > 1e-14, axis=0))
    coeffs = tuple(w[rows] for w in full)
    mags = np.abs(coeffs[0])
    return FlipTable(x, rows, rows ^ x, coeffs, mags, coeffs[0] / np.where(mags > 0, mags, 1.0))


def rotation_product_amp(amp: np.ndarray, n: int, op: PoolOperator, theta, sign: float = 1.0) -> np.ndarray:
    """Exponential as a product of single-string rotations (reference route)."""
    for rots, t in zip(_checked_rotations(op), _params(op, theta)):
        for x, z, phi in rots:
            amp = _rotate(amp, n, x, z, sign * t * phi)
    return amp


def exp_generator_amp(amp: np.ndarray, n: int, op: PoolOperator, theta, sign: float = 1.0) -> np.ndarray:
    """``exp(sign * sum_j theta_j G_j) |amp>``.

    With one flip mask the generator squares to ``-|w|^2`` on each pair, so the
    exponential is ``cos|w| + sin|w|/|w| G`` applied pointwise.
    """
    table = _flip_table(op)
    th = _params(op, theta)
    if table is None:
        return rotation_product_amp(amp, n, op, th, sign)
    out = amp.copy()
    if len(th) == 1:
        ang = sign * th[0] * table.mags
        out[table.rows] = np.cos(ang) * amp[table.rows] + np.sin(ang) * table.units * amp[table.partner]
        return out
    w = sign * th[0] * table.coeffs[0]
    for t, c in zip(th[1:], table.coeffs[1:]):
        w = w + sign * t * c
    mag = np.abs(w)
    out[table.rows] = np.cos(mag) * amp[table.rows] + np.sinc(mag / np.pi) * w * amp[table.partner]
    return out


def apply_generator_exp(s: StateVector, op: PoolOperator, theta) -> StateVector:
    """``s <- exp(sum_j theta_j G_j) s`` exactly (all terms commute)."""
    s.amplitudes = exp_generator_amp(s.amplitudes, s.n, op, theta)
    return s


def generator_apply(amp: np.ndarray, n: int, op: PoolOperator, index: int = 0) -> np.ndarray:
    """``G_index |amp>``."""
    table = _flip_table(op)
    if table is not None:
        out = np.zeros_like(amp)
        out[table.rows] = table.coeffs[index] * amp[table.partner]
        return out
    out = np.zeros_like(amp)
    for x, z, phi in _checked_rotations(op)[index]:
        out += 1j * phi * pauli_apply(amp, n, x, z)
    return out


def generator_overlap(bra: np.ndarray, ket: np.ndarray, n: int, op: PoolOperator, index: int = 0) -> complex:
    """``<bra| G_index |ket>`` without forming ``G |ket>`` when possible."""
    table = _flip_table(op)
    if table is None:
        return complex(np.vdot(bra, generator_apply(ket, n, op, index)))
    return complex(np.vdot(bra[table.rows], table.coeffs[index] * ket[table.partner]))


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

class Observable:
    """Hermitian PauliSum with a cached sparse matrix."""

    def __init__(self, h: PauliSum):
        if not h.is_hermitian(1e-10):
            raise ValueError("observable must be Hermitian (real coefficients)")
        self.pauli = h
        self.n = h.n
        self.matrix = h.to_sparse()

    def apply(self, amp: np.ndarray) -> np.ndarray:
        return self.matrix @ amp


def as_observable(h) -> Observable:
    return h if isinstance(h, Observable) else Observable(h)


def expectation(s: StateVector, h) -> float:
    """``<s|H|s>`` for Hermitian ``H``."""
    obs = as_observable(h)
    val = np.vdot(s.amplitudes, obs.apply(s.amplitudes))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag}")
    return float(val.real)


def selection_gradient(s: StateVector, h, op: PoolOperator, h_psi: np.ndarray | None = None):
    """Energy derivative ``<s|[H, A]|s> = 2 Re <H s | A s>`` of appending ``op``.

    Returns a float for one-parameter operators.  Multi-parameter (MVP)
    operators return ``(vector, l2_norm)``.
    """
    if h_psi is None:
        h_psi = as_observable(h).apply(s.amplitudes)
    grads = np.array([2.0 * generator_overlap(h_psi, s.amplitudes, s.n, op, j).real
                      for j in range(op.n_params)])
    if op.n_params == 1:
        return float(grads[0])
    return grads, float(np.linalg.norm(grads))


# ---------------------------------------------------------------------------
# ansatz
# ---------------------------------------------------------------------------

@dataclass
class Ansatz:
    """Ordered pool operators with parameters; element 0 acts first."""

    n: int
    reference: int
    operators: list[PoolOperator] = field(default_factory=list)
    parameters: list[np.ndarray] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return int(sum(op.n_params for op in self.operators))

    def flat_parameters(self) -> np.ndarray:
        if not self.parameters:
            return np.zeros(0)
        return np.concatenate([np.atleast_1d(p) for p in self.parameters]).astype(float)

    def set_flat(self, flat: Sequence[float]) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise ValueError("parameter count mismatch")
        if not np.all(np.isfinite(flat)):
            raise ValueError("parameters must be finite")
        out, k = [], 0
        for op in self.operators:
            out.append(flat[k:k + op.n_params].copy())
            k += op.n_params
        self.parameters = out

    def append(self, op: PoolOperator, theta=None) -> None:
        self.operators.append(op)
        self.parameters.append(np.zeros(op.n_params) if theta is None else np.atleast_1d(np.asarray(theta, float)).copy())

    def copy(self) -> "Ansatz":
        return Ansatz(self.n, self.reference, list(self.operators), [p.copy() for p in self.parameters])


def prepare(a: Ansatz, flat: np.ndarray | None = None) -> np.ndarray:
    amp = basis_state(a.n, a.reference).amplitudes
    flat = a.flat_parameters() if flat is None else np.asarray(flat, float)
    k = 0
    for op in a.operators:
        amp = exp_generator_amp(amp, a.n, op, flat[k:k + op.n_params])
        k += op.n_params
    return amp


def ansatz_energy_and_gradient(a: Ansatz, h, flat: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Energy and exact parameter gradient via a reverse (adjoint) sweep.

    With ``psi_k = U_k ... U_1 psi_0`` and ``lam = H psi_N``, the derivative
    for a parameter of ``U_k`` is ``2 Re <lam_k | G psi_k>``, where both vectors
    are pulled back by ``U_k^dagger`` on the way down.
    """
    obs = as_observable(h)
    flat = a.flat_parameters() if flat is None else np.asarray(flat, float)
    psi = prepare(a, flat)
    lam = obs.apply(psi)
    energy = float(np.vdot(psi, lam).real)
    grad = np.zeros(flat.size)
    k = flat.size
    for op in reversed(a.operators):
        k -= op.n_params
        th = flat[k:k + op.n_params]
        for j in range(op.n_params):
            grad[k + j] = 2.0 * generator_overlap(lam, psi, a.n, op, j).real
        psi = exp_generator_amp(psi, a.n, op, th, sign=-1.0)
        lam = exp_generator_amp(lam, a.n, op, th, sign=-1.0)
    return energy, grad


def exact_ground_energy(h, n_max: int = MAX_EIG_QUBITS) -> float:
    """Lowest eigenvalue via Lanczos on the sparse matrix (dense below 7 qubits)."""
    obs = as_observable(h)
    n = obs.n
    if n > n_max:
        raise CapabilityError(f"{n} qubits exceeds the {n_max}-qubit eigensolver limit")
    if n <= 6:
        return float(np.linalg.eigvalsh(obs.matrix.toarray())[0])
    rng = np.random.default_rng(EIG_SEED)
    v0 = rng.standard_normal(1 << n) + 0j
    vals = spla.eigsh(obs.matrix, k=1, which="SA", v0=v0, tol=EIG_TOL)[0]
    return float(vals[0])


def sector_ground_energy(h, n_electrons: int) -> float:
    """Lowest eigenvalue restricted to a fixed particle number."""
    obs = as_observable(h)
    idx = np.array([b for b in range(1 << obs.n) if bin(b).count("1") == n_electrons])
    sub = obs.matrix[idx][:, idx]
    if len(idx) <= 400:
        return float(np.linalg.eigvalsh(sub.toarray())[0])
    rng = np.random.default_rng(EIG_SEED)
    v0 = rng.standard_normal(len(idx)) + 0j
    return float(spla.eigsh(sp.csr_matrix(sub), k=1, which="SA", v0=v0, tol=EIG_TOL)[0][0])
