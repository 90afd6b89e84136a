"""Operator pools: individual Pauli strings, qubit excitations, generalized
fermionic singles and doubles, and coupled exchange operators (CEOs)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from .fermion import FermionExcitation, ValidationError, excitation_to_pauli
from .pauli import PauliSum, PauliTerm

POOL_KINDS = ("qubit", "qe", "gsd", "ceo", "ceo-f")


class PoolConfigError(ValueError):
    """Unsupported pool kind or invalid pool arguments."""


@dataclass(frozen=True)
class PoolOperator:
    """One selectable pool element.

    Attributes:
        id: position in the pool.
        kind: ``"pauli"`` (single Pauli string), ``"single"``, ``"double"``,
            ``"ovp"`` (two doubles, one shared parameter) or ``"mvp"`` (doubles on
            one support, one parameter each).
        flavor: ``"qubit"`` or ``"fermionic"``.
        n: qubit count.
        excitations: constituent excitations (empty for ``"pauli"``).
        signs: one sign per constituent; only meaningful for ``"ovp"``.
        word: the Pauli word for ``"pauli"`` operators.
    """

    id: int
    kind: str
    flavor: str
    n: int
    excitations: tuple[FermionExcitation, ...] = ()
    signs: tuple[int, ...] = ()
    word: str | None = None
    label: str = field(default="", compare=False)

    @property
    def support(self) -> tuple[int, ...]:
        if self.kind == "pauli":
            return PauliTerm.from_word(self.word).support
        return tuple(sorted(set().union(*(e.support for e in self.excitations))))

    @property
    def n_params(self) -> int:
        return len(self.excitations) if self.kind == "mvp" else 1

    @cached_property
    def generators(self) -> tuple[PauliSum, ...]:
        """Anti-Hermitian generator per parameter; the unitary is ``exp(sum theta_j G_j)``."""
        if self.kind == "pauli":
            return (PauliSum.from_words({self.word: 1j}),)
        maps = [excitation_to_pauli(e, self.n) for e in self.excitations]
        if self.kind == "mvp":
            return tuple(maps)
        acc = PauliSum.zero(self.n)
        for s, m in zip(self.signs or (1,) * len(maps), maps):
            acc = acc + s * m
        return (acc,)

    @cached_property
    def generator(self) -> PauliSum:
        """Sum of all per-parameter generators (unit parameters)."""
        acc = PauliSum.zero(self.n)
        for g in self.generators:
            acc = acc + g
        return acc

    @property
    def z_string(self) -> frozenset[int]:
        if self.flavor != "fermionic" or not self.excitations:
            return frozenset()
        return self.excitations[0].z_string()

    def with_id(self, new_id: int) -> "PoolOperator":
        return PoolOperator(new_id, self.kind, self.flavor, self.n, self.excitations, self.signs, self.word, self.label)


@dataclass(frozen=True)
class Pool:
    kind: str
    n: int
    operators: tuple[PoolOperator, ...]
    restrict_sz: bool = True

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i: int) -> PoolOperator:
        return self.operators[i]


# ---------------------------------------------------------------------------
# enumeration helpers
# ---------------------------------------------------------------------------

def _spin(mode: int) -> int:
    return mode % 2


def sz_conserving(e: FermionExcitation) -> bool:
    """Spin projection is conserved under the interleaved ordering."""
    return sorted(map(_spin, e.occupied)) == sorted(map(_spin, e.virtual))


def enumerate_singles(n: int, flavor: str, restrict_sz: bool) -> list[FermionExcitation]:
    out = []
    for p, q in itertools.combinations(range(n), 2):
        e = FermionExcitation((p,), (q,), flavor)
        if not restrict_sz or sz_conserving(e):
            out.append(e)
    return out


def enumerate_doubles(n: int, flavor: str, restrict_sz: bool) -> list[FermionExcitation]:
    """One canonical double per 4-index support and pairing (three pairings per support)."""
    out = []
    for p, q, r, s in itertools.combinations(range(n), 4):
        for occ, vir in (((p, q), (r, s)), ((p, r), (q, s)), ((p, s), (q, r))):
            e = FermionExcitation(occ, vir, flavor)
            if not restrict_sz or sz_conserving(e):
                out.append(e)
    return out


def ovp_partners(e: FermionExcitation) -> list[tuple[FermionExcitation, int]]:
    """The doubles that combine with ``e`` into an OVP-CEO.

    Writing ``e = s * T_{a1 b1 -> a2 b2}``, the partner is ``T_{a2 b1 -> a1 b2}``
    and the "+" operator is ``T_{a1 b1 -> a2 b2} + T_{a2 b1 -> a1 b2}``.  Returns
    ``(partner, s)`` for the two representations of ``e`` reaching distinct
    pairings.
    """
    (o1, o2), (v1, v2) = e.occupied, e.virtual
    return [
        (FermionExcitation((v1, o2), (o1, v2), e.flavor), 1),
        # e = -T_{o1 o2 -> v2 v1}
        (FermionExcitation((v2, o2), (o1, v1), e.flavor), -1),
    ]


def _pairing(e: FermionExcitation) -> frozenset:
    return frozenset((frozenset(e.occupied), frozenset(e.virtual)))


def _op_key(gen: PauliSum) -> tuple:
    return tuple(sorted((k, round(c.real, 12), round(c.imag, 12)) for k, c in gen.items()))


# ---------------------------------------------------------------------------
# pool construction
# ---------------------------------------------------------------------------

def build_pool(kind: str, n: int, restrict_sz: bool = True) -> Pool:
    """Build an operator pool.

    Args:
        kind: one of ``qubit``, ``qe``, ``gsd``, ``ceo``, ``ceo-f``.
        n: qubit (spin-orbital) count, even and at least 4.
        restrict_sz: keep only excitations conserving the spin projection.

    Raises:
        PoolConfigError: unknown kind or unsupported ``n``.
    """
    if kind not in POOL_KINDS:
        raise PoolConfigError(f"unknown pool kind {kind!r}; expected one of {POOL_KINDS}")
    if n < 4 or n % 2:
        raise PoolConfigError(f"pools need an even qubit count >= 4, got {n}")
    flavor = "fermionic" if kind in ("gsd", "ceo-f") else "qubit"
    singles = enumerate_singles(n, flavor, restrict_sz)
    doubles = enumerate_doubles(n, flavor, restrict_sz)

    ops: list[PoolOperator] = []
    if kind in ("qe", "gsd"):
        for e in singles:
            ops.append(PoolOperator(0, "single", flavor, n, (e,), (1,), label=e.label()))
        for e in doubles:
            ops.append(PoolOperator(0, "double", flavor, n, (e,), (1,), label=e.label()))
    elif kind == "qubit":
        seen = set()
        for e in singles + doubles:
            for t in excitation_to_pauli(e, n):
                # one representative per string; generator i * P
                if t.key in seen:
                    continue
                seen.add(t.key)
                ops.append(PoolOperator(0, "pauli", "qubit", n, word=t.word, label=t.word))
    else:
        for e in singles:
            ops.append(PoolOperator(0, "single", "qubit", n, (e.with_flavor("qubit"),), (1,), label=e.label()))
        allowed = {_pairing(e): e for e in doubles}
        for e in doubles:
            for partner, rep in ovp_partners(e):
                if _pairing(partner) not in allowed:
                    continue
                # visit each unordered pair of pairings once
                if sorted(map(sorted, _pairing(partner))) < sorted(map(sorted, _pairing(e))):
                    continue
                for sign in (1, -1):
                    tag = "+" if sign > 0 else "-"
                    ops.append(PoolOperator(0, "ovp", "qubit", n, (e.with_flavor("qubit"), partner.with_flavor("qubit")),
                                            (rep, sign), label=f"ovp{tag}[{e.label()},{partner.label()}]"))
        if kind == "ceo-f":
            ops = [fermionize_ceo(op) for op in ops]

    # drop operators with identical mapped generators (up to overall sign)
    unique: list[PoolOperator] = []
    seen_keys = set()
    for op in ops:
        key = _op_key(op.generator)
        neg = _op_key(-1 * op.generator)
        if key in seen_keys or neg in seen_keys:
            continue
        seen_keys.add(key)
        unique.append(op.with_id(len(unique)))
    return Pool(kind, n, tuple(unique), restrict_sz)


def fermionize_ceo(p: PoolOperator) -> PoolOperator:
    """Fermionic version of a qubit CEO (or QE single/double).

    Qubit ladders become fermionic ones.  Constituent signs are re-chosen so the
    fermionic generator equals the qubit generator with the JW anticommutation
    string attached, which keeps the sum/difference labels of the pair intact.
    """
    if p.flavor == "fermionic":
        return p
    if p.kind == "pauli":
        raise ValidationError("single Pauli strings have no fermionic counterpart")
    n = p.n
    exc = tuple(e.with_flavor("fermionic") for e in p.excitations)
    zmask = 0
    for q in exc[0].z_string():
        zmask |= 1 << q
    zop = PauliSum(n, {(0, zmask): 1})
    signs = []
    for eq, ef, s in zip(p.excitations, exc, p.signs or (1,) * len(exc)):
        target = zop * excitation_to_pauli(eq, n)
        actual = excitation_to_pauli(ef, n)
        rel = 1 if actual.allclose(target) else -1
        signs.append(s * rel)
    label = p.label.replace("q(", "f(")
    if p.kind in ("single", "double"):
        # a lone excitation keeps its own sign convention
        return PoolOperator(p.id, p.kind, "fermionic", n, exc, (1,), label=label)
    return PoolOperator(p.id, p.kind, "fermionic", n, exc, tuple(signs), label=label)


def promote_to_mvp(op: PoolOperator, pool: Pool | None = None) -> PoolOperator:
    """Turn an OVP-CEO into an MVP-CEO over every allowed double on its support.

    The MVP operator carries one parameter per constituent double.  With a pool,
    only doubles compatible with the pool's spin restriction are included.
    """
    if op.kind != "ovp":
        raise ValidationError("only OVP operators can be promoted")
    support = op.support
    flavor = op.flavor
    restrict = pool.restrict_sz if pool is not None else True
    p, q, r, s = support
    exc = []
    for occ, vir in (((p, q), (r, s)), ((p, r), (q, s)), ((p, s), (q, r))):
        e = FermionExcitation(occ, vir, flavor)
        if not restrict or sz_conserving(e):
            exc.append(e)
    return PoolOperator(op.id, "mvp", flavor, op.n, tuple(exc), (1,) * len(exc), label=f"mvp[{','.join(map(str, support))}]")
