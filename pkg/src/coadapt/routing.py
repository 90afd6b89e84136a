"""Connectivity graphs, layouts, SWAP/FSWAP routing and CNOT accounting.

Routing works on a line of physical positions (LNN) or, for the SWAP
variant, on a general graph by greedy gathering along shortest paths.  The
penalty functions count SWAPs/FSWAPs from closed forms; the synthesizer
replays the same moves and emits gates, so both agree by construction and
the tests compare them against independent formulas.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from . import circuits as C
from .fermion import FermionExcitation, excitation_to_pauli, strip_z
from .pauli import PauliSum, remap_qubit_indices, validate_permutation
from .pools import PoolOperator

VARIANTS = ("swap", "fswap", "ata")
CENTER_FORMULAS = ("mean", "paper-literal")


class GraphError(ValueError):
    """Invalid connectivity graph or unroutable support."""


class RoutingConfigError(ValueError):
    """Routing variant incompatible with the operator or graph."""


class FlavorError(RoutingConfigError):
    """Penalty variant does not match the operator flavor."""


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConnectivityGraph:
    """Undirected coupling graph on ``n`` physical qubits."""

    n: int
    edges: frozenset
    kind: str = "custom"
    shape: tuple[int, ...] = ()

    def __post_init__(self):
        clean = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop on qubit {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            clean.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(clean))
        if self.n > 1:
            ncomp = connected_components(self._adjacency(), directed=False)[0]
            if ncomp != 1:
                raise GraphError("connectivity graph is not connected")

    # constructors -----------------------------------------------------------
    @classmethod
    def linear(cls, n: int) -> "ConnectivityGraph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)), "linear")

    @classmethod
    def ata(cls, n: int) -> "ConnectivityGraph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)), "ata")

    @classmethod
    def grid(cls, w: int, h: int) -> "ConnectivityGraph":
        """Row-major ``w x h`` lattice; qubit ``q`` sits at ``(q % w, q // w)``."""
        edges = set()
        for y in range(h):
            for x in range(w):
                q = y * w + x
                if x + 1 < w:
                    edges.add((q, q + 1))
                if y + 1 < h:
                    edges.add((q, q + w))
        return cls(w * h, frozenset(edges), "grid", (w, h))

    @classmethod
    def from_edgelist(cls, text: str, n: int | None = None) -> "ConnectivityGraph":
        edges = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"edgelist line {lineno}: expected 'u v', got {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise GraphError(f"edgelist line {lineno}: {exc}") from None
        if not edges:
            raise GraphError("edgelist is empty")
        size = max(max(e) for e in edges) + 1
        return cls(n if n is not None else size, frozenset(edges), "custom")

    @classmethod
    def parse(cls, spec: str, n: int) -> "ConnectivityGraph":
        """Parse ``linear``, ``ata``, ``grid:WxH`` or ``file:<path>`` for ``n`` qubits."""
        if spec == "linear":
            return cls.linear(n)
        if spec == "ata":
            return cls.ata(n)
        if spec.startswith("grid:"):
            try:
                w, h = (int(v) for v in spec[5:].lower().split("x"))
            except ValueError:
                raise RoutingConfigError(f"bad grid spec {spec!r}; expected grid:WxH") from None
            if w * h != n:
                raise RoutingConfigError(f"grid {w}x{h} has {w * h} qubits, problem needs {n}")
            return cls.grid(w, h)
        if spec.startswith("file:"):
            g = cls.from_edgelist(Path(spec[5:]).read_text(), n)
            return g
        raise RoutingConfigError(f"unknown connectivity {spec!r}")

    # queries ----------------------------------------------------------------
    def _adjacency(self) -> sp.csr_matrix:
        if not self.edges:
            return sp.csr_matrix((self.n, self.n))
        u, v = zip(*self.edges)
        data = np.ones(2 * len(u))
        return sp.csr_matrix((data, (u + v, v + u)), shape=(self.n, self.n))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nb = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].append(v)
            nb[v].append(u)
        return tuple(tuple(sorted(x)) for x in nb)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs hop distances (BFS)."""
        return shortest_path(self._adjacency(), unweighted=True, directed=False).astype(int)

    def is_line_order(self) -> bool:
        """True when ``i -- i+1`` are edges, so physical index is a line position."""
        return self.kind in ("linear", "ata")


def bfs_distances(g: ConnectivityGraph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def average_pair_distance(g: ConnectivityGraph) -> float:
    """Mean shortest-path distance over unordered pairs of distinct qubits.

    Lines and grids use exact coordinate sums (hop distance equals Manhattan
    distance there); other graphs run a BFS from every vertex.
    """
    n = g.n
    if n < 2:
        raise GraphError("need at least two qubits")
    pairs = n * (n - 1) // 2
    if g.kind == "ata":
        return 1.0
    if g.kind == "linear":
        return sum((n - k) * k for k in range(1, n)) / pairs
    if g.kind == "grid":
        w, h = g.shape
        sx = sum((w - k) * k for k in range(1, w)) * 2  # ordered pairs of columns
        sy = sum((h - k) * k for k in range(1, h)) * 2
        total = sx * h * h + sy * w * w  # ordered pairs of sites
        return total / 2 / pairs
    total = sum(sum(bfs_distances(g, s)) for s in range(n))
    return total / 2 / pairs


# ---------------------------------------------------------------------------
# layouts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Layout:
    """Bijection logical entity -> physical qubit.

    ``entity`` is ``"qubit"`` for the SWAP variant and ``"mode"`` when
    fermionic modes are tracked through FSWAPs.  ``exchanges`` records every
    physical exchange applied since the identity layout.
    """

    phys: tuple[int, ...]
    entity: str = "qubit"
    exchanges: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "phys", validate_permutation(self.phys, len(self.phys)))
        if self.entity not in ("qubit", "mode"):
            raise ValueError(f"unknown layout entity {self.entity!r}")

    @classmethod
    def identity(cls, n: int, entity: str = "qubit") -> "Layout":
        return cls(tuple(range(n)), entity)

    @property
    def n(self) -> int:
        return len(self.phys)

    @cached_property
    def logical_at(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for l, p in enumerate(self.phys):
            inv[p] = l
        return tuple(inv)

    def exchange(self, a: int, b: int) -> "Layout":
        """Swap the entities sitting on physical qubits ``a`` and ``b``."""
        phys = list(self.phys)
        la, lb = self.logical_at[a], self.logical_at[b]
        phys[la], phys[lb] = b, a
        return Layout(tuple(phys), self.entity, self.exchanges + ((a, b),))

    def replay(self) -> "Layout":
        """Identity layout with the recorded exchanges re-applied."""
        out = Layout.identity(self.n, self.entity)
        for a, b in self.exchanges:
            out = out.exchange(a, b)
        return out


def layout_unitary(layout: Layout) -> np.ndarray:
    """Dense map from logical-frame states to physical-frame states.

    Qubit layouts permute tensor factors.  Mode layouts also pick up the
    fermionic sign of reordering the occupied modes into physical order.
    """
    n = layout.n
    dim = 1 << n
    out = np.zeros((dim, dim))
    for b in range(dim):
        occ = [m for m in range(n) if (b >> m) & 1]
        target = sum(1 << layout.phys[m] for m in occ)
        sign = 1.0
        if layout.entity == "mode":
            pos = [layout.phys[m] for m in occ]
            inversions = sum(1 for i in range(len(pos)) for j in range(i + 1, len(pos)) if pos[i] > pos[j])
            sign = -1.0 if inversions % 2 else 1.0
        out[target, b] = sign
    return out


def physical_generators(op: PoolOperator, layout: Layout) -> tuple[PauliSum, ...]:
    """Per-parameter generators of ``op`` written in the physical frame."""
    if layout.entity == "qubit":
        return tuple(remap_qubit_indices(g, layout.phys) for g in op.generators)
    if op.kind == "pauli":
        raise FlavorError("mode layouts need excitation-based operators")
    mapped = []
    for e in op.excitations:
        me = FermionExcitation(tuple(layout.phys[i] for i in e.occupied),
                               tuple(layout.phys[i] for i in e.virtual), e.flavor)
        mapped.append(excitation_to_pauli(me, op.n))
    if op.kind == "mvp":
        return tuple(mapped)
    acc = PauliSum.zero(op.n)
    for s, m in zip(op.signs or (1,) * len(mapped), mapped):
        acc = acc + s * m
    return (acc,)


def physical_observable(h, layout: Layout) -> PauliSum:
    """Observable in the physical frame: ``P H P^dagger`` for the layout map ``P``.

    Qubit layouts remap Pauli indices of a PauliSum.  Mode layouts relabel
    the fermionic operator before the Jordan-Wigner transform.
    """
    if layout.entity == "qubit":
        if not isinstance(h, PauliSum):
            h = h.jordan_wigner()
        return remap_qubit_indices(h, layout.phys)
    from .fermion import FermionOperator, permute_modes

    if not isinstance(h, FermionOperator):
        raise RoutingConfigError("mode layouts need the fermionic Hamiltonian")
    return permute_modes(h, layout.phys).jordan_wigner()


# ---------------------------------------------------------------------------
# core counts
# ---------------------------------------------------------------------------

def core_cnot_count(kind: str, weight: int | None = None) -> int:
    """CNOTs in the core block of an adjacently routed operator.

    ``weight`` is required for ``"pauli"`` (single Pauli-string rotation).
    """
    if kind == "pauli":
        if weight is None or weight < 1:
            raise RoutingConfigError("pauli operators need a positive weight")
        return 2 * (weight - 1)
    try:
        return C.block_cnots(kind)
    except KeyError:
        raise RoutingConfigError(f"unknown operator kind {kind!r}") from None


def _op_core(op: PoolOperator) -> int:
    if op.kind == "pauli":
        return core_cnot_count("pauli", len(op.support))
    return core_cnot_count(op.kind)


def ata_cnot_count(op: PoolOperator) -> int:
    """CNOTs on all-to-all hardware without routing.

    Fermionic operators pay a parity ladder and a CZ on each side of the
    core block: ``2 |Z| + core`` for a nonempty anticommutation string.
    """
    z = len(op.z_string)
    return _op_core(op) + (2 * z if z else 0)


def ata_fermionic_anchored_count(core: int, z_len: int) -> int:
    """Ladder formula ``core + 2 (|Z| - 1)`` matching the tabulated 100-qubit value."""
    return core + (2 * (z_len - 1) if z_len else 0)


# ---------------------------------------------------------------------------
# line routing
# ---------------------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def route_center_for_double(positions: Sequence[int], n_line: int | None = None,
                            formula: str = "mean") -> tuple[int, int, int, int]:
    """Target block for four line positions.

    ``formula="mean"`` centres on ``k = round_half_up(sum / 4)``: when the mean
    was rounded up the block is ``[k-2, k+1]``, otherwise ``[k-1, k+2]``.
    ``"paper-literal"`` uses ``sum / 2`` and the opposite branch assignment.
    Blocks are clamped to ``[0, n_line - 1]``.
    """
    p = sorted(int(x) for x in positions)
    if len(p) != 4 or len(set(p)) != 4:
        raise GraphError(f"need four distinct positions, got {positions}")
    if formula == "mean":
        m = sum(p) / 4
        k = _round_half_up(m)
        start = k - 2 if k > m else k - 1
    elif formula == "paper-literal":
        m = sum(p) / 2
        k = _round_half_up(m)
        start = k - 1 if k > m else k - 2
    else:
        raise RoutingConfigError(f"unknown center formula {formula!r}")
    upper = (n_line if n_line is not None else max(p) + 1) - 4
    start = min(max(start, 0), max(upper, 0))
    return tuple(range(start, start + 4))


def _line_target(positions: Sequence[int], n_line: int, formula: str) -> list[int]:
    p = sorted(positions)
    if len(p) == 1:
        return p
    if len(p) == 2:
        return [p[0], p[0] + 1]
    if len(p) == 4:
        return list(route_center_for_double(p, n_line, formula))
    # generic width: contiguous block around the mean
    w = len(p)
    start = _round_half_up(sum(p) / w - (w - 1) / 2)
    start = min(max(start, 0), n_line - w)
    return list(range(start, start + w))


def line_swaps(positions: Sequence[int], n_line: int, formula: str = "mean") -> list[tuple[int, int]]:
    """Adjacent exchanges bringing ``positions`` onto a contiguous block.

    Order-preserving: left movers are moved first (leftmost first), then right
    movers (rightmost first); total length is ``sum |x - x'|``.
    """
    p = sorted(positions)
    target = _line_target(p, n_line, formula)
    moves = []
    for x, t in zip(p, target):
        if x > t:
            moves += [(y - 1, y) for y in range(x, t, -1)]
    for x, t in reversed(list(zip(p, target))):
        if x < t:
            moves += [(y, y + 1) for y in range(x, t)]
    return moves


def line_swap_count(positions: Sequence[int], n_line: int, formula: str = "mean") -> int:
    p = sorted(positions)
    return sum(abs(x - t) for x, t in zip(p, _line_target(p, n_line, formula)))


# ---------------------------------------------------------------------------
# general-graph gathering (SWAP variant)
# ---------------------------------------------------------------------------

def _induced_connected(g: ConnectivityGraph, nodes: Sequence[int]) -> bool:
    nodes = set(nodes)
    start = next(iter(nodes))
    seen, stack = {start}, [start]
    while stack:
        u = stack.pop()
        for v in g.neighbors[u]:
            if v in nodes and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == nodes


def gather_swaps(g: ConnectivityGraph, positions: Sequence[int]) -> list[tuple[int, int]]:
    """Exchanges that make ``positions`` a connected cluster on ``g``.

    The anchor is the vertex minimizing summed distance to the support (lowest
    index on ties).  Support qubits join the cluster in order of distance to
    the anchor, each along a shortest path that avoids the cluster.
    """
    pos = sorted(positions)
    if len(pos) < 2 or _induced_connected(g, pos):
        return []
    d = g.distances
    anchor = min(range(g.n), key=lambda v: (int(sum(d[v][p] for p in pos)), v))
    order = sorted(pos, key=lambda p: (int(d[anchor][p]), p))
    occupied = {p: p for p in pos}  # original label -> current vertex
    moves = []

    def apply(a, b):
        moves.append((min(a, b), max(a, b)))
        for k, v in occupied.items():
            if v == a:
                occupied[k] = b
            elif v == b:
                occupied[k] = a

    first = order[0]
    path = _bfs_path(g, occupied[first], {anchor}, blocked=set())
    for a, b in zip(path, path[1:]):
        apply(a, b)
    cluster = {occupied[first]}
    for p in order[1:]:
        cur = occupied[p]
        goal = {v for c in cluster for v in g.neighbors[c] if v not in cluster}
        if cur not in goal:
            path = _bfs_path(g, cur, goal, blocked=cluster)
            for a, b in zip(path, path[1:]):
                apply(a, b)
        cluster.add(occupied[p])
    return moves


def _bfs_path(g: ConnectivityGraph, src: int, goals: set, blocked: set) -> list[int]:
    if src in goals:
        return [src]
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if v in prev or v in blocked:
                continue
            prev[v] = u
            if v in goals:
                path = [v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(v)
    raise GraphError("support cannot be gathered on this graph")


# ---------------------------------------------------------------------------
# penalties
# ---------------------------------------------------------------------------

def _check_variant(op: PoolOperator, g: ConnectivityGraph, variant: str) -> None:
    if variant not in VARIANTS:
        raise RoutingConfigError(f"unknown routing variant {variant!r}")
    if variant == "ata" and g.kind != "ata":
        raise RoutingConfigError("unrouted blocks need all-to-all connectivity")
    if variant == "swap" and op.flavor != "qubit":
        raise FlavorError("SWAP routing needs qubit-flavor operators; use FSWAP for fermionic pools")
    if variant == "fswap":
        if op.flavor != "fermionic":
            raise FlavorError("FSWAP routing needs fermionic-flavor operators")
        if not g.is_line_order():
            raise RoutingConfigError("FSWAP routing follows the Jordan-Wigner line; use linear or ata connectivity")


def routing_moves(op: PoolOperator, layout: Layout, g: ConnectivityGraph,
                  variant: str, formula: str = "mean") -> list[tuple[int, int]]:
    """Physical exchanges the router applies before the core block."""
    _check_variant(op, g, variant)
    if layout.n != g.n:
        raise GraphError(f"layout has {layout.n} entities, graph has {g.n} qubits")
    pos = [layout.phys[q] for q in op.support]
    if variant == "ata":
        return []
    if variant == "fswap":
        return line_swaps(pos, g.n, formula)
    if g.kind == "ata":
        return []
    if g.kind == "linear":
        return line_swaps(pos, g.n, formula)
    return gather_swaps(g, pos)


def swap_penalty(op: PoolOperator, layout: Layout, g: ConnectivityGraph,
                 restore: bool = False, formula: str = "mean") -> int:
    """Core CNOTs plus 3 per SWAP (twice the ladder when ``restore``)."""
    _check_variant(op, g, "swap")
    pos = [layout.phys[q] for q in op.support]
    if g.kind == "ata":
        swaps = 0
    elif g.kind == "linear":
        swaps = line_swap_count(pos, g.n, formula)
    else:
        swaps = len(gather_swaps(g, pos))
    return _op_core(op) + 3 * swaps * (2 if restore else 1)


def fswap_penalty(op: PoolOperator, layout: Layout, g: ConnectivityGraph,
                  restore: bool = False, formula: str = "mean") -> int:
    """Core CNOTs plus 2 per FSWAP; routed modes are JW-adjacent so no Z string remains."""
    _check_variant(op, g, "fswap")
    pos = [layout.phys[q] for q in op.support]
    swaps = line_swap_count(pos, g.n, formula)
    return _op_core(op) + 2 * swaps * (2 if restore else 1)


def routed_cost(op: PoolOperator, layout: Layout, g: ConnectivityGraph, variant: str,
                restore: bool = False, formula: str = "mean") -> int:
    if variant == "swap":
        return swap_penalty(op, layout, g, restore, formula)
    if variant == "fswap":
        return fswap_penalty(op, layout, g, restore, formula)
    _check_variant(op, g, variant)
    return ata_cnot_count(op)


# ---------------------------------------------------------------------------
# routed circuits
# ---------------------------------------------------------------------------

@dataclass
class CoreBlock:
    """Fixed-cost block implementing one operator exponential on adjacent wires."""

    kind: str
    wires: tuple[int, ...]
    gates: list
    label: str = ""

    @property
    def cnots(self) -> int:
        return C.cnot_count(self.gates)


@dataclass
class RoutedCircuit:
    n: int
    items: list = field(default_factory=list)
    entry: Layout | None = None
    exit: Layout | None = None

    @property
    def cnot_count(self) -> int:
        return sum(it.cnots for it in self.items)

    def gates(self, expand: bool = False) -> list:
        out = []
        for it in self.items:
            out.extend(it.gates if isinstance(it, CoreBlock) else [it])
        return C.expand_macros(out) if expand else out

    def extend(self, other: "RoutedCircuit") -> None:
        if self.exit is not None and other.entry is not None and self.exit.phys != other.entry.phys:
            raise GraphError("circuits do not compose: layouts differ")
        self.items.extend(other.items)
        if self.entry is None:
            self.entry = other.entry
        self.exit = other.exit

    def check_edges(self, g: ConnectivityGraph) -> None:
        """Routing gates act on edges; core blocks sit on connected wire sets."""
        for it in self.items:
            if isinstance(it, CoreBlock):
                if len(it.wires) > 1 and not _induced_connected(g, it.wires) and g.kind != "ata":
                    raise GraphError(f"core block {it.label} on disconnected wires {it.wires}")
            elif len(it.qubits) == 2 and not g.has_edge(*it.qubits):
                raise GraphError(f"{it.name} on non-edge {it.qubits}")

    def unitary(self) -> np.ndarray:
        return C.circuit_unitary(self.gates(), self.n)


def core_block(op: PoolOperator, gens: Sequence[PauliSum], theta) -> CoreBlock:
    """Gates for ``exp(sum_j theta_j gens_j)`` given physical-frame generators.

    The block structure comes from the unit-parameter generator so the gate
    list (and CNOT count) does not depend on ``theta``.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.size == 1 and len(gens) > 1:
        th = np.full(len(gens), th[0])
    if th.size != len(gens):
        raise ValueError(f"operator takes {len(gens)} parameters, got {th.size}")
    unit = PauliSum.zero(gens[0].n)
    for g in gens:
        unit = unit + g
    zq = []
    if op.kind != "pauli":
        # JW string shared by all words: qubits where every word has Z
        words = [t.word for t in unit]
        zq = [q for q in range(unit.n) if all(w[q] == "Z" for w in words)]
    unit_core = strip_z(unit, zq) if zq else unit
    sup = sorted({q for t in unit_core for q in t.support})
    if op.kind == "pauli":
        gates = C.pauli_product_gates(unit_core, float(th[0]))
    elif op.kind == "single":
        gates = C.single_block(unit_core, sup, float(th[0]))
    elif op.kind == "ovp":
        gates = C.ovp_block(unit_core, sup, float(th[0]))
    elif op.kind in ("double", "mvp"):
        gen = PauliSum.zero(unit.n)
        for t, g in zip(th, gens):
            gen = gen + t * (strip_z(g, zq) if zq else g)
        gates = C.double_block(gen, sup, 1.0)
    else:
        raise RoutingConfigError(f"unknown operator kind {op.kind!r}")
    if zq:
        w = C.parity_conjugation(zq, sup[0])
        gates = w + gates + C.inverse(w)
    return CoreBlock(op.kind if not zq else f"{op.kind}+z", tuple(sorted(set(sup) | set(zq))), gates, op.label)


def _routing_gate(variant: str, a: int, b: int) -> C.Gate:
    return C.G("fswap" if variant == "fswap" else "swap", a, b)


def synthesize_routed_circuit(op: PoolOperator, layout: Layout, g: ConnectivityGraph, variant: str,
                              theta=0.0, restore: bool = False,
                              formula: str = "mean") -> tuple[RoutedCircuit, Layout]:
    """Route ``op``'s support together, apply its core block, optionally restore.

    Returns the circuit and the exit layout (equal to ``layout`` when
    ``restore``).  ``variant="ata"`` skips routing; fermionic operators then
    carry their parity ladder inside the block.
    """
    expected_entity = "mode" if variant == "fswap" else "qubit"
    if variant != "ata" and layout.entity != expected_entity:
        raise RoutingConfigError(f"{variant} routing needs a {expected_entity} layout")
    moves = routing_moves(op, layout, g, variant, formula)
    circ = RoutedCircuit(g.n, entry=layout)
    cur = layout
    for a, b in moves:
        circ.items.append(_routing_gate(variant, a, b))
        cur = cur.exchange(a, b)
    block = core_block(op, physical_generators(op, cur), theta)
    if variant in ("swap", "fswap") and block.kind.endswith("+z"):
        raise GraphError("routed support still carries an anticommutation string")
    circ.items.append(block)
    if restore:
        for a, b in reversed(moves):
            circ.items.append(_routing_gate(variant, a, b))
            cur = cur.exchange(a, b)
    circ.exit = cur
    return circ, cur


# ---------------------------------------------------------------------------
# Pauli-product accounting and the excitation table
# ---------------------------------------------------------------------------

def pauli_product_cnot_count(gen: PauliSum, g: ConnectivityGraph, variant: str = "ata",
                             restore: bool = False, formula: str = "mean") -> int:
    """CNOTs for one CNOT-staircase rotation per generator word.

    ``"ata"``: ``sum 2 (w - 1)``.  ``"swap"`` on a line: the whole support is
    gathered first when it is not contiguous.  ``"fswap"``: the modes acted on
    by X/Y are gathered with FSWAPs, which removes the Z strings.
    """
    if not gen.pairwise_commuting():
        raise C.BlockError("generator terms must commute")
    words = [t.word for t in gen]
    ata = sum(2 * (t.weight - 1) for t in gen)
    if variant == "ata":
        return ata
    if not g.is_line_order():
        raise RoutingConfigError("Pauli-product routing is modelled on a line only")
    factor = 2 if restore else 1
    if variant == "swap":
        sup = sorted({q for t in gen for q in t.support})
        if sup[-1] - sup[0] + 1 == len(sup) or g.kind == "ata":
            return ata
        return ata + 3 * factor * line_swap_count(sup, g.n, formula)
    if variant == "fswap":
        modes = sorted({q for w in words for q in range(len(w)) if w[q] in "XY"})
        reduced = sum(2 * (sum(1 for s in w if s in "XY") - 1) for w in words)
        return reduced + 2 * factor * line_swap_count(modes, g.n, formula)
    raise RoutingConfigError(f"unknown variant {variant!r}")


def parse_excitation(text: str, flavor: str = "fermionic") -> FermionExcitation:
    """``single:p,q`` or ``double:p,q,r,s`` (occupied first, then virtual)."""
    try:
        kind, idx = text.split(":", 1)
        ids = [int(v) for v in idx.split(",")]
    except ValueError:
        raise RoutingConfigError(f"bad excitation {text!r}; expected single:p,q or double:p,q,r,s") from None
    if kind == "single" and len(ids) == 2:
        return FermionExcitation((ids[0],), (ids[1],), flavor)
    if kind == "double" and len(ids) == 4:
        return FermionExcitation(tuple(ids[:2]), tuple(ids[2:]), flavor)
    raise RoutingConfigError(f"bad excitation {text!r}; expected single:p,q or double:p,q,r,s")


TABLE_COLUMNS = (
    ("pauli", "ata", "-"), ("pauli", "swap", "fixed"), ("pauli", "swap", "variable"),
    ("pauli", "fswap", "fixed"), ("pauli", "fswap", "variable"),
    ("mcy", "ata", "-"), ("mcy", "swap", "fixed"), ("mcy", "swap", "variable"),
    ("mcy", "fswap", "fixed"), ("mcy", "fswap", "variable"),
)


def penalty_table(excitation: str, n: int, formula: str = "mean") -> dict[str, dict[tuple, int | None]]:
    """CNOT counts for one excitation, fermionic and qubit, across implementations.

    Rows ``"fermionic"``/``"qubit"``; columns as in ``TABLE_COLUMNS``
    (implementation, routing, final layout).  ``None`` marks cells that are
    not applicable or not modelled (SWAP-routed fermionic controlled blocks).
    """
    line = ConnectivityGraph.linear(n)
    out = {}
    for flavor in ("fermionic", "qubit"):
        e = parse_excitation(excitation, flavor)
        if max(e.support) >= n:
            raise RoutingConfigError(f"excitation index out of range for {n} qubits")
        op = PoolOperator(0, e.kind, flavor, n, (e,), (1,), label=e.label())
        gen = op.generator
        lay_q = Layout.identity(n, "qubit")
        lay_m = Layout.identity(n, "mode")
        row = {}
        for impl, route, final in TABLE_COLUMNS:
            restore = final == "fixed"
            val = None
            if impl == "pauli":
                if route == "fswap" and flavor == "qubit":
                    val = None
                else:
                    val = pauli_product_cnot_count(gen, line, route, restore, formula)
            elif route == "ata":
                val = (ata_fermionic_anchored_count(_op_core(op), len(op.z_string))
                       if flavor == "fermionic" else _op_core(op))
            elif route == "swap" and flavor == "qubit":
                val = swap_penalty(op, lay_q, line, restore, formula)
            elif route == "fswap" and flavor == "fermionic":
                val = fswap_penalty(op, lay_m, line, restore, formula)
            row[(impl, route, final)] = val
        out[flavor] = row
    return out


def format_penalty_table(table: dict) -> str:
    head = ["flavor"] + ["/".join(c) for c in TABLE_COLUMNS]
    lines = ["\t".join(head)]
    for flavor, row in table.items():
        lines.append("\t".join([flavor] + ["-" if row[c] is None else str(row[c]) for c in TABLE_COLUMNS]))
    return "\n".join(lines)
