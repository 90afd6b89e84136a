"""Penalty-scaled ADAPT-VQE driver.

Each iteration screens the whole pool, scores operators by
``|gradient| / penalty**k``, appends the winner with a zero parameter,
re-optimizes every parameter from the previous optimum, and routes the new
operator on the device graph to keep a running CNOT count.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import routing as R
from .fermion import FermionOperator
from .pauli import PauliSum
from .pools import Pool, PoolOperator, build_pool, promote_to_mvp
from .statevec import (Ansatz, Observable, ansatz_energy_and_gradient, generator_overlap, prepare,
                       sector_ground_energy)

log = logging.getLogger(__name__)

CHEM_ACC = 1.594e-3  # 1 kcal/mol in hartree
PENALTIES = ("none", "swap", "fswap", "ata-core")
TIE_RTOL = 1e-10
STALL_TOL = 1e-12


class AdaptConfigError(ValueError):
    """Inconsistent run configuration."""


class ConvergenceError(RuntimeError):
    """The driver stopped without meeting any convergence criterion."""


@dataclass(frozen=True)
class AdaptConfig:
    """Run settings.

    Attributes:
        pool: pool kind (see ``pools.POOL_KINDS``).
        penalty: ``none``, ``swap``, ``fswap`` or ``ata-core``.
        k: penalty exponent; ``0`` recovers plain gradient selection.
        connectivity: ``linear``, ``ata``, ``grid:WxH`` or ``file:<path>``.
        layout_mode: ``variable`` keeps routed layouts, ``fixed`` restores them.
        ceo_mode: ``ovp`` or ``mvp`` (CEO pools only).
        grad_norm_eps: stop when the pool gradient L2 norm drops below this.
        chem_acc: stop when within this of the exact energy; ``None`` disables.
        max_iters: iteration cap.
        damping: optional factor ``g``; the exponent becomes ``k * g**iteration``.
    """

    pool: str = "ceo"
    penalty: str = "none"
    k: float = 1.0
    connectivity: str = "linear"
    layout_mode: str = "variable"
    ceo_mode: str = "ovp"
    grad_norm_eps: float = 1e-4
    chem_acc: float | None = CHEM_ACC
    max_iters: int = 200
    gtol: float = 1e-9
    max_evals: int = 2000
    damping: float | None = None
    center_formula: str = "mean"
    restrict_sz: bool = True

    def validate(self) -> None:
        from .pools import POOL_KINDS

        if self.pool not in POOL_KINDS:
            raise AdaptConfigError(f"unknown pool {self.pool!r}")
        if self.penalty not in PENALTIES:
            raise AdaptConfigError(f"unknown penalty {self.penalty!r}; expected one of {PENALTIES}")
        if not (self.k >= 0 and math.isfinite(self.k)):
            raise AdaptConfigError("penalty exponent k must be a finite value >= 0")
        if not self.grad_norm_eps > 0:
            raise AdaptConfigError("grad_norm_eps must be positive")
        if self.chem_acc is not None and not self.chem_acc > 0:
            raise AdaptConfigError("chem_acc must be positive")
        if self.max_iters < 1:
            raise AdaptConfigError("max_iters must be >= 1")
        if self.layout_mode not in ("variable", "fixed"):
            raise AdaptConfigError(f"unknown layout mode {self.layout_mode!r}")
        if self.ceo_mode not in ("ovp", "mvp"):
            raise AdaptConfigError(f"unknown ceo mode {self.ceo_mode!r}")
        if self.ceo_mode == "mvp" and self.pool not in ("ceo", "ceo-f"):
            raise AdaptConfigError("ceo mode mvp needs a CEO pool")
        if self.damping is not None and not 0 < self.damping <= 1:
            raise AdaptConfigError("damping factor must lie in (0, 1]")
        if self.center_formula not in R.CENTER_FORMULAS:
            raise AdaptConfigError(f"unknown center formula {self.center_formula!r}")
        fermionic = self.pool in ("gsd", "ceo-f")
        if self.penalty == "swap" and fermionic:
            raise AdaptConfigError("swap penalty needs a qubit-flavor pool (qubit, qe, ceo)")
        if self.penalty == "fswap" and not fermionic:
            raise AdaptConfigError("fswap penalty needs a fermionic pool (gsd, ceo-f)")
        if fermionic and self.connectivity not in ("linear", "ata"):
            raise AdaptConfigError("fermionic pools are routed along the Jordan-Wigner line; use linear or ata")

    @property
    def fermionic(self) -> bool:
        return self.pool in ("gsd", "ceo-f")

    @property
    def accounting_variant(self) -> str:
        """Routing used for the emitted circuit and the cumulative CNOT count."""
        if self.penalty == "swap":
            return "swap"
        if self.penalty == "fswap":
            return "fswap"
        if self.connectivity == "ata":
            return "ata"
        return "fswap" if self.fermionic else "swap"

    @property
    def restore(self) -> bool:
        return self.layout_mode == "fixed"


@dataclass
class IterationRecord:
    iteration: int
    operator_id: int
    operator_label: str
    gradient: float
    penalty: float
    score: float
    energy: float
    error: float
    grad_norm: float
    cumulative_cnots: int
    n_params: int
    layout: tuple[int, ...]
    mean_penalty: float
    opt_evals: int
    opt_converged: bool

    def as_row(self) -> dict:
        row = asdict(self)
        row["layout"] = " ".join(map(str, self.layout))
        return row


@dataclass
class AdaptResult:
    config: AdaptConfig
    ansatz: Ansatz
    circuit: R.RoutedCircuit
    trace: list[IterationRecord]
    final_energy: float
    reference_energy: float | None
    hf_energy: float
    stop_reason: str
    layout: R.Layout
    graph: R.ConnectivityGraph

    @property
    def total_cnots(self) -> int:
        return self.trace[-1].cumulative_cnots if self.trace else 0

    @property
    def converged(self) -> bool:
        return self.stop_reason in ("chemical-accuracy", "gradient-norm")


# ---------------------------------------------------------------------------
# pool preparation and screening
# ---------------------------------------------------------------------------

def selection_pool(cfg: AdaptConfig, n: int) -> list[PoolOperator]:
    """Pool operators as seen by the selector (OVP pairs promoted in MVP mode)."""
    pool = build_pool(cfg.pool, n, cfg.restrict_sz)
    if cfg.ceo_mode != "mvp":
        return list(pool)
    out, seen = [], set()
    for op in pool:
        if op.kind == "ovp":
            if op.support in seen:
                continue
            seen.add(op.support)
            op = promote_to_mvp(op, pool)
        out.append(op)
    return out


def _thread_count() -> int:
    raw = os.environ.get("COADAPT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise AdaptConfigError(f"COADAPT_THREADS must be an integer, got {raw!r}") from None


def pool_gradients(psi: np.ndarray, h_psi: np.ndarray, n: int, ops: Sequence[PoolOperator],
                   threads: int = 1) -> list[np.ndarray]:
    """Energy derivatives ``2 Re <H psi | G_j psi>`` for every pool operator."""

    def one(op):
        return np.array([2.0 * generator_overlap(h_psi, psi, n, op, j).real for j in range(op.n_params)])

    if threads <= 1 or len(ops) < 2 * threads:
        return [one(op) for op in ops]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, ops))


def operator_penalty(op: PoolOperator, layout: R.Layout, g: R.ConnectivityGraph, cfg: AdaptConfig) -> int:
    """Hardware cost of appending ``op`` under the configured penalty variant.

    ``none`` reports the accounting cost (it only breaks ties); ``ata-core``
    is the unrouted all-to-all count.
    """
    if cfg.penalty == "ata-core":
        return R.ata_cnot_count(op)
    variant = cfg.penalty if cfg.penalty in ("swap", "fswap") else cfg.accounting_variant
    return R.routed_cost(op, layout, g, variant, cfg.restore, cfg.center_formula)


def effective_exponent(cfg: AdaptConfig, iteration: int) -> float:
    if cfg.penalty == "none":
        return 0.0
    if cfg.damping is None:
        return cfg.k
    return cfg.k * cfg.damping ** iteration


def scores(grad_mags: np.ndarray, penalties: np.ndarray, k: float) -> np.ndarray:
    """``|g| / p**k`` elementwise."""
    grad_mags = np.abs(np.asarray(grad_mags, dtype=float))
    if k == 0:
        return grad_mags
    return grad_mags / np.asarray(penalties, dtype=float) ** k


def select_index(score: np.ndarray, penalties: Sequence[float], ids: Sequence[int]) -> int:
    """Argmax of ``score``; near-ties go to the lower penalty, then the lower id."""
    best = float(np.max(score))
    cands = [i for i, s in enumerate(score) if s >= best * (1 - TIE_RTOL)]
    return min(cands, key=lambda i: (penalties[i], ids[i]))


def select_operator(psi: np.ndarray, obs: Observable, ops: Sequence[PoolOperator], layout: R.Layout,
                    g: R.ConnectivityGraph, cfg: AdaptConfig, iteration: int = 0, threads: int = 1):
    """Screen the pool and pick the next operator.

    Returns:
        ``(index, score, gradient_magnitude, penalty, grad_norm, penalties)``.
    """
    if not ops:
        raise AdaptConfigError("pool is empty")
    n = obs.n
    h_psi = obs.apply(psi)
    grads = pool_gradients(psi, h_psi, n, ops, threads)
    mags = np.array([np.linalg.norm(v) for v in grads])
    grad_norm = float(np.sqrt(sum(float(np.dot(v, v)) for v in grads)))
    pens = np.array([operator_penalty(op, layout, g, cfg) for op in ops], dtype=float)
    sc = scores(mags, pens, effective_exponent(cfg, iteration))
    idx = select_index(sc, pens, [op.id for op in ops])
    return idx, float(sc[idx]), float(mags[idx]), float(pens[idx]), grad_norm, pens


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

class _Budget(Exception):
    pass


def optimize_parameters(a: Ansatz, obs: Observable, gtol: float = 1e-9,
                        max_evals: int = 2000) -> tuple[float, int, bool]:
    """BFGS from the current parameters; keeps the best iterate seen.

    Returns ``(energy, evaluations, converged)``; ``a`` is updated in place.
    """
    x0 = a.flat_parameters()
    if x0.size == 0:
        return float(np.vdot(prepare(a), obs.apply(prepare(a))).real), 0, True
    best = {"e": np.inf, "x": x0.copy()}
    evals = [0]

    def fun(x):
        if evals[0] >= max_evals:
            raise _Budget
        evals[0] += 1
        e, gr = ansatz_energy_and_gradient(a, obs, x)
        if e < best["e"]:
            best["e"], best["x"] = e, x.copy()
        return e, gr

    e0, _ = fun(x0)
    converged = False
    try:
        res = minimize(fun, x0, jac=True, method="BFGS", options={"gtol": gtol, "maxiter": 10 * max_evals})
        converged = bool(res.success) or float(np.max(np.abs(res.jac))) < 1e-6
    except _Budget:
        log.warning("optimizer budget of %d evaluations exhausted", max_evals)
    x = best["x"] if best["e"] <= e0 else x0
    a.set_flat(x)
    return float(min(best["e"], e0)), evals[0], converged


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _qubit_hamiltonian(h) -> PauliSum:
    return h.jordan_wigner() if isinstance(h, FermionOperator) else h


def run_adapt(cfg: AdaptConfig, hamiltonian, n_electrons: int, reference_energy: float | None = None,
              threads: int | None = None) -> AdaptResult:
    """Grow an ansatz until the gradient norm or energy error criterion is met.

    Args:
        cfg: run configuration.
        hamiltonian: ``FermionOperator`` (required for FSWAP routing) or ``PauliSum``.
        n_electrons: electrons in the Hartree-Fock reference (modes ``0..n_e-1``).
        reference_energy: exact ground energy; computed in the particle-number
            sector when omitted and ``cfg.chem_acc`` is set.
        threads: screening workers; defaults to ``COADAPT_THREADS`` or 1.
    """
    cfg.validate()
    hq = _qubit_hamiltonian(hamiltonian)
    n = hq.n
    if cfg.accounting_variant == "fswap" and not isinstance(hamiltonian, FermionOperator):
        raise AdaptConfigError("FSWAP routing remaps the fermionic Hamiltonian; supply fermionic input")
    obs = Observable(hq)
    if reference_energy is None and cfg.chem_acc is not None:
        reference_energy = sector_ground_energy(obs, n_electrons)
    threads = threads or _thread_count()
    g = R.ConnectivityGraph.parse(cfg.connectivity, n)
    ops = selection_pool(cfg, n)
    variant = cfg.accounting_variant
    layout = R.Layout.identity(n, "mode" if variant == "fswap" else "qubit")
    ansatz = Ansatz(n, (1 << n_electrons) - 1)
    hf_energy = float(np.vdot(prepare(ansatz), obs.apply(prepare(ansatz))).real)
    energy = hf_energy
    trace: list[IterationRecord] = []
    cum = 0
    layouts = [layout]

    def within_acc(e):
        return cfg.chem_acc is not None and reference_energy is not None and abs(e - reference_energy) < cfg.chem_acc

    stop = "max-iters"
    if within_acc(energy):
        stop = "chemical-accuracy"
    else:
        for it in range(1, cfg.max_iters + 1):
            psi = prepare(ansatz)
            idx, score, grad, pen, gnorm, pens = select_operator(psi, obs, ops, layout, g, cfg, it - 1, threads)
            if gnorm < cfg.grad_norm_eps:
                stop = "gradient-norm"
                break
            if grad < STALL_TOL:
                stop = "stall"
                log.warning("selected operator has zero gradient while the norm is %.3g", gnorm)
                break
            op = ops[idx]
            ansatz.append(op)
            new_e, nev, ok = optimize_parameters(ansatz, obs, cfg.gtol, cfg.max_evals)
            if new_e > energy + 1e-10:
                raise ConvergenceError(f"energy rose from {energy} to {new_e}")
            energy = new_e
            cum += R.routed_cost(op, layout, g, variant, cfg.restore, cfg.center_formula)
            if not cfg.restore:
                for a, b in R.routing_moves(op, layout, g, variant, cfg.center_formula):
                    layout = layout.exchange(a, b)
            layouts.append(layout)
            err = energy - reference_energy if reference_energy is not None else float("nan")
            trace.append(IterationRecord(it, op.id, op.label, grad, pen, score, energy, err, gnorm, cum,
                                         ansatz.n_params, layout.phys, float(np.mean(pens)), nev, ok))
            log.info("iter %d: %s E=%.10f err=%.3g cnots=%d", it, op.label, energy, err, cum)
            if within_acc(energy):
                stop = "chemical-accuracy"
                break

    circuit = build_circuit(ansatz, g, variant, cfg.restore, cfg.center_formula)
    if circuit.cnot_count != cum:
        raise ConvergenceError(f"circuit has {circuit.cnot_count} CNOTs, accounting says {cum}")
    return AdaptResult(cfg, ansatz, circuit, trace, energy, reference_energy, hf_energy, stop, layout, g)


def build_circuit(a: Ansatz, g: R.ConnectivityGraph, variant: str, restore: bool = False,
                  formula: str = "mean") -> R.RoutedCircuit:
    """Routed circuit for an ansatz, starting from the identity layout."""
    layout = R.Layout.identity(a.n, "mode" if variant == "fswap" else "qubit")
    circ = R.RoutedCircuit(a.n, entry=layout, exit=layout)
    for op, th in zip(a.operators, a.parameters):
        part, layout = R.synthesize_routed_circuit(op, layout, g, variant, th, restore, formula)
        circ.extend(part)
    return circ


def circuit_energy(result: AdaptResult, hamiltonian) -> float:
    """Energy of the emitted circuit measured with the remapped observable."""
    from .circuits import apply_gates

    n = result.ansatz.n
    psi = np.zeros(1 << n, dtype=complex)
    psi[result.ansatz.reference] = 1.0  # entry layout is the identity
    psi = apply_gates(psi, result.circuit.gates(), n)
    h_phys = R.physical_observable(hamiltonian, result.circuit.exit or result.layout)
    return float(np.vdot(psi, h_phys.to_sparse() @ psi).real)
