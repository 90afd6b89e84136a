"""Command-line entry point: ``coadapt {run,penalty-table,pool-info,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import io as cio
from . import routing as R
from .adapt import CHEM_ACC, PENALTIES, AdaptConfig, AdaptConfigError, ConvergenceError, circuit_energy, run_adapt
from .fermion import FermionOperator, ValidationError, number_operator
from .pauli import commutator
from .pools import POOL_KINDS, PoolConfigError, build_pool
from .statevec import CapabilityError, InvariantError, Observable, basis_state, expectation, sector_ground_energy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INPUT = 4
EXIT_CONVERGENCE = 5
EXIT_CAPABILITY = 6
EXIT_INVARIANT = 7


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coadapt", description="Hardware-aware adaptive ansatz construction.")
    p.add_argument("-v", "--verbose", action="store_true", help="log each iteration")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="grow an ansatz and write trace, summary and circuit")
    run.add_argument("input", help="Hamiltonian JSON path or bundled name (h2, h4, h6, h6-tri, lih)")
    run.add_argument("--format", choices=cio.FORMATS, help="input format (detected when omitted)")
    run.add_argument("--pool", choices=POOL_KINDS, default="ceo")
    run.add_argument("--penalty", choices=PENALTIES, default="none")
    run.add_argument("--k", type=float, default=1.0, help="penalty exponent")
    run.add_argument("--connectivity", default="linear", help="linear | ata | grid:WxH | file:<edgelist>")
    run.add_argument("--layout", choices=("variable", "fixed"), default="variable")
    run.add_argument("--ceo-mode", choices=("ovp", "mvp"), default="ovp")
    run.add_argument("--grad-eps", type=float, default=1e-4, help="gradient-norm stopping threshold")
    run.add_argument("--chem-acc", type=float, default=CHEM_ACC, help="stop within this of the exact energy")
    run.add_argument("--no-chem-stop", action="store_true", help="stop on the gradient norm only")
    run.add_argument("--max-iters", type=int, default=200)
    run.add_argument("--penalty-damping", type=float, default=None, metavar="GAMMA")
    run.add_argument("--center-formula", choices=R.CENTER_FORMULAS, default="mean")
    run.add_argument("--no-sz-restrict", action="store_true", help="keep spin-flipping excitations")
    run.add_argument("--out", default="coadapt_out", help="output directory")
    run.add_argument("--seed", type=int, default=0, help="recorded; the run itself is deterministic")

    tab = sub.add_parser("penalty-table", help="CNOT counts for one excitation across implementations")
    tab.add_argument("--excitation", default="single:0,99", help="single:p,q or double:p,q,r,s")
    tab.add_argument("--n", type=int, default=100, help="qubit count")
    tab.add_argument("--center-formula", choices=R.CENTER_FORMULAS, default="mean")

    info = sub.add_parser("pool-info", help="pool sizes and core CNOT statistics")
    info.add_argument("--pool", choices=POOL_KINDS, default=None, help="one pool (default: all)")
    info.add_argument("--n", type=int, default=8)
    info.add_argument("--no-sz-restrict", action="store_true")
    info.add_argument("--list", action="store_true", help="print every operator")

    val = sub.add_parser("validate", help="run consistency checks on a Hamiltonian file")
    val.add_argument("input")
    val.add_argument("--format", choices=cio.FORMATS)
    return p


def _cmd_run(args) -> int:
    op, meta = cio.load_hamiltonian(cio.resolve_input(args.input), args.format)
    if meta.n_electrons is None:
        raise cio.InputError("input needs n_electrons to build the reference state")
    cfg = AdaptConfig(
        pool=args.pool, penalty=args.penalty, k=args.k, connectivity=args.connectivity,
        layout_mode=args.layout, ceo_mode=args.ceo_mode, grad_norm_eps=args.grad_eps,
        chem_acc=None if args.no_chem_stop else args.chem_acc, max_iters=args.max_iters,
        damping=args.penalty_damping, center_formula=args.center_formula,
        restrict_sz=not args.no_sz_restrict,
    )
    result = run_adapt(cfg, op, meta.n_electrons, meta.fci_energy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cio.write_trace_csv(out / "trace.csv", result.trace)
    cio.write_summary_json(out / "summary.json", cio.summary_dict(result, args.input, args.seed))
    cio.emit_qasm(result.circuit, out / "circuit.qasm")
    if result.ansatz.n <= 12:
        e_circ = circuit_energy(result, op)
        if abs(e_circ - result.final_energy) > 1e-9:
            raise InvariantError(f"circuit energy {e_circ} disagrees with trace energy {result.final_energy}")
    err = "n/a" if result.reference_energy is None else cio.fmt(result.final_energy - result.reference_energy)
    print(f"stop={result.stop_reason} iterations={len(result.trace)} energy={cio.fmt(result.final_energy)} "
          f"error={err} cnots={result.total_cnots} out={out}")
    return EXIT_OK if result.converged else EXIT_CONVERGENCE


def _cmd_table(args) -> int:
    table = R.penalty_table(args.excitation, args.n, args.center_formula)
    print(R.format_penalty_table(table))
    return EXIT_OK


def _cmd_pool_info(args) -> int:
    kinds = [args.pool] if args.pool else list(POOL_KINDS)
    restrict = not args.no_sz_restrict
    print("pool\tn\tsize\tkinds\tmean_core_cnots")
    for kind in kinds:
        pool = build_pool(kind, args.n, restrict)
        counts = Counter(op.kind for op in pool)
        cores = [R.ata_cnot_count(op) if op.flavor == "qubit" else R._op_core(op) for op in pool]
        desc = ",".join(f"{k}:{v}" for k, v in sorted(counts.items()))
        print(f"{kind}\t{args.n}\t{len(pool)}\t{desc}\t{cio.fmt(np.mean(cores))}")
        if args.list:
            for op in pool:
                print(f"  {op.id}\t{op.kind}\t{op.label}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    op, meta = cio.load_hamiltonian(cio.resolve_input(args.input), args.format)
    checks = []
    hq = op.jordan_wigner() if isinstance(op, FermionOperator) else op
    checks.append(("hermitian", hq.is_hermitian(1e-10)))
    n = hq.n
    number = number_operator(n)
    checks.append(("number-conserving", all(abs(c) < 1e-10 for _, c in commutator(hq, number).items())))
    if meta.n_electrons is not None and n <= 16:
        obs = Observable(hq)
        hf = expectation(basis_state(n, (1 << meta.n_electrons) - 1), obs)
        if meta.hf_energy is not None:
            checks.append(("hf-energy", abs(hf - meta.hf_energy) < 1e-8))
        if meta.fci_energy is not None:
            checks.append(("fci-energy", abs(sector_ground_energy(obs, meta.n_electrons) - meta.fci_energy) < 1e-8))
    for name, ok in checks:
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_INVARIANT


_COMMANDS = {"run": _cmd_run, "penalty-table": _cmd_table, "pool-info": _cmd_pool_info, "validate": _cmd_validate}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (AdaptConfigError, R.RoutingConfigError, R.GraphError, PoolConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (cio.InputError, ValidationError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
