"""File formats: Hamiltonians, traces, run summaries and OpenQASM 2 circuits.

Fermionic Hamiltonian JSON::

    {"n_modes": 4, "constant": 0.7, "n_electrons": 2,
     "one_body": [[p, q, re, im], ...],
     "two_body": [[p, q, r, s, re, im], ...],        # 1/2 h_pqrs a+p a+q a_r a_s
     "hf_energy": ..., "fci_energy": ..., "description": "..."}

Pauli Hamiltonian JSON::

    {"n_qubits": 4, "terms": [{"word": "IXYZ", "re": 0.1, "im": 0.0}, ...],
     "n_electrons": 2}

``word[q]`` is the symbol on qubit ``q``.  Derived outputs print floats with
12 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .circuits import Gate
from .fermion import FermionOperator, ValidationError, hamiltonian_from_integrals
from .pauli import PauliSum, PauliTerm

FORMATS = ("fermionic-json", "pauli-json")
BUNDLED = {
    "h2": "h2_sto3g_0.74.json",
    "h4": "h4_linear_sto3g_3.0.json",
    "h6": "h6_linear_sto3g_3.0.json",
    "h6-tri": "h6_triangular_sto3g_3.0.json",
    "lih": "lih_sto3g_1.5.json",
}


class InputError(ValueError):
    """Unreadable or invalid input file."""


def fmt(x: float) -> str:
    """Float with 12 significant digits."""
    return format(float(x), ".12g")


@dataclass
class HamiltonianMeta:
    n_electrons: int | None = None
    hf_energy: float | None = None
    fci_energy: float | None = None
    description: str = ""
    format: str = ""


def bundled_path(name: str) -> Path:
    """Path of a bundled Hamiltonian by short name (``h2``, ``h4``, ...) or file name."""
    fname = BUNDLED.get(name, name)
    p = resources.files("coadapt") / "data" / fname
    if not p.is_file():
        raise InputError(f"no bundled Hamiltonian {name!r}; available: {sorted(BUNDLED)}")
    return Path(str(p))


def resolve_input(spec: str) -> Path:
    p = Path(spec)
    if p.is_file():
        return p
    if spec in BUNDLED or spec.endswith(".json"):
        try:
            return bundled_path(spec)
        except InputError:
            pass
    raise InputError(f"input file {spec!r} not found")


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def _detect(data: dict) -> str:
    if "n_modes" in data:
        return "fermionic-json"
    if "n_qubits" in data:
        return "pauli-json"
    raise InputError("cannot detect format: expected n_modes or n_qubits")


def load_hamiltonian(path, fmt_tag: str | None = None):
    """Read a Hamiltonian file.

    Returns:
        ``(operator, meta)``; the operator is a ``FermionOperator`` for
        fermionic input and a ``PauliSum`` for Pauli input.

    Raises:
        InputError: parse failures, wrong format, missing fields, failed
            symmetry checks, or a missing electron count for fermionic input.
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("top-level JSON value must be an object")
    tag = fmt_tag or _detect(data)
    if tag not in FORMATS:
        raise InputError(f"unknown format {tag!r}")
    meta = HamiltonianMeta(
        n_electrons=data.get("n_electrons"),
        hf_energy=data.get("hf_energy"),
        fci_energy=data.get("fci_energy"),
        description=str(data.get("description", "")),
        format=tag,
    )
    try:
        if tag == "fermionic-json":
            op = _fermionic_from_dict(data)
            if meta.n_electrons is None:
                raise InputError("fermionic input needs n_electrons")
        else:
            op = _pauli_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"invalid {tag} file {path}: {exc}") from None
    if meta.n_electrons is not None:
        n = op.n_modes if isinstance(op, FermionOperator) else op.n
        if not (isinstance(meta.n_electrons, int) and 0 <= meta.n_electrons <= n):
            raise InputError(f"n_electrons must be an integer in [0, {n}]")
    return op, meta


def _fermionic_from_dict(data: dict) -> FermionOperator:
    n = int(data["n_modes"])
    one = {}
    for row in data.get("one_body", []):
        p, q, re_, im = row
        one[(int(p), int(q))] = complex(re_, im)
    two = {}
    for row in data.get("two_body", []):
        p, q, r, s, re_, im = row
        two[(int(p), int(q), int(r), int(s))] = complex(re_, im)
    idx = [i for k in list(one) + list(two) for i in k]
    if idx and (min(idx) < 0 or max(idx) >= n):
        raise InputError("integral index outside 0..n_modes-1")
    try:
        return hamiltonian_from_integrals(one, two, float(data.get("constant", 0.0)), n)
    except ValidationError as exc:
        raise InputError(f"symmetry check failed: {exc}") from None


def _pauli_from_dict(data: dict) -> PauliSum:
    n = int(data["n_qubits"])
    terms = []
    for t in data["terms"]:
        w = t["word"]
        if len(w) != n:
            raise InputError(f"word {w!r} does not have {n} symbols")
        im = float(t.get("im", 0.0))
        if abs(im) > 1e-12:
            raise InputError(f"term {w} has imaginary coefficient {im}: Hamiltonian is not Hermitian")
        terms.append(PauliTerm.from_word(w, complex(float(t["re"]), im)))
    return PauliSum.from_terms(n, terms)


def pauli_to_dict(h: PauliSum, **meta) -> dict:
    terms = [{"word": w, "re": c.real, "im": c.imag} for w, c in sorted(h.words().items())]
    return {"n_qubits": h.n, "terms": terms, **{k: v for k, v in meta.items() if v is not None}}


def write_pauli_json(path, h: PauliSum, **meta) -> None:
    """Write with full float precision (round-trips exactly)."""
    Path(path).write_text(json.dumps(pauli_to_dict(h, **meta), indent=1) + "\n")


def write_fermionic_json(path, n_modes: int, constant: float, one_body: dict, two_body: dict, **meta) -> None:
    data = {
        "n_modes": n_modes,
        "constant": constant,
        **{k: v for k, v in meta.items() if v is not None},
        "one_body": [[*k, complex(v).real, complex(v).imag] for k, v in sorted(one_body.items())],
        "two_body": [[*k, complex(v).real, complex(v).imag] for k, v in sorted(two_body.items())],
    }
    Path(path).write_text(json.dumps(data) + "\n")


# ---------------------------------------------------------------------------
# traces and summaries
# ---------------------------------------------------------------------------

TRACE_COLUMNS = (
    "iteration", "operator_id", "operator_label", "gradient", "penalty", "score", "energy", "error",
    "grad_norm", "cumulative_cnots", "n_params", "layout", "mean_penalty", "opt_evals", "opt_converged",
)


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def trace_to_csv(trace) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for rec in trace:
        row = rec.as_row()
        w.writerow([_cell(row[c]) for c in TRACE_COLUMNS])
    return buf.getvalue()


def write_trace_csv(path, trace) -> None:
    Path(path).write_text(trace_to_csv(trace))


_INT_COLS = {"iteration", "operator_id", "cumulative_cnots", "n_params", "opt_evals"}
_FLOAT_COLS = {"gradient", "penalty", "score", "energy", "error", "grad_norm", "mean_penalty"}


def read_trace_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise InputError(f"unexpected trace header {reader.fieldnames}")
        for r in reader:
            out = dict(r)
            for c in _INT_COLS:
                out[c] = int(r[c])
            for c in _FLOAT_COLS:
                out[c] = float(r[c])
            out["layout"] = tuple(int(v) for v in r["layout"].split())
            out["opt_converged"] = r["opt_converged"] == "1"
            rows.append(out)
    return rows


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def summary_dict(result, input_path: str = "", seed: int | None = None) -> dict:
    cfg = {f.name: getattr(result.config, f.name) for f in fields(result.config)}
    return _round_floats({
        "input": str(input_path),
        "seed": seed,
        "config": cfg,
        "stop_reason": result.stop_reason,
        "iterations": len(result.trace),
        "final_energy": result.final_energy,
        "reference_energy": result.reference_energy,
        "hf_energy": result.hf_energy,
        "error": (result.final_energy - result.reference_energy) if result.reference_energy is not None else None,
        "total_cnots": result.total_cnots,
        "n_params": result.ansatz.n_params,
        "operators": [op.label for op in result.ansatz.operators],
        "final_permutation": list(result.layout.phys),
        "layout_entity": result.layout.entity,
    })


def write_summary_json(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def read_summary_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read summary {path}: {exc}") from None


# ---------------------------------------------------------------------------
# OpenQASM 2
# ---------------------------------------------------------------------------

_QASM_1Q = {"h", "s", "sdg", "x"}
_QASM_ROT = {"rx", "ry", "rz"}


def qasm_text(circuit) -> str:
    """OpenQASM 2 with SWAP/FSWAP expanded; CNOT totals and layouts in comments."""
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// cnot_count: {circuit.cnot_count}",
    ]
    if circuit.entry is not None:
        lines.append(f"// entry_layout ({circuit.entry.entity}): {' '.join(map(str, circuit.entry.phys))}")
    if circuit.exit is not None:
        lines.append(f"// exit_layout ({circuit.exit.entity}): {' '.join(map(str, circuit.exit.phys))}")
    lines.append(f"qreg q[{circuit.n}];")
    for g in circuit.gates(expand=True):
        if g.name in _QASM_ROT:
            lines.append(f"{g.name}({fmt(g.angle)}) q[{g.qubits[0]}];")
        elif g.name in _QASM_1Q:
            lines.append(f"{g.name} q[{g.qubits[0]}];")
        elif g.name == "cx":
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            raise ValueError(f"gate {g.name} has no QASM form")
    return "\n".join(lines) + "\n"


def emit_qasm(circuit, path) -> None:
    Path(path).write_text(qasm_text(circuit))


_GATE_RE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+);$")
_QUBIT_RE = re.compile(r"q\[(\d+)\]")


def parse_qasm(text: str) -> tuple[int, list[Gate]]:
    """Parse the subset written by ``qasm_text``; returns ``(n_qubits, gates)``."""
    n = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        if line.startswith("qreg"):
            m = re.match(r"qreg\s+q\[(\d+)\];", line)
            if not m:
                raise InputError(f"line {lineno}: bad qreg")
            n = int(m.group(1))
            continue
        m = _GATE_RE.match(line)
        if not m:
            raise InputError(f"line {lineno}: cannot parse {raw!r}")
        name, arg, args = m.groups()
        qubits = tuple(int(q) for q in _QUBIT_RE.findall(args))
        if name in _QASM_ROT:
            gates.append(Gate(name, qubits, float(arg)))
        elif name in _QASM_1Q or name == "cx":
            gates.append(Gate(name, qubits))
        else:
            raise InputError(f"line {lineno}: unsupported gate {name}")
    if n is None:
        raise InputError("missing qreg declaration")
    return n, gates
