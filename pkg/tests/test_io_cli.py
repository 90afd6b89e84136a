import json

import numpy as np
import pytest

from coadapt import circuits as C
from coadapt import io as cio
from coadapt import routing as R
from coadapt.adapt import AdaptConfig, run_adapt
from coadapt.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from coadapt.fermion import FermionOperator, hamiltonian_from_integrals
from coadapt.pauli import PauliSum
from coadapt.pools import build_pool

RNG = np.random.default_rng(29)


# --- Hamiltonian files -----------------------------------------------------------

@pytest.mark.parametrize("name,modes,electrons", [("h2", 4, 2), ("h4", 8, 4), ("h6", 12, 6),
                                                  ("h6-tri", 12, 6), ("lih", 12, 4)])
def test_bundled_files(name, modes, electrons):
    op, meta = cio.load_hamiltonian(cio.bundled_path(name))
    assert isinstance(op, FermionOperator) and op.n_modes == modes
    assert meta.n_electrons == electrons and meta.format == "fermionic-json"
    assert meta.fci_energy < meta.hf_energy


def test_bundled_lookup_errors():
    with pytest.raises(cio.InputError):
        cio.bundled_path("h8")
    with pytest.raises(cio.InputError):
        cio.resolve_input("/nonexistent/file.json")


def test_pauli_json_round_trip(tmp_path, h2):
    h = h2[0].jordan_wigner()
    path = tmp_path / "h.json"
    cio.write_pauli_json(path, h, n_electrons=2)
    back, meta = cio.load_hamiltonian(path)
    assert back == h and meta.n_electrons == 2 and meta.format == "pauli-json"


def test_fermionic_json_round_trip(tmp_path):
    one = {(0, 0): -1.2, (1, 1): -0.4, (0, 1): 0.1, (1, 0): 0.1}
    two = {(0, 1, 1, 0): 0.5, (1, 0, 0, 1): 0.5}
    path = tmp_path / "f.json"
    cio.write_fermionic_json(path, 2, 0.3, one, two, n_electrons=1)
    op, meta = cio.load_hamiltonian(path, "fermionic-json")
    assert meta.n_electrons == 1
    assert op.jordan_wigner().allclose(hamiltonian_from_integrals(one, two, 0.3, 2).jordan_wigner())


@pytest.mark.parametrize("payload", [
    {"n_qubits": 1, "terms": [{"word": "X", "re": 1.0, "im": 0.5}]},
    {"n_qubits": 2, "terms": [{"word": "X", "re": 1.0}]},
    {"n_modes": 2, "one_body": [[0, 1, 1.0, 0.0]], "n_electrons": 1},
    {"n_modes": 2, "one_body": [[0, 0, 1.0, 0.0]]},
    {"n_modes": 2, "one_body": [[0, 5, 1.0, 0.0]], "n_electrons": 1},
    {"n_modes": 2, "one_body": [[0, 0, 1.0, 0.0]], "n_electrons": 3},
    {"terms": []},
    [1, 2, 3],
])
def test_invalid_hamiltonian_files(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(cio.InputError):
        cio.load_hamiltonian(path)


def test_unparseable_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(cio.InputError):
        cio.load_hamiltonian(path)


def test_fmt_twelve_significant_digits():
    assert cio.fmt(1 / 3) == "0.333333333333"
    assert cio.fmt(-1.1372838344885) == "-1.13728383449"


# --- traces, summaries, QASM ---------------------------------------------------------

@pytest.fixture(scope="module")
def h4_result(h4):
    h, meta = h4
    return run_adapt(AdaptConfig(pool="ceo-f", penalty="fswap"), h, meta.n_electrons, meta.fci_energy)


def test_trace_csv_round_trip(tmp_path, h4_result):
    path = tmp_path / "trace.csv"
    cio.write_trace_csv(path, h4_result.trace)
    rows = cio.read_trace_csv(path)
    assert len(rows) == len(h4_result.trace)
    for row, rec in zip(rows, h4_result.trace):
        assert row["operator_id"] == rec.operator_id and row["cumulative_cnots"] == rec.cumulative_cnots
        assert row["energy"] == pytest.approx(rec.energy, rel=1e-11)
    assert path.read_text().splitlines()[0].split(",") == list(cio.TRACE_COLUMNS)


def test_summary_round_trip(tmp_path, h4_result):
    path = tmp_path / "summary.json"
    summary = cio.summary_dict(h4_result, "h4", 7)
    cio.write_summary_json(path, summary)
    back = cio.read_summary_json(path)
    assert back == json.loads(json.dumps(summary))
    assert back["total_cnots"] == h4_result.total_cnots and back["seed"] == 7
    assert back["config"]["penalty"] == "fswap"


def test_qasm_round_trip_matches_unitary():
    n = 4
    g = R.ConnectivityGraph.linear(n)
    pool = build_pool("ceo-f", n, False)
    circ = R.RoutedCircuit(n, entry=R.Layout.identity(n, "mode"), exit=R.Layout.identity(n, "mode"))
    lay = circ.entry
    for i in RNG.choice(len(pool), 4):
        part, lay = R.synthesize_routed_circuit(pool[int(i)], lay, g, "fswap", RNG.normal())
        circ.extend(part)
    text = cio.qasm_text(circ)
    n_back, gates = cio.parse_qasm(text)
    assert n_back == n
    assert sum(1 for l in text.splitlines() if l.startswith("cx ")) == circ.cnot_count
    assert f"// cnot_count: {circ.cnot_count}" in text
    np.testing.assert_allclose(C.circuit_unitary(gates, n), circ.unitary(), atol=1e-10)


def test_qasm_small_cases(tmp_path):
    circ = R.RoutedCircuit(2, [R.CoreBlock("single", (0, 1), C.qe_single_block(0.3))])
    text = cio.qasm_text(circ)
    assert sum(l.startswith("cx ") for l in text.splitlines()) == 2
    empty = cio.qasm_text(R.RoutedCircuit(3))
    assert [l for l in empty.splitlines() if not l.startswith("//")] == ["OPENQASM 2.0;", 'include "qelib1.inc";',
                                                                          "qreg q[3];"]
    fs = cio.qasm_text(R.RoutedCircuit(2, [C.G("fswap", 0, 1)]))
    _, gates = cio.parse_qasm(fs)
    assert gates == C.fswap_decomposition(0, 1)
    path = tmp_path / "c.qasm"
    cio.emit_qasm(circ, path)
    assert path.read_text() == text
    with pytest.raises(cio.InputError):
        cio.parse_qasm("OPENQASM 2.0;\nccx q[0],q[1],q[2];\n")
    with pytest.raises(cio.InputError):
        cio.parse_qasm("h q[0];\n")


# --- command line ---------------------------------------------------------------------

def test_cli_run_h4(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "h4", "--pool", "ceo-f", "--penalty", "fswap", "--connectivity", "linear", "--k", "1",
                 "--out", str(out)])
    assert code == EXIT_OK
    assert {p.name for p in out.iterdir()} == {"trace.csv", "summary.json", "circuit.qasm"}
    summary = cio.read_summary_json(out / "summary.json")
    assert summary["stop_reason"] == "chemical-accuracy" and abs(summary["error"]) < 1.594e-3
    n, gates = cio.parse_qasm((out / "circuit.qasm").read_text())
    assert n == 8 and C.cnot_count(gates) == summary["total_cnots"]
    assert "stop=chemical-accuracy" in capsys.readouterr().out


def test_cli_zero_exponent_trace_equals_no_penalty(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "h4", "--pool", "ceo-f", "--penalty", "fswap", "--k", "0", "--out", str(a)]) == 0
    assert main(["run", "h4", "--pool", "ceo-f", "--penalty", "none", "--out", str(b)]) == 0
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()


def test_cli_deterministic(tmp_path):
    outs = []
    for i in range(2):
        d = tmp_path / f"r{i}"
        assert main(["run", "h4", "--pool", "ceo", "--penalty", "swap", "--seed", "5", "--out", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1]


def test_cli_penalty_table(capsys):
    assert main(["penalty-table", "--excitation", "single:0,99", "--n", "100"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    header = lines[0].split("\t")
    rows = {l.split("\t")[0]: dict(zip(header, l.split("\t"))) for l in lines[1:]}
    assert rows["qubit"]["mcy/swap/fixed"] == "590" and rows["qubit"]["mcy/swap/variable"] == "296"
    assert rows["fermionic"]["mcy/fswap/fixed"] == "394" and rows["fermionic"]["mcy/fswap/variable"] == "198"
    assert rows["fermionic"]["pauli/ata/-"] == "396" and rows["qubit"]["pauli/ata/-"] == "4"
    assert rows["fermionic"]["pauli/fswap/variable"] == "200" and rows["qubit"]["mcy/ata/-"] == "2"


def test_cli_pool_info(capsys):
    assert main(["pool-info", "--pool", "ceo", "--n", "8"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[1].split("\t")[:3] == ["ceo", "8", "96"]
    assert main(["pool-info", "--n", "4", "--list"]) == EXIT_OK


def test_cli_validate(capsys, tmp_path):
    assert main(["validate", "h2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "hf-energy: pass" in out and "fci-energy: pass" in out and "number-conserving: pass" in out
    path = tmp_path / "xx.json"
    cio.write_pauli_json(path, PauliSum.from_words({"XX": 1.0, "ZI": 0.5}), n_electrons=1)
    assert main(["validate", str(path)]) == 7


@pytest.mark.parametrize("argv,code", [
    (["run", "h2", "--bogus"], EXIT_USAGE),
    (["frobnicate"], EXIT_USAGE),
    ([], EXIT_USAGE),
    (["run", "h2", "--pool", "ceo", "--penalty", "fswap"], EXIT_CONFIG),
    (["run", "h2", "--k", "-1", "--penalty", "swap"], EXIT_CONFIG),
    (["run", "h2", "--connectivity", "grid:3x3"], EXIT_CONFIG),
    (["run", "/no/such/file.json"], EXIT_INPUT),
    (["run", "h4", "--pool", "qe", "--max-iters", "1"], EXIT_CONVERGENCE),
    (["penalty-table", "--excitation", "single:0"], EXIT_CONFIG),
    (["pool-info", "--n", "5"], EXIT_CONFIG),
])
def test_cli_exit_codes(argv, code, tmp_path):
    if argv and argv[0] == "run":
        argv = argv + ["--out", str(tmp_path / "o")]
    assert main(argv) == code


def test_cli_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "penalty-table" in capsys.readouterr().out
