"""Regenerate the bundled molecular Hamiltonians (needs pyscf; not a package dependency).

Restricted Hartree-Fock in STO-3G, molecular-orbital integrals, interleaved
spin orbitals (mode 2k = orbital k spin up, 2k+1 = spin down) and the
physicist-ordered two-body table ``h_pqrs`` for ``1/2 h_pqrs a+p a+q a_r a_s``,
i.e. ``h_pqrs = (ps|qr)`` in chemist notation with matching spins.

Usage: python tools/make_hamiltonians.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np
from pyscf import ao2mo, fci, gto, scf

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from coadapt.io import write_fermionic_json  # noqa: E402

TOL = 1e-12


def tri_h6(d):
    h = d * np.sqrt(3) / 2
    pts = [(0, 0), (d, 0), (2 * d, 0), (d / 2, h), (1.5 * d, h), (d, 2 * h)]
    return [("H", (x, y, 0.0)) for x, y in pts]


SYSTEMS = {
    "h2_sto3g_0.74.json": ("H2, 0.74 A", [("H", (0, 0, 0)), ("H", (0, 0, 0.74))]),
    "h4_linear_sto3g_3.0.json": ("H4 linear chain, 3.0 A spacing", [("H", (0, 0, 3.0 * i)) for i in range(4)]),
    "h6_linear_sto3g_3.0.json": ("H6 linear chain, 3.0 A spacing", [("H", (0, 0, 3.0 * i)) for i in range(6)]),
    "h6_triangular_sto3g_3.0.json": ("H6 triangular lattice patch, 3.0 A edges", tri_h6(3.0)),
    "lih_sto3g_1.5.json": ("LiH, 1.5 A", [("Li", (0, 0, 0)), ("H", (0, 0, 1.5))]),
}


def build(atoms, description):
    mol = gto.M(atom=atoms, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"RHF did not converge for {description}")
    c = mf.mo_coeff
    norb = c.shape[1]
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), norb)  # chemist (ij|kl)
    e_fci = fci.FCI(mf).kernel()[0]
    n = 2 * norb
    one, two = {}, {}
    for p in range(n):
        for q in range(n):
            if p % 2 == q % 2 and abs(h1[p // 2, q // 2]) > TOL:
                one[(p, q)] = float(h1[p // 2, q // 2])
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    if p % 2 != s % 2 or q % 2 != r % 2 or p == q or r == s:
                        continue
                    v = eri[p // 2, s // 2, q // 2, r // 2]
                    if abs(v) > TOL:
                        two[(p, q, r, s)] = float(v)
    return dict(n_modes=n, constant=float(mol.energy_nuc()), one_body=one, two_body=two,
                n_electrons=int(mol.nelectron), hf_energy=float(mf.e_tot), fci_energy=float(e_fci),
                description=f"{description}; STO-3G RHF orbitals; interleaved spin orbitals")


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for fname, (desc, atoms) in SYSTEMS.items():
        d = build(atoms, desc)
        write_fermionic_json(outdir / fname, d.pop("n_modes"), d.pop("constant"), d.pop("one_body"),
                             d.pop("two_body"), **d)
        print(f"{fname}: HF {d['hf_energy']:.10f}  FCI {d['fci_energy']:.10f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src" / "coadapt" / "data")
