"""Growing an H4 ansatz for a linear qubit chain.

Runs the same adaptive loop three ways and compares the final routed CNOT
counts: plain gradient selection with qubit-flavored operators, plain
selection with fermionic operators, and selection that divides each
gradient by the operator's FSWAP-routed cost.
"""

from coadapt import io as cio
from coadapt.adapt import AdaptConfig, run_adapt

h, meta = cio.load_hamiltonian(cio.bundled_path("h4"))
print(f"H4: {h.n_modes} modes, HF {meta.hf_energy:.6f}, exact {meta.fci_energy:.6f}\n")

for pool, penalty in (("ceo", "none"), ("ceo-f", "none"), ("ceo-f", "fswap")):
    res = run_adapt(AdaptConfig(pool=pool, penalty=penalty, connectivity="linear"),
                    h, meta.n_electrons, meta.fci_energy)
    err = res.final_energy - meta.fci_energy
    print(f"{pool:6s} penalty={penalty:6s} iterations={len(res.trace):3d} "
          f"error={err:.2e} CNOTs={res.total_cnots}")
    for row in res.trace[:3]:
        print(f"    picked {row.operator_label:18s} |g|={row.gradient:.4f} cost={row.penalty:.0f}")
