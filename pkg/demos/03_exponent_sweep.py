"""Trading gradient against hardware cost.

Sweeps the penalty exponent on H4 with FSWAP routing. An exponent of zero
reproduces plain gradient selection; larger values favour cheap, local
operators at the price of more iterations.
"""

from coadapt import io as cio
from coadapt.adapt import AdaptConfig, run_adapt

h, meta = cio.load_hamiltonian(cio.bundled_path("h4"))
print("k      iterations  CNOTs  final error")
for k in (0.0, 0.5, 1.0, 2.0, 4.0):
    res = run_adapt(AdaptConfig(pool="ceo-f", penalty="fswap", k=k), h, meta.n_electrons, meta.fci_energy)
    print(f"{k:<6} {len(res.trace):10d} {res.total_cnots:6d}  {res.final_energy - meta.fci_energy:.2e}")
