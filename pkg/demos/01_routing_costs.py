"""How much does routing cost?

Prints the CNOT count of one long-range excitation under every
implementation choice, then shows how the average qubit distance grows on
a chain and on a square grid.
"""

from coadapt import routing as R

print("Single excitation between qubits 0 and 99 on a 100-qubit chain:\n")
print(R.format_penalty_table(R.penalty_table("single:0,99", 100)))

print("\nAverage distance between two qubits:")
for n in (4, 16, 64, 256):
    side = int(n ** 0.5)
    line = R.average_pair_distance(R.ConnectivityGraph.linear(n))
    grid = R.average_pair_distance(R.ConnectivityGraph.grid(side, side))
    print(f"  {n:4d} qubits: chain {line:7.2f}   {side}x{side} grid {grid:6.2f}")
