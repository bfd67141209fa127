"""Staircase compilation of a few Pauli exponentials in both CNOT orientations."""

from adaptvqe.circuits import export_circuit, optimize_orientations
from adaptvqe.pauli import PauliString

layers = [(PauliString.from_label("Z1 Z2 X3 Z4", 5), 0.3),
          (PauliString.from_label("Y0 Z1 Z2 X3", 5), -0.2),
          (PauliString.from_label("X1 Y2", 5), 0.7)]
res = optimize_orientations(layers)
for name, c in (("standard", res.standard), ("reverse", res.reverse), ("optimized", res.circuit)):
    print(f"{name:<9s} depth {c.depth():3d}  CNOTs {c.cnot_count():2d}  gates {len(c)}")
print(f"per-layer reverse flags: {res.flags}")
print(export_circuit(res.circuit, "openqasm2").decode())
