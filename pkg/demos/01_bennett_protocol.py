# %% [markdown]
# # Two-level teleportation from the general construction
#
# With two-dimensional spaces and the Fourier phase choice, the synthesized
# sender unitary is the familiar CNOT-then-Hadamard circuit and Bob's four
# corrections are I, X, Z and iY.

# %%
import numpy as np

from qudit_teleport.engine import run_protocol
from qudit_teleport.scenario import op_label
from qudit_teleport.states import maximally_entangled_resource, random_state
from qudit_teleport.synthesis import fourier_phase_tensor, synthesize

resource = maximally_entangled_resource(2)
phases = fourier_phase_tensor(2, 2)
U, family = synthesize(resource, 2, phases)

np.set_printoptions(precision=3, suppress=True)
print("sender unitary * sqrt(2):")
print(U.matrix * np.sqrt(2))

# %%
cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
print("equals (H x I) CNOT:", np.allclose(U.matrix, np.kron(hadamard, np.eye(2)) @ cnot))

for (i, k), op in sorted(family.ops.items()):
    print(f"outcome ({i},{k}) -> {op_label(op)}")

# %%
report = run_protocol(random_state(2, seed=1), resource, phases)
for b in report.branches:
    print(b.outcome_i, b.outcome_k, f"p={b.probability:.3f}", f"F={b.fidelity:.12f}")
