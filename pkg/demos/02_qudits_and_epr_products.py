# %% [markdown]
# # N-level teleportation and its EPR-pair decomposition
#
# Any N works with a maximally entangled resource; every one of the N^2
# outcomes is equally likely and Bob always recovers the input exactly.
# For N = 2^m the resource is just m ordinary EPR pairs.

# %%
import numpy as np

from qudit_teleport.engine import run_protocol
from qudit_teleport.states import epr_product_resource, maximally_entangled_resource, random_state

for n in (3, 5, 8):
    rep = run_protocol(random_state(n, seed=n), maximally_entangled_resource(n))
    probs = [b.probability for b in rep.branches]
    print(f"N={n}: {len(rep.branches)} branches, p in [{min(probs):.5f}, {max(probs):.5f}], "
          f"min fidelity {rep.min_fidelity:.12f}")

# %%
for m in (1, 2, 3):
    same = np.allclose(epr_product_resource(m).a, maximally_entangled_resource(2**m).a)
    print(f"{m} EPR pairs == {2**m}-level maximal resource: {same}")

rep = run_protocol(random_state(4, seed=0), epr_product_resource(2))
print("two EPR pairs teleport a 4-level state, min fidelity", rep.min_fidelity)
