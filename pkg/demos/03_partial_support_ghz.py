# %% [markdown]
# # Teleporting a two-qubit EPR-type state with a small channel
#
# alpha|01> + beta|10> = alpha e3 + beta e2 lives in a two-dimensional
# subspace of C^4, so a two-level auxiliary space suffices. Two resources
# do the job: (f1 g3 + f2 g2)/sqrt(2), which lands the state in place,
# and the GHZ triplet (|000> + |111>)/sqrt(2), which lands it on g1, g4.

# %%
import numpy as np

from qudit_teleport.engine import run_protocol
from qudit_teleport.states import injection_resource, random_state

psi = np.zeros(4, complex)
psi[[2, 1]] = random_state(2, seed=31)

for label, inj in (("f1 g3 + f2 g2", (3, 2)), ("GHZ triplet", (1, 4))):
    rep = run_protocol(psi, injection_resource(2, 4, inj), input_support=(3, 2))
    bob = rep.branches[0].bob_state
    print(f"{label}: {len(rep.branches)} branches, min fidelity {rep.min_fidelity:.12f}")
    print("   Bob's state (|amplitudes|):", np.round(np.abs(bob), 4))
