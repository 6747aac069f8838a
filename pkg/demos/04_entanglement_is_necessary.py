# %% [markdown]
# # Less than maximal entanglement cannot teleport perfectly
#
# Feasibility reads the Schmidt spectrum: an N-level state needs exactly N
# equal coefficients 1/N. Forcing the maximal-entanglement construction
# onto a weaker resource leaves a fidelity deficit.

# %%
import numpy as np

from qudit_teleport.engine import execute
from qudit_teleport.states import resource_from_matrix, random_state
from qudit_teleport.synthesis import feasibility, forced_protocol

psi = random_state(2, seed=0)
for lam in (0.5, 0.6, 0.7, 0.9, 1.0):
    r = resource_from_matrix(np.diag(np.sqrt([lam, 1 - lam])))
    verdict = feasibility(r, 2)
    if lam < 1:
        U, fam = forced_protocol(r, 2)
        mean = execute(psi, r, U, fam).mean_fidelity
    else:
        mean = float("nan")
    print(f"lambda=({lam:.1f}, {1 - lam:.1f})  feasible={verdict.feasible!s:5}  forced mean fidelity={mean:.6f}")
