# %% [markdown]
# # The classical leg
#
# Alice's outcome (i, k) travels as a 23-byte CRC-protected frame. The
# session driver runs Alice and Bob as threads over an in-memory pipe or a
# loopback TCP socket.

# %%
from qudit_teleport.channel import OutcomeFrame, decode_frame, encode_frame, run_session_pair
from qudit_teleport.errors import CorruptionError
from qudit_teleport.states import maximally_entangled_resource, random_state

wire = encode_frame(OutcomeFrame(n1=3, n2=3, outcome_i=2, outcome_k=3))
print(len(wire), wire.hex(" "))
print(decode_frame(wire))

try:
    decode_frame(wire[:-1] + b"\x00")
except CorruptionError as exc:
    print("corrupted:", exc)

# %%
psi, resource = random_state(3, seed=5), maximally_entangled_resource(3)
for transport in ("memory", "tcp:127.0.0.1:0"):
    alice, bob = run_session_pair(psi, resource, transport=transport, seed=7)
    print(transport, "outcome", bob.outcome, "fidelity", bob.final_fidelity)
