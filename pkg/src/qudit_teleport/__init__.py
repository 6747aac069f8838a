"""Teleportation of finite-dimensional quantum states over general
bipartite entangled resources: protocol synthesis, state-vector
simulation and the classical outcome channel."""
from .channel import OutcomeFrame, decode_frame, encode_frame, run_session_pair
from .engine import BranchRecord, TeleportReport, execute, fidelity, run_protocol
from .errors import FeasibilityError, TeleportError
from .states import (
    ResourceMatrix,
    epr_product_resource,
    injection_resource,
    maximally_entangled_resource,
    random_state,
    resource_from_matrix,
)
from .synthesis import (
    PhaseTensor,
    ProtocolUnitary,
    RecoveryFamily,
    condition_residual,
    feasibility,
    fourier_phase_tensor,
    recovery_operator,
    synthesize,
)

__version__ = "0.1.0"
