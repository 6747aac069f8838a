"""State-vector execution of a teleportation protocol.

Alice's two subsystems are measured in the computational product basis
after the sender unitary; Bob applies the recovery operator for the
observed outcome. Branches can be enumerated exhaustively or sampled
with a seeded generator.
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateStateError, DimensionError, SizeError, ValidationError
from .states import ResourceMatrix, check_state
from .synthesis import (
    PhaseTensor,
    ProtocolUnitary,
    RecoveryFamily,
    recovery_operator,
    synthesize,
)

MAX_JOINT_DIM = 2**20
PROB_FLOOR = 1e-15


class Collapse(NamedTuple):
    """Outcome of Alice's measurement: 1-based ``(i, k)``, its Born
    probability and Bob's normalized post-measurement state."""

    outcome_i: int
    outcome_k: int
    probability: float
    bob_state: np.ndarray


@dataclass
class BranchRecord:
    outcome_i: int
    outcome_k: int
    probability: float
    bob_state: np.ndarray = field(repr=False)
    fidelity: float


@dataclass
class TeleportReport:
    mode: str
    branches: List[BranchRecord]
    mean_fidelity: float
    seed: Optional[int] = None
    dims: Tuple[int, int, int] = (0, 0, 0)

    @property
    def min_fidelity(self) -> float:
        return min((b.fidelity for b in self.branches), default=float("nan"))


def fidelity(x, y) -> float:
    """Squared overlap ``|<x, y>|^2``; blind to global phase."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise DimensionError(f"cannot compare states of shapes {x.shape} and {y.shape}")
    return float(abs(np.vdot(x, y)) ** 2)


def prepare_joint(psi0, resource: ResourceMatrix) -> np.ndarray:
    psi0 = check_state(psi0, "psi0")
    dim = psi0.size * resource.a.size
    if dim > MAX_JOINT_DIM:
        raise SizeError(f"joint dimension {dim} exceeds {MAX_JOINT_DIM}")
    return np.kron(psi0, resource.state_vector())


def apply_sender_unitary(joint, protocol: ProtocolUnitary) -> np.ndarray:
    """``(U (x) 1) joint`` with U on the first two tensor factors."""
    joint = np.asarray(joint, dtype=np.complex128)
    d = protocol.n1 * protocol.n2
    if joint.ndim != 1 or joint.size % d:
        raise DimensionError(f"joint state of size {joint.size} does not factor as {d} x N3")
    return (protocol.matrix @ joint.reshape(d, -1)).reshape(-1)


def _blocks(phi, dims):
    n1, n2, n3 = dims
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.size != n1 * n2 * n3:
        raise DimensionError(f"state of size {phi.size} does not match dims {dims}")
    return phi.reshape(n1, n2, n3)


def branch_probabilities(phi, dims) -> np.ndarray:
    """Born probabilities ``p[i-1, k-1]`` of Alice's outcomes."""
    return np.sum(np.abs(_blocks(phi, dims)) ** 2, axis=2)


def collapse(phi, dims, i: int, k: int) -> Collapse:
    blocks = _blocks(phi, dims)
    bob = blocks[i - 1, k - 1]
    p = float(np.vdot(bob, bob).real)
    if p < PROB_FLOOR:
        raise DegenerateStateError(f"outcome ({i}, {k}) has vanishing probability")
    return Collapse(i, k, p, bob / np.sqrt(p))


def measure_alice(phi, dims, rng: np.random.Generator) -> Collapse:
    """Sample ``(i, k)`` by inverse CDF over outcomes in lexicographic order."""
    probs = branch_probabilities(phi, dims).reshape(-1)
    total = probs.sum()
    if np.all(probs < PROB_FLOOR):
        raise DegenerateStateError("all measurement outcomes have vanishing probability")
    cdf = np.cumsum(probs / total)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    idx = min(idx, probs.size - 1)
    while probs[idx] < PROB_FLOOR:  # guard against landing on a zero branch at the CDF edge
        idx -= 1
    i, k = divmod(idx, dims[1])
    return collapse(phi, dims, i + 1, k + 1)


def recover(bob, family: RecoveryFamily, i: int, k: int) -> np.ndarray:
    bob = np.asarray(bob, dtype=np.complex128)
    if bob.shape != (family.n3,):
        raise DimensionError(f"Bob's state must have dimension {family.n3}")
    return recovery_operator(family, i, k) @ bob


def target_state(psi0, protocol: ProtocolUnitary, family: RecoveryFamily) -> np.ndarray:
    """``psi0`` moved onto Bob's frame vectors, the state Bob should end with.

    Raises ``ValidationError`` if ``psi0`` has weight outside the
    protocol's input support.
    """
    psi0 = check_state(psi0, "psi0")
    alpha = psi0[[x - 1 for x in protocol.input_support]]
    if abs(np.vdot(alpha, alpha).real - 1.0) > 1e-10:
        raise ValidationError(
            f"psi0 has support outside the teleported subspace {protocol.input_support}"
        )
    return family.target_frame @ alpha


def execute(
    psi0,
    resource: ResourceMatrix,
    protocol: ProtocolUnitary,
    family: RecoveryFamily,
    mode: str = "exhaustive",
    seed: Optional[int] = None,
    draws: int = 1,
) -> TeleportReport:
    """Run an already synthesized protocol on ``psi0``.

    Exhaustive mode lists every outcome with nonzero probability, in
    lexicographic ``(i, k)`` order. Sampled mode makes ``draws`` independent
    measurements of fresh copies of the joint state.
    """
    target = target_state(psi0, protocol, family)
    dims = (protocol.n1, protocol.n2, resource.dim_receiver)
    phi = apply_sender_unitary(prepare_joint(psi0, resource), protocol)

    def record(col: Collapse) -> BranchRecord:
        out = recover(col.bob_state, family, col.outcome_i, col.outcome_k)
        return BranchRecord(col.outcome_i, col.outcome_k, col.probability, out, fidelity(out, target))

    if mode == "exhaustive":
        probs = branch_probabilities(phi, dims)
        branches = [
            record(collapse(phi, dims, i + 1, k + 1))
            for i, k in np.ndindex(probs.shape)
            if probs[i, k] >= PROB_FLOOR
        ]
        mean = sum(b.probability * b.fidelity for b in branches)
        return TeleportReport("exhaustive", branches, float(mean), None, dims)
    if mode == "sampled":
        if seed is None:
            raise ValidationError("sampled mode requires a seed")
        if draws < 0:
            raise ValidationError("draws must be >= 0")
        rng = np.random.default_rng(seed)
        branches = [record(measure_alice(phi, dims, rng)) for _ in range(draws)]
        mean = float(np.mean([b.fidelity for b in branches])) if branches else float("nan")
        return TeleportReport("sampled", branches, mean, seed, dims)
    raise ValidationError(f"unknown mode {mode!r}")


def run_protocol(
    psi0,
    resource: ResourceMatrix,
    phases: Optional[PhaseTensor] = None,
    mode: str = "exhaustive",
    seed: Optional[int] = None,
    draws: int = 1,
    input_support: Optional[Sequence[int]] = None,
) -> TeleportReport:
    """Synthesize a protocol for ``resource`` and teleport ``psi0`` with it."""
    psi0 = check_state(psi0, "psi0")
    protocol, family = synthesize(resource, psi0.size, phases, input_support)
    return execute(psi0, resource, protocol, family, mode, seed, draws)
