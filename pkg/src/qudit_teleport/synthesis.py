"""Sender unitary and recovery operators for a given entangled resource.

The construction works in a *canonical frame*: after a Schmidt rotation,
the resource reads ``(1/sqrt(n)) sum_l f'_l (x) h_l`` for orthonormal
sender vectors ``f'_l`` and receiver vectors ``h_l``. On that frame the
sender unitary maps

    e_l (x) f'_j  ->  sum_s c[s, l, t] / sqrt(N1) e_s (x) f_t,   t = j - l + 1 (mod n)

and Bob undoes branch ``(i, k)`` with ``C_ik Pi^-(k-1)`` followed by the
frame change back to ``h``. Everything the constraint leaves free is
filled in by a deterministic orthonormal completion.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, FeasibilityError, ValidationError
from .linalg import (
    as_complex,
    complete_unitary,
    cyclic_shift_power,
    embed,
    index_mod,
    is_unitary,
    schmidt,
)
from .states import ResourceMatrix, check_state, validate_injection

FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class PhaseTensor:
    """Unimodular phases ``c[s, j, k]`` (0-based storage, shape N1 x N1 x N2).

    Each fixed-``k`` slice must have orthogonal columns, otherwise the
    sender transformation built from it is not unitary.
    """

    c: np.ndarray

    def __post_init__(self):
        c = as_complex(self.c)
        if c.ndim != 3 or c.shape[0] != c.shape[1]:
            raise DimensionError(f"phase tensor must have shape (N1, N1, N2), got {c.shape}")
        if np.max(np.abs(np.abs(c) - 1.0)) > 1e-12:
            raise ValidationError("phase tensor entries must be unimodular")
        n1 = c.shape[0]
        for k in range(c.shape[2]):
            m = c[:, :, k]
            if np.max(np.abs(m.conj().T @ m - n1 * np.eye(n1))) > 1e-10:
                raise ValidationError(f"slice k={k + 1} of the phase tensor lacks orthogonal columns")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def n1(self) -> int:
        return self.c.shape[0]

    @property
    def n2(self) -> int:
        return self.c.shape[2]

    def phase(self, s: int, j: int, k: int) -> complex:
        return complex(self.c[s - 1, j - 1, k - 1])


def fourier_phase_tensor(n1: int, n2: int) -> PhaseTensor:
    """``c[s, j, k] = exp(2 pi i (s-1)(j-1) / N1)``, the same for every k."""
    if n1 < 1 or n2 < 1:
        raise DimensionError("phase tensor dimensions must be >= 1")
    s = np.arange(n1)
    dft = np.exp(2j * np.pi * np.outer(s, s) / n1)
    return PhaseTensor(np.repeat(dft[:, :, None], n2, axis=2))


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    lambdas: Tuple[float, ...]
    effective_dim: int


def feasibility(resource: ResourceMatrix, n1: int, tol: float = FEASIBILITY_TOL) -> FeasibilityVerdict:
    """Perfect teleportation of an ``n1``-level state needs exactly ``n1``
    Schmidt coefficients, all equal to ``1/n1``."""
    if n1 < 1:
        raise DimensionError("state dimension must be >= 1")
    lambdas = schmidt(resource.a).lambdas
    nonzero = lambdas[lambdas > tol]
    ok = len(nonzero) == n1 and bool(np.all(np.abs(nonzero - 1.0 / n1) <= tol))
    return FeasibilityVerdict(ok, tuple(float(x) for x in lambdas), len(nonzero))


@dataclass(frozen=True, eq=False)
class ProtocolUnitary:
    """Sender transformation on H1 (x) H2.

    ``logical_dim`` is the dimension actually teleported and
    ``input_support`` lists the H1 basis vectors it occupies (1-based).
    """

    n1: int
    n2: int
    matrix: np.ndarray
    logical_dim: int = 0
    input_support: Tuple[int, ...] = ()

    def __post_init__(self):
        m = as_complex(self.matrix)
        d = self.n1 * self.n2
        if m.shape != (d, d):
            raise DimensionError(f"sender unitary must be {d}x{d}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.input_support:
            n = self.logical_dim or self.n1
            object.__setattr__(self, "input_support", tuple(range(1, n + 1)))
        object.__setattr__(self, "input_support", validate_injection(self.input_support, self.n1))
        object.__setattr__(self, "logical_dim", len(self.input_support))

    def b(self, i: int, j: int, s: int, t: int) -> complex:
        """Amplitude of ``e_s (x) f_t`` in ``U (e_i (x) f_j)``."""
        return complex(self.matrix[(s - 1) * self.n2 + t - 1, (i - 1) * self.n2 + j - 1])


@dataclass(frozen=True, eq=False)
class RecoveryFamily:
    """Bob's corrections, keyed by Alice's 1-based outcome ``(i, k)``.

    ``receiver_correction`` is the unitary whose first ``logical_dim``
    columns are Bob's frame vectors ``h_l``; it is the identity for
    computational-basis resources (a permutation for injected supports).
    """

    n1: int
    n2: int
    n3: int
    ops: Dict[Tuple[int, int], np.ndarray] = field(repr=False)
    receiver_correction: np.ndarray = field(repr=False)

    @property
    def logical_dim(self) -> int:
        return max(k for _, k in self.ops)

    @property
    def target_frame(self) -> np.ndarray:
        """N3 x n matrix of the vectors ``h_l`` Bob's output lives on."""
        return self.receiver_correction[:, : self.logical_dim]


def recovery_operator(family: RecoveryFamily, i: int, k: int) -> np.ndarray:
    try:
        return family.ops[(i, k)]
    except KeyError:
        raise IndexError(
            f"outcome ({i}, {k}) outside 1..{family.n1} x 1..{family.logical_dim}"
        ) from None


def receiver_frame(resource: ResourceMatrix, n: int) -> np.ndarray:
    """Orthonormal receiver vectors ``h_1..h_n`` (columns) spanning the
    resource's support in H3, with ``a = a conj(h) h^T``.

    Preference order: the recorded support injection, then the
    computational basis vectors of the nonzero columns, then the Schmidt
    right vectors.
    """
    a = resource.a
    n3 = resource.dim_receiver
    if resource.support is not None and len(resource.support) == n:
        idx = [j - 1 for j in resource.support]
    else:
        idx = [j for j in range(n3) if np.max(np.abs(a[:, j])) > FEASIBILITY_TOL]
    if len(idx) == n:
        h = np.zeros((n3, n), dtype=np.complex128)
        h[idx, range(n)] = 1.0
        # the support must contain the whole row space of a
        if np.max(np.abs(a @ (h @ h.T) - a)) <= 1e-10:
            return h
    return schmidt(a).right[:, :n].conj()


def _resolve_support(resource: ResourceMatrix, n1: int, input_support) -> Tuple[int, ...]:
    if input_support is not None:
        return validate_injection(input_support, n1)
    sup = resource.support
    if sup is not None and len(sup) < n1 and max(sup) <= n1:
        return sup
    return tuple(range(1, n1 + 1))


def _assemble(n1, n2, n3, support, sender_vecs, bob_frame, phases):
    """Build (U, family) from canonical-frame data; see the module docstring."""
    n = len(support)
    c = phases.c
    if c.shape != (n1, n1, n2):
        raise DimensionError(f"phase tensor shape {c.shape} does not match (N1, N1, N2)=({n1}, {n1}, {n2})")
    in_frame = complete_unitary(np.eye(n1)[:, [x - 1 for x in support]])
    out_frame = complete_unitary(sender_vecs)
    e = np.eye(n1, dtype=np.complex128)
    f = np.eye(n2, dtype=np.complex128)

    ins, outs = [], []
    for l in range(n):
        for j in range(n):
            t = index_mod(j - l + 1, n) - 1
            ins.append(np.kron(in_frame[:, l], out_frame[:, j]))
            outs.append(np.kron(c[:, l, t], f[t]) / np.sqrt(n1))
    for l in range(n1):
        for j in range(n2):
            if l < n and j < n:
                continue
            ins.append(np.kron(in_frame[:, l], out_frame[:, j]))
    outs = complete_unitary(np.column_stack(outs))
    u = outs @ np.column_stack(ins).conj().T

    s_frame = complete_unitary(bob_frame)
    ops = {}
    for i in range(1, n1 + 1):
        for k in range(1, n + 1):
            fix = np.diag(c[i - 1, :n, k - 1].conj()) @ cyclic_shift_power(n, -(k - 1))
            ops[(i, k)] = s_frame @ embed(fix, n3) @ s_frame.conj().T
    protocol = ProtocolUnitary(n1, n2, u, input_support=support)
    family = RecoveryFamily(n1, n2, n3, ops, s_frame)
    return protocol, family


def synthesize(
    resource: ResourceMatrix,
    n1: int,
    phases: Optional[PhaseTensor] = None,
    input_support: Optional[Sequence[int]] = None,
):
    """Solve the teleportation constraint for ``resource``.

    ``n1`` is the dimension of Alice's space H1. The teleported subspace is
    spanned by ``e_x`` for ``x`` in ``input_support`` (all of H1 by
    default, or the resource's own support when that is smaller). Returns
    ``(ProtocolUnitary, RecoveryFamily)``; raises ``FeasibilityError`` if
    the resource is not maximally entangled over that subspace.
    """
    support = _resolve_support(resource, n1, input_support)
    n = len(support)
    verdict = feasibility(resource, n)
    if not verdict.feasible:
        raise FeasibilityError(
            f"resource cannot teleport a {n}-level state: Schmidt spectrum {verdict.lambdas}",
            verdict.lambdas,
        )
    if phases is None:
        phases = fourier_phase_tensor(n1, resource.dim_sender)
    h = receiver_frame(resource, n)
    sender_vecs = np.sqrt(n) * resource.a @ h.conj()
    return _assemble(n1, resource.dim_sender, resource.dim_receiver, support, sender_vecs, h, phases)


def forced_protocol(resource: ResourceMatrix, n1: int, phases: Optional[PhaseTensor] = None):
    """Apply the maximal-entanglement construction on the Schmidt basis of
    an arbitrary resource of Schmidt rank >= n1, skipping the feasibility
    check. Teleportation is then imperfect unless the resource is
    maximally entangled."""
    sr = schmidt(resource.a)
    if np.count_nonzero(sr.lambdas > FEASIBILITY_TOL) < n1:
        raise FeasibilityError(f"Schmidt rank below {n1}", sr.lambdas)
    if phases is None:
        phases = fourier_phase_tensor(n1, resource.dim_sender)
    support = tuple(range(1, n1 + 1))
    return _assemble(
        n1, resource.dim_sender, resource.dim_receiver, support,
        sr.left[:, :n1], sr.right[:, :n1].conj(), phases,
    )


def condition_residual(protocol: ProtocolUnitary, resource: ResourceMatrix, phases: PhaseTensor, psi0) -> float:
    """Largest deviation of ``(U (x) 1)(psi0 (x) resource)`` from the state the
    teleportation condition prescribes, measured in Bob's frame.

    The prescribed amplitude of ``e_s (x) f_t (x) h_m`` is
    ``alpha_l c[s, l, t] / sqrt(N1 n)`` with ``l = m - t + 1 (mod n)``;
    all other amplitudes must vanish.
    """
    psi0 = check_state(psi0, "psi0")
    n1, n2, n3 = protocol.n1, resource.dim_sender, resource.dim_receiver
    if psi0.size != n1 or protocol.n2 != n2:
        raise DimensionError("psi0, protocol and resource dimensions disagree")
    if phases.c.shape != (n1, n1, n2):
        raise DimensionError(f"phase tensor shape {phases.c.shape} does not match ({n1}, {n1}, {n2})")
    support = protocol.input_support
    n = len(support)
    alpha = psi0[[x - 1 for x in support]]
    frame = complete_unitary(receiver_frame(resource, n))

    joint = np.kron(psi0, resource.state_vector()).reshape(n1 * n2, n3)
    phi = (protocol.matrix @ joint).reshape(n1, n2, n3) @ frame.conj()

    expected = np.zeros((n1, n2, n3), dtype=np.complex128)
    c = phases.c
    for t in range(n):
        for m in range(n):
            l = index_mod(m - t + 1, n) - 1
            expected[:, t, m] = alpha[l] * c[:, l, t] / np.sqrt(n1 * n)
    return float(np.max(np.abs(phi - expected)))


def check_protocol(protocol: ProtocolUnitary, family: RecoveryFamily, tol: float = 1e-10) -> bool:
    """True iff U, every recovery operator and the receiver frame are unitary."""
    mats = [protocol.matrix, family.receiver_correction, *family.ops.values()]
    return all(is_unitary(m, tol) for m in mats)
