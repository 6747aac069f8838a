"""Input states and shared entangled resources."""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateInputError, DimensionError, ValidationError
from .linalg import as_complex, tensor

NORM_TOL = 1e-10


def random_state(dim: int, seed: int) -> np.ndarray:
    """Haar-random pure state on ``C^dim``, reproducible from ``seed``."""
    if dim < 1:
        raise DimensionError("state dimension must be >= 1")
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def basis_state(dim: int, i: int) -> np.ndarray:
    """The 1-based computational basis vector ``e_i`` of ``C^dim``."""
    if not 1 <= i <= dim:
        raise DimensionError(f"basis index {i} outside 1..{dim}")
    e = np.zeros(dim, dtype=np.complex128)
    e[i - 1] = 1.0
    return e


def check_state(psi, name: str = "state") -> np.ndarray:
    psi = as_complex(psi)
    if psi.ndim != 1 or psi.size == 0:
        raise DimensionError(f"{name} must be a non-empty vector")
    if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
        raise ValidationError(f"{name} is not normalized")
    return psi


def validate_injection(inj: Sequence[int], target_dim: int) -> Tuple[int, ...]:
    """Check that ``inj`` maps ``1..len(inj)`` injectively into ``1..target_dim``."""
    inj = tuple(int(x) for x in inj)
    if not inj:
        raise ValidationError("injection must be non-empty")
    if len(set(inj)) != len(inj):
        raise ValidationError(f"injection {inj} is not injective")
    bad = [x for x in inj if not 1 <= x <= target_dim]
    if bad:
        raise ValidationError(f"injection values {bad} outside 1..{target_dim}")
    return inj


@dataclass(frozen=True, eq=False)
class ResourceMatrix:
    """Coefficients ``a[i, j]`` of the shared state ``sum a_ij f_i (x) g_j``.

    Rows index the sender's auxiliary space H2, columns the receiver's
    space H3. ``support`` optionally records which receiver basis vectors
    carry the entanglement (1-based); it fixes where the teleported state
    lands in H3.
    """

    a: np.ndarray
    support: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        a = as_complex(self.a)
        if a.ndim != 2 or 0 in a.shape:
            raise DimensionError("resource coefficients must be a non-empty matrix")
        if abs(np.linalg.norm(a) - 1.0) > NORM_TOL:
            raise ValidationError("resource matrix must have unit Frobenius norm")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        if self.support is not None:
            object.__setattr__(self, "support", validate_injection(self.support, a.shape[1]))

    @property
    def dim_sender(self) -> int:
        return self.a.shape[0]

    @property
    def dim_receiver(self) -> int:
        return self.a.shape[1]

    def state_vector(self) -> np.ndarray:
        """The resource as a vector on H2 (x) H3."""
        return self.a.reshape(-1).copy()


def maximally_entangled_resource(n: int) -> ResourceMatrix:
    if n < 1:
        raise DimensionError("dimension must be >= 1")
    return ResourceMatrix(np.eye(n) / np.sqrt(n), support=tuple(range(1, n + 1)))


def epr_product_resource(m: int) -> ResourceMatrix:
    """``m`` EPR pairs (|00> + |11>)/sqrt(2), regrouped as sender (x) receiver.

    Pair ``p`` contributes the ``p``-th most significant bit of both the
    sender and the receiver composite index.
    """
    if m < 1:
        raise DimensionError("need at least one EPR pair")
    epr = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    psi = epr
    for _ in range(m - 1):
        psi = tensor(psi, epr)
    # axes are (s1, r1, s2, r2, ...); gather senders first
    psi = psi.reshape((2,) * (2 * m))
    order = list(range(0, 2 * m, 2)) + list(range(1, 2 * m, 2))
    a = psi.transpose(order).reshape(2**m, 2**m)
    return ResourceMatrix(a, support=tuple(range(1, 2**m + 1)))


def injection_resource(n1: int, n3: int, inj: Sequence[int]) -> ResourceMatrix:
    """Maximally entangled state of ``f_1..f_n1`` with ``g_inj(1)..g_inj(n1)``.

    ``inj=(3, 2)`` with ``n3=4`` is (f1 g3 + f2 g2)/sqrt(2); ``inj=(1, 4)``
    is the GHZ-triplet form (|000> + |111>)/sqrt(2).
    """
    if n1 < 1 or n3 < n1:
        raise DimensionError(f"need 1 <= n1 <= N3, got n1={n1}, N3={n3}")
    inj = validate_injection(inj, n3)
    if len(inj) != n1:
        raise ValidationError(f"injection has {len(inj)} entries, expected {n1}")
    a = np.zeros((n1, n3), dtype=np.complex128)
    for i, j in enumerate(inj):
        a[i, j - 1] = 1 / np.sqrt(n1)
    return ResourceMatrix(a, support=inj)


def resource_from_matrix(a, support: Optional[Sequence[int]] = None) -> ResourceMatrix:
    """Normalize an arbitrary nonzero coefficient matrix into a resource."""
    a = as_complex(a)
    if a.ndim != 2:
        raise DimensionError("resource coefficients must be a matrix")
    nrm = np.linalg.norm(a)
    if nrm == 0:
        raise DegenerateInputError("resource matrix is zero")
    return ResourceMatrix(a / nrm, support=None if support is None else tuple(support))
