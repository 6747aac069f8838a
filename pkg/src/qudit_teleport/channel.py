"""Classical leg of the protocol: outcome frames and a paired session driver.

Wire layout of an outcome frame (23 bytes, big-endian):

    offset  size  field
    0       2     magic b"QT"
    2       1     version
    3       4     n1         (dimension of Alice's input space)
    7       4     n2         (dimension of Alice's auxiliary space)
    11      4     outcome_i  (1-based)
    15      4     outcome_k  (1-based)
    19      4     CRC-32 of bytes 0..18
"""
import queue
import socket
import struct
import threading
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence, Tuple

import numpy as np

from .engine import (
    apply_sender_unitary,
    fidelity,
    measure_alice,
    prepare_joint,
    recover,
    target_state,
)
from .errors import (
    CorruptionError,
    IncompleteFrameError,
    ProtocolError,
    SessionError,
    ValidationError,
)
from .states import ResourceMatrix, check_state
from .synthesis import PhaseTensor, synthesize

MAGIC = b"QT"
VERSION = 1
FRAME_SIZE = 23
_BODY = struct.Struct(">2sBIIII")
_CRC = struct.Struct(">I")
_U32_MAX = 2**32 - 1


@dataclass(frozen=True)
class OutcomeFrame:
    n1: int
    n2: int
    outcome_i: int
    outcome_k: int
    version: int = VERSION

    def validate(self) -> None:
        if not 0 <= self.version <= 255:
            raise ValidationError(f"version {self.version} does not fit in one byte")
        for name in ("n1", "n2", "outcome_i", "outcome_k"):
            v = getattr(self, name)
            if not 0 <= v <= _U32_MAX:
                raise ValidationError(f"{name}={v} does not fit in 32 bits")
        if not 1 <= self.outcome_i <= self.n1:
            raise ValidationError(f"outcome_i={self.outcome_i} outside 1..{self.n1}")
        if not 1 <= self.outcome_k <= self.n2:
            raise ValidationError(f"outcome_k={self.outcome_k} outside 1..{self.n2}")


def encode_frame(frame: OutcomeFrame) -> bytes:
    frame.validate()
    body = _BODY.pack(MAGIC, frame.version, frame.n1, frame.n2, frame.outcome_i, frame.outcome_k)
    return body + _CRC.pack(zlib.crc32(body))


def decode_frame(data: bytes) -> OutcomeFrame:
    """Parse the first 23 bytes of ``data``.

    Checks run in wire order: length, magic, checksum, version, bounds.
    """
    data = bytes(data)
    if len(data) < FRAME_SIZE:
        raise IncompleteFrameError(f"need {FRAME_SIZE} bytes, got {len(data)}")
    body, (crc,) = data[: _BODY.size], _CRC.unpack_from(data, _BODY.size)
    magic, version, n1, n2, i, k = _BODY.unpack(body)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if zlib.crc32(body) != crc:
        raise CorruptionError(f"checksum mismatch: frame says {crc:#010x}, payload gives {zlib.crc32(body):#010x}")
    if version != VERSION:
        raise ProtocolError(f"unsupported frame version {version}")
    frame = OutcomeFrame(n1, n2, i, k, version)
    frame.validate()
    return frame


class Endpoint(Protocol):
    """One side of a reliable ordered byte stream."""

    def send(self, data: bytes) -> None: ...

    def recv(self, size: int) -> bytes: ...

    def close(self) -> None: ...


class _MemoryEndpoint:
    def __init__(self, inbox, outbox, timeout):
        self._inbox, self._outbox = inbox, outbox
        self._timeout = timeout
        self._pending = b""
        self._eof = False

    def send(self, data: bytes) -> None:
        if data:
            self._outbox.put(bytes(data))

    def recv(self, size: int) -> bytes:
        """Return up to ``size`` bytes; ``b""`` means the peer closed."""
        while not self._pending and not self._eof:
            try:
                chunk = self._inbox.get(timeout=self._timeout)
            except queue.Empty:
                raise SessionError("timed out waiting for peer") from None
            if chunk is None:
                self._eof = True
            else:
                self._pending += chunk
        out, self._pending = self._pending[:size], self._pending[size:]
        return out

    def close(self) -> None:
        self._outbox.put(None)


def memory_pipe(timeout: float = 5.0) -> Tuple[_MemoryEndpoint, _MemoryEndpoint]:
    """In-process duplex byte stream as a pair of connected endpoints."""
    ab, ba = queue.Queue(), queue.Queue()
    return _MemoryEndpoint(ba, ab, timeout), _MemoryEndpoint(ab, ba, timeout)


class _SocketEndpoint:
    def __init__(self, sock: socket.socket, timeout: float):
        sock.settimeout(timeout)
        self._sock = sock

    def send(self, data: bytes) -> None:
        self._sock.sendall(data)

    def recv(self, size: int) -> bytes:
        try:
            return self._sock.recv(size)
        except socket.timeout:
            raise SessionError("timed out waiting for peer") from None

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_WR)
        except OSError:
            pass
        self._sock.close()


def tcp_pair(host: str = "127.0.0.1", port: int = 0, timeout: float = 5.0):
    """Loopback TCP connection; Bob's end listens on ``host:port``."""
    with socket.create_server((host, port)) as server:
        alice = socket.create_connection(server.getsockname()[:2], timeout=timeout)
        bob, _ = server.accept()
    return _SocketEndpoint(alice, timeout), _SocketEndpoint(bob, timeout)


def open_transport(spec: str = "memory", timeout: float = 5.0):
    """``"memory"`` or ``"tcp:<host>:<port>"`` -> (alice_end, bob_end)."""
    if spec == "memory":
        return memory_pipe(timeout)
    if spec.startswith("tcp:"):
        host, sep, port = spec[4:].rpartition(":")
        if not sep or not port.isdigit():
            raise ValidationError(f"transport {spec!r} is not tcp:<host>:<port>")
        return tcp_pair(host or "127.0.0.1", int(port), timeout)
    raise ValidationError(f"unknown transport {spec!r}")


def read_frame(endpoint: Endpoint) -> OutcomeFrame:
    buf = b""
    while len(buf) < FRAME_SIZE:
        chunk = endpoint.recv(FRAME_SIZE - len(buf))
        if not chunk:
            raise SessionError(f"transport closed after {len(buf)} of {FRAME_SIZE} frame bytes")
        buf += chunk
    return decode_frame(buf)


@dataclass
class SessionResult:
    role: str
    frames_sent: int = 0
    frames_received: int = 0
    final_fidelity: Optional[float] = None
    outcome: Optional[Tuple[int, int]] = None
    probability: Optional[float] = None
    final_state: Optional[np.ndarray] = field(default=None, repr=False)


def run_session_pair(
    psi0,
    resource: ResourceMatrix,
    phases: Optional[PhaseTensor] = None,
    input_support: Optional[Sequence[int]] = None,
    transport: str = "memory",
    seed: int = 0,
    timeout: float = 5.0,
    tamper: Optional[Callable[[bytes], bytes]] = None,
) -> Tuple[SessionResult, SessionResult]:
    """Run Alice and Bob as two threads joined by a classical byte stream.

    Only the 23-byte outcome frame crosses the transport. Bob's collapsed
    subsystem is handed over by value through a separate in-process queue
    standing in for the shared entangled particle. ``tamper`` rewrites
    Alice's outgoing bytes (fault injection for tests).
    """
    psi0 = check_state(psi0, "psi0")
    protocol, family = synthesize(resource, psi0.size, phases, input_support)
    target = target_state(psi0, protocol, family)
    dims = (protocol.n1, protocol.n2, resource.dim_receiver)
    alice_end, bob_end = open_transport(transport, timeout)
    particle: "queue.Queue[np.ndarray]" = queue.Queue(maxsize=1)
    results = {"alice": SessionResult("alice"), "bob": SessionResult("bob")}
    errors = {}

    def alice():
        try:
            phi = apply_sender_unitary(prepare_joint(psi0, resource), protocol)
            col = measure_alice(phi, dims, np.random.default_rng(seed))
            particle.put(col.bob_state.copy())
            wire = encode_frame(OutcomeFrame(dims[0], dims[1], col.outcome_i, col.outcome_k))
            alice_end.send(tamper(wire) if tamper else wire)
            results["alice"].frames_sent = 1
            results["alice"].outcome = (col.outcome_i, col.outcome_k)
            results["alice"].probability = col.probability
        except Exception as exc:
            errors["alice"] = exc
        finally:
            alice_end.close()

    def bob():
        try:
            frame = read_frame(bob_end)
            results["bob"].frames_received = 1
            state = particle.get(timeout=timeout)
            out = recover(state, family, frame.outcome_i, frame.outcome_k)
            results["bob"].outcome = (frame.outcome_i, frame.outcome_k)
            results["bob"].final_state = out
            results["bob"].final_fidelity = fidelity(out, target)
        except Exception as exc:
            errors["bob"] = exc
        finally:
            bob_end.close()

    threads = [threading.Thread(target=alice), threading.Thread(target=bob)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout + 1.0)
    for role in ("alice", "bob"):
        if role in errors:
            raise errors[role]
    if any(t.is_alive() for t in threads):
        raise SessionError("session did not terminate")
    return results["alice"], results["bob"]
