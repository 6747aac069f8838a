import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qudit_teleport.channel import (
    FRAME_SIZE,
    OutcomeFrame,
    decode_frame,
    encode_frame,
    memory_pipe,
    open_transport,
    read_frame,
    run_session_pair,
)
from qudit_teleport.engine import execute
from qudit_teleport.errors import (
    CorruptionError,
    IncompleteFrameError,
    ProtocolError,
    SessionError,
    ValidationError,
)
from qudit_teleport.states import injection_resource, maximally_entangled_resource, random_state
from qudit_teleport.synthesis import synthesize


def crc32_bitwise(data: bytes) -> int:
    """Reflected CRC-32 (poly 0x04C11DB7 -> 0xEDB88320), init/xorout 0xFFFFFFFF."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (0xEDB88320 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


def test_crc_oracle_check_value():
    assert crc32_bitwise(b"123456789") == 0xCBF43926


def test_layout():
    wire = encode_frame(OutcomeFrame(2, 2, 1, 1))
    assert len(wire) == FRAME_SIZE == 23
    assert wire[:3] == b"\x51\x54\x01"
    assert wire[3:19] == bytes.fromhex("00000002" "00000002" "00000001" "00000001")
    assert struct.unpack(">I", wire[19:])[0] == crc32_bitwise(wire[:19])


def test_layout_big_endian_fields():
    wire = encode_frame(OutcomeFrame(0x01020304, 7, 0x01020300, 5))
    assert wire[3:7] == b"\x01\x02\x03\x04"
    assert wire[11:15] == b"\x01\x02\x03\x00"


@pytest.mark.parametrize("frame", [OutcomeFrame(2, 2, 0, 1), OutcomeFrame(2, 2, 1, 3), OutcomeFrame(3, 2, 4, 1)])
def test_encode_out_of_range(frame):
    with pytest.raises(ValidationError):
        encode_frame(frame)


def test_roundtrip_seeded():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n1, n2 = (int(x) for x in rng.integers(1, 2**32, size=2))
        f = OutcomeFrame(n1, n2, int(rng.integers(1, n1 + 1)), int(rng.integers(1, n2 + 1)))
        assert decode_frame(encode_frame(f)) == f


@given(st.integers(1, 2**32 - 1), st.integers(1, 2**32 - 1), st.data())
def test_roundtrip_property(n1, n2, data):
    f = OutcomeFrame(n1, n2, data.draw(st.integers(1, n1)), data.draw(st.integers(1, n2)))
    assert decode_frame(encode_frame(f)) == f


def test_corrupted_checksum():
    wire = bytearray(encode_frame(OutcomeFrame(3, 3, 2, 3)))
    wire[-1] ^= 0xFF
    with pytest.raises(CorruptionError):
        decode_frame(bytes(wire))


def test_corrupted_payload():
    wire = bytearray(encode_frame(OutcomeFrame(3, 3, 2, 3)))
    wire[14] ^= 0x01
    with pytest.raises(CorruptionError):
        decode_frame(bytes(wire))


def test_bad_magic():
    wire = bytearray(encode_frame(OutcomeFrame(3, 3, 2, 3)))
    wire[0] = ord("X")
    with pytest.raises(ProtocolError):
        decode_frame(bytes(wire))


def test_unsupported_version():
    body = struct.pack(">2sBIIII", b"QT", 9, 2, 2, 1, 1)
    with pytest.raises(ProtocolError):
        decode_frame(body + struct.pack(">I", crc32_bitwise(body)))


def test_every_prefix_is_incomplete():
    wire = encode_frame(OutcomeFrame(4, 2, 3, 2))
    for n in range(FRAME_SIZE):
        with pytest.raises(IncompleteFrameError):
            decode_frame(wire[:n])


def test_memory_pipe_chunked_read():
    a, b = memory_pipe(timeout=1.0)
    wire = encode_frame(OutcomeFrame(4, 2, 3, 2))
    for i in range(0, FRAME_SIZE, 5):
        a.send(wire[i : i + 5])
    a.close()
    assert read_frame(b) == OutcomeFrame(4, 2, 3, 2)
    assert b.recv(1) == b""


def test_memory_pipe_timeout():
    _, b = memory_pipe(timeout=0.05)
    with pytest.raises(SessionError):
        b.recv(1)


def test_bad_transport_spec():
    for spec in ("udp:1", "tcp:localhost", "tcp:host:port"):
        with pytest.raises(ValidationError):
            open_transport(spec)


def _branch_fidelity(psi, resource, outcome, support=None):
    u, fam = synthesize(resource, psi.size, None, support)
    rep = execute(psi, resource, u, fam)
    return next(b.fidelity for b in rep.branches if (b.outcome_i, b.outcome_k) == outcome)


def test_session_bennett_memory():
    psi = random_state(2, 3)
    r = maximally_entangled_resource(2)
    for seed in range(8):
        alice, bob = run_session_pair(psi, r, seed=seed)
        assert alice.frames_sent == 1 and bob.frames_received == 1
        assert alice.outcome == bob.outcome
        assert abs(bob.final_fidelity - 1) <= 1e-10
        assert abs(bob.final_fidelity - _branch_fidelity(psi, r, bob.outcome)) <= 1e-12


def test_session_ghz_tcp():
    psi = np.zeros(4, complex)
    psi[[2, 1]] = random_state(2, 4)
    r = injection_resource(2, 4, (1, 4))
    alice, bob = run_session_pair(psi, r, input_support=(3, 2), transport="tcp:127.0.0.1:0", seed=1)
    assert abs(bob.final_fidelity - 1) <= 1e-10
    assert abs(bob.final_fidelity - _branch_fidelity(psi, r, bob.outcome, (3, 2))) <= 1e-12


def test_session_dropped_frame():
    with pytest.raises(SessionError):
        run_session_pair(random_state(2, 0), maximally_entangled_resource(2), tamper=lambda b: b"", timeout=1.0)


def test_session_truncated_frame():
    with pytest.raises(SessionError):
        run_session_pair(random_state(2, 0), maximally_entangled_resource(2), tamper=lambda b: b[:10], timeout=1.0)


def test_session_corrupt_frame():
    def flip(wire):
        return wire[:-2] + bytes([wire[-2] ^ 0x10]) + wire[-1:]

    with pytest.raises(CorruptionError):
        run_session_pair(random_state(2, 0), maximally_entangled_resource(2), tamper=flip, timeout=1.0)
