import pytest
from hypothesis import given
from hypothesis import strategies as st

from replayguard.errors import FormatError, UnsupportedFormatError
from replayguard.wire import (
    PacketAE,
    PacketAuth,
    decode_ae,
    decode_auth,
    encode_ae,
    encode_auth,
    make_ae,
    make_auth,
    replay_tag,
)

u16 = st.integers(0, 0xFFFF)
u8 = st.integers(0, 0xFF)
payloads = st.binary(max_size=29)
macs = st.binary(min_size=4, max_size=4)


@st.composite
def ae_packets(draw):
    return make_ae(draw(u16), draw(u16), draw(u16), draw(payloads), draw(u8), draw(macs))


@st.composite
def auth_packets(draw):
    return make_auth(draw(u16), draw(payloads), draw(u8), draw(macs))


def test_encode_ae_minimal():
    p = PacketAE(dest=1, am=4, len=0, src=2, ctr=0, payload=b"", mac=bytes(4))
    assert encode_ae(p).hex(" ") == "00 01 04 00 00 02 00 00 00 00 00 00"


def test_encode_ae_full_payload_is_41_bytes():
    p = make_ae(1, 2, 3, bytes(range(29)))
    assert len(encode_ae(p)) == 2 + 1 + 1 + 2 + 2 + 29 + 4


def test_field_order_and_endianness():
    p = make_ae(0x1234, 0xABCD, 0x0102, b"\xee", am=0x55, mac=b"MACX")
    assert encode_ae(p) == bytes.fromhex("1234 55 01 abcd 0102 ee") + b"MACX"


@pytest.mark.parametrize("packet", [
    PacketAE(1, 4, 5, 2, 0, b"abcd", bytes(4)),
    PacketAE(1, 4, 30, 2, 0, bytes(30), bytes(4)),
    PacketAE(1, 4, 0, 2, 0x10000, b"", bytes(4)),
    PacketAE(1, 4, 0, 2, 0, b"", bytes(3)),
])
def test_encode_ae_rejects_invalid(packet):
    with pytest.raises(FormatError):
        encode_ae(packet)


def test_decode_ae_round_trip_minimal():
    p = PacketAE(1, 4, 0, 2, 0, b"", bytes(4))
    assert decode_ae(bytes.fromhex("000104000002000000000000")) == p


def test_decode_ae_short_buffer():
    with pytest.raises(FormatError):
        decode_ae(bytes(11))


def test_decode_ae_len_mismatch():
    # header claims 29 payload bytes: 8 + 29 + 4 = 41, but only 40 supplied
    buf = bytes.fromhex("0001041d00020000") + bytes(32)
    assert len(buf) == 40
    with pytest.raises(FormatError):
        decode_ae(buf)


def test_decode_ae_len_too_big_for_format():
    buf = bytes.fromhex("0001041e00020000") + bytes(34)
    with pytest.raises(FormatError):
        decode_ae(buf)


def test_auth_layout():
    p = make_auth(0x0203, b"hi", am=9, mac=b"\x01\x02\x03\x04")
    assert encode_auth(p) == bytes.fromhex("0203 09 02") + b"hi" + bytes([1, 2, 3, 4])
    assert len(encode_auth(make_auth(1, bytes(29)))) == 4 + 29 + 4


def test_decode_auth_errors():
    with pytest.raises(FormatError):
        decode_auth(bytes(7))
    with pytest.raises(FormatError):
        decode_auth(bytes.fromhex("00010402") + bytes(5))


@given(ae_packets())
def test_ae_round_trip(p):
    assert decode_ae(encode_ae(p)) == p


@given(auth_packets())
def test_auth_round_trip(p):
    assert decode_auth(encode_auth(p)) == p


def test_counter_tag():
    p = make_ae(1, 2, 7, b"xyz")
    assert replay_tag(p, "counter") == bytes([0, 2, 0, 7])


@pytest.mark.parametrize("scheme", ["hash_window", "bloom_single", "bloom_multi"])
def test_byte_tags_are_whole_packet(scheme):
    p = make_ae(1, 2, 7, b"xyz")
    assert replay_tag(p, scheme) == encode_ae(p)
    a = make_auth(1, b"xyz")
    assert replay_tag(a, scheme) == encode_auth(a)


def test_counter_tag_rejects_auth():
    with pytest.raises(UnsupportedFormatError):
        replay_tag(make_auth(1, b""), "counter")


def test_unknown_scheme():
    with pytest.raises(ValueError):
        replay_tag(make_ae(1, 2, 3), "timestamp")


@given(ae_packets(), ae_packets())
def test_counter_tags_distinct_iff_src_ctr_distinct(p, q):
    same_key = (p.src, p.ctr) == (q.src, q.ctr)
    assert (replay_tag(p, "counter") == replay_tag(q, "counter")) == same_key


@given(ae_packets())
def test_bloom_tag_deterministic(p):
    clone = PacketAE(p.dest, p.am, p.len, p.src, p.ctr, bytes(p.payload), bytes(p.mac))
    assert replay_tag(p, "bloom_multi") == replay_tag(clone, "bloom_multi")
