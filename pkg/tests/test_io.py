import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays, array_shapes

from tubaltt import io as tio
from tubaltt.errors import FormatError
from tubaltt.synth import random_tt, random_ttt
from tubaltt.tt import TtFormat, tt_contract
from tubaltt.ttt import TttFormat, ttt_contract, ttt_param_count


def test_tensor_header_layout():
    x = np.arange(6.0).reshape(2, 3)
    buf = tio.encode_tensor(x)
    assert buf[:4] == b"TNSR"
    assert struct.unpack("<HBB", buf[4:8]) == (1, 1, 2)
    assert struct.unpack("<2Q", buf[8:24]) == (2, 3)
    # column-major payload
    assert list(np.frombuffer(buf[24:], "<f8")) == [0, 3, 1, 4, 2, 5]


def test_tensor_round_trip_file(tmp_path, rng):
    x = rng.standard_normal((3, 4, 5))
    p = tmp_path / "x.tnsr"
    tio.write_tensor(p, x)
    y = tio.read_tensor(p)
    assert y.tobytes() == x.tobytes() and y.shape == x.shape
    assert p.read_bytes() == tio.encode_tensor(y)


@given(arrays(np.float64, array_shapes(min_dims=0, max_dims=4, max_side=4),
              elements=st.floats(allow_nan=False, width=64)))
def test_tensor_round_trip_property(x):
    y = tio.decode_tensor(tio.encode_tensor(x))
    assert y.shape == x.shape
    assert y.tobytes() == np.ascontiguousarray(x).tobytes()


def test_complex_round_trip(rng):
    x = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    buf = tio.encode_tensor(x)
    assert buf[6] == 2
    assert np.array_equal(tio.decode_tensor(buf), x)


def test_tensor_errors(tmp_path):
    with pytest.raises(FormatError, match="bad magic"):
        tio.decode_tensor(b"")
    head = b"TNSR" + struct.pack("<HBB", 1, 1, 2) + struct.pack("<2Q", 2, 2)
    with pytest.raises(FormatError, match="truncated payload.*offset 24"):
        tio.decode_tensor(head + struct.pack("<3d", 1, 2, 3))
    with pytest.raises(FormatError, match="trailing"):
        tio.decode_tensor(head + struct.pack("<5d", 1, 2, 3, 4, 5))
    with pytest.raises(FormatError, match="version"):
        tio.decode_tensor(b"TNSR" + struct.pack("<HBB", 2, 1, 0))
    with pytest.raises(FormatError, match="dtype"):
        tio.decode_tensor(b"TNSR" + struct.pack("<HBB", 1, 9, 0))
    huge = b"TNSR" + struct.pack("<HBB", 1, 1, 2) + struct.pack("<2Q", 2 ** 40, 2 ** 40)
    with pytest.raises(FormatError, match="overflow"):
        tio.decode_tensor(huge)
    empty = tmp_path / "empty.tnsr"
    empty.write_bytes(b"")
    with pytest.raises(FormatError):
        tio.read_tensor(empty)


def test_factor_round_trip_ttt(tmp_path, rng):
    f = random_ttt(rng, (3, 4, 5), 4, (2, 3))
    p = tmp_path / "f.tttf"
    tio.write_factors(p, f)
    g = tio.read_factors(p)
    assert isinstance(g, TttFormat)
    assert all(a.tobytes() == b.tobytes() and a.shape == b.shape for a, b in zip(f.cores, g.cores))
    assert tio.payload_param_count(p) == ttt_param_count(f) == f.param_count()
    _, payload = tio.read_factors(p, with_payload=True)
    assert payload == 8 * ttt_param_count(f)


@pytest.mark.parametrize("complex_", [False, True])
def test_factor_round_trip_tt(tmp_path, rng, complex_):
    f = random_tt(rng, (3, 4, 2), (2, 2), complex_=complex_)
    p = tmp_path / "f.tttf"
    tio.write_factors(p, f)
    g = tio.read_factors(p)
    assert isinstance(g, TtFormat) and g.is_complex == complex_
    assert p.read_bytes()[6] == (3 if complex_ else 2)
    assert all(np.array_equal(a, b) for a, b in zip(f.cores, g.cores))
    assert tio.payload_param_count(p) == f.param_count()


def test_unit_tube_file_contracts(tmp_path, rng):
    f = random_ttt(rng, (3, 4, 2), 1, (2, 2))
    p = tmp_path / "f.tttf"
    tio.write_factors(p, f)
    np.testing.assert_array_equal(ttt_contract(tio.read_factors(p)), ttt_contract(f))
    tt = TtFormat([g[..., 0] for g in f.cores])
    np.testing.assert_allclose(ttt_contract(f)[..., 0], tt_contract(tt), atol=1e-12)


def test_factor_corrupt_rank_chain(rng):
    f = random_ttt(rng, (3, 4, 5), 2, (2, 3))
    buf = bytearray(tio.encode_factors(f))
    ranks_at = 4 + struct.calcsize("<HBQB")
    struct.pack_into("<Q", buf, ranks_at + 8, 3)  # claim r_1 = 3
    with pytest.raises(FormatError, match="rank chain"):
        tio.decode_factors(bytes(buf))
    struct.pack_into("<Q", buf, ranks_at, 2)
    with pytest.raises(FormatError, match="start and end with 1"):
        tio.decode_factors(bytes(buf))


def test_factor_truncation_offsets(rng):
    buf = tio.encode_factors(random_ttt(rng, (3, 4), 2, (2,)))
    for cut in (3, 10, 30, len(buf) - 1):
        with pytest.raises(FormatError, match="byte offset") as info:
            tio.decode_factors(buf[:cut])
        assert info.value.offset <= cut


def test_pnm_single_gray_pixel():
    x = tio.decode_pnm(b"P5\n1 1\n255\n\x07")
    assert x.shape == (1, 1) and x[0, 0] == 7


def test_pnm_color_layout():
    raster = bytes(range(1, 13))
    x = tio.decode_pnm(b"P6\n# comment\n2 2\n255\n" + raster)
    assert x.shape == (2, 2, 3)
    # row-major pixel stream, RGB interleaved
    assert list(x[0, 0]) == [1, 2, 3] and list(x[0, 1]) == [4, 5, 6]
    assert list(x[1, 0]) == [7, 8, 9] and list(x[1, 1]) == [10, 11, 12]


def test_pnm_errors():
    with pytest.raises(FormatError, match="magic"):
        tio.decode_pnm(b"P3\n1 1\n255\n7\n")
    with pytest.raises(FormatError, match="maxval"):
        tio.decode_pnm(b"P5\n1 1\n65535\n\x00\x07")
    with pytest.raises(FormatError, match="truncated"):
        tio.decode_pnm(b"P5\n2 2\n255\n\x01")


def test_image_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (5, 7, 3)).astype(float)
    p = tmp_path / "a.ppm"
    tio.write_image(p, img)
    assert np.array_equal(tio.read_image(p), img)
    g = img[..., 0]
    tio.write_image(tmp_path / "g.pgm", g)
    assert np.array_equal(tio.load_any(tmp_path / "g.pgm"), g)


def test_ascii_matrix(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("1 2 3\n4 5 6\n")
    np.testing.assert_array_equal(tio.load_any(p), [[1, 2, 3], [4, 5, 6]])
