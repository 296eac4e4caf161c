"""Binary persistence of tensors and factor formats, and PGM/PPM ingestion.

TensorFile layout (little-endian)::

    b"TNSR"  u16 version=1  u8 dtype  u8 order  u64 dims[order]  payload

``dtype`` 1 is float64, 2 is complex128 stored as interleaved (re, im)
float64 pairs. The payload lists entries in column-major order.

FactorFile layout::

    b"TTTF"  u16 version=1  u8 kind  u64 T  u8 N  u64 ranks[N+1]  TensorFile cores[N]

``kind`` 1 is a TTT format (cores ``R x I x R' x T``), 2 a real TT and 3 a
complex TT (cores ``R x I x R'``; ``T`` is written as 1). ``ranks`` is the
boundary-augmented profile and is checked against the cores on read.
"""

import struct

import numpy as np

from .errors import FormatError
from .tensor_core import flat, reshape
from .tt import TtFormat
from .ttt import TttFormat

TENSOR_MAGIC = b"TNSR"
FACTOR_MAGIC = b"TTTF"
VERSION = 1
DTYPE_F64 = 1
DTYPE_C128 = 2
KIND_TTT = 1
KIND_TT_REAL = 2
KIND_TT_COMPLEX = 3
MAX_ENTRIES = 2 ** 62


class _Reader:
    def __init__(self, buf, offset=0):
        self.buf = buf
        self.pos = offset

    def take(self, n, what):
        if self.pos + n > len(self.buf):
            raise FormatError(
                f"truncated {what}: need {n} bytes, {len(self.buf) - self.pos} left", self.pos
            )
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def encode_tensor(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        code = DTYPE_C128
        data = flat(x).astype("<c16").tobytes()
    else:
        code = DTYPE_F64
        data = flat(x).astype("<f8").tobytes()
    if x.ndim > 255:
        raise FormatError(f"order {x.ndim} exceeds the 255-mode limit")
    header = TENSOR_MAGIC + struct.pack("<HBB", VERSION, code, x.ndim)
    header += struct.pack(f"<{x.ndim}Q", *x.shape)
    return header + data


def _decode_tensor(reader):
    start = reader.pos
    magic = reader.take(4, "magic") if len(reader.buf) - reader.pos >= 4 else None
    if magic != TENSOR_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TENSOR_MAGIC!r}", start)
    version, code, order = reader.unpack("<HBB", "header")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", start + 4)
    if code not in (DTYPE_F64, DTYPE_C128):
        raise FormatError(f"unsupported dtype code {code}", start + 6)
    dims = reader.unpack(f"<{order}Q", "dimensions") if order else ()
    numel = 1
    for d in dims:
        numel *= d
        if numel > MAX_ENTRIES:
            raise FormatError(f"dimensions {dims} overflow the entry limit", start + 8)
    itemsize = 8 if code == DTYPE_F64 else 16
    raw = reader.take(numel * itemsize, "payload")
    data = np.frombuffer(raw, dtype="<f8" if code == DTYPE_F64 else "<c16")
    data = data.astype(np.float64 if code == DTYPE_F64 else np.complex128)
    return reshape(data, dims), numel * itemsize


def decode_tensor(buf):
    reader = _Reader(buf)
    x, _ = _decode_tensor(reader)
    if reader.pos != len(buf):
        raise FormatError(f"{len(buf) - reader.pos} trailing bytes after payload", reader.pos)
    return x


def write_tensor(path, x):
    with open(path, "wb") as fh:
        fh.write(encode_tensor(x))


def read_tensor(path):
    with open(path, "rb") as fh:
        return decode_tensor(fh.read())


def encode_factors(f):
    if isinstance(f, TttFormat):
        kind, T = KIND_TTT, f.tube_length
    elif isinstance(f, TtFormat):
        kind = KIND_TT_COMPLEX if f.is_complex else KIND_TT_REAL
        T = 1
    else:
        raise TypeError(f"cannot serialize {type(f).__name__}")
    ranks = f.ranks
    out = FACTOR_MAGIC + struct.pack("<HBQB", VERSION, kind, T, f.order)
    out += struct.pack(f"<{len(ranks)}Q", *ranks)
    for g in f.cores:
        if kind == KIND_TT_COMPLEX:
            g = np.asarray(g, dtype=np.complex128)
        out += encode_tensor(g)
    return out


def decode_factors(buf, with_payload=False):
    """Parse a FactorFile; with ``with_payload`` also return core payload bytes."""
    reader = _Reader(buf)
    magic = reader.take(4, "magic") if len(buf) >= 4 else None
    if magic != FACTOR_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {FACTOR_MAGIC!r}", 0)
    version, kind, T, N = reader.unpack("<HBQB", "header")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if kind not in (KIND_TTT, KIND_TT_REAL, KIND_TT_COMPLEX):
        raise FormatError(f"unknown factor kind {kind}", 6)
    ranks_at = reader.pos
    ranks = reader.unpack(f"<{N + 1}Q", "rank profile")
    if N < 1 or ranks[0] != 1 or ranks[-1] != 1:
        raise FormatError(f"rank profile {ranks} must start and end with 1", ranks_at)
    cores, payload = [], 0
    for n in range(N):
        at = reader.pos
        g, nbytes = _decode_tensor(reader)
        payload += nbytes
        expected_order = 4 if kind == KIND_TTT else 3
        if g.ndim != expected_order:
            raise FormatError(f"core {n} has order {g.ndim}, expected {expected_order}", at)
        if g.shape[0] != ranks[n] or g.shape[2] != ranks[n + 1]:
            raise FormatError(
                f"core {n} shape {g.shape} breaks rank chain {ranks[n]}->{ranks[n + 1]}", at
            )
        if kind == KIND_TTT and g.shape[3] != T:
            raise FormatError(f"core {n} tube length {g.shape[3]} != {T}", at)
        if kind == KIND_TT_COMPLEX:
            g = g.astype(np.complex128)
        elif np.iscomplexobj(g):
            raise FormatError(f"core {n} is complex in a real format", at)
        cores.append(g)
    if reader.pos != len(buf):
        raise FormatError(f"{len(buf) - reader.pos} trailing bytes", reader.pos)
    f = TttFormat(cores) if kind == KIND_TTT else TtFormat(cores)
    return (f, payload) if with_payload else f


def write_factors(path, f):
    with open(path, "wb") as fh:
        fh.write(encode_factors(f))


def read_factors(path, with_payload=False):
    with open(path, "rb") as fh:
        return decode_factors(fh.read(), with_payload=with_payload)


def payload_param_count(path):
    """Stored parameter count recovered from the payload size of a FactorFile."""
    f, payload = read_factors(path, with_payload=True)
    itemsize = 16 if isinstance(f, TtFormat) and f.is_complex else 8
    return payload // itemsize


def _pnm_tokens(buf, count):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < len(buf) and buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PNM header", pos)
        tokens.append(buf[start:pos])
    return tokens, pos + 1  # exactly one whitespace byte precedes the raster


def decode_pnm(buf):
    """Binary PGM (P5) or PPM (P6) with maxval <= 255 as an ``H x W [x 3]`` tensor."""
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported image magic {magic!r} (binary P5/P6 only)", 0)
    tokens, pos = _pnm_tokens(buf, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise FormatError(f"malformed PNM header: {exc}", 2) from exc
    if not 0 < maxval <= 255:
        raise FormatError(f"maxval {maxval} unsupported (must be 1..255)", 2)
    channels = 3 if magic == b"P6" else 1
    n = width * height * channels
    raster = buf[pos:pos + n]
    if len(raster) < n:
        raise FormatError(f"truncated raster: need {n} bytes, got {len(raster)}", pos)
    pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    if channels == 1:
        return pixels.reshape(height, width)
    return pixels.reshape(height, width, 3)


def read_image(path):
    with open(path, "rb") as fh:
        return decode_pnm(fh.read())


def write_image(path, x):
    """Write an ``H x W`` (P5) or ``H x W x 3`` (P6) tensor, clipped to 0..255."""
    x = np.asarray(x)
    if x.ndim == 2:
        magic, h, w = b"P5", x.shape[0], x.shape[1]
    elif x.ndim == 3 and x.shape[2] == 3:
        magic, h, w = b"P6", x.shape[0], x.shape[1]
    else:
        raise FormatError(f"cannot write shape {x.shape} as PGM/PPM")
    data = np.clip(np.rint(x), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(data.tobytes(order="C"))


def read_ascii_matrix(path):
    """Whitespace-separated rows of numbers as a 2-D tensor."""
    return np.atleast_2d(np.loadtxt(path, dtype=np.float64))


def load_any(path):
    """Dispatch on extension: PGM/PPM image, ASCII matrix, else TensorFile."""
    lower = str(path).lower()
    if lower.endswith((".pgm", ".ppm", ".pnm")):
        return read_image(path)
    if lower.endswith((".txt", ".dat", ".asc")):
        return read_ascii_matrix(path)
    return read_tensor(path)
