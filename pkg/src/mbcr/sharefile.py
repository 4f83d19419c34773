"""Share file format, version 1.

Header (all integers little-endian)::

    magic        4s   b"MBCR"
    version      u8   1
    n, k, d, r   u16 x4
    degree m     u8
    poly         u16  reduction polynomial; bit m is implied when m = 16
    gen kind     u8   0 = builtin-paper-gf2, 1 = vandermonde
    eval points  u8 x (n-1), vandermonde only
    node_id      u16
    length       u64  original file length in bytes
    stripes      u32

Body: for each stripe, the alpha = k + n - 1 symbols of the node in order
(own group ascending, then parity offsets 1..n-1).  Each symbol takes
ceil(m/8) bytes, big-endian.

File bytes map to symbols as a big-endian bitstream cut into m-bit
symbols; the tail is zero padded up to a whole number of stripes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import CodeParams, NodeShare
from .errors import CorruptionError, ParameterError, ShareMismatchError
from .gf import get_field
from .mds import BUILTIN, VANDERMONDE, GeneratorSpec

MAGIC = b"MBCR"
VERSION = 1
GEN_KINDS = {BUILTIN: 0, VANDERMONDE: 1}
GEN_NAMES = {v: k for k, v in GEN_KINDS.items()}

_HEAD = struct.Struct("<4sBHHHHBHB")
_TAIL = struct.Struct("<HQI")


def symbol_bytes(m: int) -> int:
    return (m + 7) // 8


@dataclass(frozen=True)
class ShareHeader:
    params: CodeParams
    node_id: int
    length: int
    stripes: int

    def pack(self) -> bytes:
        p = self.params
        spec = p.generator_spec
        if spec.kind == VANDERMONDE and any(x > 0xFF for x in spec.eval_points):
            raise ParameterError("evaluation points above 255 cannot be stored in a share header")
        head = _HEAD.pack(
            MAGIC, VERSION, p.n, p.k, p.d, p.r, p.field.degree, p.field.poly & 0xFFFF, GEN_KINDS[spec.kind]
        )
        points = bytes(spec.eval_points) if spec.kind == VANDERMONDE else b""
        return head + points + _TAIL.pack(self.node_id, self.length, self.stripes)

    @property
    def body_size(self) -> int:
        return self.stripes * self.params.alpha * symbol_bytes(self.params.field.degree)

    def compatible(self, other: ShareHeader) -> bool:
        return (self.params, self.length, self.stripes) == (other.params, other.length, other.stripes)


def unpack_header(buf: bytes) -> tuple[ShareHeader, int]:
    """Parse a header from the start of ``buf``; returns it and its size."""
    if len(buf) < _HEAD.size:
        raise CorruptionError("share file too short for a header")
    magic, version, n, k, d, r, m, poly, kind = _HEAD.unpack_from(buf)
    if magic != MAGIC:
        raise CorruptionError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptionError(f"unsupported share format version {version}")
    if kind not in GEN_NAMES:
        raise CorruptionError(f"unknown generator kind {kind}")
    pos = _HEAD.size
    points: tuple[int, ...] = ()
    if GEN_NAMES[kind] == VANDERMONDE:
        points = tuple(buf[pos : pos + n - 1])
        pos += n - 1
    if len(buf) < pos + _TAIL.size:
        raise CorruptionError("share file header truncated")
    node_id, length, stripes = _TAIL.unpack_from(buf, pos)
    pos += _TAIL.size
    try:
        field = get_field(m, (poly & ((1 << m) - 1)) | (1 << m))
        spec = GeneratorSpec(GEN_NAMES[kind], k, n - 1, field, points)
        params = CodeParams(n, k, d, r, field, spec)
    except ParameterError as exc:
        raise CorruptionError(f"share header holds invalid parameters: {exc}") from exc
    if not 1 <= node_id <= n:
        raise CorruptionError(f"node id {node_id} out of range 1..{n}")
    return ShareHeader(params, node_id, length, stripes), pos


def write_share(path: str | Path, header: ShareHeader, share: NodeShare) -> None:
    width = symbol_bytes(header.params.field.degree)
    body = share.packets().T  # (S, alpha)
    dtype = ">u1" if width == 1 else ">u2"
    Path(path).write_bytes(header.pack() + np.ascontiguousarray(body).astype(dtype).tobytes())


def read_share(path: str | Path) -> tuple[ShareHeader, NodeShare]:
    buf = Path(path).read_bytes()
    header, pos = unpack_header(buf)
    p = header.params
    width = symbol_bytes(p.field.degree)
    body = buf[pos:]
    if len(body) != header.body_size:
        raise CorruptionError(f"{path}: body is {len(body)} bytes, header promises {header.body_size}")
    dtype = ">u1" if width == 1 else ">u2"
    arr = np.frombuffer(body, dtype=dtype).reshape(header.stripes, p.alpha).astype(p.field.dtype)
    if arr.size and int(arr.max()) >= p.field.order:
        raise CorruptionError(f"{path}: symbol outside GF(2^{p.field.degree})")
    packets = arr.T
    share = NodeShare(header.node_id, packets[: p.k].copy(), packets[p.k :].copy())
    return header, share


def check_consistent(headers: list[ShareHeader]) -> None:
    first = headers[0]
    for h in headers[1:]:
        if not first.compatible(h):
            raise ShareMismatchError(
                f"share for node {h.node_id} disagrees with node {first.node_id} on parameters, length or stripes"
            )
    ids = [h.node_id for h in headers]
    if len(set(ids)) != len(ids):
        raise ShareMismatchError(f"duplicate node ids among shares: {sorted(ids)}")


def bytes_to_symbols(data: bytes, m: int) -> np.ndarray:
    """Cut a byte string into m-bit symbols, most significant bit first."""
    raw = np.frombuffer(data, dtype=np.uint8)
    if m == 8:
        return raw.astype(np.uint8)
    bits = np.unpackbits(raw)
    pad = (-len(bits)) % m
    bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)]).reshape(-1, m)
    weights = (1 << np.arange(m - 1, -1, -1)).astype(np.int64)
    return (bits.astype(np.int64) @ weights).astype(np.uint8 if m <= 8 else np.uint16)


def symbols_to_bytes(symbols: np.ndarray, m: int, length: int) -> bytes:
    """Inverse of :func:`bytes_to_symbols`, truncated to ``length`` bytes."""
    symbols = np.asarray(symbols).reshape(-1)
    if m == 8:
        return symbols.astype(np.uint8).tobytes()[:length]
    shifts = np.arange(m - 1, -1, -1)
    bits = ((symbols.astype(np.int64)[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)
    return np.packbits(bits[: length * 8]).tobytes()[:length]


def stripes_for(data: bytes, params: CodeParams) -> np.ndarray:
    """Zero-padded (S, B) stripe array for a whole file."""
    symbols = bytes_to_symbols(data, params.field.degree)
    count = -(-len(symbols) // params.B)
    padded = np.zeros(count * params.B, dtype=params.field.dtype)
    padded[: len(symbols)] = symbols
    return padded.reshape(count, params.B)
