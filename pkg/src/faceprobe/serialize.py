"""``FPRB`` container: a self-describing, canonical binary encoding of nested
dicts, lists, scalars and numpy arrays.

Layout::

    b"FPRB" | u32 format version | u64 payload length | sha256(payload) | payload

All integers little-endian. Dict keys keep insertion order, so encoding the
same structure twice yields identical bytes.
"""

from __future__ import annotations

import hashlib
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ModelFormatError

MAGIC = b"FPRB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQ32s")

_DTYPES = {b"d": "<f8", b"q": "<i8", b"B": "u1", b"?": "?", b"c": "<c16"}
_DTYPE_CODES = {np.dtype(v): k for k, v in _DTYPES.items()}


def _encode(obj, out: io.BytesIO) -> None:
    w = out.write
    if obj is None:
        w(b"N")
    elif obj is True:
        w(b"T")
    elif obj is False:
        w(b"F")
    elif isinstance(obj, (int, np.integer)):
        w(b"I" + struct.pack("<q", int(obj)))
    elif isinstance(obj, (float, np.floating)):
        w(b"D" + struct.pack("<d", float(obj)))
    elif isinstance(obj, str):
        raw = obj.encode("utf-8")
        w(b"S" + struct.pack("<I", len(raw)) + raw)
    elif isinstance(obj, np.ndarray):
        arr = obj
        if arr.dtype.kind == "f":
            arr = arr.astype("<f8", copy=False)
        elif arr.dtype.kind in "iu" and arr.dtype != np.uint8:
            arr = arr.astype("<i8", copy=False)
        elif arr.dtype.kind == "c":
            arr = arr.astype("<c16", copy=False)
        code = _DTYPE_CODES.get(arr.dtype)
        if code is None:
            raise TypeError(f"cannot serialise arrays of dtype {obj.dtype}")
        w(b"A" + code + struct.pack("<B", arr.ndim))
        w(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        w(np.ascontiguousarray(arr).tobytes())
    elif isinstance(obj, (list, tuple)):
        w(b"L" + struct.pack("<I", len(obj)))
        for item in obj:
            _encode(item, out)
    elif isinstance(obj, dict):
        w(b"M" + struct.pack("<I", len(obj)))
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"dict keys must be str, got {type(key).__name__}")
            _encode(key, out)
            _encode(value, out)
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("model payload ends prematurely")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return bytes(chunk)

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def value(self):
        tag = self.take(1)
        if tag == b"N":
            return None
        if tag == b"T":
            return True
        if tag == b"F":
            return False
        if tag == b"I":
            return self.unpack("<q")[0]
        if tag == b"D":
            return self.unpack("<d")[0]
        if tag == b"S":
            (n,) = self.unpack("<I")
            return self.take(n).decode("utf-8")
        if tag == b"A":
            code = self.take(1)
            if code not in _DTYPES:
                raise ModelFormatError(f"unknown array dtype code {code!r}")
            (ndim,) = self.unpack("<B")
            shape = self.unpack(f"<{ndim}Q") if ndim else ()
            dtype = np.dtype(_DTYPES[code])
            count = int(np.prod(shape)) if shape else 1
            raw = self.take(count * dtype.itemsize)
            return np.frombuffer(raw, dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
        if tag == b"L":
            (n,) = self.unpack("<I")
            return [self.value() for _ in range(n)]
        if tag == b"M":
            (n,) = self.unpack("<I")
            out = {}
            for _ in range(n):
                key = self.value()
                out[key] = self.value()
            return out
        raise ModelFormatError(f"unknown value tag {tag!r}")


def dumps(obj) -> bytes:
    buf = io.BytesIO()
    _encode(obj, buf)
    payload = buf.getvalue()
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(payload), hashlib.sha256(payload).digest()) + payload


def loads(data: bytes):
    if len(data) < _HEADER.size:
        raise ModelFormatError("model file is truncated (incomplete header)")
    magic, version, length, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError(f"not a model bundle (magic {magic!r}, expected {MAGIC!r})")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"model format version {version} is not supported (this build reads version {FORMAT_VERSION})"
        )
    payload = data[_HEADER.size:]
    if len(payload) != length:
        raise ModelFormatError(
            f"model file is truncated or padded: payload has {len(payload)} bytes, header says {length}"
        )
    if hashlib.sha256(payload).digest() != digest:
        raise ModelFormatError("model file failed its integrity check (checksum mismatch)")
    reader = _Reader(payload)
    obj = reader.value()
    if reader.pos != len(payload):
        raise ModelFormatError("trailing bytes after model payload")
    return obj


def write_atomic(path, data: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def save(path, obj) -> None:
    write_atomic(path, dumps(obj))


def load(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        raise ModelFormatError(f"model file not found: {path}") from None
    return loads(data)
