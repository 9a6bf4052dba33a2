"""Header+blob container used by every persisted artifact.

Layout: a UTF-8 text header of ``key=value`` lines, opened by a magic line
and closed by ``end-header``, followed immediately by raw little-endian
float32 matrix data in the order declared by the ``matrices`` key::

    #msgcot-blob v1
    kind=encoder
    matrices=layer0:1433x256,layer1:256x256
    ...
    end-header
    <binary>

Writes are atomic (temp file + rename); loads verify the magic line, the
declared shapes and the exact byte count.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = "#msgcot-blob v1"
_END = "end-header"

__all__ = ["write_blob_file", "read_blob_file", "MAGIC"]


def write_blob_file(path, kind, meta, matrices):
    """Write ``matrices`` (name -> ndarray pairs) under a text header.

    ``meta`` maps strings to strings; keys may not contain ``=`` or newlines.
    """
    path = Path(path)
    names = [name for name, _ in matrices]
    if len(set(names)) != len(names):
        raise CheckpointError(f"duplicate matrix names: {names}")
    decl = ",".join(f"{name}:{m.shape[0]}x{m.shape[1]}" for name, m in matrices)
    lines = [MAGIC, f"kind={kind}"]
    for key in sorted(meta):
        value = str(meta[key])
        if "\n" in value or "=" in key:
            raise CheckpointError(f"illegal header entry {key!r}")
        lines.append(f"{key}={value}")
    lines.append(f"matrices={decl}")
    lines.append(_END)
    header = ("\n".join(lines) + "\n").encode()

    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            for _, m in matrices:
                fh.write(np.ascontiguousarray(m, dtype="<f4").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_blob_file(path):
    """Read back ``(kind, meta, {name: float32 ndarray})``."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"no such file: {path}")
    raw = path.read_bytes()
    end_token = (_END + "\n").encode()
    cut = raw.find(end_token)
    if cut < 0:
        raise CheckpointError(f"{path}: missing header terminator")
    header = raw[:cut].decode("utf-8").splitlines()
    body = raw[cut + len(end_token) :]

    if not header or header[0] != MAGIC:
        raise CheckpointError(f"{path}: unsupported format or version (want {MAGIC!r})")
    meta = {}
    for line in header[1:]:
        key, _, value = line.partition("=")
        meta[key] = value
    kind = meta.pop("kind", None)
    decl = meta.pop("matrices", "")

    matrices = {}
    offset = 0
    if decl:
        for item in decl.split(","):
            name, _, shape = item.partition(":")
            r, _, c = shape.partition("x")
            rows, cols = int(r), int(c)
            nbytes = rows * cols * 4
            chunk = body[offset : offset + nbytes]
            if len(chunk) != nbytes:
                raise CheckpointError(f"{path}: truncated data for matrix {name!r}")
            matrices[name] = np.frombuffer(chunk, dtype="<f4").reshape(rows, cols).copy()
            offset += nbytes
    if offset != len(body):
        raise CheckpointError(f"{path}: {len(body) - offset} trailing bytes")
    return kind, meta, matrices
