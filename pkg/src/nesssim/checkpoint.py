"""Binary checkpoint container for superket states.

Layout (all integers and floats little-endian):

    magic            8 bytes   b"NESSKET1"
    version          uint32    currently 1
    n                uint32    site count
    norm_convention  uint32    1 = identity-string coefficient held at 1
    t                float64   accumulated evolution time
    digest           32 bytes  sha256 of the model/bath parameter text
    bond_dims        (n-1) x uint32   interior bond dimensions
    tensors          per site, (Dl*4*Dr) float64, row-major (Dl, 4, Dr)
    lambdas          per bond, Db float64 (descending, sum of squares 1)

The state is canonicalized to center 0 before writing so every stored
Schmidt vector is fresh.
"""

import hashlib
import struct

import numpy as np

from .mps import SuperketMps

MAGIC = b"NESSKET1"
VERSION = 1
NORM_IDENTITY_ONE = 1


class CheckpointError(RuntimeError):
    pass


def parameter_digest(text):
    """sha256 of a canonical model/bath parameter string."""
    return hashlib.sha256(text.encode()).digest()


def save_checkpoint(path, state, t, digest=b"\x00" * 32):
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    state.canonicalize(0)
    n = state.n
    dims = state.bond_dims
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, n, NORM_IDENTITY_ONE))
        fh.write(struct.pack("<d", float(t)))
        fh.write(digest)
        fh.write(np.asarray(dims, dtype="<u4").tobytes())
        for tsr in state.tensors:
            fh.write(np.ascontiguousarray(tsr, dtype="<f8").tobytes())
        for lam in state.lambdas:
            fh.write(np.ascontiguousarray(lam, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns (state, t, digest)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != MAGIC:
        raise CheckpointError("not a superket checkpoint (bad magic)")
    version, n, norm = struct.unpack_from("<III", raw, 8)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if norm != NORM_IDENTITY_ONE:
        raise CheckpointError(f"unknown normalization convention {norm}")
    (t,) = struct.unpack_from("<d", raw, 20)
    digest = raw[28:60]
    off = 60
    dims = np.frombuffer(raw, dtype="<u4", count=n - 1, offset=off)
    off += 4 * (n - 1)
    full = [1] + [int(d) for d in dims] + [1]
    tensors = []
    for i in range(n):
        dl, dr = full[i], full[i + 1]
        cnt = dl * 4 * dr
        tensors.append(np.frombuffer(raw, dtype="<f8", count=cnt, offset=off)
                       .reshape(dl, 4, dr).copy())
        off += 8 * cnt
    state = SuperketMps(tensors, center=0)
    for b in range(n - 1):
        cnt = full[b + 1]
        state.lambdas[b] = np.frombuffer(raw, dtype="<f8", count=cnt,
                                         offset=off).copy()
        off += 8 * cnt
    if off != len(raw):
        raise CheckpointError("trailing bytes in checkpoint")
    return state, t, digest
