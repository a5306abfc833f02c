"""Writer for the FMX1 feature-file layout.

Little-endian throughout: 4 magic bytes ``FMX1``, one dtype byte (0 for
float32, 1 for float64), two unsigned 64-bit integers for row and column
counts, then the row-major payload.
"""

import struct

import numpy as np

_HEADER = struct.Struct("<4sBQQ")
_MAGIC = b"FMX1"
_DTYPE_CODES = {np.dtype("<f4"): 0, np.dtype("<f8"): 1}


def write_fmx(array, path) -> None:
    arr = np.ascontiguousarray(array)
    if arr.dtype not in _DTYPE_CODES:
        arr = arr.astype(np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("feature matrix must be 2-D and nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature matrix contains non-finite entries")
    code = _DTYPE_CODES[arr.dtype]
    header = _HEADER.pack(_MAGIC, code, arr.shape[0], arr.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes(order="C"))
