"""Plain-text matrix files.

A file is one header line ``svdstream-matrix v1 <rows> <cols>`` followed by
``rows * cols`` whitespace-separated numbers in row-major order.  Values are
written with 17 significant digits so a write/read round trip is exact.
"""
import io

import numpy as np

from .errors import ParseError

MAGIC = "svdstream-matrix"
VERSION = "v1"


def format_matrix(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {M.shape}")
    rows, cols = M.shape
    buf = io.StringIO()
    buf.write(f"{MAGIC} {VERSION} {rows} {cols}\n")
    for row in M:
        buf.write(" ".join("%.17g" % v for v in row))
        buf.write("\n")
    return buf.getvalue()


def parse_matrix(text: str) -> np.ndarray:
    lines = text.split("\n", 1)
    head = lines[0].split()
    if len(head) != 4 or head[0] != MAGIC or head[1] != VERSION:
        raise ParseError(f"bad header {lines[0]!r}; expected '{MAGIC} {VERSION} <rows> <cols>'")
    try:
        rows, cols = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError(f"bad dimensions in header {lines[0]!r}") from None
    if rows < 0 or cols < 0:
        raise ParseError("negative dimensions in header")
    body = lines[1].split() if len(lines) > 1 else []
    if len(body) != rows * cols:
        raise ParseError(f"expected {rows * cols} values, found {len(body)}")
    try:
        data = np.array([float(tok) for tok in body], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"non-numeric value: {exc}") from None
    if not np.all(np.isfinite(data)):
        raise ParseError("matrix file holds non-finite values")
    return data.reshape(rows, cols)


def write_matrix(path, M) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(M))


def read_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix(fh.read())


def read_vector(path) -> np.ndarray:
    """A matrix file with a single row or a single column, flattened."""
    M = read_matrix(path)
    if min(M.shape) > 1:
        raise ParseError(f"{path}: expected a single row or column, got {M.shape}")
    return M.reshape(-1)
