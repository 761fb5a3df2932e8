"""
Relation matrix interchange: SMS triplet files and Matrix Market.

SMS layout: a ``nrows ncols M`` header, one ``i j v`` line per entry with
1-based indices, terminated by ``0 0 0``.
"""

import io
import logging
from pathlib import Path
from typing import TextIO

from scipy.io import mmread, mmwrite
from scipy.sparse import coo_matrix

from vdims.services.linalg import SparseIntMatrix

logger = logging.getLogger(__name__)


class MatrixFormatError(Exception):
    """Malformed matrix file."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


def _write_sms(m: SparseIntMatrix, out: TextIO) -> None:
    out.write(f"{m.n_rows} {m.n_cols} M\n")
    for r, c, v in m.triplets():
        out.write(f"{r + 1} {c + 1} {v}\n")
    out.write("0 0 0\n")


def export_sms(m: SparseIntMatrix, destination: str | Path | TextIO) -> None:
    """Write m in SMS format to a path or an open text stream."""
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="ascii") as f:
            _write_sms(m, f)
        logger.info(f"Wrote {m!r} to {destination}")
    else:
        _write_sms(m, destination)


def sms_text(m: SparseIntMatrix) -> str:
    buffer = io.StringIO()
    _write_sms(m, buffer)
    return buffer.getvalue()


def _parse_ints(line: str, lineno: int, expected: int) -> list[int]:
    parts = line.split()
    if len(parts) != expected:
        raise MatrixFormatError(f"expected {expected} fields, got {len(parts)}", lineno)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise MatrixFormatError(f"non-integer field in {line.strip()!r}", lineno) from None


def _read_sms(source: TextIO) -> SparseIntMatrix:
    lines = enumerate(source, start=1)
    header = None
    for lineno, line in lines:
        if line.strip():
            header = (lineno, line)
            break
    if header is None:
        raise MatrixFormatError("empty file", 1)
    lineno, line = header
    parts = line.split()
    if len(parts) != 3 or parts[2] != "M":
        raise MatrixFormatError(f"header must be 'nrows ncols M', got {line.strip()!r}", lineno)
    try:
        n_rows, n_cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixFormatError(f"non-integer shape in {line.strip()!r}", lineno) from None
    if n_rows < 0 or n_cols < 0:
        raise MatrixFormatError("negative shape", lineno)

    triplets = []
    for lineno, line in lines:
        if not line.strip():
            continue
        i, j, v = _parse_ints(line, lineno, 3)
        if i == 0 and j == 0 and v == 0:
            return SparseIntMatrix.from_triplets(n_rows, n_cols, triplets)
        if not 1 <= i <= n_rows or not 1 <= j <= n_cols:
            raise MatrixFormatError(f"index ({i}, {j}) outside 1..{n_rows} x 1..{n_cols}", lineno)
        triplets.append((i - 1, j - 1, v))
    raise MatrixFormatError("missing '0 0 0' terminator")


def import_sms(source: str | Path | TextIO) -> SparseIntMatrix:
    """
    Read an SMS file.

    Raises:
        MatrixFormatError: On a malformed header or triplet, or a missing terminator
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="ascii") as f:
            return _read_sms(f)
    return _read_sms(source)


def export_mtx(m: SparseIntMatrix, destination: str | Path) -> None:
    """Write m as a Matrix Market coordinate integer general file."""
    mmwrite(str(destination), m.to_csr().tocoo(), field="integer", symmetry="general")
    logger.info(f"Wrote {m!r} to {destination}")


def import_mtx(source: str | Path) -> SparseIntMatrix:
    """
    Raises:
        MatrixFormatError: If scipy cannot parse the file
    """
    try:
        loaded = mmread(str(source))
    except (ValueError, OSError) as e:
        raise MatrixFormatError(f"unreadable Matrix Market file {source}: {e}") from e
    coo = coo_matrix(loaded)
    return SparseIntMatrix.from_triplets(
        coo.shape[0],
        coo.shape[1],
        zip(coo.row.tolist(), coo.col.tolist(), [int(v) for v in coo.data.tolist()]),
    )
