import io
import random

import pytest

from vdims.services.linalg import SparseIntMatrix
from vdims.services.matrix_io import (
    MatrixFormatError,
    export_mtx,
    export_sms,
    import_mtx,
    import_sms,
    sms_text,
)


def test_identity_sms_text():
    m = SparseIntMatrix.from_triplets(2, 2, [(0, 0, 1), (1, 1, 1)])
    assert sms_text(m) == "2 2 M\n1 1 1\n2 2 1\n0 0 0\n"


def test_sms_roundtrip_on_random_matrices(tmp_path):
    rng = random.Random(3)
    path = tmp_path / "m.sms"
    for _ in range(100):
        n_rows, n_cols = rng.randint(0, 12), rng.randint(1, 12)
        cells = {
            (rng.randrange(n_rows), rng.randrange(n_cols)): rng.choice([-7, -2, -1, 1, 3, 1000003])
            for _ in range(rng.randint(0, 30) if n_rows else 0)
        }
        m = SparseIntMatrix.from_triplets(n_rows, n_cols, [(r, c, v) for (r, c), v in cells.items()])
        export_sms(m, path)
        assert import_sms(path) == m


def test_sms_roundtrip_through_stream():
    m = SparseIntMatrix.from_triplets(3, 1, [(2, 0, -4)])
    buffer = io.StringIO()
    export_sms(m, buffer)
    buffer.seek(0)
    assert import_sms(buffer) == m


def test_empty_matrix_sms():
    m = SparseIntMatrix.zeros(0, 3)
    assert sms_text(m) == "0 3 M\n0 0 0\n"
    assert import_sms(io.StringIO(sms_text(m))).shape == (0, 3)


def test_column_zero_is_rejected_with_line_number():
    with pytest.raises(MatrixFormatError) as excinfo:
        import_sms(io.StringIO("2 2 M\n1 0 5\n0 0 0\n"))
    assert excinfo.value.line == 2
    assert str(excinfo.value).startswith("line 2:")


def test_missing_terminator():
    with pytest.raises(MatrixFormatError):
        import_sms(io.StringIO("2 2 M\n1 1 1\n"))


@pytest.mark.parametrize("text", ["", "2 2\n0 0 0\n", "2 2 X\n0 0 0\n", "2 2 M\n1 1\n0 0 0\n", "2 2 M\n1 a 1\n"])
def test_malformed_sms(text):
    with pytest.raises(MatrixFormatError):
        import_sms(io.StringIO(text))


def test_mtx_roundtrip(tmp_path):
    m = SparseIntMatrix.from_triplets(3, 4, [(0, 0, 2), (1, 3, -1), (2, 1, 7)])
    path = tmp_path / "m.mtx"
    export_mtx(m, path)
    assert import_mtx(path) == m


def test_unreadable_mtx(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("not a matrix market file\n")
    with pytest.raises(MatrixFormatError):
        import_mtx(path)
