import numpy as np
import pytest

from data.view_io import export_view, load_labels, load_view
from optimizer.exceptions import ParseError


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_whitespace_and_commas(tmp_path):
    path = write(tmp_path, "view.txt", "# header\n1 2 3\n\n4,5,6\n7\t8 ,9\n")
    np.testing.assert_array_equal(load_view(path), [[1, 2, 3], [4, 5, 6], [7, 8, 9]])


def test_scientific_notation(tmp_path):
    path = write(tmp_path, "view.txt", "1e-3 -2.5E2\n0 3\n")
    np.testing.assert_allclose(load_view(path), [[1e-3, -250.0], [0.0, 3.0]])


def test_ragged_row_reports_line(tmp_path):
    path = write(tmp_path, "view.txt", "1 2 3\n4 5\n")
    with pytest.raises(ParseError) as excinfo:
        load_view(path)
    assert excinfo.value.line_number == 2
    assert ":2:" in str(excinfo.value)


def test_non_numeric_token(tmp_path):
    path = write(tmp_path, "view.txt", "1 2\n3 abc\n")
    with pytest.raises(ParseError, match="abc"):
        load_view(path)


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        load_view(write(tmp_path, "view.txt", "# nothing here\n\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        load_view(tmp_path / "absent.txt")


def test_nan_rejected(tmp_path):
    with pytest.raises(ParseError):
        load_view(write(tmp_path, "view.txt", "1 nan\n2 3\n"))


def test_labels(tmp_path):
    np.testing.assert_array_equal(load_labels(write(tmp_path, "labels.txt", "0\n2\n1\n")), [0, 2, 1])
    with pytest.raises(ParseError):
        load_labels(write(tmp_path, "bad.txt", "0\n1.5\n"))


def test_export_is_exact(tmp_path, rng):
    matrix = rng.standard_normal((4, 3))
    np.testing.assert_array_equal(load_view(export_view(matrix, tmp_path / "out" / "m.txt")), matrix)
