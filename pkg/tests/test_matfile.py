import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from svdstream.errors import ParseError
from svdstream.matfile import format_matrix, parse_matrix, read_matrix, read_vector, write_matrix


def test_header_is_exact():
    assert format_matrix(np.zeros((2, 3))).splitlines()[0] == "svdstream-matrix v1 2 3"


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_round_trip_is_exact(M):
    assert np.array_equal(parse_matrix(format_matrix(M)), M)


def test_file_round_trip(tmp_path, rng):
    M = rng.standard_normal((4, 2))
    write_matrix(tmp_path / "m.txt", M)
    assert np.array_equal(read_matrix(tmp_path / "m.txt"), M)


@pytest.mark.parametrize("text", [
    "", "svdstream-matrix v2 1 1\n0", "svdstream-matrix v1 2 2\n1 2 3",
    "svdstream-matrix v1 1 1\nabc", "svdstream-matrix v1 1 1\nnan", "svdstream-matrix v1 x 1\n1",
])
def test_malformed(text):
    with pytest.raises(ParseError):
        parse_matrix(text)


def test_vectors(tmp_path):
    write_matrix(tmp_path / "r.txt", np.arange(3.0)[None, :])
    write_matrix(tmp_path / "c.txt", np.arange(3.0)[:, None])
    write_matrix(tmp_path / "m.txt", np.ones((2, 2)))
    assert np.array_equal(read_vector(tmp_path / "r.txt"), [0, 1, 2])
    assert np.array_equal(read_vector(tmp_path / "c.txt"), [0, 1, 2])
    with pytest.raises(ParseError):
        read_vector(tmp_path / "m.txt")
