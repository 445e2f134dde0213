import numpy as np
import pytest
from hypothesis import given, strategies as st

from urllctoolkit.tools import (chunks, db_to_linear, format_sig, linear_to_db, log_grid,
                                round_sig)


def test_round_sig():
    assert round_sig(1234.5, 2) == 1200
    assert round_sig(0.012345, 3) == pytest.approx(0.0123)
    assert round_sig(0) == 0
    assert round_sig(np.inf) == np.inf


def test_format_sig():
    assert format_sig(0.1) == '0.10000000000000001'
    assert format_sig(3) == '3'
    assert format_sig(True) == 'True'
    assert format_sig(1.5, sig=3) == '1.5'


def test_chunks():
    assert list(chunks([1, 2, 3, 4, 5], 2)) == [[1, 2], [3, 4], [5]]
    assert list(chunks([], 3)) == []


def test_db_conversions():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(-3.0) == pytest.approx(0.501187, rel=1e-5)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    assert linear_to_db(0.0) == -np.inf


@given(lo=st.floats(1e-6, 1.0), span=st.floats(1.5, 1e6), points=st.integers(2, 200))
def test_log_grid_endpoints_and_order(lo, span, points):
    grid = log_grid(lo, lo * span, points)
    assert len(grid) == points
    assert grid[0] == pytest.approx(lo)
    assert grid[-1] == pytest.approx(lo * span)
    assert np.all(np.diff(grid) > 0)
