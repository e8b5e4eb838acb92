import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from inertial_hpe.exceptions import UsageError
from inertial_hpe.space import as_vector, axpby, inner, norm


def test_inner_examples():
    assert inner([1, 0], [0, 1]) == 0
    assert inner([2, 3], [2, 3]) == 13
    a, b = [1, 2, 3], [4, 5, 6]
    assert inner(a, b) == sum(x * y for x, y in zip(a, b)) == 32


def test_inner_dimension_mismatch():
    with pytest.raises(UsageError):
        inner([1, 2], [1, 2, 3])


@pytest.mark.parametrize("a, expected", [([0, 0, 0], 0.0), ([3, 4], 5.0), ([1, 1, 1, 1], 2.0)])
def test_norm_examples(a, expected):
    assert norm(a) == expected


def test_axpby_examples():
    x, y = np.array([1.5, -2.0]), np.array([7.0, 8.0])
    np.testing.assert_array_equal(axpby(1, x, 0, y), x)
    np.testing.assert_array_equal(axpby(1, [1, 2], 1, [3, 4]), [4, 6])
    np.testing.assert_array_equal(axpby(2, [1, 0], -1, [0, 1]), [2, -1])
    with pytest.raises(UsageError):
        axpby(1, [1], 1, [1, 2])


def test_axpby_returns_fresh_array():
    x = np.array([1.0, 2.0])
    out = axpby(1, x, 0, x)
    out[0] = 99
    assert x[0] == 1.0


def test_as_vector_rejects_bad_input():
    with pytest.raises(UsageError):
        as_vector([np.nan, 1.0])
    with pytest.raises(UsageError):
        as_vector([])
    with pytest.raises(UsageError):
        as_vector([[1.0, 2.0]])


# squares of tiny entries underflow, so keep magnitudes away from zero
finite = st.one_of(st.just(0.0), st.floats(1e-100, 1e6), st.floats(-1e6, -1e-100))
pairs = st.integers(1, 20).flatmap(
    lambda n: st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite))
)


@settings(max_examples=200)
@given(pairs)
def test_cauchy_schwarz(ab):
    a, b = ab
    assert abs(inner(a, b)) <= norm(a) * norm(b) * (1 + 1e-12) + 1e-300


@settings(max_examples=200)
@given(pairs)
def test_parallelogram_law(ab):
    a, b = ab
    lhs = norm(a + b) ** 2 + norm(a - b) ** 2
    rhs = 2 * norm(a) ** 2 + 2 * norm(b) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)
