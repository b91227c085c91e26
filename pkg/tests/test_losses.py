import numpy as np
import pytest
from hypothesis import given, strategies as st

from expsel import (
    ExpectileIndex,
    check_loss,
    expectile_loss,
    expectile_score,
    expectile_weight,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
taus = st.floats(min_value=1e-6, max_value=1 - 1e-6)


def test_loss_values():
    assert expectile_loss(2, 0.5) == pytest.approx(2.0)
    assert expectile_loss(-1, 0.7) == pytest.approx(0.3)
    assert expectile_loss(0, 0.31) == 0.0


def test_score_values():
    assert expectile_score(3, 0.25) == pytest.approx(1.5)
    assert expectile_score(-3, 0.25) == pytest.approx(-4.5)
    assert expectile_score(0, 0.9) == 0.0


def test_weight_values():
    assert expectile_weight(5, 0.3) == pytest.approx(0.6)
    assert expectile_weight(-5, 0.3) == pytest.approx(1.4)
    assert expectile_weight(0, 0.5) == pytest.approx(1.0)
    # zero sits on the nonnegative branch
    assert expectile_weight(0, 0.3) == pytest.approx(0.6)


def test_check_loss_values():
    assert check_loss(2, 0.5) == pytest.approx(1.0)
    assert check_loss(-2, 0.5) == pytest.approx(1.0)
    assert check_loss(-1, 0.25) == pytest.approx(0.75)


def test_vectorized():
    x = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(expectile_loss(x, 0.7), [0.3, 0.0, 2.8])
    np.testing.assert_allclose(expectile_score(x, 0.7), [-0.6, 0.0, 2.8])
    np.testing.assert_allclose(expectile_weight(x, 0.7), [0.6, 1.4, 1.4])


def test_expectile_index_validation():
    assert float(ExpectileIndex(0.31)) == 0.31
    for bad in (0.0, 1.0, -0.2, 1.7, float("nan")):
        with pytest.raises(ValueError):
            ExpectileIndex(bad)
    with pytest.raises(ValueError):
        expectile_loss(1.0, 0.0)
    with pytest.raises(ValueError):
        check_loss(1.0, 1.0)


@given(x=finite, tau=taus)
def test_reflection_symmetry(x, tau):
    # the complemented weight 1 - (1 - tau) carries an absolute rounding
    # error of order 1 ulp, which scales with x**2 in the loss
    a = expectile_loss(x, tau)
    b = expectile_loss(-x, 1 - tau)
    assert a == pytest.approx(b, rel=1e-15, abs=1e-15 * x * x)


@given(x=finite.filter(lambda v: v == 0.0 or abs(v) > 1e-150), tau=taus)
def test_loss_nonnegative_zero_iff_zero(x, tau):
    # |x| > 1e-150 keeps the square from underflowing to exactly 0
    val = expectile_loss(x, tau)
    assert val >= 0.0
    assert (val == 0.0) == (x == 0.0)


def test_half_tau_is_half_square():
    for x in (-3.0, -1e-3, 0.0, 0.5, 7.0):
        assert expectile_loss(x, 0.5) == 0.5 * x * x


@given(
    x=st.floats(min_value=-1e3, max_value=1e3),
    y=st.floats(min_value=-1e3, max_value=1e3),
    lam=st.floats(min_value=0.0, max_value=1.0),
    tau=taus,
)
def test_convexity(x, y, lam, tau):
    mix = lam * x + (1 - lam) * y
    lhs = expectile_loss(mix, tau)
    rhs = lam * expectile_loss(x, tau) + (1 - lam) * expectile_loss(y, tau)
    assert lhs <= rhs + 1e-9 * (1.0 + abs(rhs))


def test_score_is_derivative():
    h = 1e-6
    for tau in (0.2, 0.5, 0.8):
        for x in (-2.0, -0.1, 0.1, 1.0, 3.0):
            fd = (expectile_loss(x + h, tau) - expectile_loss(x - h, tau)) / (2 * h)
            assert abs(fd - expectile_score(x, tau)) <= 10 * h
