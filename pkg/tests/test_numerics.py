import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgnmt.errors import OracleError, ShapeError
from cgnmt.numerics import (
    Parameter,
    affine,
    grad_check,
    sigmoid_vec,
    softmax,
    tanh_vec,
    zero_grads,
)

finite_floats = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


class TestAffine:
    def test_identity(self):
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(affine(np.eye(3), x), x)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(
            affine(np.zeros((2, 3)), np.array([4.0, 5.0, 6.0])), np.zeros(2)
        )

    def test_hand_product(self):
        w = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(affine(w, np.array([1.0, 1.0])), [3.0, 7.0])

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2,\)"):
            affine(np.zeros((2, 3)), np.zeros(2))

    @given(
        st.lists(finite_floats, min_size=2, max_size=5),
        st.lists(finite_floats, min_size=2, max_size=5),
        finite_floats,
        finite_floats,
    )
    @settings(max_examples=40, deadline=None)
    def test_linearity(self, xs, ys, a, b):
        dim = min(len(xs), len(ys))
        x = np.array(xs[:dim])
        y = np.array(ys[:dim])
        w = np.arange(2.0 * dim).reshape(2, dim) - dim
        lhs = affine(w, a * x + b * y)
        rhs = a * affine(w, x) + b * affine(w, y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * max(1.0, abs(a) + abs(b)) * 50)


class TestSigmoid:
    def test_zero_is_half(self):
        np.testing.assert_array_equal(sigmoid_vec(np.zeros(2)), [0.5, 0.5])

    def test_log3(self):
        assert abs(sigmoid_vec(np.array([math.log(3.0)]))[0] - 0.75) < 1e-12

    @given(st.lists(finite_floats, min_size=1, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, xs):
        x = np.array(xs)
        total = sigmoid_vec(x) + sigmoid_vec(-x)
        np.testing.assert_allclose(total, np.ones_like(x), atol=1e-12)

    def test_saturates_without_nan(self):
        out = sigmoid_vec(np.array([-1000.0, 1000.0]))
        assert not np.any(np.isnan(out))
        assert out[0] == pytest.approx(0.0, abs=1e-300)
        assert out[1] == 1.0

    def test_strictly_inside_unit_interval_for_moderate_inputs(self):
        x = np.linspace(-30, 30, 101)
        out = sigmoid_vec(x)
        assert np.all(out > 0.0) and np.all(out < 1.0)


class TestTanh:
    def test_zero(self):
        assert tanh_vec(np.zeros(1))[0] == 0.0

    def test_odd_symmetry(self):
        x = np.array([-3.0, -0.5, 0.7, 2.0])
        np.testing.assert_allclose(tanh_vec(-x), -tanh_vec(x), atol=1e-15)

    def test_saturation(self):
        assert abs(tanh_vec(np.array([100.0]))[0] - 1.0) < 1e-12


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(softmax(np.zeros(3)), np.full(3, 1.0 / 3.0), atol=1e-15)

    def test_log2_ratio(self):
        for c in (0.0, -4.5, 17.0):
            out = softmax(np.array([c, c + math.log(2.0)]))
            np.testing.assert_allclose(out, [1.0 / 3.0, 2.0 / 3.0], atol=1e-12)

    def test_shift_invariance_large(self):
        np.testing.assert_allclose(softmax(np.array([1000.0, 1000.0])), [0.5, 0.5], atol=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ShapeError):
            softmax(np.zeros(0))

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_sums_to_one(self, xs):
        out = softmax(np.array(xs))
        assert np.all(out >= 0.0)
        assert abs(out.sum() - 1.0) <= 1e-12


class TestParameter:
    def test_grad_matches_shape(self):
        p = Parameter("w", np.ones((2, 3)))
        assert p.grad.shape == (2, 3)
        assert not p.grad.any()

    def test_shared_grad_buffer_shape_checked(self):
        with pytest.raises(ShapeError):
            Parameter("w", np.ones((2, 3)), grad=np.zeros((3, 2)))

    def test_zero_grads(self):
        p = Parameter("w", np.ones(4))
        p.grad += 2.0
        zero_grads([p])
        assert not p.grad.any()


class TestGradCheck:
    def test_quadratic_is_nearly_exact(self):
        p = Parameter("theta", np.array([3.0]))
        p.grad[0] = 6.0  # d(theta^2)/d theta at 3
        err = grad_check(lambda: float(p.value[0] ** 2), [p], eps=1e-5)
        assert err <= 1e-8

    def test_constant_function(self):
        p = Parameter("theta", np.array([1.5, -2.0]))
        err = grad_check(lambda: 7.0, [p], eps=1e-5)
        assert err == 0.0

    def test_wrong_gradient_is_caught(self):
        p = Parameter("theta", np.array([2.0]))
        p.grad[0] = 5.0  # truth is 4
        assert grad_check(lambda: float(p.value[0] ** 2), [p], eps=1e-5) > 0.1

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            grad_check(lambda: 0.0, [], eps=0.0)

    def test_nonfinite_evaluation(self):
        p = Parameter("theta", np.array([0.0]))
        with np.errstate(invalid="ignore"):
            with pytest.raises(OracleError, match="theta"):
                grad_check(lambda: float(np.log(p.value[0] - 1.0)), [p], eps=1e-5)
