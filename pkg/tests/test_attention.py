import numpy as np
import pytest

from cgnmt.attention import (
    align,
    attend,
    attention_backward,
    make_attention_params,
    project_annotations,
)
from cgnmt.errors import InputError
from cgnmt.numerics import grad_check
from cgnmt.rng import Xorshift64Star

N, NPRIME, DA = 5, 8, 5


def _params(seed, scale=0.8):
    params = make_attention_params(N, NPRIME, DA)
    stream = Xorshift64Star(seed)
    for p in params.parameters():
        stream.fill_uniform(p.value, -scale, scale)
    return params


def _annotations(stream, count):
    return np.array(
        [[stream.uniform_range(-1, 1) for _ in range(NPRIME)] for _ in range(count)]
    )


def test_single_annotation_gets_full_weight(stream):
    ann = _annotations(stream, 1)
    step = align(np.zeros(N), ann, _params(1))
    np.testing.assert_array_equal(step.alpha, [1.0])
    np.testing.assert_array_equal(step.context, ann[0])


def test_identical_annotations_uniform(stream):
    row = _annotations(stream, 1)[0]
    ann = np.tile(row, (4, 1))
    step = align(np.zeros(N), ann, _params(2))
    np.testing.assert_allclose(step.alpha, np.full(4, 0.25), atol=1e-12)


def test_zero_parameters_uniform_mean(stream):
    ann = _annotations(stream, 3)
    step = align(np.ones(N), ann, make_attention_params(N, NPRIME, DA))
    np.testing.assert_allclose(step.alpha, np.full(3, 1.0 / 3.0), atol=1e-15)
    np.testing.assert_allclose(step.context, ann.mean(axis=0), atol=1e-15)


def test_alpha_is_distribution(stream):
    ann = _annotations(stream, 6)
    step = align(np.ones(N), ann, _params(3))
    assert np.all(step.alpha >= 0)
    assert abs(step.alpha.sum() - 1.0) <= 1e-12


def test_context_in_convex_hull(stream):
    ann = _annotations(stream, 6)
    step = align(np.ones(N), ann, _params(4))
    lo, hi = ann.min(axis=0), ann.max(axis=0)
    assert np.all(step.context >= lo - 1e-12)
    assert np.all(step.context <= hi + 1e-12)


def test_permutation_covariance(stream):
    ann = _annotations(stream, 5)
    params = _params(5)
    t_prev = np.ones(N)
    base = align(t_prev, ann, params)
    perm = [3, 0, 4, 2, 1]
    permuted = align(t_prev, ann[perm], params)
    np.testing.assert_allclose(permuted.alpha, base.alpha[perm], atol=1e-12)
    np.testing.assert_allclose(permuted.context, base.context, atol=1e-12)


def test_empty_annotations_rejected():
    with pytest.raises(InputError):
        align(np.zeros(N), np.zeros((0, NPRIME)), _params(1))


def test_gradients_match_finite_differences(stream):
    params = _params(6, scale=1.0)
    ann = _annotations(stream, 4)
    t_prev = np.array([stream.uniform_range(-1, 1) for _ in range(N)])
    probe = np.array([stream.uniform_range(0.5, 1.5) for _ in range(NPRIME)])

    def loss():
        return float(probe @ align(t_prev, ann, params).context)

    for p in params.parameters():
        p.zero_grad()
    _, _, cache = attend(t_prev, ann, project_annotations(ann, params), params)
    d_ann = np.zeros_like(ann)
    d_t = attention_backward(probe.copy(), cache, ann, params, d_ann)
    assert grad_check(loss, params.parameters(), eps=1e-5) <= 1e-4

    # input gradients against central differences
    for arr, grad in ((t_prev, d_t), (ann, d_ann)):
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + 1e-5
            up = loss()
            flat[i] = orig - 1e-5
            down = loss()
            flat[i] = orig
            numeric = (up - down) / 2e-5
            assert abs(numeric - gflat[i]) / max(abs(numeric), abs(gflat[i]), 1e-8) <= 1e-4
