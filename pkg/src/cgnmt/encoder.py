"""Bidirectional GRU encoder producing one annotation per source word.

Each annotation is the concatenation of the forward state after reading
x_1..x_j and the backward state after reading x_J..x_j, so its dimension
is twice the cell width.  Initial states are zero vectors and no
sentence-boundary token is appended to the source.  The encoder cell is
always a GRU, independent of the decoder cell choice.

As in the decoder, the per-gate weight matrices of each direction are
row slices of one stacked array per family (input, recurrent) in
(reset, update, candidate) order, so each position costs one product
per family for the paired gates.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .numerics import Parameter, sigmoid_vec


class EncoderDirectionParams:
    """One direction's GRU weights; named blocks are views of the stacks."""

    __slots__ = ("n", "w_stack", "u_stack", "w_grad", "u_grad", "_params")

    def __init__(self, tag: str, m: int, n: int):
        self.n = n
        self.w_stack, self.w_grad = np.zeros((3 * n, m)), np.zeros((3 * n, m))
        self.u_stack, self.u_grad = np.zeros((3 * n, n)), np.zeros((3 * n, n))
        self._params = []
        for i, name in enumerate(("reset", "update", "cand")):
            rows = slice(i * n, (i + 1) * n)
            self._params.append(
                Parameter(f"enc_{tag}_{name}_w", self.w_stack[rows], self.w_grad[rows])
            )
            self._params.append(
                Parameter(f"enc_{tag}_{name}_u", self.u_stack[rows], self.u_grad[rows])
            )

    def parameters(self) -> list[Parameter]:
        return list(self._params)


class EncoderParams:
    __slots__ = ("embedding", "fwd", "bwd")

    def __init__(self, embedding: Parameter, fwd: EncoderDirectionParams, bwd: EncoderDirectionParams):
        self.embedding = embedding
        self.fwd = fwd
        self.bwd = bwd

    def parameters(self) -> list[Parameter]:
        return [self.embedding] + self.fwd.parameters() + self.bwd.parameters()

    @property
    def state_dim(self) -> int:
        return self.fwd.n


def make_encoder_params(vocab_size: int, m: int, n: int) -> EncoderParams:
    return EncoderParams(
        Parameter("src_embedding", np.zeros((vocab_size, m))),
        EncoderDirectionParams("fwd", m, n),
        EncoderDirectionParams("bwd", m, n),
    )


class EncoderCache:
    """Activations of both directions, in processing order."""

    __slots__ = ("ids", "emb_rows", "fwd", "bwd", "annotations")


class _DirectionCache:
    __slots__ = ("order", "states", "ru", "cand", "q")


def _run_direction(
    emb_rows: np.ndarray, order: list[int], direction: EncoderDirectionParams
) -> _DirectionCache:
    n = direction.n
    steps = len(order)
    cache = _DirectionCache()
    cache.order = order
    cache.states = np.zeros((steps + 1, n))
    cache.ru = np.empty((steps, 2 * n))
    cache.cand = np.empty((steps, n))
    cache.q = np.empty((steps, n))

    # Input projections for every position in one product.
    we = emb_rows @ direction.w_stack.T  # [J, 3n], position-indexed
    u_ru = direction.u_stack[: 2 * n]
    u_c = direction.u_stack[2 * n:]

    h = cache.states[0]
    for t, pos in enumerate(order):
        we_pos = we[pos]
        ru = sigmoid_vec(we_pos[: 2 * n] + u_ru @ h)
        q = ru[:n] * h
        c = np.tanh(we_pos[2 * n:] + u_c @ q)
        u = ru[n:]
        h = (1.0 - u) * h + u * c
        cache.ru[t], cache.cand[t], cache.q[t] = ru, c, q
        cache.states[t + 1] = h
    return cache


def encode_forward(source, params: EncoderParams) -> tuple[np.ndarray, EncoderCache]:
    """Annotations [J, 2n] plus the cache needed for backpropagation."""
    length = len(source)
    if length < 1:
        raise InputError("cannot encode an empty source sentence")
    vocab_size = params.embedding.value.shape[0]
    for tok in source:
        if not (0 <= tok < vocab_size):
            raise InputError(f"source token id {tok} outside embedding range [0, {vocab_size})")

    n = params.state_dim
    cache = EncoderCache()
    cache.ids = list(source)
    cache.emb_rows = params.embedding.value[cache.ids]
    cache.fwd = _run_direction(cache.emb_rows, list(range(length)), params.fwd)
    cache.bwd = _run_direction(cache.emb_rows, list(range(length - 1, -1, -1)), params.bwd)

    annotations = np.empty((length, 2 * n))
    annotations[:, :n] = cache.fwd.states[1:]
    annotations[:, n:] = cache.bwd.states[1:][::-1]
    cache.annotations = annotations
    return annotations, cache


def encode(source, params: EncoderParams) -> np.ndarray:
    """Annotation matrix [J, 2n] for a source id sequence."""
    annotations, _ = encode_forward(source, params)
    return annotations


def _direction_backward(
    d_states: np.ndarray,
    cache: _DirectionCache,
    direction: EncoderDirectionParams,
    emb_rows: np.ndarray,
    d_emb_rows: np.ndarray,
) -> None:
    """``d_states[t]`` is the gradient w.r.t. the state after processing step t."""
    steps = d_states.shape[0]
    n = direction.n
    u_ru = direction.u_stack[: 2 * n]
    u_c = direction.u_stack[2 * n:]
    dpre = np.empty((steps, 3 * n))

    carried = np.zeros(n)
    for t in range(steps - 1, -1, -1):
        dh = d_states[t] + carried
        h_prev = cache.states[t]
        ru = cache.ru[t]
        r, u = ru[:n], ru[n:]
        c = cache.cand[t]

        du = dh * (c - h_prev)
        dc = dh * u
        dh_prev = dh * (1.0 - u)

        dpc = dc * (1.0 - c * c)
        dq = u_c.T @ dpc
        dr = dq * h_prev
        dh_prev += dq * r

        dpre_ru = np.concatenate((dr * r * (1.0 - r), du * u * (1.0 - u)))
        dh_prev += u_ru.T @ dpre_ru

        dpre[t, : 2 * n] = dpre_ru
        dpre[t, 2 * n:] = dpc
        carried = dh_prev

    h_prevs = cache.states[:-1]
    direction.u_grad[: 2 * n] += dpre[:, : 2 * n].T @ h_prevs
    direction.u_grad[2 * n:] += dpre[:, 2 * n:].T @ cache.q

    # Scatter step-ordered preactivation grads back to position order.
    by_pos = np.zeros_like(dpre)
    by_pos[cache.order] = dpre
    direction.w_grad += by_pos.T @ emb_rows
    d_emb_rows += by_pos @ direction.w_stack


def encoder_backward(d_annotations: np.ndarray, cache: EncoderCache, params: EncoderParams) -> None:
    """Accumulate gradients for both directions and the source embedding."""
    n = params.state_dim
    d_emb_rows = np.zeros_like(cache.emb_rows)
    _direction_backward(d_annotations[:, :n], cache.fwd, params.fwd, cache.emb_rows, d_emb_rows)
    _direction_backward(
        np.ascontiguousarray(d_annotations[::-1, n:]), cache.bwd, params.bwd,
        cache.emb_rows, d_emb_rows,
    )
    np.add.at(params.embedding.grad, cache.ids, d_emb_rows)
