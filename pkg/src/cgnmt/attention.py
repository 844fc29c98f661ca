"""Additive attention over encoder annotations.

Alignment energy for source position j at one decoding step is
``v . tanh(Wq t_prev + Wa h_j)`` with no bias terms; a softmax over
positions yields the alignment probabilities and the context vector is
their weighted sum of annotations.  The query is the pre-update decoder
state, so the context can feed the state update itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .numerics import Parameter, softmax


@dataclass
class AttentionParams:
    w_query: Parameter  # [d_a, n]
    w_ann: Parameter    # [d_a, n']
    v_energy: Parameter  # [d_a]

    def parameters(self) -> list[Parameter]:
        return [self.w_query, self.w_ann, self.v_energy]


def make_attention_params(n: int, nprime: int, d_a: int) -> AttentionParams:
    return AttentionParams(
        Parameter("att_query", np.zeros((d_a, n))),
        Parameter("att_ann", np.zeros((d_a, nprime))),
        Parameter("att_energy", np.zeros(d_a)),
    )


@dataclass
class AttentionStep:
    """Alignment probabilities over source positions and the resulting context."""

    alpha: np.ndarray    # [J], nonnegative, sums to 1
    context: np.ndarray  # [n']


class AttentionCache:
    __slots__ = ("alpha", "hidden", "t_prev")


def project_annotations(annotations: np.ndarray, params: AttentionParams) -> np.ndarray:
    """Per-sentence precomputation of ``Wa h_j`` for every position."""
    return annotations @ params.w_ann.value.T


def attend(
    t_prev: np.ndarray,
    annotations: np.ndarray,
    projected: np.ndarray,
    params: AttentionParams,
) -> tuple[np.ndarray, np.ndarray, AttentionCache]:
    """One attention step with a cache; ``projected`` comes from project_annotations."""
    if annotations.shape[0] < 1:
        raise InputError("attention requires at least one annotation")
    hidden = np.tanh(projected + params.w_query.value @ t_prev)
    energies = hidden @ params.v_energy.value
    alpha = softmax(energies)
    context = alpha @ annotations
    cache = AttentionCache()
    cache.alpha, cache.hidden, cache.t_prev = alpha, hidden, t_prev
    return alpha, context, cache


def align(t_prev: np.ndarray, annotations: np.ndarray, params: AttentionParams) -> AttentionStep:
    """Alignment probabilities and context for one decoding step."""
    alpha, context, _ = attend(
        t_prev, annotations, project_annotations(annotations, params), params
    )
    return AttentionStep(alpha, context)


def attention_backward(
    d_context: np.ndarray,
    cache: AttentionCache,
    annotations: np.ndarray,
    params: AttentionParams,
    d_annotations: np.ndarray,
) -> np.ndarray:
    """Accumulate parameter and annotation gradients; returns d t_prev."""
    alpha, hidden, t_prev = cache.alpha, cache.hidden, cache.t_prev

    d_alpha = annotations @ d_context
    d_annotations += np.outer(alpha, d_context)

    # Softmax backward on the energies.
    d_energy = alpha * (d_alpha - float(alpha @ d_alpha))

    d_hidden = np.outer(d_energy, params.v_energy.value)
    params.v_energy.grad += hidden.T @ d_energy
    d_pre = d_hidden * (1.0 - hidden * hidden)

    d_pre_sum = d_pre.sum(axis=0)
    params.w_query.grad += np.outer(d_pre_sum, t_prev)
    params.w_ann.grad += d_pre.T @ annotations
    d_annotations += d_pre @ params.w_ann.value
    return params.w_query.value.T @ d_pre_sum
