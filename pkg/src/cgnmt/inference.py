"""Greedy and beam decoding with attention and gate tracing.

Decodes are capped at three times the source length, counting every
emitted token including EOS.  Ties are broken toward the lowest token id
(and the lowest-index parent hypothesis in beam search) so decoding is
fully deterministic.  Beam scoring uses raw total log probability with
no length normalization, which deliberately preserves the length
pathologies that the context-scaling probe studies.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .attention import attend, project_annotations
from .corpus import BOS_ID, EOS_ID, SequencePair
from .decoder_cells import cell_forward
from .encoder import encode_forward
from .errors import ConfigError, InputError
from .model import ForwardResult, ModelConfig, ModelParams, forward, initial_state, readout


@dataclass
class DecodeTrace:
    """Per-step attention rows, gate values, and emitted tokens for one decode."""

    source_length: int
    tokens: list[int] = field(default_factory=list)      # includes EOS when emitted
    alphas: list[np.ndarray] = field(default_factory=list)
    gates: list = field(default_factory=list)            # z per step; empty if no gate

    @property
    def alpha_matrix(self) -> np.ndarray:
        return np.stack(self.alphas)

    @property
    def z_mean_per_step(self) -> list[float]:
        return [float(np.mean(z)) for z in self.gates]

    @property
    def sentence_gate_weight(self) -> float | None:
        """Mean over steps of the per-step mean gate value."""
        means = self.z_mean_per_step
        if not means:
            return None
        return float(np.mean(means))

    @property
    def surface_tokens(self) -> list[int]:
        if self.tokens and self.tokens[-1] == EOS_ID:
            return self.tokens[:-1]
        return list(self.tokens)


@dataclass
class Hypothesis:
    tokens: list[int]
    log_prob: float
    live: bool


def _decode_setup(source, params: ModelParams, config: ModelConfig):
    annotations, _ = encode_forward(source, params.encoder)
    projected = project_annotations(annotations, params.attention)
    t0 = initial_state(annotations, params, config.hidden_dim)
    return annotations, projected, t0


def _decode_step(y_prev: int, t_prev, annotations, projected, params, config):
    e_prev = params.tgt_embedding.value[y_prev]
    alpha, s, _ = attend(t_prev, annotations, projected, params.attention)
    cache = cell_forward(
        e_prev, t_prev, s, config.cell, config.gate, config.scale, params.cell
    )
    probs = readout(e_prev, cache.t_new, s, params.readout)
    return alpha, cache.z, cache.t_new, probs


def _length_cap(source, max_len: int | None) -> int:
    return 3 * len(source) if max_len is None else max_len


def greedy_decode(
    source, params: ModelParams, config: ModelConfig, max_len: int | None = None
) -> tuple[list[int], DecodeTrace]:
    """Argmax decoding; returns surface tokens (EOS stripped) and the trace."""
    if len(source) < 1:
        raise InputError("cannot decode an empty source sentence")
    annotations, projected, t = _decode_setup(source, params, config)
    cap = _length_cap(source, max_len)
    trace = DecodeTrace(source_length=len(source))
    y_prev = BOS_ID
    for _ in range(cap):
        alpha, z, t, probs = _decode_step(y_prev, t, annotations, projected, params, config)
        token = int(np.argmax(probs))  # first maximum, i.e. lowest token id
        trace.tokens.append(token)
        trace.alphas.append(alpha)
        if z is not None:
            trace.gates.append(z)
        if token == EOS_ID:
            break
        y_prev = token
    return trace.surface_tokens, trace


class _BeamEntry:
    __slots__ = ("tokens", "log_prob", "state", "y_prev", "rows")

    def __init__(self, tokens, log_prob, state, y_prev, rows):
        self.tokens = tokens
        self.log_prob = log_prob
        self.state = state
        self.y_prev = y_prev
        self.rows = rows  # tuple of (alpha, z) per emitted token


def beam_decode(
    source,
    params: ModelParams,
    config: ModelConfig,
    width: int,
    max_len: int | None = None,
) -> tuple[Hypothesis, DecodeTrace]:
    """Width-best search by total log probability.

    Finished hypotheses (EOS emitted) are set aside; the highest-scoring
    finished one wins, falling back to the best live hypothesis at the
    length cap.
    """
    if width < 1:
        raise ConfigError(f"beam width must be at least 1, got {width}")
    if len(source) < 1:
        raise InputError("cannot decode an empty source sentence")
    annotations, projected, t0 = _decode_setup(source, params, config)
    cap = _length_cap(source, max_len)

    live = [_BeamEntry([], 0.0, t0, BOS_ID, ())]
    finished: list[_BeamEntry] = []
    steps = 0
    while live and steps < cap:
        steps += 1
        candidates = []
        expansions = []
        for idx, entry in enumerate(live):
            alpha, z, t_new, probs = _decode_step(
                entry.y_prev, entry.state, annotations, projected, params, config
            )
            expansions.append((t_new, (alpha, z)))
            log_probs = np.log(probs)
            for token in range(log_probs.shape[0]):
                candidates.append((-(entry.log_prob + float(log_probs[token])), idx, token))
        # Ties resolve toward the lowest parent index, then the lowest token id.
        best = heapq.nsmallest(width, candidates)
        next_live = []
        for neg_score, idx, token in best:
            parent = live[idx]
            t_new, row = expansions[idx]
            child = _BeamEntry(
                parent.tokens + [token], -neg_score, t_new, token, parent.rows + (row,)
            )
            if token == EOS_ID:
                finished.append(child)
            else:
                next_live.append(child)
        live = next_live

    pool = finished if finished else live
    winner = max(pool, key=lambda e: e.log_prob)
    trace = DecodeTrace(source_length=len(source))
    trace.tokens = list(winner.tokens)
    for alpha, z in winner.rows:
        trace.alphas.append(alpha)
        if z is not None:
            trace.gates.append(z)
    hyp = Hypothesis(
        tokens=list(winner.tokens),
        log_prob=winner.log_prob,
        live=not (winner.tokens and winner.tokens[-1] == EOS_ID),
    )
    return hyp, trace


def score_sequence(source, emitted, params: ModelParams, config: ModelConfig) -> float:
    """Total log probability of an emitted token sequence (teacher forcing it)."""
    if len(emitted) < 1:
        raise InputError("cannot score an empty emission")
    annotations, projected, t = _decode_setup(source, params, config)
    y_prev = BOS_ID
    total = 0.0
    for token in emitted:
        _, _, t, probs = _decode_step(y_prev, t, annotations, projected, params, config)
        total += float(np.log(probs[token]))
        y_prev = token
    return total


def forced_trace(pair: SequencePair, params: ModelParams, config: ModelConfig) -> DecodeTrace:
    """Teacher-forced trace of a reference pair, for alignment extraction."""
    result: ForwardResult = forward(pair, params, config)
    trace = DecodeTrace(source_length=len(pair.source))
    trace.tokens = list(pair.target)
    for sc in result.steps:
        trace.alphas.append(sc.attn.alpha)
        if sc.cell.z is not None:
            trace.gates.append(sc.cell.z)
    return trace


def extract_alignment(trace: DecodeTrace) -> set[tuple[int, int]]:
    """One (target_pos, source_pos) link per step, 1-based, argmax of each row.

    Ties resolve toward the lowest source position.
    """
    if not trace.alphas:
        raise InputError("cannot extract an alignment from an empty trace")
    links = set()
    for i, alpha in enumerate(trace.alphas, start=1):
        links.add((i, int(np.argmax(alpha)) + 1))
    return links
