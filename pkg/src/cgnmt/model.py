"""Full encoder-attention-decoder assembly.

The forward pass is teacher forced: step i conditions on the gold
previous token (BOS at the first step) and scores the gold token, so the
sentence loss is the negative log probability of the reference.  The
readout is a single linear transform of (previous embedding, new state,
context) followed by a softmax.  The initial decoder state is a tanh
projection of the backward encoder state at the first source position.

Model files start with the magic bytes ``CGNM`` and a format version,
followed by a length-prefixed UTF-8 JSON manifest (config fields, matrix
names, shapes, byte offsets, optional vocabulary token lists) and the
raw little-endian float64 payload, row-major, in manifest order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .attention import (
    AttentionParams,
    attend,
    attention_backward,
    make_attention_params,
    project_annotations,
)
from .corpus import BOS_ID, EOS_ID, SequencePair
from .decoder_cells import (
    CELL_KINDS,
    CellParams,
    GateConfig,
    ScaleConfig,
    cell_backward,
    cell_forward,
    make_cell_params,
)
from .encoder import EncoderParams, encode_forward, encoder_backward, make_encoder_params
from .errors import ConfigError, ContractError, InputError, ModelFormatError
from .numerics import Parameter, softmax
from .rng import Xorshift64Star

MODEL_MAGIC = b"CGNM"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    embedding_dim: int
    hidden_dim: int
    src_vocab_size: int
    tgt_vocab_size: int
    attention_dim: int = 0  # 0 means "use hidden_dim"
    cell: str = "gru"
    gate: GateConfig = field(default_factory=GateConfig.none)
    scale: ScaleConfig = field(default_factory=ScaleConfig)
    seed: int = 1

    def __post_init__(self):
        if min(self.embedding_dim, self.hidden_dim) < 1:
            raise ConfigError("model dimensions must be positive")
        if self.attention_dim < 0:
            raise ConfigError("attention_dim must be nonnegative")
        if self.src_vocab_size < 1 or self.tgt_vocab_size < 2:
            raise ConfigError("vocabulary sizes too small for decoding")
        if self.cell not in CELL_KINDS:
            raise ConfigError(f"unknown cell kind {self.cell!r}")

    @property
    def context_dim(self) -> int:
        """Annotation width: always twice the hidden size (bidirectional encoder)."""
        return 2 * self.hidden_dim

    @property
    def attn_dim(self) -> int:
        return self.attention_dim if self.attention_dim > 0 else self.hidden_dim

    def with_scale(self, a: float, b: float) -> "ModelConfig":
        return replace(self, scale=ScaleConfig(a, b))

    def to_dict(self) -> dict:
        return {
            "embedding_dim": self.embedding_dim,
            "hidden_dim": self.hidden_dim,
            "attention_dim": self.attention_dim,
            "src_vocab_size": self.src_vocab_size,
            "tgt_vocab_size": self.tgt_vocab_size,
            "cell": self.cell,
            "gate_variant": self.gate.variant,
            "gate_inputs": self.gate.inputs_sorted(),
            "gate_granularity": self.gate.granularity,
            "scale_a": self.scale.a,
            "scale_b": self.scale.b,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        try:
            gate = GateConfig(d["gate_variant"], frozenset(d["gate_inputs"]), d["gate_granularity"])
            return cls(
                embedding_dim=d["embedding_dim"],
                hidden_dim=d["hidden_dim"],
                attention_dim=d["attention_dim"],
                src_vocab_size=d["src_vocab_size"],
                tgt_vocab_size=d["tgt_vocab_size"],
                cell=d["cell"],
                gate=gate,
                scale=ScaleConfig(d["scale_a"], d["scale_b"]),
                seed=d["seed"],
            )
        except KeyError as exc:
            raise ModelFormatError(f"config field {exc.args[0]!r} missing from manifest") from exc


@dataclass
class ReadoutParams:
    w_state: Parameter  # [V_tgt, n]
    w_prev: Parameter   # [V_tgt, m]
    w_ctx: Parameter    # [V_tgt, n']

    def parameters(self) -> list[Parameter]:
        return [self.w_state, self.w_prev, self.w_ctx]


@dataclass
class ModelParams:
    encoder: EncoderParams
    attention: AttentionParams
    cell: CellParams
    tgt_embedding: Parameter  # [V_tgt, m]
    readout: ReadoutParams
    init_proj: Parameter      # [n, n]

    def parameters(self) -> list[Parameter]:
        return (
            self.encoder.parameters()
            + self.attention.parameters()
            + self.cell.parameters()
            + [self.tgt_embedding]
            + self.readout.parameters()
            + [self.init_proj]
        )

    def zero_grads(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def snapshot(self) -> list[np.ndarray]:
        return [p.value.copy() for p in self.parameters()]

    def restore(self, values: list[np.ndarray]) -> None:
        params = self.parameters()
        if len(values) != len(params):
            raise ContractError("snapshot does not match parameter layout")
        for p, v in zip(params, values):
            np.copyto(p.value, v)


def make_model_params(config: ModelConfig) -> ModelParams:
    """Zero-initialized parameters laid out in the canonical order."""
    m, n, nprime = config.embedding_dim, config.hidden_dim, config.context_dim
    v_tgt = config.tgt_vocab_size
    return ModelParams(
        encoder=make_encoder_params(config.src_vocab_size, m, n),
        attention=make_attention_params(n, nprime, config.attn_dim),
        cell=make_cell_params(m, n, nprime, config.cell, config.gate),
        tgt_embedding=Parameter("tgt_embedding", np.zeros((v_tgt, m))),
        readout=ReadoutParams(
            Parameter("out_state", np.zeros((v_tgt, n))),
            Parameter("out_prev", np.zeros((v_tgt, m))),
            Parameter("out_ctx", np.zeros((v_tgt, nprime))),
        ),
        init_proj=Parameter("init_proj", np.zeros((n, n))),
    )


def init_model(config: ModelConfig) -> ModelParams:
    """All weights uniform in [-0.08, 0.08] from the seeded portable stream."""
    params = make_model_params(config)
    stream = Xorshift64Star(config.seed)
    for p in params.parameters():
        stream.fill_uniform(p.value, -0.08, 0.08)
    return params


def readout(
    y_prev_emb: np.ndarray, t: np.ndarray, s: np.ndarray, ro: ReadoutParams
) -> np.ndarray:
    """Distribution over the target vocabulary for one step."""
    logits = ro.w_state.value @ t + ro.w_prev.value @ y_prev_emb + ro.w_ctx.value @ s
    return softmax(logits)


def initial_state(annotations: np.ndarray, params: ModelParams, n: int) -> np.ndarray:
    """tanh projection of the backward encoder state at the first position."""
    return np.tanh(params.init_proj.value @ annotations[0, n:])


class StepCache:
    """Per-step activations for backpropagation."""

    __slots__ = ("y_prev", "y", "attn", "s", "cell", "probs")


@dataclass
class ForwardResult:
    loss: float
    per_token_loss: float
    steps: list
    encoder_cache: object
    annotations: np.ndarray
    projected: np.ndarray
    prev_ids: list[int]

    @property
    def gold_probs(self) -> list[float]:
        return [float(sc.probs[sc.y]) for sc in self.steps]

    @property
    def alphas(self) -> np.ndarray:
        return np.stack([sc.attn.alpha for sc in self.steps])


def forward(pair: SequencePair, params: ModelParams, config: ModelConfig) -> ForwardResult:
    """Teacher-forced loss ``-sum_i log P(y_i | y_<i, x)`` plus all caches."""
    source, target = pair.source, pair.target
    if len(source) < 1 or len(target) < 1:
        raise InputError("cannot score an empty sentence pair")
    if target[-1] != EOS_ID:
        raise InputError("target sequence must end with EOS")
    for tok in target:
        if not (0 <= tok < config.tgt_vocab_size):
            raise InputError(
                f"target token id {tok} outside vocabulary [0, {config.tgt_vocab_size})"
            )

    n = config.hidden_dim
    annotations, enc_cache = encode_forward(source, params.encoder)
    projected = project_annotations(annotations, params.attention)
    t = initial_state(annotations, params, n)

    prev_ids = [BOS_ID] + list(target[:-1])
    emb_prev = params.tgt_embedding.value[prev_ids]  # [I, m]

    # Whole-sentence input projections: one product per weight family.
    we_all = emb_prev @ params.cell.w_stack.T  # [I, k*n]
    gate_cfg = config.gate
    gate_we = None
    if gate_cfg.active and gate_cfg.granularity == "elementwise" and "y_prev" in gate_cfg.inputs:
        gate_we = emb_prev @ params.cell.gate.w_prev.value.T
    prev_logits = emb_prev @ params.readout.w_prev.value.T  # [I, V_tgt]

    w_state = params.readout.w_state.value
    w_ctx = params.readout.w_ctx.value

    loss = 0.0
    steps: list[StepCache] = []
    for i, gold in enumerate(target):
        alpha, s, attn_cache = attend(t, annotations, projected, params.attention)
        cell_cache = cell_forward(
            emb_prev[i], t, s, config.cell, gate_cfg, config.scale, params.cell,
            we_pre=we_all[i],
            gate_we_pre=None if gate_we is None else gate_we[i],
        )
        t = cell_cache.t_new
        probs = softmax(w_state @ t + prev_logits[i] + w_ctx @ s)
        loss -= float(np.log(probs[gold]))

        sc = StepCache()
        sc.y_prev, sc.y, sc.attn, sc.s, sc.cell, sc.probs = prev_ids[i], gold, attn_cache, s, cell_cache, probs
        steps.append(sc)

    return ForwardResult(
        loss=loss,
        per_token_loss=loss / len(target),
        steps=steps,
        encoder_cache=enc_cache,
        annotations=annotations,
        projected=projected,
        prev_ids=prev_ids,
    )


def backward(
    pair: SequencePair,
    result: ForwardResult,
    params: ModelParams,
    config: ModelConfig,
) -> None:
    """Accumulate exact analytic gradients of the forward loss into the params."""
    target = pair.target
    steps = result.steps
    if len(steps) != len(target) or any(sc.y != y for sc, y in zip(steps, target)):
        raise ContractError("forward caches do not match the sentence pair")
    n = config.hidden_dim
    if steps[0].cell.t_prev.shape[0] != n:
        raise ContractError("forward caches do not match the model dimensions")

    count = len(steps)
    annotations = result.annotations
    prev_ids = result.prev_ids
    emb_prev = params.tgt_embedding.value[prev_ids]

    # Readout backward for all steps at once: d logits = probs - onehot(gold).
    d_logits = np.stack([sc.probs for sc in steps])
    d_logits[np.arange(count), list(target)] -= 1.0
    new_states = np.stack([sc.cell.t_new for sc in steps])
    contexts = np.stack([sc.s for sc in steps])
    ro = params.readout
    ro.w_state.grad += d_logits.T @ new_states
    ro.w_prev.grad += d_logits.T @ emb_prev
    ro.w_ctx.grad += d_logits.T @ contexts
    d_t_readout = d_logits @ ro.w_state.value   # [I, n]
    d_s_readout = d_logits @ ro.w_ctx.value     # [I, n']
    d_emb_rows = d_logits @ ro.w_prev.value     # [I, m]

    d_annotations = np.zeros_like(annotations)
    d_t_carry = np.zeros(n)
    for i in range(count - 1, -1, -1):
        sc = steps[i]
        d_t = d_t_readout[i] + d_t_carry
        d_e, d_t_prev, d_s = cell_backward(
            d_t, sc.cell, config.cell, config.gate, config.scale, params.cell
        )
        d_s += d_s_readout[i]
        d_emb_rows[i] += d_e
        d_t_prev += attention_backward(
            d_s, sc.attn, annotations, params.attention, d_annotations
        )
        d_t_carry = d_t_prev

    # Initial state: t_0 = tanh(W_init @ backward state at position 1).
    t0 = steps[0].cell.t_prev
    back_state = annotations[0, n:]
    d_pre0 = d_t_carry * (1.0 - t0 * t0)
    params.init_proj.grad += np.outer(d_pre0, back_state)
    d_annotations[0, n:] += params.init_proj.value.T @ d_pre0

    np.add.at(params.tgt_embedding.grad, prev_ids, d_emb_rows)
    encoder_backward(d_annotations, result.encoder_cache, params.encoder)


def save_model(
    params: ModelParams,
    config: ModelConfig,
    path,
    source_vocab: list[str] | None = None,
    target_vocab: list[str] | None = None,
) -> None:
    """Write the binary model file; see the module docstring for the layout."""
    entries = []
    offset = 0
    blobs = []
    for p in params.parameters():
        blob = np.ascontiguousarray(p.value, dtype="<f8").tobytes()
        entries.append({"name": p.name, "shape": list(p.value.shape), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    manifest = {
        "config": config.to_dict(),
        "matrices": entries,
        "source_vocab": source_vocab,
        "target_vocab": target_vocab,
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(manifest_bytes)))
        fh.write(manifest_bytes)
        for blob in blobs:
            fh.write(blob)


def load_model(path):
    """Read a model file; returns (params, config, source_vocab, target_vocab)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: bad magic bytes, not a model file")
    version = struct.unpack_from("<I", data, 4)[0]
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    manifest_len = struct.unpack_from("<Q", data, 8)[0]
    header_end = 16 + manifest_len
    if len(data) < header_end:
        raise ModelFormatError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(data[16:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: unreadable manifest: {exc}") from exc
    if "config" not in manifest or "matrices" not in manifest:
        raise ModelFormatError(f"{path}: manifest missing config or matrices")

    config = ModelConfig.from_dict(manifest["config"])
    params = make_model_params(config)
    by_name = {p.name: p for p in params.parameters()}
    seen = set()
    payload = data[header_end:]
    for entry in manifest["matrices"]:
        name = entry.get("name")
        if name not in by_name:
            raise ModelFormatError(f"{path}: unknown matrix {name!r} in manifest")
        p = by_name[name]
        shape = tuple(entry["shape"])
        if shape != p.value.shape:
            raise ModelFormatError(
                f"{path}: matrix {name!r} has shape {shape}, config implies {p.value.shape}"
            )
        nbytes = p.value.size * 8
        start = entry["offset"]
        if start < 0 or start + nbytes > len(payload):
            raise ModelFormatError(f"{path}: matrix {name!r} payload is truncated")
        flat = np.frombuffer(payload[start:start + nbytes], dtype="<f8")
        np.copyto(p.value, flat.reshape(p.value.shape))
        seen.add(name)
    missing = set(by_name) - seen
    if missing:
        raise ModelFormatError(f"{path}: manifest missing matrices {sorted(missing)}")
    return params, config, manifest.get("source_vocab"), manifest.get("target_vocab")
