"""Desk-scale attention NMT toolkit with context gates.

A framework-free encoder-decoder translation system: bidirectional GRU
encoder, additive attention, vanilla-tanh or GRU decoder cells, context
gates over source and/or target contributions, a gating-scalar baseline,
and a decode-time context-scaling probe.  Training, decoding, and the
usual translation metrics (BLEU, AER and its soft variant, sign test,
Pearson correlation) are included, all in 64-bit numpy with manual
backpropagation and full reproducibility from seeds.
"""

from .corpus import (
    BOS_ID,
    EOS_ID,
    UNK_ID,
    SequencePair,
    ToyTaskSpec,
    Vocabulary,
    build_vocabulary,
    numberize,
    synthesize_corpus,
    synthesize_splits,
)
from .decoder_cells import (
    GateConfig,
    ScaleConfig,
    cell_step,
    compute_gate,
    count_parameters,
    gate_block_size,
)
from .errors import CgnmtError
from .evaluation import aer, bleu, bucket_report, pearson, saer, sentence_bleu, sign_test
from .inference import beam_decode, extract_alignment, greedy_decode, score_sequence
from .model import (
    ModelConfig,
    ModelParams,
    backward,
    forward,
    init_model,
    load_model,
    save_model,
)
from .numerics import Parameter, grad_check
from .training import TrainConfig, clip_gradients, train

__version__ = "0.1.0"

__all__ = [
    "BOS_ID",
    "EOS_ID",
    "UNK_ID",
    "CgnmtError",
    "GateConfig",
    "ModelConfig",
    "ModelParams",
    "Parameter",
    "ScaleConfig",
    "SequencePair",
    "ToyTaskSpec",
    "TrainConfig",
    "Vocabulary",
    "aer",
    "backward",
    "beam_decode",
    "bleu",
    "bucket_report",
    "build_vocabulary",
    "cell_step",
    "clip_gradients",
    "compute_gate",
    "count_parameters",
    "extract_alignment",
    "forward",
    "gate_block_size",
    "grad_check",
    "greedy_decode",
    "init_model",
    "load_model",
    "numberize",
    "pearson",
    "saer",
    "save_model",
    "score_sequence",
    "sentence_bleu",
    "sign_test",
    "synthesize_corpus",
    "synthesize_splits",
    "train",
]
