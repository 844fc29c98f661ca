"""Per-sentence SGD with global-norm clipping and dev-BLEU early stopping.

Plain SGD (batch size 1) keeps training deterministic and dependency
free at desk scale.  Each epoch visits the training pairs in a freshly
shuffled order drawn from the seeded portable stream; sentences longer
than the configured maximum on either side are skipped.  Training stops
when the greedy-decoding BLEU on the dev set has not improved for
``patience`` epochs, and the best-dev parameters are restored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import SequencePair
from .errors import ConfigError, DivergenceError
from .evaluation import bleu
from .inference import greedy_decode
from .model import ModelConfig, ModelParams, backward, forward
from .rng import Xorshift64Star


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.3
    clip_norm: float = 1.0
    max_epochs: int = 20
    patience: int = 3
    max_train_len: int = 80
    shuffle_seed: int = 1

    def __post_init__(self):
        # learning_rate 0 is allowed so "no update" runs stay expressible.
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be nonnegative")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")
        if self.max_epochs < 1 or self.patience < 1 or self.max_train_len < 1:
            raise ConfigError("max_epochs, patience, and max_train_len must be at least 1")


@dataclass
class EpochStats:
    epoch: int
    train_loss_per_token: float
    dev_bleu: float
    clipped_fraction: float


@dataclass
class TrainLog:
    epochs: list[EpochStats]
    best_epoch: int
    best_dev_bleu: float
    stop_epoch: int

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss_per_token,dev_bleu,clipped_fraction\n")
            for e in self.epochs:
                fh.write(
                    f"{e.epoch},{e.train_loss_per_token!r},{e.dev_bleu!r},{e.clipped_fraction!r}\n"
                )


def clip_gradients(params: ModelParams, threshold: float) -> float:
    """Scale all gradients so their global L2 norm is at most ``threshold``.

    Returns the factor applied (1.0 when no clipping happened).
    """
    if threshold <= 0:
        raise ConfigError("clip threshold must be positive")
    total = 0.0
    all_params = params.parameters()
    for p in all_params:
        g = p.grad
        total += float(g.reshape(-1) @ g.reshape(-1))
    norm = math.sqrt(total)
    if norm <= threshold:
        return 1.0
    factor = threshold / norm
    for p in all_params:
        p.grad *= factor
    return factor


def sgd_update(params: ModelParams, learning_rate: float) -> None:
    for p in params.parameters():
        p.value -= learning_rate * p.grad


def dev_bleu_greedy(
    dev_pairs: Sequence[SequencePair], params: ModelParams, config: ModelConfig
) -> float:
    """Corpus BLEU of greedy decodes against the dev references."""
    hyps = []
    refs = []
    for pair in dev_pairs:
        tokens, _ = greedy_decode(pair.source, params, config)
        hyps.append(tokens)
        refs.append(list(pair.target[:-1]))
    return bleu(hyps, refs)


def train(
    train_pairs: Sequence[SequencePair],
    dev_pairs: Sequence[SequencePair],
    params: ModelParams,
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> TrainLog:
    """Run SGD epochs until dev BLEU stops improving; keeps the best-dev weights."""
    if not train_pairs or not dev_pairs:
        raise ConfigError("training and dev corpora must be nonempty")

    shuffle_stream = Xorshift64Star(train_config.shuffle_seed)
    order = list(range(len(train_pairs)))
    lr = train_config.learning_rate

    stats: list[EpochStats] = []
    best_snapshot = params.snapshot()
    best_bleu = -1.0
    best_epoch = 0
    stale = 0

    for epoch in range(1, train_config.max_epochs + 1):
        shuffle_stream.shuffle(order)
        loss_sum = 0.0
        token_count = 0
        clipped = 0
        updates = 0
        for idx in order:
            pair = train_pairs[idx]
            if (
                len(pair.source) > train_config.max_train_len
                or len(pair.target) > train_config.max_train_len
            ):
                continue
            params.zero_grads()
            result = forward(pair, params, model_config)
            if not math.isfinite(result.loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, sentence {idx}"
                )
            backward(pair, result, params, model_config)
            if clip_gradients(params, train_config.clip_norm) < 1.0:
                clipped += 1
            sgd_update(params, lr)
            updates += 1
            loss_sum += result.loss
            token_count += len(pair.target)

        score = dev_bleu_greedy(dev_pairs, params, model_config)
        stats.append(
            EpochStats(
                epoch=epoch,
                train_loss_per_token=loss_sum / token_count if token_count else 0.0,
                dev_bleu=score,
                clipped_fraction=clipped / updates if updates else 0.0,
            )
        )
        if score > best_bleu:
            best_bleu = score
            best_epoch = epoch
            best_snapshot = params.snapshot()
            stale = 0
        else:
            stale += 1
            if stale >= train_config.patience:
                break

    params.restore(best_snapshot)
    return TrainLog(
        epochs=stats,
        best_epoch=best_epoch,
        best_dev_bleu=best_bleu,
        stop_epoch=stats[-1].epoch if stats else 0,
    )
