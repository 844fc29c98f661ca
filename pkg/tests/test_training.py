import math

import numpy as np
import pytest

from cgnmt.corpus import EOS_ID, SequencePair, ToyTaskSpec, synthesize_splits
from cgnmt.errors import ConfigError, DivergenceError
from cgnmt.model import ModelConfig, forward, init_model
from cgnmt.training import TrainConfig, clip_gradients, sgd_update, train
from conftest import random_model

VOCAB = 9


def _config(seed=5, cell="vanilla", m=4, n=6):
    return ModelConfig(m, n, VOCAB, VOCAB, cell=cell, seed=seed)


def _tiny_task(seed=21, kind="copy"):
    spec = ToyTaskSpec(kind, vocab_size=VOCAB - 3, min_len=2, max_len=4, seed=seed)
    return synthesize_splits(spec, 40, 10, 10)


class TestClip:
    def test_zero_norm_untouched(self):
        params = init_model(_config())
        params.zero_grads()
        assert clip_gradients(params, 5.0) == 1.0

    def test_hand_case(self):
        params = init_model(_config())
        params.zero_grads()
        params.init_proj.grad[0, 0] = 10.0
        factor = clip_gradients(params, 5.0)
        assert factor == 0.5
        assert params.init_proj.grad[0, 0] == 5.0

    def test_below_threshold_bit_identical(self):
        params = init_model(_config())
        params.zero_grads()
        params.init_proj.grad[0, 0] = 1.0
        before = [p.grad.copy() for p in params.parameters()]
        assert clip_gradients(params, 5.0) == 1.0
        for g, p in zip(before, params.parameters()):
            np.testing.assert_array_equal(g, p.grad)

    def test_global_norm_after_clip(self):
        params = random_model(_config(), seed=3)
        for p in params.parameters():
            p.grad[...] = p.value
        clip_gradients(params, 2.0)
        total = sum(float((p.grad ** 2).sum()) for p in params.parameters())
        assert math.sqrt(total) == pytest.approx(2.0, rel=1e-12)

    def test_bad_threshold(self):
        with pytest.raises(ConfigError):
            clip_gradients(init_model(_config()), 0.0)


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            TrainConfig(learning_rate=-0.1)
        with pytest.raises(ConfigError):
            TrainConfig(clip_norm=0.0)
        with pytest.raises(ConfigError):
            TrainConfig(patience=0)
        TrainConfig(learning_rate=0.0)  # zero rate stays expressible


class TestTrain:
    def test_zero_learning_rate_leaves_parameters_unchanged(self):
        train_pairs, dev_pairs, _ = _tiny_task()
        cfg = _config()
        params = init_model(cfg)
        before = params.snapshot()
        train(
            train_pairs, dev_pairs, params, cfg,
            TrainConfig(learning_rate=0.0, max_epochs=1, shuffle_seed=3),
        )
        for old, p in zip(before, params.parameters()):
            np.testing.assert_array_equal(old, p.value)

    def test_loss_decreases_on_copy_task(self):
        # the desk-scale check: vanilla cell, m=n=32, 2k sentences, 3 epochs
        spec = ToyTaskSpec("copy", vocab_size=17, min_len=3, max_len=8, seed=5)
        train_pairs, dev_pairs, _ = synthesize_splits(spec, 2000, 40, 40)
        cfg = ModelConfig(
            32, 32, spec.source_vocab_total, spec.target_vocab_total,
            cell="vanilla", seed=11,
        )
        params = init_model(cfg)
        log = train(
            train_pairs, dev_pairs, params, cfg,
            TrainConfig(learning_rate=0.2, clip_norm=2.0, max_epochs=3, patience=3, shuffle_seed=3),
        )
        losses = [e.train_loss_per_token for e in log.epochs]
        assert len(losses) == 3
        assert losses[0] > losses[1] > losses[2]

    def test_deterministic_log(self):
        train_pairs, dev_pairs, _ = _tiny_task()
        cfg = _config()
        logs = []
        for _ in range(2):
            params = init_model(cfg)
            logs.append(
                train(
                    train_pairs, dev_pairs, params, cfg,
                    TrainConfig(learning_rate=0.1, max_epochs=2, shuffle_seed=7),
                )
            )
        assert logs[0].epochs == logs[1].epochs
        assert logs[0].best_epoch == logs[1].best_epoch

    def test_long_sentences_skipped(self):
        train_pairs, dev_pairs, _ = _tiny_task()
        cfg = _config()
        params = init_model(cfg)
        before = params.snapshot()
        log = train(
            train_pairs, dev_pairs, params, cfg,
            TrainConfig(learning_rate=0.5, max_epochs=1, max_train_len=1, shuffle_seed=3),
        )
        for old, p in zip(before, params.parameters()):
            np.testing.assert_array_equal(old, p.value)
        assert log.epochs[0].train_loss_per_token == 0.0
        assert log.epochs[0].clipped_fraction == 0.0

    def test_patience_stops_training(self):
        train_pairs, dev_pairs, _ = _tiny_task()
        cfg = _config()
        params = init_model(cfg)
        log = train(
            train_pairs, dev_pairs, params, cfg,
            TrainConfig(learning_rate=0.0, max_epochs=10, patience=2, shuffle_seed=3),
        )
        # dev BLEU is constant, so epoch 1 is best and patience runs out after 2 more
        assert log.stop_epoch == 3
        assert log.best_epoch == 1

    def test_best_parameters_restored(self):
        train_pairs, dev_pairs, _ = _tiny_task(kind="reverse")
        cfg = _config()
        params = init_model(cfg)
        log = train(
            train_pairs, dev_pairs, params, cfg,
            TrainConfig(learning_rate=0.15, clip_norm=2.0, max_epochs=3, patience=3, shuffle_seed=5),
        )
        from cgnmt.training import dev_bleu_greedy

        assert dev_bleu_greedy(dev_pairs, params, cfg) == pytest.approx(log.best_dev_bleu)

    def test_divergence_reported_with_location(self):
        train_pairs, dev_pairs, _ = _tiny_task()
        cfg = _config()
        params = random_model(cfg, seed=3, scale=40.0)  # saturated start
        with np.errstate(all="ignore"):
            with pytest.raises(DivergenceError, match=r"epoch 1, sentence \d+"):
                train(
                    train_pairs, dev_pairs, params, cfg,
                    TrainConfig(learning_rate=1e9, clip_norm=1e9, max_epochs=2, shuffle_seed=3),
                )

    def test_empty_corpora_rejected(self):
        cfg = _config()
        with pytest.raises(ConfigError):
            train([], [], init_model(cfg), cfg, TrainConfig())

    def test_csv_log_format(self, tmp_path):
        train_pairs, dev_pairs, _ = _tiny_task()
        cfg = _config()
        params = init_model(cfg)
        log = train(
            train_pairs, dev_pairs, params, cfg,
            TrainConfig(learning_rate=0.1, max_epochs=2, shuffle_seed=3),
        )
        path = tmp_path / "log.csv"
        log.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss_per_token,dev_bleu,clipped_fraction"
        assert len(lines) == 1 + len(log.epochs)
        first = lines[1].split(",")
        assert int(first[0]) == 1
        assert float(first[1]) == log.epochs[0].train_loss_per_token


class TestSingleStepDescent:
    def test_small_step_reduces_loss_on_most_seeds(self):
        failures = 0
        for seed in range(100):
            cfg = ModelConfig(3, 4, 8, 8, cell="vanilla", seed=seed)
            params = random_model(cfg, seed=seed + 1000, scale=0.5)
            pair = SequencePair((3, 4, 5), (5, 4, EOS_ID))
            params.zero_grads()
            result = forward(pair, params, cfg)
            from cgnmt.model import backward

            backward(pair, result, params, cfg)
            sgd_update(params, 1e-4)
            if forward(pair, params, cfg).loss >= result.loss:
                failures += 1
        assert failures < 5
