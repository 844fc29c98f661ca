"""Command-line entry point.

Subcommands map to the toolkit's experiments: ``train``, ``translate``,
``evaluate``, ``align``, ``scale-experiment``, and ``ablate``.  Runs are
driven by a flat ``key = value`` text config (``#`` starts a comment);
unknown keys are rejected and relative paths resolve against the config
file's directory.  Every subcommand is deterministic: identical configs
and seeds produce byte-identical outputs.  The environment variable
``CGNMT_THREADS`` caps sentence-level parallelism for decoding (default
1); outputs are always written in input order.

Exit codes: 0 success, 1 usage/config error, 2 data or format error.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Sequence

from . import corpus as corpus_mod
from .corpus import (
    SequencePair,
    ToyTaskSpec,
    Vocabulary,
    build_vocabulary,
    numberize,
    read_corpus,
    read_parallel,
    synthesize_corpus,
    synthesize_splits,
    task_vocabularies,
    write_corpus,
)
from .decoder_cells import (
    GATE_BOTH,
    GATE_NONE,
    GATE_SCALAR,
    GATE_SOURCE,
    GATE_TARGET,
    GRU,
    VANILLA,
    GateConfig,
    ScaleConfig,
)
from .errors import (
    CgnmtError,
    ConfigError,
    CorrelationError,
    DivergenceError,
    InputError,
    ModelFormatError,
)
from .evaluation import (
    aer,
    bleu,
    bucket_report,
    format_links,
    read_alignment_file,
    saer,
    sentence_bleu,
    sign_test,
    pearson,
)
from .inference import beam_decode, extract_alignment, forced_trace, greedy_decode
from .model import ModelConfig, init_model, load_model, save_model
from .training import TrainConfig, train

USAGE = """usage: cgnmt <subcommand> --config <path> [options]

subcommands:
  train             synthesize the configured corpus and train a model
  translate         decode a source token file with a trained model
  evaluate          score hypothesis files against references
  align             extract hard alignments and score them against a reference
  scale-experiment  sweep (a, b) context-scaling ratios on a trained model
  ablate            train the cell/gate comparison grid and emit a CSV

options:
  --config <path>   run configuration file (required)
  --model <path>    model file (overrides config key model_path)
  --input <path>    input file (overrides the subcommand's input key)
  --output <path>   output file (overrides the subcommand's output key)
  --trace           also write a JSONL decode trace next to translations
  --beam N          beam width (overrides config key beam)
  --seed N          master seed (overrides config key seed)
"""

# key -> (type tag, default); paths resolve against the config directory.
CONFIG_KEYS: dict[str, tuple[str, object]] = {
    "task": ("str", "lexicon"),
    "vocab_size": ("int", 50),
    "min_len": ("int", 5),
    "max_len": ("int", 15),
    "p_f": ("float", 0.0),
    "train_count": ("int", 5000),
    "dev_count": ("int", 200),
    "test_count": ("int", 200),
    "seed": ("int", 1),
    "data_seed": ("int", None),
    "init_seed": ("int", None),
    "shuffle_seed": ("int", None),
    "embedding_dim": ("int", 32),
    "hidden_dim": ("int", 48),
    "attention_dim": ("int", 0),
    "cell": ("str", GRU),
    "gate": ("str", GATE_NONE),
    "gate_inputs": ("str", "t_prev,s,y_prev"),
    "scale_a": ("float", 1.0),
    "scale_b": ("float", 1.0),
    "learning_rate": ("float", 0.3),
    "clip_norm": ("float", 1.0),
    "max_epochs": ("int", 20),
    "patience": ("int", 3),
    "max_train_len": ("int", 80),
    "beam": ("int", 10),
    "bucket_width": ("int", 10),
    "scale_settings": ("str", "1:1,1:0.8,1:0.5,0.8:1,0.5:1"),
    "model_path": ("path", "model.cgnm"),
    "log_path": ("path", "train_log.csv"),
    "output_path": ("path", None),
    "trace_path": ("path", None),
    "hyp_path": ("path", None),
    "ref_path": ("path", None),
    "baseline_hyp_path": ("path", None),
    "align_ref_path": ("path", None),
    "source_path": ("path", None),
    "target_path": ("path", None),
    "metrics_path": ("path", None),
    "bucket_report_path": ("path", None),
    "test_source_path": ("path", None),
    "test_target_path": ("path", None),
    "src_vocab_path": ("path", None),
    "tgt_vocab_path": ("path", None),
}


class UsageError(CgnmtError):
    """Bad command line; reported with the usage text and exit code 1."""


class RunConfig:
    """Flat key/value run configuration."""

    def __init__(self, values: dict, base_dir: Path):
        self.values = values
        self.base_dir = base_dir

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        values: dict = {}
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            kind = CONFIG_KEYS[key][0]
            try:
                if kind == "int":
                    values[key] = int(value)
                elif kind == "float":
                    values[key] = float(value)
                else:
                    values[key] = value
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad {kind} value for {key!r}: {value!r}"
                ) from exc
        return cls(values, path.resolve().parent)

    def get(self, key: str):
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        return self.values.get(key, CONFIG_KEYS[key][1])

    def override(self, key: str, value) -> None:
        self.values[key] = value

    def path(self, key: str) -> Path | None:
        value = self.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def require_path(self, key: str) -> Path:
        p = self.path(key)
        if p is None:
            raise ConfigError(f"config key {key!r} is required for this subcommand")
        return p

    # ------------------------------------------------------------------
    # Derived seeds: explicit keys win, otherwise fixed offsets from seed.
    def data_seed(self) -> int:
        v = self.get("data_seed")
        return v if v is not None else self.get("seed")

    def init_seed(self) -> int:
        v = self.get("init_seed")
        return v if v is not None else self.get("seed") + 100

    def shuffle_seed(self) -> int:
        v = self.get("shuffle_seed")
        return v if v is not None else self.get("seed") + 200

    def task_spec(self) -> ToyTaskSpec:
        return ToyTaskSpec(
            kind=self.get("task"),
            vocab_size=self.get("vocab_size"),
            min_len=self.get("min_len"),
            max_len=self.get("max_len"),
            p_f=self.get("p_f"),
            seed=self.data_seed(),
        )

    def gate_config(self) -> GateConfig:
        variant = self.get("gate")
        if variant == GATE_NONE:
            return GateConfig.none()
        if variant == GATE_SCALAR:
            return GateConfig.scalar_gate()
        inputs = [tok.strip() for tok in self.get("gate_inputs").split(",") if tok.strip()]
        return GateConfig.elementwise(variant, inputs)

    def model_config(
        self,
        src_vocab_size: int,
        tgt_vocab_size: int,
        cell: str | None = None,
        gate: GateConfig | None = None,
        init_seed: int | None = None,
    ) -> ModelConfig:
        return ModelConfig(
            embedding_dim=self.get("embedding_dim"),
            hidden_dim=self.get("hidden_dim"),
            attention_dim=self.get("attention_dim"),
            src_vocab_size=src_vocab_size,
            tgt_vocab_size=tgt_vocab_size,
            cell=cell if cell is not None else self.get("cell"),
            gate=gate if gate is not None else self.gate_config(),
            scale=ScaleConfig(self.get("scale_a"), self.get("scale_b")),
            seed=init_seed if init_seed is not None else self.init_seed(),
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.get("learning_rate"),
            clip_norm=self.get("clip_norm"),
            max_epochs=self.get("max_epochs"),
            patience=self.get("patience"),
            max_train_len=self.get("max_train_len"),
            shuffle_seed=self.shuffle_seed(),
        )

    def scale_settings(self) -> list[tuple[float, float]]:
        settings = []
        for item in self.get("scale_settings").split(","):
            item = item.strip()
            if not item:
                continue
            a, sep, b = item.partition(":")
            if not sep:
                raise ConfigError(f"bad scale setting {item!r}; expected 'a:b'")
            try:
                settings.append((float(a), float(b)))
            except ValueError as exc:
                raise ConfigError(f"bad scale setting {item!r}") from exc
        if not settings:
            raise ConfigError("scale_settings is empty")
        return settings


def _thread_count() -> int:
    raw = os.environ.get("CGNMT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"CGNMT_THREADS must be an integer, got {raw!r}")


def _map_ordered(fn: Callable, items: Sequence):
    """Apply ``fn`` across sentences, in parallel when allowed, preserving order."""
    workers = _thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _float_repr(x: float) -> str:
    return repr(float(x))


# ----------------------------------------------------------------------
# Subcommands


def _load_model_with_vocabs(path: Path):
    params, config, src_tokens, tgt_tokens = load_model(path)
    if src_tokens is None or tgt_tokens is None:
        raise ModelFormatError(f"{path}: model file carries no vocabularies")
    return params, config, Vocabulary.from_token_list(src_tokens), Vocabulary.from_token_list(tgt_tokens)


def cmd_train(cfg: RunConfig, args: dict) -> int:
    spec = cfg.task_spec()
    train_pairs, dev_pairs, test_pairs = synthesize_splits(
        spec, cfg.get("train_count"), cfg.get("dev_count"), cfg.get("test_count")
    )
    src_vocab, tgt_vocab = task_vocabularies(spec)
    model_config = cfg.model_config(len(src_vocab), len(tgt_vocab))
    params = init_model(model_config)
    log = train(train_pairs, dev_pairs, params, model_config, cfg.train_config())

    model_path = args.get("model") or cfg.require_path("model_path")
    save_model(params, model_config, model_path, src_vocab.tokens(), tgt_vocab.tokens())
    log.write_csv(cfg.require_path("log_path"))

    test_src = cfg.path("test_source_path")
    test_tgt = cfg.path("test_target_path")
    if test_src is not None:
        write_corpus(test_src, (corpus_mod.denumberize(p.source, src_vocab) for p in test_pairs))
    if test_tgt is not None:
        write_corpus(
            test_tgt, (corpus_mod.denumberize(p.target[:-1], tgt_vocab) for p in test_pairs)
        )
    if cfg.path("src_vocab_path") is not None:
        src_vocab.save(cfg.path("src_vocab_path"))
    if cfg.path("tgt_vocab_path") is not None:
        tgt_vocab.save(cfg.path("tgt_vocab_path"))
    return 0


def _decode_fn(params, config, width: int):
    if width == 1:
        def decode(source):
            tokens, trace = greedy_decode(source, params, config)
            return tokens, trace
    else:
        def decode(source):
            hyp, trace = beam_decode(source, params, config, width)
            return trace.surface_tokens, trace
    return decode


def _trace_record(trace, tgt_vocab: Vocabulary | None) -> dict:
    tokens = trace.surface_tokens
    return {
        "tokens": corpus_mod.denumberize(tokens, tgt_vocab) if tgt_vocab else list(tokens),
        "alpha": [[float(v) for v in row] for row in trace.alphas],
        "z_mean_per_step": trace.z_mean_per_step,
        "sentence_gate_weight": trace.sentence_gate_weight,
    }


def cmd_translate(cfg: RunConfig, args: dict) -> int:
    model_path = args.get("model") or cfg.require_path("model_path")
    params, config, src_vocab, tgt_vocab = _load_model_with_vocabs(model_path)
    input_path = args.get("input") or cfg.require_path("source_path")
    output_path = args.get("output") or cfg.require_path("output_path")
    width = args.get("beam") or cfg.get("beam")

    sentences = read_corpus(input_path)
    if any(len(s) == 0 for s in sentences):
        raise InputError(f"{input_path}: empty source sentence")
    sources = [numberize(s, src_vocab) for s in sentences]
    decode = _decode_fn(params, config, width)
    results = _map_ordered(decode, sources)

    with open(output_path, "w", encoding="utf-8") as fh:
        for tokens, _ in results:
            fh.write(" ".join(corpus_mod.denumberize(tokens, tgt_vocab)) + "\n")

    if args.get("trace"):
        trace_path = cfg.path("trace_path") or Path(str(output_path) + ".trace.jsonl")
        with open(trace_path, "w", encoding="utf-8") as fh:
            for _, trace in results:
                fh.write(json.dumps(_trace_record(trace, tgt_vocab), sort_keys=True) + "\n")
    return 0


def _read_trace_file(path: Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: bad trace record: {exc}") from exc
    return records


def cmd_evaluate(cfg: RunConfig, args: dict) -> int:
    hyp_path = args.get("input") or cfg.require_path("hyp_path")
    ref_path = cfg.require_path("ref_path")
    out_path = args.get("output") or cfg.require_path("metrics_path")
    hyps, refs = read_parallel(hyp_path, ref_path)

    rows: list[tuple[str, object]] = [
        ("sentence_count", len(hyps)),
        ("bleu", _float_repr(bleu(hyps, refs))),
        ("mean_hyp_length", _float_repr(sum(len(h) for h in hyps) / len(hyps)) if hyps else "0.0"),
        ("mean_ref_length", _float_repr(sum(len(r) for r in refs) / len(refs)) if refs else "0.0"),
    ]

    baseline_path = cfg.path("baseline_hyp_path")
    per_sentence_delta: list[float] | None = None
    if baseline_path is not None:
        base_hyps, _ = read_parallel(baseline_path, ref_path)
        rows.append(("baseline_bleu", _float_repr(bleu(base_hyps, refs))))
        scores_hyp = [sentence_bleu(h, r) for h, r in zip(hyps, refs)]
        scores_base = [sentence_bleu(h, r) for h, r in zip(base_hyps, refs)]
        rows.append(("sign_test_p", _float_repr(sign_test(scores_hyp, scores_base))))
        per_sentence_delta = [a - b for a, b in zip(scores_hyp, scores_base)]

    trace_path = cfg.path("trace_path")
    if trace_path is not None and per_sentence_delta is not None:
        records = _read_trace_file(trace_path)
        if len(records) != len(hyps):
            raise InputError(
                f"{trace_path}: {len(records)} trace records for {len(hyps)} hypotheses"
            )
        weights = [rec.get("sentence_gate_weight") for rec in records]
        if any(w is None for w in weights):
            rows.append(("pearson_gate_improvement", "nan"))
        else:
            try:
                rows.append(
                    ("pearson_gate_improvement",
                     _float_repr(pearson(weights, per_sentence_delta)))
                )
            except CorrelationError:
                rows.append(("pearson_gate_improvement", "nan"))

    bucket_path = cfg.path("bucket_report_path")
    if bucket_path is not None:
        src_path = cfg.path("source_path")
        if src_path is None:
            raise ConfigError("bucket_report_path requires source_path")
        sources = read_corpus(src_path)
        if len(sources) != len(hyps):
            raise InputError(
                f"{src_path}: {len(sources)} source sentences for {len(hyps)} hypotheses"
            )
        _write_bucket_report(bucket_path, sources, hyps, refs, cfg.get("bucket_width"))

    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("metric,value\n")
        for name, value in rows:
            fh.write(f"{name},{value}\n")
    return 0


def _write_bucket_report(path: Path, sources, hyps, refs, width: int) -> None:
    """Length-bucket table over token files, case-folded like corpus BLEU."""
    folded_refs = [[t.lower() for t in r] for r in refs]
    folded_hyps = [[t.lower() for t in h] for h in hyps]
    vocab = build_vocabulary(
        folded_refs + folded_hyps,
        3 + len({t for sent in folded_refs + folded_hyps for t in sent}),
    )
    pairs = [
        SequencePair(
            tuple(numberize(src, vocab)),
            tuple(numberize(ref, vocab)) + (corpus_mod.EOS_ID,),
        )
        for src, ref in zip(sources, folded_refs)
    ]
    report = bucket_report(pairs, [numberize(h, vocab) for h in folded_hyps], width)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bucket_lo,bucket_hi,count,bleu,mean_output_length\n")
        for b in report:
            fh.write(
                f"{b.lo},{b.hi},{b.count},{_float_repr(b.bleu)},{_float_repr(b.mean_output_length)}\n"
            )


def cmd_align(cfg: RunConfig, args: dict) -> int:
    model_path = args.get("model") or cfg.require_path("model_path")
    params, config, src_vocab, tgt_vocab = _load_model_with_vocabs(model_path)
    src_path = args.get("input") or cfg.require_path("source_path")
    tgt_path = cfg.require_path("target_path")
    out_path = args.get("output") or cfg.require_path("output_path")

    src_sents, tgt_sents = read_parallel(src_path, tgt_path)
    traces = []
    with open(out_path, "w", encoding="utf-8") as fh:
        for src_tokens, tgt_tokens in zip(src_sents, tgt_sents):
            pair = SequencePair(
                tuple(numberize(src_tokens, src_vocab)),
                tuple(numberize(tgt_tokens, tgt_vocab)) + (corpus_mod.EOS_ID,),
            )
            trace = forced_trace(pair, params, config)
            # Word alignments cover surface positions only; drop the EOS row.
            trace.tokens = trace.tokens[:-1]
            trace.alphas = trace.alphas[:-1]
            traces.append(trace)
            fh.write(format_links(extract_alignment(trace)) + "\n")

    ref_path = cfg.path("align_ref_path")
    if ref_path is not None:
        references = read_alignment_file(ref_path)
        if len(references) != len(traces):
            raise InputError(
                f"{ref_path}: {len(references)} reference lines for {len(traces)} sentences"
            )
        aer_values = []
        saer_values = []
        for trace, ref in zip(traces, references):
            links = extract_alignment(trace)
            aer_values.append(aer(links, ref.sure, ref.possible))
            saer_values.append(saer(trace.alpha_matrix, ref.sure, ref.possible))
        metrics_path = cfg.require_path("metrics_path")
        with open(metrics_path, "w", encoding="utf-8") as fh:
            fh.write("metric,value\n")
            fh.write(f"mean_aer,{_float_repr(sum(aer_values) / len(aer_values))}\n")
            fh.write(f"mean_saer,{_float_repr(sum(saer_values) / len(saer_values))}\n")
    return 0


def cmd_scale_experiment(cfg: RunConfig, args: dict) -> int:
    model_path = args.get("model") or cfg.require_path("model_path")
    params, config, _, _ = _load_model_with_vocabs(model_path)
    out_path = args.get("output") or cfg.require_path("output_path")
    width = args.get("beam") or cfg.get("beam")

    spec = cfg.task_spec()
    test_pairs = synthesize_corpus(
        replace(spec, seed=spec.seed + 2), cfg.get("test_count")
    )
    refs = [list(p.target[:-1]) for p in test_pairs]

    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("a,b,mean_output_length,cap_fraction,bleu\n")
        for a, b in cfg.scale_settings():
            scaled = config.with_scale(a, b)
            decode = _decode_fn(params, scaled, width)
            results = _map_ordered(decode, [list(p.source) for p in test_pairs])
            hyps = [tokens for tokens, _ in results]
            caps = [
                1 if len(trace.tokens) >= 3 * len(p.source) and (
                    not trace.tokens or trace.tokens[-1] != corpus_mod.EOS_ID
                ) else 0
                for (_, trace), p in zip(results, test_pairs)
            ]
            mean_len = sum(len(h) for h in hyps) / len(hyps)
            fh.write(
                f"{_float_repr(a)},{_float_repr(b)},{_float_repr(mean_len)},"
                f"{_float_repr(sum(caps) / len(caps))},{_float_repr(bleu(hyps, refs))}\n"
            )
    return 0


def ablate_grid() -> list[tuple[str, str, GateConfig]]:
    """The gate-input grid plus the deduplicated cell/variant comparison grid."""
    full = ("t_prev", "s", "y_prev")
    return [
        ("gru_gating_scalar", GRU, GateConfig.scalar_gate()),
        ("gru_both_t", GRU, GateConfig.elementwise(GATE_BOTH, ("t_prev",))),
        ("gru_both_t_s", GRU, GateConfig.elementwise(GATE_BOTH, ("t_prev", "s"))),
        ("gru_both_t_s_y", GRU, GateConfig.elementwise(GATE_BOTH, full)),
        ("vanilla", VANILLA, GateConfig.none()),
        ("vanilla_both", VANILLA, GateConfig.elementwise(GATE_BOTH, full)),
        ("gru", GRU, GateConfig.none()),
        ("gru_source", GRU, GateConfig.elementwise(GATE_SOURCE, full)),
        ("gru_target", GRU, GateConfig.elementwise(GATE_TARGET, full)),
    ]


def cmd_ablate(cfg: RunConfig, args: dict) -> int:
    out_path = args.get("output") or cfg.require_path("output_path")
    spec = cfg.task_spec()
    train_pairs, dev_pairs, test_pairs = synthesize_splits(
        spec, cfg.get("train_count"), cfg.get("dev_count"), cfg.get("test_count")
    )
    src_vocab, tgt_vocab = task_vocabularies(spec)
    refs = [list(p.target[:-1]) for p in test_pairs]
    train_config = cfg.train_config()

    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("system,cell,gate_variant,gate_inputs,parameters,dev_bleu,test_bleu\n")
        for label, cell, gate in ablate_grid():
            model_config = cfg.model_config(len(src_vocab), len(tgt_vocab), cell=cell, gate=gate)
            params = init_model(model_config)
            log = train(train_pairs, dev_pairs, params, model_config, train_config)
            hyps = [greedy_decode(list(p.source), params, model_config)[0] for p in test_pairs]
            fh.write(
                f"{label},{cell},{gate.variant},{'+'.join(gate.inputs_sorted()) or '-'},"
                f"{params.num_parameters()},{_float_repr(log.best_dev_bleu)},"
                f"{_float_repr(bleu(hyps, refs))}\n"
            )
    return 0


SUBCOMMANDS = {
    "train": cmd_train,
    "translate": cmd_translate,
    "evaluate": cmd_evaluate,
    "align": cmd_align,
    "scale-experiment": cmd_scale_experiment,
    "ablate": cmd_ablate,
}


def _parse_args(argv: Sequence[str]) -> tuple[str, dict]:
    if not argv:
        raise UsageError("missing subcommand")
    name = argv[0]
    if name in ("-h", "--help"):
        raise UsageError("")
    if name not in SUBCOMMANDS:
        raise UsageError(f"unknown subcommand {name!r}")
    args: dict = {"trace": False}
    i = 1
    while i < len(argv):
        flag = argv[i]
        if flag == "--trace":
            args["trace"] = True
            i += 1
            continue
        if flag in ("--config", "--model", "--input", "--output", "--beam", "--seed"):
            if i + 1 >= len(argv):
                raise UsageError(f"{flag} requires a value")
            value = argv[i + 1]
            key = flag[2:]
            if key in ("beam", "seed"):
                try:
                    args[key] = int(value)
                except ValueError:
                    raise UsageError(f"{flag} requires an integer, got {value!r}")
            else:
                args[key] = Path(value)
            i += 2
            continue
        raise UsageError(f"unknown option {flag!r}")
    if "config" not in args:
        raise UsageError("--config is required")
    return name, args


def run_command(argv: Sequence[str]) -> int:
    """Entry point behind ``main``; returns the process exit code."""
    try:
        name, args = _parse_args(argv)
        cfg = RunConfig.load(args["config"])
        if "seed" in args:
            cfg.override("seed", args["seed"])
        return SUBCOMMANDS[name](cfg, args)
    except UsageError as exc:
        if str(exc):
            print(f"cgnmt: {exc}", file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"cgnmt: config error: {exc}", file=sys.stderr)
        return 1
    except (InputError, ModelFormatError, DivergenceError, OSError) as exc:
        print(f"cgnmt: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
