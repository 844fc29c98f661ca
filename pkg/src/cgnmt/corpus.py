"""Vocabularies, numberization, and deterministic synthetic toy corpora.

Three toy translation tasks are provided.  ``copy`` and ``reverse`` are
the usual seq2seq sanity tasks.  ``lexicon`` maps every source token
through a fixed bijection and then, with probability ``p_f``, inserts a
function token that has no source-side counterpart; the function token
is chosen from a disjoint 4-token set by the preceding target token's id
mod 4, so fluent insertion is learnable from target context alone.

Corpus files are UTF-8 plain text, one sentence per line with
space-separated tokens; parallel corpora are two files of equal line
count.  Vocabulary files hold one token per line where the line number
is the id and the first three lines are fixed to the reserved tokens.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, InputError
from .rng import Xorshift64Star

UNK_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_TOKEN = "<unk>"
BOS_TOKEN = "<s>"
EOS_TOKEN = "</s>"
RESERVED_TOKENS = (UNK_TOKEN, BOS_TOKEN, EOS_TOKEN)

# First id available to content tokens; ids below are reserved.
FIRST_CONTENT_ID = 3
# The lexicon task reserves four target ids for function tokens.
FUNCTION_SET_SIZE = 4


class Vocabulary:
    """Bidirectional token/id map with fixed reserved entries."""

    def __init__(self, content_tokens: Sequence[str] = ()):
        self._id_to_token: list[str] = list(RESERVED_TOKENS)
        self._token_to_id: dict[str, int] = {
            tok: i for i, tok in enumerate(RESERVED_TOKENS)
        }
        for tok in content_tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        if token in self._token_to_id:
            raise InputError(f"duplicate vocabulary token {token!r}")
        idx = len(self._id_to_token)
        self._id_to_token.append(token)
        self._token_to_id[token] = idx
        return idx

    def token_to_id(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def id_to_token(self, idx: int) -> str:
        return self._id_to_token[idx]

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def __len__(self) -> int:
        return len(self._id_to_token)

    def tokens(self) -> list[str]:
        return list(self._id_to_token)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            "".join(tok + "\n" for tok in self._id_to_token), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if len(lines) < 3 or tuple(lines[:3]) != RESERVED_TOKENS:
            raise InputError(
                f"vocabulary file {path} must start with "
                f"{' '.join(RESERVED_TOKENS)} on the first three lines"
            )
        return cls(lines[3:])

    @classmethod
    def from_token_list(cls, all_tokens: Sequence[str]) -> "Vocabulary":
        """Rebuild from a full id-ordered token list including reserved entries."""
        if len(all_tokens) < 3 or tuple(all_tokens[:3]) != RESERVED_TOKENS:
            raise InputError("token list must start with the reserved tokens")
        return cls(all_tokens[3:])


def build_vocabulary(sentences: Iterable[Sequence[str]], max_size: int) -> Vocabulary:
    """Keep the ``max_size - 3`` most frequent tokens plus the reserved ids.

    Frequency ties are broken by first occurrence in the corpus.
    """
    if max_size < 4:
        raise ConfigError(f"max_size must be at least 4, got {max_size}")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    position = 0
    for sentence in sentences:
        for token in sentence:
            counts[token] += 1
            if token not in first_seen:
                first_seen[token] = position
            position += 1
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    return Vocabulary(ranked[: max_size - 3])


def numberize(tokens: Sequence[str], vocab: Vocabulary) -> list[int]:
    """Map tokens to ids, sending out-of-vocabulary tokens to UNK."""
    return [vocab.token_to_id(t) for t in tokens]


def denumberize(ids: Sequence[int], vocab: Vocabulary) -> list[str]:
    return [vocab.id_to_token(i) for i in ids]


@dataclass(frozen=True)
class SequencePair:
    """One parallel sentence: raw source ids and an EOS-terminated target."""

    source: tuple[int, ...]
    target: tuple[int, ...]

    def __post_init__(self):
        if len(self.source) < 1:
            raise InputError("source sequence must be nonempty")
        if not self.target or self.target[-1] != EOS_ID:
            raise InputError("target sequence must end with EOS")
        if EOS_ID in self.target[:-1]:
            raise InputError("target sequence must contain exactly one EOS")


TASK_KINDS = ("copy", "reverse", "lexicon")


@dataclass(frozen=True)
class ToyTaskSpec:
    """Parameters of one synthetic translation task."""

    kind: str
    vocab_size: int
    min_len: int
    max_len: int
    p_f: float = 0.0
    seed: int = 1

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ConfigError(f"unknown task kind {self.kind!r}; expected one of {TASK_KINDS}")
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be positive")
        if not (1 <= self.min_len <= self.max_len):
            raise ConfigError(
                f"length bounds must satisfy 1 <= min <= max, got [{self.min_len}, {self.max_len}]"
            )
        if not (0.0 <= self.p_f <= 1.0):
            raise ConfigError(f"p_f must lie in [0, 1], got {self.p_f}")

    @property
    def source_vocab_total(self) -> int:
        """Source vocabulary size including reserved ids."""
        return FIRST_CONTENT_ID + self.vocab_size

    @property
    def target_vocab_total(self) -> int:
        """Target vocabulary size including reserved ids (and function tokens)."""
        if self.kind == "lexicon":
            return FIRST_CONTENT_ID + FUNCTION_SET_SIZE + self.vocab_size
        return self.source_vocab_total


def lexicon_map(source_id: int) -> int:
    """Fixed source-to-target content bijection for the lexicon task."""
    return source_id + FUNCTION_SET_SIZE


def function_token(prev_target_id: int) -> int:
    """Function token chosen by the preceding target token's id mod 4."""
    return FIRST_CONTENT_ID + (prev_target_id % FUNCTION_SET_SIZE)


def synthesize_corpus(spec: ToyTaskSpec, count: int) -> list[SequencePair]:
    """Generate ``count`` pairs; byte-identical for a given spec on any platform."""
    if count < 1:
        raise ConfigError(f"count must be positive, got {count}")
    rng = Xorshift64Star(spec.seed)
    lo = FIRST_CONTENT_ID
    hi = FIRST_CONTENT_ID + spec.vocab_size - 1
    pairs = []
    for _ in range(count):
        length = rng.randint(spec.min_len, spec.max_len)
        source = tuple(rng.randint(lo, hi) for _ in range(length))
        if spec.kind == "copy":
            target = source + (EOS_ID,)
        elif spec.kind == "reverse":
            target = tuple(reversed(source)) + (EOS_ID,)
        else:
            out: list[int] = []
            for tok in source:
                mapped = lexicon_map(tok)
                out.append(mapped)
                if rng.uniform() < spec.p_f:
                    out.append(function_token(mapped))
            target = tuple(out) + (EOS_ID,)
        pairs.append(SequencePair(source, target))
    return pairs


def synthesize_splits(
    spec: ToyTaskSpec, train_count: int, dev_count: int, test_count: int
) -> tuple[list[SequencePair], list[SequencePair], list[SequencePair]]:
    """Train/dev/test from disjoint seed offsets (seed, seed+1, seed+2)."""
    train = synthesize_corpus(spec, train_count)
    dev = synthesize_corpus(_reseed(spec, spec.seed + 1), dev_count)
    test = synthesize_corpus(_reseed(spec, spec.seed + 2), test_count)
    return train, dev, test


def _reseed(spec: ToyTaskSpec, seed: int) -> ToyTaskSpec:
    return ToyTaskSpec(spec.kind, spec.vocab_size, spec.min_len, spec.max_len, spec.p_f, seed)


def task_vocabularies(spec: ToyTaskSpec) -> tuple[Vocabulary, Vocabulary]:
    """Token renderings for a toy task: id ``k`` becomes token ``w<k>``."""
    src = Vocabulary([f"w{k}" for k in range(FIRST_CONTENT_ID, spec.source_vocab_total)])
    tgt = Vocabulary([f"w{k}" for k in range(FIRST_CONTENT_ID, spec.target_vocab_total)])
    return src, tgt


def render_pair(pair: SequencePair, src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> tuple[list[str], list[str]]:
    """Token renderings of a pair; the target's trailing EOS is dropped."""
    return (
        denumberize(pair.source, src_vocab),
        denumberize(pair.target[:-1], tgt_vocab),
    )


def write_corpus(path: str | Path, sentences: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in sentences:
            fh.write(" ".join(sentence) + "\n")


def read_corpus(path: str | Path) -> list[list[str]]:
    sentences = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            sentences.append(line.split())
    return sentences


def read_parallel(source_path: str | Path, target_path: str | Path) -> tuple[list[list[str]], list[list[str]]]:
    src = read_corpus(source_path)
    tgt = read_corpus(target_path)
    if len(src) != len(tgt):
        raise InputError(
            f"parallel corpus line counts differ: {source_path} has {len(src)}, "
            f"{target_path} has {len(tgt)}"
        )
    return src, tgt
