"""Translation and alignment quality metrics.

BLEU is corpus-level, case-insensitive, up to 4-grams, single reference,
with no smoothing: any zero n-gram precision yields a score of exactly
zero.  Alignment quality is measured by AER over hard links and by its
soft variant over the attention matrix, both against sure links S and
possible links P with S a subset of P.  Significance between two systems
uses an exact two-sided sign test; gate-weight analyses use sample
Pearson correlation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .corpus import SequencePair
from .errors import CorrelationError, InputError

Link = tuple[int, int]  # (target position, source position), 1-based

BLEU_MAX_ORDER = 4


def _normalize(tokens: Sequence) -> list:
    """Case-insensitive matching: lowercase string tokens, pass ids through."""
    return [t.lower() if isinstance(t, str) else t for t in tokens]


def _ngrams(tokens: Sequence, order: int) -> Counter:
    return Counter(tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def bleu(hypotheses: Sequence[Sequence], references: Sequence[Sequence]) -> float:
    """Corpus BLEU in [0, 1] with brevity penalty exp(min(0, 1 - r/c))."""
    if len(hypotheses) != len(references):
        raise InputError(
            f"hypothesis/reference counts differ: {len(hypotheses)} vs {len(references)}"
        )
    matches = [0] * BLEU_MAX_ORDER
    totals = [0] * BLEU_MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h = _normalize(hyp)
        r = _normalize(ref)
        hyp_len += len(h)
        ref_len += len(r)
        for order in range(1, BLEU_MAX_ORDER + 1):
            hyp_counts = _ngrams(h, order)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(r, order)
            totals[order - 1] += sum(hyp_counts.values())
            matches[order - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )
    if hyp_len == 0:
        return 0.0
    log_precision = 0.0
    for matched, total in zip(matches, totals):
        if matched == 0 or total == 0:
            return 0.0
        log_precision += math.log(matched / total)
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(log_precision / BLEU_MAX_ORDER)


def sentence_bleu(hypothesis: Sequence, reference: Sequence) -> float:
    return bleu([hypothesis], [reference])


@dataclass
class AlignmentSets:
    """Sure links, possible links (S subset of P), and the soft matrix."""

    sure: set[Link]
    possible: set[Link]
    soft: np.ndarray | None = None

    def __post_init__(self):
        if not self.sure <= self.possible:
            raise InputError("sure links must be a subset of possible links")


def aer(candidate: set[Link], sure: set[Link], possible: set[Link]) -> float:
    """Alignment error rate; 0 is perfect, defined as 0 when both sides are empty."""
    if not sure <= possible:
        raise InputError("sure links must be a subset of possible links")
    denom = len(candidate) + len(sure)
    if denom == 0:
        return 0.0
    hits = len(candidate & sure) + len(candidate & possible)
    return 1.0 - hits / denom


def _link_matrix(links: set[Link], shape: tuple[int, int]) -> np.ndarray:
    out = np.zeros(shape)
    for i, j in links:
        if not (1 <= i <= shape[0] and 1 <= j <= shape[1]):
            raise InputError(
                f"link ({i},{j}) outside alignment matrix of shape {shape}"
            )
        out[i - 1, j - 1] = 1.0
    return out


def saer(soft: np.ndarray, sure: set[Link], possible: set[Link]) -> float:
    """Soft alignment error rate over an attention matrix (rows are target positions)."""
    if not sure <= possible:
        raise InputError("sure links must be a subset of possible links")
    if soft.ndim != 2:
        raise InputError(f"soft alignment matrix must be 2-d, got shape {soft.shape}")
    m_s = _link_matrix(sure, soft.shape)
    m_p = _link_matrix(possible, soft.shape)
    denom = float(soft.sum() + m_s.sum())
    if denom == 0.0:
        return 0.0
    hits = float((soft * m_s).sum() + (soft * m_p).sum())
    return 1.0 - hits / denom


def sign_test(scores_a: Sequence[float], scores_b: Sequence[float]) -> float:
    """Exact two-sided sign test p-value; ties are dropped."""
    if len(scores_a) != len(scores_b):
        raise InputError(
            f"score counts differ: {len(scores_a)} vs {len(scores_b)}"
        )
    wins = 0
    trials = 0
    for a, b in zip(scores_a, scores_b):
        if a == b:
            continue
        trials += 1
        if a > b:
            wins += 1
    if trials == 0:
        return 1.0
    k = min(wins, trials - wins)
    tail = Fraction(sum(math.comb(trials, i) for i in range(k + 1)), 2 ** trials)
    return float(2 * min(tail, Fraction(1, 2)))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation in [-1, 1]."""
    if len(x) != len(y):
        raise InputError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise InputError("pearson requires at least two points")
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    var_x = float(dx @ dx)
    var_y = float(dy @ dy)
    if var_x == 0.0 or var_y == 0.0:
        raise CorrelationError("correlation undefined: an input has zero variance")
    return float(dx @ dy) / math.sqrt(var_x * var_y)


@dataclass
class BucketStats:
    lo: int          # inclusive source-length bound
    hi: int          # exclusive source-length bound
    count: int
    bleu: float
    mean_output_length: float


def bucket_report(
    pairs: Sequence[SequencePair],
    translations: Sequence[Sequence],
    width: int,
) -> list[BucketStats]:
    """Per-source-length-bucket sentence counts, BLEU, and mean output length.

    Buckets are [0, w), [w, 2w), ... and partition the test set.
    """
    if width < 1:
        raise InputError("bucket width must be positive")
    if len(pairs) != len(translations):
        raise InputError(
            f"pair/translation counts differ: {len(pairs)} vs {len(translations)}"
        )
    top = max(len(p.source) for p in pairs) // width + 1 if pairs else 0
    report = []
    for b in range(top):
        lo, hi = b * width, (b + 1) * width
        members = [
            (list(p.target[:-1]), list(t))
            for p, t in zip(pairs, translations)
            if lo <= len(p.source) < hi
        ]
        if members:
            refs, hyps = zip(*members)
            score = bleu(hyps, refs)
            mean_len = sum(len(h) for h in hyps) / len(hyps)
        else:
            score = 0.0
            mean_len = 0.0
        report.append(BucketStats(lo, hi, len(members), score, mean_len))
    return report


def parse_alignment_line(line: str) -> AlignmentSets:
    """Parse one reference line of ``i-j`` (sure) and ``i?j`` (possible) links."""
    sure: set[Link] = set()
    possible: set[Link] = set()
    for item in line.split():
        sep = "-" if "-" in item else "?" if "?" in item else None
        if sep is None:
            raise InputError(f"malformed alignment link {item!r}")
        left, _, right = item.partition(sep)
        try:
            link = (int(left), int(right))
        except ValueError as exc:
            raise InputError(f"malformed alignment link {item!r}") from exc
        if link[0] < 1 or link[1] < 1:
            raise InputError(f"alignment link positions must be 1-based: {item!r}")
        possible.add(link)
        if sep == "-":
            sure.add(link)
    return AlignmentSets(sure, possible)


def read_alignment_file(path) -> list[AlignmentSets]:
    with open(path, "r", encoding="utf-8") as fh:
        return [parse_alignment_line(line) for line in fh]


def format_links(links: set[Link]) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(links))
