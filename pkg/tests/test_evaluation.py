import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgnmt.corpus import EOS_ID, SequencePair
from cgnmt.errors import CorrelationError, InputError
from cgnmt.evaluation import (
    AlignmentSets,
    aer,
    bleu,
    bucket_report,
    format_links,
    parse_alignment_line,
    pearson,
    read_alignment_file,
    saer,
    sentence_bleu,
    sign_test,
)


class TestBleu:
    def test_perfect_match(self):
        sents = [["a", "b", "c", "d"], ["x", "y", "z", "w", "v"]]
        assert bleu(sents, sents) == 1.0

    def test_brevity_penalty_hand_case(self):
        score = bleu([["a", "b", "c", "d"]], [["a", "b", "c", "d", "e"]])
        assert abs(score - math.exp(-0.25)) <= 1e-9

    def test_no_shared_fourgram_is_zero(self):
        assert bleu([["a", "b", "c", "d"]], [["a", "b", "x", "d"]]) == 0.0

    def test_short_hypothesis_without_fourgrams_is_zero(self):
        assert bleu([["a", "b"]], [["a", "b"]]) == 0.0

    def test_case_insensitive(self):
        assert bleu([["A", "b", "C", "d"]], [["a", "B", "c", "D"]]) == 1.0

    def test_integer_tokens(self):
        assert bleu([[1, 2, 3, 4]], [[1, 2, 3, 4]]) == 1.0

    def test_empty_hypotheses(self):
        assert bleu([[]], [["a", "b", "c", "d"]]) == 0.0

    def test_count_mismatch(self):
        with pytest.raises(InputError):
            bleu([["a"]], [["a"], ["b"]])

    def test_clipping(self):
        # "the the the ..." must not get credit beyond the reference count
        score = bleu([["the"] * 8], [["the", "cat", "sat", "on", "the", "mat"]])
        assert score == 0.0  # no shared 2-gram at all
        one = bleu(
            [["the", "cat", "the", "cat", "sat", "on"]],
            [["the", "cat", "sat", "on"]],
        )
        assert 0 < one < 1.0

    @given(st.permutations(list("abcdefg")))
    @settings(max_examples=30, deadline=None)
    def test_relabeling_invariance(self, perm):
        mapping = dict(zip("abcdefg", perm))
        hyp = [["a", "b", "c", "d", "e"]]
        ref = [["a", "b", "c", "f", "e"]]
        relabeled_hyp = [[mapping[t] for t in hyp[0]]]
        relabeled_ref = [[mapping[t] for t in ref[0]]]
        assert bleu(hyp, ref) == pytest.approx(bleu(relabeled_hyp, relabeled_ref), abs=1e-12)

    def test_sentence_bleu_is_singleton_corpus(self):
        hyp, ref = ["a", "b", "c", "d"], ["a", "b", "c", "d", "e"]
        assert sentence_bleu(hyp, ref) == bleu([hyp], [ref])


class TestAer:
    def test_perfect(self):
        links = {(1, 1), (2, 2)}
        assert aer(links, links, links) == 0.0

    def test_hand_case(self):
        a = {(1, 1), (2, 3)}
        s = {(1, 1), (2, 2)}
        assert aer(a, s, s) == 0.5

    def test_empty_candidate(self):
        assert aer(set(), {(1, 1)}, {(1, 1)}) == 1.0

    def test_empty_everything(self):
        assert aer(set(), set(), set()) == 0.0

    def test_sure_must_be_subset(self):
        with pytest.raises(InputError):
            aer(set(), {(1, 1)}, set())

    @given(
        st.sets(st.tuples(st.integers(1, 4), st.integers(1, 4)), max_size=8),
        st.sets(st.tuples(st.integers(1, 4), st.integers(1, 4)), max_size=8),
        st.sets(st.tuples(st.integers(1, 4), st.integers(1, 4)), max_size=8),
    )
    @settings(max_examples=60, deadline=None)
    def test_range(self, a, s, extra):
        p = s | extra
        value = aer(a, s, p)
        assert 0.0 <= value <= 1.0


class TestSaer:
    def test_one_hot_perfect(self):
        links = {(1, 1), (2, 2), (3, 1)}
        soft = np.zeros((3, 2))
        for i, j in links:
            soft[i - 1, j - 1] = 1.0
        assert saer(soft, links, links) == 0.0

    def test_uniform_half(self):
        soft = np.full((1, 2), 0.5)
        assert saer(soft, {(1, 1)}, {(1, 1)}) == 0.5

    def test_all_zero_matrix(self):
        assert saer(np.zeros((2, 2)), {(1, 1)}, {(1, 1)}) == 1.0

    def test_empty_denominator(self):
        assert saer(np.zeros((2, 2)), set(), set()) == 0.0

    def test_link_outside_matrix(self):
        with pytest.raises(InputError):
            saer(np.zeros((2, 2)), {(3, 1)}, {(3, 1)})

    def test_one_hot_matches_aer_when_sure_equals_possible(self):
        rows, cols = 4, 3
        rng = np.random.default_rng(7)
        for _ in range(20):
            hard = {(i + 1, int(rng.integers(1, cols + 1))) for i in range(rows)}
            refs = {
                (int(rng.integers(1, rows + 1)), int(rng.integers(1, cols + 1)))
                for _ in range(5)
            }
            soft = np.zeros((rows, cols))
            for i, j in hard:
                soft[i - 1, j - 1] = 1.0
            assert saer(soft, refs, refs) == pytest.approx(aer(hard, refs, refs), abs=1e-12)


class TestSignTest:
    def test_clean_sweep_of_ten(self):
        p = sign_test([1.0] * 10, [0.0] * 10)
        assert p == 0.001953125

    def test_balanced(self):
        a = [1, 0, 1, 0, 1, 0, 1, 0, 1, 0]
        b = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1]
        assert sign_test(a, b) == 1.0

    def test_all_ties(self):
        assert sign_test([1.0, 2.0], [1.0, 2.0]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            sign_test([1.0], [1.0, 2.0])

    def test_matches_enumeration_oracle(self):
        # Oracle: enumerate all 2^n equally likely win/loss outcomes and
        # count those with at most min(k, n-k) wins to get the lower tail.
        for n in range(1, 13):
            for k in range(n + 1):
                m = min(k, n - k)
                tail_count = sum(
                    1 for outcome in product([0, 1], repeat=n) if sum(outcome) <= m
                )
                tail = tail_count / 2.0 ** n
                expected = 2.0 * min(tail, 0.5)
                scores_a = [1.0] * k + [0.0] * (n - k)
                scores_b = [0.0] * k + [1.0] * (n - k)
                assert sign_test(scores_a, scores_b) == pytest.approx(expected, abs=1e-15)


class TestPearson:
    def test_perfect_positive(self):
        assert pearson([1.0, 2.0, 3.0], [3.0, 5.0, 7.0]) == 1.0

    def test_perfect_negative(self):
        assert pearson([1.0, 2.0, 3.0], [-1.0, -2.0, -3.0]) == -1.0

    def test_hand_half(self):
        assert pearson([1.0, 2.0, 3.0], [1.0, 3.0, 2.0]) == pytest.approx(0.5, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(CorrelationError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(InputError):
            pearson([1.0], [2.0])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            pearson([1.0, 2.0], [1.0])


def _pair(source_len, target):
    return SequencePair(tuple(range(3, 3 + source_len)), tuple(target) + (EOS_ID,))


class TestBucketReport:
    def test_single_bucket(self):
        pairs = [_pair(3, [4, 5]) for _ in range(4)]
        hyps = [[4, 5]] * 4
        report = bucket_report(pairs, hyps, width=10)
        assert len(report) == 1
        assert report[0].count == 4
        assert report[0].lo == 0 and report[0].hi == 10

    def test_counts_partition(self):
        pairs = [_pair(n, [4, 5, 6, 7]) for n in (1, 2, 11, 12, 25)]
        hyps = [[4, 5, 6, 7]] * 5
        report = bucket_report(pairs, hyps, width=10)
        assert sum(b.count for b in report) == 5
        assert [b.count for b in report] == [2, 2, 1]

    def test_identical_content_gives_identical_bleu(self):
        pairs = [_pair(3, [4, 5, 6, 7]), _pair(13, [4, 5, 6, 7])]
        hyps = [[4, 5, 6, 7], [4, 5, 6, 7]]
        report = bucket_report(pairs, hyps, width=10)
        assert report[0].bleu == report[1].bleu == 1.0

    def test_mean_output_length(self):
        pairs = [_pair(2, [4]), _pair(3, [4])]
        report = bucket_report(pairs, [[4, 5, 6], [4]], width=10)
        assert report[0].mean_output_length == 2.0

    def test_bad_width(self):
        with pytest.raises(InputError):
            bucket_report([], [], width=0)


class TestAlignmentFiles:
    def test_parse_line(self):
        sets = parse_alignment_line("1-1 2?3 4-2")
        assert sets.sure == {(1, 1), (4, 2)}
        assert sets.possible == {(1, 1), (2, 3), (4, 2)}

    def test_sure_subset_enforced_by_construction(self):
        sets = parse_alignment_line("1-1")
        assert sets.sure <= sets.possible

    def test_malformed_rejected(self):
        with pytest.raises(InputError):
            parse_alignment_line("1=2")
        with pytest.raises(InputError):
            parse_alignment_line("a-b")
        with pytest.raises(InputError):
            parse_alignment_line("0-1")

    def test_alignment_sets_validation(self):
        with pytest.raises(InputError):
            AlignmentSets({(1, 1)}, set())

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "ref.align"
        path.write_text("1-1 2?3\n2-2\n", encoding="utf-8")
        sets = read_alignment_file(path)
        assert len(sets) == 2
        assert sets[1].sure == {(2, 2)}

    def test_format_links_sorted(self):
        assert format_links({(2, 1), (1, 2), (1, 1)}) == "1-1 1-2 2-1"
