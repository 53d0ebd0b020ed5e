import math
import random
import string
from collections import Counter

import pytest

from reviewscope.lexicon import default_lexicon
from reviewscope.markers import (
    MARKER_NAMES,
    MarkerVector,
    extract_rule_based,
    score_balance,
    score_conceptual,
    score_criticism,
    score_generic,
    score_homogeneity,
    score_personal_absence,
    score_repetition,
    score_structure,
    segment_sentences,
)

LEX = default_lexicon()


def trigram_uniqueness(text: str) -> float:
    """Independent oracle: unique/total ratio over cleaned word trigrams."""
    tokens = [t for t in "".join(c if c.isalnum() else " " for c in text.lower()).split()]
    grams = [tuple(tokens[i : i + 3]) for i in range(len(tokens) - 2)]
    if not grams:
        return 1.0
    return len(set(Counter(grams))) / len(grams)


class TestSegmentation:
    def test_two_sentences(self):
        assert segment_sentences("A b c. D e.") == [3, 2]

    def test_empty(self):
        assert segment_sentences("") == []

    def test_three_terminators(self):
        assert segment_sentences("One! Two? Three.") == [1, 1, 1]

    def test_trailing_fragment_counts(self):
        assert segment_sentences("First one. then a tail") == [2, 3]


class TestStructure:
    def test_three_headers(self):
        text = "Summary: fine.\nStrengths: several.\nWeaknesses: some."
        assert score_structure(text, LEX) == pytest.approx(0.6)

    def test_no_headers(self):
        assert score_structure("nothing resembling a header here", LEX) == 0.0

    def test_saturates_at_five(self):
        text = "\n".join(
            f"{kw.title()}: text" for kw in
            ("summary", "strengths", "weaknesses", "questions", "recommendation", "clarity")
        )
        assert score_structure(text, LEX) == 1.0

    def test_distinct_keywords_not_occurrences(self):
        assert score_structure("Summary: a.\nSummary: b.\nSummary: c.", LEX) == pytest.approx(0.2)


class TestCountScores:
    def test_criticism_two_hits(self):
        text = "needs an ablation study and a stronger baseline"
        assert score_criticism(text, LEX) == pytest.approx(0.5)

    def test_criticism_none(self):
        assert score_criticism("entirely specific commentary", LEX) == 0.0

    def test_criticism_saturation(self):
        assert score_criticism("ablation study " * 4, LEX) == 1.0

    def test_balance_one_third(self):
        assert score_balance("it is well-written overall", LEX) == pytest.approx(1 / 3, abs=1e-9)

    def test_balance_zero_and_saturation(self):
        assert score_balance("no diplomacy here", LEX) == 0.0
        assert score_balance("that said, " * 3, LEX) == 1.0

    def test_generic_quarter_steps(self):
        assert score_generic("a novel approach", LEX) == pytest.approx(0.25)
        assert score_generic("plain words", LEX) == 0.0
        assert score_generic("novel approach, significant contribution, state-of-the-art, promising results", LEX) == 1.0

    def test_counts_are_total_occurrences(self):
        assert score_criticism("ablation study ablation study", LEX) == pytest.approx(0.5)

    def test_case_insensitive(self):
        assert score_criticism("ABLATION STUDY", LEX) == pytest.approx(0.25)


class TestHomogeneity:
    def test_equal_lengths(self):
        assert score_homogeneity("a b c. d e f. g h i.") == 1.0

    def test_five_fifteen(self):
        # lengths [5, 15]: mean 10, population sd 5, so 1 - 5/10 = 0.5
        text = " ".join(["w"] * 5) + ". " + " ".join(["w"] * 15) + "."
        assert score_homogeneity(text) == pytest.approx(0.5, abs=1e-9)

    def test_degenerate_inputs_score_one(self):
        assert score_homogeneity("") == 1.0
        assert score_homogeneity("only one sentence here") == 1.0

    def test_duplication_invariance(self):
        # population mean/sd are invariant under duplicating the sentence list
        base = "a b. c d e f. g."
        assert score_homogeneity(base) == pytest.approx(score_homogeneity(base + " " + base))


class TestConceptual:
    def test_no_references_scores_one(self):
        assert score_conceptual("purely abstract thoughts about the method", LEX) == 1.0

    def test_two_references(self):
        assert score_conceptual("see Figure 3 and Table 2", LEX) == pytest.approx(0.6)

    def test_saturates_to_zero(self):
        text = "line 1, page 2, figure 3, table 4, equation 5, section 6"
        assert score_conceptual(text, LEX) == 0.0

    def test_reference_variants(self):
        assert score_conceptual("Fig. 4 and §3 and eq. 12", LEX) == pytest.approx(1 - 3 / 5)


class TestPersonalAbsence:
    def test_no_signals(self):
        assert score_personal_absence("the method is sound", LEX) == 1.0

    def test_one_signal(self):
        assert score_personal_absence("I think the proof holds", LEX) == pytest.approx(2 / 3, abs=1e-9)

    def test_three_signals_zero(self):
        assert score_personal_absence("I think... I found... i wonder...", LEX) == 0.0


class TestRepetition:
    def test_all_unique(self):
        text = "alpha beta gamma delta epsilon zeta eta theta"
        assert trigram_uniqueness(text) == 1.0
        assert score_repetition(text) == 0.0

    def test_ten_trigrams_eight_unique(self):
        # 12 tokens -> 10 trigrams; the leading run aaa aaa duplicates two
        text = "a a a a a b c d e f g h"
        assert trigram_uniqueness(text) == pytest.approx(0.8)
        assert score_repetition(text) == pytest.approx(0.6, abs=1e-9)

    def test_saturation_below_two_thirds(self):
        text = "spam ham eggs " * 8
        assert trigram_uniqueness(text) <= 2 / 3
        assert score_repetition(text) == 1.0

    def test_repeated_single_trigram(self):
        for k in (4, 7, 11):
            text = "one two three " * k
            u = trigram_uniqueness(text)
            assert u <= 2 / 3
            assert score_repetition(text) == 1.0

    def test_below_three_tokens(self):
        assert score_repetition("") == 0.0
        assert score_repetition("two tokens") == 0.0


ALL_ONES_FIXTURE = "\n".join(
    [
        "Summary: the novel approach shines very brightly.",
        "Strengths: clearly a significant contribution for everyone.",
        "Weaknesses: the ablation study feels rather thin.",
        "Questions: will the evaluation grow stronger later?",
        "Recommendation: we accept the state-of-the-art promising results.",
        "That said, the setup could be strengthened.",
        "On the other hand, stronger baseline numbers.",
        "The stronger baseline craves an additional dataset.",
    ]
    + ["The template pattern repeats again and again."] * 6
)


class TestExtractRuleBased:
    def test_empty_text_vector(self):
        assert extract_rule_based("", LEX).as_tuple() == (0, 0, 0, 1, 0, 1, 1, 0)

    def test_deterministic(self):
        text = "Summary: I think Figure 3 is well-written overall. More text here."
        assert extract_rule_based(text, LEX) == extract_rule_based(text, LEX)

    def test_all_saturations_fixture(self):
        # sanity-check the fixture's ingredients with independent counts
        lengths = segment_sentences(ALL_ONES_FIXTURE)
        assert len(set(lengths)) == 1
        assert trigram_uniqueness(ALL_ONES_FIXTURE) <= 2 / 3
        assert not any(ch.isdigit() for ch in ALL_ONES_FIXTURE)

        vector = extract_rule_based(ALL_ONES_FIXTURE, LEX)
        assert vector.as_tuple() == (1.0,) * 8


class TestMarkerVector:
    def test_clipping_on_construction(self):
        v = MarkerVector.from_values([1.5, -0.2, 0.5, 0, 1, 0.3, 0.9, 2])
        assert v.as_tuple() == (1.0, 0.0, 0.5, 0.0, 1.0, 0.3, 0.9, 1.0)

    def test_dict_round_trip(self):
        v = MarkerVector.from_values([0.1] * 8)
        assert MarkerVector.from_dict(v.as_dict()) == v

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            MarkerVector.from_values([math.nan] + [0.0] * 7)


class TestFuzzBounds:
    def test_random_strings_stay_in_unit_interval(self):
        rng = random.Random(20_240_817)
        alphabet = string.printable + "éü§¶ "
        for _ in range(500):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 300)))
            for value in extract_rule_based(text, LEX).as_tuple():
                assert 0.0 <= value <= 1.0


class TestMonotoneSaturation:
    @pytest.mark.parametrize(
        "scorer,phrase,divisor",
        [
            (score_criticism, "ablation study", 4),
            (score_balance, "that said", 3),
            (score_generic, "novel approach", 4),
        ],
    )
    def test_count_scores_monotone_and_saturating(self, scorer, phrase, divisor):
        previous = -1.0
        for count in range(divisor + 3):
            value = scorer((phrase + " ") * count, LEX)
            assert value >= previous
            previous = value
            if count >= divisor:
                assert value == 1.0
            else:
                assert value == pytest.approx(count / divisor)

    def test_structure_saturates_at_five_distinct(self):
        keywords = ("summary", "strengths", "weaknesses", "questions", "recommendation",
                    "limitations", "clarity")
        previous = -1.0
        for n in range(len(keywords)):
            text = "\n".join(f"{kw}: x" for kw in keywords[:n])
            value = score_structure(text, LEX)
            assert value >= previous
            previous = value
            assert value == (1.0 if n >= 5 else pytest.approx(n / 5))
