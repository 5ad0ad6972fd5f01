import pytest

from tutorloop import synth
from tutorloop.problem import fingerprint, map_numbers, validate_problem
from tutorloop.teacher import GenerationMode, MockTeacher, filter_candidates
from tutorloop.teacher.base import Candidate
from tutorloop.teacher.filtering import FilterVerdict, screen_batch

Z = GenerationMode.ZERO_SHOT_SIMILAR


def cand(text, equation):
    return Candidate(text, equation, Z, "src", raw_payload="{}")


class TestRejectionReasons:
    def test_placeholder_out_of_range(self):
        accepted, report = filter_candidates([cand("Only 7 boxes in the attic.", "N1 + N3")], set(), 4)
        assert not accepted
        assert report.rejected_by_reason == {"PlaceholderOutOfRange": 1}

    def test_no_quantities(self):
        _, report = filter_candidates([cand("No numerals in this text.", "1 + 1")], set(), 4)
        assert report.rejected_by_reason == {"NoQuantities": 1}

    def test_unparseable(self):
        _, report = filter_candidates([cand("Count 3 and 4 things.", "3 + + 4")], set(), 4)
        assert report.rejected_by_reason == {"UnparseableEquation": 1}

    def test_evaluation_error(self):
        _, report = filter_candidates([cand("Split 6 among 0 kids.", "6 / 0")], set(), 4)
        assert report.rejected_by_reason == {"EvaluationError": 1}

    def test_empty_text(self):
        _, report = filter_candidates([cand("   ", "3 + 4")], set(), 4)
        assert report.rejected_by_reason == {"EmptyText": 1}

    def test_too_long(self):
        text = "Count 3 things " + "again and " * 120
        _, report = filter_candidates([cand(text, "3")], set(), 4)
        assert report.rejected_by_reason == {"TooLong": 1}

    def test_too_many_quantities(self):
        text = "He saw 1 bird, 2 cats, 3 dogs, 4 cows and 5 pigs."
        _, report = filter_candidates([cand(text, "1 + 2")], set(), 4)
        assert report.rejected_by_reason == {"PlaceholderOutOfRange": 1}

    def test_duplicate_against_existing(self):
        existing_problem = map_numbers("Tom has 3 apples and buys 2 more. How many?", "3 + 2")
        accepted, report = filter_candidates(
            [cand("Tom has 9 apples and buys 4 more. How many?", "9 + 4")],
            {fingerprint(existing_problem)},
            4,
        )
        assert report.rejected_by_reason == {"Duplicate": 1}

    def test_duplicate_within_batch(self):
        batch = [
            cand("Tom has 3 apples and buys 2 more. How many?", "3 + 2"),
            cand("Tom has 8 apples and buys 1 more. How many?", "8 + 1"),
        ]
        accepted, report = filter_candidates(batch, set(), 4)
        assert len(accepted) == 1
        assert report.rejected_by_reason == {"Duplicate": 1}


class TestAcceptance:
    def test_accepted_problems_valid_and_distinct(self):
        sources = synth.make_full_corpus(2, seed=31).problems
        teacher = MockTeacher(seed=9)
        candidates = []
        for source in sources:
            candidates.extend(teacher.generate(source, Z, 2))
            candidates.extend(teacher.generate(source, GenerationMode.FEW_SHOT_VARIANT, 2))
        existing = {fingerprint(p) for p in sources}
        accepted, report = filter_candidates(candidates, existing, 4, id_prefix="t")
        assert report.total == len(candidates)
        fps = set()
        for problem in accepted:
            validate_problem(problem)  # raises on any invariant break
            fp = fingerprint(problem)
            assert fp not in existing
            assert fp not in fps
            fps.add(fp)
        assert len({p.id for p in accepted}) == len(accepted)

    def test_verdict_exclusivity(self):
        with pytest.raises(ValueError):
            FilterVerdict(cand("x 3", "3"))

    def test_screen_batch_preserves_candidate_linkage(self):
        batch = [cand("Tom has 3 apples and buys 2 more. How many?", "3 + 2")]
        verdicts, _ = screen_batch(batch, set(), 4)
        assert verdicts[0].candidate is batch[0]
        assert verdicts[0].accepted is not None

    def test_filter_rate(self):
        batch = [
            cand("Tom has 3 apples and buys 2 more. How many?", "3 + 2"),
            cand("", "3"),
            cand("No numbers.", "3"),
            cand("Max finds 4 coins and 1 shell.", "4 + 1"),
        ]
        _, report = filter_candidates(batch, set(), 4)
        assert report.total == 4 and report.accepted == 2
        assert report.rate == pytest.approx(0.5)
