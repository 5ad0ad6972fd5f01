import pytest

from tutorloop import expr, problem, synth
from tutorloop.problem import fingerprint, map_numbers
from tutorloop.teacher import GenerationMode, MockTeacher, mock_generate
from tutorloop.teacher.base import gather_candidates
from tutorloop.textbank import split_question

Z = GenerationMode.ZERO_SHOT_SIMILAR
F = GenerationMode.FEW_SHOT_VARIANT


def _map(candidate):
    return map_numbers(candidate.text, candidate.equation)


@pytest.fixture(scope="module")
def sources():
    return synth.make_full_corpus(3, seed=21).problems


class TestModeContracts:
    def test_zero_shot_preserves_template_and_changes_text(self, sources):
        for source in sources:
            for candidate in mock_generate(source, Z, 2, seed=7):
                mapped = _map(candidate)
                assert expr.canonical_template(mapped.template) == expr.canonical_template(
                    source.template
                )
                assert fingerprint(mapped).text_key != fingerprint(source).text_key

    def test_zero_shot_on_unknown_class_keeps_template(self):
        source = map_numbers(
            "A pond gains 3 ducks, then 4 geese arrive, and 2 swans glide in twice.",
            "(3 + 4) * 2",
            problem_id="odd-1",
        )
        for candidate in mock_generate(source, Z, 3, seed=5):
            mapped = _map(candidate)
            assert expr.canonical_template(mapped.template) == expr.canonical_template(
                source.template
            )
            assert fingerprint(mapped).text_key != fingerprint(source).text_key

    def test_few_shot_changes_template_or_question(self, sources):
        for source in sources:
            _, source_question = split_question(source.mapped_text)
            for candidate in mock_generate(source, F, 3, seed=7):
                mapped = _map(candidate)
                template_changed = expr.canonical_template(mapped.template) != expr.canonical_template(
                    source.template
                )
                _, question = split_question(candidate.text)
                assert template_changed or question != source_question

    def test_candidate_count_and_payloads(self, sources):
        candidates = mock_generate(sources[0], Z, 4, seed=1)
        assert len(candidates) == 4
        assert all(c.raw_payload for c in candidates)
        assert all(c.source_id == sources[0].id for c in candidates)

    def test_batch_candidates_mutually_distinct(self, sources):
        for source in sources:
            for mode in (Z, F):
                candidates = mock_generate(source, mode, 4, seed=3)
                keys = {fingerprint(_map(c)).text_key for c in candidates}
                assert len(keys) == len(candidates)


class TestDeterminism:
    def test_pure_function_of_inputs(self, sources):
        a = mock_generate(sources[1], Z, 3, seed=42)
        b = mock_generate(sources[1], Z, 3, seed=42)
        assert [(c.text, c.equation) for c in a] == [(c.text, c.equation) for c in b]

    def test_seed_changes_output(self, sources):
        a = mock_generate(sources[1], Z, 3, seed=1)
        b = mock_generate(sources[1], Z, 3, seed=2)
        assert [(c.text, c.equation) for c in a] != [(c.text, c.equation) for c in b]

    def test_call_order_independent(self, sources):
        teacher = MockTeacher(seed=11)
        forward = [teacher.generate(s, Z, 2) for s in sources]
        teacher2 = MockTeacher(seed=11)
        backward = [teacher2.generate(s, Z, 2) for s in reversed(sources)]
        assert [(c.text, c.equation) for batch in forward for c in batch] == [
            (c.text, c.equation) for batch in reversed(backward) for c in batch
        ]

    def test_gather_parallel_matches_sequential(self, sources):
        teacher = MockTeacher(seed=13)
        requests = [(s, Z, 2) for s in sources] + [(s, F, 2) for s in sources]
        sequential = gather_candidates(requests, teacher, parallel=1)
        parallel = gather_candidates(requests, teacher, parallel=4)
        assert [(c.text, c.equation) for c in sequential] == [
            (c.text, c.equation) for c in parallel
        ]


class TestMalformedInjection:
    def test_exact_schedule(self, sources):
        teacher = MockTeacher(seed=5, malformed_rate=0.3)
        injected = 0
        for i in range(1000):
            batch = teacher.generate(sources[i % len(sources)], Z, 1)
            injected += sum(1 for c in batch if c.raw_payload.startswith("malformed:"))
        assert injected == 300

    def test_rate_zero_injects_nothing(self, sources):
        teacher = MockTeacher(seed=5)
        for i in range(50):
            for candidate in teacher.generate(sources[i % len(sources)], F, 2):
                assert not candidate.raw_payload.startswith("malformed:")
