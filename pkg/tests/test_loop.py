import json
import random
from pathlib import Path

import pytest

from tutorloop import synth
from tutorloop.dataset import OutOfDistribution, build_setting
from tutorloop.errors import ConfigError, EmptyBookError
from tutorloop.loop import (
    TutorConfig,
    _IdAllocator,
    assess,
    build_book,
    compare_augmentation,
    expand,
    initial_augment,
    run,
    sweep_lambda,
)
from tutorloop.problem import fingerprint
from tutorloop.student import RetrievalStudent, SolveResult
from tutorloop.teacher import MockTeacher

GOLDEN = Path(__file__).with_name("data") / "golden_lambda0_log.jsonl"


class AbstainStudent:
    def reset(self, seed):
        pass

    def train(self, problems, passes=1):
        pass

    def solve(self, problem):
        return SolveResult(abstained=True)


def small_setting(seed=0):
    train, test = synth.make_ood_split(4, 3, seed=seed)
    return build_setting(OutOfDistribution(train=[train], test=test))[0]


def small_cfg(**overrides):
    base = dict(
        lambda_=0.0, m=0, n=1, k_gen=2, zero_few_split=(2, 0),
        epochs=6, assess_epochs=(2, 4), seed=123,
    )
    base.update(overrides)
    return TutorConfig(**base)


class TestConfig:
    def test_defaults_validate(self):
        TutorConfig().validate()

    @pytest.mark.parametrize(
        "overrides",
        [
            {"lambda_": 1.5},
            {"m": -1},
            {"k_gen": 0},
            {"zero_few_split": (1, 2)},
            {"assess_epochs": (0,)},
            {"assess_epochs": (99,)},
            {"augmentation_mode": "sometimes"},
        ],
    )
    def test_rejects_bad_values(self, overrides):
        cfg = TutorConfig(**overrides)
        with pytest.raises(ConfigError):
            cfg.validate()


class TestInitialAugment:
    def test_m_zero_is_identity(self):
        setting = small_setting()
        accepted, report, requests = initial_augment(
            setting.train, small_cfg(m=0), MockTeacher(1), set(), _IdAllocator(), 4
        )
        assert accepted == [] and report.total == 0 and requests == 0

    def test_m_two_bound_and_distinct(self):
        setting = small_setting()
        cfg = small_cfg(m=2)
        accepted, report, _ = initial_augment(
            setting.train, cfg, MockTeacher(1), set(), _IdAllocator(), 4
        )
        assert len(accepted) <= 2 * len(setting.train)
        fps = {fingerprint(p) for p in accepted}
        assert len(fps) == len(accepted)
        assert not fps & {fingerprint(p) for p in setting.train}


class TestBuildBook:
    def test_n_zero_gives_empty_book(self):
        setting = small_setting()
        book, report, _ = build_book(setting.train, small_cfg(n=0), MockTeacher(1), _IdAllocator(), 4)
        assert len(book) == 0 and report.total == 0

    def test_disjoint_from_train_and_deterministic(self):
        setting = small_setting()
        cfg = small_cfg(n=1)
        book1, _, _ = build_book(setting.train, cfg, MockTeacher(5), _IdAllocator(), 4)
        book2, _, _ = build_book(setting.train, cfg, MockTeacher(5), _IdAllocator(), 4)
        train_fps = {fingerprint(p) for p in setting.train}
        book_fps = [fingerprint(e.problem) for e in book1.entries]
        assert not set(book_fps) & train_fps
        assert len(set(book_fps)) == len(book_fps)
        assert [(e.problem.mapped_text, e.source_id, e.mode) for e in book1.entries] == [
            (e.problem.mapped_text, e.source_id, e.mode) for e in book2.entries
        ]

    def test_both_modes_present(self):
        setting = small_setting()
        book, _, _ = build_book(setting.train, small_cfg(n=1), MockTeacher(5), _IdAllocator(), 4)
        modes = {e.mode for e in book.entries}
        assert len(modes) == 2


class TestAssess:
    def test_abstaining_student_fails_everything(self):
        setting = small_setting()
        book, _, _ = build_book(setting.train, small_cfg(n=1), MockTeacher(5), _IdAllocator(), 4)
        accuracy, failures = assess(AbstainStudent(), book)
        assert accuracy == 0.0
        assert [e.problem.id for e in failures] == [e.problem.id for e in book.entries]

    def test_trained_student_mixed(self):
        setting = small_setting()
        book, _, _ = build_book(setting.train, small_cfg(n=1), MockTeacher(5), _IdAllocator(), 4)
        student = RetrievalStudent()
        student.reset(0)
        student.train(setting.train)
        accuracy, failures = assess(student, book)
        assert accuracy == pytest.approx(1 - len(failures) / len(book))


class TestExpandLambdaSemantics:
    def _prepared(self, lambda_):
        setting = small_setting()
        cfg = small_cfg(lambda_=lambda_)
        teacher = MockTeacher(cfg.seed)
        book, _, _ = build_book(setting.train, cfg, teacher, _IdAllocator(), 4)
        _, failures = assess(AbstainStudent(), book)  # every entry fails
        return setting, cfg, teacher, book, failures

    def test_lambda_one_targets_every_failure(self):
        setting, cfg, teacher, book, failures = self._prepared(1.0)
        rng = random.Random(cfg.seed)
        _, _, events, _ = expand(
            setting.train, failures, book, cfg, teacher, rng, set(), _IdAllocator(), 4, epoch=2
        )
        failure_ids = {e.problem.id for e in failures}
        assert events and all(ev["targeted"] for ev in events)
        assert all(ev["source_id"] in failure_ids for ev in events)
        assert all(ev["source_id"] == ev["failure_id"] for ev in events)

    def test_lambda_zero_follows_uniform_stream(self):
        setting, cfg, teacher, book, failures = self._prepared(0.0)
        rng = random.Random(cfg.seed)
        _, _, events, _ = expand(
            setting.train, failures, book, cfg, teacher, rng, set(), _IdAllocator(), 4, epoch=2
        )
        # independent replay of the seeded stream
        replay = random.Random(cfg.seed)
        for ev in events:
            p = replay.random()
            assert ev["p"] == p
            if p <= 0.0:
                assert ev["targeted"]
            else:
                index = replay.randrange(len(book.entries))
                assert ev["source_id"] == book.entries[index].problem.id

    def test_lambda_half_targeted_count_matches_stream(self):
        setting, cfg, teacher, book, failures = self._prepared(0.5)
        rng = random.Random(cfg.seed)
        _, _, events, _ = expand(
            setting.train, failures, book, cfg, teacher, rng, set(), _IdAllocator(), 4, epoch=2
        )
        targeted = sum(1 for ev in events if ev["targeted"])
        assert targeted == sum(1 for ev in events if ev["p"] <= 0.5)
        assert 0 < targeted < len(events)

    def test_cap_stops_early(self):
        setting, cfg, teacher, book, failures = self._prepared(1.0)
        cfg.max_new_per_assessment = 3
        rng = random.Random(cfg.seed)
        accepted, _, events, _ = expand(
            setting.train, failures, book, cfg, teacher, rng, set(), _IdAllocator(), 4, epoch=2
        )
        assert len(accepted) == 3
        assert len(events) < len(failures)


class TestGoldenLambdaZero:
    def test_expansion_log_matches_golden_file(self):
        setting = small_setting()
        cfg = small_cfg(lambda_=0.0)
        report = run(cfg, setting, RetrievalStudent(), MockTeacher(cfg.seed))
        logged = "".join(
            json.dumps(event, sort_keys=True) + "\n" for event in report.expansion_log
        )
        assert logged.encode() == GOLDEN.read_bytes()


class TestRun:
    def test_no_assessments(self):
        setting = small_setting()
        cfg = small_cfg(epochs=1, assess_epochs=())
        report = run(cfg, setting, RetrievalStudent(), MockTeacher(cfg.seed))
        assert report.assessments == []
        assert report.final_train_size == len(setting.train)
        assert [size for _, size in report.run["growth_curve"]] == [len(setting.train)]

    def test_progressive_record_count_and_growth(self):
        setting = small_setting()
        cfg = small_cfg(lambda_=1.0)
        report = run(cfg, setting, RetrievalStudent(), MockTeacher(cfg.seed))
        assert len(report.assessments) == len(cfg.assess_epochs)
        sizes = [record["train_set_size_after"] for record in report.assessments]
        assert sizes == sorted(sizes)
        curve_sizes = [row[1] for row in report.run["growth_curve"]]
        assert curve_sizes == sorted(curve_sizes)
        assert len(report.run["curve"]) == cfg.epochs

    def test_one_time_matches_progressive_size(self):
        setting = small_setting()
        cfg = small_cfg(lambda_=1.0)
        progressive, one_time = compare_augmentation(
            cfg, setting, RetrievalStudent, lambda: MockTeacher(cfg.seed)
        )
        assert one_time.final_train_size == progressive.final_train_size
        assert one_time.run["one_time_fill"]["target_size"] == progressive.final_train_size
        assert one_time.expansion_log == []
        assert len(one_time.assessments) == len(cfg.assess_epochs)
        for record in one_time.assessments:
            assert record["generated_accepted"] == 0

    def test_expansion_respects_excluded_fingerprints(self):
        # a fingerprint placed on the exclusion list (the test-set guard)
        # never comes back out of expand, even if the teacher generates it
        setting = small_setting()
        cfg = small_cfg(lambda_=1.0)
        teacher = MockTeacher(cfg.seed)
        book, _, _ = build_book(setting.train, cfg, teacher, _IdAllocator(), 4)
        failures = list(book.entries)
        first_pass, _, _, _ = expand(
            setting.train, failures, book, cfg, teacher,
            random.Random(cfg.seed), set(), _IdAllocator(), 4, epoch=1,
        )
        assert first_pass
        blocked = {fingerprint(first_pass[0])}
        second_pass, _, _, _ = expand(
            setting.train, failures, book, cfg, teacher,
            random.Random(cfg.seed), blocked, _IdAllocator(), 4, epoch=1,
        )
        assert blocked.isdisjoint({fingerprint(p) for p in second_pass})
        assert len(second_pass) == len(first_pass) - 1

    def test_empty_book_error_when_teacher_yields_nothing(self):
        class SilentTeacher:
            def generate(self, source, mode, count):
                return []

        setting = small_setting()
        with pytest.raises(EmptyBookError):
            build_book(setting.train, small_cfg(n=1), SilentTeacher(), _IdAllocator(), 4)

    def test_deterministic_manifest_sections(self):
        setting = small_setting()
        cfg = small_cfg(lambda_=0.5, m=1)
        a = run(cfg, setting, RetrievalStudent(), MockTeacher(cfg.seed))
        b = run(cfg, setting, RetrievalStudent(), MockTeacher(cfg.seed))
        assert a.run_section_bytes() == b.run_section_bytes()

    def test_empty_inputs_rejected(self):
        setting = small_setting()
        with pytest.raises(ConfigError):
            run(small_cfg(), type(setting)("x", [], setting.test), RetrievalStudent(), MockTeacher(1))

    def test_error_mid_run_writes_incomplete_manifest(self, tmp_path):
        class ExplodingStudent(RetrievalStudent):
            def __init__(self):
                super().__init__()
                self.epochs_seen = 0

            def train(self, problems, passes=1):
                self.epochs_seen += 1
                if self.epochs_seen == 3:
                    raise RuntimeError("solver crashed")
                super().train(problems, passes)

        setting = small_setting()
        cfg = small_cfg(lambda_=1.0)
        with pytest.raises(RuntimeError):
            run(cfg, setting, ExplodingStudent(), MockTeacher(cfg.seed), str(tmp_path))
        from tutorloop.report import RunReport

        partial = RunReport.load(tmp_path / f"manifest-{setting.name}.json")
        assert partial.run["incomplete"] is True
        assert partial.run["book_size"] > 0  # progress up to the crash is kept


class TestSweep:
    def test_sweep_lambda_rows(self):
        setting = small_setting()
        cfg = small_cfg(epochs=4, assess_epochs=(2,))
        results = sweep_lambda(
            cfg, [0.0, 0.5, 1.0], setting, RetrievalStudent, lambda: MockTeacher(cfg.seed)
        )
        assert [value for value, _ in results] == [0.0, 0.5, 1.0]
        digests = {r.run["corpus_digests"]["train"] for _, r in results}
        assert len(digests) == 1  # identical corpora across the sweep

    def test_sweep_empty(self):
        setting = small_setting()
        assert sweep_lambda(small_cfg(), [], setting, RetrievalStudent, lambda: MockTeacher(1)) == []
