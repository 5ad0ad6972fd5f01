"""Seeded synthetic corpora over the text-bank families.

Used by the test harnesses (and the bundled sample corpus) to get corpora
with known family structure: pick a family, a frame, a name, a noun and
family-appropriate values, render raw text plus a numeric equation, then
number-map the result.  Everything is deterministic under the seed.
"""

from __future__ import annotations

import random

from . import textbank
from .dataset import Corpus
from .problem import MappedProblem, fingerprint, map_numbers
from .textbank import FAMILIES, FAMILY_BY_KEY, HELD_OUT_FAMILY_KEYS, NAMES, SEEN_FAMILY_KEYS


def make_problem(
    family_key: str,
    rng: random.Random,
    problem_id: str,
    source_tag: str = "synthetic",
) -> MappedProblem:
    family = FAMILY_BY_KEY[family_key]
    frame_idx = rng.randrange(len(family.frames))
    name = rng.choice(NAMES)
    noun = rng.choice(family.nouns)
    values = textbank.sample_values(family_key, rng)
    text = textbank.render_text(family, frame_idx, name, noun, values)
    equation = textbank.render_numeric_equation(textbank.family_template(family), values)
    return map_numbers(text, equation, problem_id=problem_id, source_tag=source_tag)


def make_family_corpus(
    family_keys: tuple[str, ...],
    per_family: int,
    seed: int,
    name: str = "synthetic",
    id_prefix: str = "s",
) -> Corpus:
    """per_family problems from each family, fingerprint-distinct."""
    rng = random.Random(seed)
    problems: list[MappedProblem] = []
    seen = set()
    counter = 0
    for key in family_keys:
        made = 0
        while made < per_family:
            counter += 1
            problem = make_problem(key, rng, f"{id_prefix}-{counter:04d}", name)
            fp = fingerprint(problem)
            if fp in seen:
                continue  # rare collision; redraw with advanced rng state
            seen.add(fp)
            problems.append(problem)
            made += 1
    return Corpus(name, problems)


def make_ood_split(
    per_family_train: int = 8,
    per_family_test: int = 5,
    seed: int = 0,
) -> tuple[Corpus, Corpus]:
    """Out-of-distribution pair: training families vs held-out families.

    The held-out families are exactly the flip-image of the training ones,
    so an exercise book built from the training corpus can reach them only
    through operator-flip variants.
    """
    train = make_family_corpus(
        SEEN_FAMILY_KEYS, per_family_train, seed, name="synthetic-train", id_prefix="tr"
    )
    test = make_family_corpus(
        HELD_OUT_FAMILY_KEYS, per_family_test, seed + 1, name="synthetic-test", id_prefix="te"
    )
    return train, test


def make_full_corpus(per_family: int, seed: int, name: str = "synthetic-full") -> Corpus:
    return make_family_corpus(
        tuple(f.key for f in FAMILIES), per_family, seed, name=name, id_prefix="s"
    )
