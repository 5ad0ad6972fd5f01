"""Surface-text bank: template families, paraphrase frames, word pools.

Each family pairs an equation template with several narrative frames.  A
frame mentions its values strictly in placeholder order ({v1} before {v2}
before {v3}) so that re-mapping the rendered text and equation reproduces the
family template exactly.  Every frame of a family repeats that family's
anchor tokens ("gains ... basket" vs "gave ... away ... left") and draws its
object noun from a family-scoped pool, while person names are shared across
families; a term-overlap solver can therefore tell families apart but not
individual problems.

The same bank backs the synthetic corpora used in tests and the mock
teacher's paraphrase generation, keyed by canonical template.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import expr

NAMES = [
    "Tom", "Maya", "Liam", "Ava", "Noah", "Zoe", "Eli", "Ruth",
    "Omar", "Ivy", "Jack", "Nina", "Theo", "Lily", "Max", "Sara",
]

CONTEXT_PREFIXES = [
    "At the market,",
    "During recess,",
    "One rainy morning,",
    "After the trip,",
    "Before dinner,",
    "On the weekend,",
    "Down at the park,",
    "Later that week,",
    "Just before noon,",
    "Out in the yard,",
    "Right after class,",
    "Early on Sunday,",
]


@dataclass(frozen=True)
class Family:
    key: str
    equation: str  # template over N1..Nk
    frames: tuple[str, ...]  # format strings over {name}, {noun}, {v1}..{vk}
    nouns: tuple[str, ...]  # family-specific objects; pools are disjoint


# anchors never recur in another family's frames
FAMILIES: tuple[Family, ...] = (
    Family(
        "add2",
        "N1 + N2",
        (
            "{name} has {v1} {noun} in a basket and gains {v2} more. How many {noun} are in the basket now?",
            "{name} keeps {v1} {noun} in a basket and then gains another {v2}. How many {noun} are in the basket now?",
            "A basket belonging to {name} holds {v1} {noun}, and {name} gains {v2} extra. How many {noun} are in the basket now?",
        ),
        ("apples", "peaches", "acorns", "shells"),
    ),
    Family(
        "sub2",
        "N1 - N2",
        (
            "{name} had {v1} {noun} and gave {v2} of them away. How many {noun} are left?",
            "Out of {v1} {noun}, {name} gave {v2} away to the class. How many {noun} are left?",
            "{name} owned {v1} {noun} but gave {v2} away at the fair. How many {noun} are left?",
        ),
        ("marbles", "stickers", "buttons", "coins"),
    ),
    Family(
        "add3",
        "N1 + N2 + N3",
        (
            "{name} harvested {v1} {noun} on Monday, {v2} on Tuesday, and {v3} on Wednesday. How many {noun} were harvested altogether?",
            "During the harvest, {name} gathered {v1} {noun}, then {v2}, then {v3}. How many {noun} were harvested altogether?",
            "{name}'s harvest came to {v1} {noun} in the morning, {v2} at noon, and {v3} at night. How many {noun} were harvested altogether?",
        ),
        ("beans", "plums", "carrots", "tomatoes"),
    ),
    Family(
        "sub3",
        "N1 - N2 - N3",
        (
            "{name} had {v1} {noun}, used up {v2} for a project, and then used up {v3} more. How many {noun} does {name} still have?",
            "From a box of {v1} {noun}, {name} used up {v2} on a project and later used up {v3}. How many {noun} are still in the box?",
            "{name} started the project with {v1} {noun}, used up {v2}, and used up another {v3}. How many {noun} are still around?",
        ),
        ("beads", "ribbons", "tiles", "pins"),
    ),
    Family(
        "muladd",
        "N1 * N2 + N3",
        (
            "{name} buys {v1} packs with {v2} {noun} in each pack, plus {v3} spare {noun}. How many {noun} in total?",
            "There are {v1} packs of {v2} {noun} each, and {name} adds {v3} spare {noun}. How many {noun} in total?",
            "{name} opens {v1} packs holding {v2} {noun} apiece and finds {v3} spare {noun} as well. How many {noun} in total?",
        ),
        ("pencils", "crayons", "erasers", "stamps"),
    ),
    Family(
        "mulsub",
        "N1 * N2 - N3",
        (
            "{name} stacks {v1} crates with {v2} {noun} per crate, but {v3} {noun} are broken. How many unbroken {noun} does {name} keep?",
            "A truck brings {v1} crates of {v2} {noun} each to {name}, and {v3} {noun} arrive broken. How many unbroken {noun} are there?",
            "{name} fills {v1} crates with {v2} {noun} apiece, then finds {v3} broken {noun}. How many unbroken {noun} does {name} have?",
        ),
        ("bottles", "jars", "mugs", "plates"),
    ),
    Family(
        "adddiv",
        "(N1 + N2) / N3",
        (
            "{name} pools {v1} {noun} with {v2} brought by a friend, splitting them fairly among {v3} friends. How many {noun} does each friend get?",
            "Two piles of {v1} and {v2} {noun} are pooled by {name} and shared fairly among {v3} friends. How many {noun} per friend?",
            "{name} pools together {v1} {noun} and {v2} {noun}, then hands them out fairly to {v3} friends. How many {noun} for each friend?",
        ),
        ("tokens", "cards", "sweets", "grapes"),
    ),
    Family(
        "subdiv",
        "(N1 - N2) / N3",
        (
            "{name} has {v1} {noun}, sets {v2} aside, and deals the remainder equally onto {v3} tables. How many {noun} per table?",
            "From {v1} {noun}, {name} puts {v2} aside and splits the remainder equally across {v3} tables. How many {noun} per table?",
            "{name} takes {v1} {noun}, leaves {v2} aside, and divides the remainder equally among {v3} tables. How many {noun} per table?",
        ),
        ("napkins", "forks", "cups", "spoons"),
    ),
    Family(
        "mul2",
        "N1 * N2",
        (
            "{name}'s garden has {v1} rows with {v2} {noun} in each row. How many {noun} are in the garden?",
            "In the garden, {name} plants {v1} rows of {v2} {noun}. How many {noun} are in the garden?",
            "A garden kept by {name} grows {v1} rows, each row with {v2} {noun}. How many {noun} does the garden hold?",
        ),
        ("seeds", "sprouts", "tulips", "herbs"),
    ),
    Family(
        "div2",
        "N1 / N2",
        (
            "{name} deals {v1} {noun} evenly to {v2} classmates. How many {noun} does each classmate get?",
            "A stack of {v1} {noun} is dealt evenly by {name} to {v2} classmates. How many {noun} per classmate?",
            "{name} deals out {v1} {noun} evenly among {v2} classmates. How many {noun} for each classmate?",
        ),
        ("pebbles", "blocks", "magnets", "chalks"),
    ),
)

FAMILY_BY_KEY = {f.key: f for f in FAMILIES}

# union pool, used for keyword substitution on texts of unknown class
NOUNS = [noun for family in FAMILIES for noun in family.nouns]

# families whose flipped counterpart is another bank family
SEEN_FAMILY_KEYS = ("add2", "add3", "muladd", "adddiv", "mul2", "div2")
HELD_OUT_FAMILY_KEYS = ("sub2", "sub3", "mulsub", "subdiv")


def family_template(family: Family) -> expr.Node:
    return expr.parse_equation(family.equation)


# canonical template string -> family, for paraphrase lookup
CANONICAL_TO_FAMILY: dict[str, Family] = {
    expr.canonical_template(family_template(f)): f for f in FAMILIES
}


def sample_values(key: str, rng: random.Random) -> tuple[int, ...]:
    """Family-appropriate integer values (positive answers, exact divisions)."""
    if key == "add2":
        return (rng.randint(3, 30), rng.randint(2, 20))
    if key == "sub2":
        v1 = rng.randint(10, 40)
        return (v1, rng.randint(2, v1 - 1))
    if key == "add3":
        return (rng.randint(2, 20), rng.randint(2, 20), rng.randint(2, 20))
    if key == "sub3":
        v2, v3 = rng.randint(2, 12), rng.randint(2, 12)
        return (v2 + v3 + rng.randint(1, 20), v2, v3)
    if key == "muladd":
        return (rng.randint(2, 9), rng.randint(2, 9), rng.randint(2, 9))
    if key == "mulsub":
        v1, v2 = rng.randint(2, 9), rng.randint(3, 9)
        return (v1, v2, rng.randint(2, v1 * v2 - 1))
    if key == "adddiv":
        v3 = rng.randint(2, 6)
        total = v3 * rng.randint(2, 9)
        v1 = rng.randint(1, total - 1)
        return (v1, total - v1, v3)
    if key == "subdiv":
        v3 = rng.randint(2, 6)
        rest = v3 * rng.randint(2, 9)
        v2 = rng.randint(2, 12)
        return (rest + v2, v2, v3)
    if key == "mul2":
        return (rng.randint(2, 12), rng.randint(2, 12))
    if key == "div2":
        v2 = rng.randint(2, 9)
        return (v2 * rng.randint(2, 12), v2)
    raise KeyError(key)


def render_text(family: Family, frame_idx: int, name: str, noun: str, values: tuple) -> str:
    frame = family.frames[frame_idx % len(family.frames)]
    slots = {"name": name, "noun": noun}
    for i, v in enumerate(values):
        slots[f"v{i + 1}"] = expr.format_value(Fraction(v))
    return frame.format(**slots)


def render_numeric_equation(template: expr.Node, values: tuple) -> str:
    """Instantiate placeholders with concrete numbers, pretty-printed."""
    bindings = {i + 1: Fraction(v) for i, v in enumerate(values)}
    return expr.to_pretty_infix(expr.substitute_values(template, bindings))


def split_question(text: str) -> tuple[str, str]:
    """Split off the final question sentence; returns (context, question)."""
    idx = text.rfind("?")
    if idx < 0:
        return text, ""
    # question starts after the previous sentence terminator
    start = max(text.rfind(".", 0, idx), text.rfind("!", 0, idx), text.rfind("?", 0, idx))
    return text[: start + 1].strip(), text[start + 1 : idx + 1].strip()
