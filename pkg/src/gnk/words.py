"""Words in a free group, in run-length syllable form.

A word is a sequence of syllables ``(gen_index, exponent)`` with nonzero
exponents and no two adjacent syllables on the same generator.  Words are
always stored reduced in that sense; free reduction (cancelling ``g g^-1``)
falls out of the merge rule because merging can only ever produce a zero
exponent, which is dropped.

Composition convention, used everywhere downstream: words read left to
right, and evaluation applies the leftmost letter first.  So evaluating
``a b`` with images ``f, g`` yields "first f, then g".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Syllable = tuple[int, int]


@dataclass(frozen=True)
class GeneratorTable:
    """An ordered alphabet of generator names.

    Names must look like identifiers (letter first, then letters, digits,
    underscores) and be distinct.  The token ``1`` is reserved for the
    identity in the text form, which the first-character rule already
    guarantees.
    """

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("generator table needs at least one name")
        seen: set[str] = set()
        for name in self.names:
            if not name or not name[0].isalpha():
                raise ValueError(f"bad generator name {name!r}")
            if not all(ch.isalnum() or ch == "_" for ch in name):
                raise ValueError(f"bad generator name {name!r}")
            if name in seen:
                raise ValueError(f"duplicate generator name {name!r}")
            seen.add(name)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None


@dataclass(frozen=True)
class Word:
    """A reduced word over a generator table."""

    table: GeneratorTable
    syllables: tuple[Syllable, ...]

    def __post_init__(self) -> None:
        prev = -1
        for gen, exp in self.syllables:
            if not 0 <= gen < len(self.table):
                raise ValueError(f"generator index {gen} out of range")
            if exp == 0:
                raise ValueError("zero exponent in syllable")
            if gen == prev:
                raise ValueError("adjacent syllables on the same generator")
            prev = gen
        object.__setattr__(self, "syllables", tuple(self.syllables))

    def __mul__(self, other: "Word") -> "Word":
        return word_product(self, other)

    def __pow__(self, k: int) -> "Word":
        return word_power(self, k)

    def inverse(self) -> "Word":
        return word_inverse(self)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def mentions(self, gen: int) -> bool:
        return any(g == gen for g, _ in self.syllables)

    def length(self) -> int:
        """Letter count, with multiplicity."""
        return sum(abs(e) for _, e in self.syllables)

    def __iter__(self) -> Iterator[Syllable]:
        return iter(self.syllables)


def reduce(table: GeneratorTable, raw: Iterable[Syllable]) -> Word:
    """Merge a raw syllable stream into a reduced word."""
    stack: list[list[int]] = []
    for gen, exp in raw:
        if exp == 0:
            continue
        if stack and stack[-1][0] == gen:
            stack[-1][1] += exp
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([gen, exp])
    # The stack is reduced at every step: a pop can expose an earlier
    # syllable on the same generator only if something separated them,
    # and that something merged away, which the pop already handled.
    merged: list[Syllable] = []
    for gen, exp in stack:
        if merged and merged[-1][0] == gen:
            total = merged[-1][1] + exp
            merged.pop()
            if total:
                merged.append((gen, total))
        else:
            merged.append((gen, exp))
    return Word(table, tuple(merged))


def word_product(*words: Word) -> Word:
    if not words:
        raise ValueError("empty product needs an explicit table")
    table = words[0].table
    for w in words[1:]:
        if w.table != table:
            raise ValueError("generator-table mismatch")
    stream: list[Syllable] = []
    for w in words:
        stream.extend(w.syllables)
    return reduce(table, stream)


def word_inverse(w: Word) -> Word:
    return Word(w.table, tuple((g, -e) for g, e in reversed(w.syllables)))


def word_power(w: Word, k: int) -> Word:
    if k == 0:
        return Word(w.table, ())
    base = w if k > 0 else word_inverse(w)
    out = base
    for _ in range(abs(k) - 1):
        out = word_product(out, base)
    return out


def substitute(u: Word, gen: int, replacement: Word) -> Word:
    """Replace every occurrence of a generator by a word not mentioning it."""
    if replacement.table != u.table:
        raise ValueError("generator-table mismatch")
    if replacement.mentions(gen):
        raise ValueError("replacement mentions the substituted generator")
    stream: list[Syllable] = []
    for g, e in u.syllables:
        if g == gen:
            stream.extend(word_power(replacement, e).syllables)
        else:
            stream.append((g, e))
    return reduce(u.table, stream)


def generator_words(table: GeneratorTable) -> tuple[Word, ...]:
    return tuple(Word(table, ((i, 1),)) for i in range(len(table)))


def evaluate(w: Word, images: Sequence, group) -> object:
    """Image of a word under generator assignments, left to right.

    ``images[i]`` is the image of generator ``i``; ``group`` supplies
    ``identity``, ``mul`` and ``power``.
    """
    if len(images) != len(w.table):
        raise ValueError("one image per generator required")
    acc = group.identity
    for gen, exp in w.syllables:
        acc = group.mul(acc, group.power(images[gen], exp))
    return acc


def format_word(w: Word) -> str:
    if not w.syllables:
        return "1"
    parts = []
    for gen, exp in w.syllables:
        name = w.table.names[gen]
        parts.append(name if exp == 1 else f"{name}^{exp}")
    return " ".join(parts)


def parse_word(text: str, table: GeneratorTable) -> Word:
    tokens = text.split()
    if not tokens or tokens == ["1"]:
        return Word(table, ())
    stream: list[Syllable] = []
    for tok in tokens:
        name, sep, tail = tok.partition("^")
        if sep and not tail:
            raise ValueError(f"bad token {tok!r}")
        try:
            exp = int(tail) if sep else 1
        except ValueError:
            raise ValueError(f"bad exponent in token {tok!r}") from None
        stream.append((table.index(name), exp))
    return reduce(table, stream)
