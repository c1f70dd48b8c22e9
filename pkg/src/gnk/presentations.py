"""Finite presentations of generalized knot groups.

A crossing with over-arc y carries the relation ``x = y^n z y^-n`` between
the two under-arcs, where for a positive crossing x is the incoming
under-arc and z the outgoing one, and for a negative crossing the roles
swap.  At n = 1 this is the usual Wirtinger relation.

Relators are stored cyclically reduced and canonicalized: among all
rotations of the relator and of its inverse we keep the lexicographically
least syllable tuple.  Two relators that present the same cyclic word
therefore compare equal, which makes presentation equality a multiset
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .words import (
    GeneratorTable,
    Word,
    format_word,
    parse_word,
    reduce,
    word_inverse,
    word_product,
)

SIGNS = (1, -1)


@dataclass(frozen=True)
class KnotDiagram:
    """Arcs numbered 0..arc_count-1; crossings as (sign, over, in, out).

    When crossings are present, every arc must appear exactly once as an
    incoming under-arc and exactly once as an outgoing one; that is what
    closing up the strands means combinatorially.
    """

    arc_count: int
    crossings: tuple[tuple[int, int, int, int], ...]

    def __post_init__(self) -> None:
        if self.arc_count < 1:
            raise ValueError("need at least one arc")
        ins: list[int] = []
        outs: list[int] = []
        for sign, over, under_in, under_out in self.crossings:
            if sign not in SIGNS:
                raise ValueError(f"crossing sign must be +1 or -1, got {sign}")
            for arc in (over, under_in, under_out):
                if not 0 <= arc < self.arc_count:
                    raise ValueError(f"arc {arc} out of range")
            ins.append(under_in)
            outs.append(under_out)
        if self.crossings:
            want = list(range(self.arc_count))
            if sorted(ins) != want or sorted(outs) != want:
                raise ValueError("each arc must pass under exactly once")


def cyclic_reduce(w: Word) -> Word:
    syl = list(w.syllables)
    while len(syl) >= 2 and syl[0][0] == syl[-1][0]:
        gen, head = syl[0]
        tail = syl[-1][1]
        mid = syl[1:-1]
        syl = ([(gen, head + tail)] if head + tail else []) + mid
    return Word(w.table, tuple(syl))


def canonical_relator(w: Word) -> Word:
    """Least rotation of the cyclically reduced relator or its inverse."""
    w = cyclic_reduce(w)
    letters: list[tuple[int, int]] = []
    for gen, exp in w.syllables:
        step = 1 if exp > 0 else -1
        letters.extend([(gen, step)] * abs(exp))
    if not letters:
        return w
    flipped = [(g, -s) for g, s in reversed(letters)]
    best: tuple | None = None
    for base in (letters, flipped):
        for r in range(len(base)):
            cand = reduce(w.table, base[r:] + base[:r]).syllables
            if best is None or cand < best:
                best = cand
    return Word(w.table, best)


def equality_relator(lhs: Word, rhs: Word) -> Word:
    """Relator expressing lhs = rhs."""
    return canonical_relator(word_product(lhs, word_inverse(rhs)))


@dataclass(frozen=True, eq=False)
class Presentation:
    """Generators, canonicalized relators, and the twist level n.

    Relators keep their construction order; equality and hashing compare
    the relator multiset (and generators and n) and ignore the label.
    """

    gens: GeneratorTable
    relators: tuple[Word, ...]
    n: int = 1
    label: str = ""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("twist level n must be >= 1")
        for r in self.relators:
            if r.table != self.gens:
                raise ValueError("relator on a different generator table")
        object.__setattr__(
            self, "relators", tuple(canonical_relator(r) for r in self.relators)
        )

    def _key(self):
        return (
            self.gens.names,
            self.n,
            tuple(sorted(r.syllables for r in self.relators)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Presentation):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def parse(self, text: str) -> Word:
        return parse_word(text, self.gens)


@dataclass(frozen=True)
class AbelianInvariants:
    """Invariant factors d_1 | d_2 | ... | d_k, with 0 meaning infinite."""

    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        prev = None
        for d in self.factors:
            if d < 0 or d == 1:
                raise ValueError(f"bad invariant factor {d}")
            if prev is not None:
                if prev == 0 and d != 0:
                    raise ValueError("finite factor after an infinite one")
                if prev != 0 and d != 0 and d % prev:
                    raise ValueError("factors must form a divisibility chain")
            prev = d

    @property
    def free_rank(self) -> int:
        return sum(1 for d in self.factors if d == 0)


def smith_normal_form(
    mat: Sequence[Sequence[int]],
) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Integer Smith form: returns (U, D, V) with U mat V = D.

    U and V are unimodular; D is diagonal with d_1 | d_2 | ..., all
    nonnegative, zeros last.  Exact integer arithmetic throughout.
    """
    A = [[int(x) for x in row] for row in mat]
    m = len(A)
    n = len(A[0]) if m else 0
    for row in A:
        if len(row) != n:
            raise ValueError("ragged matrix")
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_sub(M: list[list[int]], i: int, j: int, q: int) -> None:
        Mi, Mj = M[i], M[j]
        for k in range(len(Mi)):
            Mi[k] -= q * Mj[k]

    def col_sub(M: list[list[int]], i: int, j: int, q: int) -> None:
        for row in M:
            row[i] -= q * row[j]

    def col_swap(M: list[list[int]], i: int, j: int) -> None:
        for row in M:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = abs(A[i][j])
                if v and (best is None or v < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        if best[0] != t:
            A[t], A[best[0]] = A[best[0]], A[t]
            U[t], U[best[0]] = U[best[0]], U[t]
        if best[1] != t:
            col_swap(A, t, best[1])
            col_swap(V, t, best[1])
        while True:
            dirty = False
            for i in range(m):
                if i != t and A[i][t]:
                    q = A[i][t] // A[t][t]
                    row_sub(A, i, t, q)
                    row_sub(U, i, t, q)
                    if A[i][t]:
                        # remainder is a strictly smaller pivot
                        A[t], A[i] = A[i], A[t]
                        U[t], U[i] = U[i], U[t]
                        dirty = True
            if dirty:
                continue
            for j in range(n):
                if j != t and A[t][j]:
                    q = A[t][j] // A[t][t]
                    col_sub(A, j, t, q)
                    col_sub(V, j, t, q)
                    if A[t][j]:
                        col_swap(A, t, j)
                        col_swap(V, t, j)
                        dirty = True
            if dirty:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % A[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_sub(A, t, bad, -1)
            row_sub(U, t, bad, -1)
        if A[t][t] < 0:
            for k in range(n):
                A[t][k] = -A[t][k]
            for k in range(m):
                U[t][k] = -U[t][k]
        t += 1
    pack = lambda M: tuple(tuple(row) for row in M)
    return pack(U), pack(A), pack(V)


def exponent_matrix(pres: Presentation) -> tuple[tuple[int, ...], ...]:
    """Relator-by-generator exponent sums (the abelianized relation matrix)."""
    rows = []
    for r in pres.relators:
        row = [0] * len(pres.gens)
        for gen, exp in r.syllables:
            row[gen] += exp
        rows.append(tuple(row))
    return tuple(rows)


def abelianization_invariants(pres: Presentation) -> AbelianInvariants:
    g = len(pres.gens)
    if not pres.relators:
        return AbelianInvariants((0,) * g)
    _, D, _ = smith_normal_form(exponent_matrix(pres))
    diag = [D[i][i] for i in range(min(len(D), g))]
    finite = [d for d in diag if d > 1]
    rank = sum(1 for d in diag if d)
    return AbelianInvariants(tuple(finite) + (0,) * (g - rank))


# -- diagram to presentation ------------------------------------------------


def arc_names(count: int) -> tuple[str, ...]:
    if count <= 26:
        return tuple(chr(ord("a") + i) for i in range(count))
    return tuple(f"x{i}" for i in range(count))


def gn_from_diagram(diagram: KnotDiagram, n: int, label: str = "") -> Presentation:
    """One generator per arc, one twisted conjugation relator per crossing."""
    table = GeneratorTable(arc_names(diagram.arc_count))
    relators = []
    for sign, over, under_in, under_out in diagram.crossings:
        if sign > 0:
            x, z = under_in, under_out
        else:
            x, z = under_out, under_in
        lhs = Word(table, ((x, 1),))
        rhs = reduce(table, [(over, n), (z, 1), (over, -n)])
        relators.append(equality_relator(lhs, rhs))
    return Presentation(table, tuple(relators), n=n, label=label)


TREFOIL_RIGHT = KnotDiagram(3, ((1, 1, 0, 2), (1, 2, 1, 0), (1, 0, 2, 1)))
TREFOIL_LEFT = KnotDiagram(3, ((-1, 1, 0, 2), (-1, 2, 1, 0), (-1, 0, 2, 1)))
# granny: two right trefoil factors; square: a right and a left factor
SQUARE_KNOT = KnotDiagram(
    6,
    (
        (1, 4, 0, 2),
        (1, 2, 4, 3),
        (1, 3, 2, 4),
        (-1, 3, 1, 5),
        (-1, 5, 3, 1),
        (-1, 1, 5, 0),
    ),
)
GRANNY_KNOT = KnotDiagram(
    6,
    (
        (1, 2, 0, 1),
        (1, 1, 2, 3),
        (1, 3, 1, 2),
        (1, 5, 3, 4),
        (1, 4, 5, 0),
        (1, 0, 4, 5),
    ),
)

DIAGRAMS = {
    "trefoil_r": TREFOIL_RIGHT,
    "trefoil_l": TREFOIL_LEFT,
    "SK": SQUARE_KNOT,
    "GK": GRANNY_KNOT,
}


# -- reduced two- and three-generator forms ---------------------------------


def _rel(table: GeneratorTable, lhs: str, rhs: str) -> Word:
    return equality_relator(parse_word(lhs, table), parse_word(rhs, table))


def trefoil_right_reduced(n: int) -> Presentation:
    t = GeneratorTable(("a", "b"))
    rels = (
        _rel(t, f"a b^{n} a^{n}", f"b^{n} a^{n} b"),
        _rel(t, f"b a^{n} b^{n}", f"a^{n} b^{n} a"),
    )
    return Presentation(t, rels, n=n, label=f"G_{n}(trefoil_r)")


def trefoil_left_reduced(n: int) -> Presentation:
    t = GeneratorTable(("a", "b"))
    rels = (
        _rel(t, f"b a^{n} b^{n}", f"a^{n} b^{n} a"),
        _rel(t, f"a b^{n} a^{n}", f"b^{n} a^{n} b"),
    )
    return Presentation(t, rels, n=n, label=f"G_{n}(trefoil_l)")


def square_knot_gn(n: int) -> Presentation:
    t = GeneratorTable(("d", "b", "e"))
    rels = (
        _rel(t, f"b d^{n} b^{n}", f"d^{n} b^{n} d"),
        _rel(t, f"e d^{n} e^{n}", f"d^{n} e^{n} d"),
        _rel(t, f"e^{n} d^{n} e d^-{n} e^-{n}", f"b^{n} d^{n} b d^-{n} b^-{n}"),
    )
    return Presentation(t, rels, n=n, label=f"G_{n}(SK)")


def granny_knot_gn(n: int) -> Presentation:
    t = GeneratorTable(("d", "b", "e"))
    rels = (
        _rel(t, f"b d^{n} b^{n}", f"d^{n} b^{n} d"),
        _rel(t, f"d e^{n} d^{n}", f"e^{n} d^{n} e"),
        _rel(t, f"e^-{n} d^-{n} e d^{n} e^{n}", f"b^{n} d^{n} b d^-{n} b^-{n}"),
    )
    return Presentation(t, rels, n=n, label=f"G_{n}(GK)")


def g1_braid_presentation() -> Presentation:
    """The common n = 1 group of both composite knots, on d, b, e."""
    t = GeneratorTable(("d", "b", "e"))
    rels = (_rel(t, "b d b", "d b d"), _rel(t, "e d e", "d e d"))
    return Presentation(t, rels, n=1, label="base")


def sk_powered_third_relation(n: int) -> tuple[Word, Word]:
    """Both sides of (e^n d^n)^3 d (e^n d^n)^-3 = (b^n d^n)^3 d (b^n d^n)^-3."""
    t = GeneratorTable(("d", "b", "e"))
    ed = parse_word(f"e^{n} d^{n}", t)
    bd = parse_word(f"b^{n} d^{n}", t)
    d = parse_word("d", t)
    return (ed**3 * d * ed**-3, bd**3 * d * bd**-3)


REDUCED_BUILDERS = {
    "trefoil_r": trefoil_right_reduced,
    "trefoil_l": trefoil_left_reduced,
    "SK": square_knot_gn,
    "GK": granny_knot_gn,
}

KNOT_NAMES = tuple(REDUCED_BUILDERS)


def knot_presentation(knot: str, n: int, raw: bool = False) -> Presentation:
    if knot not in KNOT_NAMES:
        raise KeyError(f"unknown knot {knot!r}")
    if raw:
        return gn_from_diagram(DIAGRAMS[knot], n, label=f"G_{n}({knot}) raw")
    return REDUCED_BUILDERS[knot](n)


def knot_diagram(knot: str) -> KnotDiagram:
    if knot not in DIAGRAMS:
        raise KeyError(f"unknown knot {knot!r}")
    return DIAGRAMS[knot]


# -- text form ---------------------------------------------------------------


def format_presentation(pres: Presentation) -> str:
    lines = ["gens: " + " ".join(pres.gens.names)]
    if pres.n != 1:
        lines.append(f"n: {pres.n}")
    for r in pres.relators:
        lines.append("rel: " + format_word(r))
    return "\n".join(lines) + "\n"


def parse_presentation(text: str, label: str = "") -> Presentation:
    gens: GeneratorTable | None = None
    n = 1
    relators: list[Word] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise ValueError(f"bad line {line!r}")
        key = key.strip()
        rest = rest.strip()
        if key == "gens":
            if gens is not None:
                raise ValueError("duplicate gens line")
            gens = GeneratorTable(tuple(rest.split()))
        elif key == "n":
            n = int(rest)
        elif key == "rel":
            if gens is None:
                raise ValueError("rel line before gens line")
            relators.append(parse_word(rest, gens))
        else:
            raise ValueError(f"unknown key {key!r}")
    if gens is None:
        raise ValueError("missing gens line")
    return Presentation(gens, tuple(relators), n=n, label=label)


def format_diagram(diagram: KnotDiagram) -> str:
    lines = [f"arcs {diagram.arc_count}"]
    for sign, over, ui, uo in diagram.crossings:
        lines.append(f"{'+' if sign > 0 else '-'} {over} {ui} {uo}")
    return "\n".join(lines) + "\n"


def parse_diagram(text: str) -> KnotDiagram:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("arcs "):
        raise ValueError("first line must be 'arcs N'")
    arc_count = int(lines[0].split()[1])
    crossings = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 4 or parts[0] not in "+-":
            raise ValueError(f"bad crossing line {line!r}")
        sign = 1 if parts[0] == "+" else -1
        crossings.append((sign, int(parts[1]), int(parts[2]), int(parts[3])))
    return KnotDiagram(arc_count, tuple(crossings))
