"""Concrete finite groups with a uniform element protocol.

Every group exposes ``identity``, ``mul``, ``inv``, ``power``, a canonical
``elements()`` enumeration, and text formatting for its elements.  Elements
are plain hashable values (tuples, ints, pairs), so callers can put them in
dicts and compare across calls.

Permutations compose left to right: ``mul(x, y)`` applies x first.  Full
enumeration is refused above MAX_ENUMERABLE_ORDER; arithmetic on individual
elements works at any order, which is what lets us check a witness inside
S_24 without ever listing it.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from typing import Iterator, Mapping

MAX_ENUMERABLE_ORDER = 2500


class CapabilityError(RuntimeError):
    """The operation would need to enumerate more than we allow."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class FiniteGroup:
    """Base protocol; subclasses fill in the arithmetic and enumeration."""

    def __init__(self, name: str, order: int, identity) -> None:
        self.name = name
        self.order = order
        self.identity = identity
        self._elements: tuple | None = None
        self._index: dict | None = None

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def _enumerate(self) -> Iterator:
        raise NotImplementedError

    def elements(self) -> tuple:
        if self._elements is None:
            if self.order > MAX_ENUMERABLE_ORDER:
                raise CapabilityError(
                    f"{self.name} has order {self.order}, above the "
                    f"enumeration bound {MAX_ENUMERABLE_ORDER}"
                )
            els = tuple(self._enumerate())
            if len(els) != self.order:
                raise RuntimeError(
                    f"{self.name}: enumerated {len(els)} of {self.order}"
                )
            self._elements = els
            self._index = {e: i for i, e in enumerate(els)}
        return self._elements

    def index_of(self, x) -> int:
        self.elements()
        assert self._index is not None
        return self._index[x]

    def power(self, x, k: int):
        if k < 0:
            x = self.inv(x)
            k = -k
        acc = self.identity
        while k:
            if k & 1:
                acc = self.mul(acc, x)
            x = self.mul(x, x)
            k >>= 1
        return acc

    def conjugate(self, x, by):
        return self.mul(self.mul(self.inv(by), x), by)

    def format_element(self, x) -> str:
        return str(x)

    def parse_element(self, text: str):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} order {self.order}>"


# -- permutation groups ------------------------------------------------------


def permutation_parity(perm: tuple[int, ...]) -> int:
    """0 for even, 1 for odd."""
    seen = [False] * len(perm)
    parity = 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


class SymmetricGroup(FiniteGroup):
    def __init__(self, degree: int, name: str | None = None) -> None:
        if degree < 1:
            raise ValueError("degree must be positive")
        self.degree = degree
        super().__init__(
            name or f"S{degree}", math.factorial(degree), tuple(range(degree))
        )

    def mul(self, x, y):
        return tuple(y[i] for i in x)

    def inv(self, x):
        out = [0] * self.degree
        for i, xi in enumerate(x):
            out[xi] = i
        return tuple(out)

    def _enumerate(self):
        return itertools.permutations(range(self.degree))

    def format_element(self, x) -> str:
        return format_cycles(x)

    def parse_element(self, text: str):
        return parse_cycles(text, self.degree)


class AlternatingGroup(SymmetricGroup):
    def __init__(self, degree: int) -> None:
        super().__init__(degree, name=f"A{degree}")
        self.order = 1 if degree < 2 else math.factorial(degree) // 2

    def _enumerate(self):
        return (
            p
            for p in itertools.permutations(range(self.degree))
            if permutation_parity(p) == 0
        )

    def parse_element(self, text: str):
        perm = parse_cycles(text, self.degree)
        if permutation_parity(perm):
            raise ValueError(f"{text!r} is an odd permutation")
        return perm


def parse_cycles(text: str, degree: int) -> tuple[int, ...]:
    """1-based disjoint cycle notation to a 0-based image tuple."""
    t = text.strip()
    if t in ("()", "e", "1", ""):
        return tuple(range(degree))
    if not (t.startswith("(") and t.endswith(")")):
        raise ValueError(f"bad cycle text {text!r}")
    perm = list(range(degree))
    seen: set[int] = set()
    for cyc in re.split(r"\)\s*\(", t[1:-1]):
        entries = [int(tok) for tok in re.split(r"[,\s]+", cyc.strip()) if tok]
        for v in entries:
            if not 1 <= v <= degree:
                raise ValueError(f"entry {v} outside 1..{degree}")
            if v - 1 in seen:
                raise ValueError(f"entry {v} repeated")
            seen.add(v - 1)
        for a, b in zip(entries, entries[1:] + entries[:1]):
            perm[a - 1] = b - 1
    return tuple(perm)


def format_cycles(perm: tuple[int, ...]) -> str:
    """Canonical cycle text: each cycle least-first, cycles by least entry."""
    seen = [False] * len(perm)
    parts = []
    for i in range(len(perm)):
        if seen[i] or perm[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = perm[j]
        parts.append("(" + ",".join(str(v + 1) for v in cyc) + ")")
    return "".join(parts) or "()"


# -- abelian and dihedral ----------------------------------------------------


class CyclicGroup(FiniteGroup):
    def __init__(self, modulus: int) -> None:
        if modulus < 1:
            raise ValueError("modulus must be positive")
        self.modulus = modulus
        super().__init__(f"Z{modulus}", modulus, 0)

    def mul(self, x, y):
        return (x + y) % self.modulus

    def inv(self, x):
        return (-x) % self.modulus

    def _enumerate(self):
        return iter(range(self.modulus))

    def parse_element(self, text: str):
        v = int(text)
        if not 0 <= v < self.modulus:
            raise ValueError(f"{v} outside 0..{self.modulus - 1}")
        return v


class DihedralGroup(FiniteGroup):
    """Symmetries (i, j) = r^i f^j of the m-gon, with f r f = r^-1."""

    def __init__(self, m: int) -> None:
        if m < 1:
            raise ValueError("need m >= 1")
        self.m = m
        super().__init__(f"D{m}", 2 * m, (0, 0))

    def mul(self, x, y):
        i1, j1 = x
        i2, j2 = y
        return ((i1 + (i2 if j1 == 0 else -i2)) % self.m, (j1 + j2) % 2)

    def inv(self, x):
        i, j = x
        return ((-i) % self.m, 0) if j == 0 else x

    def _enumerate(self):
        return ((i, j) for j in (0, 1) for i in range(self.m))

    def format_element(self, x) -> str:
        i, j = x
        if j == 0:
            return "e" if i == 0 else f"r{i}"
        return "f" if i == 0 else f"r{i}f"

    def parse_element(self, text: str):
        m = re.fullmatch(r"(?:e|(?:r(\d+))?(f)?)", text.strip())
        if not m or text.strip() == "":
            raise ValueError(f"bad dihedral element {text!r}")
        i = int(m.group(1)) if m.group(1) else 0
        j = 1 if m.group(2) else 0
        if not 0 <= i < self.m:
            raise ValueError(f"rotation {i} outside 0..{self.m - 1}")
        return (i, j)


# -- matrix groups over prime fields ------------------------------------------


class SL2Group(FiniteGroup):
    """2x2 determinant-1 matrices over F_p, stored as (a, b, c, d)."""

    def __init__(self, p: int, name: str | None = None) -> None:
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        super().__init__(name or f"SL2_{p}", p**3 - p, (1 % p, 0, 0, 1 % p))

    def mul(self, x, y):
        a, b, c, d = x
        e, f, g, h = y
        p = self.p
        return (
            (a * e + b * g) % p,
            (a * f + b * h) % p,
            (c * e + d * g) % p,
            (c * f + d * h) % p,
        )

    def inv(self, x):
        a, b, c, d = x
        p = self.p
        return (d % p, (-b) % p, (-c) % p, a % p)

    def _enumerate(self):
        p = self.p
        for m in itertools.product(range(p), repeat=4):
            if (m[0] * m[3] - m[1] * m[2]) % p == 1:
                yield m

    def format_element(self, x) -> str:
        a, b, c, d = x
        return f"[[{a},{b}],[{c},{d}]]"

    def parse_element(self, text: str):
        import ast

        rows = ast.literal_eval(text.strip())
        if (
            not isinstance(rows, (list, tuple))
            or len(rows) != 2
            or any(len(r) != 2 for r in rows)
        ):
            raise ValueError(f"bad matrix {text!r}")
        m = tuple(int(v) % self.p for row in rows for v in row)
        if (m[0] * m[3] - m[1] * m[2]) % self.p != 1:
            raise ValueError(f"{text!r} has determinant != 1")
        return self._accept(m)

    def _accept(self, m):
        return m


class PSL2Group(SL2Group):
    """SL2 mod its center; representatives are sign-normalized."""

    def __init__(self, p: int) -> None:
        super().__init__(p, name=f"PSL2_{p}")
        if p > 2:
            self.order //= 2

    def _normalize(self, m):
        half = (self.p - 1) // 2
        for v in m:
            if v:
                if 1 <= v <= half:
                    return m
                return tuple((-x) % self.p for x in m)
        raise ValueError("zero matrix")

    def mul(self, x, y):
        return self._normalize(super().mul(x, y))

    def inv(self, x):
        return self._normalize(super().inv(x))

    def _enumerate(self):
        return (m for m in super()._enumerate() if m == self._normalize(m))

    def _accept(self, m):
        return self._normalize(m)


# -- opaque multiplication tables ---------------------------------------------


class CayleyGroup(FiniteGroup):
    """A group given by its full multiplication table; elements are 0..N-1."""

    def __init__(self, table: tuple[tuple[int, ...], ...], name: str) -> None:
        n = len(table)
        ident = None
        for i in range(n):
            if table[i] == tuple(range(n)) and all(
                table[j][i] == j for j in range(n)
            ):
                ident = i
                break
        if ident is None:
            raise ValueError("table has no identity")
        self.table = table
        self._inv = [None] * n
        for i in range(n):
            for j in range(n):
                if table[i][j] == ident and table[j][i] == ident:
                    self._inv[i] = j
                    break
            if self._inv[i] is None:
                raise ValueError(f"element {i} has no inverse")
        super().__init__(name, n, ident)

    def mul(self, x, y):
        return self.table[x][y]

    def inv(self, x):
        return self._inv[x]

    def _enumerate(self):
        return iter(range(self.order))

    def parse_element(self, text: str):
        v = int(text)
        if not 0 <= v < self.order:
            raise ValueError(f"{v} outside 0..{self.order - 1}")
        return v


def from_cayley_table(rows, name: str = "cayley") -> CayleyGroup:
    """Build and validate a group from a multiplication table.

    Latin-square and inverse checks are exhaustive; associativity is checked
    exhaustively up to order 64 and on seeded random triples beyond that.
    """
    table = tuple(tuple(int(v) for v in row) for row in rows)
    n = len(table)
    want = set(range(n))
    for i, row in enumerate(table):
        if len(row) != n or set(row) != want:
            raise ValueError(f"row {i} is not a permutation of 0..{n - 1}")
    for j in range(n):
        if {table[i][j] for i in range(n)} != want:
            raise ValueError(f"column {j} is not a permutation of 0..{n - 1}")
    if n <= 64:
        triples = itertools.product(range(n), repeat=3)
    else:
        rng = random.Random(0)
        triples = (
            (rng.randrange(n), rng.randrange(n), rng.randrange(n))
            for _ in range(5000)
        )
    for a, b, c in triples:
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise ValueError(f"not associative at ({a}, {b}, {c})")
    return CayleyGroup(table, name)


def cayley_table(group: FiniteGroup) -> tuple[tuple[int, ...], ...]:
    els = group.elements()
    idx = {e: i for i, e in enumerate(els)}
    return tuple(
        tuple(idx[group.mul(a, b)] for b in els) for a in els
    )


def format_cayley_table(group: FiniteGroup) -> str:
    table = cayley_table(group)
    lines = [str(len(table))]
    lines.extend(" ".join(str(v) for v in row) for row in table)
    return "\n".join(lines) + "\n"


def parse_cayley_table(text: str, name: str = "cayley") -> CayleyGroup:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty table text")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} rows, got {len(lines) - 1}")
    return from_cayley_table(
        [[int(v) for v in ln.split()] for ln in lines[1:]], name=name
    )


# -- direct products -----------------------------------------------------------


class DirectProductGroup(FiniteGroup):
    def __init__(self, left: FiniteGroup, right: FiniteGroup) -> None:
        self.left = left
        self.right = right
        super().__init__(
            f"{left.name}x{right.name}",
            left.order * right.order,
            (left.identity, right.identity),
        )

    def mul(self, x, y):
        return (self.left.mul(x[0], y[0]), self.right.mul(x[1], y[1]))

    def inv(self, x):
        return (self.left.inv(x[0]), self.right.inv(x[1]))

    def _enumerate(self):
        return itertools.product(self.left.elements(), self.right.elements())

    def format_element(self, x) -> str:
        return (
            f"({self.left.format_element(x[0])}; "
            f"{self.right.format_element(x[1])})"
        )

    def parse_element(self, text: str):
        t = text.strip()
        if not (t.startswith("(") and t.endswith(")")):
            raise ValueError(f"bad product element {text!r}")
        inner = t[1:-1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif ch == ";" and depth == 0:
                return (
                    self.left.parse_element(inner[:i]),
                    self.right.parse_element(inner[i + 1 :]),
                )
        raise ValueError(f"bad product element {text!r}")


# -- group-level utilities ------------------------------------------------------


def nth_roots(group: FiniteGroup, target, n: int) -> tuple:
    """All x with x^n = target, in enumeration order."""
    return tuple(
        x for x in group.elements() if group.power(x, n) == target
    )


@dataclass(frozen=True)
class RootTable:
    """n-th roots of every element, built in one pass."""

    group: FiniteGroup
    n: int
    roots: Mapping

    def of(self, target) -> tuple:
        return self.roots.get(target, ())


def root_table(group: FiniteGroup, n: int) -> RootTable:
    buckets: dict = {}
    for x in group.elements():
        buckets.setdefault(group.power(x, n), []).append(x)
    return RootTable(group, n, {k: tuple(v) for k, v in buckets.items()})


def generating_set(group: FiniteGroup) -> tuple:
    """Greedy generating set: repeatedly adjoin the first uncovered element."""
    cached = getattr(group, "_generating_set", None)
    if cached is not None:
        return cached
    els = group.elements()
    gens: list = []
    closure = {group.identity}
    for e in els:
        if e in closure:
            continue
        gens.append(e)
        closure = {group.identity}
        frontier = [group.identity]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = group.mul(x, g)
                if y not in closure:
                    closure.add(y)
                    frontier.append(y)
        if len(closure) == group.order:
            break
    if len(closure) != group.order:
        raise RuntimeError(f"{group.name}: generation stalled")
    out = tuple(gens)
    group._generating_set = out
    return out


def conjugacy_classes(group: FiniteGroup) -> tuple[tuple[int, ...], ...]:
    """Element indices grouped by conjugacy, classes ordered by least index."""
    els = group.elements()
    gens = generating_set(group)
    seen = [False] * len(els)
    classes = []
    for i, e in enumerate(els):
        if seen[i]:
            continue
        seen[i] = True
        members = [i]
        frontier = [e]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = group.conjugate(x, g)
                j = group.index_of(y)
                if not seen[j]:
                    seen[j] = True
                    members.append(j)
                    frontier.append(y)
        classes.append(tuple(sorted(members)))
    return tuple(classes)


def validate_group(group: FiniteGroup, seed: int = 0) -> bool:
    """Identity and inverse axioms exhaustively; associativity sampled."""
    els = group.elements()
    if len(set(els)) != len(els):
        raise ValueError(f"{group.name}: duplicate elements")
    e = group.identity
    members = set(els)
    for x in els:
        if group.mul(e, x) != x or group.mul(x, e) != x:
            raise ValueError(f"{group.name}: identity fails at {x}")
        y = group.inv(x)
        if y not in members:
            raise ValueError(f"{group.name}: inverse leaves the group at {x}")
        if group.mul(x, y) != e or group.mul(y, x) != e:
            raise ValueError(f"{group.name}: inverse fails at {x}")
    n = len(els)
    if n**2 <= 600_000:
        for a in els:
            for b in els:
                if group.mul(a, b) not in members:
                    raise ValueError(f"{group.name}: not closed at ({a}, {b})")
    if n**3 <= 300_000:
        triples = itertools.product(els, repeat=3)
    else:
        rng = random.Random(seed)
        triples = (
            (els[rng.randrange(n)], els[rng.randrange(n)], els[rng.randrange(n)])
            for _ in range(3000)
        )
    for a, b, c in triples:
        if group.mul(group.mul(a, b), c) != group.mul(a, group.mul(b, c)):
            raise ValueError(f"{group.name}: not associative at ({a}, {b}, {c})")
    return True


# -- spec strings ---------------------------------------------------------------

_SPEC_MAKERS = (
    (re.compile(r"S(\d+)"), lambda m: SymmetricGroup(int(m.group(1)))),
    (re.compile(r"A(\d+)"), lambda m: AlternatingGroup(int(m.group(1)))),
    (re.compile(r"Z(\d+)"), lambda m: CyclicGroup(int(m.group(1)))),
    (re.compile(r"D(\d+)"), lambda m: DihedralGroup(int(m.group(1)))),
    (re.compile(r"SL2_(\d+)"), lambda m: SL2Group(int(m.group(1)))),
    (re.compile(r"PSL2_(\d+)"), lambda m: PSL2Group(int(m.group(1)))),
)


def group_from_spec(spec: str) -> FiniteGroup:
    """Parse names like S5, A4, Z6, D4, SL2_3, PSL2_7, Z2xZ4, cayley:path."""
    s = spec.strip()
    if s.startswith("cayley:"):
        path = s[len("cayley:") :]
        with open(path) as fh:
            return parse_cayley_table(fh.read(), name=s)
    if "x" in s:
        parts = s.split("x")
        group = group_from_spec(parts[0])
        for part in parts[1:]:
            group = DirectProductGroup(group, group_from_spec(part))
        return group
    for pat, make in _SPEC_MAKERS:
        m = pat.fullmatch(s)
        if m:
            return make(m)
    raise ValueError(f"unrecognized group spec {spec!r}")
