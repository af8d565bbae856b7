"""Permutations of tableaux.

A tableau ``[p_1, ..., p_n]`` is the index set of symbols ``(i, j)`` with
``1 <= i <= n`` and ``0 <= j <= p_i``.  Symbols are stored as flat indices in
layer-major order, so a permutation is just its image tuple.  The functions
working on bare image tuples (``compose``, ``inverse``, ``delete_images`` ...)
are the hot path used by the enumerator; :class:`TableauPermutation` wraps them
with a checked, printable value type.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Images = tuple[int, ...]


class TableauMismatch(ValueError):
    """Two permutations that must share a tableau do not."""


@dataclass(frozen=True)
class Tableau:
    """The tableau ``[p_1, ..., p_n]``."""

    widths: tuple[int, ...]
    offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        widths = tuple(int(p) for p in self.widths)
        if not widths:
            raise ValueError("a tableau needs at least one layer")
        if any(p < 0 for p in widths):
            raise ValueError(f"negative width in {widths}")
        object.__setattr__(self, "widths", widths)
        offsets, acc = [], 0
        for p in widths:
            offsets.append(acc)
            acc += p + 1
        object.__setattr__(self, "offsets", tuple(offsets))

    @property
    def n(self) -> int:
        return len(self.widths)

    @property
    def size(self) -> int:
        return len(self.widths) + sum(self.widths)

    def flat(self, i: int, j: int) -> int:
        """Flat index of the symbol ``(i, j)`` (``i`` is 1-based)."""
        if not 1 <= i <= self.n or not 0 <= j <= self.widths[i - 1]:
            raise IndexError(f"symbol ({i},{j}) not in tableau {list(self.widths)}")
        return self.offsets[i - 1] + j

    def symbol(self, x: int) -> tuple[int, int]:
        for i in range(self.n, 0, -1):
            if x >= self.offsets[i - 1]:
                return i, x - self.offsets[i - 1]
        raise IndexError(x)

    def symbols(self) -> list[tuple[int, int]]:
        return [(i + 1, j) for i, p in enumerate(self.widths) for j in range(p + 1)]

    def without(self, i: int) -> "Tableau":
        """The tableau with ``p_i`` lowered by one."""
        widths = list(self.widths)
        widths[i - 1] -= 1
        return Tableau(tuple(widths))

    def label(self, x: int) -> str:
        i, j = self.symbol(x)
        return str(j) if self.n == 1 else f"{i}.{j}"


# -- raw image-tuple arithmetic ------------------------------------------------

def identity(size: int) -> Images:
    return tuple(range(size))


def compose(a: Sequence[int], b: Sequence[int]) -> Images:
    """``a o b``: apply ``b`` first."""
    return tuple([a[x] for x in b])


def inverse(a: Sequence[int]) -> Images:
    inv = [0] * len(a)
    for x, y in enumerate(a):
        inv[y] = x
    return tuple(inv)


def cycle_count_images(a: Sequence[int]) -> int:
    seen = [False] * len(a)
    count = 0
    for start in range(len(a)):
        if not seen[start]:
            count += 1
            x = start
            while not seen[x]:
                seen[x] = True
                x = a[x]
    return count


def norm_images(a: Sequence[int]) -> int:
    return len(a) - cycle_count_images(a)


def cycles_images(a: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycles in canonical form: each starts at its minimum, sorted by it."""
    seen = [False] * len(a)
    out = []
    for start in range(len(a)):
        if seen[start]:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = a[x]
        out.append(tuple(cyc))
    return out


def delete_images(a: Sequence[int], x: int) -> Images:
    """Skip flat symbol ``x`` in the cycles of ``a`` and shift the symbols above it."""
    out = []
    ax = a[x]
    for y in range(len(a)):
        if y == x:
            continue
        z = a[y]
        if z == x:
            z = ax
        out.append(z - 1 if z > x else z)
    return tuple(out)


def from_cycles(size: int, cycles: Iterable[Sequence[int]]) -> Images:
    img = list(range(size))
    seen = set()
    for cyc in cycles:
        for k, x in enumerate(cyc):
            if not 0 <= x < size:
                raise ValueError(f"symbol {x} out of range for {size} symbols")
            if x in seen:
                raise ValueError(f"symbol {x} appears twice")
            seen.add(x)
            img[x] = cyc[(k + 1) % len(cyc)]
    return tuple(img)


# -- value type ------------------------------------------------------------------

@dataclass(frozen=True)
class TableauPermutation:
    tableau: Tableau
    images: Images

    def __post_init__(self):
        images = tuple(self.images)
        if sorted(images) != list(range(self.tableau.size)):
            raise ValueError(f"{images} is not a permutation of {self.tableau.size} symbols")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, tableau: Tableau) -> "TableauPermutation":
        return cls(tableau, identity(tableau.size))

    @classmethod
    def from_cycles(cls, tableau: Tableau, cycles: Iterable[Sequence]) -> "TableauPermutation":
        """Build from cycles of flat indices or of ``(i, j)`` pairs."""
        flat = [
            [tableau.flat(*s) if isinstance(s, tuple) else int(s) for s in cyc]
            for cyc in cycles
        ]
        return cls(tableau, from_cycles(tableau.size, flat))

    def __call__(self, i: int, j: int) -> tuple[int, int]:
        return self.tableau.symbol(self.images[self.tableau.flat(i, j)])

    def __mul__(self, other: "TableauPermutation") -> "TableauPermutation":
        return compose_perm(self, other)

    def inverse(self) -> "TableauPermutation":
        return TableauPermutation(self.tableau, inverse(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        return cycles_images(self.images)

    def cycle_count(self) -> int:
        return cycle_count_images(self.images)

    def norm(self) -> int:
        return norm_images(self.images)

    def delete(self, i: int, j: int) -> "TableauPermutation":
        return delete_perm(self, i, j)

    def __str__(self) -> str:
        return format_images(self.tableau, self.images)


def compose_perm(s: TableauPermutation, t: TableauPermutation) -> TableauPermutation:
    if s.tableau != t.tableau:
        raise TableauMismatch(f"{list(s.tableau.widths)} vs {list(t.tableau.widths)}")
    return TableauPermutation(s.tableau, compose(s.images, t.images))


def norm(s: TableauPermutation) -> int:
    return s.norm()


def cycle_count(s: TableauPermutation) -> int:
    return s.cycle_count()


def delete_perm(s: TableauPermutation, i: int, j: int) -> TableauPermutation:
    """The deletion map ``D^i_j``; needs ``p_i >= 1``."""
    tab = s.tableau
    x = tab.flat(i, j)
    if tab.widths[i - 1] < 1:
        raise IndexError(f"layer {i} has width 0; nothing to delete")
    return TableauPermutation(tab.without(i), delete_images(s.images, x))


# -- text form -------------------------------------------------------------------

def format_images(tableau: Tableau, images: Sequence[int]) -> str:
    return "".join(
        "(" + ",".join(tableau.label(x) for x in cyc) + ")" for cyc in cycles_images(images)
    )


_CYCLE = re.compile(r"\(([^()]*)\)")


def _parse_cycles(text: str) -> list[list[str]]:
    text = re.sub(r"\s+", "", text)
    if not text or _CYCLE.sub("", text):
        raise ValueError(f"malformed cycle notation: {text!r}")
    return [c.split(",") for c in _CYCLE.findall(text)]


def parse(text: str, tableau: Tableau | None = None) -> TableauPermutation:
    """Parse cycle notation such as ``(0,2,1,3)(4)`` or ``(1.0,2.1)(1.1)(2.0)``.

    Without an explicit tableau it is inferred from the largest ``j`` on each
    layer, which is exact for the canonical form since fixed points are printed.
    """
    raw = _parse_cycles(text)
    syms = []
    for cyc in raw:
        row = []
        for tok in cyc:
            if "." in tok:
                i, j = tok.split(".")
                row.append((int(i), int(j)))
            else:
                row.append((1, int(tok)))
        syms.append(row)
    if tableau is None:
        n = max(i for row in syms for i, _ in row)
        widths = [-1] * n
        for row in syms:
            for i, j in row:
                widths[i - 1] = max(widths[i - 1], j)
        if min(widths) < 0:
            raise ValueError(f"layer missing from {text!r}")
        tableau = Tableau(tuple(widths))
    return TableauPermutation.from_cycles(tableau, [tuple(row) for row in syms])
