"""Cells of the parallel slit complex and their enumeration.

A cell is a tuple ``(sigma_q : ... : sigma_0)`` of permutations of a tableau
``[p_1, ..., p_n]``.  Its total degree is ``q + p_1 + ... + p_n``.  Cells are
stored with bare image tuples (see :mod:`slitkit.perm`) in the order
``sigma_q, ..., sigma_0``.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .perm import (
    Images,
    Tableau,
    TableauMismatch,
    TableauPermutation,
    compose,
    cycle_count_images,
    delete_images,
    format_images,
    inverse,
    norm_images,
    parse,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_H = 5
CACHE_ENV = "SLITKIT_CACHE"
CACHE_VERSION = "slitkit-cells v1"


class BudgetExceeded(RuntimeError):
    """The requested complex is larger than the configured ``h`` budget."""

    def __init__(self, h: int, max_h: int):
        super().__init__(f"h={h} exceeds the budget max_h={max_h}")
        self.h = h
        self.max_h = max_h


@dataclass(frozen=True)
class ModuliIndex:
    g: int
    n: int
    m: int

    def __post_init__(self):
        if self.g < 0 or self.m < 0 or self.n < 1:
            raise ValueError(f"invalid index g={self.g} n={self.n} m={self.m}")

    @property
    def h(self) -> int:
        return 2 * self.g - 2 + 2 * self.n + self.m

    @property
    def dimension(self) -> int:
        return 3 * self.h

    @property
    def is_point(self) -> bool:
        return (self.g, self.n, self.m) == (0, 1, 0)

    def __str__(self) -> str:
        return f"M_{{{self.g},{self.n}}}^{self.m}"


@dataclass(frozen=True)
class Cell:
    q: int
    widths: tuple[int, ...]
    perms: tuple[Images, ...]  # sigma_q, ..., sigma_0

    def __post_init__(self):
        if len(self.perms) != self.q + 1:
            raise ValueError(f"expected {self.q + 1} permutations, got {len(self.perms)}")
        size = len(self.widths) + sum(self.widths)
        if any(len(s) != size for s in self.perms):
            raise TableauMismatch(f"permutation size differs from tableau {list(self.widths)}")

    @classmethod
    def from_perms(cls, perms: Sequence[TableauPermutation]) -> "Cell":
        """From ``(sigma_q, ..., sigma_0)`` given as :class:`TableauPermutation`."""
        tab = perms[0].tableau
        for s in perms:
            if s.tableau != tab:
                raise TableauMismatch("all permutations of a cell share one tableau")
        return cls(len(perms) - 1, tab.widths, tuple(s.images for s in perms))

    @classmethod
    def parse(cls, text: str) -> "Cell":
        """Parse ``q;p1[,p2...];sigma_q|...|sigma_0``."""
        q_s, w_s, perms_s = text.strip().split(";")
        widths = tuple(int(p) for p in w_s.split(","))
        tab = Tableau(widths)
        perms = tuple(parse(s, tab).images for s in perms_s.split("|"))
        return cls(int(q_s), widths, perms)

    @property
    def tableau(self) -> Tableau:
        return Tableau(self.widths)

    @property
    def degree(self) -> int:
        return self.q + sum(self.widths)

    @property
    def bidegree(self) -> tuple[int, tuple[int, ...]]:
        return self.q, self.widths

    def sigma(self, k: int) -> Images:
        return self.perms[self.q - k]

    def jumps(self) -> list[Images]:
        """``sigma_k sigma_{k-1}^{-1}`` for ``k = 1..q``."""
        return [
            compose(self.sigma(k), inverse(self.sigma(k - 1))) for k in range(1, self.q + 1)
        ]

    def total_norm(self) -> int:
        return sum(norm_images(t) for t in self.jumps())

    def top_cycle_count(self) -> int:
        return cycle_count_images(self.perms[0])

    def sort_key(self):
        return (self.degree, self.q, self.widths, self.perms)

    def __str__(self) -> str:
        tab = self.tableau
        return "{};{};{}".format(
            self.q,
            ",".join(map(str, self.widths)),
            "|".join(format_images(tab, s) for s in self.perms),
        )

    def pretty(self) -> str:
        tab = self.tableau
        return " : ".join(format_images(tab, s) for s in self.perms)


def standard_cycle(widths: Sequence[int]) -> Images:
    """``prod_i <(i,0), ..., (i,p_i)>`` as an image tuple."""
    img = []
    off = 0
    for p in widths:
        img.extend(off + j + 1 for j in range(p))
        img.append(off)
        off += p + 1
    return tuple(img)


# -- conditions ----------------------------------------------------------------------

def is_bar_cell(perms: Sequence[Images] | Cell, index: ModuliIndex) -> bool:
    """Conditions (i) total norm <= h and (ii) C(sigma_q) <= m + n."""
    cell = perms if isinstance(perms, Cell) else _cell_from_sequence(perms)
    return cell.total_norm() <= index.h and cell.top_cycle_count() <= index.m + index.n


def _cell_from_sequence(perms: Sequence) -> Cell:
    if not perms:
        raise ValueError("a cell needs at least sigma_0")
    if isinstance(perms[0], TableauPermutation):
        return Cell.from_perms(perms)
    raise TypeError("pass a Cell or a sequence of TableauPermutation")


def _layer_of(widths: Sequence[int]) -> list[int]:
    return [i for i, p in enumerate(widths) for _ in range(p + 1)]


def is_nondegenerate(cell: Cell, index: ModuliIndex) -> bool:
    """Check S1-S7 literally (no shortcuts shared with the enumerator)."""
    widths = cell.widths
    n = len(widths)
    if n != index.n:
        return False
    tab = cell.tableau
    zeros = [tab.flat(i, 0) for i in range(1, n + 1)]
    tops = [tab.flat(i, widths[i - 1]) for i in range(1, n + 1)]
    sig = [cell.sigma(k) for k in range(cell.q + 1)]
    # S1
    if sig[0] != standard_cycle(widths):
        return False
    # S2, for every k including k = 0
    if any(s[top] != zero for s in sig for top, zero in zip(tops, zeros)):
        return False
    # S3
    zero_set = set(zeros)
    for s in sig:
        for cyc in _cycles(s):
            if len(zero_set.intersection(cyc)) > 1:
                return False
    # S4
    if cycle_count_images(sig[-1]) != n + index.m:
        return False
    # S5
    if cell.total_norm() != index.h:
        return False
    # S6
    if any(sig[k] == sig[k - 1] for k in range(1, cell.q + 1)):
        return False
    for i in range(1, n + 1):
        for j in range(widths[i - 1]):
            x, y = tab.flat(i, j), tab.flat(i, j + 1)
            if all(s[x] == y for s in sig):
                return False
    # S7
    layer = _layer_of(widths)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in sig:
        for x, y in enumerate(s):
            parent[find(layer[x])] = find(layer[y])
    return len({find(i) for i in range(n)}) == 1


def _cycles(s: Images) -> Iterator[list[int]]:
    seen = [False] * len(s)
    for start in range(len(s)):
        if seen[start]:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = s[x]
        yield cyc


# -- faces -----------------------------------------------------------------------------

def boundary_faces(cell: Cell) -> list[tuple[int, Cell]]:
    """All faces ``d'_k`` and ``d^i_j`` with their total-complex signs.

    ``d'_k`` carries ``(-1)^k``; ``d^i_j`` carries
    ``(-1)^((q+1) + p_1 + ... + p_{i-1} + j)``.  Faces are returned whether or
    not they are degenerate; the relative complex drops the degenerate ones.
    """
    q, widths, perms = cell.q, cell.widths, cell.perms
    out = []
    if q >= 1:
        for k in range(q + 1):
            pos = q - k
            out.append(((-1) ** k, Cell(q - 1, widths, perms[:pos] + perms[pos + 1:])))
    shift = q + 1
    off = 0
    for i, p in enumerate(widths):
        if p >= 1:
            new_widths = widths[:i] + (p - 1,) + widths[i + 1:]
            for j in range(p + 1):
                x = off + j
                face = Cell(q, new_widths, tuple(delete_images(s, x) for s in perms))
                out.append(((-1) ** (shift + j), face))
        shift += p
        off += p + 1
    return out


# -- enumeration -----------------------------------------------------------------------

def tableaux(index: ModuliIndex) -> list[tuple[int, ...]]:
    """All widths ``(p_1..p_n)`` with ``sum p_i <= 2h``, canonical order."""
    h, n = index.h, index.n
    lo = 1 if n > 1 else 0  # a width-0 layer never connects (S7) when n > 1
    out = []

    def rec(prefix, remaining):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for p in range(lo, remaining + 1):
            rec(prefix + [p], remaining - p)

    rec([], 2 * h)
    return sorted(out, key=lambda w: (sum(w), w))


def jump_table(widths: Sequence[int], max_norm: int) -> list[list[tuple[Images, int]]]:
    """Permutations fixing every ``(i,0)`` grouped by norm ``1..max_norm``.

    Each entry is ``(images, support bitmask)``.  Built breadth-first by
    multiplying with transpositions of the movable symbols.
    """
    size = len(widths) + sum(widths)
    zeros = set()
    off = 0
    for p in widths:
        zeros.add(off)
        off += p + 1
    movable = [x for x in range(size) if x not in zeros]
    transpositions = []
    for a, b in combinations(movable, 2):
        t = list(range(size))
        t[a], t[b] = b, a
        transpositions.append(tuple(t))
    ident = tuple(range(size))
    seen = {ident}
    layers: list[list[tuple[Images, int]]] = [[]]
    frontier = [ident]
    for _ in range(max_norm):
        nxt = []
        for s in frontier:
            for t in transpositions:
                u = compose(t, s)
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        nxt.sort()
        layers.append([(u, _support(u)) for u in nxt])
        frontier = nxt
        if not nxt:
            break
    while len(layers) <= max_norm:
        layers.append([])
    return layers


def _support(s: Images) -> int:
    mask = 0
    for x, y in enumerate(s):
        if x != y:
            mask |= 1 << x
    return mask


def _has_joined_zeros(s: Images, zeros: Sequence[int]) -> bool:
    """True if one cycle of ``s`` holds two different ``(i,0)`` symbols (violates S3)."""
    zero_set = set(zeros)
    for z in zeros:
        x = s[z]
        while x != z:
            if x in zero_set:
                return True
            x = s[x]
    return False


def _connected(sigmas: Sequence[Images], layer: Sequence[int], n: int) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in sigmas:
        for x, y in enumerate(s):
            parent[find(layer[x])] = find(layer[y])
    return len({find(i) for i in range(n)}) == 1


def enumerate_tableau(index: ModuliIndex, widths: tuple[int, ...]) -> list[Cell]:
    """All non-degenerate cells on one tableau, by DFS over jump sequences.

    Pruning: jumps fix every ``(i,0)`` (S1 + S2), each jump has norm >= 1
    (S6), the remaining norm budget bounds both the distance of the current
    cycle count from ``n + m`` (S4) and the number of symbols ``(i,j+1)`` still
    to be moved (S6, second clause).  S3 is checked on every prefix, S7 at the
    leaves.
    """
    h, n, m = index.h, index.n, index.m
    target = n + m
    sigma0 = standard_cycle(widths)
    size = len(sigma0)
    zeros = []
    off = 0
    for p in widths:
        zeros.append(off)
        off += p + 1
    movable_mask = ((1 << size) - 1) & ~sum(1 << z for z in zeros)
    layer = _layer_of(widths)
    check_zeros = n > 1
    if movable_mask.bit_count() > 2 * h:
        return []
    jumps = jump_table(widths, h)
    out: list[Cell] = []
    seq = [sigma0]

    def dfs(sigma, budget, uncovered):
        if budget == 0:
            if uncovered == 0 and cycle_count_images(sigma) == target:
                if n == 1 or _connected(seq, layer, n):
                    out.append(Cell(len(seq) - 1, widths, tuple(reversed(seq))))
            return
        for d in range(1, budget + 1):
            rest = budget - d
            limit = 2 * rest
            for tau, supp in jumps[d]:
                unc = uncovered & ~supp
                if unc.bit_count() > limit:
                    continue
                s = compose(tau, sigma)
                if abs(cycle_count_images(s) - target) > rest:
                    continue
                if check_zeros and _has_joined_zeros(s, zeros):
                    continue
                seq.append(s)
                dfs(s, rest, unc)
                seq.pop()

    dfs(sigma0, h, movable_mask)
    return out


@dataclass(frozen=True)
class CellSet:
    index: ModuliIndex
    cells: tuple[Cell, ...]  # canonical order
    by_degree: dict[int, tuple[Cell, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_degree: dict[int, list[Cell]] = {}
        for c in self.cells:
            by_degree.setdefault(c.degree, []).append(c)
        object.__setattr__(
            self, "by_degree", {d: tuple(cs) for d, cs in sorted(by_degree.items())}
        )

    @classmethod
    def from_cells(cls, index: ModuliIndex, cells: Iterable[Cell]) -> "CellSet":
        return cls(index, tuple(sorted(set(cells), key=Cell.sort_key)))

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __contains__(self, cell) -> bool:
        return cell in self.lookup

    @cached_property
    def lookup(self) -> frozenset:
        return frozenset(self.cells)

    def bidegree_counts(self) -> dict[tuple[int, tuple[int, ...]], int]:
        counts: dict = {}
        for c in self.cells:
            counts[c.bidegree] = counts.get(c.bidegree, 0) + 1
        return dict(sorted(counts.items()))

    def counts_per_degree(self) -> list[int]:
        """Cell counts in total degrees ``0..3h``."""
        top = max(self.index.dimension, max(self.by_degree, default=0))
        return [len(self.by_degree.get(d, ())) for d in range(top + 1)]


def _enumerate_job(args):
    index, widths = args
    return enumerate_tableau(index, widths)


def enumerate_nondegenerate(
    index: ModuliIndex, max_h: int = DEFAULT_MAX_H, workers: int = 1
) -> CellSet:
    """All non-degenerate cells of ``P_{g,n}^m``.

    Tableaux are independent DFS roots; with ``workers > 1`` they are farmed
    out to processes.  The result is sorted canonically either way.
    """
    if index.h > max_h:
        raise BudgetExceeded(index.h, max_h)
    jobs = [(index, w) for w in tableaux(index)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_enumerate_job, jobs))
    else:
        parts = [_enumerate_job(j) for j in jobs]
    cells = [c for part in parts for c in part]
    log.info("enumerated %d cells for %s", len(cells), index)
    return CellSet.from_cells(index, cells)


def enumerate_by_face_closure(index: ModuliIndex, max_h: int = DEFAULT_MAX_H) -> CellSet:
    """Cross-check enumeration: top cells, then all non-degenerate iterated faces.

    Top cells have ``q = h`` and ``h`` jumps that are transpositions on
    ``2h`` movable symbols; they are found by brute force over transposition
    sequences and filtered with :func:`is_nondegenerate`.
    """
    if index.h > max_h:
        raise BudgetExceeded(index.h, max_h)
    h, n = index.h, index.n
    top: set[Cell] = set()
    for widths in tableaux(index):
        if sum(widths) != 2 * h:
            continue
        size = n + sum(widths)
        sigma0 = standard_cycle(widths)
        zero = set(Tableau(widths).offsets)
        movable = [x for x in range(size) if x not in zero]
        trans = []
        for a, b in combinations(movable, 2):
            t = list(range(size))
            t[a], t[b] = b, a
            trans.append(tuple(t))

        def rec(seq):
            if len(seq) == h + 1:
                cell = Cell(h, widths, tuple(reversed(seq)))
                if is_nondegenerate(cell, index):
                    top.add(cell)
                return
            for t in trans:
                seq.append(compose(t, seq[-1]))
                rec(seq)
                seq.pop()

        rec([sigma0])
    found = set(top)
    frontier = list(top)
    while frontier:
        nxt = []
        for c in frontier:
            for _, f in boundary_faces(c):
                if f not in found and is_nondegenerate(f, index):
                    found.add(f)
                    nxt.append(f)
        frontier = nxt
    if index.h == 0:
        found.add(Cell(0, (0,) * n, (standard_cycle((0,) * n),)))
    return CellSet.from_cells(index, found)


# -- cache -----------------------------------------------------------------------------

def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, ".slitkit-cache"))


def cache_path(index: ModuliIndex, directory: Path | None = None) -> Path:
    directory = cache_dir() if directory is None else Path(directory)
    return directory / f"cells-g{index.g}-n{index.n}-m{index.m}.txt"


def header(index: ModuliIndex) -> str:
    return f"{CACHE_VERSION} g={index.g} n={index.n} m={index.m} h={index.h}"


def write_cells(cellset: CellSet, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(header(cellset.index) + "\n")
        for c in cellset.cells:
            fh.write(str(c) + "\n")
    tmp.replace(path)


def read_cells(path: Path) -> CellSet:
    with open(path) as fh:
        head = fh.readline().split()
        if " ".join(head[:2]) != CACHE_VERSION:
            raise ValueError(f"{path}: not a {CACHE_VERSION} file")
        fields = dict(tok.split("=") for tok in head[2:])
        index = ModuliIndex(int(fields["g"]), int(fields["n"]), int(fields["m"]))
        if int(fields["h"]) != index.h:
            raise ValueError(f"{path}: inconsistent h in header")
        cells = [Cell.parse(line) for line in fh if line.strip()]
    return CellSet.from_cells(index, cells)


def load_or_enumerate(
    index: ModuliIndex,
    max_h: int = DEFAULT_MAX_H,
    workers: int = 1,
    use_cache: bool = True,
    write: bool = True,
) -> CellSet:
    """Read the cell cache for ``index`` if present, otherwise enumerate (and store)."""
    if index.h > max_h:
        raise BudgetExceeded(index.h, max_h)
    path = cache_path(index)
    if use_cache and path.exists():
        return read_cells(path)
    cellset = enumerate_nondegenerate(index, max_h=max_h, workers=workers)
    if use_cache and write:
        write_cells(cellset, path)
    return cellset
