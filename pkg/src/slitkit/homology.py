"""Relative cochain complex of (P, P') and the homology of the moduli space.

Cochains live on non-degenerate cells; faces that land on degenerate cells
are simply dropped (the quotient by P').  Homology of the moduli space in
degree ``k`` is read off as cohomology in degree ``3h - k``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

from .algebra import SmithForm, SparseIntMatrix, rank_mod_p, smith_normal_form, _is_prime
from .cells import Cell, CellSet, ModuliIndex, boundary_faces, load_or_enumerate

log = logging.getLogger(__name__)


class ChainComplexError(RuntimeError):
    """The assembled coboundary does not square to zero."""


class UnsupportedOrientation(ValueError):
    """Integral (or odd-prime) coefficients requested with two or more punctures."""


@dataclass(frozen=True)
class Ring:
    """Coefficient ring: ``Ring(0)`` is the integers, ``Ring(p)`` the field F_p."""

    characteristic: int = 0

    @classmethod
    def parse(cls, tag: str) -> "Ring":
        t = tag.strip().upper()
        if t == "Z":
            return cls(0)
        if t.startswith("F") and t[1:].isdigit():
            p = int(t[1:])
            if not _is_prime(p):
                raise ValueError(f"F{p}: {p} is not prime")
            return cls(p)
        raise ValueError(f"unknown coefficient ring {tag!r} (use z, f2, f<p>)")

    @property
    def is_field(self) -> bool:
        return self.characteristic > 0

    @property
    def tag(self) -> str:
        return "Z" if self.characteristic == 0 else f"F{self.characteristic}"


Z = Ring(0)
F2 = Ring(2)


def check_orientation(index: ModuliIndex, ring: Ring) -> None:
    if index.m >= 2 and ring.characteristic != 2:
        raise UnsupportedOrientation(
            f"{ring.tag} coefficients need a constant orientation system; "
            f"m={index.m} >= 2 punctures only supports F2"
        )


@dataclass
class GradedMatrixComplex:
    """Bases per cochain degree and coboundaries ``delta[d]: C^d -> C^{d+1}``.

    ``delta[d]`` has rows indexed by degree ``d+1`` cells and columns by
    degree ``d`` cells, both in canonical order.
    """

    index: ModuliIndex
    bases: dict[int, tuple[Cell, ...]]
    delta: dict[int, SparseIntMatrix]
    positions: dict[Cell, int] = field(repr=False, default_factory=dict)

    @property
    def degrees(self) -> range:
        return range(0, self.index.dimension + 1)

    def basis(self, d: int) -> tuple[Cell, ...]:
        return self.bases.get(d, ())

    def coboundary(self, d: int) -> SparseIntMatrix:
        """``delta_d``; zero matrices outside the populated range."""
        if d in self.delta:
            return self.delta[d]
        return SparseIntMatrix.zeros(len(self.basis(d + 1)), len(self.basis(d)))

    def verify(self) -> None:
        for d in self.degrees:
            prod = self.coboundary(d + 1) @ self.coboundary(d)
            if not prod.is_zero():
                (r, c), v = next(iter(sorted(prod.entries.items())))
                raise ChainComplexError(
                    f"delta^2 != 0 in degree {d}: "
                    f"{self.basis(d + 2)[r]} <- {self.basis(d)[c]} has coefficient {v}"
                )


def assemble_cochain_complex(cells: CellSet, verify: bool = True) -> GradedMatrixComplex:
    bases = {d: tuple(cs) for d, cs in cells.by_degree.items()}
    positions = {c: i for cs in bases.values() for i, c in enumerate(cs)}
    entries: dict[int, dict[tuple[int, int], int]] = {}
    for d, cs in bases.items():
        if d == 0:
            continue
        target = entries.setdefault(d - 1, {})
        for r, cell in enumerate(cs):
            for sign, face in boundary_faces(cell):
                col = positions.get(face)
                if col is None:
                    continue
                key = (r, col)
                target[key] = target.get(key, 0) + sign
    delta = {}
    for d in range(0, cells.index.dimension + 1):
        rows, cols = len(bases.get(d + 1, ())), len(bases.get(d, ()))
        delta[d] = SparseIntMatrix(rows, cols, entries.get(d, {}))
    cx = GradedMatrixComplex(cells.index, bases, delta, positions)
    if verify:
        cx.verify()
    return cx


@dataclass(frozen=True)
class HomologyGroup:
    degree: int
    betti: int
    torsion: tuple[int, ...] = ()

    @property
    def is_zero(self) -> bool:
        return self.betti == 0 and not self.torsion

    def __str__(self) -> str:
        parts = []
        if self.betti:
            parts.append("Z" if self.betti == 1 else f"Z^{self.betti}")
        counts: dict[int, int] = {}
        for t in self.torsion:
            counts[t] = counts.get(t, 0) + 1
        for t, k in sorted(counts.items()):
            parts.append(f"Z_{t}" if k == 1 else f"Z_{t}^{k}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class HomologyTable:
    index: ModuliIndex
    ring: Ring
    groups: tuple[HomologyGroup, ...]  # homological degrees 0..3h
    cells_per_degree: tuple[int, ...]

    def group(self, k: int) -> HomologyGroup:
        if 0 <= k < len(self.groups):
            return self.groups[k]
        return HomologyGroup(k, 0)

    def nonzero(self) -> list[HomologyGroup]:
        return [g for g in self.groups if not g.is_zero]

    def ranks(self) -> list[int]:
        """Betti numbers (dimensions for field coefficients) up to the last nonzero group."""
        out = [g.betti for g in self.groups]
        while out and out[-1] == 0 and self.groups[len(out) - 1].is_zero:
            out.pop()
        return out

    def to_dict(self) -> dict:
        return {
            "g": self.index.g,
            "n": self.index.n,
            "m": self.index.m,
            "coefficients": self.ring.tag,
            "h": self.index.h,
            "homology": [
                {"degree": g.degree, "betti": g.betti, "torsion": sorted(g.torsion)}
                for g in self.groups
            ],
            "cells_per_degree": list(self.cells_per_degree),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def euler_characteristic(self) -> int:
        return sum((-1) ** g.degree * g.betti for g in self.groups)


def cochain_ranks(cx: GradedMatrixComplex, ring: Ring) -> dict[int, SmithForm | int]:
    """Per degree: the Smith form of ``delta_d`` (integers) or its rank (fields)."""
    out = {}
    for d in cx.degrees:
        M = cx.coboundary(d)
        if ring.is_field:
            out[d] = rank_mod_p(M, ring.characteristic) if M.nnz else 0
        else:
            out[d] = smith_normal_form(M)
    return out


def cohomology_from_complex(cx: GradedMatrixComplex, ring: Ring) -> dict[int, HomologyGroup]:
    """Cohomology ``H^d`` of the relative cochain complex, keyed by cochain degree."""
    reductions = cochain_ranks(cx, ring)

    def rk(d):
        if d not in reductions:
            return 0
        x = reductions[d]
        return x if isinstance(x, int) else x.rank

    out = {}
    for d in cx.degrees:
        dim = len(cx.basis(d))
        free = dim - rk(d) - rk(d - 1)
        torsion = ()
        if not ring.is_field and (d - 1) in reductions:
            torsion = tuple(reductions[d - 1].torsion)
        out[d] = HomologyGroup(d, free, torsion)
    return out


def homology_groups(
    index: ModuliIndex,
    ring: Ring = Z,
    cells: CellSet | None = None,
    complex_: GradedMatrixComplex | None = None,
    max_h: int = 5,
    workers: int = 1,
) -> HomologyTable:
    """``H_*(M_{g,n}^m; ring)`` via ``H_k = H^{3h-k}(P, P')``."""
    check_orientation(index, ring)
    if complex_ is None:
        if cells is None:
            cells = load_or_enumerate(index, max_h=max_h, workers=workers)
        complex_ = assemble_cochain_complex(cells)
    coh = cohomology_from_complex(complex_, ring)
    top = index.dimension
    groups = tuple(
        HomologyGroup(k, coh[top - k].betti, coh[top - k].torsion) for k in range(top + 1)
    )
    counts = tuple(len(complex_.basis(d)) for d in range(top + 1))
    return HomologyTable(index, ring, groups, counts)


# -- column complexes ---------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnReport:
    p: int
    cells_per_q: tuple[int, ...]
    homology: tuple[HomologyGroup, ...]  # chain homology indexed by q
    top_degree: int

    @property
    def concentrated(self) -> bool:
        return all(g.is_zero for g in self.homology if g.degree != self.top_degree)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "cells_per_q": list(self.cells_per_q),
            "homology": [
                {"degree": g.degree, "betti": g.betti, "torsion": sorted(g.torsion)}
                for g in self.homology
            ],
            "top_degree": self.top_degree,
            "concentrated": self.concentrated,
        }


def column_concentration(cells: CellSet | ModuliIndex, p) -> ColumnReport:
    """Chain homology of the fixed-``p`` column (only ``d'`` faces), ``n = 1``.

    ``cells`` may be a :class:`CellSet` or just the index (cells are then
    loaded or enumerated); ``p`` is an int or a one-element width tuple.  The
    column counts as concentrated if its homology vanishes outside ``q = h``.
    """
    if isinstance(cells, ModuliIndex):
        cells = load_or_enumerate(cells)
    if not isinstance(p, int):
        (p,) = tuple(p)
    index = cells.index
    if index.n != 1:
        raise ValueError("column complexes are defined for n = 1")
    h = index.h
    by_q: dict[int, list[Cell]] = {q: [] for q in range(h + 1)}
    for c in cells:
        if c.widths == (p,):
            by_q[c.q].append(c)
    pos = {c: i for cs in by_q.values() for i, c in enumerate(cs)}
    # boundary d_q: C_q -> C_{q-1}; rows = q-1 cells, cols = q cells
    bd: dict[int, SmithForm] = {}
    for q in range(1, h + 1):
        entries: dict[tuple[int, int], int] = {}
        for col, c in enumerate(by_q[q]):
            for k in range(q + 1):
                pos_k = q - k
                face = Cell(q - 1, c.widths, c.perms[:pos_k] + c.perms[pos_k + 1:])
                row = pos.get(face)
                if row is not None:
                    entries[(row, col)] = entries.get((row, col), 0) + (-1) ** k
        bd[q] = smith_normal_form(SparseIntMatrix(len(by_q[q - 1]), len(by_q[q]), entries))
    groups = []
    for q in range(h + 1):
        dim = len(by_q[q])
        r_out = bd[q].rank if q in bd else 0
        r_in = bd[q + 1].rank if (q + 1) in bd else 0
        tors = tuple(bd[q + 1].torsion) if (q + 1) in bd else ()
        groups.append(HomologyGroup(q, dim - r_out - r_in, tors))
    return ColumnReport(p, tuple(len(by_q[q]) for q in range(h + 1)), tuple(groups), h)


def column_widths(cells: CellSet) -> list[int]:
    return sorted({c.widths[0] for c in cells})
