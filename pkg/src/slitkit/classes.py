"""Cohomology classes of (P, P') as relative cocycles, and the stacking product.

A class of ``H_k(M)`` is carried by a cocycle of degree ``3h - k``.  The
stacking product puts one slit picture (the left factor) in the lower band
of a single plane and the other in the upper band.  On a target cell this
means: its jumps split into those moving only symbols ``1..p1`` and those
moving only ``p1+1..p``, the lower top strip and upper bottom strip merging
into the strip ``p1``.

Summing over all time shuffles of such a splitting is not a chain map (it is
dual to subdivision, which points the wrong way).  The product used here is
of Alexander-Whitney type in both directions: the split symbol ``p1`` is the
shared vertex vertically, and only the cells whose lower jumps all come
first in time contribute, so ``sigma_{q1}`` is the shared vertex in time.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

from .algebra import (
    INFINITY,
    SparseIntMatrix,
    in_span_gf2,
    preimage_order,
    rank_mod_p,
    smith_normal_form,
)
from .cells import Cell, ModuliIndex, load_or_enumerate, standard_cycle
from .homology import GradedMatrixComplex, assemble_cochain_complex
from .perm import compose, inverse


class NotACocycle(ValueError):
    pass


@lru_cache(maxsize=16)
def complex_for(index: ModuliIndex, max_h: int = 5) -> GradedMatrixComplex:
    """Assembled relative cochain complex for ``index`` (memoized)."""
    return assemble_cochain_complex(load_or_enumerate(index, max_h=max_h))


@dataclass(frozen=True)
class Cochain:
    index: ModuliIndex
    degree: int
    support: Mapping[Cell, int]
    modulus: int = 0  # 0: integers, p: F_p

    def __post_init__(self):
        clean = {}
        for cell, v in self.support.items():
            if cell.degree != self.degree:
                raise ValueError(f"cell {cell} has degree {cell.degree}, expected {self.degree}")
            v = int(v) % self.modulus if self.modulus else int(v)
            if v:
                clean[cell] = v
        object.__setattr__(self, "support", dict(sorted(clean.items(), key=lambda kv: kv[0].sort_key())))

    @classmethod
    def dual(cls, index: ModuliIndex, cell: Cell, coeff: int = 1, modulus: int = 0) -> "Cochain":
        return cls(index, cell.degree, {cell: coeff}, modulus)

    @classmethod
    def zero(cls, index: ModuliIndex, degree: int, modulus: int = 0) -> "Cochain":
        return cls(index, degree, {}, modulus)

    @classmethod
    def from_vector(
        cls, cx: GradedMatrixComplex, degree: int, vector: Mapping[int, int] | list[int], modulus: int = 0
    ) -> "Cochain":
        basis = cx.basis(degree)
        items = vector.items() if isinstance(vector, Mapping) else enumerate(vector)
        return cls(cx.index, degree, {basis[i]: v for i, v in items if v}, modulus)

    def is_zero(self) -> bool:
        return not self.support

    def vector(self, cx: GradedMatrixComplex) -> dict[int, int]:
        pos = cx.positions
        out = {}
        for cell, v in self.support.items():
            if cell not in pos or cell.degree != self.degree:
                raise ValueError(f"{cell} is not a non-degenerate cell of {self.index}")
            out[pos[cell]] = v
        return out

    def reduce(self, p: int) -> "Cochain":
        return Cochain(self.index, self.degree, self.support, p)

    def _combine(self, other: "Cochain", sign: int) -> "Cochain":
        if (self.index, self.degree, self.modulus) != (other.index, other.degree, other.modulus):
            raise ValueError("cochains live in different groups")
        out = dict(self.support)
        for c, v in other.support.items():
            out[c] = out.get(c, 0) + sign * v
        return Cochain(self.index, self.degree, out, self.modulus)

    def __add__(self, other: "Cochain") -> "Cochain":
        return self._combine(other, 1)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self._combine(other, -1)

    def __neg__(self) -> "Cochain":
        return self.scale(-1)

    def scale(self, k: int) -> "Cochain":
        return Cochain(self.index, self.degree, {c: k * v for c, v in self.support.items()}, self.modulus)

    def to_dict(self) -> dict:
        return {
            "g": self.index.g,
            "n": self.index.n,
            "m": self.index.m,
            "degree": self.degree,
            "coefficients": "Z" if not self.modulus else f"F{self.modulus}",
            "support": [{"cell": str(c), "coeff": v} for c, v in self.support.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "Cochain":
        index = ModuliIndex(int(data["g"]), int(data["n"]), int(data["m"]))
        coeff = str(data.get("coefficients", "Z")).upper()
        modulus = 0 if coeff == "Z" else int(coeff[1:])
        support = {Cell.parse(e["cell"]): int(e["coeff"]) for e in data["support"]}
        return cls(index, int(data["degree"]), support, modulus)

    @classmethod
    def from_json(cls, text: str) -> "Cochain":
        return cls.from_dict(json.loads(text))


def _complex(x: Cochain, cx: GradedMatrixComplex | None) -> GradedMatrixComplex:
    if cx is None:
        cx = complex_for(x.index)
    if cx.index != x.index:
        raise ValueError("complex and cochain belong to different moduli spaces")
    if not 0 <= x.degree <= x.index.dimension:
        raise ValueError(f"degree {x.degree} outside 0..{x.index.dimension}")
    return cx


def coboundary(x: Cochain, cx: GradedMatrixComplex | None = None) -> Cochain:
    cx = _complex(x, cx)
    image = cx.coboundary(x.degree).apply(x.vector(cx))
    return Cochain.from_vector(cx, x.degree + 1, image, x.modulus) if x.degree < x.index.dimension \
        else Cochain.zero(x.index, x.degree + 1, x.modulus)


def is_cocycle(x: Cochain, cx: GradedMatrixComplex | None = None) -> bool:
    cx = _complex(x, cx)
    image = cx.coboundary(x.degree).apply(x.vector(cx))
    if x.modulus:
        return all(v % x.modulus == 0 for v in image.values())
    return not image


def _require_cocycle(x: Cochain, cx: GradedMatrixComplex) -> None:
    if not is_cocycle(x, cx):
        raise NotACocycle(f"degree-{x.degree} cochain on {x.index} is not a cocycle")


def class_order(x: Cochain, cx: GradedMatrixComplex | None = None):
    """Smallest ``t >= 1`` with ``t*x`` a coboundary (``INFINITY`` if none)."""
    cx = _complex(x, cx)
    _require_cocycle(x, cx)
    if x.modulus:
        return 1 if is_coboundary(x, cx) else x.modulus
    if x.degree == 0:
        return 1 if x.is_zero() else INFINITY
    return preimage_order(cx.coboundary(x.degree - 1), x.vector(cx))


def is_coboundary(x: Cochain, cx: GradedMatrixComplex | None = None) -> bool:
    cx = _complex(x, cx)
    if x.is_zero():
        return True
    if x.degree == 0:
        return False
    M = cx.coboundary(x.degree - 1)
    v = x.vector(cx)
    if x.modulus == 2:
        return in_span_gf2(M, v)
    if x.modulus:
        aug = dict(M.entries)
        for r, val in v.items():
            aug[(r, M.cols)] = val
        A = SparseIntMatrix(M.rows, M.cols + 1, aug)
        return rank_mod_p(A, x.modulus) == rank_mod_p(M, x.modulus)
    return preimage_order(M, v) == 1


def is_nonzero_class(x: Cochain, cx: GradedMatrixComplex | None = None) -> bool:
    cx = _complex(x, cx)
    _require_cocycle(x, cx)
    return not is_coboundary(x, cx)


# -- coordinates -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassCoordinates:
    """Coordinates of a class: torsion part ``(value, order)`` pairs, then free part."""

    torsion: tuple[tuple[int, int], ...]
    free: tuple[int, ...]

    def is_zero(self) -> bool:
        return all(v == 0 for v, _ in self.torsion) and all(v == 0 for v in self.free)


@dataclass(frozen=True)
class CohomologyBasis:
    """Integral basis of ``H^d`` computed from Smith transforms (dense; small complexes)."""

    degree: int
    torsion_orders: tuple[int, ...]
    torsion_generators: tuple[dict[int, int], ...]
    free_generators: tuple[dict[int, int], ...]
    _U: tuple = field(repr=False)
    _r: int = field(repr=False)
    _factors: tuple = field(repr=False)
    _Winv: tuple = field(repr=False)
    _r2: int = field(repr=False)

    def coordinates(self, vector: Mapping[int, int], size: int) -> ClassCoordinates:
        y = [sum(row[j] * v for j, v in vector.items()) for row in self._U] if self._U else [
            vector.get(i, 0) for i in range(size)
        ]
        torsion = tuple(
            (y[i] % d, d) for i, d in enumerate(self._factors) if d > 1
        )
        yf = y[self._r:]
        if self._Winv:
            w = [sum(row[j] * yf[j] for j in range(len(yf))) for row in self._Winv]
            free = tuple(w[self._r2:])
        else:
            free = tuple(yf)
        return ClassCoordinates(torsion, free)


def _transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def cohomology_basis(cx: GradedMatrixComplex, d: int) -> CohomologyBasis:
    n_d = len(cx.basis(d))
    M = cx.coboundary(d - 1) if d > 0 else SparseIntMatrix.zeros(n_d, 0)
    N = cx.coboundary(d)
    sm = smith_normal_form(M, with_transforms=True)
    r = sm.rank
    U = [list(row) for row in sm.left] if sm.left else [[int(i == j) for j in range(n_d)] for i in range(n_d)]
    Uinv = [list(row) for row in sm.left_inverse] if sm.left_inverse else U
    tors_orders, tors_gens = [], []
    for i, fac in enumerate(sm.invariant_factors):
        if fac > 1:
            tors_orders.append(fac)
            tors_gens.append({k: Uinv[k][i] for k in range(n_d) if Uinv[k][i]})
    # N' = N * Uinv[:, r:]
    Nd = N.to_dense()
    cols_free = n_d - r
    Np = [[sum(Nd[a][k] * Uinv[k][r + j] for k in range(n_d)) for j in range(cols_free)] for a in range(N.rows)]
    if N.rows and cols_free:
        snt = smith_normal_form(SparseIntMatrix.from_dense(_transpose(Np), ncols=N.rows), with_transforms=True)
        r2 = snt.rank
        W = _transpose([list(row) for row in snt.left])  # columns r2.. span ker N'
        Winv = _transpose([list(row) for row in snt.left_inverse])
    else:
        r2 = 0
        W = [[int(i == j) for j in range(cols_free)] for i in range(cols_free)]
        Winv = W
    free_gens = []
    for j in range(r2, cols_free):
        vec = {}
        for k in range(n_d):
            s = sum(Uinv[k][r + t] * W[t][j] for t in range(cols_free))
            if s:
                vec[k] = s
        free_gens.append(vec)
    return CohomologyBasis(
        d,
        tuple(tors_orders),
        tuple(tors_gens),
        tuple(free_gens),
        tuple(tuple(row) for row in U),
        r,
        tuple(sm.invariant_factors),
        tuple(tuple(row) for row in Winv),
        r2,
    )


def class_coordinates(x: Cochain, cx: GradedMatrixComplex | None = None) -> ClassCoordinates:
    """Coordinates of ``[x]`` in the basis of :func:`cohomology_basis` (integral cochains)."""
    cx = _complex(x, cx)
    _require_cocycle(x, cx)
    if x.modulus:
        raise ValueError("class_coordinates is integral; use is_nonzero_class over F_p")
    basis = cohomology_basis(cx, x.degree)
    return basis.coordinates(x.vector(cx), len(cx.basis(x.degree)))


def cohomology_generators(index: ModuliIndex, degree: int) -> tuple[list[Cochain], list[tuple[int, Cochain]]]:
    """Free generators and ``(order, generator)`` torsion pairs of ``H^degree``."""
    cx = complex_for(index)
    basis = cohomology_basis(cx, degree)
    free = [Cochain.from_vector(cx, degree, v) for v in basis.free_generators]
    tors = [
        (o, Cochain.from_vector(cx, degree, v))
        for o, v in zip(basis.torsion_orders, basis.torsion_generators)
    ]
    return free, tors


# -- stacking product -----------------------------------------------------------------------

def _support_mask(t) -> int:
    mask = 0
    for a, b in enumerate(t):
        if a != b:
            mask |= 1 << a
    return mask


def _rebuild(jumps, lo: int, size: int) -> Cell:
    """Cell on ``[size - 1]`` from jumps acting on symbols ``lo..lo+size-1``."""
    sigma = standard_cycle((size - 1,))
    seq = [sigma]
    for t in jumps:
        local = tuple(t[lo + j] - lo for j in range(size))
        sigma = compose(local, sigma)
        seq.append(sigma)
    return Cell(len(jumps), (size - 1,), tuple(reversed(seq)))


def decompositions(cell: Cell) -> Iterator[tuple[int, tuple[int, ...], Cell, Cell]]:
    """All ways to read a one-layer cell as a stacked pair.

    Yields ``(p1, lower time indices, lower cell, upper cell)``; time indices
    are ``1..q`` (jump ``k`` is ``sigma_k sigma_{k-1}^-1``).
    """
    if len(cell.widths) != 1:
        raise ValueError("stacking is defined for one boundary curve")
    p = cell.widths[0]
    jumps = cell.jumps()
    masks = [_support_mask(t) for t in jumps]
    for p1 in range(p + 1):
        lower_bits = ((1 << (p1 + 1)) - 1) & ~1
        upper_bits = ((1 << (p + 1)) - 1) & ~((1 << (p1 + 1)) - 1)
        lower_t, upper_t = [], []
        ok = True
        for k, mask in enumerate(masks, start=1):
            if mask & ~lower_bits == 0:
                lower_t.append(k)
            elif mask & ~upper_bits == 0:
                upper_t.append(k)
            else:
                ok = False
                break
        if not ok:
            continue
        lower = _rebuild([jumps[k - 1] for k in lower_t], 0, p1 + 1)
        upper = _rebuild([jumps[k - 1] for k in upper_t], p1, p - p1 + 1)
        yield p1, tuple(lower_t), lower, upper


def shuffle_sign(lower_times: tuple[int, ...], q: int, p_lower: int) -> int:
    """Koszul sign for ``(q1, p1) x (q2, p2) -> (q1 + q2, p1 + p2)``.

    Counts pairs (upper time, lower time) out of order, plus moving the lower
    ``p``-block past the upper ``q``-block.  For the lower-first cells used by
    :func:`stack_product` only the second term survives.
    """
    lower = set(lower_times)
    upper_times = [k for k in range(1, q + 1) if k not in lower]
    inversions = sum(1 for a in lower_times for b in upper_times if b < a)
    return -1 if (inversions + p_lower * len(upper_times)) % 2 else 1


def stacked_pairs(cell: Cell) -> Iterator[tuple[int, Cell, Cell, int]]:
    """Decompositions of ``cell`` with all lower jumps first, as ``(p1, lower, upper, sign)``."""
    for p1, lower_t, lower, upper in decompositions(cell):
        if lower_t == tuple(range(1, len(lower_t) + 1)):
            yield p1, lower, upper, shuffle_sign(lower_t, cell.q, p1)


def stack_product(x: Cochain, y: Cochain, target: GradedMatrixComplex | None = None) -> Cochain:
    """Cochain-level stacking product, ``x`` in the lower band."""
    if x.index.n != 1 or y.index.n != 1:
        raise ValueError("stacking needs n = 1 on both factors")
    if x.modulus != y.modulus:
        raise ValueError("factors have different coefficient rings")
    for z in (x, y):
        if not is_cocycle(z):
            raise NotACocycle(f"factor of degree {z.degree} on {z.index} is not a cocycle")
    index = ModuliIndex(x.index.g + y.index.g, 1, x.index.m + y.index.m)
    if target is None:
        target = complex_for(index)
    degree = x.degree + y.degree
    out: dict[Cell, int] = {}
    xs, ys = x.support, y.support
    for cell in target.basis(degree):
        total = 0
        for _, lower, upper, sign in stacked_pairs(cell):
            a = xs.get(lower)
            if not a:
                continue
            b = ys.get(upper)
            if not b:
                continue
            total += sign * a * b
        if total:
            out[cell] = total
    return Cochain(index, degree, out, x.modulus)


# -- fixture representatives ----------------------------------------------------------------

GENUS_ONE = ModuliIndex(1, 1, 0)
POINT = ModuliIndex(0, 1, 0)

#: the 5-cell of P_{1,1} whose dual carries the Dehn twist class
D_CELL = "2;3;(0,2,1,3)|(0,2,3)(1)|(0,1,2,3)"


def unit_cochain(modulus: int = 0) -> Cochain:
    cell = Cell(0, (0,), ((0,),))
    return Cochain(POINT, 0, {cell: 1}, modulus)


def d_rep(modulus: int = 0) -> Cochain:
    return Cochain.dual(GENUS_ONE, Cell.parse(D_CELL), 1, modulus)


def _free_generator(index: ModuliIndex, degree: int, modulus: int) -> Cochain:
    free, _ = cohomology_generators(index, degree)
    if len(free) != 1:
        raise RuntimeError(f"H^{degree} of {index} has free rank {len(free)}, expected 1")
    return free[0].reduce(modulus) if modulus else free[0]


def c_rep(modulus: int = 0) -> Cochain:
    """Generator of ``H^6(P_{1,1}, P') = Z`` (dual to the ground class of genus one)."""
    return _free_generator(GENUS_ONE, 6, modulus)


def a_rep(modulus: int = 0) -> Cochain:
    """Generator of ``H^3(P_{0,1}^1, P')`` (one puncture)."""
    return _free_generator(ModuliIndex(0, 1, 1), 3, modulus)


def b_rep(modulus: int = 2) -> Cochain:
    """Generator of ``H^5(P_{0,1}^2, P'; F_2)``, dual to the degree-one class with two punctures."""
    index = ModuliIndex(0, 1, 2)
    cx = complex_for(index)
    for cell in cx.basis(5):
        x = Cochain.dual(index, cell, 1, 2)
        if is_cocycle(x, cx) and not is_coboundary(x, cx):
            return x
    # fall back to sums of two duals
    cells = cx.basis(5)
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            x = Cochain(index, 5, {cells[i]: 1, cells[j]: 1}, 2)
            if is_cocycle(x, cx) and not is_coboundary(x, cx):
                return x
    raise RuntimeError("no generator of H^5(P_{0,1}^2; F2) found")
