"""Exact sparse linear algebra over the integers and prime fields.

The workhorse is :func:`_eliminate`, a Markowitz-style sparse elimination
that only pivots on units.  Over a prime field every nonzero entry is a unit,
so it finishes the job; over the integers it removes the (typically huge)
unimodular part and leaves a small residual block that is brought to Smith
form densely.  Extra right-hand-side vectors can be carried along through the
row operations, which is how :func:`preimage_order` works without ever
building transformation matrices.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

INFINITY = math.inf


@dataclass(frozen=True)
class SparseIntMatrix:
    rows: int
    cols: int
    entries: Mapping[tuple[int, int], int]

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
            v = int(v)
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None):
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if nrows else 0
        return cls(
            nrows,
            ncols,
            {(r, c): v for r, row in enumerate(rows) for c, v in enumerate(row) if v},
        )

    @classmethod
    def zeros(cls, rows: int, cols: int):
        return cls(rows, cols, {})

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: int | None = None, cols: int | None = None):
        rows = len(values) if rows is None else rows
        cols = len(values) if cols is None else cols
        return cls(rows, cols, {(i, i): v for i, v in enumerate(values)})

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def row_dicts(self) -> dict[int, dict[int, int]]:
        rows: dict[int, dict[int, int]] = {r: {} for r in range(self.rows)}
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        right = other.row_dicts()
        out: dict[tuple[int, int], int] = {}
        for (r, k), v in self.entries.items():
            for c, w in right[k].items():
                out[(r, c)] = out.get((r, c), 0) + v * w
        return SparseIntMatrix(self.rows, other.cols, out)

    def apply(self, vector: Sequence[int] | Mapping[int, int]) -> dict[int, int]:
        """Sparse matrix-vector product; returns the nonzero coordinates."""
        get = vector.get if isinstance(vector, Mapping) else (lambda c, _=0: vector[c])
        out: dict[int, int] = {}
        for (r, c), v in self.entries.items():
            x = get(c, 0)
            if x:
                out[r] = out.get(r, 0) + v * x
        return {r: v for r, v in out.items() if v}

    def is_zero(self) -> bool:
        return not self.entries

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "SparseIntMatrix":
        """Entry ``(r, c)`` moves to ``(row_perm[r], col_perm[c])``."""
        return SparseIntMatrix(
            self.rows,
            self.cols,
            {(row_perm[r], col_perm[c]): v for (r, c), v in self.entries.items()},
        )


@dataclass(frozen=True)
class SmithForm:
    invariant_factors: tuple[int, ...]
    shape: tuple[int, int]
    left: tuple[tuple[int, ...], ...] | None = None  # U
    right: tuple[tuple[int, ...], ...] | None = None  # V
    left_inverse: tuple[tuple[int, ...], ...] | None = None  # U^-1

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def torsion(self) -> list[int]:
        return [d for d in self.invariant_factors if d > 1]

    def rank_mod(self, p: int) -> int:
        return sum(1 for d in self.invariant_factors if d % p)


# -- core elimination ---------------------------------------------------------------------

def _eliminate(
    rows: dict[int, dict[int, int]],
    modulus: int | None = None,
    vectors: dict[int, dict[int, int]] | None = None,
):
    """Eliminate unit pivots in place.

    Returns ``(pivots, rows, vectors)`` where ``pivots`` is a list of
    ``(pivot value, carried vector entries of the pivot row)`` and ``rows`` /
    ``vectors`` hold what is left.  Row operations are applied to the carried
    vectors as well; column operations never touch them.
    """
    p = modulus
    if vectors is None:
        vectors = {}
    cols: dict[int, set[int]] = {}
    for r, row in rows.items():
        for c in row:
            cols.setdefault(c, set()).add(r)

    def is_unit(v):
        return v % p != 0 if p else v in (1, -1)

    heap = [(len(rs), c) for c, rs in cols.items()]
    heapq.heapify(heap)
    deferred: set[int] = set()
    pivots = []
    while True:
        if not heap:
            revived = [c for c in deferred if c in cols and any(is_unit(rows[r][c]) for r in cols[c])]
            if not revived:
                break
            for c in sorted(revived):
                deferred.discard(c)
                heapq.heappush(heap, (len(cols[c]), c))
            continue
        cnt, c = heapq.heappop(heap)
        rs = cols.get(c)
        if rs is None:
            continue
        if not rs:
            del cols[c]
            continue
        if cnt != len(rs):
            heapq.heappush(heap, (len(rs), c))
            continue
        best = None
        for r in rs:
            if is_unit(rows[r][c]):
                key = (len(rows[r]), r)
                if best is None or key < best:
                    best = key
        if best is None:
            deferred.add(c)
            continue
        r = best[1]
        prow = rows.pop(r)
        a = prow[c]
        pvec = vectors.pop(r, {})
        inv = pow(a, -1, p) if p else a
        for r2 in list(rs):
            if r2 == r:
                continue
            row2 = rows[r2]
            f = row2[c] * inv
            if p:
                f %= p
            for c2, v in prow.items():
                nv = row2.get(c2, 0) - f * v
                if p:
                    nv %= p
                if nv:
                    if c2 not in row2:
                        cols[c2].add(r2)
                    row2[c2] = nv
                elif c2 in row2:
                    del row2[c2]
                    cols[c2].discard(r2)
            if pvec:
                vec2 = vectors.setdefault(r2, {})
                for k, v in pvec.items():
                    nv = vec2.get(k, 0) - f * v
                    if p:
                        nv %= p
                    if nv:
                        vec2[k] = nv
                    else:
                        vec2.pop(k, None)
        for c2 in prow:
            cols[c2].discard(r)
        del cols[c]
        deferred.discard(c)
        pivots.append((a, pvec))
    return pivots, rows, vectors


def _dense_diagonalize(A: list[list[int]], W: list[list[int]] | None = None):
    """Diagonalize an integer matrix by unimodular row/column operations.

    ``W`` (same row count) receives the row operations.  Returns the list of
    ``(pivot, W-row)`` pairs and the list of W-rows of rows that ended up zero.
    The pivots need not form a divisibility chain.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if W is None:
        W = [[] for _ in range(m)]
    rows_left = list(range(m))
    cols_left = list(range(n))
    pairs = []
    while True:
        best = None
        for r in rows_left:
            row = A[r]
            for c in cols_left:
                v = row[c]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), r, c)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, r, c = best
        while True:
            a = A[r][c]
            moved = False
            for r2 in rows_left:
                if r2 != r and A[r2][c]:
                    f = A[r2][c] // a
                    if f:
                        A[r2] = [x - f * y for x, y in zip(A[r2], A[r])]
                        W[r2] = [x - f * y for x, y in zip(W[r2], W[r])]
                    if A[r2][c]:
                        r = r2  # smaller remainder becomes the pivot
                        moved = True
                        break
            if moved:
                continue
            for c2 in cols_left:
                if c2 != c and A[r][c2]:
                    f = A[r][c2] // a
                    if f:
                        for row in A:
                            row[c2] -= f * row[c]
                    if A[r][c2]:
                        c = c2
                        moved = True
                        break
            if not moved:
                break
        pairs.append((A[r][c], W[r]))
        rows_left.remove(r)
        cols_left.remove(c)
    zero_rows = [W[r] for r in rows_left]
    return pairs, zero_rows


def invariant_factors_from_diagonal(values: Iterable[int]) -> list[int]:
    """Smith invariant factors of a diagonal matrix with the given nonzero entries."""
    vals = sorted(abs(v) for v in values if v)
    ones = 0
    rest = []
    for v in vals:
        if v == 1:
            ones += 1
        else:
            rest.append(v)
    # diag(a, b) ~ diag(gcd, lcm); sweeping pairs yields the chain.
    k = len(rest)
    for i in range(k):
        for j in range(i + 1, k):
            a, b = rest[i], rest[j]
            g = math.gcd(a, b)
            rest[i], rest[j] = g, a // g * b
    ones += sum(1 for v in rest if v == 1)
    rest = sorted(v for v in rest if v != 1)
    return [1] * ones + rest


def _residual(rows: dict[int, dict[int, int]]):
    live_rows = sorted(r for r, row in rows.items() if row)
    live_cols = sorted({c for r in live_rows for c in rows[r]})
    col_pos = {c: i for i, c in enumerate(live_cols)}
    A = []
    for r in live_rows:
        dense = [0] * len(live_cols)
        for c, v in rows[r].items():
            dense[col_pos[c]] = v
        A.append(dense)
    return live_rows, A


# -- public operations ---------------------------------------------------------------------

def smith_normal_form(M: SparseIntMatrix, with_transforms: bool = False) -> SmithForm:
    """Invariant factors ``d_1 | d_2 | ... | d_r`` of ``M``.

    With ``with_transforms`` a dense reduction also returns unimodular ``U``,
    ``V`` (and ``U^-1``) with ``U M V = diag(d_1, ..., d_r, 0, ...)``.  That
    path is meant for small matrices.
    """
    if with_transforms:
        return _dense_smith(M)
    pivots, rows, _ = _eliminate(M.row_dicts())
    _, A = _residual(rows)
    pairs, _ = _dense_diagonalize(A)
    diag = [a for a, _ in pivots] + [a for a, _ in pairs]
    return SmithForm(tuple(invariant_factors_from_diagonal(diag)), M.shape)


def rank_mod_p(M: SparseIntMatrix, p: int) -> int:
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        return _rank_gf2(
            [sum(1 << c for c, v in row.items() if v % 2) for row in M.row_dicts().values()]
        )
    rows = {}
    for r, row in M.row_dicts().items():
        red = {c: v % p for c, v in row.items() if v % p}
        if red:
            rows[r] = red
    pivots, _, _ = _eliminate(rows, modulus=p)
    return len(pivots)


def _rank_gf2(bitrows: list[int]) -> int:
    pivots: dict[int, int] = {}
    for x in bitrows:
        while x:
            low = x & -x
            piv = pivots.get(low)
            if piv is None:
                pivots[low] = x
                break
            x ^= piv
    return len(pivots)


def in_span_gf2(M: SparseIntMatrix, v: Mapping[int, int]) -> bool:
    """Is ``v`` in the column span of ``M`` over F_2?"""
    cols = [0] * M.cols
    for (r, c), val in M.entries.items():
        if val % 2:
            cols[c] |= 1 << r
    target = sum(1 << r for r, val in v.items() if val % 2)
    return _rank_gf2(cols + [target]) == _rank_gf2(cols)


def rank(M: SparseIntMatrix) -> int:
    """Rank over the rationals (number of invariant factors)."""
    return smith_normal_form(M).rank


def preimage_order(M: SparseIntMatrix, v: Sequence[int] | Mapping[int, int]):
    """Smallest ``t >= 1`` with ``t*v`` in the column image of ``M``, or ``INFINITY``."""
    vec = dict(v) if isinstance(v, Mapping) else {r: x for r, x in enumerate(v) if x}
    if len(vec) and max(vec) >= M.rows:
        raise ValueError("vector longer than the matrix has rows")
    vectors = {r: {0: x} for r, x in vec.items() if x}
    if not vectors:
        return 1
    pivots, rows, vectors = _eliminate(M.row_dicts(), vectors=vectors)
    order = 1
    for a, w in pivots:
        x = w.get(0, 0)
        if x:
            order = math.lcm(order, abs(a) // math.gcd(a, x))
    live, A = _residual(rows)
    W = [[vectors.get(r, {}).get(0, 0)] for r in live]
    pairs, zero_rows = _dense_diagonalize(A, W)
    for a, w in pairs:
        if w[0]:
            order = math.lcm(order, abs(a) // math.gcd(a, w[0]))
    live_set = set(live)
    for r, w in vectors.items():
        if r in rows and r not in live_set and w.get(0, 0):
            return INFINITY  # zero row with a nonzero target entry
    if any(w[0] for w in zero_rows):
        return INFINITY
    return order


# -- dense Smith form with transforms -----------------------------------------------------

def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _dense_smith(M: SparseIntMatrix) -> SmithForm:
    A = M.to_dense()
    m, n = M.rows, M.cols
    U, Uinv, V = _identity(m), _identity(m), _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for row in Uinv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row_dst -= f * row_src
        A[dst] = [x - f * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x - f * y for x, y in zip(U[dst], U[src])]
        for row in Uinv:  # Uinv <- Uinv * E^-1 : col_src += f * col_dst
            row[src] += f * row[dst]

    def add_col(dst, src, f):  # col_dst -= f * col_src
        for row in A:
            row[dst] -= f * row[src]
        for row in V:
            row[dst] -= f * row[src]

    def negate_row(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]
        for row in Uinv:
            row[i] = -row[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < best[0]):
                    best = (abs(A[i][j]), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, A[i][t] // A[t][t])
                    if A[i][t]:
                        swap_rows(t, i)
                        done = False
                        break
            if not done:
                continue
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, A[t][j] // A[t][t])
                    if A[t][j]:
                        swap_cols(t, j)
                        done = False
                        break
            if not done:
                continue
            # divisibility: fold a non-divisible entry into row t and retry
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
            add_row(t, bad, -1)
        if A[t][t] < 0:
            negate_row(t)
        t += 1
    factors = tuple(A[i][i] for i in range(t))
    freeze = lambda X: tuple(tuple(r) for r in X)
    return SmithForm(factors, M.shape, freeze(U), freeze(V), freeze(Uinv))


# -- Matrix Market ------------------------------------------------------------------------

def to_matrix_market(M: SparseIntMatrix) -> str:
    lines = ["%%MatrixMarket matrix coordinate integer general", f"{M.rows} {M.cols} {M.nnz}"]
    for (r, c), v in sorted(M.entries.items()):
        lines.append(f"{r + 1} {c + 1} {v}")
    return "\n".join(lines) + "\n"


def from_matrix_market(text: str) -> SparseIntMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("%")]
    rows, cols, nnz = map(int, lines[0].split())
    entries = {}
    for ln in lines[1 : 1 + nnz]:
        r, c, v = ln.split()
        entries[(int(r) - 1, int(c) - 1)] = int(v)
    return SparseIntMatrix(rows, cols, entries)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))
