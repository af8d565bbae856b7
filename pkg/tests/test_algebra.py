import itertools
import math
import random
from functools import reduce

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitkit.algebra import (
    INFINITY,
    SparseIntMatrix,
    from_matrix_market,
    in_span_gf2,
    preimage_order,
    rank,
    rank_mod_p,
    smith_normal_form,
    to_matrix_market,
)

M = SparseIntMatrix.from_dense


def det(A):
    n = len(A)
    if n == 0:
        return 1
    return sum((-1) ** j * A[0][j] * det([row[:j] + row[j + 1:] for row in A[1:]])
               for j in range(n) if A[0][j])


def minor_gcds(A):
    """Determinantal divisors d_k = gcd of all k x k minors (independent oracle)."""
    rows, cols = len(A), len(A[0]) if A else 0
    out = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                g = math.gcd(g, det([[A[r][c] for c in cs] for r in rs]))
        if g == 0:
            break
        out.append(g)
    return out


def factors_from_minors(A):
    d = minor_gcds(A)
    return tuple(d[i] // (d[i - 1] if i else 1) for i in range(len(d)))


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def random_matrix(rng, rows, cols, lo=-3, hi=3, density=0.6):
    return [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)]


class TestSmith:
    def test_diag_2_3(self):
        assert smith_normal_form(M([[2, 0], [0, 3]])).invariant_factors == (1, 6)

    def test_worked_example_matrix(self):
        sf = smith_normal_form(M([[-1, 1], [0, 1], [1, 1], [0, -1]]))
        assert sf.invariant_factors == (1, 1)
        assert sf.torsion == []

    def test_zero(self):
        assert smith_normal_form(SparseIntMatrix.zeros(3, 4)).rank == 0
        assert smith_normal_form(SparseIntMatrix.zeros(0, 0)).rank == 0

    def test_small_torsion(self):
        assert smith_normal_form(M([[2, 4], [6, 8]])).invariant_factors == (2, 4)
        assert smith_normal_form(M([[0, -1, 0, -1], [0, -1, 0, -1]])).invariant_factors == (1,)

    def test_against_minors(self):
        rng = random.Random(11)
        for _ in range(150):
            A = random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
            assert smith_normal_form(M(A)).invariant_factors == factors_from_minors(A), A

    def test_invariance_under_signed_permutation(self):
        rng = random.Random(5)
        for _ in range(50):
            A = random_matrix(rng, 6, 7)
            base = smith_normal_form(M(A)).invariant_factors
            rp, cp = list(range(6)), list(range(7))
            rng.shuffle(rp)
            rng.shuffle(cp)
            signs = [rng.choice((1, -1)) for _ in range(6)]
            B = [[signs[i] * A[rp[i]][cp[j]] for j in range(7)] for i in range(6)]
            assert smith_normal_form(M(B)).invariant_factors == base

    def test_transforms(self):
        rng = random.Random(7)
        for _ in range(60):
            rows, cols = rng.randint(1, 6), rng.randint(1, 6)
            A = random_matrix(rng, rows, cols, -5, 5)
            sf = smith_normal_form(M(A), with_transforms=True)
            U, V, Ui = [list(map(list, x)) for x in (sf.left, sf.right, sf.left_inverse)]
            D = matmul(matmul(U, A), V)
            for i in range(rows):
                for j in range(cols):
                    want = sf.invariant_factors[i] if i == j and i < sf.rank else 0
                    assert D[i][j] == want
            assert abs(det(U)) == 1 and abs(det(V)) == 1
            assert matmul(U, Ui) == [[int(i == j) for j in range(rows)] for i in range(rows)]
            assert sf.invariant_factors == smith_normal_form(M(A)).invariant_factors

    def test_divisibility_chain_sparse_large(self):
        rng = random.Random(2)
        A = random_matrix(rng, 40, 50, -2, 2, density=0.08)
        d = smith_normal_form(M(A)).invariant_factors
        assert all(b % a == 0 for a, b in zip(d, d[1:]))
        assert rank(M(A)) == len(d)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=1, max_size=4))
    def test_hypothesis_minors(self, A):
        assert smith_normal_form(M(A)).invariant_factors == factors_from_minors(A)


def rank_mod_p_oracle(A, p):
    """Rank over F_p by brute force: the largest k with a k x k minor nonzero mod p."""
    rows, cols = len(A), len(A[0])
    best = 0
    for k in range(1, min(rows, cols) + 1):
        if any(det([[A[r][c] for c in cs] for r in rs]) % p
               for rs in itertools.combinations(range(rows), k)
               for cs in itertools.combinations(range(cols), k)):
            best = k
    return best


class TestRankModP:
    def test_examples(self):
        assert rank_mod_p(M([[2]]), 2) == 0
        assert rank_mod_p(M([[1, 1], [1, 1]]), 2) == 1
        assert rank_mod_p(M([[0, -1, 0, -1], [0, -1, 0, -1]]), 2) == 1
        assert rank_mod_p(M([[3, 0], [0, 5]]), 3) == 1

    def test_non_prime(self):
        with pytest.raises(ValueError):
            rank_mod_p(M([[1]]), 4)

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_against_minors(self, p):
        rng = random.Random(p)
        for _ in range(80):
            A = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 4), -6, 6)
            assert rank_mod_p(M(A), p) == rank_mod_p_oracle(A, p)

    def test_agrees_with_smith(self):
        rng = random.Random(9)
        for _ in range(40):
            A = random_matrix(rng, 8, 9, -4, 4, density=0.3)
            sf = smith_normal_form(M(A))
            for p in (2, 3, 5):
                assert rank_mod_p(M(A), p) == sf.rank_mod(p)

    def test_span_gf2(self):
        A = M([[1, 0], [1, 1], [0, 1]])
        assert in_span_gf2(A, {0: 1, 2: 1})
        assert not in_span_gf2(A, {0: 1})
        assert in_span_gf2(A, {})


def preimage_oracle(A, v, bound=60, box=6):
    """Smallest t <= bound with t*v = A x for some small integer x, else None."""
    rows, cols = len(A), len(A[0])
    images = set()
    for x in itertools.product(range(-box, box + 1), repeat=cols):
        images.add(tuple(sum(A[r][c] * x[c] for c in range(cols)) for r in range(rows)))
    for t in range(1, bound + 1):
        if tuple(t * a for a in v) in images:
            return t
    return None


class TestPreimage:
    def test_examples(self):
        assert preimage_order(M([[2]]), [0]) == 1
        assert preimage_order(M([[2]]), [1]) == 2
        assert preimage_order(M([[1, 0], [0, 10]]), [0, 1]) == 10
        assert preimage_order(M([[1], [1]]), [1, 0]) == INFINITY
        assert preimage_order(SparseIntMatrix.zeros(2, 0), [0, 1]) == INFINITY

    def test_too_long(self):
        with pytest.raises(ValueError):
            preimage_order(M([[1]]), [0, 1])

    def test_against_search(self):
        rng = random.Random(4)
        for _ in range(40):
            A = random_matrix(rng, 3, 2, -3, 3)
            v = [rng.randint(-2, 2) for _ in range(3)]
            got = preimage_order(M(A), v)
            want = preimage_oracle(A, v)
            if want is not None:
                assert got == want, (A, v)
            else:
                # either genuinely infinite or needs a larger search box
                assert got == INFINITY or got > 1

    def test_multiple_of_order_lies_in_image(self):
        rng = random.Random(8)
        for _ in range(40):
            A = random_matrix(rng, 4, 4, -3, 3)
            x = [rng.randint(-3, 3) for _ in range(4)]
            d = rng.randint(1, 5)
            v = [sum(A[r][c] * x[c] for c in range(4)) for r in range(4)]
            g = reduce(math.gcd, v, 0)
            if g == 0:
                continue
            w = [a // g for a in v]  # g * w is an image vector
            t = preimage_order(M(A), w)
            assert t != INFINITY and g % t == 0
            assert preimage_order(M(A), [d * a for a in v]) == 1


class TestSparse:
    def test_matrix_market_roundtrip(self):
        A = M([[0, -1, 0, -1], [0, -1, 0, -1]])
        text = to_matrix_market(A)
        assert text.startswith("%%MatrixMarket matrix coordinate integer general")
        assert from_matrix_market(text) == A

    def test_matmul_apply(self):
        A = M([[1, 2], [3, 4]])
        B = M([[0, 1], [1, 0]])
        assert (A @ B).to_dense() == [[2, 1], [4, 3]]
        assert A.apply([1, 1]) == {0: 3, 1: 7}
        assert A.transpose().to_dense() == [[1, 3], [2, 4]]

    def test_zero_entries_dropped(self):
        A = SparseIntMatrix(2, 2, {(0, 0): 0, (1, 1): 2})
        assert A.nnz == 1
