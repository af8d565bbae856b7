import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitkit.perm import (
    Tableau,
    TableauMismatch,
    TableauPermutation,
    compose_perm,
    cycle_count,
    delete_perm,
    norm,
    parse,
)

T2, T3, T4 = Tableau((2,)), Tableau((3,)), Tableau((4,))


def P(text, tab=None):
    return parse(text, tab)


def all_perms(tab):
    return [TableauPermutation(tab, p) for p in itertools.permutations(range(tab.size))]


def brute_cycles(images):
    # independent cycle finder: follow orbits from each unseen point
    seen, cycles = set(), []
    for x in range(len(images)):
        if x in seen:
            continue
        orbit = [x]
        seen.add(x)
        y = images[x]
        while y != x:
            orbit.append(y)
            seen.add(y)
            y = images[y]
        cycles.append(orbit)
    return cycles


class TestTableau:
    def test_symbol_count(self):
        tab = Tableau((2, 0, 3))
        assert tab.n == 3
        assert tab.size == 3 + 2 + 0 + 3
        assert len(tab.symbols()) == tab.size

    def test_flat_roundtrip(self):
        tab = Tableau((1, 2))
        for i, j in tab.symbols():
            assert tab.symbol(tab.flat(i, j)) == (i, j)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            Tableau(())
        with pytest.raises(ValueError):
            Tableau((1, -1))
        with pytest.raises(IndexError):
            Tableau((2,)).flat(1, 3)


class TestCompose:
    def test_identity_left(self):
        s = P("(0,2,1,3)")
        assert TableauPermutation.identity(T3) * s == s

    def test_small_example(self):
        # evaluate (0 1) o (1 2) symbol by symbol: 0->0->1, 1->2->2, 2->1->0
        got = compose_perm(P("(0,1)(2)"), P("(0)(1,2)"))
        assert got.images == (1, 2, 0)
        assert got == P("(0,1,2)")

    def test_inverse(self):
        s = P("(0,3,1)(2)")
        assert s * s.inverse() == TableauPermutation.identity(T3)
        assert s.inverse() * s == TableauPermutation.identity(T3)

    def test_mismatch(self):
        with pytest.raises(TableauMismatch):
            compose_perm(P("(0,1)"), P("(0,1,2)"))

    def test_group_laws_exhaustive_s3(self):
        perms = all_perms(T2)
        e = TableauPermutation.identity(T2)
        for a, b, c in itertools.product(perms, repeat=3):
            assert (a * b) * c == a * (b * c)
        for a in perms:
            assert a * e == a == e * a
            assert a * a.inverse() == e


class TestNormAndCycles:
    def test_examples(self):
        assert norm(TableauPermutation.identity(T4)) == 0
        assert norm(P("(0,1,2,3)")) == 3
        assert norm(P("(0,2)(1,3)")) == 2
        assert cycle_count(TableauPermutation.identity(T3)) == 4
        assert cycle_count(P("(0,2,3)(1)")) == 2
        assert cycle_count(P("(0,2,1,3)")) == 1

    def test_norm_is_size_minus_cycles_exhaustive_s4(self):
        for s in all_perms(T3):
            assert s.norm() == T3.size - len(brute_cycles(s.images))

    def test_norm_is_transposition_length(self):
        # BFS distance from the identity in the transposition Cayley graph of S_4
        size = T3.size
        dist = {tuple(range(size)): 0}
        frontier = [tuple(range(size))]
        while frontier:
            nxt = []
            for p in frontier:
                for a, b in itertools.combinations(range(size), 2):
                    q = list(p)
                    q[a], q[b] = q[b], q[a]
                    q = tuple(q)
                    if q not in dist:
                        dist[q] = dist[p] + 1
                        nxt.append(q)
            frontier = nxt
        for s in all_perms(T3):
            assert s.norm() == dist[s.images]

    def test_subadditive(self):
        perms = all_perms(T3)
        for a, b in itertools.product(perms, repeat=2):
            assert (a * b).norm() <= a.norm() + b.norm()

    def test_cycle_bounds(self):
        for s in all_perms(T3):
            assert 1 <= s.cycle_count() <= T3.size


def naive_delete(images, x):
    # one-line oracle: write each cycle as a word, drop x, shift symbols above x
    out_cycles = []
    for cyc in brute_cycles(images):
        word = [y - (y > x) for y in cyc if y != x]
        if word:
            out_cycles.append(word)
    res = [None] * (len(images) - 1)
    for word in out_cycles:
        for k, y in enumerate(word):
            res[y] = word[(k + 1) % len(word)]
    return tuple(res)


class TestDelete:
    def test_examples(self):
        assert delete_perm(TableauPermutation.identity(T3), 1, 1) == TableauPermutation.identity(T2)
        assert delete_perm(P("(0,2,1,3)"), 1, 1) == P("(0,1,2)")

    def test_matches_naive_oracle_exhaustive(self):
        for s in all_perms(T3):
            for j in range(4):
                assert delete_perm(s, 1, j).images == naive_delete(s.images, j)

    def test_two_layers(self):
        tab = Tableau((1, 2))
        s = TableauPermutation.from_cycles(tab, [((1, 0), (2, 1), (1, 1)), ((2, 0), (2, 2))])
        d = delete_perm(s, 2, 1)
        assert d.tableau == Tableau((1, 1))
        assert str(d) == "(1.0,1.1)(2.0,2.1)"

    def test_rejects_empty_layer(self):
        with pytest.raises(IndexError):
            delete_perm(TableauPermutation.identity(Tableau((0, 2))), 1, 0)
        with pytest.raises(IndexError):
            delete_perm(TableauPermutation.identity(T2), 1, 3)

    def test_semisimplicial_identity_random(self):
        rng = random.Random(7)
        for _ in range(1000):
            p = rng.randint(2, 7)
            tab = Tableau((p,))
            imgs = list(range(p + 1))
            rng.shuffle(imgs)
            s = TableauPermutation(tab, imgs)
            k = rng.randint(0, p - 1)
            j = rng.randint(0, k)
            left = delete_perm(delete_perm(s, 1, j), 1, k)
            right = delete_perm(delete_perm(s, 1, k + 1), 1, j)
            assert left == right


widths = st.lists(st.integers(0, 3), min_size=1, max_size=3)


@st.composite
def tableau_perms(draw):
    tab = Tableau(tuple(draw(widths)))
    imgs = draw(st.permutations(list(range(tab.size))))
    return TableauPermutation(tab, imgs)


@settings(max_examples=200, deadline=None)
@given(tableau_perms())
def test_parse_format_roundtrip(s):
    assert parse(str(s), s.tableau) == s
    # the canonical text also pins down the tableau on its own
    assert parse(str(s)) == s


@settings(max_examples=200, deadline=None)
@given(tableau_perms(), st.data())
def test_semisimplicial_identity_multilayer(s, data):
    layers = [i for i, p in enumerate(s.tableau.widths, start=1) if p >= 2]
    if not layers:
        return
    i = data.draw(st.sampled_from(layers))
    p = s.tableau.widths[i - 1]
    k = data.draw(st.integers(0, p - 1))
    j = data.draw(st.integers(0, k))
    assert delete_perm(delete_perm(s, i, j), i, k) == delete_perm(delete_perm(s, i, k + 1), i, j)


def test_canonical_text():
    s = P("(3,1,0)(2)")
    assert str(s) == "(0,3,1)(2)"
    with pytest.raises(ValueError):
        parse("(0,1")
    with pytest.raises(ValueError):
        parse("(0,1)(1,2)")
