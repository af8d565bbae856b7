"""Published homology tables, stored as (betti, torsion) per degree.

Each fixture is tagged with the table it comes from.  Torsion is kept as the
multiset of prime-power (or as-printed) cyclic orders; comparisons go through
:func:`invariant_factors` so that ``Z_2 + Z_3`` and ``Z_6`` agree.  Generator
names are kept as annotations only.
"""
from __future__ import annotations

from dataclasses import dataclass

from .cells import ModuliIndex
from .homology import HomologyTable, Ring


def invariant_factors(orders) -> tuple[int, ...]:
    """Invariant factors ``d_1 | d_2 | ...`` of a direct sum of cyclic groups."""
    primes: dict[int, list[int]] = {}
    for n in orders:
        n = int(n)
        if n <= 1:
            continue
        p = 2
        while n > 1:
            if n % p == 0:
                q = 1
                while n % p == 0:
                    n //= p
                    q *= p
                primes.setdefault(p, []).append(q)
            p += 1
    length = max((len(v) for v in primes.values()), default=0)
    out = [1] * length
    for powers in primes.values():
        powers.sort()
        for i, q in enumerate(powers):
            out[length - len(powers) + i] *= q
    return tuple(d for d in out if d > 1)


Group = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class FixtureTable:
    tag: str
    index: ModuliIndex
    ring: Ring
    groups: tuple[Group, ...]  # homological degrees 0, 1, ...
    generators: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return f"{self.tag} {self.index} {self.ring.tag}"

    def expected(self, k: int) -> Group:
        return self.groups[k] if k < len(self.groups) else (0, ())

    def reduced_mod(self, p: int) -> tuple[int, ...]:
        """``F_p`` dimensions predicted by the universal coefficient theorem."""
        if self.ring.is_field:
            raise ValueError("already a field table")
        top = len(self.groups)
        dims = []
        for k in range(top + 1):
            b, t = self.expected(k)
            _, t_prev = self.expected(k - 1) if k else (0, ())
            dims.append(b + sum(1 for d in t if d % p == 0) + sum(1 for d in t_prev if d % p == 0))
        while dims and dims[-1] == 0:
            dims.pop()
        return tuple(dims)

    def compare(self, table: HomologyTable) -> list[str]:
        """Human-readable mismatches (empty if the computed table agrees)."""
        out = []
        n = max(len(self.groups), len(table.groups))
        for k in range(n):
            b, t = self.expected(k)
            g = table.group(k)
            want = (b, invariant_factors(t) if not self.ring.is_field else ())
            got = (g.betti, invariant_factors(g.torsion))
            if want != got:
                out.append(f"H_{k}: expected {_fmt(want)}, computed {_fmt(got)}")
        return out


def _fmt(group: Group) -> str:
    b, t = group
    parts = ([f"Z^{b}" if b > 1 else "Z"] if b else []) + [f"Z_{d}" for d in t]
    return " + ".join(parts) or "0"


def _z(*degrees: str) -> tuple[Group, ...]:
    """Parse shorthand such as ``"Z"``, ``"Z2+T2x2"``, ``"T10"``, ``"0"``.

    ``Z<k>`` is a free summand of rank ``k``; ``T<d>`` a cyclic ``Z_d``;
    ``T<d>x<k>`` ``k`` copies of it.
    """
    out = []
    for spec in degrees:
        betti, tors = 0, []
        for part in spec.split("+"):
            part = part.strip()
            if part == "0":
                continue
            if part.startswith("Z"):
                betti += int(part[1:] or 1)
            elif part.startswith("T"):
                d, _, k = part[1:].partition("x")
                tors.extend([int(d)] * int(k or 1))
            else:
                raise ValueError(part)
        out.append((betti, tuple(sorted(tors))))
    return tuple(out)


def _f2(*dims: int) -> tuple[Group, ...]:
    return tuple((d, ()) for d in dims)


_Z = Ring(0)
_F2 = Ring(2)

INTEGRAL_TABLES: tuple[FixtureTable, ...] = (
    # genus 0
    FixtureTable("tab:g0", ModuliIndex(0, 1, 0), _Z, _z("Z"), ("1",)),
    FixtureTable("tab:g0", ModuliIndex(0, 1, 1), _Z, _z("Z"), ("a",)),
    FixtureTable("tab:g0", ModuliIndex(0, 1, 2), _Z, _z("Z", "Z"), ("a^2", "b")),
    FixtureTable("tab:g0", ModuliIndex(0, 1, 3), _Z, _z("Z", "Z"), ("a^3", "ab")),
    FixtureTable("tab:g0", ModuliIndex(0, 1, 4), _Z, _z("Z", "Z", "T2"), ("a^4", "a^2 b", "b^2")),
    FixtureTable("tab:g0", ModuliIndex(0, 1, 5), _Z, _z("Z", "Z", "T2"), ("a^5", "a^3 b", "a b^2")),
    # genus 1
    FixtureTable("tab:g1", ModuliIndex(1, 1, 0), _Z, _z("Z", "Z"), ("c", "d")),
    FixtureTable("tab:g1", ModuliIndex(1, 1, 1), _Z, _z("Z", "Z", "T2"), ("ac", "ad", "e")),
    FixtureTable(
        "tab:g1", ModuliIndex(1, 1, 2), _Z, _z("Z", "Z+T2", "T2x2", "T2"),
        ("a^2 c", "a^2 d, bc", "ae, bd", "f"),
    ),
    FixtureTable(
        "tab:g1", ModuliIndex(1, 1, 3), _Z, _z("Z", "Z+T2", "T2x2", "Z+T2x2", "Z2", "Z"),
        ("a^3 c", "a^3 d, abc", "a^2 e, abd", "af, be", "", ""),
    ),
    FixtureTable(
        "tab:g1", ModuliIndex(1, 1, 4), _Z,
        _z("Z", "Z+T2", "T2x3", "Z2+T2x3", "Z3+T2x2", "Z2+T2", "Z"),
        ("a^4 c", "a^4 d, a^2 bc", "a^3 e, a^2 bd, b^2 c", "a^2 f, abe, b^2 d", "bf", "", ""),
    ),
    # genus 2
    FixtureTable(
        "tab:g2", ModuliIndex(2, 1, 0), _Z, _z("Z", "T10", "T2", "Z+T2", "T2+T3"),
        ("c^2", "cd", "d^2", "lambda s, Te", "v"),
    ),
    FixtureTable(
        "tab:g2", ModuliIndex(2, 1, 1), _Z,
        _z("Z", "T10", "Z+T2", "Z2+T2x2", "T2x2+T3x2", "Z", "Z"),
        ("ac^2", "acd", "ad^2", "lambda as, a.Te", "av", "", ""),
    ),
    FixtureTable(
        "tab:g2", ModuliIndex(2, 1, 2), _Z,
        _z("Z", "T10+T2", "Z+T2x2", "Z3+T2x4", "Z+T2x5+T3x3", "Z2+T2x4+T3", "Z2+T2x3", "T2"),
        ("a^2 c^2", "a^2 cd, bc^2", "a^2 d^2, bcd", "lambda a^2 s, a^2.Te, bd^2", "b.Te, a^2 v",
         "", "", ""),
    ),
)

MOD2_TABLES: tuple[FixtureTable, ...] = (
    FixtureTable("tab:m2g0", ModuliIndex(0, 1, 0), _F2, _f2(1), ("1",)),
    FixtureTable("tab:m2g0", ModuliIndex(0, 1, 1), _F2, _f2(1), ("a",)),
    FixtureTable("tab:m2g0", ModuliIndex(0, 1, 2), _F2, _f2(1, 1), ("a^2", "b")),
    FixtureTable("tab:m2g0", ModuliIndex(0, 1, 3), _F2, _f2(1, 1), ("a^3", "ab")),
    FixtureTable("tab:m2g0", ModuliIndex(0, 1, 4), _F2, _f2(1, 1, 1, 1), ("a^4", "a^2 b", "b^2", "Qb")),
    FixtureTable("tab:m2g0", ModuliIndex(0, 1, 5), _F2, _f2(1, 1, 1, 1), ("a^5", "a^3 b", "ab^2", "a.Qb")),
    FixtureTable("tab:m2g1", ModuliIndex(1, 1, 0), _F2, _f2(1, 1), ("c", "d")),
    FixtureTable("tab:m2g1", ModuliIndex(1, 1, 1), _F2, _f2(1, 1, 1, 1), ("ac", "ad", "e", "Eb")),
    FixtureTable("tab:m2g1", ModuliIndex(1, 1, 2), _F2, _f2(1, 2, 3, 3, 1)),
    FixtureTable("tab:m2g1", ModuliIndex(1, 1, 3), _F2, _f2(1, 2, 3, 5, 4, 1)),
    FixtureTable("tab:m2g1", ModuliIndex(1, 1, 4), _F2, _f2(1, 2, 4, 8, 8, 5, 2)),
    FixtureTable("tab:m2g2", ModuliIndex(2, 1, 0), _F2, _f2(1, 1, 2, 3, 2, 1)),
    FixtureTable("tab:m2g2", ModuliIndex(2, 1, 1), _F2, _f2(1, 1, 2, 5, 4, 3, 1)),
    FixtureTable("tab:m2g2", ModuliIndex(2, 1, 2), _F2, _f2(1, 2, 5, 9, 10, 11, 9, 4, 1)),
)

ALL_TABLES = INTEGRAL_TABLES + MOD2_TABLES


def fixture(tag: str, g: int, m: int) -> FixtureTable:
    for t in ALL_TABLES:
        if t.tag == tag and t.index.g == g and t.index.m == m:
            return t
    raise KeyError(f"{tag} has no entry for g={g}, m={m}")


def table_inconsistencies() -> list[str]:
    """Places where an integral table does not reduce mod 2 to its mod-2 table."""
    out = []
    for t in INTEGRAL_TABLES:
        m2 = next(f for f in MOD2_TABLES if f.index == t.index)
        want = t.reduced_mod(2)
        have = tuple(b for b, _ in m2.groups)
        for k in range(max(len(want), len(have))):
            a = want[k] if k < len(want) else 0
            b = have[k] if k < len(have) else 0
            if a != b:
                out.append(f"{t.index} H_{k}: {t.tag} predicts dim {a}, {m2.tag} lists {b}")
    return out


__all__ = [
    "ALL_TABLES",
    "FixtureTable",
    "INTEGRAL_TABLES",
    "MOD2_TABLES",
    "fixture",
    "invariant_factors",
    "table_inconsistencies",
]
