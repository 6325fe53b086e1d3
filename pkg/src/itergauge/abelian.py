"""Finite abelian groups, their characters, and integer kernel solving.

A group is a product of cyclic factors ``Z_n1 x Z_n2 x ...``.  Elements and
characters are both tuples of residues; the character ``k`` evaluated on the
element ``g`` is ``exp(2 pi i sum_i k_i g_i / n_i)``.  Pairings are returned
as exact fractions in ``[0, 1)``.

>>> z4 = make_group([4])
>>> pair(z4, (1,), (1,))
Fraction(1, 4)
>>> sorted(annihilator(z4, subgroup_closure(z4, [(2,)])))
[(0,), (2,)]
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

Label = tuple[int, ...]

DEFAULT_SUBGROUP_CAP = 4096


class InvalidArgument(ValueError):
    """Raised when an input violates a documented precondition."""


class ResourceLimit(RuntimeError):
    """Raised when a computation would exceed a configured size cap."""


@dataclass(frozen=True)
class FiniteAbelianGroup:
    orders: tuple[int, ...]
    exponent: int = field(init=False, compare=False)
    order: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "exponent", math.lcm(*self.orders))
        object.__setattr__(self, "order", math.prod(self.orders))

    @property
    def rank(self) -> int:
        return len(self.orders)

    def zero(self) -> Label:
        return (0,) * len(self.orders)

    def check(self, x: Sequence[int]) -> Label:
        """Validate a label and return it as a reduced tuple."""
        if len(x) != len(self.orders):
            raise InvalidArgument(f"label {tuple(x)} has {len(x)} components, group has {len(self.orders)}")
        return tuple(int(a) % n for a, n in zip(x, self.orders))

    def add(self, x: Label, y: Label) -> Label:
        return tuple((a + b) % n for a, b, n in zip(x, y, self.orders))

    def sub(self, x: Label, y: Label) -> Label:
        return tuple((a - b) % n for a, b, n in zip(x, y, self.orders))

    def neg(self, x: Label) -> Label:
        return tuple((-a) % n for a, n in zip(x, self.orders))

    def scale(self, k: int, x: Label) -> Label:
        return tuple((k * a) % n for a, n in zip(x, self.orders))

    def elements(self) -> Iterator[Label]:
        return itertools.product(*[range(n) for n in self.orders])

    def index(self, x: Label) -> int:
        i = 0
        for a, n in zip(x, self.orders):
            i = i * n + a
        return i

    def from_index(self, i: int) -> Label:
        out = []
        for n in reversed(self.orders):
            i, r = divmod(i, n)
            out.append(r)
        return tuple(reversed(out))

    def factor_generators(self) -> list[Label]:
        """Unit vectors of the non-trivial cyclic factors."""
        gens = []
        for i, n in enumerate(self.orders):
            if n > 1:
                gens.append(tuple(1 if j == i else 0 for j in range(len(self.orders))))
        return gens

    def element_order(self, x: Label) -> int:
        return math.lcm(1, *[n // math.gcd(n, a) for a, n in zip(x, self.orders)])

    def pair_int(self, chi: Label, g: Label) -> int:
        """Pairing as an integer numerator over the group exponent."""
        e = self.exponent
        return sum(k * a * (e // n) for k, a, n in zip(chi, g, self.orders)) % e

    def __str__(self) -> str:
        return "x".join(f"Z{n}" for n in self.orders)


def make_group(orders: Iterable[int]) -> FiniteAbelianGroup:
    orders = tuple(int(n) for n in orders)
    if not orders:
        raise InvalidArgument("a group needs at least one cyclic factor")
    if any(n < 1 for n in orders):
        raise InvalidArgument(f"cyclic orders must be >= 1, got {orders}")
    return FiniteAbelianGroup(orders)


def pair(group: FiniteAbelianGroup, chi: Sequence[int], g: Sequence[int]) -> Fraction:
    """Exponent of chi(g) as a fraction in [0, 1)."""
    chi = group.check(chi)
    g = group.check(g)
    return Fraction(group.pair_int(chi, g), group.exponent)


def phase_str(p: Fraction) -> str:
    p = p % 1
    return f"{p.numerator}/{p.denominator}"


def parse_phase(text: str) -> Fraction:
    """Parse a ``p/q`` phase; the fraction must be reduced and in [0, 1)."""
    try:
        num, den = text.split("/")
        num_i, den_i = int(num), int(den)
    except (ValueError, AttributeError):
        raise InvalidArgument(f"malformed phase {text!r}") from None
    if den_i < 1 or not 0 <= num_i < den_i or math.gcd(num_i, den_i) != 1:
        raise InvalidArgument(f"phase {text!r} is not a reduced fraction in [0, 1)")
    return Fraction(num_i, den_i)


@dataclass(frozen=True)
class Subgroup:
    group: FiniteAbelianGroup
    generators: tuple[Label, ...]
    members: frozenset

    @property
    def order(self) -> int:
        return len(self.members)

    def __contains__(self, x) -> bool:
        return tuple(x) in self.members

    def generating_set(self) -> list[Label]:
        """A small generating set, picked greedily in sorted order."""
        gens: list[Label] = []
        span = {self.group.zero()}
        for x in sorted(self.members, key=lambda y: (self.group.element_order(y) * -1, y)):
            if x not in span:
                gens.append(x)
                span = set(_close(self.group, gens, None))
        return gens


def _close(group: FiniteAbelianGroup, gens: Sequence[Label], cap: int | None) -> set:
    members = {group.zero()}
    frontier = [group.zero()]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = group.add(x, g)
                if y not in members:
                    members.add(y)
                    nxt.append(y)
                    if cap is not None and len(members) > cap:
                        raise ResourceLimit(f"subgroup enumeration exceeds cap {cap}")
        frontier = nxt
    return members


def subgroup_closure(group: FiniteAbelianGroup, generators: Sequence[Sequence[int]],
                     cap: int = DEFAULT_SUBGROUP_CAP) -> Subgroup:
    if group.order > cap:
        raise ResourceLimit(f"|G| = {group.order} exceeds the enumeration cap {cap}")
    gens = tuple(group.check(g) for g in generators)
    return Subgroup(group, gens, frozenset(_close(group, gens, cap)))


def subgroup_from_members(group: FiniteAbelianGroup, members: Iterable[Sequence[int]]) -> Subgroup:
    members = frozenset(group.check(x) for x in members)
    if group.zero() not in members or any(group.add(a, b) not in members for a in members for b in members):
        raise InvalidArgument("member set is not closed under addition")
    return Subgroup(group, tuple(sorted(members)), members)


def annihilator(group: FiniteAbelianGroup, h: Subgroup) -> list[Label]:
    """Characters trivial on every element of ``h``."""
    gens = h.generating_set() if h.generators == () else h.generators
    gens = [g for g in gens if any(g)]
    return [chi for chi in group.elements() if all(group.pair_int(chi, g) == 0 for g in gens)]


# -- integer linear algebra ---------------------------------------------------

def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _snf(a: Sequence[Sequence[int]]):
    """Smith form with transforms; returns (U, S, V, Vinv) and U*A*V = S."""
    m = len(a)
    n = len(a[0]) if m else 0
    s = [[int(x) for x in row] for row in a]
    u = _identity(m)
    v = _identity(n)
    vinv = _identity(n)

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        vinv[i], vinv[j] = vinv[j], vinv[i]

    def add_row(src, dst, k):  # row dst += k * row src
        if k:
            s[dst] = [x + k * y for x, y in zip(s[dst], s[src])]
            u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, k):  # col dst += k * col src
        if k:
            for row in s:
                row[dst] += k * row[src]
            for row in v:
                row[dst] += k * row[src]
            vinv[src] = [x - k * y for x, y in zip(vinv[src], vinv[dst])]

    for t in range(min(m, n)):
        while True:
            piv = None
            for i in range(t, m):
                for j in range(t, n):
                    if s[i][j] and (piv is None or abs(s[i][j]) < abs(s[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return u, s, v, vinv
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            p = s[t][t]
            dirty = False
            for i in range(t + 1, m):
                if s[i][t]:
                    add_row(t, i, -(s[i][t] // p))
                    dirty = dirty or s[i][t] != 0
            for j in range(t + 1, n):
                if s[t][j]:
                    add_col(t, j, -(s[t][j] // p))
                    dirty = dirty or s[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if s[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
    return u, s, v, vinv


def smith_normal_form(a: Sequence[Sequence[int]]):
    """Return (U, S, V) with U*A*V = S, U and V unimodular, S in Smith form."""
    if not a or not a[0]:
        raise InvalidArgument("empty matrix")
    if len({len(r) for r in a}) != 1:
        raise InvalidArgument("ragged matrix")
    u, s, v, _ = _snf(a)
    return u, s, v


def _integer_kernel(a: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Z-basis of {x in Z^ncols : A x = 0}."""
    if not a:
        return _identity(ncols)
    _, s, v, _ = _snf(a)
    rank = sum(1 for i in range(min(len(a), ncols)) if s[i][i] != 0)
    return [[v[i][j] for i in range(ncols)] for j in range(rank, ncols)]


def _hermite_rows(rows: list[list[int]], n: int) -> list[list[int]]:
    """Integer row echelon basis of the row lattice."""
    rows = [list(r) for r in rows if any(r)]
    basis = []
    col = 0
    while rows and col < n:
        nz = [r for r in rows if r[col]]
        if not nz:
            col += 1
            continue
        zero = [r for r in rows if not r[col]]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            rest = []
            for r in nz[1:]:
                k = r[col] // p[col]
                r = [x - k * y for x, y in zip(r, p)]
                (rest if r[col] else zero).append(r)
            nz = [p] + rest
        p = nz[0]
        if p[col] < 0:
            p = [-x for x in p]
        basis.append(p)
        rows = [r for r in zero if any(r)]
        col += 1
    return basis


def kernel_mod(matrix: Sequence[Sequence[int]], column_moduli, row_moduli=None) -> list[Label]:
    """Generating set of the solutions of ``M x = 0`` modulo the row moduli.

    Column ``j`` ranges over ``Z / column_moduli[j]`` (a modulus of 0 means the
    integers).  When ``row_moduli`` is omitted every column must share one
    modulus, which is then used for every row.  The returned set is minimal:
    its size equals the number of invariant factors of the solution module.
    """
    m = len(matrix)
    if m and len({len(r) for r in matrix}) != 1:
        raise InvalidArgument("ragged matrix")
    n = len(matrix[0]) if m else None
    if isinstance(column_moduli, int):
        column_moduli = [column_moduli]
    column_moduli = [int(c) for c in column_moduli]
    if n is None:
        n = len(column_moduli)
    if len(column_moduli) == 1 and n != 1:
        column_moduli = column_moduli * n
    if len(column_moduli) != n:
        raise InvalidArgument(f"{len(column_moduli)} column moduli for {n} columns")
    if row_moduli is None:
        if len(set(column_moduli)) > 1:
            raise InvalidArgument("row moduli required when column moduli differ")
        row_moduli = [column_moduli[0] if column_moduli else 0] * m
    if isinstance(row_moduli, int):
        row_moduli = [row_moduli] * m
    row_moduli = [int(r) for r in row_moduli]
    if len(row_moduli) == 1 and m != 1:
        row_moduli = row_moduli * m
    if len(row_moduli) != m:
        raise InvalidArgument(f"{len(row_moduli)} row moduli for {m} rows")
    if any(c < 0 for c in column_moduli) or any(r < 0 for r in row_moduli):
        raise InvalidArgument("moduli must be nonnegative")

    aug = [list(map(int, matrix[i])) + [row_moduli[i] if k == i else 0 for k in range(m)] for i in range(m)]
    lifted = [vec[:n] for vec in _integer_kernel(aug, n + m)]
    relations = [[c if k == j else 0 for k in range(n)] for j, c in enumerate(column_moduli) if c]
    basis = _hermite_rows(lifted + relations, n)
    if not basis:
        return []
    # express each modulus relation in the echelon basis, then read off invariant factors
    coeffs = []
    for rel in relations:
        rest = list(rel)
        row = []
        for b in basis:
            piv = next(j for j, x in enumerate(b) if x)
            k = rest[piv] // b[piv]
            row.append(k)
            rest = [x - k * y for x, y in zip(rest, b)]
        assert not any(rest)
        coeffs.append(row)
    r = len(basis)
    if coeffs:
        _, s, _, qinv = _snf(coeffs)
        diag = [s[i][i] if i < len(coeffs) else 0 for i in range(r)]
    else:
        qinv, diag = _identity(r), [0] * r
    out: list[Label] = []
    for i in range(r):
        if diag[i] == 1:
            continue
        vec = [sum(qinv[i][k] * basis[k][j] for k in range(r)) for j in range(n)]
        vec = tuple(x % c if c else x for x, c in zip(vec, column_moduli))
        if any(vec) and vec not in out:
            out.append(vec)
    return out
