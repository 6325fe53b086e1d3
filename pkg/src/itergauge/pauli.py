"""Generalized Pauli operators on registries of C[G] and C[G^] sites.

Every site operator is stored normal ordered as ``X_t Z_d``: the diagonal
acts first, the translation second.  On a group site ``t`` is an element
and ``d`` a character; on a character site the roles swap.  Since the
pairing is symmetric in its two residue tuples, ``Z_d X_t = e^{2 pi i <d,t>}
X_t Z_d`` holds on both kinds with the same formula.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .abelian import FiniteAbelianGroup, InvalidArgument, Label, ResourceLimit, phase_str

DEFAULT_DENSE_CAP = 2**22


class SiteKind(Enum):
    GROUP = "group"
    CHAR = "char"

    def flipped(self) -> "SiteKind":
        return SiteKind.CHAR if self is SiteKind.GROUP else SiteKind.GROUP


GROUP = SiteKind.GROUP
CHAR = SiteKind.CHAR


@dataclass(frozen=True)
class Site:
    id: Hashable
    kind: SiteKind


@dataclass(frozen=True, eq=False)
class SiteRegistry:
    group: FiniteAbelianGroup
    sites: tuple[Site, ...]
    _index: dict = field(repr=False, compare=False, hash=False)

    @classmethod
    def build(cls, group: FiniteAbelianGroup, sites: Iterable) -> "SiteRegistry":
        sites = tuple(s if isinstance(s, Site) else Site(s[0], SiteKind(s[1])) for s in sites)
        index = {}
        for i, s in enumerate(sites):
            if s.id in index:
                raise InvalidArgument(f"duplicate site id {s.id!r}")
            index[s.id] = i
        return cls(group, sites, index)

    def __len__(self) -> int:
        return len(self.sites)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, SiteRegistry) and self.group == other.group and self.sites == other.sites

    def __hash__(self) -> int:
        return hash((self.group, self.sites))

    def resolve(self, site) -> int:
        """Index of a site given its id (or its integer position)."""
        if site in self._index:
            return self._index[site]
        if isinstance(site, int) and 0 <= site < len(self.sites):
            return site
        raise InvalidArgument(f"unknown site {site!r}")

    def kind(self, i: int) -> SiteKind:
        return self.sites[i].kind

    def prefix(self, n: int) -> "SiteRegistry":
        return SiteRegistry.build(self.group, self.sites[:n])

    def is_prefix_of(self, other: "SiteRegistry") -> bool:
        return self.group == other.group and other.sites[: len(self.sites)] == self.sites

    def rekind(self, indices: Iterable[int]) -> "SiteRegistry":
        flip = set(indices)
        return SiteRegistry.build(
            self.group, [Site(s.id, s.kind.flipped()) if i in flip else s for i, s in enumerate(self.sites)]
        )


@dataclass(frozen=True, eq=False)
class PauliOperator:
    """``exp(2 pi i phase)`` times a tensor product of normal-ordered site operators.

    ``ops`` maps site indices to ``(t, d)`` label pairs; identity sites are
    never stored.  Treat instances as immutable.
    """

    registry: SiteRegistry
    phase: Fraction
    ops: Mapping[int, tuple[Label, Label]]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.ops))

    @property
    def weight(self) -> int:
        return len(self.ops)

    def is_identity(self) -> bool:
        return not self.ops and self.phase == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliOperator)
            and self.registry == other.registry
            and self.phase == other.phase
            and dict(self.ops) == dict(other.ops)
        )

    def __hash__(self) -> int:
        return hash((self.phase, tuple(sorted(self.ops.items()))))

    def render(self) -> str:
        parts = [f"phase {phase_str(self.phase)}"]
        for i in self.support:
            t, d = self.ops[i]
            parts.append(f"site#{i}: X[{','.join(map(str, t))}] Z[{','.join(map(str, d))}]")
        return "; ".join(parts)

    def __str__(self) -> str:
        return self.render()


def _clean(group: FiniteAbelianGroup, ops: dict) -> dict:
    zero = group.zero()
    return {i: td for i, td in ops.items() if td[0] != zero or td[1] != zero}


def make_operator(registry: SiteRegistry, ops: Mapping, phase=0) -> PauliOperator:
    """Build an operator from ``{site: (t, d)}``; sites may be ids or indices."""
    g = registry.group
    out = {}
    for site, (t, d) in ops.items():
        i = registry.resolve(site)
        if i in out:
            raise InvalidArgument(f"site {site!r} listed twice")
        out[i] = (g.check(t), g.check(d))
    return PauliOperator(registry, Fraction(phase) % 1, _clean(g, out))


def identity(registry: SiteRegistry) -> PauliOperator:
    return PauliOperator(registry, Fraction(0), {})


def single_site(registry: SiteRegistry, site, translation: Sequence[int], diagonal: Sequence[int]) -> PauliOperator:
    return make_operator(registry, {site: (translation, diagonal)})


def _same_registry(p: PauliOperator, q: PauliOperator) -> None:
    if p.registry is not q.registry and p.registry != q.registry:
        raise InvalidArgument("operators live on different registries")


def compose(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Normal-ordered product ``p * q``."""
    _same_registry(p, q)
    g = p.registry.group
    acc = 0
    ops = dict(p.ops)
    for i, (tq, dq) in q.ops.items():
        if i in ops:
            tp, dp = ops[i]
            acc += g.pair_int(dp, tq)
            ops[i] = (g.add(tp, tq), g.add(dp, dq))
        else:
            ops[i] = (tq, dq)
    phase = (p.phase + q.phase + Fraction(acc, g.exponent)) % 1
    return PauliOperator(p.registry, phase, _clean(g, ops))


def power(p: PauliOperator, k: int) -> PauliOperator:
    if k < 0:
        raise InvalidArgument("negative powers are not supported; use inverse")
    out = identity(p.registry)
    base = p
    while k:
        if k & 1:
            out = compose(out, base)
        base = compose(base, base)
        k >>= 1
    return out


def inverse(p: PauliOperator) -> PauliOperator:
    """``p^{-1}``; ``(X_t Z_d)^{-1} = Z_{-d} X_{-t} = e^{2 pi i <d,t>} X_{-t} Z_{-d}``."""
    g = p.registry.group
    acc = sum(g.pair_int(d, t) for t, d in p.ops.values())
    ops = {i: (g.neg(t), g.neg(d)) for i, (t, d) in p.ops.items()}
    return PauliOperator(p.registry, (-p.phase + Fraction(acc, g.exponent)) % 1, ops)


def commutation_phase(p: PauliOperator, q: PauliOperator) -> Fraction:
    """The phase ``phi`` with ``p q = exp(2 pi i phi) q p``."""
    _same_registry(p, q)
    g = p.registry.group
    a, b = (p.ops, q.ops) if len(p.ops) <= len(q.ops) else (q.ops, p.ops)
    acc = 0
    for i, (ta, da) in a.items():
        other = b.get(i)
        if other is not None:
            tb, db = other
            acc += g.pair_int(da, tb) - g.pair_int(db, ta)
    if a is not p.ops:
        acc = -acc
    return Fraction(acc % g.exponent, g.exponent)


@functools.lru_cache(maxsize=64)
def _rekinded(registry: SiteRegistry, indices: frozenset) -> SiteRegistry:
    return registry.rekind(indices)


def hadamard_conjugate(p: PauliOperator, sites: Iterable) -> PauliOperator:
    """Conjugate by the Fourier map on character sites.

    Uses ``U Z_g U^dag = X_{-g}`` and ``U X_chi U^dag = Z_chi``; the listed
    sites become group sites in the returned operator's registry.
    """
    reg = p.registry
    g = reg.group
    idx = frozenset(reg.resolve(s) for s in sites)
    for i in idx:
        if reg.kind(i) is not CHAR:
            raise InvalidArgument(f"site {reg.sites[i].id!r} is not a character site")
    acc = 0
    ops = {}
    for i, (t, d) in p.ops.items():
        if i in idx:
            # U X_t Z_d U^dag = Z_t X_{-d} = e^{-2 pi i <t,d>} X_{-d} Z_t
            acc -= g.pair_int(t, d)
            ops[i] = (g.neg(d), t)
        else:
            ops[i] = (t, d)
    return PauliOperator(_rekinded(reg, idx), (p.phase + Fraction(acc, g.exponent)) % 1, ops)


# -- dense states --------------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _tables(group: FiniteAbelianGroup):
    labels = list(group.elements())
    n = len(labels)
    pair_tab = np.array([[group.pair_int(a, b) for b in labels] for a in labels], dtype=np.int64)
    sub_tab = np.array([[group.index(group.sub(a, b)) for b in labels] for a in labels], dtype=np.int64)
    roots = np.exp(2j * np.pi * np.arange(group.exponent) / group.exponent)
    return labels, n, pair_tab, sub_tab, roots


@dataclass(frozen=True, eq=False)
class DenseState:
    """Amplitudes over a registry, one array axis per site (site 0 first)."""

    registry: SiteRegistry
    amplitudes: np.ndarray

    @classmethod
    def from_vector(cls, registry: SiteRegistry, vec, cap: int = DEFAULT_DENSE_CAP) -> "DenseState":
        d = registry.group.order
        check_dimension(registry.group, len(registry), cap)
        arr = np.asarray(vec, dtype=complex).reshape((d,) * len(registry))
        return cls(registry, arr)

    @classmethod
    def basis(cls, registry: SiteRegistry, labels: Sequence[Sequence[int]], cap: int = DEFAULT_DENSE_CAP) -> "DenseState":
        g = registry.group
        check_dimension(g, len(registry), cap)
        arr = np.zeros((g.order,) * len(registry), dtype=complex)
        arr[tuple(g.index(g.check(x)) for x in labels)] = 1.0
        return cls(registry, arr)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))

    def dump(self, tol: float = 0.0) -> list[tuple[tuple[Label, ...], complex]]:
        """Sorted (labels, amplitude) pairs, for small golden comparisons."""
        g = self.registry.group
        out = []
        for idx in zip(*np.nonzero(np.abs(self.amplitudes) > tol)):
            out.append((tuple(g.from_index(int(i)) for i in idx), complex(self.amplitudes[idx])))
        return sorted(out)


def check_dimension(group: FiniteAbelianGroup, nsites: int, cap: int) -> None:
    if group.order ** nsites > cap:
        raise ResourceLimit(f"dense dimension {group.order}^{nsites} exceeds cap {cap}")


def apply_dense(p: PauliOperator, state: DenseState) -> DenseState:
    """Exact action of ``p`` on a dense state.

    The operator's registry may extend the state's registry, as long as the
    state's sites are a prefix and the operator acts only on them.
    """
    if not (state.registry is p.registry or state.registry.is_prefix_of(p.registry)):
        raise InvalidArgument("state registry is not a prefix of the operator registry")
    n = len(state.registry)
    g = state.registry.group
    _, size, pair_tab, sub_tab, roots = _tables(g)
    amps = state.amplitudes
    for i, (t, d) in p.ops.items():
        if i >= n:
            raise InvalidArgument(f"operator acts on site {i} outside the state")
        shape = [1] * n
        shape[i] = size
        if any(d):
            amps = amps * roots[pair_tab[g.index(d)]].reshape(shape)
        if any(t):
            amps = np.take(amps, sub_tab[:, g.index(t)], axis=i)
    if p.phase:
        amps = amps * complex(np.exp(2j * np.pi * float(p.phase)))
    elif amps is state.amplitudes:
        amps = amps.copy()
    return DenseState(state.registry, amps)


def site_matrix(group: FiniteAbelianGroup, t: Label, d: Label) -> np.ndarray:
    labels, size, pair_tab, _, roots = _tables(group)
    m = np.zeros((size, size), dtype=complex)
    di = group.index(d)
    for j, x in enumerate(labels):
        m[group.index(group.add(x, t)), j] = roots[pair_tab[di, j]]
    return m


def to_matrix(p: PauliOperator, cap: int = 2**12) -> np.ndarray:
    """Dense matrix of ``p`` (site 0 is the most significant tensor factor)."""
    reg = p.registry
    dim = reg.group.order ** len(reg)
    if dim > cap:
        raise ResourceLimit(f"matrix dimension {dim} exceeds cap {cap}")
    zero = reg.group.zero()
    out = np.array([[1.0 + 0j]])
    for i in range(len(reg)):
        t, d = p.ops.get(i, (zero, zero))
        out = np.kron(out, site_matrix(reg.group, t, d))
    return complex(np.exp(2j * np.pi * float(p.phase))) * out


def hadamard_matrix(group: FiniteAbelianGroup) -> np.ndarray:
    """``U = sum chi(g)/sqrt|G| |g><chi|`` with rows indexed by g."""
    _, size, pair_tab, _, roots = _tables(group)
    return roots[pair_tab] / math.sqrt(size)
