"""Tensor-network form of the gauging maps and its exact contraction.

Every site being gauged carries a Z-type tensor whose virtual legs all share
one label; every new site carries a +-type tensor whose physical output is
the oriented sum of its virtual legs.  A virtual leg joins a vertex and a
check that touch, and its orientation is the incidence sign of that pair.
Contracting all virtual legs reproduces the dense gauging map.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .abelian import FiniteAbelianGroup, InvalidArgument, ResourceLimit, make_group
from .pauli import DEFAULT_DENSE_CAP, DenseState
from .symmetry import CheckSystem, apply_gauging_dense, build_system, dual_spec, primal_spec

MODELS = {
    "zero-form": ("zero-form", "primal"),
    "one-form": ("zero-form", "dual"),
    "lss": ("lss", "primal"),
    "lss-dual": ("lss", "dual"),
    "sierpinski": ("sierpinski", "primal"),
    "sierpinski-dual": ("sierpinski", "dual"),
}


@dataclass(frozen=True)
class Leg:
    name: object
    role: str  # "out", "in" or "virtual"
    basis: str  # "group" or "char"


@dataclass(frozen=True, eq=False)
class Tensor:
    data: np.ndarray
    legs: tuple[Leg, ...]

    def __post_init__(self) -> None:
        if self.data.ndim != len(self.legs):
            raise InvalidArgument(f"{self.data.ndim} axes for {len(self.legs)} legs")

    def axis(self, name) -> int:
        for k, leg in enumerate(self.legs):
            if leg.name == name:
                return k
        raise InvalidArgument(f"no leg named {name!r}")


def _phase_table(group: FiniteAbelianGroup) -> np.ndarray:
    labels = list(group.elements())
    e = group.exponent
    tab = np.exp(2j * np.pi * np.array([[group.pair_int(a, b) for b in labels] for a in labels]) / e)
    # snap the rounding residue of exact roots such as -1 and i
    return np.where(np.abs(tab.real) < 1e-15, 0, tab.real) + 1j * np.where(np.abs(tab.imag) < 1e-15, 0, tab.imag)


def _names(degree: int, names: Sequence | None) -> list:
    if names is None:
        return list(range(degree))
    if len(names) != degree:
        raise InvalidArgument("one name per virtual leg is required")
    return list(names)


def z_type(group: FiniteAbelianGroup, virtual_degree: int, names: Sequence | None = None,
           basis: str = "char") -> Tensor:
    """``sum_g Z_g (x) |g..g)(g..g|`` with legs ``(out, in, virtual...)``.

    On a character site ``Z_g`` multiplies ``|chi>`` by ``chi(g)``; the
    physical legs are diagonal.
    """
    if virtual_degree < 1:
        raise InvalidArgument("a Z-type tensor needs at least one virtual leg")
    d = group.order
    ph = _phase_table(group)
    data = np.zeros((d, d) + (d,) * virtual_degree, dtype=complex)
    for x in range(d):
        for g in range(d):
            data[(x, x) + (g,) * virtual_degree] = ph[x, g]
    vbasis = "group" if basis == "char" else "char"
    legs = (Leg("out", "out", basis), Leg("in", "in", basis)) + tuple(
        Leg(n, "virtual", vbasis) for n in _names(virtual_degree, names))
    return Tensor(data, legs)


def dual_z_type(group: FiniteAbelianGroup, virtual_degree: int, names: Sequence | None = None) -> Tensor:
    """Z-type tensor on a group site, with character labels on the virtual legs."""
    return z_type(group, virtual_degree, names, basis="group")


def _plus(group: FiniteAbelianGroup, signs: Sequence[int], names, basis: str, flip: int) -> Tensor:
    if not signs or any(s not in (1, -1) for s in signs):
        raise InvalidArgument("signs must be a nonempty sequence of +1/-1")
    d = group.order
    data = np.zeros((d,) * (1 + len(signs)), dtype=complex)
    for legs in itertools.product(range(d), repeat=len(signs)):
        acc = group.zero()
        for s, x in zip(signs, legs):
            y = group.from_index(x)
            acc = group.add(acc, y if s * flip == 1 else group.neg(y))
        data[(group.index(acc),) + legs] = 1.0
    vbasis = "group" if basis == "group" else "char"
    out = (Leg("out", "out", basis),) + tuple(Leg(n, "virtual", vbasis) for n in _names(len(signs), names))
    return Tensor(data, out)


def plus_type(group: FiniteAbelianGroup, signs: Sequence[int] = (1, -1), names: Sequence | None = None) -> Tensor:
    """``sum |sum_l sigma_l g_l> (x) |g_1 ...)``: the physical label is the oriented leg sum.

    With the default signs this is ``sum_{g,h} |h> (x) |gh)(g|``.
    """
    return _plus(group, signs, names, "group", 1)


def dual_plus_type(group: FiniteAbelianGroup, signs: Sequence[int], names: Sequence | None = None) -> Tensor:
    """Character-valued +-type tensor whose physical label is ``-sum_l sigma_l chi_l``."""
    return _plus(group, signs, names, "char", -1)


# -- networks ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Network:
    """Tensors of one gauging map; physical legs are renamed ``("out", k)`` / ``("in", k)``."""

    tensors: tuple[Tensor, ...]
    positions: tuple[tuple, ...]  # sort keys for the unit-cell contraction order
    n_domain: int
    n_new: int
    group: FiniteAbelianGroup
    scale: float


def _rename(t: Tensor, out_name, in_name=None) -> Tensor:
    legs = []
    for leg in t.legs:
        if leg.role == "out":
            legs.append(Leg(out_name, "out", leg.basis))
        elif leg.role == "in":
            legs.append(Leg(in_name, "in", leg.basis))
        else:
            legs.append(leg)
    return Tensor(t.data, tuple(legs))


def _cell(key) -> tuple:
    return (key[1], key[0]) + tuple(key[2:])


def build_network(system: CheckSystem, direction: str) -> Network:
    """Place one tensor per site; output legs follow the dense register order."""
    g = system.group
    nv, nc = len(system.vertices), len(system.checks)
    tensors, positions = [], []
    if direction == "primal":
        for v, key in enumerate(system.vertices):
            names = [("leg", v, c) for c, _ in system.checks_of(v)]
            tensors.append(_rename(z_type(g, len(names), names), ("out", v), ("in", v)))
            positions.append(_cell(key) + (0,))
        for c, key in enumerate(system.checks):
            row = system.incidence[c]
            t = plus_type(g, [s for _, s in row], [("leg", v, c) for v, _ in row])
            tensors.append(_rename(t, ("out", nv + c)))
            positions.append(_cell(key) + (1,))
        return Network(tuple(tensors), tuple(positions), nv, nc, g, float(g.order) ** -nv)
    if direction == "dual":
        for c, key in enumerate(system.checks):
            names = [("leg", v, c) for v, _ in system.incidence[c]]
            tensors.append(_rename(dual_z_type(g, len(names), names), ("out", c), ("in", c)))
            positions.append(_cell(key) + (0,))
        for v, key in enumerate(system.vertices):
            pairs = system.checks_of(v)
            t = dual_plus_type(g, [s for _, s in pairs], [("leg", v, c) for c, _ in pairs])
            tensors.append(_rename(t, ("out", nc + v)))
            positions.append(_cell(key) + (1,))
        return Network(tuple(tensors), tuple(positions), nc, nv, g, float(g.order) ** -nc)
    raise InvalidArgument(f"direction must be 'primal' or 'dual', got {direction!r}")


def model_network(model: str, size: Sequence[int], group: FiniteAbelianGroup | None = None) -> tuple[Network, CheckSystem, str]:
    if model not in MODELS:
        raise InvalidArgument(f"unknown model {model!r}; expected one of {sorted(MODELS)}")
    base, direction = MODELS[model]
    system = build_system(base, size, group or make_group([2]))
    return build_network(system, direction), system, direction


def _contract_pair(a: Tensor, b: Tensor) -> Tensor:
    names_b = {leg.name: k for k, leg in enumerate(b.legs)}
    ax_a, ax_b = [], []
    for k, leg in enumerate(a.legs):
        if leg.name in names_b:
            ax_a.append(k)
            ax_b.append(names_b[leg.name])
    data = np.tensordot(a.data, b.data, axes=(ax_a, ax_b))
    legs = tuple(l for k, l in enumerate(a.legs) if k not in ax_a) + tuple(l for k, l in enumerate(b.legs) if k not in ax_b)
    return Tensor(data, legs)


def _slice_inputs(t: Tensor, column: dict) -> Tensor:
    """Fix the physical input (and, by diagonality, the output) of a Z-type tensor."""
    idx, legs = [], []
    for leg in t.legs:
        if leg.role in ("in", "out") and leg.name[1] in column and any(l.role == "in" for l in t.legs):
            idx.append(column[leg.name[1]])
        else:
            idx.append(slice(None))
            legs.append(leg)
    return Tensor(t.data[tuple(idx)], tuple(legs))


def contract(network: Network, order: Sequence[int] | None = None, column: Sequence[int] | None = None,
             cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Contract every virtual leg.

    Without ``column`` the result is the operator as a matrix of shape
    ``(|G|^(n_domain + n_new), |G|^n_domain)``.  With ``column`` (label
    indices of the domain sites) only that column is produced; the diagonal
    physical legs of the Z-type tensors are fixed before contracting.
    """
    d = network.group.order
    n_out = network.n_domain + network.n_new
    size = d ** n_out * (1 if column is not None else d ** network.n_domain)
    if size > cap:
        raise ResourceLimit(f"contraction output of {size} entries exceeds cap {cap}")
    tensors = list(network.tensors)
    if column is not None:
        if len(column) != network.n_domain:
            raise InvalidArgument(f"column needs {network.n_domain} labels")
        fixed = dict(enumerate(column))
        tensors = [_slice_inputs(t, fixed) for t in tensors]
    order = list(order) if order is not None else sorted(range(len(tensors)), key=lambda k: network.positions[k])
    if sorted(order) != list(range(len(tensors))):
        raise InvalidArgument("order must be a permutation of the tensors")
    acc = tensors[order[0]]
    for k in order[1:]:
        acc = _contract_pair(acc, tensors[k])
    if any(leg.role == "virtual" for leg in acc.legs):
        raise InvalidArgument("network has dangling virtual legs")
    pos = {leg.name: k for k, leg in enumerate(acc.legs)}
    if column is None:
        perm = [pos[("out", k)] for k in range(n_out)] + [pos[("in", k)] for k in range(network.n_domain)]
        return network.scale * acc.data.transpose(perm).reshape(d ** n_out, d ** network.n_domain)
    perm = [pos[("out", k)] for k in range(network.n_domain, n_out)]
    new = network.scale * acc.data.transpose(perm).reshape(-1)
    out = np.zeros((d ** network.n_domain, d ** network.n_new), dtype=complex)
    out[np.ravel_multi_index(tuple(column), (d,) * network.n_domain)] = new
    return out.reshape(-1)


def contract_gauging_pepo(model: str, size: Sequence[int] = (2, 2), group: FiniteAbelianGroup | None = None,
                          cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense operator of a model's gauging map obtained from its tensor network."""
    network, _, _ = model_network(model, size, group)
    return contract(network, cap=cap)


def dense_gauging_column(system: CheckSystem, direction: str, column: Sequence[int]) -> np.ndarray:
    spec = primal_spec(system) if direction == "primal" else dual_spec(system)
    g = system.group
    n = len(spec.domain)
    state = DenseState.basis(spec.registry.prefix(n), [g.from_index(int(x)) for x in column])
    return apply_gauging_dense(spec, state).vector()


def max_deviation(model: str, size: Sequence[int] = (2, 2), group: FiniteAbelianGroup | None = None,
                  columns: Sequence[Sequence[int]] | None = None, reverse: bool = False) -> float:
    """Largest entrywise difference between the network and the dense gauging map.

    Columns are compared one at a time, so instances whose full operator
    exceeds the dense cap can still be checked exhaustively.
    """
    network, system, direction = model_network(model, size, group)
    d = network.group.order
    if columns is None:
        columns = itertools.product(range(d), repeat=network.n_domain)
    order = sorted(range(len(network.tensors)), key=lambda k: network.positions[k])
    if reverse:
        order.reverse()
    worst = 0.0
    for col in columns:
        diff = contract(network, order, col) - dense_gauging_column(system, direction, col)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst
