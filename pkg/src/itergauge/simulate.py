"""Dense state-vector engine: boundary states, emergent states, expectations."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .abelian import InvalidArgument, Subgroup, annihilator, subgroup_closure
from .lattice import LayeredLattice, layer_registry, layered
from .pauli import (
    CHAR,
    DEFAULT_DENSE_CAP,
    GROUP,
    DenseState,
    PauliOperator,
    SiteRegistry,
    apply_dense,
    check_dimension,
)
from .symmetry import CheckSystem, SymmetryGenerator, apply_gauging_dense, emergent_generators, layer_spec, valid_generators

__all__ = [
    "DenseState",
    "ZeroNorm",
    "plus_H",
    "uniform_H",
    "boundary_state",
    "charged_boundary_state",
    "emergent_state",
    "expectation",
]

ZERO_NORM_TOL = 1e-12


class ZeroNorm(InvalidArgument):
    """The gauging maps annihilated the boundary state."""

    def __init__(self, message: str, norm: float) -> None:
        super().__init__(message)
        self.norm = norm


def _as_subgroup(group, H) -> Subgroup:
    if H is None:
        return subgroup_closure(group, group.factor_generators())
    if isinstance(H, Subgroup):
        if H.group != group:
            raise InvalidArgument("boundary subgroup belongs to a different group")
        return H
    return subgroup_closure(group, H)


def plus_H(registry: SiteRegistry, site, H: Subgroup) -> DenseState:
    """``|+>_H`` on one character site: uniform over the annihilator of ``H``."""
    i = registry.resolve(site)
    if registry.kind(i) is not CHAR:
        raise InvalidArgument(f"site {registry.sites[i].id!r} is a group site")
    g = registry.group
    H = _as_subgroup(g, H)
    vec = np.zeros(g.order, dtype=complex)
    for chi in annihilator(g, H):
        vec[g.index(chi)] = 1.0
    vec /= np.linalg.norm(vec)
    return DenseState(SiteRegistry.build(g, [registry.sites[i]]), vec)


def uniform_H(registry: SiteRegistry, site, H: Subgroup) -> DenseState:
    """Uniform superposition over the members of ``H`` on one group site."""
    i = registry.resolve(site)
    if registry.kind(i) is not GROUP:
        raise InvalidArgument(f"site {registry.sites[i].id!r} is a character site")
    g = registry.group
    H = _as_subgroup(g, H)
    vec = np.zeros(g.order, dtype=complex)
    for h in H.members:
        vec[g.index(h)] = 1.0
    vec /= np.linalg.norm(vec)
    return DenseState(SiteRegistry.build(g, [registry.sites[i]]), vec)


def _bottom_registry(system: CheckSystem, start: str) -> SiteRegistry:
    if start not in ("matter", "gauge"):
        raise InvalidArgument(f"start must be 'matter' or 'gauge', got {start!r}")
    return layer_registry(system.group, system.vertices, system.checks, (1 if start == "matter" else 2,))


def _boundary_symmetries(system: CheckSystem, start: str) -> list[SymmetryGenerator]:
    return valid_generators(system) if start == "matter" else emergent_generators(system)


def _z_operator(reg: SiteRegistry, gen: SymmetryGenerator) -> PauliOperator:
    zero = reg.group.zero()
    return PauliOperator(reg, 0, {i: (zero, e) for i, e in enumerate(gen.exponents) if any(e)})


def _symmetrize(state: DenseState, ops: Sequence[PauliOperator]) -> DenseState:
    n = state.registry.group.exponent
    for op in ops:
        cur, acc = state, state.amplitudes.copy()
        for _ in range(n - 1):
            cur = apply_dense(op, cur)
            acc += cur.amplitudes
        state = DenseState(state.registry, acc / n)
    return state


def boundary_state(system: CheckSystem, H=None, start: str = "matter", cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """Symmetric boundary state ``|psi>_H`` on the bottom layer of a stack.

    Matter-first: ``|+>_H`` on every vertex, projected onto the invariant
    sector of the valid symmetry generators.  Gauge-first: the uniform
    superposition over ``H`` on every check, projected onto the invariant
    sector of the emergent generators.
    """
    reg = _bottom_registry(system, start)
    check_dimension(system.group, len(reg), cap)
    H = _as_subgroup(system.group, H)
    factor = plus_H if start == "matter" else uniform_H
    amps = np.ones((), dtype=complex)
    for s in reg.sites:
        amps = np.multiply.outer(amps, factor(reg, s.id, H).amplitudes)
    state = _symmetrize(DenseState(reg, amps), [_z_operator(reg, g) for g in _boundary_symmetries(system, start)])
    norm = state.norm()
    if norm < ZERO_NORM_TOL:
        raise ZeroNorm("boundary state vanishes after symmetrization", norm)
    return DenseState(reg, state.amplitudes / norm)


def charged_boundary_state(system: CheckSystem, H=None, start: str = "matter", cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """A boundary state carrying a nontrivial charge under one boundary symmetry.

    A single-site shift is applied at a site where the first symmetry
    generator acts nontrivially, so the result is an eigenstate of that
    generator with eigenvalue different from 1.
    """
    state = boundary_state(system, H, start, cap)
    g = system.group
    for gen in _boundary_symmetries(system, start):
        for i, e in enumerate(gen.exponents):
            for t in g.factor_generators():
                if g.pair_int(t, e):
                    shift = PauliOperator(state.registry, 0, {i: (t, g.zero())})
                    return apply_dense(shift, state)
    raise InvalidArgument("the boundary has no nontrivial symmetry to charge")


def emergent_state(
    system: CheckSystem,
    depth: int,
    start: str = "matter",
    boundary: DenseState | None = None,
    cap: int = DEFAULT_DENSE_CAP,
    normalize: bool = True,
) -> tuple[LayeredLattice, DenseState]:
    """Apply the alternating gauging maps ``depth`` times to a boundary state.

    Returns the layered lattice together with the (by default normalized)
    state on its full registry.  Raises ``ZeroNorm`` if the maps annihilate
    the input, which happens exactly for charged boundary states.
    """
    lattice = layered(system, depth, start)
    check_dimension(system.group, len(lattice.registry), cap)
    if boundary is None:
        boundary = boundary_state(system, None, start, cap)
    if not boundary.registry.is_prefix_of(lattice.registry) or len(boundary.registry) != len(lattice.layer_sites(lattice.bottom)):
        raise InvalidArgument("boundary state does not live on the bottom layer of the stack")
    state = boundary
    in_norm = boundary.norm()
    for h in lattice.layers[:-1]:
        state = apply_gauging_dense(layer_spec(lattice, system, h), state, cap)
    if len(state.registry) == len(lattice.registry):
        state = DenseState(lattice.registry, state.amplitudes)
    norm = state.norm()
    if norm <= ZERO_NORM_TOL * max(in_norm, 1.0):
        raise ZeroNorm(f"zero norm: the emergent state vanishes (norm {norm:.3e})", norm)
    if normalize:
        state = DenseState(state.registry, state.amplitudes / norm)
    return lattice, state


def expectation(state: DenseState, p: PauliOperator) -> complex:
    """``<state| p |state>`` for a normalized state on the operator's registry."""
    if not (state.registry is p.registry or state.registry == p.registry):
        raise InvalidArgument("state and operator live on different registries")
    out = apply_dense(p, state)
    return complex(np.vdot(state.vector(), out.vector()))
