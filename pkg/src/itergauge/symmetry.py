"""Check systems, symmetry generators, Gauss operators and gauging maps.

A check system lists, for every check ``c``, the matter vertices it touches
with an orientation ``sigma = +1/-1``; the check is ``X^c_chi = prod_v
X^v_{sigma chi}``.  Symmetry generators are exponent vectors ``e`` over the
vertices with ``sum_v sigma_{c,v} e_v = 0`` for every check.

Sign conventions (fixed by requiring the dressed constraints to commute with
the Gauss operators, and the stacked terms to commute with both maps):

* primal Gauss operator ``G^v_g = Z^v_g prod_{c ∋ v} X^c_{sigma_{c,v} g}``
* dual Gauss operator   ``G^c_chi = Z^c_chi prod_{v in c} X^v_{-sigma_{c,v} chi}``
* dressed constraint    ``Z^c_chi X^c_chi``
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .abelian import FiniteAbelianGroup, InvalidArgument, Label, kernel_mod, make_group
from .lattice import CellComplex, LayeredLattice, layer_registry, square_torus, triangular_torus
from .pauli import (
    DEFAULT_DENSE_CAP,
    CHAR,
    GROUP,
    DenseState,
    PauliOperator,
    SiteRegistry,
    apply_dense,
    check_dimension,
)


class UnsupportedGroup(InvalidArgument):
    """The requested model is only defined for a different group."""


@dataclass(frozen=True, eq=False)
class CheckSystem:
    group: FiniteAbelianGroup
    vertices: tuple
    checks: tuple
    incidence: tuple  # per check: tuple of (vertex index, sigma)
    model: str = "custom"
    size: tuple = ()
    _vertex_index: dict = field(default=None, repr=False)
    _check_index: dict = field(default=None, repr=False)
    _by_vertex: tuple = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if len(self.incidence) != len(self.checks):
            raise InvalidArgument("one incidence row per check is required")
        by_vertex = [[] for _ in self.vertices]
        for c, row in enumerate(self.incidence):
            if not row:
                raise InvalidArgument(f"check {self.checks[c]!r} touches no vertex")
            seen = set()
            for v, s in row:
                if s not in (1, -1):
                    raise InvalidArgument(f"orientation must be +1 or -1, got {s}")
                if v in seen:
                    raise InvalidArgument(f"check {self.checks[c]!r} lists vertex {v} twice")
                seen.add(v)
                by_vertex[v].append((c, s))
        object.__setattr__(self, "_vertex_index", {k: i for i, k in enumerate(self.vertices)})
        object.__setattr__(self, "_check_index", {k: i for i, k in enumerate(self.checks)})
        object.__setattr__(self, "_by_vertex", tuple(tuple(x) for x in by_vertex))

    def vertex_index(self, key) -> int:
        try:
            return self._vertex_index[key]
        except KeyError:
            raise InvalidArgument(f"unknown vertex {key!r}") from None

    def check_index(self, key) -> int:
        try:
            return self._check_index[key]
        except KeyError:
            raise InvalidArgument(f"unknown check {key!r}") from None

    def checks_of(self, v: int) -> tuple:
        """``(check index, sigma)`` for every check touching vertex ``v``."""
        return self._by_vertex[v]

    def matrix(self) -> list[list[int]]:
        """Incidence matrix, rows are checks and columns vertices."""
        m = [[0] * len(self.vertices) for _ in self.checks]
        for c, row in enumerate(self.incidence):
            for v, s in row:
                m[c][v] = s
        return m

    def as_grid(self, gen, factor: int = 0) -> list[list[int]]:
        """Exponents of a generator arranged as ``grid[j][i]`` for vertex ``(i, j)``."""
        lx = max(v[0] for v in self.vertices) + 1
        ly = max(v[1] for v in self.vertices) + 1
        grid = [[0] * lx for _ in range(ly)]
        for (i, j), e in zip(self.vertices, gen.exponents):
            grid[j][i] = e[factor]
        return grid


@dataclass(frozen=True)
class SymmetryGenerator:
    """Exponent vector over the vertices (or, for emergent ones, over the checks)."""

    exponents: tuple[Label, ...]
    label: str = ""

    @property
    def support(self) -> list[int]:
        return [i for i, e in enumerate(self.exponents) if any(e)]


# -- check systems ---------------------------------------------------------------

def checks_zero_form(cx: CellComplex, group: FiniteAbelianGroup | None = None) -> CheckSystem:
    """One check per oriented edge: ``X_chi`` on the source, ``X_chi-bar`` on the target."""
    group = group or make_group([2])
    vidx = {v: i for i, v in enumerate(cx.vertices)}
    inc = tuple(((vidx[e.source], 1), (vidx[e.target], -1)) for e in cx.edges)
    return CheckSystem(group, cx.vertices, tuple(e.key for e in cx.edges), inc, "zero-form", cx.size)


def checks_lss(cx: CellComplex, group: FiniteAbelianGroup | None = None) -> CheckSystem:
    """One four-body check per square plaquette with corner signs (+, -, -, +)."""
    if cx.shape != "square":
        raise InvalidArgument("subsystem checks need the square torus")
    group = group or make_group([2])
    vidx = {v: i for i, v in enumerate(cx.vertices)}
    inc = tuple(tuple((vidx[v], s) for v, s in zip(p.corners, (1, -1, -1, 1))) for p in cx.plaquettes)
    return CheckSystem(group, cx.vertices, tuple(p.key for p in cx.plaquettes), inc, "lss", cx.size)


def checks_sierpinski(cx: CellComplex, group: FiniteAbelianGroup | None = None) -> CheckSystem:
    """One three-body check per up-triangle, on its base point and its two neighbours."""
    if cx.shape != "triangular":
        raise InvalidArgument("fractal checks need the triangular torus")
    group = group or make_group([2])
    if group.orders != (2,):
        raise UnsupportedGroup(f"the fractal model is defined for Z2 only, got {group}")
    vidx = {v: i for i, v in enumerate(cx.vertices)}
    inc = tuple(tuple((vidx[v], 1) for v in p.corners) for p in cx.up_triangles)
    return CheckSystem(group, cx.vertices, tuple(p.key for p in cx.up_triangles), inc, "sierpinski", cx.size)


def build_system(model: str, size: Sequence[int], group: FiniteAbelianGroup) -> CheckSystem:
    """Check system of a named model on a torus of the given size."""
    if model == "zero-form":
        return checks_zero_form(square_torus(*size), group)
    if model == "lss":
        return checks_lss(square_torus(*size), group)
    if model == "sierpinski":
        if len(set(size)) != 1:
            raise InvalidArgument("the triangular torus is square, sizes must agree")
        return checks_sierpinski(triangular_torus(size[0]), group)
    raise InvalidArgument(f"unknown model {model!r}")


# -- generators ------------------------------------------------------------------------

def _factor_kernel(group: FiniteAbelianGroup, matrix: list[list[int]], width: int, name: str):
    gens = []
    for f, n in enumerate(group.orders):
        if n == 1:
            continue
        for k, vec in enumerate(kernel_mod(matrix, [n] * width, [n] * len(matrix)) if matrix else
                                [tuple(int(i == j) for j in range(width)) for i in range(width)]):
            exps = tuple(tuple(x if i == f else 0 for i in range(group.rank)) for x in vec)
            gens.append(SymmetryGenerator(exps, f"{name}{len(gens)}"))
    return gens


def valid_generators(system: CheckSystem) -> list[SymmetryGenerator]:
    """Generating set of the exponent vectors commuting with every check."""
    gens = _factor_kernel(system.group, system.matrix(), len(system.vertices), "sym")
    if system.model == "sierpinski":
        gens = [SymmetryGenerator(g.exponents, f"S_q q={tuple(system.as_grid(g)[0])}") for g in gens]
    return gens


def emergent_generators(system: CheckSystem) -> list[SymmetryGenerator]:
    """Generating set of check exponents ``f`` with ``prod_c X^c_{f_c}`` = identity."""
    m = system.matrix()
    mt = [[m[c][v] for c in range(len(system.checks))] for v in range(len(system.vertices))]
    return _factor_kernel(system.group, mt, len(system.checks), "emergent")


def lss_row(system: CheckSystem, j: int, g: Sequence[int]) -> SymmetryGenerator:
    g = system.group.check(g)
    zero = system.group.zero()
    return SymmetryGenerator(tuple(g if v[1] == j else zero for v in system.vertices), f"row {j}")


def lss_column(system: CheckSystem, i: int, g: Sequence[int]) -> SymmetryGenerator:
    g = system.group.check(g)
    zero = system.group.zero()
    return SymmetryGenerator(tuple(g if v[0] == i else zero for v in system.vertices), f"column {i}")


def _periodic_history(q: Sequence[int], step) -> list[list[int]] | None:
    rows = [list(q)]
    for _ in range(len(q) - 1):
        rows.append(step(rows[-1]))
    return rows if step(rows[-1]) == rows[0] else None


def sierpinski_history(q: Sequence[int]) -> list[list[int]] | None:
    """Rows ``j = 0..L-1`` of ``S(i, j+1) = S(i+1, j) + S(i, j)`` from row ``q``.

    Returns ``None`` when the history is not periodic on the torus.
    """
    n = len(q)
    return _periodic_history(q, lambda r: [(r[(i + 1) % n] + r[i]) % 2 for i in range(n)])


def sierpinski_dual_history(q: Sequence[int]) -> list[list[int]] | None:
    """Histories of the reversed rule ``S(i, j) = S(i, j+1) + S(i-1, j+1)``, indexed by ``j``."""
    n = len(q)
    down = _periodic_history(q, lambda r: [(r[i] + r[(i - 1) % n]) % 2 for i in range(n)])
    if down is None:
        return None
    # down[k] is row -k; reindex so that hist[j] is row j
    return [down[(-j) % n] for j in range(n)]


# -- local emergent generators --------------------------------------------------

def _reduce_weights(vectors: list[list[int]], n: int) -> list[list[int]]:
    """Greedy pairwise reduction of the total support size."""
    vecs = [list(v) for v in vectors]
    weight = lambda v: sum(1 for x in v if x % n)
    improved = True
    while improved:
        improved = False
        for a in range(len(vecs)):
            for b in range(len(vecs)):
                if a == b:
                    continue
                for k in range(1, n):
                    cand = [(x + k * y) % n for x, y in zip(vecs[a], vecs[b])]
                    if 0 < weight(cand) < weight(vecs[a]):
                        vecs[a] = cand
                        improved = True
    return vecs


def local_emergent_generators(system: CheckSystem, window: int = 2) -> list[SymmetryGenerator]:
    """Emergent generators supported on a contractible patch, translated over the torus.

    Solutions are computed on a ``window x window`` patch of checks cut out of
    a larger torus, so that no solution can wrap around; the resulting motifs
    are then translated to every position of ``system``.
    """
    if system.model not in ("zero-form", "lss", "sierpinski"):
        raise InvalidArgument("local emergent generators need a named translation-invariant model")
    group = system.group
    big_l = window + 3
    big = build_system(system.model, (big_l, big_l), group)
    inside = [c for c, key in enumerate(big.checks) if key[0] < window and key[1] < window]
    touched = sorted({v for c in inside for v, _ in big.incidence[c]})
    row_of = {v: r for r, v in enumerate(touched)}
    mat = [[0] * len(inside) for _ in touched]
    for col, c in enumerate(inside):
        for v, s in big.incidence[c]:
            mat[row_of[v]][col] = s
    lx, ly = system.size
    out: list[SymmetryGenerator] = []
    seen = set()
    for f, n in enumerate(group.orders):
        if n == 1:
            continue
        motifs = _reduce_weights([list(v) for v in kernel_mod(mat, [n] * len(inside), [n] * len(touched))], n)
        for motif in motifs:
            for b in range(ly):
                for a in range(lx):
                    vec = [0] * len(system.checks)
                    for col, x in enumerate(motif):
                        if x:
                            key = big.checks[inside[col]]
                            moved = ((key[0] + a) % lx, (key[1] + b) % ly) + tuple(key[2:])
                            idx = system.check_index(moved)
                            vec[idx] = (vec[idx] + x) % n
                    if not any(vec) or not _is_emergent(system, vec, n):
                        continue
                    canon = (f, tuple(vec))
                    if canon in seen:
                        continue
                    seen.add(canon)
                    exps = tuple(tuple(x if i == f else 0 for i in range(group.rank)) for x in vec)
                    out.append(SymmetryGenerator(exps, f"local{len(out)}"))
    return out


def _is_emergent(system: CheckSystem, vec: Sequence[int], n: int) -> bool:
    total = [0] * len(system.vertices)
    for c, row in enumerate(system.incidence):
        if vec[c]:
            for v, s in row:
                total[v] += s * vec[c]
    return all(t % n == 0 for t in total)


# -- gauging specs -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaugingSpec:
    """One gauging step.

    ``primal`` gauges the symmetry on vertex sites (``domain``) and adds
    group sites on the checks (``new``); ``dual`` gauges the emergent
    symmetry on check sites and adds character sites on the vertices.
    """

    direction: str
    system: CheckSystem
    registry: SiteRegistry
    domain: tuple[int, ...]
    new: tuple[int, ...]

    @property
    def matter(self) -> tuple[int, ...]:
        """Registry indices of the vertex sites."""
        return self.domain if self.direction == "primal" else self.new

    @property
    def gauge(self) -> tuple[int, ...]:
        """Registry indices of the check sites."""
        return self.new if self.direction == "primal" else self.domain

    def gauss_at(self, pos: int, label: Sequence[int]) -> PauliOperator:
        g = self.system.group
        label = g.check(label)
        zero = g.zero()
        ops = {}
        if not any(label):
            return PauliOperator(self.registry, 0, {})
        if self.direction == "primal":
            ops[self.domain[pos]] = (zero, label)
            for c, s in self.system.checks_of(pos):
                ops[self.new[c]] = (label if s == 1 else g.neg(label), zero)
        else:
            ops[self.domain[pos]] = (zero, label)
            for v, s in self.system.incidence[pos]:
                ops[self.new[v]] = (g.neg(label) if s == 1 else label, zero)
        return PauliOperator(self.registry, 0, ops)

    def project(self, state: DenseState, pos: int) -> DenseState:
        """Apply the local projector ``(1/|G|) sum_a G_a`` at domain position ``pos``."""
        g = self.system.group
        amps = state.amplitudes
        for gen in g.factor_generators():
            n = g.element_order(gen)
            op = self.gauss_at(pos, gen)
            cur = state if amps is state.amplitudes else DenseState(state.registry, amps)
            acc = cur.amplitudes.copy()
            for _ in range(n - 1):
                cur = apply_dense(op, cur)
                acc += cur.amplitudes
            amps = acc / n
        return DenseState(state.registry, amps)


def _standalone(system: CheckSystem, direction: str) -> GaugingSpec:
    layers = (1, 2) if direction == "primal" else (2, 3)
    reg = layer_registry(system.group, system.vertices, system.checks, layers)
    nv, nc = len(system.vertices), len(system.checks)
    if direction == "primal":
        return GaugingSpec("primal", system, reg, tuple(range(nv)), tuple(range(nv, nv + nc)))
    return GaugingSpec("dual", system, reg, tuple(range(nc)), tuple(range(nc, nc + nv)))


@functools.lru_cache(maxsize=64)
def primal_spec(system: CheckSystem) -> GaugingSpec:
    """Gauging of the vertex symmetry on a two-layer registry (vertices, then checks)."""
    return _standalone(system, "primal")


@functools.lru_cache(maxsize=64)
def dual_spec(system: CheckSystem) -> GaugingSpec:
    """Gauging of the emergent symmetry on a two-layer registry (checks, then vertices)."""
    return _standalone(system, "dual")


def layer_spec(lattice: LayeredLattice, system: CheckSystem, h: int) -> GaugingSpec:
    """Gauging step acting on layer ``h`` of a stack.

    If layer ``h + 1`` is missing (top of the stack) the returned GaugingSpec exposes
    Gauss operators on the domain layer only through ``domain``; callers that
    need the new sites must stay below the top.
    """
    if h not in lattice.layers[:-1]:
        raise InvalidArgument(f"layer index {h} has no layer above it in the stack")
    direction = "primal" if h % 2 else "dual"
    return GaugingSpec(direction, system, lattice.registry, tuple(lattice.layer_sites(h)), tuple(lattice.layer_sites(h + 1)))


def gauss_operator(spec: GaugingSpec, site, label: Sequence[int]) -> PauliOperator:
    """Gauss operator at a vertex key (primal) or check key (dual)."""
    if spec.direction == "primal":
        pos = spec.system.vertex_index(site)
    else:
        pos = spec.system.check_index(site)
    return spec.gauss_at(pos, label)


def check_operator(spec: GaugingSpec, c: int, chi: Sequence[int]) -> PauliOperator:
    """``X^c_chi`` on the vertex sites of ``spec``."""
    g = spec.system.group
    chi = g.check(chi)
    zero = g.zero()
    if not any(chi):
        return PauliOperator(spec.registry, 0, {})
    ops = {spec.matter[v]: (chi if s == 1 else g.neg(chi), zero) for v, s in spec.system.incidence[c]}
    return PauliOperator(spec.registry, 0, ops)


def dressed_constraint(spec: GaugingSpec, check, chi: Sequence[int]) -> PauliOperator:
    """``Z^c_chi X^c_chi``; commutes with every primal Gauss operator."""
    if spec.direction != "primal":
        raise InvalidArgument("dressed constraints belong to primal gauging")
    c = spec.system.check_index(check)
    g = spec.system.group
    chi = g.check(chi)
    base = check_operator(spec, c, chi)
    if not any(chi):
        return base
    ops = dict(base.ops)
    ops[spec.gauge[c]] = (g.zero(), chi)
    return PauliOperator(spec.registry, 0, ops)


def generator_operator(spec: GaugingSpec, gen: SymmetryGenerator) -> PauliOperator:
    """``prod_v Z^v_{e_v}`` on the vertex sites of ``spec``."""
    zero = spec.system.group.zero()
    ops = {spec.matter[v]: (zero, e) for v, e in enumerate(gen.exponents) if any(e)}
    return PauliOperator(spec.registry, 0, ops)


def emergent_operator(spec: GaugingSpec, gen: SymmetryGenerator) -> PauliOperator:
    """``prod_c Z^c_{f_c}`` on the check sites of ``spec``."""
    zero = spec.system.group.zero()
    ops = {spec.gauge[c]: (zero, f) for c, f in enumerate(gen.exponents) if any(f)}
    return PauliOperator(spec.registry, 0, ops)


def apply_gauging_dense(spec: GaugingSpec, state: DenseState, cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """Append the new sites in the trivial label, then apply every local projector.

    The output is not renormalized.  The new sites must directly follow the
    state's sites in the spec's registry.
    """
    n = len(state.registry)
    if not state.registry.is_prefix_of(spec.registry):
        raise InvalidArgument("state registry is not a prefix of the spec registry")
    if list(spec.new) != list(range(n, n + len(spec.new))):
        raise InvalidArgument("new sites must follow the state's sites")
    if any(i >= n for i in spec.domain):
        raise InvalidArgument("the gauged sites must already be present in the state")
    total = n + len(spec.new)
    group = spec.system.group
    check_dimension(group, total, cap)
    reg = spec.registry if total == len(spec.registry) else spec.registry.prefix(total)
    d = group.order
    amps = np.zeros(state.amplitudes.shape + (d,) * len(spec.new), dtype=complex)
    amps[(Ellipsis,) + (0,) * len(spec.new)] = state.amplitudes
    out = DenseState(reg, amps)
    for pos in range(len(spec.domain)):
        out = spec.project(out, pos)
    return out
