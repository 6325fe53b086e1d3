"""Stabilizer codes produced by iterated gauging.

A stack alternates matter layers (odd ``h``, character sites on vertices)
and gauge layers (even ``h``, group sites on checks).  The generators are

* ``bulk-a`` at a vertex ``v`` of gauge layer ``h``:
  ``Z^{v,h-1}_{-g} prod_{c ∋ v} X^{c,h}_{-sigma g} Z^{v,h+1}_g``
* ``bulk-b`` at a check ``c`` of matter layer ``h``:
  ``Z^{c,h-1}_{-chi} prod_{v in c} X^{v,h}_{sigma chi} Z^{c,h+1}_chi``
* ``emergent-constraint``: local emergent generators as Z-strings on a gauge layer
* boundary families at the bottom (``c``/``d`` for a matter bottom,
  ``e``/``f`` for a gauge bottom) selected by the boundary subgroup ``H``,
  and truncated bulk terms at the top of a finite stack.

Labels run over the cyclic-factor generators of ``G`` unless the full
family is requested.
"""

from __future__ import annotations

import functools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .abelian import (
    FiniteAbelianGroup,
    InvalidArgument,
    Label,
    Subgroup,
    annihilator,
    kernel_mod,
    make_group,
    parse_phase,
    phase_str,
    smith_normal_form,
    subgroup_closure,
    subgroup_from_members,
)
from .lattice import LayeredLattice, layer_name, layered
from .pauli import CHAR, GROUP, PauliOperator, SiteRegistry, commutation_phase, compose, hadamard_conjugate, power
from .symmetry import CheckSystem, build_system, local_emergent_generators

TAGS = ("bulk-a", "bulk-b", "boundary-d", "boundary-c", "boundary-e", "boundary-f", "emergent-constraint")
FORMAT = "itergauge-code/1"
DEFAULT_LOCALITY_BOUND = 8


class BoundarySite(InvalidArgument):
    """A bulk term was requested where an adjacent layer is missing."""


class ConstructionError(RuntimeError):
    """Two generators of a built code fail to commute."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None) -> None:
        super().__init__(message)
        self.pair = pair


class MalformedDocument(InvalidArgument):
    pass


@dataclass(frozen=True)
class Generator:
    tag: str
    location: str
    label: Label
    operator: PauliOperator


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    lattice: LayeredLattice
    system: CheckSystem
    boundary: Subgroup
    generators: tuple[Generator, ...]
    locality_bound: int = DEFAULT_LOCALITY_BOUND
    far_end: str = "mirrored"
    registry: SiteRegistry = field(default=None)

    def __post_init__(self) -> None:
        if self.registry is None:
            object.__setattr__(self, "registry", self.lattice.registry)

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.registry.group

    @property
    def start(self) -> str:
        return self.lattice.start

    def counts(self) -> dict[str, int]:
        c = Counter(g.tag for g in self.generators)
        return {t: c[t] for t in TAGS if c[t]}


@dataclass
class CodeReport:
    commuting: bool
    offending: tuple[int, int] | None
    counts: dict[str, int]
    expectations: dict[int, complex] | None = None
    dimension: int | None = None
    far_end: str = "mirrored"

    @property
    def stabilized(self) -> bool | None:
        if self.expectations is None:
            return None
        return all(abs(v - 1) < 1e-10 for v in self.expectations.values())

    @property
    def ok(self) -> bool:
        return self.commuting and self.stabilized is not False


# -- generator families -----------------------------------------------------------

def _fmt_key(key) -> str:
    return ",".join(map(str, key))


def _op(lattice: LayeredLattice, ops: dict) -> PauliOperator:
    zero = lattice.registry.group.zero()
    return PauliOperator(lattice.registry, Fraction(0), {i: td for i, td in ops.items() if td != (zero, zero)})


def _need(lattice: LayeredLattice, *hs: int) -> None:
    for h in hs:
        if h not in lattice.layers:
            raise BoundarySite(f"layer {layer_name(h)} is not part of the stack")


def bulk_a(lattice: LayeredLattice, system: CheckSystem, vertex, h: int, g: Sequence[int]) -> PauliOperator:
    """Vertex term at gauge layer ``h``, touching matter layers ``h -+ 1``."""
    if h % 2:
        raise InvalidArgument(f"a-terms sit on gauge layers, {layer_name(h)} is a matter layer")
    _need(lattice, h - 1, h, h + 1)
    grp = system.group
    g = grp.check(g)
    zero = grp.zero()
    v = system.vertex_index(vertex)
    ops = {
        lattice.site("v", vertex, h - 1): (zero, grp.neg(g)),
        lattice.site("v", vertex, h + 1): (zero, g),
    }
    for c, s in system.checks_of(v):
        ops[lattice.site("c", system.checks[c], h)] = (grp.neg(g) if s == 1 else g, zero)
    return _op(lattice, ops)


def bulk_b(lattice: LayeredLattice, system: CheckSystem, check, h: int, chi: Sequence[int]) -> PauliOperator:
    """Check term at matter layer ``h``, touching gauge layers ``h -+ 1``."""
    if not h % 2:
        raise InvalidArgument(f"b-terms sit on matter layers, {layer_name(h)} is a gauge layer")
    _need(lattice, h - 1, h, h + 1)
    grp = system.group
    chi = grp.check(chi)
    zero = grp.zero()
    c = system.check_index(check)
    ops = {
        lattice.site("c", check, h - 1): (zero, grp.neg(chi)),
        lattice.site("c", check, h + 1): (zero, chi),
    }
    for v, s in system.incidence[c]:
        ops[lattice.site("v", system.vertices[v], h)] = (chi if s == 1 else grp.neg(chi), zero)
    return _op(lattice, ops)


@functools.lru_cache(maxsize=32)
def _local_emergent(system: CheckSystem):
    try:
        return tuple(local_emergent_generators(system))
    except InvalidArgument:
        return ()


def emergent_constraints(lattice: LayeredLattice, system: CheckSystem, h: int,
                         locality_bound: int = DEFAULT_LOCALITY_BOUND) -> list[Generator]:
    """Local emergent generators as Z-type terms on gauge layer ``h``."""
    if h % 2:
        raise InvalidArgument("emergent constraints live on gauge layers")
    _need(lattice, h)
    zero = system.group.zero()
    out = []
    for k, gen in enumerate(_local_emergent(system)):
        if len(gen.support) > locality_bound:
            continue
        ops = {lattice.site("c", system.checks[c], h): (zero, f) for c, f in enumerate(gen.exponents) if any(f)}
        factor = next(i for i in range(system.group.rank) if any(f[i] for f in gen.exponents))
        label = tuple(int(i == factor) for i in range(system.group.rank))
        out.append(Generator("emergent-constraint", f"loop:{k}@{layer_name(h)}", label, _op(lattice, ops)))
    return out


def _labels(group: FiniteAbelianGroup, full: bool) -> list[Label]:
    if full:
        return [x for x in group.elements() if any(x)]
    return group.factor_generators()


def _sub_labels(group: FiniteAbelianGroup, members: Iterable[Label], full: bool) -> list[Label]:
    members = sorted(set(members))
    if full:
        return [x for x in members if any(x)]
    return subgroup_from_members(group, members).generating_set()


def boundary_family(lattice: LayeredLattice, system: CheckSystem, H: Subgroup, full: bool = False) -> list[Generator]:
    """Bottom boundary terms selected by the subgroup ``H``.

    Matter bottom: ``c_h = Z_h`` on each vertex for ``h`` in ``H`` and the
    truncated b-terms ``d_chi`` for ``chi`` annihilating ``H``.  Gauge
    bottom: the truncated a-terms ``e_h`` for ``h`` in ``H`` and
    ``f_chi = Z_chi`` on each check for ``chi`` annihilating ``H``.
    """
    grp = system.group
    if H.group != grp:
        raise InvalidArgument("boundary subgroup belongs to a different group")
    zero = grp.zero()
    h0 = lattice.bottom
    in_h = _sub_labels(grp, H.members, full)
    ann = _sub_labels(grp, annihilator(grp, H), full)
    out: list[Generator] = []
    if lattice.start == "matter":
        for v in system.vertices:
            for h in in_h:
                op = _op(lattice, {lattice.site("v", v, h0): (zero, h)})
                out.append(Generator("boundary-c", f"v:{_fmt_key(v)}@{layer_name(h0)}", h, op))
        for c, key in enumerate(system.checks):
            for chi in ann:
                ops = {lattice.site("c", key, h0 + 1): (zero, chi)}
                for v, s in system.incidence[c]:
                    ops[lattice.site("v", system.vertices[v], h0)] = (chi if s == 1 else grp.neg(chi), zero)
                out.append(Generator("boundary-d", f"c:{_fmt_key(key)}@{layer_name(h0)}", chi, _op(lattice, ops)))
    else:
        for vi, v in enumerate(system.vertices):
            for h in in_h:
                ops = {lattice.site("v", v, h0 + 1): (zero, h)}
                for c, s in system.checks_of(vi):
                    ops[lattice.site("c", system.checks[c], h0)] = (grp.neg(h) if s == 1 else h, zero)
                out.append(Generator("boundary-e", f"v:{_fmt_key(v)}@{layer_name(h0)}", h, _op(lattice, ops)))
        for key in system.checks:
            for chi in ann:
                op = _op(lattice, {lattice.site("c", key, h0): (zero, chi)})
                out.append(Generator("boundary-f", f"c:{_fmt_key(key)}@{layer_name(h0)}", chi, op))
    return out


def top_family(lattice: LayeredLattice, system: CheckSystem, full: bool = False) -> list[Generator]:
    """Truncated bulk terms closing the top layer of a finite stack.

    A gauge top keeps the a-terms without their upper Z factor; a matter top
    keeps the b-terms without their upper Z factor.  These are the Gauss
    operators of the last gauging step, so they stabilize the emergent
    state for every boundary subgroup.
    """
    grp = system.group
    zero = grp.zero()
    top = lattice.top
    labels = _labels(grp, full)
    out = []
    if top % 2 == 0:
        for vi, v in enumerate(system.vertices):
            for g in labels:
                ops = {lattice.site("v", v, top - 1): (zero, grp.neg(g))}
                for c, s in system.checks_of(vi):
                    ops[lattice.site("c", system.checks[c], top)] = (grp.neg(g) if s == 1 else g, zero)
                out.append(Generator("boundary-e", f"v:{_fmt_key(v)}@{layer_name(top)}", g, _op(lattice, ops)))
    else:
        for c, key in enumerate(system.checks):
            for chi in labels:
                ops = {lattice.site("c", key, top - 1): (zero, grp.neg(chi))}
                for v, s in system.incidence[c]:
                    ops[lattice.site("v", system.vertices[v], top)] = (chi if s == 1 else grp.neg(chi), zero)
                out.append(Generator("boundary-d", f"c:{_fmt_key(key)}@{layer_name(top)}", chi, _op(lattice, ops)))
    return out


# -- building and checking ---------------------------------------------------------

def find_noncommuting(generators: Sequence[Generator]) -> tuple[int, int] | None:
    """First pair (by index) whose operators do not commute, or ``None``.

    Only pairs sharing a site are compared; disjoint operators commute.
    """
    by_site = defaultdict(list)
    for k, gen in enumerate(generators):
        for i in gen.operator.support:
            by_site[i].append(k)
    for k, gen in enumerate(generators):
        partners = sorted({j for i in gen.operator.support for j in by_site[i] if j > k})
        for j in partners:
            if commutation_phase(gen.operator, generators[j].operator) != 0:
                return k, j
    return None


def _as_subgroup(group: FiniteAbelianGroup, H) -> Subgroup:
    if H is None:
        return subgroup_closure(group, group.factor_generators())
    if isinstance(H, Subgroup):
        return H
    return subgroup_closure(group, H)


def build_code(
    system: CheckSystem,
    depth: int,
    start: str = "matter",
    H=None,
    locality_bound: int = DEFAULT_LOCALITY_BOUND,
    far_end: str = "mirrored",
    full_family: bool = False,
) -> StabilizerCode:
    """Assemble every generator of the stacked code and check commutation.

    ``H`` defaults to the whole group; it may be a ``Subgroup`` or a list of
    generators.  ``far_end`` is ``"mirrored"`` (truncated bulk terms on the
    top layer) or ``"open"`` (no top terms).
    """
    if far_end not in ("mirrored", "open"):
        raise InvalidArgument(f"far_end must be 'mirrored' or 'open', got {far_end!r}")
    if locality_bound < 1:
        raise InvalidArgument("locality bound must be positive")
    grp = system.group
    H = _as_subgroup(grp, H)
    lattice = layered(system, depth, start)
    labels = _labels(grp, full_family)
    gens: list[Generator] = list(boundary_family(lattice, system, H, full_family))
    for h in lattice.layers:
        if h % 2 == 0:
            gens.extend(emergent_constraints(lattice, system, h, locality_bound))
        if h - 1 not in lattice.layers or h + 1 not in lattice.layers:
            continue
        if h % 2 == 0:
            for v in system.vertices:
                for g in labels:
                    gens.append(Generator("bulk-a", f"v:{_fmt_key(v)}@{layer_name(h)}", g, bulk_a(lattice, system, v, h, g)))
        else:
            for c in system.checks:
                for chi in labels:
                    gens.append(Generator("bulk-b", f"c:{_fmt_key(c)}@{layer_name(h)}", chi, bulk_b(lattice, system, c, h, chi)))
    if far_end == "mirrored":
        gens.extend(top_family(lattice, system, full_family))
    for gen in gens:
        if gen.tag != "emergent-constraint" and gen.operator.weight > locality_bound:
            raise InvalidArgument(f"{gen.tag} term at {gen.location} has support {gen.operator.weight} "
                                  f"above the locality bound {locality_bound}")
    code = StabilizerCode(lattice, system, H, tuple(gens), locality_bound, far_end)
    bad = find_noncommuting(code.generators)
    if bad is not None:
        a, b = (code.generators[i] for i in bad)
        raise ConstructionError(f"generators {bad[0]} ({a.tag} {a.location}) and {bad[1]} "
                                f"({b.tag} {b.location}) do not commute", bad)
    return code


def verify_code(code: StabilizerCode, state=None, dimension: bool = False) -> CodeReport:
    """Exact commutation scan, optional dense expectations, optional dimension."""
    bad = find_noncommuting(code.generators)
    report = CodeReport(bad is None, bad, code.counts(), far_end=code.far_end)
    if state is not None:
        from .simulate import expectation

        report.expectations = {k: expectation(state, g.operator) for k, g in enumerate(code.generators)}
    if dimension and bad is None:
        report.dimension = code_dimension(code)
    return report


# -- Hadamard frame and dimension ---------------------------------------------------

def hadamard_normal_form(code: StabilizerCode) -> StabilizerCode:
    """Conjugate every generator by the Fourier map on all character sites."""
    reg = code.registry
    chars = [i for i, s in enumerate(reg.sites) if s.kind is CHAR]
    gens = []
    for g in code.generators:
        gens.append(Generator(g.tag, g.location, g.label, hadamard_conjugate(g.operator, chars)))
    new_reg = gens[0].operator.registry if gens else reg.rekind(chars)
    return StabilizerCode(code.lattice, code.system, code.boundary, tuple(gens), code.locality_bound, code.far_end, new_reg)


def _symplectic(op: PauliOperator, n: int, rank: int) -> list[int]:
    vec = [0] * (2 * n * rank)
    for i, (t, d) in op.ops.items():
        for f in range(rank):
            vec[(2 * i) * rank + f] = t[f]
            vec[(2 * i + 1) * rank + f] = d[f]
    return vec


def code_dimension(code: StabilizerCode) -> int:
    """Dimension of the joint +1 eigenspace of all generators.

    The generated group is abelian, so the dimension is ``|G|^n / |S|``
    unless ``S`` contains a nontrivial scalar, in which case it is 0.
    ``|S|`` is read off the Smith normal form of the generator vectors
    together with the coordinate moduli.
    """
    grp = code.group
    n = len(code.registry)
    ops = [g.operator for g in code.generators]
    if find_noncommuting(code.generators) is not None:
        raise InvalidArgument("code_dimension needs commuting generators")
    total = grp.order ** n
    for p in ops:
        if power(p, grp.exponent).phase != 0:
            return 0
    if not ops:
        return total
    moduli = [m for _ in range(2 * n) for m in grp.orders]
    rows = [_symplectic(p, n, grp.rank) for p in ops]
    lattice_rows = rows + [[m if k == j else 0 for k in range(len(moduli))] for j, m in enumerate(moduli)]
    _, s, _ = smith_normal_form(lattice_rows)
    index = 1
    for i in range(len(moduli)):
        index *= abs(s[i][i])
    prod = 1
    for m in moduli:
        prod *= m
    image = prod // index
    cols = [[rows[k][j] for k in range(len(ops))] for j in range(len(moduli))]
    for rel in kernel_mod(cols, [grp.exponent] * len(ops), moduli):
        acc = None
        for k, a in enumerate(rel):
            if a % grp.exponent:
                term = power(ops[k], a % grp.exponent)
                acc = term if acc is None else compose(acc, term)
        if acc is not None and (acc.ops or acc.phase != 0):
            if acc.ops:
                raise AssertionError("relation does not close to a scalar")
            return 0
    return total // image


# -- JSON documents ----------------------------------------------------------------

def _site_entry(reg: SiteRegistry, i: int) -> dict:
    role, key, h = reg.sites[i].id
    return {"id": i, "kind": "group" if reg.sites[i].kind is GROUP else "char", "layer": layer_name(h), "coords": list(key)}


def to_document(code: StabilizerCode) -> dict:
    reg = code.registry
    meta = {
        "model": code.system.model,
        "size": list(code.system.size),
        "depth": code.lattice.depth,
        "start": code.start,
        "boundary": [list(x) for x in _boundary_generators(code)],
        "locality_bound": code.locality_bound,
        "far_end": code.far_end,
    }
    gens = []
    for k, g in enumerate(code.generators):
        op = g.operator
        gens.append({
            "id": k,
            "tag": g.tag,
            "location": g.location,
            "label": list(g.label),
            "phase": phase_str(op.phase),
            "ops": [[i, list(op.ops[i][0]), list(op.ops[i][1])] for i in op.support],
        })
    return {
        "format": FORMAT,
        "group": list(code.group.orders),
        "meta": meta,
        "sites": [_site_entry(reg, i) for i in range(len(reg))],
        "generators": gens,
    }


def _boundary_generators(code: StabilizerCode) -> list[Label]:
    H = code.boundary
    if H.generators:
        return [x for x in H.generators if any(x)]
    return H.generating_set()


def dumps(code: StabilizerCode) -> str:
    return json.dumps(to_document(code), indent=1) + "\n"


def _need_field(obj: Any, key: str, kind) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedDocument(f"missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise MalformedDocument(f"field {key!r} has the wrong type")
    return val


def _int_list(val, length: int | None, what: str) -> tuple[int, ...]:
    if not isinstance(val, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in val):
        raise MalformedDocument(f"{what} must be a list of integers")
    if length is not None and len(val) != length:
        raise MalformedDocument(f"{what} must have {length} components")
    return tuple(val)


def from_document(doc: Any) -> StabilizerCode:
    """Rebuild a code from its JSON document without re-deriving the generators.

    The lattice is reconstructed from the metadata and must match the site
    table exactly; generator operators are taken verbatim from the document.
    """
    if _need_field(doc, "format", str) != FORMAT:
        raise MalformedDocument(f"unsupported format {doc['format']!r}")
    try:
        group = make_group(_int_list(_need_field(doc, "group", list), None, "group"))
        meta = _need_field(doc, "meta", dict)
        system = build_system(_need_field(meta, "model", str), _int_list(_need_field(meta, "size", list), None, "size"), group)
        depth = _need_field(meta, "depth", int)
        start = _need_field(meta, "start", str)
        lattice = layered(system, depth, start)
        hgens = [_int_list(x, group.rank, "boundary generator") for x in _need_field(meta, "boundary", list)]
        H = subgroup_closure(group, hgens)
        bound = _need_field(meta, "locality_bound", int)
        far_end = _need_field(meta, "far_end", str)
    except MalformedDocument:
        raise
    except InvalidArgument as exc:
        raise MalformedDocument(f"invalid metadata: {exc}") from exc
    reg = lattice.registry
    sites = _need_field(doc, "sites", list)
    if len(sites) != len(reg) or any(s != _site_entry(reg, i) for i, s in enumerate(sites)):
        raise MalformedDocument("site table does not match the lattice described by the metadata")
    gens = []
    for k, entry in enumerate(_need_field(doc, "generators", list)):
        if _need_field(entry, "id", int) != k:
            raise MalformedDocument(f"generator ids must be consecutive, got {entry['id']} at position {k}")
        tag = _need_field(entry, "tag", str)
        if tag not in TAGS:
            raise MalformedDocument(f"unknown tag {tag!r}")
        location = _need_field(entry, "location", str)
        label = group.check(_int_list(_need_field(entry, "label", list), group.rank, "label"))
        try:
            phase = parse_phase(_need_field(entry, "phase", str))
        except InvalidArgument as exc:
            raise MalformedDocument(f"generator {k}: {exc}") from exc
        ops = {}
        for item in _need_field(entry, "ops", list):
            if not isinstance(item, list) or len(item) != 3 or not isinstance(item[0], int):
                raise MalformedDocument(f"generator {k}: site ops must be [site, t, d]")
            i = item[0]
            if not 0 <= i < len(reg) or i in ops:
                raise MalformedDocument(f"generator {k}: bad site id {i}")
            t = _int_list(item[1], group.rank, "t")
            d = _int_list(item[2], group.rank, "d")
            if t != group.check(t) or d != group.check(d):
                raise MalformedDocument(f"generator {k}: labels out of range")
            ops[i] = (t, d)
        gens.append(Generator(tag, location, label, PauliOperator(reg, phase, ops)))
    return StabilizerCode(lattice, system, H, tuple(gens), bound, far_end)


def loads(text: str) -> StabilizerCode:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    return from_document(doc)
