"""Periodic base lattices and their layered extensions.

Square torus: vertices ``(i, j)``; edge ``(i, j, 0)`` points from ``(i, j)``
to ``(i+1, j)`` and edge ``(i, j, 1)`` from ``(i, j)`` to ``(i, j+1)``;
plaquette ``(i, j)`` has lower-left corner ``(i, j)``.

Triangular torus: same vertex coordinates in the oblique basis.  The
up-triangle ``(i, j, 0)`` has corners ``(i, j), (i+1, j), (i, j+1)`` and base
point ``(i, j)``; the down-triangle ``(i, j, 1)`` fills the rest of the rhombus.

Layers are addressed by ``h = 2 * layer``: odd ``h`` carries character sites
on the vertices, even ``h`` carries group sites on the checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .abelian import FiniteAbelianGroup, InvalidArgument
from .pauli import CHAR, GROUP, SiteRegistry

Vertex = tuple[int, int]


@dataclass(frozen=True)
class Edge:
    key: tuple
    source: Vertex
    target: Vertex

    def reversed(self) -> "Edge":
        return Edge(self.key, self.target, self.source)


@dataclass(frozen=True)
class Plaquette:
    key: tuple
    corners: tuple[Vertex, ...]


@dataclass(frozen=True)
class CellComplex:
    shape: str
    size: tuple[int, int]
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    plaquettes: tuple[Plaquette, ...]
    up_triangles: tuple[Plaquette, ...] = ()

    def base_point(self, p: Plaquette) -> Vertex:
        if self.shape != "triangular" or p.key[2] != 0:
            raise InvalidArgument("base points are defined for up-triangles only")
        return (p.key[0], p.key[1])

    def plaquette_edges(self, p: Plaquette) -> list[tuple[tuple, int]]:
        """Boundary edges of a square plaquette with counter-clockwise signs."""
        if self.shape != "square":
            raise InvalidArgument("plaquette boundaries are provided for the square torus")
        lx, ly = self.size
        i, j = p.key
        return [((i, j, 0), 1), (((i + 1) % lx, j, 1), 1), ((i, (j + 1) % ly, 0), -1), ((i, j, 1), -1)]


def square_torus(lx: int, ly: int) -> CellComplex:
    if lx < 2 or ly < 2:
        raise InvalidArgument(f"torus sizes must be >= 2, got {lx}x{ly}")
    verts = tuple((i, j) for j in range(ly) for i in range(lx))
    edges = []
    for j in range(ly):
        for i in range(lx):
            edges.append(Edge((i, j, 0), (i, j), ((i + 1) % lx, j)))
            edges.append(Edge((i, j, 1), (i, j), (i, (j + 1) % ly)))
    plaqs = tuple(
        Plaquette((i, j), ((i, j), ((i + 1) % lx, j), (i, (j + 1) % ly), ((i + 1) % lx, (j + 1) % ly)))
        for j in range(ly)
        for i in range(lx)
    )
    return CellComplex("square", (lx, ly), verts, tuple(edges), plaqs)


def triangular_torus(n: int) -> CellComplex:
    if n < 2:
        raise InvalidArgument(f"torus size must be >= 2, got {n}")
    verts = tuple((i, j) for j in range(n) for i in range(n))
    edges, up, down = [], [], []
    for j in range(n):
        for i in range(n):
            a, b, c, d = (i, j), ((i + 1) % n, j), (i, (j + 1) % n), ((i + 1) % n, (j + 1) % n)
            edges.append(Edge((i, j, 0), a, b))
            edges.append(Edge((i, j, 1), a, c))
            edges.append(Edge((i, j, 2), b, c))
            up.append(Plaquette((i, j, 0), (a, b, c)))
            down.append(Plaquette((i, j, 1), (b, d, c)))
    return CellComplex("triangular", (n, n), verts, tuple(edges), tuple(up + down), tuple(up))


def layer_name(h: int) -> str:
    return f"{h}/2" if h % 2 else str(h // 2)


@dataclass(frozen=True, eq=False)
class LayeredLattice:
    registry: SiteRegistry
    vertices: tuple
    checks: tuple
    depth: int
    start: str
    layers: tuple[int, ...]

    def site(self, role: str, key, h: int) -> int:
        return self.registry.resolve((role, key, h))

    def layer_sites(self, h: int) -> list[int]:
        role, keys = ("v", self.vertices) if h % 2 else ("c", self.checks)
        return [self.registry.resolve((role, k, h)) for k in keys]

    @property
    def bottom(self) -> int:
        return self.layers[0]

    @property
    def top(self) -> int:
        return self.layers[-1]


def layer_registry(group: FiniteAbelianGroup, vertices: Sequence, checks: Sequence, layers: Sequence[int]) -> SiteRegistry:
    sites = []
    for h in layers:
        if h % 2:
            sites.extend((("v", v, h), CHAR) for v in vertices)
        else:
            sites.extend((("c", c, h), GROUP) for c in checks)
    return SiteRegistry.build(group, sites)


def layered(base, depth: int, start: str = "matter") -> LayeredLattice:
    """Stack ``depth + 1`` alternating layers over a check system.

    ``start="matter"`` begins with character sites at layer 1/2;
    ``start="gauge"`` begins with group sites at layer 1.
    """
    if depth < 1:
        raise InvalidArgument(f"depth must be >= 1, got {depth}")
    if start not in ("matter", "gauge"):
        raise InvalidArgument(f"start must be 'matter' or 'gauge', got {start!r}")
    h0 = 1 if start == "matter" else 2
    layers = tuple(range(h0, h0 + depth + 1))
    reg = layer_registry(base.group, base.vertices, base.checks, layers)
    return LayeredLattice(reg, tuple(base.vertices), tuple(base.checks), depth, start, layers)
