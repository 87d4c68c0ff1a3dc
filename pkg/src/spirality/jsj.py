"""Decorated dual graph of a torus decomposition, and the adjacency LERF test.

Pieces are the components of the manifold cut along the decomposition tori;
edges are the tori, each carrying a basis change between its two sides.
Inputs are assumed normalized: no T^2 x I pieces, no twisted I-bundles over
the Klein bottle, Seifert bases orientable without singular points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidGraph
from .lattice import Gluing, Slope

SEIFERT = "seifert"
HYP_FINITE_VOLUME = "hyperbolic_finite_volume"
HYP_HIGHER_GENUS = "hyperbolic_higher_genus"
PIECE_KINDS = (SEIFERT, HYP_FINITE_VOLUME, HYP_HIGHER_GENUS)


@dataclass(frozen=True)
class BoundaryComponent:
    id: str
    genus: int = 1


@dataclass(frozen=True)
class Piece:
    id: str
    kind: str
    boundary: tuple[BoundaryComponent, ...] = ()
    # torus boundary id -> slope of the regular fiber (Seifert pieces only)
    fiber_slopes: dict[str, Slope] = field(default_factory=dict)
    # torus boundary id -> degeneracy slope (hyperbolic pieces, optional)
    degeneracy_slopes: dict[str, Slope] = field(default_factory=dict)

    def boundary_ids(self):
        return [b.id for b in self.boundary]

    def torus_boundaries(self):
        return [b for b in self.boundary if b.genus == 1]

    def has_higher_genus_boundary(self) -> bool:
        return any(b.genus >= 2 for b in self.boundary)


@dataclass(frozen=True)
class Edge:
    id: str
    end_a: tuple[str, str]  # (piece id, boundary id)
    end_b: tuple[str, str]
    gluing: Gluing


@dataclass(frozen=True)
class JsjGraph:
    pieces: tuple[Piece, ...]
    edges: tuple[Edge, ...]
    is_sol: bool = False
    trivial_decomposition: bool = False

    def piece(self, pid: str) -> Piece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)


def validate(g: JsjGraph) -> list[str]:
    """Return the list of invariant violations (empty means valid)."""
    out = []
    pieces = {}
    for p in g.pieces:
        if p.id in pieces:
            out.append(f"duplicate piece id {p.id}")
        pieces[p.id] = p
        if p.kind not in PIECE_KINDS:
            out.append(f"piece {p.id}: unknown kind {p.kind!r}")
            continue
        seen = set()
        for b in p.boundary:
            if b.id in seen:
                out.append(f"piece {p.id}: duplicate boundary id {b.id}")
            seen.add(b.id)
            if b.genus < 0:
                out.append(f"piece {p.id}: boundary {b.id} has negative genus")
        if p.kind == SEIFERT:
            if p.has_higher_genus_boundary():
                out.append(f"piece {p.id}: Seifert piece with higher-genus boundary")
            for b in p.torus_boundaries():
                if b.id not in p.fiber_slopes:
                    out.append(f"piece {p.id}: missing fiber slope on torus {b.id}")
            if p.degeneracy_slopes:
                out.append(f"piece {p.id}: degeneracy slopes on a Seifert piece")
        else:
            if p.fiber_slopes:
                out.append(f"piece {p.id}: fiber slopes on a hyperbolic piece")
            for t in p.degeneracy_slopes:
                if t not in seen:
                    out.append(f"piece {p.id}: degeneracy slope on unknown boundary {t}")
        if p.kind == HYP_HIGHER_GENUS and not p.has_higher_genus_boundary():
            out.append(f"piece {p.id}: higher-genus kind without genus >= 2 boundary")
        if p.kind == HYP_FINITE_VOLUME and p.has_higher_genus_boundary():
            out.append(f"piece {p.id}: finite-volume piece with higher-genus boundary")
        for t in p.fiber_slopes:
            if t not in seen:
                out.append(f"piece {p.id}: fiber slope on unknown boundary {t}")

    used_ends = set()
    eids = set()
    for e in g.edges:
        if e.id in eids:
            out.append(f"duplicate edge id {e.id}")
        eids.add(e.id)
        for side, (pid, bid) in (("a", e.end_a), ("b", e.end_b)):
            p = pieces.get(pid)
            if p is None:
                out.append(f"edge {e.id}: unknown piece {pid}")
                continue
            bc = next((b for b in p.boundary if b.id == bid), None)
            if bc is None:
                out.append(f"edge {e.id}: unknown boundary {bid} of piece {pid}")
            elif bc.genus != 1:
                out.append(f"edge {e.id}: endpoint {bid} is not a torus")
            if (pid, bid) in used_ends:
                out.append(f"edge {e.id}: boundary {bid} of {pid} used by two edge ends")
            used_ends.add((pid, bid))
        if e.end_a == e.end_b:
            out.append(f"edge {e.id}: both ends on the same boundary component")

    if g.trivial_decomposition and (g.edges or len(g.pieces) != 1):
        out.append("trivial_decomposition set but graph is not a single edgeless piece")
    if not g.trivial_decomposition and not g.edges and len(g.pieces) == 1:
        out.append("single edgeless piece must set trivial_decomposition")

    if g.pieces and not _connected(g):
        out.append("graph is not connected")
    return out


def _connected(g: JsjGraph) -> bool:
    adj = {p.id: set() for p in g.pieces}
    for e in g.edges:
        if e.end_a[0] in adj and e.end_b[0] in adj:
            adj[e.end_a[0]].add(e.end_b[0])
            adj[e.end_b[0]].add(e.end_a[0])
    start = min(adj)
    seen = {start}
    stack = [start]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(adj)


@dataclass(frozen=True)
class LerfVerdict:
    lerf: bool
    witness_edge: str | None = None
    failing_summand: int | None = None

    def __str__(self):
        if self.lerf:
            return "Lerf"
        if self.witness_edge is not None:
            return f"NotLerf edge={self.witness_edge}"
        return f"NotLerf summand={self.failing_summand}"


def is_lerf(g: JsjGraph) -> LerfVerdict:
    """Adjacency criterion: every decomposition torus must touch a piece with
    a boundary component of genus at least 2.

    Geometric pieces (trivial decomposition) and Sol manifolds are LERF
    outright.  The witness is the first offending edge in id order.
    """
    violations = validate(g)
    if violations:
        raise InvalidGraph(violations)
    if g.trivial_decomposition or g.is_sol:
        return LerfVerdict(True)
    higher = {p.id: p.has_higher_genus_boundary() for p in g.pieces}
    for e in sorted(g.edges, key=lambda e: e.id):
        if not (higher[e.end_a[0]] or higher[e.end_b[0]]):
            return LerfVerdict(False, witness_edge=e.id)
    return LerfVerdict(True)


def lerf_prime_decomposition(summands) -> LerfVerdict:
    """The group of a connected sum is LERF iff every summand's group is."""
    for i, g in enumerate(summands):
        v = is_lerf(g)
        if not v.lerf:
            return LerfVerdict(False, witness_edge=v.witness_edge, failing_summand=i)
    return LerfVerdict(True)
