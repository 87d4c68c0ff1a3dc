"""The almost fibered surface as a decorated graph over a JSJ dual graph.

Vertices are the virtually fibered / partially fibered subsurface pieces,
each carrying per-boundary-circle integer data: fiber intersection numbers
on Seifert pieces, boundary covering degrees on hyperbolic ones.  Edges are
the decomposition circles, each lying over a torus of the base graph.  The
spirality character multiplies the per-piece ratios along cycles; the
subgroup is separable iff every cycle evaluates to 1.

Non-contributing pieces of the compact core (geometrically finite pieces,
circle-bundle covers, finite-index pieces, partially fibered pieces with only
plane boundary) enter as extra vertices; edge spaces whose circles do not
bound surface on both sides enter as extra edges.  Only the semi-cover
assembly looks at them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import jsj as jsjmod
from .errors import (
    HypothesesViolated,
    InvalidGraph,
    MissingData,
    NotAClosedPath,
    NotACovering,
    UnknownCircle,
)
from .lattice import ScaledSlope, intersection_number

SEIFERT_VF = "seifert_virtually_fibered"
SEIFERT_PF = "seifert_partially_fibered"
HYP_VF = "hyp_virtually_fibered"
VERTEX_KINDS = (SEIFERT_VF, SEIFERT_PF, HYP_VF)

# regimes for non-contributing vertices
GEOM_FINITE = "geom_finite"
S1_BUNDLE = "s1_bundle"
FINITE_INDEX = "finite_index"
PARTIAL_FIBER = "partial_fiber"
EXTRA_REGIMES = (GEOM_FINITE, S1_BUNDLE, FINITE_INDEX, PARTIAL_FIBER)

TORUS = "torus"
CYLINDER = "cylinder"
PLANE = "plane"


@dataclass(frozen=True)
class Circle:
    """A boundary circle of a surface piece, lying on one torus of its piece."""

    id: str
    torus: str
    intersection: int | None = None  # <c,h> with the regular fiber (Seifert kinds)
    cusp_degree: int | None = None  # boundary covering degree (hyperbolic kind)


@dataclass(frozen=True)
class PhiVertex:
    id: str
    piece: str
    kind: str
    circles: tuple[Circle, ...] = ()

    def circle(self, cid: str) -> Circle:
        for c in self.circles:
            if c.id == cid:
                return c
        raise UnknownCircle(f"vertex {self.id} has no circle {cid}")

    def circle_on_torus(self, torus: str) -> Circle | None:
        for c in self.circles:
            if c.torus == torus:
                return c
        return None


@dataclass(frozen=True)
class PhiEdge:
    """Decomposition circle of the surface, over a cylinder edge space."""

    id: str
    end_a: tuple[str, str]  # (vertex id, circle id)
    end_b: tuple[str, str]
    jsj_edge: str
    core: ScaledSlope | None = None  # image of the circle, in the jsj end_a basis


@dataclass(frozen=True)
class ExtraVertex:
    id: str
    piece: str
    regime: str


@dataclass(frozen=True)
class ExtraEdge:
    """Edge space of the compact core that is not a decomposition circle."""

    id: str
    end_a: str  # vertex id (phi or extra)
    end_b: str
    jsj_edge: str
    space: str  # torus | cylinder | plane
    core: ScaledSlope | None = None  # cylinder edge spaces, jsj end_a basis
    torus_lattice: tuple[int, int, int, int] | None = None  # torus edge spaces
    interior: bool | None = None  # plane edge spaces: interiority constraint


@dataclass(frozen=True)
class PhiGraph:
    vertices: tuple[PhiVertex, ...]
    edges: tuple[PhiEdge, ...]
    base: jsjmod.JsjGraph
    extra_vertices: tuple[ExtraVertex, ...] = ()
    extra_edges: tuple[ExtraEdge, ...] = ()
    infinite_index: bool = True

    def vertex(self, vid: str) -> PhiVertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def edge(self, eid: str) -> PhiEdge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)


@dataclass(frozen=True)
class Step:
    """One oriented edge of a cycle; forward runs end_a -> end_b."""

    edge: str
    forward: bool = True

    def __str__(self):
        return self.edge + ("+" if self.forward else "-")


def step_tail(phi: PhiGraph, s: Step) -> tuple[str, str]:
    e = phi.edge(s.edge)
    return e.end_a if s.forward else e.end_b


def step_head(phi: PhiGraph, s: Step) -> tuple[str, str]:
    e = phi.edge(s.edge)
    return e.end_b if s.forward else e.end_a


def validate(phi: PhiGraph) -> list[str]:
    """Invariant violations of the decorated graph over its base."""
    out = list(jsjmod.validate(phi.base))
    if out:
        out = [f"base: {v}" for v in out]
    pieces = {p.id: p for p in phi.base.pieces}
    vertex_ids = {}

    for v in phi.vertices:
        if v.id in vertex_ids:
            out.append(f"duplicate vertex id {v.id}")
        vertex_ids[v.id] = v
        p = pieces.get(v.piece)
        if p is None:
            out.append(f"vertex {v.id}: unknown piece {v.piece}")
            continue
        if v.kind not in VERTEX_KINDS:
            out.append(f"vertex {v.id}: unknown kind {v.kind!r}")
            continue
        if v.kind in (SEIFERT_VF, SEIFERT_PF) and p.kind != jsjmod.SEIFERT:
            out.append(f"vertex {v.id}: Seifert kind over non-Seifert piece {p.id}")
        if v.kind == HYP_VF and p.kind != jsjmod.HYP_FINITE_VOLUME:
            out.append(f"vertex {v.id}: hyperbolic fibered kind over piece {p.id}")
        tori = set()
        bids = {b.id for b in p.boundary if b.genus == 1}
        for c in v.circles:
            if c.torus in tori:
                out.append(f"vertex {v.id}: two circles on torus {c.torus}")
            tori.add(c.torus)
            if c.torus not in bids:
                out.append(f"vertex {v.id}: circle {c.id} on unknown torus {c.torus}")
            if v.kind in (SEIFERT_VF, SEIFERT_PF):
                if not c.intersection or c.intersection < 1:
                    out.append(f"vertex {v.id}: circle {c.id} needs a positive intersection number")
            else:
                if not c.cusp_degree or c.cusp_degree < 1:
                    out.append(f"vertex {v.id}: circle {c.id} needs a positive covering degree")
                if c.intersection is not None:
                    out.append(f"vertex {v.id}: intersection data on a hyperbolic circle")
        if v.kind in (SEIFERT_VF, HYP_VF) and tori != bids:
            missing = sorted(bids - tori)
            out.append(f"vertex {v.id}: fibered vertex missing circles on tori {missing}")
        if v.kind == SEIFERT_PF and not v.circles:
            out.append(f"vertex {v.id}: contributing partially fibered vertex with no circles")

    for w in phi.extra_vertices:
        if w.id in vertex_ids:
            out.append(f"duplicate vertex id {w.id}")
        vertex_ids[w.id] = w
        p = pieces.get(w.piece)
        if p is None:
            out.append(f"extra vertex {w.id}: unknown piece {w.piece}")
            continue
        if w.regime not in EXTRA_REGIMES:
            out.append(f"extra vertex {w.id}: unknown regime {w.regime!r}")
            continue
        if w.regime in (S1_BUNDLE, PARTIAL_FIBER) and p.kind != jsjmod.SEIFERT:
            out.append(f"extra vertex {w.id}: regime {w.regime} over non-Seifert piece")
        if w.regime == GEOM_FINITE and p.kind == jsjmod.SEIFERT:
            out.append(f"extra vertex {w.id}: geometrically finite regime over Seifert piece")

    used_circles = set()
    edge_ids = set()
    for e in phi.edges:
        if e.id in edge_ids:
            out.append(f"duplicate edge id {e.id}")
        edge_ids.add(e.id)
        try:
            je = phi.base.edge(e.jsj_edge)
        except KeyError:
            out.append(f"edge {e.id}: unknown jsj edge {e.jsj_edge}")
            continue
        sides = []
        ok = True
        for vid, cid in (e.end_a, e.end_b):
            v = vertex_ids.get(vid)
            if not isinstance(v, PhiVertex):
                out.append(f"edge {e.id}: endpoint {vid} is not a surface vertex")
                ok = False
                continue
            try:
                c = v.circle(cid)
            except UnknownCircle:
                out.append(f"edge {e.id}: vertex {vid} has no circle {cid}")
                ok = False
                continue
            if (vid, cid) in used_circles:
                out.append(f"edge {e.id}: circle {cid} of {vid} used by two edge ends")
            used_circles.add((vid, cid))
            sides.append((v, c))
        if not ok or len(sides) != 2:
            continue
        ends = {(v.piece, c.torus) for v, c in sides}
        if ends != {je.end_a, je.end_b}:
            out.append(f"edge {e.id}: circles do not sit on the two sides of {je.id}")
        if e.core is not None:
            out.extend(_core_violations(phi, e.id, je, sides, e.core))

    for x in phi.extra_edges:
        if x.id in edge_ids:
            out.append(f"duplicate edge id {x.id}")
        edge_ids.add(x.id)
        try:
            je = phi.base.edge(x.jsj_edge)
        except KeyError:
            out.append(f"extra edge {x.id}: unknown jsj edge {x.jsj_edge}")
            continue
        if x.space not in (TORUS, CYLINDER, PLANE):
            out.append(f"extra edge {x.id}: unknown space {x.space!r}")
            continue
        sides = []
        bad = False
        for vid in (x.end_a, x.end_b):
            v = vertex_ids.get(vid)
            if v is None:
                out.append(f"extra edge {x.id}: unknown vertex {vid}")
                bad = True
            sides.append(v)
        if bad:
            continue
        # extra edges are oriented like their jsj edge: end_a over je.end_a
        if sides[0].piece != je.end_a[0] or sides[1].piece != je.end_b[0]:
            out.append(f"extra edge {x.id}: endpoint pieces do not match jsj edge {je.id}")
            continue
        for v, (pid, torus) in zip(sides, (je.end_a, je.end_b)):
            r = _regime(v)
            if x.space == TORUS and r in (HYP_VF, SEIFERT_VF, SEIFERT_PF, PARTIAL_FIBER):
                out.append(f"extra edge {x.id}: torus edge space at fibered vertex {v.id}")
            if x.space == CYLINDER and r in (FINITE_INDEX, PARTIAL_FIBER):
                out.append(f"extra edge {x.id}: cylinder edge space at {r} vertex {v.id}")
            if x.space == PLANE and r not in (GEOM_FINITE, SEIFERT_PF, PARTIAL_FIBER):
                out.append(f"extra edge {x.id}: plane edge space at {r} vertex {v.id}")
            if (
                x.space == CYLINDER
                and isinstance(v, PhiVertex)
                and v.circle_on_torus(torus) is None
            ):
                out.append(
                    f"extra edge {x.id}: surface vertex {v.id} has no circle on torus {torus}"
                )
        if x.space == CYLINDER:
            regs = {_regime(v) for v in sides}
            if regs <= {HYP_VF, SEIFERT_VF, SEIFERT_PF}:
                out.append(
                    f"extra edge {x.id}: cylinder between two fibered pieces must be a surface edge"
                )
            if x.core is not None:
                csides = [
                    (v, v.circle_on_torus(t) if isinstance(v, PhiVertex) else None)
                    for v, (pid, t) in zip(sides, (je.end_a, je.end_b))
                ]
                out.extend(_core_violations(phi, x.id, je, [s for s in csides if s[1]], x.core))
        if x.space == TORUS and x.torus_lattice is None:
            out.append(f"extra edge {x.id}: torus edge space needs its covering lattice")
        if x.space != TORUS and x.torus_lattice is not None:
            out.append(f"extra edge {x.id}: covering lattice on a non-torus edge space")
        if x.space != PLANE and x.interior is not None:
            out.append(f"extra edge {x.id}: interiority flag on a non-plane edge space")
    return out


def _regime(v) -> str:
    if isinstance(v, PhiVertex):
        return v.kind
    return v.regime


def _core_violations(phi, eid, je, sides, core) -> list[str]:
    """Cross-check a cylinder core against fiber data on its Seifert sides."""
    out = []
    for v, c in sides:
        if not isinstance(v, PhiVertex) or c is None:
            continue
        piece = phi.base.piece(v.piece)
        if piece.kind != jsjmod.SEIFERT:
            continue
        torus = c.torus
        side_core = core if (v.piece, torus) == je.end_a else je.gluing.apply_scaled(core)
        h = piece.fiber_slopes.get(torus)
        if h is None:
            continue
        want = side_core.k * intersection_number(side_core.s, h)
        if want == 0:
            out.append(f"edge {eid}: core parallel to the fiber on torus {torus}")
        elif c.intersection is not None and c.intersection != want:
            out.append(
                f"edge {eid}: circle {c.id} of {v.id} has intersection {c.intersection}, "
                f"core and fiber give {want}"
            )
    return out


def s_delta(v: PhiVertex, c_ini: str, c_ter: str) -> Fraction:
    """Ratio attached to a proper path entering at c_ini and leaving at c_ter.

    Fiber intersection quotient on Seifert pieces, boundary covering degree
    quotient on hyperbolic ones; depends only on the two boundary circles.
    """
    ci, ct = v.circle(c_ini), v.circle(c_ter)
    if v.kind in (SEIFERT_VF, SEIFERT_PF):
        return Fraction(ci.intersection, ct.intersection)
    return Fraction(ci.cusp_degree, ct.cusp_degree)


def spirality_on_cycle(phi: PhiGraph, cycle) -> Fraction:
    """Product of the per-vertex ratios along a closed edge path."""
    steps = list(cycle)
    if not steps:
        return Fraction(1)
    value = Fraction(1)
    n = len(steps)
    for i, s in enumerate(steps):
        nxt = steps[(i + 1) % n]
        v_in, c_in = step_head(phi, s)
        v_out, c_out = step_tail(phi, nxt)
        if v_in != v_out:
            raise NotAClosedPath(f"step {s} ends at {v_in}, next starts at {v_out}")
        value *= s_delta(phi.vertex(v_in), c_in, c_out)
    return value


def cycle_basis(phi: PhiGraph) -> list[list[Step]]:
    """Fundamental cycles of a deterministic spanning forest, per component."""
    forest = spanning_forest(phi)
    return [fundamental_cycle(phi, forest, chord) for chord in forest.chords]


@dataclass(frozen=True)
class Forest:
    parent: dict  # vertex -> (parent vertex, Step into this vertex) | None for roots
    order: tuple[str, ...]
    tree_edges: tuple[str, ...]
    chords: tuple[str, ...]


def spanning_forest(phi: PhiGraph) -> Forest:
    """BFS forest over the surface graph; ids sorted for determinism."""
    adj = {v.id: [] for v in phi.vertices}
    for e in sorted(phi.edges, key=lambda e: e.id):
        adj[e.end_a[0]].append((e.end_b[0], e.id, True))
        adj[e.end_b[0]].append((e.end_a[0], e.id, False))
    parent = {}
    order = []
    tree_edges = []
    for root in sorted(adj):
        if root in parent:
            continue
        parent[root] = None
        queue = [root]
        while queue:
            cur = queue.pop(0)
            order.append(cur)
            for nb, eid, forward in sorted(adj[cur]):
                if nb not in parent:
                    parent[nb] = (cur, Step(eid, forward))
                    tree_edges.append(eid)
                    queue.append(nb)
    chords = tuple(e.id for e in sorted(phi.edges, key=lambda e: e.id) if e.id not in set(tree_edges))
    return Forest(parent, tuple(order), tuple(tree_edges), chords)


def _path_to_root(phi: PhiGraph, forest: Forest, vid: str) -> list[Step]:
    steps = []
    while forest.parent[vid] is not None:
        par, step = forest.parent[vid]
        steps.append(step)  # oriented parent -> vid
        vid = par
    return steps


def fundamental_cycle(phi: PhiGraph, forest: Forest, chord: str) -> list[Step]:
    """Chord followed by the tree path from its head back to its tail."""
    e = phi.edge(chord)
    up_from_head = _path_to_root(phi, forest, e.end_a[0] if False else e.end_b[0])
    up_from_tail = _path_to_root(phi, forest, e.end_a[0])
    # strip the common part above the meeting point of the two root paths
    while up_from_head and up_from_tail and up_from_head[-1] == up_from_tail[-1]:
        up_from_head.pop()
        up_from_tail.pop()
    back = [Step(s.edge, not s.forward) for s in up_from_head]  # head -> meeting point
    down = list(reversed(up_from_tail))  # meeting point -> tail
    return [Step(chord, True)] + back + down


@dataclass(frozen=True)
class AspiralityVerdict:
    aspiral: bool
    witness_cycle: tuple[Step, ...] | None = None
    value: Fraction | None = None

    def __str__(self):
        if self.aspiral:
            return "Aspiral"
        cyc = ",".join(s.edge for s in self.witness_cycle)
        return f"Spiral cycle=[{cyc}] value={self.value}"


def is_aspiral(phi: PhiGraph) -> AspiralityVerdict:
    """Trivial spirality character: every basis cycle evaluates to 1."""
    for cyc in cycle_basis(phi):
        val = spirality_on_cycle(phi, cyc)
        if val != 1:
            return AspiralityVerdict(False, tuple(cyc), val)
    return AspiralityVerdict(True)


def check_mixed_definition(v: PhiVertex) -> bool:
    """Seifert fibered vertices may carry covering degrees too; the two ratio
    recipes agree exactly when the degrees are proportional to the
    intersection numbers."""
    if v.kind != SEIFERT_VF:
        raise MissingData(f"vertex {v.id} is not Seifert virtually fibered")
    circles = list(v.circles)
    if any(c.cusp_degree is None for c in circles):
        raise MissingData(f"vertex {v.id} lacks covering degrees on some circles")
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            ci, cj = circles[i], circles[j]
            if ci.intersection * cj.cusp_degree != cj.intersection * ci.cusp_degree:
                return False
    return True


@dataclass(frozen=True)
class GraphCover:
    """Finite covering of the surface graph with boundary degree decorations.

    sheets: fiber cardinality; edge_perms: for each edge id, a permutation of
    range(sheets) sending the end_a sheet to its end_b sheet; circle_degrees:
    (vertex id, sheet, circle id) -> positive covering degree, default 1.
    """

    sheets: int
    edge_perms: dict
    circle_degrees: dict = field(default_factory=dict)

    def degree(self, vid: str, sheet: int, cid: str) -> int:
        return self.circle_degrees.get((vid, sheet, cid), 1)


def lifted_id(vid: str, sheet: int) -> str:
    return f"{vid}@{sheet}"


def lift_phi(phi: PhiGraph, cover: GraphCover) -> PhiGraph:
    """Pull the decorated graph back along a covering; circle data scales by
    the boundary degrees."""
    d = cover.sheets
    if d < 1:
        raise NotACovering("cover needs at least one sheet")
    for e in phi.edges:
        perm = cover.edge_perms.get(e.id)
        if perm is None or sorted(perm) != list(range(d)):
            raise NotACovering(f"edge {e.id}: missing or invalid sheet permutation")
        for i in range(d):
            da = cover.degree(e.end_a[0], i, e.end_a[1])
            db = cover.degree(e.end_b[0], perm[i], e.end_b[1])
            if da != db:
                raise NotACovering(
                    f"edge {e.id} sheet {i}: boundary degrees {da} and {db} disagree"
                )
    for (vid, sheet, cid), deg in cover.circle_degrees.items():
        if deg < 1:
            raise NotACovering(f"degree of ({vid},{sheet},{cid}) must be positive")
        if not (0 <= sheet < d):
            raise NotACovering(f"sheet {sheet} out of range")

    vertices = []
    for v in phi.vertices:
        for i in range(d):
            circles = tuple(
                Circle(
                    c.id,
                    c.torus,
                    None if c.intersection is None else c.intersection * cover.degree(v.id, i, c.id),
                    None if c.cusp_degree is None else c.cusp_degree * cover.degree(v.id, i, c.id),
                )
                for c in v.circles
            )
            vertices.append(PhiVertex(lifted_id(v.id, i), v.piece, v.kind, circles))
    edges = []
    for e in phi.edges:
        perm = cover.edge_perms[e.id]
        for i in range(d):
            edges.append(
                PhiEdge(
                    lifted_id(e.id, i),
                    (lifted_id(e.end_a[0], i), e.end_a[1]),
                    (lifted_id(e.end_b[0], perm[i]), e.end_b[1]),
                    e.jsj_edge,
                    core=None,
                )
            )
    return PhiGraph(tuple(vertices), tuple(edges), phi.base, infinite_index=phi.infinite_index)


@dataclass(frozen=True)
class SeparabilityVerdict:
    separable: bool
    witness_cycle: tuple[Step, ...] | None = None
    value: Fraction | None = None

    def __str__(self):
        if self.separable:
            return "Separable"
        cyc = ",".join(s.edge for s in self.witness_cycle)
        return f"NotSeparable cycle=[{cyc}] value={self.value}"


def separability_verdict(jsj_graph: jsjmod.JsjGraph, phi: PhiGraph) -> SeparabilityVerdict:
    """Separable iff the spirality character is trivial.

    Applies only to infinite-index subgroups of manifolds with nontrivial
    torus decomposition that are not Sol; otherwise HypothesesViolated.
    """
    violations = validate(phi)
    if violations:
        raise InvalidGraph(violations)
    if jsj_graph.trivial_decomposition:
        raise HypothesesViolated("trivial torus decomposition: the ambient group is LERF")
    if jsj_graph.is_sol:
        raise HypothesesViolated("Sol manifold: the ambient group is LERF")
    if not phi.infinite_index:
        raise HypothesesViolated("finite-index subgroups are separable outright")
    v = is_aspiral(phi)
    if v.aspiral:
        return SeparabilityVerdict(True)
    return SeparabilityVerdict(False, v.witness_cycle, v.value)
