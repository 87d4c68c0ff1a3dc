"""Combinatorial assembly of a finite semi-cover certificate.

Given the decorated graphs, choose boundary slopes per the case tables, form
the global constant as the product of all per-piece constants, then walk a
spanning tree assigning a finite-index sublattice of Z^2 to every edge space,
with exponents scheduled so each remaining boundary keeps enough divisibility
for the next gluing.  Chords are reconciled case by case; the one case that
cannot be fixed by re-parametrizing is a cylinder between two fibered pieces,
where triviality of the spirality character on the certifying cycle is
exactly what makes the two induced covers agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from . import jsj as jsjmod
from . import phi as phimod
from .errors import (
    DisconnectedGraph,
    EdgeConditionUnsatisfiable,
    IncompatiblePair,
    InvalidGraph,
    MissingCore,
    MissingDegeneracySlope,
    ParallelSlopes,
)
from .lattice import (
    Gluing,
    Lattice,
    ScaledSlope,
    Slope,
    apply_gluing,
    compat_constants,
    completion_slope,
    contains,
    cross,
    hnf,
    index,
    intersection_number,
    is_primitive_in,
    slope,
    span_vectors,
    vector_order,
)

# "fibered" per the case analysis: virtually or partially fibered pieces,
# including non-contributing partial pieces (plane boundary only)
FIBERED = (phimod.HYP_VF, phimod.SEIFERT_VF, phimod.SEIFERT_PF, phimod.PARTIAL_FIBER)
INDEPENDENT = (phimod.GEOM_FINITE, phimod.S1_BUNDLE)


# ---------------------------------------------------------------------------
# the cover graph: vertices and edge spaces actually walked by the assembly


@dataclass(frozen=True)
class EdgeView:
    """One edge space with everything the walk needs, both sides resolved."""

    id: str
    space: str
    jsj_edge: jsjmod.Edge
    vertex_a: str
    vertex_b: str
    regime_a: str
    regime_b: str
    circle_a: phimod.Circle | None
    circle_b: phimod.Circle | None
    core_a: ScaledSlope | None  # in end_a's torus basis
    core_b: ScaledSlope | None
    torus_lattice: Lattice | None
    interior: bool | None
    is_phi: bool

    def side(self, which: str):
        return (self.vertex_a, self.regime_a) if which == "a" else (self.vertex_b, self.regime_b)

    def other(self, which: str) -> str:
        return "b" if which == "a" else "a"


@dataclass(frozen=True)
class CoverGraph:
    vertices: dict  # id -> PhiVertex | ExtraVertex
    regimes: dict  # id -> kind/regime string
    edges: dict  # id -> EdgeView
    incident: dict  # vertex id -> list of (edge id, side)


def build_cover_graph(jsj_graph: jsjmod.JsjGraph, phi: phimod.PhiGraph) -> CoverGraph:
    violations = phimod.validate(phi)
    if violations:
        raise InvalidGraph(violations)
    vertices = {}
    regimes = {}
    for v in phi.vertices:
        vertices[v.id] = v
        regimes[v.id] = v.kind
    for w in phi.extra_vertices:
        vertices[w.id] = w
        regimes[w.id] = w.regime

    edges = {}
    incident = {vid: [] for vid in vertices}

    def resolve_phi_edge(e: phimod.PhiEdge) -> EdgeView:
        je = jsj_graph.edge(e.jsj_edge)
        va = phi.vertex(e.end_a[0])
        vb = phi.vertex(e.end_b[0])
        ca = va.circle(e.end_a[1])
        cb = vb.circle(e.end_b[1])
        # orient the view like the jsj edge
        if (va.piece, ca.torus) == je.end_a:
            ends = ((va, ca), (vb, cb))
        else:
            ends = ((vb, cb), (va, ca))
        (xa, circ_a), (xb, circ_b) = ends
        core_a = e.core
        core_b = je.gluing.apply_scaled(core_a) if core_a is not None else None
        return EdgeView(
            e.id,
            phimod.CYLINDER,
            je,
            xa.id,
            xb.id,
            regimes[xa.id],
            regimes[xb.id],
            circ_a,
            circ_b,
            core_a,
            core_b,
            None,
            None,
            True,
        )

    def resolve_extra_edge(x: phimod.ExtraEdge) -> EdgeView:
        je = jsj_graph.edge(x.jsj_edge)
        va, vb = vertices[x.end_a], vertices[x.end_b]
        circ_a = va.circle_on_torus(je.end_a[1]) if isinstance(va, phimod.PhiVertex) else None
        circ_b = vb.circle_on_torus(je.end_b[1]) if isinstance(vb, phimod.PhiVertex) else None
        core_a = x.core
        core_b = je.gluing.apply_scaled(core_a) if core_a is not None else None
        lat = Lattice(*_from_rowmajor(x.torus_lattice)) if x.torus_lattice else None
        return EdgeView(
            x.id,
            x.space,
            je,
            va.id,
            vb.id,
            regimes[va.id],
            regimes[vb.id],
            circ_a if x.space == phimod.CYLINDER else None,
            circ_b if x.space == phimod.CYLINDER else None,
            core_a,
            core_b,
            lat,
            x.interior,
            False,
        )

    for e in phi.edges:
        edges[e.id] = resolve_phi_edge(e)
    for x in phi.extra_edges:
        edges[x.id] = resolve_extra_edge(x)
    for ev in edges.values():
        incident[ev.vertex_a].append((ev.id, "a"))
        incident[ev.vertex_b].append((ev.id, "b"))
    for vid in incident:
        incident[vid].sort()
    return CoverGraph(vertices, regimes, edges, incident)


def _from_rowmajor(m) -> tuple[int, int, int]:
    a, b, c, d = m
    if c != 0:
        raise ValueError("torus lattice matrix must be in Hermite form")
    lat = Lattice(a, b, d)
    return (lat.a, lat.b, lat.d)


# ---------------------------------------------------------------------------
# slope choices (the two case tables)


@dataclass(frozen=True)
class SlopeChoice:
    """Chosen boundary slopes per edge space, each in its own side's basis."""

    cylinder_t: dict  # edge id -> {"a": Slope, "b": Slope}
    plane_uv: dict  # edge id -> {"a": (u, v), "b": (u, v)}


def _fiber(jsj_graph, piece_id, torus) -> Slope:
    return jsj_graph.piece(piece_id).fiber_slopes[torus]


def _degeneracy(jsj_graph, piece_id, torus, edge_id) -> Slope:
    s = jsj_graph.piece(piece_id).degeneracy_slopes.get(torus)
    if s is None:
        raise MissingDegeneracySlope(
            f"edge {edge_id}: piece {piece_id} has no degeneracy slope on torus {torus}"
        )
    return s


def _own_slope(jsj_graph, cg, ev, which) -> Slope | None:
    """The slope a fibered side always uses: its fiber, or its degeneracy slope."""
    vid, regime = ev.side(which)
    piece = cg.vertices[vid].piece
    torus = (ev.jsj_edge.end_a if which == "a" else ev.jsj_edge.end_b)[1]
    if regime in (phimod.SEIFERT_VF, phimod.SEIFERT_PF, phimod.PARTIAL_FIBER):
        return _fiber(jsj_graph, piece, torus)
    if regime == phimod.HYP_VF:
        return _degeneracy(jsj_graph, piece, torus, ev.id)
    return None


def _transfer(ev: EdgeView, s: Slope, src: str) -> Slope:
    g = ev.jsj_edge.gluing
    return g.apply_slope(s) if src == "a" else g.inverse().apply_slope(s)


def choose_slopes(jsj_graph: jsjmod.JsjGraph, phi: phimod.PhiGraph) -> SlopeChoice:
    """Resolve the cylinder and plane slope tables on every edge space.

    Fibered sides use their own fiber or degeneracy slope.  Independent sides
    copy the other side's distinguished slope, or fall back to a deterministic
    completion of the core when the table allows any slope.  Two adjacent
    circle-bundle regimes on a cylinder are rejected.
    """
    cg = build_cover_graph(jsj_graph, phi)
    cyl = {}
    planes = {}
    for eid in sorted(cg.edges):
        ev = cg.edges[eid]
        if ev.space == phimod.CYLINDER:
            cyl[eid] = _choose_cylinder(jsj_graph, cg, ev)
        elif ev.space == phimod.PLANE:
            planes[eid] = _choose_plane(jsj_graph, cg, ev)
    return SlopeChoice(cyl, planes)


def _choose_cylinder(jsj_graph, cg, ev: EdgeView) -> dict:
    if ev.core_a is None:
        raise MissingCore(f"cylinder edge {ev.id} has no core slope")
    ra, rb = ev.regime_a, ev.regime_b
    if ra == phimod.S1_BUNDLE and rb == phimod.S1_BUNDLE:
        raise IncompatiblePair(f"edge {ev.id}: two adjacent circle-bundle regimes")
    for which, regime, core in (("a", ra, ev.core_a), ("b", rb, ev.core_b)):
        if regime == phimod.S1_BUNDLE:
            vid = ev.vertex_a if which == "a" else ev.vertex_b
            piece = cg.vertices[vid].piece
            torus = (ev.jsj_edge.end_a if which == "a" else ev.jsj_edge.end_b)[1]
            if core.s != _fiber(jsj_graph, piece, torus):
                raise InvalidGraph(
                    [f"edge {ev.id}: circle-bundle core is not a power of the fiber"]
                )
    out = {}
    own_a = _own_slope(jsj_graph, cg, ev, "a") if ra in FIBERED else None
    own_b = _own_slope(jsj_graph, cg, ev, "b") if rb in FIBERED else None
    if ra in FIBERED:
        out["a"] = own_a
    if rb in FIBERED:
        out["b"] = own_b
    if ra not in FIBERED and rb in FIBERED:
        out["a"] = _transfer(ev, own_b, "b")
    if rb not in FIBERED and ra in FIBERED:
        out["b"] = _transfer(ev, own_a, "a")
    if ra not in FIBERED and rb not in FIBERED:
        # any slope not parallel to the core; one deterministic choice, shared
        t_a = completion_slope(ev.core_a.s)
        out["a"] = t_a
        out["b"] = _transfer(ev, t_a, "a")
    for which, core in (("a", ev.core_a), ("b", ev.core_b)):
        if out[which] == core.s:
            raise ParallelSlopes(f"edge {ev.id}: chosen slope parallel to the core")
    return out


def _choose_plane(jsj_graph, cg, ev: EdgeView) -> dict:
    ra, rb = ev.regime_a, ev.regime_b
    pf = (phimod.SEIFERT_PF, phimod.PARTIAL_FIBER)
    # compute the pair on side a, then cross over: u' = v, v' = u
    if ra in pf and rb in pf:
        u_a = _transfer(ev, _own_slope(jsj_graph, cg, ev, "b"), "b")
        v_a = _own_slope(jsj_graph, cg, ev, "a")
    elif ra in pf:
        v_a = _own_slope(jsj_graph, cg, ev, "a")
        u_a = completion_slope(v_a)
    elif rb in pf:
        u_a = _transfer(ev, _own_slope(jsj_graph, cg, ev, "b"), "b")
        v_a = completion_slope(u_a)
    else:
        u_a, v_a = Slope(1, 0), Slope(0, 1)
    if u_a == v_a:
        raise ParallelSlopes(f"edge {ev.id}: the two plane slopes coincide")
    u_b = _transfer(ev, v_a, "a")
    v_b = _transfer(ev, u_a, "a")
    return {"a": (u_a, v_a), "b": (u_b, v_b)}


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class ConstantSheet:
    """All positive integers feeding the global constant.

    vertex_constants: supplied per-vertex constants (default 1).
    circle_units: derived per-(vertex, circle) units for hyperbolic fibered
    vertices, proportional to the declared boundary covering degrees.
    z2_pairs: per double-fibered cylinder edge, the two compatibility
    constants, oriented (end_a slope, end_b slope).
    global_c: the product of everything above.
    """

    vertex_constants: dict
    circle_units: dict
    z2_pairs: dict
    global_c: int


def global_constant(constants, z2_pairs=()) -> int:
    """Product of all listed constants and all compatibility pairs."""
    total = 1
    for c in constants:
        total *= int(c)
    for b, b2 in z2_pairs:
        total *= int(b) * int(b2)
    return total


def _unit(cg, sheet: ConstantSheet, ev: EdgeView, which: str) -> int:
    """Slope multiplier per unit of the vertex parameter on this edge side."""
    vid, regime = ev.side(which)
    a_v = sheet.vertex_constants.get(vid, 1)
    if regime == phimod.HYP_VF:
        circ = ev.circle_a if which == "a" else ev.circle_b
        return sheet.circle_units[(vid, circ.id)]
    return a_v


def build_constant_sheet(
    jsj_graph: jsjmod.JsjGraph,
    phi: phimod.PhiGraph,
    slopes: SlopeChoice,
    supplied: dict | None = None,
) -> ConstantSheet:
    cg = build_cover_graph(jsj_graph, phi)
    supplied = dict(supplied or {})
    for vid, val in supplied.items():
        if vid not in cg.vertices:
            raise InvalidGraph([f"constant for unknown vertex {vid}"])
        if int(val) < 1:
            raise InvalidGraph([f"constant for vertex {vid} must be positive"])
    vertex_constants = {
        vid: int(supplied.get(vid, 1))
        for vid in sorted(cg.vertices)
        if cg.regimes[vid] != phimod.FINITE_INDEX
    }

    # derived units for hyperbolic fibered vertices: proportional to the
    # declared cusp degrees, made integral by a common per-vertex factor
    circle_units = {}
    for vid in sorted(cg.vertices):
        if cg.regimes[vid] != phimod.HYP_VF:
            continue
        ends = []
        for eid, which in cg.incident[vid]:
            ev = cg.edges[eid]
            circ = ev.circle_a if which == "a" else ev.circle_b
            core = ev.core_a if which == "a" else ev.core_b
            if core is None:
                raise MissingCore(f"cylinder edge {eid} has no core slope")
            t = slopes.cylinder_t[eid][which]
            span = intersection_number(core, t)
            ends.append((circ.id, circ.cusp_degree, span))
        k_v = 1  # minimal common integralizer: lcm of span / gcd(degree, span)
        for _, deg, span in ends:
            k_v = lcm(k_v, span // gcd(deg, span))
        a_v = vertex_constants[vid]
        for cid, deg, span in ends:
            circle_units[(vid, cid)] = a_v * k_v * deg // span

    z2_pairs = {}
    for eid in sorted(cg.edges):
        ev = cg.edges[eid]
        if ev.space != phimod.CYLINDER or not (
            ev.regime_a in FIBERED and ev.regime_b in FIBERED
        ):
            continue
        if ev.core_a is None:
            raise MissingCore(f"cylinder edge {eid} has no core slope")
        t_a = slopes.cylinder_t[eid]["a"]
        t_b_in_a = ev.jsj_edge.gluing.inverse().apply_slope(slopes.cylinder_t[eid]["b"])
        if t_a == t_b_in_a:
            z2_pairs[eid] = (1, 1)  # same slope both sides: trivially compatible
        else:
            z2_pairs[eid] = compat_constants(ev.core_a, t_a, t_b_in_a)

    factors = list(vertex_constants.values()) + [u for _, u in sorted(circle_units.items())]
    big = global_constant(factors, [z2_pairs[k] for k in sorted(z2_pairs)])
    return ConstantSheet(vertex_constants, circle_units, z2_pairs, big)


# ---------------------------------------------------------------------------
# spanning tree with edge conditions


@dataclass(frozen=True)
class SpanningTree:
    root: str | None
    order: tuple[str, ...]  # placement order of the vertices
    parent_edge: dict  # vertex -> (edge id, side of arrival) for non-roots
    tree_edges: tuple[str, ...]
    chords: tuple[str, ...]
    certifying_cycles: dict  # chord id -> cycle (list of phi Steps), condition (3) only


def spanning_tree_with_edge_conditions(
    jsj_graph: jsjmod.JsjGraph, phi: phimod.PhiGraph
) -> SpanningTree:
    """Spanning tree extending a maximal forest of the surface graph.

    Every chord then satisfies one of the edge conditions: a non-fibered
    endpoint, a plane edge space, or a cylinder chord certified by a simple
    cycle inside the surface graph (its fundamental cycle in the forest).
    Plane edges flagged interior are forced into the tree, flagged
    non-interior forced out; an impossible set of constraints is an error.
    """
    cg = build_cover_graph(jsj_graph, phi)
    if not cg.vertices:
        return SpanningTree(None, (), {}, (), (), {})

    forest = phimod.spanning_forest(phi)
    tree_edge_ids = list(forest.tree_edges)
    comp = {vid: vid for vid in cg.vertices}

    def find(x):
        while comp[x] != x:
            comp[x] = comp[comp[x]]
            x = comp[x]
        return x

    def union(x, y) -> bool:
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        comp[rx] = ry
        return True

    for eid in tree_edge_ids:
        ev = cg.edges[eid]
        union(ev.vertex_a, ev.vertex_b)

    forced_in = [
        eid
        for eid in sorted(cg.edges)
        if cg.edges[eid].space == phimod.PLANE and cg.edges[eid].interior is True
    ]
    forced_out = {
        eid
        for eid in sorted(cg.edges)
        if cg.edges[eid].space == phimod.PLANE and cg.edges[eid].interior is False
    }
    for eid in forced_in:
        ev = cg.edges[eid]
        if not union(ev.vertex_a, ev.vertex_b):
            raise EdgeConditionUnsatisfiable(
                f"plane edge {eid} is flagged interior but closes a cycle in the tree"
            )
        tree_edge_ids.append(eid)
    for eid in sorted(cg.edges):
        if eid in set(tree_edge_ids) or eid in forced_out:
            continue
        ev = cg.edges[eid]
        if ev.is_phi:
            continue  # surface edges beyond the forest are chords by construction
        if union(ev.vertex_a, ev.vertex_b):
            tree_edge_ids.append(eid)

    roots = {find(vid) for vid in cg.vertices}
    if len(roots) > 1:
        if any(
            find(cg.edges[eid].vertex_a) != find(cg.edges[eid].vertex_b) for eid in forced_out
        ):
            raise EdgeConditionUnsatisfiable(
                "non-interior plane edges disconnect the spanning tree"
            )
        raise DisconnectedGraph("the cover graph is not connected")

    # BFS placement order from the smallest vertex id
    adj = {vid: [] for vid in cg.vertices}
    for eid in sorted(tree_edge_ids):
        ev = cg.edges[eid]
        adj[ev.vertex_a].append((ev.vertex_b, eid, "b"))
        adj[ev.vertex_b].append((ev.vertex_a, eid, "a"))
    for vid in adj:
        adj[vid].sort()
    root = min(cg.vertices)
    order = [root]
    parent_edge = {}
    seen = {root}
    queue = [root]
    while queue:
        cur = queue.pop(0)
        for nb, eid, arrival in adj[cur]:
            if nb in seen:
                continue
            seen.add(nb)
            order.append(nb)
            parent_edge[nb] = (eid, arrival)
            queue.append(nb)

    chords = tuple(eid for eid in sorted(cg.edges) if eid not in set(tree_edge_ids))
    certifying = {}
    for eid in chords:
        ev = cg.edges[eid]
        if ev.space == phimod.CYLINDER and ev.regime_a in FIBERED and ev.regime_b in FIBERED:
            certifying[eid] = phimod.fundamental_cycle(phi, forest, eid)
    return SpanningTree(root, tuple(order), parent_edge, tuple(sorted(tree_edge_ids)), chords, certifying)


# ---------------------------------------------------------------------------
# the assembly


@dataclass(frozen=True)
class SpiralObstruction:
    chord: str
    cycle: tuple[phimod.Step, ...]
    value: Fraction

    def __str__(self):
        cyc = ",".join(s.edge for s in self.cycle)
        return f"SpiralObstruction chord={self.chord} cycle=[{cyc}] value={self.value}"


@dataclass(frozen=True)
class EdgeLattices:
    lattice_a: Lattice  # in the jsj end_a torus basis
    lattice_b: Lattice


@dataclass(frozen=True)
class CoverCertificate:
    tree: SpanningTree
    sheet: ConstantSheet
    slopes: SlopeChoice
    edge_lattices: dict  # edge id -> EdgeLattices
    parameters: dict  # vertex id -> parameter record


class _Walk:
    """Mutable multiplier state during the tree walk."""

    def __init__(self, cg, slopes, sheet, tree):
        self.cg = cg
        self.slopes = slopes
        self.sheet = sheet
        self.tree = tree
        self.tree_edge_set = set(tree.tree_edges)
        self.n = len(tree.order)
        self.cyl = {}  # (edge id, side) -> slope multiplier
        self.plane = {}  # (edge id, side) -> [m_u, m_v]
        self.alpha = {}  # fibered vertex -> parameter
        self.params = {}  # recorded parameters per vertex

    def exponent(self, k: int) -> int:
        return self.sheet.global_c ** (self.n - k + 1)

    def place_root(self, vid: str):
        self._place(vid, 1, None)

    def place(self, vid: str, k: int):
        eid, arrival = self.tree.parent_edge[vid]
        self._place(vid, k, (eid, arrival))

    def _ends(self, vid):
        return self.cg.incident[vid]

    def _place(self, vid, k, attach):
        cg, sheet = self.cg, self.sheet
        regime = cg.regimes[vid]
        sched = self.exponent(k)
        a_v = sheet.vertex_constants.get(vid, 1)
        record = {}

        if regime in FIBERED:
            alpha = self._attach_alpha(vid, attach) if attach else sched
            self.alpha[vid] = alpha
            record["alpha"] = alpha
            for eid, which in self._ends(vid):
                ev = cg.edges[eid]
                if attach and (eid, which) == (attach[0], attach[1]):
                    continue
                if ev.space == phimod.CYLINDER:
                    self.cyl[(eid, which)] = alpha * _unit(cg, sheet, ev, which)
                else:  # plane at a partially fibered piece
                    m_v = alpha * a_v
                    m_u = self._plane_u_default(eid, k)
                    self.plane[(eid, which)] = [m_u, m_v]
            if attach:
                eid, which = attach
                ev = cg.edges[eid]
                if ev.space == phimod.CYLINDER:
                    self.cyl[(eid, which)] = alpha * _unit(cg, sheet, ev, which)
                else:
                    other = self.plane[(eid, ev.other(which))]
                    self.plane[(eid, which)] = [other[1], other[0]]
        elif regime in INDEPENDENT:
            ends = {}
            for eid, which in self._ends(vid):
                ev = cg.edges[eid]
                if attach and (eid, which) == (attach[0], attach[1]):
                    self._match_independent(vid, eid, which)
                elif ev.space == phimod.CYLINDER:
                    self.cyl[(eid, which)] = a_v * sched
                elif ev.space == phimod.PLANE:
                    big = sheet.global_c
                    if eid in self.tree_edge_set:
                        self.plane[(eid, which)] = [a_v * sched, a_v * sched]
                    else:
                        self.plane[(eid, which)] = [big, big]
                # torus edges carry the declared lattice; nothing to assign
                if (eid, which) in self.cyl:
                    ends[f"{eid}:{which}"] = self.cyl[(eid, which)]
                elif (eid, which) in self.plane:
                    ends[f"{eid}:{which}"] = list(self.plane[(eid, which)])
            record["ends"] = ends
        else:  # finite index: torus boundaries only
            pass
        self.params[vid] = record

    def _plane_u_default(self, eid, k) -> int:
        # boundary condition for planes: full schedule inside the tree,
        # one bare global constant on a chord copy
        if eid in self.tree_edge_set:
            return self.exponent(k)
        return self.sheet.global_c

    def _attach_alpha(self, vid, attach) -> int:
        """Parameter forced on a fibered vertex by its tree gluing."""
        eid, which = attach
        cg, sheet = self.cg, self.sheet
        ev = cg.edges[eid]
        other = ev.other(which)
        if ev.space == phimod.CYLINDER:
            m_other = self.cyl[(eid, other)]
            if ev.regime_a in FIBERED and ev.regime_b in FIBERED:
                b_a, b_b = sheet.z2_pairs[eid]
                b_other, b_here = (b_a, b_b) if other == "a" else (b_b, b_a)
                assert m_other % b_other == 0
                m_here = (m_other // b_other) * b_here
            else:
                m_here = m_other  # same slope on both sides
            unit = _unit(cg, sheet, ev, which)
            assert m_here % unit == 0
            return m_here // unit
        # plane tree edge at a partially fibered piece: the fiber component
        # must match the other side's u component
        m_other = self.plane[(eid, other)]
        a_v = sheet.vertex_constants.get(vid, 1)
        assert m_other[0] % a_v == 0
        return m_other[0] // a_v

    def _match_independent(self, vid, eid, which):
        cg, sheet = self.cg, self.sheet
        ev = cg.edges[eid]
        other = ev.other(which)
        a_v = sheet.vertex_constants.get(vid, 1)
        if ev.space == phimod.CYLINDER:
            self.cyl[(eid, which)] = self.cyl[(eid, other)]
        elif ev.space == phimod.PLANE:
            m_other = self.plane[(eid, other)]
            self.plane[(eid, which)] = [m_other[1], m_other[0]]
        # torus: declared lattice, nothing to do

    # ----- lattices -----

    def cylinder_lattice(self, ev: EdgeView, which: str) -> Lattice:
        core = ev.core_a if which == "a" else ev.core_b
        if core is None:
            raise MissingCore(f"cylinder edge {ev.id} has no core slope")
        t = self.slopes.cylinder_t[ev.id][which]
        m = self.cyl[(ev.id, which)]
        return span_vectors(core.vector(), (m * t.p, m * t.q))

    def plane_lattice(self, ev: EdgeView, which: str) -> Lattice:
        u, v = self.slopes.plane_uv[ev.id][which]
        m_u, m_v = self.plane[(ev.id, which)]
        return span_vectors((m_u * u.p, m_u * u.q), (m_v * v.p, m_v * v.q))

    def edge_lattices(self, ev: EdgeView) -> EdgeLattices:
        if ev.space == phimod.TORUS:
            la = ev.torus_lattice
            return EdgeLattices(la, apply_gluing(ev.jsj_edge.gluing, la))
        if ev.space == phimod.CYLINDER:
            return EdgeLattices(
                self.cylinder_lattice(ev, "a"), self.cylinder_lattice(ev, "b")
            )
        return EdgeLattices(self.plane_lattice(ev, "a"), self.plane_lattice(ev, "b"))


def assemble(
    jsj_graph: jsjmod.JsjGraph,
    phi: phimod.PhiGraph,
    slopes: SlopeChoice | None = None,
    sheet: ConstantSheet | None = None,
    supplied_constants: dict | None = None,
):
    """Run the tree walk and chord pasting; returns a certificate or the
    spirality obstruction that blocks it."""
    if slopes is None:
        slopes = choose_slopes(jsj_graph, phi)
    if sheet is None:
        sheet = build_constant_sheet(jsj_graph, phi, slopes, supplied_constants)
    cg = build_cover_graph(jsj_graph, phi)
    tree = spanning_tree_with_edge_conditions(jsj_graph, phi)
    walk = _Walk(cg, slopes, sheet, tree)

    for k, vid in enumerate(tree.order, start=1):
        if k == 1:
            walk.place_root(vid)
        else:
            walk.place(vid, k)

    # chord pasting, in id order
    for eid in tree.chords:
        ev = cg.edges[eid]
        if ev.space == phimod.TORUS:
            continue  # both sides are the declared finite cover already
        if ev.space == phimod.PLANE:
            _paste_plane(walk, ev)
            continue
        fib_a = ev.regime_a in FIBERED
        fib_b = ev.regime_b in FIBERED
        if fib_a and fib_b:
            cycle = tree.certifying_cycles[eid]
            value = phimod.spirality_on_cycle(phi, cycle)
            if value != 1:
                return SpiralObstruction(eid, tuple(cycle), value)
            la = walk.cylinder_lattice(ev, "a")
            lb = walk.cylinder_lattice(ev, "b")
            assert apply_gluing(ev.jsj_edge.gluing, la) == lb, (
                f"edge {eid}: aspiral cycle but mismatched lattices"
            )
        else:
            # retarget the independent side to the other side's multiplier
            target = "a" if not fib_a else "b"
            source = ev.other(target)
            walk.cyl[(eid, target)] = walk.cyl[(eid, source)]
            vid = ev.vertex_a if target == "a" else ev.vertex_b
            walk.params[vid].setdefault("ends", {})[f"{eid}:{target}"] = walk.cyl[(eid, target)]

    lattices = {eid: walk.edge_lattices(cg.edges[eid]) for eid in sorted(cg.edges)}
    cert = CoverCertificate(tree, sheet, slopes, lattices, walk.params)
    ok, problems = verify_certificate(jsj_graph, phi, cert)
    assert ok, f"assembled certificate fails verification: {problems}"
    return cert


def _paste_plane(walk: _Walk, ev: EdgeView):
    big = walk.sheet.global_c
    m_a = walk.plane[(ev.id, "a")]
    m_b = walk.plane[(ev.id, "b")]
    # cross convention: u_a pairs with v_b and v_a with u_b
    nu_b = m_b[1] // big
    nu_a = m_a[1] // big
    pf = (phimod.SEIFERT_PF, phimod.PARTIAL_FIBER)
    if ev.regime_a in pf and ev.regime_b in pf:
        m_a[0] = nu_b * big
        m_b[0] = nu_a * big
    elif ev.regime_a in pf:
        m_b[0] = nu_a * big
    elif ev.regime_b in pf:
        m_a[0] = nu_b * big
    # both geometrically finite: (big, big) on both sides already matches


# ---------------------------------------------------------------------------
# independent verification


def verify_certificate(
    jsj_graph: jsjmod.JsjGraph, phi: phimod.PhiGraph, cert: CoverCertificate
):
    """Re-derive every certificate invariant from scratch.

    Returns (ok, violations).  Checks: the tree is a spanning tree whose
    chords meet the edge conditions, gluing compatibility of the two lattices
    on every edge, core containment and primitivity on cylinders, the
    scheduled divisibility shapes, the declared lattices on tori, and the
    spirality triviality of every certifying cycle.
    """
    problems = []
    try:
        cg = build_cover_graph(jsj_graph, phi)
        slopes = choose_slopes(jsj_graph, phi)
        sheet = build_constant_sheet(jsj_graph, phi, slopes, cert.sheet.vertex_constants)
    except (InvalidGraph, MissingCore, MissingDegeneracySlope, IncompatiblePair) as e:
        return False, [str(e)]
    if slopes != cert.slopes:
        problems.append("recorded slope choices differ from the tables")
    if sheet.circle_units != cert.sheet.circle_units or sheet.z2_pairs != cert.sheet.z2_pairs:
        problems.append("recorded constants differ from the recomputed sheet")
    # any common multiple of the constants is an admissible global constant
    if cert.sheet.global_c < 1 or cert.sheet.global_c % sheet.global_c:
        problems.append("global constant is not a multiple of the constant product")
    tree = cert.tree
    big = cert.sheet.global_c
    n = len(tree.order)

    if set(tree.order) != set(cg.vertices):
        problems.append("tree order does not cover the vertices")
        return False, problems
    tree_set = set(tree.tree_edges)
    chord_set = set(tree.chords)
    if tree_set | chord_set != set(cg.edges) or tree_set & chord_set:
        problems.append("tree edges and chords do not partition the edges")
        return False, problems
    if n:
        placed = {tree.order[0]}
        for vid in tree.order[1:]:
            pe = tree.parent_edge.get(vid)
            if pe is None:
                problems.append(f"vertex {vid} has no parent edge")
                return False, problems
            eid, arrival = pe
            ev = cg.edges[eid]
            here = ev.vertex_a if arrival == "a" else ev.vertex_b
            there = ev.vertex_b if arrival == "a" else ev.vertex_a
            if here != vid or there not in placed or eid not in tree_set:
                problems.append(f"vertex {vid}: invalid attachment {pe}")
                return False, problems
            placed.add(vid)
    if len(tree_set) != max(n - 1, 0):
        problems.append("wrong number of tree edges")

    position = {vid: i + 1 for i, vid in enumerate(tree.order)}

    def shape_exponent(eid: str, which: str) -> int:
        # a tree-edge side placed as the k-th vertex keeps divisibility by
        # the (n-k+1)-st power of the global constant; chord sides keep one
        if eid in chord_set:
            return 1
        ev = cg.edges[eid]
        vid = ev.vertex_a if which == "a" else ev.vertex_b
        return n - position[vid] + 1

    for eid in sorted(cg.edges):
        ev = cg.edges[eid]
        latp = cert.edge_lattices.get(eid)
        if latp is None:
            problems.append(f"edge {eid}: missing lattices")
            continue
        la, lb = latp.lattice_a, latp.lattice_b
        if apply_gluing(ev.jsj_edge.gluing, la) != lb:
            problems.append(f"edge {eid}: the two sides do not match across the gluing")
        # chord edge conditions
        if eid in chord_set:
            if ev.space == phimod.CYLINDER and ev.regime_a in FIBERED and ev.regime_b in FIBERED:
                cycle = tree.certifying_cycles.get(eid)
                if cycle is None:
                    problems.append(f"chord {eid}: missing certifying cycle")
                else:
                    if not _cycle_in_phi_through(phi, cycle, eid):
                        problems.append(f"chord {eid}: certifying cycle does not contain it")
                    val = phimod.spirality_on_cycle(phi, cycle)
                    if val != 1:
                        problems.append(f"chord {eid}: certifying cycle has value {val}")
        if ev.space == phimod.TORUS:
            if la != ev.torus_lattice:
                problems.append(f"edge {eid}: torus lattice differs from the declared cover")
            continue
        if ev.space == phimod.CYLINDER:
            for which, lat, core in (("a", la, ev.core_a), ("b", lb, ev.core_b)):
                if core is None:
                    problems.append(f"edge {eid}: cylinder without a core")
                    break
                sched = big ** shape_exponent(eid, which)
                if not contains(lat, core.vector()):
                    problems.append(f"edge {eid}.{which}: lattice does not contain the core")
                    continue
                if not is_primitive_in(lat, core.vector()):
                    problems.append(f"edge {eid}.{which}: core is not primitive in the lattice")
                t = cert.slopes.cylinder_t[eid][which]
                span = intersection_number(core, t)
                m, rem = divmod(index(lat), span)
                if rem or m < 1:
                    problems.append(f"edge {eid}.{which}: lattice index not a multiple of |c x t|")
                    continue
                if span_vectors(core.vector(), (m * t.p, m * t.q)) != lat:
                    problems.append(f"edge {eid}.{which}: lattice is not span(c, m*t)")
                    continue
                if m % sched:
                    problems.append(
                        f"edge {eid}.{which}: multiplier {m} misses the schedule {sched}"
                    )
        else:  # plane
            for which, lat in (("a", la), ("b", lb)):
                u, v = cert.slopes.plane_uv[eid][which]
                m_u = vector_order(lat, u.vector())
                m_v = vector_order(lat, v.vector())
                if span_vectors((m_u * u.p, m_u * u.q), (m_v * v.p, m_v * v.q)) != lat:
                    problems.append(f"edge {eid}.{which}: lattice is not span(m_u*u, m_v*v)")
                    continue
                want = big ** shape_exponent(eid, which) if eid in tree_set else big
                if m_u % want or m_v % want:
                    problems.append(
                        f"edge {eid}.{which}: plane multipliers miss the schedule {want}"
                    )
    return (not problems), problems


def _cycle_in_phi_through(phi: phimod.PhiGraph, cycle, eid: str) -> bool:
    steps = list(cycle)
    if not any(s.edge == eid for s in steps):
        return False
    try:
        phimod.spirality_on_cycle(phi, steps)
    except Exception:
        return False
    # simple: no vertex visited twice
    seen = set()
    for s in steps:
        vid = phimod.step_tail(phi, s)[0]
        if vid in seen:
            return False
        seen.add(vid)
    return True
