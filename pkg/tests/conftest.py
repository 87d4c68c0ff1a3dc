"""Shared generators for randomized tests.

Assembly instances are built cover-graph-first: pick vertex regimes, grow a
random spanning tree with compatible edge spaces, add a few chords, then
materialize the decomposition pieces, gluings, cores and fiber data so every
invariant holds by construction.  The cycle values of the character are
driven per surface edge by |s x h| (Seifert) or the declared covering degree
(hyperbolic); making the two sides of every edge agree yields an aspiral
instance, unbalancing one cycle edge a spiral one.
"""

from __future__ import annotations

import random
from math import gcd

import pytest

from spirality import jsj as jsjmod
from spirality import phi as phimod
from spirality.lattice import (
    Gluing,
    Lattice,
    ScaledSlope,
    Slope,
    completion_slope,
    slope,
)


def random_unimodular(rng: random.Random) -> Gluing:
    m = Gluing(1, rng.randint(-2, 2), 0, 1)
    m = _mul(m, Gluing(1, 0, rng.randint(-2, 2), 1))
    if rng.random() < 0.5:
        m = _mul(m, Gluing(0, 1, 1, 0))
    return m


def _mul(g: Gluing, h: Gluing) -> Gluing:
    return Gluing(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def random_slope(rng: random.Random, bound: int = 3) -> Slope:
    while True:
        x = rng.randint(-bound, bound)
        y = rng.randint(-bound, bound)
        if (x, y) != (0, 0):
            return slope(x, y)


def slope_with_wedge(s: Slope, d: int) -> Slope:
    """A primitive slope t with |s x t| = d (d >= 1)."""
    comp = completion_slope(s)
    for m in range(0, 8):
        x = d * comp.p + m * s.p
        y = d * comp.q + m * s.q
        if (x, y) != (0, 0) and gcd(abs(x), abs(y)) == 1:
            return slope(x, y)
    raise AssertionError("no primitive wedge-d slope found")


def random_lattice(rng: random.Random, max_entry: int = 4) -> Lattice:
    a = rng.randint(1, max_entry)
    d = rng.randint(1, max_entry)
    b = rng.randint(0, a - 1)
    return Lattice(a, b, d)


# ---------------------------------------------------------------------------
# spirality-only graphs (free circle data, fabricated base)


def _circle_data(rng, kind, bound):
    value = rng.randint(1, bound)
    if kind == phimod.HYP_VF:
        return {"cusp_degree": value}
    return {"intersection": value}


def random_phi(
    rng: random.Random,
    max_vertices: int = 8,
    max_edges: int = 10,
    connected: bool = False,
    data_bound: int = 6,
) -> phimod.PhiGraph:
    n = rng.randint(1, max_vertices)
    kinds = [
        rng.choice((phimod.SEIFERT_VF, phimod.SEIFERT_PF, phimod.HYP_VF)) for _ in range(n)
    ]
    m = rng.randint(0, max_edges)
    pairs = []
    if connected and n > 1:
        order = list(range(n))
        rng.shuffle(order)
        for i in range(1, n):
            pairs.append((order[rng.randint(0, i - 1)], order[i]))
        m = max(m - len(pairs), 0)
    for _ in range(m):
        pairs.append((rng.randrange(n), rng.randrange(n)))

    tori = {i: [] for i in range(n)}

    def fresh_torus(i):
        t = f"t{i}_{len(tori[i])}"
        tori[i].append(t)
        return t

    edge_rows = []
    edge_circles = {i: [] for i in range(n)}
    for k, (i, j) in enumerate(pairs):
        ta, tb = fresh_torus(i), fresh_torus(j)
        ca = phimod.Circle(f"c{k}a", ta, **_circle_data(rng, kinds[i], data_bound))
        cb = phimod.Circle(f"c{k}b", tb, **_circle_data(rng, kinds[j], data_bound))
        edge_circles[i].append(ca)
        edge_circles[j].append(cb)
        edge_rows.append((f"e{k:02d}", i, ca, j, cb, f"E{k:02d}", ta, tb))

    link_rows = []
    for i in range(n - 1):
        link_rows.append((i, fresh_torus(i), i + 1, fresh_torus(i + 1)))
    # partially fibered vertices must contribute at least one circle
    for i in range(n):
        if kinds[i] == phimod.SEIFERT_PF and not edge_circles[i] and not tori[i]:
            fresh_torus(i)

    vertices = []
    for i in range(n):
        circles = list(edge_circles[i])
        covered = {c.torus for c in circles}
        for t in tori[i]:
            if t in covered:
                continue
            if kinds[i] in (phimod.SEIFERT_VF, phimod.HYP_VF) or not circles:
                circles.append(
                    phimod.Circle(f"free_{i}_{t}", t, **_circle_data(rng, kinds[i], data_bound))
                )
                covered.add(t)
        vertices.append(phimod.PhiVertex(f"V{i}", f"P{i}", kinds[i], tuple(circles)))

    pieces = []
    for i in range(n):
        seifert = kinds[i] != phimod.HYP_VF
        boundary = tuple(jsjmod.BoundaryComponent(t, 1) for t in tori[i])
        fibers = {t: Slope(0, 1) for t in tori[i]} if seifert else {}
        pieces.append(
            jsjmod.Piece(
                f"P{i}",
                jsjmod.SEIFERT if seifert else jsjmod.HYP_FINITE_VOLUME,
                boundary,
                fibers,
                {},
            )
        )
    jsj_edges = [
        jsjmod.Edge(E, (f"P{i}", ta), (f"P{j}", tb), Gluing(0, 1, 1, 0))
        for (_, i, _, j, _, E, ta, tb) in edge_rows
    ]
    for k, (i, ta, j, tb) in enumerate(link_rows):
        jsj_edges.append(
            jsjmod.Edge(f"L{k:02d}", (f"P{i}", ta), (f"P{j}", tb), Gluing(0, 1, 1, 0))
        )
    trivial = len(pieces) == 1 and not jsj_edges
    base = jsjmod.JsjGraph(tuple(pieces), tuple(jsj_edges), False, trivial)
    phi_edges = tuple(
        phimod.PhiEdge(eid, (f"V{i}", ca.id), (f"V{j}", cb.id), E)
        for (eid, i, ca, j, cb, E, ta, tb) in edge_rows
    )
    graph = phimod.PhiGraph(tuple(vertices), phi_edges, base)
    violations = phimod.validate(graph)
    assert not violations, violations
    return graph


# ---------------------------------------------------------------------------
# assembly instances (cores and consistent data; aspirality controlled)

FIBERED = ("svf", "hvf", "spf")
INDEPENDENT = ("gf", "s1")

KIND_BY_REGIME = {
    "svf": phimod.SEIFERT_VF,
    "hvf": phimod.HYP_VF,
    "spf": phimod.SEIFERT_PF,
}
EXTRA_BY_REGIME = {
    "gf": phimod.GEOM_FINITE,
    "s1": phimod.S1_BUNDLE,
    "pf": phimod.PARTIAL_FIBER,
    "fi": phimod.FINITE_INDEX,
}


def _edge_spaces(ra: str, rb: str) -> list[str]:
    out = []
    cyl_ok = {"svf", "hvf", "spf", "gf", "s1"}
    if ra in cyl_ok and rb in cyl_ok and not (ra == "s1" and rb == "s1"):
        out.append(phimod.CYLINDER)
    if ra in ("gf", "spf", "pf") and rb in ("gf", "spf", "pf"):
        out.append(phimod.PLANE)
    if ra in ("gf", "s1", "fi") and rb in ("gf", "s1", "fi"):
        out.append(phimod.TORUS)
    return out


class _Builder:
    """Materializes one assembly instance from an abstract cover graph."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.tori = {}  # vertex index -> list of torus ids
        self.fibers = {}  # (piece, torus) -> Slope
        self.degeneracy = {}  # (piece, torus) -> Slope
        self.circles = {}  # vertex index -> list of Circle
        self.phi_edges = []
        self.extra_edges = []
        self.jsj_edges = []
        self.genus2 = set()

    def fresh_torus(self, i):
        self.tori.setdefault(i, [])
        t = f"t{i}_{len(self.tori[i])}"
        self.tori[i].append(t)
        return t

    def add_edge(self, k, i, ri, j, rj, space, driver=1, interior=None):
        """driver: ratio of the two side data values on a surface cylinder."""
        rng = self.rng
        eid = f"e{k:02d}"
        jid = f"E{k:02d}"
        ta, tb = self.fresh_torus(i), self.fresh_torus(j)
        g = random_unimodular(rng)
        pa, pb = f"P{i}", f"P{j}"
        self.jsj_edges.append(jsjmod.Edge(jid, (pa, ta), (pb, tb), g))

        if space == phimod.TORUS:
            self.extra_edges.append(
                phimod.ExtraEdge(
                    eid, f"V{i}", f"V{j}", jid, phimod.TORUS,
                    torus_lattice=random_lattice(rng).matrix(),
                )
            )
            return

        if space == phimod.PLANE:
            for idx, (vert, reg, torus, piece) in enumerate(
                ((i, ri, ta, pa), (j, rj, tb, pb))
            ):
                if reg in ("spf", "pf"):
                    self.fibers[(piece, torus)] = random_slope(rng)
            # two partially fibered sides must have non-parallel fibers
            if ri in ("spf", "pf") and rj in ("spf", "pf"):
                ha = self.fibers[(pa, ta)]
                while True:
                    hb = self.fibers[(pb, tb)]
                    if g.inverse().apply_slope(hb) != ha:
                        break
                    self.fibers[(pb, tb)] = random_slope(rng)
            self.extra_edges.append(
                phimod.ExtraEdge(eid, f"V{i}", f"V{j}", jid, phimod.PLANE, interior=interior)
            )
            return

        # cylinder: pick the core, then per-side fiber/degeneracy data
        kk = rng.randint(1, 3)
        s_a = random_slope(rng)
        core_a = ScaledSlope(kk, s_a)
        core_b = g.apply_scaled(core_a)
        sides = ((i, ri, ta, pa, s_a), (j, rj, tb, pb, core_b.s))
        data = []
        for idx, (vert, reg, torus, piece, s) in enumerate(sides):
            d = driver if idx == 0 else 1
            if reg == "s1":
                self.fibers[(piece, torus)] = s
                data.append(None)
            elif reg in ("svf", "spf"):
                h = slope_with_wedge(s, d)
                self.fibers[(piece, torus)] = h
                data.append({"intersection": kk * d})
            elif reg == "hvf":
                self.degeneracy[(piece, torus)] = slope_with_wedge(s, rng.randint(1, 2))
                data.append({"cusp_degree": kk * d})
            else:  # gf: nothing stored on the piece
                data.append(None)
        circ = [None, None]
        for idx, (vert, reg, torus, piece, s) in enumerate(sides):
            if data[idx] is not None:
                c = phimod.Circle(f"c{k}{'ab'[idx]}", torus, **data[idx])
                self.circles.setdefault(vert, []).append(c)
                circ[idx] = c
        if ri in FIBERED and rj in FIBERED:
            self.phi_edges.append(
                phimod.PhiEdge(
                    eid, (f"V{i}", circ[0].id), (f"V{j}", circ[1].id), jid, core_a
                )
            )
        else:
            self.extra_edges.append(
                phimod.ExtraEdge(eid, f"V{i}", f"V{j}", jid, phimod.CYLINDER, core=core_a)
            )

    def finish(self, regimes):
        rng = self.rng
        vertices = []
        extra_vertices = []
        for i, reg in enumerate(regimes):
            self.tori.setdefault(i, [])
            self.circles.setdefault(i, [])
            if reg == "spf" and not self.circles[i]:
                t = self.fresh_torus(i)
                h = random_slope(rng)
                self.fibers[(f"P{i}", t)] = h
                self.circles[i].append(phimod.Circle(f"cfree{i}", t, intersection=rng.randint(1, 4)))
            if reg in FIBERED:
                vertices.append(
                    phimod.PhiVertex(f"V{i}", f"P{i}", KIND_BY_REGIME[reg], tuple(self.circles[i]))
                )
            else:
                extra_vertices.append(phimod.ExtraVertex(f"V{i}", f"P{i}", EXTRA_BY_REGIME[reg]))

        pieces = []
        for i, reg in enumerate(regimes):
            pid = f"P{i}"
            seifert = reg in ("svf", "spf", "s1", "pf")
            boundary = [jsjmod.BoundaryComponent(t, 1) for t in self.tori[i]]
            if reg == "gf" and rng.random() < 0.3:
                boundary.append(jsjmod.BoundaryComponent(f"g{i}", 2))
                self.genus2.add(i)
            fibers = {}
            degeneracy = {}
            if seifert:
                for t in self.tori[i]:
                    fibers[t] = self.fibers.get((pid, t), Slope(0, 1))
                kind = jsjmod.SEIFERT
            else:
                for t in self.tori[i]:
                    if (pid, t) in self.degeneracy:
                        degeneracy[t] = self.degeneracy[(pid, t)]
                kind = jsjmod.HYP_HIGHER_GENUS if i in self.genus2 else jsjmod.HYP_FINITE_VOLUME
            pieces.append(jsjmod.Piece(pid, kind, tuple(boundary), fibers, degeneracy))

        trivial = len(pieces) == 1 and not self.jsj_edges
        base = jsjmod.JsjGraph(tuple(pieces), tuple(self.jsj_edges), False, trivial)
        graph = phimod.PhiGraph(
            tuple(vertices),
            tuple(self.phi_edges),
            base,
            tuple(extra_vertices),
            tuple(self.extra_edges),
        )
        violations = phimod.validate(graph)
        assert not violations, violations
        return graph


def random_assembly_instance(rng: random.Random, force: str | None = None):
    """A valid instance for the assembly; force='aspiral'/'spiral' fixes the outcome.

    Returns (phi graph, supplied per-vertex constants).
    """
    n = rng.randint(1, 5)
    all_regimes = ("svf", "hvf", "spf", "gf", "s1", "pf", "fi")
    regimes = [rng.choice(all_regimes) for _ in range(n)]
    if force == "spiral":
        # the forced chord will close a surface cycle on vertices 0 and 1
        if n == 1:
            regimes[0] = rng.choice(("svf", "hvf"))
        else:
            regimes[0] = rng.choice(FIBERED)
            regimes[1] = rng.choice(FIBERED)

    b = _Builder(rng)
    k = 0
    unforced_driver = (lambda: rng.choice((1, 1, 1, 2))) if force is None else (lambda: 1)
    # spanning tree with compatible spaces; re-pick regimes that fit nothing
    for i in range(1, n):
        tries = 0
        while True:
            j = rng.randrange(i) if not (force == "spiral" and i == 1) else 0
            options = _edge_spaces(regimes[i], regimes[j])
            if options:
                break
            tries += 1
            if tries > 10:
                regimes[i] = rng.choice(all_regimes)
                tries = 0
        if force == "spiral" and i == 1:
            space = phimod.CYLINDER  # the forced chord must close a surface cycle
        else:
            space = rng.choice(options)
        b.add_edge(k, j, regimes[j], i, regimes[i], space, driver=unforced_driver())
        k += 1

    extra = rng.randint(0, 2)
    for _ in range(extra):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            options = [phimod.CYLINDER] if regimes[i] in ("svf", "hvf") else []
        else:
            options = _edge_spaces(regimes[i], regimes[j])
        if not options:
            continue
        b.add_edge(k, i, regimes[i], j, regimes[j], rng.choice(options), driver=unforced_driver())
        k += 1

    if force is not None:
        # close one surface cycle explicitly and pick its driver
        driver = 1 if force == "aspiral" else rng.choice((2, 3))
        if force == "spiral":
            i, j = (0, 0) if n == 1 else (0, 1)
            b.add_edge(k, i, regimes[i], j, regimes[j], phimod.CYLINDER, driver=driver)
            k += 1
        else:
            fib = [i for i in range(n) if regimes[i] in FIBERED]
            loopable = [i for i in fib if regimes[i] in ("svf", "hvf")]
            if len(fib) >= 2 and rng.random() < 0.7:
                i, j = 0, 1
                if regimes[0] in FIBERED and regimes[1] in FIBERED:
                    b.add_edge(k, i, regimes[i], j, regimes[j], phimod.CYLINDER, driver=1)
                    k += 1
            elif loopable and rng.random() < 0.5:
                i = loopable[0]
                b.add_edge(k, i, regimes[i], i, regimes[i], phimod.CYLINDER, driver=1)
                k += 1

    graph = b.finish(regimes)
    constants = {}
    for i in range(n):
        if rng.random() < 0.4:
            constants[f"V{i}"] = rng.randint(1, 4)
    return graph, constants


@pytest.fixture
def rng():
    return random.Random(20260810)
