import random
from fractions import Fraction

import pytest

from spirality import jsj as jsjmod
from spirality import phi as phimod
from spirality import semicover as semi
from spirality.errors import (
    EdgeConditionUnsatisfiable,
    IncompatiblePair,
    MissingCore,
    MissingDegeneracySlope,
)
from spirality.lattice import Gluing, Lattice, ScaledSlope, Slope, apply_gluing, index
from spirality.phi import (
    Circle,
    ExtraEdge,
    ExtraVertex,
    PhiEdge,
    PhiGraph,
    PhiVertex,
)

from conftest import random_assembly_instance

SWAP = Gluing(0, 1, 1, 0)


def loop_instance(values=(1, 1, 1, 1), cores=((1, 1, 0), (1, 1, 0))):
    """Two Seifert pieces joined by two cylinders; data chosen via |s x h|."""
    x1, x2, y1, y2 = values

    def fiber_for(core, want, flip):
        s = Slope(core[1], core[2]) if not flip else Slope(core[2], core[1])
        from conftest import slope_with_wedge

        return slope_with_wedge(s, want)

    c1 = ScaledSlope(cores[0][0], Slope(cores[0][1], cores[0][2]))
    c2 = ScaledSlope(cores[1][0], Slope(cores[1][1], cores[1][2]))
    h_t1a = fiber_for(cores[0], x1 // c1.k, False)
    h_t2a = fiber_for(cores[1], x2 // c2.k, False)
    h_t1b = fiber_for(cores[0], y1 // c1.k, True)
    h_t2b = fiber_for(cores[1], y2 // c2.k, True)
    pieces = (
        jsjmod.Piece(
            "P1",
            jsjmod.SEIFERT,
            (jsjmod.BoundaryComponent("T1a", 1), jsjmod.BoundaryComponent("T2a", 1)),
            {"T1a": h_t1a, "T2a": h_t2a},
            {},
        ),
        jsjmod.Piece(
            "P2",
            jsjmod.SEIFERT,
            (jsjmod.BoundaryComponent("T1b", 1), jsjmod.BoundaryComponent("T2b", 1)),
            {"T1b": h_t1b, "T2b": h_t2b},
            {},
        ),
    )
    edges = (
        jsjmod.Edge("E1", ("P1", "T1a"), ("P2", "T1b"), SWAP),
        jsjmod.Edge("E2", ("P1", "T2a"), ("P2", "T2b"), SWAP),
    )
    base = jsjmod.JsjGraph(pieces, edges)
    v1 = PhiVertex(
        "V1", "P1", phimod.SEIFERT_VF, (Circle("x1", "T1a", x1), Circle("x2", "T2a", x2))
    )
    v2 = PhiVertex(
        "V2", "P2", phimod.SEIFERT_VF, (Circle("y1", "T1b", y1), Circle("y2", "T2b", y2))
    )
    phi_edges = (
        PhiEdge("e1", ("V1", "x1"), ("V2", "y1"), "E1", c1),
        PhiEdge("e2", ("V1", "x2"), ("V2", "y2"), "E2", c2),
    )
    return PhiGraph((v1, v2), phi_edges, base)


def test_choose_slopes_seifert_fiber_both_viewpoints():
    g = loop_instance()
    slopes = semi.choose_slopes(g.base, g)
    # each fibered side uses its own regular fiber
    assert slopes.cylinder_t["e1"]["a"] == g.base.piece("P1").fiber_slopes["T1a"]
    assert slopes.cylinder_t["e1"]["b"] == g.base.piece("P2").fiber_slopes["T1b"]


def test_choose_slopes_partial_vs_geom_finite_uses_fiber_from_both_sides():
    base = jsjmod.JsjGraph(
        (
            jsjmod.Piece(
                "P1",
                jsjmod.SEIFERT,
                (jsjmod.BoundaryComponent("T1", 1),),
                {"T1": Slope(1, 2)},
                {},
            ),
            jsjmod.Piece(
                "P2", jsjmod.HYP_FINITE_VOLUME, (jsjmod.BoundaryComponent("T2", 1),), {}, {}
            ),
        ),
        (jsjmod.Edge("E1", ("P1", "T1"), ("P2", "T2"), SWAP),),
    )
    v = PhiVertex("V1", "P1", phimod.SEIFERT_PF, (Circle("c", "T1", 2),))
    w = ExtraVertex("W1", "P2", phimod.GEOM_FINITE)
    g = PhiGraph(
        (v,),
        (),
        base,
        (w,),
        (ExtraEdge("x1", "V1", "W1", "E1", phimod.CYLINDER, core=ScaledSlope(1, Slope(1, 0))),),
    )
    slopes = semi.choose_slopes(base, g)
    t_a = slopes.cylinder_t["x1"]["a"]
    t_b = slopes.cylinder_t["x1"]["b"]
    assert t_a == Slope(1, 2)  # the fiber of the partially fibered side
    assert t_b == SWAP.apply_slope(t_a)  # same slope seen from the far side


def test_choose_slopes_missing_degeneracy():
    base = jsjmod.JsjGraph(
        (
            jsjmod.Piece(
                "P1", jsjmod.HYP_FINITE_VOLUME, (jsjmod.BoundaryComponent("T1", 1),), {}, {}
            ),
            jsjmod.Piece(
                "P2", jsjmod.HYP_FINITE_VOLUME, (jsjmod.BoundaryComponent("T2", 1),), {}, {}
            ),
        ),
        (jsjmod.Edge("E1", ("P1", "T1"), ("P2", "T2"), SWAP),),
    )
    v = PhiVertex("V1", "P1", phimod.HYP_VF, (Circle("c", "T1", None, 2),))
    w = ExtraVertex("W1", "P2", phimod.GEOM_FINITE)
    g = PhiGraph(
        (v,),
        (),
        base,
        (w,),
        (ExtraEdge("x1", "V1", "W1", "E1", phimod.CYLINDER, core=ScaledSlope(1, Slope(1, 0))),),
    )
    with pytest.raises(MissingDegeneracySlope):
        semi.choose_slopes(base, g)


def test_choose_slopes_two_circle_bundles_incompatible():
    base = jsjmod.JsjGraph(
        (
            jsjmod.Piece(
                "P1", jsjmod.SEIFERT, (jsjmod.BoundaryComponent("T1", 1),), {"T1": Slope(1, 0)}, {}
            ),
            jsjmod.Piece(
                "P2", jsjmod.SEIFERT, (jsjmod.BoundaryComponent("T2", 1),), {"T2": Slope(1, 0)}, {}
            ),
        ),
        (jsjmod.Edge("E1", ("P1", "T1"), ("P2", "T2"), SWAP),),
    )
    g = PhiGraph(
        (),
        (),
        base,
        (ExtraVertex("W1", "P1", phimod.S1_BUNDLE), ExtraVertex("W2", "P2", phimod.S1_BUNDLE)),
        (ExtraEdge("x1", "W1", "W2", "E1", phimod.CYLINDER, core=ScaledSlope(2, Slope(1, 0))),),
    )
    with pytest.raises(IncompatiblePair):
        semi.choose_slopes(base, g)


def test_choose_slopes_requires_core():
    g = loop_instance()
    stripped = PhiGraph(
        g.vertices,
        tuple(PhiEdge(e.id, e.end_a, e.end_b, e.jsj_edge, None) for e in g.edges),
        g.base,
    )
    with pytest.raises(MissingCore):
        semi.choose_slopes(stripped.base, stripped)


def test_global_constant_examples():
    assert semi.global_constant([2, 3], [(2, 6)]) == 72
    assert semi.global_constant([]) == 1
    assert semi.global_constant([7]) == 7


def test_spanning_tree_certifies_cycle_chords():
    g = loop_instance()
    tree = semi.spanning_tree_with_edge_conditions(g.base, g)
    assert set(tree.tree_edges) == {"e1"}
    assert tree.chords == ("e2",)
    assert "e2" in tree.certifying_cycles
    cyc = tree.certifying_cycles["e2"]
    assert any(s.edge == "e2" for s in cyc)


def test_interiority_flags_constrain_the_tree():
    base = jsjmod.JsjGraph(
        (
            jsjmod.Piece(
                "P1", jsjmod.HYP_FINITE_VOLUME, (jsjmod.BoundaryComponent("T1", 1),), {}, {}
            ),
            jsjmod.Piece(
                "P2", jsjmod.HYP_FINITE_VOLUME, (jsjmod.BoundaryComponent("T2", 1),), {}, {}
            ),
        ),
        (jsjmod.Edge("E1", ("P1", "T1"), ("P2", "T2"), SWAP),),
    )
    g = PhiGraph(
        (),
        (),
        base,
        (ExtraVertex("W1", "P1", phimod.GEOM_FINITE), ExtraVertex("W2", "P2", phimod.GEOM_FINITE)),
        (ExtraEdge("x1", "W1", "W2", "E1", phimod.PLANE, interior=False),),
    )
    with pytest.raises(EdgeConditionUnsatisfiable):
        semi.spanning_tree_with_edge_conditions(base, g)


def test_assemble_tree_instance_unconditional():
    g = loop_instance()
    tree_only = PhiGraph(g.vertices, g.edges[:1], g.base)
    cert = semi.assemble(tree_only.base, tree_only)
    assert isinstance(cert, semi.CoverCertificate)
    ok, problems = semi.verify_certificate(tree_only.base, tree_only, cert)
    assert ok, problems


def test_assemble_aspiral_loop_produces_matching_lattices():
    g = loop_instance(values=(1, 1, 1, 1))
    cert = semi.assemble(g.base, g)
    assert isinstance(cert, semi.CoverCertificate)
    for eid, pair in cert.edge_lattices.items():
        e = g.base.edge(g.edge(eid).jsj_edge)
        assert apply_gluing(e.gluing, pair.lattice_a) == pair.lattice_b
    ok, problems = semi.verify_certificate(g.base, g, cert)
    assert ok, problems


def test_assemble_spiral_loop_obstruction():
    g = loop_instance(values=(1, 2, 2, 1))
    res = semi.assemble(g.base, g)
    assert isinstance(res, semi.SpiralObstruction)
    assert res.value == Fraction(1, 4)
    assert phimod.spirality_on_cycle(g, res.cycle) == res.value


def test_verify_rejects_perturbed_lattice():
    g = loop_instance(values=(1, 1, 1, 1))
    cert = semi.assemble(g.base, g)
    eid = sorted(cert.edge_lattices)[0]
    pair = cert.edge_lattices[eid]
    bumped = Lattice(pair.lattice_a.a * 2, pair.lattice_a.b, pair.lattice_a.d)
    broken = dict(cert.edge_lattices)
    broken[eid] = semi.EdgeLattices(bumped, pair.lattice_b)
    bad = semi.CoverCertificate(cert.tree, cert.sheet, cert.slopes, broken, cert.parameters)
    ok, problems = semi.verify_certificate(g.base, g, bad)
    assert not ok
    assert any(eid in p for p in problems)


def test_verify_empty_instance():
    base = jsjmod.JsjGraph(
        (jsjmod.Piece("P", jsjmod.HYP_FINITE_VOLUME, (), {}, {}),),
        (),
        trivial_decomposition=True,
    )
    g = PhiGraph((), (), base, (ExtraVertex("W", "P", phimod.GEOM_FINITE),), ())
    cert = semi.assemble(base, g)
    ok, problems = semi.verify_certificate(base, g, cert)
    assert ok, problems
    assert cert.edge_lattices == {}


def test_assemble_matches_aspirality_on_random_instances(rng):
    hits = {"cert": 0, "obstruction": 0}
    for i in range(120):
        force = ("aspiral", "spiral", None)[i % 3]
        g, constants = random_assembly_instance(rng, force=force)
        res = semi.assemble(g.base, g, supplied_constants=constants)
        aspiral = phimod.is_aspiral(g).aspiral
        if isinstance(res, semi.CoverCertificate):
            hits["cert"] += 1
            assert aspiral
            ok, problems = semi.verify_certificate(g.base, g, res)
            assert ok, problems
        else:
            hits["obstruction"] += 1
            assert not aspiral
            assert phimod.spirality_on_cycle(g, res.cycle) != 1
        if force == "aspiral":
            assert isinstance(res, semi.CoverCertificate)
        if force == "spiral":
            assert isinstance(res, semi.SpiralObstruction)
    assert hits["cert"] and hits["obstruction"]


def test_scaling_global_constant_preserves_outcome(rng):
    for _ in range(10):
        g, constants = random_assembly_instance(rng, force="aspiral")
        res = semi.assemble(g.base, g, supplied_constants=constants)
        assert isinstance(res, semi.CoverCertificate)
        slopes = semi.choose_slopes(g.base, g)
        sheet = semi.build_constant_sheet(g.base, g, slopes, constants)
        padded = semi.ConstantSheet(
            sheet.vertex_constants,
            sheet.circle_units,
            sheet.z2_pairs,
            sheet.global_c * 5,
        )
        res2 = semi.assemble(g.base, g, slopes, padded)
        assert isinstance(res2, semi.CoverCertificate)


def test_degree_identity_on_certifying_cycles(rng):
    seen = 0
    for _ in range(60):
        g, constants = random_assembly_instance(rng, force="aspiral")
        cert = semi.assemble(g.base, g, supplied_constants=constants)
        assert isinstance(cert, semi.CoverCertificate)
        for chord, cycle in cert.tree.certifying_cycles.items():
            pair = cert.edge_lattices[chord]
            assert index(pair.lattice_a) == index(pair.lattice_b)
            seen += 1
    assert seen > 0
