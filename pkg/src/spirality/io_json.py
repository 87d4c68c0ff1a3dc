"""Instance and certificate files: strict JSON with stable serialization.

Instances carry the decomposition graph, the decorated surface graph, the
optional per-vertex constants, and the subgroup flags.  Certificates bind to
the instance by a SHA-256 digest of the canonicalized text.  Parsing is
strict: unknown fields, out-of-range integers, and dangling references are
positioned errors, never defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from . import jsj as jsjmod
from . import phi as phimod
from . import semicover as semimod
from .lattice import Gluing, Lattice, ScaledSlope, Slope

I64_MIN = -(2**63)
I64_MAX = 2**63 - 1

SYNTAX = "syntax"
REFERENCE = "reference"
INVARIANT = "invariant"


@dataclass(frozen=True)
class Issue:
    kind: str
    message: str
    where: str = ""

    def __str__(self):
        loc = f" at {self.where}" if self.where else ""
        return f"{self.kind}{loc}: {self.message}"


class InstanceError(Exception):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class Instance:
    jsj: jsjmod.JsjGraph
    phi: phimod.PhiGraph
    constants: dict
    raw: dict  # canonical round-trip form


class _Reader:
    """Strict field-by-field reader collecting positioned issues."""

    def __init__(self):
        self.issues = []

    def fail(self, kind, where, message):
        self.issues.append(Issue(kind, message, where))

    def obj(self, value, where, required=(), optional=()):
        if not isinstance(value, dict):
            self.fail(SYNTAX, where, "expected an object")
            return None
        allowed = set(required) | set(optional)
        for key in value:
            if key not in allowed:
                self.fail(SYNTAX, f"{where}.{key}", "unknown field")
        out = {}
        for key in required:
            if key not in value:
                self.fail(SYNTAX, where, f"missing required field {key!r}")
                out[key] = None
            else:
                out[key] = value[key]
        for key in optional:
            out[key] = value.get(key)
        return out

    def integer(self, value, where):
        if not isinstance(value, int) or isinstance(value, bool):
            self.fail(SYNTAX, where, "expected an integer")
            return 0
        if not I64_MIN <= value <= I64_MAX:
            self.fail(INVARIANT, where, "integer outside the 64-bit range")
            return 0
        return value

    def string(self, value, where):
        if not isinstance(value, str) or not value:
            self.fail(SYNTAX, where, "expected a non-empty string")
            return ""
        return value

    def boolean(self, value, where):
        if not isinstance(value, bool):
            self.fail(SYNTAX, where, "expected a boolean")
            return False
        return value

    def array(self, value, where):
        if not isinstance(value, list):
            self.fail(SYNTAX, where, "expected an array")
            return []
        return value

    def slope(self, value, where):
        arr = self.array(value, where)
        if len(arr) != 2:
            self.fail(SYNTAX, where, "expected [p, q]")
            return Slope(1, 0)
        p = self.integer(arr[0], f"{where}[0]")
        q = self.integer(arr[1], f"{where}[1]")
        try:
            s = Slope(p, q)
        except ValueError as e:
            self.fail(INVARIANT, where, str(e))
            return Slope(1, 0)
        return s

    def scaled(self, value, where):
        arr = self.array(value, where)
        if len(arr) != 3:
            self.fail(SYNTAX, where, "expected [k, p, q]")
            return ScaledSlope(1, Slope(1, 0))
        k = self.integer(arr[0], f"{where}[0]")
        p = self.integer(arr[1], f"{where}[1]")
        q = self.integer(arr[2], f"{where}[2]")
        try:
            return ScaledSlope(k, Slope(p, q))
        except ValueError as e:
            self.fail(INVARIANT, where, str(e))
            return ScaledSlope(1, Slope(1, 0))

    def matrix(self, value, where):
        arr = self.array(value, where)
        if len(arr) != 4:
            self.fail(SYNTAX, where, "expected a row-major [a, b, c, d]")
            return (1, 0, 0, 1)
        return tuple(self.integer(x, f"{where}[{i}]") for i, x in enumerate(arr))


def parse_instance(text: str) -> Instance:
    """Parse and fully validate an instance; raises InstanceError on issues."""
    r = _Reader()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError([Issue(SYNTAX, e.msg, f"line {e.lineno}, col {e.colno}")])
    top = r.obj(data, "$", required=("version", "jsj", "phi"), optional=("constants", "subgroup"))
    if top is None:
        raise InstanceError(r.issues)
    if top["version"] != "1":
        r.fail(INVARIANT, "$.version", "unsupported version (expected \"1\")")

    jsj_graph = _parse_jsj(r, top["jsj"])
    constants = _parse_constants(r, top["constants"])
    infinite_index = True
    if top["subgroup"] is not None:
        sub = r.obj(top["subgroup"], "$.subgroup", required=("infinite_index",))
        if sub:
            infinite_index = r.boolean(sub["infinite_index"], "$.subgroup.infinite_index")
    phi_graph = _parse_phi(r, top["phi"], jsj_graph, infinite_index)
    if r.issues:
        raise InstanceError(r.issues)

    violations = phimod.validate(phi_graph)
    if violations:
        raise InstanceError([Issue(INVARIANT, v) for v in violations])
    for vid in constants:
        known = {v.id for v in phi_graph.vertices} | {w.id for w in phi_graph.extra_vertices}
        if vid not in known:
            raise InstanceError([Issue(REFERENCE, f"constant for unknown vertex {vid}", "$.constants")])
    return Instance(jsj_graph, phi_graph, constants, json.loads(text))


def _parse_jsj(r, data):
    out = r.obj(
        data, "$.jsj", required=("pieces", "edges"), optional=("is_sol", "trivial_decomposition")
    )
    if out is None:
        return jsjmod.JsjGraph((), ())
    pieces = []
    for i, praw in enumerate(r.array(out["pieces"], "$.jsj.pieces")):
        where = f"$.jsj.pieces[{i}]"
        p = r.obj(
            praw,
            where,
            required=("id", "kind", "boundary"),
            optional=("fiber_slopes", "degeneracy_slopes"),
        )
        if p is None:
            continue
        pid = r.string(p["id"], f"{where}.id")
        kind = r.string(p["kind"], f"{where}.kind")
        boundary = []
        for j, braw in enumerate(r.array(p["boundary"], f"{where}.boundary")):
            b = r.obj(braw, f"{where}.boundary[{j}]", required=("id",), optional=("genus",))
            if b is None:
                continue
            genus = 1 if b["genus"] is None else r.integer(b["genus"], f"{where}.boundary[{j}].genus")
            boundary.append(jsjmod.BoundaryComponent(r.string(b["id"], f"{where}.boundary[{j}].id"), genus))
        fibers = {}
        if p["fiber_slopes"] is not None:
            if not isinstance(p["fiber_slopes"], dict):
                r.fail(SYNTAX, f"{where}.fiber_slopes", "expected an object")
            else:
                for torus, sraw in p["fiber_slopes"].items():
                    fibers[torus] = r.slope(sraw, f"{where}.fiber_slopes.{torus}")
        degeneracy = {}
        if p["degeneracy_slopes"] is not None:
            if not isinstance(p["degeneracy_slopes"], dict):
                r.fail(SYNTAX, f"{where}.degeneracy_slopes", "expected an object")
            else:
                for torus, sraw in p["degeneracy_slopes"].items():
                    degeneracy[torus] = r.slope(sraw, f"{where}.degeneracy_slopes.{torus}")
        pieces.append(jsjmod.Piece(pid, kind, tuple(boundary), fibers, degeneracy))

    edges = []
    piece_ids = {p.id for p in pieces}
    for i, eraw in enumerate(r.array(out["edges"], "$.jsj.edges")):
        where = f"$.jsj.edges[{i}]"
        e = r.obj(eraw, where, required=("id", "end_a", "end_b", "gluing"))
        if e is None:
            continue
        eid = r.string(e["id"], f"{where}.id")
        ends = []
        for side in ("end_a", "end_b"):
            arr = r.array(e[side], f"{where}.{side}")
            if len(arr) != 2:
                r.fail(SYNTAX, f"{where}.{side}", "expected [piece, boundary]")
                ends.append(("?", "?"))
                continue
            pid = r.string(arr[0], f"{where}.{side}[0]")
            bid = r.string(arr[1], f"{where}.{side}[1]")
            if pid not in piece_ids:
                r.fail(REFERENCE, f"{where}.{side}", f"unknown piece {pid}")
            ends.append((pid, bid))
        m = r.matrix(e["gluing"], f"{where}.gluing")
        try:
            gluing = Gluing(*m)
        except ValueError as exc:
            r.fail(INVARIANT, f"{where}.gluing", str(exc))
            gluing = Gluing(1, 0, 0, 1)
        edges.append(jsjmod.Edge(eid, ends[0], ends[1], gluing))

    is_sol = False if out["is_sol"] is None else r.boolean(out["is_sol"], "$.jsj.is_sol")
    trivial = (
        False
        if out["trivial_decomposition"] is None
        else r.boolean(out["trivial_decomposition"], "$.jsj.trivial_decomposition")
    )
    return jsjmod.JsjGraph(tuple(pieces), tuple(edges), is_sol, trivial)


def _parse_constants(r, data):
    if data is None:
        return {}
    if not isinstance(data, dict):
        r.fail(SYNTAX, "$.constants", "expected an object")
        return {}
    out = {}
    for vid, val in data.items():
        c = r.integer(val, f"$.constants.{vid}")
        if c < 1:
            r.fail(INVARIANT, f"$.constants.{vid}", "constants must be positive")
        out[vid] = c
    return out


def _parse_phi(r, data, jsj_graph, infinite_index):
    out = r.obj(
        data,
        "$.phi",
        required=("vertices", "edges"),
        optional=("extra_vertices", "extra_edges"),
    )
    if out is None:
        return phimod.PhiGraph((), (), jsj_graph)
    vertices = []
    for i, vraw in enumerate(r.array(out["vertices"], "$.phi.vertices")):
        where = f"$.phi.vertices[{i}]"
        v = r.obj(vraw, where, required=("id", "piece", "kind", "circles"))
        if v is None:
            continue
        circles = []
        for j, craw in enumerate(r.array(v["circles"], f"{where}.circles")):
            cw = f"{where}.circles[{j}]"
            c = r.obj(craw, cw, required=("id", "torus"), optional=("intersection", "cusp_degree"))
            if c is None:
                continue
            inter = None if c["intersection"] is None else r.integer(c["intersection"], f"{cw}.intersection")
            cusp = None if c["cusp_degree"] is None else r.integer(c["cusp_degree"], f"{cw}.cusp_degree")
            circles.append(
                phimod.Circle(r.string(c["id"], f"{cw}.id"), r.string(c["torus"], f"{cw}.torus"), inter, cusp)
            )
        vertices.append(
            phimod.PhiVertex(
                r.string(v["id"], f"{where}.id"),
                r.string(v["piece"], f"{where}.piece"),
                r.string(v["kind"], f"{where}.kind"),
                tuple(circles),
            )
        )

    edges = []
    for i, eraw in enumerate(r.array(out["edges"], "$.phi.edges")):
        where = f"$.phi.edges[{i}]"
        e = r.obj(eraw, where, required=("id", "end_a", "end_b", "jsj_edge"), optional=("core",))
        if e is None:
            continue
        ends = []
        for side in ("end_a", "end_b"):
            arr = r.array(e[side], f"{where}.{side}")
            if len(arr) != 2:
                r.fail(SYNTAX, f"{where}.{side}", "expected [vertex, circle]")
                ends.append(("?", "?"))
                continue
            ends.append((r.string(arr[0], f"{where}.{side}[0]"), r.string(arr[1], f"{where}.{side}[1]")))
        core = None if e["core"] is None else r.scaled(e["core"], f"{where}.core")
        edges.append(
            phimod.PhiEdge(
                r.string(e["id"], f"{where}.id"), ends[0], ends[1],
                r.string(e["jsj_edge"], f"{where}.jsj_edge"), core,
            )
        )

    extra_vertices = []
    if out["extra_vertices"] is not None:
        for i, wraw in enumerate(r.array(out["extra_vertices"], "$.phi.extra_vertices")):
            where = f"$.phi.extra_vertices[{i}]"
            w = r.obj(wraw, where, required=("id", "piece", "regime"))
            if w is None:
                continue
            extra_vertices.append(
                phimod.ExtraVertex(
                    r.string(w["id"], f"{where}.id"),
                    r.string(w["piece"], f"{where}.piece"),
                    r.string(w["regime"], f"{where}.regime"),
                )
            )

    extra_edges = []
    if out["extra_edges"] is not None:
        for i, xraw in enumerate(r.array(out["extra_edges"], "$.phi.extra_edges")):
            where = f"$.phi.extra_edges[{i}]"
            x = r.obj(
                xraw,
                where,
                required=("id", "end_a", "end_b", "jsj_edge", "space"),
                optional=("core", "lattice", "interior"),
            )
            if x is None:
                continue
            core = None if x["core"] is None else r.scaled(x["core"], f"{where}.core")
            lattice = None if x["lattice"] is None else r.matrix(x["lattice"], f"{where}.lattice")
            if lattice is not None:
                try:
                    semimod._from_rowmajor(lattice)
                except ValueError as exc:
                    r.fail(INVARIANT, f"{where}.lattice", str(exc))
                    lattice = None
            interior = None if x["interior"] is None else r.boolean(x["interior"], f"{where}.interior")
            extra_edges.append(
                phimod.ExtraEdge(
                    r.string(x["id"], f"{where}.id"),
                    r.string(x["end_a"], f"{where}.end_a"),
                    r.string(x["end_b"], f"{where}.end_b"),
                    r.string(x["jsj_edge"], f"{where}.jsj_edge"),
                    r.string(x["space"], f"{where}.space"),
                    core,
                    lattice,
                    interior,
                )
            )

    return phimod.PhiGraph(
        tuple(vertices), tuple(edges), jsj_graph, tuple(extra_vertices), tuple(extra_edges), infinite_index
    )


# ---------------------------------------------------------------------------
# serialization (canonical, round-trip stable)


def serialize_instance(inst: Instance) -> str:
    jsj_graph, phi_graph = inst.jsj, inst.phi
    data = {
        "version": "1",
        "jsj": {
            "pieces": [
                _with_optional(
                    {
                        "id": p.id,
                        "kind": p.kind,
                        "boundary": [
                            {"id": b.id, "genus": b.genus} for b in p.boundary
                        ],
                    },
                    fiber_slopes={t: list(s.vector()) for t, s in sorted(p.fiber_slopes.items())},
                    degeneracy_slopes={
                        t: list(s.vector()) for t, s in sorted(p.degeneracy_slopes.items())
                    },
                )
                for p in jsj_graph.pieces
            ],
            "edges": [
                {
                    "id": e.id,
                    "end_a": list(e.end_a),
                    "end_b": list(e.end_b),
                    "gluing": list(e.gluing.matrix()),
                }
                for e in jsj_graph.edges
            ],
            "is_sol": jsj_graph.is_sol,
            "trivial_decomposition": jsj_graph.trivial_decomposition,
        },
        "phi": _with_optional(
            {
                "vertices": [
                    {
                        "id": v.id,
                        "piece": v.piece,
                        "kind": v.kind,
                        "circles": [
                            _drop_none(
                                {
                                    "id": c.id,
                                    "torus": c.torus,
                                    "intersection": c.intersection,
                                    "cusp_degree": c.cusp_degree,
                                }
                            )
                            for c in v.circles
                        ],
                    }
                    for v in phi_graph.vertices
                ],
                "edges": [
                    _drop_none(
                        {
                            "id": e.id,
                            "end_a": list(e.end_a),
                            "end_b": list(e.end_b),
                            "jsj_edge": e.jsj_edge,
                            "core": list(e.core.vector_triple()) if e.core else None,
                        }
                    )
                    for e in phi_graph.edges
                ],
            },
            extra_vertices=[
                {"id": w.id, "piece": w.piece, "regime": w.regime}
                for w in phi_graph.extra_vertices
            ],
            extra_edges=[
                _drop_none(
                    {
                        "id": x.id,
                        "end_a": x.end_a,
                        "end_b": x.end_b,
                        "jsj_edge": x.jsj_edge,
                        "space": x.space,
                        "core": list(x.core.vector_triple()) if x.core else None,
                        "lattice": list(x.torus_lattice) if x.torus_lattice else None,
                        "interior": x.interior,
                    }
                )
                for x in phi_graph.extra_edges
            ],
        ),
        "constants": dict(sorted(inst.constants.items())),
        "subgroup": {"infinite_index": phi_graph.infinite_index},
    }
    if not data["constants"]:
        del data["constants"]
    return canonical_text(data)


def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def _with_optional(required: dict, **optional) -> dict:
    out = dict(required)
    for k, v in optional.items():
        if v not in ({}, [], None):
            out[k] = v
    return out


def canonical_text(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def instance_digest(text: str) -> str:
    canon = canonical_text(json.loads(text))
    return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# certificates


def serialize_certificate(cert: semimod.CoverCertificate, instance_text: str) -> str:
    tree = cert.tree
    data = {
        "version": "1",
        "instance_digest": instance_digest(instance_text),
        "tree": {
            "root": tree.root,
            "order": list(tree.order),
            "parent_edges": {
                vid: [eid, side] for vid, (eid, side) in sorted(tree.parent_edge.items())
            },
            "edges": list(tree.tree_edges),
            "chords": list(tree.chords),
            "certifying_cycles": {
                eid: [[s.edge, s.forward] for s in cyc]
                for eid, cyc in sorted(tree.certifying_cycles.items())
            },
        },
        "sheet": {
            "vertex_constants": dict(sorted(cert.sheet.vertex_constants.items())),
            "circle_units": {
                f"{vid}::{cid}": u for (vid, cid), u in sorted(cert.sheet.circle_units.items())
            },
            "z2": {eid: list(pair) for eid, pair in sorted(cert.sheet.z2_pairs.items())},
            "global": cert.sheet.global_c,
        },
        "slopes": {
            "cylinder": {
                eid: {side: list(t.vector()) for side, t in sorted(sides.items())}
                for eid, sides in sorted(cert.slopes.cylinder_t.items())
            },
            "plane": {
                eid: {side: [list(u.vector()), list(v.vector())] for side, (u, v) in sorted(sides.items())}
                for eid, sides in sorted(cert.slopes.plane_uv.items())
            },
        },
        "parameters": {vid: rec for vid, rec in sorted(cert.parameters.items())},
        "edges": {
            eid: {
                "lattice_a": list(pair.lattice_a.matrix()),
                "lattice_b": list(pair.lattice_b.matrix()),
            }
            for eid, pair in sorted(cert.edge_lattices.items())
        },
    }
    return canonical_text(data)


def parse_certificate(text: str) -> dict:
    r = _Reader()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError([Issue(SYNTAX, e.msg, f"line {e.lineno}, col {e.colno}")])
    top = r.obj(
        data,
        "$",
        required=("version", "instance_digest", "tree", "sheet", "slopes", "parameters", "edges"),
    )
    if top is None or r.issues:
        raise InstanceError(r.issues or [Issue(SYNTAX, "malformed certificate", "$")])
    if top["version"] != "1":
        raise InstanceError([Issue(INVARIANT, "unsupported version", "$.version")])
    return data


def certificate_from_data(data: dict) -> semimod.CoverCertificate:
    """Rebuild the in-memory certificate from its parsed JSON form."""
    r = _Reader()
    traw = data["tree"]
    tree = semimod.SpanningTree(
        traw.get("root"),
        tuple(traw.get("order", ())),
        {vid: (e[0], e[1]) for vid, e in traw.get("parent_edges", {}).items()},
        tuple(traw.get("edges", ())),
        tuple(traw.get("chords", ())),
        {
            eid: [phimod.Step(edge, bool(fwd)) for edge, fwd in cyc]
            for eid, cyc in traw.get("certifying_cycles", {}).items()
        },
    )
    sraw = data["sheet"]
    units = {}
    for key, val in sraw.get("circle_units", {}).items():
        vid, _, cid = key.partition("::")
        units[(vid, cid)] = int(val)
    sheet = semimod.ConstantSheet(
        {k: int(v) for k, v in sraw.get("vertex_constants", {}).items()},
        units,
        {eid: tuple(int(x) for x in pair) for eid, pair in sraw.get("z2", {}).items()},
        int(sraw["global"]),
    )
    cyl = {
        eid: {side: r.slope(t, "$") for side, t in sides.items()}
        for eid, sides in data["slopes"].get("cylinder", {}).items()
    }
    planes = {
        eid: {side: (r.slope(uv[0], "$"), r.slope(uv[1], "$")) for side, uv in sides.items()}
        for eid, sides in data["slopes"].get("plane", {}).items()
    }
    if r.issues:
        raise InstanceError(r.issues)
    slopes = semimod.SlopeChoice(cyl, planes)
    lattices = {}
    for eid, pair in data["edges"].items():
        la = semimod._from_rowmajor(pair["lattice_a"])
        lb = semimod._from_rowmajor(pair["lattice_b"])
        lattices[eid] = semimod.EdgeLattices(Lattice(*la), Lattice(*lb))
    return semimod.CoverCertificate(tree, sheet, slopes, lattices, dict(data["parameters"]))


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
