"""Brute-force cross-checks, deliberately independent of the production code.

The membership oracle enumerates integer combinations instead of using the
Hermite form; the cycle oracle enumerates simple cycles by DFS instead of a
spanning forest; the adjacency truth table re-reads the verdict off the edge
list without going through the graph module's code path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import jsj as jsjmod
from .lattice import Gluing, Slope


@dataclass(frozen=True)
class EnumerationBound:
    coordinate: int = 20
    cycle_length: int = 12
    graph_size: int = 5

    def __post_init__(self):
        if min(self.coordinate, self.cycle_length, self.graph_size) < 1:
            raise ValueError("bounds must be positive")


def lattice_membership_by_enumeration(gens, bound: int):
    """All integer combinations a*g1 + ... with coordinates within the bound."""
    if bound > 64:
        raise ValueError("bound capped at 64")
    gens = [tuple(g) for g in gens]
    biggest = max((max(abs(x), abs(y)) for x, y in gens), default=0)
    if biggest == 0:
        return {(0, 0)}
    reach = 2 * bound * biggest + 2
    points = set()
    for coeffs in itertools.product(range(-reach, reach + 1), repeat=len(gens)):
        x = sum(c * g[0] for c, g in zip(coeffs, gens))
        y = sum(c * g[1] for c, g in zip(coeffs, gens))
        if abs(x) <= bound and abs(y) <= bound:
            points.add((x, y))
    return points


def lattice_membership_two_gens(g1, g2, bound: int):
    """Faster two-generator variant of the membership oracle."""
    if bound > 64:
        raise ValueError("bound capped at 64")
    biggest = max(abs(v) for v in (*g1, *g2)) or 1
    reach = 2 * bound * biggest + 2
    points = set()
    for a in range(-reach, reach + 1):
        for b in range(-reach, reach + 1):
            x = a * g1[0] + b * g2[0]
            y = a * g1[1] + b * g2[1]
            if abs(x) <= bound and abs(y) <= bound:
                points.add((x, y))
    return points


def all_simple_cycles(vertices, edges, maxlen: int = 12):
    """Every simple cycle of a multigraph, once up to rotation and reflection.

    edges: iterable of (edge id, vertex, vertex).  Returns oriented cycles as
    lists of (edge id, forward) steps; a cycle is simple when no vertex
    repeats (self-loops and parallel-edge bigons count).
    """
    if maxlen > 12:
        raise ValueError("cycle length capped at 12")
    edges = [tuple(e) for e in edges]
    by_vertex = {v: [] for v in vertices}
    for eid, a, b in edges:
        by_vertex[a].append((eid, a, b, True))
        if a != b:
            by_vertex[b].append((eid, b, a, False))
    found = {}

    def extend(path, visited, start):
        last = path[-1][2]
        for eid, src, dst, fwd in by_vertex[last]:
            if any(step[0] == eid for step in path):
                continue
            if dst == start and len(path) >= 1:
                cycle = path + [(eid, src, dst, fwd)]
                key = frozenset(step[0] for step in cycle)
                if key not in found:
                    found[key] = [(step[0], step[3]) for step in cycle]
                continue
            if dst in visited or len(path) + 1 >= maxlen:
                continue
            extend(path + [(eid, src, dst, fwd)], visited | {dst}, start)

    for eid, a, b in edges:
        if a == b:
            key = frozenset([eid])
            if key not in found:
                found[key] = [(eid, True)]
    for v in sorted(by_vertex):
        for eid, src, dst, fwd in by_vertex[v]:
            if src != v or dst == v:
                continue
            extend([(eid, src, dst, fwd)], {src, dst}, v)
    return sorted(found.values(), key=lambda c: sorted(s[0] for s in c))


def exhaustive_lerf_truth_table(max_pieces: int = 4, max_edges: int = 5):
    """Verdicts for every connected labeled graph within the bounds.

    Yields (JsjGraph, expected verdict) rows; the expected verdict is read
    directly off the edges here, independent of the graph module.
    """
    if max_pieces > 4 or max_edges > 5:
        raise ValueError("bounds capped at (4, 5)")
    kinds = (jsjmod.SEIFERT, jsjmod.HYP_FINITE_VOLUME, jsjmod.HYP_HIGHER_GENUS)
    for n in range(1, max_pieces + 1):
        slots = [(i, j) for i in range(n) for j in range(i, n)]
        for m in range(0, max_edges + 1):
            if n > 1 and m < n - 1:
                continue  # cannot be connected
            for combo in itertools.combinations_with_replacement(slots, m):
                if not _slots_connected(n, combo):
                    continue
                for kind_row in itertools.product(kinds, repeat=n):
                    g = _build_graph(n, combo, kind_row)
                    if g is None:
                        continue
                    higher = [k == jsjmod.HYP_HIGHER_GENUS for k in kind_row]
                    if g.trivial_decomposition:
                        expected = True
                    else:
                        expected = all(higher[i] or higher[j] for i, j in combo)
                    yield g, expected


def _slots_connected(n, combo) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in combo:
        parent[find(i)] = find(j)
    return len({find(i) for i in range(n)}) == 1


def _build_graph(n, combo, kind_row):
    ends_needed = [0] * n
    for i, j in combo:
        ends_needed[i] += 1
        ends_needed[j] += 1
    if n == 1 and not combo:
        trivial = True
    else:
        trivial = False
    pieces = []
    for i in range(n):
        kind = kind_row[i]
        boundary = [jsjmod.BoundaryComponent(f"t{i}_{k}", 1) for k in range(ends_needed[i])]
        if kind == jsjmod.HYP_HIGHER_GENUS:
            boundary.append(jsjmod.BoundaryComponent(f"g{i}", 2))
        fibers = {}
        if kind == jsjmod.SEIFERT:
            fibers = {b.id: Slope(0, 1) for b in boundary}
        pieces.append(
            jsjmod.Piece(f"p{i}", kind, tuple(boundary), fibers, {})
        )
    counters = [0] * n
    edges = []
    for k, (i, j) in enumerate(combo):
        ba = f"t{i}_{counters[i]}"
        counters[i] += 1
        bb = f"t{j}_{counters[j]}"
        counters[j] += 1
        edges.append(jsjmod.Edge(f"e{k}", (f"p{i}", ba), (f"p{j}", bb), Gluing(0, 1, 1, 0)))
    return jsjmod.JsjGraph(tuple(pieces), tuple(edges), False, trivial)
