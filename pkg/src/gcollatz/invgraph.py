"""Backward mapping and bounded inverse-orbit graph construction.

The preimage set of n is {d*n} plus, for each residue class r in [1, d),
the candidate m = (d*n - beta*R)/alpha with R the kappa0-adjusted residue,
kept when the division is exact, m >= 1, and m is actually in class r.
Graph edges point forward: (m, n) means T(m) = n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from gcollatz.core import Triplet, step, validate_triplet


def preimages(t: Triplet, n: int) -> set[int]:
    """All m >= 1 with T(m) = n."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    d, alpha, beta, kappa = t.d, t.alpha, t.beta, t.kappa0
    out = {d * n}
    dn = d * n
    for r in range(1, d):
        R = r if kappa == 1 else d - r
        m = dn - beta * R
        if m % alpha == 0:
            m //= alpha
            if m > 0 and m % d == r:
                out.add(m)
    return out


@dataclass(frozen=True)
class InverseGraph:
    triplet: Triplet
    roots: tuple[int, ...]
    nodes: tuple[int, ...]          # ascending
    edges: tuple[tuple[int, int], ...]  # ascending (m, n) pairs, T(m) = n
    truncated: bool


def build_inverse_graph(
    t: Triplet,
    roots,
    max_depth: int,
    max_nodes: int = 10**6,
) -> InverseGraph:
    """Breadth-first preimage expansion from the roots.

    Frontiers expand in ascending order; within the node budget every
    preimage found joins the graph, and edges between two present nodes are
    always recorded (this closes cycle edges).  truncated is set when the
    node cap refused a node, or when the depth horizon cut off unexplored
    preimages.
    """
    roots = sorted(set(roots))
    if not roots:
        raise ValueError("need at least one root")
    if max_depth < 0 or max_nodes < 1:
        raise ValueError("need max_depth >= 0 and max_nodes >= 1")
    nodes: set[int] = set()
    edges: set[tuple[int, int]] = set()
    truncated = False
    for r in roots:
        if len(nodes) < max_nodes:
            nodes.add(r)
        else:
            truncated = True
    frontier = sorted(nodes)
    for _ in range(max_depth):
        nxt = []
        for n in frontier:
            for m in sorted(preimages(t, n)):
                if m in nodes:
                    edges.add((m, n))
                elif len(nodes) < max_nodes:
                    nodes.add(m)
                    edges.add((m, n))
                    nxt.append(m)
                else:
                    truncated = True
        frontier = sorted(nxt)
    # close edges into the final frontier and detect a cut-off horizon
    for n in frontier:
        for m in preimages(t, n):
            if m in nodes:
                edges.add((m, n))
            else:
                truncated = True
    return InverseGraph(
        triplet=t,
        roots=tuple(roots),
        nodes=tuple(sorted(nodes)),
        edges=tuple(sorted(edges)),
        truncated=truncated,
    )


def export_dot(g: InverseGraph) -> str:
    """DOT digraph, nodes and edges in ascending order; byte-stable."""
    lines = ["digraph inverse_orbit {"]
    for n in g.nodes:
        lines.append(f"  {n};")
    for m, n in g.edges:
        lines.append(f"  {m} -> {n};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(g: InverseGraph) -> str:
    doc = {
        "schema": "gcollatz.inverse_graph/1",
        "triplet": g.triplet.as_dict(),
        "roots": list(g.roots),
        "nodes": list(g.nodes),
        "edges": [list(e) for e in g.edges],
        "truncated": g.truncated,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def parse_json(text: str) -> InverseGraph:
    """Inverse of export_json; revalidates the triplet."""
    doc = json.loads(text)
    if doc.get("schema") != "gcollatz.inverse_graph/1":
        raise ValueError(f"unsupported graph document {doc.get('schema')!r}")
    tp = doc["triplet"]
    t = validate_triplet(tp["d"], tp["alpha"], tp["beta"], tp["kappa0"])
    return InverseGraph(
        triplet=t,
        roots=tuple(doc["roots"]),
        nodes=tuple(doc["nodes"]),
        edges=tuple((m, n) for m, n in doc["edges"]),
        truncated=doc["truncated"],
    )
