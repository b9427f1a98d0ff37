"""Series-parallel composition trees and the per-component quantities the
SPG protocol is built from: cheapest connection cost phi_C(l), first OPT
load lstar_C, and the leader charge psi_C."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .costs import GameInstance, classify
from .errors import BadInput, EdgeCoverage, InfiniteCost, TerminalMismatch
from .graph import Graph

log = logging.getLogger(__name__)

LEAF, SERIES, PARALLEL = "leaf", "series", "parallel"


@dataclass(eq=False)
class SPNode:
    kind: str
    source: int
    sink: int
    edge: int | None = None
    left: SPNode | None = None
    right: SPNode | None = None
    index: int = -1
    edges: frozenset = field(default_factory=frozenset)

    @property
    def children(self) -> tuple:
        return () if self.kind == LEAF else (self.left, self.right)

    def walk(self):
        """Pre-order traversal."""
        yield self
        for c in self.children:
            yield from c.walk()

    def to_description(self):
        if self.kind == LEAF:
            return {"edge": self.edge}
        tag = "S" if self.kind == SERIES else "P"
        return [tag, self.left.to_description(), self.right.to_description()]


@dataclass(eq=False)
class SPTree:
    root: SPNode
    nodes: list

    def __eq__(self, other):
        if not isinstance(other, SPTree):
            return NotImplemented
        return self.root.to_description() == other.root.to_description()

    __hash__ = None

    @property
    def leaves(self) -> dict:
        return {n.edge: n for n in self.nodes if n.kind == LEAF}


def parse_sp_tree(graph: Graph, desc) -> SPTree:
    """Build a tree from the nested form ``["P", ["S", {"edge": 0}, {"edge": 1}], {"edge": 2}]``.

    Compositions with more than two operands are associated left-deep.
    """
    seen = []

    def build(d):
        if isinstance(d, dict):
            if set(d) != {"edge"}:
                raise BadInput(f"bad leaf {d!r}")
            eid = d["edge"]
            if not isinstance(eid, int) or not 0 <= eid < graph.m:
                raise EdgeCoverage(f"leaf references unknown edge {eid!r}")
            seen.append(eid)
            e = graph.edges[eid]
            return SPNode(LEAF, e.tail, e.head, edge=eid, edges=frozenset([eid]))
        if not isinstance(d, (list, tuple)) or len(d) < 3 or d[0] not in ("S", "P"):
            raise BadInput(f"bad composition {d!r}")
        kids = [build(x) for x in d[1:]]
        node = kids[0]
        for nxt in kids[1:]:
            node = compose(d[0], node, nxt)
        return node

    root = build(desc)
    if sorted(seen) != list(range(graph.m)):
        raise EdgeCoverage("tree must reference every edge exactly once")
    nodes = list(root.walk())
    for i, n in enumerate(nodes):
        n.index = i
    return SPTree(root, nodes)


def compose(tag: str, a: SPNode, b: SPNode) -> SPNode:
    if tag == "S":
        if a.sink != b.source:
            raise TerminalMismatch(f"series glue {a.sink} != {b.source}")
        return SPNode(SERIES, a.source, b.sink, left=a, right=b, edges=a.edges | b.edges)
    if (a.source, a.sink) != (b.source, b.sink):
        raise TerminalMismatch(f"parallel terminals {(a.source, a.sink)} != {(b.source, b.sink)}")
    return SPNode(PARALLEL, a.source, a.sink, left=a, right=b, edges=a.edges | b.edges)


def compute_phi(tree: SPTree, instance: GameInstance) -> list:
    """phi per node index, as tuples over loads 0..n_max."""
    if not instance.finite:
        raise InfiniteCost("phi needs finite costs")
    n_max = instance.n_max
    phi = [None] * len(tree.nodes)
    for node in reversed(tree.nodes):  # children before parents
        if node.kind == LEAF:
            c = instance.costs[node.edge]
            phi[node.index] = tuple(c(l) for l in range(n_max + 1))
        else:
            a, b = phi[node.left.index], phi[node.right.index]
            if node.kind == SERIES:
                phi[node.index] = tuple(x + y for x, y in zip(a, b))
            else:
                phi[node.index] = tuple(min(x, y) for x, y in zip(a, b))
    return phi


def compute_lstar(tree: SPTree, opt_table, n_max: int) -> list:
    """First load l <= n_max with OPT(l) touching the component, else None ("never")."""
    lstar = [None] * len(tree.nodes)
    for l in range(1, n_max + 1):
        used = set(opt_table.path(l))
        for node in tree.nodes:
            if lstar[node.index] is None and node.edges & used:
                lstar[node.index] = l
    return lstar


@dataclass
class SPAnnotations:
    phi: list
    lstar: list
    psi: list
    psi_edge: dict
    notes: list = field(default_factory=list)


def compute_psi(tree: SPTree, phi: list, lstar: list, n_max: int,
                strictly_concave: bool = True) -> SPAnnotations:
    """Top-down psi assignment.

    Series splits test the two "child is cheap alone" cases in order, then
    fall back to the split proportional to phi at lstar_C. A series node no
    OPT path ever enters uses the same rule evaluated at l = n_max.
    """
    notes = []
    if not strictly_concave:
        notes.append("leaf costs are not strictly concave; psi strictness may fail")
    psi = [None] * len(tree.nodes)
    psi[tree.root.index] = phi[tree.root.index][1]
    for node in tree.nodes:  # pre-order: parents first
        q = psi[node.index]
        if node.kind == PARALLEL:
            psi[node.left.index] = psi[node.right.index] = q
        elif node.kind == SERIES:
            l = lstar[node.index]
            if l is None:
                l = n_max
                notes.append(f"node {node.index}: never on OPT, split at l = n_max")
            p1, p2 = phi[node.left.index], phi[node.right.index]
            total = phi[node.index][l]
            if total == 0:
                s1 = s2 = Fraction(0)
            else:
                share1 = q * p1[l] / total
                share2 = q * p2[l] / total
                first = p1[1] < share1
                second = p2[1] < share2
                if first and second:
                    notes.append(f"node {node.index}: both series sub-cases hold; first applied")
                if first:
                    s1 = p1[1]
                    s2 = q - s1
                elif second:
                    s2 = p2[1]
                    s1 = q - s2
                else:
                    s1, s2 = share1, share2
            psi[node.left.index], psi[node.right.index] = s1, s2
    for msg in notes:
        log.debug(msg)
    psi_edge = {n.edge: psi[n.index] for n in tree.nodes if n.kind == LEAF}
    return SPAnnotations(phi, lstar, psi, psi_edge, notes)


def annotate(tree: SPTree, instance: GameInstance, opt_table) -> SPAnnotations:
    phi = compute_phi(tree, instance)
    lstar = compute_lstar(tree, opt_table, instance.n_max)
    strict = all(classify(c).strictly_concave for c in instance.costs)
    return compute_psi(tree, phi, lstar, instance.n_max, strictly_concave=strict)


def psi_violations(tree: SPTree, ann: SPAnnotations, n_max: int) -> list:
    """Exact check of the composition identities and the psi bounds; returns
    human-readable violations (empty when everything holds)."""
    bad = []
    phi, lstar, psi = ann.phi, ann.lstar, ann.psi
    for node in tree.nodes:
        i = node.index
        f = phi[i]
        if f[0] != 0 or any(b < a for a, b in zip(f, f[1:])):
            bad.append(f"node {i}: phi not a cost table")
        if node.kind == SERIES:
            a, b = node.left.index, node.right.index
            if psi[a] + psi[b] != psi[i]:
                bad.append(f"node {i}: series psi sum")
            if lstar[a] != lstar[i] or lstar[b] != lstar[i]:
                bad.append(f"node {i}: series lstar")
            if any(f[l] != phi[a][l] + phi[b][l] for l in range(n_max + 1)):
                bad.append(f"node {i}: series phi")
        elif node.kind == PARALLEL:
            a, b = node.left.index, node.right.index
            if not psi[a] == psi[b] == psi[i]:
                bad.append(f"node {i}: parallel psi")
            for child in (a, b):
                if lstar[child] is not None and (lstar[i] is None or lstar[i] > lstar[child]):
                    bad.append(f"node {i}: parallel lstar")
            if any(f[l] != min(phi[a][l], phi[b][l]) for l in range(n_max + 1)):
                bad.append(f"node {i}: parallel phi")
        if psi[i] > f[1]:
            bad.append(f"node {i}: psi {psi[i]} > phi(1) {f[1]}")
        if lstar[i] is not None:
            for l in range(max(lstar[i], 2), n_max + 1):
                if not psi[i] > f[l] / l:
                    bad.append(f"node {i}: psi {psi[i]} <= phi({l})/{l}")
            if lstar[i] == 1 and psi[i] != f[1]:
                bad.append(f"node {i}: lstar 1 but psi != phi(1)")
    return bad


def component_paths_psi_violations(tree: SPTree, graph: Graph, ann: SPAnnotations) -> list:
    """Every s_C -> t_C path inside component C has psi-sum psi_C."""
    from .graph import enumerate_paths

    bad = []
    for node in tree.nodes:
        sub = Graph(graph.vertices, graph.edges)
        for path in enumerate_paths(sub, node.source, node.sink):
            if not set(path) <= node.edges:
                continue
            if sum(ann.psi_edge[e] for e in path) != ann.psi[node.index]:
                bad.append(f"node {node.index}: path {path}")
    return bad
