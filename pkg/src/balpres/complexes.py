"""Abstract simplicial complexes, bistellar moves and edge-path presentations."""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import networkx as nx

from .presentations import Presentation, tietze_distance
from .words import Word, cyclic_reduce


class ComplexError(ValueError):
    pass


class PachnerError(ComplexError):
    pass


def _faces(simplex: tuple, size: int):
    return itertools.combinations(simplex, size)


@dataclass(frozen=True)
class SimplicialComplex:
    """Stored by maximal faces, each a sorted tuple of integer vertex ids."""

    facets: frozenset

    def __init__(self, simplices: Iterable[Sequence[int]]):
        raw = {tuple(sorted(int(v) for v in s)) for s in simplices}
        for s in raw:
            if len(set(s)) != len(s) or not s:
                raise ComplexError(f"bad simplex {s}")
        proper = set()
        for t in raw:
            for k in range(1, len(t)):
                proper.update(_faces(t, k))
        maximal = raw - proper
        object.__setattr__(self, "facets", frozenset(maximal))

    # basic data --------------------------------------------------------
    @property
    def dim(self) -> int:
        return max((len(s) for s in self.facets), default=0) - 1

    def is_pure(self) -> bool:
        return len({len(s) for s in self.facets}) <= 1

    @property
    def vertices(self) -> list:
        return sorted({v for s in self.facets for v in s})

    def simplices(self, k: int) -> list:
        """All k-dimensional simplices (downward closure)."""
        out = set()
        for s in self.facets:
            if len(s) >= k + 1:
                out.update(_faces(s, k + 1))
        return sorted(out)

    def has_simplex(self, s: Sequence[int]) -> bool:
        ss = set(s)
        return any(ss <= set(f) for f in self.facets)

    @property
    def edges(self) -> list:
        return self.simplices(1)

    @property
    def triangles(self) -> list:
        return self.simplices(2)

    def f_vector(self) -> list:
        return [len(self.simplices(k)) for k in range(self.dim + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.f_vector()))

    def skeleton_graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.vertices)
        G.add_edges_from(self.edges)
        return G

    # io ----------------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"dim: {self.dim}"]
        lines += [" ".join(map(str, s)) for s in sorted(self.facets)]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "SimplicialComplex":
        simplices = []
        dim = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("dim:"):
                dim = int(line[4:])
                continue
            try:
                simplices.append([int(t) for t in line.split()])
            except ValueError:
                raise ComplexError(f"line {lineno}: vertex ids must be integers") from None
        T = SimplicialComplex(simplices)
        if dim is not None and simplices and T.dim != dim:
            raise ComplexError(f"declared dim {dim} but facets have dim {T.dim}")
        return T


def boundary_simplex(n: int) -> SimplicialComplex:
    """The boundary of the (n+1)-simplex on vertices 0..n+1."""
    return SimplicialComplex(_faces(tuple(range(n + 2)), n + 1))


def canonically_equal(A: SimplicialComplex, B: SimplicialComplex) -> bool:
    """Equality up to relabelling of vertices."""
    if sorted(map(len, A.facets)) != sorted(map(len, B.facets)):
        return False

    def incidence(T):
        G = nx.Graph()
        for v in T.vertices:
            G.add_node(("v", v), kind=0)
        for f in T.facets:
            G.add_node(("f", f), kind=len(f))
            for v in f:
                G.add_edge(("v", v), ("f", f))
        return G

    return nx.is_isomorphic(incidence(A), incidence(B), node_match=lambda a, b: a["kind"] == b["kind"])


# --------------------------------------------------------------------------
# bistellar moves


@dataclass(frozen=True)
class PachnerMoveSpec:
    i: int
    C: tuple
    fresh: Optional[int] = None

    def to_text(self) -> str:
        body = " | ".join(" ".join(map(str, s)) for s in self.C)
        tail = f" ; {self.fresh}" if self.fresh is not None else ""
        return f"{self.i} : {body}{tail}"

    @staticmethod
    def from_text(line: str) -> "PachnerMoveSpec":
        try:
            head, rest = line.split(":", 1)
            fresh = None
            if ";" in rest:
                rest, f = rest.split(";", 1)
                fresh = int(f)
            C = tuple(tuple(sorted(int(v) for v in part.split())) for part in rest.split("|"))
            return PachnerMoveSpec(int(head), C, fresh)
        except ValueError:
            raise ComplexError(f"malformed move line {line!r}") from None


def _move_parts(T: SimplicialComplex, spec: PachnerMoveSpec):
    """Validate; return (V, S, new facets)."""
    if not T.is_pure():
        raise PachnerError("complex is not pure")
    n = T.dim
    C = [tuple(sorted(s)) for s in spec.C]
    if not 1 <= spec.i <= n + 1:
        raise PachnerError(f"i must lie in 1..{n + 1}")
    if len(C) != spec.i or len(set(C)) != len(C):
        raise PachnerError(f"need {spec.i} distinct simplices, got {len(C)}")
    for s in C:
        if s not in T.facets:
            raise PachnerError(f"{s} is not a top simplex of the complex")
    if spec.i == 1:
        fresh = spec.fresh if spec.fresh is not None else max(T.vertices) + 1
        if fresh in T.vertices:
            raise PachnerError(f"vertex {fresh} already exists")
        V = set(C[0]) | {fresh}
        S = {fresh}
    else:
        if spec.fresh is not None:
            raise PachnerError("only i = 1 introduces a vertex")
        V = set().union(*map(set, C))
        if len(V) != n + 2:
            raise PachnerError("the simplices do not span an (n+1)-simplex")
        S = set()
        for s in C:
            miss = V - set(s)
            S |= miss
        if len(S) != spec.i:
            raise PachnerError("the simplices are not distinct faces of one (n+1)-simplex")
    core = V - S  # common face of C
    rest = [f for f in T.facets if f not in set(C)]
    # the interior of C (faces containing core) must not be used elsewhere
    if any(core <= set(f) for f in rest):
        raise PachnerError(f"face {tuple(sorted(core))} lies in simplices outside C")
    # the new interior face S must not exist yet
    if spec.i > 1 and any(S <= set(f) for f in T.facets):
        raise PachnerError(f"simplex {tuple(sorted(S))} already exists")
    new = [tuple(sorted(V - {v})) for v in sorted(V - S)]
    return V, S, new, rest


def apply_pachner(T: SimplicialComplex, spec: PachnerMoveSpec) -> tuple:
    """Apply a bistellar move; returns (new complex, inverse spec)."""
    V, S, new, rest = _move_parts(T, spec)
    out = SimplicialComplex(rest + new)
    n = T.dim
    if len(out.facets) != len(T.facets) + (n + 2 - spec.i) - spec.i:
        raise PachnerError("result is not a simplicial complex (simplices merged)")
    if spec.i == n + 1:
        inv = PachnerMoveSpec(1, tuple(new), fresh=next(iter(V - S)))
    else:
        inv = PachnerMoveSpec(n + 2 - spec.i, tuple(new))
    return out, inv


def find_pachner_moves(T: SimplicialComplex, i: int) -> list:
    """All valid i-moves, in a deterministic order."""
    n = T.dim
    out = []
    if i == 1:
        fresh = max(T.vertices) + 1
        cands = [PachnerMoveSpec(1, (s,), fresh) for s in sorted(T.facets)]
    else:
        cands = []
        for core in T.simplices(n + 1 - i):
            star = tuple(sorted(f for f in T.facets if set(core) <= set(f)))
            if len(star) == i:
                cands.append(PachnerMoveSpec(i, star))
    for spec in cands:
        try:
            _move_parts(T, spec)
        except PachnerError:
            continue
        out.append(spec)
    return out


def random_pachner_walk(T: SimplicialComplex, steps: int, rng: random.Random) -> tuple:
    trace = []
    for _ in range(steps):
        moves = [m for i in range(1, T.dim + 2) for m in find_pachner_moves(T, i)]
        spec = rng.choice(moves)
        T, _ = apply_pachner(T, spec)
        trace.append(spec)
    return T, trace


# --------------------------------------------------------------------------
# spanning trees and edge-path presentations


@dataclass(frozen=True)
class SpanningTree:
    root: int
    edges: frozenset

    def __init__(self, root: int, edges: Iterable[Sequence[int]]):
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "edges", frozenset(tuple(sorted(e)) for e in edges))


def is_spanning_tree(G: nx.Graph, edges: Iterable) -> bool:
    edges = list(edges)
    if len(edges) != G.number_of_nodes() - 1:
        return False
    H = nx.Graph()
    H.add_nodes_from(G.nodes)
    for u, v in edges:
        if not G.has_edge(u, v):
            return False
        H.add_edge(u, v)
    return nx.is_connected(H) if G.number_of_nodes() else True


def _check_connected(G: nx.Graph) -> None:
    if G.number_of_nodes() == 0 or not nx.is_connected(G):
        raise ComplexError("the 1-skeleton is not connected")


def spanning_tree(T, root: Optional[int] = None) -> SpanningTree:
    """Breadth-first tree of the 1-skeleton, neighbours in increasing order."""
    G = T.skeleton_graph() if isinstance(T, SimplicialComplex) else T
    _check_connected(G)
    if root is None:
        root = min(G.nodes)
    seen = {root}
    edges = []
    q = deque([root])
    while q:
        u = q.popleft()
        for v in sorted(G.neighbors(u)):
            if v not in seen:
                seen.add(v)
                edges.append((u, v))
                q.append(v)
    return SpanningTree(root, edges)


def random_spanning_tree(T, rng: random.Random) -> SpanningTree:
    G = T.skeleton_graph() if isinstance(T, SimplicialComplex) else T
    _check_connected(G)
    H = nx.Graph()
    for u, v in sorted(G.edges):
        H.add_edge(u, v, weight=rng.random())
    H.add_nodes_from(G.nodes)
    tree = nx.minimum_spanning_tree(H)
    return SpanningTree(min(G.nodes), tree.edges)


def edge_name(u: int, v: int) -> str:
    a, b = sorted((u, v))
    return f"e_{a}_{b}"


def pi1_presentation(T: SimplicialComplex, tree: Optional[SpanningTree] = None) -> Presentation:
    """One generator per edge outside the tree, one relator per triangle.

    A triangle a < b < c reads the edges a->b, b->c, c->a; an edge u < v is
    its generator when traversed from u to v and the inverse otherwise.
    """
    G = T.skeleton_graph()
    _check_connected(G)
    if tree is None:
        tree = spanning_tree(T)
    if not is_spanning_tree(G, tree.edges):
        raise ComplexError("not a spanning tree of the 1-skeleton")
    gens = [edge_name(u, v) for u, v in T.edges if (u, v) not in tree.edges]
    rels = []
    for a, b, c in T.triangles:
        syl = []
        for u, v, s in ((a, b, 1), (b, c, 1), (a, c, -1)):
            if (u, v) not in tree.edges:
                syl.append((edge_name(u, v), s))
        rels.append(Word(syl))
    return Presentation(gens, rels)


def tree_exchange_path(G: nx.Graph, T1: SpanningTree, T2: SpanningTree) -> list:
    """Exchanges (added edge, removed edge) turning T1 into T2.

    Each step adds an edge e of T2 missing from the current tree and removes
    an edge of the created cycle that is not in T2, so the number of steps is
    |T2 minus T1| <= V - 1.
    """
    _check_connected(G)
    for T in (T1, T2):
        if not is_spanning_tree(G, T.edges):
            raise ComplexError("input is not a spanning tree of the graph")
    cur = set(T1.edges)
    target = set(T2.edges)
    path = []
    for e in sorted(target - cur):
        H = nx.Graph(list(cur))
        H.add_nodes_from(G.nodes)
        cycle_path = nx.shortest_path(H, e[0], e[1])
        cyc = [tuple(sorted(p)) for p in zip(cycle_path, cycle_path[1:])]
        f = next(c for c in cyc if c not in target)
        cur.remove(f)
        cur.add(e)
        path.append((e, f))
    return path


def replay_exchanges(G: nx.Graph, T1: SpanningTree, path: Sequence) -> Optional[set]:
    """Apply exchanges, checking every intermediate is a spanning tree."""
    cur = set(T1.edges)
    for e, f in path:
        e, f = tuple(sorted(e)), tuple(sorted(f))
        if e in cur or f not in cur:
            return None
        cur = (cur - {f}) | {e}
        if not is_spanning_tree(G, cur):
            return None
    return cur


# --------------------------------------------------------------------------
# 2-complexes from presentations and graphs


def presentation_complex(P: Presentation) -> SimplicialComplex:
    """A simplicial 2-complex homotopy equivalent to the presentation complex.

    Vertex 0 is the base point; generator k is the circle 0 -> 2k+1 -> 2k+2 -> 0.
    A relator of length L gives a 3L-gon, triangulated by an annulus onto a
    ring of fresh vertices and a cone from a fresh apex over that ring.
    """
    for k, r in enumerate(P.relators):
        if r.is_empty():
            raise ComplexError(f"relator {k} is empty")
        if cyclic_reduce(r) != r:
            raise ComplexError(f"relator {k} is not cyclically reduced")
    idx = {g: k for k, g in enumerate(P.generators)}
    simplices = []
    for k in range(len(P.generators)):
        a, b = 2 * k + 1, 2 * k + 2
        simplices += [(0, a), (a, b), (b, 0)]
    nxt = 2 * len(P.generators) + 1
    for r in P.relators:
        ring = [0]
        for g, s in r.letters():
            a, b = 2 * idx[g] + 1, 2 * idx[g] + 2
            ring += [a, b, 0] if s == 1 else [b, a, 0]
        p = ring[:-1]
        L = len(p)
        q = list(range(nxt, nxt + L))
        apex = nxt + L
        nxt = apex + 1
        for t in range(L):
            simplices.append((p[t], p[(t + 1) % L], q[t]))
            simplices.append((p[(t + 1) % L], q[t], q[(t + 1) % L]))
            simplices.append((apex, q[t], q[(t + 1) % L]))
    if not simplices:
        simplices = [(0,)]
    return SimplicialComplex(simplices)


def fill_cycle_basis(graph) -> tuple:
    """Fill a connected multigraph to a simply connected 2-complex.

    Loops become filled triangles, each extra parallel edge is subdivided and
    the digon filled, then every fundamental cycle of a breadth-first tree
    (rooted at a centre) is fanned into L - 2 triangles.  Returns the complex
    and the vertex numbering of the input nodes.
    """
    M = nx.MultiGraph(graph)
    if M.number_of_nodes() == 0 or not nx.is_connected(M):
        raise ComplexError("graph must be connected")
    label = {v: k for k, v in enumerate(sorted(M.nodes, key=repr))}
    nxt = len(label)
    simple = nx.Graph()
    simple.add_nodes_from(label.values())
    tris = []
    seen_pairs = set()
    for u, v in sorted((tuple(sorted((label[a], label[b]))) for a, b in M.edges())):
        if u == v:
            a, b = nxt, nxt + 1
            nxt += 2
            simple.add_edges_from([(u, a), (a, b), (b, u)])
            tris.append((u, a, b))
        elif (u, v) in seen_pairs:
            m = nxt
            nxt += 1
            simple.add_edges_from([(u, m), (m, v)])
            tris.append((u, v, m))
        else:
            seen_pairs.add((u, v))
            simple.add_edge(u, v)
    root = min(nx.center(simple))
    tree = spanning_tree(simple, root)
    H = nx.Graph(list(tree.edges))
    H.add_nodes_from(simple.nodes)
    for u, v in sorted(simple.edges):
        e = tuple(sorted((u, v)))
        if e in tree.edges:
            continue
        cyc = nx.shortest_path(H, v, u)  # tree path closes the cycle with e
        c0 = cyc[0]
        for t in range(1, len(cyc) - 1):
            tris.append((c0, cyc[t], cyc[t + 1]))
    simplices = list(simple.edges) + tris
    if not simplices:
        simplices = [(v,) for v in simple.nodes]
    return SimplicialComplex(simplices), label


# --------------------------------------------------------------------------
# move invariance of the edge-path presentation


def compatible_trees(A: SimplicialComplex, B: SimplicialComplex) -> tuple:
    """Spanning trees of A and B agreeing on as many common edges as possible."""
    common = set(A.edges) & set(B.edges)

    def tree(T):
        G = nx.Graph()
        G.add_nodes_from(T.vertices)
        for e in T.edges:
            G.add_edge(*e, weight=0 if e in common else 1)
        return SpanningTree(min(T.vertices), nx.minimum_spanning_tree(G).edges)

    return tree(A), tree(B)


def pachner_tietze_distance(T: SimplicialComplex, spec: Optional[PachnerMoveSpec], d: int = 2,
                  max_depth: int = 10, max_states: int = 200_000,
                  weight: float = 3.0) -> Optional[int]:
    """Number of Tietze moves found between the edge-path presentations
    before and after a move (labelled search from the larger to the smaller
    one).  With weight > 1 this is an upper bound on the distance."""
    if spec is None:
        return 0
    T2, _ = apply_pachner(T, spec)
    tA, tB = compatible_trees(T, T2)
    P = pi1_presentation(T, tA)
    Q = pi1_presentation(T2, tB)
    if Q.length > P.length:
        P, Q = Q, P
    res = tietze_distance(P, Q, d=d, max_depth=max_depth, max_states=max_states, labelled=True,
                          weight=weight)
    return res.distance
