"""Van Kampen area by breadth-first rewriting, and checks on generator maps.

States are cyclic words: cyclically reduced, taken up to rotation and
inversion (area is invariant under both).  One step replaces a nonempty
subword r1 of the current cyclic word by r2^-1, where r1 r2 is a cyclic
conjugate of a relator or its inverse; that is one 2-cell.  In a minimal
diagram for a cyclically reduced nonempty word some cell has an edge on the
boundary, and deleting it is such a step, so pure insertions (r1 empty) are
never needed for minimal counts; they stay available behind a flag.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .presentations import (
    Op4,
    Op5inv,
    Presentation,
    TietzeScript,
    _State,
    _min_rotation,
    replay,
)
from .words import Word, WordError, cyclic_reduce, free_reduce


@dataclass(frozen=True)
class AreaBudget:
    max_cells: int = 12
    max_len: Optional[int] = None

    def resolved_len(self, P: Presentation, w: Word) -> int:
        if self.max_len is not None:
            return self.max_len
        return w.length + self.max_cells * max((r.length for r in P.relators), default=0)


def exact_budget(P: Presentation, w: Word, max_cells: int) -> AreaBudget:
    """A budget under which a returned area is exact."""
    maxrel = max((r.length for r in P.relators), default=0)
    return AreaBudget(max_cells, w.length + max_cells * maxrel)


@dataclass
class AreaResult:
    area: Optional[int]
    reason: str
    states: int
    trace: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.area is not None


@dataclass(frozen=True)
class Step:
    """One cell: relator index, orientation, rotation offset, letters taken
    from the relator and the position of the match in the current word."""

    relator: int
    orientation: int
    offset: int
    take: int
    position: int

    def to_text(self) -> str:
        return f"{self.relator} {self.offset} {self.orientation} {self.position} {self.take}"


def _ints(P: Presentation, w: Word) -> tuple:
    idx = {g: k + 1 for k, g in enumerate(P.generators)}
    try:
        return tuple(idx[n] * s for n, s in w.letters())
    except KeyError as exc:
        raise WordError(f"generator {exc.args[0]!r} is not in the presentation") from None


def _cyc_reduce(u: list) -> tuple:
    st: list = []
    for a in u:
        if st and st[-1] == -a:
            st.pop()
        else:
            st.append(a)
    i, j = 0, len(st) - 1
    while i < j and st[i] == -st[j]:
        i += 1
        j -= 1
    return tuple(st[i:j + 1])


def _inv(u: tuple) -> tuple:
    return tuple(-a for a in reversed(u))


def _normal(u: tuple) -> tuple:
    if not u:
        return u
    a = _min_rotation(u)
    b = _min_rotation(_inv(u))
    return min(a, b)


def _pieces(rels: Sequence[tuple], insertions: bool) -> dict:
    """Map r1 -> list of (r2^-1, Step-without-position)."""
    table: dict = {}
    for k, r in enumerate(rels):
        if not r:
            continue
        for orient, rr in ((1, r), (-1, _inv(r))):
            L = len(rr)
            for off in range(L):
                c = rr[off:] + rr[:off]
                for take in range(0 if insertions else 1, L + 1):
                    r1 = c[:take]
                    repl = _inv(c[take:])
                    table.setdefault(r1, []).append((repl, (k, orient, off, take)))
    for key in table:
        # deterministic and duplicate-free
        seen = {}
        for repl, meta in table[key]:
            seen.setdefault(repl, meta)
        table[key] = sorted(seen.items())
    return table


def _successors(u: tuple, table: dict, maxrel: int, insertions: bool):
    L = len(u)
    if L == 0:
        if insertions and () in table:
            for repl, meta in table[()]:
                yield _cyc_reduce(list(repl)), meta, 0
        return
    uu = u + u
    for p in range(L):
        for k in range(0 if insertions else 1, min(maxrel, L) + 1):
            r1 = uu[p:p + k]
            opts = table.get(r1)
            if not opts:
                continue
            rest = uu[p + k:p + L]
            for repl, meta in opts:
                yield _cyc_reduce(list(repl) + list(rest)), meta, p


def area_upper(P: Presentation, w: Word, budget: AreaBudget = AreaBudget(),
               insertions: bool = False, max_states: int = 500_000) -> AreaResult:
    """Least number of cells in a rewrite of w to the empty word, if within budget."""
    rels = [_ints(P, r) for r in P.relators]
    maxrel = max((len(r) for r in rels), default=0)
    start_raw = _cyc_reduce(list(_ints(P, w)))
    max_len = budget.resolved_len(P, w)
    table = _pieces(rels, insertions)
    start = _normal(start_raw)
    if not start:
        return AreaResult(0, "found", 1, [])
    parent = {start: None}
    frontier = [start]
    pruned = False
    for depth in range(1, budget.max_cells + 1):
        nxt_frontier = []
        for u in frontier:
            # rotation/inversion applied to reach the normal form of u is kept
            # implicit: the trace records positions in the normal form itself
            for v_raw, meta, pos in _successors(u, table, maxrel, insertions):
                if len(v_raw) > max_len:
                    pruned = True
                    continue
                v = _normal(v_raw)
                if v in parent:
                    continue
                parent[v] = (u, Step(meta[0], meta[1], meta[2], meta[3], pos))
                if not v:
                    trace = []
                    cur = v
                    while parent[cur] is not None:
                        trace.append(parent[cur][1])
                        cur = parent[cur][0]
                    return AreaResult(depth, "found", len(parent), trace[::-1])
                if len(parent) > max_states:
                    return AreaResult(None, "state budget exhausted", len(parent))
                nxt_frontier.append(v)
        frontier = nxt_frontier
        if not frontier:
            reason = "length budget exhausted" if pruned else "word is not trivial"
            return AreaResult(None, reason, len(parent))
    return AreaResult(None, "cell budget exhausted", len(parent))


def replay_trace(P: Presentation, w: Word, trace: Sequence[Step]) -> bool:
    """Re-apply a trace; True iff every step matches and the end is empty."""
    rels = [_ints(P, r) for r in P.relators]
    u = _normal(_cyc_reduce(list(_ints(P, w))))
    for st in trace:
        r = rels[st.relator] if st.orientation == 1 else _inv(rels[st.relator])
        c = r[st.offset:] + r[:st.offset]
        r1, r2 = c[:st.take], c[st.take:]
        L = len(u)
        if L:
            uu = u + u
            if st.take > L or uu[st.position:st.position + st.take] != r1:
                return False
            rest = uu[st.position + st.take:st.position + L]
        else:
            if st.take:
                return False
            rest = ()
        u = _normal(_cyc_reduce(list(_inv(r2)) + list(rest)))
    return u == ()


def conjugate_oracle(P: Presentation, w: Word, max_factors: int, conj_len: int) -> Optional[int]:
    """Least k <= max_factors with w = prod of k conjugates c r^{+-1} c^-1
    (|c| <= conj_len) in the free group, found by meet in the middle."""
    rels = [_ints(P, r) for r in P.relators if r.syl]
    n = len(P.generators)
    letters = [a for g in range(1, n + 1) for a in (g, -g)]
    conjs = set()
    for L in range(conj_len + 1):
        for c in itertools.product(letters, repeat=L):
            if any(c[t] == -c[t + 1] for t in range(L - 1)):
                continue
            for r in rels:
                for rr in (r, _inv(r)):
                    conjs.add(_free(c + rr + _inv(c)))
    conjs = sorted(conjs)
    target = _free(_ints(P, w))
    if not target:
        return 0
    products = {0: {()}}

    def level(k):
        if k not in products:
            prev = level(k - 1)
            products[k] = {_free(a + b) for a in prev for b in conjs}
        return products[k]

    for k in range(1, max_factors + 1):
        a_k = (k + 1) // 2
        b_k = k // 2
        A = level(a_k)
        B = level(b_k)
        for a in A:
            if _free(_inv(a) + target) in B:
                return k
    return None


def _free(u) -> tuple:
    st: list = []
    for a in u:
        if st and st[-1] == -a:
            st.pop()
        else:
            st.append(a)
    return tuple(st)


# --------------------------------------------------------------------------
# maps between presentations

SATISFIED, VIOLATED, UNKNOWN = "satisfied", "violated", "unknown"


@dataclass
class EffectiveMap:
    source: Presentation
    target: Presentation
    image: dict

    def __post_init__(self):
        missing = set(self.source.generators) - set(self.image)
        if missing:
            raise WordError(f"no image for generators {sorted(missing)}")
        tg = set(self.target.generators)
        for a, w in list(self.image.items()):
            if w.generators() - tg:
                raise WordError(f"image of {a!r} uses letters outside the target")
            self.image[a] = free_reduce(w)

    def apply(self, w: Word) -> Word:
        return free_reduce(w.substitute(self.image))

    def compose(self, other: "EffectiveMap") -> "EffectiveMap":
        """other after self."""
        return EffectiveMap(self.source, other.target,
                            {a: other.apply(w) for a, w in self.image.items()})


def identity_map(P: Presentation) -> EffectiveMap:
    return EffectiveMap(P, P, {g: Word.gen(g) for g in P.generators})


def _area_verdict(P: Presentation, w: Word, N: int, budget: AreaBudget) -> tuple:
    cells = min(budget.max_cells, N - 1) if N >= 1 else -1
    if cells < 0:
        return VIOLATED, None
    b = AreaBudget(cells, budget.max_len)
    res = area_upper(P, w, b)
    if res.area is not None:
        return SATISFIED, res.area
    exact = b.resolved_len(P, w) >= exact_budget(P, w, cells).max_len
    if exact and cells == N - 1 and res.reason in ("cell budget exhausted", "word is not trivial"):
        return VIOLATED, None
    return UNKNOWN, None


@dataclass
class Verdict:
    lengths: dict
    areas: dict
    lower: dict = field(default_factory=dict)

    @property
    def overall(self) -> str:
        vals = list(self.lengths.values()) + [v for v, _ in self.areas.values()]
        if VIOLATED in vals:
            return VIOLATED
        if UNKNOWN in vals:
            return UNKNOWN
        return SATISFIED


def map_type_check(F: EffectiveMap, L: int, N: int, budget: AreaBudget = AreaBudget(),
                   M: Optional[int] = None) -> Verdict:
    """Check image lengths < L and relator-image areas < N.

    With M given, also reports per generator whether a diagram of fewer than
    M cells was found for F(a); that is evidence only, never a proof.
    """
    lengths = {a: (SATISFIED if w.length < L else VIOLATED) for a, w in F.image.items()}
    areas = {}
    for k, r in enumerate(F.source.relators):
        areas[k] = _area_verdict(F.target, F.apply(r), N, budget)
    lower = {}
    if M is not None:
        for a, w in F.image.items():
            res = area_upper(F.target, w, AreaBudget(min(M - 1, budget.max_cells), budget.max_len))
            lower[a] = "diagram below M found" if res.area is not None else f"none found ({res.reason})"
    return Verdict(lengths, areas, lower)


def effective_iso_check(F: EffectiveMap, G: EffectiveMap, L: int, N: int,
                        budget: AreaBudget = AreaBudget()) -> dict:
    if F.target.generators != G.source.generators or G.target.generators != F.source.generators:
        raise WordError("maps do not run between the same two presentations")
    out = {"F": map_type_check(F, L, N, budget).overall, "G": map_type_check(G, L, N, budget).overall}
    GF = F.compose(G)
    FG = G.compose(F)
    rt = []
    for a in F.source.generators:
        rt.append(_area_verdict(F.source, GF.image[a] * Word.gen(a, -1), N, budget)[0])
    for b in G.source.generators:
        rt.append(_area_verdict(G.source, FG.image[b] * Word.gen(b, -1), N, budget)[0])
    out["round trips"] = VIOLATED if VIOLATED in rt else UNKNOWN if UNKNOWN in rt else SATISFIED
    vals = list(out.values())
    out["overall"] = VIOLATED if VIOLATED in vals else UNKNOWN if UNKNOWN in vals else SATISFIED
    return out


def script_to_map(s: TietzeScript, P: Presentation, Q: Optional[Presentation] = None):
    """The map P -> Q obtained by composing one map per move, with its type.

    A generator removed by Op5inv from its relator ``g w`` is sent to w^-1
    (g equals w^-1 in the group); every other generator is sent to itself.
    A single move has type (2, 3) for Op4 and (d, 2) otherwise; a script of
    N > 1 moves gets (d^N, 1 + 2^N).
    """
    end = replay(P, s)
    if Q is not None and (end.generators != Q.generators or end.relators != Q.relators):
        raise WordError("script does not end at the given presentation")
    Q = end
    image = {g: Word.gen(g) for g in P.generators}
    st = _State(P)
    for m in s.moves:
        if isinstance(m, Op5inv):
            r = next(r for r in st.rels if r and r[0][0] == m.gen)
            w_inv = Word(r[1:]).inverse()
            image = {a: free_reduce(w.substitute({m.gen: w_inv})) for a, w in image.items()}
        st.apply(m)
    F = EffectiveMap(P, Q, image)
    N = len(s.moves)
    if N == 0:
        return F, (2, 1)
    if N == 1:
        return F, ((2, 3) if isinstance(s.moves[0], Op4) else (s.d, 2))
    return F, (s.d ** N, 1 + 2 ** N)
