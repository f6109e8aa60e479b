"""Rewriting presentations into short-relator form, with Tietze certificates.

Every public operation returns ``(Q, script)`` where ``replay(P, script)``
reproduces ``Q`` exactly.  Each introduced generator comes with exactly one
relator, so #relators - #generators never changes; the builder asserts this
after every move.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .presentations import (
    Op1,
    Op3,
    Op5,
    Presentation,
    ScriptBuilder,
    TietzeScript,
    abelian_invariants,
)
from .words import Word

PER_RELATOR = "per_relator"
GLOBAL = "global"
VARIANTS = (PER_RELATOR, GLOBAL)


class PreconditionError(ValueError):
    pass


class _Builder(ScriptBuilder):
    """ScriptBuilder that tracks which input relator each relator descends from."""

    def __init__(self, P: Presentation, d: int = 3):
        super().__init__(P, d)
        self.cluster = list(range(len(P.relators)))
        self.offset = len(P.relators) - len(P.generators)

    def emit(self, m) -> None:
        super().emit(m)
        if len(self.rels) - len(self.gens) != self.offset:
            raise AssertionError(f"balance offset changed by {m!r}")

    def fresh(self, name: str) -> str:
        taken = set(self.gens)
        while name in taken:
            name += "_"
        return name

    def define(self, name: str, letters: list, cluster: int) -> int:
        """Add ``name = letters`` as relator ``letters^-1 name``; return its index."""
        self.emit(Op5(len(letters) + 1, name, Word(letters).inverse()))
        k = len(self.rels) - 1
        self.cluster.append(cluster)
        self.rotate(k, 1)
        return k


def _letters_len(P: Presentation) -> int:
    return sum(r.length for r in P.relators)


# --------------------------------------------------------------------------
# stage 1: halving


def _halve(b: _Builder, shared: bool) -> int:
    rnd = 0
    while True:
        targets = [i for i, r in enumerate(b.rels) if len(r) > 3]
        if not targets:
            return rnd
        rnd += 1
        defs: dict = {}
        new_defs: list = []
        plan = []
        for i in targets:
            r = list(b.rels[i])
            c = b.cluster[i]
            chunks = []
            for ci, pos in enumerate(range(0, len(r) - 1, 2)):
                chunk = (r[pos], r[pos + 1])
                key = chunk if shared else (c, chunk)
                if key not in defs:
                    name = b.fresh(f"_r{c}_d{rnd}_c{ci}")
                    defs[key] = b.define(name, list(chunk), c)
                    new_defs.append(defs[key])
                chunks.append((pos, defs[key]))
            plan.append((i, chunks))
        for i, chunks in plan:
            for pos, k in reversed(chunks):
                b.replace_at(i, pos, 2, k)
        for k in new_defs:
            b.emit(Op3(k))  # now reads g^-1 a b


def halve_relators(P: Presentation, shared: bool = True) -> tuple:
    """Split relators longer than 3 into length-2 chunks, one new generator
    per distinct chunk per round, until every relator has length <= 3."""
    b = _Builder(P)
    _halve(b, shared)
    return b.current(), b.script()


# --------------------------------------------------------------------------
# stage 2: occurrence splitting


def _split(b: _Builder, variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    long = [i for i, r in enumerate(b.rels) if len(r) > 3]
    if long:
        raise PreconditionError(f"relators {long} are longer than 3; halve first")
    groups: dict = defaultdict(list)
    for i, r in enumerate(b.rels):
        for p, (g, s) in enumerate(r):
            key = (g, b.cluster[i]) if variant == PER_RELATOR else (g, None)
            groups[key].append((i, p, s))
    for (f, c), occ in sorted(groups.items(), key=lambda kv: (kv[0][0], -1 if kv[0][1] is None else kv[0][1])):
        T = len(occ)
        if T <= 3:
            continue
        home = b.cluster[occ[0][0]] if c is None else c
        prefix = f"_s{f}" if c is None else f"_r{c}_s{f}"
        idx, names = [], []
        for k in range(1, T - 2):
            names.append(b.fresh(f"{prefix}_{k}"))
            idx.append(b.define(names[-1], [(f, 1)], home))
        # relator idx[k-1] reads f^-1 w_k
        assign = [None, None] + list(range(T - 4)) + [T - 4, T - 4]
        for (i, p, s), a in zip(occ, assign):
            if a is None:
                continue
            b.orient(idx[a], f, -s)
            b.replace_at(i, p, 1, idx[a])
        # turn the star w_k = f into the chain f = w_1 = w_2 = ...
        for k in range(len(idx) - 1, 0, -1):
            r = b.rels[idx[k]]
            p = next(t for t, a in enumerate(r) if a[0] == f)
            b.orient(idx[k - 1], f, -r[p][1])
            b.replace_at(idx[k], p, 1, idx[k - 1])
        # chain relators read f w_1^-1, w_1 w_2^-1, ...
        b.orient(idx[0], f, 1)
        for k in range(1, len(idx)):
            b.orient(idx[k], names[k - 1], 1)


def _pad(b: _Builder) -> None:
    """Pad each one-letter relator g^e to g^e g^e g^-e (same generator only)."""
    for i, r in enumerate(b.rels):
        if len(r) == 1:
            g, e = r[0]
            b.emit(Op1(i, 1, b.gens.index(g), e))


def split_occurrences(P: Presentation, variant: str = GLOBAL) -> tuple:
    b = _Builder(P)
    _split(b, variant)
    return b.current(), b.script()


def rewrite_nice(P: Presentation, variant: str = GLOBAL) -> tuple:
    """Relators of length <= 3 with each generator in at most 3 relators
    (global) or 3 per input relator (per_relator)."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    b = _Builder(P)
    _halve(b, shared=(variant == GLOBAL))
    _split(b, variant)
    _pad(b)
    return b.current(), b.script()


# --------------------------------------------------------------------------
# compression


def _reduced_words(gens, length: int):
    letters = [(g, s) for g in gens for s in (1, -1)]
    out = [()]
    for _ in range(length):
        out = [w + (a,) for w in out for a in letters if not (w and w[-1] == (a[0], -a[1]))]
    return out


def solve_n(L: float) -> float:
    """N with N ln N = L (L > e)."""
    N = max(L / math.log(L), 2.0)
    for _ in range(100):
        N = L / math.log(N)
    return N


def compress_depth(L: int, m: int) -> int:
    """Abbreviation depth k = floor(log_beta(N / ln N)) where N ln N = L and
    beta = max(2, 2m - 1) is the growth rate of reduced words."""
    if L <= 3 or m < 1:
        return 0
    beta = max(2, 2 * m - 1)
    N = solve_n(L)
    ratio = N / math.log(N)
    if ratio < beta:
        return 0
    return int(math.floor(math.log(ratio) / math.log(beta) + 1e-12))


def _abbreviate(b: _Builder, gens: list, k: int, prefix: str, cluster: int) -> dict:
    """Define one generator per reduced word of length 2..k; returns
    word -> (defining relator index, generator name)."""
    abbr: dict = {}
    for j in range(2, k + 1):
        for ci, u in enumerate(_reduced_words(gens, j)):
            h = (j + 1) // 2
            parts = [_letter(abbr, u[:h]), _letter(abbr, u[h:])]
            name = b.fresh(f"{prefix}a{j}_{ci}")
            abbr[u] = (b.define(name, parts, cluster), name)
    return abbr


def _letter(abbr: dict, u: tuple):
    return u[0] if len(u) == 1 else (abbr[u][1], 1)


def _collapse(b: _Builder, i: int, p: int, u: tuple, abbr: dict) -> None:
    """Replace the letters u at position p of relator i by one abbreviation."""
    if u not in abbr:
        return
    h = (len(u) + 1) // 2
    if len(u) - h > 1:
        _collapse(b, i, p + h, u[h:], abbr)
    if h > 1:
        _collapse(b, i, p, u[:h], abbr)
    b.replace_at(i, p, 2, abbr[u][0])


def _rewrite_blocks(b: _Builder, i: int, k: int, abbr: dict) -> None:
    r = list(b.rels[i])
    for p in reversed(range(0, len(r), k)):
        _collapse(b, i, p, tuple(r[p:p + k]), abbr)


def _finish_defs(b: _Builder, abbr: dict) -> None:
    for k, _ in abbr.values():
        b.emit(Op3(k))  # now reads c^-1 u1 u2


def compress(P: Presentation, k: Optional[int] = None) -> tuple:
    """Abbreviate every reduced word of length 2..k by a new generator and
    rewrite each relator as consecutive length-k blocks of abbreviations.

    Blocks that are not freely reduced stay as they are.  With k < 2 (the
    default depth for short inputs) nothing changes.
    """
    if k is None:
        k = compress_depth(_letters_len(P), len(P.generators))
    b = _Builder(P)
    if k >= 2:
        gens = list(P.generators)
        original = list(range(len(P.relators)))
        abbr = _abbreviate(b, gens, k, "_", -1)
        for i in original:
            _rewrite_blocks(b, i, k, abbr)
        _finish_defs(b, abbr)
    return b.current(), b.script()


def pipeline_per_relator(P: Presentation) -> tuple:
    """Per-relator abbreviation, halving and occurrence splitting.

    Each input relator gets its own abbreviation alphabet and its own chunk
    and splitting generators, so a generator of P lies in at most 3 relators
    per input relator and every other generator in at most 3.
    """
    b = _Builder(P)
    gens = list(P.generators)
    for i, r in enumerate(P.relators):
        k = compress_depth(r.length, len(gens))
        if k >= 2:
            abbr = _abbreviate(b, gens, k, f"_r{i}_", i)
            _rewrite_blocks(b, i, k, abbr)
            _finish_defs(b, abbr)
    _halve(b, shared=False)
    _split(b, PER_RELATOR)
    _pad(b)
    return b.current(), b.script()


# --------------------------------------------------------------------------
# presentation graph


def pres_graph(P: Presentation) -> nx.MultiGraph:
    """Generators as vertices; one edge per pair of letter positions in a relator."""
    G = nx.MultiGraph()
    G.add_nodes_from(P.generators)
    for r in P.relators:
        names = [n for n, _ in r.letters()]
        for p in range(len(names)):
            for q in range(p + 1, len(names)):
                G.add_edge(names[p], names[q])
    return G


def graph_diameter(G: nx.MultiGraph) -> list:
    """Diameter of each connected component, components ordered by least vertex."""
    out = []
    comps = sorted((sorted(c) for c in nx.connected_components(G)), key=lambda c: c[0])
    for comp in comps:
        H = nx.Graph(G.subgraph(comp))
        out.append(nx.diameter(H, usebounds=True) if len(comp) > 1 else 0)
    return out


# --------------------------------------------------------------------------
# measurements


def occurrence_counts(P: Presentation) -> Counter:
    """Number of relators containing each generator."""
    c = Counter({g: 0 for g in P.generators})
    for r in P.relators:
        for g in r.generators():
            c[g] += 1
    return c


@dataclass
class NiceReport:
    input_length: int
    output_length: int
    script_length: int
    max_relator_length: int
    max_occurrence: int
    occurrence_histogram: dict
    flagged_short: list
    offset_in: int
    offset_out: int
    abelian_equal: bool
    diameters: list = field(default_factory=list)

    @property
    def length_ratio(self) -> float:
        return self.output_length / max(self.input_length, 1)

    @property
    def script_ratio(self) -> float:
        return self.script_length / max(self.input_length, 1)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["length_ratio"] = self.length_ratio
        d["script_ratio"] = self.script_ratio
        d["occurrence_histogram"] = {str(k): v for k, v in sorted(self.occurrence_histogram.items())}
        return d


def measure(P: Presentation, Q: Presentation, script: TietzeScript, snf: bool = True,
            diameters: bool = True) -> NiceReport:
    occ = occurrence_counts(Q)
    return NiceReport(
        input_length=P.length,
        output_length=Q.length,
        script_length=len(script),
        max_relator_length=max((r.length for r in Q.relators), default=0),
        max_occurrence=max(occ.values(), default=0),
        occurrence_histogram=dict(Counter(occ.values())),
        flagged_short=[i for i, r in enumerate(Q.relators) if r.length < 2],
        offset_in=len(P.relators) - len(P.generators),
        offset_out=len(Q.relators) - len(Q.generators),
        abelian_equal=(abelian_invariants(P) == abelian_invariants(Q)) if snf else True,
        diameters=graph_diameter(pres_graph(Q)) if diameters else [],
    )
