"""Measurement sweeps shared by the ``report`` command and the test-suite."""

from __future__ import annotations

import csv
import json
import math
import os
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import networkx as nx

from .complexes import (
    apply_pachner,
    boundary_simplex,
    fill_cycle_basis,
    find_pachner_moves,
    is_spanning_tree,
    pachner_tietze_distance,
    pi1_presentation,
    presentation_complex,
    random_spanning_tree,
    replay_exchanges,
    tree_exchange_path,
)
from .diagrams import area_upper, conjugate_oracle, exact_budget
from .family import (
    block_words,
    build_mu0,
    build_w,
    count_family,
    enumerate_family,
    family_threshold,
    mu_length,
    v_string,
)
from .presentations import Presentation, h1_trivial, pres, replay
from .rewriting import (
    GLOBAL,
    PER_RELATOR,
    compress,
    measure,
    pipeline_per_relator,
    rewrite_nice,
)
from .words import Word

# --------------------------------------------------------------------------
# inputs


def random_word(rng: random.Random, gens: Sequence[str], length: int) -> Word:
    """A freely reduced word of the given length (cyclically reduced when possible)."""
    letters = [(g, s) for g in gens for s in (1, -1)]
    out: list = []
    while len(out) < length:
        a = rng.choice(letters)
        if out and out[-1] == (a[0], -a[1]):
            continue
        if len(out) == length - 1 and length > 1 and out[0] == (a[0], -a[1]) and len(letters) > 2:
            continue
        out.append(a)
    return Word(out)


def random_presentation(rng: random.Random, n_gens: int, n_rels: int, total: int) -> Presentation:
    """Random presentation whose relator lengths add up to ``total``."""
    gens = [chr(ord("a") + k) for k in range(n_gens)]
    cuts = sorted(rng.sample(range(1, total), n_rels - 1)) if n_rels > 1 else []
    lens = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    return Presentation(gens, [random_word(rng, gens, L) for L in lens])


@dataclass(frozen=True)
class Member:
    v: Word
    n: int


def family_corpus(count: int, ns: Sequence[int] = (0, 1)) -> list:
    """``count`` block words, alternating over the given n, fewest blocks first."""
    out = []
    B = 1
    while len(out) < count:
        for v in block_words(B):
            for n in ns:
                out.append(Member(v, n))
        B += 1
    return out[:count]


# --------------------------------------------------------------------------
# sweeps


def rewrite_sweep(seed: int, sizes: Sequence[int] = (64, 128, 256, 512, 1024, 2048, 4096),
                  n_gens: int = 3, n_rels: int = 3, snf: bool = True) -> list:
    rng = random.Random(seed)
    rows = []
    for size in sizes:
        P = random_presentation(rng, n_gens, n_rels, size)
        for variant in (PER_RELATOR, GLOBAL):
            t = time.perf_counter()
            Q, s = rewrite_nice(P, variant)
            elapsed = time.perf_counter() - t
            rep = measure(P, Q, s, snf=snf)
            ok = replay(P, s) == Q
            rows.append({
                "size": size, "variant": variant, "input_length": rep.input_length,
                "output_length": rep.output_length, "script_length": rep.script_length,
                "length_ratio": rep.length_ratio, "script_ratio": rep.script_ratio,
                "max_relator_length": rep.max_relator_length,
                "max_occurrence": rep.max_occurrence, "offset_preserved": rep.offset_in == rep.offset_out,
                "abelian_equal": rep.abelian_equal, "replay_ok": ok,
                "max_diameter": max(rep.diameters, default=0),
                "diameter_constant": max(rep.diameters, default=0)
                / (n_rels * math.log(max(P.length, 2))),
                "seconds": elapsed,
            })
    return rows


def compress_sweep(exponents: Sequence[int] = (8, 10, 12), seed: int = 0, n_gens: int = 2) -> list:
    rng = random.Random(seed)
    rows = []
    for e in exponents:
        N = 1 << e
        L = int(round(N * math.log(N)))
        gens = [chr(ord("a") + k) for k in range(n_gens)]
        P = Presentation(gens, [random_word(rng, gens, L)])
        Q, s = compress(P)
        rows.append({"N": N, "input_length": P.length, "output_length": Q.length,
                     "ratio": Q.length / N, "generators": len(Q.generators),
                     "replay_ok": replay(P, s) == Q})
    return rows


def pipeline_sweep(members: Sequence) -> list:
    rows = []
    for m in members:
        P = build_mu0(m.v, m.n)
        Q, s = pipeline_per_relator(P)
        rep = measure(P, Q, s)
        rows.append({"v": v_string(m.v), "n": m.n, "input_length": P.length,
                     "output_length": Q.length, "max_relator_length": rep.max_relator_length,
                     "max_occurrence": rep.max_occurrence,
                     "max_diameter": max(rep.diameters, default=0),
                     "diameter_constant": max(rep.diameters, default=0) / math.log(Q.length),
                     "replay_ok": replay(P, s) == Q, "abelian_equal": rep.abelian_equal})
    return rows


def area_table() -> list:
    Z2 = pres("x y", "x y x^-1 y^-1")
    rows = []
    for k in range(1, 5):
        w = Word.parse(f"x^{k} y x^-{k} y^-1")
        res = area_upper(Z2, w, exact_budget(Z2, w, k + 1))
        oracle = conjugate_oracle(Z2, w, k, max(k - 1, 0)) if k <= 3 else None
        rows.append({"word": f"[x^{k},y]", "area": res.area, "states": res.states, "oracle": oracle})
    return rows


def random_connected_graph(rng: random.Random, max_edges: int = 30) -> nx.Graph:
    while True:
        V = rng.randint(2, 12)
        E = rng.randint(V - 1, min(max_edges, V * (V - 1) // 2))
        G = nx.gnm_random_graph(V, E, seed=rng.randrange(1 << 30))
        if nx.is_connected(G):
            return G


def tree_exchange_sweep(seed: int, count: int = 200) -> list:
    rng = random.Random(seed)
    rows = []
    for _ in range(count):
        G = random_connected_graph(rng)
        T1 = random_spanning_tree(G, rng)
        T2 = random_spanning_tree(G, rng)
        path = tree_exchange_path(G, T1, T2)
        end = replay_exchanges(G, T1, path)
        rows.append({"V": G.number_of_nodes(), "E": G.number_of_edges(), "steps": len(path),
                     "valid": end == set(T2.edges), "bound": G.number_of_nodes() + G.number_of_edges()})
    return rows


def pachner_distance_table(max_depth: int = 10) -> list:
    """One move of each type on small 2-spheres."""
    T = boundary_simplex(2)
    T6, _ = apply_pachner(T, find_pachner_moves(T, 1)[0])
    rows = []
    for name, base in (("tetrahedron", T), ("bipyramid", T6)):
        for i in (1, 2, 3):
            moves = find_pachner_moves(base, i)
            if not moves:
                continue
            t = time.perf_counter()
            dist = pachner_tietze_distance(base, moves[0], max_depth=max_depth)
            rows.append({"complex": name, "i": i, "distance": dist,
                         "seconds": time.perf_counter() - t})
    return rows


def fill_sweep(seed: int, count: int = 10, edges: int = 40) -> list:
    rng = random.Random(seed)
    rows = []
    while len(rows) < count:
        V = rng.randint(8, 20)
        G = nx.gnm_random_graph(V, edges, seed=rng.randrange(1 << 30))
        if not nx.is_connected(G):
            continue
        diam = nx.diameter(G)
        C, _ = fill_cycle_basis(G)
        P = pi1_presentation(C)
        rows.append({"V": V, "E": edges, "diameter": diam, "triangles": len(C.triangles),
                     "constant": len(C.triangles) / (edges * (2 * diam + 1)),
                     "h1_trivial": h1_trivial(P)})
    return rows


def presentation_complex_sweep(members: Sequence) -> list:
    rows = []
    for m in members:
        Q, _ = rewrite_nice(build_mu0(m.v, m.n), GLOBAL)
        Q = Presentation(Q.generators, [r for r in Q.relators if r.length])
        C = presentation_complex(Q)
        rows.append({"v": v_string(m.v), "n": m.n, "length": Q.length,
                     "triangles": len(C.triangles), "constant": len(C.triangles) / Q.length})
    return rows


def family_table(lengths: Sequence[int] = (240, 260, 280, 300, 340, 400)) -> list:
    return [{"l": l, "count": count_family(l, 0), "threshold": family_threshold(l)} for l in lengths]


# --------------------------------------------------------------------------
# output


def write_csv(path: Path, rows: list) -> None:
    if not rows:
        path.write_text("")
        return
    keys = list(rows[0])
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})


def _plot(path: Path, series: dict, xlabel: str, ylabel: str, title: str, logx: bool = False) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", label=label)
    if logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def build_report(out: Path, seed: int = 0, quick: bool = False) -> dict:
    """Run every sweep and write CSV, JSON and PNG files under ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    sizes = (64, 128, 256, 512) if quick else (64, 128, 256, 512, 1024, 2048, 4096)
    members = family_corpus(6 if quick else 20)
    tables = {
        "family_counts": family_table(),
        "rewrite": rewrite_sweep(seed, sizes, snf=not quick),
        "compress": compress_sweep((8, 10) if quick else (8, 10, 12), seed),
        "pipeline": pipeline_sweep(members),
        "area": area_table(),
        "tree_exchange": tree_exchange_sweep(seed, 50 if quick else 200),
        "fill_graph": fill_sweep(seed, 4 if quick else 10),
        "presentation_complex": presentation_complex_sweep(members[:4]),
        "w_lengths": [{"n": n, "length": build_w(n).length, "bound": 100 * (1 << n)} for n in range(11)],
    }
    if not quick:
        tables["pachner_distance"] = pachner_distance_table()
    for name, rows in tables.items():
        write_csv(out / f"{name}.csv", [{k: v for k, v in r.items() if k != "seconds"} for r in rows])
    constants = {
        "rewrite_length_ratio": max(r["length_ratio"] for r in tables["rewrite"]),
        "rewrite_script_ratio": max(r["script_ratio"] for r in tables["rewrite"]),
        "rewrite_diameter_constant": max(r["diameter_constant"] for r in tables["rewrite"]
                                         if r["variant"] == PER_RELATOR),
        "compress_C4": max(r["ratio"] for r in tables["compress"]),
        "pipeline_diameter_constant": max(r["diameter_constant"] for r in tables["pipeline"]),
        "pipeline_max_occurrence": max(r["max_occurrence"] for r in tables["pipeline"]),
        "fill_constant": max(r["constant"] for r in tables["fill_graph"]),
        "presentation_complex_constant": max(r["constant"] for r in tables["presentation_complex"]),
    }
    if "pachner_distance" in tables:
        constants["pachner_max_distance"] = max(
            (r["distance"] for r in tables["pachner_distance"] if r["distance"] is not None), default=None)
    (out / "constants.json").write_text(json.dumps(constants, indent=2, sort_keys=True) + "\n")

    rw = tables["rewrite"]
    _plot(out / "rewrite_ratios.png",
          {v: ([r["size"] for r in rw if r["variant"] == v], [r["length_ratio"] for r in rw if r["variant"] == v])
           for v in (PER_RELATOR, GLOBAL)},
          "input length", "output length / input length", "Short-relator rewriting", logx=True)
    cp = tables["compress"]
    _plot(out / "compress_ratio.png", {"compress": ([r["N"] for r in cp], [r["ratio"] for r in cp])},
          "N", "output length / N", "Abbreviation compression", logx=True)
    fc = tables["family_counts"]
    _plot(out / "family_counts.png",
          {"count": ([r["l"] for r in fc], [math.log2(r["count"]) if r["count"] else 0 for r in fc]),
           "threshold": ([r["l"] for r in fc], [math.log2(r["threshold"]) for r in fc])},
          "length bound l", "log2 of count", "Family size against threshold")
    te = tables["tree_exchange"]
    _plot(out / "tree_exchange.png",
          {"steps / (V+E)": (list(range(len(te))), [r["steps"] / r["bound"] for r in te])},
          "instance", "ratio", "Spanning-tree exchange path lengths")
    return {"tables": tables, "constants": constants}
