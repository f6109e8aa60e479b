"""Command-line front end.

Exit codes: 0 success, 2 a checked property or move failed, 3 malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from pathlib import Path
from typing import Optional

import networkx as nx

from .complexes import (
    ComplexError,
    PachnerError,
    PachnerMoveSpec,
    SimplicialComplex,
    apply_pachner,
    fill_cycle_basis,
    pi1_presentation,
    spanning_tree,
)
from .diagrams import AreaBudget, area_upper
from .family import (
    build_mu,
    build_mu0,
    count_family,
    enumerate_family,
    family_threshold,
    mu_to_mu0,
    v_from_string,
    v_string,
    FamilyMember,
)
from .presentations import (
    canonically_equal,
    FingerprintMismatch,
    MoveError,
    Presentation,
    ReplayError,
    ScriptFormatError,
    TietzeScript,
    abelian_invariants,
    fingerprint,
    replay,
    smith_normal_form,
    relation_matrix,
    tietze_distance,
)
from .rewriting import VARIANTS, GLOBAL, compress, measure, pipeline_per_relator, rewrite_nice
from .words import (
    ResourceError,
    Word,
    WordError,
    choose_n,
    g_reduce,
    g_is_trivial,
    k_eval,
    k_normal_word,
)

OK, FAILED, MALFORMED = 0, 2, 3


class CheckFailed(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise WordError(f"cannot read {path}: {exc.strerror}") from None


def _pres(path: str) -> Presentation:
    return Presentation.from_text(_read(path))


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


# --------------------------------------------------------------------------
# subcommands


def cmd_family(args) -> int:
    if args.choose_n:
        res = choose_n(args.l, args.m, args.d)
        print(f"n = {res.n} (sufficient-condition n = {res.n_sufficient})")
        return OK
    if args.v:
        v = v_from_string(args.v)
        out = _out(args)
        mu = build_mu(v, args.n)
        mu0 = build_mu0(v, args.n)
        script = mu_to_mu0(v, args.n)
        end = replay(mu, script)
        if sorted(map(str, end.relators)) != sorted(map(str, mu0.relators)):
            raise CheckFailed("mu_to_mu0 script does not end at mu0")
        stem = f"mu_{args.v}_n{args.n}"
        _write(out / f"{stem}.pres", mu.to_text())
        _write(out / f"mu0_{args.v}_n{args.n}.pres", mu0.to_text())
        _write(out / f"{stem}_to_mu0.script", script.to_text())
        print(f"l(mu) = {mu.length}, l(mu0) = {mu0.length}, script moves = {len(script)}")
        return OK
    if args.max_len is None:
        raise WordError("give --v, --max-len or --choose-n")
    count = count_family(args.max_len, args.n)
    thr = family_threshold(args.max_len)
    print(f"count = {count}, threshold 2^floor(0.99 l/4) = {thr}, meets threshold: {count >= thr}")
    if args.count_only:
        return OK
    out = _out(args)
    members = enumerate_family(args.max_len, args.n, max_blocks=args.max_blocks)
    lines = []
    for m in members:
        lines.append(m.manifest_line())
        _write(out / f"mu_{v_string(m.v)}_n{m.n}.pres", m.mu.to_text())
    _write(out / "manifest.txt", "\n".join(lines) + ("\n" if lines else ""))
    return OK


def _save_result(args, P, Q, script, rep) -> None:
    out = _out(args)
    _write(out / f"{args.name}.pres", Q.to_text())
    _write(out / f"{args.name}.script", script.to_text())
    _write(out / f"{args.name}.json", json.dumps(rep, indent=2, sort_keys=True) + "\n")


def cmd_rewrite(args) -> int:
    P = _pres(args.pres)
    Q, s = rewrite_nice(P, args.variant)
    rep = measure(P, Q, s).as_dict()
    print(json.dumps(rep, sort_keys=True))
    _save_result(args, P, Q, s, rep)
    return OK


def cmd_compress(args) -> int:
    P = _pres(args.pres)
    Q, s = compress(P, args.k)
    rep = {"input_length": P.length, "output_length": Q.length, "generators": len(Q.generators),
           "script_length": len(s)}
    print(json.dumps(rep, sort_keys=True))
    _save_result(args, P, Q, s, rep)
    return OK


def cmd_pipeline(args) -> int:
    if args.pres:
        P = _pres(args.pres)
    else:
        P = build_mu0(v_from_string(args.v), args.n)
    Q, s = pipeline_per_relator(P)
    rep = measure(P, Q, s).as_dict()
    rep["diameter_constant"] = max(rep["diameters"], default=0) / math.log(max(Q.length, 2))
    print(json.dumps(rep, sort_keys=True))
    _save_result(args, P, Q, s, rep)
    return OK


def cmd_area(args) -> int:
    P = _pres(args.pres)
    w = Word.parse(args.word)
    budget = AreaBudget(args.max_cells, args.max_len)
    res = area_upper(P, w, budget, insertions=args.insertions)
    if res.area is None:
        print(f"area unknown: {res.reason} ({res.states} states)")
        return OK
    print(f"area = {res.area} ({res.states} states)")
    for st in res.trace:
        print(st.to_text())
    if args.trace_out:
        Path(args.trace_out).write_text("".join(st.to_text() + "\n" for st in res.trace))
    return OK


def cmd_distance(args) -> int:
    P, Q = _pres(args.a), _pres(args.b)
    res = tietze_distance(P, Q, d=args.d, max_depth=args.max_depth, max_states=args.max_states,
                          full=args.full, labelled=args.labelled, weight=args.weight)
    if res.distance is None:
        print(f"distance unknown: {res.reason} ({res.states} states)")
    else:
        kind = "exact" if res.exact else "shortest in the searched move graph"
        print(f"distance = {res.distance} ({kind}, {res.states} states)")
        print("path: " + " ".join(res.path))
    return OK


def cmd_wordprob(args) -> int:
    w = Word.parse(args.word)
    if args.group == "K":
        A = k_eval(w)
        print(f"trivial = {A.is_identity()}")
        print(f"normal form = {k_normal_word(A)}")
    else:
        r = g_reduce(w)
        print(f"trivial = {r.is_empty()}")
        print(f"reduced = {r}")
    return OK


def cmd_snf(args) -> int:
    P = _pres(args.pres)
    snf = smith_normal_form(relation_matrix(P)) if P.relators else []
    torsion, rank = abelian_invariants(P)
    print(f"invariant factors = {snf}")
    print(f"torsion = {list(torsion)}, free rank = {rank}, trivial = {torsion == () and rank == 0}")
    return OK


def _complex(path: str) -> SimplicialComplex:
    return SimplicialComplex.from_text(_read(path))


def cmd_pi1(args) -> int:
    T = _complex(args.complex)
    tree = spanning_tree(T, args.root)
    P = pi1_presentation(T, tree)
    print(f"{len(P.generators)} generators, {len(P.relators)} relators")
    if args.out_file:
        _write(Path(args.out_file), P.to_text())
    else:
        sys.stdout.write(P.to_text())
    return OK


def cmd_pachner(args) -> int:
    T = _complex(args.complex)
    specs = [PachnerMoveSpec.from_text(args.move)] if args.move else _trace(args.trace)
    inverses = []
    for spec in specs:
        T, inv = apply_pachner(T, spec)
        inverses.append(inv)
    out = _out(args)
    _write(out / f"{args.name}.cplx", T.to_text())
    _write(out / f"{args.name}.inverse.trace", "".join(s.to_text() + "\n" for s in reversed(inverses)))
    print(f"f-vector {T.f_vector()}, euler characteristic {T.euler_characteristic()}")
    return OK


def _trace(path: str) -> list:
    out = []
    for line in _read(path).splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(PachnerMoveSpec.from_text(line))
    return out


def cmd_fill_graph(args) -> int:
    G = nx.MultiGraph()
    for lineno, line in enumerate(_read(args.edges).splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise WordError(f"line {lineno}: expected two vertex ids")
        G.add_edge(*(int(p) for p in parts))
    C, _ = fill_cycle_basis(G)
    P = pi1_presentation(C)
    torsion, rank = abelian_invariants(P)
    print(f"{len(C.triangles)} triangles; abelianization trivial: {torsion == () and rank == 0}")
    out = _out(args)
    _write(out / f"{args.name}.cplx", C.to_text())
    return OK


# --------------------------------------------------------------------------
# verify


def _check(cond: bool, what: str, report: list) -> None:
    report.append(("ok" if cond else "FAIL", what))
    if not cond:
        raise CheckFailed(what)


def _verify_script(args, report) -> None:
    P = _pres(args.pres)
    s = TietzeScript.from_text(_read(args.script))
    end = replay(P, s)
    report.append(("ok", f"script replays ({len(s)} moves, d = {s.d})"))
    if args.expect:
        Q = _pres(args.expect)
        _check(canonically_equal(end, Q),
               "script ends at the expected presentation (up to order, rotation, renaming)",
               report)


def _nice_checks(P, Q, s, report, occ_bound: int, diam: bool = True) -> dict:
    rep = measure(P, Q, s, diameters=diam)
    _check(replay(P, s) == Q, "certificate replays to the output", report)
    _check(rep.max_relator_length <= 3, f"relator lengths <= 3 (max {rep.max_relator_length})", report)
    _check(rep.max_occurrence <= occ_bound,
           f"generator occurrences <= {occ_bound} (max {rep.max_occurrence})", report)
    _check(rep.offset_in == rep.offset_out, "#relators - #generators preserved", report)
    _check(rep.abelian_equal, "abelian invariants preserved", report)
    return rep.as_dict()


def _verify_nice(args, report) -> dict:
    P = _pres(args.pres)
    if args.result and args.script:
        Q, s = _pres(args.result), TietzeScript.from_text(_read(args.script))
    else:
        Q, s = rewrite_nice(P, args.variant)
    bound = 3 if args.variant == GLOBAL else 3 * max(len(P.relators), 1)
    rep = _nice_checks(P, Q, s, report, bound)
    return {"length constant": rep["length_ratio"], "script constant": rep["script_ratio"],
            "max diameter": max(rep["diameters"], default=0)}


def _verify_pipeline(args, report) -> dict:
    P = _pres(args.pres) if args.pres else build_mu0(v_from_string(args.v), args.n)
    if args.result and args.script:
        Q, s = _pres(args.result), TietzeScript.from_text(_read(args.script))
    else:
        Q, s = pipeline_per_relator(P)
    rep = _nice_checks(P, Q, s, report, 3 * max(len(P.relators), 1))
    d = max(rep["diameters"], default=0)
    return {"length constant": rep["length_ratio"], "max diameter": d,
            "diameter / ln l": d / math.log(max(Q.length, 2))}


def _verify_pachner(args, report) -> None:
    T = _complex(args.complex)
    for k, spec in enumerate(_trace(args.trace)):
        try:
            T2, inv = apply_pachner(T, spec)
        except PachnerError as exc:
            report.append(("FAIL", f"move {k}: {exc}"))
            raise CheckFailed(f"move {k} is invalid") from None
        n = T.dim
        _check(len(T2.facets) - len(T.facets) == (n + 2 - spec.i) - spec.i,
               f"move {k}: top-simplex count law", report)
        _check(T2.euler_characteristic() == T.euler_characteristic(), f"move {k}: euler characteristic", report)
        back, _ = apply_pachner(T2, inv)
        _check(back == T, f"move {k}: inverse restores the complex", report)
        T = T2
    if args.expect:
        _check(T == _complex(args.expect), "trace ends at the expected complex", report)


def _verify_manifest(args, report) -> None:
    for lineno, line in enumerate(_read(args.manifest).splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ScriptFormatError(f"manifest line {lineno}: expected 'v n length fingerprint'")
        v, n, length, fp = parts[0], int(parts[1]), int(parts[2]), parts[3]
        mu = build_mu(v_from_string(v), n)
        _check(mu.length == length and fingerprint(mu) == fp, f"line {lineno}: {v} n={n}", report)
        _check(mu.balanced and abelian_invariants(mu) == ((), 0), f"line {lineno}: balanced, trivial abelianization", report)


def cmd_verify(args) -> int:
    report: list = []
    consts = None
    code = OK
    try:
        if args.target == "script":
            _verify_script(args, report)
        elif args.target == "nice":
            consts = _verify_nice(args, report)
        elif args.target == "pipeline":
            consts = _verify_pipeline(args, report)
        elif args.target == "pachner-trace":
            _verify_pachner(args, report)
        else:
            _verify_manifest(args, report)
    except ReplayError as exc:
        report.append(("FAIL", f"move {exc.index} ({exc.move}) is invalid: {exc.reason}"))
        code = FAILED
    except CheckFailed:
        code = FAILED
    for status, what in report:
        print(f"{status:4} {what}")
    if consts:
        print("constants:")
        for k, v in consts.items():
            print(f"  {k}: {v:.4g}" if isinstance(v, float) else f"  {k}: {v}")
    return code


def cmd_report(args) -> int:
    from .report import build_report

    res = build_report(Path(args.out), seed=args.seed, quick=args.quick)
    print(json.dumps(res["constants"], indent=2, sort_keys=True))
    return OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="balpres", description=__doc__.splitlines()[0])
    ap.add_argument("--bit-budget", type=int, help="bit budget for exact integers (default 2^20)")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    p = add("family", cmd_family, "build family members, counts or the choice of n")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--v", help="block word over x, y (e.g. yxy)")
    p.add_argument("--max-len", type=int)
    p.add_argument("--max-blocks", type=int)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--choose-n", action="store_true")
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--out", default="out")

    for name, fn, help_ in (("rewrite", cmd_rewrite, "rewrite to relators of length <= 3"),
                            ("compress", cmd_compress, "abbreviate short words")):
        p = add(name, fn, help_)
        p.add_argument("--pres", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--name", default=name)
        if name == "rewrite":
            p.add_argument("--variant", choices=VARIANTS, default=GLOBAL)
        else:
            p.add_argument("--k", type=int)

    p = add("pipeline", cmd_pipeline, "abbreviate, halve and split per relator")
    p.add_argument("--pres")
    p.add_argument("--v", default="y")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--out", default="out")
    p.add_argument("--name", default="pipeline")

    p = add("area", cmd_area, "van Kampen area by search")
    p.add_argument("--pres", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--max-cells", type=int, default=12)
    p.add_argument("--max-len", type=int)
    p.add_argument("--insertions", action="store_true", help="also allow pure relator insertions")
    p.add_argument("--trace-out")

    p = add("distance", cmd_distance, "Tietze distance by search")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--max-states", type=int, default=200_000)
    p.add_argument("--full", action="store_true")
    p.add_argument("--labelled", action="store_true")
    p.add_argument("--weight", type=float, default=1.0)

    p = add("wordprob", cmd_wordprob, "word problem in K = BS(1,2) or G")
    p.add_argument("--word", required=True)
    p.add_argument("--group", choices=("G", "K"), default="G")

    p = add("snf", cmd_snf, "Smith normal form of the relation matrix")
    p.add_argument("--pres", required=True)

    p = add("pi1", cmd_pi1, "edge-path presentation of a complex")
    p.add_argument("--complex", required=True)
    p.add_argument("--root", type=int)
    p.add_argument("--out-file")

    p = add("pachner", cmd_pachner, "apply bistellar moves")
    p.add_argument("--complex", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--move", help="'i : v v v | v v v ; fresh'")
    g.add_argument("--trace")
    p.add_argument("--out", default="out")
    p.add_argument("--name", default="pachner")

    p = add("fill-graph", cmd_fill_graph, "fill a graph to a simply connected 2-complex")
    p.add_argument("--edges", required=True, help="file with one 'u v' edge per line")
    p.add_argument("--out", default="out")
    p.add_argument("--name", default="filled")

    p = add("verify", cmd_verify, "check a certificate or output")
    p.add_argument("target", choices=("script", "nice", "pipeline", "pachner-trace", "family-manifest"))
    p.add_argument("--pres")
    p.add_argument("--script")
    p.add_argument("--expect")
    p.add_argument("--result")
    p.add_argument("--variant", choices=VARIANTS, default=GLOBAL)
    p.add_argument("--v", default="y")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--complex")
    p.add_argument("--trace")
    p.add_argument("--manifest")

    p = add("report", cmd_report, "run all sweeps; write CSV, JSON and PNG files")
    p.add_argument("--out", default="report")
    p.add_argument("--quick", action="store_true", help="smaller sweeps")
    return ap


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    saved = os.environ.get("BALPRES_BIT_BUDGET")
    if args.bit_budget:
        os.environ["BALPRES_BIT_BUDGET"] = str(args.bit_budget)
    random.seed(args.seed)
    try:
        return args.fn(args)
    except (FingerprintMismatch, ScriptFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return MALFORMED
    except ReplayError as exc:
        print(f"error: move {exc.index}: {exc.reason}", file=sys.stderr)
        return FAILED
    except CheckFailed as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return FAILED
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return FAILED
    except (WordError, ComplexError, MoveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return MALFORMED
    finally:
        # --bit-budget applies to this invocation only
        if saved is None:
            os.environ.pop("BALPRES_BIT_BUDGET", None)
        else:
            os.environ["BALPRES_BIT_BUDGET"] = saved


if __name__ == "__main__":
    sys.exit(main())
