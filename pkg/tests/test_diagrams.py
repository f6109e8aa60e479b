import itertools
import random

import pytest

from balpres.diagrams import (SATISFIED, UNKNOWN, VIOLATED, AreaBudget, EffectiveMap, Step,
                              area_upper, conjugate_oracle, effective_iso_check, exact_budget,
                              identity_map, map_type_check, replay_trace, script_to_map)
from balpres.presentations import (Op3, Op4, Op5, Op5inv, ScriptBuilder, TietzeScript,
                                   fingerprint, pres)
from balpres.words import Word, WordError, word

Z2 = pres("x y", "x y x^-1 y^-1")
C3 = pres("a", "a^3")


def _reduced_words(gens, L):
    letters = [(g, e) for g in gens for e in (1, -1)]
    for w in itertools.product(letters, repeat=L):
        if all(not (w[i][0] == w[i + 1][0] and w[i][1] == -w[i + 1][1]) for i in range(L - 1)):
            yield Word.from_letters(w)


def _trivial_in_Z2(w):
    return all(sum(e for g, e in w.syl if g == h) == 0 for h in "xy")


def _trivial_in_C3(w):
    return sum(e for _, e in w.syl) % 3 == 0


def test_area_examples():
    assert area_upper(pres("a", "a"), word("a")).area == 1
    assert area_upper(pres("a", "a^2"), word("a a^-1")).area == 0
    assert area_upper(Z2, word("x^2 y x^-2 y^-1")).area == 2
    assert area_upper(pres("a", "a^3"), word("a^6")).area == 2


@pytest.mark.parametrize("k", [1, 2, 3])
def test_commutator_area_matches_oracle(k):
    w = word(f"x^{k} y x^-{k} y^-1")
    res = area_upper(Z2, w, exact_budget(Z2, w, 6))
    assert res.area == k
    assert replay_trace(Z2, w, res.trace)
    assert conjugate_oracle(Z2, w, max_factors=k, conj_len=k + 1) == k
    assert conjugate_oracle(Z2, w, max_factors=k - 1, conj_len=k + 1) is None


def test_area_nontrivial_word():
    res = area_upper(Z2, word("x"), AreaBudget(4))
    assert res.area is None
    assert res.reason in ("word is not trivial", "length budget exhausted", "cell budget exhausted")
    res = area_upper(Z2, word("x^2 y^2 x^-2 y^-2"), AreaBudget(2))
    assert res.area is None and res.reason == "cell budget exhausted"


def test_trace_rejects_tampering():
    w = word("x^2 y x^-2 y^-1")
    res = area_upper(Z2, w)
    st = res.trace[0]
    bad = Step(st.relator, -st.orientation, st.offset, st.take, st.position)
    assert not replay_trace(Z2, w, [bad] + res.trace[1:]) or not replay_trace(Z2, w, res.trace[:-1])
    assert not replay_trace(Z2, w, res.trace[:-1])
    assert "".join(res.trace[0].to_text().split())


def test_exact_on_cyclic_group():
    # every word of length <= 8 over <a | a^3>, against the oracle
    for L in range(9):
        for w in _reduced_words(["a"], L):
            if not _trivial_in_C3(w):
                continue
            res = area_upper(C3, w, exact_budget(C3, w, 5))
            assert res.area == conjugate_oracle(C3, w, 4, 2), w
            assert replay_trace(C3, w, res.trace)


def test_exact_on_free_abelian_sample():
    rng = random.Random(7)
    checked = 0
    for L in (4, 6, 8):
        ws = [w for w in _reduced_words(["x", "y"], L) if _trivial_in_Z2(w)]
        for w in rng.sample(ws, min(12, len(ws))):
            res = area_upper(Z2, w, exact_budget(Z2, w, 5))
            assert res.area == conjugate_oracle(Z2, w, 4, 4), w
            assert replay_trace(Z2, w, res.trace)
            checked += 1
    assert checked >= 30


def test_budget_monotonicity():
    words = [word("x^2 y x^-2 y^-1"), word("x y^2 x^-1 y^-2"), word("x^2 y^2 x^-2 y^-2"),
             word("x y x^-1 y^-1 y x y^-1 x^-1")]
    lattice = [AreaBudget(c, l) for c in (1, 2, 3, 4, 5) for l in (4, 6, 8, 12, None)]
    for w in words:
        res = {b: area_upper(Z2, w, b).area for b in lattice}
        for b1, b2 in itertools.product(lattice, repeat=2):
            bigger = b2.max_cells >= b1.max_cells and (
                b2.max_len is None or (b1.max_len is not None and b2.max_len >= b1.max_len))
            if bigger and res[b1] is not None:
                assert res[b2] is not None and res[b2] <= res[b1]


def test_insertions_flag_agrees():
    w = word("x^2 y x^-2 y^-1")
    assert area_upper(Z2, w, AreaBudget(3), insertions=True).area == 2


# -- maps -------------------------------------------------------------------

def test_identity_map_type():
    assert map_type_check(identity_map(Z2), 2, 2).overall == SATISFIED


def test_length_violation():
    P = pres("a", "a^5")
    F = EffectiveMap(P, P, {"a": word("a^5")})
    v = map_type_check(F, 3, 2)
    assert v.lengths["a"] == VIOLATED and v.overall == VIOLATED


def test_collapsing_map():
    F = EffectiveMap(Z2, pres("b", "b"), {"x": Word(), "y": Word()})
    assert map_type_check(F, 2, 1).overall == SATISFIED


def test_area_violation_and_unknown():
    F = EffectiveMap(pres("a", "a"), pres("b", "b"), {"a": word("b^2")})
    assert map_type_check(F, 3, 2).areas[0][0] == VIOLATED
    assert map_type_check(F, 3, 3).areas[0] == (SATISFIED, 2)
    assert map_type_check(F, 3, 10, AreaBudget(1)).areas[0][0] == UNKNOWN


def test_map_rejects_foreign_letters():
    with pytest.raises(WordError):
        EffectiveMap(Z2, Z2, {"x": word("z"), "y": word("y")})
    with pytest.raises(WordError):
        EffectiveMap(Z2, Z2, {"x": word("x")})


def test_effective_iso_examples():
    A, B = pres("a", "a"), pres("b", "b")
    out = effective_iso_check(identity_map(Z2), identity_map(Z2), 2, 2)
    assert out["overall"] == SATISFIED
    # relator images have area 1, so N = 1 is too small for the maps themselves
    out = effective_iso_check(identity_map(Z2), identity_map(Z2), 2, 1)
    assert out["round trips"] == SATISFIED and out["F"] == VIOLATED
    F = EffectiveMap(A, B, {"a": word("b")})
    G = EffectiveMap(B, A, {"b": word("a")})
    assert effective_iso_check(F, G, 2, 2)["overall"] == SATISFIED
    F2 = EffectiveMap(A, B, {"a": word("b^2")})
    out = effective_iso_check(F2, G, 3, 2)
    assert out["round trips"] == SATISFIED
    assert out["F"] == VIOLATED  # relator image b^2 needs 2 cells


def test_script_to_map_types():
    P = pres("a b", "a b", "b^2")
    for m, expect in ((Op3(0), (2, 2)), (Op4(0, 1), (2, 3))):
        sb = ScriptBuilder(P)
        sb.emit(m)
        F, typ = script_to_map(sb.script(), P)
        assert typ == expect
        assert F.image == {"a": word("a"), "b": word("b")}
        assert map_type_check(F, typ[0], typ[1]).overall == SATISFIED


def test_script_to_map_add_remove():
    P = pres("a", "a^3")
    sb = ScriptBuilder(P, d=4)
    sb.emit(Op5(4, "b", word("a^2")))
    sb.emit(Op5inv(4, "b"))
    F, typ = script_to_map(sb.script(), P)
    assert F.image == {"a": word("a")}
    assert typ == (16, 5)


def test_script_to_map_removed_generator():
    P = pres("a b", "b a^-2", "a^3")
    s = TietzeScript(fingerprint(P), [Op5inv(3, "b")], 3)
    F, typ = script_to_map(s, P)
    assert F.image["b"] == word("a^2")
    assert typ == (3, 2)
    assert map_type_check(F, 3, 2).overall == SATISFIED
