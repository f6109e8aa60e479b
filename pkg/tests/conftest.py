import random

import pytest

from balpres.presentations import (Op1, Op1inv, Op2, Op3, Op4, Op5, Op5inv, Op6, Op6inv,
                                   Presentation)
from balpres.words import Word, cyclic_reduce

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_word(rng: random.Random, gens, length: int) -> Word:
    letters = []
    while len(letters) < length:
        g = rng.choice(gens)
        e = rng.choice((1, -1))
        if letters and letters[-1] == (g, -e):
            continue
        letters.append((g, e))
    return Word.from_letters(letters)


def random_presentation(rng: random.Random, max_gens: int = 3, max_rels: int = 3,
                        max_len: int = 8, min_len: int = 2) -> Presentation:
    gens = ["a", "b", "c", "d"][: rng.randint(1, max_gens)]
    rels = []
    for _ in range(rng.randint(1, max_rels)):
        while True:
            w = random_word(rng, gens, rng.randint(min_len, max_len))
            if cyclic_reduce(w).length >= min_len:
                break
        rels.append(w)
    return Presentation(gens, rels)


def random_move(rng: random.Random, P: Presentation):
    """A move valid on P, drawn over all move kinds."""
    R = P.relators
    if not R:
        return rng.choice([Op6(), Op5(4, "z0" if "z0" not in P.generators else "z1", Word())])
    kinds = ["op1", "op2", "op3", "op5", "op6"]
    if any(r.length for r in R):
        kinds.append("op1inv_cand")
    if len(R) >= 2:
        kinds.append("op4")
    if any(r.length == 0 for r in R):
        kinds.append("op6inv")
    if any(_removable(R, i) for i in range(len(R))):
        kinds.append("op5inv")
    kind = rng.choice(kinds)
    n = len(R)
    if kind == "op1":
        i = rng.randrange(n)
        return Op1(i, rng.randint(0, R[i].length), rng.randrange(len(P.generators)),
                   rng.choice((1, -1)))
    if kind == "op1inv_cand":
        cands = []
        for i, r in enumerate(R):
            L = r.letters()
            cands += [Op1inv(i, p) for p in range(len(L) - 1) if L[p][0] == L[p + 1][0]
                      and L[p][1] == -L[p + 1][1]]
        if cands:
            return rng.choice(cands)
        return Op3(rng.randrange(n))
    if kind == "op2":
        i = rng.randrange(n)
        return Op2(i, rng.randint(0, max(R[i].length - 1, 0)))
    if kind == "op3":
        return Op3(rng.randrange(n))
    if kind == "op4":
        i, j = rng.sample(range(n), 2)
        return Op4(i, j)
    if kind == "op5":
        used = set(P.generators)
        name = next(f"z{k}" for k in range(100) if f"z{k}" not in used)
        w = random_word(rng, list(P.generators), rng.randint(0, 3))
        return Op5(4, name, w)
    if kind == "op6":
        return Op6()
    if kind == "op6inv":
        return Op6inv(next(i for i, r in enumerate(R) if r.length == 0))
    i = next(i for i in range(len(R)) if _removable(R, i))
    return Op5inv(4, R[i].syl[0][0])


def _removable(R, i) -> bool:
    """R[i] reads g w with g occurring nowhere else and l(w) <= 3."""
    r = R[i]
    if not r.syl or r.syl[0][1] != 1 or r.length > 4:
        return False
    g = r.syl[0][0]
    others = {x for k, rr in enumerate(R) if k != i for x, _ in rr.syl}
    return g not in others and g not in {x for x, _ in r.syl[1:]}


@pytest.fixture
def rng():
    return random.Random(12345)
