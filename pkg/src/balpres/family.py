"""The words w_n and the presentations H_v, mu_v, mu0_v built from them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from .presentations import Presentation, ScriptBuilder, TietzeScript, fingerprint, Op5inv
from .words import (
    ResourceError,
    Word,
    WordError,
    blocks_to_word,
    free_reduce,
    k_eval,
    k_power_of,
    parse_blocks,
    tower_E,
    v_encode,
    choose_n,
    ChooseN,
)

HAT = {"x": "xh", "y": "yh", "t": "th", "s": "sh"}
MU_GENS = ("x", "y", "t", "s", "xh", "yh", "th", "sh")
MU0_GENS = ("x", "t", "xh", "th")
# the three commutator exponents of w_{n,0}
COMM_POWERS = (3, 5, 7)

__all__ = [
    "build_w", "build_w_nm", "build_H", "build_mu", "build_mu0", "mu_to_mu0",
    "enumerate_family", "count_family", "block_words", "check_B_condition",
    "check_v_conditions", "choose_n", "ChooseN", "hat", "mu_length",
    "family_threshold", "FamilyMember", "VReport", "v_string", "v_from_string",
]


def hat(w: Word) -> Word:
    return Word((HAT[n], e) for n, e in w.syl)


def _E(k: int) -> int:
    E = tower_E(k).exact
    if E is None:
        raise ResourceError(f"E_{k} does not fit the bit budget")
    return E


def _w0_shape(ypow) -> Word:
    """w_{n,0} with y^{+-E_n} replaced by ypow(+-1)."""
    out: list = []
    for p in COMM_POWERS:
        # [y^-E x y^E, x^p] = y^-E x y^E x^p y^-E x^-1 y^E x^-p
        out += ypow(-1).syl + (("x", 1),) + ypow(1).syl + (("x", p),)
        out += ypow(-1).syl + (("x", -1),) + ypow(1).syl + (("x", -p),)
    return Word(out)


@lru_cache(maxsize=64)
def _rep(k: int, s: int) -> Word:
    """A word equal to y^(s E_k) in G without y-powers beyond 1."""
    if k == 0:
        return Word([("y", s)])
    return Word([("t", -1)]) * _rep(k - 1, -1) * Word([("x", s)]) * _rep(k - 1, 1) * Word([("t", 1)])


def build_w(n: int) -> Word:
    """w_n; its length is 48 * 2^n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return _w0_shape(lambda s: _rep(n, s))


def build_w_nm(n: int, m: int) -> Word:
    """The intermediate word w_{n,m}, by literal substitution of y-powers."""
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    En = _E(n)
    w = _w0_shape(lambda s: Word([("y", s * En)]))
    for step in range(m):
        big = _E(n - step)
        small = _E(n - step - 1)
        out: list = []
        for name, e in w.syl:
            if name != "y":
                out.append((name, e))
                continue
            if abs(e) != big:
                raise AssertionError(f"unexpected y-power {e} at step {step}")
            s = 1 if e > 0 else -1
            out += [("t", -1), ("y", -small), ("x", s), ("y", small), ("t", 1)]
        w = Word(out)
    return w


def _check_v(v: Word) -> Word:
    parse_blocks(v)
    return v


def build_H(v: Word, n: int) -> Presentation:
    _check_v(v)
    w = build_w(n)
    r1 = Word.parse("y^-1 x y x^-2")
    r2 = Word.parse("t^-1 x t y^-1")
    r3 = Word.gen("s", -1) * v * w.inverse() * v.inverse() * w * Word.gen("s") * Word.gen("t", -1)
    return Presentation(("x", "y", "t", "s"), (r1, r2, r3))


def build_mu(v: Word, n: int) -> Presentation:
    H = build_H(v, n)
    rels = list(H.relators) + [hat(r) for r in H.relators]
    rels += [Word.parse("s xh^-1"), Word.parse("x sh^-1")]
    return Presentation(MU_GENS, rels)


def mu_length(v: Word, n: int) -> int:
    """l(mu_v) = 4 l(v) + 192 * 2^n + 36, without building it."""
    return 4 * v.length + 192 * (1 << n) + 36


_Y_SUB = {"y": Word.parse("t^-1 x t")}


def build_mu0(v: Word, n: int) -> Presentation:
    _check_v(v)
    V = v.substitute(_Y_SUB)
    W = build_w(n).substitute(_Y_SUB)
    xt = Word.parse("t^-1 x t")
    r1 = free_reduce(xt.inverse() * Word.gen("x") * xt * Word.gen("x", -2))
    r3 = free_reduce(Word.gen("xh", -1) * V * W.inverse() * V.inverse() * W * Word.gen("xh")
                     * Word.gen("t", -1))
    r3h = free_reduce(Word.gen("x", -1) * hat(V) * hat(W).inverse() * hat(V).inverse() * hat(W)
                      * Word.gen("x") * Word.gen("th", -1))
    return Presentation(MU0_GENS, (r1, hat(r1), r3, r3h))


def _eliminate(sb: ScriptBuilder, g: str, defining: int, d: int) -> None:
    """Remove generator g using relator ``defining``, where g occurs once."""
    for i in range(len(sb.rels)):
        if i == defining:
            continue
        positions = [p for p, a in enumerate(sb.rels[i]) if a[0] == g]
        for p in reversed(positions):
            sign = sb.rels[i][p][1]
            # the defining relator must read g^-sign B, so that g^sign = B
            sb.orient(defining, g, -sign)
            sb.replace_at(i, p, 1, defining)
    sb.orient(defining, g, 1)
    sb.emit(Op5inv(d, g))


def mu_to_mu0(v: Word, n: int) -> TietzeScript:
    """Script eliminating s, sh, y, yh from mu_v, then freely reducing."""
    P = build_mu(v, n)
    sb = ScriptBuilder(P, d=4)

    def rel_index(word_text: str) -> int:
        target = Word.parse(word_text)
        return [Word(r) for r in sb.rels].index(target)

    _eliminate(sb, "s", rel_index("s xh^-1"), 2)
    _eliminate(sb, "sh", rel_index("x sh^-1"), 2)
    _eliminate(sb, "y", rel_index("t^-1 x t y^-1"), 4)
    _eliminate(sb, "yh", rel_index("th^-1 xh th yh^-1"), 4)
    for i in range(len(sb.rels)):
        sb.reduce(i)
    return sb.script()


# --------------------------------------------------------------------------
# enumeration


def block_words(B: int) -> Iterator[Word]:
    """All 2^B block words with exactly B blocks, lexicographic with y < yx."""
    for pattern in itertools.product(("y", "yx"), repeat=B):
        yield blocks_to_word(pattern)


def v_string(v: Word) -> str:
    return "".join(n for n, _ in v.iter_letters())


def v_from_string(text: str) -> Word:
    if not text or set(text) - {"x", "y"}:
        raise WordError(f"{text!r} is not a word in x, y")
    v = Word((c, 1) for c in text)
    parse_blocks(v)
    return v


@dataclass(frozen=True)
class FamilyMember:
    v: Word
    n: int
    mu: Presentation

    @property
    def length(self) -> int:
        return self.mu.length

    def manifest_line(self) -> str:
        return f"{v_string(self.v)} {self.n} {self.length} {fingerprint(self.mu)}"


def enumerate_family(l: int, n: int, max_blocks: Optional[int] = None) -> list:
    """All mu_v with l(mu_v) <= l, by block count then block pattern."""
    base = 192 * (1 << n) + 36
    out = []
    B = 1
    while 4 * B + base <= l:
        if max_blocks is not None and B > max_blocks:
            break
        for v in block_words(B):
            if 4 * v.length + base <= l:
                out.append(FamilyMember(v, n, build_mu(v, n)))
        B += 1
    return out


def count_family(l: int, n: int) -> int:
    """Number of block words v with l(mu_v) <= l (no construction)."""
    base = 192 * (1 << n) + 36
    if l < base:
        return 0
    L = (l - base) // 4
    # f[k] = number of block words of letter length exactly k
    f = [0] * (L + 1)
    if L >= 0:
        f[0] = 1
    for k in range(1, L + 1):
        f[k] = f[k - 1] + (f[k - 2] if k >= 2 else 0)
    return sum(f[1:])


def family_threshold(l: int) -> int:
    """The claimed lower bound 2^floor(0.99 l / 4)."""
    return 1 << int(0.99 * l / 4)


# --------------------------------------------------------------------------
# side conditions over K

_X7 = Word.gen("x", 7)
_X7i = Word.gen("x", -7)

_CONTEXT = {
    "aa": lambda B: _X7i * B,
    "aA": lambda B: _X7i * B * _X7,
    "Aa": lambda B: B,
    "AA": lambda B: B * _X7,
}


def check_B_condition(B: Word, context: str) -> bool:
    """True iff the inequation for this context holds (the word is no y-power in K)."""
    if context not in _CONTEXT:
        raise ValueError(f"context must be one of {sorted(_CONTEXT)}")
    return k_power_of(k_eval(_CONTEXT[context](B)), "y") is None


@dataclass
class VReport:
    i: int
    j: int
    k_positive: bool
    j_even: bool
    cases: dict

    @property
    def all_pass(self) -> bool:
        return all(self.cases.values())


def check_v_conditions(v: Word, i_range: range = range(-16, 17)) -> VReport:
    """Instantiate the side conditions for v between copies of w_n^{+-1}."""
    i, j = v_encode(v)
    vi = v.inverse()
    cases = {"Aa: v^-1": check_B_condition(vi, "Aa"),
             "aA: v": check_B_condition(v, "aA")}
    for name, make in (("aA: x^i", lambda X: X), ("aA: x^i v", lambda X: X * v),
                       ("aA: v^-1 x^i", lambda X: vi * X), ("aA: v^-1 x^i v", lambda X: vi * X * v)):
        cases[name] = all(check_B_condition(make(Word.gen("x", k)), "aA") for k in i_range if k)
    return VReport(i, j, i > 0, j % 2 == 0, cases)
