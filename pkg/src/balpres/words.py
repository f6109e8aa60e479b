"""Free-group words, the groups K = <x,y | x^y = x^2> and G = K *_t, and towers.

Words are stored run-length encoded: a tuple of syllables ``(name, exponent)``
with nonzero exponents and no two neighbouring syllables carrying the same
letter with the same sign.  Opposite-sign neighbours are kept, so unreduced
words (``x x^-1``) are representable.  Exponents may be huge; the letter
count ``length`` is always the number of individual letters.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Mapping, Optional

import mpmath

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

DEFAULT_BIT_BUDGET = 1 << 20
LETTER_CAP = 10_000_000


class ResourceError(RuntimeError):
    """An integer or word would exceed the configured size budget."""


class WordError(ValueError):
    """Malformed word text or a word outside an operation's alphabet."""


def bit_budget() -> int:
    env = os.environ.get("BALPRES_BIT_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BIT_BUDGET


def check_name(name: str) -> str:
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise WordError(f"invalid generator name {name!r}")
    return name


def _push(out: list, name: str, e: int) -> None:
    if e == 0:
        return
    if out and out[-1][0] == name and (out[-1][1] > 0) == (e > 0):
        out[-1] = (name, out[-1][1] + e)
    else:
        out.append((name, e))


class Word:
    __slots__ = ("syl", "_letters", "_hash")

    def __init__(self, syllables: Iterable[tuple[str, int]] = ()):
        out: list = []
        for name, e in syllables:
            _push(out, name, int(e))
        self.syl: tuple = tuple(out)
        self._letters = None
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def from_letters(cls, letters: Iterable[tuple[str, int]]) -> "Word":
        return cls(letters)

    @classmethod
    def gen(cls, name: str, e: int = 1) -> "Word":
        return cls([(name, e)])

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse whitespace separated tokens ``g``, ``g^-1``, ``g^k``."""
        out = []
        for tok in text.split():
            if "^" in tok:
                name, _, ex = tok.partition("^")
                try:
                    e = int(ex)
                except ValueError:
                    raise WordError(f"bad exponent in token {tok!r}") from None
                if e == 0:
                    raise WordError(f"zero exponent in token {tok!r}")
            else:
                name, e = tok, 1
            check_name(name)
            out.append((name, e))
        return cls(out)

    # basic properties -----------------------------------------------------
    @property
    def length(self) -> int:
        return sum(abs(e) for _, e in self.syl)

    def is_empty(self) -> bool:
        return not self.syl

    def generators(self) -> set:
        return {n for n, _ in self.syl}

    def letters(self) -> tuple:
        """All letters as ``(name, +-1)`` pairs (refuses huge words)."""
        if self._letters is None:
            if self.length > LETTER_CAP:
                raise ResourceError(f"word of length {self.length} is too long to expand")
            self._letters = tuple(
                (n, 1 if e > 0 else -1) for n, e in self.syl for _ in range(abs(e))
            )
        return self._letters

    def iter_letters(self) -> Iterator[tuple[str, int]]:
        for n, e in self.syl:
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield (n, s)

    # algebra ---------------------------------------------------------------
    def inverse(self) -> "Word":
        return Word((n, -e) for n, e in reversed(self.syl))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.syl + other.syl)

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        return Word(self.syl * k)

    def substitute(self, images: Mapping[str, "Word"]) -> "Word":
        """Replace each generator by its image (letters without image stay)."""
        out: list = []
        for n, e in self.syl:
            img = images.get(n)
            if img is None:
                _push(out, n, e)
                continue
            piece = img.syl if e > 0 else img.inverse().syl
            for _ in range(abs(e)):
                for m, f in piece:
                    _push(out, m, f)
        return Word(out)

    # dunder ------------------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.syl == other.syl

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.syl)
        return self._hash

    def __str__(self) -> str:
        return " ".join(n if e == 1 else f"{n}^{e}" for n, e in self.syl)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def word(text: str) -> Word:
    return Word.parse(text)


def free_reduce(w: Word) -> Word:
    out: list = []
    for n, e in w.syl:
        while e and out and out[-1][0] == n:
            e = out.pop()[1] + e
        if e:
            out.append((n, e))
    return Word(out)


def is_reduced(w: Word) -> bool:
    return all(a[0] != b[0] for a, b in zip(w.syl, w.syl[1:]))


def cyclic_reduce(w: Word) -> Word:
    syl = list(free_reduce(w).syl)
    while len(syl) >= 2 and syl[0][0] == syl[-1][0]:
        n = syl[0][0]
        e = syl[0][1] + syl[-1][1]
        syl = syl[1:-1]
        if e:
            syl = [(n, e)] + syl
            break
    if len(syl) == 1:
        return Word(syl)
    return free_reduce(Word(syl))


def letter_counts(w: Word, g: str) -> int:
    return sum(abs(e) for n, e in w.syl if n == g)


def syllable_length(w: Word, partition: Mapping[str, int]) -> int:
    """Number of maximal blocks of the reduced word lying in one factor."""
    blocks = 0
    last = None
    for n, _ in free_reduce(w).syl:
        if n not in partition:
            raise WordError(f"generator {n!r} is not assigned to a factor")
        f = partition[n]
        if f != last:
            blocks += 1
            last = f
    return blocks


# --------------------------------------------------------------------------
# K as dyadic affine maps t -> 2^a t + b, acting left to right.


def _strip(num: int, exp: int) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    tz = (num & -num).bit_length() - 1
    k = min(tz, exp)
    return num >> k, exp - k


def _check_bits(bits: int, what: str) -> None:
    if bits > bit_budget():
        raise ResourceError(f"{what} needs about {bits} bits (budget {bit_budget()})")


@dataclass(frozen=True)
class DyadicAffine:
    a: int = 0
    b_num: int = 0
    b_exp: int = 0

    def __post_init__(self):
        num, exp = _strip(self.b_num, self.b_exp)
        if self.b_exp < 0:
            raise ValueError("b_exp must be non-negative")
        object.__setattr__(self, "b_num", num)
        object.__setattr__(self, "b_exp", exp)

    @staticmethod
    def identity() -> "DyadicAffine":
        return DyadicAffine()

    def is_identity(self) -> bool:
        return self.a == 0 and self.b_num == 0

    @staticmethod
    def _scaled(num: int, exp: int, a: int) -> tuple[int, int]:
        # 2^a * num / 2^exp
        if num == 0:
            return 0, 0
        if a >= exp:
            _check_bits(num.bit_length() + a - exp, "dyadic numerator")
            return num << (a - exp), 0
        return num, exp - a

    def then(self, other: "DyadicAffine") -> "DyadicAffine":
        """The map ``t -> other(self(t))``, i.e. the word ``self . other``."""
        n1, e1 = self._scaled(self.b_num, self.b_exp, other.a)
        n2, e2 = other.b_num, other.b_exp
        e = max(e1, e2)
        num = (n1 << (e - e1)) + (n2 << (e - e2))
        a = self.a + other.a
        _check_bits(abs(a).bit_length(), "scale exponent")
        return DyadicAffine(a, num, e)

    __matmul__ = then

    def inverse(self) -> "DyadicAffine":
        num, exp = self._scaled(-self.b_num, self.b_exp, -self.a)
        return DyadicAffine(-self.a, num, exp)

    def power(self, k: int) -> "DyadicAffine":
        result = DyadicAffine()
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        while k:
            if k & 1:
                result = result.then(base)
            base = base.then(base)
            k >>= 1
        return result

    def __str__(self) -> str:
        b = str(self.b_num) if self.b_exp == 0 else f"{self.b_num}/2^{self.b_exp}"
        return f"t -> 2^{self.a} t + {b}"


def _k_syllable(n: str, e: int) -> DyadicAffine:
    if n == "x":
        _check_bits(abs(e).bit_length(), "x exponent")
        return DyadicAffine(0, e, 0)
    if n == "y":
        _check_bits(abs(e).bit_length(), "y exponent")
        return DyadicAffine(e, 0, 0)
    raise WordError(f"generator {n!r} is not in K = <x, y>")


def k_eval(w: Word) -> DyadicAffine:
    acc = DyadicAffine()
    for n, e in w.syl:
        acc = acc.then(_k_syllable(n, e))
    return acc


def k_power_of(A: DyadicAffine, base: str) -> Optional[int]:
    if base == "x":
        if A.a == 0 and A.b_exp == 0:
            return A.b_num
        return None
    if base == "y":
        if A.b_num == 0:
            return A.a
        return None
    raise WordError(f"base must be 'x' or 'y', not {base!r}")


def k_normal_word(A: DyadicAffine) -> Word:
    """The word y^(a+e) x^c y^(-e) representing a + c/2^e."""
    c, e = A.b_num, A.b_exp
    return Word([("y", A.a + e), ("x", c), ("y", -e)])


def k_equal(u: Word, v: Word) -> bool:
    return k_eval(u) == k_eval(v)


# --------------------------------------------------------------------------
# G = <x, y, t | x^y = x^2, x^t = y> by pinch removal.


def _g_stack(w: Word) -> list:
    stack: list = [DyadicAffine()]
    for n, e in w.syl:
        if n in ("x", "y"):
            stack[-1] = stack[-1].then(_k_syllable(n, e))
            continue
        if n != "t":
            raise WordError(f"generator {n!r} is not in G = <x, y, t>")
        s = 1 if e > 0 else -1
        for _ in range(abs(e)):
            top = stack[-1]
            if len(stack) >= 3 and stack[-2] == -s:
                # t^-1 x^k t = y^k and t y^k t^-1 = x^k
                if s == 1:
                    k = k_power_of(top, "x")
                    repl = None if k is None else DyadicAffine(k, 0, 0)
                else:
                    k = k_power_of(top, "y")
                    repl = None if k is None else DyadicAffine(0, k, 0)
                if repl is not None:
                    stack.pop()
                    stack.pop()
                    stack[-1] = stack[-1].then(repl)
                    continue
            stack.append(s)
            stack.append(DyadicAffine())
    return stack


def g_reduce(w: Word) -> Word:
    """A pinch-free word equal to ``w`` in G, K-pieces in normal form."""
    out: list = []
    for item in _g_stack(w):
        if isinstance(item, DyadicAffine):
            out.extend(k_normal_word(item).syl)
        else:
            out.append(("t", item))
    return free_reduce(Word(out))


def g_is_trivial(w: Word) -> bool:
    stack = _g_stack(w)
    return len(stack) == 1 and stack[0].is_identity()


def g_equal(u: Word, v: Word) -> bool:
    return g_is_trivial(u * v.inverse())


# --------------------------------------------------------------------------
# Block words in {y, yx}.


def parse_blocks(v: Word) -> list[str]:
    """Split ``v`` into blocks 'y' / 'yx'; raise on anything else."""
    letters = v.letters()
    blocks = []
    i = 0
    while i < len(letters):
        if letters[i] != ("y", 1):
            raise WordError(f"malformed block word {v}: expected y at letter {i}")
        if i + 1 < len(letters) and letters[i + 1] == ("x", 1):
            blocks.append("yx")
            i += 2
        else:
            blocks.append("y")
            i += 1
    return blocks


def blocks_to_word(blocks: Iterable[str]) -> Word:
    out = []
    for b in blocks:
        if b == "y":
            out.append(("y", 1))
        elif b == "yx":
            out += [("y", 1), ("x", 1)]
        else:
            raise WordError(f"unknown block {b!r}")
    return Word(out)


def v_encode(v: Word) -> tuple[int, int]:
    blocks = parse_blocks(v)
    i = len(blocks)
    j = 0
    for k, b in enumerate(blocks):
        if b == "yx":
            j |= 1 << (i - 1 - k)
    return i, j


def v_decode(i: int, j: int) -> Word:
    if i < 0 or j < 0 or j >> i:
        raise WordError(f"({i}, {j}) is not the code of a block word")
    return blocks_to_word("yx" if (j >> (i - 1 - k)) & 1 else "y" for k in range(i))


# --------------------------------------------------------------------------
# Towers exp_h(base), exp_0(x) = x, exp_{h+1}(x) = 2^exp_h(x).


@total_ordering
class TowerInt:
    """The integer exp_height(base), kept symbolic when too large.

    Normalized so that the height is as small as the bit budget allows.
    """

    __slots__ = ("height", "base")

    def __init__(self, base, height: int = 0):
        if isinstance(base, TowerInt):
            height += base.height
            base = base.base
        if height < 0:
            raise ValueError("height must be non-negative")
        if height and base < 0:
            raise ValueError("towers need a non-negative base")
        limit = bit_budget()
        while height and base < limit:
            base = 1 << base
            height -= 1
        self.height = height
        self.base = base

    @property
    def exact(self) -> Optional[int]:
        return self.base if self.height == 0 else None

    def log2_tower(self) -> "TowerInt":
        """log2 of a tower of height >= 1 (exact)."""
        if self.height == 0:
            raise ValueError("log2 of an exact integer is not a tower")
        return TowerInt(self.base, self.height - 1)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = TowerInt(other)
        if not isinstance(other, TowerInt):
            return NotImplemented
        return tower_cmp(self, other) == 0

    def __lt__(self, other) -> bool:
        if isinstance(other, int):
            other = TowerInt(other)
        return tower_cmp(self, other) < 0

    def __hash__(self):
        return hash((self.height, self.base))

    def __repr__(self) -> str:
        b = str(self.base) if self.base.bit_length() <= 64 else f"<{self.base.bit_length()}-bit int>"
        if self.height == 0:
            return f"TowerInt({b})"
        return f"TowerInt(exp_{self.height}({b}))"


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def _cmp_exp_vs_int(k: int, b: int, c: int) -> int:
    """Compare exp_k(b) with the exact integer c (b, k as in a normal tower)."""
    if k == 0:
        return _sign(b - c)
    if c <= 0:
        return 1
    L = c.bit_length()
    # exp_k(b) = 2^X with X = exp_{k-1}(b); 2^(L-1) <= c < 2^L
    r_hi = _cmp_exp_vs_int(k - 1, b, L)
    if r_hi >= 0:
        return 1
    r_lo = _cmp_exp_vs_int(k - 1, b, L - 1)
    if r_lo < 0:
        return -1
    return 0 if c == 1 << (L - 1) else -1


def tower_cmp(a: TowerInt, b: TowerInt) -> int:
    if not isinstance(a, TowerInt):
        a = TowerInt(a)
    if not isinstance(b, TowerInt):
        b = TowerInt(b)
    if a.height == b.height:
        return _sign(a.base - b.base)
    if a.height > b.height:
        # exp_h(p) vs exp_k(q) with h > k: strip k logarithms from both
        return _cmp_exp_vs_int(a.height - b.height, a.base, b.base)
    return -tower_cmp(b, a)


def exp_tower(m: int, x: int) -> TowerInt:
    return TowerInt(x, m)


def tower_E(n: int) -> TowerInt:
    return TowerInt(1, n)


def _ge_plus(A: TowerInt, Y: TowerInt, k: int) -> bool:
    """Decide A >= Y + k for a small integer k >= 0."""
    if Y.height == 0:
        return tower_cmp(A, TowerInt(Y.base + k)) >= 0
    # Y is a power of two above 2^budget; anything larger is at least 2Y
    return tower_cmp(A, Y) > 0 if k else tower_cmp(A, Y) >= 0


def _floor_loglog(d: int) -> int:
    """floor(log2 log2 d) for d >= 2, computed exactly."""
    j = 0
    while d >= 1 << (1 << (j + 1)):
        j += 1
    return j


def _E_gt_power(n: int, d: int, X: TowerInt) -> bool:
    """Decide E_{n-1} > d^X exactly, without materializing towers."""
    if n < 1:
        return False
    E = tower_E(n - 1)
    if d == 1:
        return tower_cmp(E, TowerInt(1)) > 0
    if X.height == 0 and X.base.bit_length() < 64 and X.base * math.log2(d) < bit_budget():
        return tower_cmp(E, TowerInt(d ** X.base)) > 0
    if n < 2:
        return False
    # log2 of both sides: E_{n-2} > X log2 d
    E1 = tower_E(n - 2)
    if X.height == 0:
        if d & (d - 1) == 0:
            return tower_cmp(E1, TowerInt(X.base * (d.bit_length() - 1))) > 0
        if E1.height > 0:
            return True
        prec = 64 + X.base.bit_length() + E1.base.bit_length()
        with mpmath.workprec(prec):
            return mpmath.mpf(E1.base) > mpmath.mpf(X.base) * mpmath.log(d, 2)
    # X = 2^Y: log2 again gives E_{n-3} > Y + log2 log2 d, an integer
    # comparison E_{n-3} >= Y + floor(log2 log2 d) + 1
    if n < 3:
        return False
    return _ge_plus(tower_E(n - 3), X.log2_tower(), _floor_loglog(d) + 1)


def _suff_holds(n: int, l: int, m: int) -> bool:
    """Decide E_{n-3} > 2 log2(22 exp_m(l))."""
    if n < 3:
        return False
    E = tower_E(n - 3)
    X = exp_tower(m, l)
    if X.height == 0:
        if E.height > 0:
            return True
        prec = 64 + X.base.bit_length()
        with mpmath.workprec(prec):
            return mpmath.mpf(E.base) > 2 * mpmath.log(22 * mpmath.mpf(X.base), 2)
    # 2 log2(22 X) = 2Y + 2 log2 22 with X = 2^Y; 2 log2 22 lies in (8, 9),
    # so for integers the test is E >= 2Y + 9
    Y = X.log2_tower()
    if Y.height == 0:
        return _ge_plus(E, TowerInt(2 * Y.base), 9)
    if E.height == 0:
        return False
    # E = 2^E', 2Y + 9 lies strictly between 2^(Y'+1) and 2^(Y'+2)
    return _ge_plus(E.log2_tower(), Y.log2_tower(), 2)


@dataclass(frozen=True)
class ChooseN:
    n: int
    n_sufficient: int
    l: int
    m: int
    d: int


def choose_n(l: int, m: int, d: int, max_n: int = 10_000) -> ChooseN:
    """Smallest n with E_{n-1} > d^exp_m(22 l), plus the sufficient-condition n."""
    if l < 1 or m < 0 or d < 1:
        raise ValueError("need l >= 1, m >= 0, d >= 1")
    X = exp_tower(m, 22 * l)
    n = 1
    while not _E_gt_power(n, d, X):
        n += 1
        if n > max_n:
            raise ResourceError("choose_n did not terminate")
    ns = 3
    while not _suff_holds(ns, l, m):
        ns += 1
        if ns > max_n:
            raise ResourceError("sufficient condition did not terminate")
    return ChooseN(n, ns, l, m, d)
