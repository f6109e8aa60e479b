"""Presentations, elementary Tietze moves, scripts, canonical forms, search and SNF."""

from __future__ import annotations

import hashlib
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .words import Word, WordError, check_name, free_reduce


class MoveError(ValueError):
    """A Tietze move whose precondition fails on the given presentation."""


class ScriptFormatError(ValueError):
    """Malformed presentation or script text."""


class FingerprintMismatch(ValueError):
    """A script was replayed against the wrong start presentation."""


# --------------------------------------------------------------------------
# Presentation


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    relators: tuple

    def __init__(self, generators: Iterable[str], relators: Iterable[Union[Word, str]]):
        gens = tuple(check_name(g) for g in generators)
        if len(set(gens)) != len(gens):
            raise WordError("duplicate generator names")
        rels = tuple(r if isinstance(r, Word) else Word.parse(r) for r in relators)
        known = set(gens)
        for k, r in enumerate(rels):
            extra = r.generators() - known
            if extra:
                raise WordError(f"relator {k} uses unlisted generators {sorted(extra)}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)

    @property
    def length(self) -> int:
        return sum(r.length for r in self.relators) + len(self.generators)

    @property
    def balanced(self) -> bool:
        return len(self.relators) == len(self.generators)

    @property
    def deficiency(self) -> int:
        """#relators - #generators."""
        return len(self.relators) - len(self.generators)

    def __str__(self) -> str:
        rels = ", ".join(str(r) if r.syl else "1" for r in self.relators)
        return f"< {', '.join(self.generators)} | {rels} >"

    def to_text(self) -> str:
        lines = ["gens: " + ", ".join(self.generators)]
        lines += ["rel: " + str(r) for r in self.relators]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Presentation":
        gens = None
        rels = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, rest = line.partition(":")
            if not sep:
                raise ScriptFormatError(f"expected 'gens:' or 'rel:' line, got {raw!r}")
            key = key.strip()
            if key == "gens":
                if gens is not None:
                    raise ScriptFormatError("duplicate gens line")
                gens = [g.strip() for g in rest.split(",") if g.strip()]
            elif key == "rel":
                rels.append(Word.parse(rest))
            else:
                raise ScriptFormatError(f"unknown key {key!r}")
        if gens is None:
            raise ScriptFormatError("missing gens line")
        try:
            return Presentation(gens, rels)
        except WordError as exc:
            raise ScriptFormatError(str(exc)) from None


def pres(gens: str, *rels: str) -> Presentation:
    """Shorthand: ``pres("a b", "a b a^-1 b^-1")``."""
    return Presentation(gens.replace(",", " ").split(), [Word.parse(r) for r in rels])


# --------------------------------------------------------------------------
# Moves


@dataclass(frozen=True)
class Op1:
    i: int
    pos: int
    j: int
    eps: int


@dataclass(frozen=True)
class Op1inv:
    i: int
    pos: int


@dataclass(frozen=True)
class Op2:
    i: int
    k: int


@dataclass(frozen=True)
class Op3:
    i: int


@dataclass(frozen=True)
class Op4:
    i: int
    j: int


@dataclass(frozen=True)
class Op5:
    d: int
    name: str
    w: Word


@dataclass(frozen=True)
class Op5inv:
    d: int
    gen: str


@dataclass(frozen=True)
class Op6:
    pass


@dataclass(frozen=True)
class Op6inv:
    i: int


Move = Union[Op1, Op1inv, Op2, Op3, Op4, Op5, Op5inv, Op6, Op6inv]


def _inv_letter(a):
    return (a[0], -a[1])


class _State:
    """Mutable working copy: generator list and relators as letter lists."""

    def __init__(self, P: Presentation):
        self.gens = list(P.generators)
        self.rels = [list(r.letters()) for r in P.relators]

    def freeze(self) -> Presentation:
        return Presentation(self.gens, [Word(r) for r in self.rels])

    def _rel(self, i: int) -> list:
        if not isinstance(i, int) or not 0 <= i < len(self.rels):
            raise MoveError(f"relator index {i} out of range (have {len(self.rels)})")
        return self.rels[i]

    def apply(self, m: Move) -> None:
        if isinstance(m, Op1):
            r = self._rel(m.i)
            if not 0 <= m.pos <= len(r):
                raise MoveError(f"Op1 position {m.pos} outside 0..{len(r)}")
            if not 0 <= m.j < len(self.gens):
                raise MoveError(f"Op1 generator index {m.j} out of range")
            if m.eps not in (1, -1):
                raise MoveError("Op1 epsilon must be +1 or -1")
            g = self.gens[m.j]
            r[m.pos:m.pos] = [(g, m.eps), (g, -m.eps)]
        elif isinstance(m, Op1inv):
            r = self._rel(m.i)
            if not 0 <= m.pos < len(r) - 1:
                raise MoveError(f"Op1inv position {m.pos} outside relator of length {len(r)}")
            if r[m.pos + 1] != _inv_letter(r[m.pos]):
                raise MoveError(f"Op1inv: letters {m.pos},{m.pos + 1} of relator {m.i} do not cancel")
            del r[m.pos:m.pos + 2]
        elif isinstance(m, Op2):
            r = self._rel(m.i)
            if r:
                k = m.k % len(r)
                r[:] = r[k:] + r[:k]
        elif isinstance(m, Op3):
            r = self._rel(m.i)
            r[:] = [_inv_letter(a) for a in reversed(r)]
        elif isinstance(m, Op4):
            r = self._rel(m.i)
            s = self._rel(m.j)
            if m.i == m.j:
                raise MoveError("Op4 needs two different relators")
            r.extend(s)
        elif isinstance(m, Op5):
            check_name(m.name)
            if m.name in self.gens:
                raise MoveError(f"Op5: generator {m.name!r} already exists")
            if m.w.length > m.d - 1:
                raise MoveError(f"Op5({m.d}): word of length {m.w.length} exceeds d-1")
            extra = m.w.generators() - set(self.gens)
            if extra:
                raise MoveError(f"Op5: word uses unknown generators {sorted(extra)}")
            self.gens.append(m.name)
            self.rels.append([(m.name, 1)] + list(m.w.letters()))
        elif isinstance(m, Op5inv):
            g = m.gen
            if g not in self.gens:
                raise MoveError(f"Op5inv: no generator {g!r}")
            hits = [(k, p) for k, r in enumerate(self.rels) for p, a in enumerate(r) if a[0] == g]
            if len(hits) != 1:
                raise MoveError(f"Op5inv: {g!r} occurs {len(hits)} times, need exactly once")
            k, p = hits[0]
            r = self.rels[k]
            if p != 0 or r[0][1] != 1:
                raise MoveError(f"Op5inv: relator {k} is not of the form {g} w")
            if len(r) - 1 > m.d - 1:
                raise MoveError(f"Op5inv({m.d}): defining word has length {len(r) - 1} > d-1")
            del self.rels[k]
            self.gens.remove(g)
        elif isinstance(m, Op6):
            self.rels.append([])
        elif isinstance(m, Op6inv):
            r = self._rel(m.i)
            if r:
                raise MoveError(f"Op6inv: relator {m.i} is not empty")
            del self.rels[m.i]
        else:
            raise MoveError(f"unknown move {m!r}")


def apply_move(P: Presentation, m: Move) -> Presentation:
    st = _State(P)
    st.apply(m)
    return st.freeze()


def invert_move(P: Presentation, m: Move) -> list:
    """Moves undoing ``m`` (applied to ``apply_move(P, m)``), up to reordering.

    Op4 has no single-move inverse: it is undone by inverting a_j, multiplying
    again, cancelling the junction letter by letter and inverting a_j back.
    """
    if isinstance(m, Op1):
        return [Op1inv(m.i, m.pos)]
    if isinstance(m, Op1inv):
        a = P.relators[m.i].letters()[m.pos]
        return [Op1(m.i, m.pos, P.generators.index(a[0]), a[1])]
    if isinstance(m, Op2):
        L = P.relators[m.i].length
        return [Op2(m.i, (-m.k) % L if L else 0)]
    if isinstance(m, Op3):
        return [Op3(m.i)]
    if isinstance(m, Op4):
        la = P.relators[m.i].length
        lb = P.relators[m.j].length
        undo = [Op3(m.j), Op4(m.i, m.j)]
        undo += [Op1inv(m.i, la + lb - 1 - t) for t in range(lb)]
        undo.append(Op3(m.j))
        return undo
    if isinstance(m, Op5):
        return [Op5inv(m.d, m.name)]
    if isinstance(m, Op5inv):
        for r in P.relators:
            if r.syl and r.syl[0][0] == m.gen:
                letters = r.letters()
                return [Op5(m.d, m.gen, Word(letters[1:]))]
        raise MoveError(f"Op5inv: {m.gen!r} has no defining relator")
    if isinstance(m, Op6):
        return [Op6inv(len(P.relators))]
    if isinstance(m, Op6inv):
        return [Op6()]
    raise MoveError(f"unknown move {m!r}")


# --------------------------------------------------------------------------
# Canonical form


def _min_rotation(seq: tuple) -> tuple:
    """Lexicographically least rotation (Booth's algorithm)."""
    n = len(seq)
    if n <= 1:
        return tuple(seq)
    s = seq + seq
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return tuple(s[k:k + n])


def _min_rotation_index(seq: Sequence) -> int:
    n = len(seq)
    if n <= 1:
        return 0
    best = _min_rotation(tuple(seq))
    for k in range(n):
        if tuple(seq[k:]) + tuple(seq[:k]) == best:
            return k
    raise AssertionError("unreachable")


Encoded = tuple  # (n_gens, tuple of relators as tuples of nonzero ints)


def encode(P: Presentation, order: Optional[Sequence[str]] = None) -> Encoded:
    names = list(order) if order is not None else list(P.generators)
    idx = {g: k + 1 for k, g in enumerate(names)}
    rels = tuple(tuple(idx[n] * s for n, s in r.letters()) for r in P.relators)
    return (len(names), rels)


def decode(E: Encoded, names: Optional[Sequence[str]] = None) -> Presentation:
    n, rels = E
    if names is None:
        names = [f"g{k}" for k in range(n)]
    return Presentation(names, [Word((names[abs(a) - 1], 1 if a > 0 else -1) for a in r) for r in rels])


def _leaf_key(n: int, rels: tuple, rank: Sequence[int]) -> Encoded:
    # rank[g] in 1..n for generator g (1-based)
    out = []
    for r in rels:
        mapped = tuple(rank[a] if a > 0 else -rank[-a] for a in r)
        out.append(_min_rotation(mapped))
    out.sort(key=lambda t: (len(t), t))
    return (n, tuple(out))


def _refine(n: int, rels: tuple, colors: list) -> list:
    """Colour refinement on generators; returns canonical colour ids 0..c-1."""
    while True:
        rel_sigs = []
        for r in rels:
            cyc = tuple(sorted(
                ((1 if a > 0 else -1, colors[abs(a) - 1]), (1 if b > 0 else -1, colors[abs(b) - 1]))
                for a, b in zip(r, r[1:] + r[:1])
            )) if r else ()
            rel_sigs.append((len(r), cyc))
        sigs = []
        for g in range(1, n + 1):
            occ = []
            for r, rs in zip(rels, rel_sigs):
                pos = sum(1 for a in r if a == g)
                neg = sum(1 for a in r if a == -g)
                if pos or neg:
                    nb = tuple(sorted(
                        (1 if r[t] > 0 else -1,
                         (1 if r[(t + 1) % len(r)] > 0 else -1, colors[abs(r[(t + 1) % len(r)]) - 1]),
                         (1 if r[t - 1] > 0 else -1, colors[abs(r[t - 1]) - 1]))
                        for t in range(len(r)) if abs(r[t]) == g
                    ))
                    occ.append((rs, pos, neg, nb))
            occ.sort()
            sigs.append((colors[g - 1], tuple(occ)))
        table = {s: k for k, s in enumerate(sorted(set(sigs)))}
        new = [table[s] for s in sigs]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def _canon_search(n: int, rels: tuple, colors: list, best: list, best_rank: list) -> None:
    colors = _refine(n, rels, colors)
    k = len(set(colors))
    if k == n:
        rank = [0] + [c + 1 for c in colors]
        key = _leaf_key(n, rels, rank)
        if best[0] is None or key < best[0]:
            best[0] = key
            best_rank[0] = rank
        return
    # individualize each member of the first smallest non-singleton cell
    counts = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    cell = min((c for c in counts if counts[c] > 1), key=lambda c: (counts[c], c))
    for g in range(n):
        if colors[g] != cell:
            continue
        new = [2 * c + (1 if c > cell or (c == cell and h != g) else 0) for h, c in enumerate(colors)]
        # g gets colour 2*cell, the rest of its cell 2*cell+1
        _canon_search(n, rels, new, best, best_rank)


def canonical_encoded(E: Encoded) -> Encoded:
    return _canonical_with_rank(E)[0]


def _cheap_signatures(n: int, rels: tuple) -> list:
    per = [[] for _ in range(n + 1)]
    for r in rels:
        cnt = {}
        for a in r:
            c = cnt.get(a)
            cnt[a] = 1 if c is None else c + 1
        L = len(r)
        for a in cnt:
            if a > 0:
                per[a].append((L, cnt[a], cnt.get(-a, 0)))
            elif -a not in cnt:
                per[-a].append((L, 0, cnt[a]))
    return [tuple(sorted(x)) for x in per[1:]]


_BRUTE_LIMIT = 48


def _canonical_with_rank(E: Encoded):
    n, rels = E
    if n == 0:
        return _leaf_key(0, rels, [0]), [0]
    sigs = _cheap_signatures(n, rels)
    order = sorted(set(sigs))
    cells = [[g + 1 for g in range(n) if sigs[g] == s] for s in order]
    leaves = 1
    for c in cells:
        for k in range(2, len(c) + 1):
            leaves *= k
    if leaves <= _BRUTE_LIMIT:
        best = None
        best_rank = None
        for choice in itertools.product(*(itertools.permutations(c) for c in cells)):
            rank = [0] * (n + 1)
            r = 1
            for cell in choice:
                for g in cell:
                    rank[g] = r
                    r += 1
            key = _leaf_key(n, rels, rank)
            if best is None or key < best:
                best, best_rank = key, rank
        return best, best_rank
    best = [None]
    best_rank = [None]
    colors = [0] * n
    for k, s in enumerate(order):
        for g in range(n):
            if sigs[g] == s:
                colors[g] = k
    _canon_search(n, rels, colors, best, best_rank)
    return best[0], best_rank[0]


def canonical_form(P: Presentation) -> Encoded:
    """Exact invariant of P up to renaming, reordering and rotating relators."""
    return canonical_encoded(encode(P))


def fingerprint(P: Presentation) -> str:
    return hashlib.sha256(repr(canonical_form(P)).encode()).hexdigest()


@dataclass
class Witness:
    renaming: dict          # generator of P -> generator of Q
    relator_map: list       # relator k of P -> (index in Q, rotation applied to the renamed P relator)


def canonical_witness(P: Presentation, Q: Presentation) -> Optional[Witness]:
    """Explicit renaming/reorder/rotation taking P to Q, when fingerprints agree."""
    kp, rp = _canonical_with_rank(encode(P))
    kq, rq = _canonical_with_rank(encode(Q))
    if kp != kq or len(P.generators) != len(Q.generators):
        return None
    inv_q = {rq[g + 1]: Q.generators[g] for g in range(len(Q.generators))}
    renaming = {P.generators[g]: inv_q[rp[g + 1]] for g in range(len(P.generators))}
    used = set()
    rel_map = []
    q_rels = [tuple(r.letters()) for r in Q.relators]
    for r in P.relators:
        img = tuple((renaming[a], s) for a, s in r.letters())
        found = None
        for qi, qr in enumerate(q_rels):
            if qi in used or len(qr) != len(img):
                continue
            for k in range(max(1, len(img))):
                if img[k:] + img[:k] == qr:
                    found = (qi, k)
                    break
            if found:
                break
        if found is None:
            return None
        used.add(found[0])
        rel_map.append(found)
    return Witness(renaming, rel_map)


def canonically_equal(P: Presentation, Q: Presentation) -> bool:
    return canonical_form(P) == canonical_form(Q)


# --------------------------------------------------------------------------
# Scripts


@dataclass
class TietzeScript:
    start: str
    moves: list = field(default_factory=list)
    d: int = 2

    def __len__(self) -> int:
        return len(self.moves)

    def to_text(self) -> str:
        lines = [f"start: {self.start}", f"d: {self.d}"]
        lines += [format_move(m) for m in self.moves]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "TietzeScript":
        start = None
        d = None
        moves = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("start:"):
                start = line[6:].strip()
            elif line.startswith("d:"):
                try:
                    d = int(line[2:].strip())
                except ValueError:
                    raise ScriptFormatError(f"line {lineno}: bad d") from None
            else:
                try:
                    moves.append(parse_move(line))
                except (ValueError, IndexError) as exc:
                    raise ScriptFormatError(f"line {lineno}: {exc}") from None
        if start is None or d is None:
            raise ScriptFormatError("script needs 'start:' and 'd:' header lines")
        return TietzeScript(start, moves, d)


def format_move(m: Move) -> str:
    if isinstance(m, Op1):
        return f"OP1 {m.i} {m.pos} {m.j} {m.eps}"
    if isinstance(m, Op1inv):
        return f"OP1INV {m.i} {m.pos}"
    if isinstance(m, Op2):
        return f"OP2 {m.i} {m.k}"
    if isinstance(m, Op3):
        return f"OP3 {m.i}"
    if isinstance(m, Op4):
        return f"OP4 {m.i} {m.j}"
    if isinstance(m, Op5):
        return f"OP5 {m.d} {m.name} {m.w}".rstrip()
    if isinstance(m, Op5inv):
        return f"OP5INV {m.d} {m.gen}"
    if isinstance(m, Op6):
        return "OP6"
    if isinstance(m, Op6inv):
        return f"OP6INV {m.i}"
    raise ScriptFormatError(f"unknown move {m!r}")


def parse_move(line: str) -> Move:
    tok = line.split()
    op = tok[0].upper()
    ints = lambda k: [int(t) for t in tok[1:1 + k]]  # noqa: E731
    expect = {"OP1": 5, "OP1INV": 3, "OP2": 3, "OP3": 2, "OP4": 3, "OP5INV": 3, "OP6": 1, "OP6INV": 2}
    if op in expect and len(tok) != expect[op]:
        raise ScriptFormatError(f"{op} takes {expect[op] - 1} arguments")
    if op == "OP1":
        return Op1(*ints(4))
    if op == "OP1INV":
        return Op1inv(*ints(2))
    if op == "OP2":
        return Op2(*ints(2))
    if op == "OP3":
        return Op3(*ints(1))
    if op == "OP4":
        return Op4(*ints(2))
    if op == "OP5":
        if len(tok) < 3:
            raise ScriptFormatError("OP5 needs d and a name")
        return Op5(int(tok[1]), tok[2], Word.parse(" ".join(tok[3:])))
    if op == "OP5INV":
        return Op5inv(int(tok[1]), tok[2])
    if op == "OP6":
        return Op6()
    if op == "OP6INV":
        return Op6inv(*ints(1))
    raise ScriptFormatError(f"unknown move {tok[0]!r}")


class ReplayError(MoveError):
    def __init__(self, index: int, move: Move, reason: str):
        super().__init__(f"move {index} ({format_move(move)}): {reason}")
        self.index = index
        self.move = move
        self.reason = reason


def replay(P: Presentation, s: TietzeScript, check_start: bool = True) -> Presentation:
    if check_start and s.start != fingerprint(P):
        raise FingerprintMismatch("script start fingerprint does not match the presentation")
    st = _State(P)
    for k, m in enumerate(s.moves):
        if isinstance(m, (Op5, Op5inv)) and m.d > s.d:
            raise ReplayError(k, m, f"uses d={m.d} above the script's d={s.d}")
        try:
            st.apply(m)
        except (MoveError, WordError) as exc:
            raise ReplayError(k, m, str(exc)) from None
    return st.freeze()


class ScriptBuilder:
    """Records moves while applying them to a working copy."""

    def __init__(self, P: Presentation, d: int = 2):
        self.start = P
        self.state = _State(P)
        self.moves: list = []
        self.d = d

    # raw ---------------------------------------------------------------
    def emit(self, m: Move) -> None:
        self.state.apply(m)
        self.moves.append(m)
        if isinstance(m, (Op5, Op5inv)):
            self.d = max(self.d, m.d)

    @property
    def rels(self) -> list:
        return self.state.rels

    @property
    def gens(self) -> list:
        return self.state.gens

    def current(self) -> Presentation:
        return self.state.freeze()

    def script(self) -> TietzeScript:
        return TietzeScript(fingerprint(self.start), list(self.moves), self.d)

    # helpers -------------------------------------------------------------
    def rotate(self, i: int, k: int) -> None:
        L = len(self.rels[i])
        if L and k % L:
            self.emit(Op2(i, k % L))

    def reduce(self, i: int) -> None:
        """Freely reduce relator i by Op1inv moves."""
        stack: list = []
        for a in list(self.rels[i]):
            if stack and stack[-1] == _inv_letter(a):
                stack.pop()
                self.moves.append(Op1inv(i, len(stack)))
            else:
                stack.append(a)
        self.state.rels[i] = stack

    def cyclic_reduce(self, i: int) -> None:
        self.reduce(i)
        r = self.rels[i]
        while len(r) >= 2 and r[-1] == _inv_letter(r[0]):
            self.rotate(i, len(r) - 1)
            self.emit(Op1inv(i, 0))
            r = self.rels[i]

    def orient(self, i: int, g: str, sign: int = 1) -> None:
        """Make relator i start with g^sign, g occurring exactly once in it."""
        r = self.rels[i]
        hits = [p for p, a in enumerate(r) if a[0] == g]
        if len(hits) != 1:
            raise MoveError(f"{g!r} occurs {len(hits)} times in relator {i}")
        if r[hits[0]][1] != sign:
            self.emit(Op3(i))
            r = self.rels[i]
            hits = [len(r) - 1 - hits[0]]
        self.rotate(i, hits[0])

    def replace_at(self, i: int, pos: int, A_len: int, k: int, restore: bool = True) -> None:
        """Replace letters [pos, pos+A_len) of relator i, equal to A, by B.

        Relator k must currently read A^-1 B (as a linear word).  Relator i is
        rotated so A sits at its end, multiplied by relator k, the junction
        cancelled, and (optionally) rotated back so B starts at ``pos``.
        """
        r = self.rels[i]
        L = len(r)
        # rotate so A ends relator i
        self.rotate(i, pos + A_len)
        self.emit(Op4(i, k))
        base = L - A_len
        for t in range(A_len):
            self.emit(Op1inv(i, base + A_len - 1 - t))
        if restore:
            newL = len(self.rels[i])
            # now relator reads X B with X the rest; rotate back so B starts at pos
            self.rotate(i, (base - pos) % newL if newL else 0)


def compose_scripts(*scripts: TietzeScript) -> TietzeScript:
    moves = [m for s in scripts for m in s.moves]
    return TietzeScript(scripts[0].start, moves, max(s.d for s in scripts))


# --------------------------------------------------------------------------
# Search on canonical classes


def _enc_inv(r: tuple) -> tuple:
    return tuple(-a for a in reversed(r))


def _rotations(r: tuple):
    if not r:
        yield r
        return
    seen = set()
    for k in range(len(r)):
        x = r[k:] + r[:k]
        if x not in seen:
            seen.add(x)
            yield x


def _without(rels: tuple, i: int) -> tuple:
    return rels[:i] + rels[i + 1:]


def _words_upto(gens: Sequence[int], length: int):
    letters = [a for g in gens for a in (g, -g)]
    for L in range(length + 1):
        for w in itertools.product(letters, repeat=L):
            yield tuple(w)


# A search state is (generator ids, relators); ids are positive ints.
State = tuple


def neighbours(S: State, d: int, full: bool, new_id) -> Iterable[tuple]:
    """Yield (label, successor) for each move, rotations being free."""
    gens, rels = S
    R = len(rels)
    for i, r in enumerate(rels):
        yield ("OP3", (gens, rels[:i] + (_enc_inv(r),) + rels[i + 1:]))
        L = len(r)
        for p in range(L):
            q = (p + 1) % L
            if L >= 2 and r[q] == -r[p]:
                rot = r[q + 1:] + r[:p] if q > p else r[q + 1:p]
                yield ("OP1INV", (gens, rels[:i] + (rot,) + rels[i + 1:]))
        if full:
            for p in range(max(L, 1)):
                for g in gens:
                    for e in (g, -g):
                        yield ("OP1", (gens, rels[:i] + (r[:p] + (e, -e) + r[p:],) + rels[i + 1:]))
        if L == 0:
            yield ("OP6INV", (gens, _without(rels, i)))
    for i in range(R):
        for j in range(R):
            if i == j or not rels[j]:
                continue
            for ri in _rotations(rels[i]):
                for rj in _rotations(rels[j]):
                    if full or len(rj) == 1 or (ri and ri[-1] == -rj[0]):
                        yield ("OP4", (gens, rels[:i] + (ri + rj,) + rels[i + 1:]))
    if full:
        cands = set(_words_upto(gens, d - 1))
    else:
        cands = {()}
        for r in rels:
            L = len(r)
            for p in range(L):
                for ln in range(1, min(d - 1, L) + 1):
                    w = tuple(r[(p + t) % L] for t in range(ln))
                    cands.add(w)
                    cands.add(_enc_inv(w))
    g_new = new_id(gens)
    new_gens = tuple(sorted(gens + (g_new,)))
    for w in sorted(cands, key=lambda t: (len(t), t)):
        yield ("OP5", (new_gens, rels + ((g_new,) + w,)))
    for g in gens:
        hits = [(i, p) for i, r in enumerate(rels) for p, a in enumerate(r) if abs(a) == g]
        if len(hits) == 1:
            i, p = hits[0]
            r = rels[i]
            if r[p] == g and len(r) - 1 <= d - 1:
                yield ("OP5INV", (tuple(x for x in gens if x != g), _without(rels, i)))
    yield ("OP6", (gens, rels + ((),)))


def _class_normal(S: State) -> State:
    gens, rels = S
    n = len(gens)
    if gens != tuple(range(1, n + 1)):
        idx = {g: k + 1 for k, g in enumerate(gens)}
        rels = tuple(tuple(idx[a] if a > 0 else -idx[-a] for a in r) for r in rels)
    n, crels = canonical_encoded((n, rels))
    return (tuple(range(1, n + 1)), crels)


def _labelled_normal(S: State) -> State:
    gens, rels = S
    return (gens, tuple(sorted((_min_rotation(r) for r in rels), key=lambda t: (len(t), t))))


@dataclass
class SearchResult:
    distance: Optional[int]
    exact: bool
    reason: str
    states: int
    path: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.distance is not None


def _search(start: State, normal, is_goal, h, d: int, max_depth: int, max_states: int,
            full: bool, new_id, weight: float = 1.0) -> SearchResult:
    s0 = normal(start)
    g_best = {s0: 0}
    parent = {s0: None}
    tie = itertools.count()
    heap = [(h(s0), 0, next(tie), s0)]
    depth_cut = False
    while heap:
        f, g, _, s = heapq.heappop(heap)
        if g > g_best.get(s, 1 << 60):
            continue
        if is_goal(s):
            labels = []
            cur = s
            while parent[cur] is not None:
                labels.append(parent[cur][1])
                cur = parent[cur][0]
            exact = full and weight == 1.0
            return SearchResult(g, exact, "found", len(g_best), labels[::-1])
        if g >= max_depth:
            depth_cut = True
            continue
        for label, nb in neighbours(s, d, full, new_id):
            c = normal(nb)
            ng = g + 1
            if ng < g_best.get(c, 1 << 60):
                hv = h(c)
                if ng + hv > max_depth:
                    depth_cut = True
                    continue
                g_best[c] = ng
                parent[c] = (s, label)
                if len(g_best) > max_states:
                    return SearchResult(None, False, "state budget exhausted", len(g_best))
                heapq.heappush(heap, (ng + weight * hv, ng, next(tie), c))
    reason = "depth budget exhausted" if depth_cut else "search space exhausted"
    return SearchResult(None, full and weight == 1.0 and not depth_cut, reason, len(g_best))


def _length(S: State) -> int:
    return sum(len(r) for r in S[1])


def _next_class_id(gens: tuple) -> int:
    return len(gens) + 1


def tietze_distance(P: Presentation, Q: Presentation, d: int = 2, max_depth: int = 6,
                    max_states: int = 200_000, full: bool = False, labelled: bool = False,
                    weight: float = 1.0) -> SearchResult:
    """Least number of moves from P to Q by A* search.

    By default states are classes modulo renaming, relator order and rotation.
    With ``labelled=True`` generator names are kept (Op5 reuses names of Q),
    which gives an upper bound for the class distance and a much sharper
    heuristic.  Only ``full=True`` enumerates every move; the default prunes
    Op1, Op4 and Op5 candidates, so its answer is the shortest path in the
    pruned move graph.  ``weight > 1`` trades optimality for speed.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    step = max(2, d)
    if not labelled:
        target = _class_normal((tuple(range(1, len(Q.generators) + 1)), encode(Q)[1]))
        tq_n = len(target[0])
        tq_R = len(target[1])
        tq_len = _length(target)

        def h(S):
            gens, rels = S
            return max(abs(len(gens) - tq_n), abs(len(rels) - tq_R),
                       -(-(_length(S) - tq_len) // step))

        start = (tuple(range(1, len(P.generators) + 1)), encode(P)[1])
        return _search(start, _class_normal, lambda S: S == target, h, d, max_depth,
                       max_states, full, _next_class_id, weight)

    names = list(P.generators) + [g for g in Q.generators if g not in P.generators]
    ids = {g: k + 1 for k, g in enumerate(names)}
    enc = lambda X: (tuple(sorted(ids[g] for g in X.generators)),  # noqa: E731
                     tuple(tuple(ids[n] * e for n, e in r.letters()) for r in X.relators))
    target = _labelled_normal(enc(Q))
    t_gens = set(target[0])
    t_rels = {}
    for r in target[1]:
        t_rels[r] = t_rels.get(r, 0) + 1
    tq_len = _length(target)

    def new_id(gens):
        free = sorted(t_gens - set(gens))
        return free[0] if free else max([len(names)] + list(gens)) + 1

    def h(S):
        gens, rels = S
        have = {}
        for r in rels:
            have[r] = have.get(r, 0) + 1
        matched = sum(min(c, t_rels.get(r, 0)) for r, c in have.items())
        mismatch = max(len(rels) - matched, len(target[1]) - matched)
        gdiff = len(set(gens) ^ t_gens)
        return max(mismatch, gdiff, -(-(_length(S) - tq_len) // step))

    return _search(enc(P), _labelled_normal, lambda S: S == target, h, d, max_depth,
                   max_states, full, new_id, weight)


def trivialize(P: Presentation, d: int = 2, max_depth: int = 12, max_states: int = 200_000,
               full: bool = False, weight: float = 1.0) -> SearchResult:
    """Moves needed to reach the empty presentation < | >.

    The heuristic counts one removal per generator, the Op6/Op6inv moves
    forced by #relators - #generators, and per relator the Op1inv moves (plus
    one lengthening move if it is cyclically reduced) needed before it is short
    enough to be removed; every move touches only one relator, so it is
    admissible.
    """

    def h(S):
        gens, rels = S
        n = len(gens)
        k = len(rels) - n
        keep_total = 0
        extra = []
        for r in rels:
            L = len(r)
            cred = L > 0 and not any(r[t] == -r[t - 1] for t in range(L))
            keep = 0 if L <= d else -(-(L - d) // 2) + cred
            empty = 0 if L == 0 else -(-L // 2) + (1 if (cred or L % 2) else 0)
            keep_total += keep
            extra.append(min(empty - keep, 2))
        total = n + abs(k) + keep_total
        if k > 0:
            extra.sort()
            total += sum(extra[:k])
        return total

    start = (tuple(range(1, len(P.generators) + 1)), encode(P)[1])
    return _search(start, _class_normal, lambda S: S == ((), ()), h, d, max_depth,
                   max_states, full, _next_class_id, weight)


# --------------------------------------------------------------------------
# Abelianization


def relation_matrix(P: Presentation) -> list:
    idx = {g: k for k, g in enumerate(P.generators)}
    M = []
    for r in P.relators:
        row = [0] * len(P.generators)
        for n, e in r.syl:
            row[idx[n]] += e
        M.append(row)
    return M


def _eliminate_units(M: Sequence[Sequence[int]]) -> tuple:
    """Pivot on +-1 entries (least fill-in first) while any remain.

    Returns the number of unit pivots and the remaining matrix; each unit
    pivot contributes an invariant factor 1 and leaves the rest unchanged up
    to unimodular operations.
    """
    rows = {i: {j: a for j, a in enumerate(row) if a} for i, row in enumerate(M)}
    cols: dict = {}
    for i, row in rows.items():
        for j in row:
            cols.setdefault(j, set()).add(i)
    ones = 0
    while True:
        best = None
        for i, row in rows.items():
            for j, a in row.items():
                if a in (1, -1):
                    cost = (len(row) - 1) * (len(cols[j]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, i, j)
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, pi, pj = best
        prow = rows.pop(pi)
        p = prow[pj]
        for j in prow:
            cols[j].discard(pi)
        for i in list(cols[pj]):
            row = rows[i]
            q = row[pj] * p  # p = +-1, so row[pj] / p
            for j, a in prow.items():
                v = row.get(j, 0) - q * a
                if v:
                    if j not in row:
                        cols[j].add(i)
                    row[j] = v
                elif j in row:
                    del row[j]
                    cols[j].discard(i)
        del cols[pj]
        ones += 1
    used = sorted({j for row in rows.values() for j in row})
    col_index = {j: k for k, j in enumerate(used)}
    rest = []
    for i in sorted(rows):
        r = [0] * len(used)
        for j, a in rows[i].items():
            r[col_index[j]] = a
        rest.append(r)
    return ones, rest


def smith_normal_form(M: Sequence[Sequence[int]]) -> list:
    """Invariant factors d_1 | d_2 | ... (length min(rows, cols), zeros last)."""
    m = len(M)
    n = len(M[0]) if m else 0
    ones, rest = _eliminate_units(M)
    diag = [1] * ones + [x for x in _dense_snf(rest) if x]
    return diag + [0] * (min(m, n) - len(diag))


def _dense_snf(M: Sequence[Sequence[int]]) -> list:
    A = [list(row) for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    diag = []
    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        done = False
        while not done:
            done = True
            p = A[t][t]
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    done = False
            if not done:
                # move the smallest leftover into the pivot
                best = (t, t)
                for i in range(t, m):
                    if A[i][t] and abs(A[i][t]) < abs(A[best[0]][best[1]]):
                        best = (i, t)
                for j in range(t, n):
                    if A[t][j] and abs(A[t][j]) < abs(A[best[0]][best[1]]):
                        best = (t, j)
                i, j = best
                A[t], A[i] = A[i], A[t]
                for row in A:
                    row[t], row[j] = row[j], row[t]
                continue
            # divisibility: fold a non-divisible entry into row t
            p = A[t][t]
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad:
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                done = False
        diag.append(abs(A[t][t]))
        t += 1
    diag += [0] * (min(m, n) - len(diag))
    return diag


def abelian_invariants(P: Presentation) -> tuple:
    """(sorted torsion coefficients > 1, free rank) of the abelianization."""
    n = len(P.generators)
    if not P.relators:
        return ((), n)
    snf = smith_normal_form(relation_matrix(P))
    nonzero = [x for x in snf if x]
    return (tuple(sorted(x for x in nonzero if x > 1)), n - len(nonzero))


def h1_trivial(P: Presentation) -> bool:
    return abelian_invariants(P) == ((), 0)
