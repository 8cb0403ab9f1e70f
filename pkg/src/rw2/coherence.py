"""Orientations, completeness certificates, tiling search and coherence verdicts.

The tiling search works on words of (rule, address) letters modulo swaps of
orthogonal letters.  Each search state is the lexicographic trace normal form
of a word; moves replace a gathered factor by the other side of an axiom, a
proven span lemma, a naturality square or an inverse cancellation.  Proofs
are replayed into explicit faces (including the Funct swaps needed to gather
each factor) so the independent checker in :mod:`rw2.prooft` can verify them.
"""

from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import terms as T
from .critical import CriticalSpan, critical_spans
from .prooft import (
    Expr,
    Face,
    Id,
    Lemma,
    Path,
    RuleApp,
    Seq,
    Struct,
    Tiling,
    as_path,
    axiom_paths,
    canonical_letters,
    check_tiling,
    funct_faces,
    independent,
    path_word,
)
from .terms import Address, Term, Var
from .theory import (
    FuelExhausted,
    RankFn,
    RankVerdict,
    Theory2,
    TheoryError,
    check_rank_certificate,
    find_redexes,
    normal_letters,
    normalize,
    random_term,
    replay,
    rewrite_step,
)

DEFAULT_FACE_FUEL = 200


class InvalidOrientation(ValueError):
    pass


class InvalidCertificate(ValueError):
    pass


class DivergenceUnresolvable(RuntimeError):
    pass


# -------------------------------------------------------------- orientation


def default_orientation(th: Theory2) -> dict:
    return {r.label: r.orientation for r in th.rules}


def validate_orientation(th: Theory2, o: dict) -> None:
    for r in th.rules:
        if r.label not in o:
            raise InvalidOrientation(f"orientation missing rule {r.label!r}")
        sign = o[r.label]
        if sign not in (1, -1):
            raise InvalidOrientation(f"orientation of {r.label!r} must be +1 or -1")
        if not r.invertible and sign != 1:
            raise InvalidOrientation(f"non-invertible rule {r.label!r} must be oriented +1")
        if r.invertible and r.inverse and th.has_rule(r.inverse):
            if o.get(r.inverse) == sign:
                raise InvalidOrientation(f"{r.label!r} and its inverse {r.inverse!r} have the same sign")


def _word_rules(e: Expr, out: set) -> set:
    if isinstance(e, RuleApp):
        out.add(e.rule)
        for a in e.args:
            _word_rules(a, out)
    elif isinstance(e, Struct):
        for a in e.args:
            _word_rules(a, out)
    elif isinstance(e, Seq):
        _word_rules(e.first, out)
        _word_rules(e.second, out)
    return out


def positive_subtheory(th: Theory2, o: Optional[dict] = None) -> Theory2:
    """Drop negatively oriented rules (kept as hidden inverses) and the axioms that mention them."""
    o = default_orientation(th) if o is None else o
    validate_orientation(th, o)
    keep = tuple(r for r in th.rules if o[r.label] > 0)
    drop = tuple(r for r in th.rules if o[r.label] < 0)
    gone = {r.label for r in drop}
    axioms = tuple(
        ax for ax in th.axioms if not ((_word_rules(ax.lhs_word, set()) | _word_rules(ax.rhs_word, set())) & gone)
    )
    name = th.name if th.name.endswith("+") else th.name + "+"
    return th.with_(name=name, rules=keep, axioms=axioms, hidden=tuple(th.hidden) + drop)


# --------------------------------------------------------------- word moves


def _closure(w: Sequence) -> list[int]:
    """Bitmask of indices reachable through dependency edges (forward)."""
    n = len(w)
    reach = [0] * n
    for i in range(n - 1, -1, -1):
        m = 0
        for j in range(i + 1, n):
            if not independent(w[i], w[j]):
                m |= (1 << j) | reach[j]
        reach[i] = m
    return reach


def gather(w: Sequence, picks: Sequence[int], reach: Optional[list] = None) -> Optional[tuple[tuple, int]]:
    """Rearrange ``w`` (trace-equivalently) so that ``w[picks]`` is a contiguous block in that order.

    Returns the new word and the block offset, or None when impossible.
    """
    reach = _closure(w) if reach is None else reach
    pick_mask = 0
    for p in picks:
        pick_mask |= 1 << p
    # block order must respect dependencies among the picked letters
    for a in range(len(picks)):
        for b in range(a + 1, len(picks)):
            if reach[picks[b]] >> picks[a] & 1:
                return None
    before, after = [], []
    below = 0  # letters forced after the block
    for p in picks:
        below |= reach[p]
    for j in range(len(w)):
        if pick_mask >> j & 1:
            continue
        is_after = bool(below >> j & 1)
        is_before = bool(reach[j] & pick_mask)
        if is_after and is_before:
            return None
        (after if is_after else before).append(j)
    # a "before" letter may still depend on an "after" letter placed later; check pairwise
    for a in after:
        for b in before:
            if a < b and (reach[a] >> b & 1):
                return None
    out = tuple(w[j] for j in before) + tuple(w[p] for p in picks) + tuple(w[j] for j in after)
    return out, len(before)


def _occurrences(w: Sequence, letters: Sequence, first: int) -> Optional[list[int]]:
    used = {first}
    picks = [first]
    prev = first
    for x in letters[1:]:
        pos = None
        for j in range(prev + 1, len(w)):
            if j not in used and w[j] == x:
                pos = j
                break
        if pos is None:
            for j in range(len(w)):
                if j not in used and w[j] == x:
                    pos = j
                    break
        if pos is None:
            return None
        used.add(pos)
        picks.append(pos)
        prev = pos
    return picks


@dataclass(frozen=True)
class Move:
    """Replace ``lin[at:at+len(left)]`` (with ``lin`` trace-equivalent to the state word) by ``right``."""

    kind: str
    label: Optional[str]
    lin: tuple
    at: int
    left: tuple
    right: tuple

    def result(self) -> tuple:
        return self.lin[: self.at] + self.right + self.lin[self.at + len(self.left):]


@dataclass
class _Pattern:
    kind: str
    label: str
    frm: Path
    to: Path


def _var_positions(t: Term) -> dict:
    occ: dict = {}
    for ad, sub in T.positions(t):
        if type(sub) is Var:
            occ.setdefault(sub.name, []).append(ad)
    return occ


class MoveGenerator:
    def __init__(self, th: Theory2, patterns: Sequence[_Pattern]):
        self.th = th
        self.by_first: dict = {}
        for p in patterns:
            if p.frm.letters:
                self.by_first.setdefault(p.frm.letters[0][0], []).append(p)
        self._occ: dict = {}

    def occ(self, label: str) -> tuple[dict, dict]:
        got = self._occ.get(label)
        if got is None:
            r = self.th.rule(label)
            got = (_var_positions(r.lhs), _var_positions(r.rhs))
            self._occ[label] = got
        return got

    def moves(self, source: Term, w: tuple, terms: list) -> list[Move]:
        out: list[Move] = []
        reach = _closure(w)
        th = self.th
        for k, (lab, ad) in enumerate(w):
            # axiom and lemma instances starting with this letter
            for pat in self.by_first.get(lab, ()):
                a0 = pat.frm.letters[0][1]
                if len(ad) < len(a0) or ad[len(ad) - len(a0):] != a0:
                    continue
                p = ad[: len(ad) - len(a0)]
                sub = T.subterm(terms[k], p)
                if sub is None or T.match(pat.frm.source, sub) is None:
                    continue
                inst = tuple((l, p + a) for l, a in pat.frm.letters)
                picks = _occurrences(w, inst, k)
                if picks is None:
                    continue
                g = gather(w, picks, reach)
                if g is None:
                    continue
                lin, at = g
                out.append(Move(pat.kind, pat.label, lin, at, inst, tuple((l, p + a) for l, a in pat.to.letters)))
            lhs_occ, rhs_occ = self.occ(lab)
            # naturality, pushing inner steps forward through (lab, ad)
            for j in range(k):
                il, iq = w[j]
                if len(iq) <= len(ad) or iq[: len(ad)] != ad:
                    continue
                rel = iq[len(ad):]
                for x, betas in lhs_occ.items():
                    hit = next((b for b in betas if rel[: len(b)] == b and len(rel) > len(b) - 1 and len(rel) >= len(b)), None)
                    if hit is None:
                        continue
                    delta = rel[len(hit):]
                    copies = tuple((il, ad + b + delta) for b in betas)
                    if copies[0] != w[j]:
                        copies = (w[j],) + tuple(c for c in copies if c != w[j])
                    inst = copies + ((lab, ad),)
                    picks = _occurrences(w, inst, j)
                    if picks is None:
                        continue
                    g = gather(w, picks, reach)
                    if g is None:
                        continue
                    lin, at = g
                    right = ((lab, ad),) + tuple((il, ad + gm + delta) for gm in rhs_occ.get(x, []))
                    out.append(Move("Nat", None, lin, at, inst, right))
                    break
            # naturality, pulling outer copies back before (lab, ad)
            for j in range(k + 1, len(w)):
                il, iq = w[j]
                if len(iq) <= len(ad) or iq[: len(ad)] != ad:
                    continue
                rel = iq[len(ad):]
                for x, gammas in rhs_occ.items():
                    hit = next((g_ for g_ in gammas if rel[: len(g_)] == g_), None)
                    if hit is None or x not in lhs_occ:
                        continue
                    delta = rel[len(hit):]
                    copies = tuple((il, ad + gm + delta) for gm in gammas)
                    inst = ((lab, ad),) + copies
                    picks = _occurrences(w, inst, k)
                    if picks is None:
                        continue
                    g = gather(w, picks, reach)
                    if g is None:
                        continue
                    lin, at = g
                    left = tuple((il, ad + b + delta) for b in lhs_occ[x]) + ((lab, ad),)
                    out.append(Move("Nat", None, lin, at, inst, left))
                    break
            # inverse cancellation
            r = th.rule(lab)
            if r.invertible and r.inverse:
                for j in range(k + 1, len(w)):
                    if w[j] == (r.inverse, ad):
                        g = gather(w, [k, j], reach)
                        if g is not None:
                            lin, at = g
                            out.append(Move("Inverse", None, lin, at, ((lab, ad), (r.inverse, ad)), ()))
                        break
        return out


# ------------------------------------------------------------------ search


@dataclass
class SearchStats:
    nodes: int = 0
    problems: int = 0


class Budget:
    def __init__(self, nodes: int, seconds: Optional[float] = None):
        self.nodes = nodes
        self.deadline = time.monotonic() + seconds if seconds else None

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline


def _face(th: Theory2, source: Term, m: Move) -> Face:
    terms = replay(th, source, m.lin)
    s = terms[m.at]
    return Face(m.kind, Path(s, m.left), Path(s, m.right), m.at, m.label)


def bidirectional_search(
    th: Theory2,
    gen: MoveGenerator,
    source: Term,
    P: tuple,
    Q: tuple,
    node_budget: int,
    extra_len: int = 4,
    stats: Optional[SearchStats] = None,
) -> Optional[list[Face]]:
    """Faces rewriting word ``P`` into word ``Q`` (both from ``source``), or None."""
    P, Q = tuple(P), tuple(Q)
    if P == Q:
        return []
    kp, kq = canonical_letters(P), canonical_letters(Q)
    if kp == kq:
        return funct_faces(th, source, P, Q)
    max_len = max(len(P), len(Q)) + extra_len
    # per side: key -> (word, parent key, move)
    seen = [{kp: (P, None, None)}, {kq: (Q, None, None)}]
    queues = [deque([kp]), deque([kq])]
    expanded = 0
    meet = None
    while (queues[0] or queues[1]) and meet is None:
        side = 0 if (queues[0] and (not queues[1] or len(queues[0]) <= len(queues[1]))) else 1
        key = queues[side].popleft()
        w = seen[side][key][0]
        terms = replay(th, source, w)
        if terms is None:  # pragma: no cover - moves always produce valid words
            continue
        expanded += 1
        if stats is not None:
            stats.nodes += 1
        if expanded > node_budget:
            return None
        for m in gen.moves(source, w, terms):
            nw = m.result()
            if len(nw) > max_len:
                continue
            if replay(th, source, nw) is None:
                continue
            nk = canonical_letters(nw)
            if nk in seen[side]:
                continue
            seen[side][nk] = (nw, key, m)
            if nk in seen[1 - side]:
                meet = nk
                break
            queues[side].append(nk)
    if meet is None:
        return None
    return _assemble(th, source, seen, meet)


def _chain(seen: dict, key) -> list:
    out = []
    while True:
        w, parent, move = seen[key]
        if parent is None:
            return list(reversed(out))
        out.append((seen[parent][0], move, w))
        key = parent


def _replay_chain(th: Theory2, source: Term, start: tuple, chain: list) -> tuple[list[Face], tuple]:
    faces: list[Face] = []
    cur = start
    for parent_word, m, new_word in chain:
        faces.extend(funct_faces(th, source, cur, m.lin))
        faces.append(_face(th, source, m))
        cur = m.result()
    return faces, cur


def _assemble(th: Theory2, source: Term, seen: list, meet) -> list[Face]:
    c0, c1 = _chain(seen[0], meet), _chain(seen[1], meet)
    start0 = seen[0][_root(seen[0])][0]
    start1 = seen[1][_root(seen[1])][0]
    f0, end0 = _replay_chain(th, source, start0, c0)
    f1, end1 = _replay_chain(th, source, start1, c1)
    mid = funct_faces(th, source, end0, end1)
    back = [f.flipped() for f in reversed(f1)]
    return f0 + mid + back


def _root(seen: dict):
    for k, (w, parent, _) in seen.items():
        if parent is None:
            return k
    raise AssertionError  # pragma: no cover


# ---------------------------------------------------------------- wrappers


def _collapse_rules(th: Theory2) -> list:
    """Invertible rules C[x] -> x whose context has no other variables."""
    out = []
    for r in tuple(th.rules) + tuple(th.hidden):
        if r.invertible and r.inverse and type(r.rhs) is Var and type(r.lhs) is not Var:
            if T.variables(r.lhs) == (r.rhs.name,) and T.var_occurrences(r.lhs).count(r.rhs.name) == 1:
                out.append(r)
    return out


def _invertible_steps(th: Theory2, t: Term) -> list[tuple[str, Address]]:
    """Steps out of ``t`` by invertible rules with non-variable left-hand sides."""
    out = []
    for r in tuple(th.rules) + tuple(th.hidden):
        if not r.invertible or type(r.lhs) is Var:
            continue
        for ad, sub in T.positions(t):
            if type(sub) is not Var and T.match(r.lhs, sub) is not None:
                out.append((r.label, ad))
    return out


@dataclass(frozen=True)
class Wrapper:
    kind: str  # whisker | pre | post
    rule: str
    address: Address = ()


def _wrap(th: Theory2, source: Term, P: tuple, Q: tuple, wr: Wrapper):
    """Return (new source, P', Q', opening faces, closing faces builder)."""
    if wr.kind == "whisker":
        c = th.rule(wr.rule)
        beta = next(ad for ad, sub in T.positions(c.lhs) if type(sub) is Var)
        ctx_src = T.apply(c.lhs, {c.rhs.name: source})
        return ctx_src, tuple((l, beta + a) for l, a in P), tuple((l, beta + a) for l, a in Q), beta
    if wr.kind == "pre":
        r = th.rule(wr.rule)
        s0, _ = rewrite_step(th, source, r.inverse, wr.address)
        return s0, ((wr.rule, wr.address),) + P, ((wr.rule, wr.address),) + Q, None
    if wr.kind == "post":
        return source, P + ((wr.rule, wr.address),), Q + ((wr.rule, wr.address),), None
    raise ValueError(wr.kind)  # pragma: no cover


def _whisker_faces(th: Theory2, source: Term, word: tuple, c_label: str, beta: Address) -> list[Face]:
    """Faces turning ``word`` into ``[c⁻¹@λ] + C[word] + [c@λ]``."""
    c = th.rule(c_label)
    faces = [Face("Inverse", Path(source, ()), Path(source, ((c.inverse, ()), (c_label, ()))), 0)]
    cur = [(c.inverse, ()), (c_label, ())] + list(word)
    for i in range(len(word)):
        pos = 1 + i
        terms = replay(th, source, cur)
        l, a = cur[pos + 1]
        left = ((c_label, ()), (l, a))
        right = ((l, beta + a), (c_label, ()))
        faces.append(Face("Nat", Path(terms[pos], left), Path(terms[pos], right), pos))
        cur[pos], cur[pos + 1] = right
    return faces


def _wrapped_proof(th: Theory2, source: Term, P: tuple, Q: tuple, wr: Wrapper, inner: list[Face]) -> list[Face]:
    if wr.kind == "whisker":
        c = th.rule(wr.rule)
        beta = next(ad for ad, sub in T.positions(c.lhs) if type(sub) is Var)
        openP = _whisker_faces(th, source, P, wr.rule, beta)
        openQ = _whisker_faces(th, source, Q, wr.rule, beta)
        return openP + [f.shifted(1) for f in inner] + [f.flipped() for f in reversed(openQ)]
    if wr.kind == "pre":
        r = th.rule(wr.rule)
        open_ = Face("Inverse", Path(source, ()), Path(source, ((r.inverse, wr.address), (wr.rule, wr.address))), 0)
        return [open_] + [f.shifted(1) for f in inner] + [open_.flipped()]
    r = th.rule(wr.rule)
    terms = replay(th, source, P)
    t = terms[-1]
    openP = Face("Inverse", Path(t, ()), Path(t, ((wr.rule, wr.address), (r.inverse, wr.address))), len(P))
    closeQ = Face("Inverse", Path(t, ((wr.rule, wr.address), (r.inverse, wr.address))), Path(t, ()), len(Q))
    return [openP] + inner + [closeQ]


def _wrapper_options(th: Theory2, source: Term, P: tuple, Q: tuple, used: tuple) -> list[Wrapper]:
    out = []
    if not any(w.kind == "whisker" for w in used):
        for c in _collapse_rules(th):
            out.append(Wrapper("whisker", c.label))
    target = replay(th, source, P)[-1]
    for lab, ad in _invertible_steps(th, target):
        r = th.rule(lab)
        if used and used[-1].kind == "post" and used[-1].rule == r.inverse and used[-1].address == ad:
            continue
        out.append(Wrapper("post", lab, ad))
    for r in tuple(th.rules) + tuple(th.hidden):
        if not r.invertible or not r.inverse or type(r.rhs) is Var:
            continue
        inv = th.rule(r.inverse)
        for ad, sub in T.positions(source):
            if type(sub) is not Var and T.match(inv.lhs, sub) is not None:
                if used and used[-1].kind == "pre" and used[-1].rule == r.inverse and used[-1].address == ad:
                    continue
                out.append(Wrapper("pre", r.label, ad))
    return out


def search_tiling(
    th: Theory2,
    patterns: Sequence[_Pattern],
    source: Term,
    P: tuple,
    Q: tuple,
    node_budget: int = 4000,
    max_wrappers: int = 3,
    budget: Optional[Budget] = None,
    stats: Optional[SearchStats] = None,
) -> Optional[list[Face]]:
    """Iterative deepening over cancellation wrappers around a bidirectional face search."""
    gen = MoveGenerator(th, patterns)
    for depth in range(max_wrappers + 1):
        got = _search_depth(th, gen, source, tuple(P), tuple(Q), depth, (), node_budget, budget, stats)
        if got is not None:
            return got
        if budget is not None and budget.expired():
            return None
    return None


def _search_depth(th, gen, source, P, Q, depth, used, node_budget, budget, stats):
    if budget is not None and budget.expired():
        return None
    if depth == 0:
        if stats is not None:
            stats.problems += 1
        return bidirectional_search(th, gen, source, P, Q, node_budget, stats=stats)
    for wr in _wrapper_options(th, source, P, Q, used):
        s2, P2, Q2, _ = _wrap(th, source, P, Q, wr)
        inner = _search_depth(th, gen, s2, P2, Q2, depth - 1, used + (wr,), node_budget, budget, stats)
        if inner is not None:
            return _wrapped_proof(th, source, P, Q, wr, inner)
    return None


# ------------------------------------------------------------- join spans


@dataclass
class Joining:
    span_id: str
    source: Term
    left: Path  # span left step followed by its completion
    right: Path
    commutes_by: str  # axiom label or "derived"
    tiling: Tiling

    @property
    def left_completion(self) -> tuple:
        return self.left.letters[1:]

    @property
    def right_completion(self) -> tuple:
        return self.right.letters[1:]

    def lemma(self) -> Lemma:
        return Lemma(self.span_id, self.left, self.right, self.tiling)


@dataclass
class Unjoined:
    span_id: str
    source: Term
    reason: str  # not-joinable-within-fuel | joinable-but-no-commuting-proof-found


def _axiom_patterns(th: Theory2) -> list[_Pattern]:
    out = []
    for label, (l, r) in axiom_paths(th).items():
        out.append(_Pattern("Axiom", label, l, r))
        out.append(_Pattern("Axiom", label, r, l))
    return out


def _lemma_patterns(lemmas: dict) -> list[_Pattern]:
    out = []
    for lem in lemmas.values():
        out.append(_Pattern("Composite", lem.label, lem.left, lem.right))
        out.append(_Pattern("Composite", lem.label, lem.right, lem.left))
    return out


def direct_axiom_match(th: Theory2, span: CriticalSpan) -> Optional[Joining]:
    for label, (L, R) in axiom_paths(th).items():
        for A, B in ((L, R), (R, L)):
            if not A.letters or not B.letters:
                continue
            if A.letters[0][0] != span.left.rule or B.letters[0][0] != span.right.rule:
                continue
            a0 = A.letters[0][1]
            ad = span.left.address
            if len(ad) < len(a0) or ad[len(ad) - len(a0):] != a0:
                continue
            p = ad[: len(ad) - len(a0)]
            sub = T.subterm(span.source, p)
            if sub is None or T.match(A.source, sub) is None:
                continue
            la = tuple((l, p + a) for l, a in A.letters)
            lb = tuple((l, p + a) for l, a in B.letters)
            if lb[0] != span.right.letter:
                continue
            ta, tb = replay(th, span.source, la), replay(th, span.source, lb)
            if ta is None or tb is None or th.canon(ta[-1]) != th.canon(tb[-1]):
                continue
            face = Face("Axiom", Path(span.source, la), Path(span.source, lb), 0, label)
            tiling = Tiling([face])
            return Joining(span.id, span.source, Path(span.source, la), Path(span.source, lb), label, tiling)
    return None


def join_span(
    th: Theory2,
    span: CriticalSpan,
    fuel: int = DEFAULT_FACE_FUEL,
    lemmas: Optional[dict] = None,
    node_budget: Optional[int] = None,
    max_wrappers: int = 3,
    budget: Optional[Budget] = None,
    stats: Optional[SearchStats] = None,
) -> "Joining | Unjoined":
    """Close a critical span by an axiom instance, or search for a tiling of the normalized square."""
    direct = direct_axiom_match(th, span)
    if direct is not None:
        return direct
    try:
        nl = normal_letters(th, span.left.target)
        nr = normal_letters(th, span.right.target)
    except FuelExhausted:
        return Unjoined(span.id, span.source, "not-joinable-within-fuel")
    left = (span.left.letter,) + nl
    right = (span.right.letter,) + nr
    tl, tr = replay(th, span.source, left), replay(th, span.source, right)
    if th.canon(tl[-1]) != th.canon(tr[-1]):
        return Unjoined(span.id, span.source, "not-joinable-within-fuel")
    lemmas = dict(lemmas or {})
    patterns = _axiom_patterns(th) + _lemma_patterns(lemmas)
    nb = node_budget if node_budget is not None else 20 * fuel
    faces = search_tiling(th, patterns, span.source, left, right, nb, max_wrappers, budget, stats)
    if faces is None or sum(1 for f in faces if f.kind != "Funct") > fuel:
        return Unjoined(span.id, span.source, "joinable-but-no-commuting-proof-found")
    used = {f.label for f in faces if f.kind == "Composite" and f.label}
    tiling = Tiling(faces, _lemma_closure(lemmas, used))
    return Joining(span.id, span.source, Path(span.source, left), Path(span.source, right), "derived", tiling)


def _lemma_closure(lemmas: dict, used: set) -> dict:
    out = {}
    todo = list(used)
    while todo:
        k = todo.pop()
        if k in out or k not in lemmas:
            continue
        out[k] = lemmas[k]
        todo.extend(f.label for f in lemmas[k].tiling.faces if f.kind == "Composite" and f.label)
        todo.extend(lemmas[k].tiling.lemmas)
    return out


# ------------------------------------------------------------- certificates


@dataclass
class CompletenessCertificate:
    theory: Theory2
    rank_report: Optional[RankVerdict]
    spans: list
    joinings: dict  # span id -> Joining | Unjoined
    fuel: int = DEFAULT_FACE_FUEL
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def valid(self) -> bool:
        return bool(self.rank_report) and all(isinstance(j, Joining) for j in self.joinings.values())

    def __bool__(self) -> bool:
        return self.valid

    @property
    def unproven(self) -> list:
        return [j for j in self.joinings.values() if isinstance(j, Unjoined)]

    @property
    def lemmas(self) -> dict:
        return {sid: j.lemma() for sid, j in self.joinings.items() if isinstance(j, Joining)}


def certify_complete(
    th_pos: Theory2,
    rk: Optional[RankFn] = None,
    fuel: int = DEFAULT_FACE_FUEL,
    n_samples: int = 300,
    seed: int = 0,
    max_wrappers: int = 3,
    time_limit: Optional[float] = None,
    sampler=None,
) -> CompletenessCertificate:
    """Rank certificate plus a joining for every critical span of an all-positive theory."""
    if any(r.orientation < 0 for r in th_pos.rules):
        raise InvalidOrientation("certify_complete expects an all-positive theory")
    rk = rk if rk is not None else th_pos.rank
    if rk is None:
        report = None
    else:
        if sampler is None:
            names = th_pos.var_names[:4] or ("a", "b", "c", "d")
            sampler = lambda rng: random_term(th_pos.signature, names, 5, rng)
        report = check_rank_certificate(th_pos, rk, sampler, n_samples, seed)
    spans = critical_spans(th_pos)
    joinings: dict = {}
    lemmas: dict = {}
    budget = Budget(0, time_limit) if time_limit else None
    pending = list(spans)
    progress = True
    # lemma passes: each proven span is available to the later searches
    while pending and progress:
        progress = False
        rest = []
        for sp in pending:
            j = join_span(th_pos, sp, fuel, lemmas, max_wrappers=max_wrappers, budget=budget)
            joinings[sp.id] = j
            if isinstance(j, Joining):
                lemmas[sp.id] = j.lemma()
                progress = True
            else:
                rest.append(sp)
        pending = rest
    ordered = {sp.id: joinings[sp.id] for sp in spans}
    return CompletenessCertificate(th_pos, report, spans, ordered, fuel)


# ------------------------------------------------------ Strong Newman prover


def nf_path(th: Theory2, t: Term) -> Path:
    return Path(t, normal_letters(th, t))


def nf_reduction(cert: CompletenessCertificate, t: Term) -> Expr:
    """The leftmost-innermost reduction from ``t`` to its normal form as a reduction word."""
    if not cert.valid:
        raise InvalidCertificate("certificate is not valid")
    th = cert.theory
    return path_word(th, t, normal_letters(th, t))


def _span_index(cert: CompletenessCertificate) -> dict:
    idx = cert._memo.get("span_index")
    if idx is None:
        idx = {}
        for sp in cert.spans:
            j = cert.joinings.get(sp.id)
            if isinstance(j, Joining):
                idx.setdefault((sp.left.rule, sp.right.rule, sp.right.address), []).append(j)
        cert._memo["span_index"] = idx
    return idx


def local_square(cert: CompletenessCertificate, s: Term, x: tuple, y: tuple) -> tuple[tuple, tuple, Face]:
    """Close the divergence of steps ``x`` and ``y`` from ``s``.

    Returns completions (a, b) and a face with sides ``[x]+a`` and ``[y]+b``.
    """
    th = cert.theory
    (lx, ax), (ly, ay) = x, y
    if independent(x, y):
        return (y,), (x,), Face("Funct", Path(s, (x, y)), Path(s, (y, x)), 0)
    if T.is_prefix(ay, ax) and ay != ax:
        a, b, f = local_square(cert, s, y, x)
        return b, a, f.flipped()
    # now ax is a prefix of ay (or equal)
    rel = ay[len(ax):]
    r = th.rule(lx)
    lhs_occ = _var_positions(r.lhs)
    rhs_occ = _var_positions(r.rhs)
    for v, betas in lhs_occ.items():
        hit = next((bb for bb in betas if rel[: len(bb)] == bb), None)
        if hit is None:
            continue
        delta = rel[len(hit):]
        lhs_copies = tuple((ly, ax + bb + delta) for bb in betas)
        others = tuple(c for c in lhs_copies if c != y)
        rhs_copies = tuple((ly, ax + gm + delta) for gm in rhs_occ.get(v, []))
        a = rhs_copies
        b = others + (x,)
        face = Face("Nat", Path(s, (y,) + others + (x,)), Path(s, (x,) + rhs_copies), 0)
        return a, b, face.flipped()
    # overlap at a non-variable position: instance of a critical span
    for j in _span_index(cert).get((lx, ly, rel), []):
        got = _span_instance(th, j, s, ax)
        if got is not None:
            return got
    if not rel:
        for j in _span_index(cert).get((ly, lx, ()), []):
            got = _span_instance(th, j, s, ax)
            if got is not None:
                a, b, f = got
                return b, a, f.flipped()
    raise DivergenceUnresolvable(f"no recorded joining for {lx}@{T.format_address(ax)} vs {ly}@{T.format_address(ay)}")


def _span_instance(th: Theory2, j: Joining, s: Term, p: Address):
    sub = T.subterm(s, p)
    if sub is None or T.match(j.source, sub) is None:
        return None
    L = tuple((l, p + a) for l, a in j.left.letters)
    R = tuple((l, p + a) for l, a in j.right.letters)
    if replay(th, s, L) is None or replay(th, s, R) is None:
        return None
    face = Face("Composite", Path(s, L), Path(s, R), 0, j.span_id)
    return L[1:], R[1:], face


class NewmanProver:
    """Tilings proving that any path to the normal form equals the leftmost-innermost one."""

    def __init__(self, cert: CompletenessCertificate):
        if not cert.valid:
            raise InvalidCertificate("certificate is not valid")
        self.cert = cert
        self.th = cert.theory
        self._nf: dict = {}
        self._memo: dict = {}

    def nf(self, t: Term) -> tuple:
        got = self._nf.get(t)
        if got is None:
            got = normal_letters(self.th, t)
            self._nf[t] = got
        return got

    def to_nf(self, s: Term, P: tuple) -> list[Face]:
        """Faces rewriting word P (from s, ending in normal form) into the canonical word."""
        key = (s, P)
        got = self._memo.get(key)
        if got is not None:
            return got
        N = self.nf(s)
        if P == N:
            out: list[Face] = []
        elif not P or not N:
            raise DivergenceUnresolvable("a non-empty path between a normal form and itself")
        else:
            th = self.th
            x, y = P[0], N[0]
            s1 = replay(th, s, (x,))[-1]
            if x == y:
                out = [f.shifted(1) for f in self.to_nf(s1, P[1:])]
            else:
                s2 = replay(th, s, (y,))[-1]
                a, b, face = local_square(self.cert, s, x, y)
                u = replay(th, s1, a)[-1]
                Nu = self.nf(u)
                out = [f.shifted(1) for f in self.to_nf(s1, P[1:])]
                out += [f.flipped().shifted(1) for f in reversed(self.to_nf(s1, a + Nu))]
                out.append(face)
                out += [f.shifted(1) for f in self.to_nf(s2, b + Nu)]
        self._memo[key] = out
        return out


def prove_equal_to_nf(cert: CompletenessCertificate, phi, psi) -> Tiling:
    """Tiling proving two parallel paths into the normal form equal."""
    th = cert.theory
    p, q = as_path(th, phi), as_path(th, psi)
    if p.source != q.source:
        raise ValueError("paths have different sources")
    if p.letters == q.letters:
        return Tiling([Face("Composite", p, q, 0, None)])
    prover = _prover(cert)
    tp = replay(th, p.source, p.letters)
    if tp is None or find_redexes(th, tp[-1]):
        raise ValueError("first path does not end in a normal form")
    faces = prover.to_nf(p.source, p.letters) + [f.flipped() for f in reversed(prover.to_nf(q.source, q.letters))]
    used = {f.label for f in faces if f.kind == "Composite" and f.label}
    return Tiling(faces, _lemma_closure(cert.lemmas, used))


def _prover(cert: CompletenessCertificate) -> NewmanProver:
    got = cert._memo.get("prover")
    if got is None:
        got = NewmanProver(cert)
        cert._memo["prover"] = got
    return got


def random_nf_path(th: Theory2, t: Term, rng: random.Random, fuel: int = 10_000) -> tuple:
    """Letters of a uniformly-chosen-redex path from ``t`` to its normal form."""
    out = []
    cur = t
    for _ in range(fuel):
        reds = find_redexes(th, cur)
        if not reds:
            return tuple(out)
        r, ad, s = rng.choice(reds)
        cur, st = rewrite_step(th, cur, r, ad, s)
        out.append(st.letter)
    raise FuelExhausted(cur, out, fuel)


# ---------------------------------------------------- invertible factorization


def ladder(cert: CompletenessCertificate, th_full: Theory2, source: Term, word: Sequence) -> list[tuple]:
    """Per step of a mixed-sign word, a tiling of the square against the normal-form paths.

    Each entry is (claim_left Path, claim_right Path, Tiling) in the positive subtheory.
    """
    pos = cert.theory
    out = []
    cur = source
    for lab, ad in word:
        nxt, _ = rewrite_step(th_full, cur, lab, ad)
        r = th_full.rule(lab)
        if pos.has_rule(lab) and r.orientation > 0 and lab in {x.label for x in pos.rules}:
            left = Path(cur, ((lab, ad),) + normal_letters(pos, nxt))
            right = Path(cur, normal_letters(pos, cur))
        else:
            back = r.inverse
            left = Path(nxt, ((back, ad),) + normal_letters(pos, cur))
            right = Path(nxt, normal_letters(pos, nxt))
        out.append((left, right, prove_equal_to_nf(cert, left, right)))
        cur = nxt
    return out


# ----------------------------------------------------------------- verdict


def monicity_violations(th: Theory2) -> list[str]:
    """Declared axioms whose sides share a final step without the cancelled pair being declared."""
    paths = axiom_paths(th)
    declared = set()
    for L, R in paths.values():
        declared.add((T.canonical(L.source)[0], L.letters, R.letters))
        declared.add((T.canonical(R.source)[0], R.letters, L.letters))
    out = []
    for label, (L, R) in paths.items():
        a, b = list(L.letters), list(R.letters)
        while a and b and a[-1] == b[-1]:
            a.pop()
            b.pop()
        if len(a) == len(L.letters):
            continue
        if tuple(a) == tuple(b):
            continue
        if (T.canonical(L.source)[0], tuple(a), tuple(b)) not in declared:
            out.append(label)
    return out


@dataclass
class Verdict:
    status: str  # Coherent-by-thm-4 | Coherent-by-thm-4-invertible | Inconclusive
    reasons: list
    certificate: Optional[CompletenessCertificate] = None

    @property
    def coherent(self) -> bool:
        return self.status != "Inconclusive"


def maclane_verdict(
    th: Theory2,
    o: Optional[dict] = None,
    rk: Optional[RankFn] = None,
    fuel: int = DEFAULT_FACE_FUEL,
    n_samples: int = 300,
    max_wrappers: int = 3,
    time_limit: Optional[float] = None,
) -> Verdict:
    o = default_orientation(th) if o is None else o
    validate_orientation(th, o)
    pos = positive_subtheory(th, o)
    rk = rk if rk is not None else th.rank
    reasons = []
    if rk is None:
        reasons.append("no rank function declared; termination not certified")
    cert = certify_complete(pos, rk, fuel, n_samples=n_samples, max_wrappers=max_wrappers, time_limit=time_limit)
    if rk is not None and not cert.rank_report:
        cx = cert.rank_report.counterexample
        reasons.append(f"rank does not decrease on {pos.show_step(cx)} from {pos.show(cx.source)}")
    for u in cert.unproven:
        reasons.append(f"span {u.span_id} [source {pos.show(u.source)}]: {u.reason}")
    inv = [r for r in th.rules if r.invertible]
    if not reasons:
        if th.fully_invertible:
            return Verdict("Coherent-by-thm-4-invertible", [], cert)
        if not inv:
            bad = monicity_violations(th)
            if not bad:
                return Verdict("Coherent-by-thm-4", [], cert)
            reasons.extend(f"axiom {b} is not right-cancellable within the declared axioms" for b in bad)
        else:
            reasons.append("theory mixes invertible and non-invertible rules")
    return Verdict("Inconclusive", reasons, cert)
