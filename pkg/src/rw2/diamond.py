"""Bounded reduction graphs, path enumeration and diamond detection."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import terms as T
from .terms import Address, Term, Var
from .theory import Rule, Theory2, find_redexes, random_term, rewrite_step


class IntervalTruncated(RuntimeError):
    """The exploration bound clipped the interval between a pair's endpoints."""


@dataclass(frozen=True)
class Edge:
    src: int
    rule: str
    address: Address
    dst: int

    @property
    def letter(self) -> tuple:
        return (self.rule, self.address)


@dataclass
class RedGraph:
    th: Theory2
    vertices: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    out: dict = field(default_factory=dict)
    inn: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)
    frontier: set = field(default_factory=set)  # vertices whose out-edges were not explored
    depth: int = 0

    def vertex(self, t: Term) -> int:
        return self.index[self.th.canon(t)]

    def add_vertex(self, t: Term) -> tuple[int, bool]:
        t = self.th.canon(t)
        k = self.index.get(t)
        if k is not None:
            return k, False
        k = len(self.vertices)
        self.vertices.append(t)
        self.index[t] = k
        self.out[k] = []
        self.inn[k] = []
        return k, True

    def export(self) -> str:
        """One edge per line: source term, rule@address and target term separated by tabs."""
        th = self.th
        lines = [
            f"{th.show(self.vertices[e.src])}\t{e.rule}@{th.show_addr(e.address)}\t{th.show(self.vertices[e.dst])}"
            for e in self.edges
        ]
        return "\n".join(lines) + ("\n" if lines else "")


def _edge_key(e: Edge) -> tuple:
    return (e.rule, T.address_key(e.address))


def build_graph(th: Theory2, seeds: Sequence[Term], depth: int) -> RedGraph:
    """Breadth-first closure of ``seeds`` under singular steps, ``depth`` layers deep."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    g = RedGraph(th, depth=depth)
    layer = []
    for s in seeds:
        k, new = g.add_vertex(s)
        if k not in g.seeds:
            g.seeds.append(k)
        if new:
            layer.append(k)
    for _ in range(depth):
        nxt = []
        for k in layer:
            t = g.vertices[k]
            found = []
            for r, ad, s in find_redexes(th, t):
                u, _ = rewrite_step(th, t, r, ad, s)
                found.append((r.label, ad, u))
            found.sort(key=lambda x: (x[0], T.address_key(x[1])))
            for label, ad, u in found:
                j, new = g.add_vertex(u)
                e = Edge(k, label, ad, j)
                g.edges.append(e)
                g.out[k].append(e)
                g.inn[j].append(e)
                if new:
                    nxt.append(j)
        layer = nxt
    g.frontier = set(layer)
    # layer-0 vertices are never frontier when depth > 0; with depth 0 everything is
    if depth == 0:
        g.frontier = set(range(len(g.vertices)))
    # a vertex already expanded is not frontier even if re-reached later
    g.frontier = {k for k in g.frontier if not g.out[k] and _has_redex(th, g.vertices[k])}
    return g


def _has_redex(th: Theory2, t: Term) -> bool:
    return bool(find_redexes(th, t))


def paths(g: RedGraph, s: int, t: int, max_len: int, _back: Optional[set] = None) -> list[tuple]:
    """Simple directed paths s -> t of at most ``max_len`` edges, in lexicographic order."""
    out: list = []
    if s == t:
        return [()]
    back = _reach_back(g, t) if _back is None else _back
    if s not in back:
        return out
    stack: list = []
    on = {s}

    def go(v: int) -> None:
        if len(stack) >= max_len:
            return
        for e in sorted(g.out[v], key=_edge_key):
            if e.dst in on or e.dst not in back:
                continue
            stack.append(e)
            if e.dst == t:
                out.append(tuple(stack))
            else:
                on.add(e.dst)
                go(e.dst)
                on.discard(e.dst)
            stack.pop()

    go(s)
    return out


def _reach_back(g: RedGraph, t: int) -> set:
    seen = {t}
    todo = [t]
    while todo:
        v = todo.pop()
        for e in g.inn[v]:
            if e.src not in seen:
                seen.add(e.src)
                todo.append(e.src)
    return seen


def _reach_fwd(g: RedGraph, s: int) -> set:
    seen = {s}
    todo = [s]
    while todo:
        v = todo.pop()
        for e in g.out[v]:
            if e.dst not in seen:
                seen.add(e.dst)
                todo.append(e.dst)
    return seen


@dataclass(frozen=True)
class ParallelPair:
    source: int
    target: int
    alpha: tuple
    beta: tuple

    def __post_init__(self) -> None:
        for p in (self.alpha, self.beta):
            start = p[0].src if p else self.target
            end = p[-1].dst if p else self.source
            if start != self.source or end != self.target:
                raise ValueError("paths do not share the pair's endpoints")

    def letters(self) -> tuple:
        return tuple(e.letter for e in self.alpha), tuple(e.letter for e in self.beta)


def interval(g: RedGraph, s: int, t: int) -> set:
    return _reach_fwd(g, s) & _reach_back(g, t)


def is_diamond(g: RedGraph, p: ParallelPair, allow_truncated: bool = False) -> bool:
    """True iff no undirected path inside the s-t interval joins the interiors of the two paths.

    Shared interior vertices count as a (length zero) connection.  Raises
    :class:`IntervalTruncated` when an unexplored vertex lies inside the
    forward cone of the source, unless ``allow_truncated``.
    """
    s, t = p.source, p.target
    if not allow_truncated and g.frontier & _reach_fwd(g, s):
        raise IntervalTruncated(f"exploration bound clips the interval from {g.th.show(g.vertices[s])}")
    return _separated(_components(g, s, t), p)


def _components(g: RedGraph, s: int, t: int, fwd: Optional[set] = None, back: Optional[set] = None) -> dict:
    """Undirected connected-component label of each vertex strictly inside the s-t interval."""
    box = ((_reach_fwd(g, s) if fwd is None else fwd) & (_reach_back(g, t) if back is None else back)) - {s, t}
    comp: dict = {}
    for v in box:
        if v in comp:
            continue
        comp[v] = v
        todo = deque([v])
        while todo:
            u = todo.popleft()
            for w in [e.dst for e in g.out[u]] + [e.src for e in g.inn[u]]:
                if w in box and w not in comp:
                    comp[w] = v
                    todo.append(w)
    return comp


def _separated(comp: dict, p: ParallelPair) -> bool:
    ca = {comp[e.dst] for e in p.alpha[:-1]}
    cb = {comp[e.dst] for e in p.beta[:-1]}
    return not (ca & cb)


def _common_prefix(letters: Sequence) -> Address:
    if not letters:
        return ()
    pre = letters[0][1]
    for _, ad in letters[1:]:
        k = 0
        while k < len(pre) and k < len(ad) and pre[k] == ad[k]:
            k += 1
        pre = pre[:k]
    return pre


def basic_diamonds(g: RedGraph, th: Optional[Theory2] = None, max_len: int = 6,
                   sources: Optional[Sequence[int]] = None) -> list[ParallelPair]:
    """Whisker-minimal, substitution-minimal diamonds of ``g``, one per renaming/swap class."""
    th = th or g.th
    srcs = list(range(len(g.vertices))) if sources is None else list(sources)
    found: list[ParallelPair] = []
    truncated = 0
    for s in srcs:
        if len(g.out[s]) < 2 and not _has_bigon(g, s):
            continue
        fwd = _reach_fwd(g, s)
        if g.frontier & fwd:
            truncated += 1
            continue
        for t in sorted(fwd - {s}):
            back = _reach_back(g, t)
            ps = paths(g, s, t, max_len, back)
            if len(ps) < 2:
                continue
            comp = _components(g, s, t, fwd, back)
            for a in range(len(ps)):
                for b in range(a + 1, len(ps)):
                    pa, pb = ps[a], ps[b]
                    if pa[0] == pb[0]:
                        continue
                    pair = ParallelPair(s, t, pa, pb)
                    if _separated(comp, pair):
                        found.append(pair)
    g.truncated_sources = truncated
    # whisker-minimal
    found = [p for p in found if not _common_prefix(p.letters()[0] + p.letters()[1])]
    # substitution-minimal
    groups: dict = {}
    for p in found:
        groups.setdefault(frozenset(p.letters()), []).append(p)
    keep = []
    for p in found:
        src = g.vertices[p.source]
        smaller = False
        for q in groups[frozenset(p.letters())]:
            if q is p:
                continue
            sig = T.match(g.vertices[q.source], src)
            if sig is not None and not T.is_renaming(sig):
                smaller = True
                break
        if not smaller:
            keep.append(p)
    # up to renaming and swapping
    out, seen = [], set()
    for p in keep:
        key = (T.canonical(g.vertices[p.source])[0], frozenset(p.letters()))
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def _has_bigon(g: RedGraph, s: int) -> bool:
    dsts = [e.dst for e in g.out[s]]
    return len(dsts) != len(set(dsts))


def show_pair(g: RedGraph, p: ParallelPair) -> str:
    th = g.th
    la, lb = p.letters()
    fa = " ; ".join(th.show_step(x) for x in la)
    fb = " ; ".join(th.show_step(x) for x in lb)
    return f"{th.show(g.vertices[p.source])} => {th.show(g.vertices[p.target])}: [{fa}] vs [{fb}]"


# ------------------------------------------------------------------- seeds


def _pretty(t: Term) -> Term:
    vs = T.variables(t)
    pool = "abcdefghuvwxyz"
    names = pool if len(vs) <= len(pool) else [f"x{k}" for k in range(len(vs))]
    return T.apply(t, {v: Var(names[k]) for k, v in enumerate(vs)})


def superposition_seeds(th: Theory2, depth: int) -> list[Term]:
    """Rule sources closed ``depth`` times under unifying a rule source into a non-variable position."""
    lhss = [r.lhs for r in th.rules if type(r.lhs) is not Var]
    seen: dict = {}
    layer = []
    for l in lhss:
        t = _pretty(l)
        key = T.canonical(t)[0]
        if key not in seen:
            seen[key] = t
            layer.append(t)
    for _ in range(depth):
        nxt = []
        for s in layer:
            for l in lhss:
                for ad, sub in T.positions(s):
                    if type(sub) is Var:
                        continue
                    a, b = T.rename_apart(s, l)
                    sig = T.unify(T.subterm(a, ad), b)
                    if sig is None:
                        continue
                    u = _pretty(T.apply(a, sig))
                    key = T.canonical(u)[0]
                    if key not in seen:
                        seen[key] = u
                        nxt.append(u)
        layer = nxt
    return list(seen.values())


# --------------------------------------------------------------- branching


@dataclass
class BranchingReport:
    status: str  # finitely-branching-evidence | counter-witness | no-evidence
    reasons: list
    family: list = field(default_factory=list)  # counter-witness: pairwise distinct targets
    sampled: list = field(default_factory=list)  # (term, number of reverse redexes)


def reversed_theory(th: Theory2) -> Theory2:
    rules = tuple(Rule(r.label + "_rev", r.rhs, r.lhs) for r in th.rules)
    return th.with_(name=th.name + "-rev", rules=rules, axioms=(), hidden=())


def reverse_branching_check(th: Theory2, samples: int = 100, seed: int = 0, family_size: int = 5) -> BranchingReport:
    """Evidence that every vertex has finitely many predecessors, or a counter-witness."""
    rev = reversed_theory(th)
    reasons = []
    if not rev.term_linear:
        reasons.append("equations are not term-linear")
    erasing = [r.label for r in th.rules if not set(T.variables(r.lhs)) <= set(T.variables(r.rhs))]
    if erasing:
        reasons.append("reversed rules increase variables: " + ", ".join(erasing))
    if not reasons:
        return BranchingReport("finitely-branching-evidence", ["reversed theory is term-linear and non-increasing"])
    fam = _duplication_family(th)
    if fam:
        return BranchingReport("counter-witness", reasons, family=fam[:family_size])
    rng = random.Random(seed)
    names = th.var_names[:3] or ("a", "b")
    plain = rev.with_(modulo=(), term_eqs=())
    sampled = []
    for _ in range(samples):
        t = random_term(th.signature, names, 4, rng)
        sampled.append((t, len(find_redexes(plain, t))))
    return BranchingReport("no-evidence", reasons, sampled=sampled)


def _duplication_family(th: Theory2, size: int = 5) -> list[Term]:
    """Targets b, r[b,a,...], r[r[b,a],a], ... of a rule a -> b along an equation x = r(x,...,x)."""
    for lhs, rhs in th.term_eqs:
        for x, ctx in ((lhs, rhs), (rhs, lhs)):
            if type(x) is not Var or T.var_occurrences(ctx).count(x.name) < 2:
                continue
            occ = [ad for ad, sub in T.positions(ctx) if sub == x]
            for r in th.rules:
                out = [r.rhs]
                for _ in range(size - 1):
                    u = T.apply(ctx, {x.name: r.lhs})
                    u = T.replace(u, occ[0], out[-1])
                    out.append(u)
                if len(set(out)) == len(out):
                    return out
    return []
