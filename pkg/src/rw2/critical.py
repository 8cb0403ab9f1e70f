"""Overlaps between rule left-hand sides and the critical spans they generate."""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Optional

from . import terms as T
from .terms import Address, Term, Var
from .theory import Rule, SingularStep, Theory2, normalize, rewrite_step


@dataclass(frozen=True)
class Overlap:
    rule1: str
    rule2: str
    address: Address
    unifier: dict
    trivial: bool = False

    def __hash__(self) -> int:
        return hash((self.rule1, self.rule2, self.address))


@dataclass(frozen=True)
class CriticalSpan:
    id: str
    source: Term
    left: SingularStep
    right: SingularStep

    @property
    def letters(self) -> tuple:
        return (self.left.letter, self.right.letter)


def overlaps(r1: Rule, r2: Rule, include_trivial: bool = False) -> list[Overlap]:
    """Unifiable placements of ``r2.lhs`` at non-variable positions of ``r1.lhs``."""
    if type(r1.lhs) is Var or type(r2.lhs) is Var:
        return []
    l1, l2 = T.rename_apart(r1.lhs, r2.lhs)
    out = []
    for addr, sub in T.positions(l1):
        if type(sub) is Var:
            continue
        trivial = addr == () and r1.label == r2.label
        if trivial and not include_trivial:
            continue
        s = T.unify(sub, l2)
        if s is not None:
            out.append(Overlap(r1.label, r2.label, addr, s, trivial))
    out.sort(key=lambda o: T.address_key(o.address))
    return out


def _pretty_names(t: Term) -> Term:
    vs = T.variables(t)
    pool = [c for c in string.ascii_lowercase if c not in "ijklmnopqrs"]
    names = pool if len(vs) <= len(pool) else [f"x{i}" for i in range(1, len(vs) + 1)]
    return T.apply(t, {v: Var(names[i]) for i, v in enumerate(vs)})


def span_of(th: Theory2, ov: Overlap) -> CriticalSpan:
    r1, r2 = th.rule(ov.rule1), th.rule(ov.rule2)
    l1, _ = T.rename_apart(r1.lhs, r2.lhs)
    source = _pretty_names(T.apply(l1, ov.unifier))
    _, left = rewrite_step(th, source, r1, ())
    _, right = rewrite_step(th, source, r2, ov.address)
    sid = f"{r1.label}~{r2.label}@{T.format_address(ov.address, th.display)}"
    return CriticalSpan(sid, source, left, right)


def critical_spans(th: Theory2, which: str = "all") -> list[CriticalSpan]:
    """All critical spans, deduplicated up to renaming and swapping the two legs.

    ``which`` is ``all`` or ``positive`` (rules with orientation -1 are skipped).
    """
    if which not in ("all", "positive", "positive-only"):
        raise ValueError(f"unknown rule selection {which!r}")
    rules = [r for r in th.rules if which == "all" or r.orientation > 0]
    seen: dict = {}
    for r1 in rules:
        for r2 in rules:
            for ov in overlaps(r1, r2):
                sp = span_of(th, ov)
                key = (T.canonical(sp.source)[0], frozenset(sp.letters))
                if key not in seen:
                    seen[key] = sp
    return sorted(seen.values(), key=lambda s: (_rule_pos(th, s.left.rule), _rule_pos(th, s.right.rule),
                                                T.address_key(s.right.address), s.id))


def _rule_pos(th: Theory2, label: str) -> int:
    for i, r in enumerate(th.rules):
        if r.label == label:
            return i
    return len(th.rules)


def span_by_id(spans: list[CriticalSpan], sid: str) -> Optional[CriticalSpan]:
    return next((s for s in spans if s.id == sid), None)


def modulo_convergence(conv, fuel: int = 1000) -> list[str]:
    """Critical spans of a convergent auxiliary rule set whose legs normalize apart.

    An empty list means every critical pair of ``conv`` joins syntactically within fuel.
    """
    aux = Theory2(name="modulo", rules=tuple(conv))
    bad = []
    for sp in critical_spans(aux):
        a = normalize(aux, sp.left.target, fuel=fuel)[0]
        b = normalize(aux, sp.right.target, fuel=fuel)[0]
        if a != b:
            bad.append(sp.id)
    return bad
