"""Rules, theory presentations, redex search, normalization and rank certificates."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field, replace as dc_replace
from typing import Callable, Iterable, Optional, Sequence

from . import terms as T
from .terms import App, Address, Term, Var

DEFAULT_FUEL = 10_000


def default_fuel() -> int:
    raw = os.environ.get("RW2_FUEL")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_FUEL


class TheoryError(ValueError):
    pass


class FuelExhausted(RuntimeError):
    def __init__(self, term: Term, trace: list, fuel: int):
        super().__init__(f"fuel exhausted after {fuel} steps")
        self.term = term
        self.trace = trace
        self.fuel = fuel


class NotARedex(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    label: str
    lhs: Term
    rhs: Term
    invertible: bool = False
    orientation: int = 1
    inverse: Optional[str] = None

    @property
    def lhs_vars(self) -> tuple[str, ...]:
        return T.variables(self.lhs)

    @property
    def non_increasing(self) -> bool:
        return set(T.variables(self.rhs)) <= set(T.variables(self.lhs))

    def __str__(self) -> str:
        return f"{self.label}: {T.show(self.lhs)} -> {T.show(self.rhs)}"


@dataclass(frozen=True)
class CoherenceAxiom:
    label: str
    lhs_word: object  # prooft expression
    rhs_word: object


@dataclass(frozen=True)
class Measure:
    """Integer measure defined by affine recursion over children.

    ``clauses[symbol] = (terms, const)`` where each term is
    ``(measure_name, child_index, coefficient)``.
    """

    name: str
    base: int
    clauses: dict


@dataclass(frozen=True)
class RankFn:
    measures: dict  # name -> Measure
    main: str = "rank"

    def values(self, t: Term, _memo: Optional[dict] = None) -> dict:
        memo = {} if _memo is None else _memo
        return self._vals(t, memo)

    def _vals(self, t: Term, memo: dict) -> dict:
        got = memo.get(t)
        if got is not None:
            return got
        if type(t) is Var:
            out = {m.name: m.base for m in self.measures.values()}
        else:
            kids = [self._vals(c, memo) for c in t.args]
            out = {}
            for m in self.measures.values():
                clause = m.clauses.get(t.head)
                if clause is None:
                    if t.args:
                        raise TheoryError(f"measure {m.name!r} undefined on symbol {t.head!r}")
                    out[m.name] = m.base
                    continue
                terms, const = clause
                v = const
                for mname, idx, coef in terms:
                    v += coef * kids[idx - 1][mname]
                out[m.name] = v
        memo[t] = out
        return out

    def __call__(self, t: Term) -> int:
        return self.values(t)[self.main]

    def covers(self, signature: dict) -> list[str]:
        """Symbols of positive arity lacking a clause in some measure."""
        missing = []
        for sym, ar in signature.items():
            for m in self.measures.values():
                if ar > 0 and sym not in m.clauses:
                    missing.append(f"{m.name}:{sym}")
                clause = m.clauses.get(sym)
                if clause:
                    for mname, idx, _ in clause[0]:
                        if idx > ar or mname not in self.measures:
                            missing.append(f"{m.name}:{sym}:${idx}")
        return missing


@dataclass(frozen=True)
class SingularStep:
    rule: str
    address: Address
    source: Term
    target: Term
    subst: dict = field(compare=False, hash=False, default_factory=dict)

    @property
    def letter(self) -> tuple[str, Address]:
        return (self.rule, self.address)

    def __str__(self) -> str:
        return f"{self.rule}@{T.format_address(self.address)}"


@dataclass
class Theory2:
    name: str = "theory"
    signature: dict = field(default_factory=dict)  # symbol -> arity, declaration order
    rules: tuple = ()
    term_eqs: tuple = ()
    axioms: tuple = ()
    modulo: tuple = ()  # convergent orientation of term_eqs
    rank: Optional[RankFn] = None
    aliases: dict = field(default_factory=dict)  # alias -> symbol
    display: dict = field(default_factory=dict)  # symbol -> printed alias
    var_names: tuple = ()
    hidden: tuple = ()  # rules dropped from rewriting but kept for inverse steps
    warnings: list = field(default_factory=list)

    def __post_init__(self) -> None:
        self._reindex()

    def _reindex(self) -> None:
        self._by_label = {r.label: r for r in self.hidden}
        self._by_label.update({r.label: r for r in self.rules})
        self._by_head: dict = {}
        for r in self.rules:
            head = r.lhs.head if type(r.lhs) is App else None
            self._by_head.setdefault(head, []).append(r)
        self._any = self._by_head.get(None, [])

    def with_(self, **kw) -> "Theory2":
        return dc_replace(self, **kw)

    def rule(self, label: str) -> Rule:
        try:
            return self._by_label[label]
        except KeyError:
            raise TheoryError(f"unknown rule {label!r}") from None

    def has_rule(self, label: str) -> bool:
        return label in self._by_label

    def rules_for(self, head: str) -> list:
        own = self._by_head.get(head, [])
        if not self._any:
            return own
        return [r for r in self.rules if r in own or r in self._any]

    @property
    def term_linear(self) -> bool:
        return all(
            set(T.variables(a)) == set(T.variables(b)) and T.is_linear(a) and T.is_linear(b)
            for a, b in self.term_eqs
        )

    @property
    def non_increasing(self) -> bool:
        return all(r.non_increasing for r in self.rules)

    @property
    def fully_invertible(self) -> bool:
        return bool(self.rules) and all(r.invertible for r in self.rules)

    def show(self, t: Term) -> str:
        return T.show(t, self.display)

    def show_addr(self, a: Address) -> str:
        return T.format_address(a, self.display)

    def show_step(self, s) -> str:
        rule, addr = (s.rule, s.address) if isinstance(s, SingularStep) else s
        return f"{rule}@{self.show_addr(addr)}"

    def canon(self, t: Term) -> Term:
        return e_normalize(self.modulo, t) if self.modulo else t


# ---------------------------------------------------------------- redexes


def find_redexes(th: Theory2, t: Term) -> list[tuple[Rule, Address, dict]]:
    out = []
    for addr, sub in T.positions(t):
        cands = th._any if type(sub) is Var else th.rules_for(sub.head)
        for r in cands:
            s = T.match(r.lhs, sub)
            if s is not None:
                out.append((r, addr, s))
    return out


def redexes_at(th: Theory2, t: Term, addr: Address) -> list[tuple[Rule, dict]]:
    sub = T.subterm(t, addr)
    if sub is None:
        return []
    out = []
    for r in th._any if type(sub) is Var else th.rules_for(sub.head):
        s = T.match(r.lhs, sub)
        if s is not None:
            out.append((r, s))
    return out


def rewrite_step(
    th: Theory2, t: Term, rule, address: Address, subst: Optional[dict] = None
) -> tuple[Term, SingularStep]:
    r = rule if isinstance(rule, Rule) else th.rule(rule)
    sub = T.subterm(t, address)
    if sub is None:
        raise NotARedex(f"address {T.format_address(address)} invalid in {T.show(t)}")
    s = T.match(r.lhs, sub)
    if s is None or (subst is not None and any(s.get(k) != v for k, v in subst.items() if k in s)):
        raise NotARedex(f"{r.label} does not match at {T.format_address(address)} in {T.show(t)}")
    missing = [v for v in T.variables(r.rhs) if v not in s]
    if missing:
        if subst is None or any(v not in subst for v in missing):
            raise NotARedex(f"{r.label}: right-hand side variables {missing} unbound")
        s = {**s, **{v: subst[v] for v in missing}}
    target = T.replace(t, address, T.apply(r.rhs, s))
    if th.modulo:
        target = e_normalize(th.modulo, target)
    return target, SingularStep(r.label, address, t, target, s)


def step_target(th: Theory2, t: Term, label: str, address: Address) -> Optional[Term]:
    """Target of applying ``label`` at ``address`` or None when it does not apply."""
    try:
        return rewrite_step(th, t, label, address)[0]
    except (NotARedex, T.InvalidAddress):
        return None


def replay(th: Theory2, source: Term, letters: Sequence[tuple[str, Address]]) -> Optional[list[Term]]:
    """Terms visited by a word of (rule, address) letters, or None if some step fails."""
    out = [source]
    cur = source
    for label, addr in letters:
        nxt = step_target(th, cur, label, addr)
        if nxt is None:
            return None
        out.append(nxt)
        cur = nxt
    return out


# ----------------------------------------------------------- normalization

STRATEGIES = ("leftmost-innermost", "leftmost-outermost", "random")


def _innermost(th: Theory2, t: Term, prefix: Address = ()) -> Optional[tuple[Rule, Address, dict]]:
    if type(t) is Var:
        return None
    for i, c in enumerate(t.args, 1):
        got = _innermost(th, c, prefix + ((t.head, i),))
        if got is not None:
            return got
    for r in th.rules_for(t.head):
        s = T.match(r.lhs, t)
        if s is not None:
            return r, prefix, s
    return None


def _outermost(th: Theory2, t: Term) -> Optional[tuple[Rule, Address, dict]]:
    for addr, sub in T.positions(t):
        if type(sub) is Var:
            continue
        for r in th.rules_for(sub.head):
            s = T.match(r.lhs, sub)
            if s is not None:
                return r, addr, s
    return None


def normalize(
    th: Theory2,
    t: Term,
    strategy: str = "leftmost-innermost",
    fuel: Optional[int] = None,
    seed: int = 0,
) -> tuple[Term, list[SingularStep]]:
    """Rewrite to a normal form. ``strategy`` may be ``random`` or ``random:<seed>``."""
    fuel = default_fuel() if fuel is None else fuel
    if strategy.startswith("random"):
        _, _, tail = strategy.partition(":")
        rng = random.Random(int(tail) if tail else seed)
        pick: Callable = lambda u: (lambda rs: rng.choice(rs) if rs else None)(find_redexes(th, u))
    elif strategy in ("leftmost-innermost", "li", "innermost"):
        pick = lambda u: _innermost(th, u)
    elif strategy in ("leftmost-outermost", "lo", "outermost"):
        pick = lambda u: _outermost(th, u)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    cur = th.canon(t)
    trace: list[SingularStep] = []
    while True:
        red = pick(cur)
        if red is None:
            return cur, trace
        if len(trace) >= fuel:
            raise FuelExhausted(cur, trace, fuel)
        r, addr, s = red
        cur, step = rewrite_step(th, cur, r, addr, s)
        trace.append(step)


def normal_letters(th: Theory2, t: Term, fuel: Optional[int] = None) -> tuple[tuple[str, Address], ...]:
    _, trace = normalize(th, t, "leftmost-innermost", fuel)
    return tuple(s.letter for s in trace)


def e_normalize(conv: Sequence[Rule], t: Term, fuel: Optional[int] = None) -> Term:
    """Canonical representative under a convergent auxiliary rule set."""
    if not conv:
        return t
    aux = Theory2(name="modulo", rules=tuple(conv))
    return normalize(aux, t, "leftmost-innermost", fuel)[0]


# ---------------------------------------------------------------- sampling


def random_term(
    signature: dict,
    var_names: Sequence[str],
    max_depth: int,
    rng: random.Random,
    p_leaf: float = 0.3,
) -> Term:
    syms = [(s, a) for s, a in signature.items()]
    consts = [s for s, a in syms if a == 0]
    funcs = [(s, a) for s, a in syms if a > 0]

    def leaf() -> Term:
        if consts and (not var_names or rng.random() < 0.25):
            return App(rng.choice(consts))
        return Var(rng.choice(list(var_names)))

    def go(d: int) -> Term:
        if d == 0 or not funcs or rng.random() < p_leaf:
            return leaf()
        s, a = rng.choice(funcs)
        return App(s, [go(d - 1) for _ in range(a)])

    return go(max_depth)


def term_sampler(th: Theory2, max_depth: int = 7, var_names: Sequence[str] = ("a", "b", "c", "d")):
    return lambda rng: random_term(th.signature, var_names, max_depth, rng)


@dataclass
class RankVerdict:
    certified: bool
    samples: int
    steps_checked: int
    counterexample: Optional[SingularStep] = None
    before: Optional[int] = None
    after: Optional[int] = None

    def __bool__(self) -> bool:
        return self.certified


def check_rank_certificate(
    th: Theory2,
    rk: RankFn,
    sampler: Callable[[random.Random], Term],
    n_samples: int = 1000,
    seed: int = 0,
) -> RankVerdict:
    """Sampled check that every redex step strictly decreases ``rk``."""
    missing = rk.covers(th.signature)
    if missing:
        raise TheoryError(f"rank function not total: {missing}")
    rng = random.Random(seed)
    checked = 0
    for _ in range(n_samples):
        t = sampler(rng)
        memo: dict = {}
        before = rk.values(t, memo)[rk.main]
        for r, addr, s in find_redexes(th, t):
            u, step = rewrite_step(th, t, r, addr, s)
            after = rk.values(u, memo)[rk.main]
            checked += 1
            if after >= before:
                return RankVerdict(False, n_samples, checked, step, before, after)
    return RankVerdict(True, n_samples, checked)


def rule_rank_check(th: Theory2, rk: RankFn) -> list[str]:
    """Rules whose instance at fresh variables does not decrease ``rk``."""
    return [r.label for r in th.rules if rk(r.rhs) >= rk(r.lhs)]
