"""Structure-monoid operators represented by seeds.

An operator is either the empty operator ``EMPTY`` or a pair of linear terms
(s, t) with the same variables acting by ``s^φ ↦ t^φ``.  Seeds are exact for
theories with a single function symbol whose rules are balanced and linear,
which is the scope where this module accepts a theory.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import terms as T
from .terms import Address, App, FreshVars, Term, Var
from .theory import Theory2


class UnsupportedTheory(ValueError):
    pass


@dataclass(frozen=True)
class Operator:
    s: Optional[Term]
    t: Optional[Term]
    word: tuple = field(default=(), compare=False)

    @property
    def empty(self) -> bool:
        return self.s is None

    def key(self):
        """Seed up to joint renaming; None for the empty operator."""
        return None if self.empty else T.canonical(self.s, self.t)

    def same(self, other: "Operator") -> bool:
        return self.key() == other.key()

    @property
    def idempotent(self) -> bool:
        return not self.empty and T.canonical(self.s, self.s) == T.canonical(self.s, self.t)

    def show(self, th: Optional[Theory2] = None) -> str:
        if self.empty:
            return "ε"
        sh = th.show if th else T.show
        return f"({sh(self.s)} ↦ {sh(self.t)})"


EMPTY = Operator(None, None)


def _symbol(th: Theory2) -> tuple[str, int]:
    funcs = [(s, a) for s, a in th.signature.items() if a > 0]
    if len(funcs) != 1:
        raise UnsupportedTheory(f"seed operators need exactly one function symbol, {th.name} has {len(funcs)}")
    for r in tuple(th.rules) + tuple(th.hidden):
        if not (T.is_linear(r.lhs) and T.is_linear(r.rhs)) or set(T.variables(r.lhs)) != set(T.variables(r.rhs)):
            raise UnsupportedTheory(f"rule {r.label} is not balanced and linear")
    return funcs[0]


def context(th: Theory2, address: Address, fresh: FreshVars) -> tuple[Term, Var]:
    """The most general term exposing ``address``, with the hole as a fresh variable."""
    hole = fresh()
    t: Term = hole
    for sym, i in reversed(address):
        _, n = _symbol(th)
        if sym != _symbol(th)[0]:
            raise T.InvalidAddress(f"address mentions {sym!r}, the theory's symbol is {_symbol(th)[0]!r}")
        kids = [fresh() for _ in range(n)]
        kids[i - 1] = t
        t = App(sym, kids)
    return t, hole


def op_gen(th: Theory2, label: str, address: Address = (), subst: Optional[dict] = None) -> Operator:
    """The address-translated copy of a rule's operator (optionally at a substitution instance)."""
    _symbol(th)
    r = th.rule(label)
    fresh = FreshVars("g")
    ctx, hole = context(th, address, fresh)
    ren = {v: fresh() for v in T.variables(r.lhs)}
    lhs, rhs = T.apply(r.lhs, ren), T.apply(r.rhs, ren)
    if subst:
        sub = {ren[k].name: v for k, v in subst.items() if k in ren}
        lhs, rhs = T.apply(lhs, sub), T.apply(rhs, sub)
    s = T.apply(ctx, {hole.name: lhs})
    t = T.apply(ctx, {hole.name: rhs})
    s, t = T.canonical(s, t)
    return Operator(s, t, ((label, address),))


def op_identity(th: Theory2, term: Term, address: Address = ()) -> Operator:
    """ρ_{u,u} translated to ``address``."""
    _symbol(th)
    fresh = FreshVars("g")
    ctx, hole = context(th, address, fresh)
    u = T.apply(term, {v: fresh() for v in T.variables(term)})
    s = T.apply(ctx, {hole.name: u})
    s, t = T.canonical(s, s)
    return Operator(s, t, (("id", address),))


def op_apply(o: Operator, u: Term) -> Optional[Term]:
    if o.empty:
        return None
    phi = T.match(o.s, u)
    return None if phi is None else T.apply(o.t, phi)


def _tagged(t: Term, tag: str) -> Term:
    return T.apply(t, {v: Var(f"{v}{tag}") for v in T.variables(t)})


def op_compose(o1: Operator, o2: Operator) -> Operator:
    """First o1, then o2; the empty operator when the middle terms do not unify."""
    if o1.empty or o2.empty:
        return EMPTY
    a = _tagged(App("pair", [o1.s, o1.t]), "l")
    b = _tagged(App("pair", [o2.s, o2.t]), "r")
    s1, t1 = a.args
    s2, t2 = b.args
    sig = T.unify(t1, s2)
    if sig is None:
        return Operator(None, None, o1.word + o2.word)
    s, t = T.canonical(T.apply(s1, sig), T.apply(t2, sig))
    return Operator(s, t, o1.word + o2.word)


def op_inverse(o: Operator) -> Operator:
    if o.empty:
        return EMPTY
    inv = tuple((lab, ad) for lab, ad in reversed(o.word))
    s, t = T.canonical(o.t, o.s)
    return Operator(s, t, inv)


def compose_all(ops: Sequence[Operator], group: bool = False) -> Operator:
    """Left-to-right composite; ``group`` drops idempotent factors first."""
    if group:
        ops = [o for o in ops if not o.idempotent]
    if not ops:
        return Operator(Var("x"), Var("x"))
    out = ops[0]
    for o in ops[1:]:
        out = op_compose(out, o)
    return out


def word_operator(th: Theory2, word: Sequence[tuple]) -> Operator:
    return compose_all([op_gen(th, lab, ad) for lab, ad in word])


# ------------------------------------------------------------- relations


@dataclass
class Relation:
    family: str
    left: list
    right: list

    def evaluate(self, group: bool = True) -> str:
        a, b = compose_all(self.left, group), compose_all(self.right, group)
        if a.empty and b.empty:
            return "both-ε"
        return "equal" if a.same(b) else "unequal"


def check_relation(rel: Relation, group: bool = True) -> str:
    return rel.evaluate(group)


def _random_address(th: Theory2, rng: random.Random, max_depth: int) -> Address:
    sym, n = _symbol(th)
    return tuple((sym, rng.randint(1, n)) for _ in range(rng.randint(0, max_depth)))


def _random_instance(th: Theory2, label: str, rng: random.Random) -> dict:
    sym, n = _symbol(th)
    r = th.rule(label)
    out = {}
    for v in T.variables(r.lhs):
        if rng.random() < 0.3:
            out[v] = App(sym, [Var(f"q{v}{k}") for k in range(n)])
    return out


ATOMS = ("a", "b", "c")


def _ground(th: Theory2, rng: random.Random, depth: int) -> Term:
    sym, n = _symbol(th)
    if depth == 0 or rng.random() < 0.5:
        return App(rng.choice(ATOMS), [])
    return App(sym, [_ground(th, rng, depth - 1) for _ in range(n)])


def ground_instance(th: Theory2, label: str, rng: random.Random, depth: int = 2) -> dict:
    """Substitution sending each rule variable to a random ground term over atom constants."""
    return {v: _ground(th, rng, depth) for v in T.variables(th.rule(label).lhs)}


def _orthogonal_pair(th, rng, max_depth):
    while True:
        a, b = _random_address(th, rng, max_depth), _random_address(th, rng, max_depth)
        if T.orthogonal(a, b):
            return a, b


def random_relation(th: Theory2, family: str, rng: random.Random, max_depth: int = 3) -> Relation:
    """A random instance of one relation family over the theory's generators."""
    labels = [r.label for r in tuple(th.rules) + tuple(th.hidden)]
    lab = rng.choice(labels)
    ad = _random_address(th, rng, max_depth)
    g = op_gen(th, lab, ad, _random_instance(th, lab, rng))
    if family == "identity":
        r = th.rule(lab)
        i_s = op_identity(th, r.lhs, ad)
        i_t = op_identity(th, r.rhs, ad)
        if rng.random() < 0.5:
            return Relation(family, [i_s, g], [g])
        return Relation(family, [g, i_t], [g])
    if family == "composition":
        # Linear one-symbol seeds over variables always unify, so clashes are
        # sought among ground instances over atom constants.
        for _ in range(500):
            g = op_gen(th, lab, ad, ground_instance(th, lab, rng))
            other = rng.choice(labels)
            h = op_gen(th, other, ad, ground_instance(th, other, rng))
            if op_compose(g, h).empty:
                return Relation(family, [g, h], [EMPTY])
        raise RuntimeError("no non-composable pair found")
    if family == "empty":
        return Relation(family, [g, EMPTY] if rng.random() < 0.5 else [EMPTY, g], [EMPTY])
    if family == "functoriality":
        a, b = _orthogonal_pair(th, rng, max_depth)
        l1, l2 = rng.choice(labels), rng.choice(labels)
        x, y = op_gen(th, l1, a), op_gen(th, l2, b)
        return Relation(family, [x, y], [y, x])
    if family == "naturality":
        r = th.rule(lab)
        x = rng.choice(T.variables(r.lhs))
        beta = next(p for p, sub in T.positions(r.lhs) if sub == Var(x))
        gamma = next(p for p, sub in T.positions(r.rhs) if sub == Var(x))
        delta = _random_address(th, rng, 1)
        inner = rng.choice(labels)
        outer = op_gen(th, lab, ad)
        return Relation(
            family,
            [outer, op_gen(th, inner, ad + gamma + delta)],
            [op_gen(th, inner, ad + beta + delta), outer],
        )
    if family == "coherence":
        from .prooft import axiom_paths

        axes = axiom_paths(th)
        name = rng.choice(sorted(axes))
        L, R = axes[name]
        pre = _random_address(th, rng, max_depth)
        left = [op_gen(th, l, pre + a) for l, a in L.letters]
        right = [op_gen(th, l, pre + a) for l, a in R.letters]
        return Relation(f"coherence:{name}", left, right)
    raise ValueError(f"unknown relation family {family!r}")


RELATION_FAMILIES = ("identity", "composition", "empty", "functoriality", "naturality", "coherence")
