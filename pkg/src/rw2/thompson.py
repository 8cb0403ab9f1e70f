"""n-ary trees, tree diagrams and the Higman-Thompson groups F_{n,1} and G_{n,1}.

A tree is stored as its arity plus a nested tuple shape: a leaf is ``()`` and
an internal node is the tuple of its n children.  Leaves are indexed from 0
in left-to-right (lexicographic address) order; a diagram's permutation maps
domain leaf indices to codomain leaf indices.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Optional, Sequence

from . import terms as T
from .structmon import Operator, word_operator
from .terms import App, Term, Var
from .theory import Theory2

LEAF = ()


class TreeError(ValueError):
    pass


class EmptyOperator(ValueError):
    pass


@dataclass(frozen=True)
class NTree:
    n: int
    shape: tuple = LEAF

    def __post_init__(self) -> None:
        if self.n < 2:
            raise TreeError("arity must be at least 2")
        _check_shape(self.shape, self.n)

    @property
    def leaves(self) -> int:
        return _leaves(self.shape)

    def internal(self) -> frozenset:
        out = set()
        _internal(self.shape, (), out)
        return frozenset(out)

    def leaf_addresses(self) -> list[tuple]:
        out: list = []
        _leaf_addrs(self.shape, (), out)
        return out

    def __str__(self) -> str:
        return show_tree(self)


def _check_shape(sh, n: int) -> None:
    if sh == LEAF:
        return
    if not isinstance(sh, tuple) or len(sh) != n:
        raise TreeError(f"node with {len(sh) if isinstance(sh, tuple) else '?'} children in an {n}-ary tree")
    for c in sh:
        _check_shape(c, n)


def _leaves(sh) -> int:
    return 1 if sh == LEAF else sum(_leaves(c) for c in sh)


def _internal(sh, pre: tuple, out: set) -> None:
    if sh != LEAF:
        out.add(pre)
        for i, c in enumerate(sh):
            _internal(c, pre + (i,), out)


def _leaf_addrs(sh, pre: tuple, out: list) -> None:
    if sh == LEAF:
        out.append(pre)
    else:
        for i, c in enumerate(sh):
            _leaf_addrs(c, pre + (i,), out)


def from_internal(n: int, nodes: frozenset) -> NTree:
    def build(pre: tuple):
        if pre not in nodes:
            return LEAF
        return tuple(build(pre + (i,)) for i in range(n))

    return NTree(n, build(()))


def caret(n: int) -> NTree:
    return NTree(n, tuple(LEAF for _ in range(n)))


def expand(tr: NTree, leaf: int) -> NTree:
    """Replace leaf number ``leaf`` (lexicographic index) by an n-caret."""
    addrs = tr.leaf_addresses()
    if not 0 <= leaf < len(addrs):
        raise TreeError(f"tree has no leaf {leaf}")
    return from_internal(tr.n, tr.internal() | {addrs[leaf]})


def expand_at(tr: NTree, address: tuple) -> NTree:
    if address not in tr.leaf_addresses():
        raise TreeError(f"{address} is not a leaf")
    return from_internal(tr.n, tr.internal() | {address})


def mce(t1: NTree, t2: NTree) -> NTree:
    """Minimal common expansion: the tree whose internal nodes are the union of both."""
    if t1.n != t2.n:
        raise TreeError("arity mismatch")
    return from_internal(t1.n, t1.internal() | t2.internal())


def is_expansion(big: NTree, small: NTree) -> bool:
    return small.internal() <= big.internal()


# ----------------------------------------------------------------- parsing


def show_tree(tr: NTree) -> str:
    def go(sh) -> str:
        return "." if sh == LEAF else "(" + " ".join(go(c) for c in sh) + ")"

    return go(tr.shape)


def parse_tree(text: str, n: Optional[int] = None) -> NTree:
    """Parse ``.`` for a leaf and ``(t1 ... tn)`` for a node."""
    toks = re.findall(r"[().]|\S", text)
    pos = 0

    def go():
        nonlocal pos
        if pos >= len(toks):
            raise TreeError("unexpected end of tree")
        tok = toks[pos]
        pos += 1
        if tok == ".":
            return LEAF
        if tok != "(":
            raise TreeError(f"unexpected {tok!r} in tree")
        kids = []
        while pos < len(toks) and toks[pos] != ")":
            kids.append(go())
        if pos >= len(toks):
            raise TreeError("missing ')'")
        pos += 1
        return tuple(kids)

    sh = go()
    if pos != len(toks):
        raise TreeError(f"trailing input {''.join(toks[pos:])!r}")
    if n is None:
        n = len(sh) if sh != LEAF else 2
    return NTree(n, sh)


def tree_of_term(t: Term) -> NTree:
    """Shape of a one-symbol term, variables and constants as leaves."""
    def go(u):
        if type(u) is Var or not u.args:
            return LEAF
        return tuple(go(c) for c in u.args)

    sh = go(t)
    if sh == LEAF:
        raise TreeError("a bare variable has no arity")
    return NTree(len(sh), sh)


# ----------------------------------------------------------------- diagrams


@dataclass(frozen=True)
class TreeDiagram:
    dom: NTree
    cod: NTree
    perm: tuple

    def __post_init__(self) -> None:
        if self.dom.n != self.cod.n:
            raise TreeError("arity mismatch")
        k = self.dom.leaves
        if self.cod.leaves != k or sorted(self.perm) != list(range(k)):
            raise TreeError("permutation is not a bijection between the leaf sets")

    @property
    def n(self) -> int:
        return self.dom.n

    def __str__(self) -> str:
        return f"{show_tree(self.dom)} -> {show_tree(self.cod)} [{' '.join(map(str, self.perm))}]"


def td_id(n: int = 2) -> TreeDiagram:
    return TreeDiagram(NTree(n), NTree(n), (0,))


def expand_diagram(d: TreeDiagram, leaf: int) -> TreeDiagram:
    """Expand domain leaf ``leaf`` and its image together."""
    n = d.n
    j = d.perm[leaf]
    dom = expand(d.dom, leaf)
    cod = expand(d.cod, j)
    perm = []
    for i, p in enumerate(d.perm):
        q = p if p < j else (p + n - 1 if p > j else None)
        if i == leaf:
            perm.extend(j + k for k in range(n))
        else:
            perm.append(q)
    return TreeDiagram(dom, cod, tuple(perm))


def expand_dom_to(d: TreeDiagram, target: NTree) -> TreeDiagram:
    if not is_expansion(target, d.dom):
        raise TreeError("target is not an expansion of the domain")
    while d.dom.internal() != target.internal():
        want = target.internal()
        leaf = next(i for i, a in enumerate(d.dom.leaf_addresses()) if a in want)
        d = expand_diagram(d, leaf)
    return d


def td_inv(d: TreeDiagram) -> TreeDiagram:
    inv = [0] * len(d.perm)
    for i, p in enumerate(d.perm):
        inv[p] = i
    return TreeDiagram(d.cod, d.dom, tuple(inv))


def expand_cod_to(d: TreeDiagram, target: NTree) -> TreeDiagram:
    return td_inv(expand_dom_to(td_inv(d), target))


def td_reduce(d: TreeDiagram) -> TreeDiagram:
    """Contract paired carets until none remain."""
    n = d.n
    while True:
        hit = _reducible_caret(d)
        if hit is None:
            return d
        i, j = hit
        dom_addrs = d.dom.leaf_addresses()
        cod_addrs = d.cod.leaf_addresses()
        dom = from_internal(n, d.dom.internal() - {dom_addrs[i][:-1]})
        cod = from_internal(n, d.cod.internal() - {cod_addrs[j][:-1]})
        perm = []
        for k, p in enumerate(d.perm):
            if i < k < i + n:
                continue
            if k == i:
                perm.append(j)
            else:
                perm.append(p if p < j else p - (n - 1))
        d = TreeDiagram(dom, cod, tuple(perm))


def _reducible_caret(d: TreeDiagram) -> Optional[tuple[int, int]]:
    n = d.n
    da, ca = d.dom.leaf_addresses(), d.cod.leaf_addresses()
    for i, a in enumerate(da):
        if a and a[-1] == 0 and i + n <= len(da) and all(da[i + k] == a[:-1] + (k,) for k in range(n)):
            j = d.perm[i]
            b = ca[j]
            if not (b and b[-1] == 0 and j + n <= len(ca)):
                continue
            if all(d.perm[i + k] == j + k and ca[j + k] == b[:-1] + (k,) for k in range(n)):
                return i, j
    return None


def td_mul(d1: TreeDiagram, d2: TreeDiagram) -> TreeDiagram:
    """d1 followed by d2."""
    if d1.n != d2.n:
        raise TreeError("arity mismatch")
    m = mce(d1.cod, d2.dom)
    a = expand_cod_to(d1, m)
    b = expand_dom_to(d2, m)
    perm = tuple(b.perm[p] for p in a.perm)
    return td_reduce(TreeDiagram(a.dom, b.cod, perm))


def is_order_preserving(d: TreeDiagram) -> bool:
    return d.perm == tuple(range(len(d.perm)))


def random_tree(n: int, carets: int, rng: random.Random) -> NTree:
    tr = NTree(n)
    for _ in range(carets):
        tr = expand(tr, rng.randrange(tr.leaves))
    return tr


def random_diagram(n: int, max_leaves: int, rng: random.Random, order_preserving: bool = False) -> TreeDiagram:
    carets = rng.randint(0, max(0, (max_leaves - 1) // (n - 1)))
    dom, cod = random_tree(n, carets, rng), random_tree(n, carets, rng)
    perm = list(range(dom.leaves))
    if not order_preserving:
        rng.shuffle(perm)
    return td_reduce(TreeDiagram(dom, cod, tuple(perm)))


# --------------------------------------------------------------------- theta


def diagram_of_seed(s: Term, t: Term) -> TreeDiagram:
    """(T(s), T(t), π) with π sending each variable's position in s to its position in t."""
    us = [x for x in _frontier(s)]
    ut = [x for x in _frontier(t)]
    where = {x: k for k, x in enumerate(ut)}
    if sorted(map(str, us)) != sorted(map(str, ut)) or len(set(us)) != len(us):
        raise TreeError("seed is not linear and balanced")
    return TreeDiagram(tree_of_term(s), tree_of_term(t), tuple(where[x] for x in us))


def _frontier(t: Term) -> list:
    if type(t) is Var or not t.args:
        return [t]
    out = []
    for c in t.args:
        out.extend(_frontier(c))
    return out


def theta(th: Theory2, word: Sequence[tuple]) -> TreeDiagram:
    """Reduced diagram of the operator composed from a word of (rule, address) generators."""
    op = word_operator(th, word)
    return theta_of(op)


def theta_of(op: Operator) -> TreeDiagram:
    if op.empty:
        raise EmptyOperator("the word composes to the empty operator")
    if type(op.s) is Var:
        return td_id(2)
    return td_reduce(diagram_of_seed(op.s, op.t))


# ---------------------------------------------------------- Moore relations


def left_comb(n: int, m: int, sym: str = "tensor") -> Term:
    """Left comb on variables x1..xm (m ≡ 1 mod n-1)."""
    if (m - 1) % (n - 1):
        raise TreeError(f"an {n}-ary comb cannot have {m} leaves")
    xs = [Var(f"x{k}") for k in range(1, m + 1)]
    t: Term = xs[0]
    k = 1
    while k < m:
        t = App(sym, [t] + xs[k:k + n - 1])
        k += n - 1
    return t


def comb_transposition_word(m: int, i: int, sym: str = "tensor") -> list[tuple]:
    """Binary operator word swapping leaves i and i+1 (1-based) of the m-leaf left comb."""
    if not 1 <= i < m:
        raise TreeError("transposition index out of range")
    depth = m - 1 - i  # node whose right child is x_{i+1}
    p = tuple((sym, 1) for _ in range(depth))
    if i == 1:
        return [("tau1", p)]
    return [("alpha1_inv", p), ("tau1", p + ((sym, 2),)), ("alpha1", p)]


def perm_of(d: TreeDiagram) -> tuple:
    return d.perm


def compose_perm(p: Sequence[int], q: Sequence[int]) -> tuple:
    """p then q."""
    return tuple(q[x] for x in p)
