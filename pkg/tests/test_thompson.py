import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from rw2 import presets as P
from rw2 import thompson as TM
from rw2.thompson import NTree, TreeDiagram


def _internal_nodes(shape, pre=()):
    """Independent walk: addresses of internal nodes of a nested-tuple tree."""
    if shape == ():
        return set()
    out = {pre}
    for k, c in enumerate(shape):
        out |= _internal_nodes(c, pre + (k,))
    return out


def _trees_up_to(n, carets):
    level = {NTree(n).shape}
    seen = set(level)
    for _ in range(carets):
        nxt = set()
        for sh in level:
            tr = NTree(n, sh)
            for i in range(tr.leaves):
                nxt.add(TM.expand(tr, i).shape)
        level = nxt - seen
        seen |= nxt
    return [NTree(n, s) for s in seen]


@pytest.mark.parametrize("n", [2, 3])
def test_mce_against_brute_force(n):
    pool = _trees_up_to(n, 4 if n == 2 else 3)
    rng = random.Random(7)
    for _ in range(60):
        a, b = rng.choice(pool), rng.choice(pool)
        want = _internal_nodes(a.shape) | _internal_nodes(b.shape)
        common = [t for t in _trees_up_to(n, len(want)) if _internal_nodes(t.shape) >= want]
        smallest = min(common, key=lambda t: t.leaves)
        assert TM.mce(a, b).shape == smallest.shape
        assert len([t for t in common if t.leaves == smallest.leaves]) == 1


def test_tree_text_round_trip():
    for text in (".", "(. .)", "(. (. .))", "((. . .) . (. . .))"):
        tr = TM.parse_tree(text)
        assert TM.show_tree(tr) == text
    with pytest.raises(TM.TreeError):
        TM.parse_tree("(. .")
    with pytest.raises(TM.TreeError):
        TM.parse_tree("((. .) . .)")


def test_diagram_examples():
    d = TreeDiagram(TM.parse_tree("(. (. .))"), TM.parse_tree("((. .) .)"), (0, 1, 2))
    assert TM.td_reduce(d) == d
    assert TM.td_mul(d, TM.td_inv(d)) == TM.td_id(2)
    e = TM.expand_diagram(d, 0)
    assert e.dom.leaves == 4 and TM.td_reduce(e) == d
    with pytest.raises(TM.TreeError):
        TreeDiagram(TM.parse_tree("(. .)"), TM.parse_tree("(. .)"), (0, 0))


@settings(max_examples=80)
@given(st.integers(2, 3), st.integers(0, 10 ** 6))
def test_reduction_is_confluent_under_expansion(n, seed):
    rng = random.Random(seed)
    d = TM.random_diagram(n, 9, rng)
    e = d
    for _ in range(rng.randint(1, 4)):
        e = TM.expand_diagram(e, rng.randrange(e.dom.leaves))
    assert TM.td_reduce(e) == TM.td_reduce(d)


@settings(max_examples=80)
@given(st.integers(2, 3), st.integers(0, 10 ** 6))
def test_group_laws(n, seed):
    rng = random.Random(seed)
    a, b, c = (TM.random_diagram(n, 9, rng) for _ in range(3))
    assert TM.td_mul(TM.td_mul(a, b), c) == TM.td_mul(a, TM.td_mul(b, c))
    assert TM.td_mul(a, TM.td_inv(a)) == TM.td_id(n)
    assert TM.td_mul(TM.td_id(n), a) == a
    assert TM.compose_perm(a.perm, TM.td_inv(a).perm) == tuple(range(len(a.perm)))


def test_theta_examples():
    c2 = P.catalan(2)
    assert str(TM.theta(c2, [("alpha1", ())])) == "(. (. .)) -> ((. .) .) [0 1 2]"
    sc2 = P.sym_catalan(2)
    d = TM.theta(sc2, [("tau1", ())])
    assert str(d) == "(. .) -> (. .) [1 0]" and not TM.is_order_preserving(d)
    assert TM.is_order_preserving(TM.theta(c2, [("alpha1", (("tensor", 2),))]))
    assert TM.theta(c2, [("alpha1", ()), ("alpha1_inv", ())]) == TM.td_id(2)


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_comb_transpositions(m):
    sc2 = P.sym_catalan(2)
    comb = TM.tree_of_term(TM.left_comb(2, m))
    for i in range(1, m):
        d = TM.expand_dom_to(TM.theta(sc2, TM.comb_transposition_word(m, i)), comb)
        swap = tuple(k + 1 if k == i - 1 else k - 1 if k == i else k for k in range(m))
        assert d.cod == comb and d.perm == swap
    with pytest.raises(TM.TreeError):
        TM.comb_transposition_word(m, m)


def test_left_comb():
    assert TM.tree_of_term(TM.left_comb(2, 3)).shape == TM.parse_tree("((. .) .)").shape
    with pytest.raises(TM.TreeError):
        TM.left_comb(3, 4)
