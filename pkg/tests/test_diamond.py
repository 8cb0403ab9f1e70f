import random
from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from rw2 import coherence as C
from rw2 import diamond as D
from rw2 import presets as P
from rw2.dsl import parse_term, parse_theory
from rw2.terms import App
from rw2.theory import Theory2

MON_POS = C.positive_subtheory(P.monoidal())


def test_build_graph_examples():
    th = parse_theory("sig F/1\nrule grow: F(x) -> F(F(x))\n")
    g = D.build_graph(th, [parse_term("F(a)", th)], 3)
    assert len(g.vertices) == 4 and len(g.frontier) == 1
    nested = P.nested_cex()
    g = D.build_graph(nested, [parse_term("I(I(a))", nested)], 6)
    assert len(g.vertices) == 5 and not g.frontier
    g = D.build_graph(MON_POS, [parse_term("a⊗(I⊗b)", MON_POS)], 5)
    assert len(g.vertices) == 3
    with pytest.raises(ValueError):
        D.build_graph(th, [], -1)


def test_truncated_interval_raises():
    th = parse_theory("sig F/1\nrule grow: F(x) -> F(F(x))\n")
    g = D.build_graph(th, [parse_term("F(a)", th)], 2)
    es = g.out[0]
    pair = D.ParallelPair(0, es[0].dst, (es[0],), (es[0],))
    with pytest.raises(D.IntervalTruncated):
        D.is_diamond(g, pair)


def _count_paths_dp(g, s, t, max_len):
    """Number of walks s->t with at most max_len edges (graphs here are acyclic)."""
    ways = defaultdict(int)
    ways[s] = 1
    total = 1 if s == t else 0
    for _ in range(max_len):
        nxt = defaultdict(int)
        for v, k in ways.items():
            for e in g.out[v]:
                nxt[e.dst] += k
        ways = nxt
        total += ways.get(t, 0)
    return total


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6), st.integers(1, 6))
def test_paths_match_dynamic_programming(seed, max_len):
    rng = random.Random(seed)
    t = P.random_catalan_term(2, 6, rng)
    g = D.build_graph(MON_POS, [t], 10)
    s = 0
    for target in range(len(g.vertices)):
        ps = D.paths(g, s, target, max_len)
        assert len(ps) == _count_paths_dp(g, s, target, max_len)
        assert len(set(ps)) == len(ps)
        for p in ps:
            assert len(p) <= max_len
            if p:
                assert p[0].src == s and p[-1].dst == target


def _manual_graph(edges, n):
    th = Theory2(signature={f"v{i}": 0 for i in range(n)}, rules=())
    g = D.RedGraph(th)
    for i in range(n):
        g.add_vertex(App(f"v{i}"))
    for a, b in edges:
        e = D.Edge(a, "r", (), b)
        g.edges.append(e)
        g.out[a].append(e)
        g.inn[b].append(e)
    return g


def test_square_is_diamond_but_zigzag_is_not():
    # 0 = source, 4 = target; 1 and 2 are the two interiors, 3 links them
    square = _manual_graph([(0, 1), (1, 4), (0, 2), (2, 4)], 5)
    alpha = (square.out[0][0], square.out[1][0])
    beta = (square.out[0][1], square.out[2][0])
    assert D.is_diamond(square, D.ParallelPair(0, 4, alpha, beta))
    zig = _manual_graph([(0, 1), (1, 4), (0, 2), (2, 4), (0, 3), (3, 1), (3, 2), (3, 4)], 5)
    alpha = (zig.out[0][0], zig.out[1][0])
    beta = (zig.out[0][1], zig.out[2][0])
    assert not D.is_diamond(zig, D.ParallelPair(0, 4, alpha, beta))


def test_pair_rejects_mismatched_endpoints():
    g = _manual_graph([(0, 1), (1, 2)], 3)
    with pytest.raises(ValueError):
        D.ParallelPair(0, 2, (g.out[0][0],), (g.out[0][0], g.out[1][0]))


def test_basic_diamond_examples():
    nested = P.nested_cex()
    g = D.build_graph(nested, [parse_term("I(I(a))", nested)], 6)
    found = D.basic_diamonds(g, nested)
    assert len(found) == 2
    g = D.build_graph(MON_POS, [parse_term("a⊗(I⊗b)", MON_POS)], 5)
    found = D.basic_diamonds(g)
    assert len(found) == 1
    assert D.show_pair(g, found[0]).startswith("⊗(a,⊗(I,b)) => ⊗(a,b)")


def test_diamond_census_invariant_under_renaming_and_seed_order():
    disj = P.disjoint_cex()
    s1 = [parse_term("I(a)⊗I(a)", disj), parse_term("I(b)", disj)]
    s2 = [parse_term("I(b)", disj), parse_term("I(c)⊗I(c)", disj)]
    g1, g2 = D.build_graph(disj, s1, 6), D.build_graph(disj, s2, 6)
    k1 = sorted(p.letters() for p in D.basic_diamonds(g1))
    k2 = sorted(p.letters() for p in D.basic_diamonds(g2))
    assert k1 == k2
    # swapping the two paths of a pair yields the same class
    for p in D.basic_diamonds(g1):
        assert D.is_diamond(g1, D.ParallelPair(p.source, p.target, p.beta, p.alpha))


def test_branching_examples():
    th, _ = P.branching_cex()
    rep = D.reverse_branching_check(th)
    assert rep.status == "counter-witness"
    assert len(set(rep.family)) == len(rep.family) >= 2
    assert D.reverse_branching_check(MON_POS).status == "finitely-branching-evidence"


def test_export_format():
    g = D.build_graph(MON_POS, [parse_term("a⊗(I⊗b)", MON_POS)], 5)
    lines = g.export().splitlines()
    assert len(lines) == len(g.edges)
    assert all(len(line.split("\t")) == 3 for line in lines)
