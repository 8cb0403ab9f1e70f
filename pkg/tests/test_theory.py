import random

import pytest
from hypothesis import given, settings, strategies as st

from rw2 import coherence as C
from rw2 import presets as P
from rw2 import terms as T
from rw2.dsl import parse_term, parse_theory
from rw2.terms import App, Var
from rw2.theory import (FuelExhausted, NotARedex, Measure, RankFn, Rule, Theory2, check_rank_certificate,
                        e_normalize, find_redexes, normalize, replay, rewrite_step, term_sampler)

MON = C.positive_subtheory(P.monoidal())


def t_(s, th=MON):
    return parse_term(s, th)


def test_find_redexes_examples():
    got = [(r.label, ad) for r, ad, _ in find_redexes(MON, t_("a⊗(I⊗b)"))]
    assert got == [("alpha", ()), ("lambda", (("tensor", 2),))]
    got = [(r.label, ad) for r, ad, _ in find_redexes(MON, t_("a⊗(b⊗(c⊗d))"))]
    assert got == [("alpha", ()), ("alpha", (("tensor", 2),))]
    c3 = C.positive_subtheory(P.catalan(3))
    assert find_redexes(c3, P.lmb(3, t_("⊗(a,⊗(b,c,d),⊗(e,f,g))", c3))) == []


def test_rewrite_step_examples():
    u, st_ = rewrite_step(MON, t_("a⊗(b⊗c)"), "alpha", ())
    assert u == t_("(a⊗b)⊗c") and st_.source == t_("a⊗(b⊗c)")
    u, _ = rewrite_step(MON, t_("a⊗(b⊗(c⊗d))"), "alpha", (("tensor", 2),))
    assert u == t_("a⊗((b⊗c)⊗d)")
    u, _ = rewrite_step(MON, t_("a⊗(I⊗b)"), "lambda", (("tensor", 2),))
    assert u == t_("a⊗b")
    with pytest.raises(NotARedex):
        rewrite_step(MON, t_("a⊗b"), "alpha", ())


def test_normalize_examples():
    c2 = C.positive_subtheory(P.catalan(2))
    assert normalize(c2, t_("⊗(a,⊗(⊗(b,c),d))", c2))[0] == t_("⊗(⊗(⊗(a,b),c),d)", c2)
    c3 = C.positive_subtheory(P.catalan(3))
    assert normalize(c3, t_("⊗(a,⊗(b,c,d),⊗(e,f,g))", c3))[0] == t_("⊗(⊗(⊗(a,b,c),d,e),f,g)", c3)
    assert normalize(c2, Var("x")) == (Var("x"), [])


def test_normalize_fuel_exhausted():
    th = parse_theory("sig F/1\nrule grow: F(x) -> F(F(x))\n")
    with pytest.raises(FuelExhausted):
        normalize(th, App("F", [Var("a")]), fuel=20)


def test_rank_certificate_examples():
    v = check_rank_certificate(MON, P.binary_rank(), term_sampler(MON, 6), 300)
    assert v.certified
    th = parse_theory("sig F/1\nrule grow: F(x) -> F(F(x))\nrank F = 2*$1 + 1 base 1\n")
    v = check_rank_certificate(th, th.rank, term_sampler(th, 4, ("a",)), 100)
    assert not v.certified and v.counterexample.rule == "grow"


def test_rank_must_cover_signature():
    rk = RankFn({"rank": Measure("rank", 1, {})})
    with pytest.raises(Exception):
        check_rank_certificate(MON, rk, term_sampler(MON, 3), 5)


def test_e_normalize_strict_units():
    a = Var("a")
    conv = [Rule("l", App("tensor", [App("I"), Var("x")]), Var("x")),
            Rule("r", App("tensor", [Var("x"), App("I")]), Var("x"))]
    assert e_normalize(conv, App("tensor", [a, App("I")])) == a
    assert e_normalize([], App("tensor", [a, a])) == App("tensor", [a, a])


def test_e_normalize_flatten_associativity():
    m3 = P.iterated(2)
    t = t_("tensor1(a, tensor1(b, c))", m3)
    canon = m3.canon(t)
    assert canon == m3.canon(t_("tensor1(tensor1(a, b), c)", m3))


def _brute_redexes(th, t):
    out = []
    for ad, sub in T.positions(t):
        for r in th.rules:
            s = T.match(r.lhs, sub)
            if s is not None:
                out.append((r.label, ad))
    return sorted(out, key=lambda p: (T.address_key(p[1]), p[0]))


@settings(max_examples=150)
@given(st.integers(0, 10 ** 6))
def test_find_redexes_matches_brute_force(seed):
    rng = random.Random(seed)
    t = term_sampler(MON, 5)(rng)
    got = sorted(((r.label, ad) for r, ad, _ in find_redexes(MON, t)), key=lambda p: (T.address_key(p[1]), p[0]))
    assert got == _brute_redexes(MON, t)


@settings(max_examples=100)
@given(st.integers(0, 10 ** 6), st.sampled_from(["leftmost-innermost", "leftmost-outermost", "random"]))
def test_traces_replay(seed, strat):
    rng = random.Random(seed)
    t = term_sampler(MON, 6)(rng)
    nf, trace = normalize(MON, t, strat, seed=seed)
    assert replay(MON, t, [s.letter for s in trace])[-1] == nf
    assert find_redexes(MON, nf) == []
    rk = P.binary_rank()
    assert len(trace) <= rk(t) - rk(nf)


@settings(max_examples=100)
@given(st.integers(0, 10 ** 6))
def test_strategy_independence_for_certified_theory(seed):
    rng = random.Random(seed)
    t = term_sampler(MON, 6)(rng)
    results = {normalize(MON, t, s, seed=seed)[0] for s in ("leftmost-innermost", "leftmost-outermost", "random")}
    assert len(results) == 1


def test_rule_flags():
    r = Rule("drop", App("F", [Var("x"), Var("y")]), Var("x"))
    assert r.non_increasing
    th = Theory2(signature={"F": 2}, rules=(r,))
    assert th.non_increasing and not th.fully_invertible
