import random

import pytest
from hypothesis import given, settings, strategies as st

from rw2 import coherence as C
from rw2 import presets as P
from rw2 import structmon as SM
from rw2 import terms as T
from rw2 import thompson as TM
from rw2.dsl import parse_term
from rw2.prooft import axiom_paths
from rw2.terms import App
from rw2.theory import find_redexes, rewrite_step

C2 = P.catalan(2)
C3 = P.catalan(3)
T2 = ("tensor", 2)


def _seed(op):
    return T.show(op.s), T.show(op.t)


def test_op_gen_examples():
    o = SM.op_gen(C2, "alpha1")
    assert T.alpha_equiv(o.s, parse_term("a⊗(b⊗c)", C2))
    assert T.canonical(o.s, o.t) == T.canonical(parse_term("a⊗(b⊗c)", C2), parse_term("(a⊗b)⊗c", C2))
    o = SM.op_gen(C2, "alpha1", (T2,))
    assert T.canonical(o.s, o.t) == T.canonical(parse_term("d⊗(a⊗(b⊗c))", C2), parse_term("d⊗((a⊗b)⊗c)", C2))
    with pytest.raises(SM.UnsupportedTheory):
        SM.op_gen(P.nested_cex(), "iota")


def test_identity_operator_is_idempotent():
    e = SM.op_identity(C2, parse_term("a⊗b", C2), (T2,))
    assert e.idempotent
    assert SM.op_apply(e, parse_term("c⊗(a⊗b)", C2)) == parse_term("c⊗(a⊗b)", C2)
    assert SM.op_apply(e, parse_term("c⊗a", C2)) is None


def test_pentagon_sides_compose_to_the_same_operator():
    L, R = axiom_paths(C2)["pentagon"]
    assert SM.word_operator(C2, L.letters).same(SM.word_operator(C2, R.letters))


def test_empty_operator_from_incompatible_ground_instances():
    a, b = App("a"), App("b")
    vs = T.variables(C2.rule("alpha1").lhs)
    o1 = SM.op_gen(C2, "alpha1", (), {v: a for v in vs})
    o2 = SM.op_gen(C2, "alpha1_inv", (), {v: b for v in T.variables(C2.rule("alpha1_inv").lhs)})
    assert SM.op_compose(o1, o2).empty
    assert SM.op_compose(SM.EMPTY, o1).empty


@settings(max_examples=80)
@given(st.integers(0, 10 ** 6))
def test_apply_agrees_with_rewriting(seed):
    rng = random.Random(seed)
    n = rng.choice([2, 3])
    th = C.positive_subtheory(P.catalan(n))
    t = P.random_catalan_term(n, 11, rng)
    for r, ad, _ in find_redexes(th, t):
        u, _ = rewrite_step(th, t, r.label, ad)
        assert SM.op_apply(SM.op_gen(th, r.label, ad), t) == u


@settings(max_examples=80)
@given(st.integers(0, 10 ** 6))
def test_inverse_laws(seed):
    rng = random.Random(seed)
    word = [(rng.choice(["alpha1", "alpha1_inv"]), tuple(T2 for _ in range(rng.randint(0, 2))))
            for _ in range(rng.randint(1, 4))]
    o = SM.word_operator(C2, word)
    if o.empty:
        return
    inv = SM.op_inverse(o)
    assert SM.compose_all([o, inv, o]).same(o)
    assert SM.compose_all([o, inv]).idempotent


@settings(max_examples=60)
@given(st.integers(0, 10 ** 6))
def test_theta_is_compatible_with_composition(seed):
    rng = random.Random(seed)
    th = P.sym_catalan(2)
    gens = ["alpha1", "alpha1_inv", "tau1"]

    def word():
        return [(rng.choice(gens), tuple(("tensor", rng.randint(1, 2)) for _ in range(rng.randint(0, 2))))
                for _ in range(rng.randint(1, 3))]

    w1, w2 = word(), word()
    try:
        both = TM.theta(th, w1 + w2)
    except TM.EmptyOperator:
        return
    assert both == TM.td_mul(TM.theta(th, w1), TM.theta(th, w2))


@pytest.mark.parametrize("family", SM.RELATION_FAMILIES)
def test_relation_families_hold(family):
    rng = random.Random(3)
    want = "both-ε" if family in ("composition", "empty") else "equal"
    for _ in range(25):
        assert SM.random_relation(C3 if family == "coherence" else C2, family, rng).evaluate() == want


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        SM.random_relation(C2, "nonsense", random.Random(0))
