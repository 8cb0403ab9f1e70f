import itertools
import random

from hypothesis import given, settings, strategies as st

from rw2 import coherence as C
from rw2 import presets as P
from rw2 import terms as T
from rw2.critical import critical_spans, overlaps
from rw2.dsl import parse_term, parse_theory
from rw2.terms import App, Var
from rw2.theory import Rule, Theory2, rewrite_step

MON = C.positive_subtheory(P.monoidal())


def test_overlap_examples():
    alpha, lam, rho = (MON.rule(x) for x in ("alpha", "lambda", "rho"))
    ov = overlaps(alpha, alpha)
    assert [o.address for o in ov] == [(("tensor", 2),)]
    ov = overlaps(lam, rho)
    assert len(ov) == 1
    assert overlaps(lam, lam) == []


def test_span_examples():
    assert len(critical_spans(MON)) == 5
    c2 = P.catalan(2, invertible=False)
    sp = critical_spans(c2)
    assert len(sp) == 1 and T.alpha_equiv(sp[0].source, parse_term("a⊗(b⊗(c⊗d))", c2))
    th = parse_theory("sig F/1 G/1\nrule r: F(x) -> G(x)\n")
    assert critical_spans(th) == []


def test_positive_selection_skips_inverses():
    full = P.monoidal()
    assert len(critical_spans(full, "positive")) == 5
    assert len(critical_spans(full, "all")) > 5


def test_spans_are_sound():
    for th in (MON, C.positive_subtheory(P.catalan(3)), P.finiteness_cex()):
        for sp in critical_spans(th):
            for step in (sp.left, sp.right):
                u, _ = rewrite_step(th, sp.source, step.rule, step.address)
                assert u == step.target


# ---------------------------------------------------- completeness oracle

SIG = {"f": 2, "g": 1, "e": 0}


def _ground(depth):
    acc = [App("e")]
    for _ in range(depth):
        acc = list(dict.fromkeys(acc + [App("g", [p]) for p in acc] + [App("f", [p, q]) for p in acc for q in acc]))
    return acc


GROUND = _ground(2)  # ground terms of depth <= 2 over the signature above


def _pattern(rng, depth, names):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(names)) if rng.random() < 0.8 else App("e")
    if rng.random() < 0.5:
        return App("g", [_pattern(rng, depth - 1, names)])
    return App("f", [_pattern(rng, depth - 1, names), _pattern(rng, depth - 1, names)])


def _random_theory(rng):
    rules = []
    while len(rules) < 2:
        lhs = _pattern(rng, 2, ["x", "y"])
        if type(lhs) is Var:
            continue
        vs = T.variables(lhs)
        rhs = Var(vs[0]) if vs else App("e")
        rules.append(Rule(f"r{len(rules)}", lhs, rhs))
    return Theory2(signature=SIG, rules=tuple(rules))


def _covered(th, spans, t, s1, s2):
    """Is the ground divergence (s1, s2) from t an instance of some critical span (up to whiskering)?"""
    for sp in spans:
        for (l1, a1), (l2, a2) in ((sp.left.letter, sp.right.letter), (sp.right.letter, sp.left.letter)):
            if l1 != s1[0] or l2 != s2[0]:
                continue
            for p, sub in T.positions(t):
                if s1[1][:len(p)] != p or s2[1][:len(p)] != p:
                    continue
                if s1[1][len(p):] == a1 and s2[1][len(p):] == a2 and T.match(sp.source, sub) is not None:
                    return True
    return False


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_critical_pairs_complete_on_small_ground_terms(seed):
    rng = random.Random(seed)
    th = _random_theory(rng)
    spans = critical_spans(th)
    for t in GROUND:
        steps = []
        for p, sub in T.positions(t):
            for r in th.rules:
                if T.match(r.lhs, sub) is not None:
                    steps.append((r.label, p))
        for s1, s2 in itertools.combinations(steps, 2):
            a, b = s1[1], s2[1]
            if T.orthogonal(a, b):
                continue
            outer, inner = (s1, s2) if len(a) <= len(b) else (s2, s1)
            r_outer = th.rule(outer[0])
            rel = inner[1][len(outer[1]):]
            at = T.subterm(r_outer.lhs, rel)
            if at is None or type(at) is Var:
                continue  # variable overlap: joinable without a critical span
            if outer == inner:
                continue
            assert _covered(th, spans, t, outer, inner), (th.rules, T.show(t), outer, inner)
