"""Acceptance criteria 1-8, each at its stated tolerance.

Every test reports one ``criterion N: PASS|FAIL`` line; pytest collects them
into a summary section, and running this file directly prints them as it goes.
"""

import random
import sys
import time
from itertools import product

import pytest

from rw2 import coherence as C
from rw2 import diamond as D
from rw2 import presets as P
from rw2 import structmon as SM
from rw2 import terms as T
from rw2 import thompson as TM
from rw2.critical import critical_spans
from rw2.dsl import parse_term
from rw2.prooft import Path, check_tiling
from rw2.theory import check_rank_certificate, find_redexes, normalize, rewrite_step, term_sampler

try:
    from conftest import CRITERIA_LINES
except ImportError:  # running as a script from elsewhere
    CRITERIA_LINES = []


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'} - {detail}"
    CRITERIA_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


# ------------------------------------------------------------- criterion 1


def test_criterion_1_critical_span_census():
    th = C.positive_subtheory(P.monoidal())
    t0 = time.perf_counter()
    spans = critical_spans(th)
    t_mon = time.perf_counter() - t0
    expected = ["a⊗(b⊗(c⊗d))", "I⊗(b⊗c)", "a⊗(I⊗c)", "a⊗(b⊗I)", "I⊗I"]
    want = sorted(str(T.canonical(parse_term(e, th))[0]) for e in expected)
    got = sorted(str(T.canonical(s.source)[0]) for s in spans)

    c2 = P.catalan(2, invertible=False)
    t0 = time.perf_counter()
    c2_spans = critical_spans(c2)
    t_c2 = time.perf_counter() - t0
    c2_ok = len(c2_spans) == 1 and T.alpha_equiv(c2_spans[0].source, parse_term("a⊗(b⊗(c⊗d))", c2))

    ok = len(spans) == 5 and got == want and c2_ok and t_mon < 1 and t_c2 < 1
    report(1, "critical-span census", ok,
           f"monoidal+ {len(spans)} spans in {t_mon:.3f}s, C_2 {len(c2_spans)} span in {t_c2:.3f}s")


# ------------------------------------------------------------- criterion 2


def _catalan_decrease_mismatches(n: int, samples: int, rng: random.Random) -> tuple[int, int]:
    th = C.positive_subtheory(P.catalan(n))
    rk = th.rank
    bad = steps = 0
    for _ in range(samples):
        t = P.random_catalan_term(n, 14, rng)
        if rk(t) != P.catalan_rank(n, t):
            bad += 1
        for r, ad, s in find_redexes(th, t):
            u, _ = rewrite_step(th, t, r, ad, s)
            i = int(r.label[len("alpha"):])
            displaced = s[f"x{i + n}"]
            steps += 1
            if P.catalan_rank(n, t) - P.catalan_rank(n, u) != (n - 1) * P.leaf_count(displaced):
                bad += 1
    return bad, steps


def test_criterion_2_termination_certificates():
    t0 = time.perf_counter()
    details = []
    ok = True
    for th in (C.positive_subtheory(P.monoidal()), P.laplaza_assoc()):
        v = check_rank_certificate(th, P.binary_rank(), term_sampler(th, 7), 1000, seed=7)
        ok &= v.certified
        details.append(f"{th.name}: {v.steps_checked} steps, cex={v.counterexample is not None}")
    rng = random.Random(11)
    for n in (2, 3, 4):
        th = C.positive_subtheory(P.catalan(n))
        sampler = lambda r, n=n: P.random_catalan_term(n, 14, r)
        v = check_rank_certificate(th, th.rank, sampler, 1000, seed=n)
        bad, steps = _catalan_decrease_mismatches(n, 300, rng)
        ok &= v.certified and bad == 0
        details.append(f"C_{n}: certified={v.certified}, decrease mismatches {bad}/{steps}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10
    report(2, "termination certificates", ok, "; ".join(details) + f"; {elapsed:.1f}s")


# ------------------------------------------------------------- criterion 3


def test_criterion_3_unique_normal_forms():
    rng = random.Random(3)
    failures = total = 0
    for n in (2, 3, 4):
        th = C.positive_subtheory(P.catalan(n))
        for k in range(500):
            t = P.random_catalan_term(n, 14, rng)
            want = P.lmb(n, t)
            for strat in ("leftmost-innermost", "leftmost-outermost", f"random:{k}"):
                total += 1
                if normalize(th, t, strat)[0] != want:
                    failures += 1
    report(3, "unique normal forms", failures == 0, f"{failures} mismatches in {total} normalizations")


# ------------------------------------------------------------- criterion 4


def _names_assoc_span(v: C.Verdict) -> bool:
    return any("alpha" in r and "~alpha" in r for r in v.reasons)


def test_criterion_4_coherence_pipeline():
    t0 = time.perf_counter()
    results = {}
    lap = C.maclane_verdict(P.laplaza_assoc())
    mon = C.maclane_verdict(P.monoidal())
    results["laplaza"] = lap.status
    results["monoidal"] = mon.status
    ok = lap.status == "Coherent-by-thm-4" and mon.status == "Coherent-by-thm-4-invertible"

    # the three unit spans not covered by the triangle are derived by search
    pos = mon.certificate.theory
    derived = 0
    for sid, src in (("alpha~lambda@λ", "I⊗(b⊗c)"), ("alpha~rho@(⊗,2)", "a⊗(b⊗I)"), ("lambda~rho@λ", "I⊗I")):
        j = mon.certificate.joinings[sid]
        ok &= isinstance(j, C.Joining) and T.alpha_equiv(j.source, parse_term(src, pos))
        if isinstance(j, C.Joining) and j.commutes_by == "derived" and check_tiling(pos, (j.left, j.right), j.tiling):
            derived += 1
    ok &= derived == 3

    for n in (2, 3):
        v = C.maclane_verdict(P.catalan(n))
        results[f"C_{n}"] = v.status
        ok &= v.status == "Coherent-by-thm-4-invertible"

    negatives = {
        "monoidal-no-pentagon": C.maclane_verdict(P.monoidal(pentagon=False)),
        "laplaza-no-pentagon": C.maclane_verdict(P.laplaza_assoc(pentagon=False)),
        "C_2-no-pentagon": C.maclane_verdict(P.catalan(2, pentagon=False)),
    }
    for k, v in negatives.items():
        results[k] = v.status
        ok &= v.status == "Inconclusive" and _names_assoc_span(v)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(4, "coherence pipeline", ok,
           ", ".join(f"{k}={v}" for k, v in results.items()) + f"; unit spans derived {derived}/3; {elapsed:.1f}s")


# ------------------------------------------------------------- criterion 5


def test_criterion_5_strong_newman_tilings():
    rng = random.Random(5)
    failures = 0
    faces = 0
    for n in (2, 3):
        cert = C.certify_complete(C.positive_subtheory(P.catalan(n)), fuel=200)
        assert cert.valid
        th = cert.theory
        for _ in range(200):
            t = P.random_catalan_term(n, 10, rng)
            phi = Path(t, C.random_nf_path(th, t, rng))
            psi = Path(t, C.random_nf_path(th, t, rng))
            tiling = C.prove_equal_to_nf(cert, phi, psi)
            faces += len(tiling.faces)
            if not check_tiling(th, (phi, psi), tiling):
                failures += 1
    report(5, "Strong-Newman tilings", failures == 0, f"{failures} rejected of 400 pairs ({faces} faces checked)")


# ------------------------------------------------------------- criterion 6


def _instance_violations(found) -> int:
    by_letters: dict = {}
    for p in found:
        by_letters.setdefault(frozenset(p.letters()), []).append(p)
    bad = 0
    for group in by_letters.values():
        for p, q in product(group, group):
            if p is q:
                continue
            s = T.match(p.source, q.source)
            if s is not None and not T.is_renaming(s):
                bad += 1
    return bad


def test_criterion_6_diamond_census():
    details = []
    ok = True
    nested = P.nested_cex()
    g = D.build_graph(nested, [parse_term("I(I(a))", nested)], 6)
    n_found = D.basic_diamonds(g, nested)
    disj = P.disjoint_cex()
    g2 = D.build_graph(disj, [parse_term("I(a)⊗I(a)", disj)], 6)
    d_found = D.basic_diamonds(g2, disj)
    ok &= len(n_found) == 2 and len(d_found) == 2
    ok &= all(T.alpha_equiv(g.vertices[p.source], parse_term("I(I(a))", nested)) for p in n_found)
    details.append(f"nested {len(n_found)}, disjoint {len(d_found)}")

    th = P.finiteness_cex()
    counts = []
    for depth in (3, 4, 5):
        g = D.build_graph(th, D.superposition_seeds(th, depth), 12)
        found = D.basic_diamonds(g)
        bad = _instance_violations([_as_term_pair(g, p) for p in found])
        counts.append(len(found))
        ok &= bad == 0
    ok &= counts[0] < counts[1] < counts[2]
    details.append(f"finiteness depths 3/4/5 -> {'/'.join(map(str, counts))}")
    report(6, "diamond census", ok, "; ".join(details))


class _TermPair:
    def __init__(self, source, letters):
        self.source = source
        self._letters = letters

    def letters(self):
        return self._letters


def _as_term_pair(g, p):
    return _TermPair(g.vertices[p.source], p.letters())


# ------------------------------------------------------------- criterion 7


def _act(d: TM.TreeDiagram, word: tuple):
    """Image of an infinite-address prefix under the diagram's piecewise map, or None if too short."""
    dom, cod = d.dom.leaf_addresses(), d.cod.leaf_addresses()
    for k, a in enumerate(dom):
        if word[:len(a)] == a:
            return cod[d.perm[k]] + word[len(a):]
    return None


def _same_action(d1, d2, probes) -> bool:
    return all(_act(d1, w) == _act(d2, w) for w in probes)


def _probes(n: int, rng: random.Random, k: int = 60, length: int = 16) -> list:
    return [tuple(rng.randrange(n) for _ in range(length)) for _ in range(k)]


def _random_word(th, rng, n_steps):
    src = P.random_catalan_term(th.signature[P.TENSOR], 9, rng)
    w = []
    cur = src
    for _ in range(n_steps):
        reds = find_redexes(th, cur)
        if not reds:
            break
        r, ad, s = rng.choice(reds)
        w.append((r.label, ad))
        cur, _ = rewrite_step(th, cur, r, ad, s)
    return w


def test_criterion_7_thompson_arithmetic():
    t0 = time.perf_counter()
    rng = random.Random(7)
    group_bad = 0
    for n in (2, 3, 4):
        for _ in range(500):
            a, b, c = (TM.random_diagram(n, 12, rng, order_preserving=rng.random() < 0.3) for _ in range(3))
            probes = _probes(n, rng)
            ab = TM.td_mul(a, b)
            group_bad += TM.td_mul(ab, c) != TM.td_mul(a, TM.td_mul(b, c))
            group_bad += TM.td_mul(a, TM.td_inv(a)) != TM.td_id(n)
            group_bad += TM.td_mul(TM.td_id(n), a) != a or TM.td_mul(a, TM.td_id(n)) != a
            # independent oracle: the product acts as the composite of the actions
            group_bad += not all(_act(ab, w) == _act(b, _act(a, w)) for w in probes)
            if TM.is_order_preserving(a) and TM.is_order_preserving(b):
                group_bad += not (TM.is_order_preserving(ab) and TM.is_order_preserving(TM.td_inv(a)))

    hom_bad = 0
    hom_total = 0
    for n in (2, 3):
        th = P.catalan(n)
        while hom_total < 200 * (n - 1):
            w = _random_word(th, rng, rng.randint(2, 8))
            if len(w) < 2:
                continue
            k = rng.randint(1, len(w) - 1)
            hom_total += 1
            hom_bad += TM.td_mul(TM.theta(th, w[:k]), TM.theta(th, w[k:])) != TM.theta(th, w)

    sc = P.sym_catalan(2)
    moore_bad = 0
    for m in range(2, 8):
        perms = {}
        for i in range(1, m):
            d = TM.theta(sc, TM.comb_transposition_word(m, i))
            full = TM.expand_dom_to(d, TM.tree_of_term(TM.left_comb(2, m)))
            perms[i] = full.perm
            swap = list(range(m))
            swap[i - 1], swap[i] = swap[i], swap[i - 1]
            moore_bad += full.perm != tuple(swap)
        ident = tuple(range(m))

        def prod(*ps):
            out = ident
            for p in ps:
                out = TM.compose_perm(out, p)
            return out

        for i in range(1, m):
            moore_bad += prod(perms[i], perms[i]) != ident
            if i + 1 < m:
                moore_bad += prod(*([perms[i], perms[i + 1]] * 3)) != ident
            for k in range(i + 2, m):
                moore_bad += prod(perms[i], perms[k], perms[i], perms[k]) != ident
    elapsed = time.perf_counter() - t0
    ok = group_bad == 0 and hom_bad == 0 and moore_bad == 0 and elapsed < 30
    report(7, "Thompson arithmetic", ok,
           f"group-law failures {group_bad}/1500 triples, homomorphism failures {hom_bad}/{hom_total}, "
           f"Moore failures {moore_bad} (m<=7); {elapsed:.1f}s")


# ------------------------------------------------------------- criterion 8


EXPECTED = {"composition": "both-ε", "empty": "both-ε"}


def test_criterion_8_structure_monoid_presentation():
    th = P.catalan(2)
    rng = random.Random(8)
    tallies = {}
    ok = True
    for fam in SM.RELATION_FAMILIES:
        want = EXPECTED.get(fam, "equal")
        got = [SM.random_relation(th, fam, rng).evaluate() for _ in range(100)]
        tallies[fam] = sum(v == want for v in got)
        ok &= tallies[fam] == 100
    report(8, "structure-monoid presentation", ok, ", ".join(f"{k} {v}/100" for k, v in tallies.items()))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
