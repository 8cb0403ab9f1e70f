import random

import pytest
from hypothesis import given, settings, strategies as st

from rw2 import coherence as C
from rw2 import presets as P
from rw2.critical import critical_spans
from rw2.dsl import parse_term
from rw2.prooft import Path, check_tiling, infer
from rw2.theory import find_redexes, replay

MON = P.monoidal()
MON_POS = C.positive_subtheory(MON)


@pytest.fixture(scope="module")
def mon_cert():
    cert = C.certify_complete(MON_POS)
    assert cert.valid
    return cert


def test_orientation_errors():
    o = C.default_orientation(MON)
    with pytest.raises(C.InvalidOrientation):
        C.validate_orientation(MON, {k: v for k, v in o.items() if k != "alpha"})
    with pytest.raises(C.InvalidOrientation):
        C.validate_orientation(MON, {**o, "alpha_inv": 1})
    with pytest.raises(C.InvalidOrientation):
        C.validate_orientation(MON, {**o, "alpha": 0})
    lap = P.laplaza_assoc()
    with pytest.raises(C.InvalidOrientation):
        C.validate_orientation(lap, {r.label: -1 for r in lap.rules})


def test_positive_subtheory_drops_inverses():
    assert [r.label for r in MON_POS.rules] == ["alpha", "lambda", "rho"]
    assert {r.label for r in MON_POS.hidden} == {"alpha_inv", "lambda_inv", "rho_inv"}
    with pytest.raises(C.InvalidOrientation):
        C.certify_complete(MON)


def test_join_span_examples():
    spans = critical_spans(MON_POS)
    aa = next(s for s in spans if s.left.rule == "alpha" and s.right.rule == "alpha")
    j = C.join_span(MON_POS, aa)
    assert isinstance(j, C.Joining) and j.commutes_by == "pentagon"
    assert check_tiling(MON_POS, (j.left, j.right), j.tiling)
    no_tri = C.positive_subtheory(P.monoidal(triangle=False))
    unit = [s for s in critical_spans(no_tri) if {s.left.rule, s.right.rule} == {"alpha", "rho"}]
    assert unit and all(isinstance(C.join_span(no_tri, s, fuel=20), C.Unjoined) for s in unit)


def test_invalid_certificate_refuses_proofs():
    cert = C.certify_complete(C.positive_subtheory(P.monoidal(triangle=False)), fuel=20)
    assert not cert.valid and cert.unproven
    with pytest.raises(C.InvalidCertificate):
        C.NewmanProver(cert)
    with pytest.raises(C.InvalidCertificate):
        C.nf_reduction(cert, parse_term("a⊗(b⊗c)", MON))


def test_nf_reduction(mon_cert):
    t = parse_term("a⊗(I⊗(b⊗c))", MON)
    r = infer(MON_POS, C.nf_reduction(mon_cert, t))
    assert r.source == t and r.target == parse_term("(a⊗b)⊗c", MON)
    assert find_redexes(MON_POS, r.target) == []


def test_prove_equal_example(mon_cert):
    s = parse_term("a⊗(b⊗(c⊗d))", MON)
    p = Path(s, (("alpha", ()), ("alpha", ())))
    q = Path(s, (("alpha", (("tensor", 2),)), ("alpha", ()), ("alpha", (("tensor", 1),))))
    tiling = C.prove_equal_to_nf(mon_cert, p, q)
    assert check_tiling(MON_POS, (p, q), tiling)
    with pytest.raises(ValueError):
        C.prove_equal_to_nf(mon_cert, Path(s, (("alpha", ()),)), p)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_any_two_normalizing_paths_tile(seed):
    rng = random.Random(seed)
    cert = _cached_cert()
    t = P.random_catalan_term(2, 7, rng)
    p = Path(t, C.random_nf_path(MON_POS, t, rng))
    q = Path(t, C.random_nf_path(MON_POS, t, rng))
    assert check_tiling(MON_POS, (p, q), C.prove_equal_to_nf(cert, p, q))


_CERT = []


def _cached_cert():
    if not _CERT:
        _CERT.append(C.certify_complete(MON_POS))
    return _CERT[0]


def test_ladder_handles_inverse_steps(mon_cert):
    s = parse_term("(a⊗b)⊗c", MON)
    word = [("alpha_inv", ()), ("alpha", ())]
    rungs = C.ladder(mon_cert, MON, s, word)
    assert len(rungs) == 2
    for left, right, tiling in rungs:
        assert check_tiling(MON_POS, (left, right), tiling)


def test_verdicts():
    assert C.maclane_verdict(MON).status == "Coherent-by-thm-4-invertible"
    assert C.maclane_verdict(P.laplaza_assoc()).status == "Coherent-by-thm-4"
    v = C.maclane_verdict(P.sym_catalan(2, hexagon=False), fuel=20)
    assert v.status == "Inconclusive" and v.reasons


def test_monicity():
    assert C.monicity_violations(MON) == []
    assert C.monicity_violations(P.catalan(3)) == []


def test_fuel_bound_respected():
    no_pent = C.positive_subtheory(P.monoidal(pentagon=False))
    spans = critical_spans(no_pent)
    aa = next(s for s in spans if s.left.rule == "alpha" and s.right.rule == "alpha")
    j = C.join_span(no_pent, aa, fuel=5)
    assert isinstance(j, C.Unjoined)
    assert j.reason == "joinable-but-no-commuting-proof-found"
    assert replay(no_pent, aa.source, (aa.left.letter,)) is not None


def test_printed_catalan_axioms_leave_block_spans_open():
    v = C.maclane_verdict(P.catalan(3, squares=False))
    assert v.status == "Inconclusive"
    open_spans = sorted(u.span_id for u in v.certificate.unproven)
    assert open_spans == ["alpha1~alpha1@(⊗,2)", "alpha2~alpha1@(⊗,3)"]
    assert C.maclane_verdict(P.catalan(3)).status == "Coherent-by-thm-4-invertible"
