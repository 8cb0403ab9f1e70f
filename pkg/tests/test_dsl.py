import pytest

from rw2 import presets as P
from rw2.dsl import DSLError, emit_theory, parse_term, parse_theory, parse_word
from rw2.prooft import infer, show_expr

MONOIDAL_SRC = """\
theory mon
sig tensor/2 I/0
infix ⊗ tensor
var a b c d
rule alpha: a ⊗ (b ⊗ c) -> (a ⊗ b) ⊗ c
rule lambda: I ⊗ a -> a
rule rho: a ⊗ I -> a
invertible alpha lambda rho
axiom pentagon: alpha(a,b,c⊗d) ; alpha(a⊗b,c,d) = a ⊗ alpha(b,c,d) ; alpha(a,b⊗c,d) ; alpha(a,b,c) ⊗ d
axiom triangle: alpha(a,I,b) ; rho(a) ⊗ b = a ⊗ lambda(b)
rank tensor = $1 + 2*$2 - 1 base 1
"""


def test_parse_hand_written_theory():
    th = parse_theory(MONOIDAL_SRC)
    assert th.signature == {"tensor": 2, "I": 0}
    assert [r.label for r in th.rules] == ["alpha", "lambda", "rho", "alpha_inv", "lambda_inv", "rho_inv"]
    assert [r.orientation for r in th.rules] == [1, 1, 1, -1, -1, -1]
    assert [a.label for a in th.axioms] == ["pentagon", "triangle"]
    assert th.rank(parse_term("a⊗b", th)) == 2


@pytest.mark.parametrize("name,n", P.GOLDEN)
def test_golden_files_match_generators_and_round_trip(name, n):
    text = P.golden_text(name, n)
    th = parse_theory(text, P.golden_name(name, n))
    assert emit_theory(th) == text
    assert emit_theory(P.gen(name, n)) == text


@pytest.mark.parametrize(
    "src,line,col",
    [
        ("sig f/1\nrule r: f(x) => x\n", 2, 1),
        ("sig f/1\nrule r: f(x -> x\n", 2, 13),
        ("sig f/1\nrule r: g(x) -> x\n", 2, 9),
    ],
)
def test_errors_carry_positions(src, line, col):
    with pytest.raises(DSLError) as e:
        parse_theory(src, "bad.rw2")
    assert e.value.file == "bad.rw2" and e.value.line == line
    assert e.value.col >= 1


def test_axiom_with_mismatched_endpoints_rejected():
    bad = MONOIDAL_SRC.replace("= a ⊗ lambda(b)", "= lambda(a ⊗ b)")
    with pytest.raises(DSLError):
        parse_theory(bad)


def test_word_round_trip():
    th = parse_theory(MONOIDAL_SRC)
    w = parse_word("alpha(a,b,c⊗d) ; alpha(a⊗b,c,d)", th)
    again = parse_word(show_expr(w), th)
    assert infer(th, again) == infer(th, w)


def test_term_syntax_variants():
    th = parse_theory(MONOIDAL_SRC)
    assert parse_term("a ⊗ (b ⊗ c)", th) == parse_term("tensor(a, tensor(b,c))", th)
    assert parse_term("a * b", th.with_(aliases={**th.aliases, "*": "tensor"})) == parse_term("a⊗b", th)
