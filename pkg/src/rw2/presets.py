"""Bundled theory presentations.

Axiom schemas are generated from (source term, step list) pairs and turned
into reduction words, so every generated axiom is type-checked on creation.
"""

from __future__ import annotations

from importlib import resources
from typing import Optional, Sequence

from . import terms as T
from .prooft import Id, RuleApp, Struct, path_word, seq_of, infer
from .terms import App, Term, Var
from .theory import CoherenceAxiom, Measure, RankFn, Rule, Theory2, TheoryError, replay

PRESET_NAMES = (
    "monoidal",
    "laplaza-assoc",
    "catalan",
    "sym-catalan",
    "nested-cex",
    "disjoint-cex",
    "infiniteqf-cex",
    "finiteness-cex",
    "iterated",
)
PARAMETRIC = {"catalan", "sym-catalan", "iterated"}

TENSOR = "tensor"


class PresetError(ValueError):
    pass


def _v(name: str) -> Var:
    return Var(name)


def _vs(prefix: str, lo: int, hi: int) -> list[Var]:
    return [Var(f"{prefix}{k}") for k in range(lo, hi + 1)]


def _pair_inverse(rules: list[Rule], labels: Sequence[str]) -> list[Rule]:
    """Mark ``labels`` invertible and append formal inverses named ``<label>_inv``."""
    out = []
    invs = []
    for r in rules:
        if r.label in labels:
            out.append(Rule(r.label, r.lhs, r.rhs, True, 1, r.label + "_inv"))
            invs.append(Rule(r.label + "_inv", r.rhs, r.lhs, True, -1, r.label))
        else:
            out.append(r)
    return out + invs


def _axiom(th: Theory2, label: str, source: Term, left: Sequence, right: Sequence) -> CoherenceAxiom:
    for side in (left, right):
        if replay(th, source, side) is None:
            raise TheoryError(f"axiom {label}: route does not replay from {th.show(source)}")
    ax = CoherenceAxiom(label, path_word(th, source, left), path_word(th, source, right))
    a, b = infer(th, ax.lhs_word), infer(th, ax.rhs_word)
    if th.canon(a.target) != th.canon(b.target):
        raise TheoryError(f"axiom {label}: routes end at different terms")
    return ax


def binary_rank() -> RankFn:
    """The rank a ⊗ b ↦ rank(a) + 2·rank(b) − 1 with value 1 on variables and I."""
    return RankFn({"rank": Measure("rank", 1, {TENSOR: ((("rank", 1, 1), ("rank", 2, 2)), -1)})})


def _tensor(*args: Term) -> App:
    return App(TENSOR, args)


def _with_display(th: Theory2, var_names: Sequence[str]) -> Theory2:
    return th.with_(aliases={"⊗": TENSOR, "*": TENSOR}, display={TENSOR: "⊗"}, var_names=tuple(var_names))


# ------------------------------------------------------------------ monoidal


def monoidal(invertible: bool = True, unit: bool = True, pentagon: bool = True, triangle: bool = True) -> Theory2:
    a, b, c, d = map(_v, "abcd")
    I = App("I")
    rules = [Rule("alpha", _tensor(a, _tensor(b, c)), _tensor(_tensor(a, b), c))]
    if unit:
        rules += [Rule("lambda", _tensor(I, a), a), Rule("rho", _tensor(a, I), a)]
    if invertible:
        rules = _pair_inverse(rules, [r.label for r in rules])
    sig = {TENSOR: 2, "I": 0} if unit else {TENSOR: 2}
    name = "monoidal" if (invertible and unit) else ("laplaza-assoc" if not unit else "monoidal-directed")
    th = _with_display(Theory2(name=name, signature=sig, rules=tuple(rules), rank=binary_rank()), "abcd")
    axioms = []
    A = (TENSOR, 2)
    if pentagon:
        src = _tensor(a, _tensor(b, _tensor(c, d)))
        axioms.append(_axiom(th, "pentagon", src, [("alpha", ()), ("alpha", ())],
                             [("alpha", (A,)), ("alpha", ()), ("alpha", ((TENSOR, 1),))]))
    if unit and triangle:
        src = _tensor(a, _tensor(I, b))
        axioms.append(_axiom(th, "triangle", src, [("alpha", ()), ("rho", ((TENSOR, 1),))], [("lambda", (A,))]))
    return th.with_(axioms=tuple(axioms))


def laplaza_assoc(pentagon: bool = True) -> Theory2:
    return monoidal(invertible=False, unit=False, pentagon=pentagon, triangle=False)


# ------------------------------------------------------------------ catalan


def _check_n(n) -> int:
    if not isinstance(n, int) or n < 2:
        raise PresetError(f"parameter n must be an integer >= 2, got {n!r}")
    return n


def catalan_rules(n: int) -> list[Rule]:
    out = []
    xs = _vs("x", 1, 2 * n - 1)
    for i in range(1, n):
        lhs = _tensor(*xs[:i], _tensor(*xs[i:i + n]), *xs[i + n:])
        rhs = _tensor(*xs[:i - 1], _tensor(*xs[i - 1:i + n - 1]), *xs[i + n - 1:])
        out.append(Rule(f"alpha{i}", lhs, rhs))
    return out


def catalan_rank_fn(n: int) -> RankFn:
    """Measures ``len`` (leaf count) and ``rank`` as an affine recursion."""
    length = Measure("len", 1, {TENSOR: (tuple(("len", k, 1) for k in range(1, n + 1)), 0)})
    terms = tuple(("rank", k, 1) for k in range(1, n + 1)) + tuple(("len", k, k - 1) for k in range(2, n + 1))
    rank = Measure("rank", 0, {TENSOR: (terms, -(n * (n - 1) // 2))})
    return RankFn({"len": length, "rank": rank})


def _a(i: int) -> str:
    return f"alpha{i}"


def catalan_pentagon(th: Theory2, n: int, i: int) -> CoherenceAxiom:
    X, Z = _vs("x", 1, i - 1), _vs("z", 1, n - i - 1)
    y = _vs("y", 1, 2 * n)
    src = _tensor(*X, y[0], _tensor(*y[1:n], _tensor(*y[n:2 * n])), *Z)
    left = [(_a(i), ()), (_a(i), ())]
    blk = (TENSOR, i + 1)
    right = [(_a(n - 1), (blk,)), (_a(i), ())]
    right += [(_a(k), ((TENSOR, i),)) for k in range(n - 1, 0, -1)]
    return _axiom(th, f"pentagon{i}" if n > 2 else "pentagon", src, left, right)


def catalan_adjacent(th: Theory2, n: int, i: int) -> CoherenceAxiom:
    X, Z = _vs("x", 1, i - 1), _vs("z", 1, n - i - 2)
    y = _vs("y", 1, 2 * n + 1)
    src = _tensor(*X, y[0], _tensor(*y[1:n + 1]), _tensor(*y[n + 1:2 * n + 1]), *Z)
    left = [(_a(i), ()), (_a(i + 1), ()), (_a(i), ())]
    right = [(_a(i + 1), ()), (_a(i), ()), (_a(1), ((TENSOR, i),))]
    return _axiom(th, f"adjacent{i}", src, left, right)


def catalan_block(th: Theory2, n: int, i: int, j: int) -> CoherenceAxiom:
    """alpha_i at the root against alpha_j inside the displaced block, for j < n-1.

    The printed pentagon and adjacent families do not generate this square
    (it is independent of them in the first homology of the tree graph).
    """
    X, Z = _vs("x", 1, i - 1), _vs("z", 1, n - i - 1)
    y = _vs("y", 1, 2 * n)
    inner = _tensor(*y[j + 1:j + n + 1])
    src = _tensor(*X, y[0], _tensor(*y[1:j + 1], inner, *y[j + n + 1:2 * n]), *Z)
    left = [(_a(i), ()), (_a(j + 1), ((TENSOR, i),))]
    right = [(_a(j), ((TENSOR, i + 1),)), (_a(i), ())]
    return _axiom(th, f"block{i}_{j}", src, left, right)


def catalan_distant(th: Theory2, n: int, i: int, j: int) -> CoherenceAxiom:
    """alpha_i and alpha_j at the root on two separate blocks (j >= i+2) commute."""
    X, Z = _vs("x", 1, i - 1), _vs("z", 1, n - j - 1)
    M = _vs("w", 1, j - i - 1)
    y = _vs("y", 1, 2 * n + 1)
    src = _tensor(*X, y[0], _tensor(*y[1:n + 1]), *M, _tensor(*y[n + 1:2 * n + 1]), *Z)
    left = [(_a(i), ()), (_a(j), ())]
    right = [(_a(j), ()), (_a(i), ())]
    return _axiom(th, f"distant{i}_{j}", src, left, right)


def catalan_var_names(n: int) -> list[str]:
    return ([f"x{k}" for k in range(1, 2 * n)] + [f"y{k}" for k in range(1, 2 * n + 2)]
            + [f"z{k}" for k in range(1, n)] + [f"w{k}" for k in range(1, n + 1)])


def catalan(n: int, invertible: bool = True, pentagon: bool = True, adjacent: bool = True,
            squares: bool = True) -> Theory2:
    _check_n(n)
    rules = catalan_rules(n)
    if invertible:
        rules = _pair_inverse(rules, [r.label for r in rules])
    th = Theory2(name=f"catalan{n}", signature={TENSOR: n}, rules=tuple(rules), rank=catalan_rank_fn(n))
    th = _with_display(th, catalan_var_names(n))
    axioms = []
    if pentagon:
        axioms += [catalan_pentagon(th, n, i) for i in range(1, n)]
    if adjacent:
        axioms += [catalan_adjacent(th, n, i) for i in range(1, n - 1)]
    if squares:
        axioms += [catalan_block(th, n, i, j) for i in range(1, n) for j in range(1, n - 1)]
        axioms += [catalan_distant(th, n, i, j) for i in range(1, n) for j in range(i + 2, n)]
    return th.with_(axioms=tuple(axioms))


# --------------------------------------------------------- symmetric catalan


def _t(i: int) -> str:
    return f"tau{i}"


def sym_catalan(n: int, hexagon: bool = True, pentagon: bool = True) -> Theory2:
    _check_n(n)
    base = catalan(n, invertible=False, pentagon=False, adjacent=False)
    xs = _vs("x", 1, n)
    taus = []
    for i in range(1, n):
        rhs = list(xs)
        rhs[i - 1], rhs[i] = rhs[i], rhs[i - 1]
        taus.append(Rule(_t(i), _tensor(*xs), _tensor(*rhs)))
    rules = list(base.rules) + taus
    rules = _pair_inverse(rules, [r.label for r in rules])
    th = base.with_(name=f"sym-catalan{n}", rules=tuple(rules))
    axioms = list(catalan(n, invertible=True, pentagon=pentagon).axioms)  # includes block squares
    warnings = []
    for i in range(1, n):
        src = _tensor(*xs)
        axioms.append(_axiom(th, f"involution{i}", src, [(_t(i), ()), (_t(i), ())], []))
    # Compatibility: padding W has i-2 entries and Z has n-i entries; the
    # other reading (W of length i) does not fit inside an n-ary node.
    warnings.append("compatibility axiom: padding lengths fixed to |W| = i-2, |Z| = n-i "
                    "(a W of length i overflows the arity)")
    for i in range(2, n + 1):
        for j in range(1, n - 1):
            W, Z = _vs("w", 1, i - 2), _vs("z", 1, n - i)
            x = _v("x1")
            ys = _vs("y", 1, n)
            src = _tensor(*W, x, _tensor(*ys), *Z)
            left = [(_a(i - 1), ()), (_t(j + 1), ((TENSOR, i - 1),))]
            right = [(_t(j), ((TENSOR, i),)), (_a(i - 1), ())]
            axioms.append(_axiom(th, f"compat{i}_{j}", src, left, right))
    for i in range(1, n - 1):
        src = _tensor(*xs)
        axioms.append(_axiom(th, f"cycle{i}", src, [(_t(i), ()), (_t(i + 1), ()), (_t(i), ())],
                             [(_t(i + 1), ()), (_t(i), ()), (_t(i + 1), ())]))
    if hexagon:
        for i in range(1, n):
            W, Z = _vs("w", 1, i - 1), _vs("z", 1, n - i - 1)
            y = _v("y1")
            src = _tensor(*W, _tensor(*xs), y, *Z)
            left = [(_t(i), ()), (_a(i), ()), (_t(1), ((TENSOR, i),))]
            right = [(_a(i) + "_inv", ())]
            right += [(_t(k), ((TENSOR, i + 1),)) for k in range(n - 1, 0, -1)]
            right += [(_a(i), ())]
            axioms.append(_axiom(th, f"hexagon{i}", src, left, right))
    return th.with_(axioms=tuple(axioms), warnings=warnings)


# --------------------------------------------------------------- lmb / rank


def underlying(t: Term) -> list[Term]:
    """U(t): the leaves of ``t`` from left to right."""
    if type(t) is Var or not t.args:
        return [t]
    out: list[Term] = []
    for c in t.args:
        out.extend(underlying(c))
    return out


def _check_catalan_term(n: int, t: Term) -> None:
    for _, sub in T.positions(t):
        if type(sub) is App and (sub.head != TENSOR or len(sub.args) != n):
            raise PresetError(f"not a {n}-ary catalan term: {T.show(sub)}")


def lmb(n: int, t: Term) -> Term:
    """Left-most bracketing: the left comb over the leaves of ``t``."""
    _check_catalan_term(n, t)
    leaves = underlying(t)
    out = leaves[0]
    k = 1
    while k < len(leaves):
        out = _tensor(out, *leaves[k:k + n - 1])
        k += n - 1
    return out


def leaf_count(t: Term) -> int:
    return len(underlying(t))


def catalan_rank(n: int, t: Term) -> int:
    """R(⊗(t_1..t_n)) = Σ R(t_i) + Σ (i−1)·L(t_i) − n(n−1)/2, with R = 0 on leaves."""
    _check_catalan_term(n, t)

    def go(u: Term) -> tuple[int, int]:
        if type(u) is Var or not u.args:
            return 0, 1
        kids = [go(c) for c in u.args]
        r = sum(k[0] for k in kids) + sum(i * k[1] for i, k in enumerate(kids)) - n * (n - 1) // 2
        return r, sum(k[1] for k in kids)

    return go(t)[0]


def random_catalan_term(n: int, leaves_max: int, rng, var_pool: Sequence[str] = ()) -> Term:
    """Uniform-ish random n-ary tree with at most ``leaves_max`` leaves, fresh leaf names."""
    carets_max = max(0, (leaves_max - 1) // (n - 1))
    k = rng.randint(0, carets_max)
    counter = iter(range(10 ** 6))

    def build(c: int) -> Term:
        if c == 0:
            i = next(counter)
            return Var(var_pool[i] if i < len(var_pool) else f"v{i}")
        rest = c - 1
        cuts = sorted(rng.randint(0, rest) for _ in range(n - 1))
        sizes = [b - a for a, b in zip([0] + cuts, cuts + [rest])]
        return _tensor(*[build(s) for s in sizes])

    return build(k)


# ------------------------------------------------------- counterexamples


def nested_cex() -> Theory2:
    x = _v("x")
    I, J, H = (lambda u: App("I", [u])), (lambda u: App("J", [u])), (lambda u: App("H", [u]))
    rules = (Rule("iota", I(x), J(x)), Rule("eta1", I(J(x)), H(x)), Rule("eta2", J(I(x)), H(x)))
    return Theory2(name="nested-cex", signature={"I": 1, "J": 1, "H": 1}, rules=rules, var_names=("x", "a"))


def disjoint_cex() -> Theory2:
    x = _v("x")
    I, J, H = (lambda u: App("I", [u])), (lambda u: App("J", [u])), (lambda u: App("H", [u]))
    rules = (
        Rule("iota", I(x), J(x)),
        Rule("eta1", _tensor(J(x), I(x)), H(x)),
        Rule("eta2", _tensor(I(x), J(x)), H(x)),
    )
    th = Theory2(name="disjoint-cex", signature={"I": 1, "J": 1, "H": 1, TENSOR: 2}, rules=rules)
    return _with_display(th, ("x", "a"))


def infiniteqf_cex() -> Theory2:
    x = _v("x")
    F, G, H, I = ((lambda s: (lambda u: App(s, [u])))(s) for s in "FGHI")
    rules = (
        Rule("grow_g", I(x), G(I(x))),
        Rule("grow_f", I(x), F(I(x))),
        Rule("ff", F(x), F(F(x))),
        Rule("gg", G(x), G(G(x))),
        Rule("fh", F(x), H(x)),
        Rule("gh", G(x), H(x)),
    )
    return Theory2(name="infiniteqf-cex", signature={"F": 1, "G": 1, "H": 1, "I": 1}, rules=rules,
                   var_names=("x", "a"))


def finiteness_cex() -> Theory2:
    a, b, c = map(_v, "abc")
    F = lambda u, v: App("F", [u, v])
    un = lambda s: (lambda u: App(s, [u]))
    S, S2, Tt, T2 = un("S"), un("S'"), un("T"), un("T'")
    rules = (
        Rule("pi", F(F(a, b), c), F(a, b)),
        Rule("alpha", F(S(a), b), App("W")),
        Rule("beta", F(a, Tt(b)), App("W")),
        Rule("sigma", S(a), S2(a)),
        Rule("tau", Tt(a), T2(a)),
    )
    sig = {"W": 0, "S": 1, "S'": 1, "T": 1, "T'": 1, "F": 2}
    return Theory2(name="finiteness-cex", signature=sig, rules=rules, var_names=("a", "b", "c", "d"))


def branching_cex() -> tuple[Theory2, Term]:
    """One binary F, the equation s = F(s,s) and a rule t -> t' between constants."""
    s = _v("s")
    th = Theory2(
        name="branching-cex",
        signature={"F": 2, "t": 0, "t'": 0},
        rules=(Rule("rho", App("t"), App("t'")),),
        term_eqs=((s, App("F", [s, s])),),
        var_names=("s",),
    )
    return th, App("t")


# ------------------------------------------------------------ iterated M_n


def _ot(i: int) -> str:
    return f"tensor{i}"


def iterated(n: int, giant_hexagon: bool = True) -> Theory2:
    """Interchange rules of n-fold monoidal categories, strict structure as a modulo set."""
    _check_n(n)
    a, b, c, d, e, f, g, h = map(_v, "abcdefgh")
    I = App("I")
    sig = {_ot(i): 2 for i in range(1, n + 1)}
    sig["I"] = 0
    o = lambda i: (lambda u, v: App(_ot(i), [u, v]))
    modulo = []
    eqs = []
    for i in range(1, n + 1):
        t = o(i)
        modulo += [
            Rule(f"assoc{i}", t(a, t(b, c)), t(t(a, b), c)),
            Rule(f"unit_l{i}", t(I, a), a),
            Rule(f"unit_r{i}", t(a, I), a),
        ]
        eqs += [(t(a, t(b, c)), t(t(a, b), c)), (t(a, I), a), (t(I, a), a)]
    rules = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ti, tj = o(i), o(j)
            rules.append(Rule(f"eta{i}_{j}", ti(tj(a, b), tj(c, d)), tj(ti(a, c), ti(b, d))))
    aliases = {}
    display = {}
    for i in range(1, n + 1):
        aliases[f"⊗{i}"] = _ot(i)
        display[_ot(i)] = f"⊗{i}"
    th = Theory2(name=f"iterated{n}", signature=sig, rules=tuple(rules), term_eqs=tuple(eqs),
                 modulo=tuple(modulo), aliases=aliases, display=display, var_names=tuple("abcdefgh"))
    ids = lambda *xs: tuple(Id(x) for x in xs)
    axioms = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ti, tj = o(i), o(j)
            eta = f"eta{i}_{j}"
            # internal associativity
            top = seq_of([
                Struct(_ot(i), (RuleApp(eta, ids(a, b, c, d)), Id(tj(e, f)))),
                RuleApp(eta, ids(ti(a, c), ti(b, d), e, f)),
            ])
            bot = seq_of([
                Struct(_ot(i), (Id(tj(a, b)), RuleApp(eta, ids(c, d, e, f)))),
                RuleApp(eta, ids(a, b, ti(c, e), ti(d, f))),
            ])
            axioms.append(CoherenceAxiom(f"internal{i}_{j}", top, bot))
            # external associativity
            top = seq_of([
                RuleApp(eta, ids(tj(a, b), c, tj(d, e), f)),
                Struct(_ot(j), (RuleApp(eta, ids(a, b, d, e)), Id(ti(c, f)))),
            ])
            bot = seq_of([
                RuleApp(eta, ids(a, tj(b, c), d, tj(e, f))),
                Struct(_ot(j), (Id(ti(a, d)), RuleApp(eta, ids(b, c, e, f)))),
            ])
            axioms.append(CoherenceAxiom(f"external{i}_{j}", top, bot))
    if giant_hexagon:
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                for k in range(j + 1, n + 1):
                    ti, tj, tk = o(i), o(j), o(k)
                    eij, eik, ejk = f"eta{i}_{j}", f"eta{i}_{k}", f"eta{j}_{k}"
                    A, B, C, D = tk(a, b), tk(c, d), tk(e, f), tk(g, h)
                    up = seq_of([
                        RuleApp(eij, ids(A, B, C, D)),
                        Struct(_ot(j), (RuleApp(eik, ids(a, b, e, f)), RuleApp(eik, ids(c, d, g, h)))),
                        RuleApp(ejk, ids(ti(a, e), ti(b, f), ti(c, g), ti(d, h))),
                    ])
                    down = seq_of([
                        Struct(_ot(i), (RuleApp(ejk, ids(a, b, c, d)), RuleApp(ejk, ids(e, f, g, h)))),
                        RuleApp(eik, ids(tj(a, c), tj(b, d), tj(e, g), tj(f, h))),
                        Struct(_ot(k), (RuleApp(eij, ids(a, c, e, g)), RuleApp(eij, ids(b, d, f, h)))),
                    ])
                    axioms.append(CoherenceAxiom(f"giant_hexagon{i}_{j}_{k}", up, down))
    for ax in axioms:
        l, r = infer(th, ax.lhs_word), infer(th, ax.rhs_word)
        if th.canon(l.source) != th.canon(r.source) or th.canon(l.target) != th.canon(r.target):
            raise TheoryError(f"axiom {ax.label} is not parallel")  # pragma: no cover
    return th.with_(axioms=tuple(axioms))


# ----------------------------------------------------------------- registry


def gen(name: str, n: Optional[int] = None) -> Theory2:
    """Build a preset by name; ``catalan``, ``sym-catalan`` and ``iterated`` need ``n``."""
    if name.startswith("catalan") and name[7:].isdigit():
        name, n = "catalan", int(name[7:])
    if name.startswith("sym-catalan") and name[11:].isdigit():
        name, n = "sym-catalan", int(name[11:])
    if name.startswith("iterated") and name[8:].isdigit():
        name, n = "iterated", int(name[8:])
    if name in PARAMETRIC and n is None:
        raise PresetError(f"preset {name!r} needs a parameter n")
    if name not in PARAMETRIC and n is not None:
        raise PresetError(f"preset {name!r} takes no parameter")
    builders = {
        "monoidal": monoidal,
        "laplaza-assoc": laplaza_assoc,
        "nested-cex": nested_cex,
        "disjoint-cex": disjoint_cex,
        "infiniteqf-cex": infiniteqf_cex,
        "finiteness-cex": finiteness_cex,
    }
    if name == "catalan":
        return catalan(n)
    if name == "sym-catalan":
        return sym_catalan(n)
    if name == "iterated":
        return iterated(n)
    if name not in builders:
        raise PresetError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return builders[name]()


GOLDEN = (
    ("monoidal", None), ("laplaza-assoc", None), ("catalan", 2), ("catalan", 3), ("catalan", 4),
    ("sym-catalan", 2), ("sym-catalan", 3), ("nested-cex", None), ("disjoint-cex", None),
    ("infiniteqf-cex", None), ("finiteness-cex", None), ("iterated", 2), ("iterated", 3),
)


def golden_name(name: str, n: Optional[int]) -> str:
    return f"{name}{n if n is not None else ''}.rw2"


def golden_text(name: str, n: Optional[int] = None) -> str:
    return resources.files("rw2").joinpath("data", golden_name(name, n)).read_text(encoding="utf-8")
