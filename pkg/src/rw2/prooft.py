"""Reduction expressions, singular decomposition, canonical traces and tiling checks.

A reduction expression is built from ``Id``, ``RuleApp``, ``Struct`` and ``Seq``.
Paths of singular steps are represented by a source term plus a word of
``(rule_label, address)`` letters; the terms along the way are recomputed on
demand so the checker never trusts stored intermediate terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import terms as T
from .terms import Address, App, Term, Var
from .theory import SingularStep, Theory2, replay

Letter = tuple  # (rule_label, address)


class ReductionTypeError(TypeError):
    def __init__(self, msg: str, expr: "Expr"):
        super().__init__(f"{msg} in {show_expr(expr)}")
        self.expr = expr


@dataclass(frozen=True)
class Id:
    term: Term


@dataclass(frozen=True)
class RuleApp:
    rule: str
    args: tuple = ()


@dataclass(frozen=True)
class Struct:
    symbol: str
    args: tuple = ()


@dataclass(frozen=True)
class Seq:
    first: "Expr"
    second: "Expr"


Expr = Union[Id, RuleApp, Struct, Seq]


@dataclass(frozen=True)
class Reduction:
    expr: Expr
    source: Term
    target: Term


def show_expr(e: Expr, names: Optional[dict] = None) -> str:
    if isinstance(e, Id):
        if type(e.term) is Var or not e.term.args:
            return T.show(e.term, names)
        return f"id({T.show(e.term, names)})"
    if isinstance(e, Seq):
        return f"{show_expr(e.first, names)} ; {show_expr(e.second, names)}"
    head = e.rule if isinstance(e, RuleApp) else (names.get(e.symbol, e.symbol) if names else e.symbol)
    if not e.args:
        return head if isinstance(e, Struct) else f"{head}()"
    inner = ", ".join(_show_arg(a, names) for a in e.args)
    return f"{head}({inner})"


def _show_arg(e: Expr, names) -> str:
    s = show_expr(e, names)
    return f"({s})" if isinstance(e, Seq) else s


def seq_of(exprs: Sequence[Expr]) -> Expr:
    out = exprs[0]
    for e in exprs[1:]:
        out = Seq(out, e)
    return out


# ------------------------------------------------------------------- typing


def infer(th: Theory2, e: Expr) -> Reduction:
    if isinstance(e, Id):
        return Reduction(e, e.term, e.term)
    if isinstance(e, Struct):
        ar = th.signature.get(e.symbol)
        if ar is None:
            raise ReductionTypeError(f"unknown symbol {e.symbol!r}", e)
        if ar != len(e.args):
            raise ReductionTypeError(f"{e.symbol} expects {ar} arguments, got {len(e.args)}", e)
        kids = [infer(th, a) for a in e.args]
        return Reduction(e, App(e.symbol, [k.source for k in kids]), App(e.symbol, [k.target for k in kids]))
    if isinstance(e, RuleApp):
        if not th.has_rule(e.rule):
            raise ReductionTypeError(f"unknown rule {e.rule!r}", e)
        r = th.rule(e.rule)
        lv = T.variables(r.lhs)
        if len(lv) != len(e.args):
            raise ReductionTypeError(f"rule {r.label} expects {len(lv)} arguments, got {len(e.args)}", e)
        kids = [infer(th, a) for a in e.args]
        src = T.apply(r.lhs, {x: k.source for x, k in zip(lv, kids)})
        tgt = T.apply(r.rhs, {x: k.target for x, k in zip(lv, kids)})
        return Reduction(e, src, tgt)
    if isinstance(e, Seq):
        a, b = infer(th, e.first), infer(th, e.second)
        if th.canon(a.target) != th.canon(b.source):
            raise ReductionTypeError(
                f"composite mismatch: {th.show(a.target)} is not {th.show(b.source)}", e
            )
        return Reduction(e, a.source, b.target)
    raise ReductionTypeError("not a reduction expression", e)  # pragma: no cover


def _letters(th: Theory2, e: Expr) -> list[Letter]:
    if isinstance(e, Id):
        return []
    if isinstance(e, Seq):
        return _letters(th, e.first) + _letters(th, e.second)
    if isinstance(e, Struct):
        out: list[Letter] = []
        for i, a in enumerate(e.args, 1):
            out.extend((l, ((e.symbol, i),) + ad) for l, ad in _letters(th, a))
        return out
    r = th.rule(e.rule)
    occ: dict[str, list[Address]] = {}
    for ad, sub in T.positions(r.lhs):
        if type(sub) is Var:
            occ.setdefault(sub.name, []).append(ad)
    out = []
    for x, a in zip(T.variables(r.lhs), e.args):
        inner = _letters(th, a)
        for beta in occ[x]:
            out.extend((l, beta + ad) for l, ad in inner)
    out.append((r.label, ()))
    return out


def singular_decompose(th: Theory2, r: Union[Reduction, Expr]) -> list[SingularStep]:
    """Singular steps in the Nat 1 order (arguments first, then the rule)."""
    red = r if isinstance(r, Reduction) else infer(th, r)
    return steps_of(th, red.source, _letters(th, red.expr))


def steps_of(th: Theory2, source: Term, letters: Sequence[Letter]) -> list[SingularStep]:
    from .theory import rewrite_step

    out = []
    cur = source
    for l, ad in letters:
        cur, st = rewrite_step(th, cur, l, ad)
        out.append(st)
    return out


def independent(a: Letter, b: Letter) -> bool:
    return T.orthogonal(a[1], b[1])


def canonical_letters(letters: Sequence[Letter]) -> tuple:
    """Lexicographic normal form of a word modulo swaps of orthogonal letters."""
    rest = list(letters)
    out = []
    while rest:
        best = None
        for i, x in enumerate(rest):
            if all(independent(x, rest[j]) for j in range(i)):
                if best is None or _lkey(x) < _lkey(rest[best]):
                    best = i
        out.append(rest.pop(best))
    return tuple(out)


def _lkey(x: Letter) -> tuple:
    return (T.address_key(x[1]), x[0])


def canonical_trace(th: Theory2, r) -> list[SingularStep]:
    if isinstance(r, (Reduction, Id, RuleApp, Struct, Seq)):
        steps = singular_decompose(th, r)
    else:
        steps = list(r)
    if not steps:
        return []
    return steps_of(th, steps[0].source, canonical_letters([s.letter for s in steps]))


# --------------------------------------------------------- shape and Var


@dataclass(frozen=True)
class Shape:
    head: str  # "∘", rule label, symbol, or ";"
    args: tuple = ()
    kind: str = "hole"

    def __str__(self) -> str:
        if self.kind == "hole":
            return "∘"
        if self.kind == "seq":
            return " ; ".join(str(a) for a in self.args)
        if not self.args:
            return self.head
        return f"{self.head}(" + ",".join(str(a) for a in self.args) + ")"


def _shape_and_vars(e: Expr, out: list) -> Shape:
    if isinstance(e, Id):
        t = e.term
        if type(t) is Var:
            out.append(t.name)
            return Shape("∘")
        return Shape(t.head, tuple(_shape_and_vars(Id(a), out) for a in t.args), "sym")
    if isinstance(e, Struct):
        return Shape(e.symbol, tuple(_shape_and_vars(a, out) for a in e.args), "sym")
    if isinstance(e, RuleApp):
        return Shape(e.rule, tuple(_shape_and_vars(a, out) for a in e.args), "rule")
    return Shape(";", (_shape_and_vars(e.first, out), _shape_and_vars(e.second, out)), "seq")


def shape(r: Union[Reduction, Expr]) -> Shape:
    e = r.expr if isinstance(r, Reduction) else r
    return _shape_and_vars(e, [])


def reduction_vars(r: Union[Reduction, Expr]) -> list[str]:
    """Variables filling the holes of the shape, one entry per hole."""
    e = r.expr if isinstance(r, Reduction) else r
    out: list[str] = []
    _shape_and_vars(e, out)
    return out


def in_general_position(r: Union[Reduction, Expr], th: Optional[Theory2] = None) -> bool:
    """True iff no reduction of the same shape has more distinct variables.

    Without a theory every hole may be filled independently.  With one,
    composites force the holes on either side of each ``;`` to agree, so the
    maximum is read off the most general same-shape reduction.
    """
    e = r.expr if isinstance(r, Reduction) else r
    vs = reduction_vars(e)
    if th is None:
        return len(set(vs)) == len(vs)
    holes: list = []
    joins: list = []
    _generic(th, e, holes, joins, iter(range(10 ** 9)))
    sigma = T.unify(App("eqs", [a for a, _ in joins]), App("eqs", [b for _, b in joins])) if joins else {}
    if sigma is None:
        return len(set(vs)) == len(vs)
    most = set()
    for h in holes:
        most.update(T.variables(T.apply(h, sigma)))
    return len(set(vs)) == len(most)


def _generic(th: Theory2, e: Expr, holes: list, joins: list, counter) -> tuple:
    """Source and target of ``e`` with every hole replaced by a fresh variable."""
    if isinstance(e, Id):
        t = e.term
        if type(t) is Var:
            v = Var(f"#h{next(counter)}")
            holes.append(v)
            return v, v
        kids = [_generic(th, Id(a), holes, joins, counter) for a in t.args]
        return App(t.head, [k[0] for k in kids]), App(t.head, [k[1] for k in kids])
    if isinstance(e, Struct):
        kids = [_generic(th, a, holes, joins, counter) for a in e.args]
        return App(e.symbol, [k[0] for k in kids]), App(e.symbol, [k[1] for k in kids])
    if isinstance(e, RuleApp):
        r = th.rule(e.rule)
        kids = [_generic(th, a, holes, joins, counter) for a in e.args]
        lv = T.variables(r.lhs)
        return (T.apply(r.lhs, {x: k[0] for x, k in zip(lv, kids)}),
                T.apply(r.rhs, {x: k[1] for x, k in zip(lv, kids)}))
    a = _generic(th, e.first, holes, joins, counter)
    b = _generic(th, e.second, holes, joins, counter)
    joins.append((a[1], b[0]))
    return a[0], b[1]


# ----------------------------------------------------------------- tilings


@dataclass(frozen=True)
class Path:
    source: Term
    letters: tuple = ()

    def __len__(self) -> int:
        return len(self.letters)

    def then(self, other: "Path") -> "Path":
        return Path(self.source, self.letters + other.letters)


@dataclass(frozen=True)
class Face:
    kind: str  # Funct | Nat | Axiom | Inverse | Composite
    left: Path
    right: Path
    at: int = 0
    label: Optional[str] = None

    @property
    def boundary(self) -> tuple:
        return (self.left.letters, self.right.letters)

    def flipped(self) -> "Face":
        return Face(self.kind, self.right, self.left, self.at, self.label)

    def shifted(self, k: int) -> "Face":
        return Face(self.kind, self.left, self.right, self.at + k, self.label)


@dataclass
class Lemma:
    label: str
    left: Path
    right: Path
    tiling: "Tiling"


@dataclass
class Tiling:
    faces: list = field(default_factory=list)
    lemmas: dict = field(default_factory=dict)

    def reversed(self) -> "Tiling":
        return Tiling([f.flipped() for f in reversed(self.faces)], dict(self.lemmas))

    def shifted(self, k: int) -> "Tiling":
        return Tiling([f.shifted(k) for f in self.faces], dict(self.lemmas))

    def extend(self, other: "Tiling") -> "Tiling":
        self.faces.extend(other.faces)
        self.lemmas.update(other.lemmas)
        return self

    def counts(self) -> dict:
        out: dict = {}
        for f in self.faces:
            out[f.kind] = out.get(f.kind, 0) + 1
        return out


@dataclass
class TilingCheck:
    ok: bool
    bad_face: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def as_path(th: Theory2, x) -> Path:
    if isinstance(x, Path):
        return x
    if isinstance(x, (Id, RuleApp, Struct, Seq)):
        x = infer(th, x)
    if isinstance(x, Reduction):
        return Path(x.source, tuple(_letters(th, x.expr)))
    steps = list(x)
    if not steps:
        raise ValueError("empty step list has no source; pass a Path")
    return Path(steps[0].source, tuple(s.letter for s in steps))


def axiom_paths(th: Theory2) -> dict:
    """label -> (left Path, right Path) for each declared axiom."""
    cache = getattr(th, "_axiom_paths", None)
    if cache is not None:
        return cache
    out = {}
    for ax in th.axioms:
        l = infer(th, ax.lhs_word)
        r = infer(th, ax.rhs_word)
        out[ax.label] = (Path(l.source, tuple(_letters(th, l.expr))), Path(r.source, tuple(_letters(th, r.expr))))
    th._axiom_paths = out
    return out


def instance_offset(pattern: tuple, concrete: Path, pat_source: Term) -> Optional[Address]:
    """Whisker address p with concrete = pattern shifted under p, instance-checked."""
    pl, pr = pattern
    for side, conc in ((pl, concrete[0]), (pr, concrete[1])):
        if side.letters and conc.letters:
            label, ad = conc.letters[0]
            plabel, pad = side.letters[0]
            if label != plabel or len(ad) < len(pad) or ad[len(ad) - len(pad):] != pad:
                return None
            p = ad[: len(ad) - len(pad)]
            break
    else:
        return None
    for side, conc in ((pl, concrete[0]), (pr, concrete[1])):
        if len(side.letters) != len(conc.letters):
            return None
        for (l1, a1), (l2, a2) in zip(side.letters, conc.letters):
            if l1 != l2 or a2 != p + a1:
                return None
    sub = T.subterm(concrete[0].source, p)
    if sub is None or T.match(pat_source, sub) is None:
        return None
    return p


def _check_nat_oriented(th: Theory2, a: Path, b: Path) -> bool:
    """a = [inner copies at lhs occurrences..., r@p], b = [r@p, inner copies at rhs occurrences]."""
    if not a.letters or not b.letters:
        return False
    r_label, p = a.letters[-1]
    if b.letters[0] != (r_label, p):
        return False
    r = th.rule(r_label)
    lcopies, rcopies = a.letters[:-1], b.letters[1:]
    if not lcopies:
        return False
    inner_label = lcopies[0][0]
    lhs_occ: dict = {}
    for ad, sub in T.positions(r.lhs):
        if type(sub) is Var:
            lhs_occ.setdefault(sub.name, []).append(ad)
    rhs_occ: dict = {}
    for ad, sub in T.positions(r.rhs):
        if type(sub) is Var:
            rhs_occ.setdefault(sub.name, []).append(ad)
    for x, betas in lhs_occ.items():
        for beta in betas:
            pre = p + beta
            ad0 = lcopies[0][1]
            if not T.is_prefix(pre, ad0):
                continue
            delta = ad0[len(pre):]
            want_l = sorted((inner_label, p + bb + delta) for bb in betas)
            want_r = sorted((inner_label, p + gg + delta) for gg in rhs_occ.get(x, []))
            if sorted(lcopies) == want_l and sorted(rcopies) == want_r:
                return True
    return False


def check_face(th: Theory2, f: Face, lemmas: dict, lemma_ok: dict) -> Optional[str]:
    if f.left.source != f.right.source:
        return "face sides have different sources"
    lt = replay(th, f.left.source, f.left.letters)
    rt = replay(th, f.right.source, f.right.letters)
    if lt is None or rt is None:
        return "face side is not a valid reduction"
    if th.canon(lt[-1]) != th.canon(rt[-1]):
        return "face sides have different targets"
    k = f.kind
    if k == "Funct":
        L, R = f.left.letters, f.right.letters
        if len(L) == 2 and len(R) == 2 and L[0] == R[1] and L[1] == R[0] and independent(L[0], L[1]):
            return None
        return "not an interchange of orthogonal steps"
    if k == "Nat":
        if _check_nat_oriented(th, f.left, f.right) or _check_nat_oriented(th, f.right, f.left):
            return None
        return "not a naturality square"
    if k == "Inverse":
        for empty, full in ((f.left, f.right), (f.right, f.left)):
            if not empty.letters and len(full.letters) == 2:
                (l1, a1), (l2, a2) = full.letters
                if a1 == a2 and th.has_rule(l1) and th.rule(l1).inverse == l2:
                    return None
        return "not an inverse cancellation"
    if k == "Axiom":
        ax = axiom_paths(th).get(f.label)
        if ax is None:
            return f"unknown axiom {f.label!r}"
        for pat in (ax, (ax[1], ax[0])):
            if instance_offset(pat, (f.left, f.right), ax[0].source) is not None:
                return None
        return f"not an instance of axiom {f.label!r}"
    if k == "Composite":
        if f.label is None:
            return None if f.left.letters == f.right.letters else "reflexivity face with different sides"
        lem = lemmas.get(f.label)
        if lem is None:
            return f"unknown lemma {f.label!r}"
        if f.label not in lemma_ok:
            lemma_ok[f.label] = False  # guards against cyclic lemma references
            res = _check(th, (lem.left, lem.right), lem.tiling, lemmas, lemma_ok)
            lemma_ok[f.label] = res.ok
        if not lemma_ok[f.label]:
            return f"lemma {f.label!r} does not check"
        pat = (lem.left, lem.right)
        for p in (pat, (pat[1], pat[0])):
            if instance_offset(p, (f.left, f.right), lem.left.source) is not None:
                return None
        return f"not an instance of lemma {f.label!r}"
    return f"unknown face kind {k!r}"


def check_tiling(th: Theory2, claim, proof: Tiling) -> TilingCheck:
    left, right = as_path(th, claim[0]), as_path(th, claim[1])
    return _check(th, (left, right), proof, proof.lemmas, {})


def _check(th: Theory2, claim: tuple, proof: Tiling, lemmas: dict, lemma_ok: dict) -> TilingCheck:
    left, right = claim
    if left.source != right.source:
        return TilingCheck(False, 0, "claim sides have different sources")
    cur = list(left.letters)
    trace = replay(th, left.source, cur)
    if trace is None:
        return TilingCheck(False, 0, "claim left side is not a valid reduction")
    rt = replay(th, right.source, right.letters)
    if rt is None or th.canon(rt[-1]) != th.canon(trace[-1]):
        return TilingCheck(False, 0, "claim is not a parallel pair")
    for i, f in enumerate(proof.faces):
        why = check_face(th, f, lemmas, lemma_ok)
        if why:
            return TilingCheck(False, i, why)
        n = len(f.left.letters)
        if f.at < 0 or f.at > len(cur) or tuple(cur[f.at : f.at + n]) != f.left.letters:
            return TilingCheck(False, i, "face does not paste onto the current boundary")
        if trace[f.at] != f.left.source:
            return TilingCheck(False, i, "face source differs from boundary term")
        cur[f.at : f.at + n] = f.right.letters
        trace = replay(th, left.source, cur)
        if trace is None:  # pragma: no cover - impossible after a valid face
            return TilingCheck(False, i, "boundary stopped replaying")
    if tuple(cur) != right.letters:
        return TilingCheck(False, len(proof.faces), "faces do not paste to the claim boundary")
    return TilingCheck(True)


# ------------------------------------------------------- Funct bookkeeping


def funct_faces(th: Theory2, source: Term, frm: Sequence[Letter], to: Sequence[Letter]) -> list[Face]:
    """Adjacent orthogonal swaps turning word ``frm`` into the trace-equivalent ``to``."""
    cur = list(frm)
    out: list[Face] = []
    terms = replay(th, source, cur)
    for pos, want in enumerate(to):
        j = cur.index(want, pos)
        while j > pos:
            a, b = cur[j - 1], cur[j]
            if not independent(a, b):
                raise ValueError("words are not trace-equivalent")
            s = terms[j - 1]
            out.append(Face("Funct", Path(s, (a, b)), Path(s, (b, a)), j - 1))
            cur[j - 1], cur[j] = b, a
            terms = replay(th, source, cur)
            j -= 1
    return out


# ------------------------------------------------------------ path -> word


def step_word(th: Theory2, t: Term, label: str, address: Address) -> Expr:
    """The singular reduction expression applying ``label`` at ``address`` in ``t``."""
    if not address:
        r = th.rule(label)
        s = T.match(r.lhs, t)
        if s is None:
            raise ValueError(f"{label} does not match {th.show(t)}")
        return RuleApp(label, tuple(Id(s[x]) for x in T.variables(r.lhs)))
    sym, i = address[0]
    if type(t) is not App or t.head != sym:
        raise T.InvalidAddress(f"address {T.format_address(address)} not valid in {T.show(t)}")
    kids = tuple(step_word(th, c, label, address[1:]) if k == i else Id(c) for k, c in enumerate(t.args, 1))
    return Struct(sym, kids)


def path_word(th: Theory2, source: Term, letters: Sequence[Letter]) -> Expr:
    terms = replay(th, source, letters)
    if terms is None:
        raise ValueError("letters do not replay from the source")
    if not letters:
        return Id(source)
    return seq_of([step_word(th, terms[k], l, a) for k, (l, a) in enumerate(letters)])
