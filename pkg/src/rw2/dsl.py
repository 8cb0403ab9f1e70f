"""Line-oriented theory files, term syntax and reduction-word syntax.

Example::

    theory monoidal
    sig tensor/2 I/0
    infix ⊗ tensor
    var a b c d
    rule alpha: a ⊗ (b ⊗ c) -> (a ⊗ b) ⊗ c
    invertible alpha
    axiom pentagon: alpha(a,b,c⊗d) ; alpha(a⊗b,c,d) = a ⊗ alpha(b,c,d) ; alpha(a,b⊗c,d) ; alpha(a,b,c) ⊗ d
    rank tensor = $1 + 2*$2 - 1 base 1

Comments start with ``#``; a trailing backslash continues a line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import terms as T
from .prooft import Expr, Id, RuleApp, Seq, Struct, infer, show_expr
from .terms import App, Term, Var
from .theory import CoherenceAxiom, Measure, RankFn, Rule, Theory2, TheoryError


class DSLError(ValueError):
    def __init__(self, msg: str, file: str = "<input>", line: int = 1, col: int = 1):
        super().__init__(f"{file}:{line}:{col}: {msg}")
        self.msg = msg
        self.file = file
        self.line = line
        self.col = col


_TOKEN = re.compile(r"\s*(?:(?P<ident>[^\W\d][\w']*)|(?P<int>\d+)|(?P<punct>[(),;])|(?P<op>\S))")


@dataclass
class Tok:
    kind: str
    text: str
    col: int


def tokenize(text: str, file: str = "<input>", line: int = 1, col0: int = 1) -> list[Tok]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise DSLError(f"unexpected character {text[pos]!r}", file, line, col0 + pos)
        kind = m.lastgroup
        out.append(Tok(kind, m.group(kind), col0 + m.start(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, file: str, line: int, col0: int):
        self.toks = tokenize(text, file, line, col0)
        self.i = 0
        self.file, self.line = file, line
        self.end_col = col0 + len(text.rstrip())

    def err(self, msg: str, tok: Optional[Tok] = None) -> DSLError:
        col = tok.col if tok else (self.toks[self.i].col if self.i < len(self.toks) else self.end_col)
        return DSLError(msg, self.file, self.line, col)

    def peek(self) -> Optional[Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, text: Optional[str] = None) -> Tok:
        t = self.peek()
        if t is None:
            raise self.err(f"expected {text!r}" if text else "unexpected end of input")
        if text is not None and t.text != text:
            raise self.err(f"expected {text!r}, found {t.text!r}", t)
        self.i += 1
        return t

    def seq(self):
        items = [self.expr()]
        while self.peek() and self.peek().text == ";":
            self.take(";")
            items.append(self.expr())
        return items[0] if len(items) == 1 else ("seq", items, items[0][-1])

    def expr(self):
        left = self.atom()
        while True:
            t = self.peek()
            if t is None or t.kind != "op":
                return left
            self.take()
            right = self.atom()
            left = ("infix", t.text, left, right, t)

    def atom(self):
        t = self.peek()
        if t is None:
            raise self.err("unexpected end of input")
        if t.text == "(":
            self.take("(")
            inner = self.seq()
            self.take(")")
            return inner
        if t.kind in ("ident", "op"):
            self.take()
            if self.peek() and self.peek().text == "(":
                self.take("(")
                args = []
                if self.peek() and self.peek().text == ")":
                    self.take(")")
                    return ("call", t.text, args, t)
                args.append(self.seq())
                while self.peek() and self.peek().text == ",":
                    self.take(",")
                    args.append(self.seq())
                self.take(")")
                return ("call", t.text, args, t)
            if t.kind == "op":
                raise self.err(f"operator {t.text!r} used without operands", t)
            return ("name", t.text, t)
        raise self.err(f"unexpected {t.text!r}", t)

    def done(self, node):
        if self.peek() is not None:
            raise self.err(f"unexpected {self.peek().text!r}", self.peek())
        return node


def _parse_ast(text: str, file: str, line: int, col0: int):
    p = _Parser(text, file, line, col0)
    if not p.toks:
        raise DSLError("empty expression", file, line, col0)
    return p.done(p.seq()), p


@dataclass
class Scope:
    signature: dict
    aliases: dict
    var_names: tuple = ()
    strict_vars: bool = False
    rules: Optional[dict] = None  # label -> Rule

    def symbol(self, name: str) -> Optional[str]:
        if name in self.signature:
            return name
        return self.aliases.get(name)


def _tok_of(node) -> Tok:
    return node[-1] if isinstance(node[-1], Tok) else node[-1]


def _to_term(node, sc: Scope, p: _Parser) -> Term:
    kind = node[0]
    if kind == "seq":
        raise p.err("';' is not allowed inside a term", _tok_of(node))
    if kind == "name":
        name, tok = node[1], node[2]
        sym = sc.symbol(name)
        if sym is not None:
            if sc.signature[sym] != 0:
                raise p.err(f"symbol {name!r} expects {sc.signature[sym]} arguments", tok)
            return App(sym)
        if T.FRESH_SEP in name:
            raise p.err(f"reserved character in {name!r}", tok)
        if sc.strict_vars and name not in sc.var_names:
            raise p.err(f"undeclared identifier {name!r}", tok)
        return Var(name)
    if kind == "call":
        name, args, tok = node[1], node[2], node[3]
        sym = sc.symbol(name)
        if sym is None:
            raise p.err(f"unknown function symbol {name!r}", tok)
        if sc.signature[sym] != len(args):
            raise p.err(f"symbol {name!r} expects {sc.signature[sym]} arguments, got {len(args)}", tok)
        return App(sym, [_to_term(a, sc, p) for a in args])
    if kind == "infix":
        op, l, r, tok = node[1], node[2], node[3], node[4]
        sym = sc.symbol(op)
        if sym is None or sc.signature[sym] != 2:
            raise p.err(f"{op!r} is not a binary infix alias", tok)
        return App(sym, [_to_term(l, sc, p), _to_term(r, sc, p)])
    raise p.err("malformed term")  # pragma: no cover


def _to_word(node, sc: Scope, p: _Parser) -> Expr:
    kind = node[0]
    rules = sc.rules or {}
    if kind == "seq":
        items = [_to_word(n, sc, p) for n in node[1]]
        out = items[0]
        for e in items[1:]:
            out = Seq(out, e)
        return out
    if kind == "name":
        name, tok = node[1], node[2]
        if name in rules:
            if T.variables(rules[name].lhs):
                raise p.err(f"rule {name!r} needs arguments", tok)
            return RuleApp(name, ())
        return Id(_to_term(node, sc, p))
    if kind == "call":
        name, args, tok = node[1], node[2], node[3]
        if name == "id":
            if len(args) != 1:
                raise p.err("id expects one term", tok)
            return Id(_to_term(args[0], sc, p))
        if name in rules:
            return RuleApp(name, tuple(_to_word(a, sc, p) for a in args))
        sym = sc.symbol(name)
        if sym is None:
            raise p.err(f"unknown rule or symbol {name!r}", tok)
        if sc.signature[sym] != len(args):
            raise p.err(f"symbol {name!r} expects {sc.signature[sym]} arguments, got {len(args)}", tok)
        return Struct(sym, tuple(_to_word(a, sc, p) for a in args))
    if kind == "infix":
        op, l, r, tok = node[1], node[2], node[3], node[4]
        sym = sc.symbol(op)
        if sym is None or sc.signature[sym] != 2:
            raise p.err(f"{op!r} is not a binary infix alias", tok)
        return Struct(sym, (_to_word(l, sc, p), _to_word(r, sc, p)))
    raise p.err("malformed word")  # pragma: no cover


def _scope_of(th: Theory2, strict: bool = False) -> Scope:
    rules = {r.label: r for r in tuple(th.rules) + tuple(th.hidden)}
    return Scope(th.signature, th.aliases, th.var_names, strict, rules)


def parse_term(text: str, th: Optional[Theory2] = None, *, file: str = "<term>", line: int = 1,
               col: int = 1, strict: bool = False) -> Term:
    sc = _scope_of(th, strict) if th else Scope({}, {})
    node, p = _parse_ast(text, file, line, col)
    return _to_term(node, sc, p)


def parse_word(text: str, th: Theory2, *, file: str = "<word>", line: int = 1, col: int = 1) -> Expr:
    node, p = _parse_ast(text, file, line, col)
    return _to_word(node, _scope_of(th), p)


# ------------------------------------------------------------ theory files

_AFFINE_TERM = re.compile(r"^(?:(\d+)\s*\*\s*)?([A-Za-z_]\w*)?\$(\d+)$")


def _parse_affine(expr: str, file: str, line: int, col: int):
    """Parse ``2*$2 + len$1 - 3`` into ([(measure, idx, coef)], const)."""
    s = expr.replace(" ", "")
    if not s:
        raise DSLError("empty rank expression", file, line, col)
    if s[0] not in "+-":
        s = "+" + s
    parts = re.findall(r"([+-])([^+-]+)", s)
    if "".join(a + b for a, b in parts) != s:
        raise DSLError(f"cannot parse rank expression {expr!r}", file, line, col)
    terms, const = [], 0
    for sign, body in parts:
        k = 1 if sign == "+" else -1
        if body.isdigit():
            const += k * int(body)
            continue
        m = _AFFINE_TERM.match(body)
        if not m:
            raise DSLError(f"bad rank term {body!r}", file, line, col)
        coef = int(m.group(1)) if m.group(1) else 1
        terms.append((m.group(2) or "rank", int(m.group(3)), k * coef))
    return tuple(terms), const


@dataclass
class _Line:
    text: str
    line: int
    col: int


def _logical_lines(src: str) -> list[_Line]:
    out: list[_Line] = []
    buf, start, col = "", 0, 1
    for n, raw in enumerate(src.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if not buf:
            start = n
            col = len(body) - len(body.lstrip()) + 1
        if body.rstrip().endswith("\\"):
            buf += body.rstrip()[:-1] + " "
            continue
        buf += body
        if buf.strip():
            out.append(_Line(buf.strip(), start, col))
        buf = ""
    if buf.strip():
        out.append(_Line(buf.strip(), start, col))
    return out


def parse_theory(src: str, file: str = "<theory>") -> Theory2:
    name = "theory"
    signature: dict = {}
    aliases: dict = {}
    display: dict = {}
    var_names: list = []
    rules: list[Rule] = []
    axioms_raw: list = []
    eqs_raw: list = []
    modulo_raw: list = []
    invertible: list = []
    orient: dict = {}
    measures: dict = {}
    in_modulo = False
    lines = _logical_lines(src)

    def scope(strict=True) -> Scope:
        return Scope(signature, aliases, tuple(var_names), strict and bool(var_names))

    def term_at(text: str, ln: _Line, offset: int) -> Term:
        node, p = _parse_ast(text, file, ln.line, ln.col + offset)
        return _to_term(node, scope(), p)

    def rule_line(body: str, ln: _Line, offset: int) -> Rule:
        label, sep, rest = body.partition(":")
        if not sep or not label.strip():
            raise DSLError("expected 'label: lhs -> rhs'", file, ln.line, ln.col + offset)
        label = label.strip()
        if not re.fullmatch(r"[^\W\d][\w']*", label):
            raise DSLError(f"bad rule label {label!r}", file, ln.line, ln.col + offset)
        if "->" not in rest:
            raise DSLError("missing '->' in rule", file, ln.line, ln.col + offset + len(body))
        lhs_s, rhs_s = rest.split("->", 1)
        lo = offset + len(label) + 1 + (len(body.partition(":")[0]) - len(label))
        lhs = term_at(lhs_s, ln, lo)
        rhs = term_at(rhs_s, ln, lo + len(lhs_s) + 2)
        if type(lhs) is Var:
            raise DSLError(f"rule {label}: left-hand side is a bare variable", file, ln.line, ln.col + lo)
        return Rule(label, lhs, rhs)

    for ln in lines:
        text = ln.text
        if in_modulo:
            if text == "}":
                in_modulo = False
                continue
            modulo_raw.append(rule_line(text, ln, 0))
            continue
        kw, _, body = text.partition(" ")
        body = body.strip()
        off = len(text) - len(body)
        if kw == "theory":
            name = body or name
        elif kw == "sig":
            for item in body.split():
                sym, sep, ar = item.rpartition("/")
                if not sep or not ar.isdigit() or not sym:
                    raise DSLError(f"bad signature entry {item!r}", file, ln.line, ln.col + off + body.find(item))
                if sym in signature and signature[sym] != int(ar):
                    raise DSLError(f"symbol {sym!r} redeclared with a different arity", file, ln.line, ln.col + off)
                signature[sym] = int(ar)
        elif kw in ("infix", "alias"):
            parts = body.split()
            if len(parts) != 2 or parts[1] not in signature:
                raise DSLError(f"usage: {kw} <alias> <declared-symbol>", file, ln.line, ln.col + off)
            aliases[parts[0]] = parts[1]
            display.setdefault(parts[1], parts[0])
        elif kw == "var":
            for v in body.split():
                if T.FRESH_SEP in v or not re.fullmatch(r"[^\W\d][\w']*", v):
                    raise DSLError(f"bad variable name {v!r}", file, ln.line, ln.col + off + body.find(v))
                if v in signature:
                    raise DSLError(f"{v!r} is already a symbol", file, ln.line, ln.col + off + body.find(v))
                var_names.append(v)
        elif kw == "rule":
            r = rule_line(body, ln, off)
            if any(x.label == r.label for x in rules):
                raise DSLError(f"duplicate rule label {r.label!r}", file, ln.line, ln.col + off)
            rules.append(r)
        elif kw == "invertible":
            for lab in body.split():
                invertible.append((lab, ln, off + body.find(lab)))
        elif kw == "orient":
            parts = body.split()
            if len(parts) != 2 or parts[1] not in ("+", "-", "+1", "-1"):
                raise DSLError("usage: orient <rule> +|-", file, ln.line, ln.col + off)
            orient[parts[0]] = (1 if parts[1].startswith("+") else -1, ln, off)
        elif kw == "axiom":
            label, sep, rest = body.partition(":")
            if not sep:
                raise DSLError("expected 'axiom label: word = word'", file, ln.line, ln.col + off)
            axioms_raw.append((label.strip(), rest, ln, off + len(label) + 1))
        elif kw == "eq":
            if "=" not in body:
                raise DSLError("expected 'eq lhs = rhs'", file, ln.line, ln.col + off)
            eqs_raw.append((body, ln, off))
        elif kw == "modulo":
            if body.startswith("{"):
                rest = body[1:].strip()
                if rest.endswith("}"):
                    for piece in rest[:-1].split(";"):
                        if piece.strip():
                            modulo_raw.append(rule_line(piece.strip(), ln, off))
                else:
                    in_modulo = True
                    if rest:
                        modulo_raw.append(rule_line(rest, ln, off + 1))
            else:
                raise DSLError("expected 'modulo {'", file, ln.line, ln.col + off)
        elif kw in ("rank", "measure"):
            _rank_line(kw, body, ln, off, measures, file)
        else:
            raise DSLError(f"unknown declaration {kw!r}", file, ln.line, ln.col)
    if in_modulo:
        raise DSLError("unterminated 'modulo {' block", file, lines[-1].line if lines else 1, 1)

    # invertibility: pair each declared rule with its formal inverse
    by_label = {r.label: r for r in rules}
    for lab, ln, off in invertible:
        if lab not in by_label:
            raise DSLError(f"unknown rule {lab!r}", file, ln.line, ln.col + off)
        r = by_label[lab]
        if r.invertible:
            continue
        inv_label = lab + "_inv"
        inv = by_label.get(inv_label)
        if inv is None:
            inv = Rule(inv_label, r.rhs, r.lhs)
            rules.append(inv)
        elif not (T.alpha_equiv(App("=", [inv.lhs, inv.rhs]), App("=", [r.rhs, r.lhs]))):
            raise DSLError(f"{inv_label} is not the inverse of {lab}", file, ln.line, ln.col + off)
        by_label[lab] = Rule(r.label, r.lhs, r.rhs, True, 1, inv_label)
        by_label[inv_label] = Rule(inv_label, inv.lhs, inv.rhs, True, -1, lab)
    for lab, (sign, ln, off) in orient.items():
        if lab not in by_label:
            raise DSLError(f"unknown rule {lab!r}", file, ln.line, ln.col + off)
        r = by_label[lab]
        by_label[lab] = Rule(r.label, r.lhs, r.rhs, r.invertible, sign, r.inverse)
    rules = [by_label[r.label] for r in rules]

    th = Theory2(
        name=name,
        signature=signature,
        rules=tuple(rules),
        aliases=aliases,
        display=display,
        var_names=tuple(var_names),
        modulo=tuple(modulo_raw),
        rank=RankFn(measures) if measures else None,
    )
    if th.rank is not None and "rank" not in measures:
        raise DSLError("measures declared without a 'rank' line", file, 1, 1)
    eqs = []
    for body, ln, off in eqs_raw:
        l, r = body.split("=", 1)
        eqs.append((term_at(l, ln, off), term_at(r, ln, off + len(l) + 1)))
    axioms = []
    sc = _scope_of(th)
    for label, rest, ln, off in axioms_raw:
        lhs_s, sep, rhs_s = rest.partition("=")
        if not sep:
            raise DSLError("axiom needs '='", file, ln.line, ln.col + off)
        node_l, p = _parse_ast(lhs_s, file, ln.line, ln.col + off)
        wl = _to_word(node_l, sc, p)
        node_r, p2 = _parse_ast(rhs_s, file, ln.line, ln.col + off + len(lhs_s) + 1)
        wr = _to_word(node_r, sc, p2)
        try:
            a, b = infer(th, wl), infer(th, wr)
        except (TypeError, TheoryError) as exc:
            raise DSLError(f"axiom {label}: {exc}", file, ln.line, ln.col + off) from None
        if th.canon(a.source) != th.canon(b.source) or th.canon(a.target) != th.canon(b.target):
            raise DSLError(f"axiom {label}: sides are not parallel", file, ln.line, ln.col + off)
        axioms.append(CoherenceAxiom(label, wl, wr))
    return th.with_(term_eqs=tuple(eqs), axioms=tuple(axioms))


def _rank_line(kw: str, body: str, ln: _Line, off: int, measures: dict, file: str) -> None:
    if kw == "measure":
        mname, _, body = body.partition(" ")
        body = body.strip()
    else:
        mname = "rank"
    base = None
    m = re.search(r"\bbase\s+(-?\d+)\s*$", body)
    if m:
        base = int(m.group(1))
        body = body[: m.start()].strip()
    if not body:
        old = measures.get(mname)
        measures[mname] = Measure(mname, base if base is not None else 0, dict(old.clauses) if old else {})
        return
    sym, sep, expr = body.partition("=")
    if not sep:
        raise DSLError(f"usage: {kw} <symbol> = <affine expression> [base N]", file, ln.line, ln.col + off)
    terms, const = _parse_affine(expr, file, ln.line, ln.col + off)
    old = measures.get(mname)
    clauses = dict(old.clauses) if old else {}
    clauses[sym.strip()] = (terms, const)
    measures[mname] = Measure(mname, base if base is not None else (old.base if old else 0), clauses)


def load_theory(path: str) -> Theory2:
    with open(path, encoding="utf-8") as fh:
        return parse_theory(fh.read(), file=str(path))


# ----------------------------------------------------------------- emitter


def _affine_text(terms, const) -> str:
    parts = []
    for mname, idx, coef in terms:
        ref = ("" if mname == "rank" else mname) + f"${idx}"
        mag = abs(coef)
        body = ref if mag == 1 else f"{mag}*{ref}"
        parts.append(("- " if coef < 0 else "+ ") + body)
    if const:
        parts.append(("- " if const < 0 else "+ ") + str(abs(const)))
    text = " ".join(parts) if parts else "+ 0"
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def _is_formal_inverse(r: Rule) -> bool:
    return r.invertible and r.inverse is not None and r.label == r.inverse + "_inv"


def emit_theory(th: Theory2) -> str:
    """Render a theory as DSL text that parses back to an equal presentation."""
    out = [f"theory {th.name}"]
    out.append("sig " + " ".join(f"{s}/{a}" for s, a in th.signature.items()))
    for alias, sym in th.aliases.items():
        out.append(f"{'infix' if th.signature.get(sym) == 2 else 'alias'} {alias} {sym}")
    names = list(th.var_names)
    used = set()
    for r in th.rules:
        used.update(T.variables(r.lhs))
        used.update(T.variables(r.rhs))
    names.extend(sorted(v for v in used if v not in names))
    if names:
        out.append("var " + " ".join(names))
    for r in th.rules:
        if not _is_formal_inverse(r):
            out.append(f"rule {r.label}: {T.show(r.lhs)} -> {T.show(r.rhs)}")
    for r in th.rules:
        if r.invertible and not _is_formal_inverse(r):
            out.append(f"invertible {r.label}")
    for r in th.rules:
        default = -1 if _is_formal_inverse(r) else 1
        if r.orientation != default:
            out.append(f"orient {r.label} {'+' if r.orientation > 0 else '-'}")
    for a, b in th.term_eqs:
        out.append(f"eq {T.show(a)} = {T.show(b)}")
    if th.modulo:
        out.append("modulo {")
        for r in th.modulo:
            out.append(f"  {r.label}: {T.show(r.lhs)} -> {T.show(r.rhs)}")
        out.append("}")
    for ax in th.axioms:
        out.append(f"axiom {ax.label}: {show_expr(ax.lhs_word)} = {show_expr(ax.rhs_word)}")
    if th.rank is not None:
        for m in th.rank.measures.values():
            kw = "rank" if m.name == "rank" else f"measure {m.name}"
            if not m.clauses:
                out.append(f"{kw} base {m.base}")
            for sym, (terms, const) in m.clauses.items():
                out.append(f"{kw} {sym} = {_affine_text(terms, const)} base {m.base}")
    return "\n".join(out) + "\n"
