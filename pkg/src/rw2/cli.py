"""Command-line front end: ``rw2 <command> ...``.

Exit codes: 0 success, 1 negative verdict, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys
from typing import Optional, Sequence

from . import __version__
from . import coherence as C
from . import diamond as D
from . import presets as P
from . import structmon as SM
from . import terms as T
from . import thompson as TM
from .critical import critical_spans
from .dsl import DSLError, emit_theory, parse_term, parse_theory, parse_word
from .prooft import Path, as_path, check_tiling, in_general_position
from .theory import FuelExhausted, Theory2, TheoryError, default_fuel, find_redexes, normal_letters, normalize, replay

SCHEMA_VERSION = 1

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ loading


def load(spec: Optional[str], preset: Optional[str] = None, n: Optional[int] = None) -> Theory2:
    """A theory from a file path, a bundled file name (``catalan3.rw2``) or a preset name."""
    if preset:
        return P.gen(preset, n)
    if spec is None:
        raise UsageError("give a theory file or --preset")
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return parse_theory(fh.read(), file=spec)
    stem = spec[:-4] if spec.endswith(".rw2") else spec
    try:
        text = P.golden_text(stem)
    except (FileNotFoundError, OSError):
        text = None
    if text is not None:
        return parse_theory(text, file=spec)
    try:
        return P.gen(stem, n)
    except P.PresetError:
        raise UsageError(f"no such theory file or preset: {spec}") from None


_LETTER = re.compile(r"([^\s;@]+)@(λ|root|(?:\([^()]*\))+)")


def parse_letters(th: Theory2, text: str) -> tuple:
    """``rule@address`` items separated by ``;`` or spaces; addresses may use symbol aliases."""
    out = []
    pos = 0
    for m in _LETTER.finditer(text):
        if text[pos:m.start()].strip(" ;\n\t"):
            raise UsageError(f"cannot read step near {text[pos:m.start()].strip()!r}")
        pos = m.end()
        addr = tuple((th.aliases.get(s, s), i) for s, i in T.parse_address(m.group(2)))
        th.rule(m.group(1))
        out.append((m.group(1), addr))
    if text[pos:].strip(" ;\n\t"):
        raise UsageError(f"cannot read step near {text[pos:].strip()!r}")
    return tuple(out)


def parse_diagram(text: str, n: Optional[int] = None) -> TM.TreeDiagram:
    """``DOM -> COD [p0 p1 ...]``; the permutation defaults to the identity."""
    m = re.fullmatch(r"\s*(.+?)\s*->\s*(.+?)\s*(?:\[([\d\s,]*)\])?\s*", text)
    if not m:
        raise UsageError(f"diagram must look like 'DOM -> COD [perm]': {text!r}")
    dom = TM.parse_tree(m.group(1), n)
    cod = TM.parse_tree(m.group(2), dom.n)
    perm = tuple(int(x) for x in re.split(r"[\s,]+", m.group(3).strip())) if m.group(3) and m.group(3).strip() else tuple(range(dom.leaves))
    return TM.TreeDiagram(dom, cod, perm)


# ------------------------------------------------------------------ reports


def _letters_json(th: Theory2, letters) -> list:
    return [f"{lab}@{th.show_addr(ad)}" for lab, ad in letters]


def _path_json(th: Theory2, p: Path) -> dict:
    return {"source": th.show(p.source), "steps": _letters_json(th, p.letters)}


def _face_json(th: Theory2, f) -> dict:
    out = {"kind": f.kind, "at": f.at, "left": _path_json(th, f.left), "right": _path_json(th, f.right)}
    if f.label:
        out["label"] = f.label
    return out


def _diagram_json(d: TM.TreeDiagram) -> dict:
    return {"dom": TM.show_tree(d.dom), "cod": TM.show_tree(d.cod), "perm": list(d.perm), "text": str(d)}


class Reporter:
    def __init__(self, command: str, as_json: bool, out=None):
        self.command = command
        self.as_json = as_json
        self.out = out or sys.stdout
        self.data: dict = {"schema_version": SCHEMA_VERSION, "command": command}
        self.lines: list[str] = []

    def put(self, **kw) -> None:
        self.data.update(kw)

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def flush(self) -> None:
        if self.as_json:
            self.out.write(json.dumps(self.data, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
        else:
            self.out.write("\n".join(self.lines) + ("\n" if self.lines else ""))


# ----------------------------------------------------------------- commands


def cmd_parse(a, rep: Reporter) -> int:
    th = load(a.theory, a.preset, a.n)
    rep.put(inputs={"theory": a.theory or a.preset}, theory=th.name,
            signature=dict(th.signature), rules=[r.label for r in th.rules],
            axioms=[ax.label for ax in th.axioms], warnings=list(th.warnings))
    if a.emit:
        rep.put(text=emit_theory(th))
        rep.say(emit_theory(th).rstrip("\n"))
    else:
        rep.say(f"theory {th.name}: {len(th.signature)} symbols, {len(th.rules)} rules, {len(th.axioms)} axioms")
        for w in th.warnings:
            rep.say(f"warning: {w}")
    return EXIT_OK


def cmd_normalize(a, rep: Reporter) -> int:
    th = load(a.theory, a.preset, a.n)
    t = parse_term(a.term, th, file="<term>")
    if any(r.orientation < 0 for r in th.rules):
        th = C.positive_subtheory(th)
    fuel = a.fuel if a.fuel is not None else default_fuel()
    try:
        nf, trace = normalize(th, t, a.strategy, fuel, a.seed)
    except FuelExhausted:
        rep.put(inputs={"term": a.term}, normal_form=None, reason="fuel-exhausted", fuel=fuel)
        rep.say(f"fuel exhausted after {fuel} steps")
        return EXIT_NEGATIVE
    rep.put(inputs={"term": th.show(t), "strategy": a.strategy}, normal_form=th.show(nf),
            steps=[th.show_step(s) for s in trace])
    rep.say(th.show(nf))
    if a.trace:
        for s in trace:
            rep.say(f"  {th.show_step(s)}")
    return EXIT_OK


def cmd_critical(a, rep: Reporter) -> int:
    th = load(a.theory, a.preset, a.n)
    spans = critical_spans(th, a.rules)
    rep.put(inputs={"theory": th.name, "rules": a.rules}, count=len(spans), spans=[
        {"id": s.id, "source": th.show(s.source), "left": th.show_step(s.left), "right": th.show_step(s.right)}
        for s in spans])
    rep.say(f"{len(spans)} critical spans")
    for s in spans:
        rep.say(f"  {s.id}: {th.show(s.source)}  [{th.show_step(s.left)} | {th.show_step(s.right)}]")
    return EXIT_OK


def cmd_coherence(a, rep: Reporter) -> int:
    th = load(a.theory, a.preset, a.n)
    v = C.maclane_verdict(th, fuel=a.fuel, n_samples=a.samples, time_limit=a.time_limit)
    pos = v.certificate.theory if v.certificate else th
    spans = []
    if v.certificate:
        for sid, j in v.certificate.joinings.items():
            if isinstance(j, C.Joining):
                spans.append({"id": sid, "source": pos.show(j.source), "status": "joined",
                              "commutes_by": j.commutes_by, "faces": j.tiling.counts()})
            else:
                spans.append({"id": sid, "source": pos.show(j.source), "status": "unjoined", "reason": j.reason})
    rep.put(inputs={"theory": th.name, "fuel": a.fuel}, verdict=v.status, reasons=list(v.reasons), spans=spans)
    rep.say(v.status)
    for r in v.reasons:
        rep.say(f"  {r}")
    if a.verbose:
        for s in spans:
            rep.say(f"  {s['id']}: {s['status']} {s.get('commutes_by', s.get('reason', ''))}")
    return EXIT_OK if v.coherent else EXIT_NEGATIVE


def cmd_prove_equal(a, rep: Reporter) -> int:
    th = load(a.theory, a.preset, a.n)
    pos = C.positive_subtheory(th)
    cert = C.certify_complete(pos, th.rank, a.fuel)
    if not cert.valid:
        rep.put(verdict="no-certificate", reasons=[u.span_id for u in cert.unproven])
        rep.say("theory is not certified complete; cannot build a tiling")
        return EXIT_NEGATIVE
    words = [parse_word(w, pos, file="<word>") for w in (a.left, a.right)]
    general = all(in_general_position(w, pos) for w in words)
    p, q = (as_path(pos, w) for w in words)
    if p.source != q.source:
        raise UsageError("the two words start from different terms")
    tp, tq = replay(pos, p.source, p.letters), replay(pos, q.source, q.letters)
    if pos.canon(tp[-1]) != pos.canon(tq[-1]):
        rep.put(verdict="not-parallel")
        rep.say("the words end in different terms")
        return EXIT_NEGATIVE
    extended = bool(find_redexes(pos, tp[-1]))
    if extended:
        tail = normal_letters(pos, tp[-1])
        p, q = Path(p.source, p.letters + tail), Path(q.source, q.letters + tail)
    tiling = C.prove_equal_to_nf(cert, p, q)
    chk = check_tiling(pos, (p, q), tiling)
    rep.put(inputs={"left": a.left, "right": a.right}, extended_to_normal_form=extended, general_position=general,
            verdict="equal" if chk else "check-failed", faces=[_face_json(pos, f) for f in tiling.faces],
            lemmas=sorted(tiling.lemmas), counts=tiling.counts())
    rep.say(f"{'equal' if chk else 'tiling rejected: ' + chk.reason} ({len(tiling.faces)} faces {tiling.counts()})")
    if not general:
        rep.say("note: the pair is not in general position; the result covers this pair only")
    if a.verbose:
        for f in tiling.faces:
            rep.say(f"  {f.kind}@{f.at}: {' ; '.join(_letters_json(pos, f.left.letters))} => "
                    f"{' ; '.join(_letters_json(pos, f.right.letters))}")
    return EXIT_OK if chk else EXIT_NEGATIVE


def cmd_diamonds(a, rep: Reporter) -> int:
    th = load(a.theory, a.preset, a.n)
    seeds = [parse_term(s, th) for s in a.seed]
    if a.superpose:
        seeds += D.superposition_seeds(th, a.superpose)
    if not seeds:
        raise UsageError("give --seed terms or --superpose DEPTH")
    g = D.build_graph(th, seeds, a.depth)
    found = D.basic_diamonds(g, th, max_len=a.max_len)
    rep.put(inputs={"seeds": [th.show(s) for s in seeds], "depth": a.depth, "max_len": a.max_len},
            vertices=len(g.vertices), edges=len(g.edges), count=len(found),
            diamonds=[D.show_pair(g, p) for p in found])
    rep.say(f"{len(found)} basic diamonds ({len(g.vertices)} vertices, {len(g.edges)} edges)")
    for p in found:
        rep.say(f"  {D.show_pair(g, p)}")
    if a.export:
        with open(a.export, "w", encoding="utf-8") as fh:
            fh.write(g.export())
    return EXIT_OK


def cmd_preset(a, rep: Reporter) -> int:
    if not a.name:
        rep.put(presets=list(P.PRESET_NAMES))
        rep.say("\n".join(P.PRESET_NAMES))
        return EXIT_OK
    th = P.gen(a.name, a.n)
    text = emit_theory(th)
    rep.put(inputs={"name": a.name, "n": a.n}, theory=th.name, text=text)
    rep.say(text.rstrip("\n"))
    return EXIT_OK


def cmd_thompson(a, rep: Reporter) -> int:
    if a.action == "theta":
        th = P.gen(a.preset, a.n)
        word = parse_letters(th, " ".join(a.args))
        d = TM.theta(th, word)
        rep.put(inputs={"word": _letters_json(th, word)}, diagram=_diagram_json(d),
                order_preserving=TM.is_order_preserving(d))
        rep.say(str(d))
        return EXIT_OK
    ds = [parse_diagram(x, a.n) for x in a.args]
    want = {"mul": 2, "inv": 1, "reduce": 1, "check": 1}[a.action]
    if len(ds) != want:
        raise UsageError(f"thompson {a.action} takes {want} diagram(s)")
    if a.action == "mul":
        d = TM.td_mul(*ds)
    elif a.action == "inv":
        d = TM.td_reduce(TM.td_inv(ds[0]))
    else:
        d = TM.td_reduce(ds[0])
    rep.put(inputs={"diagrams": [str(x) for x in ds]}, diagram=_diagram_json(d),
            order_preserving=TM.is_order_preserving(d))
    rep.say(str(d))
    if a.action == "check":
        rep.say("order-preserving" if TM.is_order_preserving(d) else "permuting")
    return EXIT_OK


def cmd_structmon(a, rep: Reporter) -> int:
    th = P.gen(a.preset, a.n)
    if a.action == "compose":
        word = parse_letters(th, " ".join(a.args))
        op = SM.word_operator(th, word)
        rep.put(inputs={"word": _letters_json(th, word)}, empty=op.empty,
                seed=None if op.empty else [th.show(op.s), th.show(op.t)])
        rep.say(op.show(th))
        return EXIT_OK
    if a.action == "apply":
        if len(a.args) < 2:
            raise UsageError("structmon apply WORD TERM")
        word = parse_letters(th, " ".join(a.args[:-1]))
        u = parse_term(a.args[-1], th)
        got = SM.op_apply(SM.word_operator(th, word), u)
        rep.put(inputs={"word": _letters_json(th, word), "term": th.show(u)},
                result=None if got is None else th.show(got))
        rep.say("undefined" if got is None else th.show(got))
        return EXIT_OK if got is not None else EXIT_NEGATIVE
    fams = a.args or list(SM.RELATION_FAMILIES)
    rng = random.Random(a.seed)
    results = {}
    ok = True
    for fam in fams:
        if fam not in SM.RELATION_FAMILIES:
            raise UsageError(f"unknown relation family {fam!r}; choose from {', '.join(SM.RELATION_FAMILIES)}")
        tally: dict = {}
        for _ in range(a.trials):
            v = SM.random_relation(th, fam, rng).evaluate()
            tally[v] = tally.get(v, 0) + 1
        results[fam] = tally
        ok &= "unequal" not in tally
        rep.say(f"{fam}: " + ", ".join(f"{k} {v}" for k, v in sorted(tally.items())))
    rep.put(inputs={"families": fams, "trials": a.trials, "seed": a.seed}, results=results)
    return EXIT_OK if ok else EXIT_NEGATIVE


# ------------------------------------------------------------------- parser


def _theory_args(p: argparse.ArgumentParser, positional: bool = True) -> None:
    if positional:
        p.add_argument("theory", nargs="?", help="theory file, bundled file name or preset name")
    p.add_argument("--preset", help="preset name instead of a file")
    p.add_argument("--n", type=int, help="arity parameter for parametric presets")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rw2", description="Rewriting 2-theory workbench")
    ap.add_argument("--version", action="version", version=f"rw2 {__version__}")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a theory file")
    _theory_args(p)
    p.add_argument("--emit", action="store_true", help="print the canonical DSL text")

    p = sub.add_parser("normalize", help="rewrite a term to normal form")
    _theory_args(p)
    p.add_argument("term")
    p.add_argument("--strategy", default="leftmost-innermost")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fuel", type=int)
    p.add_argument("--trace", action="store_true")

    p = sub.add_parser("critical", help="list critical spans")
    _theory_args(p)
    p.add_argument("--rules", choices=["positive", "all"], default="positive")

    p = sub.add_parser("coherence", help="certify completeness and decide Mac Lane coherence")
    _theory_args(p)
    p.add_argument("--fuel", type=int, default=C.DEFAULT_FACE_FUEL)
    p.add_argument("--samples", type=int, default=300)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--verbose", "-v", action="store_true")

    p = sub.add_parser("prove-equal", help="tiling proof that two reduction words are equal")
    _theory_args(p)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--fuel", type=int, default=C.DEFAULT_FACE_FUEL)
    p.add_argument("--verbose", "-v", action="store_true")

    p = sub.add_parser("diamonds", help="basic diamonds of a bounded reduction graph")
    _theory_args(p)
    p.add_argument("--seed", action="append", default=[], help="seed term (repeatable)")
    p.add_argument("--superpose", type=int, default=0, help="add superposition seeds of this depth")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--export", help="write the reduction graph as an edge list")

    p = sub.add_parser("preset", help="print a preset theory")
    p.add_argument("name", nargs="?")
    p.add_argument("--n", type=int)

    p = sub.add_parser("thompson", help="tree-diagram arithmetic")
    p.add_argument("action", choices=["mul", "inv", "reduce", "check", "theta"])
    p.add_argument("args", nargs="*")
    p.add_argument("--preset", default="catalan")
    p.add_argument("--n", type=int, default=2)

    p = sub.add_parser("structmon", help="structure-monoid operators")
    p.add_argument("action", choices=["compose", "apply", "relation"])
    p.add_argument("args", nargs="*")
    p.add_argument("--preset", default="catalan")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return ap


COMMANDS = {
    "parse": cmd_parse, "normalize": cmd_normalize, "critical": cmd_critical, "coherence": cmd_coherence,
    "prove-equal": cmd_prove_equal, "diamonds": cmd_diamonds, "preset": cmd_preset,
    "thompson": cmd_thompson, "structmon": cmd_structmon,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    ap = build_parser()
    try:
        a, extra = ap.parse_known_args(argv)
        if extra and getattr(a, "args", None) is not None and not any(x.startswith("--") for x in extra):
            a.args = list(a.args) + extra
        elif extra:
            ap.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    rep = Reporter(a.command, a.json, out)
    err = out or sys.stderr
    try:
        code = COMMANDS[a.command](a, rep)
    except DSLError as e:
        return _fail(rep, err, "parse-error", str(e), {"file": e.file, "line": e.line, "column": e.col})
    except (UsageError, TheoryError, P.PresetError, TM.TreeError, TM.EmptyOperator, SM.UnsupportedTheory,
            T.InvalidAddress, ValueError) as e:
        return _fail(rep, err, "usage-error", str(e))
    rep.flush()
    return code


def _fail(rep: Reporter, err, kind: str, msg: str, where: Optional[dict] = None) -> int:
    if rep.as_json:
        rep.put(error={"kind": kind, "message": msg, **(where or {})})
        rep.flush()
    else:
        err.write(f"rw2: {msg}\n")
    return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
