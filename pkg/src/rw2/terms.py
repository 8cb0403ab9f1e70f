"""First-order terms, addresses, substitution, matching and unification.

Terms are immutable and hash-consed only by value: ``Var`` and ``App`` cache
their hash so they can be used as dictionary keys inside graph searches.
An address is a tuple of ``(symbol, index)`` pairs with 1-based indices; the
empty tuple is the root.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional, Union

FRESH_SEP = "#"

Address = tuple  # tuple[tuple[str, int], ...]
ROOT: Address = ()


class InvalidAddress(ValueError):
    pass


class Var:
    __slots__ = ("name", "_h")

    def __init__(self, name: str):
        self.name = name
        self._h = hash(("V", name))

    def __eq__(self, other) -> bool:
        return self is other or (type(other) is Var and other.name == self.name)

    def __hash__(self) -> int:
        return self._h

    def __repr__(self) -> str:
        return f"Var({self.name!r})"

    def __str__(self) -> str:
        return self.name


class App:
    __slots__ = ("head", "args", "_h", "size")

    def __init__(self, head: str, args: Iterable["Term"] = ()):
        self.head = head
        self.args = tuple(args)
        self._h = hash((head, self.args))
        self.size = 1 + sum(a.size if type(a) is App else 1 for a in self.args)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            type(other) is App
            and other._h == self._h
            and other.head == self.head
            and other.args == self.args
        )

    def __hash__(self) -> int:
        return self._h

    def __repr__(self) -> str:
        return f"App({self.head!r}, {list(self.args)!r})"

    def __str__(self) -> str:
        return show(self)


Term = Union[Var, App]
Subst = dict  # dict[str, Term]


def show(t: Term, names: Optional[Mapping[str, str]] = None) -> str:
    """Prefix rendering; ``names`` optionally maps symbol names to display aliases."""
    if type(t) is Var:
        return t.name
    head = names.get(t.head, t.head) if names else t.head
    if not t.args:
        return head
    return head + "(" + ",".join(show(a, names) for a in t.args) + ")"


def is_var(t: Term) -> bool:
    return type(t) is Var


def variables(t: Term) -> tuple[str, ...]:
    """Variable names in left-to-right first-occurrence order."""
    seen: dict[str, None] = {}
    _collect(t, seen)
    return tuple(seen)


def _collect(t: Term, seen: dict) -> None:
    if type(t) is Var:
        seen.setdefault(t.name, None)
    else:
        for a in t.args:
            _collect(a, seen)


def var_occurrences(t: Term) -> list[str]:
    out: list[str] = []

    def go(u: Term) -> None:
        if type(u) is Var:
            out.append(u.name)
        else:
            for a in u.args:
                go(a)

    go(t)
    return out


def is_linear(t: Term) -> bool:
    occ = var_occurrences(t)
    return len(occ) == len(set(occ))


def depth(t: Term) -> int:
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def symbols_of(t: Term) -> set[tuple[str, int]]:
    out: set[tuple[str, int]] = set()

    def go(u: Term) -> None:
        if type(u) is App:
            out.add((u.head, len(u.args)))
            for a in u.args:
                go(a)

    go(t)
    return out


# ---------------------------------------------------------------- addresses


def subterm(t: Term, a: Address) -> Optional[Term]:
    for sym, i in a:
        if type(t) is not App or t.head != sym or not 1 <= i <= len(t.args):
            return None
        t = t.args[i - 1]
    return t


def replace(t: Term, a: Address, u: Term) -> Term:
    if not a:
        return u
    sym, i = a[0]
    if type(t) is not App or t.head != sym or not 1 <= i <= len(t.args):
        raise InvalidAddress(f"address {format_address(a)} not valid in {show(t)}")
    args = list(t.args)
    args[i - 1] = replace(args[i - 1], a[1:], u)
    return App(t.head, args)


def positions(t: Term, prefix: Address = ROOT) -> Iterator[tuple[Address, Term]]:
    """All (address, subterm) pairs in preorder (leftmost-outermost first)."""
    yield prefix, t
    if type(t) is App:
        for i, c in enumerate(t.args, 1):
            yield from positions(c, prefix + ((t.head, i),))


def is_prefix(a: Address, b: Address) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


def orthogonal(a: Address, b: Address) -> bool:
    return not is_prefix(a, b) and not is_prefix(b, a)


def address_key(a: Address) -> tuple:
    """Sort key giving preorder (parents before children, left before right)."""
    return tuple(i for _, i in a)


def format_address(a: Address, names: Optional[Mapping[str, str]] = None) -> str:
    if not a:
        return "λ"
    return "".join(f"({names.get(s, s) if names else s},{i})" for s, i in a)


def parse_address(text: str) -> Address:
    text = text.strip()
    if text in ("λ", "", "root", "()"):
        return ROOT
    out = []
    for chunk in text.replace(" ", "").split(")"):
        if not chunk:
            continue
        if not chunk.startswith("("):
            raise ValueError(f"bad address: {text!r}")
        sym, _, idx = chunk[1:].rpartition(",")
        out.append((sym, int(idx)))
    return tuple(out)


# ------------------------------------------------------------- substitution


def apply(t: Term, s: Mapping[str, Term]) -> Term:
    if not s:
        return t
    if type(t) is Var:
        return s.get(t.name, t)
    return App(t.head, [apply(a, s) for a in t.args])


def compose(s1: Mapping[str, Term], s2: Mapping[str, Term]) -> Subst:
    """Substitution equal to applying ``s1`` then ``s2``."""
    out = {k: apply(v, s2) for k, v in s1.items()}
    for k, v in s2.items():
        out.setdefault(k, v)
    return {k: v for k, v in out.items() if not (type(v) is Var and v.name == k)}


def match(pattern: Term, subject: Term, sigma: Optional[Subst] = None) -> Optional[Subst]:
    """One-sided syntactic matching: ``pattern^σ == subject``."""
    sigma = {} if sigma is None else dict(sigma)
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if type(p) is Var:
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = s
            elif bound != s:
                return None
        else:
            if type(s) is not App or s.head != p.head or len(s.args) != len(p.args):
                return None
            stack.extend(zip(p.args, s.args))
    return sigma


def _walk(t: Term, b: dict) -> Term:
    while type(t) is Var and t.name in b:
        t = b[t.name]
    return t


def _occurs(name: str, t: Term, b: dict) -> bool:
    t = _walk(t, b)
    if type(t) is Var:
        return t.name == name
    return any(_occurs(name, a, b) for a in t.args)


def _resolve(t: Term, b: dict) -> Term:
    t = _walk(t, b)
    if type(t) is Var:
        return t
    return App(t.head, [_resolve(a, b) for a in t.args])


def unify_many(pairs: Iterable[tuple[Term, Term]], sigma: Optional[Subst] = None) -> Optional[Subst]:
    b: dict[str, Term] = dict(sigma or {})
    stack = list(pairs)
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, b), _walk(y, b)
        if x == y:
            continue
        if type(x) is Var:
            if _occurs(x.name, y, b):
                return None
            b[x.name] = y
        elif type(y) is Var:
            if _occurs(y.name, x, b):
                return None
            b[y.name] = x
        else:
            if x.head != y.head or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
    return {k: _resolve(v, b) for k, v in b.items()}


def unify(t: Term, u: Term) -> Optional[Subst]:
    """Most general (idempotent) unifier of ``t`` and ``u``, or None."""
    return unify_many([(t, u)])


def fresh_name(base: str, k: int) -> str:
    return f"{base.split(FRESH_SEP)[0]}{FRESH_SEP}{k}"


def rename_apart(t: Term, u: Term) -> tuple[Term, Term]:
    """Rename variables of both terms with a shared fresh counter."""
    k = 0
    out = []
    for term in (t, u):
        ren = {}
        for v in variables(term):
            ren[v] = Var(fresh_name(v, k))
            k += 1
        out.append(apply(term, ren))
    return out[0], out[1]


def rename_with(t: Term, tag: str) -> Term:
    return apply(t, {v: Var(f"{v.split(FRESH_SEP)[0]}{FRESH_SEP}{tag}") for v in variables(t)})


def mgci(t: Term, u: Term) -> Optional[Term]:
    t2, u2 = rename_apart(t, u)
    s = unify(t2, u2)
    if s is None:
        return None
    return apply(t2, s)


class FreshVars:
    """Deterministic supply of reserved-suffix variables."""

    def __init__(self, base: str = "v", start: int = 0):
        self.base = base
        self.k = start

    def __call__(self) -> Var:
        v = Var(f"{self.base}{FRESH_SEP}{self.k}")
        self.k += 1
        return v


# ------------------------------------------------------------ α-equivalence


def canonical(*terms: Term) -> tuple[Term, ...]:
    """Rename variables to ``#0, #1, ...`` in joint first-occurrence order."""
    seen: dict[str, None] = {}
    for t in terms:
        _collect(t, seen)
    ren = {v: Var(f"{FRESH_SEP}{i}") for i, v in enumerate(seen)}
    return tuple(apply(t, ren) for t in terms)


def alpha_equiv(t: Term, u: Term) -> bool:
    return canonical(t) == canonical(u)


def is_instance(t: Term, pattern: Term) -> bool:
    return match(pattern, t) is not None


def is_renaming(s: Mapping[str, Term]) -> bool:
    vals = list(s.values())
    return all(type(v) is Var for v in vals) and len({v.name for v in vals}) == len(vals)
