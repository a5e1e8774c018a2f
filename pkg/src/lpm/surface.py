"""Concrete syntax: tokenizer, parser, name resolution and printer.

The syntax follows the Dedukti family::

    Nat : Type.
    S : Nat -> Nat.
    [n] Plus 0 n --> n.
    #REDUCE Plus 2 2.

``x : A => t`` is an abstraction, ``x : A -> B`` a dependent product and
``A -> B`` a plain arrow.  Comments are written ``(; ... ;)``.  When ``S``
and ``0`` are declared, a numeral ``n`` stands for ``S (... (S 0))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .term import (
    KIND,
    TYPE,
    App,
    BVar,
    Category,
    Const,
    IllFormed,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    constants,
    free_vars,
)

# ---------------------------------------------------------------------------
# tokens


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: Sequence[str] = ()):
        self.line, self.col = line, col
        self.expected = tuple(sorted(set(expected)))
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, a symbol, a command or EOF
    text: str
    line: int
    col: int

    @property
    def loc(self) -> str:
        return f"{self.line}:{self.col}"


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\(;)
  | (?P<cmd>\#[A-Z]+)
  | (?P<sym>-->|->|=>|[:.()\[\],])
  | (?P<ident>[^\W][\w'!?]*)
    """,
    re.VERBOSE,
)

COMMANDS = ("#CHECK", "#REDUCE", "#TYPE")


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, start = 0, 1, 0

    def advance(upto: int) -> None:
        nonlocal line, start
        chunk = text[pos:upto]
        n = chunk.count("\n")
        if n:
            line += n
            start = pos + chunk.rindex("\n") + 1

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        end = m.end()
        if kind == "comment":
            close = text.find(";)", end)
            if close < 0:
                raise ParseError("unterminated comment", line, col)
            end = close + 2
        elif kind == "cmd":
            if m.group() not in COMMANDS:
                raise ParseError(f"unknown command {m.group()}", line, col, COMMANDS)
            out.append(Token(m.group(), m.group(), line, col))
        elif kind == "sym":
            out.append(Token(m.group(), m.group(), line, col))
        elif kind == "ident":
            out.append(Token("IDENT", m.group(), line, col))
        advance(end)
        pos = end
    col = pos - start + 1
    out.append(Token("EOF", "", line, col))
    return out


# ---------------------------------------------------------------------------
# surface syntax tree


class STerm:
    pass


@dataclass(frozen=True)
class SName(STerm):
    name: str
    loc: str = field(default="", compare=False)


@dataclass(frozen=True)
class SApp(STerm):
    fun: STerm
    arg: STerm
    loc: str = field(default="", compare=False)


@dataclass(frozen=True)
class SBind(STerm):
    kind: str  # "lam" or "pi"
    name: str
    annot: STerm
    body: STerm
    loc: str = field(default="", compare=False)


@dataclass(frozen=True)
class SArrow(STerm):
    dom: STerm
    cod: STerm
    loc: str = field(default="", compare=False)


@dataclass(frozen=True)
class Declaration:
    name: str
    type: STerm
    loc: str = field(default="", compare=False)


@dataclass(frozen=True)
class RuleStatement:
    variables: tuple[str, ...]
    lhs: STerm
    rhs: STerm
    loc: str = field(default="", compare=False)


@dataclass(frozen=True)
class Command:
    command: str  # "#CHECK", "#REDUCE" or "#TYPE"
    term: STerm
    type: STerm | None = None
    loc: str = field(default="", compare=False)


Statement = Declaration | RuleStatement | Command


@dataclass(frozen=True)
class SourceFile:
    statements: tuple[Statement, ...]


# ---------------------------------------------------------------------------
# parser


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected: Sequence[str]) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        return ParseError(f"unexpected {found}", t.line, t.col, expected)

    def eat(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.fail([kind])
        t = self.tok
        self.i += 1
        return t

    def file(self) -> SourceFile:
        out = []
        while self.tok.kind != "EOF":
            out.append(self.statement())
        return SourceFile(tuple(out))

    def statement(self) -> Statement:
        t = self.tok
        if t.kind == "[":
            self.i += 1
            names = []
            if self.tok.kind == "IDENT":
                names.append(self.eat("IDENT").text)
                while self.tok.kind == ",":
                    self.i += 1
                    names.append(self.eat("IDENT").text)
            self.eat("]")
            lhs = self.term()
            self.eat("-->")
            rhs = self.term()
            self.eat(".")
            return RuleStatement(tuple(names), lhs, rhs, t.loc)
        if t.kind in COMMANDS:
            self.i += 1
            if t.kind == "#CHECK":
                subject = self.app()
                self.eat(":")
                ty = self.term()
                self.eat(".")
                return Command(t.kind, subject, ty, t.loc)
            body = self.term()
            self.eat(".")
            return Command(t.kind, body, None, t.loc)
        if t.kind == "IDENT":
            self.i += 1
            self.eat(":")
            ty = self.term()
            self.eat(".")
            return Declaration(t.text, ty, t.loc)
        raise self.fail(["IDENT", "[", *COMMANDS])

    def term(self) -> STerm:
        t = self.tok
        if t.kind == "IDENT" and self.peek().kind == ":":
            save = self.i
            self.i += 2
            annot = self.app()
            if self.tok.kind in ("=>", "->"):
                kind = "lam" if self.tok.kind == "=>" else "pi"
                self.i += 1
                return SBind(kind, t.text, annot, self.term(), t.loc)
            self.i = save
        a = self.app()
        if self.tok.kind == "->":
            self.i += 1
            return SArrow(a, self.term(), t.loc)
        return a

    def app(self) -> STerm:
        out = self.atom()
        while self.tok.kind in ("IDENT", "("):
            loc = self.tok.loc
            out = SApp(out, self.atom(), loc)
        return out

    def atom(self) -> STerm:
        t = self.tok
        if t.kind == "IDENT":
            self.i += 1
            return SName(t.text, t.loc)
        if t.kind == "(":
            self.i += 1
            inner = self.term()
            self.eat(")")
            return inner
        raise self.fail(["IDENT", "("])


def parse_file(text: str) -> SourceFile:
    return Parser(text).file()


def parse_sterm(text: str) -> STerm:
    p = Parser(text)
    out = p.term()
    if p.tok.kind != "EOF":
        raise p.fail(["EOF"])
    return out


# ---------------------------------------------------------------------------
# printing the surface tree


def _sprint(t: STerm, level: int = 0) -> str:
    """``level`` 0 admits binders, 1 an application, 2 only an atom."""
    match t:
        case SName(name=n):
            return n
        case SApp(fun=f, arg=a):
            s = f"{_sprint(f, 1)} {_sprint(a, 2)}"
            return s if level < 2 else f"({s})"
        case SBind(kind=k, name=n, annot=a, body=b):
            s = f"{n}:{_sprint(a, 1)} {'=>' if k == 'lam' else '->'} {_sprint(b, 0)}"
            return s if level == 0 else f"({s})"
        case SArrow(dom=d, cod=c):
            s = f"{_sprint(d, 1)} -> {_sprint(c, 0)}"
            return s if level == 0 else f"({s})"
    raise TypeError(t)


def print_statement(s: Statement) -> str:
    match s:
        case Declaration(name=n, type=ty):
            return f"{n} : {_sprint(ty)}."
        case RuleStatement(variables=vs, lhs=l, rhs=r):
            return f"[{', '.join(vs)}] {_sprint(l)} --> {_sprint(r)}."
        case Command(command="#CHECK", term=t, type=ty):
            return f"#CHECK {_sprint(t, 1)} : {_sprint(ty)}."
        case Command(command=c, term=t):
            return f"{c} {_sprint(t)}."
    raise TypeError(s)


def print_file(f: SourceFile) -> str:
    return "".join(print_statement(s) + "\n" for s in f.statements)


# ---------------------------------------------------------------------------
# resolution


class ResolveError(ValueError):
    """An unknown name or a term outside the grammar, with its location."""

    def __init__(self, message: str, loc: str = "", kind: str = "Unbound"):
        self.loc = loc
        self.kind = kind
        super().__init__(f"{loc}: {kind}: {message}" if loc else f"{kind}: {message}")


def _const_kinds(ctx) -> dict:
    if ctx is None:
        return {}
    consts = getattr(ctx, "consts", ctx)
    return {n: (v[1] if isinstance(v, tuple) else v) for n, v in consts.items()}


def numeral(n: int) -> Term:
    t: Term = Const("0")
    for _ in range(n):
        t = App(Const("S"), t)
    return t


def resolve(t: STerm, ctx=None, variables: Sequence[str] = ()) -> Term:
    """Turn a surface term into a term: bound names first, then the listed
    variables, then declared constants, then numerals."""
    kinds = _const_kinds(ctx)
    free = set(variables)

    def go(s: STerm, bound: list[str | None]) -> Term:
        try:
            match s:
                case SName(name=n):
                    for i, b in enumerate(reversed(bound)):
                        if b == n:
                            return BVar(i)
                    if n in free:
                        return Var(n)
                    if n == "Type":
                        return TYPE
                    if n == "Kind":
                        return KIND
                    if n in kinds:
                        return Const(n, kinds[n])
                    if n.isdigit() and "S" in kinds and "0" in kinds:
                        return numeral(int(n))
                    raise ResolveError(f"unknown name {n}", s.loc)
                case SApp(fun=f, arg=a):
                    return App(go(f, bound), go(a, bound))
                case SBind(kind=k, name=n, annot=a, body=b):
                    node = Lam if k == "lam" else Pi
                    return node(n, go(a, bound), go(b, bound + [n]))
                case SArrow(dom=d, cod=c):
                    return Pi("_", go(d, bound), go(c, bound + [None]))
        except IllFormed as e:
            raise ResolveError(str(e), s.loc, "SortError") from None
        raise TypeError(s)

    return go(t, [])


def parse_term(text: str, ctx=None, variables: Sequence[str] = ()) -> Term:
    return resolve(parse_sterm(text), ctx, variables)


# ---------------------------------------------------------------------------
# printing terms


def _numeral_value(t: Term) -> int | None:
    n = 0
    while isinstance(t, App) and t.fun == Const("S"):
        n += 1
        t = t.arg
    return n if n and t == Const("0") else None


def _mentions_zero(t: Term, depth: int = 0) -> bool:
    from .term import binds, children

    if t.loose <= depth:
        return False
    if isinstance(t, BVar):
        return t.index == depth
    return any(_mentions_zero(k, depth + binds(t, i)) for i, k in enumerate(children(t)))


def print_term(t: Term, names: Sequence[str] = ()) -> str:
    """Print ``t``; ``names`` are the names of its loose indices, outermost first."""
    taken = set(free_vars(t)) | set(constants(t))

    def pick(hint: str, bound: list[str]) -> str:
        base = hint.split("%")[0] if hint else ""
        if not base or base == "_":
            base = "x"
        n, k = base, 0
        while n in taken or n in bound:
            k += 1
            n = f"{base}{k}"
        return n

    def go(s: Term, bound: list[str], level: int) -> str:
        match s:
            case Var(name=n):
                return n
            case BVar(index=i):
                return bound[-1 - i] if i < len(bound) else f"#{i}"
            case Const(name=n):
                return n
            case Sort(name=n):
                return n
            case App(fun=f, arg=a):
                v = _numeral_value(s)
                if v is not None:
                    return str(v)
                out = f"{go(f, bound, 1)} {go(a, bound, 2)}"
                return out if level < 2 else f"({out})"
            case Lam(binder=x, annot=a, body=b):
                n = pick(x, bound)
                out = f"{n}:{go(a, bound, 1)} => {go(b, bound + [n], 0)}"
                return out if level == 0 else f"({out})"
            case Pi(binder=x, domain=a, codomain=b):
                if _mentions_zero(b):
                    n = pick(x, bound)
                    out = f"{n}:{go(a, bound, 1)} -> {go(b, bound + [n], 0)}"
                else:
                    out = f"{go(a, bound, 1)} -> {go(b, bound + ['_'], 0)}"
                return out if level == 0 else f"({out})"
        raise TypeError(s)

    return go(t, list(names), 0)


# ---------------------------------------------------------------------------
# elaboration of statements


def is_kind(t: Term) -> bool:
    return t.category is Category.KIND


def iter_entries(f: SourceFile, ctx_of) -> Iterator[tuple[Statement, object]]:
    """Yield each statement with its elaborated form.

    ``ctx_of()`` returns the current global context for resolution; rule
    statements resolve with their declared variables.
    """
    from .reduction import RewriteRule
    from .typecheck import ObjectDecl, TypeDecl

    for s in f.statements:
        match s:
            case Declaration(name=n, type=ty):
                t = resolve(ty, ctx_of())
                yield s, (TypeDecl(n, t, s.loc) if is_kind(t) else ObjectDecl(n, t, s.loc))
            case RuleStatement(variables=vs, lhs=l, rhs=r):
                ctx = ctx_of()
                lhs, rhs = resolve(l, ctx, vs), resolve(r, ctx, vs)
                try:
                    rule = RewriteRule(lhs, rhs)
                except IllFormed as e:
                    raise ResolveError(str(e), s.loc, "SortError") from None
                yield s, rule
            case Command():
                yield s, s

