"""Encoding lambda-Pi terms and rules as higher-order rewriting.

Every lambda-Pi term becomes a preterm of the single base type ``Term``
built from five builtin constants and one constant per declared name.  The
builtins are named ``#App``, ``#Lam`` and so on, which no parsed identifier
can be, so a user constant called ``App`` never collides with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import AbstractSet, Mapping

from .meta_hrs import (
    Arrow,
    Base,
    Bound,
    Con,
    HrsError,
    HrsRule,
    MetaApp,
    MetaLam,
    MetaVar,
    Preterm,
    mapp,
    mspine,
    power,
)
from .reduction import RewriteRule, rules_of
from .term import (
    KIND,
    TYPE,
    App,
    BVar,
    Const,
    IdentKind,
    IllFormed,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    free_vars,
    spine,
    var_occurrences,
)

TERM = Base("Term")
T2 = Arrow(TERM, TERM)

TYPE_C = Con("#Type", TERM)
KIND_C = Con("#Kind", TERM)
APP_C = Con("#App", Arrow(TERM, T2))
LAM_C = Con("#Lam", Arrow(TERM, Arrow(T2, TERM)))
PI_C = Con("#Pi", Arrow(TERM, Arrow(T2, TERM)))
BUILTINS = {c.name: c for c in (TYPE_C, KIND_C, APP_C, LAM_C, PI_C)}

ArityMap = dict[str, int]


@dataclass(frozen=True)
class LpmSignature:
    """The builtins plus one ``Term`` constant per declared name."""

    constants: Mapping[str, Con] = field(default_factory=dict)
    base: Base = TERM

    def extend(self, name: str, kind: IdentKind) -> "LpmSignature":
        if name in self.constants:
            raise ValueError(f"{name} is already in the signature")
        return LpmSignature({**self.constants, name: Con(name, TERM, kind.value)})

    def lookup(self, name: str) -> Con:
        return BUILTINS.get(name) or self.constants[name]


class NotInImage(ValueError):
    pass


class EncodingError(ValueError):
    clause = "encoding"


class NotAPattern(EncodingError):
    clause = "NotAPattern"


class FreeVarEscape(EncodingError):
    clause = "FreeVarEscape"


class ArityMismatch(EncodingError):
    clause = "ArityMismatch"


# ---------------------------------------------------------------------------
# the bijection


def embed(t: Term) -> Preterm:
    match t:
        case Var(name=x):
            return MetaVar(x, TERM)
        case BVar(index=i):
            return Bound(i, TERM)
        case Const(name=c, kind=k):
            return Con(c, TERM, k.value)
        case Sort(name="Type"):
            return TYPE_C
        case Sort():
            return KIND_C
        case App(fun=f, arg=a):
            return mapp(APP_C, [embed(f), embed(a)])
        case Lam(binder=x, annot=a, body=b):
            return mapp(LAM_C, [embed(a), MetaLam(x, TERM, embed(b))])
        case Pi(binder=x, domain=a, codomain=b):
            return mapp(PI_C, [embed(a), MetaLam(x, TERM, embed(b))])
    raise TypeError(f"not a term: {t!r}")


def unembed(p: Preterm) -> Term:
    """Inverse of ``embed`` on its image; ``NotInImage`` elsewhere."""
    try:
        return _unembed(p)
    except IllFormed as e:
        raise NotInImage(str(e)) from None


def _unembed(p: Preterm) -> Term:
    if p.type != TERM:
        raise NotInImage(f"preterm of type {p.type} is not a term")
    head, args = mspine(p)
    match head, args:
        case MetaVar(name=x), []:
            return Var(x)
        case Bound(index=i), []:
            return BVar(i)
        case Con(name="#Type"), []:
            return TYPE
        case Con(name="#Kind"), []:
            return KIND
        case Con(name="#App"), [f, a]:
            return App(_unembed(f), _unembed(a))
        case Con(name="#Lam" | "#Pi" as c), [a, MetaLam(hint=x, binder_type=ty, body=b)] if ty == TERM:
            node = Lam if c == "#Lam" else Pi
            return node(x, _unembed(a), _unembed(b))
        case Con(name=c, tag=tag), [] if c not in BUILTINS:
            kind = IdentKind(tag) if tag != "builtin" else IdentKind.OBJECT_CONSTANT
            return Const(c, kind)
    raise NotInImage(f"not the image of a term: {p}")


# ---------------------------------------------------------------------------
# uniform terms and patterns


def is_uniform(t: Term, V: AbstractSet[str] = frozenset()) -> ArityMap | None:
    arity: ArityMap = {}
    for x, n in var_occurrences(t):
        if x in V:
            continue
        if arity.setdefault(x, n) != n:
            return None
    return arity


def embed_uniform(t: Term, V: AbstractSet[str], A: Mapping[str, int]) -> Preterm:
    """Free variables outside ``V`` become metavariables of type
    ``Term^(n+1)`` taking their first ``n = A(x)`` arguments directly."""
    head, args = spine(t)
    if isinstance(head, Var) and head.name not in V:
        n = A.get(head.name, 0)
        if len(args) < n:
            raise ArityMismatch(f"{head.name} has arity {n} but is applied to {len(args)} arguments")
        out = mapp(MetaVar(head.name, power(TERM, n + 1)), [embed_uniform(a, V, A) for a in args[:n]])
        for a in args[n:]:
            out = mapp(APP_C, [out, embed_uniform(a, V, A)])
        return out
    match t:
        case App(fun=f, arg=a):
            return mapp(APP_C, [embed_uniform(f, V, A), embed_uniform(a, V, A)])
        case Lam(binder=x, annot=a, body=b):
            return mapp(LAM_C, [embed_uniform(a, V, A), MetaLam(x, TERM, embed_uniform(b, V, A))])
        case Pi(binder=x, domain=a, codomain=b):
            return mapp(PI_C, [embed_uniform(a, V, A), MetaLam(x, TERM, embed_uniform(b, V, A))])
    return embed(t)


def is_lambda_pi_pattern(t: Term) -> ArityMap | None:
    """The arity map under which ``t`` is a lambda-Pi pattern, if any.

    Free variables may only occur as arguments, applied to distinct bound
    variables; abstractions may only occur as arguments and their
    annotations mention no free variable.
    """
    arity: ArityMap = {}

    def pat(s: Term, depth: int) -> bool:
        match s:
            case Const():
                return True
            case BVar(index=i):
                return i < depth
            case App(fun=f, arg=a):
                return pat(f, depth) and arg(a, depth)
        return False

    def arg(q: Term, depth: int) -> bool:
        head, args = spine(q)
        if isinstance(head, Var):
            ys = [a.index for a in args if isinstance(a, BVar) and a.index < depth]
            if len(ys) != len(args) or len(set(ys)) != len(ys):
                return False
            return arity.setdefault(head.name, len(args)) == len(args)
        if isinstance(q, Lam):
            return not free_vars(q.annot) and pat(q.body, depth + 1)
        return pat(q, depth)

    return dict(arity) if pat(t, 0) else None


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class EncodedRule:
    source: RewriteRule
    encoded: HrsRule
    arities: Mapping[str, int] = field(compare=False)


def _check_escape(r: RewriteRule) -> None:
    extra = free_vars(r.rhs) - free_vars(r.lhs)
    if extra:
        raise FreeVarEscape(f"right-hand side variables {sorted(extra)} do not occur on the left")


def encode_rule(r: RewriteRule) -> EncodedRule:
    _check_escape(r)
    A = is_lambda_pi_pattern(r.lhs)
    if A is None:
        raise NotAPattern(f"left-hand side is not a lambda-Pi pattern: {r.lhs}")
    # the right-hand side may apply a variable to extra arguments, which
    # are passed through #App; fewer arguments cannot be encoded
    for x, n in var_occurrences(r.rhs):
        if n < A[x]:
            raise ArityMismatch(f"{x} takes {A[x]} arguments on the left but {n} on the right")
    try:
        hr = HrsRule(embed_uniform(r.lhs, frozenset(), A), embed_uniform(r.rhs, frozenset(), A), r.label)
    except HrsError as e:
        raise NotAPattern(str(e)) from None
    return EncodedRule(r, hr, A)


def encode_rule_syntactic(r: RewriteRule) -> HrsRule:
    """Every variable at arity zero: matching is then purely syntactic."""
    _check_escape(r)
    try:
        return HrsRule(embed(r.lhs), embed(r.rhs), r.label)
    except HrsError as e:
        raise NotAPattern(str(e)) from None


def _beta_rule() -> HrsRule:
    X = MetaVar("X", TERM)
    Y = MetaVar("Y", T2)
    Z = MetaVar("Z", TERM)
    lhs = mapp(APP_C, [mapp(LAM_C, [X, MetaLam("x", TERM, MetaApp(Y, Bound(0, TERM)))]), Z])
    return HrsRule(lhs, MetaApp(Y, Z), "beta")


BETA = _beta_rule()


@lru_cache(maxsize=128)
def hrs_of_rules(rules: tuple[RewriteRule, ...], with_beta: bool = False) -> tuple[HrsRule, ...]:
    out = [encode_rule(r).encoded for r in rules]
    return ((BETA,) if with_beta else ()) + tuple(out)


def hrs_of_context(ctx, with_beta: bool = False) -> tuple[HrsRule, ...]:
    return hrs_of_rules(rules_of(ctx), with_beta)


def signature_of(ctx) -> LpmSignature:
    consts = getattr(ctx, "consts", {})
    sig = LpmSignature()
    for name, entry in consts.items():
        kind = entry[1] if isinstance(entry, tuple) else IdentKind.OBJECT_CONSTANT
        sig = sig.extend(name, kind)
    return sig
