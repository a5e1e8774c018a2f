"""Beta reduction, syntactic rule reduction and conversion on lambda-Pi terms.

The step functions return every one-step reduct (the full relation) in
leftmost-outermost order; ``normalize`` takes the first one each time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

from .term import (
    App,
    BVar,
    Category,
    Const,
    IllFormed,
    Lam,
    Path,
    Pi,
    Sort,
    Term,
    Var,
    apply,
    binds,
    children,
    fresh_name,
    instantiate,
    is_algebraic,
    rebuild,
    shift,
    spine,
    substitute_many,
    var_occurrences,
)

DEFAULT_FUEL = 100_000


class FuelExhausted(Exception):
    pass


class Undecided(FuelExhausted):
    """Plain conversion cannot answer: the normal forms differ but a rule
    would still fire modulo beta."""


class Fuel:
    """A reduction budget: one unit per rewrite step, beta or rule alike."""

    def __init__(self, amount: int):
        if amount < 1:
            raise ValueError("fuel must be at least 1")
        self.amount = amount
        self.used = 0

    @property
    def left(self) -> int:
        return self.amount - self.used

    def spend(self) -> None:
        if self.used >= self.amount:
            raise FuelExhausted(f"no normal form within {self.amount} steps")
        self.used += 1


def as_fuel(fuel: int | Fuel) -> Fuel:
    return fuel if isinstance(fuel, Fuel) else Fuel(fuel)


class RuleLevel(enum.Enum):
    OBJECT = "object"
    TYPE = "type"


@dataclass(frozen=True)
class RewriteRule:
    lhs: Term
    rhs: Term
    name: str | None = None
    level: RuleLevel = field(init=False, compare=False)

    def __post_init__(self):
        cats = (self.lhs.category, self.rhs.category)
        if cats == (Category.OBJECT, Category.OBJECT):
            level = RuleLevel.OBJECT
        elif cats == (Category.TYPE, Category.TYPE):
            level = RuleLevel.TYPE
        else:
            raise IllFormed(
                f"a rewrite rule relates two objects or two types, not a {cats[0].value} and a {cats[1].value}"
            )
        if self.lhs.loose or self.rhs.loose:
            raise IllFormed("rule sides must be locally closed")
        object.__setattr__(self, "level", level)

    @property
    def label(self) -> str:
        return self.name or "<rule>"

    def __str__(self) -> str:
        return f"{self.lhs} --> {self.rhs}"


@dataclass(frozen=True)
class StepTrace:
    rule: str
    position: Path
    subst: tuple[tuple[str, object], ...] = ()

    def format(self) -> str:
        pos = ".".join(map(str, self.position)) or "ε"
        sub = ", ".join(f"{k} := {v}" for k, v in self.subst)
        return f"{pos}  {self.rule}  {{{sub}}}"


class Step(NamedTuple):
    term: Term
    trace: StepTrace


def rules_of(ctx) -> tuple[RewriteRule, ...]:
    """Rules of a global context, or of a plain iterable of rules."""
    if ctx is None:
        return ()
    rules = getattr(ctx, "rules", ctx)
    return tuple(rules)


# ---------------------------------------------------------------------------
# syntactic matching


def _mentions_bound(t: Term, depth: int, below: int) -> bool:
    """Does ``t`` (seen at local depth ``depth``) use one of the ``below``
    innermost binders that enclose it?"""
    if t.loose <= depth:
        return False
    if isinstance(t, BVar):
        return depth <= t.index < depth + below
    return any(_mentions_bound(k, depth + binds(t, i), below) for i, k in enumerate(children(t)))


def _smatch(p: Term, t: Term, depth: int, sigma: dict[str, Term]) -> bool:
    if isinstance(p, Var):
        if _mentions_bound(t, 0, depth):
            return False
        image = shift(t, -depth)
        old = sigma.get(p.name)
        if old is None:
            sigma[p.name] = image
            return True
        # repeated variables need alpha-equal images, not convertible ones
        return old == image
    if type(p) is not type(t):
        return False
    if isinstance(p, (BVar, Const, Sort)):
        return p == t
    return all(
        _smatch(pk, tk, depth + binds(p, i), sigma)
        for i, (pk, tk) in enumerate(zip(children(p), children(t)))
    )


def syntactic_match(lhs: Term, t: Term) -> dict[str, Term] | None:
    sigma: dict[str, Term] = {}
    return sigma if _smatch(lhs, t, 0, sigma) else None


class RuleIndex:
    """Rules bucketed by the head constant and argument count of their lhs."""

    def __init__(self, rules: Sequence[RewriteRule]):
        self.rules = tuple(rules)
        self.by_head: dict[tuple[str, int], list[RewriteRule]] = {}
        self.wild: list[RewriteRule] = []
        for r in self.rules:
            head, args = spine(r.lhs)
            if isinstance(head, Const):
                self.by_head.setdefault((head.name, len(args)), []).append(r)
            else:
                self.wild.append(r)
        self.heads = frozenset(h for h, _ in self.by_head)
        self.higher_order = not all(is_algebraic(r.lhs) for r in self.rules)

    def candidates(self, head: Term, nargs: int) -> list[RewriteRule]:
        if self.wild:
            return list(self.rules)
        if isinstance(head, Const):
            return self.by_head.get((head.name, nargs), [])
        return []

    def is_rigid(self, head: Term) -> bool:
        """No rule can ever fire at a spine with this head."""
        if self.wild:
            return False
        if isinstance(head, Const):
            return head.name not in self.heads
        return isinstance(head, (Var, BVar, Sort))


@lru_cache(maxsize=256)
def rule_index(rules: tuple[RewriteRule, ...]) -> RuleIndex:
    return RuleIndex(rules)


# ---------------------------------------------------------------------------
# one-step relations


def _iter_steps(t: Term, index: RuleIndex | None, beta: bool, path: Path) -> Iterator[Step]:
    if beta and isinstance(t, App) and isinstance(t.fun, Lam):
        yield Step(instantiate(t.fun.body, t.arg), StepTrace("beta", path))
    if index is not None:
        head, args = spine(t)
        for r in index.candidates(head, len(args)):
            sigma = syntactic_match(r.lhs, t)
            if sigma is not None:
                yield Step(
                    substitute_many(r.rhs, sigma),
                    StepTrace(r.label, path, tuple(sorted(sigma.items()))),
                )
    kids = children(t)
    for i, k in enumerate(kids):
        for s in _iter_steps(k, index, beta, path + (i,)):
            new = list(kids)
            new[i] = s.term
            yield Step(rebuild(t, new), s.trace)


def iter_steps(t: Term, ctx=None, beta: bool = True, gamma: bool = True) -> Iterator[Step]:
    index = rule_index(rules_of(ctx)) if gamma else None
    return _iter_steps(t, index, beta, ())


def beta_step(t: Term) -> list[Step]:
    return list(_iter_steps(t, None, True, ()))


def gamma_step(t: Term, ctx) -> list[Step]:
    return list(_iter_steps(t, rule_index(rules_of(ctx)), False, ()))


def beta_gamma_step(t: Term, ctx) -> list[Step]:
    return list(_iter_steps(t, rule_index(rules_of(ctx)), True, ()))


# ---------------------------------------------------------------------------
# strategies


class Reducer:
    """Leftmost-outermost reduction and conversion against one rule set.

    With ``modulo_beta`` the rule steps are rewriting modulo beta (matching
    through the higher-order encoding) instead of syntactic matching.
    """

    def __init__(self, ctx=None, modulo_beta: bool = False, fuel: int | Fuel = DEFAULT_FUEL):
        self.ctx = ctx
        self.rules = rules_of(ctx)
        self.index = rule_index(self.rules)
        self.modulo_beta = modulo_beta
        self.fuel = as_fuel(fuel)

    def steps(self, t: Term) -> Iterator[Step]:
        if self.modulo_beta:
            from .modulo import iter_modulo_steps

            return (Step(s.target, s.trace()) for s in iter_modulo_steps(t, self.rules))
        return _iter_steps(t, self.index, True, ())

    def normalize(self, t: Term, trace: list[Step] | None = None) -> Term:
        while True:
            step = next(self.steps(t), None)
            if step is None:
                return t
            self.fuel.spend()
            if trace is not None:
                trace.append(step)
            t = step.term

    def _root_step(self, head: Term, args: list[Term]) -> Term | None:
        if self.modulo_beta:
            from .modulo import root_contract

            for k in range(len(args), -1, -1):
                if self.index.candidates(head, k) or self.index.wild:
                    out = root_contract(apply(head, args[:k]), self.rules)
                    if out is not None:
                        return apply(out, args[k:])
            return None
        for k in range(len(args), -1, -1):
            prefix = None
            for r in self.index.candidates(head, k):
                prefix = prefix or apply(head, args[:k])
                sigma = syntactic_match(r.lhs, prefix)
                if sigma is not None:
                    return apply(substitute_many(r.rhs, sigma), args[k:])
        return None

    def whnf(self, t: Term) -> Term:
        while True:
            head, args = spine(t)
            if isinstance(head, Lam) and args:
                self.fuel.spend()
                t = apply(instantiate(head.body, args[0]), args[1:])
                continue
            out = self._root_step(head, args)
            if out is None:
                return t
            self.fuel.spend()
            t = out

    def convertible(self, a: Term, b: Term) -> bool:
        if a == b:
            return True
        a, b = self.whnf(a), self.whnf(b)
        if a == b:
            return True
        if (isinstance(a, Lam) and isinstance(b, Lam)) or (isinstance(a, Pi) and isinstance(b, Pi)):
            if not self.convertible(children(a)[0], children(b)[0]):
                return False
            x = Var(fresh_name(a.binder))
            return self.convertible(instantiate(children(a)[1], x), instantiate(children(b)[1], x))
        ha, xs = spine(a)
        hb, ys = spine(b)
        if self.index.is_rigid(ha) and self.index.is_rigid(hb):
            if ha != hb or len(xs) != len(ys):
                return False
            return all(self.convertible(x, y) for x, y in zip(xs, ys))
        if isinstance(a, (Lam, Pi)) and self.index.is_rigid(hb):
            return False
        if isinstance(b, (Lam, Pi)) and self.index.is_rigid(ha):
            return False
        if ha == hb and len(xs) == len(ys) and all(self.convertible(x, y) for x, y in zip(xs, ys)):
            return True
        # a defined symbol may still fire once its arguments reduce
        na, nb = self.normalize(a), self.normalize(b)
        if na == nb:
            return True
        if not self.modulo_beta and self.index.higher_order:
            from .modulo import iter_modulo_steps

            if any(next(iter_modulo_steps(n, self.rules), None) for n in (na, nb)):
                raise Undecided(f"{na} and {nb} differ, but a rule still applies modulo beta")
        return False


def normalize(
    t: Term,
    ctx=None,
    modulo_beta: bool = False,
    fuel: int | Fuel = DEFAULT_FUEL,
    trace: list[Step] | None = None,
) -> Term:
    return Reducer(ctx, modulo_beta, fuel).normalize(t, trace)


def whnf(t: Term, ctx=None, modulo_beta: bool = False, fuel: int | Fuel = DEFAULT_FUEL) -> Term:
    return Reducer(ctx, modulo_beta, fuel).whnf(t)


def convertible(
    t: Term,
    u: Term,
    ctx=None,
    fuel: int | Fuel = DEFAULT_FUEL,
    modulo_beta: bool = False,
) -> bool:
    """Sound check for beta-Gamma conversion; raises ``FuelExhausted`` when
    undecided within the budget."""
    return Reducer(ctx, modulo_beta, fuel).convertible(t, u)


# ---------------------------------------------------------------------------
# rule shape predicates


def is_left_linear(r: RewriteRule) -> bool:
    seen: set[str] = set()
    for name, _ in var_occurrences(r.lhs):
        if name in seen:
            return False
        seen.add(name)
    return True


def is_left_algebraic(r: RewriteRule) -> bool:
    return is_algebraic(r.lhs)


# ---------------------------------------------------------------------------
# beta paths, used to replay lifting witnesses


def _head_redex(t: Term) -> Term | None:
    """Contract the redex at the head of the spine, if there is one."""
    head, args = spine(t)
    if isinstance(head, Lam) and args:
        return apply(instantiate(head.body, args[0]), args[1:])
    return None


def beta_path(s: Term, t: Term, fuel: int | Fuel = 10_000) -> list[Term] | None:
    """A sequence ``s = u0 ->beta u1 ->beta ... = t`` or ``None``.

    Searches componentwise first and contracts head redexes otherwise; every
    returned path is a genuine beta reduction sequence.
    """
    budget = as_fuel(fuel)

    def go(s: Term, t: Term) -> list[Term] | None:
        budget.spend()
        if s == t:
            return [s]
        if type(s) is type(t) and isinstance(s, (App, Lam, Pi)):
            ks, kt = children(s), children(t)
            p0 = go(ks[0], kt[0])
            p1 = go(ks[1], kt[1]) if p0 is not None else None
            if p0 is not None and p1 is not None:
                out = [rebuild(s, [u, ks[1]]) for u in p0]
                out += [rebuild(s, [kt[0], u]) for u in p1[1:]]
                return out
        contracted = _head_redex(s)
        if contracted is not None:
            rest = go(contracted, t)
            if rest is not None:
                return [s] + rest
        return None

    try:
        return go(s, t)
    except FuelExhausted:
        return None


def is_beta_step(s: Term, t: Term) -> bool:
    return any(step.term == t for step in beta_step(s))


def check_beta_path(path: Sequence[Term]) -> bool:
    return all(is_beta_step(a, b) for a, b in zip(path, path[1:]))
