"""Seeded random terms for property tests.

``random_term`` draws well-formed but untyped terms of any category.
``WellTypedGen`` draws terms that typecheck in a given global context, by
picking heads whose types end in the goal type; it also injects beta-redexes
so that reduction sequences have something to do.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .term import (
    KIND,
    TYPE,
    App,
    Category,
    Const,
    IdentKind,
    IllFormed,
    Lam,
    Pi,
    Term,
    Var,
    abstract,
    apply,
    instantiate,
    lam,
    pi,
)

OBJ = IdentKind.OBJECT_CONSTANT
TYP = IdentKind.TYPE_CONSTANT


@dataclass(frozen=True)
class GenConfig:
    max_depth: int = 4
    redex_rate: float = 0.2
    objects: tuple[str, ...] = ("c", "d", "f", "g")
    types: tuple[str, ...] = ("A", "B", "P")
    free: tuple[str, ...] = ("u", "v")
    binders: tuple[str, ...] = ("x", "y", "z")


class RandomTerms:
    """Well-formed terms of every category, typed or not."""

    def __init__(self, rng: random.Random, config: GenConfig = GenConfig()):
        self.rng = rng
        self.cfg = config

    def _leaf_object(self, scope: list[str]) -> Term:
        pool = [Var(x) for x in scope + list(self.cfg.free)] + [Const(c, OBJ) for c in self.cfg.objects]
        return self.rng.choice(pool)

    def object(self, depth: int, scope: list[str]) -> Term:
        r = self.rng.random()
        if depth <= 0 or r < 0.3:
            return self._leaf_object(scope)
        x = self.rng.choice(self.cfg.binders)
        if r < 0.3 + self.cfg.redex_rate:
            body = self.object(depth - 1, scope + [x])
            return App(lam(x, self.type(depth - 1, scope), body), self.object(depth - 1, scope))
        if r < 0.75:
            return App(self.object(depth - 1, scope), self.object(depth - 1, scope))
        return lam(x, self.type(depth - 1, scope), self.object(depth - 1, scope + [x]))

    def type(self, depth: int, scope: list[str]) -> Term:
        r = self.rng.random()
        if depth <= 0 or r < 0.35:
            return Const(self.rng.choice(self.cfg.types), TYP)
        x = self.rng.choice(self.cfg.binders)
        if r < 0.6:
            return App(self.type(depth - 1, scope), self.object(depth - 1, scope))
        if r < 0.85:
            return pi(x, self.type(depth - 1, scope), self.type(depth - 1, scope + [x]))
        return lam(x, self.type(depth - 1, scope), self.type(depth - 1, scope + [x]))

    def kind(self, depth: int, scope: list[str]) -> Term:
        if depth <= 0 or self.rng.random() < 0.4:
            return TYPE
        x = self.rng.choice(self.cfg.binders)
        return pi(x, self.type(depth - 1, scope), self.kind(depth - 1, scope + [x]))

    def term(self, depth: int | None = None) -> Term:
        depth = self.cfg.max_depth if depth is None else depth
        r = self.rng.random()
        if r < 0.02:
            return KIND
        if r < 0.6:
            return self.object(depth, [])
        if r < 0.85:
            return self.type(depth, [])
        return self.kind(depth, [])


def random_term(seed: int, config: GenConfig = GenConfig()) -> Term:
    return RandomTerms(random.Random(seed), config).term()


def random_object(seed: int, config: GenConfig = GenConfig()) -> Term:
    return RandomTerms(random.Random(seed), config).object(config.max_depth, [])


class NoTerm(Exception):
    """The depth budget ran out before an inhabitant was found."""


@dataclass
class WellTypedGen:
    """Terms of a requested type in a global context (non-dependent signatures).

    ``local`` lists extra variables the generator may use, such as one
    inhabitant per base type that has no closed one.
    """

    gctx: object
    rng: random.Random
    local: tuple[tuple[str, Term], ...] = ()
    max_depth: int = 4
    redex_rate: float = 0.15
    heads: list[tuple[Term, Term]] = field(init=False)

    def __post_init__(self):
        self.heads = [(Const(c, kind), ty) for c, (ty, kind) in self.gctx.consts.items() if kind is OBJ]
        self.heads += [(Var(x), ty) for x, ty in self.local]
        self.base_types = [Const(c, TYP) for c, (ty, kind) in self.gctx.consts.items() if kind is TYP and ty == TYPE]

    def _candidates(self, goal: Term, scope) -> list[tuple[Term, list[Term]]]:
        out = []
        for head, ty in self.heads + scope:
            doms = []
            while True:
                if ty == goal:
                    out.append((head, list(doms)))
                if not isinstance(ty, Pi) or ty.codomain.loose:
                    break
                doms.append(ty.domain)
                ty = ty.codomain
        return out

    def term(self, goal: Term, depth: int | None = None, scope=()) -> Term:
        depth = self.max_depth if depth is None else depth
        if depth < -4:
            raise NoTerm(str(goal))
        scope = list(scope)
        if isinstance(goal, Pi) and (depth <= 0 or self.rng.random() < 0.7):
            x = Var(f"x{len(scope)}")
            body = self.term(instantiate(goal.codomain, x), depth - 1, scope + [(x, goal.domain)])
            return Lam(x.name, goal.domain, abstract(body, x.name))
        if depth > 1 and self.base_types and self.rng.random() < self.redex_rate:
            a = self.rng.choice(self.base_types)
            try:
                arg = self.term(a, depth - 2, scope)
            except NoTerm:
                pass
            else:
                y = Var(f"x{len(scope)}")
                body = self.term(goal, depth - 1, scope + [(y, a)])
                return App(Lam(y.name, a, abstract(body, y.name)), arg)
        cands = self._candidates(goal, scope)
        if not cands:
            raise NoTerm(str(goal))
        if depth <= 0:
            fewest = min(len(d) for _, d in cands)
            cands = [c for c in cands if len(c[1]) == fewest]
        self.rng.shuffle(cands)
        for head, doms in cands:
            try:
                return apply(head, [self.term(d, depth - 1, scope) for d in doms])
            except NoTerm:
                continue
        raise NoTerm(str(goal))

    def goal(self) -> Term:
        """A random simple type built from the signature's base types."""
        base = self.rng.choice(self.base_types)
        if self.rng.random() < 0.25:
            return Pi("_", self.rng.choice(self.base_types), base)
        return base

    def sample(self) -> tuple[Term, Term]:
        """A (term, goal type) pair; retries until an inhabitant is found."""
        while True:
            g = self.goal()
            try:
                return self.term(g), g
            except NoTerm:
                continue


def well_typed(gctx, seed: int, local=(), max_depth: int = 4) -> tuple[Term, Term]:
    return WellTypedGen(gctx, random.Random(seed), tuple(local), max_depth).sample()


def strategies():
    """Hypothesis strategies over the seeded generators (imported lazily)."""
    from hypothesis import strategies as st

    seeds = st.integers(min_value=0, max_value=2**32 - 1)
    return {
        "term": seeds.map(random_term),
        "object": seeds.map(random_object),
        "seed": seeds,
    }


__all__ = [
    "GenConfig",
    "IllFormed",
    "NoTerm",
    "RandomTerms",
    "WellTypedGen",
    "random_object",
    "random_term",
    "strategies",
    "well_typed",
    "Category",
]
