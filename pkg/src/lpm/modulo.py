"""Rewriting modulo beta through the higher-order encoding.

A step embeds the term, rewrites once in the encoded rule set and maps the
reduct back.  ``lift_witness`` turns such a step into a plain one: it
beta-expands the source so that the rule matches syntactically, and the
result is replayed with the first-order reduction functions only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .encoding import (
    NotInImage,
    embed,
    encode_rule,
    hrs_of_rules,
    unembed,
)
from .meta_hrs import HrsRule, HrsStep, MetaLam, apply_subst, iter_hrs_steps, match_pattern, show
from .reduction import (
    DEFAULT_FUEL,
    Fuel,
    RewriteRule,
    StepTrace,
    _mentions_bound,
    beta_path,
    beta_step,
    convertible,
    gamma_step,
    rules_of,
)
from .term import (
    App,
    Const,
    IdentKind,
    Lam,
    Path,
    Pi,
    Term,
    Var,
    children,
    close_at,
    open_at,
    shift,
    spine,
    substitute_many,
    subterm,
)

# stands in for a binder annotation that cannot be read off the source
PLACEHOLDER = Const("_A", IdentKind.TYPE_CONSTANT)


class WitnessError(RuntimeError):
    pass


class AnnotationFailure(WitnessError):
    pass


@dataclass(frozen=True)
class ModuloStep:
    source: Term
    target: Term
    rule: str
    position: Path
    meta_subst: dict = field(compare=False, default_factory=dict)

    def trace(self) -> StepTrace:
        sub = tuple(sorted((k, show(v)) for k, v in self.meta_subst.items()))
        return StepTrace(self.rule, self.position, sub)


def hrs_path_to_term_path(t: Term, hpath: Sequence[int]) -> Path:
    """Translate a position in ``embed(t)`` to the position in ``t``.

    In ``#App a b`` the arguments sit at ``0.1`` and ``1``; in ``#Lam A (\\x. b)``
    they sit at ``0.1`` and ``1.0``.
    """
    out = []
    hp = tuple(hpath)
    while hp:
        if hp[:2] == (0, 1):
            out.append(0)
            hp = hp[2:]
        elif isinstance(t, App) and hp[:1] == (1,):
            out.append(1)
            hp = hp[1:]
        elif isinstance(t, (Lam, Pi)) and hp[:2] == (1, 0):
            out.append(1)
            hp = hp[2:]
        else:
            raise ValueError(f"position {hpath} is not a term position")
        t = children(t)[out[-1]]
    return tuple(out)


def _rule_table(rules: Sequence[RewriteRule]) -> tuple[HrsRule, ...]:
    return hrs_of_rules(tuple(rules), True)


def _to_modulo(t: Term, s: HrsStep) -> ModuloStep:
    try:
        target = unembed(s.term)
    except NotInImage as e:  # the encoding is closed under rewriting
        raise AssertionError(f"rewriting left the image of the encoding: {e}") from None
    return ModuloStep(t, target, s.rule.name, hrs_path_to_term_path(t, s.path), s.subst)


def iter_modulo_steps(t: Term, rules) -> Iterator[ModuloStep]:
    """Beta steps and rule steps modulo beta, leftmost-outermost."""
    for s in iter_hrs_steps(embed(t), _rule_table(rules_of(rules))):
        yield _to_modulo(t, s)


def _dedup(steps: Iterator[ModuloStep]) -> list[ModuloStep]:
    seen = set()
    out = []
    for s in steps:
        key = (s.target, s.rule, s.position)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def step_modulo_beta(t: Term, ctx) -> list[ModuloStep]:
    rules = hrs_of_rules(rules_of(ctx), False)
    return _dedup(_to_modulo(t, s) for s in iter_hrs_steps(embed(t), rules))


def step_beta_gamma_modulo(t: Term, ctx) -> list[ModuloStep]:
    betas = [ModuloStep(t, s.term, "beta", s.trace.position) for s in beta_step(t)]
    steps = _dedup(iter(betas + step_modulo_beta(t, ctx)))
    return sorted(steps, key=lambda s: (s.position, s.rule != "beta"))


def root_contract(t: Term, rules) -> Term | None:
    """Contract ``t`` at the root with a rule modulo beta, if one matches."""
    p = embed(t)
    for r in hrs_of_rules(rules_of(rules), False):
        sigma = match_pattern(r.lhs, p, r.flex)
        if sigma is not None:
            return unembed(apply_subst(r.rhs, sigma))
    return None


def congruence_agrees(t: Term, u: Term, ctx, fuel: int | Fuel = DEFAULT_FUEL) -> bool:
    """Conversion decided with rewriting modulo beta."""
    return convertible(t, u, ctx, fuel, modulo_beta=True)


# ---------------------------------------------------------------------------
# lifting


@dataclass(frozen=True)
class LiftWitness:
    source: Term
    t1_expanded: Term
    t2_expanded: Term
    target: Term
    rule: str
    position: Path
    lifted_subst: dict = field(compare=False)
    chosen_annotations: dict = field(compare=False)
    expansion: list = field(compare=False)  # t1_expanded ->beta* source
    contraction: list = field(compare=False)  # t2_expanded ->beta* target

    @property
    def expansions(self) -> int:
        return len(self.expansion) - 1


def _occurrence_binders(lhs: Term) -> dict[str, list[Path]]:
    """For each free variable ``x y1 .. yn`` of a pattern, the paths of the
    abstractions binding the ``yi``."""
    out: dict[str, list[Path]] = {}

    def walk(s: Term, path: Path, stack: list[Path]) -> None:
        head, args = spine(s)
        if isinstance(head, Var):
            out.setdefault(head.name, [stack[-1 - a.index] for a in args])
            return
        for i, k in enumerate(children(s)):
            inner = stack + [path] if isinstance(s, (Lam, Pi)) and i == 1 else stack
            walk(k, path + (i,), inner)

    walk(lhs, (), [])
    return out


def _annotation(sub: Term, binder: Path) -> Term:
    depth = sum(1 for j in range(len(binder)) if isinstance(subterm(sub, binder[:j]), (Lam, Pi)) and binder[j] == 1)
    a = subterm(sub, binder).annot
    if _mentions_bound(a, 0, depth):
        return PLACEHOLDER
    return shift(a, -depth)


def find_rule(ctx, name: str) -> RewriteRule:
    for r in rules_of(ctx):
        if r.label == name:
            return r
    raise KeyError(name)


def lift_witness(step: ModuloStep, ctx, typing_ctx=None) -> LiftWitness:
    """A beta-expansion of the source on which the rule fires syntactically.

    ``typing_ctx`` is a pair (global context, local context); when given,
    the expanded term is required to typecheck there.
    """
    if step.rule == "beta":
        raise WitnessError("a beta step has nothing to lift")
    rule = find_rule(ctx, step.rule)
    enc = encode_rule(rule)
    sub, names = open_at(step.source, step.position)
    sigma = match_pattern(enc.encoded.lhs, embed(sub))
    if sigma is None:
        raise WitnessError(f"rule {step.rule} does not match at {step.position}")
    binders = _occurrence_binders(rule.lhs)
    lifted: dict[str, Term] = {}
    annotations: dict[str, tuple[Term, ...]] = {}
    for x, image in sigma.items():
        paths = binders.get(x, [])
        anns = tuple(_annotation(sub, p) for p in paths)
        hints = []
        body = image
        for _ in paths:
            assert isinstance(body, MetaLam)
            hints.append(body.hint)
            body = body.body
        out = unembed(body)
        for hint, a in reversed(list(zip(hints, anns))):
            out = Lam(hint, a, out)
        lifted[x] = out
        annotations[x] = anns
    t1 = close_at(step.source, step.position, substitute_many(rule.lhs, lifted), names)
    t2 = close_at(step.source, step.position, substitute_many(rule.rhs, lifted), names)
    expansion = beta_path(t1, step.source)
    contraction = beta_path(t2, step.target)
    if expansion is None or contraction is None:
        raise WitnessError("the witness does not replay with beta steps")
    if not any(s.term == t2 for s in gamma_step(t1, [rule])):
        raise WitnessError("the expanded term does not rewrite syntactically")
    if typing_ctx is not None:
        from .typecheck import TypingError, infer

        gctx, local = typing_ctx
        try:
            infer(gctx, local, t1)
        except TypingError as e:
            raise AnnotationFailure(f"expanded source does not typecheck: {e}") from None
    return LiftWitness(
        step.source, t1, t2, step.target, step.rule, step.position, lifted, annotations, expansion, contraction
    )


def replay(w: LiftWitness, ctx) -> bool:
    """Check a witness with first-order reduction only."""
    from .reduction import check_beta_path

    rule = find_rule(ctx, w.rule)
    return (
        w.expansion[0] == w.t1_expanded
        and w.expansion[-1] == w.source
        and check_beta_path(w.expansion)
        and any(s.term == w.t2_expanded for s in gamma_step(w.t1_expanded, [rule]))
        and w.contraction[0] == w.t2_expanded
        and w.contraction[-1] == w.target
        and check_beta_path(w.contraction)
    )
