"""Typing of terms, local contexts, global contexts and rewrite rules.

Type inference is bidirectional: ``infer`` synthesizes a type and ``check``
compares it with the expected one, so conversion is only needed at
application arguments and at the top.  Binders are opened with fresh
variables, so the local context never contains de Bruijn indices.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import graphlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .encoding import BETA, EncodingError, encode_rule, encode_rule_syntactic, is_lambda_pi_pattern
from .meta_hrs import HrsRule, Peak, critical_peaks, hrs_normalize
from .reduction import (
    DEFAULT_FUEL,
    Fuel,
    FuelExhausted,
    Reducer,
    RewriteRule,
    as_fuel,
    is_left_algebraic,
    is_left_linear,
)
from .term import (
    KIND,
    TYPE,
    App,
    BVar,
    Const,
    IdentKind,
    Lam,
    Pi,
    Sort,
    Term,
    Var,
    abstract,
    fresh_name,
    free_vars,
    instantiate,
    is_algebraic,
    spine,
)

# ---------------------------------------------------------------------------
# errors


class TypingError(Exception):
    kind = "TypingError"

    def __init__(self, message: str, expected=None, actual=None, location=None):
        super().__init__(message)
        self.message = message
        self.expected = expected
        self.actual = actual
        self.location = location

    def __str__(self) -> str:
        where = f"{self.location}: " if self.location else ""
        return f"{where}{self.kind}: {self.message}"


class Unbound(TypingError):
    kind = "Unbound"


class NotAProduct(TypingError):
    kind = "NotAProduct"


class SortError(TypingError):
    kind = "SortError"


class NotConvertible(TypingError):
    kind = "NotConvertible"


class DuplicateName(TypingError):
    kind = "DuplicateName"


class RuleRejected(TypingError):
    kind = "RuleRejected"

    def __init__(self, message: str, clause: str, **kw):
        super().__init__(message, **kw)
        self.clause = clause


class PcAssumed(TypingError):
    kind = "PcAssumed"


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class LocalContext:
    entries: tuple[tuple[str, Term], ...] = ()

    def extend(self, name: str, ty: Term) -> "LocalContext":
        return LocalContext(self.entries + ((name, ty),))

    def lookup(self, name: str) -> Term | None:
        for x, ty in reversed(self.entries):
            if x == name:
                return ty
        return None

    @property
    def names(self) -> list[str]:
        return [x for x, _ in self.entries]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def as_local(local) -> LocalContext:
    if local is None:
        return LocalContext()
    if isinstance(local, LocalContext):
        return local
    return LocalContext(tuple(local))


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    type: Term
    location: str | None = None


@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: Term
    location: str | None = None


@dataclass(frozen=True)
class RuleGroup:
    rules: tuple[RewriteRule, ...]
    location: str | None = None


Entry = ObjectDecl | TypeDecl | RuleGroup


class EvidenceKind(enum.Enum):
    ALGEBRAIC = "algebraic"  # algebraic left-hand side
    PATTERN = "pattern"  # lambda-Pi pattern left-hand side


@dataclass(frozen=True)
class AdmissionEvidence:
    kind: EvidenceKind
    delta: LocalContext
    type: Term


class PcVerdict(enum.Enum):
    MUELLER = "MuellerCriterion"
    JOINED = "PeaksJoinedModuloBeta"
    ASSUMED = "Assumed"


@dataclass(frozen=True)
class RuleFlags:
    name: str
    left_linear: bool
    left_algebraic: bool
    pattern: bool


@dataclass(frozen=True)
class PeakResult:
    peak: Peak
    joined: bool
    origin: str  # "syntactic" or "modulo"


@dataclass(frozen=True)
class PcReport:
    flags: tuple[RuleFlags, ...]
    peaks: tuple[PeakResult, ...]
    verdict: PcVerdict

    @property
    def unjoined(self) -> list[PeakResult]:
        return [p for p in self.peaks if not p.joined]


@dataclass(frozen=True, eq=False)
class GlobalContext:
    entries: tuple[Entry, ...] = ()
    consts: dict = field(default_factory=dict)  # name -> (type, IdentKind)
    rules: tuple[RewriteRule, ...] = ()
    evidence: dict = field(default_factory=dict)  # rule name -> AdmissionEvidence
    pc: PcReport | None = None
    warnings: tuple[str, ...] = ()
    strict_pc: bool = False
    fuel: int = DEFAULT_FUEL
    modulo_beta: bool = False

    def type_of(self, name: str) -> Term | None:
        entry = self.consts.get(name)
        return entry[0] if entry else None

    def kind_of(self, name: str) -> IdentKind | None:
        entry = self.consts.get(name)
        return entry[1] if entry else None

    def rule(self, name: str) -> RewriteRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def has_pattern_rules(self) -> bool:
        return any(e.kind is EvidenceKind.PATTERN for e in self.evidence.values())


# ---------------------------------------------------------------------------
# terms


class Checker:
    """One typing run: a shared reduction budget and conversion mode."""

    def __init__(self, gctx: GlobalContext, fuel: int | Fuel | None = None, modulo_beta: bool | None = None):
        self.gctx = gctx
        mode = gctx.modulo_beta if modulo_beta is None else modulo_beta
        self.reducer = Reducer(gctx, mode, as_fuel(gctx.fuel if fuel is None else fuel))

    def whnf(self, t: Term) -> Term:
        return self.reducer.whnf(t)

    def conv(self, a: Term, b: Term) -> bool:
        return self.reducer.convertible(a, b)

    def open(self, local: LocalContext, binder: str, ty: Term, body: Term) -> tuple[LocalContext, Var, Term]:
        v = Var(fresh_name(binder))
        return local.extend(v.name, ty), v, instantiate(body, v)

    def infer(self, local: LocalContext, t: Term) -> Term:
        match t:
            case Sort(name="Type"):
                return KIND
            case Sort():
                raise SortError("Kind has no type", actual=t)
            case Var(name=x):
                ty = local.lookup(x)
                if ty is None:
                    raise Unbound(f"unbound variable {x}", actual=t)
                return ty
            case BVar():
                raise ValueError("infer expects a locally closed term")
            case Const(name=c):
                ty = self.gctx.type_of(c)
                if ty is None:
                    raise Unbound(f"undeclared constant {c}", actual=t)
                return ty
            case App(fun=f, arg=a):
                ft = self.whnf(self.infer(local, f))
                if not isinstance(ft, Pi):
                    raise NotAProduct(f"{f} has type {ft}, which is not a product", actual=ft)
                self.check(local, a, ft.domain)
                return instantiate(ft.codomain, a)
            case Lam(binder=x, annot=a, body=b):
                self.check(local, a, TYPE)
                inner, v, body = self.open(local, x, a, b)
                bt = self.infer(inner, body)
                if bt == KIND:
                    raise SortError("the body of an abstraction cannot have type Kind", actual=bt)
                return Pi(x, a, abstract(bt, v.name))
            case Pi(binder=x, domain=a, codomain=b):
                self.check(local, a, TYPE)
                inner, _, cod = self.open(local, x, a, b)
                s = self.whnf(self.infer(inner, cod))
                if s not in (TYPE, KIND):
                    raise SortError(f"product codomain {cod} is neither a type nor a kind", actual=s)
                return s
        raise TypeError(f"not a term: {t!r}")

    def check(self, local: LocalContext, t: Term, expected: Term) -> None:
        actual = self.infer(local, t)
        if expected == KIND:
            if actual != KIND:
                raise SortError(f"{t} is not a kind", expected=KIND, actual=actual)
            return
        if not self.conv(actual, expected):
            raise NotConvertible(
                f"{t} has type {actual} but {expected} was expected", expected=expected, actual=actual
            )


def infer(gctx: GlobalContext, local, t: Term, fuel: int | Fuel | None = None, modulo_beta: bool | None = None) -> Term:
    return Checker(gctx, fuel, modulo_beta).infer(as_local(local), t)


def check(gctx: GlobalContext, local, t: Term, expected: Term, fuel=None, modulo_beta=None) -> None:
    Checker(gctx, fuel, modulo_beta).check(as_local(local), t, expected)


def check_local_context(gctx: GlobalContext, local, fuel=None) -> None:
    ch = Checker(gctx, fuel)
    prefix = LocalContext()
    for x, ty in as_local(local):
        if prefix.lookup(x) is not None:
            raise DuplicateName(f"{x} is declared twice in the local context")
        ch.check(prefix, ty, TYPE)
        prefix = prefix.extend(x, ty)


# ---------------------------------------------------------------------------
# rules


def _infer_delta(ch: Checker, lhs: Term) -> LocalContext:
    """Read the types of the rule variables off the left-hand side."""
    found: dict[str, Term] = {}

    def record(x: str, ty: Term) -> None:
        old = found.get(x)
        if old is None:
            found[x] = ty
        elif not ch.conv(old, ty):
            raise RuleRejected(f"{x} is used at types {old} and {ty}", "InconsistentTypes")

    def walk(local: LocalContext, s: Term, expected: Term | None) -> None:
        head, args = spine(s)
        if isinstance(head, Var) and local.lookup(head.name) is None:
            if expected is None:
                raise RuleRejected(f"cannot determine the type of {head.name}", "Underdetermined")
            ty = expected
            for y in reversed(args):
                yt = local.lookup(y.name) if isinstance(y, Var) else None
                if yt is None:
                    raise RuleRejected(f"{head.name} is applied to a non-variable", "NotAPattern")
                ty = Pi(y.name.split("%")[0], yt, abstract(ty, y.name))
            if free_vars(ty) & set(local.names):
                raise RuleRejected(f"the type of {head.name} depends on a bound variable it does not take", "Underdetermined")
            record(head.name, ty)
            return
        if isinstance(s, Lam):
            ch.check(local, s.annot, TYPE)
            inner, v, body = ch.open(local, s.binder, s.annot, s.body)
            cod = None
            if expected is not None:
                e = ch.whnf(expected)
                if not isinstance(e, Pi):
                    raise RuleRejected(f"abstraction where {e} was expected", "IllTyped")
                if not ch.conv(e.domain, s.annot):
                    raise RuleRejected(f"annotation {s.annot} does not match {e.domain}", "IllTyped")
                cod = instantiate(e.codomain, v)
            walk(inner, body, cod)
            return
        if isinstance(head, (Const, Var)):
            ft = ch.infer(local, head)
        else:
            raise RuleRejected(f"unexpected {s} in a left-hand side", "NotAPattern")
        for a in args:
            ft = ch.whnf(ft)
            if not isinstance(ft, Pi):
                raise RuleRejected(f"{head} is applied to too many arguments", "IllTyped")
            walk(local, a, ft.domain)
            ft = instantiate(ft.codomain, a)

    walk(LocalContext(), lhs, None)
    missing = free_vars(lhs) - set(found)
    if missing:
        raise RuleRejected(f"cannot determine the types of {sorted(missing)}", "Underdetermined")
    order = graphlib.TopologicalSorter({x: free_vars(ty) & set(found) for x, ty in found.items()})
    try:
        names = list(order.static_order())
    except graphlib.CycleError:
        raise RuleRejected("the variable types depend on each other cyclically", "Underdetermined") from None
    return LocalContext(tuple((x, found[x]) for x in names))


def check_rule(gctx: GlobalContext, r: RewriteRule, fuel: int | Fuel | None = None) -> AdmissionEvidence:
    escaped = free_vars(r.rhs) - free_vars(r.lhs)
    if escaped:
        raise RuleRejected(f"right-hand side variables {sorted(escaped)} do not occur on the left", "FreeVarEscape")
    if is_algebraic(r.lhs):
        kind = EvidenceKind.ALGEBRAIC
    elif is_lambda_pi_pattern(r.lhs) is not None:
        kind = EvidenceKind.PATTERN
    else:
        raise RuleRejected(f"{r.lhs} is neither algebraic nor a lambda-Pi pattern", "NotAPattern")
    ch = Checker(gctx, fuel)
    try:
        delta = _infer_delta(ch, r.lhs)
        check_local_context(gctx, delta, ch.reducer.fuel)
        ty = ch.infer(delta, r.lhs)
        ch.check(delta, r.rhs, ty)
    except RuleRejected:
        raise
    except TypingError as e:
        raise RuleRejected(str(e), "IllTyped") from None
    return AdmissionEvidence(kind, delta, ty)


# ---------------------------------------------------------------------------
# product compatibility


def _join_rules(rules: Sequence[RewriteRule]) -> tuple[HrsRule, ...]:
    out = [BETA]
    for r in rules:
        try:
            out.append(encode_rule(r).encoded)
        except EncodingError:
            out.append(encode_rule_syntactic(r))
    return tuple(out)


def _joined(peak: Peak, rules: Sequence[HrsRule], fuel: int) -> bool:
    if peak.trivial:
        return True
    try:
        return hrs_normalize(peak.left, rules, fuel) == hrs_normalize(peak.right, rules, fuel)
    except FuelExhausted:
        return False


def pc_report(gctx: GlobalContext, fuel: int = 1000) -> PcReport:
    """Flags, critical peaks and the strongest product-compatibility
    criterion that can be certified for the rules of ``gctx``."""
    return _pc_report(tuple(gctx.rules), fuel)


# the report only depends on the rules, which type declarations leave alone
@functools.lru_cache(maxsize=64)
def _pc_report(rules: tuple[RewriteRule, ...], fuel: int) -> PcReport:
    flags = tuple(
        RuleFlags(r.name or "", is_left_linear(r), is_left_algebraic(r), is_lambda_pi_pattern(r.lhs) is not None)
        for r in rules
    )
    join = _join_rules(rules)
    results: list[PeakResult] = []
    seen = set()
    syntactic = [BETA]
    modulo = [BETA]
    for r in rules:
        try:
            syntactic.append(encode_rule_syntactic(r))
        except EncodingError:
            pass
        try:
            modulo.append(encode_rule(r).encoded)
        except EncodingError:
            pass
    for origin, table in (("syntactic", syntactic), ("modulo", modulo)):
        for p in critical_peaks(table):
            key = (p.outer.name, p.inner.name, p.position, origin)
            if key in seen:
                continue
            seen.add(key)
            results.append(PeakResult(p, _joined(p, join, fuel), origin))
    nontrivial = [p for p in results if not p.peak.trivial]
    if all(f.left_linear and f.left_algebraic for f in flags) and not nontrivial:
        verdict = PcVerdict.MUELLER
    elif all(p.joined for p in results) and all(f.left_algebraic or f.pattern for f in flags):
        verdict = PcVerdict.JOINED
    else:
        verdict = PcVerdict.ASSUMED
    return PcReport(flags, tuple(results), verdict)


# ---------------------------------------------------------------------------
# global contexts


def _refresh_pc(gctx: GlobalContext) -> GlobalContext:
    report = pc_report(gctx)
    warnings: tuple[str, ...] = ()
    if report.verdict is PcVerdict.ASSUMED:
        msg = f"product compatibility assumed: {len(report.unjoined)} critical peak(s) not joined"
        if gctx.strict_pc:
            raise PcAssumed(msg)
        warnings = (msg,)
    return dataclasses.replace(gctx, pc=report, warnings=warnings)


def _declare(gctx: GlobalContext, name: str, ty: Term, kind: IdentKind, entry: Entry) -> GlobalContext:
    if name in gctx.consts:
        raise DuplicateName(f"{name} is already declared", location=entry.location)
    return dataclasses.replace(
        gctx, entries=gctx.entries + (entry,), consts={**gctx.consts, name: (ty, kind)}
    )


def name_rules(gctx: GlobalContext, rules: Iterable[RewriteRule]) -> tuple[RewriteRule, ...]:
    """Give unnamed rules names like ``Plus.2`` (head constant and ordinal)."""
    counts: dict[str, int] = {}
    for r in gctx.rules:
        h = _head_name(r)
        counts[h] = counts.get(h, 0) + 1
    out = []
    for r in rules:
        h = _head_name(r)
        counts[h] = counts.get(h, 0) + 1
        out.append(r if r.name else dataclasses.replace(r, name=f"{h}.{counts[h]}"))
    return tuple(out)


def _head_name(r: RewriteRule) -> str:
    head, _ = spine(r.lhs)
    return head.name if isinstance(head, Const) else "rule"


def process_entry(gctx: GlobalContext, entry: Entry) -> GlobalContext:
    match entry:
        case ObjectDecl(name=c, type=ty):
            try:
                check(gctx, None, ty, TYPE)
            except TypingError as e:
                e.location = e.location or entry.location
                raise
            # an object declaration cannot break product compatibility
            return _declare(gctx, c, ty, IdentKind.OBJECT_CONSTANT, entry)
        case TypeDecl(name=c, kind=k):
            try:
                check(gctx, None, k, KIND)
            except TypingError as e:
                e.location = e.location or entry.location
                raise
            return _refresh_pc(_declare(gctx, c, k, IdentKind.TYPE_CONSTANT, entry))
        case RuleGroup(rules=rules):
            rules = name_rules(gctx, rules)
            evidence = dict(gctx.evidence)
            for r in rules:
                if r.name in evidence:
                    raise DuplicateName(f"rule {r.name} already exists", location=entry.location)
                try:
                    evidence[r.name] = check_rule(gctx, r)
                except TypingError as e:
                    e.location = e.location or entry.location
                    raise
            new = dataclasses.replace(
                gctx,
                entries=gctx.entries + (RuleGroup(rules, entry.location),),
                rules=gctx.rules + rules,
                evidence=evidence,
            )
            return _refresh_pc(new)
    raise TypeError(f"not a context entry: {entry!r}")


def build_context(entries: Iterable[Entry], **options) -> GlobalContext:
    gctx = GlobalContext(**options)
    for e in entries:
        gctx = process_entry(gctx, e)
    return gctx
