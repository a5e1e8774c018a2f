"""A small higher-order rewriting system over simply typed preterms.

Preterms are locally nameless like lambda-Pi terms.  Free names (``MetaVar``)
play three roles: the metavariables of rules, the images of free lambda-Pi
variables, and the atoms that stand for opened binders during matching,
unification and traversal.  Callers keep these roles apart by name, and the
fresh names made here contain ``%`` so they cannot clash with parsed names.

Rewriting is on eta-long beta-normal forms, and left-hand sides are
higher-order (Miller) patterns so matching and unification are decidable
with most general solutions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

# ---------------------------------------------------------------------------
# simple types


@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self) -> str:
        d = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{d} -> {self.cod}"


SimpleType = Base | Arrow


def arrows(doms: Sequence[SimpleType], cod: SimpleType) -> SimpleType:
    for d in reversed(doms):
        cod = Arrow(d, cod)
    return cod


def power(a: SimpleType, n: int) -> SimpleType:
    """``a`` to the ``n``: ``a^1 = a`` and ``a^(n+1) = a -> a^n``."""
    if n < 1:
        raise ValueError("exponent must be positive")
    return arrows([a] * (n - 1), a)


def domains(ty: SimpleType) -> tuple[list[SimpleType], Base]:
    doms = []
    while isinstance(ty, Arrow):
        doms.append(ty.dom)
        ty = ty.cod
    return doms, ty


class HrsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# preterms

_cached = dict(init=False, compare=False, repr=False)


class Preterm:
    type: SimpleType
    loose: int

    def __str__(self) -> str:
        return show(self)


def _finish(node, ty, loose, h):
    object.__setattr__(node, "type", ty)
    object.__setattr__(node, "loose", loose)
    object.__setattr__(node, "_hash", h)


@dataclass(frozen=True)
class MetaVar(Preterm):
    name: str
    type: SimpleType
    loose: int = field(default=0, **_cached)

    def __hash__(self):
        return hash(("MV", self.name))


@dataclass(frozen=True)
class Con(Preterm):
    name: str
    type: SimpleType
    tag: str = field(default="builtin", compare=False)
    loose: int = field(default=0, **_cached)

    def __hash__(self):
        return hash(("C", self.name))


@dataclass(frozen=True)
class Bound(Preterm):
    index: int
    type: SimpleType
    loose: int = field(**_cached)

    def __post_init__(self):
        if self.index < 0:
            raise HrsError("negative bound index")
        object.__setattr__(self, "loose", self.index + 1)

    def __hash__(self):
        return hash(("B", self.index))


@dataclass(frozen=True)
class MetaApp(Preterm):
    fun: Preterm
    arg: Preterm
    type: SimpleType = field(**_cached)
    loose: int = field(**_cached)
    _hash: int = field(**_cached)

    def __post_init__(self):
        ft = self.fun.type
        if not isinstance(ft, Arrow) or ft.dom != self.arg.type:
            raise HrsError(f"cannot apply a term of type {ft} to an argument of type {self.arg.type}")
        _finish(self, ft.cod, max(self.fun.loose, self.arg.loose), hash(("A", self.fun, self.arg)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class MetaLam(Preterm):
    hint: str = field(compare=False)
    binder_type: SimpleType
    body: Preterm
    type: SimpleType = field(**_cached)
    loose: int = field(**_cached)
    _hash: int = field(**_cached)

    def __post_init__(self):
        _finish(
            self,
            Arrow(self.binder_type, self.body.type),
            max(self.body.loose - 1, 0),
            hash(("L", self.binder_type, self.body)),
        )

    def __hash__(self):
        return self._hash


_counter = itertools.count()


def fresh(hint: str = "z") -> str:
    return f"{hint.split('%')[0]}%{next(_counter)}"


def atom(ty: SimpleType, hint: str = "z") -> MetaVar:
    return MetaVar(fresh(hint), ty)


def mapp(head: Preterm, args: Sequence[Preterm]) -> Preterm:
    for a in args:
        head = MetaApp(head, a)
    return head


def mspine(t: Preterm) -> tuple[Preterm, list[Preterm]]:
    args = []
    while isinstance(t, MetaApp):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def _rigid_key(t: Preterm):
    head, args = mspine(t)
    return (head.name, len(args)) if isinstance(head, Con) else None


def mchildren(t: Preterm) -> tuple[Preterm, ...]:
    if isinstance(t, MetaApp):
        return (t.fun, t.arg)
    if isinstance(t, MetaLam):
        return (t.body,)
    return ()


def _rebuild(t: Preterm, kids: Sequence[Preterm]) -> Preterm:
    if isinstance(t, MetaApp):
        if kids[0] is t.fun and kids[1] is t.arg:
            return t
        return MetaApp(kids[0], kids[1])
    if isinstance(t, MetaLam):
        return t if kids[0] is t.body else MetaLam(t.hint, t.binder_type, kids[0])
    return t


def _map_bound(t: Preterm, f, depth: int = 0) -> Preterm:
    if t.loose <= depth:
        return t
    if isinstance(t, Bound):
        return f(t, depth)
    d = depth + (1 if isinstance(t, MetaLam) else 0)
    return _rebuild(t, [_map_bound(k, f, d) for k in mchildren(t)])


def mshift(t: Preterm, d: int, cutoff: int = 0) -> Preterm:
    if d == 0:
        return t

    def go(b: Bound, depth: int) -> Preterm:
        return b if b.index < depth + cutoff else Bound(b.index + d, b.type)

    return _map_bound(t, go)


def minstantiate(body: Preterm, v: Preterm) -> Preterm:
    def go(b: Bound, depth: int) -> Preterm:
        if b.index < depth:
            return b
        if b.index == depth:
            if b.type != v.type:
                raise HrsError("ill-typed instantiation")
            return mshift(v, depth)
        return Bound(b.index - 1, b.type)

    return _map_bound(body, go)


def mabstract(t: Preterm, name: str) -> Preterm:
    """Free ``MetaVar(name)`` becomes index 0 under a new binder."""

    def go(s: Preterm, depth: int) -> Preterm:
        if isinstance(s, MetaVar):
            return Bound(depth, s.type) if s.name == name else s
        if isinstance(s, Bound):
            return Bound(s.index + 1, s.type) if s.index >= depth else s
        if isinstance(s, Con):
            return s
        d = depth + (1 if isinstance(s, MetaLam) else 0)
        return _rebuild(s, [go(k, d) for k in mchildren(s)])

    return go(t, 0)


def mlam(x: MetaVar, body: Preterm, hint: str | None = None) -> MetaLam:
    return MetaLam(hint or x.name.split("%")[0], x.type, mabstract(body, x.name))


def mlams(xs: Sequence[MetaVar], body: Preterm) -> Preterm:
    for x in reversed(xs):
        body = mlam(x, body)
    return body


def has_bound(t: Preterm, i: int, depth: int = 0) -> bool:
    """Does ``t`` mention index ``i`` (counted from outside ``t``)?"""
    if t.loose <= i + depth:
        return False
    if isinstance(t, Bound):
        return t.index == i + depth
    d = depth + (1 if isinstance(t, MetaLam) else 0)
    return any(has_bound(k, i, d) for k in mchildren(t))


def free_metavars(t: Preterm) -> dict[str, SimpleType]:
    out: dict[str, SimpleType] = {}
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, MetaVar):
            out[s.name] = s.type
        else:
            stack.extend(mchildren(s))
    return out


# ---------------------------------------------------------------------------
# normal forms


def beta_normal(t: Preterm) -> Preterm:
    if isinstance(t, MetaLam):
        return _rebuild(t, [beta_normal(t.body)])
    head, args = mspine(t)
    if isinstance(head, MetaLam) and args:
        return beta_normal(mapp(minstantiate(head.body, args[0]), args[1:]))
    if not args:
        return t
    return mapp(head, [beta_normal(a) for a in args])


def _expand(u: Preterm) -> Preterm:
    """Eta-expand a neutral term whose arguments are already long."""
    if not isinstance(u.type, Arrow):
        return u
    a = u.type.dom
    return MetaLam("x", a, _expand(MetaApp(mshift(u, 1), _expand(Bound(0, a)))))


def eta_long(t: Preterm) -> Preterm:
    """Eta-long form of a beta-normal term."""
    if isinstance(t, MetaLam):
        return _rebuild(t, [eta_long(t.body)])
    head, args = mspine(t)
    if isinstance(head, MetaLam):
        raise HrsError("eta_long expects a beta-normal term")
    return _expand(mapp(head, [eta_long(a) for a in args]))


def long_nf(t: Preterm) -> Preterm:
    return eta_long(beta_normal(t))


def is_long_nf(t: Preterm) -> bool:
    return long_nf(t) == t


def eta_reduce(t: Preterm) -> Preterm:
    if isinstance(t, MetaLam):
        b = eta_reduce(t.body)
        if isinstance(b, MetaApp) and b.arg == Bound(0, t.binder_type) and not has_bound(b.fun, 0):
            return mshift(b.fun, -1)
        return _rebuild(t, [b])
    if isinstance(t, MetaApp):
        return _rebuild(t, [eta_reduce(t.fun), eta_reduce(t.arg)])
    return t


def subst(t: Preterm, sigma: Mapping[str, Preterm]) -> Preterm:
    """Replace free metavariables; images must be locally closed."""
    if not sigma:
        return t

    def go(s: Preterm, depth: int) -> Preterm:
        if isinstance(s, MetaVar):
            v = sigma.get(s.name)
            if v is None:
                return s
            if v.type != s.type:
                raise HrsError(f"substitution for {s.name} changes its type")
            return mshift(v, depth)
        if isinstance(s, (Con, Bound)):
            return s
        d = depth + (1 if isinstance(s, MetaLam) else 0)
        return _rebuild(s, [go(k, d) for k in mchildren(s)])

    return go(t, 0)


def apply_subst(t: Preterm, sigma: Mapping[str, Preterm]) -> Preterm:
    return long_nf(subst(t, sigma))


# ---------------------------------------------------------------------------
# patterns and matching


def _atom_of(u: Preterm) -> MetaVar | None:
    u = eta_reduce(u)
    return u if isinstance(u, MetaVar) else None


def is_pattern(t: Preterm, flex: frozenset[str] | None = None) -> bool:
    """Every flexible occurrence ``F u1 .. un`` has the ``ui`` eta-equal to
    distinct bound variables."""
    flex = frozenset(free_metavars(t)) if flex is None else flex

    def ok(s: Preterm, local: frozenset[str]) -> bool:
        if isinstance(s, MetaLam):
            a = atom(s.binder_type)
            return ok(minstantiate(s.body, a), local | {a.name})
        head, args = mspine(s)
        if isinstance(head, MetaLam):
            return False
        if isinstance(head, MetaVar) and head.name in flex:
            xs = [_atom_of(a) for a in args]
            if any(x is None or x.name not in local for x in xs):
                return False
            return len({x.name for x in xs}) == len(xs)
        return all(ok(a, local) for a in args)

    return ok(t, frozenset())


def _bind_flex(args: Sequence[Preterm], t: Preterm, local: frozenset[str]) -> Preterm | None:
    """``lambda xs. t`` where the ``args`` eta-reduce to the atoms ``xs``;
    ``None`` if ``t`` uses a local atom outside ``xs``."""
    xs = [_atom_of(a) for a in args]
    names = {x.name for x in xs}
    if any(n in local and n not in names for n in free_metavars(t)):
        return None
    return mlams(xs, t)


def match_pattern(p: Preterm, t: Preterm, flex: frozenset[str] | None = None) -> dict[str, Preterm] | None:
    """The substitution ``s`` with ``long_nf(p s) == t``, or ``None``.

    ``p`` is a pattern in long normal form, ``t`` is in long normal form,
    and both are locally closed.  Solutions are unique on ``FV(p)``.
    """
    if p.type != t.type:
        return None
    flex = frozenset(free_metavars(p)) if flex is None else flex
    sigma: dict[str, Preterm] = {}

    def m(p: Preterm, t: Preterm, local: frozenset[str]) -> bool:
        if isinstance(p, MetaLam):
            if not isinstance(t, MetaLam):
                return False
            a = atom(p.binder_type, p.hint)
            return m(minstantiate(p.body, a), minstantiate(t.body, a), local | {a.name})
        head, args = mspine(p)
        if isinstance(head, MetaVar) and head.name in flex:
            image = _bind_flex(args, t, local)
            if image is None:
                return False
            old = sigma.get(head.name)
            if old is None:
                sigma[head.name] = image
                return True
            return old == image
        th, targs = mspine(t)
        if th != head or len(args) != len(targs):
            return False
        return all(m(a, b, local) for a, b in zip(args, targs))

    return sigma if m(p, t, frozenset()) else None


# ---------------------------------------------------------------------------
# rules and rewriting


@dataclass(frozen=True)
class HrsRule:
    lhs: Preterm
    rhs: Preterm
    name: str = "rule"
    flex: frozenset = field(init=False, compare=False, repr=False)
    key: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        lhs, rhs = long_nf(self.lhs), long_nf(self.rhs)
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)
        if lhs.loose or rhs.loose:
            raise HrsError("rule sides must be locally closed")
        if not isinstance(lhs.type, Base) or lhs.type != rhs.type:
            raise HrsError("rule sides must have the same base type")
        head, _ = mspine(lhs)
        if isinstance(head, MetaVar):
            raise HrsError("a left-hand side cannot be a metavariable application")
        if not is_pattern(lhs):
            raise HrsError(f"left-hand side is not a pattern: {show(lhs)}")
        lv = free_metavars(lhs)
        for x, ty in free_metavars(rhs).items():
            if lv.get(x) != ty:
                raise HrsError(f"metavariable {x} of the right-hand side is not bound by the left")
        object.__setattr__(self, "flex", frozenset(lv))
        object.__setattr__(self, "key", _rigid_key(lhs))

    def __str__(self) -> str:
        return f"{show(self.lhs)} -> {show(self.rhs)}"


@dataclass(frozen=True)
class HrsStep:
    term: Preterm
    rule: HrsRule
    subst: dict = field(compare=False)
    path: tuple[int, ...]


def _walk(t: Preterm, rules: Sequence[HrsRule], path: tuple[int, ...]) -> Iterator[HrsStep]:
    if isinstance(t.type, Base):
        key = _rigid_key(t)
        for r in rules:
            if r.key != key:
                continue
            sigma = match_pattern(r.lhs, t, r.flex)
            if sigma is not None:
                yield HrsStep(apply_subst(r.rhs, sigma), r, sigma, path)
    if isinstance(t, MetaLam):
        a = atom(t.binder_type, t.hint)
        for s in _walk(minstantiate(t.body, a), rules, path + (0,)):
            yield HrsStep(MetaLam(t.hint, t.binder_type, mabstract(s.term, a.name)), s.rule, s.subst, s.path)
    elif isinstance(t, MetaApp):
        for s in _walk(t.fun, rules, path + (0,)):
            yield HrsStep(MetaApp(s.term, t.arg), s.rule, s.subst, s.path)
        for s in _walk(t.arg, rules, path + (1,)):
            yield HrsStep(MetaApp(t.fun, s.term), s.rule, s.subst, s.path)


def iter_hrs_steps(t: Preterm, rules: Sequence[HrsRule]) -> Iterator[HrsStep]:
    """One-step reducts of a long normal term, leftmost-outermost first."""
    return _walk(t, rules, ())


def hrs_step(t: Preterm, rules: Sequence[HrsRule]) -> list[HrsStep]:
    return list(iter_hrs_steps(t, rules))


def hrs_normalize(t: Preterm, rules: Sequence[HrsRule], fuel=10_000) -> Preterm:
    from .reduction import as_fuel

    budget = as_fuel(fuel)
    t = long_nf(t)
    while True:
        s = next(iter_hrs_steps(t, rules), None)
        if s is None:
            return t
        budget.spend()
        t = s.term


# ---------------------------------------------------------------------------
# unification of patterns


class _Clash(Exception):
    pass


def _compose(sigma: dict[str, Preterm], name: str, value: Preterm) -> None:
    one = {name: value}
    for k in list(sigma):
        sigma[k] = apply_subst(sigma[k], one)
    sigma[name] = value


def _prune(t: Preterm, allowed: frozenset[str], opened: frozenset[str], fixed: frozenset[str], sigma: dict) -> bool:
    """Restrict flexible subterms of ``t`` to ``allowed`` atoms.  Returns True
    once it has extended ``sigma`` (the caller then retries); raises
    ``_Clash`` on a rigid occurrence of a forbidden atom."""
    if isinstance(t, MetaLam):
        a = atom(t.binder_type)
        return _prune(minstantiate(t.body, a), allowed | {a.name}, opened | {a.name}, fixed | {a.name}, sigma)
    head, args = mspine(t)
    if isinstance(head, MetaVar) and head.name not in fixed:
        xs = [_atom_of(a) for a in args]
        keep = [i for i, x in enumerate(xs) if x.name in allowed]
        if len(keep) == len(xs):
            return False
        ys = [atom(x.type) for x in xs]
        _, base = domains(head.type)
        h = MetaVar(fresh("H"), arrows([ys[i].type for i in keep], base))
        _compose(sigma, head.name, long_nf(mlams(ys, mapp(h, [ys[i] for i in keep]))))
        return True
    if isinstance(head, MetaVar) and head.name in opened and head.name not in allowed:
        raise _Clash
    return any(_prune(a, allowed, opened, fixed, sigma) for a in args)


def pattern_unify(s: Preterm, t: Preterm, rigid: frozenset[str] = frozenset()) -> dict[str, Preterm] | None:
    """A most general unifier of two patterns, or ``None``.

    Every free metavariable outside ``rigid`` is a unification variable.
    """
    if s.type != t.type:
        return None
    sigma: dict[str, Preterm] = {}
    eqs: list[tuple[Preterm, Preterm, frozenset[str]]] = [(long_nf(s), long_nf(t), frozenset())]
    try:
        while eqs:
            a, b, opened = eqs.pop()
            a, b = apply_subst(a, sigma), apply_subst(b, sigma)
            if a == b:
                continue
            if isinstance(a, MetaLam):
                x = atom(a.binder_type, a.hint)
                eqs.append((minstantiate(a.body, x), minstantiate(b.body, x), opened | {x.name}))
                continue
            fixed = opened | rigid
            ha, xa = mspine(a)
            hb, xb = mspine(b)
            fa = isinstance(ha, MetaVar) and ha.name not in fixed
            fb = isinstance(hb, MetaVar) and hb.name not in fixed
            if fa and fb:
                _flex_flex(ha, xa, hb, xb, sigma)
            elif fa or fb:
                f, xs, other = (ha, xa, b) if fa else (hb, xb, a)
                if f.name in free_metavars(other):
                    return None
                allowed = frozenset(x.name for x in map(_atom_of, xs))
                if _prune(other, allowed, opened, fixed, sigma):
                    eqs.append((a, b, opened))
                    continue
                image = _bind_flex(xs, other, opened)
                if image is None:
                    return None
                _compose(sigma, f.name, image)
            else:
                if ha != hb or len(xa) != len(xb):
                    return None
                eqs.extend((u, v, opened) for u, v in zip(xa, xb))
    except _Clash:
        return None
    return sigma


def _flex_flex(f: MetaVar, xs: list, g: MetaVar, ys: list, sigma: dict) -> None:
    xa = [_atom_of(x) for x in xs]
    ya = [_atom_of(y) for y in ys]
    _, base = domains(f.type)
    if f.name == g.name:
        keep = [i for i in range(len(xa)) if xa[i] == ya[i]]
        zs = [atom(x.type) for x in xa]
        h = MetaVar(fresh("H"), arrows([zs[i].type for i in keep], base))
        _compose(sigma, f.name, long_nf(mlams(zs, mapp(h, [zs[i] for i in keep]))))
        return
    common = [x for x in xa if x in ya]
    h = MetaVar(fresh("H"), arrows([x.type for x in common], base))
    zs = [atom(x.type) for x in xa]
    ws = [atom(y.type) for y in ya]
    _compose(sigma, f.name, long_nf(mlams(zs, mapp(h, [zs[xa.index(c)] for c in common]))))
    _compose(sigma, g.name, long_nf(mlams(ws, mapp(h, [ws[ya.index(c)] for c in common]))))


# ---------------------------------------------------------------------------
# critical peaks


@dataclass(frozen=True)
class Peak:
    source: Preterm
    left: Preterm  # reduct by the outer rule
    right: Preterm  # reduct by the inner rule
    outer: HrsRule
    inner: HrsRule
    position: tuple[int, ...]
    subst: dict = field(compare=False, default_factory=dict)

    @property
    def trivial(self) -> bool:
        return self.left == self.right


def _overlap_positions(t: Preterm, flex: frozenset[str], atoms: tuple[MetaVar, ...], path):
    """Rigid base-type positions of a left-hand side, with the atoms of the
    binders above them (outermost first) and the opened subterm."""
    if isinstance(t, MetaLam):
        a = atom(t.binder_type, t.hint)
        yield from _overlap_positions(minstantiate(t.body, a), flex, atoms + (a,), path + (0,))
        return
    head, args = mspine(t)
    if isinstance(head, MetaVar) and head.name in flex:
        return
    yield path, atoms, t
    # walk the argument positions of the spine
    n = len(args)
    for i, a in enumerate(args):
        apath = path + (0,) * (n - 1 - i) + (1,)
        yield from _overlap_positions(a, flex, atoms, apath)


def _replace(t: Preterm, path, new: Preterm, atoms: Sequence[MetaVar]) -> Preterm:
    """Put ``new`` (written over the opened ``atoms``) at ``path``."""
    names = iter(atoms)

    def go(s: Preterm, p, depth_atoms: list[MetaVar]) -> Preterm:
        if not p:
            out = new
            for x in reversed(depth_atoms):
                out = mabstract(out, x.name)
            return out
        if isinstance(s, MetaLam):
            return MetaLam(s.hint, s.binder_type, go(s.body, p[1:], depth_atoms + [next(names)]))
        kids = list(mchildren(s))
        kids[p[0]] = go(kids[p[0]], p[1:], depth_atoms)
        return _rebuild(s, kids)

    return go(t, path, [])


@lru_cache(maxsize=4096)
def _pair_peaks(outer: HrsRule, inner: HrsRule) -> tuple[Peak, ...]:
    out = []
    key = _rigid_key(inner.lhs)
    flex = frozenset(free_metavars(outer.lhs))
    for path, atoms, sub in _overlap_positions(outer.lhs, flex, (), ()):
        if (not path and inner is outer) or _rigid_key(sub) != key:
            continue
        # rename the inner rule apart and lift it over the binders above
        lift = {
            g: mapp(MetaVar(fresh(g), arrows([a.type for a in atoms], ty)), list(atoms))
            for g, ty in free_metavars(inner.lhs).items()
        }
        l2 = apply_subst(inner.lhs, lift)
        r2 = apply_subst(inner.rhs, lift)
        sigma = pattern_unify(mlams(list(atoms), sub), mlams(list(atoms), l2))
        if sigma is None:
            continue
        source = apply_subst(outer.lhs, sigma)
        left = apply_subst(outer.rhs, sigma)
        right = apply_subst(_replace(outer.lhs, path, r2, atoms), sigma)
        out.append(Peak(source, left, right, outer, inner, path, sigma))
    return tuple(out)


def critical_peaks(rules: Sequence[HrsRule]) -> list[Peak]:
    """Overlaps of an inner rule at a rigid position of an outer left-hand
    side, with the most general unifier of each overlap."""
    return [p for outer in rules for inner in rules for p in _pair_peaks(outer, inner)]


# ---------------------------------------------------------------------------
# printing


def show(t: Preterm) -> str:
    """Debug notation: ``\\x. t`` for abstraction and ``f(a, b)`` for application."""
    used: set[str] = set(free_metavars(t))

    def go(s: Preterm, names: list[str]) -> str:
        if isinstance(s, (MetaVar, Con)):
            return s.name
        if isinstance(s, Bound):
            return names[-1 - s.index] if s.index < len(names) else f"#{s.index}"
        if isinstance(s, MetaLam):
            base = s.hint.split("%")[0] or "x"
            n, k = base, 0
            while n in used or n in names:
                k += 1
                n = f"{base}{k}"
            return f"\\{n}. {go(s.body, names + [n])}"
        head, args = mspine(s)
        h = go(head, names)
        if isinstance(head, MetaLam):
            h = f"({h})"
        return f"{h}({', '.join(go(a, names) for a in args)})"

    return go(t, [])
