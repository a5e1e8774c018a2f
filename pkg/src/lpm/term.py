"""Terms of the lambda-Pi calculus modulo rewriting.

Terms are locally nameless: free variables carry names (``Var``) and bound
variables are de Bruijn indices (``BVar``).  Binder names are printing hints
only, so ``==`` on terms is alpha-equivalence.

The grammar is stratified into objects, types and kinds.  Every node computes
its category when it is built and raises ``IllFormed`` if it fits no
production, so the rest of the library never sees a kind applied to an
argument or an abstraction over a kind.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence


class IllFormed(ValueError):
    pass


class Category(enum.Enum):
    OBJECT = "object"
    TYPE = "type"
    KIND = "kind"
    KIND_SYMBOL = "Kind"


class IdentKind(enum.Enum):
    VARIABLE = "variable"
    OBJECT_CONSTANT = "object-constant"
    TYPE_CONSTANT = "type-constant"


class Term:
    category: Category
    loose: int  # 1 + the largest dangling de Bruijn index, 0 when locally closed

    def __str__(self) -> str:
        from .surface import print_term

        return print_term(self)


def _finish(node, category: Category, loose: int, h: int) -> None:
    object.__setattr__(node, "category", category)
    object.__setattr__(node, "loose", loose)
    object.__setattr__(node, "_hash", h)


_cached = dict(init=False, compare=False, repr=False)


@dataclass(frozen=True, eq=True)
class Var(Term):
    name: str
    category: Category = field(default=Category.OBJECT, **_cached)
    loose: int = field(default=0, **_cached)

    def __hash__(self):
        return hash(("Var", self.name))


@dataclass(frozen=True, eq=True)
class BVar(Term):
    index: int
    category: Category = field(default=Category.OBJECT, **_cached)
    loose: int = field(default=0, **_cached)

    def __post_init__(self):
        if self.index < 0:
            raise IllFormed(f"negative de Bruijn index {self.index}")
        object.__setattr__(self, "loose", self.index + 1)

    def __hash__(self):
        return hash(("BVar", self.index))


@dataclass(frozen=True, eq=True)
class Const(Term):
    name: str
    kind: IdentKind = IdentKind.OBJECT_CONSTANT
    category: Category = field(default=Category.OBJECT, **_cached)
    loose: int = field(default=0, **_cached)

    def __post_init__(self):
        if self.kind is IdentKind.VARIABLE:
            raise IllFormed(f"constant {self.name!r} cannot live in the variable namespace")
        if self.kind is IdentKind.TYPE_CONSTANT:
            object.__setattr__(self, "category", Category.TYPE)

    def __hash__(self):
        return hash(("Const", self.name, self.kind))


@dataclass(frozen=True, eq=True)
class Sort(Term):
    name: str
    category: Category = field(default=Category.KIND, **_cached)
    loose: int = field(default=0, **_cached)

    def __post_init__(self):
        if self.name == "Kind":
            object.__setattr__(self, "category", Category.KIND_SYMBOL)
        elif self.name != "Type":
            raise IllFormed(f"unknown sort {self.name!r}")

    def __hash__(self):
        return hash(("Sort", self.name))


TYPE = Sort("Type")
KIND = Sort("Kind")


@dataclass(frozen=True, eq=True)
class App(Term):
    fun: Term
    arg: Term
    category: Category = field(**_cached)
    loose: int = field(**_cached)
    _hash: int = field(**_cached)

    def __post_init__(self):
        if self.arg.category is not Category.OBJECT:
            raise IllFormed(f"argument must be an object, got a {self.arg.category.value}")
        if self.fun.category not in (Category.OBJECT, Category.TYPE):
            raise IllFormed(f"cannot apply a {self.fun.category.value}")
        _finish(
            self,
            self.fun.category,
            max(self.fun.loose, self.arg.loose),
            hash(("App", self.fun, self.arg)),
        )

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class Lam(Term):
    binder: str = field(compare=False)
    annot: Term
    body: Term
    category: Category = field(**_cached)
    loose: int = field(**_cached)
    _hash: int = field(**_cached)

    def __post_init__(self):
        if self.annot.category is not Category.TYPE:
            raise IllFormed(f"abstraction domain must be a type, got a {self.annot.category.value}")
        if self.body.category not in (Category.OBJECT, Category.TYPE):
            raise IllFormed(f"abstraction body must be an object or a type, got a {self.body.category.value}")
        _finish(
            self,
            self.body.category,
            max(self.annot.loose, self.body.loose - 1, 0),
            hash(("Lam", self.annot, self.body)),
        )

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, eq=True)
class Pi(Term):
    binder: str = field(compare=False)
    domain: Term
    codomain: Term
    category: Category = field(**_cached)
    loose: int = field(**_cached)
    _hash: int = field(**_cached)

    def __post_init__(self):
        if self.domain.category is not Category.TYPE:
            raise IllFormed(f"product domain must be a type, got a {self.domain.category.value}")
        if self.codomain.category is Category.TYPE:
            category = Category.TYPE
        elif self.codomain.category is Category.KIND:
            category = Category.KIND
        else:
            raise IllFormed(f"product codomain must be a type or a kind, got a {self.codomain.category.value}")
        _finish(
            self,
            category,
            max(self.domain.loose, self.codomain.loose - 1, 0),
            hash(("Pi", self.domain, self.codomain)),
        )

    def __hash__(self):
        return self._hash


Path = tuple[int, ...]


def categorize(t: Term) -> Category:
    return t.category


def alpha_eq(t: Term, u: Term) -> bool:
    return t == u


# ---------------------------------------------------------------------------
# de Bruijn plumbing


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Lam):
        return (t.annot, t.body)
    if isinstance(t, Pi):
        return (t.domain, t.codomain)
    return ()


def rebuild(t: Term, kids: Sequence[Term]) -> Term:
    if isinstance(t, App):
        if kids[0] is t.fun and kids[1] is t.arg:
            return t
        return App(kids[0], kids[1])
    if isinstance(t, Lam):
        if kids[0] is t.annot and kids[1] is t.body:
            return t
        return Lam(t.binder, kids[0], kids[1])
    if isinstance(t, Pi):
        if kids[0] is t.domain and kids[1] is t.codomain:
            return t
        return Pi(t.binder, kids[0], kids[1])
    return t


def binds(t: Term, i: int) -> int:
    """Number of binders crossed when entering child ``i`` of ``t``."""
    return 1 if i == 1 and isinstance(t, (Lam, Pi)) else 0


def _map_bvars(t: Term, f: Callable[[int, int], Term], depth: int = 0) -> Term:
    if t.loose <= depth:
        return t
    if isinstance(t, BVar):
        return f(t.index, depth)
    kids = children(t)
    return rebuild(t, [_map_bvars(k, f, depth + binds(t, i)) for i, k in enumerate(kids)])


def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    if d == 0:
        return t

    def go(i: int, depth: int) -> Term:
        if i < depth + cutoff:
            return BVar(i)
        if i + d < 0:
            raise ValueError("shift would produce a negative index")
        return BVar(i + d)

    return _map_bvars(t, go)


def instantiate(body: Term, v: Term) -> Term:
    """``body`` with index 0 replaced by ``v`` (the beta contraction)."""

    def go(i: int, depth: int) -> Term:
        if i < depth:
            return BVar(i)
        if i == depth:
            return shift(v, depth)
        return BVar(i - 1)

    return _map_bvars(body, go)


def abstract(t: Term, name: str) -> Term:
    """Turn free ``Var(name)`` into index 0 under a new binder."""

    def go(s: Term, depth: int) -> Term:
        if isinstance(s, Var):
            return BVar(depth) if s.name == name else s
        if isinstance(s, BVar):
            return BVar(s.index + 1) if s.index >= depth else s
        kids = children(s)
        if not kids:
            return s
        return rebuild(s, [go(k, depth + binds(s, i)) for i, k in enumerate(kids)])

    return go(t, 0)


def lam(name: str, annot: Term, body: Term) -> Lam:
    return Lam(name, annot, abstract(body, name))


def pi(name: str, domain: Term, codomain: Term) -> Pi:
    return Pi(name, domain, abstract(codomain, name))


def arrow(domain: Term, codomain: Term) -> Pi:
    return Pi("_", domain, shift(codomain, 1))


def apply(head: Term, args: Sequence[Term]) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# ---------------------------------------------------------------------------
# substitution and variables


def substitute_many(t: Term, mapping: Mapping[str, Term]) -> Term:
    if not mapping:
        return t

    def go(s: Term, depth: int) -> Term:
        if isinstance(s, Var):
            v = mapping.get(s.name)
            return s if v is None else shift(v, depth)
        kids = children(s)
        if not kids:
            return s
        return rebuild(s, [go(k, depth + binds(s, i)) for i, k in enumerate(kids)])

    return go(t, 0)


def substitute(t: Term, x: str, v: Term) -> Term:
    """Capture-avoiding ``t[x/v]``.

    Bound variables are indices, so nothing can be captured; the printer
    picks fresh binder names when a hint would clash.
    """
    return substitute_many(t, {x: v})


def free_vars(t: Term) -> frozenset[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out.add(s.name)
        else:
            stack.extend(children(s))
    return frozenset(out)


def constants(t: Term) -> frozenset[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Const):
            out.add(s.name)
        else:
            stack.extend(children(s))
    return frozenset(out)


def var_occurrences(t: Term) -> Iterator[tuple[str, int]]:
    """Yield ``(name, number of arguments)`` for each free variable occurrence."""
    stack = [t]
    while stack:
        s = stack.pop()
        head, args = spine(s)
        if isinstance(head, Var):
            yield head.name, len(args)
            stack.extend(args)
        elif args:
            stack.append(head)
            stack.extend(args)
        else:
            stack.extend(children(s))


def is_algebraic(t: Term) -> bool:
    if isinstance(t, Var):
        return False

    def ok(s: Term) -> bool:
        head, args = spine(s)
        if isinstance(head, Var):
            return not args
        if not isinstance(head, Const):
            return False
        return all(ok(a) for a in args)

    return ok(t)


def size(t: Term) -> int:
    return 1 + sum(size(k) for k in children(t))


# ---------------------------------------------------------------------------
# positions


def subterm(t: Term, path: Path) -> Term:
    for i in path:
        t = children(t)[i]
    return t


def replace_at(t: Term, path: Path, new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(t, kids)


def positions(t: Term, path: Path = ()) -> Iterator[tuple[Path, Term]]:
    """All positions in leftmost-outermost (pre-)order."""
    yield path, t
    for i, k in enumerate(children(t)):
        yield from positions(k, path + (i,))


def binders_above(t: Term, path: Path) -> list[Term]:
    """Binding nodes crossed on the way to ``path``, outermost first."""
    out = []
    for i in path:
        if binds(t, i):
            out.append(t)
        t = children(t)[i]
    return out


_fresh_counter = itertools.count()


def fresh_name(hint: str = "x") -> str:
    """A name no parser can produce (``%`` is not an identifier character)."""
    return f"{hint}%{next(_fresh_counter)}"


def open_at(t: Term, path: Path) -> tuple[Term, list[str]]:
    """The subterm at ``path`` with every enclosing binder opened as a fresh
    ``Var``.  Returns the opened subterm and the fresh names, outermost first."""
    names: list[str] = []
    for i in path:
        child = children(t)[i]
        if binds(t, i):
            names.append(fresh_name(t.binder))
        t = child
    # indices pointing at the crossed binders become the fresh variables
    mapping = {k: Var(n) for k, n in enumerate(reversed(names))}

    def go(i: int, depth: int) -> Term:
        if i < depth:
            return BVar(i)
        j = i - depth
        if j in mapping:
            return mapping[j]
        return BVar(i - len(names))

    return _map_bvars(t, go), names


def close_at(t: Term, path: Path, new: Term, names: Sequence[str]) -> Term:
    """Inverse of ``open_at``: plug ``new`` (written over ``names``) at ``path``."""
    # outermost first, so the innermost name ends up as index 0
    for n in names:
        new = abstract(new, n)
    return replace_at(t, path, new)
