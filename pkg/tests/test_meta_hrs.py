import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpm.encoding import APP_C, BETA, LAM_C, TERM, embed, encode_rule, encode_rule_syntactic, hrs_of_context
from lpm.generators import strategies
from lpm.meta_hrs import (
    Arrow,
    Base,
    Bound,
    Con,
    HrsError,
    HrsRule,
    MetaApp,
    MetaLam,
    MetaVar,
    apply_subst,
    arrows,
    atom,
    critical_peaks,
    free_metavars,
    hrs_normalize,
    hrs_step,
    is_long_nf,
    is_pattern,
    long_nf,
    mapp,
    match_pattern,
    mchildren,
    mlam,
    pattern_unify,
    power,
    show,
)
from lpm.surface import parse_term

ST = strategies()
T1 = Arrow(TERM, TERM)


def lam_(name, body, ty=TERM):
    return mlam(MetaVar(name, ty), body)


class TestTypes:
    def test_power(self):
        assert power(TERM, 1) == TERM
        assert power(TERM, 3) == Arrow(TERM, Arrow(TERM, TERM))

    def test_ill_typed_application(self):
        with pytest.raises(HrsError):
            MetaApp(Con("c", TERM), Con("d", TERM))


class TestLongNormalForm:
    def test_beta_redex(self):
        c = Con("c", TERM)
        assert long_nf(MetaApp(lam_("x", MetaVar("x", TERM)), c)) == c

    def test_eta_expansion(self):
        F = MetaVar("F", T1)
        out = long_nf(F)
        assert isinstance(out, MetaLam) and out.body == MetaApp(F, Bound(0, TERM))

    def test_instantiation_display(self, ctx):
        g = ctx("diff")
        enc = encode_rule(g.rules[0]).encoded
        out = apply_subst(enc.lhs, {"f": lam_("y", MetaVar("y", TERM))})
        assert out == embed(parse_term("Diff (x:R => Exp x)", g))

    def test_higher_order_constants_expand(self):
        out = long_nf(LAM_C)
        assert is_long_nf(out) and isinstance(out, MetaLam)


class TestIsPattern:
    def test_beta_lhs(self):
        assert is_pattern(BETA.lhs)

    def test_constant_argument(self):
        assert not is_pattern(MetaApp(MetaVar("F", T1), Con("c", TERM)))

    def test_repeated_bound_variable(self):
        F = MetaVar("F", arrows([TERM, TERM], TERM))
        x = MetaVar("x", TERM)
        assert not is_pattern(long_nf(mlam(x, mapp(F, [x, x]))))


class TestMatch:
    def test_diff_display(self, ctx):
        g = ctx("diff")
        enc = encode_rule(g.rules[0]).encoded
        sigma = match_pattern(enc.lhs, embed(parse_term("Diff (x:R => Exp x)", g)))
        assert set(sigma) == {"f"}
        assert sigma["f"] == long_nf(lam_("y", MetaVar("y", TERM)))

    def test_constant(self):
        c = Con("c", TERM)
        assert match_pattern(c, c) == {}

    def test_head_mismatch(self):
        x = MetaVar("x", TERM)
        p = long_nf(mlam(x, MetaApp(Con("Exp", T1), MetaApp(MetaVar("f", T1), x))))
        t = long_nf(mlam(x, MetaApp(Con("Log", T1), x)))
        assert match_pattern(p, t) is None

    def test_bound_variable_cannot_escape(self):
        # \x. F  against  \x. x  has no solution
        x = MetaVar("x", TERM)
        assert match_pattern(long_nf(mlam(x, MetaVar("F", TERM))), long_nf(mlam(x, x))) is None


class TestUnify:
    def test_beta_against_the_applied_variable(self, ctx):
        # the beta lhs against #App(f, x) with x a rigid atom of the Diff lhs
        x = atom(TERM, "x")
        inner = mapp(APP_C, [MetaVar("f", TERM), x])
        sigma = pattern_unify(BETA.lhs, inner, rigid=frozenset({x.name}))
        assert sigma is not None
        assert apply_subst(BETA.lhs, sigma) == apply_subst(inner, sigma)
        # f becomes an abstraction, which recreates the redex of the peak
        head = apply_subst(MetaVar("f", TERM), sigma)
        assert head.fun.fun == LAM_C

    def test_identity(self):
        F = MetaVar("F", TERM)
        sigma = pattern_unify(F, F)
        assert sigma is not None and apply_subst(F, sigma) == F

    def test_distinct_constants(self):
        assert pattern_unify(Con("c", TERM), Con("d", TERM)) is None

    def test_occurs_check(self):
        F = MetaVar("F", TERM)
        assert pattern_unify(F, MetaApp(Con("g", T1), F)) is None


class TestSteps:
    def test_beta_rule(self, ctx):
        g = ctx("peano_map")
        t = embed(parse_term("(x:Nat => x) 0", g))
        assert [s.term for s in hrs_step(t, [BETA])] == [embed(parse_term("0", g))]

    def test_diff_redex(self, ctx):
        g = ctx("diff")
        t = embed(parse_term("Diff (x:R => Exp x)", g))
        target = embed(parse_term("Fmult (Diff (x:R => x)) (x:R => Exp x)", g))
        assert [s.term for s in hrs_step(t, hrs_of_context(g))] == [target]

    def test_constant(self):
        assert hrs_step(Con("c", TERM), [BETA]) == []

    def test_normalize(self, ctx):
        g = ctx("peano_map")
        t = embed(parse_term("Plus 2 2", g))
        assert hrs_normalize(t, hrs_of_context(g)) == embed(parse_term("4", g))


class TestRules:
    def test_lhs_must_be_a_pattern(self):
        F = MetaVar("F", T1)
        with pytest.raises(HrsError):
            HrsRule(MetaApp(Con("g", T1), MetaApp(F, Con("c", TERM))), Con("c", TERM))

    def test_rhs_variables_come_from_the_lhs(self):
        with pytest.raises(HrsError):
            HrsRule(MetaApp(Con("g", T1), MetaVar("X", TERM)), MetaVar("Y", TERM))

    def test_lhs_is_not_a_variable(self):
        with pytest.raises(HrsError):
            HrsRule(MetaVar("X", TERM), Con("c", TERM))


class TestUntypedLambda:
    """The untyped lambda-calculus as an HRS, with the two-argument beta rule."""

    app = Con("app", Arrow(TERM, T1))
    lam = Con("lam", Arrow(T1, TERM))
    X, Y = MetaVar("X", T1), MetaVar("Y", TERM)
    rule = HrsRule(mapp(app, [MetaApp(lam, lam_("x", MetaApp(X, MetaVar("x", TERM)))), Y]), MetaApp(X, Y), "beta")

    def test_the_rule_is_a_pattern_rule(self):
        assert is_pattern(self.rule.lhs)

    def test_self_application(self):
        identity = MetaApp(self.lam, lam_("y", MetaVar("y", TERM)))
        x = MetaVar("x", TERM)
        delta = MetaApp(self.lam, lam_("x", mapp(self.app, [x, x])))
        assert hrs_normalize(mapp(self.app, [delta, identity]), [self.rule]) == identity

    def test_omega_runs_out_of_fuel(self):
        from lpm.reduction import FuelExhausted

        x = MetaVar("x", TERM)
        delta = MetaApp(self.lam, lam_("x", mapp(self.app, [x, x])))
        with pytest.raises(FuelExhausted):
            hrs_normalize(mapp(self.app, [delta, delta]), [self.rule], fuel=20)


class TestCriticalPeaks:
    def test_diff_peak_with_beta(self, ctx):
        g = ctx("diff")
        peaks = critical_peaks([BETA, encode_rule_syntactic(g.rules[0])])
        assert len(peaks) == 1
        p = peaks[0]
        assert (p.outer.name, p.inner.name) == ("Diff.1", "beta")
        holes = free_metavars(p.source)
        # instantiate the most general peak to the one of the motivating example
        inst = {}
        for name, ty in holes.items():
            inst[name] = embed(parse_term("R", g)) if ty == TERM else lam_("y", MetaVar("y", TERM))
        expected = embed(parse_term("Diff (x:R => Exp ((y:R => y) x))", g))
        assert apply_subst(p.source, inst) == expected

    def test_plus_rules_do_not_overlap(self, ctx):
        rules = [r for r in hrs_of_context(ctx("peano_map")) if r.name.startswith("Plus")]
        assert len(rules) == 2 and critical_peaks(rules) == []

    def test_no_rules(self):
        assert critical_peaks([]) == []

    def test_peak_sides_are_reducts_of_the_source(self, ctx):
        g = ctx("linear_equations")
        rules = [BETA, *hrs_of_context(g)]
        for p in critical_peaks(rules):
            reducts = {s.term for s in hrs_step(p.source, rules)}
            assert p.left in reducts and p.right in reducts


# ---------------------------------------------------------------------------
# properties

_EXPANSION_RNG = random.Random(0)


def beta_expand(t, rng):
    """Wrap a random subterm ``u`` as ``(\\z. z) u`` or ``(\\z. u) c``."""
    kids = mchildren(t)
    if kids and rng.random() < 0.7:
        i = rng.randrange(len(kids))
        new = list(kids)
        new[i] = beta_expand(kids[i], rng)
        from lpm.meta_hrs import _rebuild

        return _rebuild(t, new)
    if rng.random() < 0.5:
        return MetaApp(MetaLam("z", t.type, Bound(0, t.type)), t)
    from lpm.meta_hrs import mshift

    return MetaApp(MetaLam("z", TERM, mshift(t, 1)), Con("c", TERM))


@settings(max_examples=300, deadline=None)
@given(ST["term"], st.integers(0, 1000))
def test_long_nf_is_stable_under_beta_expansion(t, seed):
    p = embed(t)
    assert is_long_nf(p)
    rng = random.Random(seed)
    q = p
    for _ in range(3):
        q = beta_expand(q, rng)
    assert long_nf(q) == p
    assert long_nf(long_nf(q)) == long_nf(q)
    assert long_nf(q).type == q.type


def _instances(g, seed):
    """An encoded lhs and a random ground instance of it."""
    from lpm.generators import random_object

    rng = random.Random(seed)
    rule = rng.choice([encode_rule(r).encoded for r in g.rules])
    sigma = {}
    for name, ty in free_metavars(rule.lhs).items():
        body = embed(random_object(rng.randrange(10**6)))
        if ty == TERM:
            sigma[name] = body
        else:
            x = MetaVar("x%b", TERM)
            sigma[name] = mlam(x, mapp(Con("k", Arrow(TERM, Arrow(TERM, TERM))), [body, x]))
    return rule, sigma


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["peano_map", "diff", "linear_equations"]))
def test_match_recovers_the_unique_substitution(ctx, seed, name):
    rule, sigma = _instances(ctx(name), seed)
    t = apply_subst(rule.lhs, sigma)
    found = match_pattern(rule.lhs, t)
    assert found is not None
    assert apply_subst(rule.lhs, found) == t
    assert {k: long_nf(v) for k, v in found.items()} == {k: long_nf(v) for k, v in sigma.items()}


@settings(max_examples=100, deadline=None)
@given(ST["seed"], st.sampled_from(["peano_map", "diff", "linear_equations"]))
def test_steps_stay_long_and_typed(ctx, seed, name):
    from lpm.generators import WellTypedGen
    from conftest import LOCALS

    g = ctx(name)
    t = embed(WellTypedGen(g, random.Random(seed), LOCALS[name]).sample()[0])
    for s in hrs_step(t, [BETA, *hrs_of_context(g)]):
        assert is_long_nf(s.term) and s.term.type == TERM


# most-generality against brute force on a toy signature
A0 = Con("a", TERM)
G1 = Con("g", T1)
H2 = Con("h", arrows([TERM, TERM], TERM))
L1 = Con("L", Arrow(T1, TERM))
X, Y = MetaVar("X", TERM), MetaVar("Y", TERM)
F = MetaVar("F", T1)


def _ground(depth, extra=()):
    terms = [A0, *extra]
    for _ in range(depth):
        terms = list(dict.fromkeys([A0, *extra] + [MetaApp(G1, t) for t in terms] + [mapp(H2, [s, t]) for s in terms for t in terms]))
    return terms


GROUND0 = _ground(1)
_xb = MetaVar("xb", TERM)
GROUND1 = [long_nf(mlam(_xb, t)) for t in _ground(1, (_xb,))]


def _toy_pattern(rng, depth, scope):
    r = rng.random()
    if depth == 0 or r < 0.25:
        options = [A0, X, Y] + list(scope)
        if scope:
            options.append(MetaApp(F, scope[-1]))
        return rng.choice(options)
    if r < 0.5:
        return MetaApp(G1, _toy_pattern(rng, depth - 1, scope))
    if r < 0.8:
        return mapp(H2, [_toy_pattern(rng, depth - 1, scope), _toy_pattern(rng, depth - 1, scope)])
    x = MetaVar(f"b{len(scope)}", TERM)
    return MetaApp(L1, mlam(x, _toy_pattern(rng, depth - 1, scope + [x])))


def _grounds(ty):
    return GROUND0 if ty == TERM else GROUND1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_unifier_is_sound_and_most_general(seed):
    rng = random.Random(seed)
    s, t = long_nf(_toy_pattern(rng, 3, [])), long_nf(_toy_pattern(rng, 3, []))
    names = sorted(set(free_metavars(s)) | set(free_metavars(t)))
    types = {**free_metavars(s), **free_metavars(t)}
    sigma = pattern_unify(s, t)
    if sigma is not None:
        assert apply_subst(s, sigma) == apply_subst(t, sigma)
    # every ground unifier must be an instance of sigma
    tup = Con("tuple", arrows([types[n] for n in names], TERM))
    for values in itertools.product(*(_grounds(types[n]) for n in names)):
        theta = dict(zip(names, values))
        if apply_subst(s, theta) != apply_subst(t, theta):
            continue
        assert sigma is not None, f"missed unifier {theta}"
        general = long_nf(mapp(tup, [apply_subst(MetaVar(n, types[n]), sigma) for n in names]))
        ground = long_nf(mapp(tup, [long_nf(v) for v in values]))
        assert match_pattern(general, ground) is not None, f"{show(general)} does not cover {show(ground)}"
