import pytest
from hypothesis import given, settings

from lpm import corpus
from lpm.generators import GenConfig, strategies
from lpm.surface import (
    Command,
    Declaration,
    ParseError,
    ResolveError,
    RuleStatement,
    SApp,
    SName,
    numeral,
    parse_file,
    parse_sterm,
    parse_term,
    print_file,
    print_term,
    tokenize,
)
from lpm.term import IdentKind, Lam, free_vars

ST = strategies()


class TestParse:
    def test_declaration(self):
        (d,) = parse_file("Nat : Type.").statements
        assert d == Declaration("Nat", SName("Type"))

    def test_rule(self):
        (r,) = parse_file("[n] Plus 0 n --> n.").statements
        assert isinstance(r, RuleStatement) and r.variables == ("n",)
        assert r.lhs == SApp(SApp(SName("Plus"), SName("0")), SName("n"))

    def test_empty_rule_context(self):
        (r,) = parse_file("[] Two --> S (S 0).").statements
        assert r.variables == ()

    def test_missing_type(self):
        with pytest.raises(ParseError) as e:
            parse_file("Nat : .")
        assert (e.value.line, e.value.col) == (1, 7)
        assert "'.'" in str(e.value)

    def test_commands(self):
        c, r = parse_file("#CHECK Map (Plus 3) : List -> List.\n#REDUCE Plus 1 1.").statements
        assert isinstance(c, Command) and c.type is not None
        assert r.command == "#REDUCE" and r.type is None

    def test_comments_and_locations(self):
        (d,) = parse_file("(; a\ncomment ;)\n  Nat : Type.").statements
        assert d.loc == "3:3"

    def test_unterminated_comment(self):
        with pytest.raises(ParseError, match="unterminated"):
            tokenize("(; oops")

    def test_unknown_command(self):
        with pytest.raises(ParseError, match="unknown command"):
            tokenize("#EVAL x.")

    def test_arrow_is_right_associative(self):
        assert parse_sterm("A -> B -> C") == parse_sterm("A -> (B -> C)")

    def test_trailing_input(self):
        with pytest.raises(ParseError):
            parse_sterm("A B )")


class TestResolve:
    names = {"Nat": IdentKind.TYPE_CONSTANT, "S": IdentKind.OBJECT_CONSTANT, "0": IdentKind.OBJECT_CONSTANT}

    def test_unknown_name(self):
        with pytest.raises(ResolveError):
            parse_term("Q", self.names)

    def test_numerals(self):
        assert parse_term("2", self.names) == numeral(2)
        assert print_term(numeral(3)) == "3"

    def test_binder(self):
        t = parse_term("x:Nat => S x", self.names)
        assert isinstance(t, Lam) and not free_vars(t)

    def test_variables(self):
        assert free_vars(parse_term("S n", self.names, ["n"])) == {"n"}


class TestPrint:
    def test_dependent_product_keeps_its_binder(self):
        names = {"Nat": IdentKind.TYPE_CONSTANT, "Vec": IdentKind.TYPE_CONSTANT}
        assert print_term(parse_term("n:Nat -> Vec n", names)) == "n:Nat -> Vec n"
        assert print_term(parse_term("n:Nat -> Nat", names)) == "Nat -> Nat"

    def test_shadowing_is_renamed(self):
        names = {"R": IdentKind.TYPE_CONSTANT}
        t = parse_term("x:R => (x:R => x) x", names)
        assert print_term(t) == "x:R => (x1:R => x1) x"

    @pytest.mark.parametrize("name", corpus.NAMES)
    def test_corpus_round_trip(self, name):
        text = corpus.path(name).read_text()
        f = parse_file(text)
        assert parse_file(print_file(f)) == f


def _names():
    c = GenConfig()
    out = {n: IdentKind.OBJECT_CONSTANT for n in c.objects}
    out.update({n: IdentKind.TYPE_CONSTANT for n in c.types})
    return out


@settings(max_examples=500, deadline=None)
@given(ST["term"])
def test_print_parse_round_trip(t):
    assert parse_term(print_term(t), _names(), sorted(free_vars(t))) == t
