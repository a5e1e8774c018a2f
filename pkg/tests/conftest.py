import pytest

from lpm import corpus
from lpm.term import Const, IdentKind

R = Const("R", IdentKind.TYPE_CONSTANT)

# extra variables for contexts whose base types have no closed inhabitant
LOCALS = {"peano_map": (), "diff": (("r0", R),), "diff_variant": (("r0", R),), "linear_equations": ()}

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ctx():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = corpus.load(name)
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
