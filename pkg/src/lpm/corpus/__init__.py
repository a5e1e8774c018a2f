"""The example developments shipped with the package."""

from __future__ import annotations

import io
from pathlib import Path

HERE = Path(__file__).parent
NAMES = ("peano_map", "diff", "diff_variant", "linear_equations")


def path(name: str) -> Path:
    return HERE / f"{name}.lpm"


def load(name: str, **options):
    """Check a corpus file and return its global context."""
    from ..cli import CliConfig, Session

    session = Session(CliConfig("check", str(path(name)), **options), io.StringIO(), io.StringIO(), echo=False)
    return session.load(path(name).read_text(encoding="utf-8"))
