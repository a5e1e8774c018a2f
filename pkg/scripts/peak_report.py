"""Print the product-compatibility report of a corpus context or a file."""

import argparse
import sys
from pathlib import Path

from lpm import corpus
from lpm.meta_hrs import show
from lpm.typecheck import pc_report


def load(target: str):
    if target in corpus.NAMES:
        return corpus.load(target)
    from lpm.cli import CliConfig, Session

    path = Path(target)
    session = Session(CliConfig("check", str(path)), echo=False)
    return session.load(path.read_text(encoding="utf-8"))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("targets", nargs="*", default=list(corpus.NAMES), help="corpus names or .lpm paths")
    parser.add_argument("--fuel", type=int, default=1000)
    parser.add_argument("--all", action="store_true", help="also list trivial peaks")
    args = parser.parse_args(argv)
    for target in args.targets:
        report = pc_report(load(target), args.fuel)
        print(f"{target}: {report.verdict.value}")
        for f in report.flags:
            print(f"  {f.name}: left-linear={f.left_linear} algebraic={f.left_algebraic} pattern={f.pattern}")
        for p in report.peaks:
            if p.peak.trivial and not args.all:
                continue
            state = "joined" if p.joined else "NOT joined"
            print(f"  peak {p.peak.outer.name} / {p.peak.inner.name} at {p.peak.position} ({p.origin}): {state}")
            print(f"    source {show(p.peak.source)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
