"""Check every bundled corpus file and print the worked reductions."""

import argparse
import io
import sys
import time

from lpm import corpus
from lpm.cli import CliConfig, run

EXAMPLES = [
    ("peano_map", "Map (Plus 3) (Cons 1 (Cons 2 (Cons 3 Nil)))", False),
    ("diff", "Diff (x:R => Exp x)", False),
    ("diff", "Diff (x:R => Exp x)", True),
    ("linear_equations", "solve (to_expr (x:Nat => Plus x (Plus x (S x))))", True),
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--witness", action="store_true", help="print lifting witnesses for modulo-beta steps")
    args = parser.parse_args(argv)
    status = 0
    for name in corpus.NAMES:
        out, err = io.StringIO(), io.StringIO()
        start = time.perf_counter()
        code = run(CliConfig("check", str(corpus.path(name))), out, err)
        print(f"check {name}: exit {code} in {time.perf_counter() - start:.3f}s")
        for line in (out.getvalue() + err.getvalue()).splitlines():
            print(f"  {line}")
        status |= code
    for name, expr, modulo in EXAMPLES:
        out, err = io.StringIO(), io.StringIO()
        config = CliConfig("reduce", str(corpus.path(name)), expr, modulo_beta=modulo, witness=args.witness)
        code = run(config, out, err)
        print(f"reduce{' --modulo-beta' if modulo else ''} [{name}] {expr}")
        for line in out.getvalue().splitlines():
            print(f"  {line}")
        status |= code
    return status


if __name__ == "__main__":
    sys.exit(main())
