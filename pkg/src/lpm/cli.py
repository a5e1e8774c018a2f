"""Command line driver: ``lpm check``, ``lpm reduce`` and ``lpm type``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .encoding import BETA, EncodingError, encode_rule
from .modulo import WitnessError, iter_modulo_steps, lift_witness
from .reduction import DEFAULT_FUEL, Fuel, FuelExhausted, Reducer, Step
from .surface import (
    Command,
    Declaration,
    ParseError,
    ResolveError,
    parse_file,
    iter_entries,
    parse_term,
    print_term,
    resolve,
)
from .term import IllFormed, Term
from .typecheck import GlobalContext, RuleGroup, TypingError, infer, check, process_entry

MODES = ("check", "reduce", "type")


@dataclass
class CliConfig:
    mode: str
    path: str
    expr: str | None = None
    fuel: int = DEFAULT_FUEL
    modulo_beta: bool = False
    strict_pc: bool = False
    trace: bool = False
    witness: bool = False
    dump_hrs: bool = False
    report: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.fuel < 1:
            raise ValueError("fuel must be at least 1")
        if self.mode != "check" and self.expr is None:
            raise ValueError(f"{self.mode} needs an expression")


@dataclass
class Session:
    """Replays a file entry by entry, running its commands on the way."""

    config: CliConfig
    out: TextIO = field(default_factory=lambda: sys.stdout)
    err: TextIO = field(default_factory=lambda: sys.stderr)
    gctx: GlobalContext = None
    echo: bool = True
    _hinted: bool = False

    def __post_init__(self):
        if self.gctx is None:
            self.gctx = GlobalContext(strict_pc=self.config.strict_pc, fuel=self.config.fuel)

    def record(self, **rec) -> None:
        if self.config.report:
            print(json.dumps(rec), file=self.out)

    def load(self, text: str) -> GlobalContext:
        source = parse_file(text)
        pending: list = []
        for stmt, elab in iter_entries(source, lambda: self.gctx):
            if isinstance(stmt, Declaration) or isinstance(stmt, Command):
                self.flush(pending)
            if isinstance(stmt, Command):
                self.command(stmt)
            elif isinstance(stmt, Declaration):
                start = time.perf_counter()
                self.gctx = process_entry(self.gctx, elab)
                self.record(
                    name=stmt.name,
                    status="ok",
                    evidence=None,
                    pc_verdict=self._verdict(),
                    steps=0,
                    millis=_ms(start),
                )
            else:
                pending.append((stmt, elab))
        self.flush(pending)
        for w in self.gctx.warnings:
            print(f"warning: {w}", file=self.err)
        return self.gctx

    def _verdict(self) -> str | None:
        return self.gctx.pc.verdict.value if self.gctx.pc else None

    def flush(self, pending: list) -> None:
        if not pending:
            return
        start = time.perf_counter()
        group = RuleGroup(tuple(r for _, r in pending), pending[0][0].loc)
        before = len(self.gctx.rules)
        self.gctx = process_entry(self.gctx, group)
        pending.clear()
        for r in self.gctx.rules[before:]:
            self.record(
                name=r.name,
                status="ok",
                evidence=self.gctx.evidence[r.name].kind.value,
                pc_verdict=self._verdict(),
                steps=0,
                millis=_ms(start),
            )

    def reduce(self, t: Term) -> tuple[Term, int]:
        cfg = self.config
        if not cfg.modulo_beta and self.gctx.has_pattern_rules() and not self._hinted:
            self._hinted = True
            print("hint: some rules match under binders; --modulo-beta may reduce further", file=self.err)
        if cfg.witness and cfg.modulo_beta:
            return self._reduce_with_witness(t)
        trace: list[Step] = []
        red = Reducer(self.gctx, cfg.modulo_beta, cfg.fuel)
        nf = red.normalize(t, trace)
        if cfg.trace and self.echo:
            for s in trace:
                print(f"  {s.trace.format()}", file=self.out)
        return nf, len(trace)

    def _reduce_with_witness(self, t: Term) -> tuple[Term, int]:
        fuel = Fuel(self.config.fuel)
        n = 0
        while True:
            step = next(iter_modulo_steps(t, self.gctx), None)
            if step is None:
                return t, n
            fuel.spend()
            n += 1
            if self.echo:
                if self.config.trace:
                    print(f"  {step.trace().format()}", file=self.out)
                if step.rule != "beta":
                    w = lift_witness(step, self.gctx)
                    print(f"  witness for {step.rule} ({w.expansions} beta-expansion(s)):", file=self.out)
                    print(f"    expand   {print_term(w.t1_expanded)}", file=self.out)
                    print(f"    rewrite  {print_term(w.t2_expanded)}", file=self.out)
                    print(f"    contract {print_term(w.target)}", file=self.out)
            t = step.target

    def command(self, c: Command) -> None:
        start = time.perf_counter()
        t = resolve(c.term, self.gctx)
        steps = 0
        if c.command == "#REDUCE":
            nf, steps = self.reduce(t)
            output = print_term(nf)
        elif c.command == "#TYPE":
            output = print_term(infer(self.gctx, None, t))
        else:
            ty = resolve(c.type, self.gctx)
            check(self.gctx, None, t, ty)
            output = "OK"
        if self.echo and c.command != "#CHECK":
            print(output, file=self.out)
        self.record(
            name=c.command,
            status="ok",
            evidence=None,
            pc_verdict=self._verdict(),
            steps=steps,
            millis=_ms(start),
            output=output,
        )

    def dump_hrs(self) -> None:
        print(f"beta: {BETA}", file=self.out)
        for r in self.gctx.rules:
            try:
                print(f"{r.name}: {encode_rule(r).encoded}", file=self.out)
            except EncodingError as e:
                print(f"{r.name}: not encodable ({e.clause}: {e})", file=self.out)


def _ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000, 3)


def run(config: CliConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    # with --report, stdout carries only the JSON records
    session = Session(config, out, err, echo=config.mode == "check" and not config.report)
    try:
        session.load(Path(config.path).read_text(encoding="utf-8"))
        if config.dump_hrs:
            session.dump_hrs()
        if config.mode == "check":
            return 0
        session.echo = True
        t = parse_term(config.expr, session.gctx)
        if config.mode == "type":
            print(print_term(infer(session.gctx, None, t)), file=out)
        else:
            nf, _ = session.reduce(t)
            print(print_term(nf), file=out)
        return 0
    except FuelExhausted as e:
        print(f"error: {e}", file=err)
        return 2
    except (ParseError, ResolveError, TypingError, EncodingError, WitnessError, IllFormed, OSError) as e:
        print(f"error: {e}", file=err)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpm", description="Type checker for the lambda-Pi calculus modulo rewriting")
    sub = parser.add_subparsers(dest="mode", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="a .lpm source file")
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="maximum number of reduction steps")
    common.add_argument("--dump-hrs", action="store_true", help="print the encoded higher-order rules")
    common.add_argument("--strict-pc", action="store_true", help="fail when product compatibility is only assumed")
    common.add_argument("--modulo-beta", action="store_true", help="rewrite modulo beta")

    p = sub.add_parser("check", parents=[common], help="check a file and run its commands")
    p.add_argument("--report", action="store_true", help="print one JSON record per statement")
    p.add_argument("--trace", action="store_true", help="print the steps of #REDUCE commands")

    p = sub.add_parser("reduce", parents=[common], help="normalize an expression")
    p.add_argument("-e", "--expr", required=True)
    p.add_argument("--trace", action="store_true", help="print every step")
    p.add_argument("--witness", action="store_true", help="print a lifting witness for every step modulo beta")

    p = sub.add_parser("type", parents=[common], help="infer the type of an expression")
    p.add_argument("-e", "--expr", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = CliConfig(
            mode=args.mode,
            path=args.file,
            expr=getattr(args, "expr", None),
            fuel=args.fuel,
            modulo_beta=args.modulo_beta,
            strict_pc=args.strict_pc,
            trace=getattr(args, "trace", False),
            witness=getattr(args, "witness", False),
            dump_hrs=args.dump_hrs,
            report=getattr(args, "report", False),
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
