"""The lambda-Pi calculus modulo rewriting, with rewriting modulo beta
through a higher-order rewriting encoding."""

from .reduction import FuelExhausted, RewriteRule, Undecided, convertible, normalize
from .surface import parse_file, parse_term, print_term
from .term import Term
from .typecheck import GlobalContext, check_rule, infer, pc_report, process_entry

__all__ = [
    "FuelExhausted",
    "GlobalContext",
    "RewriteRule",
    "Term",
    "Undecided",
    "check_rule",
    "convertible",
    "infer",
    "normalize",
    "parse_file",
    "parse_term",
    "pc_report",
    "print_term",
    "process_entry",
]
