from .parser import ParseError, parse, parse_file
from .semantics import AuditReport, check, soundness_audit, value
from .syntax import (
    And,
    Atom,
    Bottom,
    ExistsNext,
    ExistsUntil,
    Formula,
    ForallNext,
    ForallUntil,
    Not,
    Top,
    depth_of,
    exists_finally,
    exists_globally,
    forall_finally,
    forall_globally,
    or_,
    to_text,
    variables_of,
)

__all__ = [
    "AuditReport",
    "ParseError",
    "parse",
    "parse_file",
    "check",
    "soundness_audit",
    "value",
    "And",
    "Atom",
    "Bottom",
    "ExistsNext",
    "ExistsUntil",
    "Formula",
    "ForallNext",
    "ForallUntil",
    "Not",
    "Top",
    "depth_of",
    "exists_finally",
    "exists_globally",
    "forall_finally",
    "forall_globally",
    "or_",
    "to_text",
    "variables_of",
]
