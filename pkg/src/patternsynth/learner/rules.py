"""Ordered classification rules over address features.

A rule is a conjunction of threshold literals plus a label; a rule set is
an ordered rule list with a default label, evaluated as nested if-else:
the first rule whose body holds decides. Text form, one rule per line:

    (R >= 0.59) & (R.NW.NW.NW.SE <= 0.75) => +
    => -

The bare `=> label` line is the default rule and must come last.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import UsageError
from .features import Address, FeatureVector, format_address, parse_address


@dataclass(frozen=True)
class Literal:
    address: Address
    channel: int
    op: str  # "<=" or ">="
    threshold: float

    def __post_init__(self):
        if self.op not in ("<=", ">="):
            raise UsageError(f"literal relation must be <= or >=, got {self.op!r}")

    def holds(self, fv: FeatureVector) -> bool:
        v = fv.get(self.address, self.channel)
        return v <= self.threshold if self.op == "<=" else v >= self.threshold

    def __str__(self) -> str:
        # repr keeps the exact float so saved rulesets reload bit-identically
        return f"({format_address(self.address, self.channel)} {self.op} {self.threshold!r})"


@dataclass
class Rule:
    literals: list[Literal]
    label: str

    def __post_init__(self):
        if self.label not in ("+", "-"):
            raise UsageError(f"rule label must be '+' or '-', got {self.label!r}")

    def covers(self, fv: FeatureVector) -> bool:
        return all(lit.holds(fv) for lit in self.literals)

    def __str__(self) -> str:
        body = " & ".join(str(lit) for lit in self.literals)
        return f"{body} => {self.label}" if body else f"=> {self.label}"


@dataclass
class RuleSet:
    rules: list[Rule] = field(default_factory=list)
    default_label: str = "-"

    def decide(self, fv: FeatureVector) -> str:
        for rule in self.rules:
            if rule.covers(fv):
                return rule.label
        return self.default_label

    def __str__(self) -> str:
        lines = [str(r) for r in self.rules]
        lines.append(f"=> {self.default_label}")
        return "\n".join(lines) + "\n"

    def __len__(self) -> int:
        return len(self.rules) + 1  # including the default


_LITERAL_RE = re.compile(r"\(\s*([A-Za-z.:0-9]+)\s*(<=|>=)\s*([-0-9.eE+]+)\s*\)")


def parse_rule_line(line: str) -> Rule | str:
    """One rule, or the bare default label for a `=> label` line."""
    if "=>" not in line:
        raise UsageError(f"rule line missing '=>': {line!r}")
    body, label = line.rsplit("=>", 1)
    label = label.strip()
    if label not in ("+", "-"):
        raise UsageError(f"rule label must be '+' or '-', got {label!r}")
    body = body.strip()
    if not body:
        return label
    literals = []
    for part in body.split("&"):
        part = part.strip()
        m = _LITERAL_RE.fullmatch(part)
        if m is None:
            raise UsageError(f"bad literal {part!r}")
        addr, channel = parse_address(m.group(1))
        literals.append(Literal(addr, channel, m.group(2), float(m.group(3))))
    return Rule(literals, label)


def parse_ruleset(text: str) -> RuleSet:
    rules: list[Rule] = []
    default: str | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if default is not None:
            raise UsageError("default rule must be the last line")
        parsed = parse_rule_line(line)
        if isinstance(parsed, str):
            default = parsed
        else:
            rules.append(parsed)
    if default is None:
        raise UsageError("ruleset has no default rule line '=> +' or '=> -'")
    return RuleSet(rules, default)


def read_ruleset(path) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_ruleset(fh.read())


def write_ruleset(rs: RuleSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(str(rs))
