"""Rule set -> formula translation.

A literal at address a1...ad becomes a chain of single-direction
exists-next operators around the threshold atom; a rule body is the
conjunction of its literal translations. The whole ordered rule set
translates to the disjunction, over positively labeled rules, of the
rule's body conjoined with the negations of all earlier rule bodies
(nested if-else flattening). The default rule participates with body true.
"""

from __future__ import annotations

from ..tssl import syntax as S
from .rules import Literal, Rule, RuleSet


def literal_to_formula(lit: Literal) -> S.Formula:
    node: S.Formula = S.Atom(f"m{lit.channel + 1}", lit.op, lit.threshold)
    for d in reversed(lit.address):
        node = S.ExistsNext(frozenset((d,)), node)
    return node


def rule_body_formula(rule: Rule) -> S.Formula:
    if not rule.literals:
        return S.Top()
    node = literal_to_formula(rule.literals[0])
    for lit in rule.literals[1:]:
        node = S.And(node, literal_to_formula(lit))
    return node


def ruleset_to_tssl(rs: RuleSet) -> S.Formula:
    rules = list(rs.rules) + [Rule([], rs.default_label)]
    bodies = [rule_body_formula(r) for r in rules]
    disjuncts: list[S.Formula] = []
    for j, rule in enumerate(rules):
        if rule.label != "+":
            continue
        node = bodies[j]
        for i in range(j):
            node = S.And(node, S.Not(bodies[i]))
        disjuncts.append(node)
    if not disjuncts:
        return S.Bottom()
    out = disjuncts[0]
    for d in disjuncts[1:]:
        out = S.or_(out, d)
    return out
