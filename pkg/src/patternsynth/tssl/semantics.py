"""Boolean model checking and discounted quantitative valuation over a QTS.

Both evaluators share the same bounded-path reading of until: a witness
index i runs over 1..k, the left operand must hold at every earlier index
including the current state, and each zoom level divides the contribution
by 4. Positive valuations imply satisfaction and negative ones imply
violation; a valuation of exactly 0 decides nothing and the boolean
semantics is authoritative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import UsageError
from ..quadtree import QTS
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
    variables_of,
)


def _atom_indices(qts: QTS, phi: Formula) -> dict[str, int]:
    return {var: qts.var_index(var) for var in variables_of(phi)}


def check(qts: QTS, phi: Formula, state: int | None = None) -> bool:
    """Does the QTS satisfy the formula at `state` (default: initial state)?"""
    idx = _atom_indices(qts, phi)
    memo: dict[tuple, bool] = {}

    def ev(node: Formula, s: int) -> bool:
        key = (id(node), s)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Top):
            out = True
        elif isinstance(node, Bottom):
            out = False
        elif isinstance(node, Atom):
            v = qts.value_of(s, idx[node.var])
            out = v <= node.threshold if node.op == "<=" else v >= node.threshold
        elif isinstance(node, Not):
            out = not ev(node.sub, s)
        elif isinstance(node, And):
            out = ev(node.left, s) and ev(node.right, s)
        elif isinstance(node, ExistsNext):
            out = any(ev(node.sub, t) for t in qts.successors(s, node.dirs))
        elif isinstance(node, ForallNext):
            out = all(ev(node.sub, t) for t in qts.successors(s, node.dirs))
        elif isinstance(node, (ExistsUntil, ForallUntil)):
            out = until(node, s, node.bound)
        else:
            raise UsageError(f"unknown formula node {type(node).__name__}")
        memo[key] = out
        return out

    def until(node, s: int, budget: int) -> bool:
        key = (id(node), s, budget)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if not ev(node.left, s):
            out = False
        else:
            succ = qts.successors(s, node.dirs)
            step = (lambda t: ev(node.right, t) or (budget >= 2 and until(node, t, budget - 1)))
            out = any(map(step, succ)) if isinstance(node, ExistsUntil) else all(map(step, succ))
        memo[key] = out
        return out

    return ev(phi, qts.initial if state is None else state)


def value(qts: QTS, phi: Formula, state: int | None = None) -> float:
    """Quantitative valuation in [-b, b] with a 1/4 discount per zoom level."""
    idx = _atom_indices(qts, phi)
    b = qts.value_bound
    memo: dict[tuple, float] = {}

    def ev(node: Formula, s: int) -> float:
        key = (id(node), s)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Top):
            out = b
        elif isinstance(node, Bottom):
            out = -b
        elif isinstance(node, Atom):
            v = qts.value_of(s, idx[node.var])
            out = node.threshold - v if node.op == "<=" else v - node.threshold
        elif isinstance(node, Not):
            out = -ev(node.sub, s)
        elif isinstance(node, And):
            out = min(ev(node.left, s), ev(node.right, s))
        elif isinstance(node, ExistsNext):
            out = 0.25 * max(ev(node.sub, t) for t in qts.successors(s, node.dirs))
        elif isinstance(node, ForallNext):
            out = 0.25 * min(ev(node.sub, t) for t in qts.successors(s, node.dirs))
        elif isinstance(node, (ExistsUntil, ForallUntil)):
            out = until(node, s, node.bound)
        else:
            raise UsageError(f"unknown formula node {type(node).__name__}")
        memo[key] = out
        return out

    def until(node, s: int, budget: int) -> float:
        # best over witness indices 1..budget of
        #   min(4^-i * right(path_i), min_{j<i} 4^-j * left(path_j)),
        # computed by peeling one level: each level scales by 1/4.
        key = (id(node), s, budget)
        hit = memo.get(key)
        if hit is not None:
            return hit
        here = ev(node.left, s)
        succ = qts.successors(s, node.dirs)
        branch = (lambda t: max(ev(node.right, t),
                                until(node, t, budget - 1) if budget >= 2 else -math.inf))
        agg = max if isinstance(node, ExistsUntil) else min
        out = min(here, 0.25 * agg(map(branch, succ)))
        memo[key] = out
        return out

    return ev(phi, qts.initial if state is None else state)


@dataclass(frozen=True)
class AuditReport:
    satisfied: bool
    valuation: float
    verdict: str  # "consistent" | "indeterminate" | "violation"

    @property
    def violation(self) -> bool:
        return self.verdict == "violation"


def soundness_audit(qts: QTS, phi: Formula, state: int | None = None) -> AuditReport:
    """Evaluate both semantics and cross-check: a positive valuation must
    come with satisfaction and a negative one with violation; exactly 0 is
    indeterminate and the boolean answer is authoritative."""
    sat = check(qts, phi, state)
    val = value(qts, phi, state)
    if val > 0 and not sat:
        verdict = "violation"
    elif val < 0 and sat:
        verdict = "violation"
    elif val == 0:
        verdict = "indeterminate"
    else:
        verdict = "consistent"
    return AuditReport(sat, val, verdict)
