"""Formula trees for the tree spatial superposition logic.

The core syntax is: true/false, threshold atoms over state variables,
negation, conjunction, direction-restricted next, and bounded until with
exists/forall path quantifiers. Disjunction and the bounded
eventually/globally operators are provided as constructors that desugar
into the core, so evaluators only ever see core nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UsageError
from ..quadtree import ALL_DIRS, DIRECTIONS


def _check_dirs(dirs: frozenset) -> frozenset:
    dirs = frozenset(dirs)
    if not dirs:
        raise UsageError("direction set must be non-empty")
    if not dirs <= ALL_DIRS:
        raise UsageError(f"unknown directions {sorted(dirs - ALL_DIRS)}")
    return dirs


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    var: str
    op: str  # "<=" or ">="
    threshold: float

    def __post_init__(self):
        if self.op not in ("<=", ">="):
            raise UsageError(f"atom relation must be <= or >=, got {self.op!r}")
        if self.threshold < 0:
            raise UsageError("atom threshold must be non-negative")


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ExistsNext(Formula):
    dirs: frozenset
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "dirs", _check_dirs(self.dirs))


@dataclass(frozen=True)
class ForallNext(Formula):
    dirs: frozenset
    sub: Formula

    def __post_init__(self):
        object.__setattr__(self, "dirs", _check_dirs(self.dirs))


@dataclass(frozen=True)
class ExistsUntil(Formula):
    dirs: frozenset
    left: Formula
    bound: int
    right: Formula

    def __post_init__(self):
        object.__setattr__(self, "dirs", _check_dirs(self.dirs))
        if self.bound < 1:
            raise UsageError("until bound must be >= 1")


@dataclass(frozen=True)
class ForallUntil(Formula):
    dirs: frozenset
    left: Formula
    bound: int
    right: Formula

    def __post_init__(self):
        object.__setattr__(self, "dirs", _check_dirs(self.dirs))
        if self.bound < 1:
            raise UsageError("until bound must be >= 1")


# Derived forms, desugared at construction time.

def or_(left: Formula, right: Formula) -> Formula:
    return Not(And(Not(left), Not(right)))


def exists_finally(dirs, bound: int, sub: Formula) -> Formula:
    return ExistsUntil(frozenset(dirs), Top(), bound, sub)


def forall_finally(dirs, bound: int, sub: Formula) -> Formula:
    return ForallUntil(frozenset(dirs), Top(), bound, sub)


def exists_globally(dirs, bound: int, sub: Formula) -> Formula:
    return Not(forall_finally(dirs, bound, Not(sub)))


def forall_globally(dirs, bound: int, sub: Formula) -> Formula:
    return Not(exists_finally(dirs, bound, Not(sub)))


def _dirs_text(dirs: frozenset) -> str:
    if dirs == ALL_DIRS:
        return "*"
    return "{" + ",".join(d for d in DIRECTIONS if d in dirs) + "}"


def to_text(phi: Formula) -> str:
    """Canonical concrete syntax; parsing it back yields an identical tree."""

    def render(node: Formula, parent_binds: bool) -> str:
        if isinstance(node, Top):
            return "true"
        if isinstance(node, Bottom):
            return "false"
        if isinstance(node, Atom):
            return f"({node.var} {node.op} {node.threshold!r})"
        if isinstance(node, Not):
            return "! " + render(node.sub, True)
        if isinstance(node, And):
            body = f"{render(node.left, True)} & {render(node.right, True)}"
            return f"({body})" if parent_binds else body
        if isinstance(node, ExistsNext):
            return f"E {_dirs_text(node.dirs)} X {render(node.sub, True)}"
        if isinstance(node, ForallNext):
            return f"A {_dirs_text(node.dirs)} X {render(node.sub, True)}"
        if isinstance(node, ExistsUntil):
            return (f"E {_dirs_text(node.dirs)} [ {render(node.left, False)} "
                    f"U {node.bound} {render(node.right, False)} ]")
        if isinstance(node, ForallUntil):
            return (f"A {_dirs_text(node.dirs)} [ {render(node.left, False)} "
                    f"U {node.bound} {render(node.right, False)} ]")
        raise UsageError(f"unknown formula node {type(node).__name__}")

    return render(phi, False)


def variables_of(phi: Formula) -> set[str]:
    out: set[str] = set()
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.var)
        elif isinstance(node, Not):
            stack.append(node.sub)
        elif isinstance(node, And):
            stack.extend((node.left, node.right))
        elif isinstance(node, (ExistsNext, ForallNext)):
            stack.append(node.sub)
        elif isinstance(node, (ExistsUntil, ForallUntil)):
            stack.extend((node.left, node.right))
    return out


def depth_of(phi: Formula) -> int:
    """Height of the tree counting every operator node."""
    if isinstance(phi, (Top, Bottom, Atom)):
        return 0
    if isinstance(phi, Not):
        return 1 + depth_of(phi.sub)
    if isinstance(phi, And):
        return 1 + max(depth_of(phi.left), depth_of(phi.right))
    if isinstance(phi, (ExistsNext, ForallNext)):
        return 1 + depth_of(phi.sub)
    return 1 + max(depth_of(phi.left), depth_of(phi.right))
