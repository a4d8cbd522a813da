"""Shared test utilities: random well-formed QTSs, random formulas, and a
naive evaluator that enumerates direction-labeled paths explicitly.

The naive evaluator is deliberately independent of the production
recursion: until is computed by unrolling every labeled path to the bound
and applying the witness-index definition directly.
"""

from __future__ import annotations

import numpy as np

from patternsynth.quadtree import DIRECTIONS, QTS
from patternsynth.tssl import syntax as S


def random_qts(rng: np.random.Generator, n_states: int, channels: int = 1,
               value_bound: float = 1.0) -> QTS:
    """Random QTS honoring the structural invariants: every state assigns
    each of the four directions to one of its successors."""
    values = [tuple(float(v) for v in rng.uniform(0, value_bound, channels))
              for _ in range(n_states)]
    labels: list[dict[int, frozenset]] = []
    for _ in range(n_states):
        n_succ = int(rng.integers(1, 5))
        targets = rng.integers(0, n_states, n_succ)
        assignment: dict[int, set] = {}
        # every successor gets one direction, leftovers spread randomly
        order = rng.permutation(4)
        for i, d_idx in enumerate(order):
            t = int(targets[i % n_succ]) if i < n_succ else int(rng.choice(targets))
            assignment.setdefault(t, set()).add(DIRECTIONS[d_idx])
        labels.append({t: frozenset(ds) for t, ds in assignment.items()})
    qts = QTS(values, labels, initial=int(rng.integers(0, n_states)),
              value_bound=value_bound)
    qts.validate()
    return qts


def random_dirs(rng: np.random.Generator) -> frozenset:
    n = int(rng.integers(1, 5))
    return frozenset(rng.choice(DIRECTIONS, n, replace=False))


def random_formula(rng: np.random.Generator, depth: int, channels: int = 1) -> S.Formula:
    """Random formula of operator-nesting depth <= depth, using the derived
    constructors as well so desugaring stays covered."""
    def atom() -> S.Formula:
        r = rng.random()
        if r < 0.1:
            return S.Top()
        if r < 0.2:
            return S.Bottom()
        var = f"m{int(rng.integers(1, channels + 1))}"
        op = "<=" if rng.random() < 0.5 else ">="
        return S.Atom(var, op, float(rng.uniform(0, 1)))

    def build(d: int) -> S.Formula:
        if d == 0:
            return atom()
        kind = rng.choice(["not", "and", "or", "ex", "ax", "eu", "au",
                           "ef", "af", "eg", "ag", "atom"])
        if kind == "atom":
            return atom()
        if kind == "not":
            return S.Not(build(d - 1))
        if kind == "and":
            return S.And(build(d - 1), build(d - 1))
        if kind == "or":
            return S.or_(build(d - 1), build(d - 1))
        dirs = random_dirs(rng)
        k = int(rng.integers(1, 4))
        if kind == "ex":
            return S.ExistsNext(dirs, build(d - 1))
        if kind == "ax":
            return S.ForallNext(dirs, build(d - 1))
        if kind == "eu":
            return S.ExistsUntil(dirs, build(d - 1), k, build(d - 1))
        if kind == "au":
            return S.ForallUntil(dirs, build(d - 1), k, build(d - 1))
        if kind == "ef":
            return S.exists_finally(dirs, k, build(d - 1))
        if kind == "af":
            return S.forall_finally(dirs, k, build(d - 1))
        if kind == "eg":
            return S.exists_globally(dirs, k, build(d - 1))
        return S.forall_globally(dirs, k, build(d - 1))

    return build(depth)


def _b_paths(qts: QTS, state: int, dirs: frozenset, length: int) -> list[list[int]]:
    if length == 0:
        return [[state]]
    out = []
    for t in qts.successors(state, dirs):
        for rest in _b_paths(qts, t, dirs, length - 1):
            out.append([state] + rest)
    return out


def naive_check(qts: QTS, phi: S.Formula, state: int | None = None) -> bool:
    s = qts.initial if state is None else state

    if isinstance(phi, S.Top):
        return True
    if isinstance(phi, S.Bottom):
        return False
    if isinstance(phi, S.Atom):
        v = qts.value_of(s, qts.var_index(phi.var))
        return v <= phi.threshold if phi.op == "<=" else v >= phi.threshold
    if isinstance(phi, S.Not):
        return not naive_check(qts, phi.sub, s)
    if isinstance(phi, S.And):
        return naive_check(qts, phi.left, s) and naive_check(qts, phi.right, s)
    if isinstance(phi, S.ExistsNext):
        return any(naive_check(qts, phi.sub, t) for t in qts.successors(s, phi.dirs))
    if isinstance(phi, S.ForallNext):
        return all(naive_check(qts, phi.sub, t) for t in qts.successors(s, phi.dirs))

    def path_sat(path: list[int]) -> bool:
        return any(
            naive_check(qts, phi.right, path[i])
            and all(naive_check(qts, phi.left, path[j]) for j in range(i))
            for i in range(1, phi.bound + 1))

    paths = _b_paths(qts, s, phi.dirs, phi.bound)
    if isinstance(phi, S.ExistsUntil):
        return any(path_sat(p) for p in paths)
    if isinstance(phi, S.ForallUntil):
        return all(path_sat(p) for p in paths)
    raise AssertionError(f"unknown node {type(phi).__name__}")


def naive_value(qts: QTS, phi: S.Formula, state: int | None = None) -> float:
    s = qts.initial if state is None else state
    b = qts.value_bound

    if isinstance(phi, S.Top):
        return b
    if isinstance(phi, S.Bottom):
        return -b
    if isinstance(phi, S.Atom):
        v = qts.value_of(s, qts.var_index(phi.var))
        return phi.threshold - v if phi.op == "<=" else v - phi.threshold
    if isinstance(phi, S.Not):
        return -naive_value(qts, phi.sub, s)
    if isinstance(phi, S.And):
        return min(naive_value(qts, phi.left, s), naive_value(qts, phi.right, s))
    if isinstance(phi, S.ExistsNext):
        return 0.25 * max(naive_value(qts, phi.sub, t)
                          for t in qts.successors(s, phi.dirs))
    if isinstance(phi, S.ForallNext):
        return 0.25 * min(naive_value(qts, phi.sub, t)
                          for t in qts.successors(s, phi.dirs))

    def path_value(path: list[int]) -> float:
        best = -float("inf")
        for i in range(1, phi.bound + 1):
            term = 0.25 ** i * naive_value(qts, phi.right, path[i])
            for j in range(i):
                term = min(term, 0.25 ** j * naive_value(qts, phi.left, path[j]))
            best = max(best, term)
        return best

    paths = _b_paths(qts, s, phi.dirs, phi.bound)
    if isinstance(phi, S.ExistsUntil):
        return max(path_value(p) for p in paths)
    if isinstance(phi, S.ForallUntil):
        return min(path_value(p) for p in paths)
    raise AssertionError(f"unknown node {type(phi).__name__}")
