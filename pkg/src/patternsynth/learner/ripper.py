"""Sequential-covering rule induction in the RIPPER style.

Rules for the "+" class are grown one literal at a time on a 2/3 split,
choosing the threshold literal with the best FOIL information gain, then
pruned on the held-out 1/3 by deleting the worst final literal sequence.
Rule addition stops on the description-length heuristic (total DL more
than 64 bits above the best seen) or when a pruned rule misclassifies
half of what it covers. Covered positives are removed after each rule;
negatives always stay in play. An optimization round re-grows each rule
(replacement and revision) and keeps the variant with the smallest DL.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from .features import FeatureSpace
from .rules import Literal, Rule, RuleSet

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RipperConfig:
    seed: int = 0
    grow_fraction: float = 2.0 / 3.0
    dl_budget: float = 64.0
    optimization_rounds: int = 1
    max_rules: int = 64


@dataclass(frozen=True)
class _Cond:
    """Column-index literal used during induction."""

    col: int
    op: str
    threshold: float

    def mask(self, X: np.ndarray) -> np.ndarray:
        v = X[:, self.col]
        return v <= self.threshold if self.op == "<=" else v >= self.threshold


def _stratified_split(y: np.ndarray, frac: float, rng: np.random.Generator):
    grow = np.zeros(len(y), dtype=bool)
    for cls in (True, False):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        n_grow = int(round(frac * len(idx)))
        grow[idx[:n_grow]] = True
    return grow


def _foil_gain(p0: float, n0: float, p1, n1):
    # p1 * (log2(p1/(p1+n1)) - log2(p0/(p0+n0))), vectorized over p1/n1
    with np.errstate(divide="ignore", invalid="ignore"):
        new_info = np.log(p1 / (p1 + n1)) / _LOG2
        old_info = math.log(p0 / (p0 + n0)) / _LOG2 if p0 > 0 else 0.0
        gain = p1 * (new_info - old_info)
    return np.where(p1 > 0, gain, -np.inf)


def _best_literal(X: np.ndarray, y: np.ndarray, covered: np.ndarray):
    """Best (gain, condition) over all midpoint thresholds of all columns,
    restricted to currently covered examples. Deterministic tie-break:
    lowest column, '>=' before '<=', lowest threshold."""
    idx = np.flatnonzero(covered)
    yc = y[idx]
    p0 = float(yc.sum())
    n0 = float(len(yc) - p0)
    best = (-np.inf, None)
    for col in range(X.shape[1]):
        v = X[idx, col]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ys = yc[order]
        distinct = np.flatnonzero(np.diff(vs) > 0)
        if len(distinct) == 0:
            continue
        mids = (vs[distinct] + vs[distinct + 1]) / 2.0
        pos_prefix = np.cumsum(ys)  # positives among the first i+1 sorted
        total_pos = pos_prefix[-1]
        le_count = distinct + 1.0
        le_pos = pos_prefix[distinct].astype(float)
        le_neg = le_count - le_pos
        ge_pos = float(total_pos) - le_pos
        ge_neg = (len(ys) - le_count) - ge_pos
        for op, p1, n1 in ((">=", ge_pos, ge_neg), ("<=", le_pos, le_neg)):
            gains = _foil_gain(p0, n0, p1, n1)
            j = int(np.argmax(gains))
            # prefer the lowest threshold among equal gains
            ties = np.flatnonzero(gains == gains[j])
            j = int(ties[0])
            if gains[j] > best[0]:
                best = (float(gains[j]), _Cond(col, op, float(mids[j])))
    return best


def _grow_rule(X, y, grow_mask, base: list[_Cond] | None = None) -> list[_Cond]:
    conds = list(base or [])
    covered = grow_mask.copy()
    for c in conds:
        covered &= c.mask(X)
    while True:
        pos = int(y[covered].sum())
        neg = int(covered.sum()) - pos
        if neg == 0 or pos == 0:
            break
        gain, cond = _best_literal(X, y, covered)
        if cond is None or gain <= 0:
            break
        conds.append(cond)
        covered &= cond.mask(X)
    return conds


def _prune_metric(conds: list[_Cond], X, y, prune_mask) -> float:
    covered = prune_mask.copy()
    for c in conds:
        covered &= c.mask(X)
    p = float(y[covered].sum())
    n = float(covered.sum()) - p
    if p + n == 0:
        return 0.0
    return (p - n) / (p + n)


def _prune_rule(conds: list[_Cond], X, y, prune_mask) -> list[_Cond]:
    """Drop the final literal sequence that most improves the prune metric,
    repeatedly; at least one literal survives."""
    conds = list(conds)
    while len(conds) > 1:
        current = _prune_metric(conds, X, y, prune_mask)
        best_keep, best_v = None, current
        for keep in range(1, len(conds)):
            v = _prune_metric(conds[:keep], X, y, prune_mask)
            if v > best_v or (v == best_v and best_keep is not None and keep < best_keep):
                best_keep, best_v = keep, v
        if best_keep is None:
            break
        conds = conds[:best_keep]
    return conds


def _subset_dl(t: float, k: float, p: float) -> float:
    """Bits to identify a k-subset of t items under expected proportion p."""
    if t <= 0 or k <= 0:
        return 0.0
    p = min(max(p, 1e-10), 1 - 1e-10)
    return (-k * math.log(p) - (t - k) * math.log(1.0 - p)) / _LOG2


def _theory_dl(n_conds: int, n_possible: int) -> float:
    if n_conds == 0:
        return 0.0
    bits = math.log(n_conds) / _LOG2 if n_conds > 1 else 1.0
    bits += _subset_dl(n_possible, n_conds, n_conds / max(n_possible, n_conds + 1))
    return 0.5 * bits  # redundancy factor


def _data_dl(total: int, fp: int, fn: int, covered: int) -> float:
    uncovered = total - covered
    bits = math.log(total + 1) / _LOG2
    exp_err = 0.5 * (fp + fn)
    if covered > uncovered:
        bits += _subset_dl(covered, fp, exp_err / covered if covered else 0.5)
        bits += _subset_dl(uncovered, fn, fn / uncovered if uncovered else 0.5)
    else:
        bits += _subset_dl(covered, fp, fp / covered if covered else 0.5)
        bits += _subset_dl(uncovered, fn, exp_err / uncovered if uncovered else 0.5)
    return bits


def _ruleset_stats(rule_conds: list[list[_Cond]], X, y):
    covered = np.zeros(len(y), dtype=bool)
    for conds in rule_conds:
        m = np.ones(len(y), dtype=bool)
        for c in conds:
            m &= c.mask(X)
        covered |= m
    fp = int((covered & ~y).sum())
    fn = int((~covered & y).sum())
    return covered, fp, fn


def _total_dl(rule_conds: list[list[_Cond]], X, y, n_possible: int) -> float:
    covered, fp, fn = _ruleset_stats(rule_conds, X, y)
    dl = _data_dl(len(y), fp, fn, int(covered.sum()))
    for conds in rule_conds:
        dl += _theory_dl(len(conds), n_possible)
    return dl


def _count_possible_conditions(X: np.ndarray) -> int:
    n = 0
    for col in range(X.shape[1]):
        n += 2 * max(len(np.unique(X[:, col])) - 1, 0)
    return max(n, 1)


def _covers_mask(conds: list[_Cond], X) -> np.ndarray:
    m = np.ones(len(X), dtype=bool)
    for c in conds:
        m &= c.mask(X)
    return m


def learn_rule_conds(X: np.ndarray, y: np.ndarray, cfg: RipperConfig) -> list[list[_Cond]]:
    """Core induction on a feature matrix; returns per-rule condition lists."""
    rng = np.random.default_rng(cfg.seed)
    n_possible = _count_possible_conditions(X)
    rule_conds: list[list[_Cond]] = []
    active = np.ones(len(y), dtype=bool)  # uncovered positives + all negatives
    min_dl = _total_dl([], X, y, n_possible)

    while (y & active).any() and len(rule_conds) < cfg.max_rules:
        sub = np.flatnonzero(active)
        grow_sel = _stratified_split(y[sub], cfg.grow_fraction, rng)
        grow_mask = np.zeros(len(y), dtype=bool)
        prune_mask = np.zeros(len(y), dtype=bool)
        grow_mask[sub[grow_sel]] = True
        prune_mask[sub[~grow_sel]] = True
        if not (y & grow_mask).any():
            break
        conds = _grow_rule(X, y, grow_mask)
        if not conds:
            break
        if prune_mask.any():
            conds = _prune_rule(conds, X, y, prune_mask)
        # stop if the pruned rule is wrong on half of what it covers
        pm = _covers_mask(conds, X) & prune_mask
        p = int(y[pm].sum())
        n = int(pm.sum()) - p
        if p + n > 0 and n >= p:
            break
        covers = _covers_mask(conds, X)
        if not (covers & active & y).any():
            break
        dl = _total_dl(rule_conds + [conds], X, y, n_possible)
        if dl > min_dl + cfg.dl_budget:
            break
        min_dl = min(min_dl, dl)
        rule_conds.append(conds)
        active &= ~(covers & y)  # drop covered positives, keep negatives

    for rounds in range(cfg.optimization_rounds):
        rule_conds = _optimize(rule_conds, X, y, cfg, rng, n_possible)
    return rule_conds


def _optimize(rule_conds, X, y, cfg, rng, n_possible):
    out = list(rule_conds)
    for i in range(len(out)):
        others = out[:i] + out[i + 1 :]
        covered_by_others, _, _ = _ruleset_stats(others, X, y)
        context = ~(covered_by_others & y)  # positives left to this rule + all negatives
        sub = np.flatnonzero(context)
        if not (y[sub]).any():
            continue
        grow_sel = _stratified_split(y[sub], cfg.grow_fraction, rng)
        grow_mask = np.zeros(len(y), dtype=bool)
        prune_mask = np.zeros(len(y), dtype=bool)
        grow_mask[sub[grow_sel]] = True
        prune_mask[sub[~grow_sel]] = True
        candidates = [out[i]]
        replacement = _grow_rule(X, y, grow_mask)
        if replacement:
            candidates.append(_prune_rule(replacement, X, y, prune_mask)
                              if prune_mask.any() else replacement)
        revision = _grow_rule(X, y, grow_mask, base=out[i])
        if revision:
            candidates.append(_prune_rule(revision, X, y, prune_mask)
                              if prune_mask.any() else revision)
        dls = [_total_dl(out[:i] + [cand] + out[i + 1 :], X, y, n_possible)
               for cand in candidates]
        out[i] = candidates[int(np.argmin(dls))]
    # keep only rules that still cover a positive not covered by earlier rules
    kept: list[list[_Cond]] = []
    remaining = y.copy()
    for conds in out:
        m = _covers_mask(conds, X)
        if (m & remaining).any():
            kept.append(conds)
            remaining &= ~m
    return kept


def conds_to_rule(conds: list[_Cond], space: FeatureSpace, label: str = "+") -> Rule:
    lits = []
    for c in conds:
        addr, channel = space.columns[c.col]
        lits.append(Literal(addr, channel, c.op, c.threshold))
    return Rule(lits, label)


def learn_ruleset_from_matrix(X: np.ndarray, y: np.ndarray, space: FeatureSpace,
                              cfg: RipperConfig | None = None) -> RuleSet:
    """Ordered "+" rules with a "-" default; degenerates to a default-only
    set (with a warning) when the input holds a single class."""
    cfg = cfg or RipperConfig()
    if X.ndim != 2 or len(X) != len(y):
        raise UsageError("feature matrix and labels disagree")
    if not y.any():
        warnings.warn("training data has no positive examples; default-only ruleset")
        return RuleSet([], "-")
    if y.all():
        warnings.warn("training data has no negative examples; default-only ruleset")
        return RuleSet([], "+")
    rule_conds = learn_rule_conds(X, np.asarray(y, dtype=bool), cfg)
    return RuleSet([conds_to_rule(c, space) for c in rule_conds], "-")
