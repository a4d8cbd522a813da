"""Rule learning over quad-tree address features and translation to formulas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from .evaluate import Metrics, evaluate_classifier
from .features import (
    Address,
    FeatureSpace,
    FeatureVector,
    all_addresses,
    extract_features,
    format_address,
    parse_address,
)
from .ripper import RipperConfig, learn_ruleset_from_matrix
from .rules import Literal, Rule, RuleSet, parse_ruleset, read_ruleset, write_ruleset
from .translate import literal_to_formula, rule_body_formula, ruleset_to_tssl


@dataclass(frozen=True)
class LearnerConfig:
    max_depth: int = 4
    quant_levels: int = 16
    seed: int = 0
    optimization_rounds: int = 1

    def ripper(self) -> RipperConfig:
        return RipperConfig(seed=self.seed, optimization_rounds=self.optimization_rounds)


def learn_ruleset(train: list[tuple], cfg: LearnerConfig | None = None) -> RuleSet:
    """Induce an ordered rule set from (observation-or-QTS, label) pairs."""
    cfg = cfg or LearnerConfig()
    if not train:
        raise UsageError("training set must be non-empty")
    fvs = [extract_features(item, cfg.max_depth, cfg.quant_levels) for item, _ in train]
    channels = fvs[0].channels
    space = FeatureSpace.build(cfg.max_depth, channels)
    X = space.matrix(fvs)
    y = np.array([label == "+" for _, label in train])
    return learn_ruleset_from_matrix(X, y, space, cfg.ripper())


def split_dataset(items: list[tuple], seed: int = 0, train_fraction: float = 0.5):
    """Stratified disjoint train/test split, deterministic given the seed."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    labels = sorted({label for _, label in items})
    for lbl in labels:
        idx = [i for i, (_, l) in enumerate(items) if l == lbl]
        order = rng.permutation(len(idx))
        cut = int(round(train_fraction * len(idx)))
        train.extend(items[idx[i]] for i in order[:cut])
        test.extend(items[idx[i]] for i in order[cut:])
    return train, test


__all__ = [
    "Address",
    "FeatureSpace",
    "FeatureVector",
    "LearnerConfig",
    "Literal",
    "Metrics",
    "RipperConfig",
    "Rule",
    "RuleSet",
    "all_addresses",
    "evaluate_classifier",
    "extract_features",
    "format_address",
    "learn_ruleset",
    "literal_to_formula",
    "parse_address",
    "parse_ruleset",
    "read_ruleset",
    "rule_body_formula",
    "ruleset_to_tssl",
    "split_dataset",
    "write_ruleset",
]
