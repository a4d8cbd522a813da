"""Per-address mean features read through a quad transition system.

An address is a sequence of zoom directions from the root (the empty
address). The feature value at an address is the valuation of the QTS
state reached by following it, which keeps learned thresholds and the
formula translation in exact agreement with the model checker: once a
walk enters a uniform leaf, deeper addresses keep the leaf's value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from ..quadtree import DIRECTIONS, QTS, qts_from_observation

Address = tuple[str, ...]


def all_addresses(max_depth: int) -> list[Address]:
    """Every address of length <= max_depth, shallow first, NW/NE/SE/SW order."""
    out: list[Address] = [()]
    frontier: list[Address] = [()]
    for _ in range(max_depth):
        frontier = [addr + (d,) for addr in frontier for d in DIRECTIONS]
        out.extend(frontier)
    return out


def format_address(addr: Address, channel: int = 0) -> str:
    base = ".".join(("R",) + addr)
    return base if channel == 0 else f"{base}:m{channel + 1}"


def parse_address(text: str) -> tuple[Address, int]:
    channel = 0
    if ":" in text:
        text, chan = text.split(":", 1)
        if not chan.startswith("m") or not chan[1:].isdigit() or int(chan[1:]) < 1:
            raise UsageError(f"bad channel suffix in address {text!r}")
        channel = int(chan[1:]) - 1
    parts = text.split(".")
    if parts[0] != "R":
        raise UsageError(f"address must start with R, got {text!r}")
    for p in parts[1:]:
        if p not in DIRECTIONS:
            raise UsageError(f"bad direction {p!r} in address {text!r}")
    return tuple(parts[1:]), channel


@dataclass
class FeatureVector:
    """Address -> per-channel mean values, complete up to `depth`."""

    depth: int
    values: dict[Address, tuple[float, ...]]

    def get(self, addr: Address, channel: int = 0) -> float:
        return self.values[addr][channel]

    @property
    def channels(self) -> int:
        return len(self.values[()])


def _qts_of(obs_or_qts, quant_levels: int) -> QTS:
    if isinstance(obs_or_qts, QTS):
        return obs_or_qts
    return qts_from_observation(obs_or_qts, quant_levels)


def extract_features(obs_or_qts, max_depth: int, quant_levels: int = 16) -> FeatureVector:
    """Walk the QTS down all addresses of length <= max_depth."""
    qts = _qts_of(obs_or_qts, quant_levels)
    if qts.side is not None:
        k = qts.side.bit_length() - 1
        if max_depth > k:
            raise UsageError(f"max_depth {max_depth} exceeds tree depth {k}")
    values: dict[Address, tuple[float, ...]] = {}
    state_at: dict[Address, int] = {(): qts.initial}
    values[()] = qts.values[qts.initial]
    frontier = [()]
    for _ in range(max_depth):
        nxt = []
        for addr in frontier:
            s = state_at[addr]
            for d in DIRECTIONS:
                child_addr = addr + (d,)
                t = qts.successor_along(s, d)
                state_at[child_addr] = t
                values[child_addr] = qts.values[t]
                nxt.append(child_addr)
        frontier = nxt
    return FeatureVector(max_depth, values)


@dataclass
class FeatureSpace:
    """Fixed ordering of (address, channel) columns for matrix form."""

    depth: int
    channels: int
    columns: list[tuple[Address, int]]

    @classmethod
    def build(cls, depth: int, channels: int) -> "FeatureSpace":
        cols = [(addr, c) for addr in all_addresses(depth) for c in range(channels)]
        return cls(depth, channels, cols)

    def vectorize(self, fv: FeatureVector) -> np.ndarray:
        return np.array([fv.values[addr][c] for addr, c in self.columns])

    def matrix(self, fvs: list[FeatureVector]) -> np.ndarray:
        return np.vstack([self.vectorize(fv) for fv in fvs])
