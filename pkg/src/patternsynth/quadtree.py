"""Quad-tree decomposition of observations and the derived quad transition
system (QTS).

A quad-tree splits a 2^k x 2^k multi-channel matrix into NW/NE/SE/SW
quadrants until a block is uniform. Uniformity and state equivalence are
decided on values quantized into `quant_levels` bins (exact equality of
floats is vacuous on simulated data); stored means are unquantized.

The QTS merges equivalent vertices into states: leaves merge when their
quantized means agree; interior vertices merge when both their quantized
means and their direction -> child-state maps agree. Every leaf state
carries a self-loop labeled with all four directions, so the transition
relation is non-blocking and sibling labels partition the direction set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .rdsim import Observation

DIRECTIONS = ("NW", "NE", "SE", "SW")
ALL_DIRS = frozenset(DIRECTIONS)


def _as_values(obs) -> np.ndarray:
    values = obs.values if isinstance(obs, Observation) else np.asarray(obs, dtype=float)
    if values.ndim == 2:
        values = values[:, :, None]
    if values.ndim != 3 or values.shape[0] != values.shape[1]:
        raise UsageError("observation must be a square (side, side[, channels]) array")
    side = values.shape[0]
    if side < 2 or side & (side - 1):
        raise UsageError(f"observation side must be a power of two >= 2, got {side}")
    return values


def quantize(values: np.ndarray, quant_levels: int, value_bound: float = 1.0) -> np.ndarray:
    """Uniform bins over [0, value_bound]; the top edge folds into the last bin."""
    bins = np.floor(np.asarray(values) / value_bound * quant_levels).astype(np.int64)
    return np.clip(bins, 0, quant_levels - 1)


@dataclass
class QuadVertex:
    """One sub-matrix: half-open row/col bounds, per-channel means, and the
    four children (empty for leaves), keyed by direction."""

    i0: int
    i1: int
    j0: int
    j1: int
    depth: int
    means: tuple[float, ...]
    qmeans: tuple[int, ...]
    children: dict[str, "QuadVertex"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def side(self) -> int:
        return self.i1 - self.i0


class QuadTree:
    def __init__(self, root: QuadVertex, side: int, channels: int, quant_levels: int,
                 value_bound: float = 1.0):
        self.root = root
        self.side = side
        self.channels = channels
        self.quant_levels = quant_levels
        self.value_bound = value_bound

    def vertices(self):
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(v.children[d] for d in DIRECTIONS if v.children)

    def vertex_count(self) -> int:
        return sum(1 for _ in self.vertices())

    def depth(self) -> int:
        return max(v.depth for v in self.vertices())


def build_quadtree(obs, quant_levels: int = 16, value_bound: float = 1.0) -> QuadTree:
    """Recursive four-way split; a block becomes a leaf when every covered
    quantized value coincides. Means are exact block means of the raw values."""
    if quant_levels < 2:
        raise UsageError("quant_levels must be >= 2")
    values = _as_values(obs)
    side, channels = values.shape[0], values.shape[2]
    q = quantize(values, quant_levels, value_bound)

    def build(i0, i1, j0, j1, depth) -> QuadVertex:
        block = values[i0:i1, j0:j1]
        qblock = q[i0:i1, j0:j1]
        means = tuple(float(m) for m in block.mean(axis=(0, 1)))
        qmeans = tuple(int(b) for b in qblock[0, 0])
        v = QuadVertex(i0, i1, j0, j1, depth, means, qmeans)
        if np.all(qblock == qblock[0, 0]):
            return v
        im, jm = (i0 + i1) // 2, (j0 + j1) // 2
        v.children = {
            "NW": build(i0, im, j0, jm, depth + 1),
            "NE": build(i0, im, jm, j1, depth + 1),
            "SE": build(im, i1, jm, j1, depth + 1),
            "SW": build(im, i1, j0, jm, depth + 1),
        }
        # A split vertex is not uniform; its bin is the bin of its mean.
        v.qmeans = tuple(int(b) for b in quantize(np.array(means), quant_levels, value_bound))
        return v

    root = build(0, side, 0, side, 0)
    return QuadTree(root, side, channels, quant_levels, value_bound)


def mean(vertex: QuadVertex, channel: int) -> float:
    """Stored per-channel mean of the vertex's sub-matrix."""
    if not (0 <= channel < len(vertex.means)):
        raise UsageError(f"channel {channel} out of range")
    return vertex.means[channel]


class QTS:
    """Finite transition system over merged quad-tree vertices.

    states are integers 0..n-1; `values[s]` holds the per-variable valuation
    of state s; `labels[s]` maps each successor to its direction set.
    """

    def __init__(self, values: list[tuple[float, ...]],
                 labels: list[dict[int, frozenset]],
                 initial: int,
                 variables: list[str] | None = None,
                 value_bound: float = 1.0,
                 side: int | None = None):
        self.values = values
        self.labels = labels
        self.initial = initial
        self.value_bound = value_bound
        self.side = side  # observation side when built from one
        o = len(values[0]) if values else 0
        self.variables = variables or [f"m{c + 1}" for c in range(o)]

    @property
    def n_states(self) -> int:
        return len(self.values)

    def var_index(self, name: str) -> int:
        if name == "m":
            name = "m1"
        try:
            return self.variables.index(name)
        except ValueError:
            raise UsageError(
                f"unknown variable '{name}' (have {', '.join(self.variables)})") from None

    def value_of(self, state: int, var_index: int) -> float:
        return self.values[state][var_index]

    def successors(self, state: int, dirs: frozenset | set) -> list[int]:
        """States reachable in one step along a transition whose label
        intersects `dirs` (the one-step kernel of direction-labeled paths)."""
        if not dirs:
            raise UsageError("direction set must be non-empty")
        if not set(dirs) <= ALL_DIRS:
            raise UsageError(f"unknown directions {set(dirs) - ALL_DIRS}")
        return [t for t, lbl in self.labels[state].items() if lbl & dirs]

    def successor_along(self, state: int, direction: str) -> int:
        for t, lbl in self.labels[state].items():
            if direction in lbl:
                return t
        raise UsageError(f"state {state} has no successor along {direction}")

    def has_self_loop(self, state: int) -> bool:
        return state in self.labels[state]

    def validate(self) -> None:
        """Check the structural invariants: non-blocking, branching <= 4,
        sibling labels disjoint and jointly covering all four directions."""
        for s in range(self.n_states):
            succ = self.labels[s]
            if not succ:
                raise UsageError(f"state {s} is blocking")
            if len(succ) > 4:
                raise UsageError(f"state {s} has {len(succ)} successors")
            seen: set = set()
            for t, lbl in succ.items():
                if not lbl:
                    raise UsageError(f"empty label on {s}->{t}")
                if lbl & seen:
                    raise UsageError(f"overlapping labels out of state {s}")
                seen |= lbl
            if seen != ALL_DIRS:
                raise UsageError(f"labels out of state {s} do not cover all directions")

    def to_text(self) -> str:
        lines = [f"qts states={self.n_states} initial={self.initial} "
                 f"vars={','.join(self.variables)} bound={self.value_bound:g}"]
        for s in range(self.n_states):
            vals = " ".join(f"{name}={v:.6f}" for name, v in zip(self.variables, self.values[s]))
            lines.append(f"s{s} {vals}")
        for s in range(self.n_states):
            for t in sorted(self.labels[s]):
                dirs = ",".join(d for d in DIRECTIONS if d in self.labels[s][t])
                lines.append(f"s{s} --{{{dirs}}}--> s{t}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QTS":
        """Inverse of to_text (valuations carry its 6-decimal precision)."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("qts "):
            raise UsageError("QTS text must start with a 'qts ...' header line")
        header = dict(part.split("=", 1) for part in lines[0].split()[1:])
        n = int(header["states"])
        initial = int(header["initial"])
        variables = header["vars"].split(",")
        bound = float(header.get("bound", 1.0))
        values: list[tuple[float, ...]] = [()] * n
        labels: list[dict[int, frozenset]] = [dict() for _ in range(n)]
        for line in lines[1:]:
            if "-->" in line:
                src, rest = line.split("--{", 1)
                dirs_text, dst = rest.split("}-->", 1)
                s = int(src.strip()[1:])
                t = int(dst.strip()[1:])
                dirs = frozenset(d.strip() for d in dirs_text.split(","))
                if not dirs <= ALL_DIRS:
                    raise UsageError(f"bad transition label in {line!r}")
                labels[s][t] = dirs
            else:
                parts = line.split()
                s = int(parts[0][1:])
                vals = []
                for p in parts[1:]:
                    name, v = p.split("=", 1)
                    vals.append(float(v))
                values[s] = tuple(vals)
        qts = cls(values, labels, initial, variables=variables, value_bound=bound)
        qts.validate()
        return qts

    def to_dot(self) -> str:
        lines = ["digraph qts {", "  rankdir=TB;"]
        for s in range(self.n_states):
            vals = "\\n".join(f"{nm}={v:.3f}" for nm, v in zip(self.variables, self.values[s]))
            shape = "doublecircle" if s == self.initial else "circle"
            lines.append(f'  s{s} [shape={shape}, label="s{s}\\n{vals}"];')
        for s in range(self.n_states):
            for t in sorted(self.labels[s]):
                dirs = ",".join(d for d in DIRECTIONS if d in self.labels[s][t])
                lines.append(f'  s{s} -> s{t} [label="{dirs}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_qts(qt: QuadTree) -> QTS:
    """Merge equivalent vertices bottom-up and wire direction-labeled
    transitions parent -> child; leaf states get self-loops on all
    directions. The valuation of a merged state is the (unquantized) mean
    vector of its first-seen representative vertex."""
    table: dict[tuple, int] = {}
    values: list[tuple[float, ...]] = []
    succs: list[dict[str, int] | None] = []  # direction -> child state, None for leaves

    def state_of(v: QuadVertex) -> int:
        if v.is_leaf:
            key = ("leaf", v.qmeans)
            child_map = None
        else:
            child_map = {d: state_of(v.children[d]) for d in DIRECTIONS}
            key = ("node", v.qmeans, tuple(child_map[d] for d in DIRECTIONS))
        sid = table.get(key)
        if sid is None:
            sid = len(values)
            table[key] = sid
            values.append(v.means)
            succs.append(child_map)
        return sid

    initial = state_of(qt.root)
    labels: list[dict[int, frozenset]] = []
    for sid, child_map in enumerate(succs):
        if child_map is None:
            labels.append({sid: ALL_DIRS})
            continue
        by_target: dict[int, set] = {}
        for d, t in child_map.items():
            by_target.setdefault(t, set()).add(d)
        labels.append({t: frozenset(ds) for t, ds in by_target.items()})
    return QTS(values, labels, initial, value_bound=qt.value_bound, side=qt.side)


def lpaths_successors(qts: QTS, state: int, dirs) -> set[int]:
    """One-step successors of `state` along transitions labeled within `dirs`."""
    return set(qts.successors(state, frozenset(dirs)))


def qts_from_observation(obs, quant_levels: int = 16, value_bound: float = 1.0) -> QTS:
    return build_qts(build_quadtree(obs, quant_levels, value_bound))
