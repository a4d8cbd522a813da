"""Global-best particle swarm search over a parameter box, with the fitness
induced by the quantitative valuation of simulated steady-state patterns.

The induced fitness of a parameter point is the minimum valuation of the
formula over a finite set of initial conditions; trajectories that diverge
or never reach steady state contribute the worst value, pushing the swarm
away from non-settling regimes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, UsageError
from .quadtree import qts_from_observation
from .rdsim import (
    GridState,
    NotConverged,
    SteadyStateConfig,
    SystemParams,
    initial_state,
    simulate_to_steady,
)
from .tssl import value as tssl_value
from .tssl.syntax import Formula


@dataclass(frozen=True)
class SearchBox:
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise UsageError("search box needs at least one dimension")
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        for lo, hi in ivs:
            if lo > hi:
                raise UsageError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "intervals", ivs)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def lo(self) -> np.ndarray:
        return np.array([iv[0] for iv in self.intervals])

    @property
    def hi(self) -> np.ndarray:
        return np.array([iv[1] for iv in self.intervals])

    def contains(self, p) -> bool:
        p = np.asarray(p)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    @classmethod
    def parse(cls, text: str) -> "SearchBox":
        """Parse "lo,hi;lo,hi;..." into a box."""
        ivs = []
        for part in text.split(";"):
            bits = part.split(",")
            if len(bits) != 2:
                raise UsageError(f"bad interval {part!r} (want lo,hi)")
            ivs.append((float(bits[0]), float(bits[1])))
        return cls(tuple(ivs))


@dataclass(frozen=True)
class SwarmConfig:
    swarm_size: int = 20
    iterations: int = 50
    inertia: float = 0.7
    cognitive: float = 1.49
    social: float = 1.49
    velocity_clamp: float = 0.2  # fraction of box width per dimension
    seed: int = 0
    stop_when_positive: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.swarm_size < 2:
            raise UsageError("swarm size must be >= 2")
        if self.iterations < 1 or self.inertia <= 0 or self.cognitive <= 0 \
                or self.social <= 0 or self.velocity_clamp <= 0:
            raise UsageError("swarm settings must be positive")


@dataclass
class SwarmResult:
    best_point: np.ndarray
    best_value: float
    history: list[float]
    evaluations: int


def pso_maximize(fitness, box: SearchBox, cfg: SwarmConfig | None = None) -> SwarmResult:
    """Standard global-best PSO, maximizing. Deterministic given the seed;
    per-iteration fitness evaluations may run on a thread pool but results
    fold in particle order."""
    cfg = cfg or SwarmConfig()
    rng = np.random.default_rng(cfg.seed)
    lo, hi = box.lo, box.hi
    width = hi - lo
    vmax = cfg.velocity_clamp * np.where(width > 0, width, 1.0)

    # Latin hypercube start: one particle per axis-stratum, so small swarms
    # still cover narrow fitness ridges anywhere in the box.
    n = cfg.swarm_size
    pos = np.empty((n, box.dim))
    for d in range(box.dim):
        strata = (rng.permutation(n) + rng.random(n)) / n
        pos[:, d] = lo[d] + strata * width[d]
    vel = np.zeros_like(pos)

    def evaluate(points: np.ndarray) -> np.ndarray:
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                return np.array(list(pool.map(fitness, points)))
        return np.array([fitness(p) for p in points])

    fit = evaluate(pos)
    evaluations = len(pos)
    pbest = pos.copy()
    pbest_fit = fit.copy()
    g = int(np.argmax(fit))
    gbest = pos[g].copy()
    gbest_fit = float(fit[g])
    history = [gbest_fit]

    for _ in range(cfg.iterations):
        if cfg.stop_when_positive and gbest_fit > 0:
            break
        r1 = rng.random((cfg.swarm_size, box.dim))
        r2 = rng.random((cfg.swarm_size, box.dim))
        vel = (cfg.inertia * vel
               + cfg.cognitive * r1 * (pbest - pos)
               + cfg.social * r2 * (gbest - pos))
        np.clip(vel, -vmax, vmax, out=vel)
        pos = np.clip(pos + vel, lo, hi)
        fit = evaluate(pos)
        evaluations += len(pos)
        improved = fit > pbest_fit
        pbest[improved] = pos[improved]
        pbest_fit[improved] = fit[improved]
        g = int(np.argmax(pbest_fit))
        if pbest_fit[g] > gbest_fit:
            gbest_fit = float(pbest_fit[g])
            gbest = pbest[g].copy()
        history.append(gbest_fit)

    return SwarmResult(gbest, gbest_fit, history, evaluations)


@dataclass
class FitnessSpec:
    """Everything induced valuation needs: the parameter template with its
    free dimensions, the initial conditions (seeds or explicit states), the
    steady-state settings, the formula, and the QTS quantization."""

    template: SystemParams
    free_params: tuple[str, ...]  # e.g. ("D1", "D2") or ("R3",), 1-based
    formula: Formula
    x0_seeds: tuple[int, ...] = (0, 1, 2, 3)
    x0_states: tuple[GridState, ...] = ()
    steady: SteadyStateConfig = field(default_factory=SteadyStateConfig)
    quant_levels: int = 16

    def __post_init__(self):
        if not self.x0_seeds and not self.x0_states:
            raise UsageError("need at least one initial condition")
        for name in self.free_params:
            self._slot(name)

    def _slot(self, name: str) -> tuple[str, int]:
        kind, idx = name[0], name[1:]
        if kind not in ("D", "R") or not idx.isdigit() or int(idx) < 1:
            raise UsageError(f"bad free parameter name {name!r} (want D<i> or R<i>)")
        i = int(idx) - 1
        limit = self.template.N if kind == "D" else len(self.template.R)
        if i >= limit:
            raise UsageError(f"free parameter {name!r} out of range")
        return kind, i

    def instantiate(self, point) -> SystemParams:
        point = np.asarray(point, dtype=float)
        if len(point) != len(self.free_params):
            raise UsageError("parameter point does not match free dimensions")
        D = list(self.template.D)
        R = list(self.template.R)
        for name, v in zip(self.free_params, point):
            kind, i = self._slot(name)
            if kind == "D":
                D[i] = float(v)
            else:
                R[i] = float(v)
        return SystemParams(K=self.template.K, N=self.template.N, D=tuple(D),
                            R=tuple(R), dynamics_id=self.template.dynamics_id,
                            observable=self.template.observable,
                            toroidal=self.template.toroidal)

    def initial_conditions(self):
        for seed in self.x0_seeds:
            yield seed, None
        for state in self.x0_states:
            yield None, state


def induced_valuation(point, spec: FitnessSpec, box: SearchBox | None = None) -> float:
    """Minimum valuation of the formula over all initial conditions at the
    given parameter point; non-settling trajectories count as -b."""
    if box is not None and not box.contains(point):
        raise UsageError(f"point {np.asarray(point)} outside the search box")
    params = spec.instantiate(point)
    worst = None
    floor = -1.0  # -b for normalized observations
    for seed, state in spec.initial_conditions():
        x0 = state if state is not None else initial_state(params, seed)
        try:
            result = simulate_to_steady(params, x0, spec.steady, rng_seed=seed)
        except DivergenceError:
            result = None
        if result is None or isinstance(result, NotConverged):
            v = floor
        else:
            qts = qts_from_observation(result, spec.quant_levels)
            v = tssl_value(qts, spec.formula)
        worst = v if worst is None else min(worst, v)
        if worst == floor:
            break
    return float(worst)


@dataclass
class SynthesisResult:
    p_star: np.ndarray
    gamma: float
    history: list[float]
    evaluations: int

    def to_dict(self) -> dict:
        return {"p_star": [float(v) for v in self.p_star],
                "gamma": self.gamma,
                "history": self.history,
                "evaluations": self.evaluations}


def synthesize(spec: FitnessSpec, box: SearchBox,
               cfg: SwarmConfig | None = None) -> SynthesisResult:
    """Search the box for parameters maximizing the induced valuation. A
    positive result certifies that every tested initial condition yields a
    pattern satisfying the formula."""
    if box.dim != len(spec.free_params):
        raise UsageError("box dimension does not match free parameters")
    result = pso_maximize(lambda p: induced_valuation(p, spec), box, cfg)
    return SynthesisResult(result.best_point, result.best_value,
                           result.history, result.evaluations)
