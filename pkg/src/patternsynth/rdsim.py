"""Locally coupled reaction-diffusion grid simulator.

A K x K grid of identical ODE systems, coupled through the mean of the
von Neumann neighborhood. Integration is explicit forward Euler with
non-negativity clamping; steady state is detected with a running-average
criterion over a sliding time window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, GenerationError, UsageError

# Local dynamics registry: name -> f(x, R) with x of shape (K, K, N),
# returning dx of the same shape.


def _zero_dynamics(x: np.ndarray, R: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


def _turing2_dynamics(x: np.ndarray, R: np.ndarray) -> np.ndarray:
    # Two-species activator/inhibitor skin-pigment model:
    #   f1 = R1*x1*x2 - x1 + R2
    #   f2 = R3*x1*x2 + R4
    x1 = x[:, :, 0]
    x2 = x[:, :, 1]
    prod = x1 * x2
    out = np.empty_like(x)
    out[:, :, 0] = R[0] * prod - x1 + R[1]
    out[:, :, 1] = R[2] * prod + R[3]
    return out


DYNAMICS = {
    "zero": _zero_dynamics,
    "turing2": _turing2_dynamics,
}

# Default random-initial-condition upper bound per dynamics. turing2 has its
# homogeneous equilibrium at (4, 4); sampling U[0, 8] brackets it, whereas
# U[0, 1] starves species 1 (clamped at 0) and never forms patterns.
INIT_HIGH = {
    "zero": 1.0,
    "turing2": 8.0,
}


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the coupled grid: side K (power of two), species count N,
    diffusion coefficients D (length N), local-dynamics parameters R, the
    dynamics name, and the observable species indices (0-based)."""

    K: int
    N: int
    D: tuple[float, ...]
    R: tuple[float, ...]
    dynamics_id: str = "turing2"
    observable: tuple[int, ...] = (0,)
    toroidal: bool = False

    def __post_init__(self):
        if self.K < 2 or (self.K & (self.K - 1)) != 0:
            raise UsageError(f"grid side K must be a power of two >= 2, got {self.K}")
        if self.N < 1:
            raise UsageError("species count N must be >= 1")
        if len(self.D) != self.N:
            raise UsageError(f"D must have {self.N} entries, got {len(self.D)}")
        if any(d < 0 for d in self.D):
            raise UsageError("diffusion coefficients must be non-negative")
        if not self.observable:
            raise UsageError("observable species set must be non-empty")
        if any(not (0 <= n < self.N) for n in self.observable):
            raise UsageError("observable indices must lie in [0, N)")
        if self.dynamics_id not in DYNAMICS:
            raise UsageError(f"unknown dynamics '{self.dynamics_id}'")
        object.__setattr__(self, "D", tuple(float(d) for d in self.D))
        object.__setattr__(self, "R", tuple(float(r) for r in self.R))
        object.__setattr__(self, "observable", tuple(int(n) for n in self.observable))

    def dynamics(self):
        return DYNAMICS[self.dynamics_id]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "N": self.N,
            "D": list(self.D),
            "R": list(self.R),
            "dynamics_id": self.dynamics_id,
            "observable": list(self.observable),
            "toroidal": self.toroidal,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        return cls(
            K=int(d["K"]),
            N=int(d["N"]),
            D=tuple(d["D"]),
            R=tuple(d["R"]),
            dynamics_id=d.get("dynamics_id", "turing2"),
            observable=tuple(d.get("observable", (0,))),
            toroidal=bool(d.get("toroidal", False)),
        )


@dataclass
class GridState:
    """Concentrations x of shape (K, K, N) plus elapsed model time."""

    x: np.ndarray
    t: float = 0.0

    def copy(self) -> "GridState":
        return GridState(self.x.copy(), self.t)


@dataclass(frozen=True)
class SteadyStateConfig:
    """Steady-state detection: running-average window T, tolerance epsilon,
    abort horizon t_max, and forward-Euler step dt.

    dt must keep explicit Euler stable: for the neighbor-mean coupling the
    hard bound is roughly dt < 1/max(D); 0.02 covers D up to 30 with margin.
    """

    epsilon: float | None = None  # None: per-grid default 3e-2 * K^2 * N
    T: float = 10.0
    t_max: float = 60.0
    dt: float = 0.02

    def __post_init__(self):
        if self.dt <= 0 or self.T <= 0 or self.t_max <= 0:
            raise UsageError("dt, T and t_max must all be positive")
        if not (self.dt <= self.T <= self.t_max):
            raise UsageError("need dt <= T <= t_max")
        if self.epsilon is not None and self.epsilon <= 0:
            raise UsageError("epsilon must be positive")

    def resolve_epsilon(self, params: SystemParams) -> float:
        # Per-entry average drift of 3e-2 against concentration scales of
        # 4..40 for the built-in dynamics; tight enough to rule out moving
        # fronts, loose enough that settled spot patterns pass by t ~ 35.
        if self.epsilon is not None:
            return self.epsilon
        return 3e-2 * params.K * params.K * params.N

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "T": self.T, "t_max": self.t_max, "dt": self.dt}


@dataclass(frozen=True)
class NotConverged:
    """Returned when no steady state was confirmed before t_max."""

    t_max: float
    residual: float


@dataclass
class Observation:
    """Normalized steady-state snapshot: values in [0, 1] of shape
    (K, K, o) with one channel per observable species."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


def _neighbor_counts(K: int) -> np.ndarray:
    cnt = np.full((K, K), 4.0)
    cnt[0, :] -= 1.0
    cnt[-1, :] -= 1.0
    cnt[:, 0] -= 1.0
    cnt[:, -1] -= 1.0
    return cnt[:, :, None]


def neighbor_means(x: np.ndarray, toroidal: bool = False) -> np.ndarray:
    """Per-cell mean of the von Neumann neighbors, all species at once."""
    if toroidal:
        s = np.roll(x, 1, 0) + np.roll(x, -1, 0) + np.roll(x, 1, 1) + np.roll(x, -1, 1)
        return s / 4.0
    s = np.zeros_like(x)
    s[1:, :] += x[:-1, :]
    s[:-1, :] += x[1:, :]
    s[:, 1:] += x[:, :-1]
    s[:, :-1] += x[:, 1:]
    return s / _neighbor_counts(x.shape[0])


def neighbor_input(state: GridState, species: int, i: int, j: int,
                   toroidal: bool = False) -> float:
    """Mean of one species over the von Neumann neighbors of cell (i, j).

    Rows and columns are 0-based; boundaries are non-periodic unless
    `toroidal`, so corner cells have 2 neighbors and edge cells 3.
    """
    K = state.x.shape[0]
    if not (0 <= i < K and 0 <= j < K):
        raise UsageError(f"cell ({i}, {j}) outside the {K}x{K} grid")
    if not (0 <= species < state.x.shape[2]):
        raise UsageError(f"species index {species} out of range")
    if toroidal:
        idx = [((i - 1) % K, j), ((i + 1) % K, j), (i, (j - 1) % K), (i, (j + 1) % K)]
    else:
        idx = [(a, b) for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1))
               if 0 <= a < K and 0 <= b < K]
    return float(sum(state.x[a, b, species] for a, b in idx) / len(idx))


def step(state: GridState, params: SystemParams, dt: float) -> GridState:
    """One forward-Euler update; concentrations are clamped at 0 from below.

    Raises DivergenceError (carrying the offending time) if the update
    produces non-finite values.
    """
    if dt <= 0:
        raise UsageError("dt must be positive")
    if state.x.shape != (params.K, params.K, params.N):
        raise UsageError("state shape does not match params")
    u = neighbor_means(state.x, params.toroidal)
    D = np.asarray(params.D)
    R = np.asarray(params.R)
    with np.errstate(over="ignore", invalid="ignore"):
        dx = D * (u - state.x) + params.dynamics()(state.x, R)
        x_new = state.x + dt * dx
    t_new = state.t + dt
    if not np.all(np.isfinite(x_new)):
        raise DivergenceError(t_new)
    np.maximum(x_new, 0.0, out=x_new)
    return GridState(x_new, t_new)


def observe(state: GridState, params: SystemParams) -> Observation:
    """Normalize each observable channel by its maximum; an all-zero channel
    stays all zeros."""
    K = params.K
    out = np.empty((K, K, len(params.observable)))
    for c, n in enumerate(params.observable):
        chan = state.x[:, :, n]
        peak = chan.max()
        out[:, :, c] = chan / peak if peak > 0 else 0.0
    return Observation(out, meta={"t": state.t, "params": params.to_dict()})


def initial_state(params: SystemParams, rng_seed: int,
                  high: float | None = None) -> GridState:
    """I.i.d. uniform [0, high] concentrations per cell and species; the
    default upper bound is the dynamics' natural scale (INIT_HIGH)."""
    if high is None:
        high = INIT_HIGH.get(params.dynamics_id, 1.0)
    rng = np.random.default_rng(rng_seed)
    return GridState(rng.uniform(0.0, high, (params.K, params.K, params.N)), 0.0)


def simulate_to_steady(params: SystemParams, x0: GridState,
                       cfg: SteadyStateConfig | None = None,
                       rng_seed: int | None = None) -> Observation | NotConverged:
    """Integrate until the running-average criterion holds and keeps holding
    for a full window T; return the observation at the first such time.

    The criterion at time t compares the state against the average of the
    samples in (t - T, t]: sum of |x - avg| over all cells and species < eps.
    Returns NotConverged if it was not confirmed by t_max.
    """
    cfg = cfg or SteadyStateConfig()
    if x0.x.shape != (params.K, params.K, params.N):
        raise UsageError("initial state shape does not match params")
    eps = cfg.resolve_epsilon(params)
    window = max(1, round(cfg.T / cfg.dt))
    buf = np.empty((window,) + x0.x.shape)
    rolling = np.zeros_like(x0.x)
    n_buf = 0
    pos = 0

    state = x0.copy()
    candidate_t = None
    candidate_obs = None
    residual = math.inf
    n_steps = round(cfg.t_max / cfg.dt)
    for _ in range(n_steps):
        state = step(state, params, cfg.dt)
        if n_buf == window:
            rolling -= buf[pos]
        buf[pos] = state.x
        rolling += state.x
        pos = (pos + 1) % window
        n_buf = min(n_buf + 1, window)
        if n_buf < window:
            continue
        residual = float(np.abs(state.x - rolling / window).sum())
        if residual < eps:
            if candidate_t is None:
                candidate_t = state.t
                candidate_obs = observe(state, params)
            elif state.t - candidate_t >= cfg.T:
                candidate_obs.meta["t_bar"] = candidate_t
                if rng_seed is not None:
                    candidate_obs.meta["seed"] = rng_seed
                return candidate_obs
        else:
            candidate_t = None
            candidate_obs = None
    return NotConverged(cfg.t_max, residual)


class FixedSampler:
    """Draws a fresh random initial condition for fixed system parameters."""

    def __init__(self, params: SystemParams):
        self.params = params

    def __call__(self, rng: np.random.Generator):
        seed = int(rng.integers(0, 2**63 - 1))
        return self.params, seed


class UniformDiffusionSampler:
    """Fixed local dynamics, diffusion coefficients uniform over a box."""

    def __init__(self, template: SystemParams, box: list[tuple[float, float]]):
        if len(box) != template.N:
            raise UsageError("diffusion box must have one interval per species")
        self.template = template
        self.box = [(float(lo), float(hi)) for lo, hi in box]

    def __call__(self, rng: np.random.Generator):
        D = tuple(rng.uniform(lo, hi) for lo, hi in self.box)
        seed = int(rng.integers(0, 2**63 - 1))
        params = SystemParams(
            K=self.template.K, N=self.template.N, D=D, R=self.template.R,
            dynamics_id=self.template.dynamics_id,
            observable=self.template.observable, toroidal=self.template.toroidal)
        return params, seed


def generate_dataset(params_sampler, count: int,
                     cfg: SteadyStateConfig | None = None,
                     rng_seed: int = 0,
                     max_attempts: int | None = None) -> list[Observation]:
    """Simulate until `count` steady-state observations are collected,
    discarding runs that do not converge. Deterministic given the seed.

    Raises GenerationError once max_attempts (default 20x count) runs have
    been tried without filling the quota.
    """
    if count < 1:
        raise UsageError("count must be >= 1")
    cfg = cfg or SteadyStateConfig()
    if max_attempts is None:
        max_attempts = 20 * count
    rng = np.random.default_rng(rng_seed)
    out: list[Observation] = []
    attempts = 0
    while len(out) < count:
        if attempts >= max_attempts:
            raise GenerationError(
                f"gave up after {attempts} runs with only {len(out)}/{count} "
                "steady-state observations")
        attempts += 1
        params, seed = params_sampler(rng)
        x0 = initial_state(params, seed)
        try:
            result = simulate_to_steady(params, x0, cfg, rng_seed=seed)
        except DivergenceError:
            continue
        if isinstance(result, NotConverged):
            continue
        out.append(result)
    return out
