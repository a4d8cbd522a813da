"""patternsynth: spatial pattern detection over quad transition systems and
reaction-diffusion parameter synthesis guided by quantitative model checking."""

from .errors import DivergenceError, GenerationError, SessionStateError, UsageError
from .rdsim import (
    GridState,
    NotConverged,
    Observation,
    SteadyStateConfig,
    SystemParams,
    generate_dataset,
    initial_state,
    observe,
    simulate_to_steady,
    step,
)

__all__ = [
    "DivergenceError",
    "GenerationError",
    "SessionStateError",
    "UsageError",
    "GridState",
    "NotConverged",
    "Observation",
    "SteadyStateConfig",
    "SystemParams",
    "generate_dataset",
    "initial_state",
    "observe",
    "simulate_to_steady",
    "step",
]
