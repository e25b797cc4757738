"""Step schedule, stopping rule, and run reporting shared by both
decomposition algorithms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigurationError


@dataclass
class StepSchedule:
    """alpha_t = scale / sqrt(t); satisfies the diminishing,
    non-summable conditions by construction."""

    scale: float = 5.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ConfigurationError("step scale must be positive")

    def alpha(self, t: int) -> float:
        return self.scale / math.sqrt(t)


@dataclass
class StoppingRule:
    tolerance: float = 1e-6       # on the relative primal-dual gap
    window: int = 10              # consecutive zero-conflict iterations
    max_iters: int = 5000


@dataclass
class IterationRecord:
    t: int
    alpha: float
    dual: float
    best_dual: float
    primal: float
    best_primal: float
    conflicts: int


@dataclass
class RunReport:
    records: list = field(default_factory=list)
    converged_at: int | None = None
    hit_max_iters: bool = False
    wall_time: float = 0.0

    @property
    def best_dual(self) -> float:
        return self.records[-1].best_dual

    @property
    def best_primal(self) -> float:
        return self.records[-1].best_primal

    @property
    def iterations(self) -> int:
        return len(self.records)


class GapTracker:
    """Best-dual / best-primal bookkeeping and termination decisions."""

    def __init__(self, stop: StoppingRule):
        self.stop = stop
        self.best_dual = -math.inf
        self.best_primal = math.inf
        self.best_config = None
        self.zero_conflict_streak = 0

    def update(self, dual: float, primal: float, config, conflicts: int) -> None:
        if dual > self.best_dual:
            self.best_dual = dual
        if primal < self.best_primal:
            self.best_primal = primal
            self.best_config = config
        self.zero_conflict_streak = self.zero_conflict_streak + 1 if conflicts == 0 else 0

    def should_stop(self) -> bool:
        gap = self.best_primal - self.best_dual
        if gap <= self.stop.tolerance * max(1.0, abs(self.best_primal)):
            return True
        return self.zero_conflict_streak >= self.stop.window
