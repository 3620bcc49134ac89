"""Parameter sets for the batch scripts."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ClassifyConfig:
    lo: int = 8
    hi: int = 200
    jobs: int = 1


@dataclass(frozen=True)
class FixtureSearchConfig:
    """Search for an admissible invariant slit at D = 8."""

    seed: int = 0
    tries: int = 50
    bound2: int = 9          # squared length bound for candidate slits
    step_denominator: int = 40


@dataclass(frozen=True)
class PathSearchConfig:
    """Parameters tried when freezing the d16-path script."""

    slit: str = "1"
    target_slit: str = "1/2"
    eps: tuple = field(default=("1/10", "1/8", "1/6", "1/4"))
