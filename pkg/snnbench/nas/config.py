"""
snnbench - Architecture Search Settings
"""

from typing import Tuple

from pydantic import BaseModel, Field, model_validator


class NasConfig(BaseModel):
    """
    Genetic search parameters.

    ``full()`` is the full-scale setting (36 genomes, 20 parents, 2 elites,
    75 generations); ``desk()`` a setting that finishes on a workstation.
    """

    population: int = Field(default=36, ge=2)
    parents: int = Field(default=20, ge=1)
    elitism: int = Field(default=2, ge=0)
    generations: int = Field(default=75, ge=1)
    accuracy_threshold: float = Field(default=0.97, ge=0, le=1)
    neurons_per_percent: float = Field(default=100.0, gt=0)
    ranking_base: float = Field(default=0.9, ge=0, le=1)
    novelty_bonus: float = Field(default=0.2, ge=0)
    novel_skip_prob: float = Field(default=0.1, ge=0, le=1)
    width_range: Tuple[int, int] = (10, 1500)
    width_mutation_cv: float = Field(default=0.3, ge=0)
    initial_max_depth: int = Field(default=3, ge=1)
    max_depth: int = Field(default=6, ge=1)
    forget_after: int = Field(default=5, ge=1)
    output_dim: int = Field(default=10, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_sizes(self) -> "NasConfig":
        if self.parents > self.population:
            raise ValueError("parents must not exceed population")
        if self.elitism >= self.population:
            raise ValueError("elitism must be smaller than population")
        low, high = self.width_range
        if not 1 <= low <= high:
            raise ValueError("width_range must satisfy 1 <= low <= high")
        return self

    @classmethod
    def full(cls, **overrides) -> "NasConfig":
        preset = {"population": 36, "parents": 20, "elitism": 2, "generations": 75}
        return cls(**{**preset, **overrides})

    @classmethod
    def desk(cls, **overrides) -> "NasConfig":
        preset = {"population": 12, "parents": 7, "elitism": 2, "generations": 10}
        return cls(**{**preset, **overrides})

    def scaled(self, factor: float) -> "NasConfig":
        """Population and parent count scaled by ``factor``, other settings kept."""
        population = max(2, self.elitism + 1, int(round(self.population * factor)))
        parents = min(population, max(1, int(round(self.parents * factor))))
        return self.model_copy(update={"population": population, "parents": parents})
