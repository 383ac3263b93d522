import numpy as np
from pydantic import BaseModel, model_validator


class FloatRangeDistribution(BaseModel):
    low: float
    high: float

    @model_validator(mode="after")
    def _ordered(self) -> "FloatRangeDistribution":
        if self.low > self.high:
            raise ValueError(f"low ({self.low}) exceeds high ({self.high})")
        return self

    def create_value(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))

    def towards(self, other: "FloatRangeDistribution", gap: float) -> "FloatRangeDistribution":
        """The range moved from ``other`` by ``gap`` times the distance between the two."""
        low = other.low + gap * (self.low - other.low)
        high = other.high + gap * (self.high - other.high)
        return FloatRangeDistribution(low=min(low, high), high=max(low, high))


class ClippedNormal(BaseModel):
    """Normal distribution truncated by clipping to [low, high]."""
    mean: float
    std: float
    low: float
    high: float

    def create_value(self, rng: np.random.Generator) -> float:
        return float(np.clip(rng.normal(self.mean, self.std), self.low, self.high))
