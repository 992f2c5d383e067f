"""Domain models for points on the web manifold."""

import math
from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class BasePoint(BaseModel):
    """A point of M⁴ in base coordinates (x1, x2, y1, y2)."""

    model_config = ConfigDict(frozen=True)

    x1: float = Field(description="First x coordinate")
    x2: float = Field(description="Second x coordinate")
    y1: float = Field(description="First y coordinate")
    y2: float = Field(description="Second y coordinate")

    @field_validator("x1", "x2", "y1", "y2")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"coordinate must be finite, got {value}")
        return value

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "BasePoint":
        """Build a point from coordinates in (x1, x2, y1, y2) order."""
        x1, x2, y1, y2 = values
        return cls(x1=x1, x2=x2, y1=y1, y2=y2)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        """Coordinates in (x1, x2, y1, y2) order."""
        return (self.x1, self.x2, self.y1, self.y2)

    def as_list(self) -> List[float]:
        return list(self.as_tuple())

    def __str__(self) -> str:
        return ",".join(repr(v) for v in self.as_tuple())
