from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

SCHEMA = "markov-fiber/report/1"


@dataclass
class TestReport:
    """Outcome of one p-value strategy for one observed table."""

    __test__ = False  # keep pytest from collecting this as a test class

    strategy: str
    statistic_kind: str
    statistic: float
    p_value: float
    df: int | None = None
    fiber_size: int | None = None
    se: float | None = None
    ci95: tuple[float, float] | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if d["ci95"] is not None:
            d["ci95"] = list(d["ci95"])
        return d
