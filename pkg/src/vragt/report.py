"""Validation report types shared by every validator."""

import json
from typing import Any, Dict, List

from pydantic import BaseModel, Field


class ConditionResult(BaseModel):
    """Outcome of a single named condition."""
    name: str = Field(description="Short identifier of the condition")
    passed: bool = Field(description="Whether the condition holds")
    detail: str = Field(default="", description="Human-readable explanation")
    values: Dict[str, Any] = Field(default_factory=dict, description="Computed quantities")


class ValidationReport(BaseModel):
    """Ordered collection of condition results for one validator."""
    title: str = Field(description="Which assumption or theorem was checked")
    conditions: List[ConditionResult] = Field(default_factory=list)
    values: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failures(self) -> List[ConditionResult]:
        return [c for c in self.conditions if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "", **values: Any) -> ConditionResult:
        """Append a condition and return it."""
        result = ConditionResult(name=name, passed=bool(passed), detail=detail, values=values)
        self.conditions.append(result)
        return result

    def condition(self, name: str) -> ConditionResult:
        """Look up a condition by name."""
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump()
        data["passed"] = self.passed
        return data

    def export_json(self, output_path: str):
        """Export the report as JSON."""
        with open(output_path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, default=str)

    def export_text(self) -> str:
        """Export the report as formatted text."""
        lines = [self.title, "-" * 60]
        for c in self.conditions:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"[{mark}] {c.name}")
            if c.detail:
                lines.append(f"       {c.detail}")
        lines.append(f"Status: {'PASSED' if self.passed else 'FAILED'}")
        return "\n".join(lines)
