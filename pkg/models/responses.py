"""
Result records of command-line runs
"""

from enum import Enum
from typing import Any, Dict, List

from pydantic import BaseModel, Field


class RunStatus(str, Enum):
    OK = "ok"
    CHECK_FAILED = "check_failed"
    NOT_FOUND = "not_found"


class RunSummary(BaseModel):
    """What one command produced"""
    command: str = Field(..., examples=["chi-scan"])
    run_id: str = Field(..., description="Identifier shared with the run's log lines")
    status: RunStatus = RunStatus.OK
    outputs: List[str] = Field(default_factory=list, description="Files written, config first")
    details: Dict[str, Any] = Field(
        default_factory=dict,
        description="Headline numbers of the run",
        examples=[{"verdict": "ACAUSAL", "t": 0.5, "gap": 1.0}]
    )

    @property
    def exit_code(self) -> int:
        return 1 if self.status == RunStatus.CHECK_FAILED else 0
