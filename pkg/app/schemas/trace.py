# app/schemas/trace.py

from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict


# ─── Per-iteration record (hot path: plain dataclass, not validated) ────────
@dataclass(frozen=True, eq=False)
class IterationRecord:
    iteration: int
    agent_ids: Tuple[int, ...]
    actions: np.ndarray          # action indices, one per active agent
    action_dbm: np.ndarray
    powers_mw: np.ndarray
    c_mue: float
    c_fue: np.ndarray
    rewards: np.ndarray
    max_q_delta: float

    @property
    def m(self) -> int:
        return len(self.agent_ids)

    def rows(self):
        for k, agent_id in enumerate(self.agent_ids):
            yield {
                "iteration": self.iteration,
                "agent_id": agent_id,
                "action_dbm": float(self.action_dbm[k]),
                "c_mue": float(self.c_mue),
                "c_fue_i": float(self.c_fue[k]),
                "reward": float(self.rewards[k]),
                "max_q_delta": float(self.max_q_delta),
            }


# ─── Summaries ───────────────────────────────────────────────────────────────
class DensitySummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    agent_ids: List[int]
    c_mue_final: float
    fue_capacities: List[float]
    min_fue_capacity: float
    sum_capacity: float
    jain: float
    iterations_to_converge: int
    converged: bool
    iterations_run: int
    elapsed_seconds: float = 0.0
    qos_satisfied: bool = False


@dataclass
class DensityTrace:
    m: int
    records: List[IterationRecord] = field(default_factory=list)
    final: Optional[IterationRecord] = None


@dataclass
class RunTrace:
    admission_order: List[int] = field(default_factory=list)
    densities: List[DensityTrace] = field(default_factory=list)
    summaries: List[DensitySummary] = field(default_factory=list)

    def extend(self, other: "RunTrace") -> None:
        self.admission_order.extend(a for a in other.admission_order if a not in self.admission_order)
        self.densities.extend(other.densities)
        self.summaries.extend(other.summaries)

    def summary_for(self, m: int) -> Optional[DensitySummary]:
        return next((s for s in self.summaries if s.m == m), None)


# ─── Constraint / oracle results ─────────────────────────────────────────────
class ConstraintReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    agent_ids: List[int]
    mue_ok: bool
    fue_ok: List[bool]
    power_ok: List[bool]

    @property
    def qos_satisfied(self) -> bool:
        return self.mue_ok and all(self.fue_ok)

    @property
    def all_satisfied(self) -> bool:
        return self.qos_satisfied and all(self.power_ok)


class OracleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    best_action: Tuple[int, ...]
    best_objective: float
    feasible: bool
    c_mue: float
    c_fue: List[float]
    joint_actions: int


# ─── Manifest ────────────────────────────────────────────────────────────────
class RunManifest(BaseModel):
    kind: str
    seed: int
    config_hash: str
    created_at: datetime
    versions: Dict[str, str]
    admission_order: List[int] = []
    artifacts: List[str] = []
