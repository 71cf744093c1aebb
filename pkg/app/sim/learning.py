# app/sim/learning.py

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.core.errors import DomainError
from app.schemas.scenario import LearningParams, PowerLevels, RingRadii
from app.sim.channel import dbm_to_mw
from app.sim.topology import AgentState


@dataclass(frozen=True, eq=False)
class ActionSet:
    """Uniformly spaced FBS transmit powers, ascending, P_min and P_max inclusive."""

    levels_dbm: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels_dbm, dtype=float)
        levels.setflags(write=False)
        object.__setattr__(self, "levels_dbm", levels)
        object.__setattr__(self, "levels_mw", dbm_to_mw(levels))

    def __len__(self) -> int:
        return len(self.levels_dbm)

    @property
    def step_db(self) -> float:
        return float(self.levels_dbm[1] - self.levels_dbm[0])

    @property
    def p_max_dbm(self) -> float:
        return float(self.levels_dbm[-1])


def make_action_set(p_min: float, p_max: float, n: int) -> ActionSet:
    if n < 2:
        raise DomainError(f"an action set needs at least two levels, got {n}")
    if not p_min < p_max:
        raise DomainError(f"p_min ({p_min}) must be below p_max ({p_max})")
    return ActionSet(np.linspace(p_min, p_max, n))


def action_set_from_config(power: PowerLevels) -> ActionSet:
    return make_action_set(power.p_min_dbm, power.p_max_dbm, power.n_power)


class QTable:
    """
    Q-values of one agent: rows are ring states (state-major, d_mue fastest),
    columns are power levels.
    """

    def __init__(self, radii: RingRadii, n_actions: int, values: np.ndarray | None = None):
        self.radii = radii
        shape = (radii.n_states, n_actions)
        if values is None:
            values = np.zeros(shape)
        values = np.array(values, dtype=float)
        if values.shape != shape:
            raise DomainError(f"Q-table shape {values.shape} does not match {shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("Q-table entries must be finite")
        self.values = values

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def row_index(self, state: AgentState) -> int:
        if not (0 <= state.d_mbs <= len(self.radii.mbs_radii) and 0 <= state.d_mue <= len(self.radii.mue_radii)):
            raise DomainError(f"state {state} is outside the ring grid")
        return state.row(self.radii)

    def row(self, state: AgentState) -> np.ndarray:
        return self.values[self.row_index(state)]

    def copy(self) -> "QTable":
        return QTable(self.radii, self.n_actions, self.values.copy())

    def to_flat(self) -> list:
        """State-major flattening, for checkpoints and fixtures."""
        return self.values.ravel().tolist()

    @classmethod
    def from_flat(cls, radii: RingRadii, n_actions: int, flat: Sequence[float]) -> "QTable":
        return cls(radii, n_actions, np.asarray(flat, dtype=float).reshape(radii.n_states, n_actions))


def epsilon_at(iteration: int, params: LearningParams) -> float:
    """Constant epsilon during the exploration share of the budget, pure exploitation afterwards."""
    if iteration < params.explore_fraction * params.max_iterations:
        return params.epsilon
    return 0.0


def select_action(qrow: np.ndarray, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy; argmax ties go to the lowest index (lowest power)."""
    if eps > 0.0 and rng.random() < eps:
        return int(rng.integers(len(qrow)))
    return int(np.argmax(qrow))


def q_update(
    table: QTable,
    state: AgentState,
    action: int,
    reward: float,
    next_state: AgentState,
    params: LearningParams,
) -> float:
    """One tabular Q-learning step; returns the new Q(state, action)."""
    if not 0 <= action < table.n_actions:
        raise DomainError(f"action {action} out of range for {table.n_actions} levels")
    row = table.row_index(state)
    bootstrap = np.max(table.row(next_state))
    updated = (1.0 - params.alpha) * table.values[row, action] + params.alpha * (reward + params.gamma * bootstrap)
    table.values[row, action] = updated
    return float(updated)
