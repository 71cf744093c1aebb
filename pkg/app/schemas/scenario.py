# app/schemas/scenario.py

import math
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ─── Radio / channel ─────────────────────────────────────────────────────────
class ChannelParams(_Section):
    p_bs_dbm: float = 43.0
    sigma2_dbm: float = -104.0
    pl0_db: float = 62.3
    pl_exponent: float = 4.0
    d0_m: float = Field(5.0, gt=0)
    frequency_ghz: float = Field(2.4, gt=0)


class PowerLevels(_Section):
    p_min_dbm: float = -20.0
    p_max_dbm: float = 25.0
    n_power: int = Field(31, ge=2)
    step_db: Optional[float] = 1.5

    @model_validator(mode="after")
    def _check_levels(self):
        if self.p_min_dbm >= self.p_max_dbm:
            raise ValueError("p_min_dbm must be below p_max_dbm")
        if self.step_db is not None:
            implied = (self.p_max_dbm - self.p_min_dbm) / (self.n_power - 1)
            if abs(implied - self.step_db) > 1e-9:
                raise ValueError(
                    f"n_power={self.n_power} between {self.p_min_dbm} and {self.p_max_dbm} dBm "
                    f"gives a step of {implied:g} dB, not step_db={self.step_db:g}"
                )
        return self


# ─── Geometry ────────────────────────────────────────────────────────────────
class RingRadii(_Section):
    mbs_radii: List[float] = [50.0, 150.0, 400.0]
    mue_radii: List[float] = [15.0, 50.0, 125.0]

    @field_validator("mbs_radii", "mue_radii")
    @classmethod
    def _ascending(cls, radii: List[float], info):
        if not radii:
            raise ValueError(f"{info.field_name} must not be empty")
        if any(r <= 0 for r in radii):
            raise ValueError(f"{info.field_name} must be positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError(f"{info.field_name} not ascending")
        return radii

    @property
    def n_states(self) -> int:
        return (len(self.mbs_radii) + 1) * (len(self.mue_radii) + 1)


Point = Tuple[float, float]


class PinnedPositions(_Section):
    """Exact node coordinates; overrides grid generation when present."""

    mbs: Point
    mue: Point
    fbs: List[Point]
    fue: List[Point]

    @model_validator(mode="after")
    def _same_length(self):
        if not self.fbs:
            raise ValueError("at least one FBS position is required")
        if len(self.fbs) != len(self.fue):
            raise ValueError("fbs and fue must list the same number of positions")
        return self


class LayoutParams(_Section):
    spacing_m: float = Field(35.0, gt=0)
    fue_radius_m: float = Field(10.0, gt=0)
    fue_min_distance_m: float = Field(0.2, ge=0)
    mbs_position: Point = (300.0, 0.0)
    mue_position: Point = (5.0, 5.0)
    positions: Optional[PinnedPositions] = None

    @model_validator(mode="after")
    def _fue_annulus(self):
        if self.fue_min_distance_m >= self.fue_radius_m:
            raise ValueError("fue_min_distance_m must be smaller than fue_radius_m")
        return self

    @model_validator(mode="after")
    def _pinned_geometry(self):
        if self.positions is None:
            return self
        pinned = self.positions
        nodes = [pinned.mbs, pinned.mue, *pinned.fbs, *pinned.fue]
        if len(set(nodes)) != len(nodes):
            raise ValueError("two pinned nodes share the same position")
        for k, (station, user) in enumerate(zip(pinned.fbs, pinned.fue)):
            if math.dist(station, user) > self.fue_radius_m + 1e-9:
                raise ValueError(f"pinned FUE {k} lies outside the {self.fue_radius_m:g} m serving radius")
        return self


# ─── Objective / learning ────────────────────────────────────────────────────
class QosParams(_Section):
    q_mue: float = Field(1.0, gt=0)
    q_fue: Union[float, List[float]] = 1.0

    @field_validator("q_fue")
    @classmethod
    def _positive(cls, value):
        values = value if isinstance(value, list) else [value]
        if any(v <= 0 for v in values):
            raise ValueError("q_fue thresholds must be positive")
        return value


class RewardParams(_Section):
    name: str = "proposed"
    d_th_m: float = Field(25.0, gt=0)
    mue_exponent: int = Field(2, ge=0)


class LearningParams(_Section):
    alpha: float = Field(0.5, ge=0, le=1)
    gamma: float = Field(0.9, ge=0, le=1)
    epsilon: float = Field(0.1, ge=0, le=1)
    explore_fraction: float = Field(0.8, ge=0, le=1)
    max_iterations: int = Field(50_000, ge=1)


class PhaseParams(_Section):
    seed_agents: int = Field(4, ge=1)
    m_max: int = Field(15, ge=1)
    share_rows: bool = True
    share_quantization: Optional[float] = Field(None, gt=0)
    stop_on_convergence: bool = True


class ConvergenceCriterion(_Section):
    window: int = Field(500, ge=1)
    tolerance: float = Field(1e-3, gt=0)


class OracleParams(_Section):
    max_joint_actions: int = Field(10_000_000, ge=1)
    workers: int = Field(1, ge=1)
    chunk_size: int = Field(65_536, ge=1)


class OutputParams(_Section):
    out_dir: Optional[str] = None
    trace_stride: int = Field(10, ge=1)


# ─── Scenario ────────────────────────────────────────────────────────────────
class ScenarioConfig(_Section):
    seed: int = Field(1, ge=0)
    channel: ChannelParams = ChannelParams()
    power: PowerLevels = PowerLevels()
    rings: RingRadii = RingRadii()
    layout: LayoutParams = LayoutParams()
    qos: QosParams = QosParams()
    reward: RewardParams = RewardParams()
    learning: LearningParams = LearningParams()
    phases: PhaseParams = PhaseParams()
    convergence: ConvergenceCriterion = ConvergenceCriterion()
    oracle: OracleParams = OracleParams()
    output: OutputParams = OutputParams()

    @model_validator(mode="after")
    def _cross_section(self):
        if self.layout.positions is not None and self.phases.m_max > len(self.layout.positions.fbs):
            raise ValueError(
                f"phases.m_max={self.phases.m_max} exceeds the {len(self.layout.positions.fbs)} pinned FBS positions"
            )
        if isinstance(self.qos.q_fue, list) and len(self.qos.q_fue) < self.phases.m_max:
            raise ValueError(f"qos.q_fue lists {len(self.qos.q_fue)} thresholds for m_max={self.phases.m_max}")
        return self

    def fue_thresholds(self, m: int) -> List[float]:
        if isinstance(self.qos.q_fue, list):
            return list(self.qos.q_fue[:m])
        return [self.qos.q_fue] * m
