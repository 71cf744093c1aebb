# app/sim/topology.py

import bisect
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from app.core.errors import DomainError
from app.schemas.scenario import LayoutParams, PinnedPositions, RingRadii


class Position(NamedTuple):
    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class AgentState(NamedTuple):
    d_mbs: int
    d_mue: int

    def row(self, radii: RingRadii) -> int:
        """Row of this state in a Q-table, state-major with d_mue varying fastest."""
        return self.d_mbs * (len(radii.mue_radii) + 1) + self.d_mue


@dataclass(frozen=True)
class Topology:
    mbs: Position
    mue: Position
    fbs: Tuple[Position, ...]
    fue: Tuple[Position, ...]
    fue_radius: float = math.inf

    def __post_init__(self):
        if not self.fbs or len(self.fbs) != len(self.fue):
            raise DomainError("a topology needs M >= 1 FBSs, each with one FUE")
        for k, (station, user) in enumerate(zip(self.fbs, self.fue)):
            if station.distance_to(user) > self.fue_radius + 1e-9:
                raise DomainError(f"FUE {k} lies outside the {self.fue_radius} m serving radius")
        nodes = [self.mbs, self.mue, *self.fbs, *self.fue]
        if len(set(nodes)) != len(nodes):
            raise DomainError("two nodes share the same position")

    @property
    def m(self) -> int:
        return len(self.fbs)

    def to_positions(self) -> PinnedPositions:
        return PinnedPositions(
            mbs=tuple(self.mbs),
            mue=tuple(self.mue),
            fbs=[tuple(p) for p in self.fbs],
            fue=[tuple(p) for p in self.fue],
        )

    @classmethod
    def from_positions(cls, positions: PinnedPositions, fue_radius: float = math.inf) -> "Topology":
        return cls(
            mbs=Position(*positions.mbs),
            mue=Position(*positions.mue),
            fbs=tuple(Position(*p) for p in positions.fbs),
            fue=tuple(Position(*p) for p in positions.fue),
            fue_radius=fue_radius,
        )


def grid_positions(m: int, spacing: float) -> List[Position]:
    """Row-major square block of m sites centered on the origin."""
    cols = math.ceil(math.sqrt(m))
    rows = math.ceil(m / cols)
    sites = []
    for k in range(m):
        row, col = divmod(k, cols)
        sites.append(Position((col - (cols - 1) / 2) * spacing, ((rows - 1) / 2 - row) * spacing))
    return sites


def generate_layout(
    m: int,
    spacing: float,
    fue_radius: float,
    mbs_pos: Position,
    mue_pos: Position,
    rng_seed: int,
    fue_min_distance: float = 0.0,
) -> Topology:
    """
    FBSs on a square grid around the origin, each FUE uniform over the annulus
    fue_min_distance..fue_radius around its FBS.
    """
    if m < 1 or spacing <= 0 or fue_radius <= 0:
        raise DomainError(f"invalid layout request m={m}, spacing={spacing}, fue_radius={fue_radius}")
    rng = np.random.default_rng(rng_seed)
    fbs = grid_positions(m, spacing)

    fue = []
    inner2 = (fue_min_distance / fue_radius) ** 2
    for station in fbs:
        r = fue_radius * math.sqrt(rng.uniform(inner2, 1.0))
        theta = rng.uniform(0.0, 2.0 * math.pi)
        fue.append(Position(station.x + r * math.cos(theta), station.y + r * math.sin(theta)))

    return Topology(Position(*mbs_pos), Position(*mue_pos), tuple(fbs), tuple(fue), fue_radius)


def layout_from_config(layout: LayoutParams, m: int, seed: int) -> Topology:
    if layout.positions is not None:
        pinned = Topology.from_positions(layout.positions, layout.fue_radius_m)
        return Topology(pinned.mbs, pinned.mue, pinned.fbs[:m], pinned.fue[:m], pinned.fue_radius)
    return generate_layout(
        m,
        layout.spacing_m,
        layout.fue_radius_m,
        Position(*layout.mbs_position),
        Position(*layout.mue_position),
        seed,
        fue_min_distance=layout.fue_min_distance_m,
    )


def ring_index(d: float, radii: Sequence[float]) -> int:
    """Number of radii strictly below d; a distance on a boundary belongs to the inner ring."""
    if not radii:
        raise DomainError("ring radii must not be empty")
    if d < 0:
        raise DomainError(f"distance must be non-negative, got {d}")
    return bisect.bisect_left(radii, d)


def agent_state(fbs: Position, mbs: Position, mue: Position, radii: RingRadii) -> AgentState:
    return AgentState(
        ring_index(fbs.distance_to(mbs), radii.mbs_radii),
        ring_index(fbs.distance_to(mue), radii.mue_radii),
    )


def beta(fbs: Position, mue: Position, d_th: float) -> float:
    """FBS-to-MUE distance normalized by d_th."""
    if d_th <= 0:
        raise DomainError(f"d_th must be positive, got {d_th}")
    d = fbs.distance_to(mue)
    if d == 0:
        raise DomainError("FBS coincides with the MUE; beta would be zero")
    return d / d_th
